import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from losslab.errors import BadShape, DimensionMismatch, EmptyBatch
from losslab.losses import LossSpec, catalogue
from losslab.network import (
    Network,
    backward,
    batch_loss,
    finite_diff_grad,
    forward,
    init_network,
    load_network,
    predict,
    save_network,
)


def rel_err(a, b, floor=1e-8):
    return np.abs(a - b) / np.maximum(floor, np.maximum(np.abs(a), np.abs(b)))


@pytest.fixture
def tiny():
    net = init_network([2, 3, 2], "tanh", seed=11)
    rng = np.random.default_rng(5)
    x = rng.normal(size=(8, 2))
    t = np.eye(2)[rng.integers(0, 2, size=8)]
    return net, x, t


def zero_net(sizes, head=None):
    net = init_network(sizes, "relu", head, seed=0)
    return net.with_params([np.zeros_like(p) for p in net.params()])


def test_init_deterministic():
    a = init_network([2, 4, 1], "relu", seed=7)
    b = init_network([2, 4, 1], "relu", seed=7)
    for p, q in zip(a.params(), b.params()):
        np.testing.assert_array_equal(p, q)
    c = init_network([2, 4, 1], "relu", seed=8)
    assert not np.array_equal(a.weights[0], c.weights[0])


def test_init_shapes_and_bounds():
    net = init_network([2, 4, 1], "relu", seed=7)
    assert [w.shape for w in net.weights] == [(4, 2), (1, 4)]
    assert net.output_head == "sigmoid"
    assert np.all(np.abs(net.weights[0]) <= np.sqrt(6 / 6))
    assert all(np.all(b == 0) for b in net.biases)


def test_init_rejects_single_layer():
    with pytest.raises(BadShape):
        init_network([3], "relu", seed=0)


@pytest.mark.parametrize(
    "sizes, head", [([2, 3, 2], "sigmoid"), ([2, 3, 1], "softmax"), ([2, 0, 2], None)]
)
def test_head_constraints(sizes, head):
    with pytest.raises(BadShape):
        init_network(sizes, "tanh", head, seed=0)


def test_bad_weight_shape():
    net = init_network([2, 3, 2], seed=0)
    with pytest.raises(BadShape):
        Network([2, 3, 2], "tanh", "softmax", [net.weights[0].T, net.weights[1]], net.biases)


def test_zero_sigmoid_net_outputs_half():
    net = zero_net([3, 5, 1])
    assert forward(net, [1.0, -2.0, 7.0]) == 0.5
    assert predict(net, [[1.0, 2.0, 3.0]])[0] == 0  # tie goes to class 0


def test_zero_softmax_net_uniform():
    net = zero_net([3, 4])
    np.testing.assert_array_equal(forward(net, [1.0, 2.0, 3.0]), [0.25] * 4)
    assert predict(net, [[1.0, 2.0, 3.0]])[0] == 0


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), scale=st.floats(0.1, 50.0))
def test_softmax_normalised(seed, scale):
    net = init_network([4, 6, 5], "sigmoid", seed=seed)
    x = np.random.default_rng(seed).normal(scale=scale, size=(10, 4))
    p = forward(net, x)
    np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-12)
    assert np.all((p >= 0) & (p <= 1))


def test_forward_dimension_mismatch():
    net = init_network([2, 3, 2], seed=0)
    with pytest.raises(DimensionMismatch):
        forward(net, [1.0, 2.0, 3.0])


def test_backward_errors(tiny):
    net, x, t = tiny
    with pytest.raises(EmptyBatch):
        backward(net, np.zeros((0, 2)), np.zeros((0, 2)), LossSpec("m"))
    with pytest.raises(DimensionMismatch):
        backward(net, x, t[:5], LossSpec("m"))
    with pytest.raises(DimensionMismatch):
        backward(net, x, np.eye(3)[[0] * 8], LossSpec("m"))


@pytest.mark.parametrize("spec", catalogue(), ids=[s.name for s in catalogue()])
def test_backward_matches_finite_differences(tiny, spec):
    net, x, t = tiny
    loss, g = backward(net, x, t, spec)
    assert loss == pytest.approx(batch_loss(net, x, t, spec), rel=1e-15)
    fd = finite_diff_grad(net, x, t, spec, h=1e-6)
    assert rel_err(g.flat(), fd.flat()).max() < 1e-4


@pytest.mark.parametrize("activation", ["relu", "sigmoid", "tanh"])
@pytest.mark.parametrize("head_sizes", [[3, 4, 1], [3, 4, 3]])
def test_backward_all_activations_and_heads(activation, head_sizes):
    net = init_network(head_sizes, activation, seed=3)
    rng = np.random.default_rng(1)
    x = rng.normal(size=(6, 3))
    c = max(2, head_sizes[-1])
    t = np.eye(c)[rng.integers(0, c, size=6)]
    for spec in (LossSpec("ce"), LossSpec("tan"), LossSpec("l", "single")):
        _, g = backward(net, x, t, spec)
        fd = finite_diff_grad(net, x, t, spec, h=1e-6)
        # relu kinks are measure-zero; none of these inputs sit on one
        assert rel_err(g.flat(), fd.flat(), floor=1e-7).max() < 1e-4


def test_sigmoid_head_accepts_binary_targets():
    net = init_network([2, 3, 1], "tanh", seed=2)
    x = np.array([[0.5, -1.0], [2.0, 0.3]])
    spec = LossSpec("m")
    a = backward(net, x, np.array([1, 0]), spec)
    b = backward(net, x, np.array([[0, 1], [1, 0]]), spec)
    assert a[0] == b[0]
    np.testing.assert_array_equal(a[1].flat(), b[1].flat())


def test_zero_loss_batch_has_tiny_gradient():
    # saturate the softmax towards class 1 for every input
    net = zero_net([2, 2])
    net.biases[-1][:] = [-40.0, 40.0]
    x = np.random.default_rng(0).normal(size=(4, 2))
    t = np.tile([0.0, 1.0], (4, 1))
    for spec in catalogue():
        loss, g = backward(net, x, t, spec)
        assert loss < 1e-5
        assert g.norm() < 1e-4


def test_duplicated_batch_same_mean(tiny):
    net, x, t = tiny
    spec = LossSpec("sec")
    l1, g1 = backward(net, x, t, spec)
    l2, g2 = backward(net, np.vstack([x, x]), np.vstack([t, t]), spec)
    assert l2 == pytest.approx(l1, rel=1e-14)
    np.testing.assert_allclose(g2.flat(), g1.flat(), rtol=1e-12, atol=1e-16)


def test_backward_does_not_mutate(tiny):
    net, x, t = tiny
    before = [p.copy() for p in net.params()]
    backward(net, x, t, LossSpec("tan"))
    finite_diff_grad(net, x, t, LossSpec("tan"))
    for p, q in zip(before, net.params()):
        np.testing.assert_array_equal(p, q)


def test_finite_diff_second_order_convergence():
    net = init_network([2, 3, 2], "tanh", seed=4)
    rng = np.random.default_rng(9)
    x = rng.normal(size=(8, 2))
    t = np.eye(2)[rng.integers(0, 2, size=8)]
    spec = LossSpec("tan")
    _, g = backward(net, x, t, spec)
    e1 = np.abs(finite_diff_grad(net, x, t, spec, h=1e-3).flat() - g.flat()).max()
    e2 = np.abs(finite_diff_grad(net, x, t, spec, h=5e-4).flat() - g.flat()).max()
    assert 3.0 < e1 / e2 < 5.0


def test_finite_diff_at_minimum_is_small():
    net = zero_net([2, 2])
    net.biases[-1][:] = [40.0, -40.0]
    x = np.ones((3, 2))
    t = np.tile([1.0, 0.0], (3, 1))
    fd = finite_diff_grad(net, x, t, LossSpec("m"), h=1e-4)
    assert np.abs(fd.flat()).max() < 1e-4


def test_finite_diff_step_range(tiny):
    net, x, t = tiny
    with pytest.raises(ValueError):
        finite_diff_grad(net, x, t, LossSpec("m"), h=1e-2)


def test_every_catalogue_loss_finite_on_extreme_outputs():
    net = zero_net([2, 3])
    net.biases[-1][:] = [900.0, -900.0, 0.0]
    x = np.zeros((2, 2))
    t = np.eye(3)[[1, 2]]
    for spec in catalogue():
        loss, g = backward(net, x, t, spec)
        assert np.isfinite(loss) and g.is_finite()


def test_json_round_trip_bit_exact(tmp_path):
    net = init_network([3, 7, 4], "sigmoid", seed=123)
    net.biases[0][:] = np.random.default_rng(0).normal(size=7) * 1e-300
    again = Network.from_json(net.to_json())
    for p, q in zip(net.params(), again.params()):
        assert p.tobytes() == q.tobytes()
    path = tmp_path / "net.json"
    save_network(net, path)
    doc = json.loads(path.read_text())
    assert doc["layer_sizes"] == [3, 7, 4]
    assert len(doc["weights"][0]) == 21  # row-major flat
    loaded = load_network(path)
    assert loaded.hidden_activation == "sigmoid"
    for p, q in zip(net.params(), loaded.params()):
        assert p.tobytes() == q.tobytes()
