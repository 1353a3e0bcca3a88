"""Closed-form classification losses and their derivatives.

Every loss in the catalogue is split into two one-argument terms of the
predicted probability ``y_hat``:

* the *positive* term, charged when the target is 1 (zero at ``y_hat = 1``),
* the *negative* term, charged when the target is 0 (zero at ``y_hat = 0``).

A full loss is ``y * pos(y_hat) + (1 - y) * neg(y_hat)``; a single-sided loss
keeps only ``y * pos(y_hat)``.  For ``y`` in {0, 1} this is algebraically the
same as writing the trailing ``-1`` bias outside both terms.

Each term is evaluated in whichever of ``y_hat`` or ``1 - y_hat`` is small
near its own zero, so values close to the target keep full relative precision
instead of cancelling against the bias.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, EmptyRegion, InvalidSpec, InvalidTarget, NotOneHot

DEFAULT_EPS = 1e-7
HALF_PI = 0.5 * math.pi


class Family(str, enum.Enum):
    CROSS_ENTROPY = "cross_entropy"
    M = "m"
    L = "l"
    TAN = "tan"
    SEC = "sec"
    PARAM_M = "param_m"
    PARAM_L = "param_l"
    TWO_PARAM_L = "two_param_l"
    PARAM_LOG = "param_log"


class Variant(str, enum.Enum):
    SINGLE = "single"
    FULL = "full"


_ALPHA_FAMILIES = {Family.PARAM_M, Family.PARAM_L, Family.TWO_PARAM_L, Family.PARAM_LOG}
_DEFAULT_ALPHA = {
    Family.PARAM_M: 2.0,
    Family.PARAM_L: 3.0,
    Family.TWO_PARAM_L: 2.0,
    Family.PARAM_LOG: math.e,
}
_DEFAULT_BETA = 1.0

_FAMILY_ALIASES = {
    "ce": Family.CROSS_ENTROPY,
    "bce": Family.CROSS_ENTROPY,
    "crossentropy": Family.CROSS_ENTROPY,
    "m": Family.M,
    "l": Family.L,
    "tan": Family.TAN,
    "sec": Family.SEC,
    "paramm": Family.PARAM_M,
    "paraml": Family.PARAM_L,
    "twoparaml": Family.TWO_PARAM_L,
    "paramlog": Family.PARAM_LOG,
    "paramce": Family.PARAM_LOG,
    "paramcrossentropy": Family.PARAM_LOG,
}

_VARIANT_ALIASES = {
    "single": Variant.SINGLE,
    "singlesided": Variant.SINGLE,
    "full": Variant.FULL,
}


def parse_family(name: str | Family) -> Family:
    if isinstance(name, Family):
        return name
    key = str(name).lower().replace("_", "").replace("-", "").replace(" ", "")
    try:
        return _FAMILY_ALIASES[key]
    except KeyError:
        raise InvalidSpec(f"unknown loss family {name!r}") from None


def parse_variant(name: str | Variant) -> Variant:
    if isinstance(name, Variant):
        return name
    key = str(name).lower().replace("_", "").replace("-", "")
    try:
        return _VARIANT_ALIASES[key]
    except KeyError:
        raise InvalidSpec(f"unknown loss variant {name!r}") from None


def _fmt(x: float) -> str:
    short = f"{x:g}"
    return short if float(short) == x else repr(x)


@dataclass(frozen=True)
class LossSpec:
    """A fully parameterised member of the loss catalogue.

    ``alpha`` and ``beta`` fall back to per-family defaults when omitted and
    must stay ``None`` for families that take no parameter.
    """

    family: Family
    variant: Variant = Variant.FULL
    alpha: float | None = None
    beta: float | None = None
    eps_clamp: float = DEFAULT_EPS

    def __post_init__(self):
        family = parse_family(self.family)
        variant = parse_variant(self.variant)
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "variant", variant)

        if family is Family.SEC and variant is Variant.SINGLE:
            raise InvalidSpec("Sec loss has no single-sided variant")

        alpha, beta = self.alpha, self.beta
        if family in _ALPHA_FAMILIES:
            alpha = _DEFAULT_ALPHA[family] if alpha is None else float(alpha)
            if not math.isfinite(alpha) or alpha <= 0:
                raise InvalidSpec(f"alpha must be a positive finite number, got {alpha}")
            if family is Family.PARAM_LOG:
                if alpha == 1:
                    raise InvalidSpec("alpha must not equal 1 (logarithm base)")
                if alpha < 1:
                    raise InvalidSpec("alpha must be greater than 1 (a base below 1 flips the loss sign)")
        elif alpha is not None:
            raise InvalidSpec(f"alpha is not a parameter of the {family.value} loss")

        if family is Family.TWO_PARAM_L:
            beta = _DEFAULT_BETA if beta is None else float(beta)
            if not math.isfinite(beta) or beta <= 0:
                raise InvalidSpec(f"beta must be a positive finite number, got {beta}")
        elif beta is not None:
            raise InvalidSpec(f"beta is not a parameter of the {family.value} loss")

        eps = float(self.eps_clamp)
        if not 0 < eps < 0.5:
            raise InvalidSpec(f"eps_clamp must lie in (0, 0.5), got {eps}")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "eps_clamp", eps)

    @property
    def name(self) -> str:
        """Compact round-trippable label, e.g. ``full:two_param_l:alpha=2,beta=0.5``."""
        parts = [self.variant.value, self.family.value]
        params = []
        if self.alpha is not None:
            params.append(f"alpha={_fmt(self.alpha)}")
        if self.beta is not None:
            params.append(f"beta={_fmt(self.beta)}")
        if self.eps_clamp != DEFAULT_EPS:
            params.append(f"eps={_fmt(self.eps_clamp)}")
        if params:
            parts.append(",".join(params))
        return ":".join(parts)

    def __str__(self) -> str:
        return self.name

    @classmethod
    def parse(cls, text: str) -> "LossSpec":
        """Inverse of :attr:`name`; variant and parameters are optional.

        ``"m"``, ``"single:l"``, ``"l:single"`` and
        ``"two_param_l:alpha=2,beta=0.5"`` are all accepted.
        """
        family = None
        variant = Variant.FULL
        kwargs = {}
        for token in str(text).split(":"):
            token = token.strip()
            if not token:
                continue
            if "=" in token:
                for item in token.split(","):
                    key, _, value = item.partition("=")
                    key = key.strip().lower()
                    if key == "eps":
                        key = "eps_clamp"
                    if key not in ("alpha", "beta", "eps_clamp"):
                        raise InvalidSpec(f"unknown loss parameter {key!r}")
                    try:
                        kwargs[key] = float(value)
                    except ValueError:
                        raise InvalidSpec(f"{key} must be numeric, got {value!r}") from None
            elif token.lower().replace("-", "").replace("_", "") in _VARIANT_ALIASES:
                variant = parse_variant(token)
            elif family is None:
                family = parse_family(token)
            else:
                raise InvalidSpec(f"cannot parse loss spec {text!r}")
        if family is None:
            raise InvalidSpec(f"loss spec {text!r} names no family")
        return cls(family, variant, **kwargs)

    def to_dict(self) -> dict:
        return {
            "family": self.family.value,
            "variant": self.variant.value,
            "alpha": self.alpha,
            "beta": self.beta,
            "eps_clamp": self.eps_clamp,
        }

    @classmethod
    def from_dict(cls, d) -> "LossSpec":
        if isinstance(d, str):
            return cls.parse(d)
        return cls(
            d["family"],
            d.get("variant", "full"),
            alpha=d.get("alpha"),
            beta=d.get("beta"),
            eps_clamp=d.get("eps_clamp", DEFAULT_EPS),
        )


def catalogue() -> list[LossSpec]:
    """Every (family, variant) pair the catalogue defines, at default parameters."""
    specs = []
    for family in Family:
        for variant in Variant:
            if family is Family.SEC and variant is Variant.SINGLE:
                continue
            if family is Family.CROSS_ENTROPY and variant is Variant.SINGLE:
                continue
            specs.append(LossSpec(family, variant))
    return specs


def parametrized_catalogue() -> list[LossSpec]:
    """The parametrised families swept over alpha in {1, 2, 3}, beta in {0.5, 1, 2}."""
    specs = []
    for variant in Variant:
        for alpha in (1.0, 2.0, 3.0):
            specs.append(LossSpec(Family.PARAM_M, variant, alpha=alpha))
            specs.append(LossSpec(Family.PARAM_L, variant, alpha=alpha))
            for beta in (0.5, 1.0, 2.0):
                specs.append(LossSpec(Family.TWO_PARAM_L, variant, alpha=alpha, beta=beta))
        for alpha in (2.0, math.e, 3.0):
            specs.append(LossSpec(Family.PARAM_LOG, variant, alpha=alpha))
    return specs


# ---------------------------------------------------------------------------
# term kernels: each returns (value, derivative wrt y_hat) on a clamped array
# ---------------------------------------------------------------------------


def _log_one_minus_pow(log_base, alpha):
    """log(1 - b**alpha) given log(b), accurate whether b**alpha is near 0 or 1."""
    bp = np.exp(alpha * log_base)
    with np.errstate(divide="ignore", invalid="ignore"):
        near_one = np.log(-np.expm1(alpha * log_base))
        near_zero = np.log1p(-bp)
    return np.where(bp < 0.5, near_zero, near_one)


def _power_terms(log_big, alpha, beta, sign):
    # (1 - big**alpha)**(-beta) - 1 where big = 1 - small.
    log_w = _log_one_minus_pow(log_big, alpha)
    value = np.expm1(-beta * log_w)
    grad = sign * alpha * beta * np.exp((alpha - 1.0) * log_big - (beta + 1.0) * log_w)
    return value, grad


def _pos_terms(spec: LossSpec, yh, u, log_yh, log_u):
    fam = spec.family
    if fam is Family.CROSS_ENTROPY:
        return -log_yh, -1.0 / yh
    if fam is Family.M:
        return u / yh, -1.0 / (yh * yh)
    if fam is Family.PARAM_M:
        a = spec.alpha
        return np.expm1(-a * log_yh), -a * np.exp(-(a + 1.0) * log_yh)
    if fam is Family.L:
        # 1 - (1 - yh)**2 written two ways so that neither end cancels.
        log_w = np.where(yh <= 0.5, np.log(yh * (2.0 - yh)), np.log1p(-u * u))
        value = np.expm1(-0.5 * log_w)
        return value, -u * np.exp(-1.5 * log_w)
    if fam is Family.PARAM_L:
        return _power_terms(log_u, spec.alpha, 0.5, -1.0)
    if fam is Family.TWO_PARAM_L:
        return _power_terms(log_u, spec.alpha, spec.beta, -1.0)
    if fam is Family.TAN:
        # tan(pi (1 - yh) / 2) == cot(pi yh / 2); pick the argument away from the pole.
        value = np.where(yh <= 0.5, 1.0 / np.tan(HALF_PI * yh), np.tan(HALF_PI * u))
        return value, -HALF_PI * (1.0 + value * value)
    if fam is Family.SEC:
        # csc(pi yh / 2) - 1; near yh = 1 use 1 - cos(x) = 2 sin^2(x / 2).
        s = np.where(yh <= 0.5, np.sin(HALF_PI * yh), np.cos(HALF_PI * u))
        c = np.where(yh <= 0.5, np.cos(HALF_PI * yh), np.sin(HALF_PI * u))
        value = np.where(
            yh <= 0.5, 1.0 / s - 1.0, 2.0 * np.sin(0.5 * HALF_PI * u) ** 2 / s
        )
        return value, -HALF_PI * c / (s * s)
    if fam is Family.PARAM_LOG:
        ln_a = math.log(spec.alpha)
        return -log_yh / ln_a, -1.0 / (yh * ln_a)
    raise InvalidSpec(f"unhandled family {fam}")  # pragma: no cover


def _neg_terms(spec: LossSpec, yh, u, log_yh, log_u):
    fam = spec.family
    if fam is Family.CROSS_ENTROPY:
        return -log_u, 1.0 / u
    if fam is Family.M:
        return yh / u, 1.0 / (u * u)
    if fam is Family.PARAM_M:
        a = spec.alpha
        return np.expm1(-a * log_u), a * np.exp(-(a + 1.0) * log_u)
    if fam is Family.L:
        log_w = np.where(yh >= 0.5, np.log(u * (1.0 + yh)), np.log1p(-yh * yh))
        value = np.expm1(-0.5 * log_w)
        return value, yh * np.exp(-1.5 * log_w)
    if fam is Family.PARAM_L:
        return _power_terms(log_yh, spec.alpha, 0.5, 1.0)
    if fam is Family.TWO_PARAM_L:
        return _power_terms(log_yh, spec.alpha, spec.beta, 1.0)
    if fam is Family.TAN:
        value = np.where(yh <= 0.5, np.tan(HALF_PI * yh), 1.0 / np.tan(HALF_PI * u))
        return value, HALF_PI * (1.0 + value * value)
    if fam is Family.SEC:
        # sec(pi yh / 2) - 1
        c = np.where(yh <= 0.5, np.cos(HALF_PI * yh), np.sin(HALF_PI * u))
        s = np.where(yh <= 0.5, np.sin(HALF_PI * yh), np.cos(HALF_PI * u))
        value = np.where(
            yh <= 0.5, 2.0 * np.sin(0.5 * HALF_PI * yh) ** 2 / c, 1.0 / c - 1.0
        )
        return value, HALF_PI * s / (c * c)
    if fam is Family.PARAM_LOG:
        ln_a = math.log(spec.alpha)
        return -log_u / ln_a, 1.0 / (u * ln_a)
    raise InvalidSpec(f"unhandled family {fam}")  # pragma: no cover


def clamp(spec: LossSpec, y_hat):
    eps = spec.eps_clamp
    return np.clip(np.asarray(y_hat, dtype=np.float64), eps, 1.0 - eps)


def _check_targets(y):
    y = np.asarray(y, dtype=np.float64)
    if not np.all((y == 0.0) | (y == 1.0)):
        raise InvalidTarget("targets must be exactly 0 or 1")
    return y


def _evaluate(spec: LossSpec, y, y_hat):
    y = _check_targets(y)
    yh = clamp(spec, y_hat)
    y, yh = np.broadcast_arrays(y, yh)
    u = 1.0 - yh
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        log_yh = np.log(yh)
        log_u = np.log1p(-yh)
        pos_v, pos_g = _pos_terms(spec, yh, u, log_yh, log_u)
        if spec.variant is Variant.FULL:
            neg_v, neg_g = _neg_terms(spec, yh, u, log_yh, log_u)
        else:
            neg_v = neg_g = np.zeros_like(yh)
    is_pos = y == 1.0
    return np.where(is_pos, pos_v, neg_v), np.where(is_pos, pos_g, neg_g)


def _scalarize(a):
    return float(a) if np.ndim(a) == 0 else a


def eval_loss(spec: LossSpec, y, y_hat):
    """Loss ``l(y, y_hat)``; broadcasts over arrays, ``y_hat`` is clamped first."""
    return _scalarize(_evaluate(spec, y, y_hat)[0])


def grad_loss(spec: LossSpec, y, y_hat):
    """``d l / d y_hat`` at the clamped prediction."""
    return _scalarize(_evaluate(spec, y, y_hat)[1])


def loss_and_grad(spec: LossSpec, y, y_hat):
    value, grad = _evaluate(spec, y, y_hat)
    return _scalarize(value), _scalarize(grad)


def _check_multiclass(targets, outputs):
    t = np.asarray(targets, dtype=np.float64)
    o = np.asarray(outputs, dtype=np.float64)
    if t.shape != o.shape or t.ndim not in (1, 2):
        raise DimensionMismatch(f"targets {t.shape} and outputs {o.shape} differ")
    if not np.all((t == 0.0) | (t == 1.0)) or not np.all(t.sum(axis=-1) == 1.0):
        raise NotOneHot("targets must be one-hot along the last axis")
    return t, o


def multiclass_loss(spec: LossSpec, targets, outputs):
    """Sum of per-component losses; a 2-D input gives one value per row."""
    t, o = _check_multiclass(targets, outputs)
    value, _ = _evaluate(spec, t, o)
    return _scalarize(value.sum(axis=-1))


def multiclass_grad(spec: LossSpec, targets, outputs):
    t, o = _check_multiclass(targets, outputs)
    return _evaluate(spec, t, o)[1]


# ---------------------------------------------------------------------------
# strictness
# ---------------------------------------------------------------------------


class Verdict(str, enum.Enum):
    L1_STRICTER = "l1_stricter"
    L2_STRICTER = "l2_stricter"
    EQUAL = "equal"
    INCOMPARABLE = "incomparable"


@dataclass
class StrictnessVerdict:
    verdict: Verdict
    # (y, y_hat, g1, g2) where l1 falls below l2 and where it rises above it.
    l1_below: list = field(default_factory=list)
    l1_above: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "l1_below": [list(w) for w in self.l1_below],
            "l1_above": [list(w) for w in self.l1_above],
        }


@dataclass
class StrictnessReport:
    l1: LossSpec
    l2: LossSpec
    literal: StrictnessVerdict
    magnitude: StrictnessVerdict

    def to_dict(self) -> dict:
        return {
            "l1": self.l1.name,
            "l2": self.l2.name,
            "literal": self.literal.to_dict(),
            "magnitude": self.magnitude.to_dict(),
        }


def _dominance(ys, grid, g1, g2, rtol, max_witnesses):
    scale = np.maximum(np.abs(g1), np.abs(g2))
    tol = rtol * scale
    below = g1 < g2 - tol
    above = g1 > g2 + tol

    def witnesses(mask):
        idx = np.flatnonzero(mask)[:max_witnesses]
        return [(float(ys[i]), float(grid[i]), float(g1[i]), float(g2[i])) for i in idx]

    if not below.any() and not above.any():
        verdict = Verdict.EQUAL
    elif not below.any():
        verdict = Verdict.L1_STRICTER
    elif not above.any():
        verdict = Verdict.L2_STRICTER
    else:
        verdict = Verdict.INCOMPARABLE
    return StrictnessVerdict(verdict, witnesses(below), witnesses(above))


def compare_strictness(
    l1: LossSpec,
    l2: LossSpec,
    grid=None,
    targets=(0, 1),
    rtol: float = 1e-12,
    max_witnesses: int = 5,
) -> StrictnessReport:
    """Order two losses by gradient dominance over ``grid`` for each target.

    Two readings are reported side by side: the signed comparison
    ``dl1/dy_hat >= dl2/dy_hat`` and the magnitude comparison
    ``|dl1/dy_hat| >= |dl2/dy_hat|``.  For target 1 both derivatives are
    negative, so the signed reading ranks the gentler loss as the stricter.
    """
    if grid is None:
        eps = max(l1.eps_clamp, l2.eps_clamp)
        grid = np.linspace(eps, 1.0 - eps, 1024)
    grid = np.asarray(grid, dtype=np.float64).ravel()
    targets = list(targets)
    if grid.size == 0 or not targets:
        raise EmptyRegion("strictness region has no points")
    ys = np.repeat(np.asarray(targets, dtype=np.float64), grid.size)
    pts = np.tile(grid, len(targets))
    g1 = np.asarray(grad_loss(l1, ys, pts))
    g2 = np.asarray(grad_loss(l2, ys, pts))
    return StrictnessReport(
        l1,
        l2,
        literal=_dominance(ys, pts, g1, g2, rtol, max_witnesses),
        magnitude=_dominance(ys, pts, np.abs(g1), np.abs(g2), rtol, max_witnesses),
    )


# ---------------------------------------------------------------------------
# property probes
# ---------------------------------------------------------------------------

ZERO_TOL = 1e-5
GRAD_TOL = 1e-5
CONVEXITY_SLACK = 1e-6
DIVERGENCE_THRESHOLD = 1e3
FD_STEP = 1e-6
PROPERTY_NAMES = ("zero_at_target", "convexity", "divergence", "gradient")


@dataclass
class PropertyResult:
    name: str
    passed: bool
    detail: str = ""
    witnesses: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "detail": self.detail,
            "witnesses": [list(w) for w in self.witnesses],
        }


@dataclass
class PropertyReport:
    spec: LossSpec
    grid_size: int
    results: dict

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results.values())

    def __getitem__(self, name) -> PropertyResult:
        return self.results[name]

    def to_dict(self) -> dict:
        return {
            "loss": self.spec.name,
            "grid_size": self.grid_size,
            "passed": self.passed,
            "properties": [r.to_dict() for r in self.results.values()],
        }


def _active_targets(spec):
    return (1, 0) if spec.variant is Variant.FULL else (1,)


def _decade_growth(spec, y, eps):
    """Loss increments over successive decades of distance to the wrong target."""
    k_max = math.floor(-math.log10(eps))
    dist = np.concatenate([10.0 ** -np.arange(1, k_max + 1), [eps]])
    dist = np.unique(dist)[::-1]
    pts = dist if y == 1 else 1.0 - dist
    values = np.asarray(eval_loss(spec, np.full(pts.shape, float(y)), pts))
    return dist, np.diff(values)


def probe_properties(
    spec: LossSpec,
    grid_size: int = 1024,
    zero_tol: float = ZERO_TOL,
    convexity_slack: float = CONVEXITY_SLACK,
    divergence_threshold: float = DIVERGENCE_THRESHOLD,
    grad_tol: float = GRAD_TOL,
    fd_step: float = FD_STEP,
    max_witnesses: int = 5,
) -> PropertyReport:
    """Numerically check the four loss axioms on a uniform clamped grid.

    ``divergence`` passes when the loss at the clamp boundary exceeds
    ``divergence_threshold``.  Logarithmic losses never reach that in double
    precision, so the check also accepts sustained growth: every decade of
    approach to the wrong target must raise the loss, and the last decade by
    at least half as much as the first.  Bounded losses fail this because
    their increments shrink geometrically.

    The gradient comparison skips points closer than ``1e-3`` to either end,
    where a central difference with ``fd_step`` would itself be inaccurate.
    """
    if grid_size < 16:
        raise ValueError("grid_size must be at least 16")
    eps = spec.eps_clamp
    grid = np.linspace(eps, 1.0 - eps, grid_size)
    targets = _active_targets(spec)
    results = {}

    # zero at target
    bad = []
    for y in (0, 1):
        at = eps if y == 0 else 1.0 - eps
        v = eval_loss(spec, y, at)
        if not (0.0 <= v < zero_tol):
            bad.append((y, at, v))
    if spec.variant is Variant.SINGLE:
        zeros = np.asarray(eval_loss(spec, np.zeros_like(grid), grid))
        idx = np.flatnonzero(zeros != 0.0)
        bad.extend((0, float(grid[i]), float(zeros[i])) for i in idx)
    results["zero_at_target"] = PropertyResult(
        "zero_at_target", not bad, f"tolerance {zero_tol:g}", bad[:max_witnesses]
    )

    # convexity via second differences
    bad = []
    for y in targets:
        v = np.asarray(eval_loss(spec, np.full(grid.shape, float(y)), grid))
        second = v[2:] - 2.0 * v[1:-1] + v[:-2]
        idx = np.flatnonzero(~(second >= -convexity_slack))
        bad.extend((y, float(grid[i + 1]), float(second[i])) for i in idx)
    results["convexity"] = PropertyResult(
        "convexity", not bad, f"second differences >= {-convexity_slack:g}", bad[:max_witnesses]
    )

    # monotone growth toward the wrong target, then divergence
    bad = []
    routes = []
    for y in targets:
        v = np.asarray(eval_loss(spec, np.full(grid.shape, float(y)), grid))
        step = np.diff(v)
        mono_bad = step >= 0.0 if y == 1 else step <= 0.0
        idx = np.flatnonzero(mono_bad)
        bad.extend((y, float(grid[i + 1]), float(step[i])) for i in idx)
        boundary = float(v[0] if y == 1 else v[-1])
        if boundary > divergence_threshold:
            routes.append(f"y={y}: boundary loss {boundary:.6g} > {divergence_threshold:g}")
            continue
        _, inc = _decade_growth(spec, y, eps)
        if np.all(inc > 0.0) and inc[-1] >= 0.5 * inc[0]:
            routes.append(
                f"y={y}: boundary loss {boundary:.6g}, sustained growth "
                f"(last decade {inc[-1]:.4g} vs first {inc[0]:.4g})"
            )
        else:
            routes.append(f"y={y}: bounded near the wrong target ({boundary:.6g})")
            bad.append((y, eps if y == 1 else 1.0 - eps, boundary))
    results["divergence"] = PropertyResult("divergence", not bad, "; ".join(routes), bad[:max_witnesses])

    # analytic vs central-difference gradient
    inner = grid[(grid >= 1e-3) & (grid <= 1.0 - 1e-3)]
    bad = []
    for y in targets:
        yy = np.full(inner.shape, float(y))
        g = np.asarray(grad_loss(spec, yy, inner))
        fd = (np.asarray(eval_loss(spec, yy, inner + fd_step)) - np.asarray(eval_loss(spec, yy, inner - fd_step))) / (2.0 * fd_step)
        err = np.abs(g - fd) / np.maximum(1.0, np.abs(g))
        idx = np.flatnonzero(~(err < grad_tol))
        bad.extend((y, float(inner[i]), float(err[i])) for i in idx)
    results["gradient"] = PropertyResult(
        "gradient", not bad, f"relative error < {grad_tol:g}, step {fd_step:g}", bad[:max_witnesses]
    )
    return PropertyReport(spec, grid_size, results)


# ---------------------------------------------------------------------------
# curve export
# ---------------------------------------------------------------------------


def export_loss_curve(spec: LossSpec, y: int, n_points: int) -> np.ndarray:
    """``(n_points, 3)`` array of ``y_hat, loss, grad`` over the clamped domain."""
    if n_points < 2:
        raise ValueError("n_points must be at least 2")
    if y not in (0, 1):
        raise InvalidTarget("y must be 0 or 1")
    eps = spec.eps_clamp
    grid = np.linspace(eps, 1.0 - eps, n_points)
    value, grad = loss_and_grad(spec, np.full(grid.shape, float(y)), grid)
    return np.column_stack([grid, value, grad])


def format_decimal(x: float) -> str:
    """Positional decimal with 17 significant digits, trailing zeros trimmed."""
    if not math.isfinite(x):
        return repr(float(x))
    return np.format_float_positional(float(x), precision=17, unique=False, fractional=False, trim="-")


def curve_to_csv(curve: np.ndarray) -> str:
    lines = ["y_hat,loss,grad"]
    for row in curve:
        lines.append(",".join(format_decimal(v) for v in row))
    return "\n".join(lines) + "\n"


def write_loss_curve(path, spec: LossSpec, y: int, n_points: int) -> np.ndarray:
    curve = export_loss_curve(spec, y, n_points)
    with open(path, "w", newline="") as fh:
        fh.write(curve_to_csv(curve))
    return curve
