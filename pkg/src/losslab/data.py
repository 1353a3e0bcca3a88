"""Small classification datasets: synthetic generators, CSV I/O and splits."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BadCenters, DegenerateSplit, MissingColumn, NonNumericFeature, ParseError


@dataclass(frozen=True, eq=False)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    class_count: int
    feature_names: tuple | None = None
    # original label values in encoded order, e.g. ("cat", "dog")
    label_names: tuple | None = None
    label_column: str = field(default="label")

    def __post_init__(self):
        x = np.asarray(self.features, dtype=np.float64)
        y = np.asarray(self.labels, dtype=np.int64)
        if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.shape[0]:
            raise ValueError(f"features {x.shape} and labels {y.shape} are inconsistent")
        if x.shape[0] < 1:
            raise ValueError("a dataset needs at least one sample")
        if self.class_count < 2:
            raise ValueError("class_count must be at least 2")
        if y.min() < 0 or y.max() >= self.class_count:
            raise ValueError(f"labels must lie in [0, {self.class_count})")
        if not np.all(np.isfinite(x)):
            raise ValueError("features must be finite")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y)
        if self.feature_names is not None:
            object.__setattr__(self, "feature_names", tuple(self.feature_names))
        if self.label_names is not None:
            object.__setattr__(self, "label_names", tuple(self.label_names))

    def __len__(self):
        return self.labels.shape[0]

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.class_count == other.class_count
            and self.feature_names == other.feature_names
            and self.label_names == other.label_names
            and np.array_equal(self.features, other.features)
            and np.array_equal(self.labels, other.labels)
        )

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def one_hot(self) -> np.ndarray:
        return one_hot(self.labels, self.class_count)

    def subset(self, idx) -> "Dataset":
        return Dataset(
            self.features[idx],
            self.labels[idx],
            self.class_count,
            self.feature_names,
            self.label_names,
            self.label_column,
        )

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.class_count)


def one_hot(labels, class_count: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    if labels.ndim != 1 or (labels.size and (labels.min() < 0 or labels.max() >= class_count)):
        raise ValueError(f"labels must be a 1-D array in [0, {class_count})")
    out = np.zeros((labels.size, class_count))
    out[np.arange(labels.size), labels] = 1.0
    return out


def argmax(onehot) -> np.ndarray:
    return np.argmax(np.asarray(onehot), axis=1)


def gen_two_moons(n: int, noise_sd: float = 0.0, seed=0) -> Dataset:
    """Two interleaved unit half-circles.

    Class 0 lies on the upper arc centred at (0, 0), class 1 on the lower arc
    centred at (1, 0.5).  Gaussian noise of ``noise_sd`` is added to both
    coordinates and the rows are shuffled.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if noise_sd < 0:
        raise ValueError("noise_sd must be non-negative")
    rng = np.random.default_rng(seed)
    n0 = (n + 1) // 2
    n1 = n - n0
    t0 = np.linspace(0.0, math.pi, n0)
    t1 = np.linspace(0.0, math.pi, n1)
    upper = np.column_stack([np.cos(t0), np.sin(t0)])
    lower = np.column_stack([1.0 - np.cos(t1), 0.5 - np.sin(t1)])
    x = np.vstack([upper, lower])
    y = np.concatenate([np.zeros(n0, dtype=np.int64), np.ones(n1, dtype=np.int64)])
    if noise_sd > 0:
        x = x + rng.normal(scale=noise_sd, size=x.shape)
    order = rng.permutation(n)
    return Dataset(x[order], y[order], 2, ("x0", "x1"))


def gen_gaussian_blobs(n: int, centers, sd: float = 1.0, seed=0) -> Dataset:
    """Isotropic Gaussian clusters, one class per centre, sizes within one of each other."""
    centers = np.asarray(centers, dtype=np.float64)
    if centers.ndim != 2 or centers.shape[0] < 2:
        raise BadCenters("need at least two centres given as rows of equal length")
    if not np.all(np.isfinite(centers)):
        raise BadCenters("centres must be finite")
    if sd < 0:
        raise ValueError("sd must be non-negative")
    k, dim = centers.shape
    if n < k:
        raise ValueError(f"n={n} cannot populate {k} classes")
    rng = np.random.default_rng(seed)
    sizes = np.full(k, n // k)
    sizes[: n % k] += 1
    y = np.repeat(np.arange(k), sizes)
    x = centers[y] + rng.normal(scale=sd, size=(n, dim))
    order = rng.permutation(n)
    return Dataset(x[order], y[order], k, tuple(f"x{i}" for i in range(dim)))


def split(ds: Dataset, test_fraction: float, seed=0):
    """Stratified shuffle split; each class contributes ``round(fraction * count)`` test rows."""
    if not 0 < test_fraction < 1:
        raise DegenerateSplit("test_fraction must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    train_idx, test_idx = [], []
    for c in range(ds.class_count):
        idx = np.flatnonzero(ds.labels == c)
        if idx.size == 0:
            continue
        idx = rng.permutation(idx)
        n_test = int(round(test_fraction * idx.size))
        test_idx.append(idx[:n_test])
        train_idx.append(idx[n_test:])
    train_idx = np.concatenate(train_idx)
    test_idx = np.concatenate(test_idx)
    if train_idx.size == 0 or test_idx.size == 0:
        raise DegenerateSplit(f"split leaves {train_idx.size} train and {test_idx.size} test rows")
    return ds.subset(rng.permutation(train_idx)), ds.subset(rng.permutation(test_idx))


def _parse_float(text, row, col):
    try:
        value = float(text)
    except ValueError:
        raise NonNumericFeature(f"non-numeric feature value {text!r}", row=row, col=col) from None
    if not math.isfinite(value):
        raise NonNumericFeature(f"non-finite feature value {text!r}", row=row, col=col)
    return value


def load_csv(path, label_column=-1, has_header: bool = True) -> Dataset:
    """Read a comma-separated file.

    ``label_column`` is a header name or a zero-based index (negative indices
    count from the end).  Labels are encoded to ``0..C-1`` in order of first
    appearance.  Row numbers in errors are 1-based file lines.
    """
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(cell.strip() for cell in r)]
    header = None
    start_line = 1
    if has_header:
        if not rows:
            raise ParseError("EmptyData: file has no header and no rows")
        header = [h.strip() for h in rows[0]]
        rows = rows[1:]
        start_line = 2
    if not rows:
        raise ParseError("EmptyData: file has no data rows")

    width = len(header) if header is not None else len(rows[0])
    if isinstance(label_column, str) and not label_column.lstrip("-").isdigit():
        if header is None or label_column not in header:
            raise MissingColumn(f"label column {label_column!r} not found")
        label_idx = header.index(label_column)
    else:
        label_idx = int(label_column)
        if not -width <= label_idx < width:
            raise MissingColumn(f"label column index {label_idx} out of range for {width} columns")
        label_idx %= width

    feature_cols = [c for c in range(width) if c != label_idx]
    features, raw_labels = [], []
    for offset, row in enumerate(rows):
        line = start_line + offset
        if len(row) != width:
            raise ParseError(f"expected {width} fields, found {len(row)}", row=line)
        features.append([_parse_float(row[c].strip(), line, c) for c in feature_cols])
        raw_labels.append(row[label_idx].strip())

    mapping = {}
    for value in raw_labels:
        mapping.setdefault(value, len(mapping))
    if len(mapping) < 2:
        raise ParseError(f"need at least two distinct labels, found {len(mapping)}")
    labels = np.array([mapping[v] for v in raw_labels], dtype=np.int64)
    names = tuple(header[c] for c in feature_cols) if header is not None else None
    return Dataset(
        np.array(features, dtype=np.float64).reshape(len(rows), len(feature_cols)),
        labels,
        len(mapping),
        names,
        tuple(mapping),
        header[label_idx] if header is not None else "label",
    )


def write_csv(ds: Dataset, path, has_header: bool = True) -> None:
    """Write features then the label column; floats use shortest round-trip repr."""
    names = ds.feature_names or tuple(f"x{i}" for i in range(ds.n_features))
    label_values = ds.label_names or tuple(str(i) for i in range(ds.class_count))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if has_header:
            w.writerow([*names, ds.label_column])
        for row, label in zip(ds.features, ds.labels):
            w.writerow([repr(float(v)) for v in row] + [label_values[label]])
