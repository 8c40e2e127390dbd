"""Sample distance covariance and distance correlation.

All statistics here are V-statistics built from Euclidean distance
matrices raised to a configurable exponent.  With ``exponent=1`` they are
the usual distance covariance quantities; ``exponent=2`` gives squared
Euclidean distances.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numba
import numpy as np

ColumnSet = tuple[int, ...]


class DataError(ValueError):
    """Invalid input data or arguments."""


@dataclass(frozen=True)
class DCovConfig:
    """Numerical settings shared by every dependence computation.

    Parameters
    ----------
    exponent : float
        Power applied to Euclidean distances, in ``(0, 2]``.
    standardize : bool
        Whether callers should standardize features before use.
    eps : float
        Absolute tolerance for comparisons and tie detection.
    """

    exponent: float = 1.0
    standardize: bool = True
    eps: float = 1e-12

    def __post_init__(self) -> None:
        if not 0.0 < self.exponent <= 2.0:
            raise DataError(f"exponent must lie in (0, 2], got {self.exponent}")
        if not self.eps >= 0.0:
            raise DataError(f"eps must be nonnegative, got {self.eps}")


@dataclass(frozen=True)
class DataMatrix:
    """An ``n x p`` sample matrix with one name per column."""

    values: np.ndarray
    column_names: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2:
            raise DataError(f"expected a 2-d matrix, got shape {values.shape}")
        n, p = values.shape
        if n < 2:
            raise DataError(f"need at least 2 samples, got {n}")
        if p < 1:
            raise DataError("need at least one column")
        if not np.all(np.isfinite(values)):
            bad = np.argwhere(~np.isfinite(values))[0]
            raise DataError(f"non-finite value at row {bad[0]}, column {bad[1]}")
        names = tuple(self.column_names) or tuple(f"x{j}" for j in range(p))
        if len(names) != p:
            raise DataError(f"{len(names)} column names for {p} columns")
        if len(set(names)) != p:
            raise DataError("column names must be unique")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "column_names", tuple(str(c) for c in names))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    def columns(self, cols: Sequence[int]) -> np.ndarray:
        return self.values[:, list(cols)]

    def index_of(self, name: str) -> int:
        try:
            return self.column_names.index(name)
        except ValueError:
            raise DataError(f"unknown column {name!r}") from None

    def select(self, cols: Sequence[int]) -> "DataMatrix":
        cols = as_column_set(cols, self.p)
        return DataMatrix(self.values[:, list(cols)],
                          tuple(self.column_names[c] for c in cols))

    def hstack(self, other: "DataMatrix") -> "DataMatrix":
        if other.n != self.n:
            raise DataError(f"row counts differ: {self.n} vs {other.n}")
        return DataMatrix(np.hstack([self.values, other.values]),
                          self.column_names + other.column_names)


def as_column_set(indices: Iterable[int], p: int) -> ColumnSet:
    """Validate ``indices`` as an ordered, duplicate-free column selection."""
    cols = tuple(int(i) for i in indices)
    if len(set(cols)) != len(cols):
        raise DataError(f"duplicate column indices in {cols}")
    for c in cols:
        if not 0 <= c < p:
            raise DataError(f"column index {c} out of range [0, {p})")
    return cols


def _check_points(points) -> np.ndarray:
    x = np.asarray(points, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise DataError(f"expected points as an n x d matrix, got shape {x.shape}")
    if x.shape[0] < 2:
        raise DataError(f"need at least 2 points, got {x.shape[0]}")
    if not np.all(np.isfinite(x)):
        raise DataError("points contain NaN or Inf")
    return x


def _squared_distances(x: np.ndarray) -> np.ndarray:
    if x.shape[1] == 1:
        d = x[:, 0][:, None] - x[:, 0][None, :]
        return d * d
    sq = np.einsum("ij,ij->i", x, x)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.maximum(d2, 0.0, out=d2)
    np.fill_diagonal(d2, 0.0)
    return d2


def _power_of_squared(d2: np.ndarray, exponent: float) -> np.ndarray:
    if exponent == 2.0:
        return d2
    if exponent == 1.0:
        return np.sqrt(d2, out=d2)
    return np.power(d2, exponent / 2.0, out=d2)


def distance_matrix(points, exponent: float = 1.0) -> np.ndarray:
    """Pairwise Euclidean distances between rows, raised to ``exponent``.

    Examples
    --------
    >>> distance_matrix([[0.0], [1.0], [3.0]])
    array([[0., 1., 3.],
           [1., 0., 2.],
           [3., 2., 0.]])
    """
    x = _check_points(points)
    if x.shape[1] == 1:
        d = np.abs(x[:, 0][:, None] - x[:, 0][None, :])
        return d if exponent == 1.0 else d ** exponent
    return _power_of_squared(_squared_distances(x), exponent)


def double_center(d) -> np.ndarray:
    """Return ``J D J`` with ``J = I - 11^T/n``, computed from means."""
    d = np.asarray(d, dtype=np.float64)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise DataError(f"double centering needs a square matrix, got shape {d.shape}")
    row = d.mean(axis=1, keepdims=True)
    col = d.mean(axis=0, keepdims=True)
    return d - row - col + row.mean()


def centered_distances(points, exponent: float = 1.0) -> np.ndarray:
    """Double-centered distance matrix of the rows of ``points``."""
    d = distance_matrix(points, exponent)
    row = d.mean(axis=1)
    grand = row.mean()
    # d is symmetric, so row and column means coincide; center in place.
    d -= row[:, None]
    d -= row[None, :]
    d += grand
    return d


def dcov2_centered(a: np.ndarray, b: np.ndarray) -> float:
    """V-statistic from two double-centered matrices."""
    n = a.shape[0]
    return float(np.vdot(a.ravel(), b.ravel())) / (n * n)


def dcov2(x, y, exponent: float = 1.0) -> float:
    """Squared sample distance covariance between two point clouds."""
    x = _check_points(x)
    y = _check_points(y)
    if x.shape[0] != y.shape[0]:
        raise DataError(f"sample sizes differ: {x.shape[0]} vs {y.shape[0]}")
    return dcov2_centered(centered_distances(x, exponent),
                          centered_distances(y, exponent))


def dcor2_from_terms(cov_xy: float, var_x: float, var_y: float,
                     scale_x: float = 1.0, scale_y: float = 1.0,
                     eps: float = 1e-12) -> float:
    """Distance correlation from its three covariance terms.

    ``scale_x`` and ``scale_y`` are the largest absolute centered-distance
    entries; a variance term at or below ``eps * scale**2`` is treated as
    zero and the result is exactly 0.
    """
    if var_x <= eps * scale_x * scale_x or var_y <= eps * scale_y * scale_y:
        return 0.0
    return float(cov_xy / np.sqrt(var_x * var_y))


def dcor2_centered(a: np.ndarray, b: np.ndarray, eps: float = 1e-12) -> float:
    """Squared distance correlation from two double-centered matrices."""
    return dcor2_from_terms(dcov2_centered(a, b), dcov2_centered(a, a),
                            dcov2_centered(b, b), float(np.max(np.abs(a))),
                            float(np.max(np.abs(b))), eps)


def dcor2(x, y, exponent: float = 1.0, eps: float = 1e-12) -> float:
    """Squared sample distance correlation between two point clouds."""
    x = _check_points(x)
    y = _check_points(y)
    if x.shape[0] != y.shape[0]:
        raise DataError(f"sample sizes differ: {x.shape[0]} vs {y.shape[0]}")
    return dcor2_centered(centered_distances(x, exponent),
                          centered_distances(y, exponent), eps)


def _nonempty(data: DataMatrix, cols: Sequence[int], label: str) -> ColumnSet:
    cols = as_column_set(cols, data.p)
    if not cols:
        raise DataError(f"column set {label} is empty")
    return cols


def sample_dcov2(data: DataMatrix, a: Sequence[int], b: Sequence[int],
                 cfg: DCovConfig = DCovConfig()) -> float:
    """Squared sample distance covariance between two column groups.

    The raw V-statistic is returned; tiny negative roundoff is not clamped.
    """
    a = _nonempty(data, a, "A")
    b = _nonempty(data, b, "B")
    return dcov2(data.columns(a), data.columns(b), cfg.exponent)


def sample_dcor2(data: DataMatrix, a: Sequence[int], b: Sequence[int],
                 cfg: DCovConfig = DCovConfig()) -> float:
    """Squared sample distance correlation between two column groups."""
    a = _nonempty(data, a, "A")
    b = _nonempty(data, b, "B")
    return dcor2(data.columns(a), data.columns(b), cfg.exponent, cfg.eps)


def augment_union(data: DataMatrix, a: Sequence[int], b: Sequence[int]) -> ColumnSet:
    """Append the columns of ``b`` after those of ``a``; the sets must be disjoint."""
    a = as_column_set(a, data.p)
    b = as_column_set(b, data.p)
    overlap = set(a) & set(b)
    if overlap:
        raise DataError(f"column sets overlap on {sorted(overlap)}")
    return a + b


def standardize(data: DataMatrix) -> DataMatrix:
    """Center every column and scale it to unit population standard deviation.

    Constant columns become all zero.
    """
    x = data.values
    mu = x.mean(axis=0)
    centered = x - mu
    # Second pass removes the residual mean left by roundoff in mu.
    centered -= centered.mean(axis=0)
    sd = np.sqrt(np.mean(centered * centered, axis=0))
    # Relative test: a column whose spread is roundoff around its mean is constant.
    scale = np.maximum(np.abs(mu), np.max(np.abs(x), axis=0))
    constant = sd <= 1e-14 * np.maximum(scale, 1e-300)
    out = np.zeros_like(centered)
    keep = ~constant
    out[:, keep] = centered[:, keep] / sd[keep]
    return DataMatrix(out, data.column_names)


# ---------------------------------------------------------------------------
# O(n log n) univariate path
# ---------------------------------------------------------------------------


@numba.njit(cache=True)
def _cross_term(xs, ys, yrank, m):
    # 2 * sum_{i>j} (x_i - x_j) |y_i - y_j| with x already sorted ascending.
    # Fenwick trees over y-ranks hold count, sum y, sum x, sum xy of the prefix.
    n = xs.shape[0]
    cnt = np.zeros(m + 1)
    sy = np.zeros(m + 1)
    sx = np.zeros(m + 1)
    sxy = np.zeros(m + 1)
    tot_y = 0.0
    tot_x = 0.0
    tot_xy = 0.0
    acc = 0.0
    for i in range(n):
        xi = xs[i]
        yi = ys[i]
        c = 0.0
        qy = 0.0
        qx = 0.0
        qxy = 0.0
        k = yrank[i] + 1
        while k > 0:
            c += cnt[k]
            qy += sy[k]
            qx += sx[k]
            qxy += sxy[k]
            k -= k & (-k)
        below = c * xi * yi - xi * qy - yi * qx + qxy
        g = i - c
        above = g * xi * yi - xi * (tot_y - qy) - yi * (tot_x - qx) + (tot_xy - qxy)
        acc += below - above
        k = yrank[i] + 1
        while k <= m:
            cnt[k] += 1.0
            sy[k] += yi
            sx[k] += xi
            sxy[k] += xi * yi
            k += k & (-k)
        tot_y += yi
        tot_x += xi
        tot_xy += xi * yi
    return 2.0 * acc


def _abs_row_sums(v: np.ndarray) -> np.ndarray:
    order = np.argsort(v, kind="mergesort")
    s = v[order]
    n = s.shape[0]
    prefix = np.concatenate(([0.0], np.cumsum(s)))
    k = np.arange(n)
    sums_sorted = s * k - prefix[:-1] + (prefix[-1] - prefix[1:]) - s * (n - k - 1)
    out = np.empty(n)
    out[order] = sums_sorted
    return out


def fast_dcov2_univariate(x, y, exponent: float = 1.0) -> float:
    """Squared distance covariance of two scalar samples in O(n log n).

    Only defined for ``exponent == 1``; agrees with :func:`dcov2` up to
    roundoff.
    """
    if exponent != 1.0:
        raise DataError(f"the fast path requires exponent 1, got {exponent}")
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise DataError(f"sample sizes differ: {x.shape[0]} vs {y.shape[0]}")
    n = x.shape[0]
    if n < 2:
        raise DataError(f"need at least 2 samples, got {n}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise DataError("input contains NaN or Inf")
    if np.ptp(x) == 0.0 or np.ptp(y) == 0.0:
        return 0.0
    x = x - x.mean()
    y = y - y.mean()

    order = np.argsort(x, kind="mergesort")
    xs = x[order]
    ys = y[order]
    _, yrank = np.unique(ys, return_inverse=True)
    m = int(yrank.max()) + 1
    cross = _cross_term(xs, ys, yrank.astype(np.int64), m)

    ax = _abs_row_sums(x)
    by = _abs_row_sums(y)
    nf = float(n)
    return cross / nf**2 - 2.0 * float(ax @ by) / nf**3 + ax.sum() * by.sum() / nf**4
