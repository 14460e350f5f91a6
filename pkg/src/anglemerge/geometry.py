"""Numeric core: unit-sphere normalization and the pairwise-angle cache.

Every downstream stage works on angles between unit vectors, never on the
raw coordinates, so the angle cache computed here is the single source of
geometric truth for the whole pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, ZeroRowError

# Rows with norm below this are treated as the zero vector.
ZERO_NORM_EPS = 1e-300


@dataclass
class DataSet:
    """Points in R^n, one per row, with optional integer ground-truth labels.

    Invariants: at least 3 points, ambient dimension at least 2, and when
    labels are present they have one entry per point.
    """

    points: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64)
        if self.points.ndim != 2:
            raise DegenerateInputError(f"points must be 2-D, got shape {self.points.shape}")
        n_points, dim = self.points.shape
        if n_points < 3:
            raise DegenerateInputError(f"need at least 3 points, got {n_points}")
        if dim < 2:
            raise DegenerateInputError(f"need ambient dimension >= 2, got {dim}")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int64)
            if self.labels.shape != (n_points,):
                raise DegenerateInputError(
                    f"labels shape {self.labels.shape} does not match {n_points} points"
                )

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    @property
    def ambient_dim(self) -> int:
        return self.points.shape[1]


def normalize_rows(data: DataSet) -> DataSet:
    """Project every point onto the unit sphere, preserving labels.

    Raises ZeroRowError for any row whose norm is numerically zero.
    """
    norms = np.linalg.norm(data.points, axis=1)
    bad = np.where(norms < ZERO_NORM_EPS)[0]
    if bad.size:
        raise ZeroRowError(int(bad[0]))
    return DataSet(points=data.points / norms[:, None], labels=data.labels)


class AngleCache:
    """Upper-triangular store of all pairwise angles.

    Two coupled stores, both flat arrays of length N*(N-1)/2 indexed by
    (i, j) with i < j:

    * ``theta``: the angle arccos(x_i . x_j) in [0, pi]
    * ``acute``: the acute angle arccos(|x_i . x_j|) in [0, pi/2], used by
      the nearest-neighbour ("ally") search

    Inner products are clamped to [-1, 1] before arccos, so near-parallel
    rows never yield NaN. Queries are symmetric: (j, i) returns the (i, j)
    entry.

    ``reads`` counts accessor calls; the merge loop must leave it untouched
    once the initial statistics are built, which test builds assert.
    """

    def __init__(self, theta_flat: np.ndarray, acute_flat: np.ndarray, n_points: int):
        expected = n_points * (n_points - 1) // 2
        if theta_flat.shape != (expected,) or acute_flat.shape != (expected,):
            raise DegenerateInputError("flat angle arrays do not match the point count")
        self._theta = theta_flat
        self._acute = acute_flat
        self._n = n_points
        self.reads = 0

    @property
    def n_points(self) -> int:
        return self._n

    def _flat_index(self, i, j):
        # Works on scalars or equal-length arrays; requires i < j elementwise.
        return i * (2 * self._n - i - 1) // 2 + (j - i - 1)

    def _pair_index(self, idx_a: np.ndarray, idx_b: np.ndarray) -> np.ndarray:
        lo = np.minimum(idx_a, idx_b)
        hi = np.maximum(idx_a, idx_b)
        return self._flat_index(lo, hi)

    def theta_at(self, i: int, j: int) -> float:
        """Angle between points i and j (i != j), in radians."""
        if i == j:
            raise DegenerateInputError("theta_at requires two distinct indices")
        self.reads += 1
        lo, hi = (i, j) if i < j else (j, i)
        return float(self._theta[self._flat_index(lo, hi)])

    def acute_at(self, i: int, j: int) -> float:
        """Acute angle between points i and j, in radians."""
        if i == j:
            raise DegenerateInputError("acute_at requires two distinct indices")
        self.reads += 1
        lo, hi = (i, j) if i < j else (j, i)
        return float(self._acute[self._flat_index(lo, hi)])

    def acute_square(self) -> np.ndarray:
        """Dense symmetric acute-angle matrix with +inf on the diagonal.

        The diagonal sentinel lets argmin-style neighbour searches skip the
        point itself.
        """
        self.reads += 1
        square = np.full((self._n, self._n), np.inf)
        iu = np.triu_indices(self._n, k=1)
        square[iu] = self._acute
        square[(iu[1], iu[0])] = self._acute
        return square

    def cross_values(self, idx_a: np.ndarray, idx_b: np.ndarray) -> np.ndarray:
        """All angles between one index set and another (disjoint) one.

        Gathered in canonical (sorted flat-index) order, so swapping the
        two arguments yields a bitwise-identical array.
        """
        self.reads += 1
        idx_a = np.asarray(idx_a, dtype=np.int64)
        idx_b = np.asarray(idx_b, dtype=np.int64)
        aa, bb = np.meshgrid(idx_a, idx_b, indexing="ij")
        flat = self._pair_index(aa.ravel(), bb.ravel())
        flat.sort()
        return self._theta[flat]

    def within_values(self, idx: np.ndarray) -> np.ndarray:
        """All C(len(idx), 2) angles among one index set."""
        self.reads += 1
        idx = np.asarray(idx, dtype=np.int64)
        if idx.size < 2:
            return np.empty(0)
        pos_i, pos_j = np.triu_indices(idx.size, k=1)
        return self._theta[self._pair_index(idx[pos_i], idx[pos_j])]

    def grouped_sums(self, assignment: np.ndarray, n_groups: int):
        """Angle sums and squared sums aggregated over a partition.

        Returns (sum_matrix, sumsq_matrix), both n_groups x n_groups and
        symmetric. Off-diagonal entry (k, l) aggregates every cross angle
        between groups k and l once; diagonal entry (k, k) aggregates every
        within-group angle of k once.

        One matrix product per moment replaces N^2 scalar lookups, which is
        what keeps distance initialization at O(N^2 * P).
        """
        self.reads += 1
        assignment = np.asarray(assignment, dtype=np.int64)
        if assignment.shape != (self._n,):
            raise DegenerateInputError("assignment must have one entry per point")
        onehot = np.zeros((self._n, n_groups))
        onehot[np.arange(self._n), assignment] = 1.0

        square = np.zeros((self._n, self._n))
        iu = np.triu_indices(self._n, k=1)
        square[iu] = self._theta
        square[(iu[1], iu[0])] = self._theta

        sum_matrix = onehot.T @ square @ onehot
        np.square(square, out=square)
        sumsq_matrix = onehot.T @ square @ onehot
        # The bilinear form double-counts within-group pairs (i, j) and (j, i).
        np.fill_diagonal(sum_matrix, np.diagonal(sum_matrix) / 2.0)
        np.fill_diagonal(sumsq_matrix, np.diagonal(sumsq_matrix) / 2.0)
        return sum_matrix, sumsq_matrix


def compute_angles(data: DataSet) -> AngleCache:
    """Compute all pairwise angles of an already-normalized dataset.

    Deterministic for fixed input: each entry is written exactly once from
    a clamped inner product, independent of evaluation order.
    """
    gram = np.clip(data.points @ data.points.T, -1.0, 1.0)
    iu = np.triu_indices(data.n_points, k=1)
    dots = gram[iu]
    theta_flat = np.arccos(dots)
    acute_flat = np.arccos(np.abs(dots))
    return AngleCache(theta_flat, acute_flat, data.n_points)


def load_points_csv(path, labeled: bool = False) -> DataSet:
    """Read a dataset from CSV: one point per row, comma-separated reals.

    With ``labeled=True`` the final column is parsed as the integer
    ground-truth label.
    """
    raw = np.loadtxt(path, delimiter=",", ndmin=2)
    if labeled:
        if raw.shape[1] < 3:
            raise DegenerateInputError("labeled CSV needs >= 2 feature columns plus a label")
        return DataSet(points=raw[:, :-1], labels=raw[:, -1].astype(np.int64))
    return DataSet(points=raw)


def save_points_csv(path, data: DataSet) -> None:
    """Write a dataset as CSV, appending the label column when present."""
    if data.labels is not None:
        out = np.hstack([data.points, data.labels[:, None].astype(np.float64)])
    else:
        out = data.points
    np.savetxt(path, out, delimiter=",")
