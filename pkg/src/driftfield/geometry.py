"""Point clouds, pairwise cost matrices, and seeded randomness.

All coordinates and costs are float64. A PointCloud carries uniform weights
implicitly: it represents the empirical measure (1/n) sum_i delta_{x_i}.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ConfigError


class CostKind(str, Enum):
    """Pairwise ground costs. All three conventions are used somewhere in the
    codebase, so the kind travels with the matrix instead of being implied."""

    SQEUCLIDEAN_HALF = "sqeuclidean_half"  # 0.5 * ||x - y||^2
    SQEUCLIDEAN = "sqeuclidean"            # ||x - y||^2 (Gaussian kernel logits)
    EUCLIDEAN = "euclidean"                # ||x - y||   (Laplacian kernel logits)


@dataclass(frozen=True)
class PointCloud:
    """An ordered set of n points in R^d with uniform weights."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2:
            raise ConfigError(f"points must be 2-d (n, d), got shape {pts.shape}")
        if pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ConfigError(f"need n >= 1 and d >= 1, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ConfigError("point coordinates must be finite")
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def mean(self) -> np.ndarray:
        return self.points.mean(axis=0)


@dataclass(frozen=True)
class CostMatrix:
    """Nonnegative pairwise cost matrix together with its cost convention."""

    values: np.ndarray
    cost_kind: CostKind

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 2:
            raise ConfigError(f"cost matrix must be 2-d, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ConfigError("cost entries must be finite")
        if np.any(vals < 0):
            raise ConfigError("cost entries must be nonnegative")
        object.__setattr__(self, "values", vals)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


@dataclass
class RngState:
    """Seeded random stream. Identical seeds reproduce identical sequences
    bit-exactly (numpy PCG64; normals via numpy's ziggurat method)."""

    seed: int
    generator: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        if not (0 <= int(self.seed) < 2**64):
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        self.seed = int(self.seed)
        self.generator = np.random.default_rng(self.seed)

    def spawn(self, k: int) -> list["RngState"]:
        """Derive k independent child streams by seed-splitting."""
        children = np.random.SeedSequence(self.seed).spawn(k)
        out = []
        for child in children:
            state = RngState.__new__(RngState)
            state.seed = self.seed
            state.generator = np.random.default_rng(child)
            out.append(state)
        return out


def pairwise_cost(X: PointCloud, Y: PointCloud, kind: CostKind) -> CostMatrix:
    """Pairwise cost between two clouds under the chosen convention.

    Uses the expansion ||x-y||^2 = ||x||^2 + ||y||^2 - 2<x,y>, clipped at zero
    so cancellation noise never yields a negative cost.
    """
    if X.d != Y.d:
        raise ConfigError(f"dimension mismatch: {X.d} vs {Y.d}")
    xs = X.points
    ys = Y.points
    sq = (
        np.sum(xs * xs, axis=1)[:, None]
        + np.sum(ys * ys, axis=1)[None, :]
        - 2.0 * (xs @ ys.T)
    )
    np.maximum(sq, 0.0, out=sq)
    if kind is CostKind.SQEUCLIDEAN_HALF:
        vals = 0.5 * sq
    elif kind is CostKind.SQEUCLIDEAN:
        vals = sq
    elif kind is CostKind.EUCLIDEAN:
        vals = np.sqrt(sq)
    else:
        raise ConfigError(f"unknown cost kind {kind!r}")
    if xs is ys or (xs.shape == ys.shape and np.array_equal(xs, ys)):
        # identical clouds must have an exactly zero diagonal
        np.fill_diagonal(vals, 0.0)
    return CostMatrix(vals, kind)


def mask_self_distances(C: CostMatrix, penalty: float) -> CostMatrix:
    """Add a surrogate self-distance penalty to the diagonal of a square cost."""
    n, m = C.shape
    if n != m:
        raise ConfigError(f"self-distance masking needs a square matrix, got {n}x{m}")
    vals = C.values.copy()
    vals[np.diag_indices(n)] += penalty
    return CostMatrix(vals, C.cost_kind)


def gibbs_kernel(C: CostMatrix, tau: float):
    """Gibbs kernel exp(-C/tau), represented in log domain.

    The log-domain representation keeps even penalty-masked entries
    (log value -penalty/tau) exact; the linear-domain view may underflow
    to zero, which is acceptable.
    """
    from .coupling import CouplingMatrix, MarginalStatus

    if not (tau > 0):
        raise ConfigError(f"tau must be positive, got {tau}")
    return CouplingMatrix(log_values=-C.values / tau, marginal_status=MarginalStatus.RAW)
