"""Cross-minus-self drift fields under the three normalization schemes.

The drift of a point x_i is the barycenter of the data cloud under a
row-stochastic positive coupling minus the barycenter of the current cloud
under a negative (self) coupling:

    V_i = (P_pos @ Y_pos)_i - (P_neg @ Y_neg)_i

One-sided and two-sided schemes mask the negative self-distances by default
(diagonal cost penalty before kernelization); Sinkhorn does not need the mask
and runs unmasked unless explicitly overridden.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .coupling import (
    CouplingMatrix,
    Marginals,
    MarginalStatus,
    SINKHORN_CAP_DEFAULT,
    row_normalize,
    sinkhorn,
    two_sided_normalize,
)
from .errors import ConfigError, NumericalError
from .geometry import CostKind, PointCloud, gibbs_kernel, mask_self_distances, pairwise_cost


class Scheme(str, Enum):
    ONE_SIDED = "one-sided"
    TWO_SIDED = "two-sided"
    SINKHORN = "sinkhorn"


@dataclass(frozen=True)
class DriftConfig:
    """Scheme plus kernel settings for one drift evaluation.

    T counts Sinkhorn half-steps and must be odd (the iteration then ends on
    a row rescale); T=None runs Sinkhorn to tolerance instead. mask_self=None
    picks the scheme default: masked for one-/two-sided, unmasked for
    Sinkhorn.
    """

    scheme: Scheme
    tau: float
    T: int | None = None
    mask_self: bool | None = None
    mask_penalty: float = 1e6
    cost_kind: CostKind = CostKind.SQEUCLIDEAN_HALF
    tol: float = 1e-9
    max_iterations: int = SINKHORN_CAP_DEFAULT

    def __post_init__(self):
        if not (self.tau > 0):
            raise ConfigError(f"tau must be positive, got {self.tau}")
        if self.T is not None:
            if self.scheme is not Scheme.SINKHORN:
                raise ConfigError("T applies to the sinkhorn scheme only")
            if self.T < 1 or self.T % 2 == 0:
                raise ConfigError(f"sinkhorn T must be odd and >= 1, got {self.T}")

    @property
    def masked(self) -> bool:
        if self.mask_self is not None:
            return self.mask_self
        return self.scheme is not Scheme.SINKHORN


@dataclass(frozen=True)
class DriftField:
    """Velocities for each point of X, along with the couplings that built them."""

    velocities: np.ndarray
    scheme: Scheme
    masked_self: bool
    tau: float
    p_pos: CouplingMatrix | None = None
    p_neg: CouplingMatrix | None = None

    def __post_init__(self):
        v = np.asarray(self.velocities, dtype=np.float64)
        if not np.all(np.isfinite(v)):
            raise NumericalError("drift velocities must be finite")
        object.__setattr__(self, "velocities", v)

    def max_norm(self) -> float:
        return float(np.abs(self.velocities).max())


def _row_weights(X: PointCloud, Y: PointCloud, cfg: DriftConfig, mask: bool) -> CouplingMatrix:
    """Row-stochastic weights from X to Y under cfg's scheme."""
    C = pairwise_cost(X, Y, cfg.cost_kind)
    if mask:
        if C.shape[0] != C.shape[1]:
            raise ConfigError("self-distance masking needs a square cost matrix")
        C = mask_self_distances(C, cfg.mask_penalty)
    K = gibbs_kernel(C, cfg.tau)
    if cfg.scheme is Scheme.ONE_SIDED:
        return row_normalize(K)
    if cfg.scheme is Scheme.TWO_SIDED:
        return two_sided_normalize(K)
    if cfg.scheme is Scheme.SINKHORN:
        marg = Marginals.uniform(X.n, Y.n)
        pi = sinkhorn(
            K,
            marg,
            T=cfg.T,
            tol=None if cfg.T is not None else cfg.tol,
            max_iterations=cfg.max_iterations,
        )
        out = row_normalize(pi)
        return CouplingMatrix(
            out.log_values,
            MarginalStatus.ROW_STOCHASTIC,
            iterations_used=pi.iterations_used,
            converged=pi.converged,
            row_err=pi.row_err,
            col_err=pi.col_err,
        )
    raise ConfigError(f"unknown scheme {cfg.scheme!r}")


def _warn_if_degenerate_self(Y_neg: PointCloud):
    # coincident points make the self-plan non-unique; warn rather than pick
    C = pairwise_cost(Y_neg, Y_neg, CostKind.SQEUCLIDEAN)
    if np.count_nonzero(C.values == 0.0) > Y_neg.n:
        warnings.warn(
            "degenerate self configuration: coincident points in the negative cloud",
            RuntimeWarning,
            stacklevel=3,
        )


def drift_field(X: PointCloud, Y_pos: PointCloud, Y_neg: PointCloud, cfg: DriftConfig) -> DriftField:
    """Assemble V = P_pos @ Y_pos - P_neg @ Y_neg for the configured scheme.

    Y_neg may alias X (the usual self term). Masking, when active, penalizes
    the diagonal of the negative cost matrix before kernelization; the
    positive side is never masked.
    """
    if X.d != Y_pos.d or X.d != Y_neg.d:
        raise ConfigError(f"dimension mismatch: X.d={X.d}, Y_pos.d={Y_pos.d}, Y_neg.d={Y_neg.d}")
    mask_neg = cfg.masked and X.n == Y_neg.n
    _warn_if_degenerate_self(Y_neg)
    p_pos = _row_weights(X, Y_pos, cfg, mask=False)
    p_neg = _row_weights(X, Y_neg, cfg, mask=mask_neg)
    v = np.exp(p_pos.log_values) @ Y_pos.points - np.exp(p_neg.log_values) @ Y_neg.points
    return DriftField(
        velocities=v,
        scheme=cfg.scheme,
        masked_self=mask_neg,
        tau=cfg.tau,
        p_pos=p_pos,
        p_neg=p_neg,
    )


def level_l_drift(
    X: PointCloud,
    Y: PointCloud,
    l: int,
    tau: float,
    cost_kind: CostKind = CostKind.SQEUCLIDEAN_HALF,
) -> DriftField:
    """Partial-Sinkhorn drift V^l = n(pi^l_XY @ Y) - n(pi^l_XX @ X).

    Both couplings run l half-steps from the raw kernel under uniform
    marginals, with no masking; l=1 reproduces the unmasked one-sided drift.
    """
    if l < 1:
        raise ConfigError(f"level must be >= 1, got {l}")
    if X.d != Y.d:
        raise ConfigError(f"dimension mismatch: {X.d} vs {Y.d}")
    n = X.n
    marg_xy = Marginals.uniform(n, Y.n)
    marg_xx = Marginals.uniform(n, n)
    K_xy = gibbs_kernel(pairwise_cost(X, Y, cost_kind), tau)
    K_xx = gibbs_kernel(pairwise_cost(X, X, cost_kind), tau)
    pi_xy = sinkhorn(K_xy, marg_xy, T=l)
    pi_xx = sinkhorn(K_xx, marg_xx, T=l)
    v = n * (np.exp(pi_xy.log_values) @ Y.points) - n * (np.exp(pi_xx.log_values) @ X.points)
    return DriftField(
        velocities=v,
        scheme=Scheme.SINKHORN,
        masked_self=False,
        tau=tau,
        p_pos=pi_xy,
        p_neg=pi_xx,
    )


def mean_of_drift(V: DriftField) -> np.ndarray:
    """Average velocity (1/n) sum_i V_i."""
    return V.velocities.mean(axis=0)
