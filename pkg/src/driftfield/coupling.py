"""Coupling matrices and the three normalization schemes.

Everything here works in the natural-log domain: a CouplingMatrix stores
log pi, with -inf encoding an exact zero. Log-sum-exp with max extraction
keeps the schemes usable down to very small temperatures where the linear
kernel underflows.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigError, DegenerateRowError

SINKHORN_CAP_DEFAULT = 10_000


class MarginalStatus(str, Enum):
    RAW = "raw"
    ROW_STOCHASTIC = "row_stochastic"
    SINKHORN_SCALED = "sinkhorn_scaled"


@dataclass
class CouplingMatrix:
    """Nonnegative n x m coupling stored as log values.

    marginal_status declares what the entries currently satisfy;
    iterations_used counts Sinkhorn half-steps (0 for the softmax schemes).
    """

    log_values: np.ndarray
    marginal_status: MarginalStatus
    iterations_used: int = 0
    converged: bool | None = None
    row_err: float | None = None
    col_err: float | None = None
    violation_history: list[tuple[float, float]] | None = None

    def __post_init__(self):
        lv = np.asarray(self.log_values, dtype=np.float64)
        if lv.ndim != 2:
            raise ConfigError(f"coupling must be 2-d, got shape {lv.shape}")
        if np.isnan(lv).any():
            raise ConfigError("coupling log values contain NaN")
        if np.any(lv == np.inf):
            raise ConfigError("coupling log values contain +inf")
        self.log_values = lv

    @property
    def shape(self) -> tuple[int, int]:
        return self.log_values.shape

    @property
    def values(self) -> np.ndarray:
        """Linear-domain view; log entries of -inf become exact zeros."""
        return np.exp(self.log_values)


@dataclass(frozen=True)
class Marginals:
    """Target row and column marginals (probability vectors)."""

    r: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.r, dtype=np.float64)
        c = np.asarray(self.c, dtype=np.float64)
        for name, v in (("r", r), ("c", c)):
            if v.ndim != 1:
                raise ConfigError(f"marginal {name} must be a vector")
            if np.any(v < 0) or not np.all(np.isfinite(v)):
                raise ConfigError(f"marginal {name} must be nonnegative and finite")
            if abs(v.sum() - 1.0) > 1e-12:
                raise ConfigError(f"marginal {name} must sum to 1 within 1e-12, got {v.sum()!r}")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "c", c)

    @staticmethod
    def uniform(n: int, m: int) -> "Marginals":
        return Marginals(np.full(n, 1.0 / n), np.full(m, 1.0 / m))


def _logsumexp(A: np.ndarray, axis: int) -> np.ndarray:
    """Row/column log-sum-exp with max extraction; -inf slices stay -inf."""
    m = np.max(A, axis=axis)
    safe = np.where(np.isfinite(m), m, 0.0)
    shifted = A - np.expand_dims(safe, axis)
    np.exp(shifted, out=shifted)
    s = shifted.sum(axis=axis)
    with np.errstate(divide="ignore"):
        out = safe + np.log(s)
    return np.where(np.isfinite(m), out, -np.inf)


def _check_rows_finite(row_lse: np.ndarray, context: str):
    bad = np.flatnonzero(~np.isfinite(row_lse))
    if bad.size:
        raise DegenerateRowError("row", int(bad[0]), context)


def _check_cols_finite(col_lse: np.ndarray, context: str):
    bad = np.flatnonzero(~np.isfinite(col_lse))
    if bad.size:
        raise DegenerateRowError("column", int(bad[0]), context)


def row_normalize(K: CouplingMatrix) -> CouplingMatrix:
    """Row softmax in log domain: each row of exp(result) sums to 1."""
    lse = _logsumexp(K.log_values, axis=1)
    _check_rows_finite(lse, "row_normalize")
    log_p = K.log_values - lse[:, None]
    assert not np.isnan(log_p).any()
    return CouplingMatrix(log_p, MarginalStatus.ROW_STOCHASTIC)


def two_sided_normalize(K: CouplingMatrix) -> CouplingMatrix:
    """Geometric mean of row- and column-softmax, then row re-normalized.

    The geometric mean itself is not row-stochastic; the final row pass makes
    the output usable as barycentric weights.
    """
    row_lse = _logsumexp(K.log_values, axis=1)
    _check_rows_finite(row_lse, "two_sided_normalize")
    col_lse = _logsumexp(K.log_values, axis=0)
    _check_cols_finite(col_lse, "two_sided_normalize")
    log_g = K.log_values - 0.5 * (row_lse[:, None] + col_lse[None, :])
    log_p = log_g - _logsumexp(log_g, axis=1)[:, None]
    assert not np.isnan(log_p).any()
    return CouplingMatrix(log_p, MarginalStatus.ROW_STOCHASTIC)


def marginal_violation(pi: CouplingMatrix, m: Marginals) -> tuple[float, float]:
    """Max-norm deviation of the coupling's row/column sums from (r, c)."""
    n, mm = pi.shape
    if m.r.shape[0] != n or m.c.shape[0] != mm:
        raise ConfigError(f"marginal shapes {m.r.shape[0]}x{m.c.shape[0]} do not match coupling {n}x{mm}")
    P = pi.values
    row_err = float(np.abs(P.sum(axis=1) - m.r).max())
    col_err = float(np.abs(P.sum(axis=0) - m.c).max())
    return row_err, col_err


def sinkhorn(
    K: CouplingMatrix,
    m: Marginals,
    T: int | None = None,
    tol: float | None = None,
    max_iterations: int = SINKHORN_CAP_DEFAULT,
    record_history: bool = False,
) -> CouplingMatrix:
    """Alternating row/column rescaling of K toward marginals (r, c).

    Iteration count T is in half-steps: step 1 rescales rows, step 2 columns,
    and so on, starting from pi^(0) = K. Odd T therefore ends row-consistent.
    With T=1 and uniform marginals, n * pi^(1) is exactly the row softmax.

    If tol is given it supersedes T: sweeps run until the max marginal
    violation drops below tol (always finishing on a row step) or the
    max_iterations half-step cap is hit, in which case the result is returned
    with converged=False and the final violation recorded.
    """
    n, mm = K.shape
    if m.r.shape[0] != n or m.c.shape[0] != mm:
        raise ConfigError(f"marginal shapes do not match coupling {n}x{mm}")
    if tol is None:
        if T is None:
            raise ConfigError("sinkhorn needs an iteration count T or a tolerance")
        if T < 1:
            raise ConfigError(f"T must be >= 1, got {T}")
    logK = K.log_values
    with np.errstate(divide="ignore"):
        log_r = np.log(m.r)
        log_c = np.log(m.c)

    f = np.zeros(n)
    g = np.zeros(mm)
    W = np.empty_like(logK)  # scratch reused by every half-step

    def lse_rows() -> np.ndarray:
        np.add(logK, g[None, :], out=W)
        mx = W.max(axis=1)
        _check_rows_finite(mx, "sinkhorn")
        np.subtract(W, mx[:, None], out=W)
        np.exp(W, out=W)
        return mx + np.log(W.sum(axis=1))

    def lse_cols() -> np.ndarray:
        np.add(logK, f[:, None], out=W)
        mx = W.max(axis=0)
        _check_cols_finite(mx, "sinkhorn")
        np.subtract(W, mx[None, :], out=W)
        np.exp(W, out=W)
        return mx + np.log(W.sum(axis=0))

    def violations() -> tuple[float, float]:
        row_sums = np.exp(f + _logsumexp(logK + g[None, :], axis=1))
        col_sums = np.exp(g + _logsumexp(logK + f[:, None], axis=0))
        return float(np.abs(row_sums - m.r).max()), float(np.abs(col_sums - m.c).max())

    history: list[tuple[float, float]] | None = [] if record_history else None
    half = 0
    converged: bool | None = None
    if tol is not None:
        converged = False
    while True:
        S = lse_rows()
        if tol is not None and half > 0:
            # columns are exact after the preceding column step, so the row
            # gap before this rescale is the whole violation
            viol = float(np.abs(np.exp(f + S) - m.r).max())
            if viol < tol:
                f = log_r - S
                half += 1
                if history is not None:
                    history.append(violations())
                converged = True
                break
        f = log_r - S
        half += 1
        if history is not None:
            history.append(violations())
        if T is not None and tol is None and half >= T:
            break
        if tol is not None and half >= max_iterations:
            break
        g = log_c - lse_cols()
        half += 1
        if history is not None:
            history.append(violations())
        if T is not None and tol is None and half >= T:
            break
        if tol is not None and half >= max_iterations:
            break

    row_err, col_err = violations()
    if tol is not None and not converged:
        warnings.warn(
            f"sinkhorn hit the {max_iterations}-half-step cap at violation "
            f"{max(row_err, col_err):.3e} (tol {tol:.1e})",
            RuntimeWarning,
            stacklevel=2,
        )
    log_pi = logK + f[:, None] + g[None, :]
    assert not np.isnan(log_pi).any()
    return CouplingMatrix(
        log_pi,
        MarginalStatus.SINKHORN_SCALED,
        iterations_used=half,
        converged=converged,
        row_err=row_err,
        col_err=col_err,
        violation_history=history,
    )
