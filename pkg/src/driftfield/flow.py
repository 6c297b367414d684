"""Forward-Euler particle simulation of the drift ODE.

Each step recomputes the drift from the current cloud (the negative term
always sees the particles where they are now) and advances x <- x + eta * V.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .drift import DriftConfig, DriftField, drift_field
from .errors import ConfigError, NumericalError
from .geometry import PointCloud

SNAPSHOT_STRIDE_DEFAULT = 10


@dataclass(frozen=True)
class FlowTrajectory:
    """Recorded snapshots of one simulation: (step index, cloud) pairs."""

    snapshots: list[tuple[int, PointCloud]]
    eta: float
    steps: int
    cfg: DriftConfig

    def final(self) -> PointCloud:
        return self.snapshots[-1][1]


def simulate(
    X0: PointCloud,
    Y: PointCloud,
    cfg: DriftConfig,
    eta: float,
    steps: int,
    snapshot_every: int = SNAPSHOT_STRIDE_DEFAULT,
) -> FlowTrajectory:
    """Run `steps` Euler steps from X0 toward Y under cfg's drift.

    Snapshots are recorded at step 0, every `snapshot_every` steps, and at
    the final step. Non-finite coordinates abort with the offending step and
    particle index.
    """
    if not (eta > 0):
        raise ConfigError(f"eta must be positive, got {eta}")
    if steps < 1:
        raise ConfigError(f"steps must be >= 1, got {steps}")
    if snapshot_every < 1:
        raise ConfigError(f"snapshot_every must be >= 1, got {snapshot_every}")
    x = X0.points.copy()
    snapshots = [(0, X0)]
    for step in range(1, steps + 1):
        current = PointCloud(x)
        V = drift_field(current, Y, current, cfg)
        x = x + eta * V.velocities
        if not np.all(np.isfinite(x)):
            bad = int(np.flatnonzero(~np.isfinite(x).all(axis=1))[0])
            raise NumericalError(
                f"non-finite coordinates at step {step}, particle {bad} "
                f"(scheme={cfg.scheme.value}, tau={cfg.tau})"
            )
        if step % snapshot_every == 0 or step == steps:
            snapshots.append((step, PointCloud(x)))
    return FlowTrajectory(snapshots=snapshots, eta=eta, steps=steps, cfg=cfg)


def stop_gradient_euler_check(X: PointCloud, V: DriftField, eta: float, q: np.ndarray | None = None) -> PointCloud:
    """One q-weighted gradient step on the free-particle stop-gradient loss.

    The loss is L = 1/2 sum_i q_i ||x_i - sg(x_i + V_i)||^2 with the target
    held constant. The residual x_i - (x_i + V_i) has value exactly -V_i, so
    the gradient is formed as -q_i V_i directly (materializing x + V first
    would re-round the sum); the q-preweighted descent step
    x_i - eta * grad_i / q_i then lands exactly on x_i + eta * V_i.
    """
    if V.velocities.shape != X.points.shape:
        raise ConfigError(
            f"shape mismatch: X {X.points.shape} vs V {V.velocities.shape}"
        )
    n = X.n
    if q is None:
        q = np.full(n, 1.0 / n)
    q = np.asarray(q, dtype=np.float64)
    if q.shape != (n,) or np.any(q <= 0):
        raise ConfigError("q must be a positive weight vector of length n")
    grad = q[:, None] * (-V.velocities)
    return PointCloud(X.points - eta * grad / q[:, None])


def write_trajectory_csv(traj: FlowTrajectory, path) -> None:
    """Write snapshots as rows (step, particle_id, coord_0..coord_{d-1})."""
    d = traj.snapshots[0][1].d
    header = ["step", "particle_id"] + [f"coord_{k}" for k in range(d)]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for step, cloud in traj.snapshots:
            for pid in range(cloud.n):
                writer.writerow([step, pid] + [repr(float(v)) for v in cloud.points[pid]])
