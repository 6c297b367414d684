"""Drift-field particle dynamics and entropic-coupling toolkit.

Core objects: point clouds and seeded RNG state (geometry), log-domain
coupling normalizations including Sinkhorn scaling (coupling), the
cross-minus-self drift field (drift), Euler particle flows (flow), a small
generator network with stop-gradient training (nnet), transport metrics
(metrics), toy target samplers (datasets), numerical theory checks
(theory), and the command-line harness (cli).
"""

from .coupling import (
    CouplingMatrix,
    MarginalStatus,
    Marginals,
    marginal_violation,
    row_normalize,
    sinkhorn,
    two_sided_normalize,
)
from .datasets import TargetKind, ToyTarget, make_target, sample, sample_prior
from .drift import DriftConfig, DriftField, Scheme, drift_field, level_l_drift, mean_of_drift
from .errors import ConfigError, DegenerateRowError, NumericalError, TheoryCheckError
from .flow import FlowTrajectory, simulate, stop_gradient_euler_check, write_trajectory_csv
from .geometry import (
    CostKind,
    CostMatrix,
    PointCloud,
    RngState,
    gibbs_kernel,
    mask_self_distances,
    pairwise_cost,
)
from .metrics import (
    AssignmentResult,
    DivergenceValue,
    exact_w2sq,
    mode_coverage,
    sinkhorn_divergence,
)
from .nnet import (
    Activation,
    AdamState,
    GeneratorParams,
    TrainRecord,
    adam_step,
    drifting_loss_and_grad,
    forward,
    init_params,
    load_checkpoint,
    save_checkpoint,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "Activation",
    "AdamState",
    "AssignmentResult",
    "ConfigError",
    "CostKind",
    "CostMatrix",
    "CouplingMatrix",
    "DegenerateRowError",
    "DivergenceValue",
    "DriftConfig",
    "DriftField",
    "FlowTrajectory",
    "GeneratorParams",
    "MarginalStatus",
    "Marginals",
    "NumericalError",
    "PointCloud",
    "RngState",
    "Scheme",
    "TargetKind",
    "TheoryCheckError",
    "ToyTarget",
    "TrainRecord",
    "adam_step",
    "drift_field",
    "drifting_loss_and_grad",
    "exact_w2sq",
    "forward",
    "gibbs_kernel",
    "init_params",
    "level_l_drift",
    "load_checkpoint",
    "make_target",
    "marginal_violation",
    "mask_self_distances",
    "mean_of_drift",
    "mode_coverage",
    "pairwise_cost",
    "row_normalize",
    "sample",
    "sample_prior",
    "save_checkpoint",
    "simulate",
    "sinkhorn",
    "sinkhorn_divergence",
    "stop_gradient_euler_check",
    "train",
    "two_sided_normalize",
    "write_trajectory_csv",
]
