"""Command-line experiment harness.

Subcommands:
  trajectories  tau-sweep particle flows on a fixed source/target pair
  train-toy     stop-gradient generator training on 2-D toy targets
  theory        numerical verification suite, JSON report
  eval          metrics (W2^2, transport divergence, coverage) for a CSV cloud

Configuration comes from an optional JSON file plus flag overrides; flags
win. Outputs land under outdir/<subcommand>/<cell-slug>/ with one directory
per grid cell; a summary JSON embedding the exact resolved configuration is
written after all cells finish. All CSV output is UTF-8 with LF endings and
a mandatory header row; JSON uses sorted keys.

Exit codes: 0 success, 1 config error, 2 runtime numerical failure,
3 theory-check failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import theory
from .datasets import TargetKind, eight_gaussians, make_target, sample, sample_prior
from .drift import DriftConfig, Scheme
from .errors import ConfigError, NumericalError
from .flow import SNAPSHOT_STRIDE_DEFAULT, simulate, write_trajectory_csv
from .geometry import CostKind, PointCloud, RngState
from .metrics import ASSIGNMENT_CAP_DEFAULT, exact_w2sq, mode_coverage, sinkhorn_divergence
from .nnet import Activation, forward, init_params, save_checkpoint, train

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_THEORY = 3

# CLI kernel names. "gaussian" is exp(-||x-y||^2 / tau) (the toy-experiment
# convention), "laplacian" is exp(-||x-y|| / tau).
KERNEL_COSTS = {
    "gaussian": CostKind.SQEUCLIDEAN,
    "laplacian": CostKind.EUCLIDEAN,
}

SCHEME_NAMES = tuple(s.value for s in Scheme)
TARGET_NAMES = tuple(t.value for t in TargetKind)

SUBCOMMANDS = ("trajectories", "train-toy", "theory", "eval")

# Default tau grids per subcommand.
_TAUS = {
    "trajectories": (0.01, 0.1, 1.0, 10.0),
    "train-toy": (0.01, 0.05, 0.1),
    "theory": (),
    "eval": (0.1,),
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved settings for one CLI invocation."""

    subcommand: str
    outdir: str = "runs"
    seed: int = 0
    jobs: int = 1
    schemes: tuple[str, ...] = SCHEME_NAMES
    taus: tuple[float, ...] = ()
    mask: str | None = None  # None: per-scheme default; "on"/"off": forced
    sinkhorn_iters: int = 31
    kernel: str = "gaussian"
    # trajectories
    n_particles: int = 100
    eta: float = 0.1
    steps: int = 500
    snapshot_every: int = SNAPSHOT_STRIDE_DEFAULT
    # train-toy
    targets: tuple[str, ...] = ("8gaussians", "checkerboard")
    batch_n: int = 500
    iters: int = 5000
    lr: float = 1e-3
    eval_every: int = 100
    hidden: tuple[int, ...] = (128, 128)
    sample_out: int = 2000
    # eval
    generated: str | None = None
    target: str | None = None
    cap: int = ASSIGNMENT_CAP_DEFAULT
    coverage_radius: float = 0.6
    # theory
    only: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "schemes", tuple(str(s) for s in self.schemes))
        object.__setattr__(self, "taus", tuple(float(t) for t in self.taus))
        object.__setattr__(self, "targets", tuple(str(t) for t in self.targets))
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        if self.subcommand not in SUBCOMMANDS:
            raise ConfigError(f"unknown subcommand {self.subcommand!r}")
        if not (0 <= int(self.seed) < 2**64):
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.jobs < 1:
            raise ConfigError(f"jobs must be >= 1, got {self.jobs}")
        bad = [s for s in self.schemes if s not in SCHEME_NAMES]
        if bad or not self.schemes:
            raise ConfigError(f"schemes must be a non-empty subset of {SCHEME_NAMES}, got {list(self.schemes)}")
        for t in self.taus:
            if not (t > 0) or not np.isfinite(t):
                raise ConfigError(f"tau values must be positive and finite, got {t}")
        if self.subcommand != "theory" and not self.taus:
            raise ConfigError("need at least one tau value")
        if self.mask not in (None, "on", "off"):
            raise ConfigError(f"mask must be 'on' or 'off', got {self.mask!r}")
        if self.sinkhorn_iters < 1 or self.sinkhorn_iters % 2 == 0:
            raise ConfigError(f"sinkhorn-iters must be odd and >= 1, got {self.sinkhorn_iters}")
        if self.kernel not in KERNEL_COSTS:
            raise ConfigError(f"kernel must be one of {sorted(KERNEL_COSTS)}, got {self.kernel!r}")
        if self.n_particles < 1:
            raise ConfigError(f"n_particles must be >= 1, got {self.n_particles}")
        if not (self.eta > 0):
            raise ConfigError(f"eta must be positive, got {self.eta}")
        if self.steps < 1 or self.snapshot_every < 1:
            raise ConfigError("steps and snapshot_every must be >= 1")
        bad = [t for t in self.targets if t not in TARGET_NAMES]
        if bad or not self.targets:
            raise ConfigError(f"targets must be a non-empty subset of {TARGET_NAMES}, got {list(self.targets)}")
        if self.batch_n < 1 or self.sample_out < 1:
            raise ConfigError("batch_n and sample_out must be >= 1")
        if self.iters < 0:
            raise ConfigError(f"iters must be >= 0, got {self.iters}")
        if not (self.lr > 0):
            raise ConfigError(f"lr must be positive, got {self.lr}")
        if self.eval_every < 1:
            raise ConfigError(f"eval_every must be >= 1, got {self.eval_every}")
        if any(h < 1 for h in self.hidden):
            raise ConfigError(f"hidden layer widths must be >= 1, got {list(self.hidden)}")
        if self.cap < 1:
            raise ConfigError(f"cap must be >= 1, got {self.cap}")
        if not (self.coverage_radius > 0):
            raise ConfigError(f"coverage_radius must be positive, got {self.coverage_radius}")
        if self.only is not None and self.only not in theory.CHECK_NAMES:
            raise ConfigError(f"unknown theory check {self.only!r}; choose from {list(theory.CHECK_NAMES)}")
        if self.subcommand == "eval":
            if not self.generated:
                raise ConfigError("eval requires --generated CSV path")
            if not self.target:
                raise ConfigError("eval requires --target (CSV path or toy target name)")


def tau_slug(tau: float) -> str:
    return "tau" + f"{tau:.3f}".replace(".", "p")


def cell_slug(scheme: str, tau: float, masked: bool, seed: int, target: str | None = None) -> str:
    parts = [] if target is None else [target]
    parts += [scheme, tau_slug(tau), "mask-" + ("on" if masked else "off"), f"seed{seed}"]
    return "_".join(parts)


def _cell_seed(base_seed: int, slug: str) -> int:
    # stable per-cell stream independent of grid composition, so a filtered
    # rerun of one cell reproduces the full-grid run byte for byte
    mix = zlib.crc32(slug.encode("utf-8"))
    return int(np.random.SeedSequence(entropy=[base_seed, mix]).generate_state(1, np.uint64)[0])


def _variants(cfg: ExperimentConfig, dual_mask: bool) -> list[tuple[str, bool]]:
    """(scheme, masked) grid axis. With dual_mask the one-/two-sided schemes
    contribute both masked and unmasked variants unless --mask forces one."""
    out = []
    for scheme in cfg.schemes:
        if cfg.mask is not None:
            masks = [cfg.mask == "on"]
        elif scheme == Scheme.SINKHORN.value:
            masks = [False]
        elif dual_mask:
            masks = [True, False]
        else:
            masks = [True]
        out.extend((scheme, m) for m in masks)
    return out


def _drift_config(cfg: ExperimentConfig, scheme: str, tau: float, masked: bool) -> DriftConfig:
    return DriftConfig(
        scheme=Scheme(scheme),
        tau=tau,
        T=cfg.sinkhorn_iters if scheme == Scheme.SINKHORN.value else None,
        mask_self=masked,
        cost_kind=KERNEL_COSTS[cfg.kernel],
    )


def write_cloud_csv(X: PointCloud, path) -> None:
    """Point cloud as CSV rows, one point per row; coordinates dimensionless."""
    header = [f"coord_{k}" for k in range(X.d)]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in X.points:
            writer.writerow([repr(float(v)) for v in row])


def read_cloud_csv(path) -> PointCloud:
    """Parse a cloud from coord_* columns; trajectory files reduce to their
    final recorded step. Malformed rows are reported with their line number."""
    path = Path(path)
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise ConfigError(f"{path}: empty CSV, expected a header row")
        coord_idx = [i for i, name in enumerate(header) if name.startswith("coord_")]
        if not coord_idx:
            raise ConfigError(f"{path}: header has no coord_* columns: {header}")
        step_idx = header.index("step") if "step" in header else None
        rows, steps = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                rows.append([float(row[i]) for i in coord_idx])
                if step_idx is not None:
                    steps.append(int(float(row[step_idx])))
            except (ValueError, IndexError) as exc:
                raise ConfigError(f"{path}: line {lineno}: malformed row ({exc})") from exc
    if not rows:
        raise ConfigError(f"{path}: no data rows")
    points = np.asarray(rows, dtype=np.float64)
    if step_idx is not None:
        last = max(steps)
        points = points[np.asarray(steps) == last]
    return PointCloud(points)


def _write_records_csv(records, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["iteration", "loss", "w2sq", "seconds"])
        for r in records:
            writer.writerow([r.iteration, repr(r.loss), repr(r.w2sq), repr(r.seconds)])


def _write_json(payload: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# trajectories

def _two_mode_target(n: int, gen: np.random.Generator) -> PointCloud:
    # Fig-1-style instance: standard normal source flowing to a shifted
    # bimodal target; the pair is drawn once per invocation from the base seed
    centers = np.array([[2.0, 2.0], [2.0, -2.0]])
    idx = gen.integers(0, 2, size=n)
    return PointCloud(centers[idx] + 0.3 * gen.standard_normal((n, 2)))


def _trajectory_cell(payload: dict) -> dict:
    cell_dir = Path(payload["dir"])
    cell_dir.mkdir(parents=True, exist_ok=True)
    record = {
        "slug": payload["slug"],
        "scheme": payload["scheme"],
        "tau": payload["tau"],
        "masked": payload["masked"],
        "final_w2sq": None,
        "error": None,
    }
    X0 = PointCloud(payload["x0"])
    Y = PointCloud(payload["y"])
    write_cloud_csv(Y, cell_dir / "target.csv")
    cfg = DriftConfig(
        scheme=Scheme(payload["scheme"]),
        tau=payload["tau"],
        T=payload["T"],
        mask_self=payload["masked"],
        cost_kind=CostKind(payload["cost_kind"]),
    )
    try:
        traj = simulate(X0, Y, cfg, payload["eta"], payload["steps"], payload["snapshot_every"])
    except NumericalError as exc:
        record["error"] = str(exc)
        return record
    write_trajectory_csv(traj, cell_dir / "trajectory.csv")
    record["final_w2sq"] = exact_w2sq(traj.final(), Y).total_cost
    return record


def cmd_trajectories(cfg: ExperimentConfig) -> dict:
    rng = RngState(cfg.seed)
    X0 = sample_prior(cfg.n_particles, 2, rng)
    Y = _two_mode_target(cfg.n_particles, rng.generator)
    base = Path(cfg.outdir) / "trajectories"
    payloads = []
    for tau in cfg.taus:
        for scheme, masked in _variants(cfg, dual_mask=True):
            slug = cell_slug(scheme, tau, masked, cfg.seed)
            payloads.append({
                "slug": slug,
                "dir": str(base / slug),
                "scheme": scheme,
                "tau": tau,
                "masked": masked,
                "T": cfg.sinkhorn_iters if scheme == Scheme.SINKHORN.value else None,
                "cost_kind": KERNEL_COSTS[cfg.kernel].value,
                "eta": cfg.eta,
                "steps": cfg.steps,
                "snapshot_every": cfg.snapshot_every,
                "x0": X0.points,
                "y": Y.points,
            })
    cells = _run_cells(_trajectory_cell, payloads, cfg.jobs)
    summary = {"config": asdict(cfg), "cells": cells}
    base.mkdir(parents=True, exist_ok=True)
    _write_json(summary, base / "summary.json")
    return summary


# ---------------------------------------------------------------------------
# train-toy

def _train_cell(payload: dict) -> dict:
    cell_dir = Path(payload["dir"])
    cell_dir.mkdir(parents=True, exist_ok=True)
    record = {
        "slug": payload["slug"],
        "target": payload["target"],
        "scheme": payload["scheme"],
        "tau": payload["tau"],
        "masked": payload["masked"],
        "final_w2sq": None,
        "seconds": None,
        "error": None,
    }
    rng = RngState(payload["cell_seed"])
    params = init_params([2, *payload["hidden"], 2], Activation.RELU, rng)
    target = make_target(payload["target"])
    cfg = DriftConfig(
        scheme=Scheme(payload["scheme"]),
        tau=payload["tau"],
        T=payload["T"],
        mask_self=payload["masked"],
        cost_kind=CostKind(payload["cost_kind"]),
    )

    def sampler(n, r):
        return sample(target, n, r)

    t0 = time.perf_counter()
    try:
        params, records = train(
            params, sampler, cfg,
            iters=payload["iters"], batch_n=payload["batch_n"], lr=payload["lr"],
            eval_every=payload["eval_every"], rng=rng,
        )
    except NumericalError as exc:
        record["error"] = str(exc)
        _write_records_csv([], cell_dir / "records.csv")
        return record
    record["seconds"] = time.perf_counter() - t0
    _write_records_csv(records, cell_dir / "records.csv")
    save_checkpoint(params, cell_dir / "checkpoint.json")
    generated = forward(params, sample_prior(payload["sample_out"], 2, rng))
    write_cloud_csv(generated, cell_dir / "final_samples.csv")
    write_cloud_csv(sample(target, payload["sample_out"], rng), cell_dir / "target_samples.csv")
    if records:
        record["final_w2sq"] = records[-1].w2sq
    return record


def cmd_train_toy(cfg: ExperimentConfig) -> dict:
    base = Path(cfg.outdir) / "train-toy"
    payloads = []
    for target in cfg.targets:
        for tau in cfg.taus:
            for scheme, masked in _variants(cfg, dual_mask=False):
                slug = cell_slug(scheme, tau, masked, cfg.seed, target=target)
                payloads.append({
                    "slug": slug,
                    "dir": str(base / slug),
                    "target": target,
                    "scheme": scheme,
                    "tau": tau,
                    "masked": masked,
                    "T": cfg.sinkhorn_iters if scheme == Scheme.SINKHORN.value else None,
                    "cost_kind": KERNEL_COSTS[cfg.kernel].value,
                    "iters": cfg.iters,
                    "batch_n": cfg.batch_n,
                    "lr": cfg.lr,
                    "eval_every": cfg.eval_every,
                    "hidden": cfg.hidden,
                    "sample_out": cfg.sample_out,
                    "cell_seed": _cell_seed(cfg.seed, slug),
                })
    cells = _run_cells(_train_cell, payloads, cfg.jobs)
    summary = {"config": asdict(cfg), "cells": cells}
    base.mkdir(parents=True, exist_ok=True)
    _write_json(summary, base / "summary.json")
    return summary


def _run_cells(worker, payloads: list[dict], jobs: int) -> list[dict]:
    if jobs == 1 or len(payloads) == 1:
        results = []
        for k, payload in enumerate(payloads, start=1):
            rec = worker(payload)
            _print_cell(rec, k, len(payloads))
            results.append(rec)
        return results
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        results = list(pool.map(worker, payloads))
    for k, rec in enumerate(results, start=1):
        _print_cell(rec, k, len(payloads))
    return results


def _print_cell(rec: dict, k: int, total: int) -> None:
    if rec["error"] is not None:
        print(f"[{k}/{total}] {rec['slug']}: FAILED ({rec['error']})")
    elif rec["final_w2sq"] is not None:
        print(f"[{k}/{total}] {rec['slug']}: w2sq={rec['final_w2sq']:.6g}")
    else:
        print(f"[{k}/{total}] {rec['slug']}: done")


# ---------------------------------------------------------------------------
# theory / eval

def cmd_theory(cfg: ExperimentConfig) -> dict:
    report = theory.run_all(only=cfg.only)
    report["config"] = asdict(cfg)
    base = Path(cfg.outdir) / "theory"
    base.mkdir(parents=True, exist_ok=True)
    _write_json(report, base / "report.json")
    for check in report["checks"]:
        print(f"{check['check']}: {'pass' if check['passed'] else 'FAIL'}")
    print(f"overall: {'pass' if report['passed'] else 'FAIL'}")
    return report


def cmd_eval(cfg: ExperimentConfig) -> dict:
    generated = read_cloud_csv(cfg.generated)
    rng = RngState(cfg.seed)
    target_kind = cfg.target if cfg.target in TARGET_NAMES else None
    if target_kind is None and not Path(cfg.target).exists():
        raise ConfigError(f"target {cfg.target!r} is neither a toy target name nor an existing CSV")
    if target_kind is not None:
        n_eval = min(generated.n, cfg.cap)
        target_cloud = sample(make_target(target_kind), n_eval, rng)
    else:
        target_cloud = read_cloud_csv(cfg.target)
        n_eval = min(generated.n, target_cloud.n, cfg.cap)
        target_cloud = _subsample(target_cloud, n_eval, rng)
    gen_eval = _subsample(generated, n_eval, rng)
    w2 = exact_w2sq(gen_eval, target_cloud, cap=cfg.cap).total_cost
    divergences = [
        {"tau": t, "value": sinkhorn_divergence(gen_eval, target_cloud, t,
                                                cost_kind=KERNEL_COSTS[cfg.kernel]).s_tau}
        for t in cfg.taus
    ]
    coverage = None
    if target_kind == TargetKind.EIGHT_GAUSSIANS.value:
        centers = eight_gaussians().centers()
        coverage = mode_coverage(generated, centers, cfg.coverage_radius)
    report = {
        "config": asdict(cfg),
        "n_evaluated": n_eval,
        "w2sq": w2,
        "sinkhorn_divergence": divergences,
        "mode_coverage": coverage,
    }
    base = Path(cfg.outdir) / "eval"
    base.mkdir(parents=True, exist_ok=True)
    _write_json(report, base / "metrics.json")
    print(json.dumps(report, indent=2, sort_keys=True))
    return report


def _subsample(X: PointCloud, n: int, rng: RngState) -> PointCloud:
    if X.n == n:
        return X
    idx = np.sort(rng.generator.choice(X.n, size=n, replace=False))
    return PointCloud(X.points[idx])


# ---------------------------------------------------------------------------
# argument parsing / config resolution

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="driftfield",
        description="Drift-field particle flows, toy generator training, and verification runs.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(sp):
        sp.add_argument("--config", type=str, default=None, help="JSON config file; flags override it")
        sp.add_argument("--outdir", type=str, default=None, help="output root (default: runs)")
        sp.add_argument("--seed", type=int, default=None, help="base RNG seed (u64)")
        sp.add_argument("--jobs", type=int, default=None, help="max concurrent grid cells")
        sp.add_argument("--scheme", choices=SCHEME_NAMES, default=None, help="restrict to one scheme")
        sp.add_argument("--tau", type=str, default=None, help="comma-separated tau list, e.g. 0.01,0.1")
        sp.add_argument("--mask", choices=("on", "off"), default=None, help="force self-distance masking")
        sp.add_argument("--sinkhorn-iters", type=int, default=None, help="fixed half-step count (odd)")
        sp.add_argument("--kernel", choices=sorted(KERNEL_COSTS), default=None, help="kernel family")

    sp = sub.add_parser("trajectories", help="tau-sweep Euler flows, one CSV per grid cell")
    common(sp)
    sp.add_argument("--n", type=int, default=None, help="particles per cloud")
    sp.add_argument("--eta", type=float, default=None, help="Euler step size")
    sp.add_argument("--steps", type=int, default=None, help="Euler step count")
    sp.add_argument("--snapshot-every", type=int, default=None, help="snapshot stride")

    sp = sub.add_parser("train-toy", help="train toy generators per (target, scheme, tau) cell")
    common(sp)
    sp.add_argument("--target", choices=TARGET_NAMES, default=None, help="restrict to one target")
    sp.add_argument("--iters", type=int, default=None, help="training iterations")
    sp.add_argument("--batch-n", type=int, default=None, help="minibatch size")
    sp.add_argument("--lr", type=float, default=None, help="Adam learning rate")
    sp.add_argument("--eval-every", type=int, default=None, help="evaluation stride")
    sp.add_argument("--sample-out", type=int, default=None, help="final sample cloud size")

    sp = sub.add_parser("theory", help="run the numerical verification suite")
    common(sp)
    sp.add_argument("--only", choices=theory.CHECK_NAMES, default=None, help="run a single check")

    sp = sub.add_parser("eval", help="metrics for a generated CSV against a target")
    common(sp)
    sp.add_argument("--generated", type=str, default=None, help="generated cloud CSV")
    sp.add_argument("--target", type=str, default=None, help="target CSV path or toy target name")
    sp.add_argument("--cap", type=int, default=None, help="assignment size cap")
    sp.add_argument("--coverage-radius", type=float, default=None, help="mode ownership radius")
    return parser


# argparse attribute -> config field, applied when the flag was given
_FLAG_FIELDS = {
    "outdir": "outdir",
    "seed": "seed",
    "jobs": "jobs",
    "mask": "mask",
    "sinkhorn_iters": "sinkhorn_iters",
    "kernel": "kernel",
    "n": "n_particles",
    "eta": "eta",
    "steps": "steps",
    "snapshot_every": "snapshot_every",
    "iters": "iters",
    "batch_n": "batch_n",
    "lr": "lr",
    "eval_every": "eval_every",
    "sample_out": "sample_out",
    "generated": "generated",
    "cap": "cap",
    "coverage_radius": "coverage_radius",
    "only": "only",
}


def _parse_tau_list(text: str) -> list[float]:
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise ConfigError(f"could not parse tau list {text!r}: {exc}") from exc
    if not values:
        raise ConfigError(f"empty tau list {text!r}")
    return values


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    data: dict = {"subcommand": args.subcommand, "taus": list(_TAUS[args.subcommand])}
    if args.config is not None:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                loaded = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {args.config}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError(f"config file {args.config} must hold a JSON object")
        known = {f.name for f in fields(ExperimentConfig)} - {"subcommand"}
        unknown = sorted(set(loaded) - known)
        if unknown:
            raise ConfigError(f"unknown config keys in {args.config}: {unknown}")
        data.update(loaded)
    for attr, field_name in _FLAG_FIELDS.items():
        value = getattr(args, attr, None)
        if value is not None:
            data[field_name] = value
    if getattr(args, "scheme", None) is not None:
        data["schemes"] = [args.scheme]
    if getattr(args, "tau", None) is not None:
        data["taus"] = _parse_tau_list(args.tau)
    if args.subcommand == "train-toy" and getattr(args, "target", None) is not None:
        data["targets"] = [args.target]
    if args.subcommand == "eval" and getattr(args, "target", None) is not None:
        data["target"] = args.target
    return ExperimentConfig(**data)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if cfg.subcommand == "trajectories":
            summary = cmd_trajectories(cfg)
        elif cfg.subcommand == "train-toy":
            summary = cmd_train_toy(cfg)
        elif cfg.subcommand == "theory":
            report = cmd_theory(cfg)
            return EXIT_OK if report["passed"] else EXIT_THEORY
        else:
            cmd_eval(cfg)
            return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    failed = [c for c in summary["cells"] if c["error"] is not None]
    if failed:
        print(f"{len(failed)} of {len(summary['cells'])} cells failed numerically", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
