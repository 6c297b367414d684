"""Shared fixtures: real run directories produced by the driftfield CLI.

The renderer only sees the CLI's file contracts, so fixtures shell out to
the installed console script instead of importing the solver package.
Grids keep the default shape (all schemes, default tau rows, both targets)
at reduced particle and iteration counts to stay fast.
"""

from __future__ import annotations

import json
import shutil
import subprocess

import pytest

DRIFTFIELD = shutil.which("driftfield")


def run_cli(args, cwd):
    assert DRIFTFIELD, "driftfield console script not on PATH; install the solver package"
    proc = subprocess.run([DRIFTFIELD, *args], cwd=cwd, capture_output=True, text=True)
    assert proc.returncode == 0, f"driftfield {' '.join(args)} failed:\n{proc.stderr}"
    return proc


@pytest.fixture(scope="session")
def traj_dir(tmp_path_factory):
    """Default trajectory grid (4 tau rows, 3 schemes, dual mask variants)."""
    root = tmp_path_factory.mktemp("traj")
    run_cli(["trajectories", "--outdir", str(root), "--n", "12", "--steps", "10",
             "--seed", "3"], cwd=root)
    return root / "trajectories"


@pytest.fixture(scope="session")
def toy_dir(tmp_path_factory):
    """Default train-toy grid (2 targets, 3 taus, 3 schemes) at tiny scale."""
    root = tmp_path_factory.mktemp("toy")
    cfg = root / "cfg.json"
    cfg.write_text(json.dumps({"hidden": [8]}), encoding="utf-8")
    run_cli(["train-toy", "--outdir", str(root), "--config", str(cfg),
             "--iters", "6", "--batch-n", "16", "--eval-every", "3",
             "--sample-out", "40", "--seed", "4"], cwd=root)
    return root / "train-toy"


@pytest.fixture()
def single_cell_dir(tmp_path):
    """Handwritten one-cell run directory for the 1x1 grid case."""
    indir = tmp_path / "single"
    cell = indir / "one-sided_tau0p100_mask-on_seed1"
    cell.mkdir(parents=True)
    (indir / "summary.json").write_text(json.dumps({
        "config": {"subcommand": "trajectories", "n_particles": 2},
        "cells": [{"slug": "one-sided_tau0p100_mask-on_seed1",
                   "scheme": "one-sided", "tau": 0.1, "masked": True,
                   "final_w2sq": 1.0, "error": None}],
    }, sort_keys=True), encoding="utf-8")
    (cell / "trajectory.csv").write_text(
        "step,particle_id,coord_0,coord_1\n"
        "0,0,0.0,0.0\n0,1,1.0,0.0\n"
        "5,0,0.5,0.25\n5,1,1.5,0.25\n",
        encoding="utf-8")
    (cell / "target.csv").write_text(
        "coord_0,coord_1\n0.5,1.0\n1.5,1.0\n", encoding="utf-8")
    return indir
