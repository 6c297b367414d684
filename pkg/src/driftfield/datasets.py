"""Seeded samplers for the 2-D toy targets and the Gaussian prior.

Geometry defaults (circle radius, noise levels, board extent) are declared
here rather than inferred; see the ToyTarget factories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigError
from .geometry import PointCloud, RngState


class TargetKind(str, Enum):
    EIGHT_GAUSSIANS = "8gaussians"
    CHECKERBOARD = "checkerboard"
    TWO_MOONS = "2moons"
    SPIRAL = "spiral"


@dataclass(frozen=True)
class ToyTarget:
    """A named 2-D target distribution with its scale parameters."""

    kind: TargetKind
    radius: float = 2.0        # mode circle radius (8gaussians)
    std: float = 0.2           # component std (8gaussians)
    extent: float = 2.0        # board spans [-extent, extent]^2 (checkerboard)
    tiles: int = 4             # tiles per side (checkerboard)
    noise: float = 0.08        # additive Gaussian noise (2moons, spiral)
    turns: float = 2.0         # spiral revolutions
    scale: float = 2.0         # overall scale (2moons, spiral)

    def centers(self) -> PointCloud:
        """Mode centers; defined for the 8-Gaussians target."""
        if self.kind is not TargetKind.EIGHT_GAUSSIANS:
            raise ConfigError(f"{self.kind.value} has no mode centers")
        angles = np.linspace(0.0, 2.0 * math.pi, 8, endpoint=False)
        pts = self.radius * np.stack([np.cos(angles), np.sin(angles)], axis=1)
        return PointCloud(pts)


def eight_gaussians(radius: float = 2.0, std: float = 0.2) -> ToyTarget:
    return ToyTarget(TargetKind.EIGHT_GAUSSIANS, radius=radius, std=std)


def checkerboard(extent: float = 2.0, tiles: int = 4) -> ToyTarget:
    return ToyTarget(TargetKind.CHECKERBOARD, extent=extent, tiles=tiles)


def two_moons(noise: float = 0.08, scale: float = 2.0) -> ToyTarget:
    return ToyTarget(TargetKind.TWO_MOONS, noise=noise, scale=scale)


def spiral(noise: float = 0.05, turns: float = 2.0, scale: float = 2.0) -> ToyTarget:
    return ToyTarget(TargetKind.SPIRAL, noise=noise, turns=turns, scale=scale)


def make_target(kind: TargetKind | str) -> ToyTarget:
    kind = TargetKind(kind)
    if kind is TargetKind.EIGHT_GAUSSIANS:
        return eight_gaussians()
    if kind is TargetKind.CHECKERBOARD:
        return checkerboard()
    if kind is TargetKind.TWO_MOONS:
        return two_moons()
    return spiral()


def _sample_eight_gaussians(t: ToyTarget, n: int, gen: np.random.Generator) -> np.ndarray:
    centers = t.centers().points
    idx = gen.integers(0, 8, size=n)
    return centers[idx] + t.std * gen.standard_normal((n, 2))


def _sample_checkerboard(t: ToyTarget, n: int, gen: np.random.Generator) -> np.ndarray:
    # rejection-free: pick one of the dark cells, then a uniform point inside
    side = 2.0 * t.extent / t.tiles
    cells = [(i, j) for i in range(t.tiles) for j in range(t.tiles) if (i + j) % 2 == 0]
    cells = np.asarray(cells, dtype=np.float64)
    which = gen.integers(0, len(cells), size=n)
    corner = -t.extent + cells[which] * side
    return corner + side * gen.random((n, 2))


def _sample_two_moons(t: ToyTarget, n: int, gen: np.random.Generator) -> np.ndarray:
    theta = gen.random(n) * math.pi
    upper = gen.random(n) < 0.5
    x = np.where(upper, np.cos(theta), 1.0 - np.cos(theta))
    y = np.where(upper, np.sin(theta), 0.5 - np.sin(theta))
    pts = t.scale * (np.stack([x, y], axis=1) - np.array([0.5, 0.25]))
    return pts + t.noise * gen.standard_normal((n, 2))


def _sample_spiral(t: ToyTarget, n: int, gen: np.random.Generator) -> np.ndarray:
    theta = gen.random(n) * t.turns * 2.0 * math.pi
    # radius grows linearly with angle, so the curve never self-crosses
    r = theta / (t.turns * 2.0 * math.pi)
    pts = t.scale * np.stack([r * np.cos(theta), r * np.sin(theta)], axis=1)
    return pts + t.noise * gen.standard_normal((n, 2))


_SAMPLERS = {
    TargetKind.EIGHT_GAUSSIANS: _sample_eight_gaussians,
    TargetKind.CHECKERBOARD: _sample_checkerboard,
    TargetKind.TWO_MOONS: _sample_two_moons,
    TargetKind.SPIRAL: _sample_spiral,
}


def sample(target: ToyTarget, n: int, rng: RngState) -> PointCloud:
    """Draw n i.i.d. points from the target; deterministic given rng."""
    if n < 1:
        raise ConfigError(f"need n >= 1, got {n}")
    return PointCloud(_SAMPLERS[target.kind](target, n, rng.generator))


def sample_prior(n: int, d: int, rng: RngState) -> PointCloud:
    """Standard normal prior draws."""
    if n < 1 or d < 1:
        raise ConfigError(f"need n >= 1 and d >= 1, got n={n}, d={d}")
    return PointCloud(rng.generator.standard_normal((n, d)))
