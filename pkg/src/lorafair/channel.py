"""Node placement and log-distance propagation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MIN_DISTANCE = 1.0
# inner/middle/outer area edges as fractions of the cell radius
AREA_EDGES = (0.0, 0.33, 0.66, 1.0)
SKEW_SHARE_PER_MILLE = 666
DISTRIBUTIONS = ("uniform", "inner", "middle", "outer")


@dataclass(frozen=True)
class PropagationConfig:
    d0: float = 40.0
    pl_d0: float = 127.41
    gamma: float = 2.08
    shadowing_sigma: float = 0.0

    def __post_init__(self):
        if self.d0 <= 0:
            raise ValueError("d0 must be positive")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.shadowing_sigma < 0:
            raise ValueError("shadowing_sigma must be non-negative")


@dataclass(frozen=True)
class Position:
    x: float
    y: float

    @property
    def distance(self) -> float:
        return float(np.hypot(self.x, self.y))


def path_loss(d, cfg: PropagationConfig = PropagationConfig(), rng: np.random.Generator | None = None):
    """Log-distance path loss in dB.

    A log-normal shadowing term is added when ``cfg.shadowing_sigma > 0`` and
    an ``rng`` is supplied; callers draw it once per node to keep it static.
    """
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distance must be positive")
    loss = cfg.pl_d0 + 10.0 * cfg.gamma * np.log10(d / cfg.d0)
    if cfg.shadowing_sigma > 0 and rng is not None:
        loss = loss + rng.normal(0.0, cfg.shadowing_sigma, size=np.shape(loss))
    return float(loss) if loss.ndim == 0 else loss


def received_power(tp, d, cfg: PropagationConfig = PropagationConfig()):
    """Power (dBm) at the gateway for a node ``d`` metres away sending at ``tp`` dBm."""
    return tp - path_loss(d, cfg)


def _radii_in_annulus(rng: np.random.Generator, n: int, r_lo: float, r_hi: float) -> np.ndarray:
    # uniform by area: r^2 uniform on [r_lo^2, r_hi^2]
    u = rng.random(n)
    return np.sqrt(r_lo**2 + u * (r_hi**2 - r_lo**2))


def _radii_over(rng: np.random.Generator, n: int, bands: list[tuple[float, float]]) -> np.ndarray:
    areas = np.array([hi**2 - lo**2 for lo, hi in bands])
    which = rng.choice(len(bands), size=n, p=areas / areas.sum())
    r = np.empty(n)
    for k, (lo, hi) in enumerate(bands):
        mask = which == k
        r[mask] = _radii_in_annulus(rng, int(mask.sum()), lo, hi)
    return r


def place_nodes(
    n: int,
    radius: float,
    dist: str = "uniform",
    seed=None,
    placement: str = "area",
) -> list[Position]:
    """Drop ``n`` nodes in a disc of ``radius`` metres around the gateway.

    ``dist`` is one of ``uniform``, ``inner``, ``middle`` or ``outer``. The skewed
    kinds put floor(0.666 n) nodes in the named third of the radius and spread
    the rest uniformly (by area) over the other two thirds. ``placement="radius"``
    draws uniform distances instead of uniform area for the ``uniform`` kind.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if radius <= 0:
        raise ValueError("radius must be positive")
    if dist not in DISTRIBUTIONS:
        raise ValueError(f"unknown node distribution {dist!r}")
    if placement not in ("area", "radius"):
        raise ValueError(f"unknown placement {placement!r}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)

    if dist == "uniform":
        if placement == "area":
            r = _radii_in_annulus(rng, n, 0.0, radius)
        else:
            r = rng.random(n) * radius
    else:
        bands = [(lo * radius, hi * radius) for lo, hi in zip(AREA_EDGES, AREA_EDGES[1:])]
        target = bands.pop(DISTRIBUTIONS.index(dist) - 1)
        n_target = n * SKEW_SHARE_PER_MILLE // 1000
        r = np.concatenate(
            [_radii_in_annulus(rng, n_target, *target), _radii_over(rng, n - n_target, bands)]
        )
        rng.shuffle(r)
    r = np.clip(r, MIN_DISTANCE, None) if radius >= MIN_DISTANCE else np.full(n, radius)
    theta = rng.random(n) * 2.0 * np.pi
    return [Position(float(ri * np.cos(t)), float(ri * np.sin(t))) for ri, t in zip(r, theta)]
