"""Quadrature rules on the plane under the normalized area measure.

Everything in this package integrates against dA = d^2z / pi, so the unit
disk carries total measure 1. Two grid layouts are provided:

* polar: Gauss-Legendre nodes in radius crossed with uniformly spaced
  angles (periodic trapezoid rule on the circle),
* cartesian: Gauss-Legendre by Gauss-Legendre on an axis-aligned rectangle.

Sums over grids rely on numpy's pairwise summation, which is deterministic
for a fixed grid and keeps cancellation error near machine level.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np


@dataclass(frozen=True)
class Quadrature1D:
    """One-dimensional rule; weights sum to the interval length."""

    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    interval: tuple[float, float] = (-1.0, 1.0)


@dataclass(frozen=True)
class Grid2D:
    """Planar quadrature nodes with dA = d^2z/pi weights.

    The construction parameters are retained so callers can rebuild
    refined or recentered copies of a grid.
    """

    nodes: np.ndarray = field(repr=False)       # complex, flat
    weights: np.ndarray = field(repr=False)     # real, dA units
    layout: str = "polar"                       # "polar" | "cartesian"
    center: complex = 0j
    rmin: float = 0.0
    rmax: float = 0.0
    nr: int = 0
    ntheta: int = 0
    bounds: tuple = ()
    nx: int = 0
    ny: int = 0

    def __post_init__(self):
        if self.layout not in ("polar", "cartesian"):
            raise ValueError(f"unknown grid layout {self.layout!r}")

    @property
    def size(self) -> int:
        return self.nodes.size


@lru_cache(maxsize=128)
def _leggauss(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(n: int, a: float = -1.0, b: float = 1.0) -> Quadrature1D:
    """Gauss-Legendre rule with ``n`` nodes on the interval (a, b).

    Parameters
    ----------
    n : int
        Number of nodes; must be at least 1. The one-node rule on (-1, 1)
        is the midpoint rule (node 0, weight 2).
    a, b : float
        Interval endpoints, a < b.

    Returns
    -------
    Quadrature1D
        Nodes and weights; the weights sum to b - a and the rule is exact
        for polynomials of degree <= 2n - 1.

    Raises
    ------
    ValueError
        If ``n < 1`` or the interval is empty.
    """
    if n < 1:
        raise ValueError(f"need at least one node, got n={n}")
    if not b > a:
        raise ValueError(f"empty interval ({a}, {b})")
    x, w = _leggauss(n)
    half = 0.5 * (b - a)
    return Quadrature1D(nodes=a + half * (x + 1.0), weights=half * w,
                        interval=(a, b))


def polar_grid(rmax: float, nr: int = 200, ntheta: int = 256,
               center: complex = 0j, rmin: float = 0.0) -> Grid2D:
    """Polar product grid on an annulus (or disk) with dA weights.

    Radial nodes are Gauss-Legendre on (rmin, rmax); angles are uniform,
    theta_j = 2 pi j / ntheta. The weight attached to node
    center + r e^{i theta} is 2 r w_r / ntheta, which integrates dA
    exactly in the angular direction for trigonometric polynomials of
    degree < ntheta and spectrally in radius for smooth integrands.

    The full unit disk (rmax=1) carries total weight 1 to machine
    precision, since sum(2 r w_r) is the exact Gauss-Legendre value of
    integral 2r dr.
    """
    if rmax <= rmin:
        raise ValueError(f"need rmax > rmin, got ({rmin}, {rmax})")
    if ntheta < 4:
        raise ValueError("ntheta must be at least 4")
    rad = gauss_legendre(nr, rmin, rmax)
    theta = 2.0 * np.pi * np.arange(ntheta) / ntheta
    r = rad.nodes[:, None]
    nodes = center + r * np.exp(1j * theta[None, :])
    weights = np.broadcast_to(
        (2.0 / ntheta) * rad.nodes[:, None] * rad.weights[:, None],
        nodes.shape).copy()
    return Grid2D(nodes=nodes.ravel(), weights=weights.ravel(),
                  layout="polar", center=center, rmin=rmin, rmax=rmax,
                  nr=nr, ntheta=ntheta)


def cartesian_grid(bounds: tuple[float, float, float, float],
                   nx: int = 64, ny: int = 64) -> Grid2D:
    """Tensor Gauss-Legendre grid on the rectangle (xa, xb) x (ya, yb)."""
    xa, xb, ya, yb = bounds
    qx = gauss_legendre(nx, xa, xb)
    qy = gauss_legendre(ny, ya, yb)
    nodes = qx.nodes[:, None] + 1j * qy.nodes[None, :]
    weights = (qx.weights[:, None] * qy.weights[None, :]) / np.pi
    return Grid2D(nodes=nodes.ravel(), weights=weights.ravel(),
                  layout="cartesian", bounds=tuple(bounds), nx=nx, ny=ny)


def integrate2d(grid: Grid2D, f) -> complex:
    """Integrate a field against the grid's dA weights.

    Parameters
    ----------
    grid : Grid2D
    f : callable or array_like
        Either a function of the complex nodes or an array of samples
        aligned with ``grid.nodes``.

    Returns
    -------
    complex or float
        The weighted pairwise sum. Real input yields a real result.

    Raises
    ------
    ValueError
        If any sample is non-finite (integration failure) or an array of
        samples does not match the grid.
    """
    vals = np.asarray(f(grid.nodes) if callable(f) else f)
    if vals.shape != grid.nodes.shape:
        raise ValueError(
            f"sample shape {vals.shape} does not match grid {grid.nodes.shape}")
    if not np.all(np.isfinite(vals)):
        raise ValueError("non-finite integrand sample on the grid")
    return np.sum(vals * grid.weights)


def refine_polar(grid: Grid2D, factor: float = 2.0) -> Grid2D:
    """Polar grid with node counts scaled by ``factor`` at fixed coverage."""
    if grid.layout != "polar":
        raise ValueError("refine_polar expects a polar grid")
    return polar_grid(grid.rmax, max(2, round(grid.nr * factor)),
                      max(4, round(grid.ntheta * factor)),
                      center=grid.center, rmin=grid.rmin)
