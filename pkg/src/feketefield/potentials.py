"""External potentials for the planar Coulomb gas.

A potential is a real field Q on the plane, smooth where it matters and
growing faster than log|z|^2 near infinity so that the gas stays confined.
The Laplacian convention is Delta = (1/4)(d_xx + d_yy), i.e. Delta|z|^2 = 1,
and gradients are returned as complex numbers g = Q_x + i Q_y.

Built-in families:

* ginibre            Q = |z|^2
* mittag_leffler(p)  Q = |z|^(2p), radially symmetric, p > 0
* ellipse(t)         Q = |z|^2 - t Re(z^2), 0 <= t < 1

Custom scalar potentials are supported through ``custom_potential``; their
derivatives fall back to central differences with step 1e-5 unless analytic
callables are supplied.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

FD_STEP = 1e-5


@dataclass(frozen=True)
class Potential:
    """Tagged potential record.

    ``kind`` is one of "ginibre", "mittag_leffler", "ellipse", "custom".
    ``support_kind`` describes the expected droplet geometry and is used by
    the equilibrium module to pick a solver ("disk", "annulus", "ellipse",
    "radial" for radial potentials whose droplet shape is found at run
    time).
    """

    kind: str
    p: float = 1.0
    t: float = 0.0
    radial: bool = False
    func: Optional[Callable] = field(default=None, repr=False)
    grad_func: Optional[Callable] = field(default=None, repr=False)
    lap_func: Optional[Callable] = field(default=None, repr=False)

    @property
    def support_kind(self) -> str:
        if self.kind in ("ginibre", "mittag_leffler"):
            return "disk"
        if self.kind == "ellipse":
            return "ellipse"
        return "radial" if self.radial else "unknown"

    def label(self) -> str:
        if self.kind == "mittag_leffler":
            return f"mittag_leffler(p={self.p:g})"
        if self.kind == "ellipse":
            return f"ellipse(t={self.t:g})"
        return self.kind


def ginibre() -> Potential:
    """Q = |z|^2. Droplet is the unit disk; Delta Q = 1."""
    return Potential(kind="ginibre", radial=True)


def mittag_leffler(p: float) -> Potential:
    """Q = |z|^(2p) for p > 0.

    Delta Q = p^2 |z|^(2p-2); the droplet is the disk of radius
    p^(-1/(2p)). For p < 1 the Laplacian blows up at the origin but stays
    integrable, which is all the equilibrium machinery needs.
    """
    if not p > 0:
        raise ValueError(f"mittag_leffler exponent must be positive, got {p}")
    return Potential(kind="mittag_leffler", p=float(p), radial=True)


def ellipse_potential(t: float) -> Potential:
    """Q = |z|^2 - t Re(z^2) with 0 <= t < 1.

    Delta Q = 1 and the droplet is the ellipse with semi-axes
    a = sqrt((1+t)/(1-t)), b = 1/a (area pi a b = pi, dA-mass 1).
    At t = 0 this reduces to the ginibre potential.
    """
    if not 0.0 <= t < 1.0:
        raise ValueError(f"ellipse parameter must satisfy 0 <= t < 1, got {t}")
    return Potential(kind="ellipse", t=float(t), radial=(t == 0.0))


def custom_potential(func: Callable, radial: bool = False,
                     grad: Optional[Callable] = None,
                     laplacian: Optional[Callable] = None) -> Potential:
    """Wrap a user-supplied scalar field Q(z).

    ``func`` must accept complex arrays and return real values on the whole
    plane. Analytic first and second derivatives are optional; finite
    differences with step 1e-5 are used otherwise.
    """
    return Potential(kind="custom", radial=radial, func=func,
                     grad_func=grad, lap_func=laplacian)


def eval_potential(pot: Potential, z) -> np.ndarray:
    """Evaluate Q at complex points (vectorized)."""
    z = np.asarray(z, dtype=complex)
    if pot.kind == "ginibre":
        return (z.real**2 + z.imag**2)
    if pot.kind == "mittag_leffler":
        return (z.real**2 + z.imag**2) ** pot.p
    if pot.kind == "ellipse":
        return z.real**2 + z.imag**2 - pot.t * (z.real**2 - z.imag**2)
    if pot.kind == "custom":
        return np.asarray(pot.func(z), dtype=float)
    raise ValueError(f"unknown potential kind {pot.kind!r}")


def grad_potential(pot: Potential, z) -> np.ndarray:
    """Gradient of Q as a complex field Q_x + i Q_y."""
    z = np.asarray(z, dtype=complex)
    if pot.kind == "ginibre":
        return 2.0 * z
    if pot.kind == "mittag_leffler":
        r2 = z.real**2 + z.imag**2
        # radial derivative 2p r^(2p-1) along z/r, i.e. 2p r^(2p-2) z
        with np.errstate(divide="ignore", invalid="ignore"):
            g = 2.0 * pot.p * r2 ** (pot.p - 1.0) * z
        return np.where(r2 > 0, g, 0.0 if pot.p >= 1 else np.nan)
    if pot.kind == "ellipse":
        return 2.0 * (1.0 - pot.t) * z.real + 2j * (1.0 + pot.t) * z.imag
    if pot.grad_func is not None:
        return np.asarray(pot.grad_func(z), dtype=complex)
    h = FD_STEP
    qx = (eval_potential(pot, z + h) - eval_potential(pot, z - h)) / (2 * h)
    qy = (eval_potential(pot, z + 1j * h) - eval_potential(pot, z - 1j * h)) / (2 * h)
    return qx + 1j * qy


def laplacian_potential(pot: Potential, z) -> np.ndarray:
    """Quarter-Laplacian of Q, so laplacian_potential(ginibre(), z) == 1."""
    z = np.asarray(z, dtype=complex)
    if pot.kind == "ginibre":
        return np.ones(z.shape)
    if pot.kind == "mittag_leffler":
        r2 = z.real**2 + z.imag**2
        if pot.p == 1.0:
            return np.ones(z.shape)
        with np.errstate(divide="ignore"):
            lap = pot.p**2 * r2 ** (pot.p - 1.0)
        return np.where(r2 > 0, lap, np.inf if pot.p < 1 else 0.0)
    if pot.kind == "ellipse":
        return np.ones(z.shape)
    if pot.lap_func is not None:
        return np.asarray(pot.lap_func(z), dtype=float)
    h = FD_STEP
    stencil = (eval_potential(pot, z + h) + eval_potential(pot, z - h)
               + eval_potential(pot, z + 1j * h) + eval_potential(pot, z - 1j * h)
               - 4.0 * eval_potential(pot, z))
    return 0.25 * stencil / h**2


@dataclass(frozen=True)
class GrowthReport:
    ok: bool
    radii: np.ndarray = field(repr=False)
    min_ratios: np.ndarray = field(repr=False)


def growth_check(pot: Potential, radii=None, nang: int = 48) -> GrowthReport:
    """Check the confinement condition liminf Q / log|z|^2 > 1.

    Samples Q on circles of growing radius and records the minimum of
    Q / (2 log r) over each circle. The check passes when the ratios exceed
    1 at the largest radii and are not trending down toward 1.
    """
    if radii is None:
        radii = np.array([10.0, 30.0, 100.0, 300.0, 1000.0])
    radii = np.asarray(radii, dtype=float)
    ang = np.exp(2j * np.pi * np.arange(nang) / nang)
    ratios = np.empty(radii.size)
    for i, r in enumerate(radii):
        q = eval_potential(pot, r * ang)
        ratios[i] = np.min(q) / (2.0 * np.log(r))
    tail = ratios[-2:]
    ok = bool(np.all(tail > 1.0) and ratios[-1] >= 0.999 * ratios[-2] - 1e-12)
    return GrowthReport(ok=ok, radii=radii, min_ratios=ratios)
