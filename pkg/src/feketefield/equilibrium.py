"""Equilibrium measures and droplet geometry.

For a confining potential Q the equilibrium measure of the obstacle problem
is dsigma = chi_S DeltaQ dA, supported on the droplet S. This module solves
for the droplet among the supported shapes (disk, annulus, ellipse),
evaluates logarithmic potentials

    U^mu(z) = integral log(1/|z - w|) dmu(w),

the Robin constant gamma = min (Q + 2 U^sigma), the obstacle function
Qhat = gamma - 2 U^sigma, the weighted energy

    I_Q[mu] = integral (U^mu + Q) dmu,

and an equilibrium residual that measures how far a candidate measure is
from stationarity.

Log potentials evaluated at specific points use an exact ray decomposition
centered at the evaluation point: crossing radii of each ray with the
droplet are found analytically, and the radial integrals are spectrally
accurate Gauss-Legendre sums (with a quadratic substitution when the ray
starts at the singularity). The grid-based path with singular-cell
exclusion is also provided (``log_potential``) and is cross-checked against
the ray path in the test suite.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from feketefield.potentials import (
    Potential, eval_potential, grad_potential, laplacian_potential,
)
from feketefield.quadrature import Grid2D, gauss_legendre, polar_grid

_CONTAIN_TOL = 1e-12


@dataclass(frozen=True)
class Droplet:
    """Supported droplet shapes: disk, annulus (concentric), ellipse.

    The ellipse is axis-aligned and centered at the origin with semi-axes
    a >= b > 0. Disks and annuli may sit at any center.
    """

    shape: str
    center: complex = 0j
    radius: float = 0.0          # disk
    inner: float = 0.0           # annulus
    outer: float = 0.0           # annulus
    a: float = 0.0               # ellipse major semi-axis
    b: float = 0.0               # ellipse minor semi-axis

    def __post_init__(self):
        if self.shape not in ("disk", "annulus", "ellipse"):
            raise ValueError(f"unknown droplet shape {self.shape!r}")
        if self.shape == "ellipse" and not (self.a >= self.b > 0):
            raise ValueError("ellipse needs a >= b > 0")
        if self.shape == "annulus" and not (self.outer > self.inner >= 0):
            raise ValueError("annulus needs outer > inner >= 0")

    # -- basic geometry ----------------------------------------------------

    @property
    def outer_radius(self) -> float:
        """Radius of the smallest origin-centered disk containing S."""
        if self.shape == "disk":
            return abs(self.center) + self.radius
        if self.shape == "annulus":
            return abs(self.center) + self.outer
        return self.a

    @property
    def area(self) -> float:
        """Lebesgue area divided by pi (dA units)."""
        if self.shape == "disk":
            return self.radius**2
        if self.shape == "annulus":
            return self.outer**2 - self.inner**2
        return self.a * self.b

    def contains(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        if self.shape == "disk":
            return np.abs(z - self.center) <= self.radius + _CONTAIN_TOL
        if self.shape == "annulus":
            r = np.abs(z - self.center)
            return (r >= self.inner - _CONTAIN_TOL) & (r <= self.outer + _CONTAIN_TOL)
        return ((z.real / self.a) ** 2 + (z.imag / self.b) ** 2
                <= 1.0 + _CONTAIN_TOL)

    def boundary_points(self, k: int, component: str = "outer") -> np.ndarray:
        phi = 2.0 * np.pi * np.arange(k) / k
        if self.shape == "disk":
            return self.center + self.radius * np.exp(1j * phi)
        if self.shape == "annulus":
            r = self.outer if component == "outer" else self.inner
            return self.center + r * np.exp(1j * phi)
        return self.a * np.cos(phi) + 1j * self.b * np.sin(phi)

    # -- nearest boundary point and distance -------------------------------

    def nearest_boundary(self, z):
        """Nearest point of the droplet boundary and outward unit normal.

        Returns a pair of complex arrays (point, normal). The normal points
        out of S. For ellipses the minimizing boundary parameter is found
        by bisection plus Newton polish among all critical candidates; when
        two boundary points tie (points on the major axis inside the
        evolute) the smaller parameter wins.
        """
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        if self.shape == "disk":
            u = _unit(z - self.center)
            return self.center + self.radius * u, u
        if self.shape == "annulus":
            r = np.abs(z - self.center)
            u = _unit(z - self.center)
            use_outer = np.abs(r - self.outer) <= np.abs(r - self.inner)
            pt = np.where(use_outer, self.center + self.outer * u,
                          self.center + self.inner * u)
            nrm = np.where(use_outer, u, -u)
            return pt, nrm
        return self._ellipse_nearest(z)

    def distance(self, z) -> np.ndarray:
        """Unsigned distance to the droplet boundary, zero exactly on it."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        if self.shape == "disk":
            return np.abs(np.abs(z - self.center) - self.radius)
        if self.shape == "annulus":
            r = np.abs(z - self.center)
            return np.minimum(np.abs(r - self.outer), np.abs(r - self.inner))
        pt, _ = self._ellipse_nearest(z)
        return np.abs(z - pt)

    def _ellipse_nearest(self, z):
        a, b = self.a, self.b
        x, y = np.abs(z.real), np.abs(z.imag)
        # Critical points of the squared distance, reduced to the first
        # quadrant: f(phi) = a x sin - b y cos - (a^2 - b^2) sin cos = 0.
        # Candidates: the axes, the evolute root on the major axis, and a
        # bisection root; each is polished by clamped Newton.
        ncand = 4
        cand = np.empty(z.shape + (ncand,), dtype=float)
        cand[..., 0] = 0.0
        cand[..., 1] = 0.5 * np.pi
        if a > b:
            cand[..., 2] = np.arccos(np.clip(a * x / (a * a - b * b), -1.0, 1.0))
        else:
            cand[..., 2] = 0.25 * np.pi
        lo = np.zeros(z.shape)
        hi = np.full(z.shape, 0.5 * np.pi)
        for _ in range(46):
            mid = 0.5 * (lo + hi)
            neg = _ell_f(a, b, x, y, mid) < 0
            lo = np.where(neg, mid, lo)
            hi = np.where(neg, hi, mid)
        cand[..., 3] = 0.5 * (lo + hi)
        xe = x[..., None]
        ye = y[..., None]
        for _ in range(6):
            f = _ell_f(a, b, xe, ye, cand)
            df = (a * xe * np.cos(cand) + b * ye * np.sin(cand)
                  - (a * a - b * b) * np.cos(2.0 * cand))
            df = np.where(np.abs(df) < 1e-30, 1.0, df)
            cand = np.clip(cand - f / df, 0.0, 0.5 * np.pi)
        d2 = (xe - a * np.cos(cand)) ** 2 + (ye - b * np.sin(cand)) ** 2
        best = np.argmin(d2, axis=-1)
        phi = np.take_along_axis(cand, best[..., None], axis=-1)[..., 0]
        # map back from the quadrant; +phi is the smaller parameter on ties
        sx = np.where(z.real < 0, -1.0, 1.0)
        sy = np.where(z.imag < 0, -1.0, 1.0)
        pt = sx * a * np.cos(phi) + 1j * sy * b * np.sin(phi)
        nrm = _unit(sx * np.cos(phi) / a + 1j * sy * np.sin(phi) / b)
        return pt, nrm

    # -- ray crossings ------------------------------------------------------

    def ray_segments(self, origins, thetas: np.ndarray):
        """Intersections of rays origin + r e^{i theta}, r >= 0, with S.

        ``origins`` may be a scalar or an array; results broadcast to
        shape origins.shape + thetas.shape. Returns a list of (lo, hi)
        segment layers with empty crossings encoded as lo == hi. Disks and
        ellipses produce one layer, annuli two.
        """
        o = np.atleast_1d(np.asarray(origins, dtype=complex))[..., None]
        u = np.exp(1j * thetas)[None, :]
        if self.shape == "disk":
            return [_disk_ray(o - self.center, u, self.radius)]
        if self.shape == "annulus":
            lo_o, hi_o = _disk_ray(o - self.center, u, self.outer)
            lo_i, hi_i = _disk_ray(o - self.center, u, self.inner)
            inner_hit = hi_i > lo_i
            cut1 = np.where(inner_hit, lo_i, hi_o)
            cut2 = np.where(inner_hit, hi_i, hi_o)
            seg1 = (lo_o, np.clip(cut1, lo_o, hi_o))
            seg2 = (np.clip(cut2, lo_o, hi_o), hi_o)
            return [seg1, seg2]
        ox, oy = o.real, o.imag
        ux, uy = u.real, u.imag
        A = (ux / self.a) ** 2 + (uy / self.b) ** 2
        B = ox * ux / self.a**2 + oy * uy / self.b**2
        C = (ox / self.a) ** 2 + (oy / self.b) ** 2 - 1.0
        disc = B * B - A * C
        root = np.sqrt(np.maximum(disc, 0.0))
        s1 = np.where(disc > 0, (-B - root) / A, 0.0)
        s2 = np.where(disc > 0, (-B + root) / A, 0.0)
        lo = np.maximum(s1, 0.0)
        return [(lo, np.maximum(lo, s2))]


def _unit(v: np.ndarray) -> np.ndarray:
    av = np.abs(v)
    return np.where(av > 0, v / np.where(av == 0, 1.0, av), 1.0 + 0j)


def _ell_f(a, b, x, y, phi):
    return (a * x * np.sin(phi) - b * y * np.cos(phi)
            - (a * a - b * b) * np.sin(phi) * np.cos(phi))


def _disk_ray(rel, u, R: float):
    beta = (np.conj(u) * rel).real
    c0 = np.abs(rel) ** 2 - R * R
    disc = beta * beta - c0
    root = np.sqrt(np.maximum(disc, 0.0))
    s1 = np.where(disc > 0, -beta - root, 0.0)
    s2 = np.where(disc > 0, -beta + root, 0.0)
    lo = np.maximum(s1, 0.0)
    return lo, np.maximum(lo, np.maximum(s2, 0.0))


# ---------------------------------------------------------------------------
# droplet solvers
# ---------------------------------------------------------------------------

def _radial_mass(pot: Potential, r_from: float, r_to: float, n: int = 240) -> float:
    """Mass of DeltaQ dA on the annulus r_from < |z| < r_to (radial Q)."""
    if r_to <= r_from:
        return 0.0
    if r_from == 0.0:
        # quadratic substitution absorbs an integrable Laplacian singularity
        q = gauss_legendre(n, 0.0, 1.0)
        r = r_to * q.nodes**2
        jac = 2.0 * r_to * q.nodes
        lam = laplacian_potential(pot, r.astype(complex))
        return float(np.sum(lam * 2.0 * r * jac * q.weights))
    q = gauss_legendre(n, r_from, r_to)
    lam = laplacian_potential(pot, q.nodes.astype(complex))
    return float(np.sum(lam * 2.0 * q.nodes * q.weights))


def solve_droplet_radial(pot: Potential, rtol: float = 1e-10) -> Droplet:
    """Droplet of a radially symmetric potential by bisection on the mass.

    The outer radius R solves  integral_S DeltaQ dA = 1  to ``rtol``.  If
    the radial derivative of Q is negative near the origin the droplet is
    an annulus; its inner radius is the largest zero of Q'(r), where the
    field of the enclosed charge vanishes.
    """
    if not pot.radial:
        raise ValueError("solve_droplet_radial needs a radial potential")

    probe = np.geomspace(1e-4, 4.0, 160)
    qp = grad_potential(pot, probe.astype(complex)).real
    r0 = 0.0
    if np.any(qp < -1e-14):
        idx = np.where(qp < -1e-14)[0][-1]
        if idx + 1 >= probe.size:
            raise ValueError("potential is repulsive out to the probe range")
        lo, hi = probe[idx], probe[idx + 1]
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if grad_potential(pot, complex(mid)).real < 0:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-15 * max(1.0, hi):
                break
        r0 = 0.5 * (lo + hi)

    hi = max(2.0 * r0, 1.0)
    while _radial_mass(pot, r0, hi) < 1.0:
        hi *= 2.0
        if hi > 1e6:
            raise ValueError("could not bracket unit mass; potential too flat")
    lo = r0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _radial_mass(pot, r0, mid) < 1.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < rtol * max(1.0, hi):
            break
    R = 0.5 * (lo + hi)
    if r0 > 0:
        return Droplet(shape="annulus", inner=r0, outer=R)
    return Droplet(shape="disk", radius=R)


def droplet_ellipse(t: float) -> Droplet:
    """Droplet of Q = |z|^2 - t Re z^2: semi-axes a/b = (1+t)/(1-t), ab = 1."""
    if not 0.0 <= t < 1.0:
        raise ValueError(f"need 0 <= t < 1, got {t}")
    if t == 0.0:
        return Droplet(shape="disk", radius=1.0)
    a = math.sqrt((1.0 + t) / (1.0 - t))
    return Droplet(shape="ellipse", a=a, b=1.0 / a)


def droplet_for(pot: Potential) -> Droplet:
    """Droplet of a built-in or radial potential."""
    if pot.kind == "ellipse":
        return droplet_ellipse(pot.t)
    if pot.kind == "ginibre":
        return Droplet(shape="disk", radius=1.0)
    if pot.kind == "mittag_leffler" or pot.radial:
        return solve_droplet_radial(pot)
    raise ValueError(
        "no droplet solver for non-radial custom potentials; supply one")


@dataclass(frozen=True)
class EquilibriumMeasure:
    """Candidate equilibrium measure chi_S DeltaQ dA.

    ``mass`` is the total dA-mass computed by quadrature at construction;
    the density method returns the unnormalized field. A candidate built
    from the true droplet has mass 1 up to quadrature error.
    """

    potential: Potential
    droplet: Droplet
    mass: float

    def density(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        lam = laplacian_potential(self.potential, z)
        return np.where(self.droplet.contains(z), lam, 0.0)


def _measure_mass(pot: Potential, drop: Droplet, ntheta: int = 512,
                  nr: int = 72) -> float:
    """Total mass of chi_S DeltaQ dA via the ray decomposition."""
    origin = drop.center if drop.shape != "ellipse" else 0j
    thetas = 2.0 * np.pi * np.arange(ntheta) / ntheta
    total = 0.0
    for pos, r, w, u in _ray_blocks(drop, np.array([origin]), thetas, nr):
        lam = laplacian_potential(pot, pos)
        total += np.sum(lam * 2.0 * r * w)
    return float(total / ntheta)


def equilibrium_measure(pot: Potential, droplet: Optional[Droplet] = None
                        ) -> EquilibriumMeasure:
    """Build chi_S DeltaQ dA for the potential's droplet (or a candidate)."""
    drop = droplet if droplet is not None else droplet_for(pot)
    mass = _measure_mass(pot, drop)
    return EquilibriumMeasure(potential=pot, droplet=drop, mass=mass)


# ---------------------------------------------------------------------------
# logarithmic potential: grid path
# ---------------------------------------------------------------------------

def default_measure_grid(drop: Droplet, nr: int = 220, ntheta: int = 256) -> Grid2D:
    """Polar grid adapted to the droplet (exact radial cut when possible)."""
    if drop.shape == "disk":
        return polar_grid(drop.radius, nr, ntheta, center=drop.center)
    if drop.shape == "annulus":
        return polar_grid(drop.outer, nr, ntheta, center=drop.center,
                          rmin=drop.inner)
    return polar_grid(drop.a, nr, ntheta)


def log_potential(mu: EquilibriumMeasure, z, grid: Optional[Grid2D] = None,
                  cell_correction: bool = True) -> np.ndarray:
    """U^mu(z) = integral log(1/|z-w|) dmu(w) by grid quadrature.

    Nodes within half a cell of an evaluation point (inside the
    equivalent-disk radius sqrt(w), in dA units) are excluded from the sum
    and replaced by the analytic integral of the log kernel over a disk
    carrying the same excluded mass:

        integral_{|w| < s} log(1/|w|) dA(w) = (W/2)(1 - log W),  W = s^2.

    With ``cell_correction=False`` the raw node sum is returned, and
    evaluating on top of a quadrature node raises.

    The result is unnormalized: it scales with ``mu.mass``.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    g = grid if grid is not None else default_measure_grid(mu.droplet)
    rho = mu.density(g.nodes)
    wr = g.weights * rho
    cellr = np.sqrt(g.weights)
    out = np.empty(z.shape, dtype=float)
    zf = z.ravel()
    for i0 in range(0, zf.size, 128):
        zc = zf[i0:i0 + 128]
        d = np.abs(zc[:, None] - g.nodes[None, :])
        if not cell_correction:
            if np.min(d) < 1e-12:
                raise ValueError(
                    "evaluation point sits on a quadrature node and the "
                    "cell correction is disabled")
            out.ravel()[i0:i0 + 128] = -np.sum(np.log(d) * wr[None, :], axis=1)
            continue
        excl = d < cellr[None, :]
        dsafe = np.where(excl, 1.0, d)
        base = -np.sum(np.log(dsafe) * wr[None, :], axis=1)
        W = np.sum(np.where(excl, g.weights[None, :], 0.0), axis=1)
        Mex = np.sum(np.where(excl, wr[None, :], 0.0), axis=1)
        Wsafe = np.where(W > 0, W, 1.0)
        corr = 0.5 * Mex * (1.0 - np.log(Wsafe))
        out.ravel()[i0:i0 + 128] = base + corr
    return out


# ---------------------------------------------------------------------------
# logarithmic potential and Cauchy transform: ray path
# ---------------------------------------------------------------------------

def _ray_blocks(drop: Droplet, origins: np.ndarray, thetas: np.ndarray,
                nr: int):
    """Radial quadrature blocks for rays from each origin.

    Yields (positions, radii, dr_weights, u) with shape
    (n_origin, ntheta, nr) for the first three and (ntheta,) for the
    angular phases u = e^{i theta}. Segments starting at the origin get a
    quadratic substitution so that log kernels integrate cleanly.
    """
    q = gauss_legendre(nr, 0.0, 1.0)
    u = np.exp(1j * thetas)
    for lo, hi in drop.ray_segments(origins, thetas):
        length = hi - lo
        sing = (lo < 1e-12)[..., None]
        xn = q.nodes[None, None, :]
        r = np.where(sing, hi[..., None] * xn**2,
                     lo[..., None] + length[..., None] * xn)
        w = np.where(sing, hi[..., None] * 2.0 * xn * q.weights[None, None, :],
                     length[..., None] * q.weights[None, None, :])
        pos = origins[:, None, None] + r * u[None, :, None]
        yield pos, r, w, u


def _u_rays(mu: EquilibriumMeasure, z, ntheta: int = 384, nr: int = 44,
            chunk: int = 48) -> np.ndarray:
    """U^mu by the exact ray decomposition centered at each point of z."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    drop, pot = mu.droplet, mu.potential
    thetas = 2.0 * np.pi * np.arange(ntheta) / ntheta
    out = np.empty(z.size, dtype=float)
    zf = z.ravel()
    for i0 in range(0, zf.size, chunk):
        zc = zf[i0:i0 + chunk]
        acc = np.zeros(zc.size)
        for pos, r, w, _ in _ray_blocks(drop, zc, thetas, nr):
            lam = laplacian_potential(pot, pos)
            ln = np.log(np.where(r > 0, r, 1.0))
            acc += np.sum(-ln * lam * r * w, axis=(1, 2))
        out[i0:i0 + chunk] = 2.0 * acc / ntheta
    return out.reshape(z.shape)


def _cauchy_rays(mu: EquilibriumMeasure, z, ntheta: int = 384, nr: int = 36,
                 chunk: int = 48) -> np.ndarray:
    """C^mu(z) = integral dmu(w)/(z - w) by z-centered ray decomposition.

    In polar coordinates around z the Cauchy kernel cancels the area
    Jacobian:

        C(z) = -(1/pi) int e^{-i theta} int_seg DeltaQ(z + r e^{i theta}) dr dtheta,

    so the integrand is smooth and the rule is spectrally accurate.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    drop, pot = mu.droplet, mu.potential
    thetas = 2.0 * np.pi * np.arange(ntheta) / ntheta
    out = np.empty(z.size, dtype=complex)
    zf = z.ravel()
    for i0 in range(0, zf.size, chunk):
        zc = zf[i0:i0 + chunk]
        acc = np.zeros(zc.size, dtype=complex)
        for pos, _, w, u in _ray_blocks(drop, zc, thetas, nr):
            lam = laplacian_potential(pot, pos)
            acc += np.sum(np.conj(u)[None, :] * np.sum(lam * w, axis=2), axis=1)
        out[i0:i0 + chunk] = -2.0 * acc / ntheta
    return out.reshape(z.shape)


# ---------------------------------------------------------------------------
# Robin constant, obstacle, energy, residual
# ---------------------------------------------------------------------------

def _sample_cover(drop: Droplet, nrad: int = 26, nang: int = 24) -> np.ndarray:
    """Deterministic sample covering the droplet and a surrounding ring."""
    rmax = 1.15 * drop.outer_radius
    center = drop.center if drop.shape != "ellipse" else 0j
    rr = rmax * np.sqrt((np.arange(nrad) + 0.5) / nrad)
    aa = np.exp(2j * np.pi * (np.arange(nang) + 0.37) / nang)
    return (center + rr[:, None] * aa[None, :]).ravel()


def robin_constant(pot: Potential, mu: EquilibriumMeasure,
                   samples: Optional[np.ndarray] = None,
                   cover_tol: float = 5e-3) -> float:
    """Robin constant gamma = min over a dense sample of Q + 2 U^sigma.

    The minimum of the effective potential is attained everywhere on the
    droplet; when the near-minimal set fails to cover the sampled droplet
    interior a warning is issued, since the candidate measure is then
    suspect.
    """
    pts = samples if samples is not None else _sample_cover(mu.droplet)
    v = eval_potential(pot, pts) + 2.0 * _u_rays(mu, pts) / mu.mass
    gamma = float(np.min(v))
    inside = mu.droplet.contains(pts) & (
        mu.droplet.distance(pts) > 0.05 * mu.droplet.outer_radius)
    if np.any(inside):
        spread = float(np.max(v[inside]) - gamma)
        if spread > cover_tol:
            warnings.warn(
                f"Robin minimizing set may not cover the droplet "
                f"(spread {spread:.2e} over the interior sample)",
                stacklevel=2)
    return gamma


def obstacle(pot: Potential, mu: EquilibriumMeasure, gamma: float, z,
             grid: Optional[Grid2D] = None) -> np.ndarray:
    """Obstacle function Qhat(z) = gamma - 2 U^sigma(z).

    Equals Q on the droplet, is harmonic outside, and grows like
    log|z|^2 + O(1). The optional grid only sets the angular resolution of
    the ray quadrature; exterior points get a denser rule because the
    crossing window has square-root edges there.
    """
    ntheta = grid.ntheta if grid is not None and grid.ntheta else 384
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    outside = ~mu.droplet.contains(z)
    nth = int(max(ntheta, 1024)) if np.any(outside) else int(ntheta)
    return gamma - 2.0 * _u_rays(mu, z, ntheta=nth) / mu.mass


def equilibrium_energy(pot: Potential, mu: EquilibriumMeasure,
                       ntheta_outer: int = 160, nr_outer: int = 44,
                       ntheta_inner: int = 256, nr_inner: int = 32) -> float:
    """Weighted energy I_Q[mu] = int (U^mu + Q) dmu for the normalized mu.

    A point mass (degenerate droplet) has infinite self-energy; that case
    is guarded and returns +inf.
    """
    drop = mu.droplet
    if drop.area < 1e-12 or mu.mass <= 0:
        return math.inf
    origin = drop.center if drop.shape != "ellipse" else 0j
    thetas = 2.0 * np.pi * np.arange(ntheta_outer) / ntheta_outer
    total = 0.0
    for pos, r, w, _ in _ray_blocks(drop, np.array([origin]), thetas,
                                    nr_outer):
        pos = pos.reshape(-1)
        lam = laplacian_potential(pot, pos)
        wgt = (2.0 / ntheta_outer) * lam * (r * w).reshape(-1) / mu.mass
        keep = wgt != 0.0
        uvals = np.zeros(pos.size)
        uvals[keep] = _u_rays(mu, pos[keep], ntheta=ntheta_inner, nr=nr_inner)
        total += float(np.sum(
            wgt * (uvals / mu.mass + eval_potential(pot, pos))))
    return total


def equilibrium_residual(pot: Potential, mu: EquilibriumMeasure,
                         nsamples: int = 160, seed: int = 7) -> float:
    """Stationarity residual max |grad(Q + 2 U^{mu/mass})| over the interior.

    The candidate measure is probability-normalized before taking the
    Cauchy transform, so a droplet of the wrong size shows a genuine
    residual. Samples keep a small distance from the boundary, where the
    gradient of the effective potential is only one-sided.
    """
    drop = mu.droplet
    rng = np.random.default_rng(seed)
    scale = drop.outer_radius
    pts: list[complex] = []
    while len(pts) < nsamples:
        cand = (rng.uniform(-scale, scale, size=4 * nsamples)
                + 1j * rng.uniform(-scale, scale, size=4 * nsamples))
        if drop.shape != "ellipse":
            cand = cand + drop.center
        keep = drop.contains(cand) & (drop.distance(cand) > 0.05 * scale)
        pts.extend(cand[keep][:nsamples - len(pts)])
    zs = np.asarray(pts)
    C = _cauchy_rays(mu, zs) / mu.mass
    resid = np.abs(np.conj(grad_potential(pot, zs)) - 2.0 * C)
    return float(np.max(resid))
