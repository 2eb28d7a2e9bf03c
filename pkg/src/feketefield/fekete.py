"""Weighted Fekete configurations by energy descent, plus a Gibbs sampler.

The discrete energy of n points under an external potential Q is

    H_n(z_1..z_n) = sum_{j != k} log 1/|z_j - z_k| + n sum_j Q(z_j)

with the pair sum over ordered pairs. Minimizers (weighted Fekete sets)
are computed by steepest descent with a Barzilai-Borwein initial step and
Armijo backtracking, restarted from several independent draws of the
equilibrium measure; the best restart wins.

``metropolis_sample`` draws from the Gibbs density ~ exp(-beta H_n) with
single-site Gaussian proposals and an O(n) incremental energy update. The
inner loop is compiled with numba for the built-in potentials and falls
back to plain python for custom ones.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numba import njit

from feketefield.equilibrium import Droplet, droplet_for
from feketefield.potentials import (
    Potential, eval_potential, grad_potential, laplacian_potential,
)

COLLISION_DIST = 1e-12


@dataclass(frozen=True)
class Configuration:
    """A point configuration tied to its potential."""

    points: np.ndarray = field(repr=False)
    potential: Potential = None

    @property
    def n(self) -> int:
        return self.points.size


@dataclass(frozen=True)
class SolverConfig:
    """Descent controls.

    ``grad_tol`` is scaled by n: the solver stops when the largest
    per-point gradient magnitude drops below grad_tol * n. Backtracking
    halves the step until the Armijo condition with slope fraction
    ``armijo`` holds.
    """

    max_iter: int = 4000
    grad_tol: float = 1e-6
    restarts: int = 3
    backtrack: float = 0.5
    armijo: float = 1e-4
    max_backtracks: int = 45
    seed: int = 0


@dataclass(frozen=True)
class SolverReport:
    energy: float
    iterations: int
    max_grad: float
    best_restart: int
    wall_time: float
    converged: bool
    collision: bool
    restart_energies: tuple = ()


def coulomb_energy(cfg: Configuration, pot: Optional[Potential] = None) -> float:
    """H_n over ordered pairs; +inf when two points collide."""
    pot = pot if pot is not None else cfg.potential
    z = cfg.points if isinstance(cfg, Configuration) else np.asarray(cfg)
    n = z.size
    d = np.abs(z[:, None] - z[None, :])
    np.fill_diagonal(d, 1.0)
    if np.min(d) < COLLISION_DIST:
        return math.inf
    pair = -np.sum(np.log(d))
    return float(pair + n * np.sum(eval_potential(pot, z)))


def coulomb_gradient(cfg: Configuration, pot: Optional[Potential] = None
                     ) -> np.ndarray:
    """Per-point gradient -2 sum_k (z_j - z_k)/|z_j - z_k|^2 + n grad Q."""
    pot = pot if pot is not None else cfg.potential
    z = cfg.points if isinstance(cfg, Configuration) else np.asarray(cfg)
    n = z.size
    diff = z[:, None] - z[None, :]
    a2 = diff.real**2 + diff.imag**2
    np.fill_diagonal(a2, 1.0)
    np.fill_diagonal(diff, 0.0)
    pair = -2.0 * np.sum(diff / a2, axis=1)
    return pair + n * grad_potential(pot, z)


def _sample_sigma(pot: Potential, drop: Droplet, n: int, rng) -> np.ndarray:
    """Rejection-sample n points from the equilibrium density."""
    if drop.shape == "ellipse":
        cx = cy = 0.0
        hx, hy = drop.a, drop.b
    else:
        cx, cy = drop.center.real, drop.center.imag
        hx = hy = drop.radius if drop.shape == "disk" else drop.outer
    # bound the density on a probe set (fine for the supported shapes)
    probe = (cx + rng.uniform(-hx, hx, 512)) + 1j * (cy + rng.uniform(-hy, hy, 512))
    lam = laplacian_potential(pot, probe)
    lam = lam[np.isfinite(lam)]
    bound = 1.5 * float(np.max(lam)) if lam.size else 1.0
    out = np.empty(n, dtype=complex)
    got = 0
    while got < n:
        m = 4 * (n - got) + 16
        cand = (cx + rng.uniform(-hx, hx, m)) + 1j * (cy + rng.uniform(-hy, hy, m))
        inside = drop.contains(cand)
        cand = cand[inside]
        lam = laplacian_potential(pot, cand)
        lam = np.where(np.isfinite(lam), lam, bound)
        keep = rng.random(cand.size) * bound < lam
        take = cand[keep][: n - got]
        out[got:got + take.size] = take
        got += take.size
    return out


def _descend(pot: Potential, z0: np.ndarray, cfg: SolverConfig):
    """Single descent run; returns (points, energy, iters, max_grad, conv)."""
    z = z0.copy()
    n = z.size
    E = coulomb_energy(z, pot)
    G = coulomb_gradient(z, pot)
    gnorm2 = float(np.sum(G.real**2 + G.imag**2))
    alpha = 0.5 / n
    z_prev = None
    G_prev = None
    it = 0
    for it in range(1, cfg.max_iter + 1):
        gmax = float(np.max(np.abs(G)))
        if gmax <= cfg.grad_tol * n:
            return z, E, it - 1, gmax, True
        if z_prev is not None:
            s = z - z_prev
            y = G - G_prev
            denom = float(np.sum((s * np.conj(y)).real))
            if denom > 0:
                alpha = float(np.sum(s.real**2 + s.imag**2)) / denom
            alpha = min(max(alpha, 1e-12), 1e3)
        ok = False
        a = alpha
        for _ in range(cfg.max_backtracks):
            trial = z - a * G
            Et = coulomb_energy(trial, pot)
            if Et <= E - cfg.armijo * a * gnorm2 and math.isfinite(Et):
                ok = True
                break
            a *= cfg.backtrack
        if not ok:
            gmax = float(np.max(np.abs(G)))
            return z, E, it, gmax, gmax <= cfg.grad_tol * n
        z_prev, G_prev = z, G
        z, E = trial, Et
        G = coulomb_gradient(z, pot)
        gnorm2 = float(np.sum(G.real**2 + G.imag**2))
    gmax = float(np.max(np.abs(G)))
    return z, E, it, gmax, gmax <= cfg.grad_tol * n


def solve_fekete(pot: Potential, n: int, cfg: Optional[SolverConfig] = None,
                 droplet: Optional[Droplet] = None):
    """Best-of-restarts Fekete solve.

    Returns (Configuration, SolverReport). A non-converged run is still
    returned, flagged through ``report.converged``. The reported energy is
    recomputed from the returned points by ``coulomb_energy`` and therefore
    matches an external recomputation bit for bit.
    """
    if n < 2:
        raise ValueError("need at least two points")
    cfg = cfg or SolverConfig()
    drop = droplet if droplet is not None else droplet_for(pot)
    t0 = time.perf_counter()
    best = None
    energies = []
    for r in range(cfg.restarts):
        rng = np.random.default_rng([cfg.seed, r, n])
        z0 = _sample_sigma(pot, drop, n, rng)
        z, E, iters, gmax, conv = _descend(pot, z0, cfg)
        energies.append(E)
        if best is None or E < best[1]:
            best = (z, E, iters, gmax, conv, r)
    z, E, iters, gmax, conv, r = best
    pts = z.copy()
    d = np.abs(pts[:, None] - pts[None, :])
    np.fill_diagonal(d, np.inf)
    collision = bool(np.min(d) < COLLISION_DIST)
    config = Configuration(points=pts, potential=pot)
    report = SolverReport(
        energy=coulomb_energy(config),
        iterations=iters,
        max_grad=gmax,
        best_restart=r,
        wall_time=time.perf_counter() - t0,
        converged=conv,
        collision=collision,
        restart_energies=tuple(energies),
    )
    return config, report


def separation(pot: Potential, cfg: Configuration):
    """Rescaled separation Delta_n and the nearest-neighbor distances.

    d_n(z_j) = min_{k != j} |z_k - z_j| and
    Delta_n = min_j sqrt(n DeltaQ(z_j)) * d_n(z_j), the blow-up-scale gap
    whose large-n limit is bounded below by 1/sqrt(e) for energy
    minimizers. Returns (Delta_n, d_n array).
    """
    z = cfg.points
    d = np.abs(z[:, None] - z[None, :])
    np.fill_diagonal(d, np.inf)
    dn = np.min(d, axis=1)
    lap = laplacian_potential(pot, z)
    if np.any(lap <= 0):
        raise ValueError("DeltaQ must be positive at all points")
    return float(np.min(np.sqrt(cfg.n * lap) * dn)), dn


@dataclass(frozen=True)
class CountingReport:
    edges: np.ndarray = field(repr=False)
    observed: np.ndarray = field(repr=False)
    expected: np.ndarray = field(repr=False)

    @property
    def max_abs_defect(self) -> float:
        return float(np.max(np.abs(self.observed - self.expected)))


def counting_vs_sigma(cfg: Configuration, pot: Optional[Potential] = None,
                      nbins: int = 10) -> CountingReport:
    """Bin counts against n times the equilibrium mass per bin.

    Radial potentials use equal-mass radial annuli; the ellipse potential
    uses level sets of the droplet's defining quadratic form (also equal
    mass, since its density is flat).
    """
    pot = pot if pot is not None else cfg.potential
    z = cfg.points
    n = z.size
    drop = droplet_for(pot)
    frac = np.arange(nbins + 1) / nbins
    if pot.kind == "ellipse" and drop.shape == "ellipse":
        lev = np.sqrt((z.real / drop.a) ** 2 + (z.imag / drop.b) ** 2)
        edges = np.sqrt(frac)
    elif pot.radial or pot.kind in ("ginibre", "mittag_leffler"):
        from feketefield.equilibrium import _radial_mass
        lev = np.abs(z - drop.center)
        lo = drop.inner if drop.shape == "annulus" else 0.0
        hi = drop.outer if drop.shape == "annulus" else drop.radius
        rr = np.linspace(lo, hi, 1201)
        mm = np.array([_radial_mass(pot, lo, r, n=160) for r in rr])
        mm /= mm[-1]
        edges = np.interp(frac, mm, rr)
    else:
        raise ValueError("counting_vs_sigma supports radial and ellipse potentials")
    edges[-1] *= 1.0 + 1e-9   # droplet boundary points land inside
    observed = np.histogram(lev, bins=edges)[0].astype(float)
    expected = np.full(nbins, n / nbins, dtype=float)
    return CountingReport(edges=edges, observed=observed, expected=expected)


# ---------------------------------------------------------------------------
# Metropolis sampler
# ---------------------------------------------------------------------------

_KIND_CODE = {"ginibre": 0, "mittag_leffler": 1, "ellipse": 2}


@njit(cache=True)
def _q_num(code, p, t, x, y):
    r2 = x * x + y * y
    if code == 0:
        return r2
    if code == 1:
        return r2 ** p
    return r2 - t * (x * x - y * y)


@njit(cache=True)
def _mh_chain(xy, code, p, t, beta, sweeps, step, seed, burn, rec_every, rec):
    np.random.seed(seed)
    n = xy.shape[0]
    acc = 0
    tot = 0
    nrec = 0
    for sweep in range(sweeps):
        for j in range(n):
            xo = xy[j, 0]
            yo = xy[j, 1]
            xn = xo + step * np.random.normal()
            yn = yo + step * np.random.normal()
            dh = n * (_q_num(code, p, t, xn, yn) - _q_num(code, p, t, xo, yo))
            ok = True
            for k in range(n):
                if k == j:
                    continue
                dxo = xo - xy[k, 0]
                dyo = yo - xy[k, 1]
                dxn = xn - xy[k, 0]
                dyn = yn - xy[k, 1]
                rn2 = dxn * dxn + dyn * dyn
                if rn2 < 1e-24:
                    ok = False
                    break
                ro2 = dxo * dxo + dyo * dyo
                dh -= math.log(rn2 / ro2)
            tot += 1
            if ok:
                if dh <= 0.0 or np.random.random() < math.exp(-min(beta * dh, 700.0)):
                    xy[j, 0] = xn
                    xy[j, 1] = yn
                    acc += 1
        if rec_every > 0 and sweep >= burn and (sweep - burn) % rec_every == 0:
            if nrec < rec.shape[0]:
                for i in range(n):
                    rec[nrec, i, 0] = xy[i, 0]
                    rec[nrec, i, 1] = xy[i, 1]
                nrec += 1
    return acc, tot, nrec


@dataclass(frozen=True)
class MetropolisReport:
    acceptance: float
    sweeps: int
    beta: float
    step: float
    recorded: Optional[np.ndarray] = field(default=None, repr=False)


def metropolis_sample(pot: Potential, n: int, beta: float = 1.0,
                      sweeps: int = 2000, seed: int = 0,
                      step: Optional[float] = None, burn: int = 0,
                      record_every: int = 0):
    """Metropolis chain for the Gibbs density ~ exp(-beta H_n).

    One sweep is n single-site proposals, each a Gaussian move of scale
    ``step`` (default 0.6/sqrt(beta n), a reasonable acceptance range for
    the built-in potentials). Returns (Configuration, MetropolisReport)
    with the final state; thinned states are recorded every
    ``record_every`` sweeps after ``burn`` when requested.

    Detailed balance holds per proposal since the Gaussian move is
    symmetric; accepted moves follow min(1, exp(-beta dH)).
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    drop = droplet_for(pot)
    rng = np.random.default_rng([seed, n])
    z0 = _sample_sigma(pot, drop, n, rng)
    xy = np.stack([z0.real, z0.imag], axis=1)
    if step is None:
        step = 0.6 / math.sqrt(beta * n)
    nrec_max = 0
    if record_every > 0:
        nrec_max = max(0, (sweeps - burn + record_every - 1) // record_every)
    rec = np.empty((nrec_max, n, 2))
    if pot.kind in _KIND_CODE:
        acc, tot, nrec = _mh_chain(xy, _KIND_CODE[pot.kind], pot.p, pot.t,
                                   beta, sweeps, step,
                                   int(rng.integers(2**31 - 1)), burn,
                                   record_every, rec)
    else:
        acc, tot, nrec = _mh_python(pot, xy, beta, sweeps, step, rng, burn,
                                    record_every, rec)
    pts = xy[:, 0] + 1j * xy[:, 1]
    rep = MetropolisReport(acceptance=acc / max(tot, 1), sweeps=sweeps,
                           beta=beta, step=step,
                           recorded=rec[:nrec] if nrec_max else None)
    return Configuration(points=pts, potential=pot), rep


def _mh_python(pot: Potential, xy, beta, sweeps, step, rng, burn, rec_every,
               rec):
    """Fallback chain for custom potentials (no numba)."""
    n = xy.shape[0]
    z = xy[:, 0] + 1j * xy[:, 1]
    acc = tot = nrec = 0
    for sweep in range(sweeps):
        for j in range(n):
            zn = z[j] + step * (rng.normal() + 1j * rng.normal())
            d_old = np.abs(z - z[j])
            d_new = np.abs(z - zn)
            d_old[j] = d_new[j] = 1.0
            if np.min(d_new) < COLLISION_DIST:
                tot += 1
                continue
            dq = float(eval_potential(pot, zn) - eval_potential(pot, z[j]))
            dh = n * dq - 2.0 * float(np.sum(np.log(d_new / d_old)))
            tot += 1
            if dh <= 0 or rng.random() < math.exp(-min(beta * dh, 700.0)):
                z[j] = zn
                acc += 1
        if rec_every > 0 and sweep >= burn and (sweep - burn) % rec_every == 0:
            if nrec < rec.shape[0]:
                rec[nrec, :, 0] = z.real
                rec[nrec, :, 1] = z.imag
                nrec += 1
    xy[:, 0], xy[:, 1] = z.real, z.imag
    return acc, tot, nrec
