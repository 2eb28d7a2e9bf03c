"""Counting densities, concentration spectra, and sampling certificates.

All local scales here are the blow-up scale of the point process: around a
point p the natural window is the disk

    A(p, Lambda) = D(p, Lambda / sqrt(n DeltaQ(p))),

which carries Lambda^2 expected points in the bulk. Counting configuration
points in A at several (n, Lambda) pairs gives the density table; the high
end of the table brackets the upper and lower densities.

The concentration operator restricts the weighted polynomial space of
degree n*rho to A and compresses back; its spectrum lies in (0, 1), its
trace measures |A| in rescaled units, and the trace defect Tr(T - T^2)
concentrates on the O(Lambda) boundary layer of A, which is the engine of
the counting arguments.

The certificates quantify two sampling-theory properties of a family of
configurations: rho-interpolating (rho > 1; values on the points can be
matched by a weighted polynomial with controlled norm) and class M_rho
(rho < 1; the L^2 mass of every weighted polynomial on the fattened
droplet S_s = S + D(0, s / sqrt n) is controlled by its point samples).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import eigh

from feketefield.equilibrium import Droplet, droplet_for
from feketefield.fekete import Configuration
from feketefield.kernels import (KernelModel, WeightedBasis, _support_radius,
                                 basis_derivative, build_basis, kernel_eval,
                                 one_point_function)
from feketefield.potentials import (Potential, eval_potential, grad_potential,
                                    laplacian_potential)
from feketefield.quadrature import polar_grid

BULK_THRESHOLD = 5.0


def _lap_at(pot: Potential, p: complex) -> float:
    lam = float(laplacian_potential(pot, np.atleast_1d(complex(p)))[0])
    if not np.isfinite(lam) or lam <= 0:
        raise ValueError(f"DeltaQ({p}) = {lam!r} must be positive")
    return lam


def local_scale(pot: Potential, p: complex, n: int) -> float:
    """Blow-up length 1 / sqrt(n DeltaQ(p))."""
    return 1.0 / np.sqrt(n * _lap_at(pot, p))


# ---------------------------------------------------------------------------
# moving points and counting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MovingPointPlan:
    """Evaluation-point rule across n.

    rule "fixed-point": p_n = anchor for every n. rule "boundary-anchored":
    p_n sits at rescaled depth tau inside the droplet, i.e. at distance
    tau / sqrt(n DeltaQ) from the boundary point nearest the anchor, along
    the inward normal.
    """

    rule: str
    anchor: complex
    n_values: tuple
    tau: float = 0.0
    label: str = ""

    def __post_init__(self):
        if self.rule not in ("fixed-point", "boundary-anchored"):
            raise ValueError(f"unknown rule {self.rule!r}")
        if not self.n_values:
            raise ValueError("plan needs at least one n")
        if self.rule == "boundary-anchored" and self.tau < 0:
            raise ValueError("offset tau must be >= 0 to stay inside S")

    def realize(self, droplet: Droplet, pot: Potential, n: int) -> complex:
        if self.rule == "fixed-point":
            p = complex(self.anchor)
        else:
            q, nrm = droplet.nearest_boundary(np.atleast_1d(complex(self.anchor)))
            q, nrm = complex(q[0]), complex(nrm[0])
            p = q - nrm * self.tau * local_scale(pot, q, n)
        if not bool(droplet.contains(np.atleast_1d(p))[0]):
            raise ValueError(f"realized point {p} falls outside the droplet")
        return p


def classify_regime(plan: MovingPointPlan, droplet: Droplet, pot: Potential,
                    threshold: float = BULK_THRESHOLD) -> str:
    """"bulk" / "regular-boundary" / "unclassified" from rescaled depths.

    The depth of p_n is sqrt(n DeltaQ(p_n)) * dist(p_n, boundary); a plan
    is bulk when every depth clears the threshold and regular-boundary
    when none does. In-between (mixed) behavior is flagged unclassified.
    """
    depths = []
    for n in plan.n_values:
        p = plan.realize(droplet, pot, n)
        delta = float(droplet.distance(np.atleast_1d(p))[0])
        depths.append(delta / local_scale(pot, p, n))
    if min(depths) >= threshold:
        return "bulk"
    if max(depths) <= threshold:
        return "regular-boundary"
    return "unclassified"


def count_in_disk(cfg: Configuration, pot: Potential, p: complex, n: int,
                  lam: float) -> int:
    """Points of cfg inside the blow-up disk A(p, lam)."""
    if lam <= 0:
        raise ValueError("window size lam must be positive")
    radius = lam * local_scale(pot, p, n)
    return int(np.count_nonzero(np.abs(cfg.points - complex(p)) <= radius))


@dataclass
class DensityEstimate:
    """Counting table N / Lambda^2 with top-window density brackets."""

    plan: MovingPointPlan
    lambdas: tuple
    counts: np.ndarray        # (len(n_values), len(lambdas)) ints
    ratios: np.ndarray
    d_plus: float
    d_minus: float


def bl_density(family: Sequence[Configuration], plan: MovingPointPlan,
               lambdas: Sequence[float]) -> DensityEstimate:
    """Fill the (n, Lambda) counting table for converged configurations.

    The summaries d_plus / d_minus are the max and min of N / Lambda^2
    over the top-right window: the largest two n values crossed with the
    largest three Lambda values (clipped to what is available).
    """
    if not family:
        raise ValueError("need at least one configuration")
    if len(family) != len(plan.n_values):
        raise ValueError("family must match the plan's n list")
    pot = family[0].potential
    droplet = droplet_for(pot)
    lambdas = tuple(float(l) for l in lambdas)
    counts = np.zeros((len(family), len(lambdas)), dtype=int)
    for i, (cfg, n) in enumerate(zip(family, plan.n_values)):
        if cfg.n != n:
            raise ValueError(f"configuration size {cfg.n} != plan n {n}")
        p = plan.realize(droplet, pot, n)
        for j, lam in enumerate(lambdas):
            counts[i, j] = count_in_disk(cfg, pot, p, n, lam)
    ratios = counts / np.asarray(lambdas)[None, :] ** 2
    window = ratios[-min(2, len(family)):, -min(3, len(lambdas)):]
    return DensityEstimate(plan=plan, lambdas=lambdas, counts=counts,
                           ratios=ratios, d_plus=float(np.max(window)),
                           d_minus=float(np.min(window)))


@dataclass
class StripCountReport:
    count: int
    ratio: float        # N / Lambda^2
    c_measured: float   # N / (T * Lambda)


def strip_count_bound(cfg: Configuration, pot: Potential, p: complex, n: int,
                      lam: float, T: float) -> StripCountReport:
    """Counting bound N <= C T Lambda for strip-confined configurations.

    For points confined within rescaled distance T of a line and
    separated on the blow-up scale, the window count grows linearly in
    Lambda, so N / Lambda^2 -> 0; the report carries the measured C.
    """
    if T <= 0:
        raise ValueError("strip half-width T must be positive")
    count = count_in_disk(cfg, pot, p, n, lam)
    return StripCountReport(count=count, ratio=count / lam**2,
                            c_measured=count / (T * lam))


def strip_test_config(pot: Potential, p: complex, n: int,
                      half_extent: float) -> Configuration:
    """Synthetic single-row configuration along the real direction at p.

    Points are spaced one blow-up unit apart (so the family is
    1-separated in rescaled distance) out to +-half_extent units; a stand-
    in for near-singular geometries where the process collapses onto a
    thin strip.
    """
    k = int(np.ceil(half_extent))
    offsets = np.arange(-k, k + 1, dtype=float)
    pts = complex(p) + offsets * local_scale(pot, p, n)
    return Configuration(points=pts, potential=pot)


# ---------------------------------------------------------------------------
# concentration operator
# ---------------------------------------------------------------------------

@dataclass
class ConcentrationSpectrum:
    """Spectrum of the concentration operator on the blow-up disk."""

    eigenvalues: np.ndarray      # decreasing
    tr_T: float                  # trace of the matrix (pre-decomposition)
    tr_T2: float
    trace_integral: float        # independent-grid integral of bfR over A
    n: int
    rho: float
    lam: float
    p: complex

    @property
    def nrho(self) -> int:
        return self.eigenvalues.size


def concentration_spectrum(basis: WeightedBasis, pot: Potential, p: complex,
                           n: int, rho: float, lam: float,
                           grid=None) -> ConcentrationSpectrum:
    """Eigenvalues of f -> P[1_A f] on the degree-(n rho) weighted space.

    The matrix entries are int_A phi_j conj(phi_k) dA on a polar grid
    covering A = D(p, lam / sqrt(n DeltaQ(p))); the uniform angular rule
    is alias-free for polynomial degrees below ntheta. Traces are checked
    against an independent finer-grid integral of the one-point function
    (warning beyond 1e-6 relative).
    """
    nrho = int(round(n * rho))
    if basis.n != nrho:
        raise ValueError(f"basis degree {basis.n} != round(n rho) = {nrho}")
    radius = lam * local_scale(pot, p, n)
    g = grid if grid is not None else polar_grid(radius, nr=200, ntheta=256,
                                                 center=complex(p))
    phi = basis.evaluate(g.nodes)
    B = phi * np.sqrt(g.weights)[:, None]
    T = B.conj().T @ B
    tr_T = float(np.trace(T).real)
    tr_T2 = float(np.sum(np.abs(T) ** 2))
    lam_j = eigh(T, eigvals_only=True)[::-1]

    km = KernelModel(basis=basis)
    gf = polar_grid(radius, nr=int(g.nr * 1.5), ntheta=int(g.ntheta * 1.5),
                    center=complex(p))
    trace_integral = float(np.sum(gf.weights * one_point_function(km, gf.nodes)))
    if abs(trace_integral - tr_T) > 1e-6 * max(1.0, abs(trace_integral)):
        warnings.warn(
            f"concentration trace {tr_T:.8f} vs refined integral "
            f"{trace_integral:.8f}: quadrature may be under-resolved",
            RuntimeWarning, stacklevel=2)
    return ConcentrationSpectrum(eigenvalues=lam_j, tr_T=tr_T, tr_T2=tr_T2,
                                 trace_integral=trace_integral, n=n, rho=rho,
                                 lam=lam, p=complex(p))


def trace_defect(spec: ConcentrationSpectrum) -> float:
    """Tr(T - T^2) / Lambda^2; decays like 1/Lambda as the window grows."""
    return (spec.tr_T - spec.tr_T2) / spec.lam**2


def counting_bounds(spec: ConcentrationSpectrum, gamma: float = 0.5,
                    delta: float = 0.5) -> dict:
    """Both eigenvalue-counting inequalities evaluated on the spectrum.

    #{lambda_j > gamma} >= Tr T - Tr(T - T^2)/(1 - gamma) and
    #{lambda_j >= delta} <= Tr T + Tr(T - T^2)/delta; they are algebraic
    facts for eigenvalues in [0, 1], so failure indicates a broken solve.
    """
    if not (0 < gamma < 1 and 0 < delta < 1):
        raise ValueError("gamma and delta must lie in (0, 1)")
    ev = spec.eigenvalues
    defect = spec.tr_T - spec.tr_T2
    above = int(np.count_nonzero(ev > gamma))
    at_least = int(np.count_nonzero(ev >= delta))
    return {
        "lower_count": above,
        "lower_bound": spec.tr_T - defect / (1.0 - gamma),
        "upper_count": at_least,
        "upper_bound": spec.tr_T + defect / delta,
        "lower_ok": above >= spec.tr_T - defect / (1.0 - gamma) - 1e-9,
        "upper_ok": at_least <= spec.tr_T + defect / delta + 1e-9,
    }


# ---------------------------------------------------------------------------
# weighted Lagrange interpolation
# ---------------------------------------------------------------------------

class LagrangeBasis:
    """Cardinal functions l_j of a point configuration.

        l_j(z) = prod_{i != j} (z - z_i)/(z_j - z_i) * e^{-n(Q(z) - Q(z_j))/2}

    assembled in the log domain: one shared sum of logs per evaluation
    point, so a full (points x n) table costs O(M n) after the O(n^2)
    setup. Rows at evaluation points that coincide with a node are exact
    Kronecker rows.
    """

    def __init__(self, pot: Potential, cfg: Configuration):
        pts = np.asarray(cfg.points, dtype=complex)
        diff = pts[:, None] - pts[None, :]
        off = np.abs(diff) + np.eye(cfg.n)
        if np.min(off) < 1e-13:
            raise ValueError("coincident interpolation nodes")
        self.potential = pot
        self.nodes = pts
        self.n = cfg.n
        np.fill_diagonal(diff, 1.0)
        self._denom = np.sum(np.log(diff), axis=1) - 0.0j
        self._qnodes = eval_potential(pot, pts)

    def at(self, z) -> np.ndarray:
        """Values l_j(z), shape z.shape + (n,)."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        flat = z.ravel()
        d = flat[:, None] - self.nodes[None, :]
        hit = np.abs(d) < 1e-13
        logd = np.log(np.where(hit, 1.0, d))
        total = np.sum(logd, axis=1)
        q = eval_potential(self.potential, flat)
        expo = (total[:, None] - logd - self._denom[None, :]
                - 0.5 * self.n * (q[:, None] - self._qnodes[None, :]))
        vals = np.exp(np.clip(expo.real, None, 700.0) + 1j * expo.imag)
        rows = hit.any(axis=1)
        if np.any(rows):
            vals[rows] = hit[rows].astype(complex)
        return vals.reshape(z.shape + (self.n,))


def lagrange_basis(pot: Potential, cfg: Configuration) -> LagrangeBasis:
    return LagrangeBasis(pot, cfg)


def lagrange_sup(pot: Potential, cfg: Configuration, ngrid: int = 200,
                 ntheta: int = 256, margin: float = 1.05) -> float:
    """max_j sup_grid |l_j| over a grid covering the far decay zone.

    For true (energy-minimizing) Fekete configurations the sup is 1,
    attained at the nodes; values meaningfully above 1 flag a poor local
    minimum.
    """
    lb = lagrange_basis(pot, cfg)
    rmax = _support_radius(pot, cfg.n, droplet_for(pot).outer_radius)
    g = polar_grid(rmax * margin, nr=ngrid, ntheta=ntheta)
    worst = 0.0
    for block in np.array_split(g.nodes, max(1, g.size // 8192)):
        worst = max(worst, float(np.max(np.abs(lb.at(block)))))
    return worst


# ---------------------------------------------------------------------------
# Bernstein gradient inequality
# ---------------------------------------------------------------------------

@dataclass
class BernsteinReport:
    max_ratio: float
    ratios: np.ndarray
    fd_error: float


def bernstein_check(pot: Potential, basis: WeightedBasis, samples: int = 20,
                    seed: int = 0, ngrid: int = 220,
                    ntheta: int = 256) -> BernsteinReport:
    """Gradient-to-norm ratios of random weighted polynomials on S.

        ratio(f) = sup_S |grad |f|| / (sqrt(e n DeltaQ) sup_S |f|)

    using the identity |grad |f|| = |p' - n dQ p| e^{-n Q/2}. The largest
    sampled ratio should not exceed 1 by more than O(1/sqrt n). A central
    finite-difference probe of |grad |f|| at one interior point per sample
    is recorded as fd_error.
    """
    drop = droplet_for(pot)
    g = polar_grid(drop.outer_radius, nr=ngrid, ntheta=ntheta)
    inside = drop.contains(g.nodes)
    nodes = g.nodes[inside]
    lap = laplacian_potential(pot, nodes)
    dq = np.conj(grad_potential(pot, nodes)) / 2.0
    phi = basis.evaluate(nodes)
    dphi = basis_derivative(basis, nodes)
    denom_scale = np.sqrt(np.e * basis.n * lap)

    rng = np.random.default_rng(seed)
    ratios = np.empty(samples)
    fd_err = 0.0
    h = 1e-5
    probe = nodes[np.argmin(np.abs(nodes - (0.25 + 0.15j)))]
    for t in range(samples):
        c = rng.standard_normal(basis.n) + 1j * rng.standard_normal(basis.n)
        f = phi @ c
        slope = np.abs(dphi @ c - basis.n * dq * f)
        sup = float(np.max(np.abs(f)))
        ratios[t] = float(np.max(slope / denom_scale)) / sup

        stencil = probe + np.array([h, -h, 1j * h, -1j * h])
        av = np.abs(basis.evaluate(stencil) @ c)
        gx = (av[0] - av[1]) / (2 * h)
        gy = (av[2] - av[3]) / (2 * h)
        analytic = np.abs(basis_derivative(basis, probe)[0] @ c
                          - basis.n * (np.conj(grad_potential(pot, np.atleast_1d(probe)))[0] / 2.0)
                          * (basis.evaluate(probe)[0] @ c))
        fd_err = max(fd_err, float(abs(np.hypot(gx, gy) - analytic)
                                   / max(analytic, 1e-12)))
    return BernsteinReport(max_ratio=float(np.max(ratios)), ratios=ratios,
                           fd_error=fd_err)


# ---------------------------------------------------------------------------
# interpolating and M_rho certificates
# ---------------------------------------------------------------------------

@dataclass
class InterpolationCertificate:
    C: float
    per_trial: np.ndarray
    min_node_ratio: float     # min_j bfR_{eps n}(z_j) / (eps n)
    interp_error: float
    eps: float
    rho: float


def interpolation_certificate(pot: Potential, cfg: Configuration,
                              rho: Optional[float] = None, eps: float = 0.2,
                              trials: int = 12, seed: int = 0
                              ) -> InterpolationCertificate:
    """Measured rho-interpolating constant of a configuration, rho = 1+2eps.

    Builds the damped cardinal functions

        L_j(z) = (bfK_{eps n}(z, z_j) / bfR_{eps n}(z_j))^2 l_j(z),

    so f = sum c_j L_j interpolates c at the nodes while the kernel factor
    kills the off-node growth of l_j. The certificate constant is the
    worst ||f||^2 n / sum |c_j|^2 over random unit vectors c. Also
    reports the smallest bfR_{eps n}(z_j)/(eps n), which must stay away
    from zero for the construction to make sense; a vanishing one-point
    function at a node raises.
    """
    if rho is None:
        rho = 1.0 + 2.0 * eps
    elif abs(rho - 1.0 - 2.0 * eps) > 1e-12:
        raise ValueError("need rho = 1 + 2 eps")
    n = cfg.n
    nes = int(round(eps * n))
    if nes < 1:
        raise ValueError("eps n rounds to zero; increase eps or n")
    kb = build_basis(pot, nes)
    km = KernelModel(basis=kb)
    R_nodes = one_point_function(km, cfg.points)
    if np.any(R_nodes < 1e-300):
        raise ValueError("one-point function vanishes at a node; "
                         "certificate construction fails")
    min_node_ratio = float(np.min(R_nodes) / nes)

    lb = lagrange_basis(pot, cfg)
    nrho = int(round(n * rho))
    rmax = _support_radius(pot, nrho, droplet_for(pot).outer_radius)
    g = polar_grid(rmax, nr=280, ntheta=256)

    rng = np.random.default_rng(seed)
    cs = rng.standard_normal((trials, n)) + 1j * rng.standard_normal((trials, n))

    norms2 = np.zeros(trials)
    for block_nodes, block_w in zip(
            np.array_split(g.nodes, max(1, g.size // 8192)),
            np.array_split(g.weights, max(1, g.size // 8192))):
        K = kernel_eval(km, block_nodes[:, None], cfg.points[None, :])
        L = (K / R_nodes[None, :]) ** 2 * lb.at(block_nodes)
        fv = L @ cs.T
        norms2 += block_w @ (np.abs(fv) ** 2)

    interp_error = 0.0
    Kn = kernel_eval(km, cfg.points[:, None], cfg.points[None, :])
    Ln = (Kn / R_nodes[None, :]) ** 2 * lb.at(cfg.points)
    for t in range(trials):
        fn = Ln @ cs[t]
        interp_error = max(interp_error, float(
            np.max(np.abs(fn - cs[t]) / np.abs(cs[t]))))

    per_trial = norms2 * n / np.sum(np.abs(cs) ** 2, axis=1)
    return InterpolationCertificate(C=float(np.max(per_trial)),
                                    per_trial=per_trial,
                                    min_node_ratio=min_node_ratio,
                                    interp_error=interp_error,
                                    eps=eps, rho=rho)


@dataclass
class MFamilyCertificate:
    C: float                 # int_{S_s} |f|^2 <= C (1/n) sum |f(z_j)|^2
    C_converse: float        # (1/n) sum |f(z_j)|^2 <= C' s^{-2} int_{S_s}|f|^2
    per_trial: np.ndarray
    min_node_mass: float
    rho: float
    s: float


def m_family_certificate(pot: Potential, cfg: Configuration, rho: float,
                         s: float = 0.5, trials: int = 24, seed: int = 0
                         ) -> MFamilyCertificate:
    """Measured M_rho constant of a 2s-separated configuration, rho < 1.

    Random f in the degree-(n rho) weighted space are compared on the
    fattened droplet S_s = S + D(0, s / sqrt n): the certificate constant
    is the worst integral-to-sample ratio, and the converse constant
    (samples controlled by the integral, scaled by s^2) is measured
    alongside.
    """
    if not (0 < rho < 1):
        raise ValueError("the certificate needs rho in (0, 1)")
    n = cfg.n
    d = np.abs(cfg.points[:, None] - cfg.points[None, :])
    np.fill_diagonal(d, np.inf)
    if np.min(d) * np.sqrt(n) < 2.0 * s - 1e-12:
        raise ValueError(f"configuration is not 2s-separated at s={s}")
    nrho = int(round(n * rho))
    basis = build_basis(pot, nrho)
    drop = droplet_for(pot)
    fat = s / np.sqrt(n)
    g = polar_grid(drop.outer_radius + fat * 1.5, nr=240, ntheta=256)
    keep = drop.contains(g.nodes) | (drop.distance(g.nodes) <= fat)
    nodes, w = g.nodes[keep], g.weights[keep]
    phi_grid = basis.evaluate(nodes)
    phi_pts = basis.evaluate(cfg.points)

    rng = np.random.default_rng(seed)
    per = np.empty(trials)
    conv = np.empty(trials)
    min_mass = np.inf
    for t in range(trials):
        c = rng.standard_normal(nrho) + 1j * rng.standard_normal(nrho)
        integral = float(w @ np.abs(phi_grid @ c) ** 2)
        node_mass = float(np.mean(np.abs(phi_pts @ c) ** 2))
        min_mass = min(min_mass, node_mass)
        per[t] = integral / node_mass
        conv[t] = node_mass * s**2 / integral
    return MFamilyCertificate(C=float(np.max(per)),
                              C_converse=float(np.max(conv)), per_trial=per,
                              min_node_mass=float(min_mass), rho=rho, s=s)
