"""Weighted polynomial spaces, reproducing kernels, and blow-up rescaling.

The space of weighted polynomials of order n is

    W_n = { p(z) e^{-n Q(z)/2} : deg p <= n - 1 },

a subspace of L^2(dA). Its reproducing kernel bfK_n(z, w) and one-point
function bfR_n(z) = bfK_n(z, z) are assembled from an orthonormal basis.

Two construction paths:

* radial potentials: monomials are already orthogonal, so only the norms
      h_k = integral r^{2k} e^{-n Q(r)} 2 r dr
  are needed. They are computed in the log domain (logsumexp over a dense
  Gauss-Legendre rule), which keeps degrees up to about n = 1000 stable.

* general potentials: a weighted Vandermonde matrix on a quadrature grid
  is QR-factorized with column prescaling. The condition number of the
  triangular factor is monitored; beyond 1e12 the build refuses and names
  the largest stable degree (around n = 64 for the ellipse family).

Blow-up coordinates around a point p rescale by sqrt(n DeltaQ(p)) and
rotate so the outward normal of the droplet at (the projection of) p maps
to the positive real axis:

    z = e^{-i theta} sqrt(n DeltaQ(p)) (zeta - p).

Rescaled kernels divide by n DeltaQ(p), so the bulk one-point function
tends to 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import qr, solve_triangular, svdvals
from scipy.special import logsumexp

from feketefield.equilibrium import Droplet, droplet_for
from feketefield.potentials import Potential, eval_potential, laplacian_potential
from feketefield.quadrature import Grid2D, gauss_legendre, polar_grid

COND_CAP = 1e12


# ---------------------------------------------------------------------------
# basis construction
# ---------------------------------------------------------------------------

def _support_radius(pot: Potential, n: int, drop_hint: float, ndrop: int = 800):
    """Radius beyond which every weighted monomial is below e^-60 of its peak.

    The log profile of |z|^k e^{-n Q / 2} squared is k log r^2 - n Q, linear
    in k, so the drop measured from each degree's own maximum is concave in
    k and it suffices to enforce the cut for the two extreme degrees.
    """
    rhi = max(2.0 * drop_hint, 1.0)
    for _ in range(60):
        rr = np.linspace(1e-6, rhi, ndrop)
        q = eval_potential(pot, rr.astype(complex))
        cuts = []
        for curve in (-n * q, 2.0 * (n - 1) * np.log(rr) - n * q):
            peak = np.argmax(curve)
            tail = np.where(curve[peak:] < curve[peak] - 60.0)[0]
            if not tail.size:
                break
            cuts.append(rr[peak + tail[0]])
        if len(cuts) == 2:
            return float(max(cuts))
        rhi *= 1.4
    raise ValueError("potential grows too slowly to confine the basis")


@dataclass
class WeightedBasis:
    """Orthonormal basis of W_n; ``kind`` is "radial" or "gram"."""

    potential: Potential
    n: int
    kind: str
    rmax: float
    log_h: Optional[np.ndarray] = field(default=None, repr=False)
    coeff: Optional[np.ndarray] = field(default=None, repr=False)
    grid: Optional[Grid2D] = field(default=None, repr=False)
    cond: float = 1.0

    def evaluate(self, z) -> np.ndarray:
        """Matrix of basis values, shape z.shape + (n,)."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        flat = z.ravel()
        q = eval_potential(self.potential, flat)
        if self.kind == "radial":
            k = np.arange(self.n)
            az = np.abs(flat)
            logr = np.log(np.where(az > 0, az, 1.0))
            expo = (k[None, :] * logr[:, None]
                    - 0.5 * self.n * q[:, None] - 0.5 * self.log_h[None, :])
            phase = k[None, :] * np.angle(flat)[:, None]
            vals = np.exp(expo + 1j * phase)
            zero = az == 0
            if np.any(zero):
                vals[zero, 1:] = 0.0
                vals[zero, 0] = np.exp(-0.5 * self.n * q[zero] - 0.5 * self.log_h[0])
            return vals.reshape(z.shape + (self.n,))
        powers = flat[:, None] ** np.arange(self.n)[None, :]
        weighted = powers * np.exp(-0.5 * self.n * q)[:, None]
        return (weighted @ self.coeff).reshape(z.shape + (self.n,))


def build_basis(pot: Potential, n: int, grid: Optional[Grid2D] = None,
                force_gram: bool = False) -> WeightedBasis:
    """Orthonormal basis of W_n for the potential.

    Radial potentials take the log-domain norm path unless ``force_gram``
    asks for the quadrature Gram factorization (useful for cross checks).

    Raises
    ------
    ValueError
        If the Gram factor's condition number exceeds 1e12; the message
        names the largest stable degree so the caller can retry.
    """
    if n < 1:
        raise ValueError("basis needs n >= 1")
    try:
        hint = droplet_for(pot).outer_radius
    except (ValueError, NotImplementedError):
        hint = 1.0
    rmax = _support_radius(pot, n, hint)

    if pot.radial and not force_gram:
        lam_probe = laplacian_potential(
            pot, np.linspace(0.05, rmax, 64).astype(complex))
        lam_max = float(np.max(lam_probe[np.isfinite(lam_probe)]))
        nq = max(384, int(4.0 * rmax * np.sqrt(n * max(lam_max, 1.0))) + 64)
        q = gauss_legendre(nq, 0.0, rmax)
        logw = np.log(2.0 * q.nodes * q.weights)
        qe = eval_potential(pot, q.nodes.astype(complex))
        k = np.arange(n)
        log_h = logsumexp(
            2.0 * k[:, None] * np.log(q.nodes)[None, :]
            - n * qe[None, :] + logw[None, :], axis=1)
        return WeightedBasis(potential=pot, n=n, kind="radial", rmax=rmax,
                             log_h=log_h)

    g = grid if grid is not None else polar_grid(
        rmax, nr=max(240, int(4.0 * rmax * np.sqrt(n))), ntheta=max(256, 4 * n))
    powers = g.nodes[:, None] ** np.arange(n)[None, :]
    wfun = np.exp(-0.5 * n * eval_potential(pot, g.nodes))
    A = powers * (wfun * np.sqrt(g.weights))[:, None]
    d = np.linalg.norm(A, axis=0)
    if np.any(d == 0):
        raise ValueError("degenerate column in the weighted Vandermonde matrix")
    _, R = qr(A / d[None, :], mode="economic")
    s = svdvals(R)
    cond = float(s[0] / s[-1]) if s[-1] > 0 else np.inf
    if cond > COND_CAP:
        stable = n
        for k in range(n, 0, -1):
            sk = svdvals(R[:k, :k])
            if sk[-1] > 0 and sk[0] / sk[-1] <= COND_CAP:
                stable = k
                break
        raise ValueError(
            f"Gram factorization too ill-conditioned (cond {cond:.2e}); "
            f"largest stable degree is {stable}")
    sign = np.sign(np.real(np.diag(R)))
    sign[sign == 0] = 1.0
    Rinv = solve_triangular(R * sign[:, None], np.eye(n))
    coeff = Rinv / d[:, None]
    return WeightedBasis(potential=pot, n=n, kind="gram", rmax=rmax,
                         coeff=coeff, grid=g, cond=cond)


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------

@dataclass
class KernelModel:
    """Reproducing kernel of W_n with a single-slot evaluation cache.

    The cache keys on the identity of the node array of the last call and
    holds a reference to it, so a recycled id cannot alias.
    """

    basis: WeightedBasis
    cache_last: bool = True
    _cache_key: object = field(default=None, repr=False)
    _cache_val: object = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.basis.n

    def _phi(self, z) -> np.ndarray:
        if self.cache_last and isinstance(z, np.ndarray):
            if self._cache_key is z:
                return self._cache_val
        val = self.basis.evaluate(z)
        if self.cache_last and isinstance(z, np.ndarray):
            self._cache_key = z
            self._cache_val = val
        return val


def kernel_model(pot: Potential, n: int, **kw) -> KernelModel:
    return KernelModel(basis=build_basis(pot, n, **kw))


def kernel_eval(km: KernelModel, z, w, outer: bool = False) -> np.ndarray:
    """bfK_n(z, w) elementwise on broadcast shapes, or the full outer matrix.

    Hermitian by construction: bfK(z, w) = conj(bfK(w, z)).
    """
    pz = km._phi(np.atleast_1d(np.asarray(z, dtype=complex)))
    pw = km._phi(np.atleast_1d(np.asarray(w, dtype=complex)))
    if outer:
        return pz.reshape(-1, km.n) @ pw.reshape(-1, km.n).conj().T
    return np.sum(pz * pw.conj(), axis=-1)


def one_point_function(km: KernelModel, z) -> np.ndarray:
    """bfR_n(z) = bfK_n(z, z), the unrescaled intensity."""
    p = km._phi(np.atleast_1d(np.asarray(z, dtype=complex)))
    return np.sum(p.real**2 + p.imag**2, axis=-1)


def berezin(km: KernelModel, z, w) -> np.ndarray:
    """Berezin density bfB(z, w) = |bfK(z, w)|^2 / bfR(z).

    Raises when bfR(z) vanishes beyond numerical floor (division guard).
    """
    R = one_point_function(km, z)
    if np.any(R <= 0):
        raise ValueError("one-point function vanishes at a Berezin center")
    K = kernel_eval(km, z, w)
    return (K.real**2 + K.imag**2) / R


# ---------------------------------------------------------------------------
# blow-up frames
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RescaleFrame:
    """Affine blow-up frame z = e^{-i theta} scale (zeta - p)."""

    p: complex
    scale: float
    rotation: complex  # e^{i theta}, the outward normal direction

    def to_local(self, zeta) -> np.ndarray:
        return np.conj(self.rotation) * (np.asarray(zeta, dtype=complex) - self.p) * self.scale

    def to_global(self, z) -> np.ndarray:
        return self.p + self.rotation * np.asarray(z, dtype=complex) / self.scale


def rescale_frame(pot: Potential, droplet: Droplet, p: complex, n: int
                  ) -> RescaleFrame:
    """Frame at p with scale sqrt(n DeltaQ(p)) and normal-aligned rotation."""
    lam = float(laplacian_potential(pot, np.atleast_1d(complex(p)))[0])
    if not np.isfinite(lam) or lam <= 0:
        raise ValueError(f"DeltaQ(p) = {lam!r} is not positive; cannot rescale")
    _, nrm = droplet.nearest_boundary(np.atleast_1d(complex(p)))
    return RescaleFrame(p=complex(p), scale=float(np.sqrt(n * lam)),
                        rotation=complex(nrm[0]))


def rescaled_one_point(km: KernelModel, frame: RescaleFrame, z) -> np.ndarray:
    """R_n(z) = bfR_n(p + e^{i theta} z / scale) / scale^2 (tends to F(2x) at
    a regular boundary point and to 1 in the bulk)."""
    return one_point_function(km, frame.to_global(z)) / frame.scale**2


def rescaled_kernel(km: KernelModel, frame: RescaleFrame, z, w,
                    outer: bool = False) -> np.ndarray:
    """K_n(z, w) = bfK_n(zeta(z), zeta(w)) / scale^2 in blow-up coordinates."""
    return kernel_eval(km, frame.to_global(z), frame.to_global(w),
                       outer=outer) / frame.scale**2


def rescaled_berezin(km: KernelModel, frame: RescaleFrame, z, w) -> np.ndarray:
    """B_n(z, w) = |K_n(z, w)|^2 / R_n(z) in blow-up coordinates.

    The 1/scale^2 Jacobian keeps unit mass in the rescaled area measure;
    in the Ginibre bulk this tends to e^{-|w - z|^2}.
    """
    return (berezin(km, frame.to_global(z), frame.to_global(w))
            / frame.scale**2)


def basis_derivative(basis: WeightedBasis, z) -> np.ndarray:
    """Matrix of p_j'(z) e^{-n Q(z)/2}, the weighted polynomial-part slopes.

    Together with evaluate() this gives the gradient of |f| for
    f = sum c_j phi_j through |grad |f|| = |p' - n dQ p| e^{-n Q / 2}.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    flat = z.ravel()
    if basis.kind == "radial":
        phi = basis.evaluate(flat)
        k = np.arange(basis.n)
        safe = np.where(flat == 0, 1.0, flat)
        out = phi * (k[None, :] / safe[:, None])
        zero = flat == 0
        if np.any(zero):
            out[zero] = 0.0
            if basis.n > 1:
                q0 = eval_potential(basis.potential, flat[zero])
                out[zero, 1] = np.exp(-0.5 * basis.n * q0
                                      - 0.5 * basis.log_h[1])
        return out.reshape(z.shape + (basis.n,))
    q = eval_potential(basis.potential, flat)
    m = np.arange(basis.n)
    dmono = np.zeros((flat.size, basis.n), dtype=complex)
    if basis.n > 1:
        dmono[:, 1:] = m[None, 1:] * flat[:, None] ** (m[None, 1:] - 1)
    weighted = dmono * np.exp(-0.5 * basis.n * q)[:, None]
    return (weighted @ basis.coeff).reshape(z.shape + (basis.n,))


def max_principle_check(pot: Potential, basis: WeightedBasis, trials: int = 10,
                        seed: int = 0, ngrid: int = 160) -> float:
    """Worst excess of sup |f| outside the droplet over sup |f| on it.

    Weighted polynomials peak on the droplet, so the excess should be
    <= 0 up to grid rounding for every sample. Returns the max over
    ``trials`` random unit-sup-norm combinations.
    """
    drop = droplet_for(pot)
    g = polar_grid(basis.rmax * 1.02, nr=ngrid, ntheta=192)
    phi = basis.evaluate(g.nodes)
    inside = drop.contains(g.nodes)
    if not np.any(inside) or np.all(inside):
        raise ValueError("grid does not straddle the droplet boundary")
    rng = np.random.default_rng(seed)
    worst = -np.inf
    for _ in range(trials):
        c = rng.standard_normal(basis.n) + 1j * rng.standard_normal(basis.n)
        vals = np.abs(phi @ c)
        vals /= np.max(vals[inside])
        worst = max(worst, float(np.max(vals[~inside]) - 1.0))
    return worst


def kernel_grid_stability(pot: Potential, n: int, sample,
                          factor: float = 2.0) -> float:
    """Relative drift of bfR_n at sample points when the quadrature doubles.

    For the radial path the radial rule is refined; for the Gram path the
    grid is refined. Used by the stability invariant (should stay well
    below 5e-2 when the defaults are adequate).
    """
    base = KernelModel(basis=build_basis(pot, n))
    b = base.basis
    if b.kind == "radial":
        lam_probe = laplacian_potential(
            pot, np.linspace(0.05, b.rmax, 64).astype(complex))
        lam_max = float(np.max(lam_probe[np.isfinite(lam_probe)]))
        nq = 2 * (max(384, int(4.0 * b.rmax * np.sqrt(n * max(lam_max, 1.0))) + 64))
        q = gauss_legendre(nq, 0.0, b.rmax)
        logw = np.log(2.0 * q.nodes * q.weights)
        qe = eval_potential(pot, q.nodes.astype(complex))
        k = np.arange(n)
        log_h = logsumexp(2.0 * k[:, None] * np.log(q.nodes)[None, :]
                          - n * qe[None, :] + logw[None, :], axis=1)
        fine = WeightedBasis(potential=pot, n=n, kind="radial", rmax=b.rmax,
                             log_h=log_h)
    else:
        g = polar_grid(b.grid.rmax, int(b.grid.nr * factor),
                       int(b.grid.ntheta * factor))
        fine = build_basis(pot, n, grid=g)
    km_f = KernelModel(basis=fine)
    sample = np.asarray(sample, dtype=complex)
    r0 = one_point_function(base, sample)
    r1 = one_point_function(km_f, sample)
    scale = np.maximum(np.abs(r1), 1e-30)
    return float(np.max(np.abs(r0 - r1) / scale))
