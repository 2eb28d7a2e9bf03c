"""Scaling limits at a regular boundary point and the Ward identity check.

The limiting objects live in blow-up coordinates where the droplet edge is
the imaginary axis and the bulk sits to the left. Everything is built from
the Gaussian kernel

    G(z, w) = exp(z conj(w) - |z|^2 / 2 - |w|^2 / 2)

and the plasma function F, the analytic continuation of the standard
normal survival function: F(x) = (1/2) erfc(x / sqrt 2) on the real axis,
F' = -exp(-z^2/2)/sqrt(2 pi) everywhere. The one-parameter family

    K^m(z, w) = G(z, w) F(z + conj(w) - 2m),        m in [0, inf],

interpolates between the edge kernel (m = 0) and the bulk kernel
G = K^inf. Its one-point function is R^m(z) = F(2 Re z - 2m) and the
Berezin density is

    B^m(z, w) = exp(-|z - w|^2) |F(z + conj(w) - 2m)|^2 / F(2 Re z - 2m).

|F(q)|^2 grows like exp(Im(q)^2) off the real axis, so all assembly is
done in the log domain; the growth cancels against exp(-|z - w|^2) and
leaves a 1/|Im q|^2 tail, which is why the Berezin measure has mass one
but no second moment in the vertical direction.

The Ward identity satisfied by the m-family reads

    dbar C(z) = R(z) - 1 - Delta log R(z),   C(z) = int B(z, w)/(z - w) dA(w)

with Delta = (1/4) Laplacian and dA = d^2 w / pi. ``ward_residual``
checks it numerically: C by z-centered polar quadrature (the integrable
singularity at w = z disappears in polar coordinates), dbar by central
differences, Delta log R by the five-point stencil.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import dawsn, wofz

from feketefield.quadrature import gauss_legendre

_LOG2 = math.log(2.0)
_IM_WINDOW = 10.0


@dataclass(frozen=True)
class PlasmaParams:
    """Distance parameter of the kernel family; m = math.inf is the bulk."""

    m: float = 0.0

    def __post_init__(self):
        if not (self.m >= 0):
            raise ValueError(f"m must be in [0, inf], got {self.m!r}")

    @property
    def bulk(self) -> bool:
        return math.isinf(self.m)


# ---------------------------------------------------------------------------
# plasma function
# ---------------------------------------------------------------------------

def _log_F(z) -> np.ndarray:
    """Principal-branch log of the plasma function, stable on all of C.

    Right half-plane: log F = -z^2/2 + log w(iz/sqrt2) - log 2, where w is
    the Faddeeva function (no zeros and O(1/z) for Im >= 0). Left
    half-plane: the reflection F(z) = 1 - F(-z), switched to the dominant
    term alone once |F(-z)| exceeds e^35.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    out = np.empty_like(z)
    pos = z.real >= 0
    if np.any(pos):
        zp = z[pos]
        out[pos] = -0.5 * zp * zp + np.log(wofz(1j * zp / np.sqrt(2.0))) - _LOG2
    if np.any(~pos):
        zn = -z[~pos]
        u = -0.5 * zn * zn + np.log(wofz(1j * zn / np.sqrt(2.0))) - _LOG2
        res = np.empty_like(u)
        big = u.real > 35.0
        res[big] = u[big] + 1j * np.pi - np.exp(-u[big])
        res[~big] = np.log(1.0 - np.exp(u[~big]))
        out[~pos] = res
    return out


def plasma_F(z) -> np.ndarray:
    """Plasma function F; F(x) = (1/2) erfc(x / sqrt 2) for real x.

    Values overflow once |Im z| is large (|F| grows like e^{Im(z)^2 / 2});
    a warning is emitted outside the window |Im z| <= 10. Internal
    consumers stay in the log domain instead.
    """
    z = np.asarray(z)
    if np.any(np.abs(np.imag(z)) > _IM_WINDOW):
        warnings.warn("plasma_F overflows off the strip |Im z| <= 10; "
                      "log-domain assembly is used internally instead",
                      RuntimeWarning, stacklevel=2)
    shape = np.shape(z)
    val = np.exp(_log_F(z))
    return val.reshape(shape) if shape else val[0]


def dawson_H(t) -> np.ndarray:
    """Gaussian-conjugate Dawson profile H(t) = dawsn(t / sqrt 2) / sqrt pi."""
    t = np.asarray(t, dtype=float)
    return dawsn(t / np.sqrt(2.0)) / np.sqrt(np.pi)


def smoothed_indicator(z, lo: float, hi: float, order: int = 500):
    """Entire extension of the heat-smoothed indicator of [lo, hi].

    Convolves the standard Gaussian density with the indicator of the
    interval and evaluates the result at complex z by direct quadrature:

        int_lo^hi exp(-(z - t)^2 / 2) / sqrt(2 pi) dt.

    A half line (lo = -inf) is truncated where the integrand is below
    1e-40 in magnitude, so smoothed_indicator(z, -inf, m) reproduces
    F(z - m) to quadrature accuracy. Scalar or array z.
    """
    if not hi > lo:
        raise ValueError("need lo < hi")
    zs = np.asarray(z, dtype=complex)
    out = np.empty(zs.shape, dtype=complex)
    for idx in np.ndindex(zs.shape or (1,)):
        pt = zs[idx] if zs.shape else complex(zs)
        a = lo
        if not np.isfinite(a):
            a = min(pt.real, hi) - (abs(pt.imag) + 16.0)
        q = gauss_legendre(order, a, hi)
        vals = np.exp(-0.5 * (pt - q.nodes) ** 2) / np.sqrt(2.0 * np.pi)
        val = np.sum(q.weights * vals)
        if zs.shape:
            out[idx] = val
        else:
            return complex(val)
    return out


# ---------------------------------------------------------------------------
# kernel family
# ---------------------------------------------------------------------------

def _log_G(z, w) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    return (z * np.conj(w) - 0.5 * (z.real**2 + z.imag**2)
            - 0.5 * (w.real**2 + w.imag**2))


def ginibre_G(z, w) -> np.ndarray:
    """Bulk correlation kernel G(z, w) = exp(z conj(w) - |z|^2/2 - |w|^2/2).

    G(z, z) = 1 and |G(z, w)| = exp(-|z - w|^2 / 2).
    """
    val = np.exp(_log_G(z, w))
    shape = np.broadcast_shapes(np.shape(z), np.shape(w))
    return val.reshape(shape) if shape else complex(val)


def kernel_Km(params: PlasmaParams, z, w) -> np.ndarray:
    """K^m(z, w); elementwise on broadcast shapes.

    Assembled as exp(log G + log F) so intermediate overflow in F alone
    cannot occur; |K^m| <= 1 by Cauchy-Schwarz.
    """
    lg = _log_G(z, w)
    if params.bulk:
        return np.exp(lg)
    q = np.asarray(z, dtype=complex) + np.conj(np.asarray(w, dtype=complex)) \
        - 2.0 * params.m
    return np.exp(lg + _log_F(q).reshape(np.shape(q)))


def berezin_Bm(params: PlasmaParams, z, w) -> np.ndarray:
    """Berezin density B^m(z, w) of the kernel family; values in [0, ~1]."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    d2 = np.abs(z - w) ** 2
    if params.bulk:
        return np.exp(-d2)
    q = z + np.conj(w) - 2.0 * params.m
    c = 2.0 * np.real(z) - 2.0 * params.m
    logB = (-d2 + 2.0 * np.real(_log_F(q)).reshape(np.shape(q))
            - np.real(_log_F(c)).reshape(np.shape(c)))
    return np.exp(logB)


def _logF_real(c) -> np.ndarray:
    """log F on the real axis (F is positive there)."""
    return np.real(_log_F(np.asarray(c, dtype=complex)))


# ---------------------------------------------------------------------------
# mass of the Berezin measure
# ---------------------------------------------------------------------------

def mass_one_mu(params: PlasmaParams, z, radius: Optional[float] = None,
                nr: int = 400, ntheta: int = 256) -> float:
    """Mass of the Berezin measure mu_z, int B(z, w) dA(w).

    With ``radius`` given, the integral runs over the disk |w - z| <=
    radius (polar rule, exact in the angular direction up to aliasing).
    With ``radius=None`` the full-plane mass is assembled as a vertical
    strip |Im(w - z)| <= B1 integrated exactly plus the closed-form
    Lorentzian tail: for |b| = |Im(w - z)| large,

        e^{-b^2} |F(c + a - ib)|^2 -> e^{-(c+a)^2} / (2 pi ((c+a)^2 + b^2)),

    and the b-integral beyond B1 is 2 atan(|c+a| / B1) / |c+a|. The
    slow 1/b^2 decay is real: finite-radius masses converge to 1 only
    like 1/radius, which is why the full-plane path exists.
    """
    z = complex(z)
    if params.bulk:
        if radius is None:
            return 1.0
        return float(1.0 - np.exp(-radius**2))
    c = 2.0 * z.real - 2.0 * params.m
    logFc = float(_logF_real(c)[0])

    if radius is not None:
        qr = gauss_legendre(nr, 0.0, radius)
        th = 2.0 * np.pi * np.arange(ntheta) / ntheta
        q = c + qr.nodes[:, None] * np.exp(-1j * th[None, :])
        logB = (-qr.nodes[:, None] ** 2
                + 2.0 * np.real(_log_F(q)).reshape(q.shape) - logFc)
        return float((2.0 / ntheta) * np.sum(
            qr.weights[:, None] * qr.nodes[:, None] * np.exp(logB)))

    B1 = 60.0
    lo = min(-0.5 * c, 0.0) - 7.5
    hi = max(-0.5 * c, 0.0) + 7.5
    qa = gauss_legendre(260, lo, hi)
    qb1 = gauss_legendre(160, 0.0, 8.0)
    qb2 = gauss_legendre(128, 8.0, B1)
    bnodes = np.concatenate([qb1.nodes, qb2.nodes])
    bweights = np.concatenate([qb1.weights, qb2.weights])
    a = qa.nodes[:, None]
    b = bnodes[None, :]
    q = c + a - 1j * b
    logB = -a**2 - b**2 + 2.0 * np.real(_log_F(q)).reshape(q.shape) - logFc
    strip = 2.0 * np.sum(qa.weights[:, None] * bweights[None, :]
                         * np.exp(logB)) / np.pi

    u = np.abs(c + qa.nodes)
    atan_over = np.where(u > 1e-12, np.arctan(u / B1) / np.where(u > 0, u, 1.0),
                         1.0 / B1)
    tail = np.sum(qa.weights * np.exp(-qa.nodes**2 - (c + qa.nodes) ** 2)
                  * atan_over) / (np.pi**2 * np.exp(logFc))
    return float(strip + tail)


# ---------------------------------------------------------------------------
# Ward identity residual
# ---------------------------------------------------------------------------

def _cauchy_Bm(params: PlasmaParams, z: np.ndarray, rmax: float, nr: int,
               ntheta: int) -> np.ndarray:
    """C(z) = int B(z, w) / (z - w) dA(w) by z-centered polar quadrature.

    Writing w = z + r e^{i theta} turns 1/(z - w) into -e^{-i theta}/r and
    the polar Jacobian cancels the 1/r, so the integrand is bounded:

        C(z) = -(2 / ntheta) sum_j e^{-i theta_j} sum_i w_i B(z, z + r_i e^{i theta_j}).

    In the bulk the angular sum vanishes identically (B is radial), which
    makes the bulk Ward check exact up to rounding.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    qr = gauss_legendre(nr, 0.0, rmax)
    th = 2.0 * np.pi * np.arange(ntheta) / ntheta
    phase = np.exp(-1j * th)
    if params.bulk:
        rad = qr.weights * np.exp(-qr.nodes**2)
        return np.full(z.shape, -(2.0 / ntheta) * np.sum(rad) * np.sum(phase))
    # C depends on z only through c = 2 Re z - 2m; evaluate unique values
    c = 2.0 * z.real - 2.0 * params.m
    cu, inverse = np.unique(np.round(c, 14), return_inverse=True)
    vals = np.empty(cu.shape, dtype=complex)
    logFc = _logF_real(cu)
    for i, ci in enumerate(cu):
        q = ci + qr.nodes[:, None] * phase[None, :]
        logB = (-qr.nodes[:, None] ** 2
                + 2.0 * np.real(_log_F(q)).reshape(q.shape) - logFc[i])
        rad = qr.weights @ np.exp(logB)
        vals[i] = -(2.0 / ntheta) * np.sum(rad * phase)
    return vals[inverse].reshape(z.shape)


@dataclass
class WardReport:
    """Pointwise residual of the Ward identity on an evaluation set."""

    z: np.ndarray
    residual: np.ndarray
    cauchy: np.ndarray = field(repr=False)
    dbar_C: np.ndarray = field(repr=False)
    rhs: np.ndarray = field(repr=False)
    rmax: float = 0.0
    nr: int = 0
    ntheta: int = 0
    fd_step: float = 0.0
    tol: float = 0.0

    @property
    def max_residual(self) -> float:
        return float(np.max(self.residual))

    @property
    def converged(self) -> bool:
        return self.max_residual <= self.tol


def default_ward_points(extent: float = 2.0, side: int = 7) -> np.ndarray:
    """Cartesian side x side grid on the square, masked to |z| <= extent."""
    xs = np.linspace(-extent, extent, side)
    Z = xs[None, :] + 1j * xs[:, None]
    z = Z.ravel()
    return z[np.abs(z) <= extent + 1e-12]


def ward_residual(params: PlasmaParams, z=None, rmax: float = 20.0,
                  nr: int = 280, ntheta: int = 320, fd_step: float = 1e-3,
                  tol: float = 5e-2) -> WardReport:
    """Residual |dbar C - (R - 1 - Delta log R)| of the kernel family.

    dbar C uses central differences in both coordinates (step
    ``fd_step``); Delta log R uses the five-point stencil with the same
    step. The quadrature truncates at ``rmax``; the neglected Lorentzian
    tail of B contributes O(1/rmax^2) to C, which is the dominant error
    and halves when the node budget (nr x ntheta) doubles at fixed
    spacing, i.e. rmax, nr, ntheta all grow by sqrt 2.
    """
    if z is None:
        z = default_ward_points()
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    h = fd_step

    stencil = np.stack([z, z + h, z - h, z + 1j * h, z - 1j * h])
    C = _cauchy_Bm(params, stencil, rmax, nr, ntheta)
    dbar = ((C[1] - C[2]) + 1j * (C[3] - C[4])) / (4.0 * h)

    if params.bulk:
        R = np.ones_like(z, dtype=float)
        lap_logR = np.zeros_like(z, dtype=float)
    else:
        cs = 2.0 * np.real(stencil) - 2.0 * params.m
        logF = _logF_real(cs).reshape(cs.shape)
        R = np.exp(logF[0])
        lap_logR = (logF[1] + logF[2] + logF[3] + logF[4]
                    - 4.0 * logF[0]) / (4.0 * h * h)
    rhs = R - 1.0 - lap_logR
    resid = np.abs(dbar - rhs)
    return WardReport(z=z, residual=resid, cauchy=C[0], dbar_C=dbar, rhs=rhs,
                      rmax=rmax, nr=nr, ntheta=ntheta, fd_step=fd_step,
                      tol=tol)


def ward_doubling(params: PlasmaParams, z=None, rmax: float = 20.0,
                  nr: int = 280, ntheta: int = 320, fd_step: float = 1e-3,
                  tol: float = 5e-2):
    """Ward residual at the base grid and at doubled node budget.

    Doubling keeps the node spacing and grows the truncation radius, so
    the leading O(1/rmax^2) error contracts by the budget factor. Returns
    (base report, fine report, max-residual ratio fine/base).
    """
    base = ward_residual(params, z=z, rmax=rmax, nr=nr, ntheta=ntheta,
                         fd_step=fd_step, tol=tol)
    s = math.sqrt(2.0)
    fine = ward_residual(params, z=base.z, rmax=rmax * s,
                         nr=int(round(nr * s)), ntheta=int(round(ntheta * s)),
                         fd_step=fd_step, tol=tol)
    ratio = fine.max_residual / base.max_residual if base.max_residual > 0 \
        else np.nan
    return base, fine, ratio
