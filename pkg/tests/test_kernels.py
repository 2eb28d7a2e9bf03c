"""Kernel tests anchored to the rotation-invariant closed forms.

With Q = |z|^2 the weighted monomial norms are h_k = k! / n^(k+1), the
one-point function is n Gamma(n, n|z|^2)/Gamma(n), and the blow-up limits
at an interior point are Gaussian. Both basis construction routes (radial
log-norm and quadrature Gram) must agree on all of these.
"""

import math

import numpy as np
import numpy.testing as npt
import pytest
from scipy.special import gammaincc

from feketefield.equilibrium import droplet_for
from feketefield.kernels import (
    KernelModel,
    basis_derivative,
    berezin,
    build_basis,
    kernel_eval,
    kernel_grid_stability,
    kernel_model,
    max_principle_check,
    one_point_function,
    rescale_frame,
    rescaled_berezin,
    rescaled_kernel,
    rescaled_one_point,
)
from feketefield.potentials import ellipse_potential, ginibre, mittag_leffler
from feketefield.quadrature import integrate2d, polar_grid


def ginibre_R(n, z):
    return n * gammaincc(n, n * np.abs(np.asarray(z)) ** 2)


# -- norms and one-point function --------------------------------------------

def test_ginibre_norms_match_factorial_formula(gin):
    n = 50
    basis = build_basis(gin, n)
    k = np.arange(21)
    want = np.array([math.lgamma(kk + 1) - (kk + 1) * math.log(n) for kk in k])
    npt.assert_allclose(basis.log_h[:21], want, rtol=0, atol=1e-10)


def test_one_point_function_at_origin_is_n(gin):
    for n in (20, 50):
        km = kernel_model(gin, n)
        assert one_point_function(km, 0j) == pytest.approx(n, rel=1e-8)


def test_one_point_function_matches_incomplete_gamma(gin):
    n = 50
    km = kernel_model(gin, n)
    z = np.linspace(0.0, 1.4, 29).astype(complex)
    npt.assert_allclose(one_point_function(km, z), ginibre_R(n, z),
                        rtol=1e-8, atol=1e-8)


def test_one_point_function_integrates_to_n(gin):
    n = 30
    km = kernel_model(gin, n)
    g = polar_grid(km.basis.rmax, nr=260, ntheta=128)
    mass = integrate2d(g, one_point_function(km, g.nodes))
    assert mass == pytest.approx(n, rel=1e-8)


def test_gram_route_agrees_with_radial_route(gin):
    n = 24
    radial = kernel_model(gin, n)
    gram = KernelModel(basis=build_basis(gin, n, force_gram=True))
    assert radial.basis.kind == "radial" and gram.basis.kind == "gram"
    z = np.array([0.1 + 0.2j, 0.7, -0.4 + 0.55j, 1.1j])
    npt.assert_allclose(one_point_function(gram, z),
                        one_point_function(radial, z), rtol=1e-8)
    npt.assert_allclose(kernel_eval(gram, z, z[::-1]),
                        kernel_eval(radial, z, z[::-1]),
                        rtol=1e-7, atol=1e-10)


# -- kernel identities --------------------------------------------------------

def test_kernel_is_hermitian(gin, rng):
    km = kernel_model(gin, 16)
    z = rng.normal(scale=0.5, size=6) + 1j * rng.normal(scale=0.5, size=6)
    w = rng.normal(scale=0.5, size=6) + 1j * rng.normal(scale=0.5, size=6)
    npt.assert_allclose(kernel_eval(km, z, w),
                        np.conj(kernel_eval(km, w, z)), rtol=1e-12)


def test_kernel_outer_shape(gin):
    km = kernel_model(gin, 8)
    z = np.zeros(5, dtype=complex)
    w = np.full(3, 0.1 + 0.1j)
    assert kernel_eval(km, z, w, outer=True).shape == (5, 3)


def test_reproducing_property(gin, rng):
    # int K(z, w) K(w, u) dA(w) = K(z, u)
    km = kernel_model(gin, 18)
    g = polar_grid(km.basis.rmax, nr=240, ntheta=128)
    z = rng.normal(scale=0.4, size=10) + 1j * rng.normal(scale=0.4, size=10)
    u = rng.normal(scale=0.4, size=10) + 1j * rng.normal(scale=0.4, size=10)
    left = kernel_eval(km, z[:, None], g.nodes[None, :])
    right = kernel_eval(km, g.nodes[None, :], u[:, None])
    got = np.sum(left * right * g.weights[None, :], axis=1)
    npt.assert_allclose(got, kernel_eval(km, z, u), rtol=1e-6, atol=1e-6)


def test_berezin_is_a_probability_density(gin, rng):
    km = kernel_model(gin, 25)
    roots = np.array([0.0, 0.3 + 0.2j, 0.8, 0.5j, -0.6 - 0.3j])
    g = polar_grid(km.basis.rmax, nr=280, ntheta=160)
    for z in roots:
        b = berezin(km, z, g.nodes)
        assert np.all(b >= 0)
        npt.assert_allclose(integrate2d(g, b), 1.0, atol=1e-6)


def test_berezin_rejects_vanishing_density(gin):
    km = kernel_model(gin, 12)
    with pytest.raises(ValueError):
        berezin(km, 60.0 + 0j, 0.1j)  # R underflows far outside


# -- blow-up limits ------------------------------------------------------------

def test_rescaled_kernel_bulk_limit(gin):
    # at an interior point the rescaled kernel modulus is Gaussian
    n = 64
    km = kernel_model(gin, n)
    frame = rescale_frame(gin, droplet_for(gin), 0j, n)
    pts = np.linspace(-1.5, 1.5, 7)
    z = (pts[:, None] + 1j * pts[None, :]).ravel()
    got = np.abs(rescaled_kernel(km, frame, z[:, None], z[None, :]))
    want = np.exp(-0.5 * np.abs(z[:, None] - z[None, :]) ** 2)
    npt.assert_allclose(got, want, atol=1e-8)


def test_rescaled_berezin_bulk_limit(gin):
    n = 64
    km = kernel_model(gin, n)
    frame = rescale_frame(gin, droplet_for(gin), 0j, n)
    w = np.array([0.0, 0.5, 1.0 + 0.5j, -1.2j, 0.3 - 0.9j])
    got = rescaled_berezin(km, frame, 0.25 + 0j, w)
    npt.assert_allclose(got, np.exp(-np.abs(0.25 - w) ** 2), atol=1e-8)


def test_rescaled_berezin_has_unit_mass_in_local_coordinates(gin):
    n = 48
    km = kernel_model(gin, n)
    frame = rescale_frame(gin, droplet_for(gin), 0j, n)
    g = polar_grid(5.0, nr=160, ntheta=96)
    mass = integrate2d(g, rescaled_berezin(km, frame, 0j, g.nodes))
    assert mass == pytest.approx(1.0, abs=1e-6)


def test_boundary_one_point_value(gin):
    # at the droplet edge the rescaled density is F(0) = 1/2 + O(1/sqrt n)
    n = 100
    km = kernel_model(gin, n)
    frame = rescale_frame(gin, droplet_for(gin), 1.0 + 0j, n)
    val = rescaled_one_point(km, frame, 0j)
    assert val == pytest.approx(0.5, abs=0.03)
    # and decays to ~0 a few units outside
    far = rescaled_one_point(km, frame, 3.0 + 0j)
    assert far < 0.01


def test_bulk_density_tracks_laplacian(gin):
    # where sqrt(n) * dist-to-boundary >= 5 the density is n DeltaQ to 5%
    n = 100
    km = kernel_model(gin, n)
    z = np.array([0.0, 0.2 + 0.1j, -0.35j, 0.4])
    ratios = one_point_function(km, z) / n
    npt.assert_allclose(ratios, 1.0, atol=0.05)


def test_frame_round_trip(gin, rng):
    frame = rescale_frame(gin, droplet_for(gin), 0.6 + 0.2j, 80)
    z = rng.normal(size=12) + 1j * rng.normal(size=12)
    npt.assert_allclose(frame.to_global(frame.to_local(z)), z, rtol=1e-12)
    npt.assert_allclose(frame.to_local(frame.to_global(z)), z, rtol=1e-12)


def test_kernel_stable_when_n_doubles(gin):
    # fixed rescaled window; |K| drifts by less than 0.05 from n to 2n
    frames = {}
    vals = {}
    pts = np.linspace(-1.0, 1.0, 5)
    w = (pts[:, None] + 1j * pts[None, :]).ravel()
    for n in (32, 64):
        km = kernel_model(gin, n)
        frame = rescale_frame(gin, droplet_for(gin), 0j, n)
        vals[n] = np.abs(rescaled_kernel(km, frame, w[:, None], w[None, :]))
    assert np.max(np.abs(vals[64] - vals[32])) <= 0.05


def test_quadrature_refinement_leaves_kernel_fixed(gin):
    z = np.array([0.2 + 0.1j, 0.8, 1.05])
    drift = kernel_grid_stability(gin, 36, z)
    assert drift < 5e-2


# -- weighted polynomial facts --------------------------------------------------

def test_max_principle(gin, ell05):
    for pot, n in ((gin, 40), (ell05, 30)):
        basis = build_basis(pot, n)
        excess = max_principle_check(pot, basis, trials=10, seed=1)
        assert excess <= 1e-6


def test_sub_mean_value_constant_is_stable_in_n(gin, rng):
    # |f(0)|^2 <= C n int_{D(0, 1/sqrt n)} |f|^2 with C independent of n
    cs = []
    for n in (36, 72):
        basis = build_basis(gin, n)
        c = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        g = polar_grid(1.0 / np.sqrt(n), nr=48, ntheta=64)
        f2 = np.abs(basis.evaluate(g.nodes) @ c) ** 2
        f0 = np.abs(basis.evaluate(0j) @ c).item() ** 2
        cs.append(f0 / (n * float(integrate2d(g, f2))))
    assert cs[0] < 4.0 and cs[1] < 4.0
    assert cs[1] < 2.5 * cs[0]


def test_basis_derivative_matches_fd(gin, ell05):
    h = 1e-6
    for pot, n in ((gin, 20), (ell05, 16)):
        basis = build_basis(pot, n)
        z = np.array([0.3 + 0.2j, -0.5 + 0.1j, 0.9])
        got = basis_derivative(basis, z)
        fd_x = (basis.evaluate(z + h) - basis.evaluate(z - h)) / (2 * h)
        fd_y = (basis.evaluate(z + 1j * h) - basis.evaluate(z - 1j * h)) / (2 * h)
        # remove the weight's gradient: dbar-free part of d(p e^{-nQ/2})
        # is p' e^{-nQ/2} + p e^{-nQ/2} * (-n/2) dQ, with dQ = conj(g)/2
        from feketefield.potentials import grad_potential
        dq = 0.5 * np.conj(grad_potential(pot, z))
        phi = basis.evaluate(z)
        analytic = 0.5 * (fd_x - 1j * fd_y) + 0.5 * n * dq[:, None] * phi
        npt.assert_allclose(got, analytic, rtol=1e-4, atol=1e-6)


def test_ellipse_gram_condition_is_tracked(ell05):
    basis = build_basis(ell05, 40)
    assert basis.kind == "gram"
    assert 1.0 < basis.cond < 1e12


def test_basis_evaluate_shape(gin):
    basis = build_basis(gin, 10)
    assert basis.evaluate(np.zeros((2, 3), dtype=complex)).shape == (2, 3, 10)
