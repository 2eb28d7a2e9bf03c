import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given
from hypothesis import strategies as st

from feketefield.fekete import (
    Configuration,
    SolverConfig,
    coulomb_energy,
    coulomb_gradient,
    counting_vs_sigma,
    metropolis_sample,
    separation,
    solve_fekete,
)
from feketefield.potentials import custom_potential, ginibre, mittag_leffler


def random_config(rng, n, pot=None):
    pts = rng.normal(scale=0.5, size=n) + 1j * rng.normal(scale=0.5, size=n)
    return Configuration(points=pts, potential=pot or ginibre())


# -- energy and gradient ----------------------------------------------------

def test_two_point_minimizer_closed_form():
    """H_2 = -2 log d + 4 a^2 over antipodal pairs is minimized at d = 1."""
    cfg, report = solve_fekete(ginibre(), 2)
    z = cfg.points
    assert report.converged
    assert abs(z[0] - z[1]) == pytest.approx(1.0, abs=1e-5)
    assert report.energy == pytest.approx(1.0, abs=1e-9)
    # the pair straddles the origin
    assert abs(z[0] + z[1]) < 1e-5


def test_gradient_matches_fd(rng):
    cfg = random_config(rng, 8)
    g = coulomb_gradient(cfg)
    h = 1e-7
    for j in (0, 3, 7):
        for d, part in ((h, "real"), (1j * h, "imag")):
            zp = cfg.points.copy()
            zm = cfg.points.copy()
            zp[j] += d
            zm[j] -= d
            fd = (coulomb_energy(Configuration(zp, cfg.potential))
                  - coulomb_energy(Configuration(zm, cfg.potential))) / (2 * h)
            got = g[j].real if part == "real" else g[j].imag
            assert got == pytest.approx(fd, rel=1e-5, abs=1e-5), (j, part)


def test_energy_infinite_on_collision():
    z = np.array([0.1 + 0.1j, 0.1 + 0.1j, 0.5])
    assert coulomb_energy(Configuration(z, ginibre())) == np.inf


@given(st.randoms(use_true_random=False))
def test_energy_is_permutation_invariant(pyrandom):
    rng = np.random.default_rng(pyrandom.randrange(2**32))
    z = rng.normal(size=6) + 1j * rng.normal(size=6)
    perm = rng.permutation(6)
    cfg = Configuration(z, ginibre())
    cfg_p = Configuration(z[perm], ginibre())
    npt.assert_allclose(coulomb_energy(cfg), coulomb_energy(cfg_p),
                        rtol=1e-12)
    npt.assert_allclose(np.sort_complex(coulomb_gradient(cfg)[perm]),
                        np.sort_complex(coulomb_gradient(cfg_p)), rtol=1e-9)


# -- separation --------------------------------------------------------------

def test_separation_two_point_oracle():
    cfg, _ = solve_fekete(ginibre(), 2)
    delta, dn = separation(ginibre(), cfg)
    assert delta == pytest.approx(np.sqrt(2.0), abs=1e-5)
    npt.assert_allclose(dn, np.abs(cfg.points[0] - cfg.points[1]))


def test_separation_lattice_oracle():
    # k x k grid with spacing 1/k: n = k^2 points, Delta = sqrt(n) / k = 1
    k = 7
    xs = (np.arange(k) - (k - 1) / 2) / k
    z = (xs[:, None] + 1j * xs[None, :]).ravel()
    delta, dn = separation(ginibre(), Configuration(z, ginibre()))
    assert delta == pytest.approx(1.0, rel=1e-12)
    npt.assert_allclose(dn, 1.0 / k, rtol=1e-12)


def test_separation_weights_by_local_density():
    # doubling the Laplacian scales the separation by sqrt(2)
    z = np.array([0.0, 0.5, 1.0 + 0.2j])
    base, _ = separation(ginibre(), Configuration(z, ginibre()))
    stiff = custom_potential(lambda w: 2 * np.abs(w) ** 2,
                             laplacian=lambda w: 2.0 * np.ones(w.shape))
    scaled, _ = separation(stiff, Configuration(z, stiff))
    assert scaled == pytest.approx(np.sqrt(2.0) * base, rel=1e-12)


def test_separation_rejects_degenerate_laplacian():
    flat = custom_potential(lambda w: np.real(w),
                            laplacian=lambda w: np.zeros(w.shape))
    z = np.array([0.0, 1.0])
    with pytest.raises(ValueError):
        separation(flat, Configuration(z, flat))


def test_converged_solution_stays_above_separation_floor(gin, gin50):
    delta, _ = separation(gin, gin50)
    assert delta >= 0.596


def test_solver_report_fields(gin):
    cfg, report = solve_fekete(gin, 12, SolverConfig(restarts=2, seed=3))
    assert report.converged and not report.collision
    assert report.max_grad <= 1e-6 * 12  # gradient entries scale with n
    assert len(report.restart_energies) == 2
    assert report.energy == pytest.approx(min(report.restart_energies))
    assert cfg.n == 12


def test_solver_is_deterministic(gin):
    a, _ = solve_fekete(gin, 9, SolverConfig(restarts=1, seed=5))
    b, _ = solve_fekete(gin, 9, SolverConfig(restarts=1, seed=5))
    npt.assert_array_equal(a.points, b.points)


# -- counting ----------------------------------------------------------------

def test_counting_report_contract(gin50):
    rep = counting_vs_sigma(gin50, nbins=3)
    assert rep.observed.sum() == pytest.approx(50)
    npt.assert_allclose(rep.expected, 50 / 3)
    # coarse shells hold the discrete lattice within a few points
    assert rep.max_abs_defect <= 6.0


def test_counting_rejects_unsupported_potential():
    pot = custom_potential(lambda z: np.abs(z) ** 2 + z.real**4)
    z = np.array([0.1, 0.2j, -0.3])
    with pytest.raises(ValueError):
        counting_vs_sigma(Configuration(z, pot))


# -- Metropolis sampler --------------------------------------------------------

def test_metropolis_deterministic_given_seed(gin):
    a, ra = metropolis_sample(gin, 10, sweeps=50, seed=2)
    b, rb = metropolis_sample(gin, 10, sweeps=50, seed=2)
    npt.assert_array_equal(a.points, b.points)
    assert ra.acceptance == rb.acceptance


def test_metropolis_acceptance_in_working_range(gin):
    _, rep = metropolis_sample(gin, 32, sweeps=300, seed=0)
    assert 0.2 < rep.acceptance < 0.9


def test_metropolis_records_thinned_states(gin):
    _, rep = metropolis_sample(gin, 5, sweeps=100, seed=1, burn=20,
                               record_every=10)
    assert rep.recorded is not None
    assert rep.recorded.shape == (8, 5, 2)


def test_metropolis_single_particle_matches_gaussian(gin):
    # for n = 1 the chain samples exp(-Q); E|z|^2 = 1 exactly
    _, rep = metropolis_sample(gin, 1, sweeps=30000, seed=4, burn=3000,
                               record_every=5)
    r2 = np.sum(rep.recorded**2, axis=2)
    assert r2.mean() == pytest.approx(1.0, abs=0.08)


def test_metropolis_validates_beta(gin):
    with pytest.raises(ValueError):
        metropolis_sample(gin, 4, beta=0.0)


def test_metropolis_respects_potential_parameters():
    # p = 3 confines the gas to radius 3^(-1/6) ~ 0.83; p = 1 fills the
    # unit disk, so a fat share of samples sits beyond 0.92 only for p = 1
    fracs = {}
    for p in (1.0, 3.0):
        _, rep = metropolis_sample(mittag_leffler(p), 16, sweeps=800, seed=9,
                                   burn=200, record_every=20)
        r = np.hypot(rep.recorded[..., 0], rep.recorded[..., 1])
        fracs[p] = (r > 0.92).mean()
    assert fracs[1.0] > 0.08
    assert fracs[3.0] < 0.05
