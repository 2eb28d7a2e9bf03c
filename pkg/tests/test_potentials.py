import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given
from hypothesis import strategies as st

from feketefield.potentials import (
    custom_potential,
    ellipse_potential,
    eval_potential,
    ginibre,
    grad_potential,
    growth_check,
    laplacian_potential,
    mittag_leffler,
)

FD = 1e-6


def fd_gradient(pot, z):
    qx = (eval_potential(pot, z + FD) - eval_potential(pot, z - FD)) / (2 * FD)
    qy = (eval_potential(pot, z + 1j * FD)
          - eval_potential(pot, z - 1j * FD)) / (2 * FD)
    return qx + 1j * qy


def fd_quarter_laplacian(pot, z, h=1e-4):
    # larger step than the gradient: the second difference divides by h^2
    s = (eval_potential(pot, z + h) + eval_potential(pot, z - h)
         + eval_potential(pot, z + 1j * h) + eval_potential(pot, z - 1j * h)
         - 4 * eval_potential(pot, z))
    return 0.25 * s / h**2


def sample_points(rng, n=40):
    return rng.normal(scale=1.2, size=n) + 1j * rng.normal(scale=1.2, size=n)


def test_ginibre_closed_forms(rng):
    pot = ginibre()
    z = sample_points(rng)
    npt.assert_allclose(eval_potential(pot, z), np.abs(z) ** 2, rtol=1e-14)
    npt.assert_allclose(grad_potential(pot, z), 2 * z, rtol=1e-14)
    npt.assert_allclose(laplacian_potential(pot, z), 1.0)


@pytest.mark.parametrize("p", [0.7, 1.0, 1.5, 2.5])
def test_mittag_leffler_derivatives_match_fd(p, rng):
    pot = mittag_leffler(p)
    z = sample_points(rng, 25)
    z = z[np.abs(z) > 0.3]  # FD is unreliable near the r^(2p) cusp
    npt.assert_allclose(grad_potential(pot, z), fd_gradient(pot, z),
                        rtol=2e-8, atol=2e-8)
    npt.assert_allclose(laplacian_potential(pot, z),
                        fd_quarter_laplacian(pot, z), rtol=1e-5, atol=1e-5)


def test_mittag_leffler_reduces_to_ginibre():
    z = np.array([0.3 + 0.4j, -1.2j, 2.0])
    npt.assert_allclose(eval_potential(mittag_leffler(1.0), z),
                        eval_potential(ginibre(), z), rtol=1e-15)
    npt.assert_allclose(laplacian_potential(mittag_leffler(1.0), z), 1.0)


def test_mittag_leffler_origin():
    # integrable blow-up for p < 1, flat for p > 1
    assert laplacian_potential(mittag_leffler(0.8), 0j) == np.inf
    assert laplacian_potential(mittag_leffler(2.0), 0j) == 0.0
    assert grad_potential(mittag_leffler(1.5), 0j) == 0.0


def test_ellipse_closed_forms(rng):
    t = 0.5
    pot = ellipse_potential(t)
    z = sample_points(rng)
    want = (1 - t) * z.real**2 + (1 + t) * z.imag**2
    npt.assert_allclose(eval_potential(pot, z), want, rtol=1e-14)
    npt.assert_allclose(grad_potential(pot, z), fd_gradient(pot, z),
                        rtol=1e-8, atol=1e-8)
    npt.assert_allclose(laplacian_potential(pot, z), 1.0)


def test_ellipse_t_zero_is_ginibre():
    z = np.array([1.0 + 2.0j, -0.5j])
    npt.assert_allclose(eval_potential(ellipse_potential(0.0), z),
                        eval_potential(ginibre(), z), rtol=1e-15)


def test_parameter_validation():
    with pytest.raises(ValueError):
        mittag_leffler(0.0)
    with pytest.raises(ValueError):
        mittag_leffler(-1.0)
    with pytest.raises(ValueError):
        ellipse_potential(1.0)
    with pytest.raises(ValueError):
        ellipse_potential(-0.2)


def test_custom_potential_fd_fallback(rng):
    pot = custom_potential(lambda z: np.abs(z) ** 2 + z.real)
    z = sample_points(rng, 10)
    npt.assert_allclose(grad_potential(pot, z), 2 * z + 1,
                        rtol=1e-6, atol=1e-6)
    npt.assert_allclose(laplacian_potential(pot, z), 1.0, atol=1e-4)


def test_custom_potential_analytic_derivatives():
    pot = custom_potential(lambda z: np.abs(z) ** 4,
                           grad=lambda z: 4 * np.abs(z) ** 2 * z,
                           laplacian=lambda z: 4 * np.abs(z) ** 2)
    z = np.array([0.5 + 0.5j])
    npt.assert_allclose(grad_potential(pot, z), 4 * np.abs(z) ** 2 * z)
    npt.assert_allclose(laplacian_potential(pot, z), 4 * np.abs(z) ** 2)


def test_support_kind_and_label():
    assert ginibre().support_kind == "disk"
    assert mittag_leffler(2.0).support_kind == "disk"
    assert ellipse_potential(0.3).support_kind == "ellipse"
    assert custom_potential(lambda z: np.abs(z) ** 2,
                            radial=True).support_kind == "radial"
    assert ellipse_potential(0.5).label() == "ellipse(t=0.5)"
    assert mittag_leffler(1.5).label() == "mittag_leffler(p=1.5)"


def test_growth_check_passes_for_builtins():
    for pot in (ginibre(), mittag_leffler(0.6), ellipse_potential(0.8)):
        assert growth_check(pot).ok, pot.label()


def test_growth_check_flags_subcritical_growth():
    # Q ~ 0.8 log|z|^2 grows too slowly to confine n points
    slow = custom_potential(lambda z: 0.8 * np.log1p(np.abs(z) ** 2))
    assert not growth_check(slow).ok


@given(x=st.floats(-3, 3), y=st.floats(-3, 3), p=st.floats(0.6, 3.0))
def test_gradient_is_radial_for_radial_potentials(x, y, p):
    z = complex(x, y)
    if abs(z) < 1e-3:
        return
    g = grad_potential(mittag_leffler(p), z)
    # gradient of a radial field points along z
    cross = np.imag(np.conj(g) * z)
    assert abs(cross) <= 1e-10 * max(1.0, abs(g) * abs(z))


@given(x=st.floats(-2.5, 2.5), y=st.floats(-2.5, 2.5), t=st.floats(0, 0.9))
def test_ellipse_gradient_matches_fd(x, y, t):
    z = complex(x, y)
    pot = ellipse_potential(t)
    got = complex(grad_potential(pot, z))
    want = complex(fd_gradient(pot, z))
    assert abs(got - want) <= 1e-6 * (1 + abs(want))
