import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from apollo import spectral as sp
from apollo.census import error_exponent_main
from apollo.errors import DomainError

T_GRID = np.linspace(-1, 1, 2001)
DELTA = 1.30568


# -- Legendre -----------------------------------------------------------------


def test_legendre_examples():
    assert sp.legendre_P(0, 0.3) == 1
    assert sp.legendre_P(1, -0.7) == -0.7
    for ell in range(12):
        assert sp.legendre_P(ell, -1.0) == (-1) ** ell
    assert sp.legendre_P(2, 0.5) == pytest.approx(-0.125, abs=1e-15)
    with pytest.raises(DomainError):
        sp.legendre_P(3, 1.0001)


def test_legendre_bounded_by_one():
    worst = max(float(np.max(np.abs(sp.legendre_P(ell, T_GRID)))) for ell in range(201))
    assert worst <= 1 + 1e-12


def test_legendre_three_term_residual():
    worst = 0.0
    p_prev2, p_prev = sp.legendre_P(0, T_GRID), sp.legendre_P(1, T_GRID)
    for ell in range(2, 201):
        p = sp.legendre_P(ell, T_GRID)
        terms = (ell * p, (2 * ell - 1) * T_GRID * p_prev, (ell - 1) * p_prev2)
        res = np.abs(terms[0] - terms[1] + terms[2]) / (sum(np.abs(x) for x in terms) + 1e-300)
        worst = max(worst, float(res.max()))
        p_prev2, p_prev = p_prev, p
    assert worst < 1e-10


@pytest.mark.parametrize("ell", [0, 1, 2, 5, 17, 60, 200])
def test_legendre_against_scipy(ell):
    np.testing.assert_allclose(sp.legendre_P(ell, T_GRID), special.eval_legendre(ell, T_GRID), atol=1e-12)


@pytest.mark.parametrize("ell", [1, 2, 7, 30, 80])
def test_legendre_derivative(ell):
    got = sp.legendre_P_deriv(ell, T_GRID)
    want = np.polynomial.legendre.Legendre.basis(ell).deriv()(T_GRID)
    scale = ell * (ell + 1) / 2
    np.testing.assert_allclose(got / scale, want / scale, atol=1e-11)
    assert sp.legendre_P_deriv(ell, 1.0) == ell * (ell + 1) / 2
    assert sp.legendre_P_deriv(ell, -1.0) == (-1) ** (ell - 1) * ell * (ell + 1) / 2


def test_assoc_examples():
    x = np.linspace(-1, 1, 11)
    np.testing.assert_array_equal(sp.legendre_P_assoc(6, 0, x), sp.legendre_P(6, x))
    assert sp.legendre_P_assoc(1, 1, 0.0) == pytest.approx(-1)
    assert sp.legendre_P_assoc(1, -1, 0.0) == pytest.approx(0.5)
    with pytest.raises(DomainError):
        sp.legendre_P_assoc(2, 3, 0.1)


@pytest.mark.parametrize("ell,m", [(1, 1), (3, 2), (5, -3), (10, 4), (12, -7), (20, 20)])
def test_assoc_against_scipy(ell, m):
    x = np.linspace(-0.99, 0.99, 199)
    want = special.lpmv(m, ell, x)
    np.testing.assert_allclose(sp.legendre_P_assoc(ell, m, x), want, rtol=1e-10, atol=1e-12 * np.max(np.abs(want)))


# -- M_theta and ladders ------------------------------------------------------

THETA = np.linspace(0, math.pi, 181)


def test_M_theta_examples():
    np.testing.assert_array_equal(sp.M_theta(0, THETA), 1)
    assert sp.M_theta(1, 0.0) == pytest.approx(-1)
    for ell in range(8):
        assert sp.M_theta(ell, math.pi / 2) == pytest.approx(math.factorial(ell), rel=1e-14)


def test_M_theta_first_identity():
    for ell in range(1, 51):
        m2 = sp.M_theta(ell - 2, THETA) if ell >= 2 else 0 * THETA
        terms = ((-2 * ell + 1) * np.cos(2 * THETA) * sp.M_theta(ell - 1, THETA), (ell - 1) ** 2 * m2)
        lhs = sp.M_theta(ell, THETA)
        scale = np.abs(lhs) + np.abs(terms[0]) + np.abs(terms[1])
        assert np.max(np.abs(lhs - terms[0] + terms[1]) / scale) < 1e-10


def test_M_theta_second_identity():
    worst = 0.0
    for ell in range(1, 51):
        m2 = sp.M_theta(ell - 2, THETA) if ell >= 2 else 0 * THETA
        rhs = (
            4 * (-2 * ell + 1) * np.cos(2 * THETA) * sp.M_theta(ell - 1, THETA),
            (-2 * ell + 1) * np.sin(2 * THETA) * sp.M_theta_deriv(ell - 1, THETA),
            2 * (ell - 1) ** 2 * (ell - 2) * m2,
        )
        lhs = 2 * (ell + 1) * sp.M_theta(ell, THETA)
        scale = np.abs(lhs) + sum(np.abs(x) for x in rhs)
        worst = max(worst, float(np.max(np.abs(lhs - sum(rhs)) / scale)))
    assert worst < 1e-8


def test_M_theta_derivative_by_differences():
    h = 1e-6
    th = np.linspace(0.1, 3.0, 30)
    for ell in (1, 4, 9):
        fd = (sp.M_theta(ell, th + h) - sp.M_theta(ell, th - h)) / (2 * h)
        np.testing.assert_allclose(sp.M_theta_deriv(ell, th), fd, rtol=1e-6, atol=1e-6 * math.factorial(ell))


def test_ladder_examples():
    for s in (1.1, 1.5, 1.9):
        assert sp.ladder_coeffs(1, s) == (-1, 0)
        a, b = sp.ladder_coeffs(2, s)
        assert a == -3 and b == pytest.approx(s * (2 - s))
    assert sp.ladder_coeffs(3, 1.5) == (-5, 15)
    with pytest.raises(DomainError):
        sp.ladder_coeffs(0, 1.5)


# -- norms and coefficient ratios ---------------------------------------------


@pytest.mark.parametrize("n", [2, 3])
def test_v_norm_base(n):
    assert sp.v_norm(n, 0.8 if n == 2 else DELTA, 0) == 1


@pytest.mark.parametrize("s", [1.1, DELTA, 1.7])
def test_v_norm_first_step(s):
    assert sp.v_norm(3, s, 1) == pytest.approx(math.sqrt(s * (2 - s) / 3), rel=1e-14)


@pytest.mark.parametrize("n,s", [(3, 1.1), (3, DELTA), (3, 1.7), (2, 0.6), (2, 0.8), (2, 0.95)])
def test_v_norm_closed_vs_recursive(n, s):
    for ell in range(31):
        assert abs(sp.v_norm(n, s, ell) / sp.v_norm_recursive(n, s, ell) - 1) < 1e-9


def test_v_norm_domain():
    with pytest.raises(DomainError):
        sp.v_norm(3, 0.9, 2)
    with pytest.raises(DomainError):
        sp.v_norm(2, 1.0, 2)


def test_c_ratio_examples():
    assert sp.c_coeff_ratio(3, DELTA, 0) == 1
    assert sp.c_coeff_ratio(2, 0.8, 0) == 1
    for ell in range(10):
        assert math.copysign(1, sp.c_coeff_ratio(3, DELTA, ell)) == (-1) ** ell
    g = special.gamma
    for d in (0.6, 0.8):
        for ell in range(1, 20):
            want = math.sqrt(g(1 - d) * g(ell + d) / (g(d) * g(ell + 1 - d)))
            assert sp.c_coeff_ratio(2, d, ell) == pytest.approx(want, rel=1e-12)


ELLS = np.arange(0, 1001)


@pytest.mark.parametrize("n,delta", [(3, DELTA), (3, 1.1), (2, 0.8), (2, 0.6)])
def test_c_ratio_growth_bound(n, delta):
    # the scaled ratio should not grow: fitted log-log slope at most 0.05
    scaled = [abs(sp.c_coeff_ratio(n, delta, int(l))) / (l + 1) ** ((n - 2) / 2) for l in ELLS]
    tail = ELLS >= 100
    slope = sp.growth_exponent(np.array(scaled)[tail], ELLS[tail])
    assert slope <= 0.05, f"scaled ratio grows like (ell+1)^{slope:.3f}"


@pytest.mark.parametrize("n,delta", [(3, DELTA), (3, 1.1), (3, 1.7), (2, 0.8), (2, 0.6)])
def test_c_ratio_actual_growth(n, delta):
    ells = ELLS[ELLS >= 100]
    vals = [sp.c_coeff_ratio(n, delta, int(l)) for l in ells]
    want = (n - 2) / 2 + delta - (n - 1) / 2
    assert sp.growth_exponent(vals, ells) == pytest.approx(want, abs=0.02)


# -- kernels ------------------------------------------------------------------


def test_poisson_examples():
    assert sp.poisson_kernel(DELTA, ((0.0, 0.0), 1.0, (0.0, 0.0))) == 1
    # on the axis over u=0 the kernel is (y / y^2)^delta
    for y in (0.1, 0.5, 3.0):
        assert sp.poisson_kernel(DELTA, ((0.0, 0.0), y, (0.0, 0.0))) == pytest.approx(y**-DELTA, rel=1e-14)
    x, y, u = (0.3, -0.4), 0.7, (1.1, 0.2)
    num = (u[0] ** 2 + u[1] ** 2 + 1) * y
    den = (x[0] - u[0]) ** 2 + (x[1] - u[1]) ** 2 + y * y
    assert sp.poisson_kernel(DELTA, (x, y, u)) == pytest.approx((num / den) ** DELTA, rel=1e-14)


def test_kernel_point_validation():
    with pytest.raises(DomainError):
        sp.KernelPoint((0.0,), 0.0, (0.0,))
    with pytest.raises(DomainError):
        sp.phi_kernel(1, DELTA, ((0.0,), 1.0, (0.0,)), 3)


coord = st.floats(-5, 5, allow_nan=False)


@settings(max_examples=300, deadline=None)
@given(
    ell=st.integers(0, 60),
    x=st.tuples(coord, coord),
    u=st.tuples(coord, coord),
    y=st.floats(1e-3, 10),
    delta=st.floats(1.01, 1.99),
)
def test_phi_bound_n3(ell, x, u, y, delta):
    p = (x, y, u)
    bound = sp.kernel_prefactor(ell, delta, 3) * sp.poisson_kernel(delta, p)
    assert abs(sp.phi_kernel(ell, delta, p, 3)) <= bound * (1 + 1e-12)


@settings(max_examples=300, deadline=None)
@given(ell=st.integers(0, 60), x=coord, u=coord, y=st.floats(1e-3, 10), delta=st.floats(0.51, 0.99))
def test_phi_unit_phase_n2(ell, x, u, y, delta):
    p = ((x,), y, (u,))
    re, im = sp.phi_kernel(ell, delta, p, 2)
    bound = sp.kernel_prefactor(ell, delta, 2) * sp.poisson_kernel(delta, p)
    assert math.hypot(re, im) == pytest.approx(bound, rel=1e-10)


def test_phi_examples():
    p3 = ((0.2, 0.1), 0.5, (-0.3, 0.4))
    assert sp.phi_kernel(0, DELTA, p3, 3) == pytest.approx(sp.poisson_kernel(DELTA, p3))
    assert sp.phi_kernel(0, 0.8, ((0.2,), 0.5, (0.7,)), 2) == pytest.approx((sp.poisson_kernel(0.8, ((0.2,), 0.5, (0.7,))), 0))
    axis = ((0.3, 0.3), 0.8, (0.3, 0.3))
    for ell in (1, 2, 5):
        want = sp.kernel_prefactor(ell, DELTA, 3) * sp.poisson_kernel(DELTA, axis)
        assert sp.phi_kernel(ell, DELTA, axis, 3) == pytest.approx(want, rel=1e-13)
        # approaching the boundary away from u
        low = ((0.3, 0.3), 1e-7, (1.0, 0.0))
        ratio = sp.phi_kernel(ell, DELTA, low, 3) / (sp.kernel_prefactor(ell, DELTA, 3) * sp.poisson_kernel(DELTA, low))
        assert ratio == pytest.approx((-1) ** ell, abs=1e-9)


def test_prefactor_closed_form():
    for ell in range(10):
        want3 = math.factorial(ell) * special.gamma(DELTA + ell) / special.gamma(DELTA)
        assert sp.kernel_prefactor(ell, DELTA, 3) == pytest.approx(want3, rel=1e-12)
        want2 = special.gamma(0.8 + ell) / special.gamma(0.8)
        assert sp.kernel_prefactor(ell, 0.8, 2) == pytest.approx(want2, rel=1e-12)


# -- constants and exponents --------------------------------------------------


def _kappa_quad(n, delta):
    if n == 2:
        val, _ = integrate.quad(lambda x: (1 + x * x) ** -delta, -np.inf, np.inf, epsabs=1e-13, epsrel=1e-13, limit=500)
        return val
    val, _ = integrate.quad(lambda r: r * (1 + r * r) ** -delta, 0, np.inf, epsabs=1e-13, epsrel=1e-13, limit=500)
    return 2 * math.pi * val


def test_kappa_examples():
    assert sp.kappa_flat_factor(3, 2.0) == pytest.approx(math.pi, rel=1e-15)
    assert sp.kappa_flat_factor(2, 1.0) == pytest.approx(math.pi, rel=1e-15)
    with pytest.raises(DomainError):
        sp.kappa_flat_factor(3, 1.0)
    with pytest.raises(DomainError):
        sp.kappa_flat_factor(2, 0.5)


@pytest.mark.parametrize("n,delta", [(2, 0.8), (2, 1.3), (2, 1.7), (3, 1.3), (3, 1.7), (3, DELTA)])
def test_kappa_against_quadrature(n, delta):
    assert sp.kappa_flat_factor(n, delta) == pytest.approx(_kappa_quad(n, delta), rel=1e-8, abs=1e-8)


def test_horospherical_exponents():
    assert sp.horospherical_main_exponent(3, DELTA) == pytest.approx(0.69432, abs=1e-14)
    params = sp.SpectralParams(3, DELTA, s1=DELTA)
    assert sp.horospherical_error_exponent(params) == sp.horospherical_main_exponent(3, DELTA)
    d, s1 = 0.8, 0.65
    assert sp.horospherical_error_exponent(sp.SpectralParams(2, d, s1=s1)) == pytest.approx(1 - d + 2 * (d - s1) / 5, abs=1e-15)
    with pytest.raises(DomainError):
        sp.horospherical_error_exponent(sp.SpectralParams(3, DELTA))
    with pytest.raises(DomainError):
        sp.SpectralParams(3, DELTA, s1=1.4)
    with pytest.raises(DomainError):
        sp.SpectralParams(3, 2.1)


def test_sector_exponent_examples():
    assert sp.sector_error_exponent(2, 0.8, 0.1) == pytest.approx(0.8 - 0.8 / 110, abs=1e-15)
    savings = [DELTA - sp.sector_error_exponent(3, DELTA, 0.2, q) for q in (0.1, 0.25, 0.5, 1.0)]
    assert all(a > b for a, b in zip(savings, savings[1:]))
    for bad in [(3, DELTA, 0.0, 1.0), (3, DELTA, 0.1, 0.0), (3, DELTA, 0.1, 1.5)]:
        with pytest.raises(DomainError):
            sp.sector_error_exponent(*bad)


def test_sector_matches_main_exponent_random():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        alpha = rng.uniform(1.0, 2.0)
        s1 = rng.uniform(1.0, alpha)
        if not 1.0 < s1 < alpha < 2.0:
            continue
        a = sp.sector_error_exponent(3, alpha, alpha - s1, 1.0)
        b = error_exponent_main(alpha, s1)
        assert abs(a - b) <= 4 * np.finfo(float).eps * alpha
