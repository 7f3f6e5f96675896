"""Special functions and exponent arithmetic behind the equidistribution results.

Legendre recursions, ladder coefficients, norms of the K-type vectors,
horospherical coefficient ratios, the Poisson-type kernel and its
K-type twists, and the closed-form exponents of the counting error terms.
Gamma ratios are evaluated in log space.

Evaluation points may be scalars or numpy arrays; a scalar in gives a
float out.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError

__all__ = [
    "SpectralParams",
    "KernelPoint",
    "legendre_P",
    "legendre_P_deriv",
    "legendre_P_assoc",
    "M_theta",
    "M_theta_deriv",
    "ladder_coeffs",
    "v_norm",
    "v_norm_recursive",
    "c_coeff_ratio",
    "poisson_kernel",
    "kernel_prefactor",
    "log_kernel_prefactor",
    "phi_kernel",
    "kappa_flat_factor",
    "horospherical_main_exponent",
    "horospherical_error_exponent",
    "sector_error_exponent",
    "growth_exponent",
]


def _out(x, scalar):
    return float(x) if scalar else x


def _check_n(n):
    if n not in (2, 3):
        raise DomainError(f"dimension n must be 2 or 3, got {n}")


def _check_delta(n, delta, what="delta"):
    _check_n(n)
    lo, hi = (n - 1) / 2, n - 1
    if not lo < delta < hi:
        raise DomainError(f"{what} must lie in ({lo}, {hi}) for n={n}, got {delta}")


# -- Legendre ---------------------------------------------------------------


def _legendre_pair(ell: int, t: np.ndarray):
    """(P_ell, P_{ell-1}) by the three-term recursion."""
    prev, cur = np.zeros_like(t), np.ones_like(t)
    for k in range(1, ell + 1):
        prev, cur = cur, ((2 * k - 1) * t * cur - (k - 1) * prev) / k
    return cur, prev


def _as_unit_interval(t):
    scalar = np.ndim(t) == 0
    arr = np.asarray(t, dtype=float)
    if np.any(np.abs(arr) > 1):
        raise DomainError("Legendre argument must satisfy |t| <= 1")
    return np.atleast_1d(arr), scalar


def _check_ell(ell):
    if int(ell) != ell or ell < 0:
        raise DomainError(f"degree must be a nonnegative integer, got {ell}")
    return int(ell)


def legendre_P(ell: int, t):
    """Legendre polynomial of degree ``ell`` on [-1, 1]."""
    ell = _check_ell(ell)
    arr, scalar = _as_unit_interval(t)
    p, _ = _legendre_pair(ell, arr)
    return _out(p[0], True) if scalar else p


def legendre_P_deriv(ell: int, t):
    """Derivative of the Legendre polynomial.

    Uses ``(1 - t^2) P' = ell (P_{ell-1} - t P_ell)`` and the endpoint value
    ``P'(+-1) = (+-1)^(ell-1) ell (ell+1) / 2``.  Close to the endpoints the
    quotient loses digits, so there the stable recursion
    ``P'_k = k P_{k-1} + t P'_{k-1}`` is used instead.
    """
    ell = _check_ell(ell)
    arr, scalar = _as_unit_interval(t)
    out = np.empty_like(arr)
    if ell == 0:
        out[:] = 0.0
        return _out(out[0], True) if scalar else out
    p, pm = _legendre_pair(ell, arr)
    one_minus = 1.0 - arr * arr
    mid = one_minus > 0.25
    out[mid] = ell * (pm[mid] - arr[mid] * p[mid]) / one_minus[mid]
    edge = ~mid
    if edge.any():
        te = arr[edge]
        prev_p, cur_p, dp = np.zeros_like(te), np.ones_like(te), np.zeros_like(te)
        for k in range(1, ell + 1):
            dp = k * cur_p + te * dp
            prev_p, cur_p = cur_p, ((2 * k - 1) * te * cur_p - (k - 1) * prev_p) / k
        ends = np.abs(te) == 1
        dp[ends] = np.sign(te[ends]) ** (ell - 1) * ell * (ell + 1) / 2
        out[edge] = dp
    return _out(out[0], True) if scalar else out


def legendre_P_assoc(ell: int, m: int, x):
    """Associated Legendre function with the ``(-1)^m`` phase included.

    Negative orders use ``P^{-m} = (-1)^m (ell-m)!/(ell+m)! P^m``.
    """
    ell = _check_ell(ell)
    if int(m) != m or abs(m) > ell:
        raise DomainError(f"order must be an integer with |m| <= ell, got m={m}, ell={ell}")
    m = int(m)
    arr, scalar = _as_unit_interval(x)
    if m < 0:
        k = -m
        scale = (-1) ** k * math.exp(math.lgamma(ell - k + 1) - math.lgamma(ell + k + 1))
        res = scale * legendre_P_assoc(ell, k, arr)
        return _out(res[0], True) if scalar else res
    # P_m^m = (-1)^m (2m-1)!! (1-x^2)^(m/2), then climb in degree
    pmm = np.ones_like(arr)
    s = np.sqrt(np.maximum(0.0, 1 - arr * arr))
    for k in range(1, m + 1):
        pmm = -(2 * k - 1) * s * pmm
    if ell == m:
        res = pmm
    else:
        prev, cur = pmm, (2 * m + 1) * arr * pmm
        for k in range(m + 2, ell + 1):
            prev, cur = cur, ((2 * k - 1) * arr * cur - (k + m - 1) * prev) / (k - m)
        res = cur
    return _out(res[0], True) if scalar else res


def M_theta(ell: int, theta):
    """``ell! * P_ell(-cos 2 theta)``."""
    ell = _check_ell(ell)
    t = -np.cos(2 * np.asarray(theta, dtype=float))
    return math.factorial(ell) * legendre_P(ell, np.clip(t, -1, 1))


def M_theta_deriv(ell: int, theta):
    """Derivative in theta: ``ell! * 2 sin(2 theta) * P'_ell(-cos 2 theta)``."""
    ell = _check_ell(ell)
    th = np.asarray(theta, dtype=float)
    t = np.clip(-np.cos(2 * th), -1, 1)
    return math.factorial(ell) * 2 * np.sin(2 * th) * legendre_P_deriv(ell, t)


# -- ladder coefficients and norms -----------------------------------------


def ladder_coeffs(ell: int, s: float) -> tuple:
    """Coefficients ``(a, b)`` of ``v_ell = a H v_{ell-1} + b v_{ell-2}``."""
    if int(ell) != ell or ell < 1:
        raise DomainError(f"ladder index must be an integer >= 1, got {ell}")
    a = -2 * ell + 1
    b = (ell - 1) ** 2 * (ell * (ell - 2) - s * (s - 2))
    return float(a), float(b)


def _log_v_norm(n, s, ell):
    if n == 3:
        return (
            math.lgamma(ell + 1)
            - 0.5 * math.log(2 * ell + 1)
            + 0.5 * (math.lgamma(s + ell) + math.lgamma(2 - s + ell) - math.lgamma(s) - math.lgamma(2 - s))
        )
    return 0.5 * (math.lgamma(s + ell) + math.lgamma(1 - s + ell) - math.lgamma(s) - math.lgamma(1 - s))


def v_norm(n: int, s: float, ell: int) -> float:
    """Norm of the ell-th K-type vector in the complementary series of parameter ``s``."""
    _check_delta(n, s, "s")
    ell = _check_ell(ell)
    return math.exp(_log_v_norm(n, s, ell))


def v_norm_recursive(n: int, s: float, ell: int) -> float:
    """Same norm from the step ratios instead of Gamma functions.

    For n=3 the squared norm picks up ``a_k b_{k+1} / a_{k+1}`` at step k;
    for n=2 it picks up ``(s + k - 1)(k - s)``.
    """
    _check_delta(n, s, "s")
    ell = _check_ell(ell)
    sq = 1.0
    for k in range(1, ell + 1):
        if n == 3:
            a_k, _ = ladder_coeffs(k, s)
            a_next, b_next = ladder_coeffs(k + 1, s)
            sq *= a_k * b_next / a_next
        else:
            sq *= (s + k - 1) * (k - s)
    return math.sqrt(sq)


def c_coeff_ratio(n: int, delta: float, ell: int) -> float:
    """Ratio of the ell-th horospherical coefficient to the zeroth one.

    ``(-1)^((n-2) ell) sqrt(G(n-1-d) G(ell+d) / (G(d) G(ell+n-1-d))) sqrt(2(n-2) ell + 1)``
    """
    _check_delta(n, delta)
    ell = _check_ell(ell)
    m = n - 1 - delta
    log_mag = 0.5 * (math.lgamma(m) + math.lgamma(ell + delta) - math.lgamma(delta) - math.lgamma(ell + m))
    log_mag += 0.5 * math.log(2 * (n - 2) * ell + 1)
    sign = -1.0 if (n - 2) * ell % 2 else 1.0
    return sign * math.exp(log_mag)


# -- kernels ----------------------------------------------------------------


@dataclass(frozen=True)
class KernelPoint:
    """A point ``(x, y)`` of upper half-space and a boundary point ``u``."""

    x: tuple
    y: float
    u: tuple

    def __post_init__(self):
        if not self.y > 0:
            raise DomainError(f"height y must be positive, got {self.y}")
        if len(self.x) != len(self.u):
            raise DomainError("x and u must have the same dimension")

    @property
    def dist2(self) -> float:
        return float(sum((a - b) ** 2 for a, b in zip(self.x, self.u)))


def _as_point(p) -> KernelPoint:
    if isinstance(p, KernelPoint):
        return p
    x, y, u = p
    x = tuple(np.atleast_1d(x).tolist())
    u = tuple(np.atleast_1d(u).tolist())
    return KernelPoint(x, float(y), u)


def poisson_kernel(delta: float, p) -> float:
    """``((|u|^2 + 1) y / (|x - u|^2 + y^2)) ** delta``."""
    p = _as_point(p)
    u2 = sum(c * c for c in p.u)
    return ((u2 + 1) * p.y / (p.dist2 + p.y**2)) ** delta


def log_kernel_prefactor(ell: int, delta: float, n: int, normalized: bool = False) -> float:
    """Log of the scalar in front of the twisted kernel; see :func:`kernel_prefactor`."""
    _check_n(n)
    ell = _check_ell(ell)
    lp = math.lgamma(delta + ell) - math.lgamma(delta)
    if n == 3:
        lp += math.lgamma(ell + 1)
    if normalized:
        lp -= _log_v_norm(n, delta, ell)
    return lp


def kernel_prefactor(ell: int, delta: float, n: int, normalized: bool = False) -> float:
    """``ell! G(d+ell)/G(d)`` for n=3 and ``G(d+ell)/G(d)`` for n=2.

    With ``normalized`` the K-type norm is divided out, which leaves the
    unit-vector coefficients.  Overflows to ``inf`` for large ``ell``; use
    :func:`log_kernel_prefactor` there.
    """
    try:
        return math.exp(log_kernel_prefactor(ell, delta, n, normalized))
    except OverflowError:
        return math.inf


def phi_kernel(ell: int, delta: float, p, n: int, normalized: bool = False):
    """Integrand of the ell-th eigenfunction at one boundary point.

    n=3 returns a float: prefactor * kernel * ``P_ell(B)`` with
    ``B = (y^2 - |x-u|^2) / (y^2 + |x-u|^2)``.  n=2 returns ``(re, im)`` of
    prefactor * kernel * ``(((x-u) - iy) / ((x-u) + iy)) ** ell``.
    """
    _check_n(n)
    ell = _check_ell(ell)
    p = _as_point(p)
    if len(p.x) != n - 1:
        raise DomainError(f"boundary dimension must be {n - 1} for n={n}")
    scale = poisson_kernel(delta, p) * kernel_prefactor(ell, delta, n, normalized)
    if n == 3:
        d2 = p.dist2
        B = (p.y**2 - d2) / (p.y**2 + d2)
        return scale * legendre_P(ell, min(1.0, max(-1.0, B)))
    w = complex(p.x[0] - p.u[0], -p.y) / complex(p.x[0] - p.u[0], p.y)
    w /= abs(w)  # modulus is 1 up to rounding
    z = w**ell
    return (scale * z.real, scale * z.imag)


def kappa_flat_factor(n: int, delta: float) -> float:
    """Closed form of the integral of ``(1 + |x|^2)^(-delta)`` over R^(n-1)."""
    _check_n(n)
    if not delta > (n - 1) / 2:
        raise DomainError(f"integral diverges for delta <= {(n - 1) / 2}")
    if n == 3:
        return math.pi / (delta - 1)
    return math.sqrt(math.pi) * math.exp(math.lgamma(delta - 0.5) - math.lgamma(delta))


# -- exponents --------------------------------------------------------------


@dataclass(frozen=True)
class SpectralParams:
    """Inputs to the exponent formulas; none of these are computed here."""

    n: int
    delta: float
    s1: float | None = None
    s0: float | None = None
    q_omega: float = 1.0

    def __post_init__(self):
        _check_delta(self.n, self.delta)
        if self.s1 is not None and not (self.n - 1) / 2 < self.s1 <= self.delta:
            raise DomainError(f"s1 must lie in (({self.n}-1)/2, delta], got {self.s1}")
        if self.s0 is not None and self.s0 < 0:
            raise DomainError(f"s0 must be nonnegative, got {self.s0}")
        if not 0 < self.q_omega <= 1:
            raise DomainError(f"q_omega must lie in (0, 1], got {self.q_omega}")


def horospherical_main_exponent(n: int, delta: float) -> float:
    """Decay exponent ``n - 1 - delta`` of horospherical averages."""
    SpectralParams(n, delta)
    return n - 1 - delta


def horospherical_error_exponent(params: SpectralParams) -> float:
    """``n - 1 - delta + 2 (delta - s1) / (2n + 1)``."""
    if params.s1 is None:
        raise DomainError("s1 is required")
    n, d = params.n, params.delta
    return n - 1 - d + 2 * (d - params.s1) / (2 * n + 1)


def sector_error_exponent(n: int, delta: float, s0: float, q_omega: float = 1.0) -> float:
    """``delta - 8 s0 / (n (n + 9) (2n + 1) q_omega)``."""
    SpectralParams(n, delta, s0=s0, q_omega=q_omega)
    if not s0 > 0:
        raise DomainError(f"s0 must be positive, got {s0}")
    return delta - 8 * s0 / (n * (n + 9) * (2 * n + 1) * q_omega)


def growth_exponent(values: Sequence[float], ells: Sequence[int]) -> float:
    """Log-log slope of ``|values|`` against ``ell + 1``."""
    x = np.log(np.asarray(ells, dtype=float) + 1)
    y = np.log(np.abs(np.asarray(values, dtype=float)))
    return float(np.polyfit(x, y, 1)[0])
