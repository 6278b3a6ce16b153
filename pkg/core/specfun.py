"""
Special functions for spectral zeta evaluation.

Riemann/Hurwitz zeta, Dirichlet beta, polylogarithm and Lerch transcendent
on the unit circle, Bessel functions, Jacobi theta, sine/cosine integrals,
incomplete elliptic and beta functions, the first Stieltjes constant, and
the exact exponential-polynomial moments every closed-form matrix element
is assembled from.

Continuation-sensitive quantities are evaluated with mpmath inside a
working-precision context; vectorized kernels use numpy and scipy.special.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import mpmath
import numpy as np
from scipy import special

from utils import TOLERANCES, DivergenceError, DomainError, PoleError

logger = logging.getLogger(__name__)

WORK_DPS = 30
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class SpecialFnResult:
    """Value of a special function together with pole information."""
    value: complex
    abs_error_estimate: float = 0.0
    is_pole: bool = False
    residue: Optional[complex] = None

    @property
    def real(self) -> float:
        return self.value.real

    @property
    def imag(self) -> float:
        return self.value.imag

    def __complex__(self) -> complex:
        if self.is_pole:
            raise PoleError(f"value requested at a pole (residue {self.residue})")
        return complex(self.value)

    def __float__(self) -> float:
        return complex(self).real


def _mp(x):
    x = complex(x)
    if x.imag == 0.0:
        return mpmath.mpf(x.real)
    return mpmath.mpc(x.real, x.imag)


def _result(value, scale: float = 1.0) -> SpecialFnResult:
    v = complex(value)
    return SpecialFnResult(v, abs_error_estimate=4 * _EPS * max(abs(v), scale * _EPS))


def _pole(residue) -> SpecialFnResult:
    return SpecialFnResult(complex('nan'), abs_error_estimate=float('inf'),
                           is_pole=True, residue=complex(residue))


def _near_int(x: complex, tol: Optional[float] = None) -> Optional[int]:
    tol = TOLERANCES.pole if tol is None else tol
    x = complex(x)
    if abs(x.imag) > tol:
        return None
    k = round(x.real)
    return int(k) if abs(x.real - k) < tol else None


def richardson(values: Sequence, ratio: float = 2.0,
               powers: Sequence[float] = (1, 2, 3, 4, 5, 6)) -> Tuple[float, float]:
    """
    Richardson extrapolation of a sequence computed at steps h, h/ratio, ...

    Args:
        values: estimates ordered from the coarsest to the finest step
        ratio: step ratio between consecutive estimates
        powers: error exponents removed at each level

    Returns:
        (extrapolated value, difference between the last two levels)
    """
    table = [list(values)]
    for p in powers[:len(values) - 1]:
        f = ratio ** p
        prev = table[-1]
        table.append([(f * prev[i + 1] - prev[i]) / (f - 1) for i in range(len(prev) - 1)])
    best = table[-1][0]
    previous = table[-2][-1] if len(table) > 1 else best
    return best, abs(best - previous)


def riemann_zeta(s) -> SpecialFnResult:
    """Riemann zeta continued to all complex s; pole at s=1 with residue 1."""
    if abs(complex(s) - 1) < TOLERANCES.pole:
        return _pole(1.0)
    with mpmath.workdps(WORK_DPS):
        return _result(mpmath.zeta(_mp(s)))


def hurwitz_zeta(s, a, derivative: int = 0) -> SpecialFnResult:
    """Hurwitz zeta ζ(s, a) or its s-derivative, a > 0."""
    if complex(a).real <= 0:
        raise DomainError(f"Hurwitz parameter must be positive, got {a}")
    if abs(complex(s) - 1) < TOLERANCES.pole:
        return _pole(1.0 if derivative == 0 else float('nan'))
    with mpmath.workdps(WORK_DPS):
        return _result(mpmath.zeta(_mp(s), _mp(a), derivative))


def dirichlet_beta(s) -> SpecialFnResult:
    """β(s) = Σ (-1)^k (2k+1)^{-s}, entire."""
    with mpmath.workdps(WORK_DPS):
        return _result(mpmath.dirichlet(_mp(s), [0, 1, 0, -1]))


def polylog_unit_circle(nu, theta: float) -> SpecialFnResult:
    """
    Li_ν(e^{iθ}) for real θ.

    Integer orders use mpmath.polylog directly; other orders use the
    Hurwitz representation on the circle. θ ≡ 0 (mod 2π) is only
    allowed for Re ν > 1.
    """
    x = math.fmod(theta / (2 * math.pi), 1.0)
    if x < 0:
        x += 1.0
    nu_c = complex(nu)
    if min(x, 1.0 - x) < TOLERANCES.pole:
        if nu_c.real <= 1:
            raise DivergenceError(f"Li_{nu}(1) diverges")
        return riemann_zeta(nu_c)

    k = _near_int(nu_c, 1e-12)
    with mpmath.workdps(WORK_DPS):
        if k is not None:
            z = mpmath.expj(mpmath.mpf(theta))
            return _result(mpmath.polylog(k, z))
        s = 1 - _mp(nu_c)
        pref = mpmath.gamma(s) / (2 * mpmath.pi) ** s
        ip = mpmath.expj(mpmath.pi * s / 2)
        im = mpmath.expj(-mpmath.pi * s / 2)
        value = pref * (ip * mpmath.zeta(s, x) + im * mpmath.zeta(s, 1 - x))
        return _result(value)


def lerch_phi(z, s, a) -> SpecialFnResult:
    """
    Lerch transcendent Φ(z, s, a) = Σ z^k (k+a)^{-s}.

    On the unit circle with a = 1/2 the value is reduced to two
    polylogarithms of √z; other arguments go to mpmath.lerchphi.
    """
    z = complex(z)
    if abs(z - 1) < TOLERANCES.pole:
        if complex(s).real <= 1:
            raise DivergenceError(f"Φ(1, {s}, {a}) diverges")
        return hurwitz_zeta(s, a)
    if abs(z) > 1 + 1e-12:
        raise DomainError(f"Lerch series needs |z| <= 1, got |z|={abs(z)}")

    if abs(complex(a) - 0.5) < 1e-15 and abs(abs(z) - 1) < 1e-12:
        theta = math.atan2(z.imag, z.real)
        half = theta / 2
        w = complex(math.cos(half), math.sin(half))
        plus = polylog_unit_circle(s, half)
        minus = polylog_unit_circle(s, half + math.pi)
        value = 2 ** (complex(s) - 1) / w * (plus.value - minus.value)
        return _result(value)

    with mpmath.workdps(WORK_DPS):
        return _result(mpmath.lerchphi(_mp(z), _mp(s), _mp(a)))


def bessel(kind: str, order: float, x):
    """J, Y or K Bessel function of real order (vectorized over x)."""
    x_arr = np.asarray(x, dtype=float)
    if kind == 'J':
        return special.jv(order, x_arr)
    if kind == 'Y':
        if np.any(x_arr <= 0):
            raise DomainError("Y Bessel function needs x > 0")
        return special.yv(order, x_arr)
    if kind == 'K':
        if np.any(x_arr <= 0):
            raise DomainError("K Bessel function needs x > 0")
        return special.kv(order, x_arr)
    raise DomainError(f"Unknown Bessel kind: {kind}")


def jacobi_theta3(t: float, derivative: bool = False) -> float:
    """
    ϑ₃ = Σ_{n∈ℤ} e^{-π²n²t} or its t-derivative.

    Small t uses the modular form (πt)^{-1/2} Σ e^{-n²/t}.
    """
    if t <= 0:
        raise DomainError(f"theta series needs t > 0, got {t}")
    if t >= 0.1:
        n_max = int(math.ceil(math.sqrt(60.0 / (math.pi ** 2 * t)))) + 1
        n = np.arange(1, n_max + 1, dtype=float)
        e = np.exp(-math.pi ** 2 * n ** 2 * t)
        if derivative:
            return float(-2 * math.pi ** 2 * np.sum(n ** 2 * e))
        return float(1 + 2 * np.sum(e))

    n_max = int(math.ceil(math.sqrt(60.0 * t))) + 1
    n = np.arange(1, n_max + 1, dtype=float)
    e = np.exp(-n ** 2 / t)
    pref = 1.0 / math.sqrt(math.pi * t)
    s0 = 1 + 2 * np.sum(e)
    if not derivative:
        return float(pref * s0)
    s1 = 2 * np.sum(n ** 2 * e) / t ** 2
    return float(pref * (s1 - 0.5 * s0 / t))


def sici(x):
    """(Si(x), Ci(x)) for x > 0."""
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr <= 0):
        raise DomainError("Ci(x) needs x > 0")
    return special.sici(x_arr)


def elliptic_e_incomplete(phi, m: float):
    """Incomplete elliptic integral of the second kind E(φ | m)."""
    phi_arr = np.asarray(phi, dtype=float)
    if m > 1 and np.any(m * np.sin(phi_arr) ** 2 > 1):
        raise DomainError(f"E(φ|m) is complex for m={m} at the given φ")
    return special.ellipeinc(phi_arr, m)


def incomplete_beta(z, a, b: float = 0.0, max_terms: Optional[int] = None) -> complex:
    """
    B(z; a, b) = ∫_0^z t^{a-1}(1-t)^{b-1} dt for complex a.

    The b = 0 case is the series Σ z^{a+k}/(a+k); other b use mpmath.betainc.
    """
    z = complex(z)
    if abs(z) >= 1:
        raise DivergenceError(f"incomplete beta series needs |z| < 1, got {abs(z)}")
    a = complex(a)
    if b != 0:
        with mpmath.workdps(WORK_DPS):
            return complex(mpmath.betainc(_mp(a), _mp(b), 0, _mp(z)))
    if z == 0:
        return 0j

    max_terms = TOLERANCES.series_cap if max_terms is None else max_terms
    log_z = np.log(z)
    zk = np.exp(a * log_z)
    total = 0j
    for k in range(max_terms):
        term = zk / (a + k)
        total += term
        if abs(term) < 1e-17 * max(abs(total), 1e-300):
            break
        zk *= z
    else:
        logger.warning("incomplete beta series hit %d terms at |z|=%.3g", max_terms, abs(z))
    return total


def stieltjes_gamma1(a: float) -> SpecialFnResult:
    """
    First Stieltjes constant γ₁(a).

    Defined through ζ(s,a) = 1/(s-1) + γ₀(a) - γ₁(a)(s-1) + ..., extracted
    by Richardson extrapolation of difference quotients of the regular part
    around s = 1. The error estimate is the disagreement between the
    one-sided limits from above and from below.
    """
    if a <= 0:
        raise DomainError(f"Stieltjes constant needs a > 0, got {a}")
    with mpmath.workdps(50):
        a_mp = mpmath.mpf(a)

        def regular(s):
            return mpmath.zeta(s, a_mp) - 1 / (s - 1)

        r1 = -mpmath.digamma(a_mp)
        steps = [mpmath.mpf('1e-3') / 2 ** k for k in range(5)]
        central = [-(regular(1 + h) - regular(1 - h)) / (2 * h) for h in steps]
        above = [-(regular(1 + h) - r1) / h for h in steps]
        below = [-(r1 - regular(1 - h)) / h for h in steps]

        value, _ = richardson(central, 2.0, (2, 4, 6, 8))
        up, _ = richardson(above, 2.0, (1, 2, 3, 4))
        down, _ = richardson(below, 2.0, (1, 2, 3, 4))
        spread = abs(up - down)
        return SpecialFnResult(complex(float(value)), abs_error_estimate=float(spread) + 1e-15)


def gamma_fn(s) -> SpecialFnResult:
    """Γ(s) with pole flags at non-positive integers (residue (-1)^k/k!)."""
    k = _near_int(s)
    if k is not None and k <= 0:
        return _pole((-1) ** (-k) / math.factorial(-k))
    with mpmath.workdps(WORK_DPS):
        return _result(mpmath.gamma(_mp(s)))


def beta_fn(a, b) -> SpecialFnResult:
    """B(a, b) = Γ(a)Γ(b)/Γ(a+b)."""
    ga, gb = gamma_fn(a), gamma_fn(b)
    if ga.is_pole or gb.is_pole:
        gab = gamma_fn(complex(a) + complex(b))
        if gab.is_pole:
            with mpmath.workdps(WORK_DPS):
                return _result(mpmath.beta(_mp(a), _mp(b)))
        other = gb if ga.is_pole else ga
        res = (ga.residue if ga.is_pole else gb.residue) * other.value / gab.value
        return _pole(res)
    with mpmath.workdps(WORK_DPS):
        return _result(mpmath.beta(_mp(a), _mp(b)))


def harmonic(x) -> complex:
    """Harmonic number H_x = ψ(x+1) + γ, continued to real/complex x."""
    with mpmath.workdps(WORK_DPS):
        return complex(mpmath.harmonic(_mp(x)))


def exp_poly_moment(p: int, z, a: float, b: float) -> np.ndarray:
    """
    Exact ∫_a^b x^p e^{zx} dx for integer p >= 0 and complex z (array).

    The interval is centred, x = c + t with |t| <= h, so that the moments
    M_i = ∫_{-h}^{h} t^i e^{zt} dt come either from a cancellation-free
    power series (|z|h small) or from the upward recursion
    M_i = [t^i e^{zt}/z] - (i/z) M_{i-1}.
    """
    if p < 0:
        raise DomainError(f"moment power must be non-negative, got {p}")
    z = np.asarray(z, dtype=complex)
    if b <= a:
        return np.zeros(z.shape, dtype=complex)
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    zh = np.abs(z) * h
    small = zh <= p + 2.0

    moments = np.empty((p + 1,) + z.shape, dtype=complex)
    if np.any(small):
        zs = z[small]
        for i in range(p + 1):
            acc = np.zeros(zs.shape, dtype=complex)
            term = np.ones(zs.shape, dtype=complex)
            for j in range(80):
                n = i + j + 1
                if n % 2 == 1:
                    acc += term * (2 * h ** n / n)
                term = term * zs / (j + 1)
                if j > 2 and np.all(np.abs(term) * h ** (n + 1) < 1e-18 * (np.abs(acc) + 1e-300)):
                    break
            moments[i][small] = acc

    large = ~small
    if np.any(large):
        zl = z[large]
        ep = np.exp(zl * h)
        em = np.exp(-zl * h)
        m_prev = (ep - em) / zl
        moments[0][large] = m_prev
        for i in range(1, p + 1):
            m_i = (h ** i * ep - (-h) ** i * em) / zl - (i / zl) * m_prev
            moments[i][large] = m_i
            m_prev = m_i

    total = np.zeros(z.shape, dtype=complex)
    for i in range(p + 1):
        total += math.comb(p, i) * c ** (p - i) * moments[i]
    return total * np.exp(z * c)


def rectangle_lattice_zeta(L2: float, L3: float, s) -> SpecialFnResult:
    """
    Σ_{l2,l3>=1} ((π l2/L2)² + (π l3/L3)²)^{-s} continued in s.

    Three-term representation: a one-dimensional zeta, a Γ·ζ term and an
    exponentially convergent double sum of K Bessel functions. The function
    is symmetric in (L2, L3); the longer side is put first so the Bessel sum
    decays fastest. Poles at s=1 (residue L2·L3/4π) and s=1/2
    (residue -(L2+L3)/4π).
    """
    if L2 <= 0 or L3 <= 0:
        raise DomainError(f"rectangle sides must be positive, got {L2}, {L3}")
    s_c = complex(s)
    if abs(s_c - 1) < TOLERANCES.pole:
        return _pole(L2 * L3 / (4 * math.pi))
    if abs(s_c - 0.5) < TOLERANCES.pole:
        return _pole(-(L2 + L3) / (4 * math.pi))
    if L3 > L2:
        L2, L3 = L3, L2

    with mpmath.workdps(WORK_DPS):
        sm = _mp(s_c)
        pi = mpmath.pi
        l2, l3 = mpmath.mpf(L2), mpmath.mpf(L3)
        t1 = -(l3 / pi) ** (2 * sm) * mpmath.zeta(2 * sm) / 2

        k = _near_int(s_c - 0.5)
        if k is not None and k <= 0:
            kk = -k
            prod = (-1) ** kk * 2 * mpmath.zeta(-2 * kk, 1, 1) / mpmath.factorial(kk)
        else:
            prod = mpmath.gamma(sm - 0.5) * mpmath.zeta(2 * sm - 1)
        rg = mpmath.rgamma(sm)
        t2 = l2 * prod * rg / (2 * mpmath.sqrt(pi)) * (l3 / pi) ** (2 * sm - 1)

        t3 = mpmath.mpf(0)
        if rg != 0:
            nu = sm - 0.5
            acc = mpmath.mpf(0)
            q3 = 1
            while True:
                x_first = 2 * pi * q3 * l2 / l3
                if x_first > 80:
                    break
                q2 = 1
                while True:
                    x = 2 * pi * q2 * q3 * l2 / l3
                    if x > 80:
                        break
                    ratio = q2 * l3 / (q3 * l2)
                    acc += ratio ** nu * mpmath.besselk(nu, x)
                    q2 += 1
                q3 += 1
            t3 = 2 * pi ** sm * (l2 / pi) ** (2 * sm) * rg * acc

        return _result(t1 + t2 + t3)
