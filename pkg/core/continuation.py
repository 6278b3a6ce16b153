"""
Closed-form analytic continuations of first-order spectral zeta functions.

Covers the piecewise, sinusoidal, oscillating, staircase and Fourier
strings, the homogeneous and deformed square, thin annuli and cylinders.
Values at poles are returned as ZetaValue with pole_order 1, the residue
and the finite Laurent coefficient.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence

import mpmath
import numpy as np

import bases
from bases import BasisSpec
from densities import (DensitySpec, endpoint_jumps, make_density, mass, mean_value,
                       perturbation_split, piecewise_from_invariants)
from pertzeta import LaurentExpansion, ZetaValue, check_imaginary, laurent_fit
from specfun import (WORK_DPS, SpecialFnResult, beta_fn, dirichlet_beta,
                     hurwitz_zeta, incomplete_beta, lerch_phi, polylog_unit_circle,
                     rectangle_lattice_zeta, richardson, riemann_zeta, stieltjes_gamma1)
from utils import TOLERANCES, ConvergenceError, DomainError, PoleError, exact_sum

logger = logging.getLogger(__name__)

PIECEWISE_BCS = ('DD', 'NN', 'DN', 'ND', 'PP')


@dataclass(frozen=True)
class PiecewiseParams:
    """Two-speed string: speed υ₁ on [0, r], υ₂ on [r, R]."""
    upsilon1: float
    upsilon2: float
    r: float
    R: float

    def __post_init__(self):
        if self.upsilon1 <= 0 or self.upsilon2 <= 0:
            raise DomainError("wave speeds must be positive")
        if not 0 < self.r < self.R:
            raise DomainError(f"breakpoint needs 0 < r < R, got r={self.r}, R={self.R}")

    @property
    def alpha(self) -> float:
        return self.r / self.upsilon1 + (self.R - self.r) / self.upsilon2

    @property
    def beta(self) -> float:
        return self.r / self.upsilon1 - (self.R - self.r) / self.upsilon2

    @property
    def delta_upsilon(self) -> float:
        return (self.upsilon1 - self.upsilon2) / (self.upsilon1 + self.upsilon2)

    @classmethod
    def from_invariants(cls, alpha: float, beta: float, delta_upsilon: float) -> 'PiecewiseParams':
        p = piecewise_from_invariants(alpha, beta, delta_upsilon).param_dict
        return cls(p['upsilon1'], p['upsilon2'], p['r'], p['R'])

    @classmethod
    def from_density(cls, density: DensitySpec) -> 'PiecewiseParams':
        if density.kind != 'piecewise':
            raise DomainError("piecewise parameters need a piecewise density")
        p = density.param_dict
        return cls(p['upsilon1'], p['upsilon2'], p['r'], p['R'])

    def to_density(self) -> DensitySpec:
        return make_density('piecewise', {'upsilon1': self.upsilon1, 'upsilon2': self.upsilon2,
                                          'r': self.r, 'R': self.R})


@dataclass
class DivergenceReport:
    """First-order finiteness of the Casimir energy of a string."""
    finite: bool
    order: Optional[int]
    residue: float
    jumps: Dict[int, float] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, object]:
        return {'finite': self.finite, 'order': self.order, 'residue': self.residue,
                'jumps': {str(k): v for k, v in self.jumps.items()}}


@dataclass
class CylinderCasimir:
    closed_form: float
    numeric: float
    rel_diff: float
    stable: bool = True
    parts: Dict[str, float] = field(default_factory=dict)


def _is_pole(s: float, s0: float) -> bool:
    return abs(s - s0) < TOLERANCES.pole


def _at_pole(fn: Callable[[float], complex], s0: float, residue: float,
             method: str) -> ZetaValue:
    """Finite part at a simple pole by symmetric samples; residue from the closed form."""
    lau = laurent_fit(fn, s0)
    if abs(lau.coeff_minus1 - residue) > 1e-6 * max(abs(residue), 1.0):
        logger.warning("%s: fitted residue %.10g differs from %.10g at s=%g",
                       method, lau.coeff_minus1, residue, s0)
    return ZetaValue(s0, lau.coeff_0, pole_order=1, residue=residue,
                     trunc_error=lau.errors[1], method=method,
                     details={'fitted_residue': lau.coeff_minus1, 'coeff_1': lau.coeff_1})


def _real_value(s: float, value: complex, method: str, what: str) -> ZetaValue:
    rel = check_imaginary(value, what=what)
    return ZetaValue(s, complex(value).real, method=method, imag_residue=rel)


# piecewise strings

def _piecewise_raw(bc: str, s: float, alpha: float, beta: float, du: float) -> complex:
    if bc == 'ND':
        bc, du = 'DN', -du
    zeta = riemann_zeta(2 * s).value
    nu = 2 * s + 1
    phi = math.pi * beta / alpha
    if bc == 'PP':
        return 2 ** (1 - 2 * s) * math.pi ** (-2 * s) * alpha ** (2 * s) * zeta
    if bc == 'DD':
        theta = math.pi * (alpha + beta) / alpha
        li = (polylog_unit_circle(nu, -theta).value - polylog_unit_circle(nu, theta).value)
        return (math.pi ** (-2 * s - 1) * alpha ** (2 * s)
                * (math.pi * zeta + 1j * s * du * li))
    if bc == 'NN':
        e1, e2 = np.exp(1j * phi), np.exp(2j * phi)
        bracket = (lerch_phi(1 / e2, nu, 0.5).value - e2 * lerch_phi(e2, nu, 0.5).value
                   - e1 * polylog_unit_circle(nu, -2 * phi).value
                   + e1 * polylog_unit_circle(nu, 2 * phi).value)
        return (math.pi ** (-2 * s) * alpha ** (2 * s) * zeta
                + 1j * du * (2 * math.pi) ** (-2 * s - 1) * s / e1 * alpha ** (2 * s) * bracket)
    if bc == 'DN':
        h = np.exp(0.5j * phi)
        bracket = (lerch_phi(-np.exp(-1j * phi), nu, 0.5).value / h
                   + h * lerch_phi(-np.exp(1j * phi), nu, 0.5).value)
        return ((4 ** s - 1) * math.pi ** (-2 * s) * alpha ** (2 * s) * zeta
                + du * math.pi ** (-2 * s - 1) * s * alpha ** (2 * s) * bracket)
    raise DomainError(f"Unknown boundary condition for a piecewise string: {bc}")


def piecewise_zeta(bc: str, s: float, p: PiecewiseParams) -> ZetaValue:
    """
    First-order zeta function of the piecewise string, continued to all s.

    Args:
        bc: 'DD', 'NN', 'DN', 'ND' or 'PP'
        s: real argument
        p: PiecewiseParams

    Returns:
        ZetaValue; at s = 1/2 the finite part with residue α/2π
    """
    if bc not in PIECEWISE_BCS:
        raise DomainError(f"Unknown boundary condition for a piecewise string: {bc}")
    alpha, beta, du = p.alpha, p.beta, p.delta_upsilon
    if abs(du) > 0.2:
        logger.warning("first-order piecewise formula used at δυ=%g", du)

    def raw(x):
        return _piecewise_raw(bc, x, alpha, beta, du)

    if _is_pole(s, 0.5):
        return _at_pole(lambda x: raw(x).real, 0.5, alpha / (2 * math.pi), 'closed_form')
    return _real_value(s, raw(s), 'closed_form', f"piecewise {bc} zeta at s={s}")


def piecewise_casimir(bc: str, p: PiecewiseParams) -> float:
    """First-order Casimir energy ½Z(−1/2) of the piecewise string."""
    alpha, du = p.alpha, p.delta_upsilon
    half = math.pi * p.beta / (2 * alpha)
    if bc == 'PP':
        return -math.pi / (6 * alpha)
    if bc not in PIECEWISE_BCS:
        raise DomainError(f"Unknown boundary condition for a piecewise string: {bc}")
    c = math.cos(half)
    if abs(c) < TOLERANCES.pole:
        raise PoleError(f"πβ/2α = {half} sits on a pole of tan/sec")
    if bc == 'DD':
        return -math.pi / (24 * alpha) + du * math.tan(half) / (4 * alpha)
    if bc == 'NN':
        return -math.pi / (24 * alpha) - du * math.tan(half) / (4 * alpha)
    if bc == 'DN':
        return math.pi / (48 * alpha) - du / c / (4 * alpha)
    return math.pi / (48 * alpha) + du / c / (4 * alpha)


def piecewise_sumrule1(bc: str, p: PiecewiseParams) -> float:
    """Exact Z(1) of the piecewise string to all orders in δυ."""
    alpha, beta, du = p.alpha, p.beta, p.delta_upsilon
    if bc == 'ND':
        beta, du = -beta, -du
        bc = 'DN'
    if bc == 'PP':
        return (alpha ** 2 - beta ** 2 * du ** 2) / (12 - 12 * du ** 2)
    if bc not in PIECEWISE_BCS:
        raise DomainError(f"Unknown boundary condition for a piecewise string: {bc}")
    theta = math.pi * (alpha + beta) * (1 + du) / (alpha + beta * du)
    k = du * (alpha + beta * du) ** 2 / (math.pi ** 3 * (du ** 2 - 1) ** 2)
    if bc in ('DD', 'NN'):
        base = (alpha ** 2 - beta ** 2 * du ** 2) / (6 * (1 - du ** 2))
        li = polylog_unit_circle(3, -theta).value - polylog_unit_circle(3, theta).value
        term = 1j * k * li
        value = base + term if bc == 'DD' else base - term
    else:
        base = (alpha - beta * du) * (alpha + beta * du) / (2 - 2 * du ** 2)
        w = np.exp(0.5j * theta) * lerch_phi(np.exp(1j * theta), 3, 0.5).value
        value = base + 1j * k * (np.conj(w) - w)
    check_imaginary(value, what=f"piecewise {bc} Z(1)")
    return complex(value).real


# sinusoidal string and the DD+NN combination

def psi_aux(a: float) -> SpecialFnResult:
    """
    Ψ(a) = 1/3 − Σ_{j≥0} 2^{−(2j+1)}(ζ(2j+2−a) − 1), singular at odd a ≥ 1
    with residue 2^{−a}.
    """
    k = round(a)
    if abs(a - k) < TOLERANCES.pole and k >= 1 and k % 2 == 1:
        return SpecialFnResult(complex('nan'), float('inf'), True, complex(2.0 ** (-k)))
    with mpmath.workdps(WORK_DPS):
        total = mpmath.mpf(1) / 3
        j = 0
        while True:
            term = mpmath.mpf(2) ** (-(2 * j + 1)) * (mpmath.zeta(2 * j + 2 - a) - 1)
            total -= term
            if 2 * j + 2 - a > 2 and abs(term) < TOLERANCES.series * max(abs(total), 1):
                break
            j += 1
            if j > TOLERANCES.series_cap:
                raise ConvergenceError(f"Ψ series did not converge at a={a}")
        return SpecialFnResult(complex(float(total)), abs_error_estimate=TOLERANCES.series)


def _sinusoidal_raw(s: float, eta: float, L: float) -> float:
    scale = (L / math.pi) ** (2 * s)
    return (4 ** s * scale * riemann_zeta(2 * s).real
            + eta ** 2 * s * 4 ** (s - 1) * scale * psi_aux(2 - 2 * s).real)


def _sinusoidal_residue(s0: float, eta: float, L: float) -> float:
    scale = (L / math.pi) ** (2 * s0)
    res = 0.0
    if _is_pole(s0, 0.5):
        res += 4 ** s0 * scale / 2
    a0 = round(2 - 2 * s0)
    res += -eta ** 2 * s0 * 4 ** (s0 - 1) * scale * 2.0 ** (-a0) / 2
    return res


def sinusoidal_zeta(s: float, eta: float, L: float = 0.5) -> ZetaValue:
    """Second-order zeta function of Σ = 1 + η sin(πx/2L)."""
    a = 2 - 2 * s
    k = round(a)
    if abs(a - k) < TOLERANCES.pole and k >= 1 and k % 2 == 1:
        s0 = (2 - k) / 2
        if _is_pole(s0, -0.5):
            lau = sinusoidal_laurent(eta, L)
            return ZetaValue(s0, lau.coeff_0, pole_order=1, residue=lau.coeff_minus1,
                             trunc_error=lau.errors[1], method='closed_form')
        return _at_pole(lambda x: _sinusoidal_raw(x, eta, L), s0,
                        _sinusoidal_residue(s0, eta, L), 'closed_form')
    return ZetaValue(s, _sinusoidal_raw(s, eta, L), method='closed_form')


def sinusoidal_laurent(eta: float, L: float = 0.5) -> LaurentExpansion:
    """Laurent expansion at s = −1/2; c₋₁ and c₀ closed form, c₁ fitted."""
    c_m1 = math.pi * eta ** 2 / (256 * L)
    c_0 = (-math.pi / (24 * L) + math.pi * eta ** 2 / (384 * L)
           * (3 * math.log(8 * L / math.pi) + 3 * float(mpmath.euler) - 31))
    fit = laurent_fit(lambda x: _sinusoidal_raw(x, eta, L), -0.5)
    if abs(fit.coeff_0 - c_0) > 1e-6 * max(abs(c_0), 1.0):
        logger.warning("sinusoidal finite part: fit %.12g, closed form %.12g",
                       fit.coeff_0, c_0)
    return LaurentExpansion(-0.5, c_m1, c_0, fit.coeff_1,
                            (abs(fit.coeff_minus1 - c_m1), abs(fit.coeff_0 - c_0),
                             fit.errors[2]))


def sinusoidal_exact_sums(eta: float, L: float = 0.5) -> Dict[int, float]:
    """Exact Z(1), Z(2), Z(3) of the sinusoidal string."""
    e2, pi = eta ** 2, math.pi
    return {
        1: 2 * L ** 2 / 3,
        2: 8 * L ** 4 / 45 + 8 * e2 * L ** 4 / (3 * pi ** 2) - 24 * e2 * L ** 4 / pi ** 4,
        3: (64 * L ** 6 / 945 + 16 * e2 * L ** 6 / (15 * pi ** 2)
            + 64 * e2 * L ** 6 / pi ** 4 - 720 * e2 * L ** 6 / pi ** 6),
    }


def dd_plus_nn_zeta(s: float, density: DensitySpec) -> ZetaValue:
    """
    Z^(DD)(s) + Z^(NN)(s) at first order; the endpoint terms cancel and
    the only pole is that of ζ(2s) at s = 1/2.
    """
    if density.dim != 1:
        raise DomainError("the DD+NN combination is defined for strings")
    L = density.half_width
    sb = perturbation_split(density, 'sigma').sigma_bar
    integral = mass(density) / sb - 2 * L

    def factor(x):
        return 2 * sb ** x * (1 + x / (2 * L) * integral) * (2 * L / math.pi) ** (2 * x)

    if _is_pole(s, 0.5):
        return _at_pole(lambda x: factor(x) * riemann_zeta(2 * x).real, 0.5,
                        factor(0.5) / 2, 'closed_form')
    return ZetaValue(s, factor(s) * riemann_zeta(2 * s).real, method='closed_form',
                     details={'integral_delta': integral * sb, 'sigma_bar': sb})


# divergence of the first-order Casimir energy

def divergence_residue(density: DensitySpec, sigma_bar: Optional[float] = None) -> float:
    """Residue of the first-order Dirichlet Z at s = −1/2, Σ̄^{−3/2}[δΣ′]_{−L}^{L}/16π."""
    sb = mean_value(density) if sigma_bar is None else float(sigma_bar)
    jump = endpoint_jumps(density, (1,))[1]
    return sb ** -1.5 * jump / (16 * math.pi)


def divergence_check(density: DensitySpec, L: Optional[float] = None,
                     sigma_bar: Optional[float] = None, tol: float = 1e-9) -> DivergenceReport:
    """
    Classify the first-order Casimir energy of a Dirichlet string.

    The energy is finite when δΣ′(L) = δΣ′(−L); order is the lowest odd
    derivative whose endpoint values differ.
    """
    if density.dim != 1:
        raise DomainError("divergence classification is defined for strings")
    if L is not None and abs(L - density.half_width) > 1e-12 * max(L, 1.0):
        raise DomainError(f"half width {L} does not match the density ({density.half_width})")
    jumps = endpoint_jumps(density, (1, 3))
    scale = max(mean_value(density), 1e-300)
    L = density.half_width
    order = None
    for k in sorted(jumps):
        if abs(jumps[k]) * L ** k > tol * scale:
            order = k
            break
    finite = abs(jumps[1]) * L <= tol * scale
    residue = 0.0 if finite else divergence_residue(density, sigma_bar)
    logger.debug("divergence check %s: jumps %s", density.density_id, jumps)
    return DivergenceReport(finite, order, residue, jumps)


# oscillating and staircase strings

def _resonance_check(eps_bar: float):
    if eps_bar <= 0:
        raise DomainError("oscillation period must be positive")
    inv = 1 / eps_bar
    if abs(inv - round(inv)) < 1e-10 * max(inv, 1.0):
        raise DomainError(f"1/ε̄ = {inv:g} is an integer: resonant case")


def _phi_pole_index(s: float) -> Optional[int]:
    k = round(0.5 - s)
    if k >= 0 and abs(0.5 - s - k) < TOLERANCES.pole:
        return k
    return None


def _phi_series(s: float, eps_bar: float, pole_k: Optional[int] = None) -> float:
    """
    Φ(s, ε̄) split at N₀ = 2M+2 (M = [1/ε̄]): direct sum below, Hurwitz
    series in ε̄^{−2k−2} above. With pole_k the singular Hurwitz term is
    replaced by its finite part −ψ(N₀+1).
    """
    M = int(math.floor(1 / eps_bar))
    n0 = 2 * M + 2
    with mpmath.workdps(WORK_DPS):
        eb = mpmath.mpf(eps_bar)
        sm = mpmath.mpf(s)
        total = mpmath.fsum(mpmath.mpf(n) ** (2 - 2 * sm) / (eb ** 2 * n ** 2 - 1)
                            for n in range(1, n0 + 1))
        a = n0 + 1
        k = 0
        while True:
            if k == pole_k:
                term = eb ** (-2 * k - 2) * (-mpmath.digamma(a))
            else:
                term = eb ** (-2 * k - 2) * mpmath.zeta(2 * (k + sm), a)
            total += term
            if k > (pole_k or 0) and abs(term) < TOLERANCES.series * max(abs(total), 1):
                break
            k += 1
            if k > TOLERANCES.series_cap:
                raise ConvergenceError(f"Φ series did not converge at s={s}, ε̄={eps_bar}")
        return float(total)


def oscillating_phi(s: float, eps_bar: float) -> SpecialFnResult:
    """Φ(s, ε̄) = Σ n^{2−2s}/(ε̄²n² − 1), continued; poles at s = 1/2 − k."""
    _resonance_check(eps_bar)
    k = _phi_pole_index(s)
    if k is not None:
        return SpecialFnResult(complex('nan'), float('inf'), True,
                               complex(eps_bar ** (-2 * k - 2) / 2))
    return SpecialFnResult(complex(_phi_series(s, eps_bar)), abs_error_estimate=TOLERANCES.series)


def oscillating_phi_finite(s0: float, eps_bar: float) -> float:
    """Finite Laurent coefficient of Φ at a pole s₀ = 1/2 − k."""
    _resonance_check(eps_bar)
    k = _phi_pole_index(s0)
    if k is None:
        return _phi_series(s0, eps_bar)
    return _phi_series(0.5 - k, eps_bar, pole_k=k)


def _oscillating_factor(s: float, eta: float, eps_bar: float, ell: float, L: float) -> float:
    S = math.sin(math.pi / eps_bar) * math.sin(math.pi * ell / (eps_bar * L))
    return (s * eta * eps_bar ** 3 * 2 ** (3 * s - 1) * L ** (2 * s)
            * math.pi ** (-2 * s - 1) * S)


def _oscillating_raw(s: float, eta: float, eps_bar: float, ell: float, L: float) -> float:
    base = (8 * L ** 2 / math.pi ** 2) ** s * riemann_zeta(2 * s).real
    return base + _oscillating_factor(s, eta, eps_bar, ell, L) * _phi_series(s, eps_bar)


def oscillating_zeta(s: float, eta: float, eps_bar: float, ell: Optional[float] = None,
                     L: float = 0.5) -> ZetaValue:
    """
    First-order zeta function of Σ = 2 + η sin(2π(x+ℓ)/(2Lε̄)) with Σ̄ = 2.

    Args:
        s: real argument
        eta: amplitude
        eps_bar: period in units of the string length
        ell: phase shift (defaults to L)
        L: half length

    Returns:
        ZetaValue with pole data at s = 1/2 − k
    """
    _resonance_check(eps_bar)
    ell = L if ell is None else ell
    k = _phi_pole_index(s)
    if k is None:
        return ZetaValue(s, _oscillating_raw(s, eta, eps_bar, ell, L), method='closed_form')
    s0 = 0.5 - k
    if k == 1:
        lau = oscillating_laurent(eta, eps_bar, ell, L)
        return ZetaValue(s0, lau.coeff_0, pole_order=1, residue=lau.coeff_minus1,
                         trunc_error=lau.errors[1], method='closed_form')
    residue = _oscillating_factor(s0, eta, eps_bar, ell, L) * eps_bar ** (-2 * k - 2) / 2
    if k == 0:
        residue += math.sqrt(8 * L ** 2 / math.pi ** 2) / 2
    return _at_pole(lambda x: _oscillating_raw(x, eta, eps_bar, ell, L), s0, residue,
                    'closed_form')


def oscillating_laurent(eta: float, eps_bar: float, ell: Optional[float] = None,
                        L: float = 0.5) -> LaurentExpansion:
    """Laurent expansion at s = −1/2 with closed-form c₋₁ and c₀; c₁ fitted."""
    _resonance_check(eps_bar)
    ell = L if ell is None else ell
    p = _oscillating_factor(-0.5, eta, eps_bar, ell, L)
    dlog = 1 / -0.5 + 3 * math.log(2) + 2 * math.log(L) - 2 * math.log(math.pi)
    w = eps_bar ** -4
    c_m1 = p * w / 2
    base = (8 * L ** 2 / math.pi ** 2) ** -0.5 * riemann_zeta(-1).real
    c_0 = base + p * oscillating_phi_finite(-0.5, eps_bar) + p * dlog * w / 2
    fit = laurent_fit(lambda x: _oscillating_raw(x, eta, eps_bar, ell, L), -0.5)
    return LaurentExpansion(-0.5, c_m1, c_0, fit.coeff_1,
                            (abs(fit.coeff_minus1 - c_m1), abs(fit.coeff_0 - c_0),
                             fit.errors[2]))


def _csc(x: float) -> float:
    sx = math.sin(x)
    if abs(sx) < 1e-12:
        raise DomainError("staircase parameters hit a resonance (csc pole)")
    return 1 / sx


def staircase_zeta(s: float, eta: float, eps_bar: float, ell: Optional[float] = None,
                   L: float = 0.5, N: int = 50) -> ZetaValue:
    """
    First-order zeta function of the N-step sampling of the oscillating
    density; finite at s = −1/2 for every finite N.
    """
    if N < 2:
        raise DomainError(f"staircase needs N >= 2, got {N}")
    _resonance_check(eps_bar)
    ell = L if ell is None else ell
    S = math.sin(math.pi / eps_bar) * math.sin(math.pi * ell / (eps_bar * L))
    weights = []
    for n in range(1, N):
        w = math.sin(math.pi * n / N) * (_csc((math.pi - math.pi * eps_bar * n) / (eps_bar * N))
                                         + _csc((math.pi * eps_bar * n + math.pi) / (eps_bar * N)))
        weights.append(w)
    head_coef = 2 + eta / N * S * _csc(math.pi / (eps_bar * N))

    def raw(x):
        head = (2 ** (3 * x - 1) * math.pi ** (-2 * x) * L ** (2 * x) * head_coef
                * riemann_zeta(2 * x).real)
        if x == 0:
            return head
        hz = [w * hurwitz_zeta(2 * x + 1, n / N).real for n, w in zip(range(1, N), weights)]
        tail = (eta * 2 ** (3 * x - 2) * math.pi ** (-2 * x - 1) * x * S * L ** (2 * x)
                * N ** (-2 * x - 1) * exact_sum(hz))
        return head - tail

    if _is_pole(s, 0.5):
        residue = 2 ** 0.5 * L * head_coef / (2 * math.pi)
        return _at_pole(raw, 0.5, residue, 'closed_form')
    if _is_pole(s, 0.0):
        # s·ζ(2s+1, a) → 1/2 at s = 0
        value = 0.5 * head_coef * riemann_zeta(0).real - (
            eta / 4 / math.pi * S / N * 0.5 * sum(weights))
        return ZetaValue(0.0, value, method='closed_form')
    return ZetaValue(s, raw(s), method='closed_form')


def fourier_sumrule1(a: Sequence[float], Delta: float, L: float = 0.5, M: float = 1.0) -> float:
    """
    Exact Z(1) of a Dirichlet string with Σ = a₀/2 + Σ_j a_j cos(2πjx/Δ)
    (sine terms do not contribute) and total mass M.
    """
    if Delta <= 0:
        raise DomainError("period Δ must be positive")
    total = M * L / 3
    pi = math.pi
    terms = []
    for j, aj in enumerate(a, start=1):
        if aj == 0:
            continue
        arg = 2 * pi * j * L / Delta
        terms.append(Delta ** 3 * aj * math.sin(arg) / (4 * pi ** 3 * j ** 3 * L)
                     - Delta ** 2 * aj * math.cos(arg) / (2 * pi ** 2 * j ** 2)
                     - Delta * L * aj * math.sin(arg) / (3 * pi * j))
    return total + exact_sum(terms)


# squares and conformal drums

def square_zeta(s: float, L: float = 1.0) -> ZetaValue:
    """Z_□(s) = (2L/π)^{2s}(β(s)ζ(s) − ζ(2s)) of the Dirichlet square of side 2L."""
    def raw(x):
        return (2 * L / math.pi) ** (2 * x) * (dirichlet_beta(x).real * riemann_zeta(x).real
                                               - riemann_zeta(2 * x).real)

    if _is_pole(s, 1.0):
        area = 4 * L ** 2
        residue = area / (4 * math.pi)
        return ZetaValue(1.0, residue * square_g(L), pole_order=1, residue=residue,
                         method='closed_form')
    if _is_pole(s, 0.5):
        return _at_pole(raw, 0.5, -L / math.pi, 'closed_form')
    return ZetaValue(s, raw(s), method='closed_form')


def square_g(L: float = 1.0) -> float:
    """
    g_□ = log(4L²/4π²) + (γ₁(3/4) − γ₁(1/4))/π − 2π/3 + γ, the finite part
    of Z_□ at s = 1 in units of 𝒜/4π.
    """
    g1 = stieltjes_gamma1(0.75).real - stieltjes_gamma1(0.25).real
    return (math.log(4 * L ** 2 / (4 * math.pi ** 2)) + g1 / math.pi
            - 2 * math.pi / 3 + float(mpmath.euler))


def deformed_square_g(alpha: float, L: float = 1.0) -> float:
    area = 4 * L ** 2
    return square_g(L) - 2 * math.pi * area * alpha ** 2 / (3 * (2 * area * alpha ** 2 + 3))


def domain_g(density: DensitySpec, basis: Optional[BasisSpec] = None,
             levels: Sequence[int] = (128, 256, 512, 1024)) -> float:
    """
    g = g_□ + log Σ̄ + (4π/𝒜) Σ (⟨n|Σ|n⟩ − Σ̄)/ε_n for a conformal density on
    the Dirichlet square; box sums are extrapolated in 1/N.
    """
    if density.dim != 2:
        raise DomainError("g is defined for drums")
    L = density.half_width
    if basis is None:
        basis = BasisSpec(2, L, 'DD', density.half_width_y)
    sb = mean_value(density)
    area = sb * 4 * L * density.half_width_y
    sums = []
    for n in sorted(levels):
        diag = bases.diagonal_values(density, basis, n)
        eps = bases.mode_eigenvalues(basis, n)
        sums.append(exact_sum((diag - sb) / eps))
    best, err = richardson(sums, 2.0, (1, 2, 3, 4, 5))
    logger.debug("domain_g box sums %s -> %.12g (±%.2g)", sums, best, err)
    return square_g(L) + math.log(sb) + 4 * math.pi / area * best


# annulus

def annulus_delta_z1(r: float, method: str = 'csch') -> float:
    """
    ΔZ(1) = Z^(DP)(1) − Z^(DD)(1) of the conformal annulus, exact.

    Args:
        r: inner radius (outer radius 1)
        method: 'csch' (series in the radial index) or 'beta' (incomplete
            beta series)

    Returns:
        ΔZ(1)
    """
    if not 0 < r < 1:
        raise DomainError(f"annulus ratio needs 0 < r < 1, got {r}")
    L = -math.log(r) / 2
    if method == 'csch':
        head = (1 - math.exp(-4 * L)) * (2 * L / math.tanh(2 * L) - 1) / (16 * L)
        terms = []
        n = 1
        while True:
            x = math.pi ** 2 * n / L
            if x > 700:
                break
            t = (math.pi ** 2 * math.exp(-2 * L) * n * math.sinh(2 * L) / math.sinh(x)
                 / (4 * L ** 2 + math.pi ** 2 * n ** 2))
            terms.append(t)
            if abs(t) < TOLERANCES.series * abs(head):
                break
            n += 1
        return head + exact_sum(terms)
    if method == 'beta':
        lr = math.log(r)
        head = ((1 - r ** 2) + (1 + r ** 2) * lr) / (8 * lr)
        a_plus, a_minus = 1 + 1j * lr / math.pi, 1 - 1j * lr / math.pi
        acc = 0j
        j = 0
        while True:
            z = math.exp(2 * (2 * j + 1) * math.pi ** 2 / lr)
            if z == 0.0:
                break
            t = incomplete_beta(z, a_minus) + incomplete_beta(z, a_plus)
            acc += t
            if abs(t) < TOLERANCES.series * max(abs(head), 1e-300):
                break
            j += 1
        value = head + 0.5 * (1 - r ** 2) * acc
        check_imaginary(value, what="annulus ΔZ(1)")
        return value.real
    raise DomainError(f"Unknown ΔZ(1) method: {method}")


def kirsten_zeta_c(L2: float, L3: float, s: float) -> ZetaValue:
    """ζ_𝒞(L₂, L₃, s) = Σ_{ℓ₂,ℓ₃≥1} ((πℓ₂/L₂)² + (πℓ₃/L₃)²)^{−s}, continued."""
    res = rectangle_lattice_zeta(L2, L3, s)
    if res.is_pole:
        s0 = 1.0 if _is_pole(s, 1.0) else 0.5
        return _at_pole(lambda x: rectangle_lattice_zeta(L2, L3, x).real, s0,
                        res.residue.real, 'closed_form')
    return ZetaValue(s, res.real, trunc_error=res.abs_error_estimate, method='closed_form')


def _thin_raw(bc: str, s: float, L: float) -> float:
    factor = 1 - 2 * s * L
    if bc == 'DD2':
        return factor * rectangle_lattice_zeta(2 * math.pi, 2 * L, s).real
    value = factor * ((2 * L / math.pi) ** (2 * s) * riemann_zeta(2 * s).real
                      + 2 * rectangle_lattice_zeta(math.pi, 2 * L, s).real)
    if bc == 'NP':
        value += factor * 2 * riemann_zeta(2 * s).real
    return value


def thin_annulus_zeta(bc: str, s: float, r: float) -> ZetaValue:
    """
    First-order zeta function of a thin annulus, Σ ≈ (1−2L)(1+2x):
    'DP' (TE), 'DD2' (transversally cut) or 'NP' (TM).
    """
    if bc not in ('DP', 'DD2', 'NP'):
        raise DomainError(f"Unknown thin-annulus boundary condition: {bc}")
    if not 0 < r < 1:
        raise DomainError(f"annulus ratio needs 0 < r < 1, got {r}")
    L = -math.log(r) / 2
    if r < 0.9:
        logger.warning("thin-annulus approximation used at r=%g", r)
    if _is_pole(s, 1.0) or _is_pole(s, 0.5):
        s0 = 1.0 if _is_pole(s, 1.0) else 0.5
        lau = laurent_fit(lambda x: _thin_raw(bc, x, L), s0)
        return ZetaValue(s0, lau.coeff_0, pole_order=1, residue=lau.coeff_minus1,
                         trunc_error=lau.errors[1], method='closed_form')
    return ZetaValue(s, _thin_raw(bc, s, L), method='closed_form')


def thin_annulus_casimir(mode: str, r: float) -> float:
    """TE = ½Z^(DP)(−1/2), TM = ½Z^(NP)(−1/2), EM = TE + TM."""
    if mode == 'TE':
        return 0.5 * thin_annulus_zeta('DP', -0.5, r).real
    if mode == 'TM':
        return 0.5 * thin_annulus_zeta('NP', -0.5, r).real
    if mode == 'EM':
        return thin_annulus_casimir('TE', r) + thin_annulus_casimir('TM', r)
    raise DomainError(f"Unknown Casimir mode: {mode}")


# cylinders

def cylinder_lift(z2d: Callable[[float], object], s: float) -> ZetaValue:
    """
    Z_cyl(s) = B(1/2, s − 1/2) Z(s − 1/2)/2π for a cylinder over a drum.

    At the poles of the beta factor (s = 1/2 − k) the value is the limit
    of symmetric samples s ± δ, δ ∈ {10⁻³, 10⁻⁴}, extrapolated in δ².
    """
    def value(x):
        v = z2d(x - 0.5)
        z = complex(v.value).real if isinstance(v, ZetaValue) else complex(v).real
        return beta_fn(0.5, x - 0.5).real / (2 * math.pi) * z

    k = round(0.5 - s)
    if k < 0 or abs(0.5 - s - k) > TOLERANCES.pole:
        return ZetaValue(s, value(s), method='cylinder_lift')

    def sym(d):
        return 0.5 * (value(s + d) + value(s - d))

    coarse, fine = sym(1e-3), sym(1e-4)
    limit = (100 * fine - coarse) / 99
    spread = abs(fine - coarse) / max(abs(limit), 1e-300)
    stable = spread <= 1e-2
    if not stable:
        logger.warning("cylinder lift at s=%g: samples disagree by %.3g", s, spread)
    return ZetaValue(s, limit, trunc_error=abs(fine - limit), method='cylinder_lift',
                     details={'spread': spread, 'stable': float(stable)})


def cylinder_casimir(r: float) -> CylinderCasimir:
    """
    Casimir energy of a thin cylindrical shell of inner radius r, the mean
    of the lifted DP and NP annulus zeta functions at s = −1/2.
    """
    if not 0 < r < 1:
        raise DomainError(f"annulus ratio needs 0 < r < 1, got {r}")
    closed = -math.pi ** 3 / (360 * (1 - r) ** 3)
    dp = cylinder_lift(lambda x: thin_annulus_zeta('DP', x, r), -0.5)
    np_ = cylinder_lift(lambda x: thin_annulus_zeta('NP', x, r), -0.5)
    numeric = 0.5 * (dp.real + np_.real)
    stable = bool(dp.details.get('spread', 0.0) <= 1e-2 and np_.details.get('spread', 0.0) <= 1e-2)
    rel = abs(numeric - closed) / abs(closed)
    logger.debug("cylinder r=%g: numeric %.10g, closed %.10g", r, numeric, closed)
    return CylinderCasimir(closed, numeric, rel, stable, {'DP': dp.real, 'NP': np_.real})
