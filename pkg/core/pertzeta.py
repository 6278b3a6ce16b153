"""
Perturbative spectral zeta functions.

Z(s) ≈ Σ (⟨n|Σ|n⟩/ε_n)^s
       − (s/2) Σ̄^{s−2} Σ_n Σ_{k≠n} (ε_k^{1−s} − ε_n^{1−s})/(ε_k − ε_n) ⟨n|δΣ|k⟩²

together with the perturbative heat kernel of Ŵ = √ε Σ^{-1} √ε, its Mellin
transform, cutoff regularisation of the Casimir sum and two-sided Laurent
samples around poles.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence, Union

import numpy as np
from scipy import integrate

import bases
from bases import BasisSpec
from densities import DensitySpec, mean_value, perturbation_split
from specfun import gamma_fn, richardson
from table_manager import Level, MatrixElementTable
from utils import TOLERANCES, ConvergenceError, DivergenceError, DomainError, exact_sum

logger = logging.getLogger(__name__)



@dataclass
class ZetaValue:
    """
    Value of a spectral zeta function at s. When pole_order > 0 the value
    is the finite Laurent coefficient and residue the pole coefficient.
    """
    s: float
    value: complex
    pole_order: int = 0
    residue: Optional[float] = None
    trunc_error: float = 0.0
    method: str = ''
    imag_residue: float = 0.0
    details: Dict[str, float] = field(default_factory=dict)

    @property
    def real(self) -> float:
        return complex(self.value).real

    def to_dict(self) -> Dict[str, object]:
        v = complex(self.value)
        return {
            's': self.s,
            're': v.real,
            'im': v.imag,
            'pole_order': self.pole_order,
            'residue': self.residue,
            'trunc_error': self.trunc_error,
            'method': self.method
        }


@dataclass(frozen=True)
class HeatKernelValue:
    t: float
    value: float
    order: str = 'second'


@dataclass(frozen=True)
class LaurentExpansion:
    """c₋₁/(s−s₀) + c₀ + c₁(s−s₀) around s₀."""
    center: float
    coeff_minus1: float
    coeff_0: float
    coeff_1: float
    errors: tuple = (0.0, 0.0, 0.0)

    def __call__(self, s: float) -> float:
        d = s - self.center
        return self.coeff_minus1 / d + self.coeff_0 + self.coeff_1 * d


@dataclass
class DiagonalTail:
    """
    Completion of diagonal sums beyond the table box. Diagonal elements are
    computed exactly up to extended_level when a density is given; beyond
    that they are replaced by their asymptotic mean Σ̄.
    """
    sigma_bar: float
    density: Optional[DensitySpec] = None
    extended_level: Optional[Level] = None


@dataclass
class CutoffFit:
    """Coefficients of E(a) ≈ Σ_j c_j a^j, j = −2..3, and the fit residual."""
    coefficients: Dict[int, float]
    residual: float
    a_values: np.ndarray
    energies: np.ndarray
    removable: bool = True

    @property
    def finite_part(self) -> float:
        return self.coefficients[0]

    @property
    def divergent_coeffs(self) -> Dict[int, float]:
        return {j: c for j, c in self.coefficients.items() if j < 0}


def check_imaginary(value: complex, tol: Optional[float] = None, what: str = 'value') -> float:
    """Imaginary part relative to the magnitude; warns above tolerance."""
    tol = TOLERANCES.imaginary if tol is None else tol
    v = complex(value)
    rel = abs(v.imag) / max(abs(v), 1e-300)
    if rel > tol:
        logger.warning("%s has a relative imaginary part %.3g", what, rel)
    return rel


def divided_power(a, b, p: float) -> np.ndarray:
    """
    (a^p − b^p)/(a − b) for positive arrays, evaluated through
    b^{p−1} expm1(p log1p(x))/x with x = (a−b)/b; the limit at a = b is
    p b^{p−1}.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    x = (a - b) / b
    small = np.abs(x) < 1e-300
    xs = np.where(small, 1.0, x)
    ratio = np.expm1(p * np.log1p(xs)) / xs
    return b ** (p - 1) * np.where(small, p, ratio)


def divided_exp(a, b, t: float) -> np.ndarray:
    """(e^{−ta} − e^{−tb})/(a − b), symmetric and finite at a = b (limit −t e^{−ta})."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    lo = np.minimum(a, b)
    x = t * np.abs(a - b)
    xs = np.where(x == 0, 1.0, x)
    phi = np.where(x == 0, 1.0, -np.expm1(-xs) / xs)
    return -t * np.exp(-t * lo) * phi


def make_tail(density: DensitySpec, basis: BasisSpec, sigma_bar: Optional[float] = None,
              extended_level: Optional[Level] = None, config=None) -> DiagonalTail:
    """Default tail completion: exact diagonals up to the configured box, Σ̄ beyond."""
    if extended_level is None:
        key = 'truncation.tail_one_d' if basis.dim == 1 else 'truncation.tail_two_d'
        default = 100000 if basis.dim == 1 else 1024
        extended_level = config.get(key, default) if config is not None else default
    sb = mean_value(density) if sigma_bar is None else float(sigma_bar)
    return DiagonalTail(sb, density, extended_level)


def _box_max(level: Level) -> int:
    return max(level) if isinstance(level, tuple) else int(level)


def _extended_diagonal(table: MatrixElementTable, tail: DiagonalTail):
    level = tail.extended_level
    if level is None or _box_max(level) <= _box_max(table.level):
        return table.diagonal(), table.eigenvalues, table.level
    return (bases.diagonal_values(tail.density, table.basis, level),
            bases.mode_eigenvalues(table.basis, level), level)


def _lattice_remainder(basis: BasisSpec, eps: np.ndarray, s: float) -> float:
    lattice = bases.homogeneous_zeta(basis, s)
    if lattice.is_pole:
        raise DivergenceError(f"homogeneous zeta has a pole at s={s}")
    m = eps > 0
    return lattice.real - exact_sum(eps[m] ** (-s))


def _shell_mask(eps: np.ndarray, fraction: float = 0.81) -> np.ndarray:
    return eps >= fraction * eps.max()


def _check_direct(s: float, basis: BasisSpec):
    if s <= basis.dim / 2:
        raise DivergenceError(f"direct summation needs s > {basis.dim / 2}, got s={s}; "
                              "use the continuation module")


def z_diag(s: float, table: MatrixElementTable, tail: Optional[DiagonalTail] = None) -> ZetaValue:
    """
    Diagonal-resummed term Σ (⟨n|Σ|n⟩/ε_n)^s with optional tail completion.

    Args:
        s: real exponent, s > d/2
        table: matrix element table
        tail: DiagonalTail; None keeps the bare truncated sum

    Returns:
        ZetaValue
    """
    _check_direct(s, table.basis)
    if tail is None:
        m = table.nonzero_modes()
        ratio = table.diagonal()[m] / table.eigenvalues[m]
        terms = ratio ** s
        shell = _shell_mask(table.eigenvalues[m])
        return ZetaValue(s, exact_sum(terms), trunc_error=exact_sum(terms[shell]),
                         method='z_diag')

    diag, eps, level = _extended_diagonal(table, tail)
    m = eps > 0
    terms = (diag[m] / eps[m]) ** s
    head = exact_sum(terms)
    remainder = tail.sigma_bar ** s * _lattice_remainder(table.basis, eps, s)
    shell = _shell_mask(eps[m])
    deviation = float(np.max(np.abs(diag[m][shell] / tail.sigma_bar - 1)))
    trunc = abs(s * deviation * remainder) + 1e-16 * abs(head)
    logger.debug("z_diag s=%g: box %s, head %.12g, tail %.3g", s, level, head, remainder)
    return ZetaValue(s, head + remainder, trunc_error=trunc, method='z_diag',
                     details={'head': head, 'tail': remainder})


def z_first_order(s: float, table: MatrixElementTable,
                  tail: Optional[DiagonalTail] = None) -> ZetaValue:
    """Σ̄^s Σ ε^{−s}(1 + s⟨n|Σ/Σ̄ − 1|n⟩), the diagonal term expanded to first order."""
    _check_direct(s, table.basis)
    sb = table.sigma_bar if tail is None else tail.sigma_bar
    if tail is None:
        diag, eps = table.diagonal(), table.eigenvalues
    else:
        diag, eps, _ = _extended_diagonal(table, tail)
    m = eps > 0
    terms = sb ** s * eps[m] ** (-s) * (1 + s * (diag[m] / sb - 1))
    value = exact_sum(terms)
    if tail is not None:
        value += sb ** s * _lattice_remainder(table.basis, eps, s)
    return ZetaValue(s, value, trunc_error=exact_sum(terms[_shell_mask(eps[m])]),
                     method='z_first_order')


def z_second_order(s: float, table: MatrixElementTable, tail: Optional[DiagonalTail] = None,
                   k_band: Optional[int] = None) -> ZetaValue:
    """
    Symmetrised off-diagonal term of the perturbative zeta function.

    Off-diagonal elements of δΣ equal those of Σ. Degenerate pairs use the
    limit (1−s)ε_n^{−s} of the divided difference. For strings, k_band keeps
    pairs with |k−n| ≤ k_band; None keeps every pair. The CLI passes
    `truncation.k_band`.
    """
    _check_direct(s, table.basis)
    sb = table.sigma_bar if tail is None else tail.sigma_bar
    rows, cols, vals = table.off_diagonal(k_band)
    if rows.size == 0:
        return ZetaValue(s, 0.0, method='z_second_order')
    eps = table.eigenvalues
    dd = divided_power(eps[cols], eps[rows], 1 - s)
    terms = dd * vals ** 2
    pref = -(s / 2) * sb ** (s - 2)
    value = pref * exact_sum(terms)
    shell = _shell_mask(eps)
    edge = shell[rows] | shell[cols]
    trunc = abs(pref * exact_sum(terms[edge]))
    if trunc > 1e-3 * max(abs(value), 1e-300):
        logger.warning("second-order term s=%g: outer shell carries %.3g of %.3g",
                       s, trunc, value)
    logger.debug("z_second_order s=%g over %d pairs: %.12g", s, rows.size, value)
    return ZetaValue(s, value, trunc_error=trunc, method='z_second_order')


def z_perturbative(s: float, table: MatrixElementTable, tail: Optional[DiagonalTail] = None,
                   order: int = 2, k_band: Optional[int] = None) -> ZetaValue:
    """Diagonal term plus, for order 2, the second-order term; both reported in details."""
    diag = z_diag(s, table, tail)
    if order == 1:
        return diag
    second = z_second_order(s, table, tail, k_band)
    value = complex(diag.value) + complex(second.value)
    return ZetaValue(s, value.real, trunc_error=diag.trunc_error + second.trunc_error,
                     method='series', details={'diag': diag.real, 'second_order': second.real})


def _w_parts(w_table: MatrixElementTable):
    if w_table.kind != 'w_operator':
        raise DomainError("a table of Ŵ = √ε Σ^{-1} √ε is required")
    m = w_table.nonzero_modes()
    diag = w_table.diagonal()
    rows, cols, vals = w_table.off_diagonal()
    base = w_table.sigma_bar * w_table.eigenvalues
    return diag[m], base, m, rows, cols, vals


def heat_kernel(t: float, w_table: MatrixElementTable, order: int = 2) -> HeatKernelValue:
    """
    Perturbative heat trace over nonzero modes,

        K(t) ≈ Σ e^{−W_nn t} − (t/2) Σ_n Σ_{k≠n} (e^{−tε̃_n} − e^{−tε̃_k})/(ε̃_n − ε̃_k) W_nk²,

    with ε̃ = c ε the unperturbed part of Ŵ (c the mean of 1/Σ).
    """
    if t <= 0:
        raise DomainError(f"heat kernel needs t > 0, got {t}")
    diag, base, _, rows, cols, vals = _w_parts(w_table)
    value = exact_sum(np.exp(-t * diag))
    if order >= 2 and rows.size:
        value += -(t / 2) * exact_sum(divided_exp(base[rows], base[cols], t) * vals ** 2)
    return HeatKernelValue(t, value, 'second' if order >= 2 else 'first')


def z_heat_series(s: float, w_table: MatrixElementTable, tail: bool = False) -> ZetaValue:
    """
    Ŵ-representation series, the Mellin transform of heat_kernel:

        Σ W_nn^{−s} − (s/2) Σ Σ (ε̃_n^{−s−1} − ε̃_k^{−s−1})/(ε̃_n − ε̃_k) W_nk².
    """
    _check_direct(s, w_table.basis)
    diag, base, m, rows, cols, vals = _w_parts(w_table)
    value = exact_sum(diag ** (-s))
    if rows.size:
        value += -(s / 2) * exact_sum(divided_power(base[rows], base[cols], -s - 1) * vals ** 2)
    if tail:
        value += w_table.sigma_bar ** (-s) * _lattice_remainder(w_table.basis, w_table.eigenvalues, s)
    return ZetaValue(s, value, method='heat_series')


def mellin_zeta(s: float, w_table: MatrixElementTable, order: int = 2, t_split: float = 1.0,
                tail: bool = False) -> ZetaValue:
    """
    Numeric Mellin transform Z(s) = Γ(s)^{-1} ∫ t^{s−1} K(t) dt.

    The reference kernel Σ e^{−ε̃_n t} over the same box is subtracted and
    added back analytically as c^{−s} Σ ε_n^{−s}; the difference is
    integrated in log t, split at t_split.
    """
    d = w_table.basis.dim
    if s <= d / 2:
        raise DivergenceError(f"Mellin transform diverges for s <= {d / 2}")
    diag, base, m, rows, cols, vals = _w_parts(w_table)
    ref = base[m]
    details = {}
    if s - d / 2 < 0.05:
        logger.warning("s=%g is close to the pole at s=%g", s, d / 2)
        details['pole_proximity'] = s - d / 2

    def difference(t):
        k = heat_kernel(t, w_table, order).value
        return k - exact_sum(np.exp(-t * ref))

    def integrand(u):
        t = math.exp(u)
        return t ** s * difference(t)

    lam = min(diag.min(), ref.min())
    u_lo = math.log(1e-6 / max(diag.max(), ref.max()))
    u_hi = math.log(60.0 / lam)
    cut = math.log(t_split)
    pieces = [(u_lo, cut), (cut, u_hi)] if u_lo < cut < u_hi else [(u_lo, u_hi)]
    total, err = 0.0, 0.0
    for a, b in pieces:
        val, e = integrate.quad(integrand, a, b, limit=400, epsabs=1e-15,
                              epsrel=TOLERANCES.quadrature)
        total += val
        err += e
    if not np.isfinite(total):
        raise ConvergenceError(f"Mellin quadrature failed at s={s}")
    g = gamma_fn(s).real
    value = exact_sum(ref ** (-s)) + total / g
    if tail:
        value += w_table.sigma_bar ** (-s) * _lattice_remainder(w_table.basis, w_table.eigenvalues, s)
    logger.debug("mellin_zeta s=%g: %.12g (quad error %.2g)", s, value, err / g)
    return ZetaValue(s, value, trunc_error=err / g, method='mellin', details=details)


def _nu_level(basis: BasisSpec, nu_max: float) -> int:
    fx, _ = basis.families()
    if fx == 'P':
        return int(nu_max / 2) + 2
    return int(nu_max) + 2


def cutoff_casimir(density: DensitySpec, basis: BasisSpec,
                   a_values: Optional[Sequence[float]] = None, convention='sigma',
                   config=None) -> CutoffFit:
    """
    Cutoff-regularised Casimir sum of a string,

        E(a) = (1/2) Σ̄^{−1/2} Σ √ε_n [1 − ½⟨n|δΣ/Σ̄|n⟩] e^{−a ν_n},

    with ν_n = √ε_n 2L/π, fitted on {a^−2, a^−1, 1, a, a², a³}. The finite
    part is the Casimir energy when the fit residual is small.
    """
    if basis.dim != 1:
        raise DomainError("cutoff regularisation is implemented for strings")
    if a_values is None:
        get = (lambda k, d: config.get(k, d)) if config is not None else (lambda k, d: d)
        a_values = np.geomspace(get('cutoff.a_min', 1e-3), get('cutoff.a_max', 1e-1),
                                get('cutoff.points', 16))
    a_values = np.asarray(a_values, dtype=float)
    if a_values.size < 8 or np.any(a_values <= 0):
        raise DomainError("the cutoff fit needs at least 8 positive a values")

    sb = perturbation_split(density, convention).sigma_bar
    level = _nu_level(basis, 40.0 / a_values.min())
    eps = bases.mode_eigenvalues(basis, level)
    diag = bases.diagonal_values(density, basis, level)
    root = np.sqrt(eps)
    nu = root * 2 * basis.half_width_x / math.pi
    weight = 0.5 / math.sqrt(sb) * root * (1 - 0.5 * (diag / sb - 1))
    energies = np.array([exact_sum(weight * np.exp(-a * nu)) for a in a_values])

    powers = np.arange(-2, 4)
    design = a_values[:, None] ** (powers[None, :] + 2)
    rhs = a_values ** 2 * energies
    coef, *_ = np.linalg.lstsq(design, rhs, rcond=None)
    resid = float(np.max(np.abs(design @ coef - rhs)) / np.max(np.abs(rhs)))
    removable = resid < 1e-6
    if not removable:
        logger.warning("cutoff fit residual %.3g: structure beyond the power basis "
                       "(e.g. log a divergence)", resid)
    logger.debug("cutoff fit over %d modes, residual %.3g", eps.size, resid)
    return CutoffFit({int(p): float(c) for p, c in zip(powers, coef)}, resid,
                     a_values, energies, removable)


def laurent_fit(fn: Callable[[float], Union[float, complex, ZetaValue]], s0: float,
                  deltas: Sequence[float] = (1e-2, 5e-3, 2.5e-3, 1.25e-3)) -> LaurentExpansion:
    """
    Laurent coefficients of fn around a simple pole from symmetric samples
    s0 ± δ, Richardson-extrapolated in δ² (steps halve between samples).
    """
    def value(s):
        v = fn(s)
        return complex(v.value).real if isinstance(v, ZetaValue) else complex(v).real

    deltas = sorted(deltas, reverse=True)
    ratios = [deltas[i] / deltas[i + 1] for i in range(len(deltas) - 1)]
    if not np.allclose(ratios, 2.0):
        raise DomainError("sample steps must halve from one to the next")
    plus = [value(s0 + d) for d in deltas]
    minus = [value(s0 - d) for d in deltas]
    odd = [d * (p - m) / 2 for d, p, m in zip(deltas, plus, minus)]
    even = [(p + m) / 2 for p, m in zip(plus, minus)]
    c_m1, e_m1 = richardson(odd, 2.0, (2, 4, 6))
    c_0, e_0 = richardson(even, 2.0, (2, 4, 6))
    slope = [(o - c_m1) / d ** 2 for o, d in zip(odd, deltas)]
    c_1, e_1 = richardson(slope, 2.0, (2, 4))
    return LaurentExpansion(s0, c_m1, c_0, c_1, (e_m1, e_0, e_1))
