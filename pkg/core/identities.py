"""
Exact identities and sum rules used as verification suites.

The Borg string Σ(y) = (1+α)²/(1+αy)⁴ on [0, 1] is isospectral to the
uniform string, which turns every α-dependent expansion of its spectral
functions into an identity. Double sums over mode pairs only keep pairs
with k + n odd, since every other pair is multiplied by (−1)^{k+n} − 1.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

import bases
from bases import BasisSpec
from continuation import PiecewiseParams, piecewise_sumrule1, sinusoidal_exact_sums
from densities import DensitySpec, make_density, mass, mean_value, perimeter, sigma_functional
from oracles import galerkin_spectrum, zeta_from_spectrum
from pertzeta import ZetaValue
from specfun import hurwitz_zeta, jacobi_theta3, riemann_zeta
from table_manager import TableManager, build_w_table
from utils import ConvergenceError, DivergenceError, DomainError, exact_sum

logger = logging.getLogger(__name__)

BORG_BASIS = BasisSpec(1, 0.5, 'DD')
TAIL_DECADE = 10


@dataclass
class IdentityCheck:
    """One side-by-side comparison of an identity."""
    name: str
    lhs: float
    rhs: float
    tolerance: float
    trunc_error: float = 0.0
    params: Dict[str, Any] = field(default_factory=dict)

    @property
    def residual(self) -> float:
        return abs(self.lhs - self.rhs)

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.residual)) and self.residual <= self.tolerance

    def as_tuple(self) -> Tuple[float, float, float]:
        return self.lhs, self.rhs, self.residual

    def to_dict(self) -> Dict[str, Any]:
        return {
            'name': self.name,
            'lhs': self.lhs,
            'rhs': self.rhs,
            'residual': self.residual,
            'tolerance': self.tolerance,
            'trunc_error': self.trunc_error,
            'passed': self.passed,
            'params': dict(self.params)
        }


def borg_density(alpha: float) -> DensitySpec:
    return make_density('borg', {'alpha': alpha})


# --- pair sums -------------------------------------------------------------

def _odd_pair_rows(n_max: int, row_fn: Callable[[int, np.ndarray], np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
    """Row sums Σ_{k<n, k+n odd} f(n, k) for n = 2..n_max, each row summed exactly."""
    if n_max < 2:
        raise DomainError(f"pair sums need N >= 2, got {n_max}")
    ns = np.arange(2, n_max + 1)
    rows = np.empty(ns.size)
    for i, n in enumerate(ns):
        k = np.arange(n - 1, 0, -2, dtype=float)
        rows[i] = exact_sum(row_fn(int(n), k))
    return ns, rows


def _fitted_tail(ns: np.ndarray, rows: np.ndarray, power: float, terms: int = 3) -> Tuple[float, float]:
    """
    Σ_{n>N} of the row sums, with rows fitted on the last decade as
    n^{−power}(c₀ + c₁/n + c₂/n² ...). Returns (tail, error estimate).
    """
    n_end = int(ns[-1])
    mask = ns >= max(n_end // TAIL_DECADE, 2)
    if mask.sum() < 2 * terms:
        logger.debug("too few rows for a tail fit (N=%d)", n_end)
        return 0.0, abs(rows[-1]) * n_end
    x = 1.0 / ns[mask]
    y = rows[mask] * ns[mask].astype(float) ** power
    coeffs = np.polyfit(x, y, terms - 1)[::-1]
    fit_rms = float(np.sqrt(np.mean((np.polyval(coeffs[::-1], x) - y) ** 2)))
    pieces = [c * hurwitz_zeta(power + j, n_end + 1).real for j, c in enumerate(coeffs)]
    tail = math.fsum(pieces)
    err = abs(pieces[-1]) + fit_rms * hurwitz_zeta(power, n_end + 1).real
    logger.debug("fitted tail beyond N=%d: %.3e (err %.1e)", n_end, tail, err)
    return tail, err


# --- Borg family ---------------------------------------------------------------

def borg_z1_identity(alpha: float, N: int = 100000, tolerance: float = 1e-6) -> IdentityCheck:
    """
    Σ_n ⟨n|Σ|n⟩/(n²π²) = 1/6 for the Borg string.

    The partial sum runs over N diagonal elements; the rest is completed
    with Σ̄ ζ(2, N+1)/π².
    """
    density = borg_density(alpha)
    diag = bases.diagonal_values(density, BORG_BASIS, N)
    eps = bases.mode_eigenvalues(BORG_BASIS, N)
    head = exact_sum(diag / eps)
    sigma_bar = mass(density)
    tail = sigma_bar * hurwitz_zeta(2, N + 1).real / math.pi ** 2
    trunc = abs(diag[-1] - sigma_bar) / (3 * math.pi ** 2 * N)
    check = IdentityCheck('borg_z1', head + tail, 1.0 / 6.0, tolerance, trunc,
                          {'alpha': alpha, 'N': N})
    if not check.passed:
        logger.warning("Borg Z(1) identity converges slowly at α=%g: residual %.2e with N=%d",
                       alpha, check.residual, N)
    return check


def borg_xi_closed(s: float) -> float:
    """π⁴ζ(2s)/768 − 5π²ζ(2s+2)/256, continued to every s ≠ 1/2."""
    z1 = riemann_zeta(2 * s)
    z2 = riemann_zeta(2 * s + 2)
    if z1.is_pole or z2.is_pole:
        raise DivergenceError(f"Ξ(s) has a pole at s={s}")
    return (math.pi ** 4 * z1.real / 768 - 5 * math.pi ** 2 * z2.real / 256)


def borg_xi(s: float, N: int = 2000, tolerance: float = 1e-8) -> IdentityCheck:
    """
    Ξ(s): the ordered double sum over k ≠ n of
    k²n²((−1)^{k+n}−1)(n^{2−2s} − k^{2−2s})/(k²−n²)⁵ against its zeta form.
    """
    if s < 1:
        raise DivergenceError(f"the direct Ξ sum is used for s >= 1, got {s}")

    def row(n, k):
        return (-4.0 * k ** 2 * n ** 2 * (float(n) ** (2 - 2 * s) - k ** (2 - 2 * s))
                / (k ** 2 - n ** 2) ** 5)

    ns, rows = _odd_pair_rows(N, row)
    box = exact_sum(rows)
    tail, err = (0.0, 0.0) if s == 1 else _fitted_tail(ns, rows, 2 * s)
    return IdentityCheck('borg_xi', box + tail, borg_xi_closed(s), tolerance, err,
                         {'s': s, 'N': N, 'box': box, 'tail': tail})


def borg_heat_identity(t: float, N: int = 2000, tolerance: float = 1e-8) -> IdentityCheck:
    """
    (256t/π²) Σ_{n≥2} Σ_{m<n} m⁴n⁴((−1)^{m+n}−1)²(e^{−π²n²t} − e^{−π²m²t})/(m²−n²)⁵
    = −(3/2)tϑ₃ + 3t/2 − (t/2)dϑ₃/dt, with ϑ₃ = Σ_{n∈ℤ} e^{−π²n²t}.
    """
    if t <= 0:
        raise DomainError(f"heat identity needs t > 0, got {t}")
    pi2t = math.pi ** 2 * t

    def row(n, m):
        return (4.0 * m ** 4 * float(n) ** 4 * (math.exp(-pi2t * n * n) - np.exp(-pi2t * m * m))
                / (m ** 2 - float(n) ** 2) ** 5)

    ns, rows = _odd_pair_rows(N, row)
    box = exact_sum(rows)
    tail, err = _fitted_tail(ns, rows, 6)
    pref = 256 * t / math.pi ** 2
    lhs = pref * (box + tail)
    rhs = (-1.5 * t * jacobi_theta3(t) + 1.5 * t
           - 0.5 * t * jacobi_theta3(t, derivative=True))
    return IdentityCheck('borg_heat', lhs, rhs, tolerance, pref * err,
                         {'t': t, 'N': N})


def borg_heat_mellin_closed(s: float) -> float:
    """Mellin transform of the heat identity: −π⁴ζ(2s)/256 + 3π²ζ(2s+2)/256."""
    z1 = riemann_zeta(2 * s)
    z2 = riemann_zeta(2 * s + 2)
    if z1.is_pole or z2.is_pole:
        raise DivergenceError(f"pole of the heat-identity transform at s={s}")
    return (-math.pi ** 4 * z1.real + 3 * math.pi ** 2 * z2.real) / 256


def zeta_series_representation(s: float, N: int = 2000) -> ZetaValue:
    """
    ζ(s) = (128/π⁴) Σ_{n≥2} Σ_{k<n} ((−1)^{k+n}−1) k^{2−s} n^{2−s}
           (−5k^{s+2} − 3n²k^s + 3k²n^s + 5n^{s+2}) / (k²−n²)⁵.

    Rows fall off like n^{−s}; the remainder beyond N is the fitted tail.
    """
    if s <= 1:
        raise DivergenceError(f"the pair series converges for s > 1, got {s}")

    def row(n, k):
        # scaled by n so that k/n ∈ (0, 1)
        x = k / n
        g = 5 + 3 * x ** 2 - 3 * x ** s - 5 * x ** (s + 2)
        return -2.0 * float(n) ** (-4 - s) * x ** (2 - s) * g / (x ** 2 - 1) ** 5

    ns, rows = _odd_pair_rows(N, row)
    box = exact_sum(rows)
    tail, err = _fitted_tail(ns, rows, s)
    pref = 128 / math.pi ** 4
    return ZetaValue(s, pref * (box + tail), trunc_error=pref * err, method='pair_series',
                     details={'box': pref * box, 'tail': pref * tail})


def borg_w_closed(alpha: float, n: np.ndarray, m: np.ndarray) -> np.ndarray:
    """⟨n|Ŵ|m⟩ of the Borg string in the Dirichlet sine basis on [0, 1]."""
    a = float(alpha)
    n = np.asarray(n, dtype=float)
    m = np.asarray(m, dtype=float)
    a1 = (1 + a) ** 2
    out = np.empty(np.broadcast(n, m).shape)
    same = np.broadcast_to(n == m, out.shape)
    nn = np.broadcast_to(n, out.shape)
    mm = np.broadcast_to(m, out.shape)

    d = nn[same]
    out[same] = (3 * a ** 4 / (2 * math.pi ** 2 * a1 * d ** 2)
                 - (a ** 2 + 3 * a + 3) * a ** 2 / a1
                 + math.pi ** 2 * (a ** 4 + 5 * a ** 3 + 10 * a ** 2 + 10 * a + 5) * d ** 2 / (5 * a1))

    p, q = nn[~same], mm[~same]
    sq = q ** 2 + p ** 2
    diff2 = (q ** 2 - p ** 2) ** 2
    poly = (12 * a ** 2 * sq
            + (a + 1) * (math.pi ** 2 * a1 * diff2 - 12 * a ** 2 * sq) * np.cos(math.pi * (p + q))
            - math.pi ** 2 * diff2)
    out[~same] = 16 * a * p ** 2 * q ** 2 * poly / (math.pi ** 2 * a1 * (p - q) ** 4 * (p + q) ** 4)
    return out


def borg_w_identity_check(alpha: float, n_max: int = 30, tolerance: float = 1e-9) -> IdentityCheck:
    """Closed-form Ŵ elements against the table built from polynomial moments of 1/Σ."""
    table = build_w_table(borg_density(alpha), BORG_BASIS, n_max)
    idx = np.arange(1, n_max + 1)
    closed = borg_w_closed(alpha, idx[:, None], idx[None, :])
    built = table.dense()
    scale = float(np.max(np.abs(closed)))
    worst = float(np.max(np.abs(built - closed))) / scale
    return IdentityCheck('borg_w_elements', worst, 0.0, tolerance, 0.0,
                         {'alpha': alpha, 'n_max': n_max})


def borg_isospectrality(alpha: float, count: int = 20, level: int = 400,
                        tolerance: float = 1e-6) -> IdentityCheck:
    """Largest relative deviation of the Galerkin spectrum from n²π²."""
    table = TableManager().get_or_build(borg_density(alpha), BORG_BASIS, level)
    oracle = galerkin_spectrum(table, count, weyl={'sigma': 1.0})
    exact = (np.arange(1, count + 1) * math.pi) ** 2
    worst = float(np.max(np.abs(oracle.eigenvalues / exact - 1)))
    err = 0.0 if oracle.errors is None else float(np.max(oracle.errors / exact))
    return IdentityCheck('borg_isospectral', worst, 0.0, tolerance, err,
                         {'alpha': alpha, 'count': count, 'level': level})


# --- sum-rule battery ----------------------------------------------------------

@dataclass
class SumRuleResult:
    """tr(Q̂^s) against the spectrum oracle at one integer s."""
    s: int
    trace_value: float
    oracle_value: float
    trace_tail: float
    frobenius: Optional[float] = None
    oracle_error: float = 0.0

    @property
    def residual(self) -> float:
        return abs(self.trace_value - self.oracle_value)

    def as_tuple(self) -> Tuple[float, float, float]:
        return self.trace_value, self.oracle_value, self.residual


def q_matrix(table) -> np.ndarray:
    """Q_nm = ⟨n|Σ|m⟩/√(ε_n ε_m) over nonzero modes."""
    keep = table.nonzero_modes()
    mat = table.dense()[np.ix_(keep, keep)]
    root = np.sqrt(table.eigenvalues[keep])
    return mat / root[:, None] / root[None, :]


def _oracle_weyl(density: DensitySpec) -> Dict[str, float]:
    if density.dim == 1:
        return {'sigma': sigma_functional(density)}
    weyl = {'area': mass(density)}
    try:
        weyl['perimeter'] = perimeter(density)
    except DomainError:
        logger.debug("no perimeter for %s; Weyl tail without boundary term", density.density_id)
    return weyl


def _trace_tail(density: DensitySpec, basis: BasisSpec, s: int, table,
                tail_level: int) -> float:
    """Trace beyond the box: exact diagonals for s=1 strings, Σ̄^s Σ ε^{−s} otherwise."""
    sigma_bar = mean_value(density)
    box_eps = table.eigenvalues[table.nonzero_modes()]
    if s == 1 and basis.dim == 1 and tail_level > table.size:
        try:
            diag = bases.diagonal_values(density, basis, tail_level)
        except DomainError:
            diag = None
        if diag is not None:
            eps = bases.mode_eigenvalues(basis, tail_level)
            extra = slice(table.size, None)
            head = exact_sum(diag[extra] / eps[extra])
            rest = bases.homogeneous_zeta(basis, s).real - exact_sum(1 / eps[eps > 0])
            return head + sigma_bar * rest
    remaining = bases.homogeneous_zeta(basis, s).real - exact_sum(box_eps ** (-float(s)))
    return sigma_bar ** s * remaining


def sumrule_battery(density: DensitySpec, basis: BasisSpec, s: int, N: int,
                    tail_level: int = 100000) -> SumRuleResult:
    """
    Exact integer-s sum rule Z(s) = tr(Q̂^s) against the Galerkin spectrum.

    Args:
        density: string or drum density
        basis: compatible homogeneous basis
        s: integer above d/2
        N: truncation level of the matrix-element table
        tail_level: diagonal extension used for the s = 1 trace tail

    Returns:
        SumRuleResult
    """
    if int(s) != s or s <= basis.dim / 2:
        raise DomainError(f"sum rules need an integer s > {basis.dim / 2}, got {s}")
    s = int(s)
    table = TableManager().get_or_build(density, basis, N)
    q = q_matrix(table)
    trace = float(np.trace(np.linalg.matrix_power(q, s)))
    tail = _trace_tail(density, basis, s, table, tail_level)
    frob = exact_sum(q ** 2) if s == 2 else None

    count = max(table.size // 4, 1)
    try:
        oracle = galerkin_spectrum(table, count, weyl=_oracle_weyl(density))
    except ConvergenceError:
        logger.error("Galerkin oracle failed for %s", density.density_id)
        raise
    z = zeta_from_spectrum(s, oracle)
    logger.debug("sum rule s=%d for %s: trace %.12g + %.3e, oracle %.12g",
                 s, density.density_id, trace, tail, z.real)
    return SumRuleResult(s, trace + tail, z.real, tail, frob, z.trunc_error)


# --- suites --------------------------------------------------------------------

def borg_suite(alphas: Sequence[float] = (0.2, 0.5, 1.0), scale: str = 'desk') -> List[IdentityCheck]:
    n_terms = 100000 if scale == 'full' else 20000
    checks = []
    for a in alphas:
        checks.append(borg_z1_identity(a, n_terms))
        checks.append(borg_isospectrality(a))
        checks.append(borg_w_identity_check(a))
    checks.append(borg_xi(2.0))
    checks.extend(borg_heat_identity(t) for t in (0.1, 1.0))
    return checks


def zeta_series_suite(s_values: Sequence[float] = (2, 3, 4), N: int = 2000,
                      tolerance: float = 1e-6) -> List[IdentityCheck]:
    checks = []
    for s in s_values:
        z = zeta_series_representation(s, N)
        checks.append(IdentityCheck('zeta_series', z.real, riemann_zeta(s).real, tolerance,
                                    z.trunc_error, {'s': s, 'N': N}))
    return checks


def piecewise_suite(params: Sequence[Tuple[float, float, float]] = ((1.0, 1 / 3, 0.1), (1.0, 0.2, -0.05)),
                    tolerance: float = 1e-13) -> List[IdentityCheck]:
    """Z^PP(1) = ¼(Z^DD(1) + Z^NN(1)) for the exact piecewise sum rules."""
    checks = []
    for alpha, beta, du in params:
        p = PiecewiseParams.from_invariants(alpha, beta, du)
        pp = piecewise_sumrule1('PP', p)
        quarter = 0.25 * (piecewise_sumrule1('DD', p) + piecewise_sumrule1('NN', p))
        checks.append(IdentityCheck('piecewise_pp_relation', pp, quarter, tolerance, 0.0,
                                    {'alpha': alpha, 'beta': beta, 'delta_upsilon': du}))
    return checks


def sinusoidal_suite(eta: float = 0.1, L: float = 0.5, N: int = 120,
                     tolerance: float = 1e-8) -> List[IdentityCheck]:
    density = make_density('sinusoidal', {'eta': eta, 'L': L})
    basis = BasisSpec(1, L, 'DD')
    exact = sinusoidal_exact_sums(eta, L)
    checks = []
    for s in (1, 2, 3):
        res = sumrule_battery(density, basis, s, N)
        checks.append(IdentityCheck('sinusoidal_trace', res.trace_value, exact[s], tolerance,
                                    abs(res.trace_tail), {'s': s, 'eta': eta, 'L': L, 'N': N}))
    return checks


SUITES = {
    'borg': borg_suite,
    'zeta_series': zeta_series_suite,
    'piecewise': piecewise_suite,
    'sinusoidal': sinusoidal_suite,
}


def run_suites(names: Optional[Sequence[str]] = None, scale: str = 'desk') -> List[IdentityCheck]:
    """Run the named verification suites (all by default)."""
    names = list(SUITES) if not names else list(names)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise DomainError(f"Unknown verification suites: {unknown}")
    checks = []
    for name in names:
        logger.info("running %s suite", name)
        if name == 'borg':
            checks.extend(borg_suite(scale=scale))
        else:
            checks.extend(SUITES[name]())
    failed = [c for c in checks if not c.passed]
    for c in failed:
        logger.warning("%s failed: residual %.3e > %.1e (%s)", c.name, c.residual, c.tolerance, c.params)
    return checks
