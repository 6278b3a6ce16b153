"""
Independent spectra used as ground truth for the perturbative zeta
functions: transcendental roots of the piecewise string, the Galerkin
generalized eigenproblem, Bessel cross-product roots of the annulus and
Chebyshev collocation on the square, together with Weyl tails.
"""

import csv
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy import integrate, linalg, optimize

from densities import DensitySpec
from pertzeta import ZetaValue
from specfun import bessel, hurwitz_zeta
from table_manager import MatrixElementTable
from utils import TOLERANCES, ConvergenceError, DivergenceError, DomainError, exact_sum

logger = logging.getLogger(__name__)

ROOT_TOL = 1e-13
WEYL_EXPLICIT_TERMS = 100000


@dataclass
class SpectrumOracle:
    """Sorted eigenvalues with the geometry needed for Weyl tails."""
    eigenvalues: np.ndarray
    method: str
    dim: int = 1
    weyl: Dict[str, float] = field(default_factory=dict)
    errors: Optional[np.ndarray] = None

    def __post_init__(self):
        self.eigenvalues = np.sort(np.asarray(self.eigenvalues, dtype=float))

    @property
    def count(self) -> int:
        return int(self.eigenvalues.size)

    def to_csv(self, filename: str):
        with open(filename, 'w', newline='') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(['index', 'eigenvalue', 'method'])
            for i, e in enumerate(self.eigenvalues, start=1):
                writer.writerow([i, repr(float(e)), self.method])

    @classmethod
    def from_csv(cls, filename: str, dim: int = 1,
                 weyl: Optional[Dict[str, float]] = None) -> 'SpectrumOracle':
        if not os.path.exists(filename):
            raise DomainError(f"spectrum file not found: {filename}")
        values, method = [], 'imported'
        with open(filename, 'r', newline='') as f:
            reader = csv.reader(f)
            header = next(reader, [])
            if header[:2] != ['index', 'eigenvalue']:
                raise DomainError(f"unexpected spectrum header in {filename}: {header}")
            for parts in reader:
                if len(parts) < 2:
                    continue
                values.append(float(parts[1]))
                if len(parts) > 2 and parts[2]:
                    method = parts[2]
        return cls(np.array(values), method, dim, dict(weyl or {}))


# piecewise string roots

def _piecewise_fn(alpha: float, beta: float, du: float):
    def f(w):
        return np.sin(alpha * w) + du * np.sin(beta * w)
    return f


def piecewise_roots(p, count: int) -> SpectrumOracle:
    """
    Dirichlet spectrum of the piecewise string from sin αω + δυ sin βω = 0.

    Args:
        p: PiecewiseParams (anything with alpha, beta, delta_upsilon)
        count: number of positive roots

    Returns:
        SpectrumOracle with E_n = ω_n²
    """
    alpha, beta, du = p.alpha, p.beta, p.delta_upsilon
    if not abs(du) < 1:
        raise DomainError(f"contrast |δυ| must be below 1, got {du}")
    f = _piecewise_fn(alpha, beta, du)
    h = math.pi / (4 * alpha)
    grid = h * np.arange(1, 4 * (count + 2) + 1)
    positive = f(grid) >= 0
    idx = np.nonzero(positive[:-1] != positive[1:])[0]
    lo, hi = grid[idx], grid[idx + 1]
    f_lo = f(lo)
    # vectorized bisection over all brackets
    while np.any(hi - lo > ROOT_TOL * np.maximum(hi, 1.0)):
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        same = (f_mid >= 0) == (f_lo >= 0)
        lo = np.where(same, mid, lo)
        f_lo = np.where(same, f_mid, f_lo)
        hi = np.where(same, hi, mid)
    roots = 0.5 * (lo + hi)[:count]
    if roots.size < count:
        raise ConvergenceError(f"found {roots.size} of {count} roots")
    n = np.arange(1, count + 1)
    band = np.abs(roots * alpha / math.pi - n)
    if np.any(band >= 1):
        raise ConvergenceError(f"root {int(np.argmax(band)) + 1} left its Weyl band: missed root")
    logger.debug("piecewise roots: %d found, last ω = %.6g", count, roots[-1])
    return SpectrumOracle(roots ** 2, 'roots', 1, {'sigma': alpha})


# Galerkin

def _galerkin_values(table: MatrixElementTable) -> np.ndarray:
    mass_matrix = table.dense()
    stiffness = np.diag(table.eigenvalues)
    try:
        vals = linalg.eigh(stiffness, mass_matrix, eigvals_only=True)
    except linalg.LinAlgError as e:
        raise ConvergenceError(f"mass matrix of {table.density_id} is not positive definite") from e
    floor = 1e-6 * table.eigenvalues[table.eigenvalues > 0].min()
    return vals[vals > floor]


def galerkin_spectrum(table: MatrixElementTable, count: int,
                      richardson_power: Optional[float] = None,
                      weyl: Optional[Dict[str, float]] = None) -> SpectrumOracle:
    """
    Lowest eigenvalues of diag(ε) c = E M c over the truncated basis.

    Errors are the change from the half-size box; with richardson_power p
    the eigenvalues are extrapolated assuming an N^{-p} error.
    """
    if table.kind != 'density':
        raise DomainError("Galerkin spectra need a density table")
    if table.size < 4 * count:
        raise DomainError(f"table of {table.size} modes is too small for {count} eigenvalues")
    full = _galerkin_values(table)[:count]
    errors = None
    if isinstance(table.level, int):
        half = _galerkin_values(table.sub_table(table.level // 2))[:count]
        errors = np.abs(full - half)
        if richardson_power is not None:
            full = full + (full - half) / (2 ** richardson_power - 1)
    logger.debug("Galerkin spectrum of %s: %d modes from a %d table",
                 table.density_id, full.size, table.size)
    return SpectrumOracle(full, 'galerkin', table.basis.dim, dict(weyl or {}), errors)


# annulus

def _cross_product(m: int, r: float):
    """Y_m(k)J_m(kr) − J_m(k)Y_m(kr), divided by the modulus of the inner pair."""
    def f(k):
        k = np.asarray(k, dtype=float)
        jr, yr = bessel('J', m, k * r), bessel('Y', m, k * r)
        j1, y1 = bessel('J', m, k), bessel('Y', m, k)
        with np.errstate(invalid='ignore', over='ignore'):
            scaled = (y1 * jr - j1 * yr) / np.hypot(jr, yr)
        return np.where(np.isfinite(yr), scaled, j1)
    return f


def _order_roots(m: int, r: float, n_max: Optional[int], k_max: Optional[float]) -> np.ndarray:
    f = _cross_product(m, r)
    spacing = math.pi / (1 - r)
    h = spacing / 8
    start = max(float(m), h / 2)
    roots: List[float] = []
    chunk = 256
    while True:
        grid = start + h * np.arange(chunk + 1)
        vals = f(grid)
        for i in np.nonzero((vals[:-1] >= 0) != (vals[1:] >= 0))[0]:
            root = optimize.brentq(lambda x: float(f(x)), grid[i], grid[i + 1],
                                   xtol=1e-12, rtol=4 * np.finfo(float).eps)
            if k_max is not None and root > k_max:
                return np.array(roots)
            roots.append(root)
            if n_max is not None and len(roots) >= n_max:
                return np.array(roots)
        start = grid[-1]
        if k_max is not None and start > k_max:
            return np.array(roots)


def _radial_phase(m: int, r: float, k: np.ndarray):
    """WKB phase Φ(k) = ∫ √(k² − m²/ρ²) dρ over the allowed part of [r, 1] and dΦ/dk."""
    k = np.asarray(k, dtype=float)
    outer = np.sqrt(np.maximum(k ** 2 - m ** 2, 0.0))
    inner = np.sqrt(np.maximum((k * r) ** 2 - m ** 2, 0.0))

    def bracket(root, rho_k):
        if m == 0:
            return root
        return root - m * np.arccos(np.clip(m / np.maximum(rho_k, m), -1.0, 1.0))

    phase = bracket(outer, k) - bracket(inner, k * r)
    return phase, (outer - inner) / k


def _spacing_check(m: int, roots: np.ndarray, r: float):
    """
    Missed roots show up as a gap about twice the local WKB spacing π/Φ'(k),
    or as a first root whose phase already exceeds 3π/2.
    """
    if roots.size == 0:
        return
    first, _ = _radial_phase(m, r, roots[:1])
    if first[0] > 1.4 * math.pi:
        raise ConvergenceError(f"missed first root for order m={m}: phase {first[0] / math.pi:.3g}π")
    if roots.size < 2:
        return
    _, rate = _radial_phase(m, r, 0.5 * (roots[1:] + roots[:-1]))
    ratio = np.diff(roots) * rate / math.pi
    if np.any(ratio > 1.6):
        i = int(np.argmax(ratio))
        raise ConvergenceError(f"missed root for order m={m} near k={roots[i]:.6g}: "
                               f"gap {ratio[i]:.3g} local spacings")


def annulus_bessel_roots(r: float, m_max: int, n_max: int, workers: int = 1) -> SpectrumOracle:
    """
    Dirichlet annulus spectrum E = k² from the Bessel cross product, first
    n_max radial roots for each order m ≤ m_max; m ≥ 1 entered twice.
    """
    if not 0 < r < 1:
        raise DomainError(f"annulus ratio needs 0 < r < 1, got {r}")

    def order(m):
        roots = _order_roots(m, r, n_max, None)
        _spacing_check(m, roots, r)
        return m, roots

    return _merge_orders(r, _run_orders(order, range(m_max + 1), workers))


def annulus_spectrum(r: float, count: int, workers: int = 1) -> SpectrumOracle:
    """Lowest `count` annulus eigenvalues, complete below a Weyl-chosen cutoff."""
    if not 0 < r < 1:
        raise DomainError(f"annulus ratio needs 0 < r < 1, got {r}")
    area, perim = math.pi * (1 - r ** 2), 2 * math.pi * (1 + r)
    # invert N(k) = (𝒜k² − 𝓛k)/4π with a margin
    target = 1.1 * count + 50
    k_max = (perim + math.sqrt(perim ** 2 + 16 * math.pi * area * target)) / (2 * area)

    def order(m):
        roots = _order_roots(m, r, None, k_max)
        _spacing_check(m, roots, r)
        return m, roots

    oracle = _merge_orders(r, _run_orders(order, range(int(k_max) + 1), workers))
    if oracle.count < count:
        raise ConvergenceError(f"only {oracle.count} annulus modes below k={k_max:.4g}")
    oracle.eigenvalues = oracle.eigenvalues[:count]
    return oracle


def _run_orders(fn, orders, workers: int):
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, orders))
    return [fn(m) for m in orders]


def _merge_orders(r: float, results) -> SpectrumOracle:
    parts = []
    for m, roots in results:
        parts.append(roots ** 2)
        if m >= 1:
            parts.append(roots ** 2)
    eig = np.concatenate(parts) if parts else np.array([])
    logger.debug("annulus r=%g: %d eigenvalues", r, eig.size)
    return SpectrumOracle(eig, 'bessel_roots', 2,
                          {'area': math.pi * (1 - r ** 2), 'perimeter': 2 * math.pi * (1 + r)})


def annulus_delta_z1_direct(r: float, n_max: int = 10000) -> float:
    """
    ΔZ(1) summed from its definition: radial diagonal elements times the
    closed-form transverse sums Σ_ny [2/(a+n_y²) − 1/(a+n_y²/4)], plus tail.
    """
    if not 0 < r < 1:
        raise DomainError(f"annulus ratio needs 0 < r < 1, got {r}")
    L = -math.log(r) / 2
    lr = math.log(r)
    n = np.arange(1, n_max + 1, dtype=float)
    d = math.pi ** 2 * n ** 2 * (r ** 2 - 1) / (2 * (math.pi ** 2 * n ** 2 * lr + lr ** 3))
    a = (n * math.pi / (2 * L)) ** 2
    root = np.sqrt(a)
    with np.errstate(over='ignore'):
        csch = np.where(2 * math.pi * root < 700, 1 / np.sinh(np.minimum(2 * math.pi * root, 700)), 0.0)
    head = exact_sum(d * (1 / (2 * a) + math.pi * root * csch / a))
    sigma_bar = (1 - r ** 2) / (4 * L)
    tail = sigma_bar * 2 * L ** 2 / math.pi ** 2 * hurwitz_zeta(2, n_max + 1).real
    return head + tail


def _radial_green_trace(m: int, r: float) -> float:
    """
    Σ_n k_mn^{-4} for one order: the squared Hilbert-Schmidt norm of the
    radial Dirichlet Green function on [r, 1], written with bounded factors.
    """
    if m == 0:
        lr = math.log(r)

        def inner(rho):
            L = math.log(rho / r)
            return rho ** 2 / 2 * (L * L - L + 0.5) - r ** 2 / 4

        def outer(rho):
            return 2 * rho * math.log(rho) ** 2 * inner(rho)

        value = integrate.quad(outer, r, 1.0, epsabs=1e-16, epsrel=TOLERANCES.quadrature,
                               limit=200)[0]
        return value / lr ** 2

    def inner(rho):
        x = r / rho
        x2m = x ** (2 * m)
        if m == 1:
            cross = -x ** 4 * math.log(x)
        else:
            cross = (x2m * x * x - x2m * x2m) / (2 * m - 2)
        return rho ** 2 * ((1 - x2m * x * x) / (2 * m + 2) - x2m * (1 - x * x) + cross)

    def outer(rho):
        return 2 * rho * (1 - rho ** (2 * m)) ** 2 * inner(rho)

    value = integrate.quad(outer, r, 1.0, epsabs=1e-16, epsrel=TOLERANCES.quadrature,
                           limit=200, points=[min(r * (1 + 2.0 / m), 0.5 * (1 + r))])[0]
    return value / (4 * m * m * (1 - r ** (2 * m)) ** 2)


def annulus_zeta2(r: float, orders: int = 400, fit_terms: int = 5) -> ZetaValue:
    """
    Z(2) of the Dirichlet annulus without eigenvalues: per-order Green
    function traces up to `orders`, and a tail Σ c_p m^{-p}, p ≥ 3, fitted on
    the upper half of the computed orders.
    """
    if not 0 < r < 1:
        raise DomainError(f"annulus ratio needs 0 < r < 1, got {r}")
    if orders < 4 * fit_terms:
        raise DomainError(f"need at least {4 * fit_terms} orders for the tail fit, got {orders}")
    traces = np.array([_radial_green_trace(m, r) for m in range(orders + 1)])
    m_fit = np.arange(orders // 2, orders + 1, dtype=float)
    powers = np.arange(3, 3 + fit_terms)
    design = (orders / m_fit)[:, None] ** powers[None, :]
    scaled, *_ = np.linalg.lstsq(design, traces[orders // 2:], rcond=None)
    fit_error = float(np.max(np.abs(design @ scaled - traces[orders // 2:])))
    coeffs = scaled * float(orders) ** powers
    tail = exact_sum([c * hurwitz_zeta(int(p), orders + 1).real for c, p in zip(coeffs, powers)])
    head = traces[0] + 2 * exact_sum(traces[1:])
    total = head + 2 * tail
    logger.debug("annulus r=%g: Z(2) head %.12g, tail %.3g, fit residual %.3g",
                 r, head, 2 * tail, fit_error)
    # the last fitted power bounds what the truncated tail series misses
    last = 2 * abs(coeffs[-1] * hurwitz_zeta(int(powers[-1]), orders + 1).real)
    return ZetaValue(2.0, total, trunc_error=last, method='green_function',
                     details={'head': head, 'tail': 2 * tail, 'orders': orders,
                              'leading': float(coeffs[0]), 'fit_residual': fit_error})


# collocation

def chebyshev_matrix(n: int):
    """Chebyshev points cos(πj/n) and the differentiation matrix on [-1, 1]."""
    j = np.arange(n + 1)
    x = np.cos(np.pi * j / n)
    c = np.where((j == 0) | (j == n), 2.0, 1.0) * (-1.0) ** j
    dx = x[:, None] - x[None, :]
    D = np.outer(c, 1 / c) / (dx + np.eye(n + 1))
    D -= np.diag(D.sum(axis=1))
    return x, D


def collocation_2d(density: DensitySpec, grid_n: int = 60, count: Optional[int] = None) -> SpectrumOracle:
    """
    Chebyshev collocation of (−Δ)ψ = EΣψ with Dirichlet walls on the
    rectangle of the density, grid_n interior points per axis.
    """
    if density.dim != 2:
        raise DomainError("collocation is implemented for drums")
    horizon = (grid_n // 3) ** 2
    if count is None:
        count = horizon
    if count > horizon:
        raise DomainError(f"grid {grid_n} resolves about {horizon} modes, {count} requested")
    Lx, Ly = density.half_width, density.half_width_y
    xs, Dx = chebyshev_matrix(grid_n + 1)
    ys, Dy = chebyshev_matrix(grid_n + 1)
    D2x = (Dx @ Dx)[1:-1, 1:-1] / Lx ** 2
    D2y = (Dy @ Dy)[1:-1, 1:-1] / Ly ** 2
    eye = np.eye(grid_n)
    lap = np.kron(eye, D2x) + np.kron(D2y, eye)
    X, Y = np.meshgrid(Lx * xs[1:-1], Ly * ys[1:-1])
    sigma = np.asarray(density(X, Y), dtype=float).ravel()
    if np.any(sigma <= 0):
        raise DomainError("density must be positive on the collocation grid")
    vals = linalg.eigvals(-lap / sigma[:, None])
    order = np.argsort(vals.real)
    vals = vals[order]
    imag = np.max(np.abs(vals[:count].imag) / np.abs(vals[:count].real))
    if imag > 1e-8:
        logger.warning("collocation eigenvalues carry a relative imaginary part %.3g", imag)
    logger.debug("collocation %dx%d for %s", grid_n, grid_n, density.density_id)
    return SpectrumOracle(vals[:count].real, 'collocation', 2)


# Weyl asymptotics

def weyl_eigenvalue(n, area: float, perimeter: float = 0.0):
    """E_n ≈ 4πn/𝒜 + (𝓛/𝒜)√(4πn/𝒜)."""
    lead = 4 * math.pi * np.asarray(n, dtype=float) / area
    return lead + perimeter / area * np.sqrt(lead)


def weyl_eigenvalue_1d(n, sigma: float):
    """E_n ≈ n²π²/σ(L)²."""
    return (np.asarray(n, dtype=float) * math.pi / sigma) ** 2


def weyl_tail(s: float, start: int, weyl: Dict[str, float], dim: int = 2,
              explicit: int = WEYL_EXPLICIT_TERMS) -> float:
    """Σ_{n≥start} E_n^{−s} over the Weyl eigenvalues."""
    if s <= dim / 2:
        raise DivergenceError(f"Weyl tail diverges for s <= {dim / 2}")
    if dim == 1:
        sigma = weyl['sigma']
        return (sigma / math.pi) ** (2 * s) * hurwitz_zeta(2 * s, start).real
    area, perim = weyl['area'], weyl.get('perimeter', 0.0)
    n = np.arange(start, start + explicit, dtype=float)
    head = exact_sum(weyl_eigenvalue(n, area, perim) ** (-s))
    n_end = start + explicit

    def f(x):
        return float(weyl_eigenvalue(x, area, perim)) ** (-s)

    integral, _ = integrate.quad(f, n_end, np.inf, epsabs=0, epsrel=1e-13, limit=200)
    h = 1e-3 * n_end
    slope = (f(n_end + h) - f(n_end - h)) / (2 * h)
    return head + integral + 0.5 * f(n_end) - slope / 12


def weyl_ratio(oracle: SpectrumOracle, n) -> np.ndarray:
    """E_n over its leading Weyl estimate (1-based n)."""
    n = np.atleast_1d(np.asarray(n, dtype=int))
    e = oracle.eigenvalues[n - 1]
    if oracle.dim == 1:
        return e / weyl_eigenvalue_1d(n, oracle.weyl['sigma'])
    return e / weyl_eigenvalue(n, oracle.weyl['area'])


def weyl_count_check(oracle: SpectrumOracle,
                     fractions: Sequence[float] = (0.25, 0.5, 0.75, 1.0)) -> List[Dict[str, float]]:
    """
    Counting function N(Λ) against the two-term Weyl law at a few cutoffs;
    a cutoff passes when the gap is within the boundary term plus 2.
    """
    if not oracle.weyl:
        raise DomainError("oracle carries no Weyl geometry")
    top = oracle.eigenvalues[-1]
    rows = []
    for frac in fractions:
        lam = frac * top
        counted = int(np.searchsorted(oracle.eigenvalues, lam, side='right'))
        if oracle.dim == 1:
            predicted = oracle.weyl['sigma'] * math.sqrt(lam) / math.pi
            allowance = 2.0
        else:
            area, perim = oracle.weyl['area'], oracle.weyl.get('perimeter', 0.0)
            boundary = perim * math.sqrt(lam) / (4 * math.pi)
            predicted = area * lam / (4 * math.pi) - boundary
            allowance = boundary + 2
        rows.append({'cutoff': lam, 'count': counted, 'weyl': predicted,
                     'passed': abs(counted - predicted) <= allowance})
    return rows


def zeta_from_spectrum(s: float, oracle: SpectrumOracle, n_exact: Optional[int] = None) -> ZetaValue:
    """
    Σ_{n≤n_exact} E_n^{−s} plus the Weyl tail beyond.

    Args:
        s: real exponent above d/2
        oracle: SpectrumOracle with Weyl geometry
        n_exact: number of trusted eigenvalues (all by default)

    Returns:
        ZetaValue, method 'spectrum'
    """
    if s <= oracle.dim / 2:
        raise DivergenceError(f"spectral sum diverges for s <= {oracle.dim / 2}")
    n_exact = oracle.count if n_exact is None else int(n_exact)
    if n_exact > oracle.count:
        raise DomainError(f"oracle holds {oracle.count} eigenvalues, {n_exact} requested")
    head = exact_sum(oracle.eigenvalues[:n_exact] ** (-s))
    tail = 0.0
    if oracle.weyl:
        tail = weyl_tail(s, n_exact + 1, oracle.weyl, oracle.dim)
    else:
        logger.warning("no Weyl geometry: spectral sum of %s left untruncated", oracle.method)
    total = head + tail
    if abs(tail) > 0.1 * abs(total):
        logger.warning("Weyl tail carries %.1f%% of Z(%g)", 100 * tail / total, s)
    return ZetaValue(s, total, trunc_error=abs(tail), method='spectrum',
                     details={'head': head, 'tail': tail})
