"""
Orthonormal eigenbases of the homogeneous problems and matrix elements
⟨n|Σ|m⟩ of a density between them.

Every one-dimensional basis function is written as
    A cos(K (x + L) + q π/2),   K = k π / (4L)
with integer k and q, so that a product of two basis functions is a sum
of two such cosines and every matrix element reduces to the complex
moments F(k) = ∫ Σ(x) exp(i K (x + L)) dx. Moments come from exact
exponential-polynomial integrals (separable catalog densities), from
mpmath for the Borg density, or from oscillatory quadrature otherwise.
Two-dimensional tables are Kronecker sums over separable density terms.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import mpmath
import numpy as np
from numpy.polynomial import legendre
from scipy import integrate, sparse

from densities import DensitySpec, DensityTerm, diagonal_asymptotics
from specfun import SpecialFnResult, exp_poly_moment, rectangle_lattice_zeta, riemann_zeta
from utils import DomainError

logger = logging.getLogger(__name__)

BC_TAGS_1D = ('DD', 'NN', 'DN', 'ND', 'PP')
BC_TAGS_2D = ('DD', 'DP', 'DD2')

# exp(i q π/2) and exp(i k π/4) without argument rounding
_QUARTER = np.array([1, 1j, -1, -1j], dtype=complex)
_EIGHTH = np.exp(1j * np.pi / 4 * np.arange(8))


@dataclass(frozen=True)
class BasisSpec:
    """Homogeneous basis on [-L, L] (x [-Ly, Ly] for drums) with boundary tags."""
    dim: int
    half_width_x: float
    bc: str
    half_width_y: Optional[float] = None

    def __post_init__(self):
        if self.dim == 1:
            if self.bc not in BC_TAGS_1D:
                raise DomainError(f"Unknown 1D boundary condition: {self.bc}")
        elif self.dim == 2:
            if self.bc not in BC_TAGS_2D:
                raise DomainError(f"Unknown 2D boundary condition: {self.bc}")
            if self.half_width_y is None:
                ly = math.pi if self.bc in ('DD2', 'DP') else self.half_width_x
                object.__setattr__(self, 'half_width_y', ly)
        else:
            raise DomainError(f"dimension must be 1 or 2, got {self.dim}")
        if self.half_width_x <= 0 or (self.half_width_y is not None and self.half_width_y <= 0):
            raise DomainError("half widths must be positive")

    def families(self) -> Tuple[str, Optional[str]]:
        if self.dim == 1:
            return {'DD': 'D', 'NN': 'N', 'DN': 'DN', 'ND': 'ND', 'PP': 'P'}[self.bc], None
        return 'D', ('P' if self.bc == 'DP' else 'D')


@dataclass(frozen=True, order=True)
class ModeIndex:
    """(n_x, n_y, u); n_y is 0 for strings, u labels degenerate partners."""
    n_x: int
    n_y: int = 0
    u: int = 1


def axis_modes(family: str, level: int) -> List[Tuple[int, int]]:
    """Canonical (n, u) list of one axis, ordered by eigenvalue, up to the given level."""
    if level < 1:
        raise DomainError(f"truncation level must be >= 1, got {level}")
    if family in ('D', 'DN', 'ND'):
        return [(n, 1) for n in range(1, level + 1)]
    if family == 'N':
        out = [(0, 1)]
        for j in range(1, level + 1):
            out.append((j // 2, 1) if j % 2 == 0 else ((j + 1) // 2, 2))
        return out
    if family == 'P':
        out = [(0, 1)]
        for n in range(1, level + 1):
            out.extend([(n, 1), (n, 2)])
        return out
    raise DomainError(f"Unknown mode family: {family}")


def axis_factor(family: str, n: int, u: int) -> Tuple[float, int, int]:
    """
    (amplitude factor relative to 1/√L, k, q) of one axis mode, with
    K = kπ/(4L) and phase qπ/2. The zero modes of N and P carry 1/√2.
    """
    if u not in (1, 2):
        raise DomainError(f"mode label u must be 1 or 2, got {u}")
    if family == 'D':
        if n < 1 or u != 1:
            raise DomainError(f"Dirichlet mode needs n >= 1, got ({n}, {u})")
        return 1.0, 2 * n, -1
    if family in ('DN', 'ND'):
        if n < 1 or u != 1:
            raise DomainError(f"mixed mode needs n >= 1, got ({n}, {u})")
        return 1.0, 2 * n - 1, (-1 if family == 'DN' else 0)
    if family == 'N':
        if n == 0:
            if u != 1:
                raise DomainError("Neumann zero mode has u = 1")
            return 1 / math.sqrt(2), 0, 0
        if n < 0:
            raise DomainError(f"negative mode number {n}")
        return (1.0, 4 * n, -2 * n) if u == 1 else (1.0, 2 * (2 * n - 1), -2 * n)
    if family == 'P':
        if n == 0:
            if u != 1:
                raise DomainError("periodic zero mode has u = 1")
            return 1 / math.sqrt(2), 0, 0
        if n < 0:
            raise DomainError(f"negative mode number {n}")
        return (1.0, 4 * n, -2 * n - 1) if u == 1 else (1.0, 4 * n, -2 * n)
    raise DomainError(f"Unknown mode family: {family}")


def _axis_arrays(family: str, modes: Sequence[Tuple[int, int]], L: float):
    facs = [axis_factor(family, n, u) for n, u in modes]
    amp = np.array([f[0] for f in facs]) / math.sqrt(L)
    k = np.array([f[1] for f in facs], dtype=np.int64)
    q = np.array([f[2] for f in facs], dtype=np.int64)
    return amp, k, q


def _axis_eigen(k: np.ndarray, L: float) -> np.ndarray:
    return (k * math.pi / (4 * L)) ** 2


def enumerate_modes(basis: BasisSpec, level: Union[int, Tuple[int, int]]) -> List[ModeIndex]:
    """Modes in canonical order; 2D flat index is iy * Nx + ix."""
    fx, fy = basis.families()
    if basis.dim == 1:
        return [ModeIndex(n, 0, u) for n, u in axis_modes(fx, int(level))]
    nx, ny = (level, level) if isinstance(level, int) else level
    xm = axis_modes(fx, nx)
    ym = axis_modes(fy, ny)
    return [ModeIndex(x[0], y[0], y[1]) for y in ym for x in xm]


def mode_eigenvalues(basis: BasisSpec, level) -> np.ndarray:
    fx, fy = basis.families()
    if basis.dim == 1:
        _, k, _ = _axis_arrays(fx, axis_modes(fx, int(level)), basis.half_width_x)
        return _axis_eigen(k, basis.half_width_x)
    nx, ny = (level, level) if isinstance(level, int) else level
    _, kx, _ = _axis_arrays(fx, axis_modes(fx, nx), basis.half_width_x)
    _, ky, _ = _axis_arrays(fy, axis_modes(fy, ny), basis.half_width_y)
    ex = _axis_eigen(kx, basis.half_width_x)
    ey = _axis_eigen(ky, basis.half_width_y)
    return (ey[:, None] + ex[None, :]).ravel()


def _check_index(basis: BasisSpec, idx: ModeIndex):
    fx, fy = basis.families()
    if basis.dim == 1:
        if idx.n_y != 0:
            raise DomainError(f"string mode has no n_y, got {idx}")
        axis_factor(fx, idx.n_x, idx.u)
    else:
        axis_factor(fx, idx.n_x, 1)
        axis_factor(fy, idx.n_y, idx.u)


def eigenvalue(basis: BasisSpec, idx: ModeIndex) -> float:
    """Homogeneous eigenvalue ε of a mode."""
    _check_index(basis, idx)
    fx, fy = basis.families()
    if basis.dim == 1:
        _, k, _ = axis_factor(fx, idx.n_x, idx.u)
        return (k * math.pi / (4 * basis.half_width_x)) ** 2
    _, kx, _ = axis_factor(fx, idx.n_x, 1)
    _, ky, _ = axis_factor(fy, idx.n_y, idx.u)
    return ((kx * math.pi / (4 * basis.half_width_x)) ** 2
            + (ky * math.pi / (4 * basis.half_width_y)) ** 2)


def _axis_value(family: str, n: int, u: int, L: float, x: float) -> float:
    a, k, q = axis_factor(family, n, u)
    return a / math.sqrt(L) * math.cos(k * math.pi / (4 * L) * (x + L) + q * math.pi / 2)


def eigenfunction(basis: BasisSpec, idx: ModeIndex, point) -> float:
    """Value of the normalised basis function at a point."""
    _check_index(basis, idx)
    pts = np.atleast_1d(np.asarray(point, dtype=float))
    fx, fy = basis.families()
    if abs(pts[0]) > basis.half_width_x * (1 + 1e-12):
        raise DomainError(f"x={pts[0]} outside the basis interval")
    if basis.dim == 1:
        return _axis_value(fx, idx.n_x, idx.u, basis.half_width_x, pts[0])
    if abs(pts[1]) > basis.half_width_y * (1 + 1e-12):
        raise DomainError(f"y={pts[1]} outside the basis interval")
    return (_axis_value(fx, idx.n_x, 1, basis.half_width_x, pts[0])
            * _axis_value(fy, idx.n_y, idx.u, basis.half_width_y, pts[1]))


# --- moments -----------------------------------------------------------------

def term_moments(terms: Sequence[DensityTerm], L: float, ks: np.ndarray) -> np.ndarray:
    """F(k) = ∫_{-L}^{L} Σ_terms exp(i k π (x+L)/(4L)) dx, exact."""
    ks = np.asarray(ks, dtype=np.int64)
    K = ks * math.pi / (4 * L)
    shift = _EIGHTH[ks % 8]
    out = np.zeros(ks.shape, dtype=complex)
    for t in terms:
        lo, hi = max(-L, t.lower), min(L, t.upper)
        if hi <= lo:
            continue
        g_plus = exp_poly_moment(t.power, t.rate + 1j * K, lo, hi)
        g_minus = exp_poly_moment(t.power, np.conj(t.rate) + 1j * K, lo, hi)
        ph = complex(math.cos(t.phase), math.sin(t.phase))
        out += 0.5 * t.coeff * (ph * g_plus + np.conj(ph) * g_minus)
    return out * shift


def borg_moment(alpha: float, q: float) -> complex:
    """∫_0^1 (1+α)²/(1+αy)⁴ exp(i q π y) dy via the Ci/Si recursion in mpmath."""
    if alpha == 0:
        if q == 0:
            return 1.0 + 0j
        z = 1j * q * math.pi
        return complex((np.exp(z) - 1) / z)
    kappa_est = abs(q) * math.pi / abs(alpha)
    dps = 40 + int(3 * math.log10(1 + kappa_est))
    with mpmath.workdps(dps):
        a = mpmath.mpf(alpha)
        one_a = 1 + a
        pref = one_a ** 2 / a
        if q == 0:
            return complex(pref * (1 - one_a ** -3) / 3)
        kappa = mpmath.mpf(q) * mpmath.pi / a
        ak = abs(kappa)
        sgn = 1 if kappa > 0 else -1

        def ci_si(u):
            return mpmath.ci(ak * u) + 1j * sgn * mpmath.si(ak * u)

        f = mpmath.expj(-kappa) * (ci_si(one_a) - ci_si(mpmath.mpf(1)))
        c = mpmath.expj(kappa * a)
        for p in range(2, 5):
            f = (1 - c * one_a ** (1 - p)) / (p - 1) + 1j * kappa / (p - 1) * f
        return complex(pref * f)


def quadrature_moments(func, L: float, ks: Sequence[int], breakpoints: Sequence[float] = (),
                       workers: int = 1) -> np.ndarray:
    """F(k) by oscillatory QUADPACK integration in t = x + L, split at breakpoints."""
    edges = [0.0] + sorted(b + L for b in breakpoints if -L < b < L) + [2 * L]

    def one(k):
        K = k * math.pi / (4 * L)
        re = im = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            g = lambda t: float(func(t - L))
            if k == 0:
                re += integrate.quad(g, a, b, limit=500, epsabs=1e-14, epsrel=1e-13)[0]
            else:
                re += integrate.quad(g, a, b, weight='cos', wvar=K, limit=500, epsabs=1e-14)[0]
                im += integrate.quad(g, a, b, weight='sin', wvar=K, limit=500, epsabs=1e-14)[0]
        return complex(re, im)

    ks = list(ks)
    if workers > 1 and len(ks) > 8:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return np.array(list(pool.map(one, ks)), dtype=complex)
    return np.array([one(k) for k in ks], dtype=complex)


def density_moments(density: DensitySpec, ks: np.ndarray, method: str = 'auto',
                    workers: int = 1) -> Tuple[np.ndarray, str]:
    """Moments of a string density; returns (F, provenance)."""
    L = density.half_width
    uniq, inverse = np.unique(np.asarray(ks, dtype=np.int64), return_inverse=True)
    if method == 'auto':
        method = 'closed_form' if (density.has_terms or density.kind == 'borg') else 'quadrature'
    if method == 'closed_form':
        if density.has_terms:
            vals = term_moments([t.x for t in density.terms], L, uniq)
        elif density.kind == 'borg':
            alpha = density.param_dict['alpha']
            vals = np.array([borg_moment(alpha, k * math.pi / (4 * L) / math.pi)
                             for k in uniq], dtype=complex)
        else:
            raise DomainError(f"no closed form for density {density.kind}")
    elif method == 'quadrature':
        vals = quadrature_moments(density, L, uniq, density.breakpoints, workers)
    else:
        raise DomainError(f"Unknown matrix element method: {method}")
    return vals[inverse], method


def _assemble_axis(amp, k, q, moment_lookup) -> np.ndarray:
    kd = k[:, None] - k[None, :]
    ks = k[:, None] + k[None, :]
    qd = (q[:, None] - q[None, :]) % 4
    qs = (q[:, None] + q[None, :]) % 4
    fd = moment_lookup(np.abs(kd))
    fd = np.where(kd < 0, np.conj(fd), fd)
    fs = moment_lookup(ks)
    val = np.real(_QUARTER[qd] * fd) + np.real(_QUARTER[qs] * fs)
    return 0.5 * amp[:, None] * amp[None, :] * val


def _lookup_from(ks_needed: np.ndarray, values: np.ndarray):
    keys = np.asarray(ks_needed, dtype=np.int64)
    order = np.argsort(keys)
    keys, vals = keys[order], np.asarray(values, dtype=complex)[order]

    def lookup(arr):
        return vals[np.searchsorted(keys, np.asarray(arr, dtype=np.int64))]
    return lookup


def _dense_lookup(kmax: int, fetch):
    ks = np.arange(kmax + 1)
    values = fetch(ks)

    def lookup(arr):
        return values[np.asarray(arr)]
    return lookup


def axis_matrix(family: str, modes, L: float, fetch) -> np.ndarray:
    """Dense matrix ⟨a|f|b⟩ over one axis; fetch(ks) returns moments of f."""
    amp, k, q = _axis_arrays(family, modes, L)
    lookup = _dense_lookup(int(2 * k.max()), fetch)
    return _assemble_axis(amp, k, q, lookup)


def axis_diagonal(family: str, modes, L: float, fetch) -> np.ndarray:
    amp, k, q = _axis_arrays(family, modes, L)
    f0 = fetch(np.array([0]))[0]
    f2 = fetch(2 * k)
    return 0.5 * amp ** 2 * (f0.real + np.real(_QUARTER[(2 * q) % 4] * f2))


# --- 2D helpers ------------------------------------------------------------------

def _term_fetch(term: Optional[DensityTerm], L: float):
    def fetch(ks):
        return term_moments([term], L, ks)
    return fetch


def _chop(mat: np.ndarray) -> np.ndarray:
    scale = np.max(np.abs(mat)) if mat.size else 0.0
    out = mat.copy()
    out[np.abs(out) < 1e-15 * scale] = 0.0
    return out


def _lowrank_factors(density: DensitySpec, basis: BasisSpec, nodes: int = 160):
    """Separable rank decomposition of a sampled 2D density for the quadrature path."""
    Lx, Ly = basis.half_width_x, basis.half_width_y
    tx, wx = legendre.leggauss(nodes)
    ty, wy = legendre.leggauss(nodes)
    xs, ys = Lx * tx, Ly * ty
    X, Y = np.meshgrid(xs, ys, indexing='ij')
    samples = np.asarray(density(X, Y), dtype=float)
    u, s, vt = np.linalg.svd(samples)
    rank = int(np.sum(s > 1e-14 * s[0]))
    logger.debug("2D quadrature density %s has numerical rank %d", density.density_id, rank)
    return xs, Lx * wx, ys, Ly * wy, u[:, :rank] * s[:rank], vt[:rank].T


def _axis_values(family: str, modes, L: float, pts: np.ndarray) -> np.ndarray:
    amp, k, q = _axis_arrays(family, modes, L)
    K = k * math.pi / (4 * L)
    return amp[None, :] * np.cos(np.outer(pts + L, K) + q[None, :] * math.pi / 2)


def _assemble_2d(density: DensitySpec, basis: BasisSpec, nx: int, ny: int, method: str):
    fx, fy = basis.families()
    Lx, Ly = basis.half_width_x, basis.half_width_y
    xm, ym = axis_modes(fx, nx), axis_modes(fy, ny)
    total = sparse.csr_matrix((len(xm) * len(ym), len(xm) * len(ym)))
    if method == 'auto':
        method = 'closed_form' if density.has_terms else 'quadrature'

    if method == 'closed_form':
        if not density.has_terms:
            raise DomainError(f"no closed form for density {density.kind}")
        for term in density.terms:
            X = _chop(axis_matrix(fx, xm, Lx, _term_fetch(term.x, Lx)))
            if term.y is None:
                Y = sparse.identity(len(ym), format='csr')
            else:
                Y = sparse.csr_matrix(_chop(axis_matrix(fy, ym, Ly, _term_fetch(term.y, Ly))))
            total = total + sparse.kron(Y, sparse.csr_matrix(X), format='csr')
        return total, 'closed_form'

    xs, wx, ys, wy, ux, vy = _lowrank_factors(density, basis)
    phx = _axis_values(fx, xm, Lx, xs)
    phy = _axis_values(fy, ym, Ly, ys)
    for j in range(ux.shape[1]):
        X = phx.T @ (phx * (wx * ux[:, j])[:, None])
        Y = phy.T @ (phy * (wy * vy[:, j])[:, None])
        total = total + sparse.kron(sparse.csr_matrix(_chop(Y)), sparse.csr_matrix(_chop(X)),
                                    format='csr')
    return total, 'quadrature'


def assemble(density: DensitySpec, basis: BasisSpec, level, method: str = 'auto',
             workers: int = 1):
    """
    Full matrix of ⟨n|Σ|m⟩ over the truncated basis.

    Returns:
        (entries, eigenvalues, modes, provenance); entries is a dense array
        for strings and a CSR matrix for drums.
    """
    _check_compatible(density, basis)
    modes = enumerate_modes(basis, level)
    eps = mode_eigenvalues(basis, level)
    if basis.dim == 1:
        fx, _ = basis.families()
        xm = axis_modes(fx, int(level))
        amp, k, q = _axis_arrays(fx, xm, basis.half_width_x)
        needed = np.unique(np.concatenate([np.abs(k[:, None] - k[None, :]).ravel(),
                                           (k[:, None] + k[None, :]).ravel()]))
        values, prov = density_moments(density, needed, method, workers)
        entries = _assemble_axis(amp, k, q, _lookup_from(needed, values))
        entries = 0.5 * (entries + entries.T)
        return entries, eps, modes, prov
    nx, ny = (level, level) if isinstance(level, int) else level
    entries, prov = _assemble_2d(density, basis, nx, ny, method)
    return entries, eps, modes, prov


def _check_compatible(density: DensitySpec, basis: BasisSpec):
    if density.dim != basis.dim:
        raise DomainError(f"density dimension {density.dim} does not match basis {basis.dim}")
    if abs(density.half_width - basis.half_width_x) > 1e-12 * basis.half_width_x:
        raise DomainError("density and basis half widths differ")
    if basis.dim == 2 and abs(density.half_width_y - basis.half_width_y) > 1e-12 * basis.half_width_y:
        raise DomainError("density and basis half widths in y differ")


def matrix_element(density: DensitySpec, basis: BasisSpec, n: ModeIndex, m: ModeIndex,
                   method: str = 'auto') -> float:
    """Single element ⟨n|Σ|m⟩."""
    _check_compatible(density, basis)
    _check_index(basis, n)
    _check_index(basis, m)
    fx, fy = basis.families()
    Lx = basis.half_width_x
    if basis.dim == 1:
        amp, k, q = _axis_arrays(fx, [(n.n_x, n.u), (m.n_x, m.u)], Lx)
        k0, k1 = int(k[0]), int(k[1])
        # the 2x2 assembly also looks up the diagonal keys 0, 2k0 and 2k1
        needed = np.array(sorted({0, 2 * k0, 2 * k1, abs(k0 - k1), k0 + k1}))
        values, _ = density_moments(density, needed, method)
        mat = _assemble_axis(amp, k, q, _lookup_from(needed, values))
        return float(mat[0, 1])
    Ly = basis.half_width_y
    if method == 'quadrature' or not density.has_terms:
        return float(_element_2d_quadrature(density, basis, n, m))
    total = 0.0
    for term in density.terms:
        x_el = axis_matrix(fx, [(n.n_x, 1), (m.n_x, 1)], Lx, _term_fetch(term.x, Lx))[0, 1]
        if term.y is None:
            y_el = 1.0 if (n.n_y, n.u) == (m.n_y, m.u) else 0.0
        else:
            y_el = axis_matrix(fy, [(n.n_y, n.u), (m.n_y, m.u)], Ly, _term_fetch(term.y, Ly))[0, 1]
        total += x_el * y_el
    return total


def _element_2d_quadrature(density, basis, n, m) -> float:
    Lx, Ly = basis.half_width_x, basis.half_width_y

    def integrand(y, x):
        return (density(x, y) * eigenfunction(basis, n, (x, y)) * eigenfunction(basis, m, (x, y)))
    return integrate.dblquad(integrand, -Lx, Lx, -Ly, Ly, epsabs=1e-13, epsrel=1e-11)[0]


def diagonal_values(density: DensitySpec, basis: BasisSpec, level,
                    exact_limit: int = 400) -> np.ndarray:
    """
    Diagonal elements ⟨n|Σ|n⟩ in canonical order, vectorized for large
    truncation boxes. Densities without closed-form moments switch to the
    endpoint-derivative asymptotic series beyond exact_limit modes.
    """
    _check_compatible(density, basis)
    fx, fy = basis.families()
    Lx = basis.half_width_x
    if basis.dim == 1:
        xm = axis_modes(fx, int(level))
        if density.has_terms:
            return axis_diagonal(fx, xm, Lx, lambda ks: term_moments([t.x for t in density.terms], Lx, ks))
        if fx != 'D':
            raise DomainError("asymptotic diagonals are available for Dirichlet strings only")
        n_exact = min(len(xm), exact_limit)
        head = axis_diagonal(fx, xm[:n_exact], Lx,
                             lambda ks: density_moments(density, ks, 'auto')[0])
        if n_exact == len(xm):
            return head
        tail_n = np.array([n for n, _ in xm[n_exact:]], dtype=float)
        return np.concatenate([head, diagonal_asymptotics(density, tail_n)])

    if not density.has_terms:
        raise DomainError("large 2D diagonal boxes need a separable density")
    nx, ny = (level, level) if isinstance(level, int) else level
    xm, ym = axis_modes(fx, nx), axis_modes(fy, ny)
    Ly = basis.half_width_y
    total = np.zeros((len(ym), len(xm)))
    for term in density.terms:
        dx = axis_diagonal(fx, xm, Lx, _term_fetch(term.x, Lx))
        dy = np.ones(len(ym)) if term.y is None else axis_diagonal(fy, ym, Ly, _term_fetch(term.y, Ly))
        total += dy[:, None] * dx[None, :]
    return total.ravel()


def homogeneous_zeta(basis: BasisSpec, s: float) -> SpecialFnResult:
    """Σ ε^{-s} over all nonzero modes of the homogeneous basis, continued in s."""
    fx, fy = basis.families()
    L = basis.half_width_x
    if basis.dim == 1:
        z = riemann_zeta(2 * s)
        if z.is_pole:
            return z
        if fx in ('D', 'N'):
            pref = (2 * L / math.pi) ** (2 * s)
        elif fx in ('DN', 'ND'):
            pref = (4 * L / math.pi) ** (2 * s) * (1 - 2.0 ** (-2 * s))
        else:
            pref = 2 * (L / math.pi) ** (2 * s)
        return SpecialFnResult(pref * z.value, abs_error_estimate=abs(pref) * z.abs_error_estimate)
    Ly = basis.half_width_y
    if fy == 'D':
        return rectangle_lattice_zeta(2 * L, 2 * Ly, s)
    rect = rectangle_lattice_zeta(2 * L, Ly, s)
    row = riemann_zeta(2 * s)
    if rect.is_pole or row.is_pole:
        return SpecialFnResult(complex('nan'), float('inf'), True, None)
    value = (2 * L / math.pi) ** (2 * s) * row.value + 2 * rect.value
    return SpecialFnResult(value, abs_error_estimate=rect.abs_error_estimate + row.abs_error_estimate)
