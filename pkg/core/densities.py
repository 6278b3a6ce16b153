"""
Density catalog for inhomogeneous strings and drums.

Every catalog density on a rectangle is stored as a sum of separable
terms, each factor being coeff * x^p * Re(exp(rate*x + i*phase)) on a
sub-interval. That form covers piecewise-constant, trigonometric,
polynomial and exponential densities and gives exact integrals,
derivatives and matrix elements. The Borg density is handled by its own
closed forms; user densities can be passed as plain callables.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate

from specfun import elliptic_e_incomplete, exp_poly_moment
from utils import DomainError

logger = logging.getLogger(__name__)

CATALOG_KINDS = ('constant', 'piecewise', 'sinusoidal', 'borg', 'oscillating',
                 'fourier_periodic', 'staircase', 'deformed_square', 'annulus_map',
                 'annulus_linear', 'custom')


@dataclass(frozen=True)
class DensityTerm:
    """coeff * x**power * Re(exp(rate*x + 1j*phase)) on [lower, upper]."""
    coeff: float
    power: int = 0
    rate: complex = 0j
    phase: float = 0.0
    lower: float = -math.inf
    upper: float = math.inf

    def evaluate(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        inside = (x >= self.lower) & (x <= self.upper)
        val = self.coeff * x ** self.power * np.real(np.exp(self.rate * x + 1j * self.phase))
        return np.where(inside, val, 0.0)

    def integral(self, a: float, b: float) -> float:
        lo, hi = max(a, self.lower), min(b, self.upper)
        if hi <= lo:
            return 0.0
        g = exp_poly_moment(self.power, np.array([self.rate]), lo, hi)[0]
        return float(self.coeff * np.real(np.exp(1j * self.phase) * g))

    def derivative(self, x, order: int) -> np.ndarray:
        """Exact derivative inside the support (zero outside)."""
        x = np.asarray(x, dtype=float)
        z = self.rate
        acc = np.zeros(x.shape, dtype=complex)
        for i in range(min(order, self.power) + 1):
            falling = math.perm(self.power, i)
            acc += math.comb(order, i) * falling * x ** (self.power - i) * z ** (order - i)
        val = self.coeff * np.real(acc * np.exp(z * x + 1j * self.phase))
        inside = (x >= self.lower) & (x <= self.upper)
        return np.where(inside, val, 0.0)


@dataclass(frozen=True)
class SeparableTerm:
    """Product x_factor(x) * y_factor(y); a missing y factor means 1."""
    x: DensityTerm
    y: Optional[DensityTerm] = None


@dataclass(frozen=True)
class DensitySpec:
    """Immutable description of a catalog density on [-L, L] (x [-Ly, Ly])."""
    kind: str
    params: Tuple[Tuple[str, Any], ...]
    dim: int
    half_width: float
    half_width_y: Optional[float] = None
    terms: Tuple[SeparableTerm, ...] = ()
    breakpoints: Tuple[float, ...] = ()
    func: Optional[Callable] = field(default=None, compare=False, repr=False)
    deriv: Optional[Callable] = field(default=None, compare=False, repr=False)

    @property
    def param_dict(self) -> Dict[str, Any]:
        return dict(self.params)

    @property
    def density_id(self) -> str:
        return f"{self.kind}:{json.dumps(self.param_dict, sort_keys=True, default=str)}"

    @property
    def has_terms(self) -> bool:
        return len(self.terms) > 0

    @property
    def domain_area(self) -> float:
        if self.dim == 1:
            return 2 * self.half_width
        return 4 * self.half_width * self.half_width_y

    def __call__(self, x, y=None):
        if self.func is not None:
            return self.func(x) if self.dim == 1 else self.func(x, y)
        x = np.asarray(x, dtype=float)
        total = np.zeros(np.broadcast(x, y if y is not None else 0.0).shape)
        for term in self.terms:
            val = term.x.evaluate(x)
            if term.y is not None:
                val = val * term.y.evaluate(np.asarray(y, dtype=float))
            total = total + val
        return total

    def derivative(self, x, order: int):
        """d^order Σ/dx^order of a one-dimensional density."""
        if self.dim != 1:
            raise DomainError("derivatives are only provided for strings")
        if self.deriv is not None:
            return self.deriv(x, order)
        if not self.has_terms:
            return None
        x = np.asarray(x, dtype=float)
        return sum(term.x.derivative(x, order) for term in self.terms)

    @property
    def has_derivative(self) -> bool:
        return self.dim == 1 and (self.deriv is not None or self.has_terms)


def _spec(kind, params, dim, L, terms, Ly=None, breakpoints=(), func=None, deriv=None):
    items = tuple(sorted((k, _freeze(v)) for k, v in params.items()))
    return DensitySpec(kind=kind, params=items, dim=dim, half_width=float(L),
                       half_width_y=None if Ly is None else float(Ly),
                       terms=tuple(terms), breakpoints=tuple(breakpoints),
                       func=func, deriv=deriv)


def _freeze(value):
    if isinstance(value, (list, tuple, np.ndarray)):
        return tuple(float(v) for v in value)
    if isinstance(value, dict):
        return json.dumps(value, sort_keys=True)
    return value


def _constant(p: Dict[str, Any]) -> DensitySpec:
    value = float(p.get('value', 1.0))
    L = float(p.get('L', 1.0))
    dim = int(p.get('dim', 1))
    if value <= 0:
        raise DomainError(f"constant density must be positive, got {value}")
    Ly = None
    if dim == 2:
        Ly = float(p.get('Ly', L))
    return _spec('constant', p, dim, L, [SeparableTerm(DensityTerm(value))], Ly=Ly)


def _piecewise(p: Dict[str, Any]) -> DensitySpec:
    u1, u2 = float(p['upsilon1']), float(p['upsilon2'])
    r, R = float(p['r']), float(p['R'])
    if u1 <= 0 or u2 <= 0:
        raise DomainError("wave speeds must be positive")
    if not 0 < r < R:
        raise DomainError(f"breakpoint needs 0 < r < R, got r={r}, R={R}")
    L = R / 2
    x0 = r - L
    terms = [SeparableTerm(DensityTerm(1 / u1 ** 2, lower=-L, upper=x0)),
             SeparableTerm(DensityTerm(1 / u2 ** 2, lower=x0, upper=L))]
    return _spec('piecewise', p, 1, L, terms, breakpoints=(x0,))


def _sinusoidal(p: Dict[str, Any]) -> DensitySpec:
    eta, L = float(p['eta']), float(p.get('L', 0.5))
    if abs(eta) >= 1:
        raise DomainError(f"sinusoidal density needs |eta| < 1, got {eta}")
    k = math.pi / (2 * L)
    terms = [SeparableTerm(DensityTerm(1.0)),
             SeparableTerm(DensityTerm(eta, rate=1j * k, phase=-math.pi / 2))]
    return _spec('sinusoidal', p, 1, L, terms)


def _borg_func(alpha):
    def f(x):
        y = np.asarray(x, dtype=float) + 0.5
        return (1 + alpha) ** 2 / (1 + alpha * y) ** 4
    return f


def _borg_deriv(alpha):
    def d(x, order):
        u = 1 + alpha * (np.asarray(x, dtype=float) + 0.5)
        coef = (-1) ** order * math.factorial(order + 3) / 6
        return (1 + alpha) ** 2 * coef * alpha ** order * u ** (-4 - order)
    return d


def _borg(p: Dict[str, Any]) -> DensitySpec:
    alpha = float(p['alpha'])
    if alpha <= -1:
        raise DomainError(f"Borg density needs alpha > -1, got {alpha}")
    return _spec('borg', p, 1, 0.5, [], func=_borg_func(alpha), deriv=_borg_deriv(alpha))


def _oscillating(p: Dict[str, Any]) -> DensitySpec:
    eta, eps_bar = float(p['eta']), float(p['eps_bar'])
    L = float(p.get('L', 0.5))
    ell = float(p.get('ell', L))
    if abs(eta) >= 2:
        raise DomainError(f"oscillating density needs |eta| < 2, got {eta}")
    if eps_bar <= 0:
        raise DomainError("oscillation period must be positive")
    q = 2 * math.pi / (2 * L * eps_bar)
    terms = [SeparableTerm(DensityTerm(2.0)),
             SeparableTerm(DensityTerm(eta, rate=1j * q, phase=q * ell - math.pi / 2))]
    return _spec('oscillating', p, 1, L, terms)


def _fourier(p: Dict[str, Any]) -> DensitySpec:
    a = [float(v) for v in p.get('a', [])]
    b = [float(v) for v in p.get('b', [])]
    delta, L, M = float(p['Delta']), float(p.get('L', 0.5)), float(p.get('M', 1.0))
    a0 = fourier_a0(a, delta, L, M)
    terms = [SeparableTerm(DensityTerm(a0 / 2))]
    for j, aj in enumerate(a, start=1):
        if aj != 0.0:
            terms.append(SeparableTerm(DensityTerm(aj, rate=2j * math.pi * j / delta)))
    for j, bj in enumerate(b, start=1):
        if bj != 0.0:
            terms.append(SeparableTerm(DensityTerm(bj, rate=2j * math.pi * j / delta,
                                                   phase=-math.pi / 2)))
    spec = _spec('fourier_periodic', p, 1, L, terms)
    grid = np.linspace(-L, L, 4001)
    if np.min(spec(grid)) <= 0:
        raise DomainError("Fourier density is not positive on the string")
    return spec


def fourier_a0(a: Sequence[float], delta: float, L: float, M: float) -> float:
    """Constant coefficient fixing the total mass M of a Fourier density."""
    acc = M / L
    for j, aj in enumerate(a, start=1):
        acc -= aj * delta * math.sin(2 * math.pi * j * L / delta) / (j * L * math.pi)
    return acc


def _staircase(p: Dict[str, Any]) -> DensitySpec:
    base_kind = p.get('base_kind', 'oscillating')
    base_params = {k: v for k, v in p.items() if k not in ('N', 'base_kind')}
    return staircase(make_density(base_kind, base_params), int(p['N']))


def staircase(spec: DensitySpec, n_steps: int) -> DensitySpec:
    """Midpoint sampling of a string density on n_steps uniform cells."""
    if n_steps < 1:
        raise DomainError(f"staircase needs N >= 1, got {n_steps}")
    if spec.dim != 1:
        raise DomainError("staircase sampling is defined for strings only")
    L = spec.half_width
    h = 2 * L / n_steps
    edges = -L + h * np.arange(n_steps + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    values = np.asarray(spec(mids), dtype=float)
    terms = [SeparableTerm(DensityTerm(float(v), lower=float(edges[k]), upper=float(edges[k + 1])))
             for k, v in enumerate(values)]
    params = {**spec.param_dict, 'N': int(n_steps), 'base_kind': spec.kind}
    return _spec('staircase', params, 1, L, terms, breakpoints=tuple(edges[1:-1]))


def _deformed_square(p: Dict[str, Any]) -> DensitySpec:
    alpha, L = float(p['alpha']), float(p.get('L', 1.0))
    # f'(z) = 1 + 2αz vanishes at z = −1/(2α); it may touch the boundary but not enter
    if 2 * abs(alpha) * L > 1:
        raise DomainError(f"map z + alpha z^2 is not conformal on the square for alpha={alpha}")
    c = 3.0 / (8 * alpha ** 2 * L ** 2 + 3)
    terms = [SeparableTerm(DensityTerm(c)),
             SeparableTerm(DensityTerm(4 * alpha * c, power=1)),
             SeparableTerm(DensityTerm(4 * alpha ** 2 * c, power=2)),
             SeparableTerm(DensityTerm(1.0), DensityTerm(4 * alpha ** 2 * c, power=2))]
    return _spec('deformed_square', p, 2, L, terms, Ly=L)


def _annulus_map(p: Dict[str, Any]) -> DensitySpec:
    r = float(p['r'])
    if not 0 < r < 1:
        raise DomainError(f"annulus ratio needs 0 < r < 1, got {r}")
    L = -math.log(r) / 2
    return _spec('annulus_map', p, 2, L, [SeparableTerm(DensityTerm(r, rate=2.0))], Ly=math.pi)


def _annulus_linear(p: Dict[str, Any]) -> DensitySpec:
    r = float(p['r'])
    if not 0 < r < 1:
        raise DomainError(f"annulus ratio needs 0 < r < 1, got {r}")
    L = -math.log(r) / 2
    if L >= 0.5:
        raise DomainError("linearised annulus density is only positive for r > 1/e")
    c = 1 - 2 * L
    terms = [SeparableTerm(DensityTerm(c)), SeparableTerm(DensityTerm(2 * c, power=1))]
    return _spec('annulus_linear', p, 2, L, terms, Ly=math.pi)


def _custom(p: Dict[str, Any], func: Optional[Callable]) -> DensitySpec:
    if func is None:
        raise DomainError("custom density needs a callable")
    L = float(p.get('L', 0.5))
    dim = int(p.get('dim', 1))
    Ly = float(p['Ly']) if dim == 2 else None
    return _spec('custom', {k: v for k, v in p.items()}, dim, L, [], Ly=Ly, func=func)


_BUILDERS = {
    'constant': _constant,
    'piecewise': _piecewise,
    'sinusoidal': _sinusoidal,
    'borg': _borg,
    'oscillating': _oscillating,
    'fourier_periodic': _fourier,
    'staircase': _staircase,
    'deformed_square': _deformed_square,
    'annulus_map': _annulus_map,
    'annulus_linear': _annulus_linear,
}


def make_density(kind: str, params: Dict[str, Any], func: Optional[Callable] = None) -> DensitySpec:
    """
    Build a catalog density.

    Args:
        kind: one of CATALOG_KINDS
        params: kind-specific parameters
        func: callable Σ(x) or Σ(x, y) for kind 'custom'

    Returns:
        DensitySpec
    """
    if kind == 'custom':
        return _custom(dict(params), func)
    builder = _BUILDERS.get(kind)
    if builder is None:
        raise DomainError(f"Unknown density kind: {kind}")
    try:
        return builder(dict(params))
    except KeyError as e:
        raise DomainError(f"density '{kind}' is missing parameter {e}") from e


def piecewise_from_invariants(alpha: float, beta: float, delta_upsilon: float) -> DensitySpec:
    """Piecewise string with prescribed (α, β, δυ), scaled so υ₁ = 1+δυ, υ₂ = 1-δυ."""
    if not abs(delta_upsilon) < 1:
        raise DomainError("contrast |δυ| must be below 1")
    if not abs(beta) < alpha:
        raise DomainError("invariants need |β| < α")
    u1, u2 = 1 + delta_upsilon, 1 - delta_upsilon
    r = u1 * (alpha + beta) / 2
    R = r + u2 * (alpha - beta) / 2
    return make_density('piecewise', {'upsilon1': u1, 'upsilon2': u2, 'r': r, 'R': R})


def density_eval(spec: DensitySpec, point) -> float:
    """Σ at a point of the domain."""
    pts = np.atleast_1d(np.asarray(point, dtype=float))
    if pts.size != spec.dim:
        raise DomainError(f"point has {pts.size} coordinates, density has dimension {spec.dim}")
    tol = 1e-12 * max(1.0, spec.half_width)
    if abs(pts[0]) > spec.half_width + tol:
        raise DomainError(f"x={pts[0]} outside [-{spec.half_width}, {spec.half_width}]")
    if spec.dim == 2:
        if abs(pts[1]) > spec.half_width_y + tol:
            raise DomainError(f"y={pts[1]} outside the domain")
        return float(spec(pts[0], pts[1]))
    return float(spec(pts[0]))


def mass(spec: DensitySpec) -> float:
    """∫ Σ over the domain (total mass, or area 𝒜 for conformal densities)."""
    L = spec.half_width
    if spec.kind == 'borg':
        a = spec.param_dict['alpha']
        if abs(a) < 1e-12:
            return 1.0
        return (1 + a) ** 2 * (1 - (1 + a) ** -3) / (3 * a)
    if spec.has_terms:
        total = 0.0
        for term in spec.terms:
            ix = term.x.integral(-L, L)
            if spec.dim == 2:
                Ly = spec.half_width_y
                iy = term.y.integral(-Ly, Ly) if term.y is not None else 2 * Ly
                ix *= iy
            total += ix
        return total
    if spec.dim == 1:
        return integrate.quad(spec, -L, L, limit=400, epsabs=0, epsrel=1e-13)[0]
    Ly = spec.half_width_y
    return integrate.dblquad(lambda y, x: spec(x, y), -L, L, -Ly, Ly,
                             epsabs=0, epsrel=1e-11)[0]


def mean_value(spec: DensitySpec) -> float:
    return mass(spec) / spec.domain_area


@dataclass(frozen=True)
class PerturbationSplit:
    """Σ = Σ̄ (1 + δΣ/Σ̄) with diagnostics of the perturbation size."""
    sigma_bar: float
    delta: Callable = field(compare=False, repr=False)
    sup_norm: float = 0.0
    relative_sup: float = 0.0
    mean_delta: float = 0.0
    convention: str = 'mean'

    @property
    def first_order_valid(self) -> bool:
        return self.relative_sup < 0.5


def perturbation_split(spec: DensitySpec, convention='mean', grid: int = 10000) -> PerturbationSplit:
    """
    Split Σ into Σ̄ + δΣ.

    Args:
        spec: density
        convention: 'mean' (spatial mean, equal to 𝒜/area for conformal
            densities), 'sigma' ((σ(L)/2L)² for strings) or an explicit number
        grid: sample count per axis for the sup-norm diagnostic

    Returns:
        PerturbationSplit
    """
    if isinstance(convention, (int, float)):
        sigma_bar, conv = float(convention), 'explicit'
    elif convention == 'mean':
        sigma_bar, conv = mean_value(spec), 'mean'
    elif convention == 'sigma':
        if spec.dim != 1:
            raise DomainError("the σ(L) convention applies to strings only")
        sigma_bar, conv = (sigma_functional(spec) / (2 * spec.half_width)) ** 2, 'sigma'
    else:
        raise DomainError(f"Unknown split convention: {convention}")

    if spec.dim == 1:
        def delta(x):
            return spec(x) - sigma_bar
        xs = np.linspace(-spec.half_width, spec.half_width, grid)
        samples = delta(xs)
    else:
        def delta(x, y):
            return spec(x, y) - sigma_bar
        n = int(math.sqrt(grid)) + 1
        xs = np.linspace(-spec.half_width, spec.half_width, n)
        ys = np.linspace(-spec.half_width_y, spec.half_width_y, n)
        X, Y = np.meshgrid(xs, ys)
        samples = delta(X, Y)

    sup = float(np.max(np.abs(samples)))
    split = PerturbationSplit(sigma_bar=sigma_bar, delta=delta, sup_norm=sup,
                              relative_sup=sup / sigma_bar,
                              mean_delta=mean_value(spec) - sigma_bar, convention=conv)
    if not split.first_order_valid:
        logger.warning("perturbation %s is large: sup|δΣ|/Σ̄ = %.3g",
                       spec.density_id, split.relative_sup)
    return split


def sigma_functional(spec: DensitySpec) -> float:
    """σ(L) = ∫ √Σ dx over the string (closed forms where known)."""
    if spec.dim != 1:
        raise DomainError("σ(L) is defined for strings")
    p = spec.param_dict
    L = spec.half_width
    if spec.kind == 'piecewise':
        r, R = p['r'], p['R']
        return r / p['upsilon1'] + (R - r) / p['upsilon2']
    if spec.kind == 'constant':
        return math.sqrt(p.get('value', 1.0)) * 2 * L
    if spec.kind == 'borg':
        return 1.0
    if spec.kind == 'oscillating':
        eta, eps_bar = p['eta'], p['eps_bar']
        ell = p.get('ell', L)
        m = 2 * eta / (eta + 2)
        phi1 = ((eps_bar + 2) * L - 2 * ell) * math.pi / (4 * eps_bar * L)
        phi0 = (eps_bar * L - 2 * (L + ell)) * math.pi / (4 * eps_bar * L)
        e1 = float(elliptic_e_incomplete(phi1, m))
        e0 = float(elliptic_e_incomplete(phi0, m))
        return 2 * L * eps_bar / math.pi * math.sqrt(eta + 2) * (e1 - e0)
    if spec.kind == 'staircase':
        return sum(math.sqrt(t.x.coeff) * (t.x.upper - t.x.lower) for t in spec.terms)

    points = list(spec.breakpoints) if spec.breakpoints else None
    value, err = integrate.quad(lambda x: math.sqrt(float(spec(x))), -L, L,
                                points=points, limit=500, epsabs=0, epsrel=1e-13)
    logger.debug("σ(L) by quadrature for %s: %.15g (err %.2e)", spec.density_id, value, err)
    return value


def piecewise_invariants(spec: DensitySpec) -> Tuple[float, float, float]:
    """(α, β, δυ) of a piecewise string."""
    if spec.kind != 'piecewise':
        raise DomainError("invariants are defined for piecewise strings")
    p = spec.param_dict
    u1, u2, r, R = p['upsilon1'], p['upsilon2'], p['r'], p['R']
    alpha = r / u1 + (R - r) / u2
    beta = r / u1 - (R - r) / u2
    return alpha, beta, (u1 - u2) / (u1 + u2)


def conformal_map(kind: str, params: Dict[str, Any]) -> Tuple[Callable, Callable]:
    """(f, f') of the conformal map behind a 2D catalog density."""
    if kind == 'deformed_square':
        alpha, L = float(params['alpha']), float(params.get('L', 1.0))
        norm = math.sqrt(1 + 8 * alpha ** 2 * L ** 2 / 3)
        return (lambda z: (z + alpha * z ** 2) / norm,
                lambda z: (1 + 2 * alpha * z) / norm)
    if kind == 'annulus_map':
        r = float(params['r'])
        L = -math.log(r) / 2
        return (lambda z: np.exp(z - L), lambda z: np.exp(z - L))
    raise DomainError(f"no conformal map for kind {kind}")


def conformal_density(kind: str, params: Dict[str, Any], point) -> float:
    """|f'(z)|² at z = x + iy."""
    spec = make_density(kind, params)
    x, y = point
    return density_eval(spec, (x, y))


def perimeter(spec: DensitySpec) -> float:
    """Length of the boundary of the mapped domain, ∮ |f'| |dz|."""
    p = spec.param_dict
    if spec.kind == 'annulus_map':
        return 2 * math.pi * (1 + p['r'])
    if spec.kind == 'constant' and spec.dim == 2:
        value = p.get('value', 1.0)
        return 4 * math.sqrt(value) * (spec.half_width + spec.half_width_y)
    if spec.kind != 'deformed_square':
        raise DomainError(f"perimeter is not defined for {spec.kind}")
    _, fprime = conformal_map('deformed_square', p)
    L = spec.half_width
    total = 0.0
    sides = [lambda t: complex(t, -L), lambda t: complex(L, t),
             lambda t: complex(t, L), lambda t: complex(-L, t)]
    for side in sides:
        total += integrate.quad(lambda t: abs(fprime(side(t))), -L, L,
                                epsabs=0, epsrel=1e-13)[0]
    return total


def endpoint_jumps(spec: DensitySpec, orders: Sequence[int] = (1, 3)) -> Dict[int, float]:
    """
    δΣ^{(k)}(L) - δΣ^{(k)}(-L) for the requested odd orders.

    Uses exact derivatives when the density provides them and one-sided
    finite differences otherwise.
    """
    L = spec.half_width
    jumps = {}
    for k in orders:
        if spec.has_derivative:
            right = float(spec.derivative(np.array([L]), k)[0])
            left = float(spec.derivative(np.array([-L]), k)[0])
        else:
            right = _one_sided_derivative(spec, L, k, -1)
            left = _one_sided_derivative(spec, -L, k, +1)
        jumps[k] = right - left
    return jumps


_FORWARD = {
    1: [-25 / 12, 4, -3, 4 / 3, -1 / 4],
    3: [-5 / 2, 9, -12, 7, -3 / 2],
}


def _one_sided_derivative(spec: DensitySpec, x0: float, order: int, direction: int) -> float:
    if order not in _FORWARD:
        raise DomainError(f"one-sided stencil not available for order {order}")
    logger.warning("density %s has no analytic derivative; using one-sided differences",
                   spec.density_id)
    h = (1e-3 if order == 1 else 2e-2) * spec.half_width
    coeffs = _FORWARD[order]
    pts = x0 + direction * h * np.arange(len(coeffs))
    vals = np.asarray(spec(pts), dtype=float)
    return float(np.dot(coeffs, vals)) / (direction * h) ** order


def diagonal_asymptotics(spec: DensitySpec, n, terms: int = 8) -> np.ndarray:
    """
    Large-n Dirichlet diagonal ⟨n|Σ|n⟩ from endpoint odd derivatives:
    mean - Σ_k (2L)^{2k+1}/(2πn)^{2k+2} (-1)^k [Σ^{(2k+1)}]_{-L}^{L}.
    """
    if not spec.has_derivative:
        raise DomainError(f"{spec.density_id} has no derivative for the asymptotic diagonal")
    n = np.asarray(n, dtype=float)
    L = spec.half_width
    out = np.full(n.shape, mean_value(spec))
    for k in range(terms):
        order = 2 * k + 1
        jump = float(spec.derivative(np.array([L]), order)[0] - spec.derivative(np.array([-L]), order)[0])
        out -= (2 * L) ** order / (2 * math.pi * n) ** (order + 1) * (-1) ** k * jump
    return out
