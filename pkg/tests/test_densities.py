import math

import numpy as np
import pytest
from scipy import integrate

from densities import (conformal_density, density_eval, diagonal_asymptotics, endpoint_jumps,
                       make_density, mass, mean_value, perimeter, perturbation_split,
                       piecewise_from_invariants, piecewise_invariants, sigma_functional,
                       staircase)
from utils import DomainError


def test_unknown_kind_and_missing_parameter():
    with pytest.raises(DomainError):
        make_density('spiral', {})
    with pytest.raises(DomainError):
        make_density('sinusoidal', {'L': 0.5})
    with pytest.raises(DomainError):
        make_density('sinusoidal', {'eta': 1.2})
    with pytest.raises(DomainError):
        make_density('custom', {'L': 0.5})


def test_piecewise_layout():
    spec = make_density('piecewise', {'upsilon1': 1.1, 'upsilon2': 0.9, 'r': 0.6, 'R': 1.0})
    assert spec.half_width == pytest.approx(0.5)
    assert spec.breakpoints == pytest.approx((0.1,))
    assert density_eval(spec, -0.2) == pytest.approx(1 / 1.1 ** 2)
    assert density_eval(spec, 0.3) == pytest.approx(1 / 0.9 ** 2)
    assert mass(spec) == pytest.approx(0.6 / 1.1 ** 2 + 0.4 / 0.9 ** 2, rel=1e-14)
    assert sigma_functional(spec) == pytest.approx(0.6 / 1.1 + 0.4 / 0.9, rel=1e-14)
    with pytest.raises(DomainError):
        density_eval(spec, 0.8)


def test_piecewise_invariants_are_recovered():
    spec = piecewise_from_invariants(1.0, 1 / 3, 0.1)
    alpha, beta, du = piecewise_invariants(spec)
    assert alpha == pytest.approx(1.0, rel=1e-14)
    assert beta == pytest.approx(1 / 3, rel=1e-14)
    assert du == pytest.approx(0.1, rel=1e-14)
    assert sigma_functional(spec) == pytest.approx(alpha, rel=1e-14)


def test_sinusoidal_shape(sinusoidal_string):
    xs = np.linspace(-0.5, 0.5, 11)
    assert sinusoidal_string(xs) == pytest.approx(1 + 0.1 * np.sin(np.pi * xs), abs=1e-15)
    assert mean_value(sinusoidal_string) == pytest.approx(1.0, abs=1e-15)
    jumps = endpoint_jumps(sinusoidal_string)
    assert abs(jumps[1]) < 1e-14
    assert abs(jumps[3]) < 1e-12


def test_borg_closed_forms():
    alpha = 0.5
    spec = make_density('borg', {'alpha': alpha})
    direct = integrate.quad(spec, -0.5, 0.5, epsabs=0, epsrel=1e-13)[0]
    assert mass(spec) == pytest.approx(direct, rel=1e-12)
    assert sigma_functional(spec) == pytest.approx(1.0)
    root = integrate.quad(lambda x: math.sqrt(spec(x)), -0.5, 0.5, epsabs=0, epsrel=1e-13)[0]
    assert root == pytest.approx(1.0, rel=1e-12)
    h = 1e-5
    fd = (spec(0.1 + h) - spec(0.1 - h)) / (2 * h)
    assert float(spec.derivative(np.array([0.1]), 1)[0]) == pytest.approx(fd, rel=1e-8)
    with pytest.raises(DomainError):
        make_density('borg', {'alpha': -1.0})


def test_oscillating_sigma_matches_quadrature():
    spec = make_density('oscillating', {'eta': 0.3, 'eps_bar': 2 / 101, 'L': 0.5})
    xs = np.linspace(-0.5, 0.5, 20001)
    direct = integrate.quad(lambda x: math.sqrt(spec(x)), -0.5, 0.5, limit=2000,
                            epsabs=0, epsrel=1e-12)[0]
    assert sigma_functional(spec) == pytest.approx(direct, rel=1e-9)
    assert np.min(spec(xs)) > 0


def test_staircase_steps():
    spec = make_density('staircase', {'N': 8, 'eta': 0.3, 'eps_bar': 0.25, 'L': 0.5})
    assert len(spec.terms) == 8
    assert len(spec.breakpoints) == 7
    assert mass(spec) == pytest.approx(sum(t.x.coeff for t in spec.terms) / 8, rel=1e-14)


def test_fourier_mass_is_fixed():
    spec = make_density('fourier_periodic', {'a': [0.2, 0.1], 'b': [0.05], 'Delta': 0.3,
                                             'L': 0.5, 'M': 1.0})
    assert mass(spec) == pytest.approx(1.0, rel=1e-12)


def test_deformed_square_area_and_perimeter():
    alpha = 0.1
    spec = make_density('deformed_square', {'alpha': alpha, 'L': 1.0})
    assert mass(spec) == pytest.approx(4.0, rel=1e-13)
    assert spec.domain_area == pytest.approx(4.0)
    assert conformal_density('deformed_square', {'alpha': alpha}, (0.0, 0.0)) == pytest.approx(
        3 / (8 * alpha ** 2 + 3))
    # undeformed limit is the square of side 2
    flat = make_density('deformed_square', {'alpha': 1e-9, 'L': 1.0})
    assert perimeter(flat) == pytest.approx(8.0, rel=1e-9)
    with pytest.raises(DomainError):
        make_density('deformed_square', {'alpha': 0.6})


@pytest.mark.parametrize('alpha', [0.01, 0.02, 0.04, 0.1, 0.25, 0.4, 0.5])
def test_deformed_square_accepts_table_range(alpha):
    spec = make_density('deformed_square', {'alpha': alpha, 'L': 1.0})
    assert mass(spec) == pytest.approx(4.0, rel=1e-12)
    assert density_eval(spec, (0.9, 0.9)) > 0
    # the critical point of the map sits at -1/(2 alpha) on the real axis
    edge = density_eval(spec, (-1.0, 0.0))
    if alpha == 0.5:
        assert edge == pytest.approx(0.0, abs=1e-15)
    else:
        assert edge > 0


@pytest.mark.parametrize('r', [0.1, 0.5, 0.9])
def test_annulus_map_area_and_perimeter(r):
    spec = make_density('annulus_map', {'r': r})
    assert spec.half_width == pytest.approx(-math.log(r) / 2)
    assert spec.half_width_y == pytest.approx(math.pi)
    assert mass(spec) == pytest.approx(math.pi * (1 - r ** 2), rel=1e-13)
    assert perimeter(spec) == pytest.approx(2 * math.pi * (1 + r))


def test_perturbation_split_conventions(piecewise_params):
    spec = piecewise_params.to_density()
    mean = perturbation_split(spec, 'mean')
    assert mean.sigma_bar == pytest.approx(mean_value(spec))
    assert mean.mean_delta == pytest.approx(0.0, abs=1e-15)
    sig = perturbation_split(spec, 'sigma')
    assert sig.sigma_bar == pytest.approx((1.0 / (2 * spec.half_width)) ** 2, rel=1e-13)
    assert perturbation_split(spec, 2.0).convention == 'explicit'
    with pytest.raises(DomainError):
        perturbation_split(spec, 'median')


def test_diagonal_asymptotics_needs_derivatives():
    spec = make_density('custom', {'L': 0.5}, func=lambda x: 1 + np.asarray(x) ** 2)
    with pytest.raises(DomainError):
        diagonal_asymptotics(spec, 10)
    drum = make_density('annulus_linear', {'r': 0.9})
    with pytest.raises(DomainError):
        diagonal_asymptotics(drum, 10)


def test_staircase_samples_any_string(sinusoidal_string):
    steps = staircase(sinusoidal_string, 4)
    assert steps.kind == 'staircase'
    assert steps.param_dict['base_kind'] == 'sinusoidal'
    assert density_eval(steps, -0.4) == pytest.approx(float(sinusoidal_string(-0.375)))
    assert density_eval(steps, 0.3) == pytest.approx(float(sinusoidal_string(0.375)))
    with pytest.raises(DomainError):
        staircase(sinusoidal_string, 0)
