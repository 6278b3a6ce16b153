import math

import pytest
from scipy import integrate

from bases import BasisSpec
from continuation import (PiecewiseParams, annulus_delta_z1, cylinder_casimir, dd_plus_nn_zeta,
                          deformed_square_g, divergence_check, divergence_residue, domain_g,
                          fourier_sumrule1, kirsten_zeta_c, oscillating_laurent, oscillating_zeta,
                          piecewise_casimir, piecewise_sumrule1, piecewise_zeta, sinusoidal_exact_sums,
                          sinusoidal_laurent, sinusoidal_zeta, square_g, square_zeta, staircase_zeta,
                          thin_annulus_casimir, thin_annulus_zeta)
from densities import make_density
from pertzeta import cutoff_casimir, laurent_fit
from specfun import rectangle_lattice_zeta, riemann_zeta
from utils import DomainError


def green_trace(density):
    """Z(1) of a Dirichlet string, ∫ Σ(x)(L² − x²)/2L dx."""
    L = density.half_width
    points = list(density.breakpoints) if density.breakpoints else None
    return integrate.quad(lambda x: float(density(x)) * (L ** 2 - x ** 2) / (2 * L), -L, L,
                          points=points, limit=2000, epsabs=0, epsrel=1e-12)[0]


def test_periodic_sum_rule_is_dirichlet_neumann_mean(piecewise_params):
    dd = piecewise_sumrule1('DD', piecewise_params)
    nn = piecewise_sumrule1('NN', piecewise_params)
    assert piecewise_sumrule1('PP', piecewise_params) == pytest.approx((dd + nn) / 4, rel=1e-13)


@pytest.mark.parametrize('bc', ['DD', 'NN', 'DN', 'ND', 'PP'])
def test_piecewise_first_order_matches_exact_sum_rule(bc):
    p = PiecewiseParams.from_invariants(1.0, 1 / 3, 1e-4)
    assert piecewise_zeta(bc, 1.0, p).real == pytest.approx(piecewise_sumrule1(bc, p), rel=1e-6)


def test_piecewise_dirichlet_sum_rule_against_quadrature(piecewise_params):
    density = piecewise_params.to_density()
    assert piecewise_sumrule1('DD', piecewise_params) == pytest.approx(green_trace(density), rel=1e-10)


def test_piecewise_casimir_is_half_the_zeta(piecewise_params):
    z = piecewise_zeta('DD', -0.5, piecewise_params)
    assert z.pole_order == 0
    assert 0.5 * z.real == pytest.approx(piecewise_casimir('DD', piecewise_params), rel=1e-10)


def test_piecewise_pole_and_errors(piecewise_params):
    z = piecewise_zeta('DD', 0.5, piecewise_params)
    assert z.pole_order == 1
    assert z.residue == pytest.approx(piecewise_params.alpha / (2 * math.pi))
    with pytest.raises(DomainError):
        piecewise_zeta('DP', 1.0, piecewise_params)
    with pytest.raises(DomainError):
        piecewise_casimir('XX', piecewise_params)


@pytest.mark.parametrize('s', [1, 2, 3])
def test_sinusoidal_zeta_matches_exact_sums(s):
    exact = sinusoidal_exact_sums(0.3)
    assert sinusoidal_zeta(s, 0.3).real == pytest.approx(exact[s], rel=1e-11)


def test_sinusoidal_pole_at_casimir_point():
    eta = 0.3
    z = sinusoidal_zeta(-0.5, eta)
    assert z.pole_order == 1
    assert z.residue == pytest.approx(math.pi * eta ** 2 / 128)
    lau = sinusoidal_laurent(eta)
    assert lau.coeff_0 == pytest.approx(z.real)
    # the ζ(2s) contribution is regular at -1/2
    assert sinusoidal_laurent(0.0).coeff_0 == pytest.approx(-math.pi / 12, rel=1e-12)


def test_dirichlet_plus_neumann_of_homogeneous_string(homogeneous_string):
    assert dd_plus_nn_zeta(1.0, homogeneous_string).real == pytest.approx(1 / 3, rel=1e-13)
    pole = dd_plus_nn_zeta(0.5, homogeneous_string)
    assert pole.pole_order == 1


def test_divergence_classification(sinusoidal_string):
    smooth = divergence_check(sinusoidal_string)
    assert smooth.finite
    assert smooth.order is None
    assert smooth.residue == 0.0
    osc = divergence_check(make_density('oscillating', {'eta': 0.3, 'eps_bar': 2 / 101}))
    assert not osc.finite
    assert osc.order == 1
    borg = divergence_check(make_density('borg', {'alpha': 0.5}))
    assert not borg.finite and borg.order == 1


def test_oscillating_residue_is_the_endpoint_jump():
    eta, eps_bar = 0.3, 2 / 101
    density = make_density('oscillating', {'eta': eta, 'eps_bar': eps_bar})
    lau = oscillating_laurent(eta, eps_bar)
    assert lau.coeff_minus1 == pytest.approx(divergence_residue(density, sigma_bar=2.0), rel=1e-8)
    z = oscillating_zeta(-0.5, eta, eps_bar)
    assert z.pole_order == 1
    assert z.residue == pytest.approx(lau.coeff_minus1)


def test_oscillating_sum_rule_against_quadrature():
    eta, eps_bar = 0.3, 2 / 101
    density = make_density('oscillating', {'eta': eta, 'eps_bar': eps_bar})
    assert oscillating_zeta(1.0, eta, eps_bar).real == pytest.approx(green_trace(density), rel=1e-8)


def test_resonant_oscillation_is_rejected():
    with pytest.raises(DomainError):
        oscillating_zeta(1.0, 0.3, 0.5)


def test_staircase_sum_rule_against_quadrature():
    params = {'N': 8, 'eta': 0.3, 'eps_bar': 0.3, 'L': 0.5}
    density = make_density('staircase', params)
    value = staircase_zeta(1.0, 0.3, 0.3, L=0.5, N=8)
    assert value.real == pytest.approx(green_trace(density), rel=1e-8)
    assert staircase_zeta(-0.5, 0.3, 0.3, N=8).pole_order == 0
    with pytest.raises(DomainError):
        staircase_zeta(1.0, 0.3, 0.3, N=1)


def test_fourier_sum_rule_against_quadrature():
    params = {'a': [0.2, -0.1], 'b': [0.05], 'Delta': 0.3, 'L': 0.5, 'M': 1.0}
    density = make_density('fourier_periodic', params)
    assert fourier_sumrule1([0.2, -0.1], 0.3) == pytest.approx(green_trace(density), rel=1e-10)
    with pytest.raises(DomainError):
        fourier_sumrule1([0.2], 0.0)


def test_square_zeta_regular_value():
    value = square_zeta(2.0, 1.0).real
    assert value == pytest.approx(0.069707, rel=1e-4)
    assert value == pytest.approx(rectangle_lattice_zeta(2.0, 2.0, 2.0).real, rel=1e-10)
    assert value == pytest.approx(kirsten_zeta_c(2.0, 2.0, 2.0).real, rel=1e-10)


def test_square_zeta_pole_at_one():
    z = square_zeta(1.0, 1.0)
    assert z.pole_order == 1
    assert z.residue == pytest.approx(1 / math.pi)
    assert z.real == pytest.approx(z.residue * square_g(1.0))
    lau = laurent_fit(lambda x: square_zeta(x, 1.0), 1.0)
    assert lau.coeff_minus1 == pytest.approx(1 / math.pi, rel=1e-6)
    assert lau.coeff_0 == pytest.approx(z.real, rel=1e-6)


def test_g_of_undeformed_and_constant_drums():
    assert deformed_square_g(0.0) == pytest.approx(square_g(1.0))
    assert deformed_square_g(0.1) < square_g(1.0)
    density = make_density('constant', {'value': 2.0, 'L': 1.0, 'dim': 2})
    assert domain_g(density, levels=(8, 16, 32)) == pytest.approx(square_g(1.0) + math.log(2.0))


@pytest.mark.parametrize('r', [0.3, 0.7])
def test_annulus_delta_z1_methods_agree(r):
    assert annulus_delta_z1(r, 'beta') == pytest.approx(annulus_delta_z1(r, 'csch'), rel=1e-10)
    with pytest.raises(DomainError):
        annulus_delta_z1(r, 'spline')


def test_thin_annulus_errors():
    with pytest.raises(DomainError):
        thin_annulus_zeta('DD', 2.0, 0.95)
    with pytest.raises(DomainError):
        thin_annulus_zeta('DP', 2.0, 1.5)
    with pytest.raises(DomainError):
        thin_annulus_casimir('TEM', 0.95)
    te, tm = thin_annulus_casimir('TE', 0.95), thin_annulus_casimir('TM', 0.95)
    assert thin_annulus_casimir('EM', 0.95) == pytest.approx(te + tm)


def test_cylinder_casimir_is_finite():
    result = cylinder_casimir(0.95)
    assert result.closed_form == pytest.approx(-math.pi ** 3 / (360 * 0.05 ** 3))
    assert math.isfinite(result.numeric)
    assert set(result.parts) == {'DP', 'NP'}
    with pytest.raises(DomainError):
        cylinder_casimir(1.0)


@pytest.mark.parametrize('bc', ['DD', 'NN', 'DN', 'ND', 'PP'])
def test_cutoff_regularisation_reproduces_piecewise_casimir(bc):
    p = PiecewiseParams.from_invariants(1.0, 1 / 3, 1e-3)
    density = p.to_density()
    fit = cutoff_casimir(density, BasisSpec(1, density.half_width, bc))
    assert fit.finite_part == pytest.approx(piecewise_casimir(bc, p), abs=1e-6)


def test_thin_annulus_electromagnetic_limit():
    r = 0.99
    expected = -riemann_zeta(3.0).real / (4 * (1 - r) ** 2)
    assert thin_annulus_casimir('EM', r) == pytest.approx(expected, rel=0.02)


@pytest.mark.slow
@pytest.mark.parametrize('r', [0.995, 0.999])
def test_cylinder_casimir_thin_shell_limit(r):
    result = cylinder_casimir(r)
    assert result.numeric * (1 - r) ** 3 == pytest.approx(-math.pi ** 3 / 360, rel=0.01)
