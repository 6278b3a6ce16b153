import math

import numpy as np
import pytest

from continuation import sinusoidal_exact_sums
from pertzeta import (DiagonalTail, ZetaValue, check_imaginary, cutoff_casimir, divided_exp,
                      divided_power, heat_kernel, laurent_fit, make_tail, mellin_zeta,
                      z_diag, z_first_order, z_heat_series, z_perturbative, z_second_order)
from table_manager import build_table, build_w_table
from utils import ConfigManager, DivergenceError, DomainError


def test_divided_power_and_exp_limits():
    a = np.array([2.0, 3.0, 5.0])
    assert divided_power(a, a, 2.5) == pytest.approx(2.5 * a ** 1.5)
    assert divided_power(4.0, 1.0, 2.0) == pytest.approx(5.0)
    assert divided_power(1.0 + 1e-12, 1.0, -3.0) == pytest.approx(-3.0, rel=1e-9)
    t = 0.3
    assert divided_exp(a, a, t) == pytest.approx(-t * np.exp(-t * a))
    assert divided_exp(1.0, 2.0, t) == pytest.approx((math.exp(-t) - math.exp(-2 * t)) / -1.0)
    assert divided_exp(1.0, 2.0, t) == pytest.approx(divided_exp(2.0, 1.0, t))


def test_make_tail_reads_config(homogeneous_string, dd_string):
    manager = ConfigManager()
    manager.set('truncation.tail_one_d', 500)
    tail = make_tail(homogeneous_string, dd_string, config=manager)
    assert tail.extended_level == 500
    assert tail.sigma_bar == pytest.approx(1.0)


def test_homogeneous_string_z_diag(homogeneous_string, dd_string):
    table = build_table(homogeneous_string, dd_string, 40)
    bare = z_diag(1, table)
    assert bare.real < 1 / 6
    full = z_diag(1, table, make_tail(homogeneous_string, dd_string, extended_level=40))
    assert full.real == pytest.approx(1 / 6, rel=1e-13)
    assert full.details['tail'] > 0
    assert z_first_order(2, table, DiagonalTail(1.0)).real == pytest.approx(1 / 90, rel=1e-13)
    assert abs(z_second_order(2, table).real) < 1e-20


def test_direct_sums_refuse_the_continued_region(homogeneous_string, dd_string):
    table = build_table(homogeneous_string, dd_string, 10)
    with pytest.raises(DivergenceError):
        z_diag(0.5, table)
    with pytest.raises(DivergenceError):
        z_perturbative(-0.5, table)


def test_sinusoidal_second_order_matches_exact_sum(sinusoidal_string, dd_string):
    table = build_table(sinusoidal_string, dd_string, 80)
    tail = make_tail(sinusoidal_string, dd_string, extended_level=2000)
    value = z_perturbative(2, table, tail)
    exact = sinusoidal_exact_sums(0.1)[2]
    assert value.real == pytest.approx(exact, abs=5e-7)
    assert value.details['diag'] + value.details['second_order'] == pytest.approx(value.real)
    assert value.method == 'series'
    assert z_perturbative(2, table, tail, order=1).real == pytest.approx(value.details['diag'])


def test_heat_kernel_is_decreasing(sinusoidal_string, dd_string):
    w = build_w_table(sinusoidal_string, dd_string, 20)
    k1 = heat_kernel(0.01, w).value
    k2 = heat_kernel(0.1, w).value
    assert k1 > k2 > 0
    assert heat_kernel(0.1, w, order=1).order == 'first'
    with pytest.raises(DomainError):
        heat_kernel(0.0, w)
    with pytest.raises(DomainError):
        heat_kernel(0.1, build_table(sinusoidal_string, dd_string, 20))


def test_mellin_transform_reproduces_heat_series(sinusoidal_string, dd_string):
    w = build_w_table(sinusoidal_string, dd_string, 20)
    series = z_heat_series(2, w)
    mellin = mellin_zeta(2, w)
    assert mellin.real == pytest.approx(series.real, rel=1e-8)
    with pytest.raises(DivergenceError):
        mellin_zeta(0.5, w)


def test_heat_series_of_homogeneous_string(homogeneous_string, dd_string):
    w = build_w_table(homogeneous_string, dd_string, 30)
    assert z_heat_series(2, w, tail=True).real == pytest.approx(1 / 90, rel=1e-10)


def test_cutoff_finite_part_of_homogeneous_string(homogeneous_string, dd_string):
    fit = cutoff_casimir(homogeneous_string, dd_string)
    assert fit.removable
    assert fit.finite_part == pytest.approx(-math.pi / 24, abs=1e-6)
    assert fit.divergent_coeffs[-2] == pytest.approx(math.pi / 2, rel=1e-6)
    assert abs(fit.divergent_coeffs[-1]) < 1e-6
    with pytest.raises(DomainError):
        cutoff_casimir(homogeneous_string, dd_string, a_values=[0.1, 0.2])


def test_laurent_fit_recovers_coefficients():
    fn = lambda s: 2 / (s - 1) + 3 + 4 * (s - 1) + 5 * (s - 1) ** 2
    lau = laurent_fit(fn, 1.0)
    assert lau.coeff_minus1 == pytest.approx(2.0, rel=1e-9)
    assert lau.coeff_0 == pytest.approx(3.0, rel=1e-9)
    assert lau.coeff_1 == pytest.approx(4.0, rel=1e-6)
    assert lau(1.1) == pytest.approx(2 / 0.1 + 3 + 0.4)
    wrapped = laurent_fit(lambda s: ZetaValue(s, fn(s)), 1.0)
    assert wrapped.coeff_0 == pytest.approx(3.0, rel=1e-9)
    with pytest.raises(DomainError):
        laurent_fit(fn, 1.0, deltas=(1e-2, 3e-3))


def test_check_imaginary_reports_relative_size():
    assert check_imaginary(1.0 + 1e-12j) < 1e-11
    assert check_imaginary(1.0 + 1e-3j) == pytest.approx(1e-3, rel=1e-5)


def test_zeta_value_serialises():
    d = ZetaValue(2.0, 0.5 + 0j, method='closed_form').to_dict()
    assert d == {'s': 2.0, 're': 0.5, 'im': 0.0, 'pole_order': 0, 'residue': None,
                 'trunc_error': 0.0, 'method': 'closed_form'}
