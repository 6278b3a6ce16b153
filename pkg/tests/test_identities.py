import math

import numpy as np
import pytest

from bases import BasisSpec, enumerate_modes
from continuation import sinusoidal_exact_sums
from identities import (BORG_BASIS, IdentityCheck, borg_heat_identity, borg_heat_mellin_closed,
                        borg_isospectrality, borg_w_closed, borg_w_identity_check, borg_xi,
                        borg_xi_closed, borg_z1_identity, piecewise_suite, q_matrix,
                        run_suites, sinusoidal_suite, sumrule_battery,
                        zeta_series_representation)
from densities import make_density
from table_manager import build_table, w_matrix_element
from utils import DivergenceError, DomainError


def test_identity_check_bookkeeping():
    check = IdentityCheck('x', 1.0, 1.0 + 1e-10, 1e-9, params={'a': 1})
    assert check.passed
    assert check.as_tuple() == (1.0, 1.0 + 1e-10, pytest.approx(1e-10))
    d = check.to_dict()
    assert d['passed'] is True and d['params'] == {'a': 1}
    assert not IdentityCheck('nan', float('nan'), 0.0, 1.0).passed


def test_borg_w_elements_reduce_to_eigenvalues():
    idx = np.arange(1, 6)
    w = borg_w_closed(0.0, idx[:, None], idx[None, :])
    assert np.allclose(w, np.diag((idx * math.pi) ** 2), atol=1e-12)


def test_borg_w_first_order_coupling():
    alpha = 1e-6
    w12 = borg_w_closed(alpha, np.array([1]), np.array([2]))[0]
    assert w12 / alpha == pytest.approx(-128 / 9, rel=1e-4)


@pytest.mark.parametrize('alpha', [0.2, 0.5])
def test_borg_w_table_matches_closed_form(alpha):
    assert borg_w_identity_check(alpha).passed


def test_borg_z1_identity():
    check = borg_z1_identity(0.5, N=20000)
    assert check.passed
    assert check.rhs == pytest.approx(1 / 6)


def test_borg_xi_identity():
    # both sides vanish identically at s = 1
    assert borg_xi_closed(1.0) == pytest.approx(0.0, abs=1e-15)
    assert borg_xi(2.0).passed
    with pytest.raises(DivergenceError):
        borg_xi(0.5)


@pytest.mark.parametrize('t', [0.1, 1.0])
def test_borg_heat_identity(t):
    assert borg_heat_identity(t).passed


def test_zeta_series_representation():
    z = zeta_series_representation(2.0, 2000)
    assert z.real == pytest.approx(math.pi ** 2 / 6, rel=1e-6)
    assert z.method == 'pair_series'
    with pytest.raises(DivergenceError):
        zeta_series_representation(1.0)


@pytest.mark.slow
def test_borg_string_is_isospectral():
    check = borg_isospectrality(0.5)
    assert check.passed


def test_q_matrix_of_homogeneous_string(homogeneous_string, dd_string):
    table = build_table(homogeneous_string, dd_string, 5)
    n = np.arange(1, 6)
    assert np.allclose(q_matrix(table), np.diag(1 / (n * math.pi) ** 2))


def test_sinusoidal_sum_rules(sinusoidal_string, dd_string):
    exact = sinusoidal_exact_sums(0.1)
    first = sumrule_battery(sinusoidal_string, dd_string, 1, 60)
    assert first.trace_value == pytest.approx(exact[1], abs=1e-12)
    second = sumrule_battery(sinusoidal_string, dd_string, 2, 60)
    assert second.trace_value == pytest.approx(exact[2], abs=1e-10)
    assert second.oracle_value == pytest.approx(exact[2], rel=1e-5)
    assert second.frobenius is not None
    with pytest.raises(DomainError):
        sumrule_battery(sinusoidal_string, dd_string, 1.5, 60)
    with pytest.raises(DomainError):
        sumrule_battery(sinusoidal_string, BasisSpec(2, 1.0, 'DD'), 1, 8)


def test_piecewise_suite_passes():
    assert all(check.passed for check in piecewise_suite())


@pytest.mark.slow
def test_sinusoidal_suite_passes():
    assert all(check.passed for check in sinusoidal_suite())


def test_run_suites():
    checks = run_suites(['piecewise'])
    assert len(checks) == 2
    with pytest.raises(DomainError):
        run_suites(['nope'])


def test_heat_identity_transform_closed_form():
    assert borg_heat_mellin_closed(1.0) == pytest.approx(-math.pi ** 6 / 1920, rel=1e-13)
    with pytest.raises(DivergenceError):
        borg_heat_mellin_closed(0.5)


def test_single_w_element_matches_closed_form():
    density = make_density('borg', {'alpha': 0.5})
    modes = enumerate_modes(BORG_BASIS, 3)
    element = w_matrix_element(density, BORG_BASIS, modes[0], modes[1])
    assert element == pytest.approx(borg_w_closed(0.5, np.array([1]), np.array([2]))[0], rel=1e-9)
