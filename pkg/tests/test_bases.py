import math

import numpy as np
import pytest
from scipy import integrate

from bases import (BasisSpec, ModeIndex, assemble, borg_moment, diagonal_values,
                   eigenfunction, eigenvalue, enumerate_modes, homogeneous_zeta,
                   matrix_element, mode_eigenvalues)
from densities import make_density, mass
from utils import DomainError


def test_basis_spec_validation():
    with pytest.raises(DomainError):
        BasisSpec(1, 0.5, 'XX')
    with pytest.raises(DomainError):
        BasisSpec(2, 1.0, 'NN')
    with pytest.raises(DomainError):
        BasisSpec(3, 1.0, 'DD')
    assert BasisSpec(2, 1.0, 'DP').half_width_y == pytest.approx(math.pi)
    assert BasisSpec(2, 1.0, 'DD').half_width_y == pytest.approx(1.0)


@pytest.mark.parametrize('bc', ['DD', 'NN', 'DN', 'ND', 'PP'])
def test_string_bases_are_orthonormal(bc):
    L = 0.7
    basis = BasisSpec(1, L, bc)
    modes = enumerate_modes(basis, 3)
    gram = np.empty((len(modes), len(modes)))
    for i, a in enumerate(modes):
        for j, b in enumerate(modes):
            gram[i, j] = integrate.quad(lambda x: eigenfunction(basis, a, x) * eigenfunction(basis, b, x),
                                        -L, L, limit=200, epsabs=1e-13)[0]
    assert np.allclose(gram, np.eye(len(modes)), atol=1e-11)


def test_boundary_conditions():
    L = 0.5
    dd = BasisSpec(1, L, 'DD')
    dn = BasisSpec(1, L, 'DN')
    nd = BasisSpec(1, L, 'ND')
    h = 1e-6
    for n in (1, 2, 5):
        idx = ModeIndex(n)
        assert abs(eigenfunction(dd, idx, -L)) < 1e-13
        assert abs(eigenfunction(dd, idx, L)) < 1e-13
        assert abs(eigenfunction(dn, idx, -L)) < 1e-13
        slope = (eigenfunction(dn, idx, L) - eigenfunction(dn, idx, L - h)) / h
        assert abs(slope) < 1e-3 * n ** 2
        assert abs(eigenfunction(nd, idx, L)) < 1e-13


def test_dirichlet_eigenvalues_and_modes():
    basis = BasisSpec(1, 0.5, 'DD')
    for n in (1, 3, 7):
        assert eigenvalue(basis, ModeIndex(n)) == pytest.approx(n ** 2 * math.pi ** 2)
        assert eigenfunction(basis, ModeIndex(n), 0.1) == pytest.approx(
            math.sqrt(2) * math.sin(n * math.pi * 0.6), abs=1e-14)
    assert mode_eigenvalues(basis, 4) == pytest.approx(math.pi ** 2 * np.array([1, 4, 9, 16]))
    with pytest.raises(DomainError):
        eigenvalue(basis, ModeIndex(0))


def test_zero_modes_lead_neumann_and_periodic():
    nn = enumerate_modes(BasisSpec(1, 0.5, 'NN'), 4)
    assert nn[0] == ModeIndex(0)
    pp = mode_eigenvalues(BasisSpec(1, 0.5, 'PP'), 2)
    assert pp == pytest.approx([0.0, 4 * math.pi ** 2, 4 * math.pi ** 2,
                                16 * math.pi ** 2, 16 * math.pi ** 2])
    nn_eps = mode_eigenvalues(BasisSpec(1, 0.5, 'NN'), 4)
    assert nn_eps == pytest.approx(math.pi ** 2 * np.array([0, 1, 4, 9, 16]))


def test_two_dimensional_flat_order():
    basis = BasisSpec(2, 1.0, 'DD')
    modes = enumerate_modes(basis, (3, 2))
    assert len(modes) == 6
    assert modes[1] == ModeIndex(2, 1, 1)
    assert modes[3] == ModeIndex(1, 2, 1)
    eps = mode_eigenvalues(basis, (3, 2))
    assert eps[3] == pytest.approx(eigenvalue(basis, modes[3]))


@pytest.mark.parametrize('bc', ['DD', 'NN', 'DN', 'PP'])
def test_constant_density_gives_scaled_identity(bc):
    density = make_density('constant', {'value': 2.5, 'L': 0.5})
    entries, _, modes, prov = assemble(density, BasisSpec(1, 0.5, bc), 6)
    assert prov == 'closed_form'
    assert np.allclose(entries, 2.5 * np.eye(len(modes)), atol=1e-13)


def test_matrix_element_and_diagonal_agree_with_assembly(sinusoidal_string):
    for bc in ('DD', 'NN'):
        basis = BasisSpec(1, 0.5, bc)
        entries, _, modes, _ = assemble(sinusoidal_string, basis, 12)
        assert np.allclose(diagonal_values(sinusoidal_string, basis, 12), np.diag(entries), atol=1e-14)
        assert matrix_element(sinusoidal_string, basis, modes[1], modes[4]) == pytest.approx(
            entries[1, 4], abs=1e-14)
        assert np.allclose(entries, entries.T)


def test_sinusoidal_elements_against_quadrature(sinusoidal_string, dd_string):
    n, m = ModeIndex(1), ModeIndex(2)
    direct = integrate.quad(lambda x: sinusoidal_string(x) * eigenfunction(dd_string, n, x)
                            * eigenfunction(dd_string, m, x), -0.5, 0.5, epsabs=1e-14)[0]
    assert matrix_element(sinusoidal_string, dd_string, n, m) == pytest.approx(direct, abs=1e-13)
    assert matrix_element(sinusoidal_string, dd_string, n, m, method='quadrature') == pytest.approx(
        direct, abs=1e-12)


def test_borg_moment_zero_frequency():
    alpha = 0.5
    assert borg_moment(alpha, 0).real == pytest.approx(mass(make_density('borg', {'alpha': alpha})),
                                                       rel=1e-14)
    assert borg_moment(0.0, 0) == 1.0


def test_borg_moment_against_quadrature():
    alpha, q = 0.5, 3.0
    f = lambda y: (1 + alpha) ** 2 / (1 + alpha * y) ** 4
    re = integrate.quad(lambda y: f(y) * math.cos(q * math.pi * y), 0, 1, epsabs=1e-14)[0]
    im = integrate.quad(lambda y: f(y) * math.sin(q * math.pi * y), 0, 1, epsabs=1e-14)[0]
    value = borg_moment(alpha, q)
    assert value.real == pytest.approx(re, abs=1e-12)
    assert value.imag == pytest.approx(im, abs=1e-12)


def test_borg_diagonal_switches_to_asymptotics(dd_string):
    density = make_density('borg', {'alpha': 0.5})
    exact = diagonal_values(density, dd_string, 300, exact_limit=300)
    mixed = diagonal_values(density, dd_string, 300, exact_limit=150)
    assert np.allclose(mixed[150:], exact[150:], rtol=0, atol=1e-12)


def test_homogeneous_zeta_closed_forms():
    assert homogeneous_zeta(BasisSpec(1, 0.5, 'DD'), 1).real == pytest.approx(1 / 6)
    assert homogeneous_zeta(BasisSpec(1, 0.5, 'NN'), 1).real == pytest.approx(1 / 6)
    assert homogeneous_zeta(BasisSpec(1, 0.5, 'DN'), 1).real == pytest.approx(0.5)
    assert homogeneous_zeta(BasisSpec(1, 0.5, 'PP'), 1).real == pytest.approx(1 / 12)
    assert homogeneous_zeta(BasisSpec(1, 0.5, 'DD'), 0.5).is_pole


@pytest.mark.parametrize('bc', ['DD', 'NN', 'DN', 'PP'])
def test_homogeneous_zeta_against_mode_sum(bc):
    basis = BasisSpec(1, 0.8, bc)
    eps = mode_eigenvalues(basis, 20000)
    eps = eps[eps > 0]
    direct = math.fsum(eps ** -2.0)
    assert homogeneous_zeta(basis, 2).real == pytest.approx(direct, rel=1e-10)


def test_homogeneous_zeta_drum_with_periodic_side():
    basis = BasisSpec(2, 1.0, 'DP')
    eps = mode_eigenvalues(basis, (1000, 500))
    direct = math.fsum(eps ** -2.0)
    assert homogeneous_zeta(basis, 2).real == pytest.approx(direct, rel=5e-5)


def test_single_string_elements(sinusoidal_string, dd_string):
    # the perturbation η sin couples neighbouring modes only, with weight η/2
    assert abs(matrix_element(sinusoidal_string, dd_string, ModeIndex(1), ModeIndex(2))) == \
        pytest.approx(0.05, abs=1e-14)
    assert matrix_element(sinusoidal_string, dd_string, ModeIndex(2), ModeIndex(5)) == \
        pytest.approx(0.0, abs=1e-14)
    for n, m in [(1, 3), (2, 7), (5, 6), (4, 4)]:
        closed = matrix_element(sinusoidal_string, dd_string, ModeIndex(n), ModeIndex(m))
        quad = matrix_element(sinusoidal_string, dd_string, ModeIndex(n), ModeIndex(m),
                              method='quadrature')
        assert closed == pytest.approx(quad, abs=1e-10)
