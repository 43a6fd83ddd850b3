import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import poisson

from dptlab.errors import DimensionError, InsufficientCutoffError, InvalidCutoffError, InvalidStateError
from dptlab.fock import (
    DensityMatrix,
    annihilation,
    coherent_state,
    coherent_vector,
    creation,
    displacement,
    expectation,
    fock_dm,
    identity,
    number,
    parity,
    phase_rotation,
    raised_number,
)

from conftest import random_state


def test_ladder_operators_act_on_fock_states():
    C = 6
    a = annihilation(C)
    ket = np.zeros(C)
    ket[3] = 1
    assert np.allclose(a @ ket, math.sqrt(3) * np.eye(C)[2])
    assert np.allclose(creation(C) @ ket, 2 * np.eye(C)[4])
    assert np.allclose(creation(C) @ a, number(C))


def test_commutator_only_fails_at_the_top_level():
    C = 7
    a = annihilation(C)
    comm = a @ creation(C) - creation(C) @ a
    expected = np.eye(C)
    expected[-1, -1] = 1 - C
    assert np.allclose(comm, expected)


def test_raised_number_is_untruncated_a_adag():
    C = 5
    r = raised_number(C)
    assert np.allclose(np.diag(r), np.arange(1, C + 1))
    assert np.allclose(r[:-1, :-1], (annihilation(C) @ creation(C))[:-1, :-1])


def test_phase_rotation_and_parity():
    C = 8
    assert np.array_equal(parity(C), np.diag([1, -1] * 4).astype(complex))
    assert np.allclose(phase_rotation(np.pi, C), parity(C))
    U = phase_rotation(0.3, C)
    assert np.allclose(U.conj().T @ annihilation(C) @ U, np.exp(0.3j) * annihilation(C))


@pytest.mark.parametrize("C", [1, 0, 2.5, -3])
def test_invalid_cutoff(C):
    with pytest.raises(InvalidCutoffError):
        annihilation(C)
    with pytest.raises(ValueError):
        identity(C)


def test_coherent_photon_statistics_are_poissonian():
    alpha = 1.7 + 0.4j
    rho = coherent_state(alpha, 40)
    pops = np.real(np.diag(np.asarray(rho)))
    assert np.allclose(pops, poisson.pmf(np.arange(40), abs(alpha) ** 2), atol=1e-12)
    assert abs(expectation(rho, annihilation(40)) - alpha) < 1e-10


def test_coherent_state_needs_room():
    with pytest.raises(InsufficientCutoffError):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            coherent_state(3.0, 8)


def test_displacement_of_vacuum_matches_analytic_coherent_vector():
    C = 60
    for alpha in (0.5, 1.2 - 0.7j, 2.0j):
        D = displacement(alpha, C)
        got = D[:, 0]
        assert np.max(np.abs(got[:30] - coherent_vector(alpha, C)[:30])) < 1e-10


def test_displacement_warns_beyond_trusted_region():
    with pytest.warns(UserWarning):
        displacement(3.0, 20)


@settings(max_examples=25, deadline=None)
@given(st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))
def test_displacement_is_unitary_and_inverts(x, y):
    alpha = complex(x, y)
    D = displacement(alpha, 40)
    assert np.allclose(D.conj().T @ D, np.eye(40), atol=1e-10)
    assert np.allclose(displacement(-alpha, 40) @ D, np.eye(40), atol=1e-10)


def test_density_matrix_validation(rng):
    rho = random_state(5, rng)
    dm = DensityMatrix(rho)
    assert dm.cutoff == 5
    assert 0 < dm.purity() <= 1
    with pytest.raises(InvalidStateError):
        DensityMatrix(2 * rho)
    bad = rho.copy()
    bad[0, 1] += 0.1
    with pytest.raises(InvalidStateError):
        DensityMatrix(bad)
    neg = np.diag([1.2, -0.2, 0, 0, 0])
    with pytest.raises(InvalidStateError):
        DensityMatrix(neg)
    assert DensityMatrix(neg, psd_floor=None).min_eigenvalue() == pytest.approx(-0.2)
    with pytest.raises(DimensionError):
        DensityMatrix(np.ones((2, 3)))


def test_density_matrix_is_read_only(rng):
    dm = DensityMatrix(random_state(3, rng))
    with pytest.raises(ValueError):
        dm.data[0, 0] = 1


def test_fock_dm_and_expectation():
    rho = fock_dm(3, 6)
    assert expectation(rho, number(6)) == pytest.approx(3)
    assert expectation(rho, parity(6)) == pytest.approx(-1)
    with pytest.raises(InvalidCutoffError):
        fock_dm(6, 6)
    with pytest.raises(DimensionError):
        expectation(rho, number(5))


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 12), st.integers(0, 2**32 - 1))
def test_expectation_is_trace_of_product(C, seed):
    rng = np.random.default_rng(seed)
    rho = random_state(C, rng)
    op = rng.normal(size=(C, C)) + 1j * rng.normal(size=(C, C))
    assert abs(expectation(rho, op) - np.trace(rho @ op)) < 1e-10 * max(1, np.abs(op).max() * C)
