import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dptlab.errors import DimensionError, MemoryBoundError
from dptlab.fock import annihilation, number, parity
from dptlab.lindblad import (
    LindbladModel,
    add_dissipator,
    dissipator_apply,
    dissipator_superoperator,
    liouvillian_apply,
    sparse_superoperator,
    superoperator_elements,
    unvec,
    vec,
    vectorize,
)
from dptlab.models import KerrConfig, LaserConfig, kerr_model, laser_model

from conftest import random_operator, random_state


def random_model(C, rng, n_jumps=2):
    H = random_operator(C, rng)
    return LindbladModel(H + H.conj().T, tuple(random_operator(C, rng) for _ in range(n_jumps)))


def brute_force_matrix(model):
    """Column j = vec of the generator applied to the j-th column-stacked dyad."""
    C = model.cutoff
    M = np.zeros((C * C, C * C), dtype=complex)
    for j in range(C * C):
        X = unvec(np.eye(C * C)[j], C)
        out = -1j * (model.hamiltonian @ X - X @ model.hamiltonian)
        for L in model.jumps:
            out = out + dissipator_apply(L, X)
        M[:, j] = vec(out)
    return M


def test_vec_is_column_stacking():
    X = np.arange(6).reshape(2, 3)
    assert list(vec(X)) == [0, 3, 1, 4, 2, 5]
    Y = np.arange(9).reshape(3, 3)
    assert np.array_equal(unvec(vec(Y), 3), Y)


def test_dissipator_of_annihilation_on_fock_state():
    C = 5
    rho = np.zeros((C, C))
    rho[2, 2] = 1
    out = dissipator_apply(annihilation(C), rho)
    expected = np.zeros((C, C))
    expected[1, 1] = 2
    expected[2, 2] = -2
    assert np.allclose(out, expected)


def test_dense_superoperator_matches_brute_force(rng):
    model = random_model(4, rng)
    assert np.allclose(vectorize(model), brute_force_matrix(model), atol=1e-12)


def test_sparse_matches_dense_on_both_models():
    for model in (laser_model(LaserConfig(A=1.25, N=5, eta=0.2, omega=0.3, C=9)),
                  kerr_model(KerrConfig(G=3, N=3, zeta=0.2, C=9))):
        dense = vectorize(model)
        assert np.max(np.abs(sparse_superoperator(model).toarray() - dense)) < 1e-12
        assert np.max(np.abs(model.sparse_generator.toarray() - dense)) < 1e-12


def test_superoperator_elements_match_dense(rng):
    model = random_model(5, rng)
    C = model.cutoff
    pairs = np.array([(m, n) for n in range(C) for m in range(C)])
    assert np.allclose(superoperator_elements(model, pairs, pairs), vectorize(model), atol=1e-12)


def test_liouvillian_apply_matches_vectorized_and_batches(rng):
    model = random_model(6, rng)
    rhos = np.stack([random_state(6, rng) for _ in range(3)])
    batched = liouvillian_apply(model, rhos)
    M = vectorize(model)
    for rho, out in zip(rhos, batched):
        assert np.allclose(vec(out), M @ vec(rho), atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 7), st.integers(0, 2**32 - 1))
def test_generator_preserves_trace_and_hermiticity(C, seed):
    rng = np.random.default_rng(seed)
    model = random_model(C, rng)
    out = liouvillian_apply(model, random_state(C, rng))
    scale = max(1.0, np.abs(out).max())
    assert abs(np.trace(out)) < 1e-10 * scale
    assert np.max(np.abs(out - out.conj().T)) < 1e-10 * scale


def test_dissipator_superoperator_matches_apply(rng):
    L = random_operator(4, rng)
    rho = random_state(4, rng)
    assert np.allclose(dissipator_superoperator(L) @ vec(rho), vec(dissipator_apply(L, rho)))


def test_adding_zero_operator_leaves_generator_unchanged():
    model = kerr_model(KerrConfig(G=3, N=3, C=8))
    padded = add_dissipator(model, np.zeros((8, 8)))
    assert len(padded.jumps) == len(model.jumps) + 1
    assert np.max(np.abs(vectorize(padded) - vectorize(model))) <= 1e-15


def test_unitary_jump_cancels_exactly_on_its_invariant_dyads():
    # parity maps even-offset dyads to themselves, so its dissipator must vanish there
    model = LindbladModel(np.zeros((6, 6)), (np.sqrt(0.2) * parity(6),))
    M = model.sparse_generator.toarray()
    m, n = np.divmod(np.arange(36), 6)
    even = (m - n) % 2 == 0
    assert np.all(M[np.ix_(even, even)] == 0)


def test_model_validation(rng):
    with pytest.raises(ValueError, match="Hermitian"):
        LindbladModel(random_operator(3, rng))
    with pytest.raises(DimensionError):
        LindbladModel(np.eye(3), (np.eye(4),))
    with pytest.raises(ValueError):
        LindbladModel(np.eye(3), symmetry="SU2")
    with pytest.raises(DimensionError):
        liouvillian_apply(LindbladModel(np.eye(3)), np.eye(4))
    with pytest.raises(DimensionError):
        dissipator_apply(np.eye(3), np.eye(2))


def test_vectorize_refuses_large_cutoffs(monkeypatch):
    model = LindbladModel(number(30), (annihilation(30),))
    with pytest.raises(MemoryBoundError, match="sector"):
        vectorize(model, max_cutoff=20)
    monkeypatch.setenv("DPTLAB_MEM_MB", "1")
    with pytest.raises(MemoryBoundError):
        vectorize(model)
