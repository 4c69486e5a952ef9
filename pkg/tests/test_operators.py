import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from quantum.errors import ValidationError
from quantum.operators import (
    DensityMatrix,
    HermitianOperator,
    canonical_state,
    commutator_norm,
    log_partition_function,
    project_diagonal,
    spectral_decompose,
)
from tests.helpers import random_density, random_hermitian

TOL = 1e-12
MAX_DIM = 6

seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)
dims = st.integers(min_value=1, max_value=MAX_DIM)


@seed(1)
@settings(max_examples=200, deadline=None)
@given(instance=seeds, dim=dims)
def test_spectral_decomposition_reconstructs(instance, dim):
    rng = np.random.default_rng(instance)
    H = random_hermitian(rng, dim)
    d = spectral_decompose(H)
    scale = max(1.0, np.abs(H.matrix).max())
    assert np.allclose(d.reconstruct(), H.matrix, atol=1e-10 * scale)
    assert np.allclose(sum(d.projectors), np.eye(dim), atol=1e-10)
    assert np.all(np.diff(d.eigenvalues) > 0)
    for i, P in enumerate(d.projectors):
        assert np.allclose(P @ P, P, atol=1e-10)
        for Q in d.projectors[i + 1:]:
            assert np.allclose(P @ Q, 0, atol=1e-10)


def test_degenerate_levels_are_grouped():
    d = spectral_decompose(np.diag([1.0, 2.0, 1.0]))
    assert np.allclose(d.eigenvalues, [1.0, 2.0])
    assert d.degeneracies == (2, 1)
    assert np.isclose(np.trace(d.projectors[0]).real, 2)


def test_near_degenerate_levels_chain_into_one():
    d = spectral_decompose(np.diag([0.0, 1.0, 1.0 + 1e-13]))
    assert d.levels == 2
    assert np.isclose(d.eigenvalues[1], 1.0 + 5e-14, atol=1e-14)


def test_group_tolerance_can_split():
    d = spectral_decompose(np.diag([0.0, 1.0, 1.0 + 1e-6]), group_tol=1e-9)
    assert d.levels == 3


def test_non_hermitian_rejected():
    with pytest.raises(ValidationError, match="not Hermitian"):
        HermitianOperator(np.array([[0, 1], [0, 0]]))


@pytest.mark.parametrize("matrix, message", [
    (np.diag([0.6, 0.6]), "trace"),
    (np.diag([1.2, -0.2]), "eigenvalue"),
    (np.array([[0.5, 1], [0, 0.5]]), "not Hermitian"),
    (np.ones((2, 3)) / 2, "square"),
])
def test_density_matrix_validation(matrix, message):
    with pytest.raises(ValidationError, match=message):
        DensityMatrix(matrix)


def test_json_pairs_parse_to_complex():
    H = HermitianOperator.from_json([[[1, 0], [0, -1]], [[0, 1], 2]])
    assert H.matrix[0, 1] == -1j
    assert H.matrix[1, 1] == 2
    assert HermitianOperator.from_json(H.to_json()).matrix.tolist() == H.matrix.tolist()


def test_json_rejects_bad_entry():
    with pytest.raises(ValidationError, match=r"hamiltonian\[0\]\[1\]"):
        HermitianOperator.from_json([[1, "x"], [0, 1]])


def test_canonical_state_of_half_sigma_z():
    rho = canonical_state(np.diag([0.5, -0.5]), beta=1.0)
    expected = np.diag([np.exp(-0.5), np.exp(0.5)]) / (2 * np.cosh(0.5))
    assert np.allclose(rho.matrix, expected, atol=TOL)


def test_canonical_state_infinite_temperature():
    rho = canonical_state(np.diag([0.0, 3.0, 7.0]), beta=0.0)
    assert np.allclose(rho.matrix, np.eye(3) / 3, atol=TOL)


def test_canonical_state_survives_large_beta():
    rho = canonical_state(np.diag([0.0, 1.0]), beta=1e4)
    assert np.allclose(rho.matrix, np.diag([1.0, 0.0]), atol=TOL)


def test_log_partition_function_counts_degeneracy():
    H = np.diag([0.0, 1.0, 1.0])
    assert np.isclose(log_partition_function(H, 2.0), np.log(1 + 2 * np.exp(-2.0)), atol=TOL)


@seed(2)
@settings(max_examples=100, deadline=None)
@given(instance=seeds, dim=st.integers(min_value=2, max_value=MAX_DIM))
def test_project_diagonal_dephases(instance, dim):
    rng = np.random.default_rng(instance)
    H = random_hermitian(rng, dim)
    rho = random_density(rng, dim)
    d = spectral_decompose(H)
    dephased = project_diagonal(rho, d)
    assert commutator_norm(H, dephased) < 1e-9
    for P in d.projectors:
        assert np.isclose(np.trace(P @ dephased.matrix), np.trace(P @ rho.matrix), atol=1e-12)


def test_commutator_norm():
    assert commutator_norm(np.diag([1.0, 2.0]), np.diag([3.0, 4.0])) == 0
    sx, sz = np.array([[0, 1], [1, 0]]), np.diag([1, -1])
    assert np.isclose(commutator_norm(sx, sz), np.sqrt(8))
