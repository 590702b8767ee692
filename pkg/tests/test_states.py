import numpy as np
import pytest

from covsep import (
    DensityMatrix,
    gell_mann_basis,
    maximally_entangled,
    mix_with_white_noise,
    partial_trace,
    pauli_basis,
    pure_state,
    purity,
    random_density_matrix,
)
from covsep.errors import ValidationError

from conftest import max_mixed


SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def test_pauli_basis_layout():
    basis = pauli_basis()
    obs = basis.observables
    assert np.allclose(obs[0], np.eye(2) / np.sqrt(2))
    assert np.allclose(obs[1], SX / np.sqrt(2))
    assert np.allclose(obs[2], SY / np.sqrt(2))
    assert np.allclose(obs[3], SZ / np.sqrt(2))


def test_pauli_normalization_and_orthogonality():
    obs = pauli_basis().observables
    assert np.trace(obs[1] @ obs[1]).real == pytest.approx(1, abs=1e-14)
    assert np.trace(obs[1] @ obs[2]) == pytest.approx(0, abs=1e-14)


def test_pauli_sum_of_squares():
    obs = pauli_basis().observables
    total = np.einsum("kab,kbc->ac", obs, obs)
    assert np.allclose(total, 2 * np.eye(2), atol=1e-12)


def test_gell_mann_matches_pauli():
    assert np.array_equal(gell_mann_basis(2).observables, pauli_basis().observables)


def test_gell_mann_counts():
    basis = gell_mann_basis(3)
    assert basis.observables.shape == (9, 3, 3)
    traces = [abs(np.trace(m)) for m in basis.observables]
    assert traces[0] == pytest.approx(np.sqrt(3), abs=1e-12)
    assert np.allclose(traces[1:], 0, atol=1e-12)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_gell_mann_gram_and_square_sum(d):
    obs = gell_mann_basis(d).observables
    gram = np.einsum("iab,jba->ij", obs, obs).real
    assert np.abs(gram - np.eye(d * d)).max() < 1e-10
    total = np.einsum("kab,kbc->ac", obs, obs)
    assert np.allclose(total, d * np.eye(d), atol=1e-10)


def test_gell_mann_rejects_small_dim():
    with pytest.raises(ValidationError):
        gell_mann_basis(1)


def test_partial_trace_product(rng):
    a = random_density_matrix(2, 2, seed=1).reduced("A")
    b = random_density_matrix(3, 2, seed=2).reduced("B")
    rho = DensityMatrix(2, 2, np.kron(a, b))
    assert np.allclose(partial_trace(rho, "A"), a, atol=1e-12)
    assert np.allclose(partial_trace(rho, "B"), b, atol=1e-12)


def test_partial_trace_bell(bell):
    assert np.allclose(partial_trace(bell, "A"), np.eye(2) / 2, atol=1e-12)
    assert np.allclose(partial_trace(bell, "B"), np.eye(2) / 2, atol=1e-12)


def test_partial_trace_is_state(rng):
    for da, db in ((2, 2), (2, 3), (3, 3)):
        rho = random_density_matrix(da, db, seed=rng)
        for keep, d in (("A", da), ("B", db)):
            red = partial_trace(rho, keep)
            assert red.shape == (d, d)
            assert np.trace(red).real == pytest.approx(1, abs=1e-12)
            assert np.linalg.eigvalsh(red)[0] >= -1e-12


def test_purity_range():
    assert purity(np.eye(3) / 3) == pytest.approx(1 / 3, abs=1e-12)
    v = np.array([1, 0, 0])
    assert purity(np.outer(v, v)) == pytest.approx(1, abs=1e-12)


def test_purity_werner_half_reduction():
    from covsep import werner_state

    red = werner_state(0.5).reduced("A")
    assert purity(red) == pytest.approx(0.5, abs=1e-12)


def test_random_density_matrix_deterministic():
    r1 = random_density_matrix(2, 2, 4, seed=1)
    r2 = random_density_matrix(2, 2, 4, seed=1)
    assert np.array_equal(r1.matrix, r2.matrix)


def test_random_density_matrix_rank_one_pure(rng):
    rho = random_density_matrix(2, 3, rank=1, seed=rng)
    assert purity(rho.matrix) == pytest.approx(1, abs=1e-10)


def test_random_density_matrix_positive(rng):
    for _ in range(20):
        rho = random_density_matrix(3, 3, seed=rng)
        assert np.linalg.eigvalsh(rho.matrix)[0] >= -1e-12


def test_random_density_matrix_bad_rank():
    with pytest.raises(ValidationError):
        random_density_matrix(2, 2, rank=5, seed=0)


def test_white_noise_endpoints(bell):
    assert np.allclose(mix_with_white_noise(bell, 0.0).matrix, np.eye(4) / 4)
    assert np.allclose(mix_with_white_noise(bell, 1.0).matrix, bell.matrix)


def test_white_noise_bell_half_spectrum(bell):
    w = np.linalg.eigvalsh(mix_with_white_noise(bell, 0.5).matrix)
    assert np.allclose(np.sort(w), [1 / 8, 1 / 8, 1 / 8, 5 / 8], atol=1e-12)


def test_white_noise_exact_trace_hermiticity(rng):
    rho = random_density_matrix(2, 3, seed=rng)
    mixed = mix_with_white_noise(rho, 0.37)
    assert mixed.matrix.trace() == pytest.approx(1, abs=1e-15)
    assert np.array_equal(mixed.matrix, mixed.matrix.conj().T)


def test_white_noise_range_check(bell):
    with pytest.raises(ValidationError):
        mix_with_white_noise(bell, 1.5)


def test_density_matrix_validation():
    with pytest.raises(ValidationError, match="trace"):
        DensityMatrix(2, 2, np.eye(4))
    with pytest.raises(ValidationError, match="negative eigenvalue"):
        DensityMatrix(2, 2, np.diag([1.5, -0.5, 0, 0]).astype(complex))
    bad = np.eye(4, dtype=complex) / 4
    bad = bad.copy()
    bad[0, 1] = 0.1
    with pytest.raises(ValidationError, match="Hermitian"):
        DensityMatrix(2, 2, bad)
    with pytest.raises(ValidationError, match="dimensions"):
        DensityMatrix(1, 4, np.eye(4) / 4)


def test_maximally_entangled_reductions():
    for d in (2, 3):
        rho = maximally_entangled(d)
        assert np.allclose(rho.reduced("A"), np.eye(d) / d, atol=1e-12)
        assert purity(rho.matrix) == pytest.approx(1, abs=1e-12)


def test_pure_state_normalizes():
    rho = pure_state([2, 0, 0, 0], 2, 2)
    assert rho.matrix[0, 0] == pytest.approx(1, abs=1e-12)
