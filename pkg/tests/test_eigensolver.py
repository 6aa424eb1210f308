import math

import numpy as np
import pytest

from qrem import (
    FieldedHamiltonian,
    dense_matrix,
    instance_from_energies,
    lowest_eigenpairs,
    sample_instance,
)
from qrem.errors import DomainError


def test_two_level_closed_form():
    a = 0.8
    h = FieldedHamiltonian(instance_from_energies([a, -a]), 0.6)
    r = lowest_eigenpairs(h, 2, 1e-12)
    expected = math.sqrt(a * a + 0.36)
    assert r.eigenvalues == pytest.approx([-expected, expected], abs=1e-12)
    assert r.all_converged


def test_zero_field_returns_sorted_energies_exactly():
    inst = sample_instance(10, 3)
    r = lowest_eigenpairs(FieldedHamiltonian(inst, 0.0), 5, 1e-12)
    assert np.array_equal(r.eigenvalues, np.sort(inst.energies)[:5])
    assert np.all(r.residuals == 0.0)


def test_matches_dense_oracle():
    for seed in range(4):
        inst = sample_instance(10, seed)
        h = FieldedHamiltonian(inst, 0.5 + 0.12 * seed)
        dense = np.linalg.eigvalsh(dense_matrix(h))[:4]
        r = lowest_eigenpairs(h, 4, 1e-10)
        assert r.all_converged
        assert np.abs(r.eigenvalues - dense).max() <= 1e-8


def test_variational_bound():
    inst = sample_instance(9, 7)
    h = FieldedHamiltonian(inst, 0.7)
    exact0 = np.linalg.eigvalsh(dense_matrix(h))[0]
    r = lowest_eigenpairs(h, 1, 1e-10)
    assert r.eigenvalues[0] >= exact0 - 1e-10


def test_restart_history_monotone():
    inst = sample_instance(12, 5)
    r = lowest_eigenpairs(FieldedHamiltonian(inst, 0.75), 2, 1e-11)
    hist = r.restart_history
    assert all(b <= a + 1e-10 for a, b in zip(hist, hist[1:]))


def test_near_degenerate_adjacent_doublet_resolved():
    # two equal minima one flip apart: the field splits them by ~2*gamma and
    # both pairs must certify
    energies = np.concatenate([[-5.0, -5.0], np.linspace(0.5, 3.0, 254)])
    inst = instance_from_energies(energies)
    h = FieldedHamiltonian(inst, 0.05)
    r = lowest_eigenpairs(h, 2, 1e-10)
    assert r.all_converged
    dense = np.linalg.eigvalsh(dense_matrix(h))[:2]
    assert np.abs(r.eigenvalues - dense).max() <= 1e-9
    gap = r.eigenvalues[1] - r.eigenvalues[0]
    assert gap == pytest.approx(2 * 0.05, abs=0.01)


def test_near_degenerate_antipodal_doublet_resolved():
    # two equal minima n flips apart: splitting is high order in gamma, so the
    # pair is nearly exactly degenerate; no ghost may replace the second state
    energies = np.linspace(0.5, 3.0, 256)
    energies[0] = -5.0
    energies[255] = -5.0
    inst = instance_from_energies(energies)
    h = FieldedHamiltonian(inst, 0.05)
    r = lowest_eigenpairs(h, 2, 1e-10)
    assert r.all_converged
    dense = np.linalg.eigvalsh(dense_matrix(h))[:2]
    assert np.abs(r.eigenvalues - dense).max() <= 1e-9
    assert r.eigenvalues[1] - r.eigenvalues[0] < 1e-3
    overlap = abs(np.dot(r.eigenvectors[:, 0], r.eigenvectors[:, 1]))
    assert overlap <= 1e-8


def test_eigenvectors_orthonormal():
    inst = sample_instance(11, 2)
    r = lowest_eigenpairs(FieldedHamiltonian(inst, 0.66), 4, 1e-10)
    gram = r.eigenvectors.T @ r.eigenvectors
    assert np.abs(gram - np.eye(4)).max() <= 1e-8


def test_residuals_are_true_residuals():
    inst = sample_instance(10, 9)
    h = FieldedHamiltonian(inst, 0.52)
    r = lowest_eigenpairs(h, 3, 1e-10)
    for i in range(3):
        v = r.eigenvectors[:, i]
        res = np.linalg.norm(h.apply(v) - r.eigenvalues[i] * v)
        assert res == pytest.approx(r.residuals[i], rel=1e-6, abs=1e-14)


def test_non_convergence_is_flagged_not_raised():
    inst = sample_instance(12, 1)
    h = FieldedHamiltonian(inst, 0.8)
    r = lowest_eigenpairs(h, 2, 1e-14, max_iter=1)
    assert not r.all_converged
    assert np.all(r.residuals > 0)


def test_warm_start_vector_and_block():
    inst = sample_instance(11, 6)
    h = FieldedHamiltonian(inst, 0.7)
    cold = lowest_eigenpairs(h, 2, 1e-10, return_basis=True)
    h2 = FieldedHamiltonian(inst, 0.72)
    warm_vec = lowest_eigenpairs(h2, 2, 1e-10, v0=cold.eigenvectors[:, 0])
    warm_blk = lowest_eigenpairs(h2, 2, 1e-10, v0=cold.basis_vectors[:2])
    ref = lowest_eigenpairs(h2, 2, 1e-10)
    assert warm_vec.all_converged and warm_blk.all_converged
    assert np.abs(warm_vec.eigenvalues - ref.eigenvalues).max() <= 1e-8
    assert np.abs(warm_blk.eigenvalues - ref.eigenvalues).max() <= 1e-8


def test_determinism():
    inst = sample_instance(12, 8)
    h = FieldedHamiltonian(inst, 0.81)
    a = lowest_eigenpairs(h, 2, 1e-10)
    b = lowest_eigenpairs(h, 2, 1e-10)
    assert np.array_equal(a.eigenvalues, b.eigenvalues)
    assert np.array_equal(a.residuals, b.residuals)
    assert a.iterations == b.iterations


def test_basis_block_shape():
    inst = sample_instance(10, 4)
    r = lowest_eigenpairs(FieldedHamiltonian(inst, 0.5), 2, 1e-9, return_basis=True)
    assert r.basis_vectors.shape == (6, 1024)  # k + max(4, k) retained rows
    assert r.basis_values.shape == (6,)
    gram = r.basis_vectors @ r.basis_vectors.T
    assert np.abs(gram - np.eye(6)).max() <= 1e-8


def test_argument_validation():
    h = FieldedHamiltonian(sample_instance(5, 0), 0.3)
    with pytest.raises(DomainError):
        lowest_eigenpairs(h, 0, 1e-8)
    with pytest.raises(DomainError):
        lowest_eigenpairs(h, 33, 1e-8)
    with pytest.raises(DomainError):
        lowest_eigenpairs(h, 1, 0.0)
    with pytest.raises(DomainError):
        lowest_eigenpairs(h, 1, 1e-8, v0=np.ones(7))


def test_full_subspace_small_dimension():
    # dim <= 64 goes through the exact dense path
    inst = sample_instance(4, 2)
    h = FieldedHamiltonian(inst, 0.4)
    r = lowest_eigenpairs(h, 16, 1e-12)
    dense = np.linalg.eigvalsh(dense_matrix(h))
    assert np.abs(r.eigenvalues - dense).max() <= 1e-10
