import json
import math

import numpy as np
import pytest

from qrem import (
    FieldedHamiltonian,
    QuantumState,
    apply,
    dense_matrix,
    instance_from_energies,
    load_state,
    qp_ground_state,
    sample_instance,
    save_state,
)
from qrem.errors import CapacityError, DimensionError
from qrem.hamiltonian import _apply_numpy, flip_sum


def test_apply_explicit_two_by_two():
    # uniform-superposition gauge: off-diagonal couplings are -gamma
    h = FieldedHamiltonian(instance_from_energies([0.3, -0.7]), 0.5)
    y = apply(h, np.array([1.0, 0.0]))
    assert y == pytest.approx([0.3, -0.5], abs=1e-15)


def test_apply_zero_field_is_diagonal(rng):
    inst = sample_instance(6, 1)
    x = rng.standard_normal(64)
    y = apply(FieldedHamiltonian(inst, 0.0), x)
    assert np.array_equal(y, inst.energies * x)


def test_apply_matches_dense_matvec(rng):
    inst = sample_instance(8, 2)
    h = FieldedHamiltonian(inst, 0.73)
    mat = dense_matrix(h)
    x = rng.standard_normal(256)
    assert np.abs(apply(h, x) - mat @ x).max() <= 1e-12


def test_apply_complex_vectors(rng):
    inst = sample_instance(6, 3)
    h = FieldedHamiltonian(inst, 0.4)
    z = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    out = apply(h, z)
    assert out.dtype == np.complex128
    assert np.abs(out - (apply(h, z.real) + 1j * apply(h, z.imag))).max() <= 1e-12


def test_numba_and_numpy_kernels_agree(rng):
    inst = sample_instance(8, 9)
    h = FieldedHamiltonian(inst, 0.61)
    x = rng.standard_normal(256)
    ref = _apply_numpy(inst.energies, x, 0.61, 8, np.empty_like(x))
    assert np.abs(apply(h, x) - ref).max() <= 1e-13


def test_apply_dimension_error():
    h = FieldedHamiltonian(sample_instance(4, 0), 0.2)
    with pytest.raises(DimensionError):
        apply(h, np.ones(15))


def test_dense_structure_n1():
    h = FieldedHamiltonian(instance_from_energies([1.5, -2.5]), 0.7)
    assert np.array_equal(dense_matrix(h), np.array([[1.5, -0.7], [-0.7, -2.5]]))


def test_dense_antipodal_states_uncoupled():
    h = FieldedHamiltonian(sample_instance(2, 5), 0.9)
    mat = dense_matrix(h)
    # states differing in two bits carry no matrix element
    assert mat[0, 3] == 0.0 and mat[3, 0] == 0.0
    assert mat[1, 2] == 0.0 and mat[2, 1] == 0.0


def test_dense_hermitian_exactly():
    for n in (3, 6, 10):
        mat = dense_matrix(FieldedHamiltonian(sample_instance(n, n), 0.8))
        assert np.abs(mat - mat.T).max() == 0.0


def test_dense_capacity_guard():
    with pytest.raises(CapacityError):
        dense_matrix(FieldedHamiltonian(sample_instance(13, 0), 0.1))


def test_linearity(rng):
    h = FieldedHamiltonian(sample_instance(9, 4), 1.1)
    x = rng.standard_normal(512)
    y = rng.standard_normal(512)
    lhs = apply(h, 0.3 * x + 1.7 * y)
    rhs = 0.3 * apply(h, x) + 1.7 * apply(h, y)
    assert np.abs(lhs - rhs).max() <= 1e-12


def test_symmetry(rng):
    h = FieldedHamiltonian(sample_instance(9, 8), 0.9)
    x = rng.standard_normal(512)
    y = rng.standard_normal(512)
    assert abs(np.dot(y, apply(h, x)) - np.dot(apply(h, y), x)) <= 1e-12 * 512


def test_qp_ground_state_amplitudes():
    s = qp_ground_state(1)
    assert s.amplitudes == pytest.approx([1 / math.sqrt(2)] * 2, abs=1e-15)
    s10 = qp_ground_state(10)
    assert np.all(s10.amplitudes == 2.0**-5)
    assert s10.norm() == pytest.approx(1.0, abs=1e-12)


def test_qp_ground_state_is_flip_term_ground_vector():
    for n in (3, 8):
        flat = instance_from_energies(np.zeros(2**n))
        h = FieldedHamiltonian(flat, 0.7)
        psi = qp_ground_state(n).amplitudes
        assert np.abs(apply(h, psi) - (-0.7 * n) * psi).max() <= 1e-12


def test_flip_term_spectrum_is_binomial():
    # eigenvalues of the bare adjacency are n - 2k with multiplicity C(n, k)
    for n in (2, 5, 8):
        dim = 2**n
        cols = np.empty((dim, dim))
        e = np.zeros(dim)
        for j in range(dim):
            e[j] = 1.0
            cols[:, j] = flip_sum(e, n)
            e[j] = 0.0
        vals = np.linalg.eigvalsh(cols)
        expected = np.sort(
            np.concatenate([[n - 2 * k] * math.comb(n, k) for k in range(n + 1)])
        ).astype(float)
        assert np.abs(np.sort(vals) - expected).max() <= 1e-10


def test_norm_bound_contains_spectrum():
    inst = sample_instance(8, 6)
    h = FieldedHamiltonian(inst, 0.8)
    vals = np.linalg.eigvalsh(dense_matrix(h))
    assert vals[0] >= inst.energies.min() - 8 * 0.8 - 1e-12
    assert vals[-1] <= inst.energies.max() + 8 * 0.8 + 1e-12
    assert max(abs(vals[0]), abs(vals[-1])) <= h.norm_bound() + 1e-12


def test_quantum_state_validation():
    with pytest.raises(DimensionError):
        QuantumState(n=3, amplitudes=np.ones(7))
    s = QuantumState(n=2, amplitudes=np.full(4, 0.5))
    t = qp_ground_state(2)
    assert s.overlap(t) == pytest.approx(1.0, abs=1e-12)
    assert s.basis_probability(0) == pytest.approx(0.25, abs=1e-15)


def test_state_snapshot_roundtrip(tmp_path, rng):
    n = 5
    amp = rng.standard_normal(32) + 1j * rng.standard_normal(32)
    amp /= np.linalg.norm(amp)
    state = QuantumState(n=n, amplitudes=amp)
    path = tmp_path / "state.bin"
    save_state(state, path, gamma=0.35, time=2.5)
    sidecar = json.loads((tmp_path / "state.bin.json").read_text())
    assert sidecar == {"n": 5, "gamma": 0.35, "time": 2.5}
    raw = np.fromfile(path, dtype="<f8")
    assert raw.shape == (64,)
    assert raw[0] == amp[0].real and raw[1] == amp[0].imag
    loaded, meta = load_state(path)
    assert np.array_equal(loaded.amplitudes, amp)
    assert meta["gamma"] == 0.35
