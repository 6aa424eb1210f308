"""Matrix-free H = diag(E) - gamma * F on the n-bit hypercube.

F is the single-spin-flip adjacency: F[a, b] = 1 iff a and b differ in one
bit.  The minus sign fixes the gauge in which the uniform superposition is
the ground state of the transverse term, with eigenvalue -gamma*n, so basis
overlaps with the large-field ground state are +2**(-n/2).  All spectra are
gauge invariant; only off-diagonal signs depend on this choice.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import CapacityError, DimensionError
from .instances import RemInstance

try:
    import numba

    @numba.njit(cache=True, parallel=True)
    def _apply_kernel(E, x, gamma, nbits, out):  # pragma: no cover - jitted
        for a in numba.prange(x.shape[0]):
            acc = E[a] * x[a]
            for i in range(nbits):
                acc -= gamma * x[a ^ (1 << i)]
            out[a] = acc

    @numba.njit(cache=True, parallel=True)
    def _flip_kernel(x, nbits, out):  # pragma: no cover - jitted
        for a in numba.prange(x.shape[0]):
            acc = x[a ^ 1]
            for i in range(1, nbits):
                acc += x[a ^ (1 << i)]
            out[a] = acc

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False


def _apply_numpy(E, x, gamma, nbits, out):
    """Reference kernel: n strided flips.  Same math, slower at large n."""
    np.multiply(E, x, out=out)
    t = x.reshape((2,) * nbits)
    o = out.reshape((2,) * nbits)
    for axis in range(nbits):
        o -= gamma * np.flip(t, axis=axis)
    return out


def flip_sum(x: np.ndarray, n: int) -> np.ndarray:
    """Action of the bare flip adjacency: y[a] = sum_i x[a ^ 2**i].

    This is the transverse term without its -gamma prefactor; its spectrum is
    {n - 2k} with binomial multiplicities.
    """
    x = np.ascontiguousarray(x)
    if x.shape != (1 << n,):
        raise DimensionError(f"expected state of length {1 << n}, got shape {x.shape}")
    out = np.empty_like(x)
    if _HAVE_NUMBA:
        _flip_kernel(x, n, out)
    else:  # pragma: no cover
        out[:] = 0.0
        t = x.reshape((2,) * n)
        o = out.reshape((2,) * n)
        for axis in range(n):
            o += np.flip(t, axis=axis)
    return out


@dataclass(frozen=True)
class QuantumState:
    """Amplitudes over the 2**n computational basis states."""

    n: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.amplitudes.shape != (1 << self.n,):
            raise DimensionError(
                f"state for n={self.n} needs 2**n={1 << self.n} amplitudes, "
                f"got shape {self.amplitudes.shape}"
            )

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def overlap(self, other: "QuantumState") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def basis_probability(self, index: int) -> float:
        return float(abs(self.amplitudes[index]) ** 2)


def qp_ground_state(n: int) -> QuantumState:
    """Uniform superposition: ground state of the transverse term at -gamma*n.

    Every basis overlap equals 2**(-n/2) exactly.
    """
    if n < 1:
        raise DimensionError(f"spin count must be >= 1, got {n!r}")
    amp = np.full(1 << n, 2.0 ** (-0.5 * n))
    return QuantumState(n=n, amplitudes=amp)


@dataclass(frozen=True)
class FieldedHamiltonian:
    """Immutable pairing of a disorder realization with a field strength."""

    instance: RemInstance
    gamma: float

    @property
    def n(self) -> int:
        return self.instance.n

    @property
    def dim(self) -> int:
        return self.instance.dim

    def apply(self, x: np.ndarray) -> np.ndarray:
        return apply(self, x)

    def norm_bound(self) -> float:
        """Upper bound on the spectral radius: max|E| + n*|gamma|."""
        return float(np.abs(self.instance.energies).max()) + self.n * abs(self.gamma)


def apply(h: FieldedHamiltonian, x: np.ndarray) -> np.ndarray:
    """y[a] = E[a]*x[a] - gamma * sum_i x[a ^ 2**i].  O(n * 2**n), matrix-free.

    Accepts real or complex vectors; the output dtype follows the input.
    """
    x = np.ascontiguousarray(x)
    if x.shape != (h.dim,):
        raise DimensionError(f"expected state of length {h.dim}, got shape {x.shape}")
    if x.dtype not in (np.float64, np.complex128):
        x = x.astype(np.complex128 if np.iscomplexobj(x) else np.float64)
    out = np.empty_like(x)
    if _HAVE_NUMBA:
        _apply_kernel(h.instance.energies, x, float(h.gamma), h.n, out)
    else:  # pragma: no cover
        _apply_numpy(h.instance.energies, x, float(h.gamma), h.n, out)
    return out


#: dense_matrix is an oracle for tests; 2**12 x 2**12 doubles = 128 MiB.
DENSE_MAX_SPINS = 12


def dense_matrix(h: FieldedHamiltonian) -> np.ndarray:
    """Explicit real-symmetric 2**n x 2**n matrix (small-n oracle)."""
    if h.n > DENSE_MAX_SPINS:
        raise CapacityError(f"dense construction capped at n <= {DENSE_MAX_SPINS}, got n={h.n}")
    dim = h.dim
    mat = np.zeros((dim, dim))
    idx = np.arange(dim)
    mat[idx, idx] = h.instance.energies
    for i in range(h.n):
        mat[idx, idx ^ (1 << i)] = -h.gamma
    return mat


def save_state(state: QuantumState, path, *, gamma: float, time: float) -> None:
    """Snapshot: interleaved little-endian (re, im) float64 pairs + JSON sidecar."""
    path = Path(path)
    pairs = np.empty((state.dim, 2))
    pairs[:, 0] = state.amplitudes.real
    pairs[:, 1] = np.imag(state.amplitudes)
    pairs.astype("<f8").tofile(path)
    sidecar = {"n": state.n, "gamma": gamma, "time": time}
    path.with_suffix(path.suffix + ".json").write_text(
        json.dumps(sidecar, indent=2) + "\n", encoding="utf-8"
    )


def load_state(path) -> tuple[QuantumState, dict]:
    """Read back a snapshot written by save_state; returns (state, sidecar)."""
    path = Path(path)
    sidecar = json.loads(path.with_suffix(path.suffix + ".json").read_text(encoding="utf-8"))
    n = int(sidecar["n"])
    pairs = np.fromfile(path, dtype="<f8").reshape(1 << n, 2)
    amplitudes = pairs[:, 0] + 1j * pairs[:, 1]
    return QuantumState(n=n, amplitudes=amplitudes), sidecar
