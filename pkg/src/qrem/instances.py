"""Disorder realizations: 2**n i.i.d. Gaussian level energies, variance n/2.

Energies are never stored on disk.  A realization is keyed by (n, seed) and
regenerated on demand from a counter-based Philox stream, with Gaussians
produced by the inverse-CDF transform.  This makes instances bit-exact across
platforms and trivially splittable across ensemble workers.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import ndtri

from .errors import CapacityError, DimensionError, DomainError

#: Version tag of the (stream, transform) scheme below.  Bump on any change
#: that alters generated energies; persisted headers refuse to load across
#: incompatible versions.
RNG_VERSION = "philox4x64-ndtri/1"

#: Largest supported spin count.  2**26 doubles is 512 MiB per energy array;
#: beyond that the state-vector workloads are out of reach anyway.
MAX_SPINS = 26

_U64 = np.uint64
_MASK64 = (1 << 64) - 1


def _philox(seed: int, n: int) -> np.random.Philox:
    """Philox-4x64 stream keyed by (seed, n); basis index = stream position."""
    key = np.array([seed & _MASK64, n], dtype=_U64)
    return np.random.Philox(counter=0, key=key)


def gaussian_energies(n: int, seed: int) -> np.ndarray:
    """The 2**n level energies for realization (n, seed): N(0, n/2) i.i.d.

    Raw 64-bit words are mapped to open-interval uniforms (2**-53 grid,
    half-offset so 0 and 1 are unreachable) and then through the inverse
    normal CDF.  Pure function of (n, seed).
    """
    raw = _philox(seed, n).random_raw(1 << n)
    u = ((raw >> _U64(11)).astype(np.float64) + 0.5) * 2.0**-53
    return ndtri(u) * math.sqrt(n / 2.0)


@dataclass(frozen=True)
class RemInstance:
    """One disorder realization: n spins, 2**n level energies (J = 1 units).

    ``seed`` is None for hand-crafted energy tables, which cannot be
    regenerated and therefore cannot be persisted as headers.
    """

    n: int
    seed: int | None
    energies: np.ndarray

    @property
    def dim(self) -> int:
        return self.energies.shape[0]

    @property
    def ground_index(self) -> int:
        return int(np.argmin(self.energies))

    @property
    def ground_energy(self) -> float:
        return float(self.energies.min())


def sample_instance(n: int, seed: int) -> RemInstance:
    """Draw realization (n, seed).  Bit-exact, platform independent."""
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= MAX_SPINS:
        raise CapacityError(f"spin count must satisfy 1 <= n <= {MAX_SPINS}, got {n!r}")
    seed = int(seed) & _MASK64
    return RemInstance(n=int(n), seed=seed, energies=gaussian_energies(int(n), seed))


def instance_from_energies(energies) -> RemInstance:
    """Wrap an explicit energy table (testing/CLI hook; not regenerable)."""
    arr = np.asarray(energies, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 2 or arr.size & (arr.size - 1):
        raise DimensionError(f"energy table must have 2**n entries, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError("energy table contains non-finite values")
    n = arr.size.bit_length() - 1
    return RemInstance(n=n, seed=None, energies=arr.copy())


def ensemble_seed(master_seed: int, n: int, index: int) -> int:
    """Per-member seed for ensemble position (n, index) under a master seed."""
    ss = np.random.SeedSequence(entropy=[int(master_seed) & _MASK64, int(n), int(index)])
    return int(ss.generate_state(1, _U64)[0])


def save_header(instance: RemInstance, path) -> None:
    """Persist {n, seed, rng_version}; energies are regenerated, never stored."""
    if instance.seed is None:
        raise DomainError("hand-crafted instances have no seed and cannot be persisted")
    payload = {"n": instance.n, "seed": instance.seed, "rng_version": RNG_VERSION}
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def load_header(path) -> RemInstance:
    """Regenerate the instance described by a header written by save_header."""
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    version = payload.get("rng_version")
    if version != RNG_VERSION:
        raise DomainError(
            f"header generated under rng_version {version!r}; this build implements {RNG_VERSION!r}"
        )
    return sample_instance(payload["n"], payload["seed"])


def export_energies_raw(instance: RemInstance, path) -> None:
    """Raw export: little-endian float64 energies in basis order."""
    instance.energies.astype("<f8").tofile(Path(path))
