"""Closed-form thermodynamics of both limits and the first-order boundary.

Everything is per spin and dimensionless (J = 1).  The frozen/condensed
branch uses the freezing temperature forced by s(e) = ln2 - e**2, i.e.
T_c = 1/(2*sqrt(ln2)).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import BracketError, DomainError

LOG2 = math.log(2.0)

#: Critical energy density: entropy vanishes at -sqrt(ln 2).
E0_DENSITY = -math.sqrt(LOG2)

#: Freezing temperature of the classical model, 1/T_c = 2*sqrt(ln 2).
T_C = 1.0 / (2.0 * math.sqrt(LOG2))

#: Zero-temperature transition field.
GAMMA_C0 = math.sqrt(LOG2)


def entropy_density(e: float) -> float:
    """ln2 - e**2 for |e| <= sqrt(ln2); no levels exist beyond that."""
    if abs(e) > math.sqrt(LOG2):
        raise DomainError(f"no configurations at energy density {e!r} (|e| > sqrt(ln 2))")
    return LOG2 - e * e


def classical_free_energy(T: float) -> float:
    """Free energy per spin of the zero-field model.

    Frozen below T_C at -sqrt(ln2); -1/(4T) - T*ln2 above.  Continuous at T_C.
    """
    if T < 0:
        raise DomainError(f"temperature must be >= 0, got {T!r}")
    if T <= T_C:
        return -math.sqrt(LOG2)
    return -1.0 / (4.0 * T) - T * LOG2


def _log_cosh(x: float) -> float:
    # overflow-safe: log cosh x = |x| + log1p(exp(-2|x|)) - log 2
    a = abs(x)
    return a + math.log1p(math.exp(-2.0 * a)) - LOG2


def paramagnetic_free_energy(T: float, gamma: float) -> float:
    """Free energy per spin of n independent spins in a transverse field.

    -T*ln2 - T*log cosh(gamma/T); the T=0 limit is -|gamma|.
    """
    if T < 0:
        raise DomainError(f"temperature must be >= 0, got {T!r}")
    if T == 0:
        return -abs(gamma)
    return -T * LOG2 - T * _log_cosh(gamma / T)


@dataclass(frozen=True)
class PhasePoint:
    """One point of the first-order boundary: field gamma_c at temperature T."""

    temperature: float
    gamma_c: float
    frozen: bool  # True on the T < T_C branch


def phase_boundary(T: float, tol: float = 1e-10) -> PhasePoint:
    """Field at which the ordered and transverse-field branches cross.

    Bisects f_para(T, gamma) - f_classical(T) on [1e-6, max(4, 4T)].  The
    branch difference is continuous and strictly decreasing in gamma with
    |slope| <= 1, so a final bracket of width tol guarantees both
    |gamma - gamma_c| <= tol and |f_para - f_classical| <= tol.
    """
    if T < 0:
        raise DomainError(f"temperature must be >= 0, got {T!r}")
    if tol <= 0:
        raise DomainError(f"tolerance must be > 0, got {tol!r}")
    f_cl = classical_free_energy(T)
    lo, hi = 1e-6, max(4.0, 4.0 * T)

    def diff(gamma: float) -> float:
        return paramagnetic_free_energy(T, gamma) - f_cl

    dlo, dhi = diff(lo), diff(hi)
    if not (dlo > 0 > dhi):
        raise BracketError(
            f"branch crossing not bracketed on [{lo}, {hi}] at T={T}: "
            f"diff({lo})={dlo:.6g}, diff({hi})={dhi:.6g}"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if diff(mid) > 0:
            lo = mid
        else:
            hi = mid
    return PhasePoint(temperature=T, gamma_c=0.5 * (lo + hi), frozen=T < T_C)
