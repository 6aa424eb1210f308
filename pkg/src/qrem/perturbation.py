"""Closed-form level predictions and the two-level avoided-crossing model.

Both expansions are asymptotic in n with O(1/n) leftovers; they are meant to
frame the exact spectra, not replace them.  gamma is treated as a field
magnitude throughout (the crossing condition is read as gamma* = |E0|/n).
"""
from __future__ import annotations

import math

from .errors import DomainError, NumericError

#: Relative clamp for round-off in the two-level radicand.
_RADICAND_RTOL = 1e-9


def rem_branch(e_level: float, n: int, gamma: float) -> float:
    """Perturbed extensive level from the zero-field side: E + n*gamma**2/E.

    Valid for extensive levels |E| = O(n); an exactly zero level has no such
    branch.
    """
    if e_level == 0.0:
        raise DomainError("branch formula needs an extensive (nonzero) level energy")
    return e_level + n * gamma * gamma / e_level


def qp_branch(n: int, gamma: float, k: int = 0) -> float:
    """Perturbed k-flip transverse level: -gamma*(n - 2k) - 1/(2*gamma).

    The unperturbed transverse levels are -gamma*(n - 2k), k = 0..n; the
    whole degenerate multiplet shares the -1/(2*gamma) shift.
    """
    if gamma <= 0.0:
        raise DomainError(f"field must be > 0 (1/(2*gamma) term), got {gamma!r}")
    if not 0 <= k <= n:
        raise DomainError(f"flip count must satisfy 0 <= k <= n={n}, got {k}")
    return -gamma * (n - 2 * k) - 0.5 / gamma


def two_level_gap(e0: float, n: int, gamma: float) -> float:
    """Gap of the two-state crossing model between the localized ground state
    and the uniform superposition, with squared overlap 2**(-n).

    Delta**2 = (n*gamma - e0)**2 - 4*[-e0*n*gamma + e0*n*gamma*2**(-n)],
    evaluated in the rearranged form (n*gamma + e0)**2 - 4*e0*n*gamma*2**(-n):
    near the crossing the quoted grouping cancels ~2**n digits, while the
    rearrangement is a sum of nonnegative terms.  The radicand is clamped at
    zero within round-off.
    """
    if e0 >= 0.0:
        raise DomainError(f"classical ground energy must be < 0, got {e0!r}")
    if gamma < 0.0:
        raise DomainError(f"field must be >= 0, got {gamma!r}")
    u = n * gamma
    overlap_sq = 2.0 ** (-n)
    radicand = (u + e0) ** 2 - 4.0 * e0 * u * overlap_sq
    scale = (u - e0) ** 2
    if radicand < -_RADICAND_RTOL * scale:
        raise NumericError(
            f"two-level radicand {radicand:.3e} negative beyond round-off (scale {scale:.3e})"
        )
    return math.sqrt(max(radicand, 0.0))


def minimal_gap_prediction(e0: float, n: int) -> tuple[float, float]:
    """(gamma*, delta_min) of the avoided crossing: (|e0|/n, 2|e0|*2**(-n/2))."""
    if e0 >= 0.0:
        raise DomainError(f"classical ground energy must be < 0, got {e0!r}")
    return abs(e0) / n, 2.0 * abs(e0) * 2.0 ** (-0.5 * n)


def branch_crossing(e0: float, n: int, *, tol: float = 1e-12) -> float:
    """Field where the two ground-level branch predictions intersect.

    Solves rem_branch(e0) = qp_branch(k=0) by bisection; the intersection sits
    O(1/n) above |e0|/n and is the analytic estimate of the transition field
    for one realization.
    """
    if e0 >= 0.0:
        raise DomainError(f"classical ground energy must be < 0, got {e0!r}")

    def diff(g: float) -> float:
        return rem_branch(e0, n, g) - qp_branch(n, g, 0)

    gamma_star = abs(e0) / n
    lo, hi = 0.25 * gamma_star, 4.0 * gamma_star
    dlo, dhi = diff(lo), diff(hi)
    if not (dlo < 0 < dhi):
        raise DomainError(
            f"branch crossing not bracketed on [{lo:.6g}, {hi:.6g}] "
            f"(diff: {dlo:.3g}, {dhi:.3g})"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if diff(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
