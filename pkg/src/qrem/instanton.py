"""Large-p closed forms: static saddle, multi-jump action, interface cost.

The action is per spin (intensive); only surface_cost_gap multiplies by n to
produce the extensive interface cost G and its gap scale e**G = 2**(-n/2).
The basis-change overlap is |<x|z>| = 1/sqrt(2), so each jump contributes
ln(1/sqrt(2)) = -ln(2)/2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError
from .thermo import LOG2

#: Per-jump cost ln|<x|z>| = -ln(2)/2.
JUMP_COST = -0.5 * LOG2

SQRT_LOG2 = math.sqrt(LOG2)


@dataclass(frozen=True)
class InstantonParams:
    """Arguments of the multi-jump action: fraction theta of imaginary time in
    the ordered state, inverse temperature beta, coupling j, field gamma, and
    an even jump count k."""

    theta: float
    beta: float
    j: float
    gamma: float
    k: int
    n: int = 1

    def __post_init__(self):
        if not 0.0 <= self.theta <= 1.0:
            raise DomainError(f"theta must lie in [0, 1], got {self.theta!r}")
        if self.beta <= 0:
            raise DomainError(f"beta must be > 0, got {self.beta!r}")
        if self.j <= 0:
            raise DomainError(f"coupling must be > 0, got {self.j!r}")
        if self.gamma < 0:
            raise DomainError(f"field must be >= 0, got {self.gamma!r}")
        if self.k < 0 or self.k % 2:
            raise DomainError(f"jump count must be even and >= 0, got {self.k!r}")
        if self.n < 1:
            raise DomainError(f"spin count must be >= 1, got {self.n!r}")


def static_m(theta: float, beta: float, j: float) -> float:
    """Replica-block saddle value 2*sqrt(2)/(theta*beta*j)."""
    if theta <= 0 or beta <= 0 or j <= 0:
        raise DomainError(f"static saddle needs positive inputs, got {(theta, beta, j)!r}")
    return 2.0 * math.sqrt(2.0) / (theta * beta * j)


def instanton_action(p: InstantonParams) -> float:
    """-beta*f per spin for a k-jump trajectory:

    theta*sqrt(ln2)*beta*j/2 + (1-theta)*beta*gamma + k*ln(1/sqrt(2)).
    """
    return p.theta * SQRT_LOG2 * p.beta * p.j / 2.0 + (1.0 - p.theta) * p.beta * p.gamma + p.k * JUMP_COST


def surface_cost_gap(n: int) -> tuple[float, float]:
    """(G, e**G) = (-n*ln2/2, 2**(-n/2)): interface cost and gap scale."""
    if n < 1:
        raise DomainError(f"spin count must be >= 1, got {n!r}")
    g = -0.5 * n * LOG2
    return g, 2.0 ** (-0.5 * n)


@dataclass(frozen=True)
class ThetaChoice:
    """Maximizer of the k=0 action over theta, with its action value."""

    theta: float
    action: float
    degenerate: bool


def balanced_theta_action(beta: float, j: float, gamma: float) -> ThetaChoice:
    """Maximize the k=0 action over theta.

    The action is linear in theta, so the maximizer is theta=1 when
    sqrt(ln2)*j/2 > gamma and theta=0 otherwise; at the coexistence field
    sqrt(ln2)*j/2 every theta ties and the result is flagged degenerate
    (theta reported as 1/2).
    """
    if beta <= 0 or j <= 0 or gamma < 0:
        raise DomainError(f"need beta, j > 0 and gamma >= 0, got {(beta, j, gamma)!r}")
    ordered_rate = SQRT_LOG2 * j / 2.0
    scale = max(ordered_rate, gamma, 1.0)
    if abs(ordered_rate - gamma) <= 1e-12 * scale:
        theta = 0.5
        degenerate = True
    elif ordered_rate > gamma:
        theta = 1.0
        degenerate = False
    else:
        theta = 0.0
        degenerate = False
    action = instanton_action(InstantonParams(theta=theta, beta=beta, j=j, gamma=gamma, k=0))
    return ThetaChoice(theta=theta, action=action, degenerate=degenerate)
