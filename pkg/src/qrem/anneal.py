"""Time-dependent Schroedinger evolution under a decreasing field schedule.

Each step applies exp(-i*dt*H(gamma_mid)) by a truncated Taylor series run to
machine accuracy (terms added until they fall below 1e-15 of the state norm),
so unitarity is preserved to round-off and the recorded norm drift measures
integrator health rather than method error.  gamma is frozen at the step
midpoint, making the schedule discretization second order in dt.

The whole trajectory loop is compiled (adiabatic sweeps near the minimal gap
take ~1e6 steps, which pure Python cannot afford); a same-math Python path
remains as fallback and test reference.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, StepSizeError
from .eigensolver import lowest_eigenpairs
from .hamiltonian import FieldedHamiltonian
from .instances import RemInstance

#: Per-step relative cutoff for the Taylor series of the step propagator.
_TERM_CUTOFF = 1e-15
_MAX_TERMS = 80

#: Default safety factor in the step rule dt = c / (max|E| + n*gamma_start).
DT_SAFETY = 0.1

try:
    import numba

    @numba.njit(cache=True)
    def _trajectory_kernel(  # pragma: no cover - jitted
        E, psi, gamma_start, gamma_end, tau, dt, nbits, ground, mark_times, marks
    ):
        """Propagate psi in place; returns (max_drift, status).

        status: 0 ok, 1 series did not converge, 2 drift exceeded 1e-6.
        marks receives (gamma(t), |psi[ground]|**2) rows per mark time.
        """
        dim = psi.shape[0]
        term = np.empty(dim, np.complex128)
        tmp = np.empty(dim, np.complex128)
        cutoff2 = _TERM_CUTOFF * _TERM_CUTOFF
        t = 0.0
        max_drift = 0.0
        mk = 0
        while t < tau:
            step_dt = dt if tau - t > dt else tau - t
            frac = (t + 0.5 * step_dt) / tau
            gamma = gamma_start + (gamma_end - gamma_start) * frac
            for a in range(dim):
                term[a] = psi[a]
            k = 1
            while True:
                for a in range(dim):
                    acc = E[a] * term[a]
                    for i in range(nbits):
                        acc -= gamma * term[a ^ (1 << i)]
                    tmp[a] = acc
                scale = -1j * step_dt / k
                nrm2 = 0.0
                for a in range(dim):
                    v = tmp[a] * scale
                    term[a] = v
                    psi[a] += v
                    nrm2 += v.real * v.real + v.imag * v.imag
                if nrm2 <= cutoff2:
                    break
                k += 1
                if k > _MAX_TERMS:
                    return max_drift, 1
            t += step_dt
            nrm2 = 0.0
            for a in range(dim):
                nrm2 += psi[a].real * psi[a].real + psi[a].imag * psi[a].imag
            drift = abs(math.sqrt(nrm2) - 1.0)
            if drift > max_drift:
                max_drift = drift
            if max_drift > 1e-6:
                return max_drift, 2
            while mk < mark_times.shape[0] and t >= mark_times[mk] - 1e-12 * tau:
                p = psi[ground]
                marks[mk, 0] = gamma_start + (gamma_end - gamma_start) * (
                    mark_times[mk] / tau if mark_times[mk] < tau else 1.0
                )
                marks[mk, 1] = p.real * p.real + p.imag * p.imag
                mk += 1
        return max_drift, 0

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False


@dataclass(frozen=True)
class Schedule:
    """Field ramp gamma(t), t in [0, tau].  Only the linear shape exists."""

    gamma_start: float
    gamma_end: float
    tau: float
    shape: str = "linear"

    def __post_init__(self):
        if self.shape != "linear":
            raise DomainError(f"unsupported schedule shape {self.shape!r}")
        if self.gamma_start <= 0:
            raise DomainError(f"gamma_start must be > 0, got {self.gamma_start!r}")
        if self.gamma_end < 0:
            raise DomainError(f"gamma_end must be >= 0, got {self.gamma_end!r}")
        if self.gamma_end > self.gamma_start:
            raise DomainError("schedule must be non-increasing (gamma_end <= gamma_start)")
        if self.tau <= 0:
            raise DomainError(f"tau must be > 0, got {self.tau!r}")

    def gamma(self, t: float) -> float:
        if t <= 0:
            return self.gamma_start
        if t >= self.tau:
            return self.gamma_end
        frac = t / self.tau
        return self.gamma_start + (self.gamma_end - self.gamma_start) * frac


@dataclass(frozen=True)
class AnnealResult:
    """Outcome of one evolution run.

    fidelity is |<classical ground | psi(tau)>|**2; norm_drift the final
    |norm - 1|; max_norm_drift the worst drift seen along the trajectory;
    checkpoints optional (t, gamma, fidelity) triples; final_state the final
    amplitudes when requested.
    """

    schedule: Schedule
    dt: float
    fidelity: float
    norm_drift: float
    max_norm_drift: float
    steps: int
    checkpoints: tuple | None = None
    final_state: np.ndarray | None = None


def default_dt(instance: RemInstance, gamma_start: float, safety: float = DT_SAFETY) -> float:
    """Step rule dt = safety / (max|E| + n*gamma_start)."""
    scale = float(np.abs(instance.energies).max()) + instance.n * gamma_start
    return safety / scale


def _taylor_step(h: FieldedHamiltonian, psi: np.ndarray, dt: float) -> np.ndarray:
    """exp(-i*dt*H) @ psi, summed until terms vanish at working precision."""
    out = psi.copy()
    term = psi
    for k in range(1, _MAX_TERMS + 1):
        term = h.apply(term)
        term = term * (-1j * dt / k)
        out += term
        if float(np.linalg.norm(term)) <= _TERM_CUTOFF:
            return out
    raise StepSizeError(
        f"step propagator did not converge in {_MAX_TERMS} terms; "
        f"dt*|H| too large, reduce dt below {dt:.3e}"
    )


def _evolve_python(instance, schedule, dt, psi, ground, mark_times):
    """Reference trajectory loop; same stepping as the compiled kernel."""
    t = 0.0
    max_drift = 0.0
    marks = []
    mk = 0
    steps = 0
    while t < schedule.tau:
        step_dt = min(dt, schedule.tau - t)
        gamma_mid = schedule.gamma(t + 0.5 * step_dt)
        psi = _taylor_step(FieldedHamiltonian(instance, gamma_mid), psi, step_dt)
        t += step_dt
        steps += 1
        drift = abs(float(np.linalg.norm(psi)) - 1.0)
        max_drift = max(max_drift, drift)
        if max_drift > 1e-6:
            raise StepSizeError(
                f"norm drift {max_drift:.3e} exceeded 1e-6 at t={t:.6g}; reduce dt"
            )
        while mk < len(mark_times) and t >= mark_times[mk] - 1e-12 * schedule.tau:
            marks.append(
                (float(mark_times[mk]), schedule.gamma(mark_times[mk]), float(abs(psi[ground]) ** 2))
            )
            mk += 1
    return psi, max_drift, steps, marks


def evolve(
    instance: RemInstance,
    schedule: Schedule,
    dt: float | None = None,
    *,
    initial_state: np.ndarray | None = None,
    checkpoints: int = 0,
    eig_tol: float = 1e-10,
    seed: int = 0,
    return_state: bool = False,
) -> AnnealResult:
    """Integrate i dpsi/dt = H(gamma(t)) psi from the ground state at gamma_start.

    dt defaults to the step rule; the initial state is the Krylov ground state
    of H(gamma_start) (uniform superposition as a warned fallback if that solve
    fails to certify).  Raises StepSizeError when the trajectory's norm drift
    exceeds 1e-6.
    """
    if dt is None:
        dt = default_dt(instance, schedule.gamma_start)
    if dt <= 0:
        raise DomainError(f"dt must be > 0, got {dt!r}")

    if initial_state is not None:
        psi = np.asarray(initial_state, dtype=np.complex128).copy()
        if psi.shape != (instance.dim,):
            raise DomainError(f"initial state must have length {instance.dim}")
    else:
        psi = _ground_state(instance, schedule.gamma_start, eig_tol, seed)
    psi /= np.linalg.norm(psi)

    ground = instance.ground_index
    nsteps = max(1, math.ceil(schedule.tau / dt))

    if checkpoints > 0:
        mark_times = np.unique(np.linspace(schedule.tau / checkpoints, schedule.tau, checkpoints))
        head = [(0.0, schedule.gamma(0.0), float(abs(psi[ground]) ** 2))]
    else:
        mark_times = np.empty(0)
        head = []

    if _HAVE_NUMBA:
        marks_out = np.empty((mark_times.shape[0], 2))
        max_drift, status = _trajectory_kernel(
            instance.energies,
            psi,
            schedule.gamma_start,
            schedule.gamma_end,
            schedule.tau,
            dt,
            instance.n,
            ground,
            mark_times,
            marks_out,
        )
        if status == 1:
            raise StepSizeError(
                f"step propagator did not converge in {_MAX_TERMS} terms; reduce dt below {dt:.3e}"
            )
        if status == 2:
            raise StepSizeError(
                f"norm drift {max_drift:.3e} exceeded 1e-6; reduce dt below {dt:.3e}"
            )
        marks = [
            (float(tm), float(marks_out[i, 0]), float(marks_out[i, 1]))
            for i, tm in enumerate(mark_times)
        ]
    else:  # pragma: no cover
        psi, max_drift, nsteps, marks = _evolve_python(
            instance, schedule, dt, psi, ground, list(mark_times)
        )

    checkpoint_rows = tuple(head + marks) if checkpoints > 0 else None
    return AnnealResult(
        schedule=schedule,
        dt=dt,
        fidelity=float(abs(psi[ground]) ** 2),
        norm_drift=abs(float(np.linalg.norm(psi)) - 1.0),
        max_norm_drift=float(max_drift),
        steps=nsteps,
        checkpoints=checkpoint_rows,
        final_state=psi if return_state else None,
    )


def _ground_state(instance: RemInstance, gamma: float, eig_tol: float, seed: int) -> np.ndarray:
    res = lowest_eigenpairs(FieldedHamiltonian(instance, gamma), 1, eig_tol, seed=seed)
    if res.all_converged:
        return res.eigenvectors[:, 0].astype(np.complex128)
    warnings.warn(
        "ground state at gamma_start did not certify; "
        "starting from the uniform superposition",
        stacklevel=3,
    )
    return np.full(instance.dim, 2.0 ** (-0.5 * instance.n), dtype=np.complex128)


def success_vs_tau(
    instance: RemInstance,
    taus,
    schedule_template: Schedule,
    dt_rule: float = DT_SAFETY,
    *,
    checkpoints: int = 0,
    eig_tol: float = 1e-10,
    seed: int = 0,
) -> list[AnnealResult]:
    """One evolution per annealing time, in the given ascending order.

    The ground state at gamma_start is solved once and shared across runs;
    dt_rule is the safety factor of the step rule.
    """
    taus = [float(t) for t in taus]
    if any(b <= a for a, b in zip(taus, taus[1:])):
        raise DomainError("annealing times must be strictly ascending")

    psi0 = _ground_state(instance, schedule_template.gamma_start, eig_tol, seed)
    dt = default_dt(instance, schedule_template.gamma_start, safety=dt_rule)
    out = []
    for tau in taus:
        schedule = replace(schedule_template, tau=tau)
        out.append(
            evolve(
                instance,
                schedule,
                dt,
                initial_state=psi0,
                checkpoints=checkpoints,
                eig_tol=eig_tol,
                seed=seed,
            )
        )
    return out
