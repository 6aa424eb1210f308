"""Spectrum scans over the field, per-instance minimal gap, ensemble scaling.

The gap search assumes a single avoided crossing dominates lambda_1 - lambda_0
inside the bracket: a coarse pre-scan checks unimodality, golden section then
narrows the minimizer, and a dense grid takes over (with a flag) when several
local minima show up.

Because H(gamma) = diag(E) - gamma*F is linear in the field, the search runs
on a projected surrogate: a few rigorous anchor solves across the bracket pool
their Ritz subspaces, diag(E) and F are projected onto that pool once, and
every gap evaluation inside the search is then a small dense eigensolve.  The
returned minimum is never the surrogate's: the candidate location is
re-solved with warm-started Lanczos at a residual tolerance tied to the gap
being measured (delta/100), and if the surrogate disagrees with that certified
value the search falls back to rigorous solves throughout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from multiprocessing import Pool

import numpy as np
from scipy import stats as sstats

from .errors import ConvergenceError, DomainError
from .eigensolver import lowest_eigenpairs
from .hamiltonian import FieldedHamiltonian, flip_sum
from .instances import RemInstance, ensemble_seed, sample_instance
from .perturbation import minimal_gap_prediction

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

#: Floor for adaptive eigensolver residual tolerances.
_TOL_FLOOR = 1e-13

#: Surrogate and certified minima must agree to this relative mismatch;
#: otherwise the search escalates to rigorous evaluations.
_SURROGATE_RTOL = 0.2


@dataclass(frozen=True)
class SpectrumCurve:
    """Lowest-k levels tabulated on an ascending field grid."""

    gammas: np.ndarray  # (npts,)
    levels: np.ndarray  # (npts, k), each row ascending
    residuals: np.ndarray  # (npts, k)
    converged: np.ndarray  # (npts, k) bool

    @property
    def k(self) -> int:
        return self.levels.shape[1]

    def gap(self) -> np.ndarray:
        """First excitation gap per grid point."""
        return self.levels[:, 1] - self.levels[:, 0]


def spectrum_vs_field(
    instance: RemInstance,
    gammas,
    k: int = 2,
    tol: float = 1e-10,
    *,
    warm_start: bool = True,
    seed: int = 0,
) -> SpectrumCurve:
    """Eigenvalue curves E_i(gamma) on an ascending grid.

    Consecutive points warm-start from the previous Ritz set.  Unconverged
    points are flagged in ``converged`` but the curve is returned in full.
    """
    grid = np.asarray(gammas, dtype=np.float64).ravel()
    if grid.size == 0:
        raise DomainError("field grid is empty")
    if grid.size > 1 and not np.all(np.diff(grid) > 0):
        raise DomainError("field grid must be strictly ascending")
    if k < 2:
        raise DomainError(f"need at least 2 levels for a spectrum curve, got k={k}")

    npts = grid.size
    levels = np.empty((npts, k))
    residuals = np.empty((npts, k))
    converged = np.empty((npts, k), dtype=bool)
    v0 = None
    for i, g in enumerate(grid):
        res = lowest_eigenpairs(
            FieldedHamiltonian(instance, float(g)), k, tol, v0=v0, seed=seed
        )
        levels[i] = res.eigenvalues
        residuals[i] = res.residuals
        converged[i] = res.converged
        if warm_start and res.eigenvectors is not None:
            v0 = np.ascontiguousarray(res.eigenvectors[:, 0])
        else:
            v0 = None
    return SpectrumCurve(gammas=grid, levels=levels, residuals=residuals, converged=converged)


@dataclass(frozen=True)
class GapResult:
    """Location and value of the minimal spectral gap for one instance."""

    gamma_star: float
    delta_min: float
    e0: float
    search_evals: int
    non_unimodal: bool = False


class _SurrogateGap:
    """Gap evaluations on the projected pencil W (diag(E) - gamma F) W^T.

    Anchors solve only the ground pair (k=1, capped restarts): deep in the
    large-field phase the first excited level is an n-fold quasi-degenerate
    multiplet that costs hundreds of iterations to pin down, yet any vector
    of its span serves a subspace equally well.  The crossing physics itself
    is guaranteed by enrichment rows: the uniform superposition and the two
    lowest classical basis states.
    """

    def __init__(self, instance: RemInstance, anchor_gammas, anchor_tol: float, seed: int):
        self.instance = instance
        self.evals = 0
        gammas = np.asarray(anchor_gammas, dtype=np.float64)
        # Outer anchors run cold; interior anchors (near the crossing, where
        # the ground pair is nearly degenerate) warm-start from the outer
        # ground vectors, which carry exactly the two phase characters the
        # crossing mixes.
        center = 0.5 * (gammas.min() + gammas.max())
        order = np.argsort(-np.abs(gammas - center), kind="stable")
        blocks: dict[int, np.ndarray] = {}
        grounds: list[np.ndarray] = []
        for idx in order:
            v0 = np.vstack(grounds[:2]) if grounds else None
            res = lowest_eigenpairs(
                FieldedHamiltonian(instance, float(gammas[idx])),
                1,
                anchor_tol,
                max_iter=8,
                v0=v0,
                seed=seed,
                return_basis=True,
            )
            self.evals += 1
            blocks[int(idx)] = res.basis_vectors
            if len(grounds) < 2:
                grounds.append(res.eigenvectors[:, 0])
        rows = [blocks[i] for i in sorted(blocks)]
        enrich = np.zeros((3, instance.dim))
        enrich[0, :] = 2.0 ** (-0.5 * instance.n)  # uniform superposition
        low2 = np.argsort(instance.energies, kind="stable")[:2]
        enrich[1, low2[0]] = 1.0
        if instance.dim > 1:
            enrich[2, low2[1]] = 1.0
        rows.append(enrich)
        pool = np.vstack(rows)
        # orthonormalize the pooled Ritz sets, dropping near-duplicates
        W = []
        for row in pool:
            w = row.copy()
            for _ in range(2):
                for u in W:
                    w -= u * (u @ w)
            nrm = float(np.linalg.norm(w))
            if nrm > 1e-6:
                W.append(w / nrm)
        self.W = np.array(W)  # (c, dim), orthonormal rows
        dproj = self.W @ (self.W * instance.energies).T
        fproj = self.W @ np.array([flip_sum(w, instance.n) for w in self.W]).T
        self.dproj = 0.5 * (dproj + dproj.T)
        self.fproj = 0.5 * (fproj + fproj.T)
        self.cache: dict[float, float] = {}
        self._last: tuple[float, np.ndarray, np.ndarray] | None = None

    def __call__(self, gamma: float) -> float:
        gamma = float(gamma)
        if gamma in self.cache:
            return self.cache[gamma]
        vals, Y = np.linalg.eigh(self.dproj - gamma * self.fproj)
        self.evals += 1
        gap = float(vals[1] - vals[0])
        self.cache[gamma] = gap
        self._last = (gamma, vals, Y)
        return gap

    def pair_vectors(self, gamma: float) -> np.ndarray:
        """Lift the two lowest surrogate Ritz vectors back to full space."""
        if self._last is None or self._last[0] != float(gamma):
            self(float(gamma))
        _, _, Y = self._last
        return Y[:, :2].T @ self.W  # (2, dim)


class _DirectGap:
    """Rigorous warm-chained gap evaluations (escalation path)."""

    def __init__(self, instance: RemInstance, tol_eig: float | None, seed: int):
        self.instance = instance
        self.tol_eig = tol_eig
        self.seed = seed
        self.evals = 0
        self.best_gap = math.inf
        self.cache: dict[float, float] = {}
        self._v0 = None

    def solver_tol(self) -> float:
        est = self.best_gap
        if not math.isfinite(est):
            e0 = self.instance.ground_energy
            est = minimal_gap_prediction(e0, self.instance.n)[1] if e0 < 0 else 1.0
        adaptive = max(est / 100.0, _TOL_FLOOR)
        return min(self.tol_eig, adaptive) if self.tol_eig is not None else adaptive

    def __call__(self, gamma: float) -> float:
        gamma = float(gamma)
        if gamma in self.cache:
            return self.cache[gamma]
        res = lowest_eigenpairs(
            FieldedHamiltonian(self.instance, gamma),
            2,
            self.solver_tol(),
            v0=self._v0,
            seed=self.seed,
            return_basis=True,
        )
        self.evals += 1
        self._v0 = res.basis_vectors
        gap = float(res.eigenvalues[1] - res.eigenvalues[0])
        self.cache[gamma] = gap
        self.best_gap = min(self.best_gap, gap)
        return gap


def _search_minimum(evaluate, lo: float, hi: float, tol_gamma: float, prescan: int, fallback_grid: int):
    """Pre-scan for unimodality, then golden section (or dense fallback)."""
    grid = np.linspace(lo, hi, max(3, int(prescan)))
    values = np.array([evaluate(g) for g in grid])
    interior_minima = sum(
        1
        for j in range(1, values.size - 1)
        if values[j] <= values[j - 1] and values[j] <= values[j + 1]
    )
    non_unimodal = interior_minima > 1
    if non_unimodal:
        dense = np.linspace(lo, hi, max(int(fallback_grid), 3))
        dvals = np.array([evaluate(g) for g in dense])
        return float(dense[int(np.argmin(dvals))]), True
    i = int(np.argmin(values))
    a = float(grid[max(i - 1, 0)])
    b = float(grid[min(i + 1, grid.size - 1)])
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = evaluate(x1), evaluate(x2)
    seen = {a: evaluate(a), b: evaluate(b), x1: f1, x2: f2}
    while b - a > tol_gamma:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = evaluate(x1)
            seen[x1] = f1
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = evaluate(x2)
            seen[x2] = f2
    return min(seen, key=lambda g: seen[g]), False


def minimal_gap(
    instance: RemInstance,
    bracket: tuple[float, float] | None = None,
    tol_gamma: float = 5e-4,
    tol_eig: float | None = None,
    *,
    seed: int = 0,
    prescan: int = 9,
    fallback_grid: int = 200,
) -> GapResult:
    """Golden-section minimization of lambda_1(gamma) - lambda_0(gamma).

    The default bracket is [0.6, 1.4] times the predicted crossing |E0|/n.
    tol_eig=None lets the certification tolerance track delta/100.  The
    returned delta_min always comes from a converged Lanczos solve at the
    found gamma; search_evals counts every gap evaluation (surrogate and
    rigorous).  Raises ConvergenceError if certification fails.
    """
    if tol_gamma <= 0:
        raise DomainError(f"tol_gamma must be > 0, got {tol_gamma!r}")
    e0 = instance.ground_energy
    if bracket is None:
        if e0 >= 0:
            raise DomainError(
                "instance has no negative ground energy; pass an explicit bracket"
            )
        gamma_pred = minimal_gap_prediction(e0, instance.n)[0]
        bracket = (0.6 * gamma_pred, 1.4 * gamma_pred)
    lo, hi = float(bracket[0]), float(bracket[1])
    if not (0 <= lo < hi):
        raise DomainError(f"invalid bracket {bracket!r}")

    delta_pred = minimal_gap_prediction(e0, instance.n)[1] if e0 < 0 else None
    anchor_tol = max(delta_pred / 30.0, _TOL_FLOOR) if delta_pred else 1e-8
    if tol_eig is not None:
        anchor_tol = min(anchor_tol, tol_eig)

    anchors = lo + (hi - lo) * np.array([0.25, 0.5, 0.75])
    surrogate = _SurrogateGap(instance, anchors, anchor_tol, seed)
    best_g, non_unimodal = _search_minimum(surrogate, lo, hi, tol_gamma, prescan, fallback_grid)
    evals = surrogate.evals

    def certify(gamma: float, gap_estimate: float, v0) -> tuple[float, float]:
        tol_cert = max(gap_estimate / 100.0, _TOL_FLOOR)
        if tol_eig is not None:
            tol_cert = min(tol_eig, tol_cert)
        res = lowest_eigenpairs(
            FieldedHamiltonian(instance, float(gamma)), 2, tol_cert, v0=v0, seed=seed
        )
        if not res.all_converged:
            raise ConvergenceError(
                f"eigensolve at gamma={gamma:.6g} left residuals {res.residuals} "
                f"above tol={tol_cert:.3g}"
            )
        return float(res.eigenvalues[1] - res.eigenvalues[0]), tol_cert

    delta, tol_cert = certify(best_g, surrogate(best_g), surrogate.pair_vectors(best_g))
    evals += 1

    mismatch = abs(delta - surrogate(best_g))
    if mismatch > max(_SURROGATE_RTOL * abs(delta), 10.0 * tol_cert):
        # surrogate subspace missed structure: redo the search rigorously
        direct = _DirectGap(instance, tol_eig, seed)
        best_g, non_unimodal = _search_minimum(direct, lo, hi, tol_gamma, prescan, fallback_grid)
        evals += direct.evals
        delta, _ = certify(best_g, direct(best_g), direct._v0)
        evals += 1

    return GapResult(
        gamma_star=float(best_g),
        delta_min=delta,
        e0=e0,
        search_evals=evals,
        non_unimodal=non_unimodal,
    )


@dataclass(frozen=True)
class ScalingRecord:
    """One ensemble member of the gap-scaling computation."""

    n: int
    sample: int
    seed: int
    e0: float
    gamma_star: float
    delta_min: float
    non_unimodal: bool
    error: str  # empty for successful members

    @property
    def ok(self) -> bool:
        return self.error == ""


@dataclass(frozen=True)
class ScalingResult:
    """Per-size minimal-gap statistics and the log2-median scaling fit."""

    ns: tuple[int, ...]
    samples: int
    master_seed: int
    records: tuple[ScalingRecord, ...]
    stats: dict
    slope: float | None
    slope_stderr: float | None
    slope_ci: tuple[float, float] | None
    intercept: float | None
    excluded: int


def _scaling_job(args) -> ScalingRecord:
    n, index, seed, tol_gamma, tol_eig = args
    instance = sample_instance(n, seed)
    try:
        r = minimal_gap(instance, tol_gamma=tol_gamma, tol_eig=tol_eig)
        return ScalingRecord(
            n=n,
            sample=index,
            seed=seed,
            e0=float(instance.ground_energy),
            gamma_star=r.gamma_star,
            delta_min=r.delta_min,
            non_unimodal=r.non_unimodal,
            error="",
        )
    except Exception as exc:  # noqa: BLE001 - member failure is data, not fatal
        return ScalingRecord(
            n=n,
            sample=index,
            seed=seed,
            e0=float(instance.ground_energy),
            gamma_star=math.nan,
            delta_min=math.nan,
            non_unimodal=False,
            error=f"{type(exc).__name__}: {exc}",
        )


def _quartile_stats(values: np.ndarray) -> dict:
    q25, q50, q75 = np.percentile(values, [25.0, 50.0, 75.0])
    return {
        "median": float(q50),
        "mean": float(values.mean()),
        "q25": float(q25),
        "q75": float(q75),
    }


def gap_scaling_ensemble(
    ns,
    samples: int,
    master_seed: int,
    *,
    tol_gamma: float = 5e-4,
    tol_eig: float | None = None,
    workers: int = 1,
) -> ScalingResult:
    """Minimal gaps over a seeded ensemble and the slope of log2(median) vs n.

    Member seeds derive deterministically from (master_seed, n, sample); the
    merge order is fixed by (n, sample), so results are independent of the
    worker count.  Failed members are excluded from statistics and counted.
    """
    ns = tuple(int(n) for n in ns)
    if len(ns) == 0:
        raise DomainError("need at least one size")
    if samples < 1:
        raise DomainError(f"samples must be >= 1, got {samples}")

    jobs = [
        (n, i, ensemble_seed(master_seed, n, i), tol_gamma, tol_eig)
        for n in ns
        for i in range(samples)
    ]
    if workers > 1:
        with Pool(processes=workers) as pool:
            records = list(pool.imap(_scaling_job, jobs, chunksize=1))
    else:
        records = [_scaling_job(j) for j in jobs]

    stats: dict = {}
    medians: list[tuple[int, float]] = []
    excluded = 0
    for n in ns:
        ok = [r for r in records if r.n == n and r.ok]
        bad = [r for r in records if r.n == n and not r.ok]
        excluded += len(bad)
        entry: dict = {"count": len(ok), "excluded": len(bad)}
        if ok:
            deltas = np.array([r.delta_min for r in ok])
            gammas = np.array([r.gamma_star for r in ok])
            entry["delta_min"] = _quartile_stats(deltas)
            entry["gamma_star"] = _quartile_stats(gammas)
            medians.append((n, float(np.median(deltas))))
        stats[n] = entry

    slope = slope_stderr = intercept = None
    slope_ci = None
    if len(medians) >= 2:
        x = np.array([m[0] for m in medians], dtype=float)
        y = np.log2([m[1] for m in medians])
        fit = sstats.linregress(x, y)
        slope = float(fit.slope)
        intercept = float(fit.intercept)
        slope_stderr = float(fit.stderr)
        if len(medians) >= 3:
            tval = float(sstats.t.ppf(0.975, len(medians) - 2))
            slope_ci = (slope - tval * slope_stderr, slope + tval * slope_stderr)

    return ScalingResult(
        ns=ns,
        samples=int(samples),
        master_seed=int(master_seed),
        records=tuple(records),
        stats=stats,
        slope=slope,
        slope_stderr=slope_stderr,
        slope_ci=slope_ci,
        intercept=intercept,
        excluded=excluded,
    )
