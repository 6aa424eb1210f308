"""Thick-restart Lanczos with full reorthogonalization: k lowest eigenpairs.

Near an avoided crossing the two lowest eigenvalues sit within ~2**(-n/2) of
each other; plain Lanczos then manufactures ghost copies of converged Ritz
values and any gap read off the lowest pair is garbage.  Every new basis
vector is therefore reorthogonalized (two classical Gram-Schmidt passes)
against the whole basis, and restarts retain k + max(4, k) Ritz vectors plus
the unabsorbed residual directions (thick restart), so clusters survive
truncation.

The solver accepts a whole block of start vectors, which field scans use to
pass the previous grid point's Ritz set.  That generalization rests on two
rules that reduce to the textbook recurrence for a single start vector:

* The projected matrix is accumulated from the actual orthogonalization
  coefficients instead of being assumed tridiagonal, so the small
  Rayleigh-Ritz problem stays variational whatever the seeding pattern.
* A column is only ever multiplied by H if a basis slot is free to absorb
  its residual, and every still-unprocessed direction is carried across a
  restart.  H applied to the retained span then never leaks outside the
  stored basis, which is exactly what makes the diagonal restart identity
  u_i' H u_j = theta_i delta_ij legitimate.

Returns are claimed on measured residuals ||H v - lambda v||; the cheap
in-loop estimates only decide when measuring is worth it.  Basis vectors are
stored as rows so Gram-Schmidt sweeps run on contiguous memory; at 2**20
amplitudes they, not the matrix applications, dominate the cost.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from .errors import DomainError
from .hamiltonian import FieldedHamiltonian

_U64 = np.uint64
_MASK64 = (1 << 64) - 1

#: Salt for the deterministic starting-vector stream (distinct from the
#: instance-energy stream key space).
_START_SALT = 0x517CC1B727220A95


def _seeded_unit_vector(dim: int, seed: int, stream: int = 0) -> np.ndarray:
    """Deterministic pseudo-random unit vector, platform independent."""
    key = np.array([seed & _MASK64, (_START_SALT + stream) & _MASK64], dtype=_U64)
    raw = np.random.Philox(counter=0, key=key).random_raw(dim)
    u = ((raw >> _U64(11)).astype(np.float64) + 0.5) * 2.0**-53
    v = ndtri(u)
    return v / np.linalg.norm(v)


@dataclass
class EigenResult:
    """Outcome of one eigensolve.

    eigenvalues   ascending, length k
    eigenvectors  (dim, k) orthonormal columns, or None if not requested
    residuals     true ||H v - lambda v|| per pair, measured after the solve
    iterations    total matrix applications spent
    converged     per-pair flag: residual <= requested tolerance
    restart_history  lowest Ritz value after each restart cycle (diagnostics)
    basis_values/basis_vectors  the wider retained Ritz set (vectors as rows),
                  when requested; useful as a warm-start subspace
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None
    residuals: np.ndarray
    iterations: int
    converged: np.ndarray
    restart_history: list = field(default_factory=list)
    basis_values: np.ndarray | None = None
    basis_vectors: np.ndarray | None = None

    @property
    def all_converged(self) -> bool:
        return bool(self.converged.all())


def _dense_lowest(
    h: FieldedHamiltonian, k: int, tol: float, want_vectors: bool, return_basis: bool
) -> EigenResult:
    """Exact small-dimension path: materialize H column by column."""
    dim = h.dim
    mat = np.empty((dim, dim))
    e = np.zeros(dim)
    for j in range(dim):
        e[j] = 1.0
        mat[:, j] = h.apply(e)
        e[j] = 0.0
    vals, vecs = np.linalg.eigh(mat)
    res = np.array([np.linalg.norm(mat @ vecs[:, i] - vals[i] * vecs[:, i]) for i in range(k)])
    nbasis = min(dim, k + max(4, k))
    return EigenResult(
        eigenvalues=vals[:k].copy(),
        eigenvectors=vecs[:, :k].copy() if want_vectors else None,
        residuals=res,
        iterations=dim,
        converged=res <= tol,
        restart_history=[float(vals[0])],
        basis_values=vals[:nbasis].copy() if return_basis else None,
        basis_vectors=np.ascontiguousarray(vecs[:, :nbasis].T) if return_basis else None,
    )


def _diagonal_lowest(
    h: FieldedHamiltonian, k: int, want_vectors: bool, return_basis: bool
) -> EigenResult:
    """gamma = 0: the k smallest level energies, exactly."""
    energies = h.instance.energies
    nbasis = min(h.dim, k + max(4, k))
    order = np.argsort(energies, kind="stable")[:nbasis]
    vals = energies[order].astype(np.float64)
    vecs = None
    if want_vectors:
        vecs = np.zeros((h.dim, k))
        vecs[order[:k], np.arange(k)] = 1.0
    bvecs = None
    if return_basis:
        bvecs = np.zeros((nbasis, h.dim))
        bvecs[np.arange(nbasis), order] = 1.0
    return EigenResult(
        eigenvalues=vals[:k].copy(),
        eigenvectors=vecs,
        residuals=np.zeros(k),
        iterations=0,
        converged=np.ones(k, dtype=bool),
        restart_history=[float(vals[0])],
        basis_values=vals if return_basis else None,
        basis_vectors=bvecs,
    )


def lowest_eigenpairs(
    h: FieldedHamiltonian,
    k: int,
    tol: float = 1e-10,
    max_iter: int | None = None,
    *,
    v0: np.ndarray | None = None,
    seed: int = 0,
    want_vectors: bool = True,
    return_basis: bool = False,
    basis_size: int | None = None,
) -> EigenResult:
    """k lowest eigenpairs of H with per-pair residual certification.

    tol is an absolute residual bound ||H v - lambda v||.  max_iter counts
    restart cycles (default 10*n*k).  v0 may be a single warm-start vector or
    an (r, dim) block of them (rows); keep blocks to a few rows, since every
    seed direction turns into a persistent residual chain and wide blocks
    degrade the solve into shallow block iteration.  Deterministic given
    (h, k, tol, v0, seed).  Non-convergence does not raise: the best
    available pairs are returned with ``converged`` flags and true residuals.
    """
    dim = h.dim
    if not 1 <= k <= dim:
        raise DomainError(f"need 1 <= k <= 2**n = {dim}, got k={k}")
    if tol <= 0:
        raise DomainError(f"tolerance must be > 0, got {tol!r}")
    if v0 is not None:
        v0 = np.atleast_2d(np.asarray(v0, dtype=np.float64))
        if v0.shape[1] != dim:
            raise DomainError(f"v0 rows must have length {dim}, got shape {v0.shape}")
    if h.gamma == 0.0:
        return _diagonal_lowest(h, k, want_vectors, return_basis)

    retained = k + max(4, k)
    basis = max(2 * retained + 2, 24) if basis_size is None else max(int(basis_size), retained + 2)
    if dim <= max(64, basis):
        return _dense_lowest(h, k, tol, want_vectors, return_basis)

    if max_iter is None:
        max_iter = 10 * h.n * k
    max_iter = max(1, int(max_iter))

    breakdown = 1e-12 * max(1.0, h.norm_bound())

    if v0 is None:
        seeds = _seeded_unit_vector(dim, seed)[None, :]
    else:
        # keep room for the retained set plus continuation inside one cycle
        seeds = v0[: basis - retained - 2]

    # One slot beyond `basis` so the final processed column of a cycle can
    # still absorb its residual: nothing H touches ever leaves the basis.
    V = np.empty((basis + 1, dim))
    B = np.zeros((basis, basis))
    matvecs = 0
    fresh = 1
    history: list[float] = []

    nseed = 0
    for row in seeds:
        w = row.astype(np.float64, copy=True)
        for _ in range(2):
            if nseed:
                w -= V[:nseed].T @ (V[:nseed] @ w)
        nrm = float(np.linalg.norm(w))
        if nrm > 1e-8:
            V[nseed] = w / nrm
            nseed += 1
    if nseed == 0:
        V[0] = _seeded_unit_vector(dim, seed)
        nseed = 1

    j0 = 0
    ncols = nseed
    # Per processed column j: betas[j] = norm of the residual of H @ V[j],
    # resdir[j] = basis index where it was absorbed.  Aggregated rows (kept
    # Ritz vectors after a restart) instead carry a conservative bound on
    # their residual norm, with resdir pointing at the last carried
    # direction: the bound stops counting once the Rayleigh-Ritz block has
    # absorbed every direction the residual can live on.
    betas = np.zeros(basis)
    resdir = np.full(basis, -1, dtype=int)
    aggregated = np.zeros(basis, dtype=bool)

    def estimate(mblock: int, Y: np.ndarray, cols: int) -> np.ndarray:
        """Residual estimates for the `cols` lowest Ritz pairs of the block.

        Fresh columns' residual directions are orthonormal basis slots, so
        their contributions add in quadrature (exact); aggregated rows add
        linearly (upper bound).
        """
        outside = (resdir[:mblock] < 0) | (resdir[:mblock] >= mblock)
        agg = aggregated[:mblock]
        b_fresh = betas[:mblock] * (outside & ~agg)
        b_agg = betas[:mblock] * (outside & agg)
        est = np.sqrt((b_fresh**2) @ (Y[:, :cols] ** 2))
        if b_agg.any():
            est = est + b_agg @ np.abs(Y[:, :cols])
        return est

    best: dict | None = None

    for cycle in range(max_iter):
        j = j0
        mblock = j0
        theta = Y = None
        while j < ncols and ncols <= basis:
            w = h.apply(V[j])
            matvecs += 1
            Vj = V[:ncols]
            c = Vj @ w
            w -= Vj.T @ c
            c2 = Vj @ w
            w -= Vj.T @ c2
            col = c + c2
            B[:ncols, j] = col
            B[j, :ncols] = col
            beta = float(np.linalg.norm(w))
            if beta <= breakdown:
                w = _seeded_unit_vector(dim, seed, stream=fresh)
                fresh += 1
                w -= Vj.T @ (Vj @ w)
                w -= Vj.T @ (Vj @ w)
                w /= np.linalg.norm(w)
                beta = 0.0
            else:
                w /= beta
            V[ncols] = w
            if ncols < basis:
                B[ncols, j] = beta
                B[j, ncols] = beta
            betas[j] = beta
            resdir[j] = ncols
            aggregated[j] = False
            ncols += 1
            mblock = j + 1
            j += 1
            if mblock >= k:
                sub = B[:mblock, :mblock]
                theta, Y = np.linalg.eigh(0.5 * (sub + sub.T))
                if bool(np.all(estimate(mblock, Y, k) <= 0.9 * tol)):
                    break
        history.append(float(theta[0]))

        # measure the candidate pairs for real before claiming anything
        vals = theta[:k].copy()
        vecs = Y[:, :k].T @ V[:mblock]  # (k, dim)
        residuals = np.empty(k)
        for i in range(k):
            residuals[i] = np.linalg.norm(h.apply(vecs[i]) - vals[i] * vecs[i])
            matvecs += 1
        if best is None or residuals.max() < best["residuals"].max():
            best = {"vals": vals, "vecs": vecs, "residuals": residuals}
            if return_basis:
                # materialize now: V is rewritten by restarts
                nb = min(retained, mblock)
                best["basis_values"] = theta[:nb].copy()
                best["basis_vectors"] = Y[:, :nb].T @ V[:mblock]
        if bool(np.all(residuals <= tol)) or cycle == max_iter - 1 or mblock >= dim:
            break

        # Thick restart: lowest Ritz vectors of the processed block plus every
        # carried (appended but unprocessed) residual direction.
        keep = min(retained, mblock)
        outside = (resdir[:mblock] < 0) | (resdir[:mblock] >= mblock)
        agg = aggregated[:mblock]
        b_fresh = betas[:mblock] * (outside & ~agg)
        b_agg = betas[:mblock] * (outside & agg)
        tail = np.sqrt((b_fresh**2) @ (Y[:, :keep] ** 2))
        if b_agg.any():
            tail = tail + b_agg @ np.abs(Y[:, :keep])
        carried = V[mblock:ncols].copy()
        ncarry = carried.shape[0]
        V[:keep] = Y[:, :keep].T @ V[:mblock]
        V[keep : keep + ncarry] = carried
        B[:, :] = 0.0
        B[np.arange(keep), np.arange(keep)] = theta[:keep]
        betas[:] = 0.0
        resdir[:] = -1
        aggregated[:] = False
        betas[:keep] = tail
        resdir[:keep] = keep + ncarry - 1
        aggregated[:keep] = True
        j0 = keep
        ncols = keep + ncarry

    vals = best["vals"]
    vecs = best["vecs"]
    residuals = best["residuals"]
    return EigenResult(
        eigenvalues=vals,
        eigenvectors=np.ascontiguousarray(vecs.T) if want_vectors else None,
        residuals=residuals,
        iterations=matvecs,
        converged=residuals <= tol,
        restart_history=history,
        basis_values=best.get("basis_values"),
        basis_vectors=best.get("basis_vectors"),
    )
