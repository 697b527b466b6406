"""Steklov and mixed spectra through the discrete Dirichlet-to-Neumann map.

The pencil ``K u = sigma B u`` has ``B`` supported on boundary vertices,
so interior unknowns are eliminated exactly (Schur complement) and the
remaining dense problem ``S v = sigma B_bb v`` is solved by a congruence
transform, Householder tridiagonalization, implicit QL and inverse
iteration.

Interior ordering: Cuthill-McKee grown from the interior vertices that
touch the Steklov boundary, then reversed, so those vertices come last.
Because ``K_ib`` is nonzero only in those trailing rows, the forward
solve with the banded Cholesky factor only needs the trailing block.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from . import kernels
from .fem import assemble_boundary_mass, assemble_stiffness
from .surface import TriMesh

EIG_TOL = 1e-12
RESIDUAL_TOL = 1e-8
_START_SEED = 20240607


class SolverError(RuntimeError):
    """Factorization or eigensolver failure."""


# ---------------------------------------------------------------------------
# Schur complement
# ---------------------------------------------------------------------------

def rooted_rcm(A: sp.csr_matrix, roots: np.ndarray) -> np.ndarray:
    """Reverse Cuthill-McKee permutation of ``A`` with ``roots`` placed last."""
    A = sp.csr_matrix(A)
    n = A.shape[0]
    indptr = A.indptr.astype(np.int64)
    indices = A.indices.astype(np.int64)
    seen = np.zeros(n, bool)
    parts = []
    seeds = np.asarray(roots, dtype=np.int64)
    while True:
        if seeds.size:
            part = kernels.cuthill_mckee_from_roots(indptr, indices, seeds)
            part = part[~seen[part]]
            seen[part] = True
            parts.append(part)
        rest = np.nonzero(~seen)[0]
        if rest.size == 0:
            break
        # components not reachable from the roots: restart at their first vertex
        seeds = rest[:1]
    order = np.concatenate(parts)
    return order[::-1].copy()


@dataclass(frozen=True, eq=False)
class InteriorFactor:
    """Banded Cholesky factor of a permuted interior block."""

    perm: np.ndarray          # interior position -> local index
    lower: np.ndarray         # banded lower storage
    K_ib: sp.csr_matrix       # interior x boundary coupling in permuted order

    def harmonic_extension(self, v: np.ndarray) -> np.ndarray:
        """Interior values ``-K_ii^{-1} K_ib v`` in the original interior order."""
        rhs = -(self.K_ib @ v)
        x = sla.cho_solve_banded((self.lower, True), rhs, check_finite=False)
        out = np.empty_like(x)
        out[self.perm] = x
        return out


def _band_lower(A: sp.csr_matrix) -> tuple[np.ndarray, int]:
    C = sp.coo_matrix(A)
    keep = C.row >= C.col
    r, c, v = C.row[keep], C.col[keep], C.data[keep]
    bw = int((r - c).max()) if r.size else 0
    ab = np.zeros((bw + 1, A.shape[0]))
    ab[r - c, c] = v
    return ab, bw


def _schur(K: sp.csr_matrix, bidx: np.ndarray, iidx: np.ndarray):
    if iidx.size == 0:
        raise SolverError("empty interior: every vertex is a boundary vertex")
    K = sp.csr_matrix(K)
    K_ii = K[iidx][:, iidx].tocsr()
    K_ib = K[iidx][:, bidx].tocsr()
    K_bb = K[bidx][:, bidx].toarray()

    touching = np.nonzero(np.diff(K_ib.indptr) > 0)[0]
    perm = rooted_rcm(K_ii, touching)
    K_ii = K_ii[perm][:, perm].tocsr()
    K_ib = K_ib[perm].tocsr()
    m = touching.size
    n_i = iidx.size
    tail_rows = np.nonzero(np.diff(K_ib.indptr) > 0)[0]
    if tail_rows.size and tail_rows.min() < n_i - m:
        raise SolverError("ordering failed to place boundary-adjacent vertices last")

    ab, bw = _band_lower(K_ii)
    try:
        lower = sla.cholesky_banded(ab, lower=True, check_finite=False)
    except sla.LinAlgError as exc:
        raise SolverError("interior block is not positive definite (Cholesky breakdown)") from exc

    # trailing m x m block of the factor, densified
    start = n_i - m
    L_tail = np.zeros((m, m))
    for d in range(min(bw, m - 1) + 1):
        cols = np.arange(start, n_i - d)
        L_tail[cols - start + d, cols - start] = lower[d, cols]
    rhs = K_ib[start:].toarray()
    W = sla.solve_triangular(L_tail, rhs, lower=True, check_finite=False)
    S = K_bb - W.T @ W
    S = 0.5 * (S + S.T)
    return S, InteriorFactor(perm=perm, lower=lower, K_ib=K_ib)


def dtn_matrix(K: sp.spmatrix, boundary_idx: Sequence[int]) -> np.ndarray:
    """Dense Schur complement ``K_bb - K_bi K_ii^{-1} K_ib``.

    Examples
    --------
    >>> import scipy.sparse as sp
    >>> K = sp.csr_matrix([[1., -1, 0], [-1, 2, -1], [0, -1, 1]])
    >>> dtn_matrix(K, [0, 2])
    array([[ 0.5, -0.5],
           [-0.5,  0.5]])
    """
    K = sp.csr_matrix(K)
    n = K.shape[0]
    bidx = np.unique(np.asarray(boundary_idx, dtype=np.int64))
    mask = np.ones(n, bool)
    mask[bidx] = False
    S, _ = _schur(K, bidx, np.nonzero(mask)[0])
    return S


# ---------------------------------------------------------------------------
# Dense generalized eigensolver
# ---------------------------------------------------------------------------

def symmetric_eigen(A: np.ndarray, count: int, tol: float = EIG_TOL):
    """Lowest ``count`` eigenpairs of a dense symmetric matrix.

    Householder reduction, eigenvalues-only implicit QL, then inverse
    iteration on the tridiagonal matrix and back-transformation.
    """
    n = A.shape[0]
    if count > n:
        raise SolverError(f"asked for {count} eigenpairs of a {n}x{n} matrix")
    d, e, vecs, betas = kernels.householder_tridiagonal(np.array(A, dtype=float, order="C"))
    try:
        lam = kernels.tql_eigenvalues(d.copy(), e.copy(), tol)
    except Exception as exc:  # numba re-raises as a plain Exception subclass
        raise SolverError(f"tridiagonal QL did not converge: {exc}") from exc
    rng = np.random.default_rng(_START_SEED)
    starts = rng.standard_normal((n, count))
    Y, refined = kernels.tridiagonal_inverse_iteration(d, e, lam[:count].copy(), starts, 20, 1e-13)
    X = kernels.apply_householder(vecs, betas, Y)
    order = np.argsort(refined, kind="stable")
    return refined[order], X[:, order]


def generalized_eigen(S: np.ndarray, M: np.ndarray, count: int):
    """Lowest eigenpairs of ``S v = sigma M v`` with ``M`` positive definite.

    Eigenvectors are ``M``-orthonormal.
    """
    try:
        Lm = np.linalg.cholesky(M)
    except np.linalg.LinAlgError as exc:
        raise SolverError("boundary mass block is singular (degenerate boundary edge?)") from exc
    C = sla.solve_triangular(Lm, S, lower=True)
    C = sla.solve_triangular(Lm, C.T, lower=True)
    C = 0.5 * (C + C.T)
    lam, Y = symmetric_eigen(C, count)
    V = sla.solve_triangular(Lm.T, Y, lower=False)
    return lam, V


# ---------------------------------------------------------------------------
# Spectra on meshes
# ---------------------------------------------------------------------------

PROBLEMS = ("steklov", "mixed-SN", "mixed-SD")


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    problem: str
    surface: str
    h: float
    sigma: np.ndarray            # (k+1,)
    boundary_idx: np.ndarray     # vertices carrying the Steklov condition
    boundary_vectors: np.ndarray # (nb, k+1), B-orthonormal
    extensions: np.ndarray       # (n_vertices, k+1)
    residuals: np.ndarray        # (k+1,)
    steklov_components: tuple = (0, 1)

    def __post_init__(self):
        if np.any(np.diff(self.sigma) < -1e-12 * max(1.0, float(np.abs(self.sigma).max()))):
            raise SolverError("eigenvalues are not ascending")

    @property
    def k(self) -> int:
        return len(self.sigma) - 1

    def to_csv(self) -> str:
        lines = ["k,sigma,residual"]
        for i, (s, r) in enumerate(zip(self.sigma, self.residuals)):
            lines.append(f"{i},{float(s)!r},{float(r)!r}")
        return "\n".join(lines) + "\n"

    def eigenfunction_csv(self, mesh: TriMesh, index: int = 1) -> str:
        u = self.extensions[:, index]
        lines = ["vertex,s,t,u"]
        for v, ((s, t), val) in enumerate(zip(mesh.vertices, u)):
            lines.append(f"{v},{float(s)!r},{float(t)!r},{float(val)!r}")
        return "\n".join(lines) + "\n"

    def scaled_by(self, c: float) -> "SpectrumResult":  # pragma: no cover - convenience
        return SpectrumResult(self.problem, self.surface, self.h * c, self.sigma / c, self.boundary_idx,
                              self.boundary_vectors / math.sqrt(c), self.extensions / math.sqrt(c),
                              self.residuals, self.steklov_components)


def _solve(mesh: TriMesh, steklov: Sequence[int], dirichlet: Sequence[int], k: int, problem: str,
           K: sp.csr_matrix | None = None) -> SpectrumResult:
    if not isinstance(k, (int, np.integer)) or k < 0:
        raise ValueError("k must be a non-negative integer")
    steklov = tuple(int(c) for c in steklov)
    if not steklov:
        raise ValueError("empty Steklov part")
    if K is None:
        K = assemble_stiffness(mesh)
    B = assemble_boundary_mass(mesh, steklov)
    n = mesh.n_vertices

    fixed = np.zeros(n, bool)
    if dirichlet:
        fixed[mesh.boundary_vertices(dirichlet)] = True
    bidx = np.setdiff1d(mesh.boundary_vertices(steklov), np.nonzero(fixed)[0])
    if k + 1 > bidx.size:
        raise ValueError(f"k={k} too large for {bidx.size} Steklov boundary vertices")
    is_b = np.zeros(n, bool)
    is_b[bidx] = True
    iidx = np.nonzero(~is_b & ~fixed)[0]

    S, factor = _schur(K, bidx, iidx)
    B_bb = B[bidx][:, bidx].toarray()
    lam, V = generalized_eigen(S, B_bb, k + 1)

    U = np.zeros((n, k + 1))
    U[bidx] = V
    for q in range(k + 1):
        U[iidx, q] = factor.harmonic_extension(V[:, q])

    free = ~fixed
    R = (K @ U - (B @ U) * lam)[free]
    res = np.linalg.norm(R, axis=0) / np.linalg.norm(U[free], axis=0)
    bad = np.nonzero(res > RESIDUAL_TOL)[0]
    if bad.size:
        raise SolverError(f"residual {res[bad[0]]:.3e} above {RESIDUAL_TOL} for eigenpair {int(bad[0])}")
    return SpectrumResult(
        problem=problem,
        surface=mesh.name,
        h=mesh.h,
        sigma=lam,
        boundary_idx=bidx,
        boundary_vectors=V,
        extensions=U,
        residuals=res,
        steklov_components=steklov,
    )


def steklov_spectrum(mesh: TriMesh, k: int, K: sp.csr_matrix | None = None) -> SpectrumResult:
    """Lowest ``k + 1`` Steklov eigenpairs, every boundary circle carrying the Steklov condition."""
    return _solve(mesh, mesh.labels(), (), k, "steklov", K)


def mixed_spectrum(mesh: TriMesh, steklov_components: Iterable[int], inner_boundary: Iterable[int],
                   kind: str, k: int, K: sp.csr_matrix | None = None) -> SpectrumResult:
    """Steklov condition on ``steklov_components``; Neumann or Dirichlet on ``inner_boundary``.

    With ``kind="N"`` the inner boundary is left natural (its vertices are
    eliminated with the interior). With ``kind="D"`` its vertices are
    clamped to zero before the Schur complement.
    """
    steklov_components = tuple(steklov_components)
    inner_boundary = tuple(inner_boundary)
    if set(steklov_components) & set(inner_boundary):
        raise ValueError("Steklov and inner boundary labels overlap")
    kind = kind.upper()
    if kind == "N":
        return _solve(mesh, steklov_components, (), k, "mixed-SN", K)
    if kind == "D":
        return _solve(mesh, steklov_components, inner_boundary, k, "mixed-SD", K)
    raise ValueError("kind must be 'N' or 'D'")


def is_zero_eigenvalue(sigma0: float, sigma1: float) -> bool:
    return abs(sigma0) < 1e-8 * abs(sigma1)
