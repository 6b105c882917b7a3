"""Generalized symmetric-definite eigensolves ``A u = sigma M u``.

Small problems go to dense LAPACK; larger ones use shift-invert Lanczos
around ``-1``, i.e. on ``(A + M)^{-1} M``, which is the discrete form of
``T^{-1} J``.  The start vector comes from a fixed seed, so repeated
solves are bitwise reproducible.
"""
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ._validation import check_count, check_positive
from .exceptions import ConvergenceError, DefinitenessError, InvalidArgumentError

DENSE_THRESHOLD = 3000
SEED = 20240101


@dataclass(frozen=True)
class EigenSolution:
    """``values`` ascending, ``vectors`` (n, k) M-orthonormal columns."""

    values: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray
    gram_error: float

    def __len__(self):
        return len(self.values)


def sigma_to_mu(sigma):
    """Eigenvalue of the solution operator ``(A + M)^{-1} M`` for pencil eigenvalue ``sigma``."""
    sigma = np.asarray(sigma, dtype=float)
    if np.any(sigma < 0):
        raise InvalidArgumentError("sigma must be >= 0")
    out = 1.0 / (sigma + 1.0)
    return float(out) if out.ndim == 0 else out


def mu_to_sigma(mu):
    mu = np.asarray(mu, dtype=float)
    if np.any(mu <= 0) or np.any(mu > 1):
        raise InvalidArgumentError("mu must lie in (0, 1]")
    out = 1.0 / mu - 1.0
    return float(out) if out.ndim == 0 else out


def _check_spd_sparse(M):
    # symmetric-mode LU with diagonal pivoting: positive pivots <=> positive definite
    try:
        lu = spla.splu(
            sp.csc_matrix(M),
            permc_spec="MMD_AT_PLUS_A",
            diag_pivot_thresh=0.0,
            options={"SymmetricMode": True},
        )
    except RuntimeError as exc:
        raise DefinitenessError(f"mass matrix factorization failed: {exc}") from exc
    d = lu.U.diagonal()
    if not np.all(d > 0):
        raise DefinitenessError("mass matrix is not positive definite")


def fix_signs(vectors):
    """Make the first entry of largest magnitude of every column positive."""
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def clusters_by_gap(values, rel_tol):
    """Group consecutive sorted values whose gap is below ``rel_tol * max(1, |value|)``."""
    groups = []
    for i, v in enumerate(values):
        if groups and v - values[groups[-1][-1]] < rel_tol * max(1.0, abs(v)):
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def orthonormalize(vectors, M):
    """Symmetric (Loewdin) M-orthonormalization; deterministic and basis-covariant."""
    G = vectors.T @ (M @ vectors)
    w, Q = np.linalg.eigh(0.5 * (G + G.T))
    if np.any(w <= 0):
        raise DefinitenessError("vectors are linearly dependent in the M inner product")
    return vectors @ (Q @ np.diag(w ** -0.5) @ Q.T)


def _residuals(A, M, values, vectors):
    AV = A @ vectors
    MV = M @ vectors
    R = AV - MV * values[None, :]
    scale = np.maximum(np.linalg.norm(AV, axis=0), np.abs(values) * np.linalg.norm(MV, axis=0))
    scale = np.maximum(scale, np.finfo(float).tiny)
    return np.linalg.norm(R, axis=0) / scale


def _gram_error(vectors, M):
    G = vectors.T @ (M @ vectors)
    return float(np.abs(G - np.eye(G.shape[0])).max()) if G.size else 0.0


def solve_gsym(A, M, k, tol=1e-8, dense_threshold=DENSE_THRESHOLD, cluster_tol=1e-8, seed=SEED):
    """The ``k`` algebraically smallest eigenpairs of the pencil ``(A, M)``.

    Parameters
    ----------
    A : symmetric positive semi-definite matrix (dense or sparse)
    M : symmetric positive definite matrix
    k : int
    tol : float
        Bound on relative residuals and on the M-Gram error.
    dense_threshold : int
        Dimensions below this use dense LAPACK.
    cluster_tol : float
        Relative gap under which eigenvectors are re-orthonormalized together.

    Raises
    ------
    DefinitenessError
        If ``M`` is not positive definite.
    ConvergenceError
        If the iteration fails or residuals exceed ``tol``.
    """
    n = A.shape[0]
    if A.shape != (n, n) or M.shape != (n, n):
        raise InvalidArgumentError(f"shape mismatch: A {A.shape}, M {M.shape}")
    k = check_count(k, "k")
    if k > n:
        raise InvalidArgumentError(f"k={k} exceeds dimension {n}")
    tol = check_positive(tol, "tol")

    if n < dense_threshold or k >= n - 1:
        Ad = A.toarray() if sp.issparse(A) else np.asarray(A, dtype=float)
        Md = M.toarray() if sp.issparse(M) else np.asarray(M, dtype=float)
        try:
            sla.cholesky(Md, lower=True)
        except np.linalg.LinAlgError as exc:
            raise DefinitenessError(f"mass matrix is not positive definite: {exc}") from exc
        values, vectors = sla.eigh(Ad, Md, subset_by_index=[0, k - 1], driver="gvx")
    else:
        A = sp.csc_matrix(A)
        M = sp.csc_matrix(M)
        _check_spd_sparse(M)
        v0 = np.random.default_rng(seed).standard_normal(n)
        ncv = min(n, max(2 * k + 1, k + 32))
        try:
            values, vectors = spla.eigsh(A, k=k, M=M, sigma=-1.0, which="LM", v0=v0, ncv=ncv, tol=0.0)
        except spla.ArpackNoConvergence as exc:
            res = _residuals(A, M, exc.eigenvalues, exc.eigenvectors) if len(exc.eigenvalues) else None
            raise ConvergenceError("shift-invert Lanczos did not converge", residuals=res) from exc
        order = np.argsort(values, kind="stable")
        values, vectors = values[order], vectors[:, order]

    for group in clusters_by_gap(values, cluster_tol):
        if len(group) > 1:
            vectors[:, group] = orthonormalize(vectors[:, group], M)
    vectors = fix_signs(vectors)
    residuals = _residuals(A, M, values, vectors)
    gram = _gram_error(vectors, M)
    if np.any(residuals > tol) or gram > tol:
        raise ConvergenceError(
            f"eigensolve inaccurate: max residual {residuals.max():.3g}, gram error {gram:.3g}",
            residuals=residuals,
        )
    return EigenSolution(values=values, vectors=vectors, residuals=residuals, gram_error=gram)


def solve_dirichlet_scalar(mesh, rule, eps, k, tol=1e-8, dense_threshold=DENSE_THRESHOLD):
    """The ``k`` smallest eigenvalues of ``-div(eps grad f) = rho f``, ``f = 0`` on the boundary."""
    from .assembly import assemble_scalar_pencil

    sp_pencil = assemble_scalar_pencil(mesh, rule, eps)
    return solve_gsym(sp_pencil.K, sp_pencil.M, k, tol=tol, dense_threshold=dense_threshold)
