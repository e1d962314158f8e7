"""Symmetric normalized Laplacians and Laplacian positional encodings.

The encoding keeps the k smallest non-kernel eigenpairs of
L = I - D^{-1/2} A D^{-1/2}, skipping one zero eigenvalue per connected
component, and resolves eigenvector sign ambiguity with a seeded random
sign per column.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from .errors import ConvergenceError
from .graphs import GraphStructure

DENSE_CUTOFF = 512
RESIDUAL_TOL = 1e-6
# Padded columns carry the spectral upper bound so the eigenvalue vector
# stays non-decreasing and inside [0, 2].
PAD_EIGENVALUE = 2.0
_DEFLATION_SHIFT = 3.0
_MAXITER_FACTOR = 50
# Fixed Lanczos starting vector seed: generic direction, reproducible
# across processes (ARPACK's internal choice is not).
_V0_SEED = 0x5EED_1A9C


@dataclass(frozen=True)
class LapPeMatrix:
    """Positional encodings: one column per kept eigenpair, zero-padded.

    Eigenvalues are non-decreasing; padded columns report PAD_EIGENVALUE.
    """

    values: np.ndarray  # (n_nodes, k) float64
    eigenvalues: np.ndarray  # (k,) float64

    @property
    def k(self) -> int:
        return self.values.shape[1]


def normalized_laplacian(graph: GraphStructure) -> sp.csr_matrix:
    """L = I - D^{-1/2} A D^{-1/2}; rows and columns of isolated nodes are zero."""
    n = graph.n_nodes
    deg = graph.degrees().astype(np.float64)
    inv_sqrt = np.zeros(n, dtype=np.float64)
    nz = deg > 0
    inv_sqrt[nz] = 1.0 / np.sqrt(deg[nz])
    adj = graph.adjacency().astype(np.float64)
    scaled = sp.diags(inv_sqrt) @ adj @ sp.diags(inv_sqrt)
    lap = sp.diags(nz.astype(np.float64)) - scaled
    return sp.csr_matrix(lap)


def _residuals(L: sp.spmatrix | np.ndarray, vals: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    """Max-norm residual ||Lv - lambda v||_inf per eigenpair."""
    r = L @ vecs - vecs * vals[None, :]
    if r.size == 0:
        return np.zeros(0)
    return np.abs(r).max(axis=0)


def _starting_vector(n: int) -> np.ndarray:
    return np.random.Generator(np.random.Philox(_V0_SEED)).standard_normal(n)


def smallest_eigenpairs(
    L: sp.spmatrix,
    m: int,
    dense_cutoff: int = DENSE_CUTOFF,
) -> tuple[np.ndarray, np.ndarray]:
    """m algebraically smallest eigenpairs of a symmetric matrix.

    Dense solver at or below dense_cutoff (and whenever m is too close to
    n for Lanczos); ARPACK Lanczos with a fixed starting vector above.
    Raises ConvergenceError if any residual exceeds RESIDUAL_TOL after the
    iteration cap.
    """
    n = L.shape[0]
    if not 0 <= m <= n:
        raise ValueError(f"m={m} outside [0, {n}]")
    if m == 0:
        return np.zeros(0), np.zeros((n, 0))
    if n <= dense_cutoff or m >= n - 1:
        dense = L.toarray() if sp.issparse(L) else np.asarray(L, dtype=np.float64)
        vals, vecs = scipy.linalg.eigh(dense, subset_by_index=(0, m - 1))
    else:
        vals, vecs = _arpack_smallest(L, m)
    order = np.argsort(vals, kind="stable")
    vals, vecs = vals[order], vecs[:, order]
    worst = _residuals(L, vals, vecs).max(initial=0.0)
    if worst > RESIDUAL_TOL:
        raise ConvergenceError(
            f"eigen-residual {worst:.3e} exceeds {RESIDUAL_TOL:.1e}", residual=worst
        )
    return vals, vecs


def _arpack_smallest(
    op: sp.spmatrix | LinearOperator, m: int
) -> tuple[np.ndarray, np.ndarray]:
    n = op.shape[0]
    ncv = min(n, max(2 * m + 1, 64))
    try:
        return eigsh(
            op,
            k=m,
            which="SA",
            ncv=ncv,
            maxiter=_MAXITER_FACTOR * n,
            tol=1e-10,
            v0=_starting_vector(n),
        )
    except ArpackNoConvergence as exc:
        achieved = float("nan")
        if len(exc.eigenvalues):
            partial = exc.eigenvectors @ np.diag(exc.eigenvalues)
            achieved = float(np.abs(op @ exc.eigenvectors - partial).max())
        raise ConvergenceError(
            f"Lanczos did not converge within {_MAXITER_FACTOR * n} iterations",
            residual=achieved,
        ) from exc


def _kernel_basis(graph: GraphStructure, labels: np.ndarray, c: int) -> sp.csr_matrix:
    """Orthonormal kernel basis of the normalized Laplacian, one column
    per component: sqrt(degree) restricted to the component (unit vector
    for isolated nodes)."""
    n = graph.n_nodes
    deg = graph.degrees().astype(np.float64)
    weights = np.sqrt(deg)
    weights[deg == 0] = 1.0  # isolated node: kernel vector is e_i
    norms = np.sqrt(np.bincount(labels, weights=weights**2, minlength=c))
    data = weights / norms[labels]
    return sp.csr_matrix(
        (data, (np.arange(n), labels)), shape=(n, c), dtype=np.float64
    )


def laplacian_pe(graph: GraphStructure, k: int, rng: np.random.Generator) -> LapPeMatrix:
    """LapPE matrix for a graph: k columns, kernel pairs skipped.

    Computes the k + c smallest eigenpairs (c = component count, capped at
    n), drops the c kernel pairs, keeps the next k with zero-padding when
    fewer remain, and flips each kept column by a random sign.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    n = graph.n_nodes
    L = normalized_laplacian(graph)
    c, labels = connected_components(graph.adjacency(), directed=False)
    n_keep = min(k, n - c)

    values = np.zeros((n, k), dtype=np.float64)
    eigenvalues = np.full(k, PAD_EIGENVALUE, dtype=np.float64)
    if n_keep > 0:
        if n <= DENSE_CUTOFF:
            m = min(k + c, n)
            vals, vecs = smallest_eigenpairs(L, m)
            vals, vecs = vals[c : c + n_keep], vecs[:, c : c + n_keep]
        else:
            vals, vecs = _deflated_smallest(L, graph, labels, c, n_keep)
        worst = _residuals(L, vals, vecs).max(initial=0.0)
        if worst > RESIDUAL_TOL:
            raise ConvergenceError(
                f"LapPE residual {worst:.3e} exceeds {RESIDUAL_TOL:.1e}",
                residual=worst,
            )
        signs = np.where(rng.random(n_keep) < 0.5, -1.0, 1.0)
        values[:, :n_keep] = vecs * signs[None, :]
        eigenvalues[:n_keep] = vals
    return LapPeMatrix(values=values, eigenvalues=eigenvalues)


def _deflated_smallest(
    L: sp.csr_matrix,
    graph: GraphStructure,
    labels: np.ndarray,
    c: int,
    n_keep: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Smallest non-kernel eigenpairs via analytic kernel deflation.

    Shifting the known kernel basis U by a constant beyond the spectral
    range makes the wanted pairs the smallest of L + shift * U U^T, so the
    Lanczos solve needs only n_keep pairs instead of n_keep + c.
    """
    n = L.shape[0]
    U = _kernel_basis(graph, labels, c)
    Ut = sp.csr_matrix(U.T)

    def matvec(x: np.ndarray) -> np.ndarray:
        return L @ x + _DEFLATION_SHIFT * (U @ (Ut @ x))

    op = LinearOperator((n, n), matvec=matvec, dtype=np.float64)
    vals, vecs = _arpack_smallest(op, n_keep)
    order = np.argsort(vals, kind="stable")
    vals, vecs = vals[order], vecs[:, order]
    # Remove any residual kernel component, then restore unit norms.
    vecs = vecs - U @ (Ut @ vecs)
    vecs /= np.linalg.norm(vecs, axis=0, keepdims=True)
    return vals, vecs
