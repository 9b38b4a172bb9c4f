"""Truncated factorization of co-occurrence matrices and subspace comparison.

The input matrices are symmetric, so the rank-d SVD truncation is computed
through a symmetric eigendecomposition: singular values are |eigenvalue|
sorted descending, left factors are the eigenvectors, and right factors
flip sign with the eigenvalue. Embeddings are unique only up to an
orthogonal transform, which is why comparisons go through the Procrustes
distance.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .cooccurrence import CoocMatrix

__all__ = [
    "Embedding",
    "factorize",
    "estimate_rank",
    "procrustes_distance",
    "ProcrustesResult",
    "save_embedding",
    "save_spectrum",
]

_ORTHONORMAL_TOL = 1e-6


@dataclass(frozen=True)
class Embedding:
    """Node factors (orthonormal columns), context factors, full spectrum."""

    F: np.ndarray
    F_ctx: np.ndarray
    spectrum: np.ndarray

    @property
    def n(self) -> int:
        return self.F.shape[0]

    @property
    def d(self) -> int:
        return self.F.shape[1]


class ProcrustesResult(NamedTuple):
    T: np.ndarray
    dist: float


def _as_matrix(M) -> np.ndarray:
    if isinstance(M, CoocMatrix):
        return M.M
    return np.asarray(M, dtype=float)


def factorize(M, d: int) -> Embedding:
    """Best rank-d factorization F @ F_ctx^T of a symmetric matrix.

    F holds the d leading singular vectors (by |eigenvalue|, descending;
    ties keep the eigensolver's order) and F_ctx = eigenvalue-scaled
    copies, so F @ F_ctx^T is the optimal rank-d approximation in
    Frobenius norm.
    """
    A = _as_matrix(M)
    n = A.shape[0]
    if A.ndim != 2 or A.shape[1] != n:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if not (1 <= d <= n):
        raise ValueError(f"need 1 <= d <= n = {n}, got d = {d}")
    eigvals, eigvecs = np.linalg.eigh(A)
    order = np.argsort(-np.abs(eigvals), kind="stable")
    lam = eigvals[order]
    U = eigvecs[:, order]
    F = U[:, :d]
    F_ctx = U[:, :d] * lam[:d][None, :]
    return Embedding(F=F, F_ctx=F_ctx, spectrum=np.abs(lam))


def estimate_rank(spectrum: np.ndarray, threshold_ratio: float = 1e-6) -> int:
    """Largest d with sigma_d / sigma_1 >= threshold_ratio."""
    spectrum = np.asarray(spectrum, dtype=float)
    if spectrum.size == 0:
        raise ValueError("spectrum is empty")
    top = spectrum[0]
    if top <= 0.0:
        return 0
    return int(np.count_nonzero(spectrum >= threshold_ratio * top))


def procrustes_distance(F_hat: np.ndarray, U: np.ndarray) -> ProcrustesResult:
    """min_{T orthogonal} ||F_hat @ T - U||_F and its minimizer.

    Both inputs must be column-orthonormal with matching shapes.
    """
    F_hat = np.asarray(F_hat, dtype=float)
    U = np.asarray(U, dtype=float)
    if F_hat.shape != U.shape:
        raise ValueError(f"shape mismatch: {F_hat.shape} vs {U.shape}")
    d = F_hat.shape[1]
    for name, X in (("F_hat", F_hat), ("U", U)):
        err = np.abs(X.T @ X - np.eye(d)).max()
        if err > _ORTHONORMAL_TOL:
            raise ValueError(f"{name} is not column-orthonormal (deviation {err:.3e})")
    phi, _, psi_t = np.linalg.svd(F_hat.T @ U)
    T = phi @ psi_t
    dist = float(np.linalg.norm(F_hat @ T - U, "fro"))
    return ProcrustesResult(T=T, dist=dist)


def save_embedding(embedding: Embedding, path) -> None:
    """CSV with columns node_id, f_1..f_d."""
    with open(path, "w") as fh:
        header = ",".join(["node_id"] + [f"f_{j + 1}" for j in range(embedding.d)])
        fh.write(header + "\n")
        for i, row in enumerate(embedding.F):
            fh.write(",".join([str(i)] + [f"{x:.17g}" for x in row]) + "\n")


def save_spectrum(embedding: Embedding, path) -> None:
    with open(path, "w") as fh:
        fh.write("index,sigma\n")
        for j, s in enumerate(embedding.spectrum):
            fh.write(f"{j},{s:.17g}\n")
