"""Stochastic blockmodel graphs: parameters, edge probabilities, and sampling.

A model is (B, pi, rho) with optional per-node degree corrections theta
(degree-corrected variant). Edge probabilities are blockwise constant,
p_ij = rho * B[k(i), k(j)], or theta_i * theta_j * rho * B[k(i), k(j)] with
degree corrections. The probability matrix keeps its nonzero diagonal —
row sums p_i include p_ii — while sampled adjacency matrices always have a
zero diagonal.

All types are immutable after construction; sampling is a pure function of
(inputs, seed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .seeding import generator

__all__ = [
    "BlockModel",
    "Membership",
    "EdgeProbMatrix",
    "Graph",
    "ModelError",
    "build_membership",
    "build_edge_probs",
    "sample_graph",
    "sample_degree_corrections",
    "is_connected",
    "mixing_rate",
    "block_mean",
    "save_edge_list",
    "load_edge_list",
    "save_p_matrix",
    "load_p_matrix",
]

# Eq-style lower bound on generated degree corrections: 1 - (2*pi)^{-1/2}.
THETA_FLOOR = 1.0 - (2.0 * math.pi) ** -0.5


class ModelError(ValueError):
    """Invalid blockmodel parameters or an operation they cannot support."""


@dataclass(frozen=True)
class BlockModel:
    """SBM / DCSBM parameters.

    B is the K x K base connectivity matrix; the effective edge-probability
    kernel is rho * B. theta, when present, holds per-node degree
    corrections and turns the model into a DCSBM.
    """

    B: np.ndarray
    pi: np.ndarray
    rho: float = 1.0
    theta: np.ndarray | None = None

    def __post_init__(self):
        B = np.asarray(self.B, dtype=float)
        pi = np.asarray(self.pi, dtype=float)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "pi", pi)
        if B.ndim != 2 or B.shape[0] != B.shape[1]:
            raise ModelError(f"B must be square, got shape {B.shape}")
        if not np.array_equal(B, B.T):
            raise ModelError("B must be symmetric")
        if not (0.0 < self.rho <= 1.0):
            raise ModelError(f"rho must lie in (0, 1], got {self.rho}")
        kernel = self.rho * B
        if kernel.min() < 0.0 or kernel.max() > 1.0:
            raise ModelError("entries of rho * B must lie in [0, 1]")
        if pi.ndim != 1 or pi.shape[0] != B.shape[0]:
            raise ModelError("pi must be a length-K vector matching B")
        if (pi <= 0.0).any():
            raise ModelError("pi entries must be positive")
        if abs(pi.sum() - 1.0) > 1e-12:
            raise ModelError(f"pi must sum to 1 (tolerance 1e-12), got {pi.sum()!r}")
        if self.theta is not None:
            theta = np.asarray(self.theta, dtype=float)
            object.__setattr__(self, "theta", theta)
            if theta.ndim != 1 or (theta <= 0.0).any():
                raise ModelError("theta must be a vector of positive entries")

    @property
    def K(self) -> int:
        return self.B.shape[0]

    @property
    def is_degree_corrected(self) -> bool:
        return self.theta is not None

    def kernel(self) -> np.ndarray:
        """Effective block connectivity rho * B."""
        return self.rho * self.B

    def with_theta(self, theta: np.ndarray) -> "BlockModel":
        return replace(self, theta=theta)


@dataclass(frozen=True)
class Membership:
    """Contiguous block assignment: block 0 first, then block 1, etc."""

    assignments: np.ndarray
    block_sizes: np.ndarray

    def __post_init__(self):
        labels = np.asarray(self.assignments, dtype=np.int64)
        sizes = np.asarray(self.block_sizes, dtype=np.int64)
        object.__setattr__(self, "assignments", labels)
        object.__setattr__(self, "block_sizes", sizes)
        if sizes.sum() != labels.shape[0]:
            raise ModelError("block sizes must sum to n")
        expected = np.repeat(np.arange(sizes.shape[0]), sizes)
        if not np.array_equal(labels, expected):
            raise ModelError("labels must be laid out contiguously by block")

    @classmethod
    def from_sizes(cls, sizes) -> "Membership":
        sizes = np.asarray(sizes, dtype=np.int64)
        if (sizes <= 0).any():
            raise ModelError("explicit block sizes must be positive")
        return cls(np.repeat(np.arange(sizes.shape[0]), sizes), sizes)

    @property
    def n(self) -> int:
        return self.assignments.shape[0]

    @property
    def K(self) -> int:
        return self.block_sizes.shape[0]


@dataclass(frozen=True)
class EdgeProbMatrix:
    """Symmetric edge-probability matrix with its row sums (diagonal included)."""

    P: np.ndarray
    row_sums: np.ndarray

    @classmethod
    def from_matrix(cls, P: np.ndarray) -> "EdgeProbMatrix":
        P = np.asarray(P, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise ModelError(f"P must be square, got shape {P.shape}")
        if P.min() < 0.0 or P.max() > 1.0:
            raise ModelError("edge probabilities must lie in [0, 1]")
        return cls(P=P, row_sums=P.sum(axis=1))

    @property
    def n(self) -> int:
        return self.P.shape[0]

    def total(self) -> float:
        """Sum of all entries of P (the |P| normalizer)."""
        return float(self.row_sums.sum())


@dataclass(frozen=True)
class Graph:
    """One sampled network: symmetric 0/1 adjacency, zero diagonal."""

    A: np.ndarray
    degrees: np.ndarray
    edge_total: float

    @classmethod
    def from_adjacency(cls, A: np.ndarray) -> "Graph":
        A = np.asarray(A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ModelError(f"adjacency must be square, got shape {A.shape}")
        if np.diagonal(A).any():
            raise ModelError("adjacency diagonal must be zero")
        if not np.array_equal(A, A.T):
            raise ModelError("adjacency must be symmetric")
        if not np.isin(A, (0.0, 1.0)).all():
            raise ModelError("adjacency entries must be 0 or 1")
        degrees = A.sum(axis=1)
        return cls(A=A, degrees=degrees, edge_total=float(degrees.sum()))

    @property
    def n(self) -> int:
        return self.A.shape[0]


def build_membership(n: int, model: BlockModel) -> Membership:
    """Block sizes n_k ~ n * pi_k via largest-remainder rounding.

    Ties in the remainders go to the lower block index. Any empty block is
    an error rather than a silent drop to K-1 blocks.
    """
    if n < model.K:
        raise ModelError(f"need n >= K, got n={n}, K={model.K}")
    quota = n * model.pi
    sizes = np.floor(quota).astype(np.int64)
    remainder = quota - sizes
    short = n - int(sizes.sum())
    if short:
        order = np.argsort(-remainder, kind="stable")
        sizes[order[:short]] += 1
    if (sizes == 0).any():
        k = int(np.flatnonzero(sizes == 0)[0])
        raise ModelError(f"block {k} is empty at n={n} for pi={model.pi.tolist()}")
    return Membership.from_sizes(sizes)


def build_edge_probs(model: BlockModel, membership: Membership) -> EdgeProbMatrix:
    """Blockwise-constant P (theta-scaled for the degree-corrected variant).

    The diagonal p_ii = rho * B_kk (or theta_i^2 * rho * B_kk) is kept: the
    population random-walk kernel is defined from this P, row sums included.
    """
    if membership.K != model.K:
        raise ModelError(
            f"membership has {membership.K} blocks but model has {model.K}"
        )
    labels = membership.assignments
    P = model.kernel()[np.ix_(labels, labels)]
    if model.theta is not None:
        theta = model.theta
        if theta.shape[0] != membership.n:
            raise ModelError(
                f"theta has length {theta.shape[0]} but membership has n={membership.n}"
            )
        P = theta[:, None] * P * theta[None, :]
        if P.max() > 1.0:
            bad = int(np.argmax(P.max(axis=1)))
            raise ModelError(
                f"degree corrections push p_ij above 1 (row {bad}, "
                f"max {P.max():.6g}); rescale theta or rho"
            )
    return EdgeProbMatrix.from_matrix(P)


def sample_graph(P: EdgeProbMatrix, seed) -> Graph:
    """Sample independent Bernoulli edges on the upper triangle, mirrored.

    The diagonal is zero regardless of P's diagonal.
    """
    rng = generator(seed)
    n = P.n
    U = rng.random((n, n))
    upper = np.triu(U < P.P, k=1)
    A = upper.astype(float)
    A += A.T
    degrees = A.sum(axis=1)
    return Graph(A=A, degrees=degrees, edge_total=float(degrees.sum()))


def sample_degree_corrections(n: int, seed) -> np.ndarray:
    """Draw theta_i = |Z_i| + 1 - (2*pi)^{-1/2} with Z_i ~ N(0, 0.25).

    E[theta] = 1 and every draw exceeds 1 - (2*pi)^{-1/2} > 0.6.
    """
    if n < 1:
        raise ModelError(f"need n >= 1, got {n}")
    rng = generator(seed)
    z = rng.normal(0.0, 0.5, size=n)
    return np.abs(z) + THETA_FLOOR


def is_connected(graph: Graph) -> bool:
    """True iff the graph has a single connected component."""
    if graph.n == 0:
        return True
    ncomp, _ = connected_components(csr_matrix(graph.A), directed=False)
    return int(ncomp) == 1


def mixing_rate(B: np.ndarray) -> float:
    """Second-largest |eigenvalue| of B diag(B 1)^{-1}.

    Governs how fast the population walk forgets block structure as the
    window grows: small values mean block information washes out quickly.
    """
    B = np.asarray(B, dtype=float)
    row = B @ np.ones(B.shape[0])
    if (row <= 0).any():
        raise ModelError("B must have positive row sums")
    lam = np.sort(np.abs(np.linalg.eigvals(B / row[None, :])))
    return float(lam[-2])


def block_mean(M: np.ndarray, membership: Membership, exclude_diagonal: bool = False) -> np.ndarray:
    """K x K matrix of entry means over each block pair of M.

    With exclude_diagonal, within-block means skip the i == j cells (the
    right comparison for adjacency matrices, which have no self-loops).
    """
    K = membership.K
    sizes = membership.block_sizes
    offsets = np.concatenate(([0], np.cumsum(sizes)))
    out = np.empty((K, K))
    for a in range(K):
        ra = slice(offsets[a], offsets[a + 1])
        for b in range(K):
            rb = slice(offsets[b], offsets[b + 1])
            block = M[ra, rb]
            if exclude_diagonal and a == b:
                na = sizes[a]
                out[a, b] = (block.sum() - np.trace(block)) / (na * (na - 1))
            else:
                out[a, b] = block.mean()
    return out


def save_edge_list(graph: Graph, path) -> None:
    """Whitespace-separated edge list with a one-line header ``n <count>``."""
    rows, cols = np.nonzero(np.triu(graph.A, k=1))
    with open(path, "w") as fh:
        fh.write(f"n {graph.n}\n")
        for i, j in zip(rows.tolist(), cols.tolist()):
            fh.write(f"{i} {j}\n")


def load_edge_list(path) -> Graph:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 2 or header[0] != "n":
            raise ModelError(f"bad edge-list header in {path}: expected 'n <count>'")
        n = int(header[1])
        A = np.zeros((n, n))
        for lineno, line in enumerate(fh, start=2):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 2:
                raise ModelError(f"{path}:{lineno}: expected 'i j', got {line!r}")
            i, j = int(parts[0]), int(parts[1])
            if not (0 <= i < n and 0 <= j < n) or i == j:
                raise ModelError(f"{path}:{lineno}: invalid edge ({i}, {j}) for n={n}")
            A[i, j] = 1.0
            A[j, i] = 1.0
    return Graph.from_adjacency(A)


def save_p_matrix(P: EdgeProbMatrix, path) -> None:
    """Dense CSV, 17 significant digits."""
    with open(path, "w") as fh:
        for row in P.P:
            fh.write(",".join(f"{x:.17g}" for x in row) + "\n")


def load_p_matrix(path) -> EdgeProbMatrix:
    P = np.loadtxt(path, delimiter=",", ndmin=2)
    return EdgeProbMatrix.from_matrix(P)
