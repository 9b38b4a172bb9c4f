"""Walk sampling, window co-occurrence counting, and the PMI transform.

This is the empirical side of the pipeline: second-order biased random
walks started from the degree-proportional stationary distribution, counted
into a symmetric node-context matrix over a position window, and turned
into a shifted PMI matrix. For (p, q) = (1, 1) the walk is a simple random
walk and batches are generated fully vectorized; general (p, q) walks fall
back to a per-walk loop and are intended for small graphs.

Walk batches draw from per-batch derived streams (fixed batch size
``WALK_BATCH``), so corpora depend only on (graph, params, r, seed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .blockmodel import Graph
from .cooccurrence import CoocMatrix, WalkParams, build_m_tilde0
from .seeding import child_sequence, generator
from .transition import build_transition

__all__ = [
    "WalkCorpus",
    "CountMatrix",
    "start_distribution",
    "step_distribution",
    "sample_walk",
    "build_corpus",
    "sample_counts",
    "count_cooccurrences",
    "pmi_transform",
    "convergence_check",
    "save_corpus",
]

# Fixed batch size for vectorized walk generation; part of the determinism
# contract (results depend on seed only, never on scheduling).
WALK_BATCH = 1 << 17

# build_corpus retains walks in memory; past this many walks, callers should
# stream through sample_counts instead.
MAX_RETAINED_WALKS = 1 << 22

_STREAM_STARTS = 0
_STREAM_STEPS = 1


@dataclass(frozen=True)
class WalkCorpus:
    """Sampled walks, one row per walk, plus per-node start counts."""

    walks: np.ndarray
    starts_per_node: np.ndarray
    params: WalkParams

    @property
    def num_walks(self) -> int:
        return self.walks.shape[0]

    @property
    def n(self) -> int:
        return self.starts_per_node.shape[0]


@dataclass(frozen=True)
class CountMatrix:
    """Symmetric nonnegative integer co-occurrence counts."""

    C: np.ndarray
    total: int


class _Adjacency:
    """CSR-style neighbor arrays for fast sampling."""

    def __init__(self, graph: Graph):
        A = graph.A
        self.n = graph.n
        self.deg = graph.degrees.astype(np.int64)
        if (self.deg == 0).any():
            vertex = int(np.flatnonzero(self.deg == 0)[0])
            raise ValueError(f"vertex {vertex} has no neighbors; walks cannot proceed")
        rows, cols = np.nonzero(A)
        order = np.lexsort((cols, rows))
        self.nbrs = cols[order].astype(np.int64)
        self.indptr = np.concatenate(([0], np.cumsum(self.deg)))

    def neighbors(self, v: int) -> np.ndarray:
        return self.nbrs[self.indptr[v] : self.indptr[v + 1]]


def start_distribution(graph: Graph) -> np.ndarray:
    """Stationary start law: S_i = d_i / sum(d)."""
    return graph.degrees / graph.edge_total


def step_distribution(graph: Graph, prev: int, cur: int, params: WalkParams) -> np.ndarray:
    """Second-order transition law over N(cur) given the previous node.

    Unnormalized weights: 1/p to backtrack, 1 for common neighbors of prev
    and cur, 1/q for nodes new to prev's neighborhood.
    """
    adj = _Adjacency(graph)
    cand = adj.neighbors(cur)
    weights = _second_order_weights(adj, prev, cur, cand, params)
    return weights / weights.sum()


def _second_order_weights(adj: _Adjacency, prev: int, cur: int, cand: np.ndarray, params: WalkParams) -> np.ndarray:
    prev_nbrs = adj.neighbors(prev)
    w = np.where(np.isin(cand, prev_nbrs, assume_unique=True), 1.0, 1.0 / params.q)
    w[cand == prev] = 1.0 / params.p
    return w


def sample_walk(graph: Graph, start: int, params: WalkParams, seed) -> np.ndarray:
    """One second-order walk of length walk_length from `start`."""
    adj = _Adjacency(graph)
    rng = generator(seed)
    return _walk_one(adj, int(start), params, rng)


def _walk_one(adj: _Adjacency, start: int, params: WalkParams, rng: np.random.Generator) -> np.ndarray:
    L = params.walk_length
    walk = np.empty(L, dtype=np.int64)
    walk[0] = start
    if L == 1:
        return walk
    cand = adj.neighbors(start)
    cur = int(cand[rng.integers(cand.size)])
    walk[1] = cur
    prev = start
    uniform = params.p == 1.0 and params.q == 1.0
    for l in range(2, L):
        cand = adj.neighbors(cur)
        if uniform:
            nxt = int(cand[rng.integers(cand.size)])
        else:
            w = _second_order_weights(adj, prev, cur, cand, params)
            cum = np.cumsum(w)
            nxt = int(cand[np.searchsorted(cum, rng.random() * cum[-1], side="right")])
        walk[l] = nxt
        prev, cur = cur, nxt
    return walk


def _uniform_walk_batch(adj: _Adjacency, starts: np.ndarray, L: int, rng: np.random.Generator) -> np.ndarray:
    walks = np.empty((starts.size, L), dtype=np.int64)
    walks[:, 0] = starts
    cur = starts
    for l in range(1, L):
        cur = adj.nbrs[adj.indptr[cur] + rng.integers(0, adj.deg[cur])]
        walks[:, l] = cur
    return walks


def _iter_walk_batches(graph: Graph, r: int, params: WalkParams, seed):
    """Yield walk batches of at most WALK_BATCH rows, r * n walks in total."""
    if r < 1:
        raise ValueError(f"need r >= 1 walks per start draw, got {r}")
    adj = _Adjacency(graph)
    num_walks = r * graph.n
    starts = generator(seed, _STREAM_STARTS).choice(
        graph.n, size=num_walks, p=start_distribution(graph)
    )
    uniform = params.p == 1.0 and params.q == 1.0
    for b, lo in enumerate(range(0, num_walks, WALK_BATCH)):
        batch_starts = starts[lo : lo + WALK_BATCH].astype(np.int64)
        rng = generator(seed, _STREAM_STEPS, b)
        if uniform:
            yield _uniform_walk_batch(adj, batch_starts, params.walk_length, rng)
        else:
            yield np.stack(
                [_walk_one(adj, int(s), params, rng) for s in batch_starts]
            )


def build_corpus(graph: Graph, r: int, params: WalkParams, seed) -> WalkCorpus:
    """r * n walks with starts drawn i.i.d. from the stationary law.

    The number of walks leaving each node is therefore random with
    expectation r * n * S_i. Corpora are held in memory; above
    MAX_RETAINED_WALKS use sample_counts, which streams.
    """
    if r * graph.n > MAX_RETAINED_WALKS:
        raise ValueError(
            f"{r * graph.n} walks exceed the retention cap {MAX_RETAINED_WALKS}; "
            "stream through sample_counts instead"
        )
    walks = np.concatenate(list(_iter_walk_batches(graph, r, params, seed)), axis=0)
    starts_per_node = np.bincount(walks[:, 0], minlength=graph.n)
    return WalkCorpus(walks=walks, starts_per_node=starts_per_node, params=params)


def _count_into(flat: np.ndarray, walks: np.ndarray, params: WalkParams, n: int) -> None:
    L = walks.shape[1]
    for t in range(params.t_l, params.t_u + 1):
        idx = walks[:, : L - t] * n + walks[:, t:]
        flat += np.bincount(idx.ravel(), minlength=n * n)


def count_cooccurrences(corpus: WalkCorpus) -> CountMatrix:
    """Window pair counts, both orientations per ordered position pair.

    For every walk and every position pair (a, a + t) with t in the window,
    both (v_a, v_{a+t}) and (v_{a+t}, v_a) are incremented, so C is
    symmetric by construction and sums to 2 * num_walks * gamma.
    """
    n = corpus.n
    flat = np.zeros(n * n, dtype=np.int64)
    _count_into(flat, corpus.walks.astype(np.int64), corpus.params, n)
    forward = flat.reshape(n, n)
    C = forward + forward.T
    return CountMatrix(C=C, total=int(C.sum()))


def sample_counts(graph: Graph, r: int, params: WalkParams, seed) -> CountMatrix:
    """Generate r * n walks and count them, streaming batch by batch.

    Identical to count_cooccurrences(build_corpus(...)) for the same seed,
    without retaining the walks.
    """
    n = graph.n
    flat = np.zeros(n * n, dtype=np.int64)
    for walks in _iter_walk_batches(graph, r, params, seed):
        _count_into(flat, walks, params, n)
    forward = flat.reshape(n, n)
    C = forward + forward.T
    return CountMatrix(C=C, total=int(C.sum()))


def pmi_transform(counts: CountMatrix, k_neg: float, params: WalkParams | None = None) -> CoocMatrix:
    """Shifted PMI: log(C_ij * total / (row_i * col_j)) - log(k).

    Entries with C_ij = 0 become -inf sentinels; callers exclude them from
    norms but may count them. A zero row or column sum is an error.
    """
    if k_neg <= 0:
        raise ValueError(f"k_neg must be positive, got {k_neg}")
    C = counts.C.astype(float)
    row = C.sum(axis=1)
    col = C.sum(axis=0)
    if (row <= 0).any() or (col <= 0).any():
        vertex = int(np.flatnonzero((row <= 0) | (col <= 0))[0])
        raise ValueError(f"node {vertex} never co-occurs; PMI row/column sum is zero")
    with np.errstate(divide="ignore"):
        M = np.log(C * float(counts.total)) - np.log(np.outer(row, col)) - math.log(k_neg)
    return CoocMatrix(M=M, provenance="empirical_pmi", params=params)


def convergence_check(graph: Graph, params: WalkParams, r_schedule, seed) -> list[dict]:
    """Gap between sampled PMI and its closed-form limit at each r.

    Only valid for (p, q) = (1, 1): the limit matrix is derived for simple
    walks. Reports the max absolute difference over entries observed at
    least once, plus the count of unobserved (undefined) entries.
    """
    if (params.p, params.q) != (1.0, 1.0):
        raise ValueError(
            f"closed-form limit only holds for (p, q) = (1, 1); got "
            f"({params.p}, {params.q})"
        )
    limit = build_m_tilde0(graph, build_transition(graph), params)
    records = []
    for j, r in enumerate(r_schedule):
        counts = sample_counts(graph, int(r), params, child_sequence(seed, j))
        pmi = pmi_transform(counts, params.k_neg, params)
        defined = counts.C > 0
        max_abs_diff = (
            float(np.abs(pmi.M - limit.M)[defined].max()) if defined.any() else math.inf
        )
        records.append(
            {
                "r": int(r),
                "max_abs_diff": max_abs_diff,
                "n_undefined": int((~defined).sum()),
            }
        )
    return records


def save_corpus(corpus: WalkCorpus, path) -> None:
    """One walk per line, space-separated 0-based node ids."""
    with open(path, "w") as fh:
        for walk in corpus.walks:
            fh.write(" ".join(str(int(v)) for v in walk) + "\n")
