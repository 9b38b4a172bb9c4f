"""Closed-form and population co-occurrence matrices.

The closed-form matrix is the almost-sure limit of the walk-sampled PMI
matrix as the number of walks grows: an elementwise logarithm of a weighted
sum of t-step walk kernels, shifted by -log(k) for the negative-sampling
ratio k. Its population counterpart replaces the sampled adjacency with the
true edge probabilities. Both require every entry of the inner sum to be
strictly positive; violations raise WellDefinednessError, which callers are
expected to treat as a countable outcome rather than a crash.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .blockmodel import EdgeProbMatrix, Graph
from .transition import TransitionSet, save_matrix_csv

__all__ = [
    "WalkParams",
    "CoocMatrix",
    "WellDefinednessError",
    "FrobeniusGap",
    "gamma",
    "build_m_tilde0",
    "build_m0",
    "frobenius_gap",
    "save_cooc",
]

_SYMMETRY_TOL = 1e-9
_DINV_SYMMETRY_TOL = 1e-10


@dataclass(frozen=True)
class WalkParams:
    """Window bounds, walk length, negative-sampling ratio, and walk biases.

    The window must satisfy 1 <= t_l <= t_u <= walk_length - 1. The p, q
    biases only influence walk sampling; the closed-form limit assumes
    (p, q) = (1, 1).
    """

    t_l: int
    t_u: int
    walk_length: int
    k_neg: float = 1.0
    p: float = 1.0
    q: float = 1.0

    def __post_init__(self):
        if not (1 <= self.t_l <= self.t_u <= self.walk_length - 1):
            raise ValueError(
                f"window must satisfy 1 <= t_l <= t_u <= L-1, got "
                f"(t_l, t_u, L) = ({self.t_l}, {self.t_u}, {self.walk_length})"
            )
        if self.k_neg <= 0 or self.p <= 0 or self.q <= 0:
            raise ValueError("k_neg, p, q must all be positive")


class WellDefinednessError(ValueError):
    """The inner sum feeding the elementwise log has nonpositive entries."""

    def __init__(self, count: int, min_entry: float, context: str = ""):
        self.count = int(count)
        self.min_entry = float(min_entry)
        msg = (
            f"{count} entries of the inner co-occurrence sum are nonpositive "
            f"(smallest {min_entry:.6g}); the elementwise log is undefined"
        )
        if context:
            msg = f"{context}: {msg}"
        super().__init__(msg)


@dataclass(frozen=True)
class CoocMatrix:
    """Symmetric co-occurrence matrix with provenance tag.

    provenance is one of 'empirical_pmi', 'closed_form', 'population'.
    Empirical matrices may carry -inf sentinels for unobserved pairs; the
    other two provenances are finite by construction.
    """

    M: np.ndarray
    provenance: str
    params: WalkParams | None = None

    def __post_init__(self):
        M = np.asarray(self.M, dtype=float)
        object.__setattr__(self, "M", M)
        if self.provenance not in ("empirical_pmi", "closed_form", "population"):
            raise ValueError(f"unknown provenance {self.provenance!r}")
        if self.provenance == "empirical_pmi":
            if np.isnan(M).any() or np.isposinf(M).any():
                raise ValueError("empirical PMI entries must be finite or -inf")
        else:
            if not np.isfinite(M).all():
                raise ValueError(f"{self.provenance} matrix must be finite")
            asym = np.abs(M - M.T).max()
            if asym > _SYMMETRY_TOL:
                raise ValueError(
                    f"{self.provenance} matrix asymmetric by {asym:.3e} (> {_SYMMETRY_TOL})"
                )

    @property
    def n(self) -> int:
        return self.M.shape[0]


class FrobeniusGap(NamedTuple):
    gap: float
    ref: float


def gamma(walk_length: int, t_l: int, t_u: int) -> int:
    """Window weight (2L - t_l - t_u)(t_u - t_l + 1) / 2.

    Equals sum_{t=t_l}^{t_u} (L - t), the number of ordered in-window
    position pairs per walk.
    """
    if not (1 <= t_l <= t_u <= walk_length - 1):
        raise ValueError(
            f"window must satisfy 1 <= t_l <= t_u <= L-1, got "
            f"(t_l, t_u, L) = ({t_l}, {t_u}, {walk_length})"
        )
    return (2 * walk_length - t_l - t_u) * (t_u - t_l + 1) // 2


def _weighted_kernel_sum(ts: TransitionSet, params: WalkParams, total: float, context: str) -> np.ndarray:
    """(2 |M| / gamma) * sum_t (L - t) D^{-1} W^t, with positivity check."""
    L, t_l, t_u = params.walk_length, params.t_l, params.t_u
    inner = np.zeros((ts.n, ts.n))
    for t in range(t_l, t_u + 1):
        term = ts.degree_inv[:, None] * ts.power(t)
        asym = np.abs(term - term.T).max()
        if asym > _DINV_SYMMETRY_TOL:
            raise ArithmeticError(
                f"D^-1 W^{t} asymmetric by {asym:.3e} (> {_DINV_SYMMETRY_TOL})"
            )
        inner += (L - t) * term
    inner *= 2.0 * total / gamma(L, t_l, t_u)
    nonpos = inner <= 0.0
    if nonpos.any():
        raise WellDefinednessError(nonpos.sum(), inner.min(), context)
    return inner


def build_m_tilde0(graph: Graph, ts: TransitionSet, params: WalkParams) -> CoocMatrix:
    """Closed-form limit matrix from a sampled graph and its walk kernel."""
    if ts.source != "empirical":
        raise ValueError("build_m_tilde0 needs an empirical TransitionSet")
    if ts.n != graph.n or not np.array_equal(ts.degrees, graph.degrees):
        raise ValueError("TransitionSet does not match the graph's degrees")
    inner = _weighted_kernel_sum(ts, params, graph.edge_total, "closed-form matrix")
    M = np.log(inner) - math.log(params.k_neg)
    return CoocMatrix(M=M, provenance="closed_form", params=params)


def build_m0(P: EdgeProbMatrix, ts: TransitionSet, params: WalkParams) -> CoocMatrix:
    """Population matrix from the true edge probabilities."""
    if ts.source != "population":
        raise ValueError("build_m0 needs a population TransitionSet")
    if ts.n != P.n or not np.array_equal(ts.degrees, P.row_sums):
        raise ValueError("TransitionSet does not match P's row sums")
    inner = _weighted_kernel_sum(ts, params, P.total(), "population matrix")
    M = np.log(inner) - math.log(params.k_neg)
    return CoocMatrix(M=M, provenance="population", params=params)


def frobenius_gap(m_a: CoocMatrix, m_b: CoocMatrix) -> FrobeniusGap:
    """Frobenius norm of (m_a - m_b) alongside the norm of m_b."""
    if m_a.M.shape != m_b.M.shape:
        raise ValueError(f"dimension mismatch: {m_a.M.shape} vs {m_b.M.shape}")
    gap = float(np.linalg.norm(m_a.M - m_b.M, "fro"))
    ref = float(np.linalg.norm(m_b.M, "fro"))
    return FrobeniusGap(gap=gap, ref=ref)


def save_cooc(cooc: CoocMatrix, path) -> None:
    """Dense CSV plus a JSON sidecar recording provenance and params."""
    save_matrix_csv(cooc.M, path)
    sidecar = {
        "provenance": cooc.provenance,
        "params": None
        if cooc.params is None
        else {
            "t_l": cooc.params.t_l,
            "t_u": cooc.params.t_u,
            "walk_length": cooc.params.walk_length,
            "k_neg": cooc.params.k_neg,
            "p": cooc.params.p,
            "q": cooc.params.q,
        },
    }
    with open(f"{path}.json", "w") as fh:
        json.dump(sidecar, fh, indent=2)
        fh.write("\n")
