"""Random-walk transition matrices and entrywise norm diagnostics.

The one-step kernel is column-stochastic: W = M D^{-1} where M is either a
sampled adjacency matrix (empirical) or an edge-probability matrix
(population) and D holds the row sums of M. Powers are dense and cached
incrementally, since every intermediate power inside a co-occurrence window
is needed anyway.

Memory is O(n^2) per stored power; intended scale is n <= ~4000.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np

from .blockmodel import EdgeProbMatrix, Graph

__all__ = [
    "TransitionSet",
    "DegreeError",
    "build_transition",
    "norm_max",
    "norm_max_off",
    "norm_max_diag",
    "transition_error_profile",
    "save_matrix_csv",
    "load_matrix_csv",
]

_COLUMN_SUM_TOL = 1e-10


class DegreeError(ValueError):
    """A vertex with zero degree (or zero expected degree) has no walk kernel."""


@dataclass
class TransitionSet:
    """One-step kernel plus materialized powers.

    Read-only after each power is materialized; materialization itself is
    lock-protected so a TransitionSet may be shared across threads.
    """

    base: np.ndarray
    degrees: np.ndarray
    degree_inv: np.ndarray
    source: str
    _powers: dict = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @property
    def n(self) -> int:
        return self.base.shape[0]

    def power(self, t: int) -> np.ndarray:
        """t-step kernel W^t by repeated multiplication, memoized."""
        if t < 1:
            raise ValueError(f"power requires t >= 1, got {t}")
        if t == 1:
            return self.base
        with self._lock:
            have = max(self._powers, default=1)
            current = self._powers.get(have, self.base)
            while have < t:
                current = current @ self.base
                have += 1
                _check_column_sums(current, have)
                self._powers[have] = current
            return self._powers[t]


def _check_column_sums(W: np.ndarray, t: int) -> None:
    err = np.abs(W.sum(axis=0) - 1.0).max()
    if err > _COLUMN_SUM_TOL:
        raise ArithmeticError(
            f"column sums of W^{t} drifted from 1 by {err:.3e} (> {_COLUMN_SUM_TOL})"
        )


def build_transition(source_matrix, source: str | None = None) -> TransitionSet:
    """Column-normalize a Graph's adjacency or an EdgeProbMatrix.

    Raises DegreeError naming the first vertex whose degree (or expected
    degree) is zero.
    """
    if isinstance(source_matrix, Graph):
        M, deg = source_matrix.A, source_matrix.degrees
        inferred = "empirical"
    elif isinstance(source_matrix, EdgeProbMatrix):
        M, deg = source_matrix.P, source_matrix.row_sums
        inferred = "population"
    else:
        raise TypeError(
            f"expected Graph or EdgeProbMatrix, got {type(source_matrix).__name__}"
        )
    source = source or inferred
    if source not in ("empirical", "population"):
        raise ValueError(f"source tag must be 'empirical' or 'population', got {source!r}")
    if (deg <= 0).any():
        vertex = int(np.flatnonzero(deg <= 0)[0])
        raise DegreeError(f"vertex {vertex} has zero degree; no walk kernel exists")
    degree_inv = 1.0 / deg
    base = M * degree_inv[None, :]
    _check_column_sums(base, 1)
    return TransitionSet(base=base, degrees=np.array(deg), degree_inv=degree_inv, source=source)


def norm_max(M: np.ndarray) -> float:
    """Maximum absolute entry."""
    return float(np.abs(M).max())


def norm_max_off(M: np.ndarray) -> float:
    """Maximum absolute off-diagonal entry (0 for a 1 x 1 matrix)."""
    M = np.asarray(M)
    if M.shape[0] < 2:
        return 0.0
    mask = ~np.eye(M.shape[0], dtype=bool)
    return float(np.abs(M[mask]).max())


def norm_max_diag(M: np.ndarray) -> float:
    """Maximum absolute diagonal entry."""
    return float(np.abs(np.diagonal(M)).max())


def transition_error_profile(empirical: TransitionSet, population: TransitionSet, t_list) -> list[dict]:
    """Per-t norm triple of What^t - W^t for the requested t values."""
    if empirical.n != population.n:
        raise ValueError(
            f"dimension mismatch: empirical n={empirical.n}, population n={population.n}"
        )
    records = []
    for t in t_list:
        delta = empirical.power(t) - population.power(t)
        records.append(
            {
                "t": int(t),
                "max": norm_max(delta),
                "max_off": norm_max_off(delta),
                "max_diag": norm_max_diag(delta),
            }
        )
    return records


def save_matrix_csv(M: np.ndarray, path) -> None:
    """Dense CSV, row-major, 17 significant digits."""
    with open(path, "w") as fh:
        for row in np.asarray(M):
            fh.write(",".join(f"{x:.17g}" for x in row) + "\n")


def load_matrix_csv(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", ndmin=2)
