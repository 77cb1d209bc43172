"""Observation containers: single-fidelity sets and nested two-fidelity pairs."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, DuplicateLocations, MissingGradients, NotNested

DUPLICATE_TOL = 1e-12
NESTING_TOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class GradObservationSet:
    """N locations with QoI values and, optionally, full gradients.

    ``X`` is ``(N, d)``, ``y`` is ``(N,)``, ``grads`` is ``(N, d)`` or None.
    A 1-D ``X`` is read as N scalar locations.
    """

    X: np.ndarray
    y: np.ndarray
    grads: np.ndarray | None = None

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if X.ndim != 2:
            raise DimensionMismatch(f"X must be (N, d), got shape {X.shape}")
        y = np.asarray(self.y, dtype=float).reshape(-1)
        if y.shape[0] != X.shape[0]:
            raise DimensionMismatch(f"{X.shape[0]} locations but {y.shape[0]} values")
        grads = self.grads
        if grads is not None:
            grads = np.asarray(grads, dtype=float)
            if grads.ndim == 1 and X.shape[1] == 1:
                grads = grads.reshape(-1, 1)
            if grads.shape != X.shape:
                raise DimensionMismatch(f"gradients must have shape {X.shape}, got {grads.shape}")
        if not np.all(np.isfinite(X)) or not np.all(np.isfinite(y)):
            raise ValueError("locations and values must be finite")
        if grads is not None and not np.all(np.isfinite(grads)):
            raise ValueError("gradients must be finite")
        _reject_duplicates(X)
        object.__setattr__(self, "X", _frozen(X))
        object.__setattr__(self, "y", _frozen(y))
        object.__setattr__(self, "grads", None if grads is None else _frozen(grads))

    @classmethod
    def empty(cls, dim: int, with_grads: bool = True) -> "GradObservationSet":
        return cls(np.empty((0, dim)), np.empty(0), np.empty((0, dim)) if with_grads else None)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    @property
    def has_grads(self) -> bool:
        return self.grads is not None

    def without_grads(self) -> "GradObservationSet":
        return GradObservationSet(self.X, self.y, None)

    def gradient_component(self, i: int) -> "GradObservationSet":
        """Value-only set whose "values" are the i-th gradient component."""
        if self.grads is None:
            raise MissingGradients("observation set carries no gradients")
        return GradObservationSet(self.X, self.grads[:, i], None)

    def augmented_values(self) -> np.ndarray:
        """``(y, grads location-major)`` or just ``y`` when value-only."""
        if self.grads is None:
            return np.array(self.y)
        return np.concatenate([self.y, self.grads.reshape(-1)])


def _reject_duplicates(X: np.ndarray):
    n = X.shape[0]
    if n < 2:
        return
    # lexicographic sort puts coincident points next to each other in the first key;
    # compare within a small window on the leading coordinate
    order = np.lexsort(X.T[::-1])
    Xs = X[order]
    for i in range(n - 1):
        j = i + 1
        while j < n and Xs[j, 0] - Xs[i, 0] <= DUPLICATE_TOL:
            if np.all(np.abs(Xs[j] - Xs[i]) <= DUPLICATE_TOL):
                raise DuplicateLocations(
                    f"duplicate training locations {Xs[i].tolist()} (rows {order[i]} and {order[j]})"
                )
            j += 1


def nesting_map(X_low: np.ndarray, X_high: np.ndarray, tol: float = NESTING_TOL) -> np.ndarray:
    """Index into ``X_low`` for each high-fidelity location; NotNested if any is missing."""
    idx = np.empty(X_high.shape[0], dtype=int)
    for h, x in enumerate(X_high):
        hits = np.flatnonzero(np.all(np.abs(X_low - x) <= tol, axis=1))
        if hits.size == 0:
            coords = ", ".join(f"{v:g}" for v in x)
            raise NotNested(f"high-fidelity location ({coords}) has no low-fidelity match")
        idx[h] = hits[0]
    return idx


@dataclass(frozen=True)
class MultiFidelityData:
    """Nested low/high observation pair (every high location is also a low location)."""

    low: GradObservationSet
    high: GradObservationSet
    nesting: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.low.dim != self.high.dim:
            raise DimensionMismatch(
                f"low-fidelity dimension {self.low.dim} differs from high-fidelity {self.high.dim}"
            )
        nest = nesting_map(self.low.X, self.high.X)
        nest.setflags(write=False)
        object.__setattr__(self, "nesting", nest)

    @property
    def dim(self) -> int:
        return self.low.dim

    @property
    def has_grads(self) -> bool:
        return self.low.has_grads and self.high.has_grads

    def without_grads(self) -> "MultiFidelityData":
        return MultiFidelityData(self.low.without_grads(), self.high.without_grads())

    def gradient_component(self, i: int) -> "MultiFidelityData":
        return MultiFidelityData(self.low.gradient_component(i), self.high.gradient_component(i))
