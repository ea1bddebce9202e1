"""Shared types: hard thresholding, supports, the objective contract and solver reports."""

from __future__ import annotations

import abc
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

DEFAULT_ZERO_TOL = 1e-12
DEFAULT_INNER_TOL = 1e-10


class InvalidArgument(ValueError):
    """Raised when an operation receives arguments outside its domain."""


class DivergenceError(RuntimeError):
    """Raised when an iterative method produces non-finite values."""


def as_support(indices: Iterable[int], n: Optional[int] = None) -> np.ndarray:
    """Sorted, unique int array of indices, validated against ``n`` when given."""
    if isinstance(indices, tuple) and all(a < b for a, b in zip(indices, indices[1:])):
        idx = np.array(indices, dtype=np.intp)
    else:
        idx = np.unique(np.asarray(indices if isinstance(indices, np.ndarray) else list(indices), dtype=np.intp))
    if n is not None and idx.size and (idx[0] < 0 or idx[-1] >= n):
        raise InvalidArgument(f"support indices must lie in [0, {n}), got {idx.tolist()}")
    return idx


def hard_threshold(x: np.ndarray, r: int) -> np.ndarray:
    """Keep the ``r`` largest-magnitude entries of ``x`` and zero the rest.

    Ties are broken by lowest index, so the result is deterministic.

    >>> hard_threshold(np.array([3.0, -1.0, 2.0]), 1)
    array([3., 0., 0.])
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    if r < 0 or r > n:
        raise InvalidArgument(f"r must satisfy 0 <= r <= n={n}, got {r}")
    out = np.zeros_like(x)
    if r == 0:
        return out
    keep = np.argsort(-np.abs(x), kind="stable")[:r]
    out[keep] = x[keep]
    return out


def support_of(x: np.ndarray, zero_tol: float = DEFAULT_ZERO_TOL) -> np.ndarray:
    """Indices with ``|x_i| > zero_tol``."""
    if zero_tol < 0:
        raise InvalidArgument("zero_tol must be non-negative")
    return np.flatnonzero(np.abs(np.asarray(x)) > zero_tol)


class Objective(abc.ABC):
    """Smooth convex objective over R^n.

    Implementations must be safe for concurrent read-only use: ``value``,
    ``gradient`` and ``restricted_minimize`` never mutate observable state
    (internal memoization aside).

    ``restricted_minimize(S, tol)`` returns a minimizer over vectors supported
    on ``S`` whose gradient restricted to ``S`` is at most ``tol`` in the
    infinity norm. The optional ``ridge`` argument is a length-n vector of
    diagonal weights; when given, ``0.5 * sum(ridge * x**2)`` is added to the
    objective for that solve. Conditions met during the solve (rank deficiency,
    separability) are added to ``flags`` if a set is passed.
    """

    n: int

    @abc.abstractmethod
    def value(self, x: np.ndarray) -> float: ...

    @abc.abstractmethod
    def gradient(self, x: np.ndarray) -> np.ndarray: ...

    @abc.abstractmethod
    def restricted_minimize(
        self,
        support: Iterable[int],
        tol: float = DEFAULT_INNER_TOL,
        *,
        ridge: Optional[np.ndarray] = None,
        flags: Optional[set] = None,
        x0: Optional[np.ndarray] = None,
    ) -> np.ndarray: ...

    def restricted_minimum(
        self,
        support: Iterable[int],
        tol: float = DEFAULT_INNER_TOL,
        *,
        ridge: Optional[np.ndarray] = None,
        flags: Optional[set] = None,
        x0: Optional[np.ndarray] = None,
    ) -> tuple:
        """``(x, value(x))`` for the restricted minimizer; ``value`` excludes the ridge term."""
        x = self.restricted_minimize(support, tol, ridge=ridge, flags=flags, x0=x0)
        return x, self.value(x)

    def zero(self) -> np.ndarray:
        return np.zeros(self.n)


@dataclass
class TraceStep:
    """One logged solver iteration.

    ``kind`` is one of ``init``, ``insert``, ``insert-remove``, ``type1``,
    ``type2``, ``threshold`` or ``bisect``. ARHT steps additionally carry the
    regularized values before and after the step, the current target value
    and ``|R ∩ S|``.
    """

    iteration: int
    support: tuple
    value: float
    kind: str
    g_before: Optional[float] = None
    g_after: Optional[float] = None
    opt: Optional[float] = None
    reg_in_support: Optional[int] = None
    removed_from_reg: Optional[int] = None


@dataclass
class SolverReport:
    x: np.ndarray
    support: tuple
    value: float
    trace: list = field(default_factory=list)
    rng_seed: int = 0
    flags: set = field(default_factory=set)
    extra: dict = field(default_factory=dict)

    @property
    def iterations(self) -> int:
        return sum(1 for step in self.trace if step.kind != "init")

    def to_dict(self) -> dict:
        return {
            "x": self.x.tolist(),
            "support": list(self.support),
            "value": self.value,
            "rng_seed": self.rng_seed,
            "flags": sorted(self.flags),
            "iterations": self.iterations,
            "trace": [
                {k: v for k, v in vars(step).items() if v is not None}
                | {"support": list(step.support)}
                for step in self.trace
            ],
            "extra": _jsonable(self.extra),
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj
