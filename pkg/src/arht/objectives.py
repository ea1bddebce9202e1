"""Least squares, logistic loss, and the adaptively regularized wrapper."""

from __future__ import annotations

from typing import Iterable, Optional

import numpy as np
import scipy.linalg as sla
from scipy.special import expit

from .core import DEFAULT_INNER_TOL, InvalidArgument, Objective, as_support

LOGISTIC_COEF_CAP = 1e4


def _as_matrix(A, b):
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float).ravel()
    if A.ndim != 2:
        raise InvalidArgument("A must be a 2-d array")
    if A.shape[0] != b.shape[0]:
        raise InvalidArgument(f"A has {A.shape[0]} rows but b has {b.shape[0]} entries")
    if A.shape[1] < 1:
        raise InvalidArgument("A must have at least one column")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        raise InvalidArgument("A and b must be finite")
    return A, b


_potrf, _potrs = sla.lapack.get_lapack_funcs(("potrf", "potrs"), dtype=np.float64)


def _spd_solve(H: np.ndarray, rhs: np.ndarray) -> Optional[np.ndarray]:
    """Cholesky solve with one step of iterative refinement; None if H is numerically singular."""
    L, info = _potrf(H, lower=1, clean=0)
    if info != 0:
        return None
    diag = np.abs(L.diagonal())
    if diag.min() ** 2 <= 1e-13 * max(diag.max() ** 2, 1e-300):
        return None
    z, _ = _potrs(L, rhs, lower=1)
    dz, _ = _potrs(L, rhs - H @ z, lower=1)
    return z + dz


class LeastSquaresObjective(Objective):
    """``f(x) = 0.5 * ||Ax - b||^2``.

    Restricted solves factor the Gram submatrix ``A_S^T A_S`` directly; when it is
    numerically singular the minimum-norm least-squares solution is returned and
    ``rank_deficient`` is flagged. Solves are memoized per (support, ridge)
    because randomized solvers revisit the same subproblems many times.
    """

    cache_size = 20_000

    def __init__(self, A, b):
        self.A, self.b = _as_matrix(A, b)
        self._cache: dict = {}
        self.m, self.n = self.A.shape
        self._gram = self.A.T @ self.A
        self._atb = self.A.T @ self.b

    @property
    def gram(self) -> np.ndarray:
        return self._gram

    def residual(self, x: np.ndarray) -> np.ndarray:
        S = np.flatnonzero(x)
        if 4 * S.size >= self.n:
            return self.A @ x - self.b
        return self.A[:, S] @ x[S] - self.b

    def value(self, x: np.ndarray) -> float:
        r = self.residual(np.asarray(x, dtype=float))
        return 0.5 * float(r @ r)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        return self.A.T @ self.residual(np.asarray(x, dtype=float))

    def restricted_minimize(
        self,
        support: Iterable[int],
        tol: float = DEFAULT_INNER_TOL,
        *,
        ridge: Optional[np.ndarray] = None,
        flags: Optional[set] = None,
        x0: Optional[np.ndarray] = None,
    ) -> np.ndarray:
        return self.restricted_minimum(support, tol, ridge=ridge, flags=flags)[0]

    def restricted_minimum(self, support, tol=DEFAULT_INNER_TOL, *, ridge=None, flags=None, x0=None):
        S = as_support(support, self.n)
        x = np.zeros(self.n)
        if S.size == 0:
            return x, 0.5 * float(self.b @ self.b)
        shift = None if ridge is None else np.asarray(ridge, dtype=float).take(S)
        key = (S.tobytes(), None if shift is None else shift.tobytes(), tol)
        hit = self._cache.get(key)
        if hit is None:
            hit = self._solve(S, shift, tol)
            if len(self._cache) >= self.cache_size:
                self._cache.pop(next(iter(self._cache)))
            self._cache[key] = hit
        z, notes, value = hit
        if flags is not None:
            flags.update(notes)
        x[S] = z
        return x, value

    def _solve(self, S: np.ndarray, shift: Optional[np.ndarray], tol: float) -> tuple:
        notes = []
        H = self._gram.take(S, axis=0).take(S, axis=1)
        rhs = self._atb.take(S)
        if shift is not None:
            H.flat[:: S.size + 1] += shift
        z = _spd_solve(H, rhs)
        if z is None:
            notes.append("rank_deficient")
            As = self.A[:, S]
            b = self.b
            if shift is not None and np.any(shift > 0):
                As = np.vstack([As, np.diag(np.sqrt(shift))])
                b = np.concatenate([b, np.zeros(S.size)])
            z = np.linalg.lstsq(As, b, rcond=None)[0]
        if np.max(np.abs(H @ z - rhs)) > tol:
            notes.append("inner_tol_not_met")
        z.flags.writeable = False
        r = self.A[:, S] @ z - self.b
        return z, tuple(notes), 0.5 * float(r @ r)

    def unrestricted_minimum(self) -> float:
        z = np.linalg.lstsq(self.A, self.b, rcond=None)[0]
        return self.value(z)


class LogisticObjective(Objective):
    """Logistic loss ``sum_i log(1 + exp(a_i x)) - b_i a_i x`` with labels in {0, 1}.

    Restricted solves use damped Newton steps with Armijo backtracking. If the
    coefficients grow past ``coef_cap`` (separable data, the infimum is not
    attained) the iterate is clipped and ``separable`` is flagged.
    """

    def __init__(self, A, b, *, coef_cap: float = LOGISTIC_COEF_CAP, max_newton: int = 200):
        self.A, self.b = _as_matrix(A, b)
        if not np.all((self.b == 0) | (self.b == 1)):
            raise InvalidArgument("logistic labels must be 0 or 1")
        self.m, self.n = self.A.shape
        self.coef_cap = coef_cap
        self.max_newton = max_newton

    def _loss(self, z: np.ndarray) -> float:
        return float(np.sum(np.logaddexp(0.0, z) - self.b * z))

    def value(self, x: np.ndarray) -> float:
        return self._loss(self.A @ np.asarray(x, dtype=float))

    def gradient(self, x: np.ndarray) -> np.ndarray:
        z = self.A @ np.asarray(x, dtype=float)
        return self.A.T @ (expit(z) - self.b)

    def restricted_minimize(
        self,
        support: Iterable[int],
        tol: float = DEFAULT_INNER_TOL,
        *,
        ridge: Optional[np.ndarray] = None,
        flags: Optional[set] = None,
        x0: Optional[np.ndarray] = None,
    ) -> np.ndarray:
        S = as_support(support, self.n)
        x = np.zeros(self.n)
        if S.size == 0:
            return x
        As = self.A[:, S]
        lam = np.zeros(S.size) if ridge is None else np.asarray(ridge, dtype=float)[S]
        w = np.zeros(S.size) if x0 is None else np.asarray(x0, dtype=float)[S].copy()

        def obj(v):
            return self._loss(As @ v) + 0.5 * float(lam @ (v * v))

        converged = False
        capped = False
        for _ in range(self.max_newton):
            p = expit(As @ w)
            g = As.T @ (p - self.b) + lam * w
            if np.max(np.abs(g)) <= tol:
                converged = True
                break
            H = As.T @ (As * (p * (1.0 - p))[:, None]) + np.diag(lam)
            d = _spd_solve(H, -g)
            if d is None:
                d = np.linalg.lstsq(H + 1e-12 * np.eye(S.size), -g, rcond=None)[0]
            f0 = obj(w)
            slope = float(g @ d)
            if slope >= 0:
                d, slope = -g, -float(g @ g)
            t = 1.0
            while obj(w + t * d) > f0 + 1e-4 * t * slope and t > 1e-14:
                t *= 0.5
            if t <= 1e-14:
                break
            w = w + t * d
            if np.max(np.abs(w)) > self.coef_cap:
                w = np.clip(w, -self.coef_cap, self.coef_cap)
                capped = True
                break
        if converged and not capped and not lam.any():
            # every example fit to within 1e-8: the data are separable on S and
            # the infimum lies at infinity along w
            p = expit(As @ w)
            if np.max(np.abs(p - self.b)) < 1e-8 and np.max(np.abs(w)) > 0:
                w = w * (self.coef_cap / np.max(np.abs(w)))
                capped = True
        if flags is not None:
            if capped:
                flags.add("separable")
            elif not converged:
                flags.add("inner_tol_not_met")
        x[S] = w
        return x


class RegularizedObjective(Objective):
    """``g_R(x) = f(x) + (weight / 2) * ||x_R||^2`` with a shrinkable set ``R``.

    ``R`` is owned by one solver run; everything else is shared read-only with
    the wrapped objective.
    """

    def __init__(self, inner: Objective, weight: Optional[float] = None, reg_set: Optional[Iterable[int]] = None):
        self.inner = inner
        self.n = inner.n
        self.weight = float(estimate_rho2_plus(inner) if weight is None else weight)
        if self.weight <= 0:
            raise InvalidArgument("regularization weight must be positive")
        self._mask = np.ones(self.n, dtype=bool)
        if reg_set is not None:
            self._mask[:] = False
            self._mask[as_support(reg_set, self.n)] = True

    @property
    def reg_mask(self) -> np.ndarray:
        return self._mask.copy()

    @property
    def reg_set(self) -> np.ndarray:
        return np.flatnonzero(self._mask)

    def penalty(self, x: np.ndarray) -> float:
        xr = np.asarray(x)[self._mask]
        return 0.5 * self.weight * float(xr @ xr)

    def value(self, x: np.ndarray) -> float:
        return self.inner.value(x) + self.penalty(x)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        return self.inner.gradient(x) + self.weight * np.where(self._mask, x, 0.0)

    def restricted_minimize(self, support, tol=DEFAULT_INNER_TOL, *, ridge=None, flags=None, x0=None):
        r = np.where(self._mask, self.weight, 0.0)
        if ridge is not None:
            r = r + ridge
        return self.inner.restricted_minimize(support, tol, ridge=r, flags=flags, x0=x0)

    def restricted_minimum(self, support, tol=DEFAULT_INNER_TOL, *, ridge=None, flags=None, x0=None):
        """``(x, g(x))``: the regularized minimizer and its regularized value."""
        r = np.where(self._mask, self.weight, 0.0)
        if ridge is not None:
            r = r + ridge
        x, inner = self.inner.restricted_minimum(support, tol, ridge=r, flags=flags, x0=x0)
        return x, inner + self.penalty(x)

    def unregularize(self, i: int) -> "RegularizedObjective":
        """Remove index ``i`` from ``R`` in place."""
        if not (0 <= i < self.n) or not self._mask[i]:
            raise InvalidArgument(f"index {i} is not in the regularization set")
        self._mask[i] = False
        return self


def reg_unregularize(obj: RegularizedObjective, i: int) -> RegularizedObjective:
    return obj.unregularize(i)


def estimate_rho2_plus(obj: Objective, value: Optional[float] = None) -> float:
    """Upper bound on the restricted smoothness constant at sparsity 2.

    Uses ``rho_2^+ <= 2 rho_1^+``. For least squares ``rho_1^+`` is the largest
    squared column norm; the logistic loss adds the sigmoid curvature factor 1/4.
    Other objectives must supply ``value``.
    """
    if value is not None:
        return float(value)
    if isinstance(obj, LeastSquaresObjective):
        return 2.0 * float(np.max(np.sum(obj.A ** 2, axis=0)))
    if isinstance(obj, LogisticObjective):
        return 2.0 * 0.25 * float(np.max(np.sum(obj.A ** 2, axis=0)))
    if isinstance(obj, RegularizedObjective):
        return estimate_rho2_plus(obj.inner) + obj.weight
    raise InvalidArgument(f"no rho_2^+ estimate for {type(obj).__name__}; pass value=")


def lower_bound(obj: Objective) -> float:
    """A value ``B <= min_x f(x)`` used to start the ARHT binary search."""
    if isinstance(obj, LeastSquaresObjective):
        return obj.unrestricted_minimum()
    if isinstance(obj, LogisticObjective):
        return 0.0
    if isinstance(obj, RegularizedObjective):
        return lower_bound(obj.inner)
    raise InvalidArgument(f"no lower bound available for {type(obj).__name__}")
