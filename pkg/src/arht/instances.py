"""Synthetic problem generators with known sparse targets."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .core import InvalidArgument
from .objectives import LeastSquaresObjective


@dataclass
class PlantedInstance:
    objective: LeastSquaresObjective
    x_star: np.ndarray
    s_star: int
    noise_level: float = 0.0
    seed: int = 0
    initial_support: Optional[tuple] = None
    metadata: dict = field(default_factory=dict)

    @property
    def support_star(self) -> tuple:
        return tuple(np.flatnonzero(self.x_star).tolist())

    def to_json(self) -> dict:
        return {
            "A": self.objective.A.tolist(),
            "b": self.objective.b.tolist(),
            "x_star": self.x_star.tolist(),
            "s_star": self.s_star,
            "noise_level": self.noise_level,
            "seed": self.seed,
            "initial_support": None if self.initial_support is None else list(self.initial_support),
            "metadata": self.metadata,
        }

    @classmethod
    def from_json(cls, data: dict) -> "PlantedInstance":
        init = data.get("initial_support")
        return cls(
            objective=LeastSquaresObjective(np.array(data["A"], dtype=float), np.array(data["b"], dtype=float)),
            x_star=np.array(data["x_star"], dtype=float),
            s_star=int(data["s_star"]),
            noise_level=float(data.get("noise_level", 0.0)),
            seed=int(data.get("seed", 0)),
            initial_support=None if init is None else tuple(init),
            metadata=dict(data.get("metadata", {})),
        )

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json()))

    @classmethod
    def load(cls, path) -> "PlantedInstance":
        return cls.from_json(json.loads(Path(path).read_text()))


def gaussian_planted(
    m: int,
    n: int,
    s_star: int,
    noise_level: float = 0.0,
    seed: int = 0,
    *,
    correlation: float = 0.0,
) -> PlantedInstance:
    """Gaussian design with unit-norm columns and a random ±1 target on ``s_star`` coordinates.

    ``correlation`` in [0, 1) mixes neighbouring columns with an AR(1) profile
    (column correlation ``correlation**|i-j|`` before normalization). The
    measurements are ``b = A x* + noise_level * u`` with ``u`` a unit-norm
    Gaussian direction.
    """
    if m < 1 or not 1 <= s_star <= n:
        raise InvalidArgument("need m >= 1 and 1 <= s_star <= n")
    if noise_level < 0 or not 0 <= correlation < 1:
        raise InvalidArgument("noise_level must be >= 0 and correlation in [0, 1)")
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((m, n))
    if correlation > 0:
        Z = A
        A = np.empty_like(Z)
        A[:, 0] = Z[:, 0]
        scale = math.sqrt(1.0 - correlation ** 2)
        for j in range(1, n):
            A[:, j] = correlation * A[:, j - 1] + scale * Z[:, j]
    A /= np.linalg.norm(A, axis=0)
    support = np.sort(rng.choice(n, size=s_star, replace=False))
    x_star = np.zeros(n)
    x_star[support] = rng.choice([-1.0, 1.0], size=s_star)
    b = A @ x_star
    if noise_level > 0:
        u = rng.standard_normal(m)
        b = b + noise_level * u / np.linalg.norm(u)
    meta = {"kind": "gaussian", "m": m, "n": n, "correlation": correlation}
    return PlantedInstance(LeastSquaresObjective(A, b), x_star, s_star, noise_level, seed, metadata=meta)


def adversarial_blocks(s_star: int, kappa: int) -> tuple:
    """Index ranges of the three coordinate blocks (0-based, half-open)."""
    i1 = range(0, s_star)
    i2 = range(s_star, s_star * (1 + kappa))
    i3 = range(s_star * (1 + kappa), s_star * (1 + kappa + kappa * kappa))
    return i1, i2, i3


def ompr_adversarial(s_star: int, kappa: int, delta: float = 1e-3) -> tuple:
    """Diagonal least-squares instance on which OMPR started inside the third block stalls.

    Coordinates split into blocks of sizes ``s*``, ``s* kappa`` and
    ``s* kappa^2`` with diagonal entries ``1, sqrt(kappa), 1`` and targets
    ``kappa sqrt(1-4 delta), sqrt(kappa) sqrt(1-2 delta), 1``. The target
    solution is the minimizer supported on the first block, with value
    ``s* kappa^2 (1 - delta)``. Returns the instance and a starting support of
    ``s* kappa^2 / 2`` indices from the third block.
    """
    if kappa < 2 or kappa % 2:
        raise InvalidArgument("kappa must be an even integer >= 2")
    if not 0 < delta < 0.125:
        raise InvalidArgument("delta must lie in (0, 1/8)")
    if s_star < 1:
        raise InvalidArgument("s_star must be >= 1")
    i1, i2, i3 = adversarial_blocks(s_star, kappa)
    n = s_star * (1 + kappa + kappa * kappa)
    diag = np.ones(n)
    b = np.ones(n)
    diag[i2.start:i2.stop] = math.sqrt(kappa)
    b[i1.start:i1.stop] = kappa * math.sqrt(1 - 4 * delta)
    b[i2.start:i2.stop] = math.sqrt(kappa) * math.sqrt(1 - 2 * delta)
    x_star = np.zeros(n)
    x_star[i1.start:i1.stop] = kappa * math.sqrt(1 - 4 * delta)
    S0 = tuple(range(i3.start, i3.start + s_star * kappa * kappa // 2))
    meta = {"kind": "ompr_adversarial", "kappa": kappa, "delta": delta,
            "blocks": [[r.start, r.stop] for r in (i1, i2, i3)]}
    inst = PlantedInstance(LeastSquaresObjective(np.diag(diag), b), x_star, s_star, 0.0, 0, S0, meta)
    return inst, S0
