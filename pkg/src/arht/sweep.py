"""Sparsity-vs-loss sweeps and their CSV / JSON serialization."""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .core import InvalidArgument, Objective
from .data import Dataset, objective_for
from .solvers import SOLVERS, SolverConfig, omp

CSV_COLUMNS = ["dataset", "algorithm", "sparsity", "loss", "wall_time_ms", "seed", "flags"]
WARM_STARTED = {"ompr", "els", "arht"}


@dataclass
class SweepRecord:
    dataset: str
    algorithm: str
    sparsity: int
    loss: float
    wall_time_ms: int
    seed: int
    flags: str = ""


@dataclass
class SweepResult:
    dataset: str
    records: list = field(default_factory=list)

    def losses(self, algorithm: str) -> dict:
        return {r.sparsity: r.loss for r in self.records if r.algorithm == algorithm}


def cell_seed(master_seed: int, algorithm: str, k: int) -> int:
    key = [int(master_seed), sorted(SOLVERS).index(algorithm), int(k)]
    return int(np.random.SeedSequence(key).generate_state(1)[0])


def run_sweep(
    data: Union[Dataset, Objective],
    algorithms: Sequence[str],
    sparsity_grid: Sequence[int],
    cfg: Optional[SolverConfig] = None,
    *,
    master_seed: int = 0,
    dataset_id: str = "dataset",
) -> SweepResult:
    """Run every (algorithm, sparsity) cell and record training loss and timing.

    Grid values count selectable features only; the intercept of a
    preprocessed :class:`Dataset` is pinned into every support and adds one to
    the recorded sparsity. Replacement methods start from the OMP support of
    the same sparsity. A failing cell is recorded with NaN loss and an
    ``error:`` flag.
    """
    if isinstance(data, Dataset):
        f, pinned = objective_for(data), data.pinned
    else:
        f, pinned = data, ()
    unknown = [a for a in algorithms if a not in SOLVERS]
    if unknown:
        raise InvalidArgument(f"unknown algorithms {unknown}; choose from {sorted(SOLVERS)}")
    selectable = f.n - len(pinned)
    for k in sparsity_grid:
        if not 0 <= k <= selectable:
            raise InvalidArgument(f"sparsity {k} outside [0, {selectable}]")
    base = cfg or SolverConfig(sparsity=0)

    records = []
    for k in sorted(set(sparsity_grid)):
        s = k + len(pinned)
        warm = None
        for alg in algorithms:
            seed = cell_seed(master_seed, alg, k)
            cell_cfg = base.replace(sparsity=s, rng_seed=seed, pinned=pinned, initial_support=None)
            flags = set()
            start = time.perf_counter()
            try:
                if alg in WARM_STARTED:
                    if warm is None:
                        warm = omp(f, cell_cfg.replace(rng_seed=0)).support
                    cell_cfg = cell_cfg.replace(initial_support=warm)
                report = SOLVERS[alg](f, cell_cfg)
                loss = float(report.value)
                flags |= report.flags
            except Exception as exc:  # a failed cell must not stop the sweep
                loss = math.nan
                flags.add(f"error:{type(exc).__name__}")
            elapsed = int(round((time.perf_counter() - start) * 1000))
            records.append(SweepRecord(dataset_id, alg, s, loss, elapsed, seed, ";".join(sorted(flags))))
    records.sort(key=lambda r: (r.algorithm, r.sparsity))
    return SweepResult(dataset_id, records)


def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def emit_results(res: SweepResult, fmt: str, path) -> None:
    """Write records as CSV (fixed column order, 17 significant digits) or a JSON array."""
    path = Path(path)
    if fmt == "csv":
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            for rec in res.records:
                row = asdict(rec)
                writer.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
    elif fmt == "json":
        path.write_text(json.dumps([asdict(r) for r in res.records], indent=1))
    else:
        raise InvalidArgument(f"unknown format {fmt!r}; use csv or json")


def read_results(path, fmt: Optional[str] = None) -> SweepResult:
    path = Path(path)
    fmt = fmt or path.suffix.lstrip(".").lower()
    if fmt == "csv":
        with path.open(newline="") as fh:
            rows = list(csv.DictReader(fh))
        records = [
            SweepRecord(r["dataset"], r["algorithm"], int(r["sparsity"]), float(r["loss"]),
                        int(r["wall_time_ms"]), int(r["seed"]), r["flags"])
            for r in rows
        ]
    elif fmt == "json":
        records = [SweepRecord(**r) for r in json.loads(path.read_text())]
    else:
        raise InvalidArgument(f"cannot infer format of {path}")
    name = records[0].dataset if records else ""
    return SweepResult(name, records)
