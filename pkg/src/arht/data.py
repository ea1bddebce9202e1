"""CSV ingestion and the column preprocessing used before fitting."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from .core import InvalidArgument, Objective
from .objectives import LeastSquaresObjective, LogisticObjective

log = logging.getLogger(__name__)

MISSING_TOKENS = {"", "na", "nan", "null", "none", "?"}
TASKS = ("regression", "binary")


class DatasetError(ValueError):
    """Malformed input data: bad schema, unparsable cells, wrong labels."""


@dataclass
class Dataset:
    A: np.ndarray
    b: np.ndarray
    task: str = "regression"
    feature_names: list = field(default_factory=list)
    intercept_index: Optional[int] = None
    notes: list = field(default_factory=list)

    def __post_init__(self):
        if self.task not in TASKS:
            raise InvalidArgument(f"task must be one of {TASKS}")
        self.A = np.asarray(self.A, dtype=float)
        self.b = np.asarray(self.b, dtype=float).ravel()
        if self.A.ndim != 2 or self.A.shape[0] != self.b.shape[0]:
            raise InvalidArgument("A must be m x n with len(b) == m")
        if not self.feature_names:
            self.feature_names = [f"x{j}" for j in range(self.A.shape[1])]
        if self.task == "binary" and not np.all((self.b == 0) | (self.b == 1)):
            raise DatasetError("binary task needs labels in {0, 1}")

    @property
    def shape(self) -> tuple:
        return self.A.shape

    @property
    def pinned(self) -> tuple:
        return () if self.intercept_index is None else (self.intercept_index,)


def load_csv(
    path,
    label: str,
    *,
    task: str = "regression",
    categorical: Sequence[str] = (),
) -> Dataset:
    """Read a headered CSV into a :class:`Dataset`.

    Rows with any missing cell are dropped (with a warning). Columns listed in
    ``categorical`` are one-hot encoded; any other non-numeric cell is an error
    naming its row and column.
    """
    df = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    if label not in df.columns:
        raise DatasetError(f"label column {label!r} not found; columns are {list(df.columns)}")
    unknown = set(categorical) - set(df.columns)
    if unknown:
        raise DatasetError(f"categorical columns not found: {sorted(unknown)}")

    missing = df.apply(lambda col: col.str.strip().str.lower().isin(MISSING_TOKENS))
    bad_rows = missing.any(axis=1)
    if bad_rows.any():
        log.warning("dropping %d row(s) with missing values", int(bad_rows.sum()))
    df = df.loc[~bad_rows]

    numeric = {}
    for col in df.columns:
        if col in categorical:
            continue
        values = pd.to_numeric(df[col], errors="coerce")
        if values.isna().any():
            pos = df.index[values.isna()][0]
            raise DatasetError(
                f"non-numeric value {df.at[pos, col]!r} at row {pos + 2}, column {col!r} "
                "(declare it categorical to one-hot encode)"
            )
        numeric[col] = values.astype(float)

    b = numeric.pop(label).to_numpy() if label not in categorical else None
    if b is None:
        raise DatasetError("the label column cannot be categorical")
    features = pd.DataFrame(numeric, index=df.index)
    cats = [c for c in df.columns if c in categorical]
    if cats:
        dummies = pd.get_dummies(df[cats].apply(lambda c: c.str.strip()), prefix=cats, dtype=float)
        features = pd.concat([features, dummies], axis=1)
    return Dataset(features.to_numpy(dtype=float), b, task, list(features.columns))


def preprocess(ds: Dataset, for_arht: bool = False, *, intercept: bool = True) -> Dataset:
    """Append an all-ones intercept column, scale every column to unit l2 norm.

    Zero columns cannot be scaled; they are dropped and noted. With
    ``for_arht`` the identity is stacked under ``A`` and zeros under ``b``,
    giving an ``(m + n') x n'`` design.
    """
    A = ds.A
    names = list(ds.feature_names)
    notes = list(ds.notes)
    norms = np.linalg.norm(A, axis=0)
    keep = norms > 0
    for j in np.flatnonzero(~keep):
        notes.append(f"dropped_zero_column:{names[j]}")
        log.warning("dropping all-zero column %r", names[j])
    A = A[:, keep] / norms[keep]
    names = [nm for nm, k in zip(names, keep) if k]
    intercept_index = None
    if ds.intercept_index is not None and keep[ds.intercept_index]:
        intercept_index = int(np.count_nonzero(keep[: ds.intercept_index]))
    if intercept and intercept_index is None:
        m = A.shape[0]
        A = np.hstack([A, np.full((m, 1), 1.0 / np.sqrt(m))])
        names.append("intercept")
        intercept_index = A.shape[1] - 1
    b = ds.b
    if for_arht:
        n = A.shape[1]
        A = np.vstack([A, np.eye(n)])
        b = np.concatenate([b, np.zeros(n)])
        notes.append("identity_rows_appended")
    out = replace(ds, A=A, b=b, feature_names=names, intercept_index=intercept_index, notes=notes)
    return out


def objective_for(ds: Dataset) -> Objective:
    if ds.task == "binary":
        return LogisticObjective(ds.A, ds.b)
    return LeastSquaresObjective(ds.A, ds.b)
