"""Complete discrete sample data and the CSV sample file format.

A sample file is a comma-separated table: one header row of variable names,
then rows of nonnegative integers. Lines starting with ``#`` are comments.
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import DataError
from .graphs import Variable, VariableTable

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SampleDataset:
    variables: VariableTable
    rows: np.ndarray

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.int64)
        if rows.size == 0:
            rows = rows.reshape(0, len(self.variables))
        if rows.ndim != 2 or rows.shape[1] != len(self.variables):
            raise DataError(f"rows must form an N x {len(self.variables)} table, got shape {rows.shape}")
        if rows.size:
            if rows.min() < 0:
                raise DataError("sample values must be nonnegative")
            cards = np.array(self.variables.cardinalities(self.variables.ids))
            bad = np.nonzero((rows >= cards).any(axis=0))[0]
            if bad.size:
                v = self.variables.ids[bad[0]]
                raise DataError(
                    f"variable {self.variables.label(v)} has values beyond its cardinality "
                    f"{self.variables.cardinality(v)}"
                )
        rows.setflags(write=False)
        object.__setattr__(self, 'rows', rows)

    def __len__(self):
        return int(self.rows.shape[0])

    def column(self, variable_id: int) -> np.ndarray:
        return self.rows[:, self.variables.ids.index(variable_id)]

    def counts(self, scope) -> np.ndarray:
        """Contingency table over ``scope`` in factor layout"""
        scope = tuple(sorted(scope))
        if not scope:
            return np.array([float(len(self))])
        cards = self.variables.cardinalities(scope)
        size = int(np.prod(cards, dtype=np.int64))
        index = np.ravel_multi_index(tuple(self.column(v) for v in scope), cards)
        return np.bincount(index, minlength=size).astype(float)

    def concatenate(self, other: 'SampleDataset') -> 'SampleDataset':
        if not self.variables.same_domain(other.variables):
            raise DataError("cannot concatenate samples over different variables")
        return SampleDataset(self.variables, np.vstack([self.rows, other.rows]))


def _data_lines(handle):
    for line in handle:
        if line.lstrip().startswith('#') or not line.strip():
            continue
        yield line


def read_samples(path, variables: VariableTable | None = None) -> SampleDataset:
    """Read a sample file; cardinalities come from ``variables`` or are inferred"""
    path = Path(path)
    try:
        with path.open(newline='', encoding='utf-8') as handle:
            reader = csv.reader(_data_lines(handle))
            header = next(reader, None)
            if header is None:
                raise DataError(f"{path} has no header row")
            header = [name.strip() for name in header]
            raw = [row for row in reader]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise DataError(f"{path} is not UTF-8 text: {exc}") from exc

    if len(set(header)) != len(header):
        raise DataError(f"{path} repeats a column name")
    width = len(header)
    for lineno, row in enumerate(raw, start=2):
        if len(row) != width:
            raise DataError(f"{path}: data row {lineno - 1} has {len(row)} fields, expected {width}")
    try:
        rows = np.array([[int(value) for value in row] for row in raw], dtype=np.int64).reshape(-1, width)
    except ValueError as exc:
        raise DataError(f"{path}: non-integer sample value ({exc})") from exc
    if rows.size and rows.min() < 0:
        raise DataError(f"{path}: negative sample value")

    if variables is None:
        maxima = rows.max(axis=0) if rows.size else np.zeros(width, dtype=np.int64)
        variables = VariableTable(tuple(
            Variable(i, max(2, int(m) + 1), name) for i, (name, m) in enumerate(zip(header, maxima))
        ))
    else:
        labels = [variables.label(v) for v in variables.ids]
        if header != labels:
            if sorted(header) != sorted(labels):
                raise DataError(f"{path}: columns {header} do not match variables {labels}")
            rows = rows[:, [header.index(label) for label in labels]]

    logger.debug("read %d rows over %d variables from %s", rows.shape[0], width, path)
    return SampleDataset(variables, rows)


def write_samples(dataset: SampleDataset, path) -> None:
    with Path(path).open('w', newline='', encoding='utf-8') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow([dataset.variables.label(v) for v in dataset.variables.ids])
        writer.writerows(dataset.rows.tolist())
