"""Immutable column-major datasets parsed from CSV against a schema.

Categorical cells are interned to integer level codes (first-seen order,
``-1`` marks a missing cell).  Numeric and event-time cells are float64 with
``NaN`` marking missing.  Arrays are frozen after load so datasets can be
shared freely across threads.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DuplicateColumn, MissingColumn, ParseError, SchemaMismatch
from .schema import Schema

MISSING_LABEL = "(missing)"


@dataclass(frozen=True)
class CategoricalColumn:
    codes: np.ndarray            # int32, -1 == missing
    levels: tuple                # level strings, indexed by code

    def __post_init__(self):
        self.codes.flags.writeable = False


@dataclass(frozen=True)
class NumericColumn:
    values: np.ndarray           # float64, NaN == missing

    def __post_init__(self):
        self.values.flags.writeable = False


class Record(NamedTuple):
    """A single row of a dataset, addressed by index."""
    dataset: "Dataset"
    index: int


@dataclass(frozen=True)
class Dataset:
    schema: Schema
    columns: dict                # name -> CategoricalColumn | NumericColumn
    row_count: int

    def __post_init__(self):
        for name, col in self.columns.items():
            arr = col.codes if isinstance(col, CategoricalColumn) else col.values
            if len(arr) != self.row_count:
                raise SchemaMismatch(
                    f"column {name!r} has {len(arr)} cells, expected {self.row_count}"
                )

    def column(self, name: str):
        return self.columns[name]

    def record(self, index: int) -> Record:
        return Record(self, index)

    def missing_mask(self, name: str) -> np.ndarray:
        col = self.columns[name]
        if isinstance(col, CategoricalColumn):
            return col.codes < 0
        return np.isnan(col.values)

    def cell(self, name: str, index: int):
        """Cell value as a python object: level string, float, or None."""
        col = self.columns[name]
        if isinstance(col, CategoricalColumn):
            code = int(col.codes[index])
            return None if code < 0 else col.levels[code]
        v = float(col.values[index])
        return None if np.isnan(v) else v

    def numeric_values(self, name: str, drop_missing: bool = True) -> np.ndarray:
        col = self.columns[name]
        if not isinstance(col, NumericColumn):
            raise SchemaMismatch(f"column {name!r} is not numeric")
        if drop_missing:
            return col.values[~np.isnan(col.values)]
        return col.values


def _is_missing_token(text: str, tokens) -> bool:
    return text == "" or text in tokens


def load_csv(path, schema: Schema) -> Dataset:
    """Parse a CSV file into a Dataset.

    The header must contain every schema column (order-insensitive); extra
    file columns are ignored.  A cell equal to one of the column's missing
    tokens, empty, or parsing to a non-finite float is marked missing.
    """
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        seen = set()
        for h in header:
            if h in seen:
                raise DuplicateColumn(f"{path}: duplicate column {h!r} in header")
            seen.add(h)
        col_pos = {}
        for spec in schema.columns:
            if spec.name not in seen:
                raise MissingColumn(f"{path}: schema column {spec.name!r} not in header")
            col_pos[spec.name] = header.index(spec.name)
        rows = list(reader)

    n = len(rows)
    columns = {}
    for spec in schema.columns:
        pos = col_pos[spec.name]
        if spec.is_numeric:
            values = np.empty(n, dtype=np.float64)
            for i, row in enumerate(rows):
                if pos >= len(row):
                    raise ParseError(
                        f"{path}: short row with {len(row)} fields", row=i + 1
                    )
                text = row[pos].strip()
                if _is_missing_token(text, spec.missing_tokens):
                    values[i] = np.nan
                    continue
                try:
                    v = float(text)
                except ValueError:
                    raise ParseError(
                        f"{path}: non-numeric value {text!r}", row=i + 1,
                        column=spec.name,
                    ) from None
                # non-finite parses (inf/nan text) are treated as missing
                values[i] = v if np.isfinite(v) else np.nan
            columns[spec.name] = NumericColumn(values=values)
        else:
            codes = np.empty(n, dtype=np.int32)
            interned = {}
            levels = []
            for i, row in enumerate(rows):
                if pos >= len(row):
                    raise ParseError(
                        f"{path}: short row with {len(row)} fields", row=i + 1
                    )
                text = row[pos]
                if _is_missing_token(text, spec.missing_tokens):
                    codes[i] = -1
                    continue
                code = interned.get(text)
                if code is None:
                    code = len(levels)
                    interned[text] = code
                    levels.append(text)
                codes[i] = code
            columns[spec.name] = CategoricalColumn(codes=codes, levels=tuple(levels))
    return Dataset(schema=schema, columns=columns, row_count=n)


def from_arrays(schema: Schema, columns: dict) -> Dataset:
    """Build a Dataset from in-memory arrays.

    Categorical columns are given as (codes, levels) pairs or object arrays of
    strings/None; numeric columns as float arrays (NaN missing).
    """
    built = {}
    n = None
    for spec in schema.columns:
        data = columns[spec.name]
        if spec.is_numeric:
            values = np.asarray(data, dtype=np.float64).copy()
            built[spec.name] = NumericColumn(values=values)
            n = len(values)
        else:
            if isinstance(data, tuple):
                codes, levels = data
                built[spec.name] = CategoricalColumn(
                    codes=np.asarray(codes, dtype=np.int32).copy(),
                    levels=tuple(levels),
                )
                n = len(codes)
            else:
                interned, levels = {}, []
                codes = np.empty(len(data), dtype=np.int32)
                for i, v in enumerate(data):
                    if v is None:
                        codes[i] = -1
                        continue
                    key = str(v)
                    code = interned.get(key)
                    if code is None:
                        code = len(levels)
                        interned[key] = code
                        levels.append(key)
                    codes[i] = code
                built[spec.name] = CategoricalColumn(codes=codes, levels=tuple(levels))
                n = len(codes)
    return Dataset(schema=schema, columns=built, row_count=n)


def cell_text(dataset: Dataset, name: str, index: int) -> str:
    v = dataset.cell(name, index)
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(int(v)) if v.is_integer() else repr(v)
    return v


def write_csv(dataset: Dataset, path, extra_rows=()) -> None:
    """Write a dataset (plus optional extra rows given as name->text dicts)."""
    names = dataset.schema.names
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for i in range(dataset.row_count):
            writer.writerow([cell_text(dataset, name, i) for name in names])
        for row in extra_rows:
            writer.writerow([row.get(name, "") for name in names])


def take_rows(dataset: Dataset, indices) -> Dataset:
    """Row subset by index array or boolean mask (copies; levels preserved)."""
    indices = np.asarray(indices)
    if indices.dtype == bool:
        indices = np.flatnonzero(indices)
    else:
        indices = indices.astype(np.int64)
    columns = {}
    for spec in dataset.schema.columns:
        col = dataset.columns[spec.name]
        if isinstance(col, CategoricalColumn):
            columns[spec.name] = CategoricalColumn(
                codes=col.codes[indices].copy(), levels=col.levels
            )
        else:
            columns[spec.name] = NumericColumn(values=col.values[indices].copy())
    return Dataset(schema=dataset.schema, columns=columns, row_count=len(indices))


def concat_datasets(a: Dataset, b: Dataset) -> Dataset:
    """Stack two datasets row-wise, re-interning categorical levels."""
    if not a.schema.compatible_with(b.schema):
        raise SchemaMismatch("cannot concatenate datasets with different schemas")
    columns = {}
    for spec in a.schema.columns:
        ca, cb = a.columns[spec.name], b.columns[spec.name]
        if isinstance(ca, NumericColumn):
            columns[spec.name] = NumericColumn(
                values=np.concatenate([ca.values, cb.values])
            )
        else:
            levels = list(ca.levels)
            remap = {}
            lookup = {lv: i for i, lv in enumerate(levels)}
            for code, lv in enumerate(cb.levels):
                if lv in lookup:
                    remap[code] = lookup[lv]
                else:
                    remap[code] = len(levels)
                    lookup[lv] = len(levels)
                    levels.append(lv)
            new_b = np.array(
                [remap[c] if c >= 0 else -1 for c in cb.codes], dtype=np.int32
            )
            columns[spec.name] = CategoricalColumn(
                codes=np.concatenate([ca.codes, new_b]), levels=tuple(levels)
            )
    return Dataset(
        schema=a.schema, columns=columns, row_count=a.row_count + b.row_count
    )


def population_stats(real: Dataset, synthetic: Dataset) -> dict:
    """Paired summary statistics.

    Numeric columns get mean and SD per dataset (missing excluded, n-1
    denominator); categorical columns get per-level counts and percentages,
    with the missing pseudo-level reported last.
    """
    if not real.schema.compatible_with(synthetic.schema):
        raise SchemaMismatch("population_stats requires identical schemas")
    numeric, categorical = {}, {}
    for spec in real.schema.columns:
        if spec.is_numeric:
            entry = {}
            for label, ds in (("real", real), ("synthetic", synthetic)):
                vals = ds.numeric_values(spec.name)
                entry[label] = {
                    "n": int(len(vals)),
                    "mean": float(np.mean(vals)) if len(vals) else None,
                    "sd": float(np.std(vals, ddof=1)) if len(vals) > 1 else None,
                }
            numeric[spec.name] = entry
        else:
            levels = list(real.columns[spec.name].levels)
            for lv in synthetic.columns[spec.name].levels:
                if lv not in levels:
                    levels.append(lv)
            entry = {"levels": levels + [MISSING_LABEL]}
            for label, ds in (("real", real), ("synthetic", synthetic)):
                col = ds.columns[spec.name]
                counts = []
                for lv in levels:
                    try:
                        code = col.levels.index(lv)
                        counts.append(int(np.sum(col.codes == code)))
                    except ValueError:
                        counts.append(0)
                counts.append(int(np.sum(col.codes < 0)))
                total = max(ds.row_count, 1)
                entry[label] = {
                    "counts": counts,
                    "percents": [100.0 * c / total for c in counts],
                }
            categorical[spec.name] = entry
    return {"numeric": numeric, "categorical": categorical}
