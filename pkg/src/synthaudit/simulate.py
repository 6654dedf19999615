"""Seeded toy-data generators for calibration runs, fixtures and demos.

The main generator samples every column independently from a fixed marginal
table ("product of marginals"), which makes a second independent sample a
perfect null case for the privacy attacks: nothing ties a synthetic record to
any particular real record.
"""
from __future__ import annotations

import numpy as np

from .data import Dataset, from_arrays, take_rows
from .schema import ColumnSpec, Schema


def toy_schema() -> Schema:
    return Schema(columns=(
        ColumnSpec("age", "numeric", quasi_identifier=True),
        ColumnSpec("bmi", "numeric"),
        ColumnSpec("sex", "categorical", quasi_identifier=True),
        ColumnSpec("race", "categorical", quasi_identifier=True),
        ColumnSpec("condition", "categorical", sensitive=True),
        ColumnSpec("smoker", "categorical", sensitive=True),
        ColumnSpec("visits", "numeric", sensitive=True),
    ))


def _marginals(rng_unused=None):
    ages = np.arange(20, 90, dtype=float)
    age_p = np.exp(-0.5 * ((ages - 55) / 18.0) ** 2)
    bmis = np.round(np.linspace(16.0, 45.0, 59), 1)
    bmi_p = np.exp(-0.5 * ((bmis - 27) / 5.0) ** 2)
    visits = np.arange(0, 13, dtype=float)
    visits_p = np.exp(-visits / 3.0)
    return {
        "age": ("numeric", ages, age_p / age_p.sum()),
        "bmi": ("numeric", bmis, bmi_p / bmi_p.sum()),
        "sex": ("categorical", ["M", "F"], [0.6, 0.4]),
        "race": ("categorical", ["White", "Black", "Asian", "Other"],
                 [0.5, 0.25, 0.15, 0.1]),
        "condition": ("categorical",
                      ["none", "chf", "copd", "diabetes", "cancer", "renal"],
                      [0.35, 0.2, 0.15, 0.15, 0.1, 0.05]),
        "smoker": ("categorical", ["N", "Y"], [0.7, 0.3]),
        "visits": ("numeric", visits, visits_p / visits_p.sum()),
    }


def sample_marginals(n: int, rng, missing_rate: float = 0.0) -> Dataset:
    """Independent per-column draws from the fixed toy marginal table."""
    schema = toy_schema()
    table = _marginals()
    columns = {}
    for spec in schema.columns:
        kind, support, probs = table[spec.name]
        draws = rng.choice(len(support), size=n, p=np.asarray(probs))
        if kind == "numeric":
            vals = np.asarray(support, dtype=float)[draws]
            if missing_rate > 0:
                vals = vals.copy()
                vals[rng.random(n) < missing_rate] = np.nan
            columns[spec.name] = vals
        else:
            cells = [support[i] for i in draws]
            if missing_rate > 0:
                cells = [None if rng.random() < missing_rate else c for c in cells]
            columns[spec.name] = cells
    return from_arrays(schema, columns)


def split_halves(dataset: Dataset, rng):
    """Random disjoint halves of equal size (first half rounds up)."""
    perm = rng.permutation(dataset.row_count)
    half = (dataset.row_count + 1) // 2
    return take_rows(dataset, np.sort(perm[:half])), \
        take_rows(dataset, np.sort(perm[half:]))


def bootstrap_rows(dataset: Dataset, n: int, rng) -> Dataset:
    return take_rows(dataset, rng.integers(0, dataset.row_count, size=n))


def shuffle_rows(dataset: Dataset, rng) -> Dataset:
    return take_rows(dataset, rng.permutation(dataset.row_count))


N_NOISE_COLUMNS = 20


def signal_schema() -> Schema:
    informative = (
        ColumnSpec("x1", "numeric"),
        ColumnSpec("x2", "numeric"),
        ColumnSpec("x3", "numeric"),
        ColumnSpec("x4", "numeric"),
        ColumnSpec("group", "categorical"),
    )
    noise = tuple(ColumnSpec(f"n{i}", "numeric")
                  for i in range(1, N_NOISE_COLUMNS + 1))
    return Schema(columns=informative + noise + (
        ColumnSpec("outcome", "categorical"),))


def sample_signal(n: int, rng) -> Dataset:
    """Binary outcome driven by a known linear signal (x1 strongest).

    The n1..n20 noise columns widen the feature space so a model trained on
    destroyed labels cannot align with the signal direction by chance.
    """
    X = rng.normal(size=(n, 4))
    group = rng.choice(["a", "b", "c"], size=n, p=[0.5, 0.3, 0.2])
    logit = 1.6 * X[:, 0] + 0.8 * X[:, 1] + 0.4 * X[:, 2] \
        + np.where(group == "b", 0.5, 0.0)
    p = 1.0 / (1.0 + np.exp(-logit))
    y = np.where(rng.random(n) < p, "pos", "neg")
    columns = {
        "x1": X[:, 0], "x2": X[:, 1], "x3": X[:, 2], "x4": X[:, 3],
        "group": list(group), "outcome": list(y),
    }
    for i in range(1, N_NOISE_COLUMNS + 1):
        columns[f"n{i}"] = rng.normal(size=n)
    return from_arrays(signal_schema(), columns)


def shuffle_column(dataset: Dataset, name: str, rng) -> Dataset:
    """Copy of the dataset with one column's cells permuted (breaks signal)."""
    perm = rng.permutation(dataset.row_count)
    columns = {}
    for spec in dataset.schema.columns:
        col = dataset.columns[spec.name]
        if spec.name != name:
            columns[spec.name] = col.values if spec.is_numeric else \
                (col.codes, col.levels)
        elif spec.is_numeric:
            columns[spec.name] = col.values[perm]
        else:
            columns[spec.name] = (col.codes[perm], col.levels)
    return from_arrays(dataset.schema, columns)
