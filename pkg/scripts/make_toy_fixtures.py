#!/usr/bin/env python3
"""Regenerate the bundled toy fixtures under tests/fixtures/.

The toy population mixes quasi-identifiers, sensitive columns, a weak smoking
signal (so the model comparison has something to learn) and a time-to-event
pair whose hazard depends on smoking (so the survival block is meaningful).
The synthetic table is an independent draw from the same process: a clean
privacy null.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from synthaudit.data import from_arrays, take_rows, write_csv
from synthaudit.schema import ColumnSpec, Schema

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

SCHEMA_TOML = """\
[[column]]
name = "age"
kind = "numeric"
quasi_identifier = true

[[column]]
name = "bmi"
kind = "numeric"

[[column]]
name = "sex"
kind = "categorical"
quasi_identifier = true

[[column]]
name = "race"
kind = "categorical"
quasi_identifier = true

[[column]]
name = "condition"
kind = "categorical"
sensitive = true
missing_tokens = ["unknown"]

[[column]]
name = "smoker"
kind = "categorical"
sensitive = true

[[column]]
name = "visits"
kind = "numeric"
sensitive = true

[[column]]
name = "followup_days"
kind = "event_time"
event_indicator = "dead"

[[column]]
name = "dead"
kind = "categorical"
"""

RULES = """\
# clinical sanity rules for the toy population
underage_smoker: age < 18 and smoker == "Y"
impossible_bmi: bmi > 200 or bmi < 5
dead_without_followup: dead == "1" and is_missing(followup_days)
"""

AUDIT_TOML = """\
seed = 7
jobs = 1

[data]
schema = "schema.toml"
real = "real.csv"
synthetic = "synthetic.csv"

[fidelity]
bins = 10

[fidelity.discriminator]
folds = 5
repeats = 3

[fidelity.tstr]
target = "smoker"
predictors = ["age", "bmi", "sex", "race", "visits"]
repeats = 3

[fidelity.survival]
time_column = "followup_days"
group_column = "smoker"

[fidelity.rules]
file = "rules.txt"

[privacy]
attacker_fractions = [0.5, 1.0]

[privacy.membership]
r1 = "r1.csv"
r2 = "r2.csv"
s1 = "s1.csv"
s2 = "s2.csv"

[output]
report = "report.json"
"""


def toy_fixture_schema() -> Schema:
    return Schema(columns=(
        ColumnSpec("age", "numeric", quasi_identifier=True),
        ColumnSpec("bmi", "numeric"),
        ColumnSpec("sex", "categorical", quasi_identifier=True),
        ColumnSpec("race", "categorical", quasi_identifier=True),
        ColumnSpec("condition", "categorical", sensitive=True,
                   missing_tokens=frozenset({"unknown"})),
        ColumnSpec("smoker", "categorical", sensitive=True),
        ColumnSpec("visits", "numeric", sensitive=True),
        ColumnSpec("followup_days", "event_time",
                   event_indicator_column="dead"),
        ColumnSpec("dead", "categorical"),
    ))


def draw_population(n: int, rng) -> dict:
    age = rng.integers(20, 90, size=n).astype(float)
    bmi = np.round(rng.normal(27.0, 5.0, size=n).clip(16, 45), 1)
    sex = rng.choice(["M", "F"], size=n, p=[0.6, 0.4])
    race = rng.choice(["White", "Black", "Asian", "Other"], size=n,
                      p=[0.5, 0.25, 0.15, 0.1])
    condition = rng.choice(
        ["none", "chf", "copd", "diabetes", "cancer"], size=n,
        p=[0.4, 0.2, 0.15, 0.15, 0.1])
    cond_cells = [None if rng.random() < 0.05 else c for c in condition]
    logit = 0.05 * (age - 55) + 0.08 * (bmi - 27) - 0.4
    smoker_p = 1.0 / (1.0 + np.exp(-logit))
    smoker = np.where(rng.random(n) < smoker_p, "Y", "N")
    visits = rng.poisson(3.0, size=n).astype(float)
    hazard = np.where(smoker == "Y", 1.0 / 400.0, 1.0 / 800.0)
    followup = np.ceil(rng.exponential(1.0 / hazard))
    censor = np.ceil(rng.uniform(50, 1200, size=n))
    dead = followup <= censor
    observed = np.minimum(followup, censor)
    return {
        "age": age, "bmi": bmi, "sex": list(sex), "race": list(race),
        "condition": cond_cells, "smoker": list(smoker), "visits": visits,
        "followup_days": observed,
        "dead": ["1" if d else "0" for d in dead],
    }


def main():
    FIXTURES.mkdir(parents=True, exist_ok=True)
    schema = toy_fixture_schema()
    rng = np.random.default_rng(20240501)
    real = from_arrays(schema, draw_population(800, rng))
    synthetic = from_arrays(schema, draw_population(800, rng))
    s1 = from_arrays(schema, draw_population(400, rng))
    s2 = from_arrays(schema, draw_population(400, rng))
    perm = rng.permutation(real.row_count)
    r1 = take_rows(real, np.sort(perm[:400]))
    r2 = take_rows(real, np.sort(perm[400:]))

    write_csv(real, FIXTURES / "real.csv")
    write_csv(synthetic, FIXTURES / "synthetic.csv")
    write_csv(r1, FIXTURES / "r1.csv")
    write_csv(r2, FIXTURES / "r2.csv")
    write_csv(s1, FIXTURES / "s1.csv")
    write_csv(s2, FIXTURES / "s2.csv")
    (FIXTURES / "schema.toml").write_text(SCHEMA_TOML)
    (FIXTURES / "rules.txt").write_text(RULES)
    (FIXTURES / "audit.toml").write_text(AUDIT_TOML)
    print(f"fixtures written to {FIXTURES}")


if __name__ == "__main__":
    main()
