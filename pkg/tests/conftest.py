import numpy as np
import pytest

from synthaudit.data import from_arrays
from synthaudit.schema import ColumnSpec, Schema


@pytest.fixture
def mixed_schema():
    return Schema(columns=(
        ColumnSpec("age", "numeric"),
        ColumnSpec("score", "numeric"),
        ColumnSpec("sex", "categorical"),
        ColumnSpec("race", "categorical"),
    ))


def make_mixed(schema, n, rng, missing_rate=0.0):
    """Random mixed-type dataset over the mixed_schema fixture columns."""
    age = rng.normal(60, 10, size=n)
    score = rng.normal(0, 2, size=n)   # can be negative
    if missing_rate > 0:
        age[rng.random(n) < missing_rate] = np.nan
        score[rng.random(n) < missing_rate] = np.nan
    sex = [None if missing_rate and rng.random() < missing_rate
           else ("M" if rng.random() < 0.6 else "F") for _ in range(n)]
    race = [rng.choice(["White", "Black", "Asian", "Other"]) for _ in range(n)]
    return from_arrays(schema, {"age": age, "score": score, "sex": sex, "race": race})
