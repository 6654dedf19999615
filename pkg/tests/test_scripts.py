"""End-to-end checks of the runnable scripts and the subprocess generator
protocol."""
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from synthaudit.data import load_csv, write_csv
from synthaudit.privacy import (GridCanarySpace, SubprocessGeneratorAdapter,
                                canary_campaign)
from synthaudit.simulate import sample_marginals, toy_schema

SCRIPTS = Path(__file__).parent.parent / "scripts"
GENERATOR = SCRIPTS / "marginal_generator.py"


@pytest.fixture
def adapter(tmp_path):
    state = tmp_path / "state.json"
    return SubprocessGeneratorAdapter(
        [sys.executable, str(GENERATOR), "--state", str(state)])


class TestGeneratorProtocol:
    def test_train_emits_synthetic_csv(self, tmp_path, adapter):
        real = sample_marginals(120, np.random.default_rng(0))
        train_csv = tmp_path / "train.csv"
        out_csv = tmp_path / "synthetic.csv"
        write_csv(real, train_csv)
        adapter.train(train_csv, out_csv, seed=3)
        syn = load_csv(out_csv, toy_schema())
        assert syn.row_count == real.row_count

    def test_score_one_value_per_row(self, tmp_path, adapter):
        real = sample_marginals(60, np.random.default_rng(1))
        train_csv = tmp_path / "train.csv"
        write_csv(real, train_csv)
        adapter.train(train_csv, tmp_path / "syn.csv", seed=0)
        scores = adapter.score(train_csv)
        assert len(scores) == real.row_count
        assert np.all(np.isfinite(scores))

    def test_canary_campaign_through_subprocess(self, tmp_path, adapter):
        real = sample_marginals(80, np.random.default_rng(2))
        # single varying column: candidates differ in one memorizable cell,
        # so inserted canaries must outrank every never-seen candidate
        space = GridCanarySpace(
            column_values={"age": [str(v) for v in range(500, 564)]},
            base_record={"bmi": "999.0", "sex": "QQ", "race": "canary",
                         "condition": "canary", "smoker": "canary",
                         "visits": "999"})
        res = canary_campaign(real, adapter, 4, space, seed=0,
                              workdir=tmp_path / "campaign")
        assert res.space_size == 64
        assert sorted(res.ranks) == [1, 2, 3, 4]
        assert res.mean_exposure > 4.0

    def test_training_is_seeded(self, tmp_path, adapter):
        real = sample_marginals(50, np.random.default_rng(3))
        train_csv = tmp_path / "train.csv"
        write_csv(real, train_csv)
        adapter.train(train_csv, tmp_path / "a.csv", seed=11)
        adapter.train(train_csv, tmp_path / "b.csv", seed=11)
        adapter.train(train_csv, tmp_path / "c.csv", seed=12)
        a = (tmp_path / "a.csv").read_bytes()
        assert a == (tmp_path / "b.csv").read_bytes()
        assert a != (tmp_path / "c.csv").read_bytes()


def test_make_toy_fixtures_is_deterministic():
    fixtures = Path(__file__).parent / "fixtures"
    before = {p.name: p.read_bytes() for p in fixtures.glob("*.csv")}
    proc = subprocess.run(
        [sys.executable, str(SCRIPTS / "make_toy_fixtures.py")],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    after = {p.name: p.read_bytes() for p in fixtures.glob("*.csv")}
    assert before == after


def test_run_toy_audit_script(tmp_path):
    proc = subprocess.run(
        [sys.executable, str(SCRIPTS / "run_toy_audit.py"),
         "--out", str(tmp_path)],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "report.json").exists()
    assert (tmp_path / "charts" / "dcr.svg").exists()
