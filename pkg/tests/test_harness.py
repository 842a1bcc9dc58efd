from __future__ import annotations

import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from admissibility.harness import (
    ExperimentConfig,
    Table,
    binomial_se,
    derive_substream,
    format_value,
    jsonable,
    parse_value,
    stable_sum,
    summarize,
)


class TestSubstreams:
    def test_reproducible(self):
        a = derive_substream(42, 7).random(5)
        b = derive_substream(42, 7).random(5)
        assert np.array_equal(a, b)

    def test_order_independent(self):
        forward = [derive_substream(1, i).random() for i in range(10)]
        backward = [derive_substream(1, i).random() for i in reversed(range(10))][::-1]
        assert forward == backward

    def test_distinct_streams(self):
        draws = {derive_substream(5, i).integers(0, 2**63) for i in range(200)}
        assert len(draws) == 200
        assert derive_substream(5, 0).random() != derive_substream(6, 0).random()

    def test_uniformity_chi_square(self):
        u = derive_substream(42, 0).random(1_000_000)
        counts = np.bincount((u * 100).astype(int), minlength=100)
        p = stats.chisquare(counts).pvalue
        assert 0.001 < p < 0.999

    def test_cross_stream_correlation(self):
        a = derive_substream(42, 0).random(100_000)
        b = derive_substream(42, 1).random(100_000)
        assert abs(np.corrcoef(a, b)[0, 1]) < 4 / math.sqrt(100_000)


class TestSummaries:
    def test_hand_values(self):
        s = summarize([0.0, 2.0])
        assert (s.mean, s.mc_standard_error, s.count) == (1.0, 1.0, 2)

    def test_infinite_entries_counted(self):
        s = summarize([1.0, math.inf, 3.0])
        assert s.mean == 2.0 and s.count_infinite == 1
        assert summarize([math.inf]).mean == math.inf

    def test_rejects_nan_and_empty(self):
        with pytest.raises(ValueError):
            summarize([math.nan])
        with pytest.raises(ValueError):
            summarize([])

    @given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=50), st.randoms())
    def test_sum_order_invariant(self, xs, rnd):
        ys = list(xs)
        rnd.shuffle(ys)
        assert stable_sum(xs) == stable_sum(ys)

    def test_binomial_se(self):
        assert binomial_se(0.5, 100) == 0.05


class TestConfig:
    def test_defaults(self):
        cfg = ExperimentConfig()
        assert cfg.seed == 20240601 and cfg.n_list == (5, 10, 25, 50, 100)

    def test_validation(self):
        with pytest.raises(ValueError):
            ExperimentConfig(reps=0)
        with pytest.raises(ValueError):
            ExperimentConfig(seed=-1)

    def test_from_file(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("# comment\nreps = 12\nlooks = 5, 10\nmonitor_looks_only = yes\ntheta=0.25\n")
        cfg = ExperimentConfig.from_file(path)
        assert (cfg.reps, cfg.looks, cfg.monitor_looks_only, cfg.theta) == (12, (5, 10), True, 0.25)

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("colour = red\n")
        with pytest.raises(KeyError):
            ExperimentConfig.from_file(path)


class TestSerialization:
    def test_inf_text(self):
        assert format_value(math.inf) == "inf"
        assert parse_value("inf") == math.inf
        assert jsonable({"r": [1.0, math.inf]}) == {"r": [1.0, "inf"]}

    @given(st.floats(allow_nan=False))
    def test_float_round_trip(self, x):
        assert parse_value(format_value(x)) == x

    def test_table_formats(self):
        t = Table(["a", "b"], [[1, math.inf]], {"seed": 3})
        assert t.to_csv() == "# seed=3\na,b\n1,inf\n"
        assert json.loads(t.to_json())["rows"] == [{"a": 1, "b": "inf"}]
        assert t.render("text").splitlines()[-1].split() == ["1", "inf"]
        with pytest.raises(ValueError):
            t.render("xml")
