import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from icpc import io
from icpc.core import BASELINE
from icpc.exceptions import DataError, ValidationError
from icpc.meanfield import gaussian_grid
from icpc.panel import simulate_panel
from icpc.simulate import TimeSeriesDataset, simulate_aggregate

TS_HEADER = "period,pi,pi_e,ygap,cinf\n"


def write(tmp_path, text, name="data.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestTimeSeries:
    def test_three_rows(self, tmp_path):
        p = write(tmp_path, TS_HEADER + "3,0.3,0.2,0.1,1.0\n1,0.1,0.0,-0.1,0.5\n2,0.2,0.1,0.0,0.7\n")
        d = io.load_timeseries_csv(p)
        assert d.period.tolist() == [1, 2, 3]
        assert d.pi.tolist() == [0.1, 0.2, 0.3]
        assert d.cinf.tolist() == [0.5, 0.7, 1.0]
        assert d.u is None

    def test_missing_column_named(self, tmp_path):
        p = write(tmp_path, "period,pi,pi_e,ygap\n1,0,0,0\n")
        with pytest.raises(DataError, match="'cinf'"):
            io.load_timeseries_csv(p)

    def test_non_numeric_row_number(self, tmp_path):
        p = write(tmp_path, TS_HEADER + "1,0,0,0,0\n2,0,abc,0,0\n")
        with pytest.raises(DataError, match=r"row 3.*'pi_e'"):
            io.load_timeseries_csv(p)

    def test_duplicate_period_rows(self, tmp_path):
        p = write(tmp_path, TS_HEADER + "1,0,0,0,0\n2,0,0,0,0\n1,0,0,0,0\n")
        with pytest.raises(DataError, match="rows 2 and 4"):
            io.load_timeseries_csv(p)

    def test_ragged_and_empty(self, tmp_path):
        with pytest.raises(DataError, match="row 2"):
            io.load_timeseries_csv(write(tmp_path, TS_HEADER + "1,0,0\n"))
        with pytest.raises(DataError):
            io.load_timeseries_csv(write(tmp_path, "", "empty.csv"))
        with pytest.raises(DataError):
            io.load_timeseries_csv(tmp_path / "absent.csv")

    def test_string_periods(self, tmp_path):
        p = write(tmp_path, TS_HEADER + "2020Q2,1,0,0,0\n2020Q1,2,0,0,0\n")
        d = io.load_timeseries_csv(p)
        assert list(d.period) == ["2020Q1", "2020Q2"]
        assert d.pi.tolist() == [2.0, 1.0]

    def test_simulated_round_trip(self, tmp_path):
        d = simulate_aggregate(BASELINE, t_len=50, seed=3)
        p = io.write_timeseries_csv(tmp_path / "sim.csv", d)
        back = io.load_timeseries_csv(p)
        for c in ("pi", "pi_e", "ygap", "cinf", "u"):
            assert np.array_equal(getattr(back, c), getattr(d, c))

    @given(hnp.arrays(np.float64, st.tuples(st.integers(1, 30), st.just(4)), elements=st.floats(-1e6, 1e6)))
    def test_round_trip_bit_exact(self, tmp_path_factory, values):
        d = TimeSeriesDataset(*values.T, period=np.arange(len(values)))
        p = io.write_timeseries_csv(tmp_path_factory.mktemp("rt") / "x.csv", d)
        back = io.load_timeseries_csv(p)
        assert np.array_equal(np.column_stack([back.pi, back.pi_e, back.ygap, back.cinf]), values)


PANEL_HEADER = "country,period,pi_core,cinf,ygap\n"


class TestPanel:
    def test_two_by_three(self, tmp_path):
        rows = "".join(f"{c},{t},{i * 0.1 + t},{t * 0.5},{-t}\n" for i, c in enumerate("AB") for t in (1, 2, 3))
        d = io.load_panel_csv(write(tmp_path, PANEL_HEADER + rows))
        assert d.pi_core.shape == (2, 3)
        assert list(d.countries) == ["A", "B"]
        assert d.balanced
        assert d.cinf[1].tolist() == [0.5, 1.0, 1.5]

    def test_interior_gap(self, tmp_path):
        rows = "A,1,0,0,0\nA,3,0,0,0\nB,1,0,0,0\nB,2,0,0,0\nB,3,0,0,0\n"
        with pytest.raises(DataError, match=r"'A'.*period 2"):
            io.load_panel_csv(write(tmp_path, PANEL_HEADER + rows))

    def test_edge_trimming_flagged(self, tmp_path):
        rows = "A,1,0,0,0\nA,2,0,0,0\nA,3,0,0,0\nB,2,0,0,0\nB,3,0,0,0\nB,4,0,0,0\n"
        d = io.load_panel_csv(write(tmp_path, PANEL_HEADER + rows))
        assert d.periods.tolist() == [2, 3]
        assert d.dropped_periods == [1, 4]
        assert not d.balanced

    def test_duplicate(self, tmp_path):
        rows = "A,1,0,0,0\nA,1,0,0,0\n"
        with pytest.raises(DataError, match="row 3"):
            io.load_panel_csv(write(tmp_path, PANEL_HEADER + rows))

    def test_g7_round_trip(self, tmp_path):
        d = simulate_panel(n_countries=7, t_len=52, seed=0)
        back = io.load_panel_csv(io.write_panel_csv(tmp_path / "g7.csv", d))
        assert back.pi_core.shape == (7, 53)  # one pre-sample period for the lag
        assert back.balanced
        for c in ("pi_core", "cinf", "ygap"):
            assert np.array_equal(getattr(back, c), getattr(d, c))


def test_density_round_trip(tmp_path):
    g = gaussian_grid(0.1, 0.7, -4, 4, 96)
    back = io.load_density_csv(io.write_density_csv(tmp_path / "d.csv", g))
    assert np.array_equal(back.values, g.values)
    assert back.lower == pytest.approx(g.lower, abs=1e-12)
    assert back.upper == pytest.approx(g.upper, abs=1e-12)


class TestConfig:
    def test_defaults(self, tmp_path):
        cfg = io.load_config(write(tmp_path, "[model]\n", "c.ini"))
        assert cfg.model == BASELINE
        assert cfg.digest == io.ExperimentConfig().digest

    def test_values_parsed(self, tmp_path):
        text = "[model]\nlambda_bar = 0.3\n[run]\nt_grid = 100, 200\nsigma_p2 = auto\n[estimator]\nbandwidth = 4\n"
        cfg = io.load_config(write(tmp_path, text, "c.ini"))
        assert cfg.model.lambda_bar == 0.3
        assert cfg.run.t_grid == (100, 200)
        assert cfg.run.sigma_p2 is None
        assert cfg.bandwidth == 4

    @pytest.mark.parametrize(
        "text",
        [
            "[model]\nlamda_bar = 0.3\n",
            "[models]\ntheta = 0.7\n",
            "[model]\ntheta = abc\n",
            "[model]\ntheta = 1.5\n",
            "[run]\nreps = 0\n",
            "[estimator]\ninitial_weight = magic\n",
        ],
    )
    def test_rejected(self, tmp_path, text):
        with pytest.raises(ValidationError):
            io.load_config(write(tmp_path, text, "c.ini"))

    def test_digest_ignores_key_order(self, tmp_path):
        a = io.load_config(write(tmp_path, "[model]\ntheta = 0.7\nphi = 0.2\n[run]\nseed = 3\n", "a.ini"))
        b = io.load_config(write(tmp_path, "[run]\nseed = 3\n[model]\nphi = 0.2\ntheta = 0.7\n", "b.ini"))
        assert a.digest == b.digest
        assert io.config_digest({"x": 1, "y": [1, 2]}) == io.config_digest({"y": [1, 2], "x": 1})
        assert a.digest != io.ExperimentConfig().digest


def test_json_and_table():
    payload = json.loads(io.to_json({"b": np.float64(0.5), "a": np.arange(2)}))
    assert payload == {"a": [0, 1], "b": 0.5}
    table = io.format_table([("x", 0.123456789)], ("name", "value"))
    assert "0.123457" in table


def test_atomic_write_creates_parent(tmp_path):
    p = io.atomic_write(tmp_path / "sub" / "f.txt", "hello")
    assert p.read_text() == "hello"
    assert [q.name for q in p.parent.iterdir()] == ["f.txt"]
