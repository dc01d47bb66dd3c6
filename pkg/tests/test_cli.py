import csv
import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ewalk.cli import fmt, main, run
from ewalk.config import EXPERIMENTS, ConfigError, ExperimentConfig, parse_config, serialize_config


class TestParse:
    def test_minimal_bloch_defaults(self):
        cfg = parse_config("experiment = bloch\nm = 100\n")
        assert cfg.experiment == "bloch"
        assert cfg["m"] == 100.0
        assert cfg["theta"] == math.pi / 4
        assert cfg["n_sites"] == 1000 and cfg["steps"] == 1000

    def test_m_zero(self):
        with pytest.raises(ConfigError) as info:
            parse_config("experiment = bloch\nm = 0\n")
        assert info.value.key == "m" and "'m'" in str(info.value)
        assert info.value.line == 2

    def test_unknown_experiment(self):
        with pytest.raises(ConfigError, match="unknown experiment 'blch'") as info:
            parse_config('experiment = "blch"\nm = 100\n')
        assert info.value.key == "experiment"

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="unknown key 'thetaa'"):
            parse_config("experiment = sbo\nm = 100\nthetaa = 1\n")

    def test_missing_required(self):
        with pytest.raises(ConfigError, match="'m'"):
            parse_config("experiment = bloch\n")
        with pytest.raises(ConfigError, match="'experiment'"):
            parse_config("m = 4\n")

    def test_theta_domain(self):
        with pytest.raises(ConfigError, match="theta"):
            parse_config("experiment = sbo\nm = 100\ntheta = 3.5\n")

    def test_syntax_error_position(self):
        with pytest.raises(ConfigError) as info:
            parse_config("experiment = bloch\n  m 100\n")
        assert (info.value.line, info.value.column) == (2, 3)

    def test_pi_expressions_and_comments(self):
        cfg = parse_config("# phase sweep\nexperiment = velocity_curve  # resonant\nm = 100\ntheta = pi/6\nfit_offset = true\n")
        assert cfg["theta"] == math.pi / 6
        assert cfg["fit_offset"] is True
        assert cfg["steps"] is None

    def test_int_rejects_fraction(self):
        with pytest.raises(ConfigError, match="n_sites"):
            parse_config("experiment = bloch\nm = 100\nn_sites = 10.5\n")

    def test_auto_only_where_allowed(self):
        with pytest.raises(ConfigError, match="auto"):
            parse_config("experiment = bloch\nm = 100\nsteps = auto\n")

    def test_duplicate_key(self):
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config("experiment = bloch\nm = 1\nm = 2\n")


def _valid_configs():
    def for_experiment(name):
        schema = EXPERIMENTS[name]
        fields = {"m": st.floats(0.5, 1000)}
        for key, spec in schema.items():
            if key == "m":
                continue
            if spec.kind == "bool":
                fields[key] = st.booleans()
            elif spec.kind == "int":
                lo = 3 if key == "n_sites" else 2 if key == "grid_denominator" else 1
                s = st.integers(lo, 10**6)
                fields[key] = s | st.none() if spec.allow_auto else s
            elif key == "theta":
                fields[key] = st.floats(0, math.pi)
            else:
                lo = 1e-9 if spec.check is not None else -10
                fields[key] = st.floats(lo, 10, allow_nan=False)
        return st.fixed_dictionaries(fields).map(lambda p: ExperimentConfig(name, {k: p[k] for k in schema}))

    return st.sampled_from(sorted(EXPERIMENTS)).flatmap(for_experiment)


@given(_valid_configs())
def test_round_trip(cfg):
    assert parse_config(serialize_config(cfg)) == cfg


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_format_round_trips(x):
    assert float(fmt(x)) == x


def _read(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


class TestRun:
    def test_bloch_outputs(self, tmp_path):
        cfg = parse_config("experiment = bloch\nm = 100\nn_sites = 400\nsteps = 300\n")
        assert run(cfg, tmp_path, jobs=1) == 0
        names = {p.name for p in tmp_path.iterdir()}
        assert {"centroid.csv", "spectrum.csv", "config.resolved", "manifest.json"} <= names
        rows = _read(tmp_path / "centroid.csv")
        assert rows[0] == ["t", "centroid"] and len(rows) == 302
        assert parse_config((tmp_path / "config.resolved").read_text()) == cfg
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["status"] == "ok" and manifest["wall_time_s"] >= 0

    def test_csv_values_reparse_exactly(self, tmp_path):
        from ewalk.experiments import run_bloch

        cfg = parse_config("experiment = bloch\nm = 100\nn_sites = 400\nsteps = 150\n")
        run(cfg, tmp_path, jobs=1)
        trace = run_bloch(100, math.pi / 4, 400, 150).trace
        values = [float(r[1]) for r in _read(tmp_path / "centroid.csv")[1:]]
        assert values == trace.samples.tolist()

    def test_map_row_count(self, tmp_path):
        cfg = parse_config("experiment = velocity_map\nm = 100\ntheta_points = 3\nphi_points = 4\nsteps = 400\n")
        assert run(cfg, tmp_path, jobs=1) == 0
        rows = _read(tmp_path / "map.csv")
        assert rows[0] == ["theta", "phi", "velocity"] and len(rows) == 1 + 12

    def test_edge_leak_exit(self, tmp_path):
        cfg = parse_config("experiment = resonant_drift\nm = 100\ntheta = 0.05\nn_sites = 200\nsteps = 500\n")
        assert run(cfg, tmp_path, jobs=1) != 0
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["status"] == "error"
        step = manifest["failed_step"]
        assert isinstance(step, int) and 0 < step < 500
        assert f"step {step}" in manifest["error"]

    def test_rerun_identical(self, tmp_path):
        cfg = parse_config("experiment = density\nm = 50\nn_sites = 200\nsteps = 60\nstride = 3\n")
        run(cfg, tmp_path / "a", jobs=1)
        first = {p.name: p.read_bytes() for p in (tmp_path / "a").glob("*.csv")}
        run(cfg, tmp_path / "a", jobs=1)
        second = {p.name: p.read_bytes() for p in (tmp_path / "a").glob("*.csv")}
        assert first == second and len(first) == 3


class TestMain:
    def test_list(self, capsys):
        assert main(["list-experiments"]) == 0
        out = capsys.readouterr().out
        for name in EXPERIMENTS:
            assert name in out

    def test_validate(self, tmp_path, capsys):
        path = tmp_path / "c.cfg"
        path.write_text("experiment = sbo\nm = 100\n")
        assert main(["validate", str(path)]) == 0
        assert "detuning = 0.01" in capsys.readouterr().out

    def test_validate_error(self, tmp_path, capsys):
        path = tmp_path / "c.cfg"
        path.write_text("experiment = sbo\nm = -1\n")
        assert main(["validate", str(path)]) == 2
        assert "'m'" in capsys.readouterr().err

    def test_run(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("experiment = resonant_drift\nm = 20\nn_sites = 600\n")
        assert main(["run", str(path), "--out", str(tmp_path / "o"), "--jobs", "1"]) == 0
        assert (tmp_path / "o" / "centroid.csv").exists()
