import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from photonbell.cli import main
from photonbell.harness import (
    SWEEP_COLUMNS,
    ConfigError,
    RunConfig,
    read_csv_record,
    run_analytic,
    run_chsh,
    run_simulate,
    run_sweep,
)

PATHS = {"closed-form", "quadrature", "monte-carlo", "input"}


def cfg(**overrides) -> RunConfig:
    d = RunConfig().to_dict()
    for key, value in overrides.items():
        section, _, name = key.partition("__")
        if name:
            d[section][name] = value
        else:
            d[section] = value
    return RunConfig.from_dict(d)


def strip_volatile(text: str) -> str:
    d = json.loads(text)
    d.pop("run_id")
    d.pop("timestamp")
    return json.dumps(d)


class TestRunConfig:
    def test_defaults_round_trip(self):
        c = RunConfig()
        assert RunConfig.from_json(c.to_json()) == c

    @settings(max_examples=50)
    @given(
        alpha=st.floats(0, 10),
        beta=st.floats(0, 10),
        C=st.floats(0, 1),
        ti=st.floats(-20, 20),
        n=st.integers(1, 10**9),
        seed=st.integers(0, 2**64 - 1),
        model=st.sampled_from(["symmetric", "coherent-only", "amplitude-weighted"]),
        fmt=st.sampled_from(["csv", "json"]),
    )
    def test_round_trip(self, alpha, beta, C, ti, n, seed, model, fmt):
        c = cfg(
            experiment__alpha=alpha,
            experiment__beta=beta,
            experiment__C=C,
            experiment__theta_i=ti,
            sampler__n=n,
            sampler__seed=seed,
            detector_model=model,
            output__format=fmt,
        )
        assert RunConfig.from_json(c.to_json()) == c

    @pytest.mark.parametrize(
        "data, field",
        [
            ({"experiment": {"alpha": -1}}, "experiment.alpha"),
            ({"experiment": {"C": "high"}}, "experiment.C"),
            ({"experiment": {"gamma": 1}}, "experiment.gamma"),
            ({"sampler": {"seed": -5}}, "sampler.seed"),
            ({"sampler": {"chunk": 0}}, "sampler.chunk"),
            ({"detector_model": "cousin"}, "detector_model"),
            ({"output": {"format": "xml"}}, "output.format"),
            ({"grid": 4}, "grid"),
            ({"sweep": {"step": 0}}, "sweep.step"),
            ({"colour": "red"}, "colour"),
        ],
    )
    def test_malformed_fields_are_named(self, data, field):
        with pytest.raises(ConfigError) as err:
            RunConfig.from_dict(data)
        assert err.value.field == field
        assert str(err.value).startswith(field)

    def test_invalid_json(self):
        with pytest.raises(ConfigError):
            RunConfig.from_json("{not json")


class TestDrivers:
    def test_analytic_default(self):
        rec = run_analytic(RunConfig())
        assert rec.value("var12") == pytest.approx(9 / 512, abs=1e-15)
        assert rec.value("rho") == pytest.approx(-1.0, abs=1e-12)
        assert rec.value("max_abs_intensity_deviation") <= 1e-10
        assert all(r["path"] in PATHS for r in rec.results)

    def test_analytic_degenerate(self):
        rec = run_analytic(cfg(experiment__alpha=0.0, experiment__beta=0.0))
        assert "degenerate" in rec.markers
        assert rec.value("rho") is None
        text = rec.to_json()
        assert "NaN" not in text
        json.loads(text)

    def test_simulate(self):
        rec = run_simulate(RunConfig())
        cov = next(r for r in rec.results if r["name"] == "cov_xy")
        assert abs(cov["value"] + 0.5) <= 4 * cov["se"]
        assert rec.value("cov_xy_oracle") == pytest.approx(-0.5)
        assert rec.value("cov_xy_published") == pytest.approx(-1.0)
        assert "discrepancy" in rec.markers and rec.notes

    def test_simulate_needs_two(self):
        with pytest.raises(ConfigError):
            run_simulate(cfg(sampler__n=1))

    def test_chsh_analytic(self):
        rec = run_chsh(RunConfig())
        assert rec.value("s") == pytest.approx(2 * math.sqrt(2), abs=1e-9)
        assert rec.value("violated") is True

    def test_chsh_zero_setting(self):
        rec = run_chsh(cfg(setting={"a": 0.0, "a_prime": 0.0, "b": 0.0, "b_prime": 0.0}))
        assert rec.value("s") == 0.0

    def test_chsh_empirical(self):
        rec = run_chsh(cfg(source="empirical", search=True, sampler__n=200_000))
        s = next(r for r in rec.results if r["name"] == "s")
        assert abs(abs(s["value"]) - math.sqrt(2)) <= 4 * s["se"]
        assert rec.value("violated") is False
        assert "discrepancy" in rec.markers

    def test_chsh_empirical_needs_samples(self):
        with pytest.raises(ConfigError):
            run_chsh(cfg(source="empirical", sampler__n=1))

    def test_sweep_symmetry_points(self):
        rec = run_sweep(cfg(sweep={"start": 0.0, "stop": math.pi, "step": math.pi / 2}, sampler__n=20_000))
        rho = [r["rho_closed"] for r in rec.rows]
        assert rho == pytest.approx([0.0, -1.0, 0.0], abs=1e-12)
        assert [r["rho_quadrature"] for r in rec.rows] == pytest.approx([0.0, -1.0, 0.0], abs=1e-12)

    def test_sweep_single_row(self):
        rec = run_sweep(cfg(sweep={"start": 0.3, "stop": 0.5, "step": 1.0}, sampler__n=1000))
        assert len(rec.rows) == 1 and rec.rows[0]["delta"] == 0.3

    def test_sweep_full(self):
        rec = run_sweep(cfg(sweep={"start": 0.0, "stop": 2 * math.pi, "step": math.pi / 16}, sampler__n=1000))
        assert rec.value("max_abs_rho_deviation") <= 1e-9

    def test_sweep_empty(self):
        with pytest.raises(ConfigError):
            run_sweep(cfg(sweep={"start": 1.0, "stop": 0.0, "step": 0.1}))


class TestFormats:
    def test_csv_parses_with_config_echo(self):
        rec = run_analytic(RunConfig())
        parsed = read_csv_record(rec.to_csv())
        assert parsed["config"] == rec.config
        names = [row["name"] for row in parsed["rows"]]
        assert "rho" in names
        row = next(r for r in parsed["rows"] if r["name"] == "var12")
        assert float(row["value"]) == rec.value("var12")
        assert all(r["path"] in PATHS for r in parsed["rows"])

    def test_sweep_csv_columns(self):
        rec = run_sweep(cfg(sweep={"start": 0.0, "stop": 1.0, "step": 0.5}, sampler__n=1000))
        parsed = read_csv_record(rec.to_csv())
        assert list(parsed["rows"][0].keys()) == list(SWEEP_COLUMNS)
        assert float(parsed["rows"][1]["rho_closed"]) == rec.rows[1]["rho_closed"]
        assert parsed["notes"]

    def test_json_has_paths_and_config(self):
        rec = run_sweep(cfg(sweep={"start": 0.0, "stop": 0.0, "step": 0.5}, sampler__n=1000))
        d = json.loads(rec.to_json())
        assert d["config"]["sampler"]["n"] == 1000
        assert set(d["column_paths"]) == set(SWEEP_COLUMNS)


class TestCli:
    def test_analytic_json(self, capsys):
        assert main(["analytic"]) == 0
        d = json.loads(capsys.readouterr().out)
        rho = next(r for r in d["results"] if r["name"] == "rho")
        assert rho["value"] == pytest.approx(-1.0)

    def test_flags_override_config(self, tmp_path, capsys):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"experiment": {"alpha": 2.0}, "sampler": {"n": 500}}))
        assert main(["analytic", "--config", str(path), "--beta", "0.0", "--C", "0.5"]) == 0
        d = json.loads(capsys.readouterr().out)
        assert d["config"]["experiment"] == {**d["config"]["experiment"], "alpha": 2.0, "beta": 0.0, "C": 0.5}
        var12 = next(r for r in d["results"] if r["name"] == "var12")["value"]
        assert var12 == pytest.approx(0.25 * 16 / 512)

    def test_simulate_deterministic(self, tmp_path):
        out = tmp_path / "run.json"
        args = ["simulate", "--n", "100000", "--seed", "42", "--workers", "2", "--out", str(out)]
        assert main(args) == 0
        first = out.read_text()
        assert main(args) == 0
        assert strip_volatile(first) == strip_volatile(out.read_text())

    def test_out_dir_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("PHOTONBELL_OUT_DIR", str(tmp_path))
        assert main(["chsh", "--format", "csv"]) == 0
        files = list(tmp_path.glob("chsh-*.csv"))
        assert len(files) == 1
        parsed = read_csv_record(files[0].read_text())
        assert parsed["command"] == "chsh"

    @pytest.mark.parametrize(
        "args",
        [
            ["simulate", "--n", "1"],
            ["analytic", "--alpha", "-1"],
            ["simulate", "--seed", "-3"],
            ["sweep", "--start", "2", "--stop", "1"],
            ["chsh", "--grid", "4"],
        ],
    )
    def test_diagnostics_exit_nonzero(self, args, capsys):
        assert main(args) != 0
        err = capsys.readouterr().err
        assert "error" in err

    def test_missing_config_file(self, tmp_path, capsys):
        assert main(["analytic", "--config", str(tmp_path / "nope.json")]) != 0

    def test_success_prints_no_diagnostic(self, capsys):
        assert main(["chsh", "--setting", "0", "0", "0", "0"]) == 0
        assert capsys.readouterr().err == ""
