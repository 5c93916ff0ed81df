"""Run configuration, experiment drivers and result records.

A :class:`RunConfig` is a plain JSON document; every driver returns a
:class:`ResultRecord` whose numeric results carry the computation path that
produced them (``closed-form``, ``quadrature`` or ``monte-carlo``).
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import uuid
from dataclasses import dataclass, field, fields
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import analytic, bell, counts
from .model import TWO_PI, ExperimentConfig, ModelError, ModelKind

CLOSED_FORM = "closed-form"
QUADRATURE = "quadrature"
MONTE_CARLO = "monte-carlo"

OUT_DIR_ENV = "PHOTONBELL_OUT_DIR"
COMMANDS = ("analytic", "simulate", "chsh", "sweep")
SWEEP_COLUMNS = ("delta", "rho_closed", "rho_quadrature", "cov_oracle", "cov_mc", "se")
SWEEP_COLUMN_PATHS = {
    "delta": "input",
    "rho_closed": CLOSED_FORM,
    "rho_quadrature": QUADRATURE,
    "cov_oracle": QUADRATURE,
    "cov_mc": MONTE_CARLO,
    "se": MONTE_CARLO,
}
RESULT_COLUMNS = ("name", "value", "path", "se", "n")

CANONICAL_SETTING = (0.0, 0.5 * math.pi, 0.75 * math.pi, 0.25 * math.pi)


class ConfigError(ValueError):
    """Malformed run configuration; the message names the offending field."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass(frozen=True)
class SweepSpec:
    start: float = 0.0
    stop: float = math.pi
    step: float = math.pi / 8

    def deltas(self) -> np.ndarray:
        if not self.step > 0:
            raise ConfigError("sweep.step", f"must be > 0, got {self.step}")
        if self.stop < self.start:
            raise ConfigError("sweep", f"empty range: stop {self.stop} < start {self.start}")
        count = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return self.start + self.step * np.arange(count)


@dataclass(frozen=True)
class OutputSpec:
    format: str = "json"
    path: str | None = None


@dataclass(frozen=True)
class RunConfig:
    experiment: ExperimentConfig = field(default_factory=ExperimentConfig)
    detector_model: ModelKind = ModelKind.SYMMETRIC
    sampler: counts.SamplerSpec = field(default_factory=counts.SamplerSpec)
    workers: int = 1
    convention: str = counts.RATIO
    source: str = "analytic"
    grid: int = 16
    search: bool = False
    setting: tuple[float, float, float, float] = CANONICAL_SETTING
    sweep: SweepSpec = field(default_factory=SweepSpec)
    output: OutputSpec = field(default_factory=OutputSpec)

    def to_dict(self) -> dict:
        e = self.experiment
        s = self.sampler
        return {
            "experiment": {
                "alpha": e.alpha,
                "beta": e.beta,
                "C": e.C,
                "theta_i": e.theta_i,
                "theta_j": e.theta_j,
                "omega": e.omega,
            },
            "detector_model": self.detector_model.value,
            "sampler": {"n": s.n, "seed": s.seed, "chunk": s.chunk},
            "workers": self.workers,
            "convention": self.convention,
            "source": self.source,
            "grid": self.grid,
            "search": self.search,
            "setting": {
                "a": self.setting[0],
                "a_prime": self.setting[1],
                "b": self.setting[2],
                "b_prime": self.setting[3],
            },
            "sweep": {"start": self.sweep.start, "stop": self.sweep.stop, "step": self.sweep.step},
            "output": {"format": self.output.format, "path": self.output.path},
        }

    @classmethod
    def from_dict(cls, data: dict) -> RunConfig:
        if not isinstance(data, dict):
            raise ConfigError("<root>", "config must be a JSON object")
        known = {f.name for f in fields(cls)}
        for key in data:
            if key not in known:
                raise ConfigError(key, "unknown config field")

        def section(name, keys):
            sub = data.get(name, {})
            if not isinstance(sub, dict):
                raise ConfigError(name, "must be an object")
            for k in sub:
                if k not in keys:
                    raise ConfigError(f"{name}.{k}", "unknown config field")
            return sub

        exp = section("experiment", ("alpha", "beta", "C", "theta_i", "theta_j", "omega"))
        exp_vals = {k: _number(f"experiment.{k}", v) for k, v in exp.items()}
        for k, v in exp_vals.items():
            try:
                ExperimentConfig(**{k: v})
            except ModelError as err:
                raise ConfigError(f"experiment.{k}", str(err)) from None
        experiment = ExperimentConfig(**exp_vals)

        samp = section("sampler", ("n", "seed", "chunk"))
        samp_vals = {k: _integer(f"sampler.{k}", v) for k, v in samp.items()}
        try:
            sampler = counts.SamplerSpec(**samp_vals)
        except ValueError as err:
            name = next((k for k in samp_vals if f"sampler {k}" in str(err)), "")
            raise ConfigError(f"sampler.{name}" if name else "sampler", str(err)) from None

        try:
            model = ModelKind.parse(data.get("detector_model", ModelKind.SYMMETRIC))
        except ModelError as err:
            raise ConfigError("detector_model", str(err)) from None

        convention = data.get("convention", counts.RATIO)
        if convention not in (counts.RATIO, counts.PUBLISHED):
            raise ConfigError("convention", f"must be 'ratio' or 'published', got {convention!r}")
        source = data.get("source", "analytic")
        if source not in ("analytic", "empirical"):
            raise ConfigError("source", f"must be 'analytic' or 'empirical', got {source!r}")
        workers = _integer("workers", data.get("workers", 1))
        if workers < 1:
            raise ConfigError("workers", f"must be >= 1, got {workers}")
        grid = _integer("grid", data.get("grid", 16))
        if grid < 8:
            raise ConfigError("grid", f"must be >= 8, got {grid}")
        search = data.get("search", False)
        if not isinstance(search, bool):
            raise ConfigError("search", "must be true or false")

        st = section("setting", ("a", "a_prime", "b", "b_prime"))
        default_setting = dict(zip(("a", "a_prime", "b", "b_prime"), CANONICAL_SETTING))
        setting = tuple(
            _number(f"setting.{k}", st.get(k, default_setting[k])) for k in ("a", "a_prime", "b", "b_prime")
        )

        sw = section("sweep", ("start", "stop", "step"))
        sweep = SweepSpec(**{k: _number(f"sweep.{k}", v) for k, v in sw.items()})
        if not sweep.step > 0:
            raise ConfigError("sweep.step", f"must be > 0, got {sweep.step}")

        out = section("output", ("format", "path"))
        fmt = out.get("format", "json")
        if fmt not in ("json", "csv"):
            raise ConfigError("output.format", f"must be 'json' or 'csv', got {fmt!r}")
        path = out.get("path")
        if path is not None and not isinstance(path, str):
            raise ConfigError("output.path", "must be a string or null")

        return cls(
            experiment=experiment,
            detector_model=model,
            sampler=sampler,
            workers=workers,
            convention=convention,
            source=source,
            grid=grid,
            search=search,
            setting=setting,
            sweep=sweep,
            output=OutputSpec(fmt, path),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> RunConfig:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as err:
            raise ConfigError("<file>", f"not valid JSON ({err})") from None
        return cls.from_dict(data)

    @classmethod
    def load(cls, path) -> RunConfig:
        return cls.from_json(Path(path).read_text())


def _number(name, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(name, f"must be a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(name, "must be finite")
    return float(value)


def _integer(name, value) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(name, f"must be an integer, got {value!r}")
    return value


# ---------------------------------------------------------------------------
# Result records
# ---------------------------------------------------------------------------


@dataclass
class ResultRecord:
    command: str
    config: dict
    results: list[dict] = field(default_factory=list)
    rows: list[dict] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    markers: list[str] = field(default_factory=list)
    run_id: str = field(default_factory=lambda: uuid.uuid4().hex)
    timestamp: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())

    def add(self, name: str, value, path: str, se: float | None = None, n: int | None = None):
        self.results.append({"name": name, "value": value, "path": path, "se": se, "n": n})

    def value(self, name: str):
        for r in self.results:
            if r["name"] == name:
                return r["value"]
        raise KeyError(name)

    def to_dict(self) -> dict:
        d = {
            "run_id": self.run_id,
            "timestamp": self.timestamp,
            "command": self.command,
            "config": self.config,
            "results": self.results,
            "notes": self.notes,
            "markers": self.markers,
        }
        if self.command == "sweep":
            d["columns"] = list(SWEEP_COLUMNS)
            d["column_paths"] = SWEEP_COLUMN_PATHS
            d["rows"] = self.rows
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=False)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# run_id={self.run_id}\n")
        buf.write(f"# timestamp={self.timestamp}\n")
        buf.write(f"# command={self.command}\n")
        buf.write(f"# config={json.dumps(self.config, sort_keys=True)}\n")
        for m in self.markers:
            buf.write(f"# marker={m}\n")
        for note in self.notes:
            buf.write(f"# note={note}\n")
        w = csv.writer(buf, lineterminator="\n")
        if self.command == "sweep":
            buf.write(f"# results={json.dumps(self.results, sort_keys=True)}\n")
            w.writerow(SWEEP_COLUMNS)
            for row in self.rows:
                w.writerow([_fmt(row[c]) for c in SWEEP_COLUMNS])
        else:
            w.writerow(RESULT_COLUMNS)
            for r in self.results:
                w.writerow([r["name"], _fmt(r["value"]), r["path"], _fmt(r["se"]), "" if r["n"] is None else r["n"]])
        return buf.getvalue()

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return self.to_json()
        if fmt == "csv":
            return self.to_csv()
        raise ConfigError("output.format", f"must be 'json' or 'csv', got {fmt!r}")


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def read_csv_record(text: str) -> dict:
    """Parse CSV output back into header metadata and a list of row dicts."""
    meta: dict = {"markers": [], "notes": []}
    body = []
    for line in text.splitlines():
        if line.startswith("# "):
            key, _, value = line[2:].partition("=")
            if key == "config" or key == "results":
                meta[key] = json.loads(value)
            elif key == "marker":
                meta["markers"].append(value)
            elif key == "note":
                meta["notes"].append(value)
            else:
                meta[key] = value
        else:
            body.append(line)
    meta["rows"] = list(csv.DictReader(body))
    return meta


def write_record(record: ResultRecord, fmt: str, path: str | None = None) -> str | None:
    """Write to ``path``, else into $PHOTONBELL_OUT_DIR, else return the text."""
    text = record.render(fmt)
    if path is None and os.environ.get(OUT_DIR_ENV):
        path = str(Path(os.environ[OUT_DIR_ENV]) / f"{record.command}-{record.run_id}.{fmt}")
    if path is None:
        return text
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(text if text.endswith("\n") else text + "\n")
    return None


# ---------------------------------------------------------------------------
# Drivers
# ---------------------------------------------------------------------------


def _new_record(command: str, config: RunConfig) -> ResultRecord:
    return ResultRecord(command=command, config=config.to_dict())


def _add_moments(rec: ResultRecord, m: analytic.ThetaMoments, path: str, suffix: str = ""):
    rec.add("var12" + suffix, m.var12, path)
    rec.add("var34" + suffix, m.var34, path)
    rec.add("cov" + suffix, m.cov, path)
    rec.add("rho" + suffix, m.rho, path)
    rec.add("degenerate" + suffix, m.degenerate, path)


def max_quadrature_deviation(cfg: ExperimentConfig, nodes: int = analytic.THETA_NODES) -> float:
    theta = analytic.periodic_nodes(TWO_PI, nodes)
    q = analytic.intensities_quadrature(theta, cfg, ModelKind.SYMMETRIC).as_array()
    c = analytic.intensities_closed_form(theta, cfg).as_array()
    return float(np.max(np.abs(q - c)))


def run_analytic(config: RunConfig) -> ResultRecord:
    cfg = config.experiment
    rec = _new_record("analytic", config)
    m = analytic.theta_moments(cfg, config.detector_model, path=QUADRATURE)
    _add_moments(rec, m, QUADRATURE)
    _add_moments(rec, analytic.theta_moments_closed_form(cfg), CLOSED_FORM, "_closed_form")
    rec.add("max_abs_intensity_deviation", max_quadrature_deviation(cfg), QUADRATURE)
    v1, v2 = analytic.averaging_order_gap(cfg)
    rec.add("var_theta_of_time_average_D1_plus", v1, QUADRATURE)
    rec.add("var_time_of_theta_average_D1_plus", v2, QUADRATURE)
    if m.degenerate:
        rec.markers.append("degenerate")
        rec.notes.append("zero variance of a homodyne difference signal: correlation undefined")
    return rec


def _published_claim(cfg: ExperimentConfig) -> float:
    return -math.sin(cfg.theta_i - cfg.theta_j)


def run_simulate(config: RunConfig) -> ResultRecord:
    cfg = config.experiment
    if config.sampler.n < 2:
        raise ConfigError("sampler.n", f"simulation needs n >= 2, got {config.sampler.n}")
    rec = _new_record("simulate", config)
    try:
        summary = counts.simulate(config.sampler, cfg, config.workers, config.convention)
        oracle = counts.oracle_covariance(cfg, config.convention)
    except analytic.DegenerateError as err:
        raise ConfigError("experiment", str(err)) from None
    for name, est in (("mean_x", summary.mean_x), ("mean_y", summary.mean_y), ("cov_xy", summary.cov)):
        rec.add(name, est.mean, MONTE_CARLO, est.se, est.n)
    rec.add("cov_xy_oracle", oracle, QUADRATURE)
    rec.add("cov_xy_published", _published_claim(cfg), CLOSED_FORM)
    rec.add("cov_xy_within_4se_of_oracle", summary.cov.contains(oracle), MONTE_CARLO)
    rec.notes.append(counts.DISCREPANCY_NOTE)
    rec.markers.append("discrepancy")
    return rec


def empirical_correlation(config: RunConfig):
    """Correlation function backed by Monte Carlo counts at each phase pair."""
    cache: dict = {}

    def corr(theta_i, theta_j):
        key = (float(theta_i), float(theta_j))
        if key not in cache:
            cfg = config.experiment.replace(theta_i=key[0], theta_j=key[1])
            cache[key] = counts.simulate(config.sampler, cfg, config.workers, config.convention).cov
        return cache[key].mean

    corr.estimates = cache
    return corr


def run_chsh(config: RunConfig) -> ResultRecord:
    rec = _new_record("chsh", config)
    if config.source == "analytic":
        corr = bell.analytic_correlation
        path = CLOSED_FORM
        search_corr = corr
    else:
        if config.sampler.n < 2:
            raise ConfigError("sampler.n", f"empirical correlations need n >= 2, got {config.sampler.n}")
        corr = empirical_correlation(config)
        path = MONTE_CARLO
        if config.convention == counts.RATIO:
            search_corr = bell.count_oracle_correlation
        else:
            search_corr = lambda a, b: 0.5 * np.sin(np.asarray(a) - np.asarray(b))  # noqa: E731
    if config.search:
        setting, _ = bell.find_max_violation(search_corr, config.grid)
    else:
        setting = bell.ChshSetting(*config.setting)
    try:
        result = bell.chsh_statistic(setting, corr)
    except analytic.DegenerateError as err:
        raise ConfigError("experiment", str(err)) from None
    rec.add("a", setting.a, "input")
    rec.add("a_prime", setting.a_prime, "input")
    rec.add("b", setting.b, "input")
    rec.add("b_prime", setting.b_prime, "input")
    se_terms = [None] * 4
    if config.source == "empirical":
        se_terms = [corr.estimates[p].se for p in setting.pairs()]
    for name, v, se in zip(("E_ab", "E_ab_prime", "E_a_prime_b", "E_a_prime_b_prime"), result.terms, se_terms):
        rec.add(name, v, path, se, config.sampler.n if se is not None else None)
    s_se = math.sqrt(sum(x * x for x in se_terms)) if config.source == "empirical" else None
    rec.add("s", result.s, path, s_se)
    rec.add("violated", result.violated, path)
    if config.source == "empirical":
        rec.notes.append(counts.DISCREPANCY_NOTE)
        rec.markers.append("discrepancy")
    return rec


def run_sweep(config: RunConfig) -> ResultRecord:
    rec = _new_record("sweep", config)
    base = config.experiment
    deltas = config.sweep.deltas()
    for delta in deltas:
        cfg = base.replace(theta_i=base.theta_j + float(delta))
        closed = analytic.theta_moments_closed_form(cfg)
        quad = analytic.theta_moments(cfg, config.detector_model, path=QUADRATURE)
        try:
            mc = counts.simulate(config.sampler, cfg, config.workers, config.convention).cov
            oracle = counts.oracle_covariance(cfg, config.convention)
        except analytic.DegenerateError as err:
            raise ConfigError("experiment", str(err)) from None
        rec.rows.append(
            {
                "delta": float(delta),
                "rho_closed": closed.rho,
                "rho_quadrature": quad.rho,
                "cov_oracle": oracle,
                "cov_mc": mc.mean,
                "se": mc.se,
            }
        )
    diffs = [abs(r["rho_closed"] - r["rho_quadrature"]) for r in rec.rows if r["rho_closed"] is not None and r["rho_quadrature"] is not None]
    rec.add("max_abs_rho_deviation", max(diffs) if diffs else None, QUADRATURE)
    if any(r["rho_quadrature"] is None for r in rec.rows):
        rec.markers.append("degenerate")
    rec.notes.append(counts.DISCREPANCY_NOTE)
    rec.markers.append("discrepancy")
    return rec


RUNNERS = {
    "analytic": run_analytic,
    "simulate": run_simulate,
    "chsh": run_chsh,
    "sweep": run_sweep,
}
