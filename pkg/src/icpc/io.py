"""File formats: dataset CSVs, experiment configs, run manifests, reports.

All readers are file-only and locale-independent (``float`` parsing); floats
are written with ``repr`` so a write/read cycle is bit-exact.
"""

from __future__ import annotations

import configparser
import csv
import hashlib
import json
import math
import os
import tempfile
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .core import BASELINE, ModelParams
from .exceptions import DataError, ParameterError, ValidationError
from .gmm import InstrumentSpec
from .meanfield import DensityGrid
from .panel import PanelDataset
from .simulate import AR1, ShockProcessSpec, TimeSeriesDataset

__all__ = [
    "TIMESERIES_COLUMNS",
    "PANEL_COLUMNS",
    "load_timeseries_csv",
    "write_timeseries_csv",
    "load_panel_csv",
    "write_panel_csv",
    "write_density_csv",
    "load_density_csv",
    "write_rows_csv",
    "csv_text",
    "timeseries_csv_text",
    "panel_csv_text",
    "density_csv_text",
    "RunSettings",
    "ExperimentConfig",
    "load_config",
    "config_digest",
    "RunManifest",
    "format_table",
    "to_json",
    "atomic_write",
]

TIMESERIES_COLUMNS = ("period", "pi", "pi_e", "ygap", "cinf")
PANEL_COLUMNS = ("country", "period", "pi_core", "cinf", "ygap")


# ---------------------------------------------------------------------------
# helpers


def atomic_write(path, text: str) -> Path:
    """Write ``text`` to ``path`` through a temporary file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (np.integer,)):
        return str(int(value))
    return str(value)


def csv_text(header, rows) -> str:
    """Render a CSV table; floats use ``repr`` so they read back exactly."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def write_rows_csv(path, header, rows) -> Path:
    """Write a plain table; floats use ``repr``."""
    return atomic_write(path, csv_text(header, rows))


def _read_rows(path, required):
    path = Path(path)
    if not path.is_file():
        raise DataError(f"{path}: file not found")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file, expected a header row") from None
        missing = [c for c in required if c not in header]
        if missing:
            raise DataError(f"{path}: missing column {missing[0]!r} (header: {', '.join(header)})")
        rows = []
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise DataError(f"{path}: row {line_no} has {len(row)} fields, expected {len(header)}")
            rows.append((line_no, dict(zip(header, (cell.strip() for cell in row)))))
    return header, rows


def _number(path, line_no, column, text) -> float:
    try:
        value = float(text)
    except ValueError:
        raise DataError(f"{path}: row {line_no}, column {column!r}: non-numeric value {text!r}") from None
    if not math.isfinite(value):
        raise DataError(f"{path}: row {line_no}, column {column!r}: non-finite value {text!r}")
    return value


def _period_key(labels):
    """Integers sort numerically when every label is an integer, else as text."""
    try:
        return [int(v) for v in labels], True
    except ValueError:
        return list(labels), False


# ---------------------------------------------------------------------------
# time series


def load_timeseries_csv(path) -> TimeSeriesDataset:
    """Read columns period, pi, pi_e, ygap, cinf (and optional u).

    Rows are sorted by period. Errors name the missing column or give the
    offending row numbers (the header is row 1).
    """
    header, rows = _read_rows(path, TIMESERIES_COLUMNS)
    if not rows:
        raise DataError(f"{path}: no data rows")
    labels, numeric = _period_key([r["period"] for _, r in rows])
    seen = {}
    for (line_no, _), label in zip(rows, labels):
        if label in seen:
            raise DataError(f"{path}: duplicate period {label!r} in rows {seen[label]} and {line_no}")
        seen[label] = line_no
    cols = ["pi", "pi_e", "ygap", "cinf"] + (["u"] if "u" in header else [])
    values = {c: np.array([_number(path, n, c, r[c]) for n, r in rows]) for c in cols}
    order = np.argsort(np.array(labels, dtype=object if not numeric else np.int64), kind="stable")
    period = np.array(labels, dtype=np.int64 if numeric else object)[order]
    return TimeSeriesDataset(
        pi=values["pi"][order],
        pi_e=values["pi_e"][order],
        ygap=values["ygap"][order],
        cinf=values["cinf"][order],
        u=values["u"][order] if "u" in values else None,
        period=period,
    )


def timeseries_csv_text(data: TimeSeriesDataset) -> str:
    header = list(TIMESERIES_COLUMNS) + (["u"] if data.u is not None else [])
    cols = [data.period, data.pi, data.pi_e, data.ygap, data.cinf] + ([data.u] if data.u is not None else [])
    return csv_text(header, zip(*cols))


def write_timeseries_csv(path, data: TimeSeriesDataset) -> Path:
    return atomic_write(path, timeseries_csv_text(data))


# ---------------------------------------------------------------------------
# panel


def load_panel_csv(path) -> PanelDataset:
    """Read a long-format panel (country, period, pi_core, cinf, ygap).

    A period missing inside a country's own span is an error naming the
    country and the period. Countries that start late or end early are
    trimmed to the common span; the removed periods are listed in
    ``dropped_periods`` and ``balanced`` is then False.
    """
    _, rows = _read_rows(path, PANEL_COLUMNS)
    if not rows:
        raise DataError(f"{path}: no data rows")
    labels, numeric = _period_key([r["period"] for _, r in rows])
    data = {}
    countries = []
    for (line_no, r), label in zip(rows, labels):
        c = r["country"]
        if c not in data:
            data[c] = {}
            countries.append(c)
        if label in data[c]:
            raise DataError(f"{path}: duplicate period {label!r} for country {c!r} (row {line_no})")
        data[c][label] = tuple(_number(path, line_no, k, r[k]) for k in ("pi_core", "cinf", "ygap"))
    calendar = sorted(set(labels))
    index = {p: i for i, p in enumerate(calendar)}
    first, last = 0, len(calendar) - 1
    for c in countries:
        pos = sorted(index[p] for p in data[c])
        for a, b in zip(pos[:-1], pos[1:]):
            if b != a + 1:
                raise DataError(f"{path}: country {c!r} has a gap at period {calendar[a + 1]!r}")
        first = max(first, pos[0])
        last = min(last, pos[-1])
    if first > last:
        raise DataError(f"{path}: countries share no common periods")
    periods = calendar[first : last + 1]
    dropped = calendar[:first] + calendar[last + 1 :]
    arr = np.array([[data[c][p] for p in periods] for c in countries])
    return PanelDataset(
        countries=np.array(countries, dtype=object),
        periods=np.array(periods, dtype=np.int64 if numeric else object),
        pi_core=arr[:, :, 0],
        cinf=arr[:, :, 1],
        ygap=arr[:, :, 2],
        dropped_periods=list(dropped),
    )


def panel_csv_text(data: PanelDataset) -> str:
    return csv_text(PANEL_COLUMNS, data.to_long())


def write_panel_csv(path, data: PanelDataset) -> Path:
    return atomic_write(path, panel_csv_text(data))


# ---------------------------------------------------------------------------
# densities


def density_csv_text(grid: DensityGrid) -> str:
    return csv_text(("cell_center", "density"), zip(grid.centers, grid.values))


def write_density_csv(path, grid: DensityGrid) -> Path:
    return atomic_write(path, density_csv_text(grid))


def load_density_csv(path) -> DensityGrid:
    """Rebuild a grid from equally spaced cell centres."""
    _, rows = _read_rows(path, ("cell_center", "density"))
    x = np.array([_number(path, n, "cell_center", r["cell_center"]) for n, r in rows])
    v = np.array([_number(path, n, "density", r["density"]) for n, r in rows])
    if x.size < 2:
        raise DataError(f"{path}: need at least two cells")
    h = (x[-1] - x[0]) / (x.size - 1)
    return DensityGrid(x[0] - h / 2, x[-1] + h / 2, v)


# ---------------------------------------------------------------------------
# experiment configuration


@dataclass(frozen=True)
class RunSettings:
    """Sizes and seeds for a run; each subcommand reads what it needs."""

    seed: int = 0
    t_len: int = 600
    n_firms: int = 1000
    reps: int = 200
    t_grid: tuple = (500, 2000, 8000)
    lambda_grid: tuple = (0.06, 0.12, 0.18, 0.24, 0.30)
    windows_per_lambda: int = 10
    t_window: int = 2000
    n_grid: tuple = (100, 1000, 10000)
    mf_reps: int = 5
    mf_t_len: int = 10
    grid_cells: int = 256
    sigma_p2: float | None = None
    level: float = 0.95

    def __post_init__(self):
        for name in ("t_len", "n_firms", "reps", "windows_per_lambda", "t_window", "mf_reps", "mf_t_len"):
            if getattr(self, name) < 1:
                raise ParameterError(f"run.{name} must be positive")
        if self.grid_cells < 16:
            raise ParameterError("run.grid_cells must be at least 16")
        if not 0 < self.level < 1:
            raise ParameterError("run.level must lie in (0, 1)")
        if self.sigma_p2 is not None and not self.sigma_p2 > 0:
            raise ParameterError("run.sigma_p2 must be positive")
        if any(t < 2 for t in self.t_grid) or any(n < 2 for n in self.n_grid):
            raise ParameterError("run.t_grid and run.n_grid entries must be at least 2")
        if any(not v > 0 for v in self.lambda_grid):
            raise ParameterError("run.lambda_grid entries must be strictly positive")


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelParams = BASELINE
    shocks: ShockProcessSpec = field(default_factory=ShockProcessSpec)
    instruments: InstrumentSpec = field(default_factory=InstrumentSpec)
    bandwidth: int | None = None
    initial_weight: str = "2sls"
    run: RunSettings = field(default_factory=RunSettings)
    output_dir: str | None = None

    def to_dict(self) -> dict:
        s = self.shocks
        return {
            "model": asdict(self.model),
            "shocks": {
                "ygap_persistence": s.ygap.persistence,
                "ygap_std": s.ygap.std,
                "cinf_persistence": s.cinf.persistence,
                "cinf_std": s.cinf.std,
                "u_persistence": s.u.persistence,
                "u_std": s.u.std,
                "expectation_noise": s.expectation_noise,
            },
            "estimator": {
                **asdict(self.instruments),
                "bandwidth": self.bandwidth,
                "initial_weight": self.initial_weight,
            },
            "run": {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self.run).items()},
            "output": {"dir": self.output_dir},
        }

    @property
    def digest(self) -> str:
        return config_digest(self.to_dict())


def _as_bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _optional(conv):
    def parse(text):
        return None if text.strip().lower() in ("", "none", "auto") else conv(text)

    return parse


def _tuple_of(conv):
    def parse(text):
        items = [v for v in text.replace(",", " ").split() if v]
        if not items:
            raise ValueError("empty list")
        return tuple(conv(v) for v in items)

    return parse


_SCHEMA = {
    "model": {k: float for k in ("theta", "beta", "lambda_bar", "phi", "rho", "omega", "gamma")},
    "shocks": {
        k: float
        for k in (
            "ygap_persistence",
            "ygap_std",
            "cinf_persistence",
            "cinf_std",
            "u_persistence",
            "u_std",
            "expectation_noise",
        )
    },
    "estimator": {
        "pi_lags": int,
        "ygap_lags": int,
        "cinf_lags": int,
        "constant": _as_bool,
        "bandwidth": _optional(int),
        "initial_weight": str,
    },
    "run": {
        "seed": int,
        "t_len": int,
        "n_firms": int,
        "reps": int,
        "t_grid": _tuple_of(int),
        "lambda_grid": _tuple_of(float),
        "windows_per_lambda": int,
        "t_window": int,
        "n_grid": _tuple_of(int),
        "mf_reps": int,
        "mf_t_len": int,
        "grid_cells": int,
        "sigma_p2": _optional(float),
        "level": float,
    },
    "output": {"dir": str},
}


def load_config(path) -> ExperimentConfig:
    """Parse an INI-style config; unknown sections or keys are rejected.

    Every block is validated here, before anything runs.
    """
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"{path}: config file not found")
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ValidationError(f"{path}: {exc}") from None
    values: dict = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ValidationError(f"{path}: unknown section [{section}]")
        values[section] = {}
        for key, text in parser.items(section):
            if key not in _SCHEMA[section]:
                raise ValidationError(f"{path}: unknown key {key!r} in [{section}]")
            try:
                values[section][key] = _SCHEMA[section][key](text)
            except ValueError as exc:
                raise ValidationError(f"{path}: [{section}] {key}: {exc}") from None
    return config_from_dict(values)


def config_from_dict(values: dict) -> ExperimentConfig:
    model = BASELINE.replace(**values.get("model", {})) if values.get("model") else BASELINE
    base = ShockProcessSpec()
    sh = values.get("shocks", {})
    shocks = ShockProcessSpec(
        ygap=AR1(sh.get("ygap_persistence", base.ygap.persistence), sh.get("ygap_std", base.ygap.std)),
        cinf=AR1(sh.get("cinf_persistence", base.cinf.persistence), sh.get("cinf_std", base.cinf.std)),
        u=AR1(sh.get("u_persistence", base.u.persistence), sh.get("u_std", base.u.std)),
        expectation_noise=sh.get("expectation_noise", 0.0),
    )
    est = dict(values.get("estimator", {}))
    bandwidth = est.pop("bandwidth", None)
    initial_weight = est.pop("initial_weight", "2sls")
    if initial_weight not in ("2sls", "identity"):
        raise ParameterError("estimator.initial_weight must be '2sls' or 'identity'")
    if bandwidth is not None and bandwidth < 0:
        raise ParameterError("estimator.bandwidth must be non-negative")
    instruments = InstrumentSpec(**est)
    run = RunSettings(**values.get("run", {}))
    out = values.get("output", {}).get("dir")
    return ExperimentConfig(model, shocks, instruments, bandwidth, initial_weight, run, out)


def config_digest(obj) -> str:
    """sha256 of canonical JSON (sorted keys, compact separators)."""
    text = json.dumps(obj, sort_keys=True, separators=(",", ":"), default=_json_default)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# manifests and reports


def _version() -> str:
    try:
        from importlib.metadata import version

        return version("artifact")
    except Exception:
        from . import __version__

        return __version__


@dataclass
class RunManifest:
    command: str
    config_digest: str
    seed: int
    version: str = field(default_factory=_version)
    started: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())
    finished: str | None = None
    outputs: list = field(default_factory=list)

    def finish(self):
        self.finished = datetime.now(timezone.utc).isoformat()
        return self

    def to_dict(self) -> dict:
        return asdict(self)


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def to_json(obj) -> str:
    """Full-precision JSON with stable key order."""
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def format_table(rows, headers=None, digits: int = 6) -> str:
    """Plain-text table; floats shown with ``digits`` significant digits."""

    def cell(v):
        if isinstance(v, (float, np.floating)):
            return f"{float(v):.{digits}g}"
        return str(v)

    body = [[cell(v) for v in row] for row in rows]
    if headers is not None:
        body.insert(0, [str(h) for h in headers])
    if not body:
        return ""
    widths = [max(len(r[i]) for r in body) for i in range(len(body[0]))]
    lines = ["  ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(r, widths))) for r in body]
    if headers is not None:
        lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"
