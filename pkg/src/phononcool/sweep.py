"""Detuning (or coupling / bath) sweeps, result files and mode comparison.

Config files are flat ``key = value`` text, ``#`` starts a comment::

    # physical parameters, in units of unit_scale
    omega_ph = 2.0
    delta = 0.0
    rabi = 1.0
    g = 0.3
    gamma = 0.05
    gamma_c = 0.01
    kappa = 0.5
    nbar = 1.0
    unit_scale = 1.0          # reference rate, informational only

    sweep_axis = delta        # delta | g | nbar
    sweep_lo = -3.0
    sweep_hi = 3.0
    sweep_points = 121
    modes = secular, beyond_secular

    tail_tol = 1e-10
    n_start = 8
    n_cap = 4096
    oracle_n_max = 20         # oracle modes run at oracle_n_max + 5
    output = sweep.csv
    format = csv              # csv | json
    seed = 0
    workers = 1

Nothing is read from the environment.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from . import oracle, reduced
from .model import ModelParams, dress
from .statistics import phonon_stats

MODES = ("secular", "beyond_secular", "oracle_dressed", "oracle_labframe")
AXES = ("delta", "g", "nbar")
FORMATS = ("csv", "json")
COLUMNS = ("sweep_value", "mode", "mean_n", "g2", "n_max_used", "tail_mass", "residual", "warnings")
WARNING_SEP = " | "

_PARAM_KEYS = tuple(f.name for f in fields(ModelParams))


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams
    sweep_axis: str = "delta"
    sweep_lo: float = 0.0
    sweep_hi: float = 0.0
    sweep_points: int = 1
    modes: tuple[str, ...] = ("secular", "beyond_secular")
    tail_tol: float = 1e-10
    n_start: int = 8
    n_cap: int = reduced.DEFAULT_N_CAP
    oracle_n_max: int = 20
    output: Optional[str] = None
    format: str = "csv"
    seed: int = 0
    workers: int = 1
    unit_scale: float = 1.0

    def __post_init__(self):
        if self.sweep_axis not in AXES:
            raise ConfigError(f"sweep_axis must be one of {AXES}, got {self.sweep_axis!r}")
        if self.sweep_points < 1:
            raise ConfigError("sweep_points must be >= 1")
        if self.sweep_lo > self.sweep_hi:
            raise ConfigError("sweep_lo must not exceed sweep_hi")
        if not self.modes:
            raise ConfigError("at least one mode is required")
        bad = [m for m in self.modes if m not in MODES]
        if bad:
            raise ConfigError(f"unknown modes {bad}; choose from {MODES}")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}")
        if not 0 < self.tail_tol < 1:
            raise ConfigError("tail_tol must lie in (0, 1)")
        if self.n_start < 2 or self.n_cap < self.n_start:
            raise ConfigError("need 2 <= n_start <= n_cap")
        # canonical mode order keeps row ordering independent of how modes were listed
        object.__setattr__(self, "modes", tuple(m for m in MODES if m in self.modes))

    def sweep_values(self) -> np.ndarray:
        return np.linspace(self.sweep_lo, self.sweep_hi, self.sweep_points)

    def params_at(self, value: float) -> ModelParams:
        return self.params.with_(**{self.sweep_axis: float(value)})

    def with_(self, **changes) -> "RunConfig":
        return replace(self, **changes)


_CASTS = {
    "sweep_axis": str,
    "sweep_lo": float,
    "sweep_hi": float,
    "sweep_points": int,
    "tail_tol": float,
    "n_start": int,
    "n_cap": int,
    "oracle_n_max": int,
    "output": str,
    "format": str,
    "seed": int,
    "workers": int,
    "unit_scale": float,
}


def parse_modes(text: str) -> tuple[str, ...]:
    return tuple(m.strip() for m in text.replace(",", " ").split() if m.strip())


def parse_config(text: str) -> RunConfig:
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value

    unknown = set(raw) - set(_PARAM_KEYS) - set(_CASTS) - {"modes"}
    if unknown:
        raise ConfigError(f"unknown keys: {sorted(unknown)}")
    missing = [k for k in _PARAM_KEYS if k not in raw]
    if missing:
        raise ConfigError(f"missing model parameters: {missing}")
    try:
        params = ModelParams(**{k: float(raw[k]) for k in _PARAM_KEYS})
        kwargs = {k: cast(raw[k]) for k, cast in _CASTS.items() if k in raw}
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if "modes" in raw:
        kwargs["modes"] = parse_modes(raw["modes"])
    return RunConfig(params=params, **kwargs)


def load_config(path) -> RunConfig:
    return parse_config(Path(path).read_text())


@dataclass(frozen=True)
class SweepRow:
    sweep_value: float
    mode: str
    mean_n: Optional[float]
    g2: Optional[float]
    n_max_used: Optional[int]
    tail_mass: Optional[float]
    residual: Optional[float]
    warnings: tuple[str, ...] = field(default=())

    @property
    def failed(self) -> bool:
        return self.mean_n is None


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]

    def modes(self) -> tuple[str, ...]:
        return tuple(m for m in MODES if any(r.mode == m for r in self.rows))

    def column(self, mode: str, name: str) -> np.ndarray:
        """``name`` for ``mode`` in sweep order; failed entries become NaN."""
        out = [getattr(r, name) for r in self.rows if r.mode == mode]
        return np.array([math.nan if v is None else v for v in out], dtype=float)


def _reduced_row(value, params, config, secular) -> SweepRow:
    mode = "secular" if secular else "beyond_secular"
    d = dress(params, secular)
    ss = reduced.solve_adaptive(d, params, config.tail_tol, config.n_start, config.n_cap)
    st = phonon_stats(ss.populations)
    return SweepRow(value, mode, st.mean_n, st.g2, ss.n_max, ss.tail_mass, ss.residual, ss.warnings)


def _oracle_row(value, params, config, mode) -> SweepRow:
    n_max = config.oracle_n_max + oracle.GUARD_BAND
    d = dress(params, secular=False)
    if mode == "oracle_dressed":
        liouv = oracle.build_dressed_liouvillian(d, params, n_max)
    else:
        liouv = oracle.build_labframe_rotating_liouvillian(params, n_max)
    ns = oracle.steady_state_null(liouv)
    st = ns.stats()
    return SweepRow(value, mode, st.mean_n, st.g2, n_max, st.tail_mass, ns.residual, d.warnings)


def compute_point(config: RunConfig, value: float) -> list[SweepRow]:
    """All configured modes at one sweep value; failures become error rows."""
    rows = []
    try:
        params = config.params_at(value)
    except ValueError as exc:
        return [SweepRow(float(value), m, None, None, None, None, None, (f"error: {exc}",)) for m in config.modes]
    for mode in config.modes:
        try:
            if mode in ("secular", "beyond_secular"):
                row = _reduced_row(float(value), params, config, mode == "secular")
            else:
                row = _oracle_row(float(value), params, config, mode)
        except Exception as exc:  # recorded in-row, never dropped
            row = SweepRow(float(value), mode, None, None, None, None, None, (f"error: {type(exc).__name__}: {exc}",))
        rows.append(row)
    return rows


def _point_task(args):
    config, value = args
    return compute_point(config, value)


def iter_rows(config: RunConfig, workers: Optional[int] = None) -> Iterable[list[SweepRow]]:
    """Yield per-point row groups in sweep order."""
    workers = config.workers if workers is None else workers
    tasks = [(config, v) for v in config.sweep_values()]
    if workers <= 1 or len(tasks) == 1:
        for t in tasks:
            yield _point_task(t)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map preserves submission order
        yield from pool.map(_point_task, tasks, chunksize=max(1, len(tasks) // (4 * workers)))


def run(config: RunConfig, output=None, fmt: Optional[str] = None, workers: Optional[int] = None) -> SweepResult:
    """Run the sweep; when an output path is given rows are written as they complete."""
    output = output if output is not None else config.output
    fmt = fmt or config.format
    rows: list[SweepRow] = []
    if output is None:
        for group in iter_rows(config, workers):
            rows.extend(group)
        return SweepResult(tuple(rows))

    with open(output, "w", newline="") as fh:
        writer = _Writer(fh, fmt)
        for group in iter_rows(config, workers):
            for row in group:
                writer.write(row)
            rows.extend(group)
            fh.flush()
        writer.close()
    return SweepResult(tuple(rows))


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, int):
        return str(x)
    return format(float(x), ".17g")


def _row_record(row: SweepRow) -> dict:
    rec = asdict(row)
    rec["warnings"] = list(row.warnings)
    return rec


class _Writer:
    def __init__(self, fh, fmt):
        self.fh = fh
        self.fmt = fmt
        self.count = 0
        if fmt == "csv":
            self.csv = csv.writer(fh, lineterminator="\n")
            self.csv.writerow(COLUMNS)
        else:
            fh.write("[")

    def write(self, row: SweepRow):
        if self.fmt == "csv":
            self.csv.writerow(
                [
                    _fmt(row.sweep_value),
                    row.mode,
                    _fmt(row.mean_n),
                    _fmt(row.g2),
                    _fmt(row.n_max_used),
                    _fmt(row.tail_mass),
                    _fmt(row.residual),
                    WARNING_SEP.join(row.warnings),
                ]
            )
        else:
            self.fh.write(("," if self.count else "") + "\n  " + json.dumps(_row_record(row)))
        self.count += 1

    def close(self):
        if self.fmt == "json":
            self.fh.write("\n]\n")


def dumps(result: SweepResult, fmt: str = "csv") -> str:
    buf = io.StringIO()
    w = _Writer(buf, fmt)
    for row in result.rows:
        w.write(row)
    w.close()
    return buf.getvalue()


def _opt(cast, text):
    return None if text == "" else cast(text)


def loads(text: str) -> SweepResult:
    """Parse CSV or JSON produced by :func:`run` / :func:`dumps`."""
    if text.lstrip().startswith("["):
        records = json.loads(text)
        rows = [
            SweepRow(
                sweep_value=float(r["sweep_value"]),
                mode=r["mode"],
                mean_n=r["mean_n"],
                g2=r["g2"],
                n_max_used=r["n_max_used"],
                tail_mass=r["tail_mass"],
                residual=r["residual"],
                warnings=tuple(r["warnings"]),
            )
            for r in records
        ]
        return SweepResult(tuple(rows))
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != COLUMNS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    rows = [
        SweepRow(
            sweep_value=float(r["sweep_value"]),
            mode=r["mode"],
            mean_n=_opt(float, r["mean_n"]),
            g2=_opt(float, r["g2"]),
            n_max_used=_opt(int, r["n_max_used"]),
            tail_mass=_opt(float, r["tail_mass"]),
            residual=_opt(float, r["residual"]),
            warnings=tuple(r["warnings"].split(WARNING_SEP)) if r["warnings"] else (),
        )
        for r in reader
    ]
    return SweepResult(tuple(rows))


def load_result(path) -> SweepResult:
    return loads(Path(path).read_text())


@dataclass(frozen=True)
class ModeSummary:
    argmin: float
    min_mean_n: float
    cooling_bandwidth: float
    max_g2_cooling: Optional[float]


@dataclass(frozen=True)
class ComparisonReport:
    sweep_values: np.ndarray
    abs_diff: np.ndarray
    secular: ModeSummary
    beyond_secular: ModeSummary

    @property
    def argmin_shift(self) -> float:
        return self.beyond_secular.argmin - self.secular.argmin

    def format(self) -> str:
        lines = ["sweep_value,abs_diff_mean_n"]
        lines += [f"{_fmt(x)},{_fmt(d)}" for x, d in zip(self.sweep_values, self.abs_diff)]
        for name in ("secular", "beyond_secular"):
            s = getattr(self, name)
            lines.append(
                f"# {name}: argmin={_fmt(s.argmin)} min_mean_n={_fmt(s.min_mean_n)} "
                f"cooling_bandwidth={_fmt(s.cooling_bandwidth)} max_g2_cooling={_fmt(s.max_g2_cooling)}"
            )
        lines.append(f"# argmin_shift={_fmt(self.argmin_shift)}")
        return "\n".join(lines) + "\n"


def cooling_bandwidth(x: np.ndarray, mean_n: np.ndarray, nbar: float) -> float:
    """Measure of the sweep interval where ``mean_n < nbar``.

    Crossings between grid points are located by linear interpolation;
    failed (NaN) points count as not cooled.
    """
    y = np.where(np.isnan(mean_n), np.inf, mean_n - nbar)
    width = 0.0
    for x0, x1, y0, y1 in zip(x[:-1], x[1:], y[:-1], y[1:]):
        if y0 < 0 and y1 < 0:
            width += x1 - x0
        elif y0 < 0 <= y1 and np.isfinite(y1):
            width += (x1 - x0) * y0 / (y0 - y1)
        elif y1 < 0 <= y0 and np.isfinite(y0):
            width += (x1 - x0) * y1 / (y1 - y0)
    return float(width)


def _summary(x, mean_n, g2, nbar) -> ModeSummary:
    i = int(np.nanargmin(mean_n))
    cooled = mean_n < nbar
    g2c = g2[cooled & ~np.isnan(g2)]
    return ModeSummary(
        argmin=float(x[i]),
        min_mean_n=float(mean_n[i]),
        cooling_bandwidth=cooling_bandwidth(x, mean_n, nbar),
        max_g2_cooling=float(g2c.max()) if g2c.size else None,
    )


def compare_modes(result: SweepResult, nbar: float) -> ComparisonReport:
    """Secular vs beyond-secular comparison of a sweep against the bath occupation ``nbar``."""
    for mode in ("secular", "beyond_secular"):
        if mode not in result.modes():
            raise ValueError(f"result has no {mode!r} rows")
    x = np.array([r.sweep_value for r in result.rows if r.mode == "secular"])
    xb = np.array([r.sweep_value for r in result.rows if r.mode == "beyond_secular"])
    if not np.array_equal(x, xb):
        raise ValueError("secular and beyond_secular rows cover different sweep values")
    ns, nb = result.column("secular", "mean_n"), result.column("beyond_secular", "mean_n")
    return ComparisonReport(
        sweep_values=x,
        abs_diff=np.abs(nb - ns),
        secular=_summary(x, ns, result.column("secular", "g2"), nbar),
        beyond_secular=_summary(x, nb, result.column("beyond_secular", "g2"), nbar),
    )


def default_workers() -> int:
    return max(1, min(8, os.cpu_count() or 1))
