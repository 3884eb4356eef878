"""Experiment harness: error norms, refinement and scaling studies, reports.

Experiment files are flat ``key = value`` text::

    name = table1
    model = heat
    grids = 8, 16, 24, 32          # n means n x n x n; or NtxNxxNy
    solver = both                  # sequential | paradin | both
    cf = 4
    executor = serial              # serial | pool
    workers = 4
    tolerance = fraction:0.1       # or absolute:1e-10
    format = table
    repeats = 1

CSV reports have the columns in ``CSV_COLUMNS``; JSON reports carry
``"schema": JSON_SCHEMA`` and the same fields per grid.  Wall-clock columns
are measured on the host running the harness.
"""

from __future__ import annotations

import configparser
import csv
import enum
import io
import json
import math
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .discretization import SpaceTimeGrid, exact_global
from .errors import ParadinError
from .models import ModelKind, ModelSpec, nonlinear_heat, viscous_burgers
from .sequential import NewtonConfig, run_sequential
from .solver import ParadinConfig, run_paradin

JSON_SCHEMA = "paradin-report/1"
HOST_NOTE = "measured on host"
REFERENCE_TOLERANCE = 1e-12

CSV_COLUMNS = (
    "grid",
    "nt",
    "nx",
    "ny",
    "tolerance",
    "seq_l1",
    "seq_l2",
    "seq_linf",
    "par_l1",
    "par_l2",
    "par_linf",
    "rate_l1",
    "rate_l2",
    "rate_linf",
    "seq_iterations",
    "par_iterations",
    "seq_time_s",
    "serial_paradin_time_s",
    "parallel_time_s",
    "workers",
    "speedup",
    "efficiency",
    "max_difference",
    "status",
)
HISTORY_COLUMNS = ("solver", "grid", "iteration", "update_norm", "residual_norm")


class Norm(str, enum.Enum):
    L1 = "L1"
    L2 = "L2"
    LINF = "Linf"


class Solver(str, enum.Enum):
    SEQUENTIAL = "sequential"
    PARADIN = "paradin"
    BOTH = "both"


@dataclass(frozen=True)
class Absolute:
    value: float


@dataclass(frozen=True)
class FractionOfReferenceError:
    """Newton tolerance = ``fraction`` x the discretization error of a
    tightly converged sequential run, in the model's reporting norm."""

    fraction: float = 0.1

    def __post_init__(self):
        if not 0 < self.fraction <= 1:
            raise ValueError("fraction must lie in (0, 1]")


@dataclass(frozen=True)
class OutputSpec:
    format: str = "table"
    path: str | None = None

    def __post_init__(self):
        if self.format not in ("csv", "json", "table"):
            raise ValueError(f"unknown output format {self.format!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelSpec
    grids: tuple[tuple[int, int, int], ...]
    solver: Solver = Solver.BOTH
    paradin: ParadinConfig = field(default_factory=ParadinConfig)
    tolerance_rule: Absolute | FractionOfReferenceError = field(default_factory=FractionOfReferenceError)
    output: OutputSpec = field(default_factory=OutputSpec)
    name: str = "experiment"
    repeats: int = 1

    def __post_init__(self):
        if not self.grids:
            raise ValueError("an experiment needs at least one grid")
        if self.repeats < 1:
            raise ValueError("repeats must be at least 1")


def reporting_norm(model: ModelSpec) -> Norm:
    """Norm the model's refinement study is reported in."""
    return Norm.L1 if model.kind is ModelKind.VISCOUS_BURGERS else Norm.LINF


def space_time_error(numeric, model: ModelSpec, grid: SpaceTimeGrid, norm: Norm | str) -> float:
    """Error over all unknowns and levels 1..nt; L1 and L2 are means, Linf a max."""
    e = np.asarray(numeric, dtype=float) - exact_global(grid, model)
    norm = Norm(norm)
    if norm is Norm.L1:
        return float(np.mean(np.abs(e)))
    if norm is Norm.L2:
        return float(np.sqrt(np.mean(e * e)))
    return float(np.max(np.abs(e)))


def convergence_rate(e_coarse: float, e_fine: float, n_coarse: int, n_fine: int) -> float:
    return math.log(e_coarse / e_fine) / math.log(n_fine / n_coarse)


@dataclass
class SolverResult:
    l1: float
    l2: float
    linf: float
    iterations: int
    wall_time_s: float
    history: list = field(default_factory=list)

    def norm(self, which: Norm) -> float:
        return {Norm.L1: self.l1, Norm.L2: self.l2, Norm.LINF: self.linf}[Norm(which)]


@dataclass
class GridResult:
    nt: int
    nx: int
    ny: int
    tolerance: float = float("nan")
    sequential: SolverResult | None = None
    paradin: SolverResult | None = None
    serial_paradin_time_s: float | None = None
    parallel_time_s: float | None = None
    workers: int | None = None
    speedup: float | None = None
    efficiency: float | None = None
    max_difference: float | None = None
    rates: dict = field(default_factory=dict)
    failure: str | None = None

    @property
    def label(self) -> str:
        return f"{self.nt}x{self.nx}x{self.ny}"

    def primary(self) -> SolverResult | None:
        return self.sequential or self.paradin


@dataclass
class ErrorReport:
    name: str
    model: str
    grids: list[GridResult] = field(default_factory=list)
    note: str = HOST_NOTE

    @property
    def failures(self) -> list[GridResult]:
        return [g for g in self.grids if g.failure]


def _errors(U, model, grid) -> tuple[float, float, float]:
    return tuple(space_time_error(U, model, grid, n) for n in (Norm.L1, Norm.L2, Norm.LINF))


def _best_of(repeats, fn):
    best, out = math.inf, None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return out, best


def resolve_tolerance(cfg: ExperimentConfig, grid: SpaceTimeGrid) -> float:
    rule = cfg.tolerance_rule
    if isinstance(rule, Absolute):
        return rule.value
    base = cfg.paradin.newton
    ref, _ = run_sequential(grid, cfg.model, replace(base, tolerance=REFERENCE_TOLERANCE))
    return rule.fraction * space_time_error(ref, cfg.model, grid, reporting_norm(cfg.model))


def _run_grid(cfg: ExperimentConfig, nt: int, nx: int, ny: int) -> GridResult:
    model = cfg.model
    grid = SpaceTimeGrid.for_model(model, nt, nx, ny)
    out = GridResult(nt, nx, ny)
    out.tolerance = resolve_tolerance(cfg, grid)
    newton = replace(cfg.paradin.newton, tolerance=out.tolerance)
    U_seq = U_par = None
    if cfg.solver in (Solver.SEQUENTIAL, Solver.BOTH):
        (U_seq, stats), t = _best_of(cfg.repeats, lambda: run_sequential(grid, model, newton))
        out.sequential = SolverResult(*_errors(U_seq, model, grid), stats.iterations, t, stats.history)
    if cfg.solver in (Solver.PARADIN, Solver.BOTH):
        pcfg = replace(cfg.paradin, newton=newton)
        (U_par, stats), t = _best_of(cfg.repeats, lambda: run_paradin(grid, model, pcfg))
        out.paradin = SolverResult(*_errors(U_par, model, grid), stats.iterations, t, stats.history)
        if pcfg.executor == "pool":
            out.workers = stats.timing.workers
            out.parallel_time_s = t
            _, t_serial = _best_of(cfg.repeats, lambda: run_paradin(grid, model, replace(pcfg, executor="serial")))
            out.serial_paradin_time_s = t_serial
            out.speedup = t_serial / t
            out.efficiency = out.speedup / out.workers
        else:
            out.serial_paradin_time_s = t
    if U_seq is not None and U_par is not None:
        out.max_difference = float(np.max(np.abs(U_seq - U_par)))
    return out


def run_experiment(cfg: ExperimentConfig) -> ErrorReport:
    """Run every grid; a failing grid is recorded and the rest still run."""
    report = ErrorReport(cfg.name, cfg.model.name)
    for nt, nx, ny in cfg.grids:
        try:
            report.grids.append(_run_grid(cfg, nt, nx, ny))
        except (ParadinError, ValueError, ArithmeticError) as exc:
            report.grids.append(GridResult(nt, nx, ny, failure=f"{type(exc).__name__}: {exc}"))
    _attach_rates(report)
    return report


def _attach_rates(report: ErrorReport):
    ok = [g for g in report.grids if g.failure is None and g.primary() is not None]
    for prev, cur in zip(ok, ok[1:]):
        if cur.nx <= prev.nx:
            continue
        for norm in Norm:
            ec, ef = prev.primary().norm(norm), cur.primary().norm(norm)
            if ec > 0 and ef > 0:
                cur.rates[norm.value] = convergence_rate(ec, ef, prev.nx, cur.nx)


# reports -------------------------------------------------------------------


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(v)
    return str(v)


def grid_row(g: GridResult) -> dict:
    s, p = g.sequential, g.paradin
    return {
        "grid": g.label,
        "nt": g.nt,
        "nx": g.nx,
        "ny": g.ny,
        "tolerance": g.tolerance,
        "seq_l1": s and s.l1,
        "seq_l2": s and s.l2,
        "seq_linf": s and s.linf,
        "par_l1": p and p.l1,
        "par_l2": p and p.l2,
        "par_linf": p and p.linf,
        "rate_l1": g.rates.get("L1"),
        "rate_l2": g.rates.get("L2"),
        "rate_linf": g.rates.get("Linf"),
        "seq_iterations": s and s.iterations,
        "par_iterations": p and p.iterations,
        "seq_time_s": s and s.wall_time_s,
        "serial_paradin_time_s": g.serial_paradin_time_s,
        "parallel_time_s": g.parallel_time_s,
        "workers": g.workers,
        "speedup": g.speedup,
        "efficiency": g.efficiency,
        "max_difference": g.max_difference,
        "status": "ok" if g.failure is None else g.failure,
    }


def report_csv(report: ErrorReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for g in report.grids:
        row = grid_row(g)
        w.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def report_json(report: ErrorReport) -> str:
    doc = {
        "schema": JSON_SCHEMA,
        "name": report.name,
        "model": report.model,
        "timing_note": report.note,
        "columns": list(CSV_COLUMNS),
        "grids": [grid_row(g) for g in report.grids],
    }
    return json.dumps(doc, indent=2, allow_nan=False, default=float)


def report_table(report: ErrorReport) -> str:
    cols = [
        ("grid", "grid", "{}"),
        ("seq_l1", "seq L1", "{:.3e}"),
        ("seq_linf", "seq Linf", "{:.3e}"),
        ("par_l1", "par L1", "{:.3e}"),
        ("par_linf", "par Linf", "{:.3e}"),
        ("rate_l1", "rate L1", "{:.2f}"),
        ("rate_linf", "rate Linf", "{:.2f}"),
        ("seq_iterations", "seq it", "{}"),
        ("par_iterations", "par it", "{}"),
        ("seq_time_s", "seq s", "{:.2f}"),
        ("serial_paradin_time_s", "serial s", "{:.2f}"),
        ("parallel_time_s", "pool s", "{:.2f}"),
        ("speedup", "speedup", "{:.2f}"),
        ("efficiency", "eff", "{:.2f}"),
    ]
    rows = []
    for g in report.grids:
        r = grid_row(g)
        rows.append([("-" if r[k] is None else f.format(r[k])) for k, _, f in cols])
    heads = [h for _, h, _ in cols]
    widths = [max([len(h)] + [len(r[i]) for r in rows]) for i, h in enumerate(heads)]
    lines = [f"{report.name} ({report.model}); times {report.note}"]
    lines.append("  ".join(h.rjust(wd) for h, wd in zip(heads, widths)))
    lines += ["  ".join(c.rjust(wd) for c, wd in zip(r, widths)) for r in rows]
    lines += [f"{g.label}: FAILED {g.failure}" for g in report.failures]
    return "\n".join(lines) + "\n"


def history_csv(report: ErrorReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HISTORY_COLUMNS)
    for g in report.grids:
        for solver, res in (("sequential", g.sequential), ("paradin", g.paradin)):
            for rec in res.history if res else ():
                w.writerow([solver, g.label, rec.iteration, repr(rec.update_norm), _fmt(rec.residual_norm)])
    return buf.getvalue()


def emit_report(report: ErrorReport, out_dir, fmt: str = "table") -> list[Path]:
    """Write the report in ``fmt`` plus the convergence-history CSV.

    Returns the written paths.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        body = {"csv": report_csv, "json": report_json, "table": report_table}[fmt](report)
        main = out / f"{report.name}.{'txt' if fmt == 'table' else fmt}"
        main.write_text(body)
        hist = out / f"{report.name}_history.csv"
        hist.write_text(history_csv(report))
    except OSError as exc:
        raise OSError(f"cannot write report under {out}: {exc}") from exc
    return [main, hist]


def parse_csv_report(text: str) -> list[dict]:
    """Read a CSV report back; numeric cells become floats or ints."""

    def cell(v: str):
        if v == "":
            return None
        for cast in (int, float):
            try:
                return cast(v)
            except ValueError:
                pass
        return v

    return [{k: cell(v) for k, v in row.items()} for row in csv.DictReader(io.StringIO(text))]


# experiment files ------------------------------------------------------------

_SECTION = "experiment"


def read_flat_config(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines (``#`` comments allowed) into a dict."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    parser.read_string(f"[{_SECTION}]\n" + text)
    return dict(parser[_SECTION])


def parse_grids(spec: str) -> tuple[tuple[int, int, int], ...]:
    grids = []
    for item in spec.replace(";", ",").split(","):
        item = item.strip().lower()
        if not item:
            continue
        parts = [int(p) for p in item.split("x")]
        if len(parts) == 1:
            parts *= 3
        elif len(parts) == 2:
            parts.append(parts[1])
        if len(parts) != 3:
            raise ValueError(f"bad grid {item!r}; use n, NtxN or NtxNxxNy")
        grids.append(tuple(parts))
    return tuple(grids)


def parse_tolerance(spec: str):
    kind, _, value = spec.partition(":")
    kind = kind.strip().lower()
    if kind == "fraction":
        return FractionOfReferenceError(float(value or 0.1))
    if kind == "absolute":
        return Absolute(float(value))
    raise ValueError(f"tolerance must be fraction:<f> or absolute:<tol>, got {spec!r}")


def model_from_name(name: str) -> ModelSpec:
    name = name.strip().lower()
    if name == "heat":
        return nonlinear_heat()
    if name == "burgers":
        return viscous_burgers()
    raise ValueError(f"unknown model {name!r}; choose heat or burgers")


DEFAULT_CF = {"heat": 4, "burgers": 3}


def experiment_from_mapping(values: dict) -> ExperimentConfig:
    v = {k.replace("-", "_"): str(x) for k, x in values.items() if x is not None}
    model = model_from_name(v.get("model", "heat"))
    newton = NewtonConfig(
        tolerance=float(v.get("newton_tolerance", 1e-10)),
        max_iterations=int(v.get("max_iterations", 20)),
    )
    workers = v.get("workers")
    paradin = ParadinConfig(
        newton=newton,
        coarsening_factor=int(v.get("cf", DEFAULT_CF[model.name])),
        preconditioning=v.get("preconditioning", "true").lower() in ("1", "true", "yes", "on"),
        executor=v.get("executor", "serial"),
        workers=int(workers) if workers else None,
    )
    return ExperimentConfig(
        model=model,
        grids=parse_grids(v.get("grids", "8")),
        solver=Solver(v.get("solver", "both")),
        paradin=paradin,
        tolerance_rule=parse_tolerance(v.get("tolerance", "fraction:0.1")),
        output=OutputSpec(v.get("format", "table"), v.get("out")),
        name=v.get("name", "experiment"),
        repeats=int(v.get("repeats", 1)),
    )


def load_experiment(path, overrides: dict | None = None) -> ExperimentConfig:
    values = read_flat_config(Path(path).read_text())
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return experiment_from_mapping(values)
