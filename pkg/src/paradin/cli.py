"""Command-line entry point: ``paradin <subcommand> [flags]``."""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import replace
from importlib import resources
from pathlib import Path

from .analysis import condition_bound_max_Nt, predicted_speedup
from .bench import (
    Solver,
    emit_report,
    experiment_from_mapping,
    history_csv,
    load_experiment,
    read_flat_config,
    report_csv,
    report_json,
    report_table,
    run_experiment,
)


def preset_path(name: str) -> Path:
    """Path of a shipped preset, e.g. ``table1`` or ``table1.cfg``."""
    name = name if name.endswith(".cfg") else name + ".cfg"
    return Path(str(resources.files("paradin") / "presets" / name))


def _resolve_config(arg: str | None) -> Path | None:
    if arg is None:
        return None
    p = Path(arg)
    if p.exists():
        return p
    shipped = preset_path(arg)
    if shipped.exists():
        return shipped
    raise SystemExit(f"config not found: {arg}")


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="experiment file or shipped preset name")
    p.add_argument("--model", choices=("heat", "burgers"))
    p.add_argument("--nt", type=int, help="time steps (single-grid run)")
    p.add_argument("--nx", type=int, help="intervals per space direction (single-grid run)")
    p.add_argument("--workers", type=int, help="worker threads; default from PARADIN_WORKERS or CPU count")
    p.add_argument("--cf", type=int, help="coarsening factor of the initial guess")
    p.add_argument("--out", help="directory for report files")
    p.add_argument("--format", choices=("csv", "json", "table"))
    p.add_argument("--repeats", type=int, help="best-of-N wall times")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="paradin", description="All-at-once BDF1 solver benchmarks")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("refine", help="error convergence study on a grid sequence")
    _common(p)
    p = sub.add_parser("scale", help="weak scaling: worker pool vs serial executor")
    _common(p)
    p = sub.add_parser("history", help="Newton convergence histories of both solvers")
    _common(p)

    p = sub.add_parser("condition", help="largest N_t allowed by the conditioning estimate")
    p.add_argument("--config")
    p.add_argument("--nx", type=str, help="comma list of N_x")
    p.add_argument("--mu", type=str, help="comma list of viscosities")
    p.add_argument("--c", type=float)
    p.add_argument("--eps", type=float, help="roundoff level")
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json", "table"))

    p = sub.add_parser("predict-speedup", help="model speedup N_t / (N_t / c_f^p + 1)")
    p.add_argument("--config")
    p.add_argument("--nt", type=str, help="comma list of N_t")
    p.add_argument("--cf", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json", "table"))
    return parser


def _experiment(args, mode: str):
    overrides = {
        "model": args.model,
        "cf": args.cf,
        "workers": args.workers,
        "format": args.format,
        "out": args.out,
        "repeats": args.repeats,
    }
    if args.nt is not None or args.nx is not None:
        if args.nt is None or args.nx is None:
            raise SystemExit("--nt and --nx go together")
        overrides["grids"] = f"{args.nt}x{args.nx}x{args.nx}"
    if mode == "scale":
        overrides["executor"] = "pool"
    path = _resolve_config(args.config)
    if path is not None:
        cfg = load_experiment(path, overrides)
    else:
        if args.model is None and "grids" not in overrides:
            raise SystemExit("give --config, or --model with --nt and --nx")
        base = {"name": mode, "model": args.model or "heat", "solver": "both"}
        base.update({k: v for k, v in overrides.items() if v is not None})
        cfg = experiment_from_mapping(base)
    if mode == "scale" and args.workers is None and cfg.paradin.workers is None:
        # one time level per worker unless told otherwise
        return [replace(cfg, grids=(g,), paradin=replace(cfg.paradin, workers=g[0])) for g in cfg.grids]
    return [cfg]


def _run_study(args, mode: str) -> int:
    cfgs = _experiment(args, mode)
    reports = [run_experiment(c) for c in cfgs]
    report = reports[0]
    for extra in reports[1:]:
        report.grids.extend(extra.grids)
    cfg = cfgs[0]
    fmt = cfg.output.format
    if mode == "history":
        sys.stdout.write(history_csv(report))
    else:
        sys.stdout.write({"csv": report_csv, "json": report_json, "table": report_table}[fmt](report))
    if cfg.output.path:
        for p in emit_report(report, cfg.output.path, fmt):
            print(f"wrote {p}", file=sys.stderr)
    return 1 if report.failures and len(report.failures) == len(report.grids) else 0


def _list(text: str | None, cast, default):
    if text is None:
        return default
    return [cast(x) for x in str(text).split(",") if x.strip()]


def _emit_rows(rows: list[dict], fmt: str, out: str | None, name: str):
    import json

    cols = list(rows[0]) if rows else []
    if fmt == "json":
        body = json.dumps({"schema": f"paradin-{name}/1", "rows": rows}, indent=2)
    elif fmt == "csv":
        lines = [",".join(cols)] + [",".join(str(r[c]) for c in cols) for r in rows]
        body = "\n".join(lines) + "\n"
    else:
        widths = [max(len(c), *(len(str(r[c])) for r in rows)) for c in cols]
        lines = ["  ".join(c.rjust(w) for c, w in zip(cols, widths))]
        lines += ["  ".join(str(r[c]).rjust(w) for c, w in zip(cols, widths)) for r in rows]
        body = "\n".join(lines) + "\n"
    sys.stdout.write(body)
    if out:
        d = Path(out)
        d.mkdir(parents=True, exist_ok=True)
        path = d / f"{name}.csv"
        with path.open("w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=cols)
            w.writeheader()
            w.writerows(rows)
        print(f"wrote {path}", file=sys.stderr)


def _condition(args) -> int:
    v = read_flat_config(_resolve_config(args.config).read_text()) if args.config else {}
    nxs = _list(args.nx or v.get("nx"), int, [64])
    mus = _list(args.mu or v.get("mu"), float, [1e-3])
    c = args.c if args.c is not None else float(v.get("c", 1.0))
    eps = args.eps if args.eps is not None else float(v.get("eps_rof", 1e-16))
    rows = [
        {"nx": nx, "mu": mu, "c": c, "eps_rof": eps, "max_nt": condition_bound_max_Nt(nx, mu, c, eps)}
        for nx in nxs
        for mu in mus
    ]
    _emit_rows(rows, args.format or v.get("format", "table"), args.out or v.get("out"), "condition")
    return 0


def _predict(args) -> int:
    v = read_flat_config(_resolve_config(args.config).read_text()) if args.config else {}
    nts = _list(args.nt or v.get("nt"), int, [4, 8, 16, 24, 32])
    cf = args.cf if args.cf is not None else int(v.get("cf", 4))
    p = args.p if args.p is not None else float(v.get("p", 3))
    rows = [{"nt": nt, "cf": cf, "p": p, "speedup": round(predicted_speedup(nt, cf, p), 4)} for nt in nts]
    _emit_rows(rows, args.format or v.get("format", "table"), args.out or v.get("out"), "predicted_speedup")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command in ("refine", "scale", "history"):
        return _run_study(args, args.command)
    if args.command == "condition":
        return _condition(args)
    return _predict(args)


if __name__ == "__main__":
    raise SystemExit(main())
