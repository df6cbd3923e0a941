"""Command-line interface: ``doakit <subcommand> [options]``."""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import replace
from pathlib import Path

from .array_model import (
    Config,
    Scenario,
    SourceSet,
    UlaGeometry,
    load_config,
    synthesize_snapshots,
    write_snapshots_csv,
)
from .estimators import (
    DISPLAY_NAMES,
    SCAN_METHODS,
    EstimatorOptions,
    estimate,
    resolve_methods,
    spectrum,
)
from .harness import ExperimentPlan, mean_spectrum, run_plan
from .metrics import (
    REFERENCE_SPEEDUP_N24,
    ComplexityParams,
    SpeedupModel,
    fit_serial_fraction,
    flops,
    speedup,
)
from .spectral import ScanGrid, write_spectrum_csv


def _common(p: argparse.ArgumentParser, method_default: str = "all") -> None:
    p.add_argument("--config", type=Path, help="YAML/JSON scenario file")
    p.add_argument("--method", default=method_default, help="method tag, comma list or 'all'")
    p.add_argument("--trials", type=int, default=None, help="Monte-Carlo trials")
    p.add_argument("--seed", type=int, default=None, help="master seed (overrides config)")
    p.add_argument("--workers", type=int, default=1, help="worker processes")
    p.add_argument("--out", type=Path, default=None, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="doakit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="synthesise snapshots and write snapshots.csv")
    _common(p)

    p = sub.add_parser("estimate", help="estimate DoAs for one scenario")
    _common(p)

    p = sub.add_parser("spectrum", help="write the angular spectrum of scan methods")
    _common(p)

    p = sub.add_parser("bench", help="run a Monte-Carlo plan and write results.csv")
    _common(p)

    p = sub.add_parser("complexity", help="operation-count table")
    _common(p)
    p.add_argument("--sources", default="1,128", help="comma list of source counts")

    p = sub.add_parser("speedup", help="speedup model table")
    _common(p)
    p.add_argument("--processors", type=int, default=100, help="largest processor count")
    return parser


def _load(args) -> Config:
    if args.config is not None:
        cfg = load_config(args.config)
    else:
        cfg = Config(Scenario(UlaGeometry(64), SourceSet((10.0,)), snr_db=-20.0))
    if args.seed is not None:
        cfg.scenario = replace(cfg.scenario, seed=args.seed)
    return cfg


def _options(cfg: Config) -> EstimatorOptions:
    ex = cfg.extra
    grid = ScanGrid(
        float(ex.get("grid_start", -90.0)),
        float(ex.get("grid_stop", 90.0)),
        float(ex.get("grid_step", 0.001)),
    )
    return EstimatorOptions(grid=grid, n_fft=int(ex.get("n_fft", 1024)),
                            loading=float(ex.get("loading", 0.0)))


def _out_dir(args) -> Path:
    out = args.out or Path(".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args) -> int:
    cfg = _load(args)
    X = synthesize_snapshots(cfg.scenario)
    path = _out_dir(args) / "snapshots.csv"
    write_snapshots_csv(X, path)
    print(f"wrote {path} ({X.shape[0]} elements x {X.shape[1]} snapshots)")
    return 0


def cmd_estimate(args) -> int:
    methods = resolve_methods(args.method)
    cfg = _load(args)
    sc, opts = cfg.scenario, _options(cfg)
    X = synthesize_snapshots(sc)
    L = sc.sources.num_sources
    print(f"# truth: {', '.join(f'{a:g}' for a in sc.sources.angles_deg)}")
    for m in methods:
        est = estimate(m, sc.geometry, L, X=X, options=opts)
        angles = ", ".join(f"{a:.6f}" for a in est.angles_deg)
        extra = f"  (underdetected={est.underdetected})" if est.underdetected else ""
        print(f"{DISPLAY_NAMES[m]}: {angles}{extra}")
    return 0


def cmd_spectrum(args) -> int:
    cfg = _load(args)
    sc, opts = cfg.scenario, _options(cfg)
    methods = [m for m in resolve_methods(args.method) if m in SCAN_METHODS]
    if not methods:
        print("no scan methods selected", file=sys.stderr)
        return 2
    out = _out_dir(args)
    X = synthesize_snapshots(sc) if not args.trials else None
    for m in methods:
        if args.trials:
            spec = mean_spectrum(sc, m, args.trials, options=opts, workers=args.workers)
        else:
            spec = spectrum(m, sc.geometry, sc.sources.num_sources, X=X, options=opts)
        path = out / f"spectrum_{m}.csv"
        write_spectrum_csv(spec, path)
        print(f"wrote {path}")
    return 0


def cmd_bench(args) -> int:
    cfg = _load(args)
    plan_cfg = cfg.extra.get("plan", {}) or {}
    trials = args.trials or int(plan_cfg.get("trials", 40))
    plan = ExperimentPlan(
        scenario=cfg.scenario,
        methods=resolve_methods(args.method),
        num_trials=trials,
        sweep_axis=plan_cfg.get("axis"),
        sweep_values=list(plan_cfg.get("values", [])),
        out_dir=_out_dir(args),
        options=_options(cfg),
        workers=args.workers,
        dump_spectra=bool(plan_cfg.get("dump_spectra", True)),
    )
    table = run_plan(plan)
    print(f"wrote {len(table.rows)} rows to {plan.out_dir / 'results.csv'}")
    return 0


def _emit(rows: list[list], header: list[str], path: Path | None) -> None:
    if path is None:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        return
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    print(f"wrote {path}")


def cmd_complexity(args) -> int:
    cfg = _load(args) if args.config else None
    opts = _options(cfg) if cfg else EstimatorOptions()
    base = ComplexityParams(P=opts.grid.num_points, n_fft=opts.n_fft)
    if cfg:
        base = replace(base, M=cfg.scenario.geometry.num_elements, S=cfg.scenario.num_snapshots)
    counts = [int(s) for s in args.sources.split(",") if s.strip()]
    rows = []
    for m in resolve_methods(args.method):
        for L in counts:
            q = replace(base, L=L)
            rows.append([DISPLAY_NAMES[m], q.M, q.S, L, q.P, q.n_fft, repr(float(flops(m, q)))])
    path = args.out / "complexity.csv" if args.out else None
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
    _emit(rows, ["method", "M", "S", "L", "P", "n_fft", "flops"], path)
    return 0


def cmd_speedup(args) -> int:
    rows = []
    for m in resolve_methods(args.method):
        f = fit_serial_fraction(REFERENCE_SPEEDUP_N24[m], 24)
        model = SpeedupModel(f)
        for N in range(1, args.processors + 1):
            rows.append([DISPLAY_NAMES[m], f"{f:.6f}", N, f"{speedup(model, N):.6f}"])
    path = args.out / "speedup.csv" if args.out else None
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
    _emit(rows, ["method", "serial_fraction", "N", "speedup"], path)
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "spectrum": cmd_spectrum,
    "bench": cmd_bench,
    "complexity": cmd_complexity,
    "speedup": cmd_speedup,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"doakit {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
