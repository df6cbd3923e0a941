"""Monte-Carlo runner: seeded trials, parameter sweeps and result files.

Trial ``i`` of a run draws from ``np.random.SeedSequence(seed, spawn_key=(i,))``,
so every trial is reproducible on its own. Trials are grouped into chunks of
fixed size and reduced in chunk order, which keeps results (including summed
spectra) bit-identical whatever the number of workers.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml

from . import __version__, kernels
from .array_model import (
    Scenario,
    SourceSet,
    exact_covariance,
    sample_covariance,
    scenario_to_mapping,
    synthesize_snapshots,
)
from .estimators import (
    DISPLAY_NAMES,
    METHODS,
    SCAN_METHODS,
    EstimatorOptions,
    canonical_method,
    estimate,
    resolve_methods,
)
from .metrics import (
    ComplexityParams,
    LobeTooWideError,
    TrialEnsemble,
    calibrated_model,
    discrimination_3db,
    discrimination_std,
    flops,
    mse,
    speedup,
)
from .spectral import AngularSpectrum, write_spectrum_csv

CHUNK_SIZE = 16
SEED_SCHEME = "numpy.random.SeedSequence(entropy=seed, spawn_key=(trial_index,)) -> PCG64"


def trial_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


@dataclass
class _ChunkResult:
    estimates: dict[str, list]
    errors: dict[str, list]
    spectrum_sums: dict[str, np.ndarray]
    spectrum_angles: dict[str, np.ndarray]


def _run_chunk(scenario: Scenario, methods: tuple[str, ...], start: int, stop: int,
               options: EstimatorOptions, exact: bool, keep_spectra: bool) -> _ChunkResult:
    L = scenario.sources.num_sources
    g = scenario.geometry
    res = _ChunkResult({m: [] for m in methods}, {m: [] for m in methods}, {}, {})
    for i in range(start, stop):
        if exact:
            X = None
            R = exact_covariance(g, scenario.sources, scenario.snr_db)
        else:
            X = synthesize_snapshots(scenario, trial_rng(scenario.seed, i))
            R = sample_covariance(X)
        for m in methods:
            # U-ESPRIT and FT-DoA work on the snapshots directly
            use_R = R if (X is None or m not in ("uesprit", "ftdoa")) else None
            try:
                est, spec = estimate(m, g, L, X=X if use_R is None else None, R=use_R,
                                     options=options, return_spectrum=True)
            except Exception as exc:  # recorded per trial, never fatal
                res.estimates[m].append(None)
                res.errors[m].append(f"{type(exc).__name__}: {exc}")
                continue
            res.estimates[m].append(est)
            res.errors[m].append(None)
            if keep_spectra and spec is not None:
                if m in res.spectrum_sums:
                    res.spectrum_sums[m] += spec.power
                else:
                    res.spectrum_sums[m] = spec.power.astype(float).copy()
                    res.spectrum_angles[m] = spec.angles_deg
    return res


@dataclass
class TrialRun:
    """Ensembles for several methods run on shared snapshots."""

    ensembles: dict[str, TrialEnsemble]
    mean_spectra: dict[str, AngularSpectrum]


def run_trials_multi(scenario: Scenario, methods, num_trials: int, *,
                     options: EstimatorOptions | None = None, workers: int = 1,
                     exact: bool = False, keep_spectra: bool = False) -> TrialRun:
    """Run ``num_trials`` seeded trials, feeding each snapshot block to every method.

    Args:
        scenario: scenario; its ``seed`` is the master seed.
        methods: method tags (or ``"all"``).
        num_trials: number of trials ``I``.
        options: estimator options.
        workers: process count; results do not depend on it.
        exact: use the exact covariance instead of sampled snapshots.
        keep_spectra: accumulate the mean spectrum of each scan method.
    """
    if num_trials < 1:
        raise ValueError("num_trials must be >= 1")
    methods = tuple(resolve_methods(methods))
    options = options or EstimatorOptions()
    bounds = [(s, min(s + CHUNK_SIZE, num_trials)) for s in range(0, num_trials, CHUNK_SIZE)]
    args = [(scenario, methods, a, b, options, exact, keep_spectra) for a, b in bounds]
    if workers > 1 and len(bounds) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_chunk, *zip(*args)))
    else:
        chunks = [_run_chunk(*a) for a in args]

    truth = np.array(scenario.sources.angles_deg)
    ensembles, spectra = {}, {}
    for m in methods:
        ests = [e for c in chunks for e in c.estimates[m]]
        errs = [e for c in chunks for e in c.errors[m]]
        ensembles[m] = TrialEnsemble(m, truth, ests, errs)
        sums = [c.spectrum_sums[m] for c in chunks if m in c.spectrum_sums]
        if sums:
            total = sums[0].copy()
            for s in sums[1:]:
                total += s
            n_ok = sum(e is not None for e in ests)
            angles = next(c.spectrum_angles[m] for c in chunks if m in c.spectrum_angles)
            spectra[m] = AngularSpectrum(angles, total / n_ok, m)
    return TrialRun(ensembles, spectra)


def run_trials(scenario: Scenario, method: str, num_trials: int, **kwargs) -> TrialEnsemble:
    """Single-method :func:`run_trials_multi`."""
    m = canonical_method(method)
    return run_trials_multi(scenario, [m], num_trials, **kwargs).ensembles[m]


def mean_spectrum(scenario: Scenario, method: str, num_trials: int, **kwargs) -> AngularSpectrum:
    """Element-wise mean of per-trial spectra of a scan method."""
    m = canonical_method(method)
    if m not in SCAN_METHODS:
        raise ValueError(f"{m} is not a scan method")
    run = run_trials_multi(scenario, [m], num_trials, keep_spectra=True, **kwargs)
    if m not in run.mean_spectra:
        raise RuntimeError(f"every {m} trial failed: {run.ensembles[m].errors[0]}")
    return run.mean_spectra[m]


# -- plans --------------------------------------------------------------------

SWEEP_AXES = ("m", "snr_db", "num_sources", "trials", "processors")

RESULT_COLUMNS = [
    "method", "M", "S", "L", "SNR_dB", "I", "mse_deg2", "disc_deg", "flops", "speedup_N24",
    "disc_kind", "underdetected_rate", "N", "speedup_N",
]


def sources_for_count(base: SourceSet, count: int) -> SourceSet:
    """Use the first ``count`` base angles, or spread ``count`` sources over [-60, 60]."""
    if count <= len(base.angles_deg):
        angles = base.angles_deg[:count]
    else:
        angles = tuple(np.linspace(-60.0, 60.0, count).round(9))
    return replace(base, angles_deg=tuple(angles))


@dataclass
class ExperimentPlan:
    """A sweep of one parameter over a base scenario.

    ``sweep_axis`` is ``None`` for a single point. The ``processors`` axis
    evaluates the speedup model only and reuses one Monte-Carlo run.
    """

    scenario: Scenario
    methods: list[str] = field(default_factory=lambda: list(METHODS))
    num_trials: int = 40
    sweep_axis: str | None = None
    sweep_values: list = field(default_factory=list)
    out_dir: Path | None = None
    options: EstimatorOptions = field(default_factory=EstimatorOptions)
    workers: int = 1
    dump_spectra: bool = True

    def validate(self) -> None:
        self.methods = resolve_methods(self.methods)
        if self.num_trials < 1:
            raise ValueError("num_trials must be >= 1")
        if self.sweep_axis is None:
            return
        if self.sweep_axis not in SWEEP_AXES:
            raise ValueError(f"sweep axis must be one of {SWEEP_AXES}, got {self.sweep_axis!r}")
        vals = list(self.sweep_values)
        if not vals:
            raise ValueError("sweep values must not be empty")
        if vals != sorted(vals) or len(set(vals)) != len(vals):
            raise ValueError("sweep values must be strictly increasing")
        if self.sweep_axis != "snr_db" and any(v <= 0 for v in vals):
            raise ValueError("sweep values must be positive")

    def points(self):
        """Yield ``(sweep_value, scenario, num_trials)`` per sweep point."""
        if self.sweep_axis is None or self.sweep_axis == "processors":
            yield None, self.scenario, self.num_trials
            return
        for v in self.sweep_values:
            sc, I = self.scenario, self.num_trials
            if self.sweep_axis == "m":
                sc = sc.with_(m=int(v))
            elif self.sweep_axis == "snr_db":
                sc = replace(sc, snr_db=float(v))
            elif self.sweep_axis == "num_sources":
                sc = replace(sc, sources=sources_for_count(sc.sources, int(v)))
            else:
                I = int(v)
            yield v, sc, I

    def manifest(self) -> dict:
        return {
            "package": "doakit",
            "version": __version__,
            "kernel_backend": kernels.BACKEND,
            "seed_scheme": SEED_SCHEME,
            "chunk_size": CHUNK_SIZE,
            "scenario": scenario_to_mapping(self.scenario),
            "methods": list(self.methods),
            "num_trials": self.num_trials,
            "sweep": {"axis": self.sweep_axis, "values": list(self.sweep_values)},
            "grid": {
                "start_deg": self.options.grid.start_deg,
                "stop_deg": self.options.grid.stop_deg,
                "step_deg": self.options.grid.step_deg,
                "num_points": self.options.grid.num_points,
            },
            "n_fft": self.options.n_fft,
            "mvdr_loading": self.options.loading,
        }


@dataclass
class ResultTable:
    columns: list[str]
    rows: list[dict] = field(default_factory=list)

    def add(self, row: dict) -> None:
        key = (row["method"], row.get("_key"))
        if any((r["method"], r.get("_key")) == key for r in self.rows):
            raise ValueError(f"duplicate result row for {key}")
        self.rows.append(row)

    def column(self, name: str, method: str | None = None) -> list:
        return [r[name] for r in self.rows if method is None or r["method"] == method]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(self.columns)
            for r in self.rows:
                writer.writerow([_fmt(r[c]) for c in self.columns])


def _fmt(v) -> str:
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    return str(v)


def _discrimination(method: str, ens: TrialEnsemble, spec: AngularSpectrum | None):
    if method in SCAN_METHODS:
        if spec is None:
            return float("nan"), "3db"
        try:
            return discrimination_3db(spec), "3db"
        except LobeTooWideError:
            return float("nan"), "3db"
    if ens.true_angles.size != 1 or len(ens.complete()) < 2:
        return float("nan"), "std"
    return discrimination_std(ens).sigma, "std"


def _safe_mse(ens: TrialEnsemble) -> float:
    try:
        return mse(ens)
    except ValueError:
        return float("nan")


def _spectrum_name(method: str, axis: str | None, value) -> str:
    if axis is None or axis == "processors":
        return f"{method}.csv"
    return f"{method}_{axis}_{value}.csv"


def run_plan(plan: ExperimentPlan) -> ResultTable:
    """Run a plan and, if ``plan.out_dir`` is set, write its files.

    Files: ``results.csv``, ``spectra/<method>[_<axis>_<value>].csv`` (mean
    spectra of scan methods) and ``manifest.yaml``.
    """
    plan.validate()
    out = Path(plan.out_dir) if plan.out_dir is not None else None
    if out is not None:
        try:
            (out / "spectra").mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise OSError(f"cannot create output directory {out}: {exc}") from exc

    table = ResultTable(list(RESULT_COLUMNS))
    keep = any(m in SCAN_METHODS for m in plan.methods)
    for value, sc, I in plan.points():
        run = run_trials_multi(sc, plan.methods, I, options=plan.options,
                               workers=plan.workers, keep_spectra=keep)
        params = ComplexityParams(
            M=sc.geometry.num_elements, S=sc.num_snapshots, L=sc.sources.num_sources,
            P=plan.options.grid.num_points, n_fft=plan.options.n_fft,
        )
        for m in plan.methods:
            ens = run.ensembles[m]
            spec = run.mean_spectra.get(m)
            disc, kind = _discrimination(m, ens, spec)
            model = calibrated_model(m)
            base = {
                "method": DISPLAY_NAMES[m],
                "M": params.M,
                "S": params.S,
                "L": params.L,
                "SNR_dB": float(sc.snr_db),
                "I": I,
                "mse_deg2": _safe_mse(ens),
                "disc_deg": float(disc),
                "flops": float(flops(m, params)),
                "speedup_N24": float(speedup(model, 24)),
                "disc_kind": kind,
                "underdetected_rate": float(ens.underdetected_rate),
            }
            Ns = plan.sweep_values if plan.sweep_axis == "processors" else [24]
            for N in Ns:
                row = dict(base, N=int(N), speedup_N=float(speedup(model, int(N))))
                row["_key"] = (value, int(N))
                table.add(row)
            if out is not None and plan.dump_spectra and spec is not None:
                path = out / "spectra" / _spectrum_name(m, plan.sweep_axis, value)
                try:
                    write_spectrum_csv(spec, path)
                except OSError as exc:
                    raise OSError(f"cannot write {path}: {exc}") from exc

    if out is not None:
        for name, writer in (
            ("results.csv", lambda p: table.write_csv(p)),
            ("manifest.yaml", lambda p: p.write_text(yaml.safe_dump(plan.manifest(), sort_keys=True))),
        ):
            path = out / name
            try:
                writer(path)
            except OSError as exc:
                raise OSError(f"cannot write {path}: {exc}") from exc
    return table
