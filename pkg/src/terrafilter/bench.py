"""Experiment orchestration: seeded scenario x algorithm x seed matrices,
metric reports, timing, and plot-ready data files.
"""

import csv
import hashlib
import io
import json
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import BootstrapParticleFilter, GvffRls, NormalizedLms, StaticRls
from .exceptions import ConfigError, InvalidInputError
from .metrics import (MetricsReport, max_error, mse, reports_to_csv, time_step,
                      variance_ratio)
from .rvm_rls import RvmRls
from .scenario import ScenarioConfig, TerrainParams, synthesize, write_trace_csv

FILTER_KINDS = {
    "rvm_rls": RvmRls,
    "rls": StaticRls,
    "lms": NormalizedLms,
    "gvff_rls": GvffRls,
    "pf": BootstrapParticleFilter,
}

CONFIG_VERSION = 1
TIMED_STEPS = 400
_NAME_RE = re.compile(r"^[A-Za-z0-9_.-]+$")


@dataclass(frozen=True)
class AlgorithmSpec:
    """A named filter construction recipe. ``params`` are constructor
    arguments; the value "scenario" for target_noise_variance resolves to
    each scenario's true noise variance at run time."""

    name: str
    kind: str
    params: dict = field(default_factory=dict)


@dataclass
class ExperimentConfig:
    scenarios: list
    algorithms: list
    seeds: list
    output_dir: str = "bench_out"
    emit_traces: bool = True
    workers: int = 1

    def validate(self):
        if not self.scenarios or not self.algorithms or not self.seeds:
            raise ConfigError("scenarios, algorithms, and seeds must be non-empty")
        names = [a.name for a in self.algorithms]
        if len(set(names)) != len(names):
            raise ConfigError("algorithm names must be unique")
        scen_names = [s.name for s in self.scenarios]
        if len(set(scen_names)) != len(scen_names):
            raise ConfigError("scenario names must be unique")
        for name in names + scen_names:
            if not _NAME_RE.match(name):
                raise ConfigError(f"name {name!r} is not filesystem-safe")
        for a in self.algorithms:
            if a.kind not in FILTER_KINDS:
                raise ConfigError(f"unknown algorithm kind {a.kind!r}")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        return self


@dataclass
class CellStatus:
    scenario_id: str
    algorithm: str
    seed: int
    status: str
    error: str = ""
    duration_ms: float = 0.0


@dataclass
class RunManifest:
    config_hash: str
    tool_version: str
    started: str
    finished: str
    cells: list

    @property
    def failed(self):
        return [c for c in self.cells if c.status != "ok"]


def build_filter(spec: AlgorithmSpec, scenario: ScenarioConfig, seed: int):
    """Instantiate the filter for one cell, resolving per-scenario params."""
    params = dict(spec.params)
    if params.get("target_noise_variance") == "scenario":
        params["target_noise_variance"] = scenario.noise_variance
    cls = FILTER_KINDS[spec.kind]
    if spec.kind == "pf":
        params["seed"] = seed
    try:
        return cls(**params)
    except TypeError as exc:
        raise ConfigError(f"bad params for algorithm {spec.name!r}: {exc}") from exc


def default_experiment_config(output_dir: str = "bench_out",
                              seeds=tuple(range(10))) -> ExperimentConfig:
    """The benchmark matrix: the default terrain with and without outliers,
    all five algorithms, ten seeds."""
    base = ScenarioConfig(name="terrain_outliers", outlier_fraction=0.10)
    clean = replace(base, name="terrain_clean", outlier_fraction=0.0)
    algorithms = [
        AlgorithmSpec("rvm_rls", "rvm_rls", {"target_noise_variance": "scenario"}),
        AlgorithmSpec("rls", "rls", {}),
        AlgorithmSpec("lms", "lms", {}),
        AlgorithmSpec("gvff_rls", "gvff_rls", {}),
        AlgorithmSpec("pf", "pf", {}),
    ]
    return ExperimentConfig(
        scenarios=[base, clean],
        algorithms=algorithms,
        seeds=list(seeds),
        output_dir=output_dir,
    ).validate()


# -- configuration files -------------------------------------------------


def _take(mapping: dict, allowed: dict, context: str) -> dict:
    unknown = set(mapping) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown keys in {context}: {sorted(unknown)}")
    out = {}
    for key, caster in allowed.items():
        if key in mapping:
            out[key] = caster(mapping[key]) if caster else mapping[key]
    return out


def parse_scenario(d: dict) -> ScenarioConfig:
    if not isinstance(d, dict):
        raise ConfigError("each scenario must be an object")
    terrain_d = d.get("terrain", {})
    terrain = TerrainParams(**_take(terrain_d, {
        "amplitude": float, "center": float, "envelope_sigma": float,
        "omega": float, "phase": float,
    }, "scenario.terrain"))
    kwargs = _take(d, {
        "name": str, "sample_count": int, "clearance": float,
        "noise_variance": float, "outlier_fraction": float,
        "outlier_band": lambda v: tuple(float(x) for x in v),
        "clean_prefix": int, "seed": int, "terrain": None,
    }, "scenario")
    kwargs.pop("terrain", None)
    return ScenarioConfig(terrain=terrain, **kwargs)


def _parse_algorithm(d: dict) -> AlgorithmSpec:
    if not isinstance(d, dict):
        raise ConfigError("each algorithm must be an object")
    kwargs = _take(d, {"name": str, "kind": str, "params": None}, "algorithm")
    if "name" not in kwargs or "kind" not in kwargs:
        raise ConfigError("algorithm entries need 'name' and 'kind'")
    params = kwargs.get("params", {}) or {}
    if not isinstance(params, dict):
        raise ConfigError("algorithm params must be an object")
    return AlgorithmSpec(kwargs["name"], kwargs["kind"], params)


def load_config(path) -> ExperimentConfig:
    """Parse and validate a versioned JSON experiment config. Unknown keys
    anywhere are errors."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be an object")
    if raw.get("version") != CONFIG_VERSION:
        raise ConfigError(
            f"config version must be {CONFIG_VERSION}, got {raw.get('version')!r}"
        )
    top = _take(raw, {
        "version": int, "output_dir": str, "emit_traces": bool,
        "workers": int, "seeds": list, "scenarios": None, "algorithms": None,
    }, "config")
    scenarios = [parse_scenario(s) for s in top.get("scenarios", [])]
    algorithms = [_parse_algorithm(a) for a in top.get("algorithms", [])]
    cfg = ExperimentConfig(
        scenarios=scenarios,
        algorithms=algorithms,
        seeds=[int(s) for s in top.get("seeds", [])],
        output_dir=top.get("output_dir", "bench_out"),
        emit_traces=top.get("emit_traces", True),
        workers=top.get("workers", 1),
    )
    return cfg.validate()


def config_hash(config: ExperimentConfig) -> str:
    """Content hash of the semantic configuration; key order never matters
    because the canonical form sorts keys."""
    payload = {
        "version": CONFIG_VERSION,
        "seeds": list(config.seeds),
        "scenarios": [asdict(s) for s in config.scenarios],
        "algorithms": [asdict(a) for a in config.algorithms],
    }
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


# -- execution ------------------------------------------------------------


def run_cell(spec: AlgorithmSpec, scenario: ScenarioConfig, seed: int, trace):
    """Run one filter over one trace; returns (report_without_sr, predictions)."""
    filt = build_filter(spec, scenario, seed)
    predictions = filt.run(trace.times, trace.measurement)
    n0 = filt.init_window
    ref = trace.reference[n0:]
    return MetricsReport(
        algorithm=spec.name,
        sr_ms=0.0,
        mse=mse(predictions, ref),
        vr=variance_ratio(predictions, ref, scenario.noise_variance),
        me=max_error(predictions, ref),
        scenario_id=scenario.name,
        seed=seed,
    ), predictions


def run_experiments(config: ExperimentConfig, out_dir=None) -> RunManifest:
    """Execute the full matrix and write reports, aggregates, traces,
    figure data, and the manifest into the output directory.

    Metric cells may run on a thread pool; single-step timing always runs
    serially afterwards, one measurement per (algorithm, scenario), shared
    by that scenario's seed rows. A failing cell is recorded in the
    manifest without disturbing the others.
    """
    config.validate()
    out = Path(out_dir if out_dir is not None else config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    started = time.strftime("%Y-%m-%dT%H:%M:%S")

    traces = {}
    for scenario in config.scenarios:
        for seed in config.seeds:
            traces[(scenario.name, seed)] = synthesize(scenario.with_seed(seed))

    cells = {}
    statuses = []

    def _one(scenario, spec, seed):
        t0 = time.perf_counter()
        trace = traces[(scenario.name, seed)]
        try:
            report, preds = run_cell(spec, scenario, seed, trace)
            return CellStatus(scenario.name, spec.name, seed, "ok",
                              duration_ms=(time.perf_counter() - t0) * 1e3), report, preds
        except Exception as exc:  # crash isolation: one bad cell never aborts the run
            return CellStatus(scenario.name, spec.name, seed, "error",
                              error=f"{type(exc).__name__}: {exc}",
                              duration_ms=(time.perf_counter() - t0) * 1e3), None, None

    jobs = [
        (scenario, spec, seed)
        for scenario in config.scenarios
        for spec in config.algorithms
        for seed in config.seeds
    ]
    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(lambda args: _one(*args), jobs))
    else:
        results = [_one(*args) for args in jobs]

    for (scenario, spec, seed), (status, report, preds) in zip(jobs, results):
        statuses.append(status)
        if report is not None:
            cells[(scenario.name, spec.name, seed)] = (report, preds)

    # Timing: serial, one measurement per (algorithm, scenario), reused for
    # every seed row of that scenario.
    sr = {}
    for scenario in config.scenarios:
        trace = traces[(scenario.name, config.seeds[0])]
        for spec in config.algorithms:
            try:
                sr[(scenario.name, spec.name)] = time_step(
                    lambda spec=spec, scenario=scenario: build_filter(
                        spec, scenario, config.seeds[0]),
                    trace, timed_steps=TIMED_STEPS,
                )
            except Exception:
                sr[(scenario.name, spec.name)] = float("nan")
    for key, (report, _) in cells.items():
        scenario_name, algorithm, _seed = key
        report.sr_ms = sr.get((scenario_name, algorithm), float("nan"))

    ordered_keys = sorted(cells)
    reports = [cells[k][0] for k in ordered_keys]
    (out / "reports.csv").write_text(reports_to_csv(reports), encoding="utf-8")
    (out / "aggregate.csv").write_text(
        aggregate_csv(reports), encoding="utf-8")

    if config.emit_traces:
        _emit_trace_files(out, config, traces, cells)

    finished = time.strftime("%Y-%m-%dT%H:%M:%S")
    manifest = RunManifest(
        config_hash=config_hash(config),
        tool_version=__version__,
        started=started,
        finished=finished,
        cells=statuses,
    )
    (out / "manifest.json").write_text(json.dumps({
        "config_hash": manifest.config_hash,
        "tool_version": manifest.tool_version,
        "started": manifest.started,
        "finished": manifest.finished,
        "cells": [asdict(c) for c in manifest.cells],
    }, indent=2), encoding="utf-8")
    return manifest


def _emit_trace_files(out, config, traces, cells):
    """Per-cell trace csv plus plot-ready figure files: filter diagnostics
    (adaptive lambda and variance series), overlaid predictions, errors."""
    traces_dir = Path(out) / "traces"
    figs_dir = Path(out) / "figs"
    traces_dir.mkdir(exist_ok=True)
    figs_dir.mkdir(exist_ok=True)

    rvm_specs = [a for a in config.algorithms if a.kind == "rvm_rls"]
    for scenario in config.scenarios:
        for seed in config.seeds:
            trace = traces[(scenario.name, seed)]
            write_trace_csv(trace, traces_dir / f"trace_{scenario.name}_{seed}.csv")

            if rvm_specs:
                spec = rvm_specs[0]
                try:
                    filt = build_filter(spec, scenario, seed)
                    outputs = filt.run_detailed(trace.times, trace.measurement)
                    n0 = filt.init_window
                    with open(figs_dir / f"fig4_{scenario.name}_{seed}.csv", "w",
                              encoding="utf-8", newline="") as fh:
                        w = csv.writer(fh, lineterminator="\n")
                        w.writerow(["t", "z", "p", "prediction", "residual",
                                    "rejected", "lambda", "sigma2_hat"])
                        for j, rec in enumerate(outputs):
                            i = n0 + j
                            w.writerow([
                                f"{trace.times[i]:.17g}",
                                f"{trace.measurement[i]:.17g}",
                                f"{trace.reference[i]:.17g}",
                                f"{rec.prediction:.17g}",
                                f"{rec.residual:.17g}",
                                int(rec.rejected),
                                f"{rec.lambda_after:.17g}",
                                f"{rec.sigma2_hat_after:.17g}",
                            ])
                except Exception:
                    pass  # diagnostics are best-effort; reports already carry the cell status

            algs = [a.name for a in config.algorithms
                    if (scenario.name, a.name, seed) in cells]
            if not algs:
                continue
            preds = {a: cells[(scenario.name, a, seed)][1] for a in algs}
            n0_common = max(
                len(trace.times) - len(p) for p in preds.values()
            )
            with open(figs_dir / f"fig5_{scenario.name}_{seed}.csv", "w",
                      encoding="utf-8", newline="") as fh5, \
                 open(figs_dir / f"fig6_{scenario.name}_{seed}.csv", "w",
                      encoding="utf-8", newline="") as fh6:
                w5 = csv.writer(fh5, lineterminator="\n")
                w6 = csv.writer(fh6, lineterminator="\n")
                w5.writerow(["t", "z", "p"] + [f"pred_{a}" for a in algs])
                w6.writerow(["t"] + [f"err_{a}" for a in algs])
                for i in range(n0_common, len(trace.times)):
                    row5 = [f"{trace.times[i]:.17g}",
                            f"{trace.measurement[i]:.17g}",
                            f"{trace.reference[i]:.17g}"]
                    row6 = [f"{trace.times[i]:.17g}"]
                    for a in algs:
                        p = preds[a]
                        val = p[i - (len(trace.times) - len(p))]
                        row5.append(f"{val:.17g}")
                        row6.append(f"{val - trace.reference[i]:.17g}")
                    w5.writerow(row5)
                    w6.writerow(row6)


def aggregate_csv(reports) -> str:
    """Per-(algorithm, scenario) medians across seeds."""
    groups = {}
    for r in reports:
        groups.setdefault((r.scenario_id, r.algorithm), []).append(r)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["scenario_id", "algorithm", "seeds",
                     "median_sr_ms", "median_mse", "median_vr", "median_me"])
    for (scenario_id, algorithm) in sorted(groups):
        rs = groups[(scenario_id, algorithm)]
        writer.writerow([
            scenario_id,
            algorithm,
            len(rs),
            f"{float(np.median([r.sr_ms for r in rs])):.6f}",
            f"{float(np.median([r.mse for r in rs])):.17g}",
            f"{float(np.median([r.vr for r in rs])):.17g}",
            f"{float(np.median([r.me for r in rs])):.17g}",
        ])
    return buf.getvalue()


def median_reports(reports):
    """Collapse per-seed reports into one median report per
    (scenario, algorithm)."""
    groups = {}
    for r in reports:
        groups.setdefault((r.scenario_id, r.algorithm), []).append(r)
    out = []
    for (scenario_id, algorithm) in sorted(groups):
        rs = groups[(scenario_id, algorithm)]
        out.append(MetricsReport(
            algorithm=algorithm,
            sr_ms=float(np.median([r.sr_ms for r in rs])),
            mse=float(np.median([r.mse for r in rs])),
            vr=float(np.median([r.vr for r in rs])),
            me=float(np.median([r.me for r in rs])),
            scenario_id=scenario_id,
            seed=-1,
        ))
    return out


def render_table(reports) -> str:
    """Fixed-column text table for one scenario: algorithms as rows,
    SR/MSE/VR/ME as columns, every per-column minimum flagged with '*'."""
    reports = list(reports)
    if not reports:
        raise InvalidInputError("render_table needs at least one report")
    scenario_ids = {r.scenario_id for r in reports}
    if len(scenario_ids) != 1:
        raise InvalidInputError(f"reports mix scenarios: {sorted(scenario_ids)}")
    algs = [r.algorithm for r in reports]
    if len(set(algs)) != len(algs):
        raise InvalidInputError(
            "one report per algorithm required (aggregate seeds first)"
        )

    cols = [("SR (ms)", "sr_ms", "{:.3f}"), ("MSE", "mse", "{:.3f}"),
            ("VR", "vr", "{:.3f}"), ("ME", "me", "{:.3f}")]
    best = {attr: min(getattr(r, attr) for r in reports) for _, attr, _ in cols}

    header = ["Algorithm"] + [c[0] for c in cols]
    rows = []
    for r in reports:
        row = [r.algorithm]
        for _, attr, fmt in cols:
            val = getattr(r, attr)
            mark = "*" if val == best[attr] else " "
            row.append(fmt.format(val) + mark)
        rows.append(row)

    widths = [max(len(str(x)) for x in col) for col in zip(header, *rows)]
    lines = [
        f"scenario: {reports[0].scenario_id}",
        "  ".join(h.ljust(w) for h, w in zip(header, widths)),
        "  ".join("-" * w for w in widths),
    ]
    for row in rows:
        lines.append("  ".join(str(x).ljust(w) for x, w in zip(row, widths)))
    return "\n".join(lines) + "\n"
