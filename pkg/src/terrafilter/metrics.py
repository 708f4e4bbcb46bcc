"""Evaluation metrics and the per-step timing harness.

Four indices summarize each (algorithm, scenario, seed) cell: mean squared
error and maximum error against the reference trajectory, the variance
ratio (post-filter error variance over measurement-noise variance), and
mean single-step wall time.
"""

import csv
import io
import time
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidInputError, UndefinedRatioError

REPORT_FIELDS = ["algorithm", "sr_ms", "mse", "vr", "me", "scenario_id", "seed"]


@dataclass
class MetricsReport:
    algorithm: str
    sr_ms: float
    mse: float
    vr: float
    me: float
    scenario_id: str
    seed: int


def _check_pair(pred, ref):
    pred = np.asarray(pred, dtype=float)
    ref = np.asarray(ref, dtype=float)
    if pred.ndim != 1 or pred.shape != ref.shape:
        raise InvalidInputError("prediction and reference lengths must match")
    if len(pred) == 0:
        raise InvalidInputError("metrics need at least one sample")
    return pred, ref


def mse(pred, ref) -> float:
    """Mean squared deviation from the reference trajectory."""
    pred, ref = _check_pair(pred, ref)
    err = pred - ref
    return float(np.mean(err * err))


def variance_ratio(pred, ref, sigma2: float) -> float:
    """Population variance of the prediction error about its own mean,
    divided by the measurement-noise variance. Near zero means strong
    noise suppression; above one means amplification."""
    if sigma2 <= 0:
        raise InvalidInputError("sigma2 must be positive")
    pred, ref = _check_pair(pred, ref)
    return float(np.var(pred - ref)) / float(sigma2)


def max_error(pred, ref) -> float:
    """Worst absolute deviation from the reference trajectory."""
    pred, ref = _check_pair(pred, ref)
    return float(np.max(np.abs(pred - ref)))


def improvement(baseline: MetricsReport, candidate: MetricsReport,
                metric: str) -> float:
    """Percent improvement of candidate over baseline on one metric:
    100 * (baseline - candidate) / baseline."""
    if metric not in ("sr_ms", "mse", "vr", "me"):
        raise InvalidInputError(f"unknown metric {metric!r}")
    if (baseline.scenario_id, baseline.seed) != (candidate.scenario_id, candidate.seed):
        raise InvalidInputError("reports must share scenario and seed")
    base = getattr(baseline, metric)
    cand = getattr(candidate, metric)
    if base == 0:
        raise UndefinedRatioError(f"baseline {metric} is zero")
    return 100.0 * (base - cand) / base


def time_step(filter_factory, trace, timed_steps: int | None = None,
              runs: int = 3) -> float:
    """Mean single-step wall time in milliseconds.

    Builds a fresh filter per run via ``filter_factory()``, fits it on the
    trace's leading init window, and times the bare step loop with the
    monotonic clock. One warm-up run is discarded; the median of the timed
    runs is returned. ``timed_steps`` caps the number of steps per run.
    """
    times = trace.times
    measurements = trace.measurement
    probe = filter_factory()
    n0 = probe.init_window
    if len(times) <= n0:
        raise InvalidInputError("trace too short to time")
    stop = len(times) if timed_steps is None else min(len(times), n0 + timed_steps)
    span = stop - n0

    samples = []
    for rep in range(runs + 1):
        filt = filter_factory()
        filt.fit(times[:n0], measurements[:n0])
        t0 = time.perf_counter()
        for j in range(n0, stop):
            filt.step(times[j], measurements[j])
        elapsed = time.perf_counter() - t0
        if rep > 0:  # first pass is warm-up
            samples.append(elapsed / span * 1e3)
    return float(np.median(samples))


def reports_to_csv(reports) -> str:
    """One comma-separated row per report, header mandatory."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_FIELDS)
    for r in reports:
        writer.writerow([
            r.algorithm,
            f"{r.sr_ms:.6f}",
            f"{r.mse:.17g}",
            f"{r.vr:.17g}",
            f"{r.me:.17g}",
            r.scenario_id,
            r.seed,
        ])
    return buf.getvalue()


def reports_from_csv(text: str):
    """Parse a reports file back into MetricsReport records."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != REPORT_FIELDS:
        raise InvalidInputError(f"unexpected reports header: {header}")
    out = []
    for row in reader:
        if not row:
            continue
        out.append(MetricsReport(
            algorithm=row[0],
            sr_ms=float(row[1]),
            mse=float(row[2]),
            vr=float(row[3]),
            me=float(row[4]),
            scenario_id=row[5],
            seed=int(row[6]),
        ))
    return out
