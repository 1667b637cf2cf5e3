"""Decision-utility metrics, the cost-increment sweep, and reports.

The sweep evaluates the two-stage dispatch over a grid of forecast
error percentages against the typical profile; cost increments are
reported relative to the grid minimum.  Error percentages follow the
signed convention (forecast - truth) / truth * 100, with the absolute
value applied inside mape so that zero means a perfect forecast.
"""

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from adol import case1, case2


class EmptyInput(ValueError):
    pass


class ZeroTruth(ValueError):
    pass


def mtdo(total_costs):
    """Mean total decision objective over test instances."""
    costs = np.asarray(total_costs, dtype=float)
    if costs.size == 0:
        raise EmptyInput("mtdo needs at least one instance")
    return float(costs.mean())


def mape(forecasts, truths):
    """Mean absolute percentage error, in percent."""
    f = np.asarray(forecasts, dtype=float)
    y = np.asarray(truths, dtype=float)
    if f.size == 0:
        raise EmptyInput("mape needs at least one instance")
    if np.any(np.abs(y) < 1e-12):
        raise ZeroTruth("truth contains zeros; percentage error undefined")
    return float(np.mean(np.abs((f - y) / y)) * 100.0)


def error_percentages(forecasts, truths):
    f = np.asarray(forecasts, dtype=float)
    y = np.asarray(truths, dtype=float)
    return (f - y) / y * 100.0


def error_histogram(forecasts, truths, bins=41, value_range=(-25.0, 25.0)):
    """Histogram of signed error percentages: (counts, bin_edges)."""
    errors = error_percentages(forecasts, truths)
    counts, edges = np.histogram(errors, bins=bins, range=value_range)
    return counts, edges


def _sweep_point(args):
    e_pct, ybar, params, case = args
    forecast = (1.0 + e_pct / 100.0) * np.asarray(ybar, dtype=float)
    if case == 1:
        cb = case1.evaluate_two_stage(float(forecast), float(ybar), params)
    else:
        cb = case2.evaluate_two_stage_case2(forecast, np.asarray(ybar, float), params)
    return cb.total


def cost_increment_sweep(ybar, params, grid_pcts, case=1, workers=1):
    """Total cost over a grid of error percentages, shifted so the grid
    minimum sits at zero.  Returns an array of (error_pct, increment)
    rows; deterministic and order-independent of the worker count."""
    grid = [float(e) for e in grid_pcts]
    jobs = [(e, ybar, params, case) for e in grid]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            totals = list(pool.map(_sweep_point, jobs, chunksize=8))
    else:
        totals = [_sweep_point(j) for j in jobs]
    totals = np.asarray(totals)
    increments = totals - totals.min()
    return np.column_stack([np.asarray(grid), increments])


@dataclass
class EvalReport:
    """Evaluation bundle for one forecaster on one test window."""

    mtdo: float
    mape: float
    per_instance: list  # (timestamp, forecast, truth, stage1, stage2)
    histogram_counts: np.ndarray
    histogram_edges: np.ndarray
    sweep: np.ndarray = None
    meta: dict = field(default_factory=dict)


def evaluate_forecasts(timestamps, forecasts, truths, params, case=1,
                       bins=41, value_range=(-25.0, 25.0), meta=None):
    """Price every (forecast, truth) pair through the two-stage dispatch
    and assemble the evaluation report."""
    per_instance = []
    totals = []
    for ts, f, y in zip(timestamps, forecasts, truths):
        if case == 1:
            cb = case1.evaluate_two_stage(float(f), float(y), params)
        else:
            cb = case2.evaluate_two_stage_case2(f, y, params)
        per_instance.append((ts, f, y, cb.stage1, cb.stage2))
        totals.append(cb.total)
    counts, edges = error_histogram(forecasts, truths, bins, value_range)
    return EvalReport(
        mtdo=mtdo(totals),
        mape=mape(forecasts, truths),
        per_instance=per_instance,
        histogram_counts=counts,
        histogram_edges=edges,
        meta=meta or {},
    )


def _fmt(value):
    return f"{float(value):.10g}"


def write_report(report, outdir, stamp=""):
    """CSV bundle plus a JSON summary (and gnuplot-ready .dat files).

    Writes report.csv, histogram.csv, sweep.csv (when present), the
    matching .dat files, and summary.json.  Output bytes depend only on
    the report contents, so identical runs produce identical files.
    """
    os.makedirs(outdir, exist_ok=True)
    with open(os.path.join(outdir, "report.csv"), "w") as fh:
        if stamp:
            fh.write(f"# {stamp}\n")
        fh.write("timestamp,forecast,truth,stage1_cost,stage2_cost\n")
        for ts, f, y, c1, c2 in report.per_instance:
            fh.write(f"{ts},{_fmt(f)},{_fmt(y)},{_fmt(c1)},{_fmt(c2)}\n")

    with open(os.path.join(outdir, "histogram.csv"), "w") as fh:
        if stamp:
            fh.write(f"# {stamp}\n")
        fh.write("bin_low_pct,bin_high_pct,count\n")
        for lo, hi, c in zip(
            report.histogram_edges[:-1],
            report.histogram_edges[1:],
            report.histogram_counts,
        ):
            fh.write(f"{_fmt(lo)},{_fmt(hi)},{int(c)}\n")
    with open(os.path.join(outdir, "histogram.dat"), "w") as fh:
        for lo, hi, c in zip(
            report.histogram_edges[:-1],
            report.histogram_edges[1:],
            report.histogram_counts,
        ):
            fh.write(f"{_fmt(0.5 * (lo + hi))} {int(c)}\n")

    if report.sweep is not None:
        write_sweep(report.sweep, outdir, stamp)

    summary = {
        "mtdo": report.mtdo,
        "mape_pct": report.mape,
        "instances": len(report.per_instance),
        **report.meta,
    }
    with open(os.path.join(outdir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary


def write_sweep(sweep, outdir, stamp=""):
    os.makedirs(outdir, exist_ok=True)
    with open(os.path.join(outdir, "sweep.csv"), "w") as fh:
        if stamp:
            fh.write(f"# {stamp}\n")
        fh.write("error_pct,cost_increment\n")
        for e, dc in sweep:
            fh.write(f"{_fmt(e)},{_fmt(dc)}\n")
    with open(os.path.join(outdir, "sweep.dat"), "w") as fh:
        for e, dc in sweep:
            fh.write(f"{_fmt(e)} {_fmt(dc)}\n")
