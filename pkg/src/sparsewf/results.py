"""
Writing run artifacts: JSON documents that embed the resolved configuration
and tool version, CSV tables with a header row, and SVG charts.

Nothing here reads the clock, so identical inputs give identical bytes.
"""

import csv
import json
from pathlib import Path
from typing import Any, Iterable

from . import __version__
from .experiments import RateStudy, SweepResult
from .svg import LineChart
from .twf import TwfTrace

AXIS_LABELS = {
    "beta": "Thresholding parameter beta",
    "nsr": "Noise-to-signal ratio sigma/||x||^2",
    "m": "Sample size m",
    "k": "Sparsity k",
    "alpha": "Initialization parameter alpha",
    "mu": "Step size mu",
    "iterations": "Iterations T",
    "p": "Dimension p",
}

TRIAL_COLUMNS = ("axis_value", "trial", "error", "seed", "wallclock_ms")
SUMMARY_COLUMNS = ("axis_value", "mean_error", "trials", "failures", "valid")
TRACE_COLUMNS = ("iter", "risk", "tau", "step_norm", "support_size", "relative_error")


def _cell(value: Any) -> Any:
    return "" if value is None else value


def write_json(path: Path, payload: dict[str, Any], config: dict[str, Any]) -> Path:
    """
    Write `payload` wrapped with the tool name, version and configuration.
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    document = {"tool": "sparsewf", "version": __version__, "config": config, **payload}
    with open(path, "w") as f:
        json.dump(document, f, indent=2)
        f.write("\n")
    return path


def write_csv(path: Path, header: Iterable[str], rows: Iterable[Iterable[Any]]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(value) for value in row])
    return path


def sweep_chart(results: list[SweepResult], title: str) -> LineChart:
    """
    One chart per study; additional results become additional series.
    """
    axis = results[0].spec.axis
    chart = LineChart(title=title, x_label=AXIS_LABELS.get(axis, axis), y_label="Average relative error")
    for result in results:
        alpha = result.spec.fixed.get("alpha")
        label = f"alpha = {alpha:g}" if alpha is not None else result.spec.name
        chart.add_series(label, [(x, y) for x, y in result.curve() if y is not None])
    return chart


def write_sweep(
    result: SweepResult,
    out_dir: Path,
    config: dict[str, Any],
    extra_series: list[SweepResult] | None = None,
) -> list[Path]:
    """
    <name>_sweep.json, <name>_trials.csv, <name>_summary.csv and <name>.svg.
    """
    name = result.spec.name
    paths = [write_json(out_dir / f"{name}_sweep.json", {"sweep": result.as_json()}, config)]
    paths.append(
        write_csv(
            out_dir / f"{name}_trials.csv",
            TRIAL_COLUMNS,
            (
                (point.axis_value, outcome.trial, outcome.error, outcome.seed.label(), outcome.wallclock_ms)
                for point in result.points
                for outcome in point.outcomes
            ),
        )
    )
    paths.append(
        write_csv(
            out_dir / f"{name}_summary.csv",
            SUMMARY_COLUMNS,
            (
                (point.axis_value, point.mean_error, len(point.outcomes), point.failures, point.valid)
                for point in result.points
            ),
        )
    )
    chart = sweep_chart([result, *(extra_series or [])], title=f"Average relative error vs {result.spec.axis}")
    svg_path = out_dir / f"{name}.svg"
    svg_path.write_text(chart.as_svg())
    paths.append(svg_path)
    return paths


def write_trace_csv(trace: TwfTrace, path: Path) -> Path:
    return write_csv(
        path,
        TRACE_COLUMNS,
        (
            (r.iteration, r.risk, r.tau, r.step_norm, r.support_size, r.relative_error)
            for r in trace.records
        ),
    )


def write_rate_study(study: RateStudy, out_dir: Path, config: dict[str, Any]) -> list[Path]:
    return [
        write_json(out_dir / "rate_study.json", {"rate_study": study.as_json()}, config),
        write_csv(
            out_dir / "rate_study.csv",
            ("m", "mean_error", "scaled_error", "theoretical_rate"),
            ((row.m, row.mean_error, row.scaled_error, row.theoretical) for row in study.rows),
        ),
    ]
