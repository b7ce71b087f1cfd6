"""Write experiment reports as CSV, JSON and SVG line charts, and read the CSV back."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict
from pathlib import Path
from typing import Iterable

import matplotlib
from matplotlib.figure import Figure

from .experiments import FIELDS, ExperimentReport, Record

FORMATS = ("csv", "json", "svg")
UNDEFINED = "--"

_INT_FIELDS = {"L", "M", "N", "n", "seed", "replicate"}
_FLOAT_FIELDS = {"tau_b", "mae", "top1", "seconds"}


# -- CSV ------------------------------------------------------------------


def _cell(record: Record, name: str) -> str:
    value = getattr(record, name)
    if value is None:
        # an undefined tau-b is a result; a missing one (runtime rows) is not
        if name == "tau_b" and record.experiment != "runtime" and record.status == "ok":
            return UNDEFINED
        return ""
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def to_csv(records: Iterable[Record]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(FIELDS)
    for r in records:
        writer.writerow([_cell(r, name) for name in FIELDS])
    return buf.getvalue()


def _parse(name: str, text: str):
    if text in ("", UNDEFINED):
        return None
    if name in _INT_FIELDS:
        return int(text)
    if name in _FLOAT_FIELDS:
        return float(text)
    return text


def read_csv(path) -> list[Record]:
    """Parse a report CSV back into records."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != FIELDS:
            raise ValueError(f"unexpected report header {reader.fieldnames}")
        return [Record(**{k: _parse(k, row[k]) for k in FIELDS}) for row in reader]


# -- JSON -----------------------------------------------------------------


def to_json(report: ExperimentReport) -> str:
    generator = report.config.get("generator", {})
    cells = []
    for r in report.records:
        cell = asdict(r)
        # provenance: everything needed to regenerate the cell's data
        if report.experiment == "runtime":
            gen = {**generator, "L": r.L, "M": r.M, "N_max": r.N}
        else:
            gen = generator
        cell["provenance"] = {"seed": r.seed, "generator": gen, "first_trials": r.budget}
        cells.append(cell)
    doc = {
        "experiment": report.experiment,
        "config": report.config,
        "metadata": report.metadata,
        "summary": report.summary(),
        "cells": cells,
    }
    return json.dumps(doc, indent=2) + "\n"


# -- SVG ------------------------------------------------------------------


def _series(rows: list[dict], x: str, y: str) -> dict[str, tuple[list, list]]:
    out: dict[str, tuple[list, list]] = {}
    for row in rows:
        if row[y] is None:
            continue  # undefined cells are left out of the line
        xs, ys = out.setdefault(row["method"], ([], []))
        xs.append(row[x])
        ys.append(row[y])
    return out


def _plot(ax, series, xlabel: str, ylabel: str, logy: bool = False) -> None:
    for method, (xs, ys) in series.items():
        ax.plot(xs, ys, marker="o", markersize=3, linewidth=1.2, label=method)
    ax.set_xscale("log", base=2)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, linewidth=0.3, alpha=0.6)


def render_figure(report: ExperimentReport) -> Figure:
    if report.experiment == "runtime":
        rows = [r for r in report.summary() if r["median_seconds"] is not None]
        Ns = sorted({r["N"] for r in rows})
        Ls = sorted({r["L"] for r in rows})
        fig = Figure(figsize=(4.0 * len(Ls), 3.4 * len(Ns)), layout="constrained")
        axes = fig.subplots(len(Ns), len(Ls), squeeze=False)
        for i, N in enumerate(Ns):
            for j, L in enumerate(Ls):
                sub = [r for r in rows if r["N"] == N and r["L"] == L]
                ax = axes[i, j]
                _plot(ax, _series(sub, "M", "median_seconds"), "tasks M", "seconds", True)
                ax.set_title(f"L={L}, N={N}", fontsize=9)
    else:
        xlabel = "trials N" if report.experiment == "recovery" else "budget n"
        rows = report.summary()
        metrics = ["tau_b", "top1"] + (["mae"] if report.experiment == "recovery" else [])
        labels = {"tau_b": "Kendall tau-b", "top1": "top-1 agreement", "mae": "mean abs rank error"}
        fig = Figure(figsize=(4.2 * len(metrics), 3.4), layout="constrained")
        axes = fig.subplots(1, len(metrics), squeeze=False)[0]
        for ax, metric in zip(axes, metrics):
            _plot(ax, _series(rows, "budget", metric), xlabel, labels[metric])
    handles, labels_ = fig.axes[0].get_legend_handles_labels()
    if handles:
        fig.legend(handles, labels_, loc="outside right upper", fontsize=8)
    fig.suptitle(f"{report.experiment} experiment")
    return fig


def to_svg(report: ExperimentReport) -> str:
    buf = io.StringIO()
    # fixed hash salt and no date keep the SVG byte-stable across runs
    with matplotlib.rc_context({"svg.hashsalt": "tensorrank", "svg.fonttype": "none"}):
        render_figure(report).savefig(buf, format="svg", metadata={"Date": None})
    return buf.getvalue()


# -- files ----------------------------------------------------------------


def emit(report: ExperimentReport, out_dir, formats=FORMATS, stem: str | None = None) -> list[Path]:
    """Write the report in each requested format; returns the written paths."""
    if not report.records:
        raise ValueError("report has no records")
    bad = set(formats) - set(FORMATS)
    if bad:
        raise ValueError(f"unknown report format(s): {', '.join(sorted(bad))}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = stem or report.experiment
    render = {"csv": lambda: to_csv(report.records), "json": lambda: to_json(report), "svg": lambda: to_svg(report)}
    paths = []
    for fmt in formats:
        path = out_dir / f"{stem}.{fmt}"
        path.write_text(render[fmt]())
        paths.append(path)
    return paths
