"""Render simulator sweep CSVs into the standard figure families.

Input is the experiment CSV with header
``scheduler,sigma,load,dn,run_id,mean_sojourn,mean_slowdown,job_count``.
Three figure kinds exist: ``box_vs_sigma`` draws one box of per-run mean
sojourns per (scheduler, sigma) for schedulers whose results vary across
runs, with the size-blind schedulers (FIFO, PS, LAS) as horizontal
reference lines; ``line_vs_load`` and ``line_vs_dn`` plot the per-scheduler
average of mean sojourn against the swept value.  Sojourn axes are
logarithmic by default since values span orders of magnitude.

Rendering is read-only over the CSV and deterministic: fixed style, no
timestamps embedded in the output files.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.patches import Patch

REQUIRED_COLUMNS = (
    "scheduler",
    "sigma",
    "load",
    "dn",
    "run_id",
    "mean_sojourn",
    "mean_slowdown",
    "job_count",
)

KINDS = ("box_vs_sigma", "line_vs_load", "line_vs_dn")

# schedulers treated as run-invariant reference lines in box figures
SIZE_BLIND = ("FIFO", "PS", "LAS")

_ORDER = ("FIFO", "PS", "LAS", "SRPT", "FSP+FIFO", "FSP+PS")

_COLORS = {
    "FIFO": "tab:gray",
    "PS": "tab:blue",
    "LAS": "tab:green",
    "SRPT": "tab:orange",
    "FSP+FIFO": "tab:red",
    "FSP+PS": "tab:purple",
}


class SchemaError(Exception):
    """The CSV does not carry the expected sweep columns."""


class EmptyGroup(Exception):
    """No rows left after filtering."""


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    input_csv: str
    output: str
    schedulers: tuple[str, ...] | None = None
    y_log: bool = True


def read_sweep(path: str) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        header = reader.fieldnames or []
        missing = [c for c in REQUIRED_COLUMNS if c not in header]
        if missing:
            raise SchemaError(f"CSV is missing columns: {', '.join(missing)}")
        rows = []
        for raw in reader:
            rows.append(
                {
                    "scheduler": raw["scheduler"],
                    "sigma": float(raw["sigma"]),
                    "load": float(raw["load"]),
                    "dn": float(raw["dn"]),
                    "run_id": int(raw["run_id"]),
                    "mean_sojourn": float(raw["mean_sojourn"]),
                }
            )
    return rows


def _ordered_schedulers(rows: list[dict]) -> list[str]:
    present = {r["scheduler"] for r in rows}
    known = [name for name in _ORDER if name in present]
    return known + sorted(present - set(_ORDER))


def _color(name: str) -> str:
    return _COLORS.get(name, "tab:brown")


def _finish(fig, ax, spec: FigureSpec, xlabel: str) -> None:
    ax.set_xlabel(xlabel)
    ax.set_ylabel("mean sojourn (s)")
    if spec.y_log:
        ax.set_yscale("log")
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()


def _box_vs_sigma(ax, rows: list[dict], spec: FigureSpec) -> None:
    sigmas = sorted({r["sigma"] for r in rows})
    positions = {s: i for i, s in enumerate(sigmas)}
    schedulers = _ordered_schedulers(rows)
    boxed = [s for s in schedulers if s not in SIZE_BLIND]
    handles = []

    for name in schedulers:
        if name in SIZE_BLIND:
            level = next(r["mean_sojourn"] for r in rows if r["scheduler"] == name)
            ax.axhline(level, color=_color(name), linestyle="--", label=name)
            handles.append(None)

    width = 0.8 / max(len(boxed), 1)
    for k, name in enumerate(boxed):
        data, pos = [], []
        for sigma in sigmas:
            values = [
                r["mean_sojourn"]
                for r in rows
                if r["scheduler"] == name and r["sigma"] == sigma
            ]
            if values:
                data.append(values)
                pos.append(positions[sigma] + (k - (len(boxed) - 1) / 2) * width)
        parts = ax.boxplot(
            data,
            positions=pos,
            widths=width * 0.9,
            patch_artist=True,
            manage_ticks=False,
        )
        for patch in parts["boxes"]:
            patch.set_facecolor(_color(name))
            patch.set_alpha(0.6)
        for median in parts["medians"]:
            median.set_color("black")

    ax.set_xticks(range(len(sigmas)))
    ax.set_xticklabels([f"{s:g}" for s in sigmas])
    line_handles, line_labels = ax.get_legend_handles_labels()
    proxies = [Patch(facecolor=_color(name), alpha=0.6, label=name) for name in boxed]
    ax.legend(
        handles=line_handles + proxies,
        labels=line_labels + boxed,
        loc="best",
        fontsize="small",
    )


def _line_vs(ax, rows: list[dict], column: str) -> None:
    for name in _ordered_schedulers(rows):
        grid = sorted({r[column] for r in rows if r["scheduler"] == name})
        means = []
        for value in grid:
            values = [
                r["mean_sojourn"]
                for r in rows
                if r["scheduler"] == name and r[column] == value
            ]
            means.append(float(np.mean(values)))
        ax.plot(grid, means, marker="o", color=_color(name), label=name)
    ax.legend(loc="best", fontsize="small")


def render(spec: FigureSpec):
    """Draw the figure described by ``spec``, write it, return the Figure."""
    if spec.kind not in KINDS:
        raise ValueError(f"unknown figure kind {spec.kind!r}")
    rows = read_sweep(spec.input_csv)
    if spec.schedulers is not None:
        wanted = set(spec.schedulers)
        rows = [r for r in rows if r["scheduler"] in wanted]
    if not rows:
        raise EmptyGroup("no rows to plot after filtering")

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    try:
        if spec.kind == "box_vs_sigma":
            _box_vs_sigma(ax, rows, spec)
            _finish(fig, ax, spec, "size estimation error (sigma)")
        elif spec.kind == "line_vs_load":
            _line_vs(ax, rows, "load")
            _finish(fig, ax, spec, "load")
        else:
            _line_vs(ax, rows, "dn")
            _finish(fig, ax, spec, "disk/network cost ratio")
        _save(fig, spec.output)
    except BaseException:
        plt.close(fig)
        raise
    return fig


def _save(fig, path: str) -> None:
    ext = os.path.splitext(path)[1].lower()
    if ext == ".pdf":
        # a fixed creation date keeps re-renders byte-identical
        fig.savefig(path, format="pdf", metadata={"CreationDate": None})
    elif ext == ".png":
        fig.savefig(path, format="png")
    else:
        raise ValueError(f"unsupported output format {ext!r}; use .pdf or .png")
