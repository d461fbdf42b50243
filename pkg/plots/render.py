#!/usr/bin/env python3
"""Render figures from experiment sweep CSVs.

Pure CSV -> image transform over the cloudnetsim experiments schema
(policy,lambda,V,delta_r,eta_r,seed,...); never runs simulations, so it
works anywhere the CSVs do.

  fig2  mean total queue vs arrival rate
  fig3  mean cost vs mean total queue, one point per V
  fig4  fraction of slots spent reconfiguring vs V (log x)
  fig6  same axes as fig3 (feed it the reconfiguration-cost sweep)
  fig7  same axes as fig3 (feed it the two-stage comparison sweep)

Seed rows are averaged per grid cell.  One series per policy and per value
of every other grid coordinate that varies in the file, sorted by policy
then parameters, e.g. a sweep over 4 reconfiguration delays and 2 policies
gives fig2 exactly 8 series.  Cells whose worst seed grows faster than
1e-2 packets/slot are pinned to the top of the axis as open markers
instead of letting a divergent queue set the scale.
"""

import argparse
import csv
import sys
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

GRID = ("policy", "lambda", "V", "delta_r", "eta_r")
UNSTABLE_SLOPE = 1e-2


@dataclass(frozen=True)
class FigureSpec:
    figure: str
    csv_path: str
    out_path: str


@dataclass(frozen=True)
class AxisMap:
    x: str                      # grid coordinate or metric column
    y: str                      # metric column
    xlabel: str
    ylabel: str
    log_x: bool = False
    order_by: str = ""          # tradeoff curves: connect points in this order


FIGURES = {
    "fig2": AxisMap("lambda", "mean_total_queue",
                    "arrival rate", "mean total queue"),
    "fig3": AxisMap("mean_total_queue", "mean_cost",
                    "mean total queue", "mean cost", order_by="V"),
    "fig4": AxisMap("V", "reconfig_fraction",
                    "V", "fraction of slots reconfiguring", log_x=True),
    "fig6": AxisMap("mean_total_queue", "mean_cost",
                    "mean total queue", "mean cost", order_by="V"),
    "fig7": AxisMap("mean_total_queue", "mean_cost",
                    "mean total queue", "mean cost", order_by="V"),
}


def read_cells(path: str, metrics: list) -> list:
    """Seed-averaged cells from a sweep CSV, sorted by grid key.

    Each cell is a dict with the grid coordinates, the mean of every
    requested metric column, and an `unstable` flag set when any seed's
    instability_slope exceeds the threshold."""
    needed = list(GRID) + ["seed", "instability_slope"] + list(metrics)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in needed if c not in header]
        if missing:
            raise ValueError(f"{path}: missing columns {missing}")
        rows = list(reader)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    groups = {}
    for r in rows:
        key = (r["policy"],) + tuple(float(r[c]) for c in GRID[1:])
        groups.setdefault(key, []).append(r)
    cells = []
    for key in sorted(groups):
        rs = groups[key]
        cell = dict(zip(GRID, key))
        for m in metrics:
            cell[m] = sum(float(r[m]) for r in rs) / len(rs)
        cell["unstable"] = max(
            float(r["instability_slope"]) for r in rs) > UNSTABLE_SLOPE
        cells.append(cell)
    return cells


def split_series(cells: list, axes: AxisMap) -> dict:
    """Group cells into plot series: one per policy and per combination of
    the grid coordinates that vary and are not on an axis."""
    taken = {axes.x, axes.order_by}
    varying = tuple(c for c in GRID[1:]
                    if c not in taken and len({cell[c] for cell in cells}) > 1)
    series = {}
    for cell in cells:
        key = (cell["policy"],) + tuple(cell[c] for c in varying)
        series.setdefault(key, []).append(cell)
    return varying, dict(sorted(series.items()))


def _label(key, varying) -> str:
    parts = [key[0]] + [f"{c}={v:g}" for c, v in zip(varying, key[1:])]
    return " ".join(parts)


def render(spec: FigureSpec) -> str:
    """Draw one figure and write it to spec.out_path."""
    axes = FIGURES[spec.figure]
    metrics = [c for c in (axes.x, axes.y) if c not in GRID]
    cells = read_cells(spec.csv_path, metrics)
    varying, series = split_series(cells, axes)

    stable = [c for c in cells if not c["unstable"]]
    y_top = 1.05 * max((c[axes.y] for c in stable), default=1.0)
    x_hi = max((c[axes.x] for c in stable), default=1.0)
    x_lo = min((c[axes.x] for c in stable), default=0.0)

    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    any_unstable = False
    for key, cs in series.items():
        cs = sorted(cs, key=lambda c: c[axes.order_by or axes.x])
        good = [c for c in cs if not c["unstable"]]
        bad = [c for c in cs if c["unstable"]]
        line, = ax.plot([c[axes.x] for c in good], [c[axes.y] for c in good],
                        marker="o", markersize=4, label=_label(key, varying))
        if bad:
            any_unstable = True
            bx = [min(max(c[axes.x], x_lo), x_hi) for c in bad]
            ax.plot(bx, [y_top] * len(bad), linestyle="none", marker="o",
                    markersize=6, markerfacecolor="none",
                    color=line.get_color())
    if any_unstable:
        ax.set_ylim(top=1.03 * y_top)
    if axes.log_x:
        ax.set_xscale("log")
    ax.set_xlabel(axes.xlabel)
    ax.set_ylabel(axes.ylabel)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    meta = {"Date": None} if spec.out_path.endswith(".svg") else None
    fig.savefig(spec.out_path, dpi=150, metadata=meta)
    plt.close(fig)
    return spec.out_path


def main(argv=None) -> int:
    p = argparse.ArgumentParser(
        description="render a figure from an experiment sweep CSV")
    p.add_argument("--figure", required=True, choices=sorted(FIGURES))
    p.add_argument("--csv", required=True, dest="csv_path")
    p.add_argument("--out", required=True, dest="out_path")
    args = p.parse_args(argv)
    try:
        out = render(FigureSpec(args.figure, args.csv_path, args.out_path))
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
