"""Reproducible sweep experiments over policies and scenario parameters.

A sweep is a cartesian grid over policy labels, client arrival rate
(applied to every client), V, reconfiguration delay and cost, and seeds.
Each cell simulates one run and reduces it to one metrics record; records
serialize to a CSV whose bytes depend only on the grid and seeds, so
reruns diff clean.

Policy labels: "dcnc", "adcnc", "adcnc2" and "adcnc2-dc<N>", where the
dc suffix pins the commodity-switch reconfiguration delay to N slots
while the resource delay stays at the cell's delta_r.
"""

from __future__ import annotations

import csv
import itertools
import json
import re
import time
from dataclasses import dataclass, field, fields, replace

import numpy as np
import yaml

from . import __version__
from .arrivals import generate_schedule, specs_for_services
from .engine import run
from .model import ReconfigProfile
from .policies import make_policy
from .scenarios import load_scenario

CSV_COLUMNS = ["policy", "lambda", "V", "delta_r", "eta_r", "seed",
               "mean_total_queue", "mean_cost", "reconfig_fraction",
               "delivered_rate", "instability_slope"]

UNSTABLE_SLOPE = 1e-2   # queue growth (packets/slot) above which a cell is unstable


@dataclass(frozen=True)
class MetricsRecord:
    policy: str
    lam: float
    V: float
    delta_r: int
    eta_r: float
    seed: int
    mean_total_queue: float
    mean_cost: float
    reconfig_fraction: float
    delivered_rate: float
    instability_slope: float
    horizon: int = 0
    warmup_frac: float = 0.5

    def key(self):
        return (self.policy, self.lam, self.V, self.delta_r, self.eta_r, self.seed)

    @property
    def unstable(self) -> bool:
        return self.instability_slope > UNSTABLE_SLOPE


@dataclass
class SweepSpec:
    scenario: str = "abilene"
    policies: tuple = ("dcnc", "adcnc")
    lambdas: tuple = (0.2,)
    V: tuple = (5.0,)
    delta_r: tuple = (0,)
    eta_r: tuple = (0.0,)
    seeds: tuple = (0, 1, 2)
    horizon: int = 100_000
    warmup_frac: float = 0.5

    def __post_init__(self):
        self.policies = tuple(self.policies)
        self.lambdas = tuple(float(x) for x in self.lambdas)
        self.V = tuple(float(x) for x in self.V)
        self.delta_r = tuple(int(x) for x in self.delta_r)
        self.eta_r = tuple(float(x) for x in self.eta_r)
        self.seeds = tuple(int(x) for x in self.seeds)
        self.horizon = int(self.horizon)
        if not (0.0 <= self.warmup_frac < 1.0):
            raise ValueError("warmup_frac must be in [0, 1)")
        if self.horizon < 2:
            raise ValueError("horizon must be >= 2")
        if any(x < 0 for x in self.lambdas):
            raise ValueError("lambdas must be >= 0")
        if any(x < 0 for x in self.delta_r) or any(x < 0 for x in self.eta_r):
            raise ValueError("delta_r and eta_r must be >= 0")
        for p in self.policies:
            parse_policy_label(p)

    def cells(self):
        """Grid cells in the canonical (sorted) order used for the CSV."""
        return sorted(itertools.product(self.policies, self.lambdas, self.V,
                                        self.delta_r, self.eta_r, self.seeds))


def parse_policy_label(label: str):
    """Split a policy label into (base policy name, commodity delay or None)."""
    if label in ("dcnc", "adcnc", "adcnc2"):
        return label, None
    m = re.fullmatch(r"adcnc2-dc(\d+)", label)
    if m:
        return "adcnc2", int(m.group(1))
    raise ValueError(f"unknown policy label {label!r}")


def load_sweep_file(path: str) -> SweepSpec:
    with open(path, encoding="utf-8") as fh:
        doc = yaml.safe_load(fh) or {}
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: expected a mapping at top level")
    known = {f.name for f in fields(SweepSpec)}
    unknown = set(doc) - known
    if unknown:
        raise ValueError(f"{path}: unknown sweep keys {sorted(unknown)}")
    return SweepSpec(**doc)


def _scenario_for_cell(name: str, lam: float, delta_r: int, eta_r: float,
                       delta_commodity: int | None):
    sc = load_scenario(name)
    sc.services = [
        replace(svc, clients=tuple(replace(cl, rate=lam) for cl in svc.clients))
        for svc in sc.services
    ]
    res = ReconfigProfile(delay=delta_r, cost=eta_r)
    com = res if delta_commodity is None else ReconfigProfile(delay=delta_commodity, cost=eta_r)
    for n in sc.net.nodes:
        sc.net.node_reconfig[n] = res
        sc.net.node_commodity_reconfig[n] = com
    for ln in sc.net.links:
        sc.net.link_reconfig[ln] = res
        sc.net.link_commodity_reconfig[ln] = com
    return sc


def compute_metrics(result, policy: str, lam: float, V: float, delta_r: int,
                    eta_r: float, seed: int, warmup_frac: float,
                    n_elements: int) -> MetricsRecord:
    """Reduce a run to the post-warmup averages recorded in the CSV."""
    H = result.horizon
    w = slice(int(H * warmup_frac), H)
    q = result.total_queue[w]
    x = np.arange(q.size)
    slope = float(np.polyfit(x, q, 1)[0]) if q.size >= 2 else 0.0
    return MetricsRecord(
        policy=policy, lam=lam, V=V, delta_r=delta_r, eta_r=eta_r, seed=seed,
        mean_total_queue=float(q.mean()),
        mean_cost=float(result.cost_total[w].mean()),
        reconfig_fraction=float(result.reconfiguring[w].mean()) / n_elements,
        delivered_rate=float(result.deliveries[w].mean()),
        instability_slope=slope,
        horizon=H, warmup_frac=warmup_frac,
    )


def _run_cell(spec: SweepSpec, cell, cache, collect_lemma):
    label, lam, V, dr, er, seed = cell
    base, dcom = parse_policy_label(label)
    sc = _scenario_for_cell(spec.scenario, lam, dr, er, dcom)
    coms = sc.commodities()
    specs = tuple(specs_for_services(sc.services))
    key = (specs, spec.horizon, seed)
    if key not in cache:
        cache[key] = generate_schedule(specs, spec.horizon, seed)
    result = run(sc.net, coms, make_policy(base, V=V), specs,
                 horizon=spec.horizon, seed=seed, collect_lemma=collect_lemma,
                 arrival_schedule=cache[key])
    rec = compute_metrics(result, label, lam, V, dr, er, seed, spec.warmup_frac,
                          len(sc.net.nodes) + len(sc.net.links))
    return rec, result


def run_sweep(spec: SweepSpec, progress=None, on_result=None,
              collect_lemma: bool = False, jobs: int = 1,
              schedule_cache: dict | None = None):
    """Run every cell of the grid; returns (records, manifest).

    Arrival schedules depend only on (scenario, lambda, seed), so they are
    generated once and shared across the policy/V/delta/eta axes; pass a
    dict as `schedule_cache` to share them across several sweeps too.
    `on_result(record, result)` is called per cell before the run's arrays
    are dropped; `progress(done, total, record)` after each cell.  A cell
    that raises is recorded in the manifest and produces no record.
    jobs > 1 runs cells in a thread pool (records stay in grid order);
    callbacks and lemma collection require the sequential path.
    """
    if jobs < 1:
        raise ValueError("jobs must be >= 1")
    if jobs > 1 and (on_result is not None or collect_lemma):
        raise ValueError("jobs > 1 does not support on_result/collect_lemma")
    records = []
    cell_log = []
    cache = schedule_cache if schedule_cache is not None else {}
    cells = spec.cells()
    t_start = time.perf_counter()

    def one(cell):
        t0 = time.perf_counter()
        entry = dict(zip(("policy", "lambda", "V", "delta_r", "eta_r", "seed"), cell))
        try:
            rec, result = _run_cell(spec, cell, cache, collect_lemma)
        except Exception as exc:   # keep sweeping; the manifest reports the cell
            entry["error"] = f"{type(exc).__name__}: {exc}"
            return None, None, entry
        entry["runtime_s"] = round(time.perf_counter() - t0, 3)
        return rec, result, entry

    if jobs == 1:
        outcomes = map(one, cells)
    else:
        from concurrent.futures import ThreadPoolExecutor

        # warm the schedule cache up front: the cache dict is then read-only
        for cell in cells:
            lam, seed = cell[1], cell[5]
            sc = _scenario_for_cell(spec.scenario, lam, cell[3], cell[4], None)
            specs = tuple(specs_for_services(sc.services))
            key = (specs, spec.horizon, seed)
            if key not in cache:
                cache[key] = generate_schedule(specs, spec.horizon, seed)
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(one, cells))

    for idx, (rec, result, entry) in enumerate(outcomes):
        cell_log.append(entry)
        if rec is None:
            continue
        records.append(rec)
        if on_result is not None:
            on_result(rec, result)
        if progress is not None:
            progress(idx + 1, len(cells), rec)
    manifest = {
        "version": __version__,
        "scenario": spec.scenario,
        "horizon": spec.horizon,
        "warmup_frac": spec.warmup_frac,
        "grid": {
            "policies": list(spec.policies),
            "lambdas": list(spec.lambdas),
            "V": list(spec.V),
            "delta_r": list(spec.delta_r),
            "eta_r": list(spec.eta_r),
            "seeds": list(spec.seeds),
        },
        "n_cells": len(cells),
        "n_failed": sum(1 for e in cell_log if "error" in e),
        "total_runtime_s": round(time.perf_counter() - t_start, 3),
        "cells": cell_log,
    }
    return records, manifest


def summarize(records):
    """Seed-averaged metrics per (policy, lambda, V, delta_r, eta_r) cell.

    All records must share one (horizon, warmup_frac) window; mixing windows
    would average incomparable quantities and raises ValueError."""
    windows = {(r.horizon, r.warmup_frac) for r in records}
    if len(windows) > 1:
        raise ValueError(f"records mix averaging windows: {sorted(windows)}")
    groups = {}
    for r in records:
        groups.setdefault(r.key()[:5], []).append(r)
    out = []
    for key in sorted(groups):
        rs = groups[key]
        out.append({
            "policy": key[0], "lambda": key[1], "V": key[2],
            "delta_r": key[3], "eta_r": key[4], "n_seeds": len(rs),
            "mean_total_queue": float(np.mean([r.mean_total_queue for r in rs])),
            "mean_cost": float(np.mean([r.mean_cost for r in rs])),
            "reconfig_fraction": float(np.mean([r.reconfig_fraction for r in rs])),
            "delivered_rate": float(np.mean([r.delivered_rate for r in rs])),
            "instability_slope": float(np.mean([r.instability_slope for r in rs])),
            "max_instability_slope": float(np.max([r.instability_slope for r in rs])),
        })
    return out


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".9g")


def write_csv(records, path: str):
    """Write records sorted by cell key; bytes are a pure function of the
    record values (LF endings, UTF-8, %.9g floats)."""
    rows = sorted(records, key=lambda r: r.key())
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in rows:
            w.writerow([r.policy, _fmt(r.lam), _fmt(r.V), _fmt(r.delta_r),
                        _fmt(r.eta_r), _fmt(r.seed), _fmt(r.mean_total_queue),
                        _fmt(r.mean_cost), _fmt(r.reconfig_fraction),
                        _fmt(r.delivered_rate), _fmt(r.instability_slope)])


def read_csv(path: str):
    """Inverse of write_csv (horizon/warmup are not in the file and default)."""
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = set(CSV_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        for row in reader:
            out.append(MetricsRecord(
                policy=row["policy"], lam=float(row["lambda"]), V=float(row["V"]),
                delta_r=int(row["delta_r"]), eta_r=float(row["eta_r"]),
                seed=int(row["seed"]),
                mean_total_queue=float(row["mean_total_queue"]),
                mean_cost=float(row["mean_cost"]),
                reconfig_fraction=float(row["reconfig_fraction"]),
                delivered_rate=float(row["delivered_rate"]),
                instability_slope=float(row["instability_slope"]),
            ))
    return out


def write_manifest(manifest: dict, path: str):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
