"""Exogenous packet arrivals.

Each arrival spec targets one (node, commodity) queue.  Counts for slot t
are drawn from a generator seeded by (run seed, t, spec key), so a slot's
sample is reproducible in isolation and independent of the order in which
specs are listed.  Supported kinds:

  poisson        independent Poisson(rate) counts, optionally truncated at cap
  deterministic  floor(rate * (t+1)) - floor(rate * t), an error-carrying
                 integer stream summing to floor(rate * T) over T slots
  zero           no arrivals
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass

import numpy as np

from .model import build_commodities, commodity_id


@dataclass(frozen=True)
class ArrivalSpec:
    node: str
    commodity: str
    kind: str = "poisson"
    rate: float = 0.0
    cap: int | None = None

    def key(self) -> int:
        # stable across processes, unlike hash()
        return zlib.crc32(f"{self.node}|{self.commodity}".encode())


def specs_for_services(services) -> list[ArrivalSpec]:
    """One spec per client, feeding its stage-0 commodity at the source."""
    out = []
    for svc in services:
        for ci, client in enumerate(svc.clients):
            out.append(ArrivalSpec(
                node=client.source,
                commodity=commodity_id(svc.id, ci, 0),
                kind=client.kind,
                rate=float(client.rate),
                cap=client.cap,
            ))
    # referenced commodities must exist
    known = set(build_commodities(services).ids())
    for spec in out:
        if spec.commodity not in known:
            raise ValueError(f"arrival spec targets unknown commodity {spec.commodity}")
    return out


def sample_one(spec: ArrivalSpec, t: int, seed: int) -> int:
    if spec.kind == "zero" or spec.rate == 0.0:
        return 0
    if spec.kind == "deterministic":
        count = math.floor(spec.rate * (t + 1)) - math.floor(spec.rate * t)
    elif spec.kind == "poisson":
        rng = np.random.default_rng((int(seed), int(t), spec.key()))
        count = int(rng.poisson(spec.rate))
    else:
        raise ValueError(f"unknown arrival kind {spec.kind!r}")
    if spec.cap is not None:
        count = min(count, int(spec.cap))
    return count


def sample_arrivals(specs, t: int, seed: int) -> dict:
    """Counts for slot t, keyed by (node, commodity).  Unlisted pairs get 0."""
    out = {}
    for spec in specs:
        out[(spec.node, spec.commodity)] = out.get((spec.node, spec.commodity), 0) + \
            sample_one(spec, t, seed)
    return out


def generate_schedule(specs, horizon: int, seed: int, start: int = 0) -> np.ndarray:
    """Pre-draw slots start..start+horizon-1: an (horizon, len(specs)) count
    matrix.

    Row r equals the per-spec values of sample_arrivals(specs, start + r,
    seed); the simulation loop consumes this matrix so the hot path stays
    array-only.
    """
    out = np.zeros((horizon, len(specs)), dtype=np.int64)
    for s, spec in enumerate(specs):
        for r in range(horizon):
            out[r, s] = sample_one(spec, start + r, seed)
    return out


def bound_for(spec: ArrivalSpec, quantile: float = 0.9999) -> float:
    """Support bound used for drift constants.

    Capped or deterministic streams are truly bounded; for uncapped Poisson
    the bound is taken as the given quantile so downstream window checks
    stay meaningful.
    """
    if spec.kind == "zero" or spec.rate == 0.0:
        return 0.0
    if spec.kind == "deterministic":
        b = math.ceil(spec.rate)
    elif spec.kind == "poisson":
        if spec.cap is not None:
            b = int(spec.cap)
        else:
            # smallest m with P(X <= m) >= quantile
            m, acc, term = 0, math.exp(-spec.rate), math.exp(-spec.rate)
            while acc < quantile and m < 10_000:
                m += 1
                term *= spec.rate / m
                acc += term
            b = m
    else:
        raise ValueError(f"unknown arrival kind {spec.kind!r}")
    return float(b)


def max_arrival_bound(specs, quantile: float = 0.9999) -> float:
    """a_max over all specs (0 if there are none)."""
    return max((bound_for(s, quantile) for s in specs), default=0.0)
