"""Command-line front end: single runs, sweeps, capacity checks, scenario list.

Exit status: 0 success, 1 usage error (bad flags, unknown scenario or
policy, malformed files), 2 runtime failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from .arrivals import specs_for_services
from .capacity import build_program, is_feasible, max_throughput_scale, min_cost, rates_from_specs
from .engine import run as run_sim
from .experiments import (
    compute_metrics,
    load_sweep_file,
    parse_policy_label,
    run_sweep,
    write_csv,
    write_manifest,
)
from .model import ReconfigProfile
from .policies import SublinearG, make_policy
from .scenarios import BUILTIN_SCENARIOS, load_scenario

OUT_ENV = "CLOUDNETSIM_OUT"


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; this tool reserves 2 for runtime."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _parse_rates(text: str):
    try:
        return [float(x) for x in text.split(",") if x != ""]
    except ValueError:
        raise ValueError(f"--lambda expects comma-separated numbers, got {text!r}")


def _apply_rates(scenario, rates):
    """One value sets every client; otherwise one value per client in
    declaration order across services."""
    clients = [(si, ci) for si, svc in enumerate(scenario.services)
               for ci in range(len(svc.clients))]
    if len(rates) == 1:
        rates = rates * len(clients)
    if len(rates) != len(clients):
        raise ValueError(f"expected 1 or {len(clients)} rates, got {len(rates)}")
    services = list(scenario.services)
    for (si, ci), r in zip(clients, rates):
        svc = services[si]
        cl = list(svc.clients)
        cl[ci] = replace(cl[ci], rate=r)
        services[si] = replace(svc, clients=tuple(cl))
    scenario.services = services
    return scenario


def _check_scenario(sc):
    problems = sc.validate()
    if problems:
        raise ValueError("invalid scenario: " + "; ".join(problems))


def _cmd_run(args, parser):
    sc = load_scenario(args.scenario)
    base, dcom = parse_policy_label(args.policy)
    if args.lam is not None:
        _apply_rates(sc, _parse_rates(args.lam))
    if args.delta_r is not None or args.eta_r is not None:
        for name, table in (("node", sc.net.node_reconfig), ("link", sc.net.link_reconfig)):
            for key in list(table):
                old = table[key]
                table[key] = ReconfigProfile(
                    delay=args.delta_r if args.delta_r is not None else old.delay,
                    cost=args.eta_r if args.eta_r is not None else old.cost)
        sc.net.node_commodity_reconfig = dict(sc.net.node_reconfig)
        sc.net.link_commodity_reconfig = dict(sc.net.link_reconfig)
    if dcom is not None:
        for n in sc.net.nodes:
            sc.net.node_commodity_reconfig[n] = ReconfigProfile(
                delay=dcom, cost=sc.net.node_reconfig[n].cost)
        for ln in sc.net.links:
            sc.net.link_commodity_reconfig[ln] = ReconfigProfile(
                delay=dcom, cost=sc.net.link_reconfig[ln].cost)
    _check_scenario(sc)

    V = args.V if args.V is not None else sc.policy.V
    g = SublinearG(sc.policy.g_scale, sc.policy.g_exponent)
    policy = make_policy(base, V=V, g=g)
    coms = sc.commodities()
    specs = specs_for_services(sc.services)
    result = run_sim(sc.net, coms, policy, specs, horizon=args.horizon,
                     seed=args.seed, mode=args.mode, trace_path=args.trace)
    lam0 = sc.services[0].clients[0].rate if sc.services and sc.services[0].clients else 0.0
    dr0 = next(iter(sc.net.node_reconfig.values())).delay if sc.net.nodes else 0
    er0 = next(iter(sc.net.node_reconfig.values())).cost if sc.net.nodes else 0.0
    rec = compute_metrics(result, args.policy, lam0, V, dr0, er0, args.seed,
                          args.warmup_frac, len(sc.net.nodes) + len(sc.net.links))
    print(f"policy={rec.policy} scenario={args.scenario} horizon={args.horizon} seed={args.seed}")
    for name in ("mean_total_queue", "mean_cost", "reconfig_fraction",
                 "delivered_rate", "instability_slope"):
        print(f"{name}={getattr(rec, name):.9g}")
    print(f"unstable={'true' if rec.unstable else 'false'}")
    return 0


def _cmd_sweep(args, parser):
    spec = load_sweep_file(args.spec)
    out = args.out or os.environ.get(OUT_ENV)
    if not out:
        parser.error(f"--out is required (or set {OUT_ENV})")
    if out.endswith(".csv"):
        csv_path, manifest_path = out, out[:-4] + ".manifest.json"
    else:
        os.makedirs(out, exist_ok=True)
        csv_path = os.path.join(out, "results.csv")
        manifest_path = os.path.join(out, "manifest.json")

    def progress(done, total, rec):
        if not args.quiet:
            print(f"[{done}/{total}] {rec.policy} lambda={rec.lam:g} V={rec.V:g} "
                  f"delta_r={rec.delta_r} eta_r={rec.eta_r:g} seed={rec.seed} "
                  f"queue={rec.mean_total_queue:.6g} slope={rec.instability_slope:.3g}",
                  file=sys.stderr)

    records, manifest = run_sweep(spec, progress=progress, jobs=args.jobs)
    write_csv(records, csv_path)
    write_manifest(manifest, manifest_path)
    failed = manifest["n_failed"]
    print(f"wrote {csv_path} ({len(records)} records) and {manifest_path}")
    if failed:
        print(f"error: {failed} cells failed; see {manifest_path}", file=sys.stderr)
        return 2
    return 0


def _cmd_capacity(args, parser):
    sc = load_scenario(args.scenario)
    if args.lam is not None:
        _apply_rates(sc, _parse_rates(args.lam))
    _check_scenario(sc)
    coms = sc.commodities()
    rates = rates_from_specs(specs_for_services(sc.services))
    print(build_program(sc.net, coms, rates, scale=args.scale).describe())
    if is_feasible(sc.net, coms, rates, scale=args.scale):
        cost, _ = min_cost(sc.net, coms, rates, scale=args.scale)
        print("feasible")
        print(f"h_star={cost:.9g}")
    else:
        print("infeasible")
    if args.max_scale:
        t = max_throughput_scale(sc.net, coms, rates, tol=args.tol)
        print(f"max_scale={t:.9g}")
    return 0


def _cmd_scenarios(args, parser):
    if args.name:
        sc = load_scenario(args.name)
        _check_scenario(sc)
        n_clients = sum(len(s.clients) for s in sc.services)
        print(f"name={sc.name}")
        print(f"nodes={len(sc.net.nodes)} links={len(sc.net.links)} "
              f"services={len(sc.services)} clients={n_clients} "
              f"commodities={len(list(sc.commodities().ids()))}")
        for svc in sc.services:
            chain = "->".join(f"f{k}" for k in range(len(svc.functions)))
            for cl in svc.clients:
                print(f"service={svc.id} chain={chain} client={cl.source}->{cl.destination} "
                      f"kind={cl.kind} rate={cl.rate:g}")
    else:
        for name in sorted(BUILTIN_SCENARIOS):
            print(name)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cloudnetsim",
                     description="Cloud network control simulator with reconfiguration overhead")
    sub = parser.add_subparsers(dest="subcommand", metavar="{run,sweep,capacity,scenarios}")

    p = sub.add_parser("run", help="simulate one cell and print its metrics", parents=[])
    p.add_argument("--scenario", default="abilene", help="built-in name or YAML path")
    p.add_argument("--policy", default="adcnc",
                   help="dcnc | adcnc | adcnc2 | adcnc2-dc<N>")
    p.add_argument("--horizon", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--V", type=float, default=None, help="overrides the scenario's V")
    p.add_argument("--lambda", dest="lam", default=None,
                   help="client rate(s), single value or comma list")
    p.add_argument("--delta-r", type=int, default=None, help="reconfiguration delay override")
    p.add_argument("--eta-r", type=float, default=None, help="reconfiguration cost override")
    p.add_argument("--warmup-frac", type=float, default=0.5)
    p.add_argument("--mode", choices=("actual", "nominal"), default="actual")
    p.add_argument("--trace", default=None, help="write a per-slot trace CSV here")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("sweep", help="run a sweep grid from a YAML spec")
    p.add_argument("--spec", required=True, help="sweep spec YAML path")
    p.add_argument("--out", default=None,
                   help=f"output directory or .csv path (default ${OUT_ENV})")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("capacity", help="feasibility and minimum cost for given rates")
    p.add_argument("--scenario", default="abilene")
    p.add_argument("--lambda", dest="lam", default=None,
                   help="client rate(s), single value or comma list")
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--max-scale", action="store_true",
                   help="also report the largest feasible rate multiplier")
    p.add_argument("--tol", type=float, default=1e-3)
    p.set_defaults(func=_cmd_capacity)

    p = sub.add_parser("scenarios", help="list built-in scenarios")
    p.add_argument("name", nargs="?", default=None, help="describe one scenario")
    p.set_defaults(func=_cmd_scenarios)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "func", None) is None:
        parser.print_help(sys.stderr)
        return 1
    try:
        return args.func(args, parser)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (KeyError, ValueError, FileNotFoundError, NotADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
