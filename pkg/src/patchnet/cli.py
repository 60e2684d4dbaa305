"""Command-line front end: grid, assemble, simulate, sweep, merge, percolation.

Each subcommand is a thin composition of library calls; no logic lives only
here.  Exit codes: 0 success, 2 usage or input validation, 3 runtime
failure (missing manifest, non-quiescent net, I/O).  All randomness flows
through explicit --seed flags.
"""

from __future__ import annotations

import argparse
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import layers as layers_mod
from . import percolation as perc_mod
from . import spatial, sweep as sweep_mod, templates
from .errors import (MergeError, NoCrossingError, NonQuiescentError,
                     PatchnetError)
from .formats import (NetDocument, emit_andl, emit_sbml, fmt_number,
                      parse_andl, parse_sbml, write_trace_csv)
from .sim import SimConfig, simulate_ssa

_MODES = {"moore": spatial.MOORE, "vonneumann": spatial.VON_NEUMANN}


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _load_document(path: str) -> NetDocument:
    suffix = Path(path).suffix
    if suffix == ".andl":
        return parse_andl(_read(path))
    if suffix in (".xml", ".sbml"):
        return parse_sbml(_read(path))
    raise ValueError(f"cannot tell model format from suffix {suffix!r}")


def _cmd_grid(args) -> int:
    region = spatial.load_region(_read(args.region))
    grid = spatial.grid_from_region(region, args.cell_size)
    adj = spatial.neighbors(grid, _MODES[args.mode])
    Path(args.out).write_text(spatial.write_adjacency_csv(adj), encoding="utf-8")
    if args.grid_out:
        lines = ["patch_id,row,col,cx,cy"]
        for p in grid.patches:
            lines.append(f"{p.patch_id},{p.row},{p.col},"
                         f"{fmt_number(p.center[0])},{fmt_number(p.center[1])}")
        Path(args.grid_out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"{len(grid.patches)} patches, {len(adj.edges)} edges -> {args.out}")
    return 0


def _split_ids(raw: str | None) -> list[str]:
    return [part.strip() for part in raw.split(",") if part.strip()] if raw else []


def _cmd_assemble(args) -> int:
    if not args.andl and not args.sbml:
        raise ValueError("at least one of --andl/--sbml is required")
    adj = spatial.load_adjacency_csv(_read(args.adjacency))

    init = templates.parse_init_csv(_read(args.init)) if args.init else None
    if args.template == "sir":
        overrides = {}
        if args.layers:
            rules = dict(layers_mod.parse_rate_rule(r) for r in args.rate_rule or [])
            if not rules:
                raise ValueError("--layers needs at least one --rate-rule")
            layer_list = layers_mod.load_layers_csv(_read(args.layers))
            attrs = layers_mod.bind_layers(adj.nodes, layer_list, args.aggregate)
            overrides = layers_mod.derive_rates(attrs, rules)
        params = templates.SirParams(infect=args.infect, recover=args.recover,
                                     cross_infect=args.cross_infect,
                                     overrides=overrides)
        net, rates = templates.assemble_sir(adj, params)
        net, marking = templates.apply_init(net, init)
    else:
        occupied = _split_ids(args.occupied) or list(adj.nodes)
        net, template_marking = templates.assemble_fire(adj, occupied,
                                                        _split_ids(args.seeds))
        rates = {t: args.spread_rate for t in net.transitions}
        if init is not None:
            net, marking = templates.apply_init(net, init)
        elif args.seeds:
            marking = template_marking  # explicit seeds imply the fire start state
        else:
            net, marking = templates.apply_init(net, None)
    doc = NetDocument(net, marking, rates, args.name)
    if args.andl:
        Path(args.andl).write_text(emit_andl(doc), encoding="utf-8")
    if args.sbml:
        Path(args.sbml).write_text(emit_sbml(doc), encoding="utf-8")
    print(f"{len(net.places)} places, {len(net.transitions)} transitions")
    return 0


def _cmd_simulate(args) -> int:
    doc = _load_document(args.model)
    cfg = SimConfig(t_end=args.t_end, record_dt=args.record_dt, seed=args.seed,
                    max_events=args.max_events)
    trace = simulate_ssa(doc, cfg)
    Path(args.out).write_text(write_trace_csv(trace, doc.net), encoding="utf-8")
    note = " (truncated)" if trace.truncated else ""
    print(f"{len(trace.rows)} rows -> {args.out}{note}")
    return 0


def _cmd_sweep(args) -> int:
    spec, cfg = sweep_mod.load_sweep_file(args.spec)
    out_dir = args.out_dir
    if not out_dir:
        stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%SZ")
        out_dir = f"{spec.name}_{stamp}"
    records = sweep_mod.expand_sweep(spec)
    done = sweep_mod.run_sweep(records, cfg, out_dir, args.parallelism)
    bad = sum(1 for r in done if r.status.startswith("error"))
    print(f"{len(done)} runs ({bad} failed) -> {out_dir}")
    return 0


def _cmd_merge(args) -> int:
    merged, summary = sweep_mod.merge_csv(args.dir)
    merged_path = Path(args.dir) / "merged.csv"
    summary_path = Path(args.dir) / "summary.csv"
    merged_path.write_text(merged, encoding="utf-8")
    summary_path.write_text(summary, encoding="utf-8")
    print(f"wrote {merged_path} and {summary_path}")
    return 0


def _cmd_percolation(args) -> int:
    p_grid = []
    p = args.p_min
    while p <= args.p_max + 1e-12:
        p_grid.append(round(p, 12))
        p += args.step
    estimate = perc_mod.estimate_threshold(
        args.n, p_grid, args.trials, args.seed, _MODES[args.mode], args.engine,
        collect_cluster_sizes=True)
    lines = ["p,spanning_prob,mean_cluster_size"]
    for p, prob, cluster in zip(estimate.p_grid, estimate.spanning_prob,
                                estimate.mean_cluster):
        lines.append(f"{fmt_number(p)},{fmt_number(prob)},{fmt_number(cluster)}")
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"p_c estimate: {estimate.p_c_estimate:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="patchnet",
        description="Assemble, serialize, and simulate spatial Petri nets.")
    sub = parser.add_subparsers(dest="command", required=True)

    grid = sub.add_parser("grid", help="grid a region and write its adjacency")
    grid.add_argument("--region", required=True, help="GeoJSON polygon file")
    grid.add_argument("--cell-size", type=float, required=True)
    grid.add_argument("--mode", choices=sorted(_MODES), default="moore")
    grid.add_argument("--out", required=True, help="adjacency CSV output")
    grid.add_argument("--grid-out", help="optional patch CSV output")
    grid.set_defaults(func=_cmd_grid)

    asm = sub.add_parser("assemble", help="build a model over an adjacency")
    asm.add_argument("--template", choices=["sir", "fire"], required=True)
    asm.add_argument("--adjacency", required=True, help="adjacency CSV input")
    asm.add_argument("--layers", help="layer CSV (id-keyed) for rate derivation")
    asm.add_argument("--rate-rule", action="append",
                     help="rate rule name=SCALE*LAYER+OFFSET@LO:HI (repeatable)")
    asm.add_argument("--aggregate", choices=sorted(layers_mod.AGGREGATES),
                     default="mean")
    asm.add_argument("--init", help="init CSV (kind,id,value)")
    asm.add_argument("--name", default="net")
    asm.add_argument("--infect", type=float, default=0.1)
    asm.add_argument("--recover", type=float, default=0.05)
    asm.add_argument("--cross-infect", type=float, default=0.01)
    asm.add_argument("--spread-rate", type=float, default=1.0,
                     help="rate for fire spread transitions")
    asm.add_argument("--occupied", help="fire: comma-separated ids (default all)")
    asm.add_argument("--seeds", help="fire: comma-separated seed ids")
    asm.add_argument("--andl", help=".andl output path")
    asm.add_argument("--sbml", help=".xml output path")
    asm.set_defaults(func=_cmd_assemble)

    simulate = sub.add_parser("simulate", help="run the stochastic engine")
    simulate.add_argument("--model", required=True, help=".andl or .xml document")
    simulate.add_argument("--t-end", type=float, required=True)
    simulate.add_argument("--record-dt", type=float, default=1.0)
    simulate.add_argument("--seed", type=int, default=0)
    simulate.add_argument("--max-events", type=int, default=1_000_000)
    simulate.add_argument("--out", required=True, help="trace CSV output")
    simulate.set_defaults(func=_cmd_simulate)

    sweep = sub.add_parser("sweep", help="expand and execute a parameter sweep")
    sweep.add_argument("--spec", required=True, help="sweep description file")
    sweep.add_argument("--out-dir", help="default: <name>_<UTC timestamp>")
    sweep.add_argument("--parallelism", type=int, default=1)
    sweep.set_defaults(func=_cmd_sweep)

    merge = sub.add_parser("merge", help="merge an executed sweep directory")
    merge.add_argument("--dir", required=True)
    merge.set_defaults(func=_cmd_merge)

    perc = sub.add_parser("percolation", help="estimate the spanning threshold")
    perc.add_argument("--n", type=int, required=True)
    perc.add_argument("--p-min", type=float, default=0.35)
    perc.add_argument("--p-max", type=float, default=0.47)
    perc.add_argument("--step", type=float, default=0.01)
    perc.add_argument("--trials", type=int, required=True)
    perc.add_argument("--seed", type=int, default=0)
    perc.add_argument("--engine", choices=[perc_mod.ORACLE, perc_mod.NET],
                      default=perc_mod.ORACLE)
    perc.add_argument("--mode", choices=sorted(_MODES), default="moore")
    perc.add_argument("--out", required=True, help="p/spanning/cluster CSV output")
    perc.set_defaults(func=_cmd_percolation)

    return parser


_RUNTIME_ERRORS = (MergeError, NonQuiescentError, NoCrossingError, OSError)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _RUNTIME_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (PatchnetError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
