"""Command-line interface: ``hyperslice <subcommand> ...``.

Exit codes: 0 when every edge is sliced (or the command simply succeeded),
1 for a partial slicing, 2 for usage or input errors.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import asdict

from . import __version__
from .bounds import DEFAULT_TABLE, subadditive_chain, upper_bound
from .core import (
    BRUTE_FORCE_LIMIT,
    ConstructionFormatError,
    PlaneSet,
    format_planes,
    parse_planes,
    verify_full,
)
from .errors import DegenerateConfig, InvalidInput, NotFound, ResourceGuard
from .fixtures import FIXTURES, get_fixture, selftest
from .reduced import Composition, build_grid, grid_report, weighted_sliced_count
from .search import SearchConfig, default_workers, run_parallel, run_search
from .tabu import TabuConfig, run_tabu

EXIT_FULL, EXIT_PARTIAL, EXIT_ERROR = 0, 1, 2


def _emit(args, payload: dict, lines: list[str]) -> None:
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print("\n".join(lines))


def _load_construction(path: str, n: int | None) -> PlaneSet:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        report = json.loads(text)
        return parse_planes(report["construction"], n or report.get("n"))
    return parse_planes(text, n)


def cmd_verify(args) -> int:
    planes = _load_construction(args.file, args.n)
    n = planes.dimension
    comp = Composition.parse(args.composition) if args.composition else None
    if n > BRUTE_FORCE_LIMIT and comp is not None:
        grid = build_grid(comp)
        sliced = weighted_sliced_count(planes, grid)
        total = grid.total_full_edges
        payload = {"n": n, "k": planes.k, "sliced": sliced, "total": total, "complete": sliced == total,
                   "method": "reduced"}
        _emit(args, payload, [f"sliced={sliced}/{total}"])
        return EXIT_FULL if sliced == total else EXIT_PARTIAL
    res = verify_full(planes)
    payload = {"n": n, "k": planes.k, "sliced": res.sliced, "total": res.total, "complete": res.ok,
               "method": "brute-force"}
    lines = [f"sliced={res.sliced}/{res.total}"]
    if args.list_unsliced:
        edges = [[int(v), int(i)] for v, i in res.unsliced_canonical]
        payload["unsliced"] = edges
        lines += [f"unsliced vertex={v} flip={i}" for v, i in edges]
    _emit(args, payload, lines)
    return EXIT_FULL if res.ok else EXIT_PARTIAL


def _report(args, cfg, result, kind: str) -> int:
    text = format_planes(result.planes)
    header = [f"{kind} n={cfg.n} k={cfg.k} composition={cfg.composition} seed={cfg.seed}", result.summary()]
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(format_planes(result.planes, header))
    config = asdict(cfg)
    config["composition"] = list(cfg.composition.blocks)
    payload = {
        "kind": kind,
        "config": config,
        "n": cfg.n,
        "k": cfg.k,
        "construction": text,
        "sliced": result.full_sliced,
        "total": result.full_total,
        "reduced_sliced": result.reduced_sliced,
        "reduced_total": result.reduced_total,
        "verified_sliced": result.verified_full,
        "wall_time": round(result.elapsed, 3),
        "iterations": result.iterations,
        "restarts": result.restarts,
        "seed": result.seed,
        "backend": result.backend,
    }
    if result.full_sliced > 0:
        DEFAULT_TABLE.record_local(cfg.n, cfg.k, result.full_sliced)
    _emit(args, payload, [text.rstrip("\n"), result.summary()])
    return EXIT_FULL if result.complete else EXIT_PARTIAL


def _shared(args, config_cls) -> dict:
    bound = args.coeff_bound if args.coeff_bound is not None else config_cls.coeff_bound
    return dict(
        n=args.n, k=args.k, composition=Composition.parse(args.composition),
        coeff_bound=bound, delta=args.delta, fitness_mode=args.fitness,
        seed=args.seed, time_limit=args.time_limit, freeze_value=args.freeze_block,
        max_restarts=args.max_restarts, target=args.target,
    )


def cmd_search(args) -> int:
    cfg = SearchConfig(
        **_shared(args, SearchConfig), max_iterations=args.max_iterations, weight_period=args.weight_period,
        weight_limit=args.weight_limit, variance_penalty=args.variance_penalty == "on",
    )
    result = run_parallel(run_search, cfg, args.workers)
    return _report(args, cfg, result, "search")


def cmd_tabu(args) -> int:
    cfg = TabuConfig(**_shared(args, TabuConfig), stagnation_limit=args.stagnation, frontier_capacity=args.frontier_cap)
    result = run_parallel(run_tabu, cfg, args.workers)
    return _report(args, cfg, result, "tabu")


def cmd_bound(args) -> int:
    ub = upper_bound(args.n)
    chain = subadditive_chain(args.n)
    chain_txt = " + ".join(f"S({p})<={b}" for p, b in chain)
    payload = {"n": args.n, "upper_bound": ub, "chain": [{"part": p, "bound": b} for p, b in chain]}
    _emit(args, payload, [str(ub), f"chain: {chain_txt}"])
    return 0


def cmd_table(args) -> int:
    rows = DEFAULT_TABLE.rows(args.n, args.k)
    if args.k is not None and args.n is not None and not rows:
        raise NotFound(f"no known S({args.n},{args.k}) value")
    lines = []
    for r in rows:
        extra = " ".join(f"{name}={r[name]}" for name in ("best", "prior", "tabu", "local") if name in r and name != "best")
        lines.append(f"S({r['n']},{r['k']}) >= {r['best']} [{r['provenance']}] of {r['total']} {extra}".rstrip())
    _emit(args, {"rows": rows}, lines)
    return 0


def cmd_reduce_info(args) -> int:
    comp = Composition.parse(args.composition)
    if args.n is not None and comp.n != args.n:
        raise InvalidInput(f"composition {comp} sums to {comp.n}, not {args.n}")
    grid = build_grid(comp)
    rep = grid_report(grid)
    lines = [f"|V|={grid.n_vertices} |E|={grid.n_edges}",
             f"multiplicity sum={rep['multiplicity_sum']} (n*2^(n-1)={grid.total_full_edges})"]
    lines += [f"  mu={m}: {c} edges" for m, c in grid.multiplicity_histogram().items()]
    _emit(args, rep, lines)
    return 0


def cmd_fixtures(args) -> int:
    if args.name:
        fx = get_fixture(args.name)
        text = fx.text
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        payload = {"name": fx.name, "n": fx.n, "k": fx.k, "composition": list(fx.composition),
                   "expected_sliced": fx.expected_sliced, "source": fx.source, "construction": text}
        _emit(args, payload, [text.rstrip("\n")] if not args.out else [f"wrote {args.out}"])
        return 0
    rows = [{"name": f.name, "n": f.n, "k": f.k, "expected_sliced": f.expected_sliced, "total": f.total_edges,
             "source": f.source} for f in FIXTURES.values()]
    _emit(args, {"fixtures": rows},
          [f"{r['name']}: n={r['n']} k={r['k']} sliced={r['expected_sliced']}/{r['total']}" for r in rows])
    return 0


def run_selftest(as_json: bool) -> int:
    t0 = time.perf_counter()
    rows = selftest()
    ok = all(r[3] for r in rows)
    if as_json:
        print(json.dumps({"ok": ok, "fixtures": [
            {"name": n, "expected": e, "found": f, "ok": good} for n, e, f, good in rows]}, indent=2))
    else:
        for name, expected, found, good in rows:
            print(f"{'PASS' if good else 'FAIL'} {name}: {found} (expected {expected})")
        print(f"selftest {'passed' if ok else 'FAILED'} in {time.perf_counter() - t0:.2f}s")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="structured JSON output")

    parser = argparse.ArgumentParser(prog="hyperslice", description="Hypercube edge slicing toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--selftest", action="store_true", help="verify every embedded construction and exit")
    parser.add_argument("--json", action="store_true", help=argparse.SUPPRESS)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("verify", parents=[common], help="count edges sliced by a construction file")
    p.add_argument("file")
    p.add_argument("--n", type=int, default=None, help="dimension (default: inferred)")
    p.add_argument("--list-unsliced", action="store_true")
    p.add_argument("--composition", default=None, help="use the reduced path (needed for n > 20)")
    p.set_defaults(func=cmd_verify)

    search_flags = argparse.ArgumentParser(add_help=False)
    search_flags.add_argument("--n", type=int, required=True)
    search_flags.add_argument("--k", type=int, required=True)
    search_flags.add_argument("--composition", required=True, help="e.g. 6,1,1,1,1")
    search_flags.add_argument("--coeff-bound", type=int, default=None,
                              help="coefficient range [-C, C] (default 40 for search, 10 for tabu)")
    search_flags.add_argument("--delta", type=int, default=3)
    search_flags.add_argument("--freeze-block", type=int, default=None, metavar="VALUE",
                              help="pin the first block's coefficient to VALUE")
    search_flags.add_argument("--fitness", choices=("plain", "weighted"), default="plain")
    search_flags.add_argument("--seed", type=int, default=0)
    search_flags.add_argument("--time-limit", type=float, default=60.0, metavar="SECS")
    search_flags.add_argument("--workers", type=int, default=default_workers())
    search_flags.add_argument("--max-restarts", type=int, default=None)
    search_flags.add_argument("--target", type=int, default=None,
                              help="stop once this many hypercube edges are sliced")
    search_flags.add_argument("--out", default=None, help="write the best construction here")

    p = sub.add_parser("search", parents=[common, search_flags], help="adaptive edge-weighted hill climbing")
    p.add_argument("--variance-penalty", choices=("on", "off"), default="on")
    p.add_argument("--max-iterations", type=int, default=None)
    p.add_argument("--weight-period", type=int, default=None)
    p.add_argument("--weight-limit", type=int, default=32)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("tabu", parents=[common, search_flags], help="best-first tabu search")
    p.add_argument("--stagnation", type=int, default=TabuConfig.stagnation_limit)
    p.add_argument("--frontier-cap", type=int, default=TabuConfig.frontier_capacity)
    p.set_defaults(func=cmd_tabu)

    p = sub.add_parser("bound", parents=[common], help="upper bound on S(n) with its witness chain")
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("table", parents=[common], help="known lower bounds on S(n,k)")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--k", type=int, default=None)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("reduce-info", parents=[common], help="reduced grid statistics for a composition")
    p.add_argument("--composition", required=True)
    p.add_argument("--n", type=int, default=None)
    p.set_defaults(func=cmd_reduce_info)

    p = sub.add_parser("fixtures", parents=[common], help="list or export embedded constructions")
    p.add_argument("--name", default=None, choices=sorted(FIXTURES))
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_fixtures)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.selftest:
        return run_selftest(args.json)
    if not args.command:
        parser.print_help()
        return EXIT_ERROR
    try:
        return args.func(args)
    except ConstructionFormatError as exc:
        print(f"error: {args.file}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (InvalidInput, ResourceGuard, DegenerateConfig, NotFound, OSError, KeyError, ValueError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
