"""``graphprox`` command line: build, bench, match, stats, gen-grid."""

from __future__ import annotations

import argparse
import logging
import sys
import time
import zipfile

import numpy as np

from . import bench as B
from .generators import grid_graph
from .graph import Graph, dijkstra, largest_connected_component, read_dimacs, to_dimacs
from .hierarchy import Hierarchy, MemoryCapExceeded, build, load, save
from .matching import greedy_stable_matching, verify_stability
from .reactive import ReactiveNN

log = logging.getLogger("graphprox")


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # usage errors exit with 1 like every other failure
        self.exit(1, f"{self.prog}: error: {message}\n")


def _is_hierarchy(path: str) -> bool:
    return zipfile.is_zipfile(path)


def _load_inputs(gr: str, second: str, need_hierarchy: bool, base_case: int = 20,
                 strategy: str = "median") -> tuple[Graph, Hierarchy | None]:
    """Graph plus hierarchy from ``gr`` and either a ``.co`` file or a saved hierarchy."""
    if _is_hierarchy(second):
        h = load(second)
        g = largest_connected_component(read_dimacs(gr))
        if g.n != h.graph.n or g.arc_count != h.graph.arc_count:
            raise CliError(f"hierarchy {second} was built for a different graph "
                           f"({h.graph.n} nodes, {gr} has {g.n} in its largest component)")
        return h.graph, h
    g = largest_connected_component(read_dimacs(gr, second))
    h = None
    if need_hierarchy:
        t0 = time.perf_counter()
        h = build(g, strategy, base_case)
        log.info("built hierarchy in %.1f s", time.perf_counter() - t0)
    return g, h


def _print_stats(h: Hierarchy, out) -> None:
    s = h.stats()
    print(f"graph nodes:      {s['nodes']}", file=out)
    print(f"hierarchy nodes:  {s['total_nodes']} across {s['graphs']} graphs", file=out)
    print(f"depth:            {s['depth']}", file=out)
    print(f"max separator:    {s['max_separator']}", file=out)
    print(f"base leaves:      {s['base_leaves']}", file=out)
    print(f"table entries:    {s['table_entries']} ({h.table_nbytes() / 2**20:.1f} MiB)", file=out)


def _site_counts(text: str) -> tuple:
    try:
        counts = tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise CliError(f"--sites expects comma separated integers, got {text!r}") from None
    if not counts:
        raise CliError("--sites must list at least one count")
    return counts


def cmd_build(a) -> int:
    g = largest_connected_component(read_dimacs(a.gr, a.co))
    t0 = time.perf_counter()
    h = build(g, a.strategy, a.base_case, mem_cap=a.mem_cap)
    elapsed = time.perf_counter() - t0
    save(h, a.out)
    print(f"built in {elapsed:.1f} s, wrote {a.out}")
    _print_stats(h, sys.stdout)
    return 0


def cmd_stats(a) -> int:
    _print_stats(load(a.hier), sys.stdout)
    return 0


def cmd_bench(a) -> int:
    engines = [e.strip() for e in a.engines.split(",") if e.strip()]
    bad = [e for e in engines if e not in B.ENGINES]
    if bad:
        raise CliError(f"unknown engine {bad[0]!r}; choose from {', '.join(B.ENGINES)}")
    spec = B.WorkloadSpec(a.kind, a.ops, _site_counts(a.sites), a.runs, a.seed)
    need_h = any(e != "dijkstra-baseline" for e in engines)
    g, h = _load_inputs(a.gr, a.second, need_h, a.base_case, a.strategy)
    too_big = [c for c in spec.site_counts if c > g.n]
    if too_big:
        raise CliError(f"site count {too_big[0]} exceeds the {g.n} graph nodes")

    def progress(count, run):
        log.info("sites=%d run=%d done", count, run)

    report = B.run_benchmark(g, spec, engines, h, progress)
    if a.csv:
        with open(a.csv, "w", newline="") as fh:
            report.write_csv(fh)
    else:
        report.write_csv(sys.stdout)
    for count in spec.site_counts:
        sums = {report.row(count, e).checksum for e in engines}
        if len(sums) > 1:
            print(f"warning: engines disagree at {count} sites", file=sys.stderr)
            return 1
    return 0


def cmd_match(a) -> int:
    g, h = _load_inputs(a.gr, a.second, True, a.base_case, a.strategy)
    if not 0 <= a.sites <= g.n:
        raise CliError(f"--sites must be between 0 and {g.n}")
    rng = np.random.Generator(np.random.PCG64(a.seed))
    sites = np.sort(rng.choice(g.n, size=a.sites, replace=False)).tolist()
    r = ReactiveNN(h, sites)
    t0 = time.perf_counter()
    m = greedy_stable_matching(r, sites)
    elapsed = time.perf_counter() - t0
    blocking = verify_stability(g, m)
    partner_d = sorted(float(np.round(d, 6)) for d in _pair_dists(g, m))
    print(f"pairs: {len(m.pairs)}  unmatched: {m.unmatched if m.unmatched is not None else '-'}")
    print(f"nearest queries: {m.nn_queries}  disables: {m.disables}  time: {elapsed * 1000:.1f} ms")
    if partner_d:
        print(f"pair distance min/median/max: {partner_d[0]:g} / "
              f"{partner_d[len(partner_d) // 2]:g} / {partner_d[-1]:g}")
    print(f"blocking pairs: {len(blocking)}")
    return 0 if not blocking else 1


def _pair_dists(g: Graph, m):
    for a, b in m.pairs:
        yield dijkstra(g, a)[b]


def cmd_gen_grid(a) -> int:
    rng = np.random.default_rng(a.seed) if a.random_weights else None
    g = grid_graph(a.rows, a.cols, rng=rng)
    gr, co = to_dimacs(g)
    with open(a.prefix + ".gr", "w") as fh:
        fh.write(gr)
    with open(a.prefix + ".co", "w") as fh:
        fh.write(co)
    print(f"wrote {a.prefix}.gr and {a.prefix}.co ({g.n} nodes, {g.edge_count} edges)")
    return 0


def make_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="graphprox", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def add_build_opts(sp):
        sp.add_argument("--base-case", type=int, default=20)
        sp.add_argument("--strategy", choices=("median", "centroid"), default="median")

    sp = sub.add_parser("build", help="build and save a separator hierarchy")
    sp.add_argument("gr")
    sp.add_argument("co")
    sp.add_argument("--out", required=True)
    sp.add_argument("--mem-cap", type=int, default=None, metavar="BYTES")
    add_build_opts(sp)
    sp.set_defaults(func=cmd_build)

    sp = sub.add_parser("bench", help="time engines on seeded workloads, emit CSV")
    sp.add_argument("gr")
    sp.add_argument("second", metavar="co|hier")
    sp.add_argument("--kind", choices=B.KINDS, default="mixed")
    sp.add_argument("--ops", type=int, default=1000)
    sp.add_argument("--sites", default=",".join(str(2 ** i) for i in range(1, 15)))
    sp.add_argument("--runs", type=int, default=5)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--engines", default=",".join(B.ENGINES))
    sp.add_argument("--csv", default=None)
    add_build_opts(sp)
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("match", help="greedy stable matching on random sites")
    sp.add_argument("gr")
    sp.add_argument("second", metavar="co|hier")
    sp.add_argument("--sites", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    add_build_opts(sp)
    sp.set_defaults(func=cmd_match)

    sp = sub.add_parser("stats", help="print hierarchy figures")
    sp.add_argument("hier")
    sp.set_defaults(func=cmd_stats)

    sp = sub.add_parser("gen-grid", help="write a grid graph as DIMACS .gr/.co")
    sp.add_argument("rows", type=int)
    sp.add_argument("cols", type=int, nargs="?")
    sp.add_argument("--out", dest="prefix", required=True, metavar="PREFIX")
    sp.add_argument("--random-weights", action="store_true")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_gen_grid)
    return p


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s")
    try:
        return args.func(args)
    except MemoryCapExceeded as exc:
        print(f"error: refusing to build: memory estimate {exc.estimate} bytes exceeds "
              f"--mem-cap {exc.cap}", file=sys.stderr)
    except (CliError, ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return 1


if __name__ == "__main__":
    sys.exit(main())
