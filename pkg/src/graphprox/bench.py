"""Seeded workloads and timing of the nearest-site engines.

A workload starts from ``site_count`` uniformly random sites and then runs a
fixed operation list: only queries, only updates (enable/disable
alternating), or queries alternating with updates. The same seed yields the
same site sets and operations for every engine, so query answers can be
compared across engines through a checksum.
"""

from __future__ import annotations

import csv
import gc
import hashlib
import time
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from . import _kernels as K
from .graph import Graph
from .hierarchy import Hierarchy
from .reactive import ReactiveNN

KINDS = ("queries", "updates", "mixed")
ENGINES = ("dijkstra-baseline", "separator", "separator-optimized")
QUERY, ENABLE, DISABLE = 0, 1, 2
CSV_HEADER = ("site_count", "engine", "avg_ms", "min_ms", "max_ms", "checksum")


@dataclass(frozen=True)
class WorkloadSpec:
    kind: str = "mixed"
    op_count: int = 1000
    site_counts: tuple = (2,)
    runs: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.op_count <= 0 or self.runs <= 0:
            raise ValueError("op_count and runs must be positive")
        if not self.site_counts:
            raise ValueError("site_counts must not be empty")
        if any(c < 0 for c in self.site_counts):
            raise ValueError("site counts must be non-negative")


@dataclass(frozen=True)
class Workload:
    initial_sites: np.ndarray
    ops: list  # (op code, node) pairs


def _rng(seed: int, site_count: int, run: int) -> np.random.Generator:
    # PCG64 seeded through SeedSequence: a fixed, documented generator
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, site_count, run])))


def op_kinds(kind: str, op_count: int) -> list:
    if kind == "queries":
        return [QUERY] * op_count
    if kind == "updates":
        return [ENABLE if i % 2 == 0 else DISABLE for i in range(op_count)]
    out = []
    for i in range(op_count):
        if i % 2 == 0:
            out.append(QUERY)
        else:
            out.append(ENABLE if (i // 2) % 2 == 0 else DISABLE)
    return out


def generate_workload(spec: WorkloadSpec, n: int, site_count: int, run: int = 0) -> Workload:
    """Initial sites and operation list for one ``(site_count, run)`` cell."""
    if site_count > n:
        raise ValueError(f"site count {site_count} exceeds the {n} graph nodes")
    rng = _rng(spec.seed, site_count, run)
    initial = np.sort(rng.choice(n, size=site_count, replace=False)) if site_count else \
        np.empty(0, dtype=np.int64)
    enabled = initial.tolist()
    slot = {v: i for i, v in enumerate(enabled)}
    ops = []
    for code in op_kinds(spec.kind, spec.op_count):
        if code == QUERY:
            ops.append((QUERY, int(rng.integers(n))))
        elif code == ENABLE:
            if len(enabled) >= n:
                v = int(rng.integers(n))  # everything enabled: a no-op enable
            else:
                v = int(rng.integers(n))
                while v in slot:
                    v = int(rng.integers(n))
                slot[v] = len(enabled)
                enabled.append(v)
            ops.append((ENABLE, v))
        else:
            if not enabled:
                ops.append((DISABLE, int(rng.integers(n))))
                continue
            i = int(rng.integers(len(enabled)))
            v = enabled[i]
            last = enabled.pop()
            if last != v:
                enabled[i] = last
                slot[last] = i
            del slot[v]
            ops.append((DISABLE, v))
    return Workload(initial, ops)


# -- engines -------------------------------------------------------------------


class DijkstraEngine:
    """Plain Dijkstra from the query node; updates just flip a flag."""

    name = "dijkstra-baseline"

    def __init__(self, g: Graph, sites: Iterable[int] = ()):
        self.g = g
        self.enabled = np.zeros(g.n, dtype=np.uint8)
        self.enabled[np.asarray(list(sites), dtype=np.int64)] = 1
        self._gids = np.arange(g.n, dtype=np.int64)
        self._indices = g.indices.astype(np.int64)
        self._dist = np.full(g.n, np.inf)
        self._done = np.zeros(g.n, dtype=np.uint8)
        self._touched = np.empty(g.n, dtype=np.int64)
        self._hd = np.empty(g.arc_count + 1)
        self._hu = np.empty(g.arc_count + 1, dtype=np.int64)

    def query(self, q: int):
        site, d = K.dijkstra_nearest(q, 0, self.g.indptr, self._indices, self.g.weights,
                                     self._gids, self.enabled, self._dist, self._done,
                                     self._touched, self._hd, self._hu)
        return (int(site), float(d)) if site >= 0 else None

    def run(self, codes, targets):
        nq = int((codes == 0).sum())
        sites, dists = np.empty(nq, dtype=np.int64), np.empty(nq)
        K.run_dijkstra_ops(codes, targets, self.g.indptr, self._indices, self.g.weights,
                           self._gids, self.enabled, self._dist, self._done, self._touched,
                           self._hd, self._hu, sites, dists)
        return sites, dists

    def enable(self, p: int) -> bool:
        was = self.enabled[p]
        self.enabled[p] = 1
        return not was

    def disable(self, p: int) -> bool:
        was = self.enabled[p]
        self.enabled[p] = 0
        return bool(was)


class SeparatorEngine:
    def __init__(self, h: Hierarchy, sites: Iterable[int] = (), optimized: bool = True):
        self.name = "separator-optimized" if optimized else "separator"
        self.optimized = optimized
        self.r = ReactiveNN(h, sites)

    def query(self, q: int):
        ans = self.r.nearest(q, self.optimized)
        return None if ans is None else (ans.site, ans.dist)

    def run(self, codes, targets):
        return self.r.apply(codes, targets, self.optimized)

    def enable(self, p: int) -> bool:
        return self.r.enable(p)

    def disable(self, p: int) -> bool:
        return self.r.disable(p)


def make_engine(name: str, g: Graph, h: Optional[Hierarchy], sites):
    if name == "dijkstra-baseline":
        return DijkstraEngine(g, sites)
    if name in ("separator", "separator-optimized"):
        if h is None:
            raise ValueError(f"engine {name!r} needs a hierarchy; build one first "
                             "(graphprox build ...)")
        return SeparatorEngine(h, sites, optimized=name == "separator-optimized")
    raise ValueError(f"unknown engine {name!r}; choose from {ENGINES}")


# -- running -------------------------------------------------------------------


@dataclass(frozen=True)
class ReportRow:
    site_count: int
    engine: str
    avg_ms: float
    min_ms: float
    max_ms: float
    checksum: str


@dataclass
class WorkloadReport:
    spec: WorkloadSpec
    rows: list = field(default_factory=list)
    times: dict = field(default_factory=dict)  # (site_count, engine) -> per-run ms

    def row(self, site_count: int, engine: str) -> ReportRow:
        for r in self.rows:
            if r.site_count == site_count and r.engine == engine:
                return r
        raise KeyError((site_count, engine))

    def write_csv(self, fh) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow([r.site_count, r.engine, f"{r.avg_ms:.3f}", f"{r.min_ms:.3f}",
                        f"{r.max_ms:.3f}", r.checksum])


def encode_ops(ops: Sequence) -> tuple:
    arr = np.asarray(ops, dtype=np.int64).reshape(-1, 2)
    return np.ascontiguousarray(arr[:, 0]), np.ascontiguousarray(arr[:, 1])


def run_ops(engine, ops: Sequence) -> tuple:
    """Run ``ops`` on ``engine`` in one batch.

    Returns ``(elapsed seconds, sites, dists)``; only the batch call is timed.
    """
    codes, targets = encode_ops(ops)
    engine.run(codes[:0], targets[:0])  # warm-up: loads the compiled kernel
    gc_was = gc.isenabled()
    gc.disable()
    try:
        t0 = time.perf_counter()
        sites, dists = engine.run(codes, targets)
        elapsed = time.perf_counter() - t0
    finally:
        if gc_was:
            gc.enable()
    return elapsed, sites, dists


def answers_digest(h, sites: np.ndarray, dists: np.ndarray) -> None:
    """Fold query answers into a running hash (unanswered queries are ``(-1, inf)``)."""
    h.update(np.ascontiguousarray(sites, dtype="<i8").tobytes())
    h.update(np.ascontiguousarray(dists, dtype="<f8").tobytes())


def run_benchmark(g: Graph, spec: WorkloadSpec, engines: Sequence[str],
                  hierarchy: Optional[Hierarchy] = None, progress=None) -> WorkloadReport:
    """Time every engine on every ``(site_count, run)`` cell of ``spec``.

    Only the operation loop is timed; building each engine's site set is not.
    """
    for e in engines:
        if e not in ENGINES:
            raise ValueError(f"unknown engine {e!r}; choose from {ENGINES}")
        if e != "dijkstra-baseline" and hierarchy is None:
            raise ValueError(f"engine {e!r} needs a hierarchy; build one first")
    report = WorkloadReport(spec)
    for count in spec.site_counts:
        times = {e: [] for e in engines}
        digests = {e: hashlib.blake2b(digest_size=8) for e in engines}
        for run in range(spec.runs):
            wl = generate_workload(spec, g.n, count, run)
            for e in engines:
                engine = make_engine(e, g, hierarchy, wl.initial_sites)
                elapsed, sites, dists = run_ops(engine, wl.ops)
                del engine
                times[e].append(elapsed * 1000.0)
                answers_digest(digests[e], sites, dists)
            if progress:
                progress(count, run)
        for e in engines:
            ts = times[e]
            report.times[(count, e)] = ts
            avg = min(max(sum(ts) / len(ts), min(ts)), max(ts))  # guard float rounding
            report.rows.append(ReportRow(count, e, avg, min(ts), max(ts),
                                         digests[e].hexdigest()))
    return report
