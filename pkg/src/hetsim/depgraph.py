"""Task dependency graph reconstruction from a sequential trace.

Replays the trace in program order against a region registry (last writer
plus the readers seen since that write), the way a dataflow runtime resolves
in/out/inout annotations into RAW/WAR/WAW ordering edges. Two region-matching
rules are supported: exact base-address equality (the default, matching
whole-block pointers) and byte-range overlap.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .trace import Dependence, TaskTrace

MATCHING_MODES = ("exact_base", "overlap")


class DepKind(str, Enum):
    RAW = "RAW"
    WAR = "WAR"
    WAW = "WAW"


# Reporting strength when several kinds connect the same task pair.
_STRENGTH = {DepKind.RAW: 3, DepKind.WAW: 2, DepKind.WAR: 1}


@dataclass(frozen=True)
class DepEdge:
    src: int
    dst: int
    kind: DepKind
    addr: int


@dataclass(frozen=True)
class TaskGraph:
    trace: TaskTrace
    edges: tuple[DepEdge, ...]
    preds: tuple[tuple[int, ...], ...]
    succs: tuple[tuple[int, ...], ...]

    @property
    def tasks(self):
        return self.trace.tasks

    @property
    def n_tasks(self) -> int:
        return len(self.trace.tasks)


class _EdgeCollector:
    """Collapses duplicate (src, dst) pairs, keeping the strongest kind."""

    def __init__(self):
        self._best: dict[tuple[int, int], tuple[DepKind, int]] = {}

    def add(self, src: int, dst: int, kind: DepKind, addr: int) -> None:
        if src == dst:
            return  # a task never depends on itself (inout reads its own write)
        current = self._best.get((src, dst))
        if current is None or _STRENGTH[kind] > _STRENGTH[current[0]]:
            self._best[(src, dst)] = (kind, addr)

    def edges(self) -> tuple[DepEdge, ...]:
        return tuple(
            DepEdge(src, dst, kind, addr)
            for (src, dst), (kind, addr) in sorted(self._best.items())
        )


def _replay_exact(trace: TaskTrace, collect: _EdgeCollector) -> None:
    writer: dict[int, int] = {}
    readers: dict[int, set[int]] = {}
    for task in trace.tasks:
        for dep in task.deps:
            if dep.direction.reads:
                w = writer.get(dep.addr)
                if w is not None:
                    collect.add(w, task.id, DepKind.RAW, dep.addr)
                readers.setdefault(dep.addr, set()).add(task.id)
            if dep.direction.writes:
                for r in readers.get(dep.addr, ()):
                    collect.add(r, task.id, DepKind.WAR, dep.addr)
                w = writer.get(dep.addr)
                if w is not None:
                    collect.add(w, task.id, DepKind.WAW, dep.addr)
                writer[dep.addr] = task.id
                readers[dep.addr] = set()


@dataclass
class _Span:
    lo: int
    hi: int
    writer: int | None
    readers: set[int]


class _OverlapRegistry:
    """Byte-granular registry kept as disjoint sorted spans."""

    def __init__(self):
        self.spans: list[_Span] = []

    def _split(self, lo: int, hi: int) -> list[_Span]:
        """Cut span boundaries at lo/hi; return spans fully inside [lo, hi)."""
        rebuilt: list[_Span] = []
        inside: list[_Span] = []
        for s in self.spans:
            if s.hi <= lo or s.lo >= hi:
                rebuilt.append(s)
                continue
            if s.lo < lo:
                rebuilt.append(_Span(s.lo, lo, s.writer, set(s.readers)))
            mid = _Span(max(s.lo, lo), min(s.hi, hi), s.writer, set(s.readers))
            rebuilt.append(mid)
            inside.append(mid)
            if s.hi > hi:
                rebuilt.append(_Span(hi, s.hi, s.writer, set(s.readers)))
        self.spans = rebuilt
        return inside

    def read(self, task: int, lo: int, hi: int, addr: int, collect: _EdgeCollector) -> None:
        inside = self._split(lo, hi)
        for s in inside:
            if s.writer is not None:
                collect.add(s.writer, task, DepKind.RAW, addr)
            s.readers.add(task)
        self._fill_gaps(task, lo, hi, inside)

    def write(self, task: int, lo: int, hi: int, addr: int, collect: _EdgeCollector) -> None:
        inside = self._split(lo, hi)
        for s in inside:
            for r in s.readers:
                collect.add(r, task, DepKind.WAR, addr)
            if s.writer is not None:
                collect.add(s.writer, task, DepKind.WAW, addr)
        self.spans = [s for s in self.spans if not (lo <= s.lo and s.hi <= hi)]
        self._insert(_Span(lo, hi, task, set()))

    def _fill_gaps(self, task: int, lo: int, hi: int, inside: list[_Span]) -> None:
        cursor = lo
        for s in sorted(inside, key=lambda s: s.lo):
            if s.lo > cursor:
                self._insert(_Span(cursor, s.lo, None, {task}))
            cursor = s.hi
        if cursor < hi:
            self._insert(_Span(cursor, hi, None, {task}))

    def _insert(self, span: _Span) -> None:
        self.spans.append(span)
        self.spans.sort(key=lambda s: s.lo)


def _replay_overlap(trace: TaskTrace, collect: _EdgeCollector) -> None:
    registry = _OverlapRegistry()
    for task in trace.tasks:
        for dep in task.deps:
            lo, hi = dep.addr, dep.addr + dep.length
            if dep.direction.reads:
                registry.read(task.id, lo, hi, dep.addr, collect)
            if dep.direction.writes:
                registry.write(task.id, lo, hi, dep.addr, collect)


def _check_matching(matching: str) -> None:
    if matching not in MATCHING_MODES:
        raise ValueError(f"unknown matching mode {matching!r}, expected one of {MATCHING_MODES}")


def build_graph(trace: TaskTrace, matching: str = "exact_base") -> TaskGraph:
    """Reconstruct the dependency DAG the runtime would enforce.

    Processing tasks in program order: a read takes a RAW edge from the
    region's last writer; a write takes WAR edges from the readers since
    that write and a WAW edge from the writer, then becomes the new last
    writer. inout is read-then-write within the same task. Edges always
    point forward in program order, so the result is acyclic and the
    identity order is a valid topological order.
    """
    _check_matching(matching)
    collect = _EdgeCollector()
    if matching == "exact_base":
        _replay_exact(trace, collect)
    else:
        _replay_overlap(trace, collect)
    edges = collect.edges()
    n = len(trace.tasks)
    preds: list[set[int]] = [set() for _ in range(n)]
    succs: list[set[int]] = [set() for _ in range(n)]
    for e in edges:
        preds[e.dst].add(e.src)
        succs[e.src].add(e.dst)
    return TaskGraph(
        trace=trace,
        edges=edges,
        preds=tuple(tuple(sorted(p)) for p in preds),
        succs=tuple(tuple(sorted(s)) for s in succs),
    )


def _regions_match(a: Dependence, b: Dependence, matching: str) -> bool:
    if matching == "exact_base":
        return a.addr == b.addr
    return max(a.addr, b.addr) < min(a.addr + a.length, b.addr + b.length)


def conflict_oracle(trace: TaskTrace, matching: str = "exact_base") -> tuple[DepEdge, ...]:
    """Quadratic all-pairs reference for :func:`build_graph`.

    For every ordered task pair i < j and every region pair with at least
    one writer, emit the corresponding edge directly; no registry and no
    transitive reduction. O(n^2 * d^2), intended for small traces; the
    comparison against build_graph is on transitive closures.
    """
    _check_matching(matching)
    collect = _EdgeCollector()
    tasks = trace.tasks
    for j in range(len(tasks)):
        for i in range(j):
            for di in tasks[i].deps:
                for dj in tasks[j].deps:
                    if not _regions_match(di, dj, matching):
                        continue
                    if di.direction.writes and dj.direction.reads:
                        collect.add(i, j, DepKind.RAW, dj.addr)
                    if di.direction.writes and dj.direction.writes:
                        collect.add(i, j, DepKind.WAW, dj.addr)
                    if di.direction.reads and dj.direction.writes:
                        collect.add(i, j, DepKind.WAR, dj.addr)
    return collect.edges()


def export_dot(graph: TaskGraph, path: str | Path) -> None:
    """Write the graph as GraphViz DOT, one node per task ("kernel#id")."""
    if graph.n_tasks == 0:
        Path(path).write_text("digraph G {}\n")
        return
    lines = ["digraph G {"]
    for task in graph.tasks:
        lines.append(f'  t{task.id} [label="{task.kernel}#{task.id}"];')
    for e in graph.edges:
        lines.append(f'  t{e.src} -> t{e.dst} [label="{e.kind.value}"];')
    lines.append("}")
    Path(path).write_text("\n".join(lines) + "\n")
