import random

import pytest
from hypothesis import given, settings, strategies as st

from hetsim.depgraph import DepKind, build_graph, conflict_oracle, export_dot
from hetsim.trace import Dependence, Direction, TaskRecord, TaskTrace
from hetsim.workloads import cholesky_spec, gen_cholesky, gen_matmul, matmul_spec

from helpers import closure, random_trace


def make_trace(*task_deps):
    tasks = tuple(
        TaskRecord(i, "k", 1, frozenset({"smp"}), tuple(deps))
        for i, deps in enumerate(task_deps)
    )
    return TaskTrace(1000.0, tasks)


def test_single_task_no_edges():
    graph = build_graph(make_trace([Dependence(0x10, Direction.INOUT)]))
    assert graph.edges == ()


def test_textbook_raw():
    trace = make_trace([Dependence(0x100, Direction.OUT)], [Dependence(0x100, Direction.IN)])
    graph = build_graph(trace)
    assert len(graph.edges) == 1
    e = graph.edges[0]
    assert (e.src, e.dst, e.kind) == (0, 1, DepKind.RAW)


def test_war_then_waw():
    trace = make_trace(
        [Dependence(0x10, Direction.IN)],
        [Dependence(0x10, Direction.OUT)],
        [Dependence(0x10, Direction.OUT)],
    )
    graph = build_graph(trace)
    kinds = {(e.src, e.dst): e.kind for e in graph.edges}
    assert kinds == {(0, 1): DepKind.WAR, (1, 2): DepKind.WAW}


def test_registry_clears_readers_after_write():
    # After task 1 rewrites the region, the pre-write reader (task 0) must
    # not receive edges from later tasks through it.
    trace = make_trace(
        [Dependence(0x10, Direction.IN)],
        [Dependence(0x10, Direction.OUT)],
        [Dependence(0x10, Direction.OUT)],
        [Dependence(0x10, Direction.IN)],
    )
    graph = build_graph(trace)
    assert all(e.src != 0 or e.dst == 1 for e in graph.edges)
    assert (0, 1) in {(e.src, e.dst) for e in graph.edges}


def test_read_read_independence():
    trace = make_trace(
        [Dependence(0x10, Direction.IN)],
        [Dependence(0x10, Direction.IN)],
        [Dependence(0x10, Direction.IN)],
    )
    assert build_graph(trace).edges == ()
    assert conflict_oracle(trace) == ()


def test_matmul_nb2_exactly_4_chain_edges():
    trace = gen_matmul(matmul_spec(2))
    graph = build_graph(trace)
    assert len(graph.edges) == 4
    # one RAW edge per C block, from the k=0 task to the k=1 task of (i, j)
    expected = {(i * 2 + j, 4 + i * 2 + j) for i in range(2) for j in range(2)}
    assert {(e.src, e.dst) for e in graph.edges} == expected
    assert all(e.kind is DepKind.RAW for e in graph.edges)
    assert closure(8, graph.edges) == closure(8, conflict_oracle(trace))


def test_matmul_nb4_per_block_chains():
    trace = gen_matmul(matmul_spec(4))
    graph = build_graph(trace)
    nb = 4
    expected = set()
    for i in range(nb):
        for j in range(nb):
            for k in range(nb - 1):
                expected.add((k * nb * nb + i * nb + j, (k + 1) * nb * nb + i * nb + j))
    assert {(e.src, e.dst) for e in graph.edges} == expected


def test_cholesky_nb2_chain():
    trace = gen_cholesky(cholesky_spec(2))
    assert [t.kernel for t in trace.tasks] == ["dpotrf", "dtrsm", "dsyrk", "dpotrf"]
    graph = build_graph(trace)
    assert [(e.src, e.dst) for e in graph.edges] == [(0, 1), (1, 2), (2, 3)]
    assert closure(4, graph.edges) == closure(4, conflict_oracle(trace))


def test_oracle_two_writers_same_address():
    trace = make_trace([Dependence(0x20, Direction.OUT)], [Dependence(0x20, Direction.OUT)])
    edges = conflict_oracle(trace)
    assert len(edges) == 1 and edges[0].kind is DepKind.WAW


def test_oracle_disjoint_addresses_empty():
    trace = make_trace([Dependence(0x20, Direction.OUT)], [Dependence(0x40, Direction.INOUT)])
    assert conflict_oracle(trace) == ()


def test_overlap_mode_sees_range_conflicts():
    # Bases differ, but [0x100,0x108) and [0x104,0x10c) intersect.
    trace = make_trace(
        [Dependence(0x100, Direction.OUT, 8)], [Dependence(0x104, Direction.IN, 8)]
    )
    assert build_graph(trace, "exact_base").edges == ()
    edges = build_graph(trace, "overlap").edges
    assert len(edges) == 1 and edges[0].kind is DepKind.RAW


def test_overlap_partial_supersede_keeps_old_writer_visible():
    # Task 1 overwrites only the low half of task 0's region; a reader of
    # the untouched high half still depends on task 0.
    trace = make_trace(
        [Dependence(0x100, Direction.OUT, 16)],
        [Dependence(0x100, Direction.OUT, 8)],
        [Dependence(0x108, Direction.IN, 8)],
    )
    graph = build_graph(trace, "overlap")
    pairs = {(e.src, e.dst) for e in graph.edges}
    assert (0, 2) in pairs
    assert (1, 2) not in pairs
    assert closure(3, graph.edges) == closure(3, conflict_oracle(trace, "overlap"))


def test_unknown_matching_rejected():
    with pytest.raises(ValueError, match="matching"):
        build_graph(make_trace(), "fuzzy")


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from(["exact_base", "overlap"]))
def test_closure_equivalence_random(seed, matching):
    rng = random.Random(seed)
    trace = random_trace(rng)
    n = len(trace.tasks)
    built = build_graph(trace, matching)
    assert all(e.src < e.dst for e in built.edges)
    assert closure(n, built.edges) == closure(n, conflict_oracle(trace, matching))


def test_export_dot_empty(tmp_path):
    graph = build_graph(TaskTrace(1000.0))
    path = tmp_path / "g.dot"
    export_dot(graph, path)
    assert path.read_text().strip() == "digraph G {}"


def test_export_dot_chain(tmp_path):
    trace = make_trace([Dependence(0x10, Direction.OUT)], [Dependence(0x10, Direction.IN)])
    path = tmp_path / "g.dot"
    export_dot(build_graph(trace), path)
    text = path.read_text()
    assert 't0 [label="k#0"];' in text
    assert 't1 [label="k#1"];' in text
    assert 't0 -> t1 [label="RAW"];' in text


def test_export_dot_cholesky_nb4_20_nodes(tmp_path):
    trace = gen_cholesky(cholesky_spec(4))
    path = tmp_path / "chol.dot"
    export_dot(build_graph(trace), path)
    text = path.read_text()
    assert sum(1 for line in text.splitlines() if "[label=" in line and "->" not in line) == 20
    for kernel, count in (("dpotrf", 4), ("dsyrk", 6), ("dgemm", 4), ("dtrsm", 6)):
        assert sum(1 for line in text.splitlines() if f'"{kernel}#' in line) == count
