import random

import pytest

from hetsim.depgraph import build_graph
from hetsim.expansion import augment
from hetsim.engine import DeviceKind, build_devices, critical_path, simulate
from hetsim.platform import AcceleratorSpec, KernelProfile, PlatformConfig
from hetsim.trace import Dependence, Direction, TaskRecord, TaskTrace

from helpers import (
    GOLDEN_MAKESPAN_PS,
    GOLDEN_TIMELINE,
    assert_no_device_overlap,
    assert_publication_order,
    golden_fixture,
    random_config,
    random_trace,
    timeline_rows,
)

US = 1_000_000  # ps


def smp_chain_trace(cycles_list, addr=0x100):
    tasks = tuple(
        TaskRecord(
            i,
            "k",
            cycles,
            frozenset({"smp"}),
            (Dependence(addr, Direction.INOUT, 4),),
        )
        for i, cycles in enumerate(cycles_list)
    )
    return TaskTrace(1000.0, tasks)


def run(trace, config):
    sim = augment(build_graph(trace), config)
    return sim, simulate(sim, config)


def test_single_task_100ns():
    trace = TaskTrace(1000.0, (TaskRecord(0, "k", 100, frozenset({"smp"})),))
    _, result = run(trace, PlatformConfig(creation_overhead_ns=0))
    assert result.makespan_ps == 100_000


def test_chain_serializes_regardless_of_workers():
    trace = smp_chain_trace([1000, 2000, 3000])
    for workers in (1, 4):
        _, result = run(trace, PlatformConfig(smp_workers=workers, creation_overhead_ns=0))
        assert result.makespan_ps == 6 * US


def test_independent_tasks_pack():
    tasks = tuple(
        TaskRecord(i, "k", 1000, frozenset({"smp"}), (Dependence(0x100 + i, Direction.OUT),))
        for i in range(4)
    )
    trace = TaskTrace(1000.0, tasks)
    _, result = run(trace, PlatformConfig(smp_workers=2, creation_overhead_ns=0))
    assert result.makespan_ps == 2 * US


def test_golden_fixture_timeline():
    trace, config = golden_fixture()
    _, result = run(trace, config)
    assert result.makespan_ps == GOLDEN_MAKESPAN_PS
    assert timeline_rows(result) == GOLDEN_TIMELINE


def test_golden_fixture_deterministic():
    trace, config = golden_fixture()
    _, r1 = run(trace, config)
    _, r2 = run(trace, config)
    assert r1.timeline == r2.timeline
    assert repr(r1) == repr(r2)


def test_device_inventory():
    config = PlatformConfig(
        smp_workers=3,
        accelerators=[AcceleratorSpec("a", 2), AcceleratorSpec("b", 1)],
        profiles={
            "a": KernelProfile("a", 10, 0, 0, 100.0),
            "b": KernelProfile("b", 10, 0, 0, 100.0),
        },
    )
    devices = build_devices(config)
    kinds = [d.kind for d in devices]
    assert kinds == [
        DeviceKind.SMP_MAIN,
        DeviceKind.SMP_WORKER,
        DeviceKind.SMP_WORKER,
        DeviceKind.ACCEL,
        DeviceKind.ACCEL,
        DeviceKind.ACCEL,
        DeviceKind.SUBMIT_UNIT,
        DeviceKind.OUTPUT_DMA_UNIT,
    ]
    assert [d.label for d in devices if d.kind is DeviceKind.ACCEL] == [
        "accel_a_0",
        "accel_a_1",
        "accel_b_0",
    ]


def test_accel_preferred_over_idle_smp():
    trace = TaskTrace(
        1000.0,
        (TaskRecord(0, "k", 10_000, frozenset({"smp", "fpga"})),),
    )
    config = PlatformConfig(
        smp_workers=2,
        creation_overhead_ns=0,
        submit_cost_ns=0,
        accelerators=[AcceleratorSpec("k", 1)],
        profiles={"k": KernelProfile("k", 100, 0, 10, 1000.0)},
    )
    _, result = run(trace, config)
    assert result.dispatch_counts["k"]["fpga"] == 1
    assert result.dispatch_counts["k"]["smp"] == 0


def test_creation_beats_compute_on_smp_main():
    # Two tasks, one worker pool of just smp_main: after c0 finishes, both
    # c1 and compute0 are ready; the creation must win the main thread.
    trace = TaskTrace(
        1000.0,
        (
            TaskRecord(0, "k", 1000, frozenset({"smp"})),
            TaskRecord(1, "k", 1000, frozenset({"smp"})),
        ),
    )
    config = PlatformConfig(smp_workers=1, creation_overhead_ns=100)
    _, result = run(trace, config)
    rows = timeline_rows(result)
    # creations occupy [0,100) and [100,200); computes follow serially
    assert rows[0][:1] == ("creation:k",) and rows[0][3:] == (0, 100_000)
    assert rows[1][:1] == ("creation:k",) and rows[1][3:] == (100_000, 200_000)
    assert result.makespan_ps == 200_000 + 2_000_000


def test_smp_main_runs_compute_when_no_creation_pending():
    trace = TaskTrace(
        1000.0,
        tuple(
            TaskRecord(i, "k", 1000, frozenset({"smp"}), (Dependence(0x10 + i, Direction.OUT),))
            for i in range(2)
        ),
    )
    config = PlatformConfig(smp_workers=1, creation_overhead_ns=0)
    _, result = run(trace, config)
    # both computes run on smp_main back to back
    assert result.makespan_ps == 2 * US


def test_heterogeneous_greedy_uses_smp_and_never_beats_fpga_only():
    from hetsim.workloads import gen_matmul, matmul_spec

    trace = gen_matmul(matmul_spec(4, 64, smp_cycles={"mxmBlock": 250_000}, cpu_freq_mhz=1000.0))
    profiles = {"mxmBlock": KernelProfile("mxmBlock", 800, 100, 100, 100.0)}
    base = dict(
        smp_workers=2,
        creation_overhead_ns=1000,
        submit_cost_ns=500,
        cpu_freq_mhz=1000.0,
        accelerators=[AcceleratorSpec("mxmBlock", 1)],
        profiles=profiles,
    )
    fpga_only = PlatformConfig(
        **base, eligibility_overrides={"mxmBlock": frozenset({"fpga"})}
    )
    hetero = PlatformConfig(**base)
    _, r_fpga = run(trace, fpga_only)
    _, r_het = run(trace, hetero)
    assert r_het.dispatch_counts["mxmBlock"]["smp"] >= 1
    assert r_fpga.makespan_ps <= r_het.makespan_ps


def test_critical_path_chain():
    trace = smp_chain_trace([1000, 2000, 3000])
    config = PlatformConfig(creation_overhead_ns=0)
    sim = augment(build_graph(trace), config)
    assert critical_path(sim, "min") == 6 * US
    assert critical_path(sim, "smp") == 6 * US


def test_critical_path_parallel_tasks():
    tasks = tuple(
        TaskRecord(i, "k", 5000, frozenset({"smp"}), (Dependence(0x100 + i, Direction.OUT),))
        for i in range(2)
    )
    sim = augment(build_graph(TaskTrace(1000.0, tasks)), PlatformConfig(creation_overhead_ns=0))
    assert critical_path(sim, "min") == 5 * US


def test_critical_path_cholesky_chain_sums_durations():
    from hetsim.workloads import cholesky_spec, gen_cholesky

    spec = cholesky_spec(2, 64, smp_cycles={"dpotrf": 100, "dtrsm": 200, "dsyrk": 300, "dgemm": 400})
    trace = gen_cholesky(spec)
    sim = augment(build_graph(trace), PlatformConfig(creation_overhead_ns=0, cpu_freq_mhz=1000.0))
    # chain dpotrf -> dtrsm -> dsyrk -> dpotrf
    assert critical_path(sim, "smp") == (100 + 200 + 300 + 100) * 1000


def test_critical_path_infeasible_selector():
    trace = TaskTrace(1000.0, (TaskRecord(0, "k", 100, frozenset({"smp"})),))
    sim = augment(build_graph(trace), PlatformConfig())
    with pytest.raises(ValueError, match="no fpga variant"):
        critical_path(sim, "fpga")


def test_critical_path_includes_creation_chain():
    tasks = tuple(
        TaskRecord(i, "k", 1000, frozenset({"smp"}), (Dependence(0x100 + i, Direction.OUT),))
        for i in range(3)
    )
    sim = augment(
        build_graph(TaskTrace(1000.0, tasks)), PlatformConfig(creation_overhead_ns=500)
    )
    # last task waits for 3 creations: 1.5 us, plus its 1 us body
    assert critical_path(sim, "min") == 1_500_000 + 1_000_000


def test_serial_identity_exact_sum():
    rng = random.Random(2)
    for _ in range(20):
        trace = random_trace(rng, targets_choices=(frozenset({"smp"}),))
        config = PlatformConfig(smp_workers=1, creation_overhead_ns=0)
        sim, result = run(trace, config)
        assert result.makespan_ps == sum(plan.smp.body_ps for plan in sim.plans)


def test_random_sims_respect_bounds():
    rng = random.Random(3)
    for _ in range(30):
        trace = random_trace(rng)
        config = random_config(rng)
        graph = build_graph(trace)
        sim = augment(graph, config)
        result = simulate(sim, config)
        assert result.makespan_ps >= critical_path(sim, "min")
        total = sum(iv.end_ps - iv.start_ps for iv in result.timeline)
        assert result.makespan_ps <= total + len(trace.tasks) * sim.creation_ps
        assert_no_device_overlap(result)
        assert_publication_order(result, graph)
        if not config.accelerators:
            # everything ran on SMP: work conservation lower bound
            smp_work = sum(plan.smp.body_ps for plan in sim.plans)
            workers = config.smp_workers
            assert result.makespan_ps >= -(-smp_work // workers)


def test_empty_trace_empty_result():
    trace = TaskTrace(1000.0)
    _, result = run(trace, PlatformConfig())
    assert result.makespan_ps == 0
    assert result.timeline == ()
