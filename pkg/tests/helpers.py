"""Shared test utilities: random trace generation, reachability closures,
and the hand-scheduled FPGA golden fixture."""
from __future__ import annotations

import random

from hetsim.depgraph import DepEdge
from hetsim.platform import AcceleratorSpec, KernelProfile, PlatformConfig
from hetsim.trace import Dependence, Direction, TaskRecord, TaskTrace

# Small address pool with lengths chosen so that byte ranges sometimes
# overlap without sharing a base (exercises both matching modes).
ADDR_POOL = (0x100, 0x101, 0x102, 0x104, 0x108, 0x110)
LEN_POOL = (1, 2, 4, 8)

KERNELS = ("ka", "kb")


def random_trace(
    rng: random.Random,
    max_tasks: int = 12,
    max_deps: int = 3,
    targets_choices=(frozenset({"smp"}), frozenset({"smp", "fpga"})),
    cpu_freq_mhz: float = 1000.0,
) -> TaskTrace:
    n = rng.randint(1, max_tasks)
    tasks = []
    for i in range(n):
        deps = tuple(
            Dependence(
                addr=rng.choice(ADDR_POOL),
                direction=rng.choice(list(Direction)),
                length=rng.choice(LEN_POOL),
            )
            for _ in range(rng.randint(0, max_deps))
        )
        tasks.append(
            TaskRecord(
                id=i,
                kernel=rng.choice(KERNELS),
                smp_cycles=rng.randint(1, 5000),
                targets=rng.choice(list(targets_choices)),
                deps=deps,
                created_at_cycles=i,
            )
        )
    return TaskTrace(cpu_freq_mhz=cpu_freq_mhz, tasks=tuple(tasks))


def random_profiles(rng: random.Random) -> dict[str, KernelProfile]:
    freqs = (100.0, 200.0, 500.0)
    return {
        k: KernelProfile(
            kernel=k,
            compute_cycles=rng.randint(10, 500),
            in_transfer_cycles=rng.randint(0, 50),
            out_transfer_cycles=rng.randint(1, 50),
            fpga_freq_mhz=rng.choice(freqs),
        )
        for k in KERNELS
    }


def random_config(rng: random.Random, min_accels: int = 0) -> PlatformConfig:
    accelerators = []
    for k in KERNELS:
        count = rng.randint(min_accels, 2)
        if count:
            accelerators.append(AcceleratorSpec(k, count))
    return PlatformConfig(
        smp_workers=rng.randint(1, 3),
        accelerators=accelerators,
        creation_overhead_ns=rng.choice((0, 100, 1000)),
        submit_cost_ns=rng.choice((0, 50, 500)),
        cpu_freq_mhz=rng.choice((None, 500.0, 1000.0)),
        profiles=random_profiles(rng),
    )


def closure(n_tasks: int, edges: tuple[DepEdge, ...]) -> frozenset[tuple[int, int]]:
    """Transitive closure as a set of (src, dst) pairs, src < dst."""
    reach = [0] * n_tasks
    succs: list[list[int]] = [[] for _ in range(n_tasks)]
    for e in edges:
        succs[e.src].append(e.dst)
    for i in range(n_tasks - 1, -1, -1):
        mask = 0
        for s in succs[i]:
            mask |= (1 << s) | reach[s]
        reach[i] = mask
    pairs = set()
    for i in range(n_tasks):
        mask = reach[i]
        j = 0
        while mask:
            if mask & 1:
                pairs.add((i, j))
            mask >>= 1
            j += 1
    return frozenset(pairs)


def golden_fixture() -> tuple[TaskTrace, PlatformConfig]:
    """Two independent fpga-only tasks on one accelerator, all clocks 1 GHz.

    Hand schedule (ns): creations [0,1) and [1,2); t0 submit_in [1,6),
    occupancy [6,116), submit_out [116,121), output DMA [121,141);
    t1 submit_in [6,11), occupancy [116,226), submit_out [226,231),
    output DMA [231,251). Makespan 251 ns.
    """
    tasks = (
        TaskRecord(
            0, "k", 0, frozenset({"fpga"}),
            (Dependence(0xA000, Direction.IN, 4), Dependence(0xB000, Direction.OUT, 4)),
        ),
        TaskRecord(
            1, "k", 0, frozenset({"fpga"}),
            (Dependence(0xC000, Direction.IN, 4), Dependence(0xD000, Direction.OUT, 4)),
        ),
    )
    trace = TaskTrace(1000.0, tasks)
    config = PlatformConfig(
        smp_workers=1,
        accelerators=[AcceleratorSpec("k", 1)],
        creation_overhead_ns=1,
        submit_cost_ns=5,
        cpu_freq_mhz=1000.0,
        profiles={"k": KernelProfile("k", 100, 10, 20, 1000.0)},
    )
    return trace, config


# (label, task, device, start_ps, end_ps) in canonical timeline order.
GOLDEN_TIMELINE = [
    ("creation:k", 0, 0, 0, 1000),
    ("creation:k", 1, 0, 1000, 2000),
    ("submit_in:k", 0, 2, 1000, 6000),
    ("compute:k", 0, 1, 6000, 116000),
    ("submit_in:k", 1, 2, 6000, 11000),
    ("compute:k", 1, 1, 116000, 226000),
    ("submit_out:k", 0, 2, 116000, 121000),
    ("output_dma:k", 0, 3, 121000, 141000),
    ("submit_out:k", 1, 2, 226000, 231000),
    ("output_dma:k", 1, 3, 231000, 251000),
]

GOLDEN_MAKESPAN_PS = 251_000


def timeline_rows(result) -> list[tuple[str, int, int, int, int]]:
    return [
        (iv.label, iv.task_id, iv.device_id, iv.start_ps, iv.end_ps) for iv in result.timeline
    ]


def assert_no_device_overlap(result) -> None:
    by_device: dict[int, list] = {}
    for iv in result.timeline:
        by_device.setdefault(iv.device_id, []).append(iv)
    for ivs in by_device.values():
        ivs.sort(key=lambda iv: (iv.start_ps, iv.end_ps))
        for prev, nxt in zip(ivs, ivs[1:]):
            assert prev.end_ps <= nxt.start_ps, f"overlap on device: {prev} vs {nxt}"


def assert_publication_order(result, graph) -> None:
    """Every non-creation element of a task starts at/after all predecessor
    publications."""
    first_start: dict[int, int] = {}
    for iv in result.timeline:
        if iv.kind.value == "creation" or iv.task_id is None:
            continue
        first_start[iv.task_id] = min(first_start.get(iv.task_id, iv.start_ps), iv.start_ps)
    for e in graph.edges:
        pub = result.publication_ps[e.src]
        assert first_start[e.dst] >= pub, (
            f"task {e.dst} starts at {first_start[e.dst]} before publication "
            f"{pub} of predecessor {e.src}"
        )
