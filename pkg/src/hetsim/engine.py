"""Deterministic discrete-event simulator for augmented task graphs.

Ready nodes are dispatched to devices by a greedy availability policy; time
advances to the next completion. Everything is totally ordered (the event
queue by (time, node id), ready scans by ascending node id), so identical
inputs always produce an identical timeline.

Accelerator dispatch works in two steps. Committing a compute node to an
accelerator reserves it and materializes the task's DMA-programming nodes
(one submit_in per input dependence on the shared submit unit, then one
submit_out and one output_dma after the occupancy). The occupancy itself
runs once all submit_in nodes are done and the accelerator has finished its
previous occupancy; the reservation blocks further commits until the
occupancy starts, so at most one task is in its input phase per accelerator
and reservation windows never overlap. A task's outputs publish at compute
end on SMP and at output-DMA end on FPGA; all dependence kinds wait on
publication.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from enum import Enum

from .expansion import NodeKind, SimGraph, Variant
from .platform import U64_MAX, PlatformConfig

CP_SELECTORS = ("min", "smp", "fpga")


class DeadlockError(RuntimeError):
    """No runnable work remains but nodes are unfinished (graph bug)."""

    def __init__(self, stuck: list[int]):
        self.stuck = stuck
        super().__init__(f"simulation deadlock, stuck nodes: {stuck}")


class DeviceKind(str, Enum):
    SMP_MAIN = "smp_main"
    SMP_WORKER = "smp_worker"
    ACCEL = "accel"
    SUBMIT_UNIT = "submit_unit"
    OUTPUT_DMA_UNIT = "output_dma_unit"


@dataclass(frozen=True)
class DeviceInfo:
    id: int
    kind: DeviceKind
    label: str
    kernel: str | None = None
    instance: int = 0


@dataclass(frozen=True)
class Interval:
    node_id: int
    task_id: int | None
    device_id: int
    start_ps: int
    end_ps: int
    label: str
    kind: NodeKind


@dataclass
class SimResult:
    timeline: tuple[Interval, ...]
    makespan_ps: int
    devices: tuple[DeviceInfo, ...]
    device_busy_ps: dict[int, int]
    dispatch_counts: dict[str, dict[str, int]]
    publication_ps: dict[int, int]


def build_devices(config: PlatformConfig) -> tuple[DeviceInfo, ...]:
    """Device inventory: one smp_main, smp_workers-1 workers, the configured
    accelerator instances, one submit unit and one output-DMA unit."""
    devices = [DeviceInfo(0, DeviceKind.SMP_MAIN, "smp_main")]
    for w in range(1, config.smp_workers):
        devices.append(DeviceInfo(len(devices), DeviceKind.SMP_WORKER, f"smp_worker_{w}", instance=w))
    for spec in config.accelerators:
        for inst in range(spec.count):
            devices.append(
                DeviceInfo(
                    len(devices),
                    DeviceKind.ACCEL,
                    f"accel_{spec.kernel}_{inst}",
                    kernel=spec.kernel,
                    instance=inst,
                )
            )
    devices.append(DeviceInfo(len(devices), DeviceKind.SUBMIT_UNIT, "submit_unit"))
    devices.append(DeviceInfo(len(devices), DeviceKind.OUTPUT_DMA_UNIT, "output_dma_unit"))
    return tuple(devices)


@dataclass
class _Node:
    id: int
    kind: NodeKind
    task: int | None
    kernel: str
    duration_ps: int = 0
    remaining: int = 0
    feeds: tuple[int, ...] = ()
    bound_accel: int | None = None  # set once a compute commits to an accelerator
    started: bool = False
    done: bool = False


class _Run:
    """All mutable state of one simulation instance."""

    def __init__(self, sim: SimGraph, config: PlatformConfig):
        self.sim = sim
        self.config = config
        self.devices = build_devices(config)
        self.busy_until = [0] * len(self.devices)
        self.pending = [None] * len(self.devices)  # accel reservation slots
        self.now = 0
        self.events: list[tuple[int, int]] = []
        self.ready: set[int] = set()
        self.timeline: list[Interval] = []
        self.device_busy = {d.id: 0 for d in self.devices}
        self.publication: dict[int, int] = {}
        self.counts = {
            kernel: {"smp": 0, "fpga": 0}
            for kernel in dict.fromkeys(p.kernel for p in sim.plans)
        }
        self.smp_devices = [d for d in self.devices if d.kind is DeviceKind.SMP_WORKER]
        self.smp_main = self.devices[0]
        self.submit_unit = next(d for d in self.devices if d.kind is DeviceKind.SUBMIT_UNIT)
        self.dma_unit = next(d for d in self.devices if d.kind is DeviceKind.OUTPUT_DMA_UNIT)
        self.accels_by_kernel: dict[str, list[DeviceInfo]] = {}
        for d in self.devices:
            if d.kind is DeviceKind.ACCEL:
                self.accels_by_kernel.setdefault(d.kernel, []).append(d)

        self.nodes: list[_Node] = []
        n = sim.n_tasks
        for task_id in range(n):
            plan = sim.plans[task_id]
            creation = _Node(
                id=SimGraph.creation_node_id(task_id),
                kind=NodeKind.CREATION,
                task=task_id,
                kernel=plan.kernel,
                duration_ps=sim.creation_ps,
                remaining=0 if task_id == 0 else 1,
            )
            feeds = [SimGraph.compute_node_id(task_id)]
            if task_id + 1 < n:
                feeds.append(SimGraph.creation_node_id(task_id + 1))
            creation.feeds = tuple(feeds)
            compute = _Node(
                id=SimGraph.compute_node_id(task_id),
                kind=NodeKind.COMPUTE,
                task=task_id,
                kernel=plan.kernel,
                remaining=1 + len(sim.dep_preds[task_id]),
            )
            self.nodes.extend([creation, compute])
        if n:
            self.ready.add(0)

    # -- helpers -----------------------------------------------------------

    def _idle(self, device_id: int) -> bool:
        return self.busy_until[device_id] <= self.now

    def _new_node(self, kind: NodeKind, task: int, kernel: str, duration_ps: int,
                  remaining: int) -> _Node:
        node = _Node(
            id=len(self.nodes),
            kind=kind,
            task=task,
            kernel=kernel,
            duration_ps=duration_ps,
            remaining=remaining,
        )
        self.nodes.append(node)
        if remaining == 0:
            self.ready.add(node.id)
        return node

    def _commit_to_accel(self, node: _Node, accel: DeviceInfo, variant: Variant) -> None:
        """Reserve the accelerator and materialize the DMA-programming nodes."""
        self.pending[accel.id] = node.id
        node.bound_accel = accel.id
        node.duration_ps = variant.body_ps
        node.remaining = variant.n_inputs
        self.counts[node.kernel]["fpga"] += 1
        submit_ins = [
            self._new_node(NodeKind.SUBMIT_IN, node.task, node.kernel, self.sim.submit_ps, 0)
            for _ in range(variant.n_inputs)
        ]
        submit_out = self._new_node(
            NodeKind.SUBMIT_OUT, node.task, node.kernel, self.sim.submit_ps, 1
        )
        output_dma = self._new_node(
            NodeKind.OUTPUT_DMA, node.task, node.kernel, variant.out_dma_ps, 1
        )
        for s in submit_ins:
            s.feeds = (node.id,)
        node.feeds = (submit_out.id,)
        submit_out.feeds = (output_dma.id,)
        if variant.n_inputs == 0:
            self.ready.add(node.id)

    def _start(self, node: _Node, device: DeviceInfo) -> None:
        start = self.now
        end = start + node.duration_ps
        if end > U64_MAX:
            raise OverflowError("time overflow")
        node.started = True
        self.ready.discard(node.id)
        self.busy_until[device.id] = end
        if node.kind is NodeKind.COMPUTE and node.bound_accel is not None:
            # occupancy begins; the reservation converts and frees the slot
            self.pending[device.id] = None
        self.device_busy[device.id] += end - start
        self.timeline.append(
            Interval(
                node_id=node.id,
                task_id=node.task,
                device_id=device.id,
                start_ps=start,
                end_ps=end,
                label=f"{node.kind.value}:{node.kernel}",
                kind=node.kind,
            )
        )
        heapq.heappush(self.events, (end, node.id))

    def _publish(self, task_id: int, at_ps: int) -> None:
        self.publication[task_id] = at_ps
        for succ in self.sim.dep_succs[task_id]:
            node = self.nodes[SimGraph.compute_node_id(succ)]
            node.remaining -= 1
            if node.remaining == 0 and not node.started:
                self.ready.add(node.id)

    def _complete(self, node: _Node) -> None:
        node.done = True
        for fed_id in node.feeds:
            fed = self.nodes[fed_id]
            fed.remaining -= 1
            if fed.remaining == 0 and not fed.started:
                self.ready.add(fed.id)
        if node.kind is NodeKind.COMPUTE and node.bound_accel is None:
            self._publish(node.task, self.now)
        elif node.kind is NodeKind.OUTPUT_DMA:
            self._publish(node.task, self.now)

    # -- main loop ---------------------------------------------------------

    def run(self) -> SimResult:
        policy = POLICIES[self.config.scheduler]
        while True:
            while True:
                assignments = policy(self)
                if not assignments:
                    break
                for node_id, device_id in assignments:
                    node = self.nodes[node_id]
                    device = self.devices[device_id]
                    if (
                        node.kind is NodeKind.COMPUTE
                        and node.bound_accel is None
                        and device.kind is DeviceKind.ACCEL
                    ):
                        self.ready.discard(node.id)
                        self._commit_to_accel(node, device, self.sim.plans[node.task].fpga)
                    else:
                        if node.kind is NodeKind.COMPUTE and node.bound_accel is None:
                            node.duration_ps = self.sim.plans[node.task].smp.body_ps
                            self.counts[node.kernel]["smp"] += 1
                        self._start(node, device)
            if not self.events:
                break
            self.now = self.events[0][0]
            while self.events and self.events[0][0] == self.now:
                _, node_id = heapq.heappop(self.events)
                self._complete(self.nodes[node_id])

        unfinished = [n.id for n in self.nodes if not n.done]
        if unfinished:
            raise DeadlockError(sorted(unfinished))
        makespan = max((iv.end_ps for iv in self.timeline), default=0)
        timeline = tuple(
            sorted(self.timeline, key=lambda iv: (iv.start_ps, iv.device_id, iv.node_id))
        )
        return SimResult(
            timeline=timeline,
            makespan_ps=makespan,
            devices=self.devices,
            device_busy_ps=dict(self.device_busy),
            dispatch_counts=self.counts,
            publication_ps=dict(self.publication),
        )


def policy_availability_greedy(run: _Run) -> list[tuple[int, int]]:
    """One matching pass of the greedy availability policy.

    Scans ready nodes in ascending node id (FIFO by program order) and maps
    each to a device, at most one node per device per pass: creation nodes
    go to the main SMP thread, submit/DMA nodes to their shared unit, and a
    compute node prefers a fully idle matching accelerator, then an idle SMP
    device (the main thread only while no creation node is waiting), then an
    occupied accelerator whose reservation slot is free. The engine repeats
    passes at the same instant until nothing more can be placed.
    """
    assignments: list[tuple[int, int]] = []
    taken: set[int] = set()
    creation_waiting = any(
        run.nodes[node_id].kind is NodeKind.CREATION for node_id in run.ready
    )

    def free(device_id: int) -> bool:
        return device_id not in taken and run.busy_until[device_id] <= run.now

    for node_id in sorted(run.ready):
        node = run.nodes[node_id]
        device_id = None
        if node.kind is NodeKind.CREATION:
            if free(run.smp_main.id):
                device_id = run.smp_main.id
        elif node.kind in (NodeKind.SUBMIT_IN, NodeKind.SUBMIT_OUT):
            if free(run.submit_unit.id):
                device_id = run.submit_unit.id
        elif node.kind is NodeKind.OUTPUT_DMA:
            if free(run.dma_unit.id):
                device_id = run.dma_unit.id
        elif node.bound_accel is not None:
            # occupancy: waits for its own accelerator only
            if free(node.bound_accel):
                device_id = node.bound_accel
        else:
            plan = run.sim.plans[node.task]
            accels = run.accels_by_kernel.get(node.kernel, ()) if plan.fpga else ()
            for accel in accels:
                if run.pending[accel.id] is None and free(accel.id):
                    device_id = accel.id
                    break
            if device_id is None and plan.smp:
                for dev in run.smp_devices:
                    if free(dev.id):
                        device_id = dev.id
                        break
                if device_id is None and not creation_waiting and free(run.smp_main.id):
                    device_id = run.smp_main.id
            if device_id is None:
                for accel in accels:
                    if run.pending[accel.id] is None and accel.id not in taken:
                        device_id = accel.id
                        break
        if device_id is not None:
            if node.kind is NodeKind.CREATION:
                creation_waiting = any(
                    run.nodes[other].kind is NodeKind.CREATION
                    for other in run.ready
                    if other != node_id
                )
            taken.add(device_id)
            assignments.append((node_id, device_id))
    return assignments


POLICIES = {"availability_greedy": policy_availability_greedy}


def simulate(sim: SimGraph, config: PlatformConfig) -> SimResult:
    """Run the trace to completion under the given platform configuration."""
    if config.scheduler not in POLICIES:
        raise ValueError(f"unknown scheduler {config.scheduler!r}")
    return _Run(sim, config).run()


def critical_path(sim: SimGraph, selector: str = "min") -> int:
    """Longest dependence path in picoseconds under a per-task duration rule.

    ``min`` takes each task's cheapest variant occupancy and is a lower
    bound on any simulated makespan; ``smp``/``fpga`` force one variant and
    fail if a task lacks it. The creation chain contributes as a chain: task
    i cannot start before i+1 creation costs have elapsed.
    """
    if selector not in CP_SELECTORS:
        raise ValueError(f"unknown selector {selector!r}, expected one of {CP_SELECTORS}")
    best = 0
    finish: list[int] = []
    for task_id, plan in enumerate(sim.plans):
        if selector == "min":
            choices = [v.body_ps for v in (plan.smp, plan.fpga) if v is not None]
            duration = min(choices)
        elif selector == "smp":
            if plan.smp is None:
                raise ValueError(f"task {task_id} ({plan.kernel}) has no smp variant")
            duration = plan.smp.body_ps
        else:
            if plan.fpga is None:
                raise ValueError(f"task {task_id} ({plan.kernel}) has no fpga variant")
            duration = plan.fpga.body_ps
        start = (task_id + 1) * sim.creation_ps
        for pred in sim.dep_preds[task_id]:
            start = max(start, finish[pred])
        finish.append(start + duration)
        best = max(best, finish[-1])
    return best
