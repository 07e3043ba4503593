"""Static simulation graph: creation chain plus per-task execution variants.

Every task is preceded by a creation-cost node; creation nodes form a single
chain pinned to the SMP main thread, modelling the runtime instantiating
tasks serially. Each task's compute node carries up to two variants: an SMP
body, and an FPGA body whose duration folds the input DMA transfer into the
accelerator occupancy (input transfers scale with accelerator count; output
transfers do not and are serialized on a shared unit). The submit/DMA nodes
an FPGA execution needs are materialized by the engine at dispatch time; the
variant records how many to create.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .depgraph import TaskGraph
from .platform import ConfigError, PlatformConfig, cycles_to_ps, ns_to_ps
from .trace import TaskRecord


class NodeKind(str, Enum):
    CREATION = "creation"
    COMPUTE = "compute"
    SUBMIT_IN = "submit_in"
    SUBMIT_OUT = "submit_out"
    OUTPUT_DMA = "output_dma"


class UnschedulableTaskError(ValueError):
    """A task has no execution variant under the given configuration."""

    def __init__(self, task_id: int, kernel: str):
        self.task_id = task_id
        self.kernel = kernel
        super().__init__(f"task {task_id} ({kernel}) unschedulable: no eligible device")


@dataclass(frozen=True)
class Variant:
    """One way to execute a task: occupancy duration plus expansion counts.

    For the FPGA variant, ``body_ps`` is the input transfer plus compute
    time (converted from summed cycles in one step) and ``out_dma_ps`` the
    output transfer the shared DMA unit performs afterwards. Dispatching it
    creates n_inputs submit_in nodes, one submit_out node and one output_dma
    node; an SMP dispatch creates nothing.
    """

    body_ps: int
    n_inputs: int
    n_outputs: int
    out_dma_ps: int = 0


@dataclass(frozen=True)
class TaskPlan:
    task_id: int
    kernel: str
    smp: Variant | None
    fpga: Variant | None


@dataclass(frozen=True)
class SimGraph:
    """Augmented graph ready for simulation.

    Static nodes are the creation chain and one compute node per task
    (2 * n_tasks in total); ids interleave as creation_i = 2i,
    compute_i = 2i + 1 so ascending node id is program order. Cross-task
    dependence edges are re-targeted at publication events: a successor's
    compute readiness waits for the predecessor's publication (compute end
    on SMP, output-DMA end on FPGA).
    """

    graph: TaskGraph
    plans: tuple[TaskPlan, ...]
    dep_preds: tuple[tuple[int, ...], ...]
    dep_succs: tuple[tuple[int, ...], ...]
    creation_ps: int
    submit_ps: int

    @property
    def n_tasks(self) -> int:
        return len(self.plans)

    @property
    def static_node_count(self) -> int:
        return 2 * len(self.plans)

    @staticmethod
    def creation_node_id(task_id: int) -> int:
        return 2 * task_id

    @staticmethod
    def compute_node_id(task_id: int) -> int:
        return 2 * task_id + 1


def effective_targets(task: TaskRecord, config: PlatformConfig) -> frozenset[str]:
    """Apply the config's eligibility override; it may only restrict."""
    override = config.eligibility_overrides.get(task.kernel)
    if override is None:
        return task.targets
    extra = override - task.targets
    if extra:
        raise ConfigError(
            f"eligibility override for {task.kernel!r} adds targets {sorted(extra)} "
            f"that task {task.id} never declared"
        )
    return override


def augment(graph: TaskGraph, config: PlatformConfig) -> SimGraph:
    """Build the variant table and creation-chain parameters for simulation.

    A task gets an SMP variant when smp is among its effective targets, and
    an FPGA variant when fpga is and the config instantiates at least one
    accelerator for its kernel. A task left with no variant at all is a
    configuration error.
    """
    trace = graph.trace
    cpu_freq = config.cpu_freq_mhz if config.cpu_freq_mhz is not None else trace.cpu_freq_mhz
    accel_counts = config.accel_counts()
    plans: list[TaskPlan] = []
    for task in trace.tasks:
        targets = effective_targets(task, config)
        smp_variant = None
        if "smp" in targets:
            smp_variant = Variant(
                body_ps=cycles_to_ps(task.smp_cycles, cpu_freq),
                n_inputs=task.n_inputs,
                n_outputs=task.n_outputs,
            )
        fpga_variant = None
        if "fpga" in targets and accel_counts.get(task.kernel, 0) >= 1:
            profile = config.profiles.get(task.kernel)
            if profile is None:
                raise ConfigError(f"kernel {task.kernel!r} has accelerators but no profile")
            fpga_variant = Variant(
                body_ps=cycles_to_ps(
                    profile.in_transfer_cycles + profile.compute_cycles, profile.fpga_freq_mhz
                ),
                n_inputs=task.n_inputs,
                n_outputs=task.n_outputs,
                out_dma_ps=cycles_to_ps(profile.out_transfer_cycles, profile.fpga_freq_mhz),
            )
        if smp_variant is None and fpga_variant is None:
            raise UnschedulableTaskError(task.id, task.kernel)
        plans.append(TaskPlan(task.id, task.kernel, smp_variant, fpga_variant))
    return SimGraph(
        graph=graph,
        plans=tuple(plans),
        dep_preds=graph.preds,
        dep_succs=graph.succs,
        creation_ps=ns_to_ps(config.creation_overhead_ns),
        submit_ps=ns_to_ps(config.submit_cost_ns),
    )
