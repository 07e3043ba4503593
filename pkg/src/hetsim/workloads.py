"""Synthetic benchmark traces: tiled matrix multiply and tiled Cholesky.

The generators emit exactly the task stream a sequential instrumented run of
the corresponding blocked loop nest would produce, with synthetic disjoint
block addresses standing in for real allocations. Durations are inputs, not
measurements: each kernel's SMP cycle count comes from the workload spec.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .trace import Dependence, Direction, TaskRecord, TaskTrace

WORKLOAD_NAMES = ("matmul", "cholesky")

_BASE_ADDR = 0x1000_0000

SMP_FPGA = frozenset({"smp", "fpga"})
SMP_ONLY = frozenset({"smp"})


@dataclass
class WorkloadSpec:
    """Parameters of one generated benchmark trace.

    ``nb`` is the number of blocks per matrix dimension, ``bs`` the block
    edge; a block region is bs*bs*element_size bytes. Every kernel the
    generator emits must appear in ``smp_cycles`` and ``targets``.
    """

    name: str
    nb: int
    bs: int = 64
    element_size: int = 4
    smp_cycles: dict[str, int] = field(default_factory=dict)
    targets: dict[str, frozenset[str]] = field(default_factory=dict)
    cpu_freq_mhz: float = 667.0

    @property
    def block_bytes(self) -> int:
        return self.bs * self.bs * self.element_size


def matmul_spec(nb: int, bs: int = 64, **kwargs) -> WorkloadSpec:
    """Blocked matrix multiply; default cycle count is the fused-MAC count."""
    spec = WorkloadSpec(name="matmul", nb=nb, bs=bs, element_size=4, **kwargs)
    spec.smp_cycles.setdefault("mxmBlock", 2 * bs**3)
    spec.targets.setdefault("mxmBlock", SMP_FPGA)
    return spec


def cholesky_spec(nb: int, bs: int = 64, **kwargs) -> WorkloadSpec:
    """Blocked left-looking Cholesky; the factorization kernel is SMP-only."""
    spec = WorkloadSpec(name="cholesky", nb=nb, bs=bs, element_size=8, **kwargs)
    defaults = {
        "dpotrf": bs**3 // 3,
        "dtrsm": bs**3,
        "dsyrk": bs**3,
        "dgemm": 2 * bs**3,
    }
    for kernel, cycles in defaults.items():
        spec.smp_cycles.setdefault(kernel, cycles)
        spec.targets.setdefault(kernel, SMP_ONLY if kernel == "dpotrf" else SMP_FPGA)
    return spec


class _TraceBuilder:
    def __init__(self, spec: WorkloadSpec):
        self.spec = spec
        self.tasks: list[TaskRecord] = []
        self.clock = 0  # synthetic serial-run timestamp, cumulative cycles

    def emit(self, kernel: str, deps: list[Dependence]) -> None:
        spec = self.spec
        if kernel not in spec.smp_cycles or kernel not in spec.targets:
            raise ValueError(f"workload spec is missing smp_cycles/targets for {kernel!r}")
        self.tasks.append(
            TaskRecord(
                id=len(self.tasks),
                kernel=kernel,
                smp_cycles=spec.smp_cycles[kernel],
                targets=spec.targets[kernel],
                deps=tuple(deps),
                created_at_cycles=self.clock,
            )
        )
        self.clock += spec.smp_cycles[kernel]

    def trace(self) -> TaskTrace:
        return TaskTrace(cpu_freq_mhz=self.spec.cpu_freq_mhz, tasks=tuple(self.tasks))


def _block(base: int, index: int, block_bytes: int) -> int:
    return base + index * block_bytes


def gen_matmul(spec: WorkloadSpec) -> TaskTrace:
    """C[i,j] += A[i,k] * B[k,j] over nb^3 block tasks, k outermost.

    Each task reads its A and B blocks and updates its C block in place, so
    the only ordering is the per-C-block chain along k.
    """
    if spec.nb < 1:
        raise ValueError("nb must be >= 1")
    nb, blk = spec.nb, spec.block_bytes
    a_base = _BASE_ADDR
    b_base = a_base + nb * nb * blk
    c_base = b_base + nb * nb * blk
    builder = _TraceBuilder(spec)
    for k in range(nb):
        for i in range(nb):
            for j in range(nb):
                builder.emit(
                    "mxmBlock",
                    [
                        Dependence(_block(a_base, i * nb + k, blk), Direction.IN, blk),
                        Dependence(_block(b_base, k * nb + j, blk), Direction.IN, blk),
                        Dependence(_block(c_base, i * nb + j, blk), Direction.INOUT, blk),
                    ],
                )
    return builder.trace()


def gen_cholesky(spec: WorkloadSpec) -> TaskTrace:
    """Left-looking blocked Cholesky over a single nb x nb block matrix.

    Per k iteration: dsyrk updates the diagonal block from each previous
    column, dpotrf factors it, dgemm updates the blocks below it, and dtrsm
    solves the panel. Scalar arguments generate no dependences.
    """
    if spec.nb < 1:
        raise ValueError("nb must be >= 1")
    nb, blk = spec.nb, spec.block_bytes
    base = _BASE_ADDR
    builder = _TraceBuilder(spec)
    for k in range(nb):
        for j in range(k):
            builder.emit(
                "dsyrk",
                [
                    Dependence(_block(base, j * nb + k, blk), Direction.IN, blk),
                    Dependence(_block(base, k * nb + k, blk), Direction.INOUT, blk),
                ],
            )
        builder.emit(
            "dpotrf",
            [Dependence(_block(base, k * nb + k, blk), Direction.INOUT, blk)],
        )
        for i in range(k + 1, nb):
            for j in range(k):
                builder.emit(
                    "dgemm",
                    [
                        Dependence(_block(base, j * nb + i, blk), Direction.IN, blk),
                        Dependence(_block(base, j * nb + k, blk), Direction.IN, blk),
                        Dependence(_block(base, k * nb + i, blk), Direction.INOUT, blk),
                    ],
                )
        for i in range(k + 1, nb):
            builder.emit(
                "dtrsm",
                [
                    Dependence(_block(base, k * nb + k, blk), Direction.IN, blk),
                    Dependence(_block(base, k * nb + i, blk), Direction.INOUT, blk),
                ],
            )
    return builder.trace()


def generate(spec: WorkloadSpec) -> TaskTrace:
    if spec.name == "matmul":
        return gen_matmul(spec)
    if spec.name == "cholesky":
        return gen_cholesky(spec)
    raise ValueError(f"unknown workload {spec.name!r}")


def make_spec(name: str, nb: int, bs: int = 64, **kwargs) -> WorkloadSpec:
    if name == "matmul":
        return matmul_spec(nb, bs, **kwargs)
    if name == "cholesky":
        return cholesky_spec(nb, bs, **kwargs)
    raise ValueError(f"unknown workload {name!r}")
