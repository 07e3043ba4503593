"""Task-trace data model and its JSON-Lines on-disk format.

A trace captures the task stream emitted by an instrumented sequential run
of a task-parallel program: one record per task instance, in program order,
with the measured SMP duration, the devices the task may run on, and the
memory regions it declares as in/out/inout.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

TRACE_FORMAT = "hetero-trace"
TRACE_VERSION = 1
KNOWN_TARGETS = frozenset({"smp", "fpga"})


class Direction(str, Enum):
    """Declared access direction of a task's memory region."""

    IN = "in"
    OUT = "out"
    INOUT = "inout"

    @property
    def reads(self) -> bool:
        return self is not Direction.OUT

    @property
    def writes(self) -> bool:
        return self is not Direction.IN


class TraceFormatError(ValueError):
    """A trace file or in-memory trace violates the format contract."""


@dataclass(frozen=True)
class Dependence:
    """One declared memory region: base address, direction, byte length."""

    addr: int
    direction: Direction
    length: int = 1


@dataclass(frozen=True)
class TaskRecord:
    id: int
    kernel: str
    smp_cycles: int
    targets: frozenset[str]
    deps: tuple[Dependence, ...] = ()
    created_at_cycles: int = 0  # metadata only; ordering is list position

    @property
    def n_inputs(self) -> int:
        return sum(1 for d in self.deps if d.direction.reads)

    @property
    def n_outputs(self) -> int:
        return sum(1 for d in self.deps if d.direction.writes)


@dataclass(frozen=True)
class TaskTrace:
    cpu_freq_mhz: float
    tasks: tuple[TaskRecord, ...] = ()


def validate_trace(trace: TaskTrace) -> list[str]:
    """Check every trace invariant; return one diagnostic string per violation.

    An empty list means the trace is exactly what :func:`load_trace` would
    accept from disk.
    """
    diags: list[str] = []
    if not trace.cpu_freq_mhz > 0:
        diags.append(f"cpu_freq_mhz must be positive, got {trace.cpu_freq_mhz}")
    seen: set[int] = set()
    for pos, task in enumerate(trace.tasks):
        if task.id in seen:
            diags.append(f"task {task.id}: duplicate id at position {pos}")
        elif task.id != pos:
            diags.append(f"id gap at position {pos} (expected {pos}, got {task.id})")
        seen.add(task.id)
        if not task.targets:
            diags.append(f"task {task.id}: empty targets")
        for target in sorted(task.targets - KNOWN_TARGETS):
            diags.append(f"task {task.id}: unknown target {target!r}")
        if task.smp_cycles < 0:
            diags.append(f"task {task.id}: negative smp_cycles")
        elif task.smp_cycles == 0 and "smp" in task.targets:
            diags.append(f"task {task.id}: zero smp_cycles with smp target")
        if task.created_at_cycles < 0:
            diags.append(f"task {task.id}: negative created_at_cycles")
        for k, dep in enumerate(task.deps):
            if dep.length < 1:
                diags.append(f"task {task.id}: dep {k}: len must be >= 1, got {dep.length}")
            if dep.addr < 0:
                diags.append(f"task {task.id}: dep {k}: negative addr")
    return diags


def _parse_addr(value: object, where: str) -> int:
    if isinstance(value, str):
        try:
            return int(value, 16)
        except ValueError:
            raise TraceFormatError(f"{where}: bad hex address {value!r}") from None
    if isinstance(value, int) and not isinstance(value, bool):
        return value
    raise TraceFormatError(f"{where}: addr must be a hex string or integer")


def _parse_int(obj: dict, key: str, where: str, default: int | None = None) -> int:
    if key not in obj:
        if default is not None:
            return default
        raise TraceFormatError(f"{where}: missing field {key!r}")
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise TraceFormatError(f"{where}: field {key!r} must be an integer")
    return value


def _parse_dep(obj: object, where: str) -> Dependence:
    if not isinstance(obj, dict):
        raise TraceFormatError(f"{where}: dependence must be an object")
    addr = _parse_addr(obj.get("addr"), where) if "addr" in obj else None
    if addr is None:
        raise TraceFormatError(f"{where}: missing field 'addr'")
    raw_dir = obj.get("dir")
    try:
        direction = Direction(raw_dir)
    except ValueError:
        raise TraceFormatError(f"{where}: unknown direction {raw_dir!r}") from None
    length = _parse_int(obj, "len", where, default=1)
    return Dependence(addr=addr, direction=direction, length=length)


def _parse_task(obj: object, position: int, where: str) -> TaskRecord:
    if not isinstance(obj, dict):
        raise TraceFormatError(f"{where}: task line must be a JSON object")
    task_id = _parse_int(obj, "id", where, default=position)
    kernel = obj.get("kernel")
    if not isinstance(kernel, str) or not kernel:
        raise TraceFormatError(f"{where}: field 'kernel' must be a non-empty string")
    raw_targets = obj.get("targets")
    if not isinstance(raw_targets, list) or not all(isinstance(t, str) for t in raw_targets):
        raise TraceFormatError(f"{where}: field 'targets' must be a list of strings")
    deps_raw = obj.get("deps", [])
    if not isinstance(deps_raw, list):
        raise TraceFormatError(f"{where}: field 'deps' must be a list")
    deps = tuple(_parse_dep(d, f"{where}: deps[{k}]") for k, d in enumerate(deps_raw))
    return TaskRecord(
        id=task_id,
        kernel=kernel,
        smp_cycles=_parse_int(obj, "smp_cycles", where),
        targets=frozenset(raw_targets),
        deps=deps,
        created_at_cycles=_parse_int(obj, "created_at_cycles", where, default=0),
    )


def load_trace(path: str | Path) -> TaskTrace:
    """Read a JSON-Lines trace file.

    The first non-blank line is the header object; every following non-blank
    line is one task record. Error messages count task lines 1-based (the
    header is not a task line). Task ids default to their position when the
    field is absent.
    """
    path = Path(path)
    lines = [line for line in path.read_text().splitlines() if line.strip()]
    if not lines:
        raise TraceFormatError(f"{path}: empty file, missing header")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise TraceFormatError(f"{path}: header: invalid JSON: {exc.msg}") from None
    if not isinstance(header, dict) or header.get("format") != TRACE_FORMAT:
        raise TraceFormatError(f"{path}: header: expected format {TRACE_FORMAT!r}")
    if header.get("version") != TRACE_VERSION:
        raise TraceFormatError(
            f"{path}: header: unsupported version {header.get('version')!r}"
        )
    freq = header.get("cpu_freq_mhz")
    if not isinstance(freq, (int, float)) or isinstance(freq, bool) or not freq > 0:
        raise TraceFormatError(f"{path}: header: cpu_freq_mhz must be a positive number")

    tasks: list[TaskRecord] = []
    for position, text in enumerate(lines[1:]):
        line_no = position + 1
        where = f"{path}: line {line_no}"
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise TraceFormatError(f"{where}: invalid JSON: {exc.msg}") from None
        tasks.append(_parse_task(obj, position, where))

    trace = TaskTrace(cpu_freq_mhz=float(freq), tasks=tuple(tasks))
    diags = validate_trace(trace)
    if diags:
        # Map the first diagnostic back to its task line where possible.
        first = diags[0]
        line_no = None
        for pos, task in enumerate(trace.tasks):
            if f"task {task.id}:" in first or f"position {pos}" in first:
                line_no = pos + 1
                break
        prefix = f"{path}: line {line_no}: " if line_no is not None else f"{path}: "
        raise TraceFormatError(prefix + first)
    return trace


def write_trace(trace: TaskTrace, path: str | Path) -> None:
    """Write a trace in the JSON-Lines format accepted by :func:`load_trace`."""
    lines = [
        json.dumps(
            {"format": TRACE_FORMAT, "version": TRACE_VERSION, "cpu_freq_mhz": trace.cpu_freq_mhz}
        )
    ]
    for task in trace.tasks:
        lines.append(
            json.dumps(
                {
                    "id": task.id,
                    "kernel": task.kernel,
                    "created_at_cycles": task.created_at_cycles,
                    "smp_cycles": task.smp_cycles,
                    "targets": sorted(task.targets),
                    "deps": [
                        {"addr": f"0x{d.addr:x}", "len": d.length, "dir": d.direction.value}
                        for d in task.deps
                    ],
                }
            )
        )
    Path(path).write_text("\n".join(lines) + "\n")
