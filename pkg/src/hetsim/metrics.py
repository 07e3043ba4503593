"""Reports over simulation results: summaries, Chrome-trace timelines, CSV.

Internally everything stays in integer picoseconds; utilizations and
speedups are exact rationals. Exported timestamps are microseconds with
three decimals (nanosecond quanta), the resolution trace viewers expect.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .engine import DeviceKind, SimResult
from .platform import PlatformConfig

SUMMARY_CSV_HEADER = (
    "config,makespan_ns,speedup_vs_baseline,smp_util,accel_util,"
    "submit_util,output_dma_util,fpga_dispatches,smp_dispatches"
)


def format_ns(ps: int) -> str:
    """Render picoseconds as nanoseconds, exact: integer or 3 decimals."""
    q, rem = divmod(ps, 1000)
    if rem == 0:
        return str(q)
    return f"{q}.{rem:03d}"


def _ps_to_us(ps: int) -> float:
    """Microseconds at nanosecond resolution, rounded half up."""
    return ((ps + 500) // 1000) / 1000


@dataclass
class Summary:
    """Derived metrics of one simulated configuration."""

    name: str
    makespan_ps: int
    device_utilization: dict[int, Fraction]
    smp_utilization: Fraction
    accel_utilization: Fraction
    submit_utilization: Fraction
    output_dma_utilization: Fraction
    dispatch_counts: dict[str, dict[str, int]]
    submit_busy_ps: int
    output_dma_busy_ps: int
    # None renders as an empty CSV field (no baseline available)
    speedup: Fraction | None = field(default_factory=lambda: Fraction(1))

    @property
    def fpga_dispatches(self) -> int:
        return sum(c["fpga"] for c in self.dispatch_counts.values())

    @property
    def smp_dispatches(self) -> int:
        return sum(c["smp"] for c in self.dispatch_counts.values())


def _class_utilization(result: SimResult, kinds: tuple[DeviceKind, ...]) -> Fraction:
    devices = [d for d in result.devices if d.kind in kinds]
    if not devices or result.makespan_ps == 0:
        return Fraction(0)
    busy = sum(result.device_busy_ps[d.id] for d in devices)
    return Fraction(busy, result.makespan_ps * len(devices))


def summarize(result: SimResult, config: PlatformConfig) -> Summary:
    """Compute utilizations (occupancy intervals over makespan) and counts."""
    if result.makespan_ps == 0 and result.timeline:
        raise RuntimeError("internal error: makespan 0 with nonempty timeline")
    if result.makespan_ps == 0:
        per_device = {d.id: Fraction(0) for d in result.devices}
    else:
        per_device = {
            d.id: Fraction(result.device_busy_ps[d.id], result.makespan_ps)
            for d in result.devices
        }
    submit = next(d for d in result.devices if d.kind is DeviceKind.SUBMIT_UNIT)
    dma = next(d for d in result.devices if d.kind is DeviceKind.OUTPUT_DMA_UNIT)
    return Summary(
        name=config.name,
        makespan_ps=result.makespan_ps,
        device_utilization=per_device,
        smp_utilization=_class_utilization(
            result, (DeviceKind.SMP_MAIN, DeviceKind.SMP_WORKER)
        ),
        accel_utilization=_class_utilization(result, (DeviceKind.ACCEL,)),
        submit_utilization=per_device[submit.id],
        output_dma_utilization=per_device[dma.id],
        dispatch_counts=result.dispatch_counts,
        submit_busy_ps=result.device_busy_ps[submit.id],
        output_dma_busy_ps=result.device_busy_ps[dma.id],
    )


def apply_baseline(summaries: list[Summary], baseline_name: str) -> None:
    """Set each summary's speedup to baseline makespan over its own."""
    baseline = next((s for s in summaries if s.name == baseline_name), None)
    if baseline is None:
        raise ValueError(f"baseline {baseline_name!r} not among summaries")
    for s in summaries:
        s.speedup = Fraction(baseline.makespan_ps, s.makespan_ps)


def export_chrome_trace(result: SimResult, path: str | Path) -> None:
    """Write the timeline as a Chrome trace-event JSON array.

    One complete event (ph "X") per interval, timestamps in fractional
    microseconds, one thread per device; metadata events name each tid
    after its device.
    """
    events: list[dict] = []
    for device in result.devices:
        events.append(
            {
                "name": "thread_name",
                "ph": "M",
                "pid": 1,
                "tid": device.id,
                "args": {"name": device.label},
            }
        )
    for iv in result.timeline:
        event = {
            "name": iv.label,
            "ph": "X",
            "ts": _ps_to_us(iv.start_ps),
            "dur": _ps_to_us(iv.end_ps - iv.start_ps),
            "pid": 1,
            "tid": iv.device_id,
        }
        if iv.task_id is not None:
            event["args"] = {"task": iv.task_id}
        events.append(event)
    Path(path).write_text(json.dumps(events, indent=1) + "\n")


def _fmt_fraction(value: Fraction | None) -> str:
    if value is None:
        return ""
    return f"{float(value):.4f}"


def summary_csv_rows(
    summaries: list[Summary], errors: list[tuple[str, str]] | None = None
) -> list[str]:
    """CSV lines sorted fastest-first; failed configs trail with a reason."""
    rows = [SUMMARY_CSV_HEADER]
    for s in sorted(summaries, key=lambda s: (s.makespan_ps, s.name)):
        rows.append(
            ",".join(
                [
                    s.name,
                    format_ns(s.makespan_ps),
                    _fmt_fraction(s.speedup),
                    _fmt_fraction(s.smp_utilization),
                    _fmt_fraction(s.accel_utilization),
                    _fmt_fraction(s.submit_utilization),
                    _fmt_fraction(s.output_dma_utilization),
                    str(s.fpga_dispatches),
                    str(s.smp_dispatches),
                ]
            )
        )
    for name, reason in sorted(errors or []):
        sanitized = reason.replace(",", ";").replace("\n", " ")
        rows.append(f"{name},error:{sanitized},,,,,,,")
    return rows


def export_summary_csv(
    summaries: list[Summary],
    path: str | Path,
    errors: list[tuple[str, str]] | None = None,
) -> None:
    Path(path).write_text("\n".join(summary_csv_rows(summaries, errors)) + "\n")
