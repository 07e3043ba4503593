"""Target platform model: clocks, device inventory, and per-kernel FPGA
timing digests.

All simulation time is exact integer picoseconds, so mixing an SMP clock
domain with per-kernel FPGA clocks never accumulates floating-point drift.
Timing digests arrive as a small CSV (one row per kernel, as produced by
summarizing an HLS latency report); the platform itself is one JSON
document.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .trace import KNOWN_TARGETS

U64_MAX = 2**64 - 1

DIGEST_HEADER = "kernel,compute_cycles,in_transfer_cycles,out_transfer_cycles,fpga_freq_mhz"
DIGEST_COLUMNS = DIGEST_HEADER.split(",")

KNOWN_SCHEDULERS = ("availability_greedy",)

DEFAULT_CREATION_OVERHEAD_NS = 1000
DEFAULT_SUBMIT_COST_NS = 500

_CONFIG_KEYS = frozenset(
    {
        "name",
        "cpu_freq_mhz",
        "smp_workers",
        "creation_overhead_ns",
        "submit_cost_ns",
        "accelerators",
        "eligibility_overrides",
        "scheduler",
        "profiles_path",
    }
)


class ProfileError(ValueError):
    """A timing-digest CSV violates its format contract."""


class ConfigError(ValueError):
    """A platform configuration is malformed or inconsistent."""


def cycles_to_ps(cycles: int, freq_mhz: float) -> int:
    """Convert a cycle count at ``freq_mhz`` into integer picoseconds.

    Exact rational arithmetic, rounded half up: ps = cycles * 1e6 / freq_mhz.
    Sums of cycles should be converted once; converting addends separately
    may differ from the summed conversion by 1 ps.
    """
    if cycles < 0:
        raise ValueError(f"cycles must be non-negative, got {cycles}")
    if not freq_mhz > 0:
        raise ValueError(f"freq_mhz must be positive, got {freq_mhz}")
    f = Fraction(freq_mhz)
    num = cycles * 1_000_000 * f.denominator
    den = f.numerator
    ps = (2 * num + den) // (2 * den)
    if ps > U64_MAX:
        raise OverflowError("time overflow")
    return ps


def ns_to_ps(ns: int) -> int:
    if ns < 0:
        raise ValueError(f"nanoseconds must be non-negative, got {ns}")
    ps = ns * 1000
    if ps > U64_MAX:
        raise OverflowError("time overflow")
    return ps


@dataclass(frozen=True)
class KernelProfile:
    """FPGA timing digest of one kernel (cycles at the kernel's clock)."""

    kernel: str
    compute_cycles: int
    in_transfer_cycles: int
    out_transfer_cycles: int
    fpga_freq_mhz: float


@dataclass(frozen=True)
class AcceleratorSpec:
    kernel: str
    count: int


@dataclass
class PlatformConfig:
    """One candidate platform: devices, overheads, digests, policy.

    ``cpu_freq_mhz`` may be None, in which case the frequency the trace was
    measured at is used. ``eligibility_overrides`` restrict (never extend)
    the targets a task declared in the trace.
    """

    smp_workers: int = 1
    accelerators: list[AcceleratorSpec] = field(default_factory=list)
    creation_overhead_ns: int = DEFAULT_CREATION_OVERHEAD_NS
    submit_cost_ns: int = DEFAULT_SUBMIT_COST_NS
    cpu_freq_mhz: float | None = None
    profiles: dict[str, KernelProfile] = field(default_factory=dict)
    eligibility_overrides: dict[str, frozenset[str]] = field(default_factory=dict)
    scheduler: str = "availability_greedy"
    name: str = "default"
    profiles_path: str | None = None

    def accel_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for spec in self.accelerators:
            counts[spec.kernel] = counts.get(spec.kernel, 0) + spec.count
        return counts


def validate_config(config: PlatformConfig) -> None:
    if config.smp_workers < 1:
        raise ConfigError(f"smp_workers must be >= 1, got {config.smp_workers}")
    if config.cpu_freq_mhz is not None and not config.cpu_freq_mhz > 0:
        raise ConfigError(f"cpu_freq_mhz must be positive, got {config.cpu_freq_mhz}")
    if config.creation_overhead_ns < 0 or config.submit_cost_ns < 0:
        raise ConfigError("overheads must be non-negative")
    if config.scheduler not in KNOWN_SCHEDULERS:
        raise ConfigError(
            f"unknown scheduler {config.scheduler!r}, expected one of {KNOWN_SCHEDULERS}"
        )
    for spec in config.accelerators:
        if spec.count < 1:
            raise ConfigError(f"accelerator count for {spec.kernel!r} must be >= 1")
        profile = config.profiles.get(spec.kernel)
        if profile is None:
            raise ConfigError(f"accelerator kernel {spec.kernel!r} has no timing profile")
        if profile.compute_cycles <= 0:
            raise ConfigError(f"profile for {spec.kernel!r} must have compute_cycles > 0")
        if not profile.fpga_freq_mhz > 0:
            raise ConfigError(f"profile for {spec.kernel!r} must have a positive fpga_freq_mhz")
        if profile.in_transfer_cycles < 0 or profile.out_transfer_cycles < 0:
            raise ConfigError(f"profile for {spec.kernel!r} has negative transfer cycles")
    for kernel, targets in config.eligibility_overrides.items():
        unknown = targets - KNOWN_TARGETS
        if unknown:
            raise ConfigError(
                f"eligibility override for {kernel!r} names unknown targets {sorted(unknown)}"
            )
        if not targets:
            raise ConfigError(f"eligibility override for {kernel!r} is empty")


def load_profiles(path: str | Path) -> dict[str, KernelProfile]:
    """Parse a timing-digest CSV into one profile per kernel."""
    path = Path(path)
    with path.open(newline="") as fh:
        first = fh.readline().rstrip("\r\n")
        if first != DIGEST_HEADER:
            raise ProfileError(f"{path}: bad header, expected {DIGEST_HEADER!r}")
        profiles: dict[str, KernelProfile] = {}
        for row_no, row in enumerate(csv.reader(fh), start=2):
            if not row:
                continue
            if len(row) != len(DIGEST_COLUMNS):
                raise ProfileError(
                    f"{path}: row {row_no}: expected {len(DIGEST_COLUMNS)} columns, got {len(row)}"
                )
            kernel = row[0].strip()
            if not kernel:
                raise ProfileError(f"{path}: row {row_no}: empty kernel name")
            if kernel in profiles:
                raise ProfileError(f"{path}: duplicate kernel {kernel!r}")
            values: list[int] = []
            for col, cell in zip(DIGEST_COLUMNS[1:4], row[1:4]):
                try:
                    values.append(int(cell))
                except ValueError:
                    raise ProfileError(
                        f"{path}: row {row_no}: non-numeric {col} {cell!r}"
                    ) from None
            try:
                freq = float(row[4])
            except ValueError:
                raise ProfileError(
                    f"{path}: row {row_no}: non-numeric fpga_freq_mhz {row[4]!r}"
                ) from None
            profiles[kernel] = KernelProfile(kernel, values[0], values[1], values[2], freq)
    return profiles


def write_profiles(profiles: dict[str, KernelProfile], path: str | Path) -> None:
    lines = [DIGEST_HEADER]
    for kernel in sorted(profiles):
        p = profiles[kernel]
        lines.append(
            f"{p.kernel},{p.compute_cycles},{p.in_transfer_cycles},"
            f"{p.out_transfer_cycles},{p.fpga_freq_mhz:g}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def config_from_doc(doc: dict, base_dir: str | Path, name: str | None = None) -> PlatformConfig:
    """Build a PlatformConfig from a parsed JSON document.

    ``profiles_path`` is resolved relative to ``base_dir`` unless already
    absolute; the digest it names is loaded eagerly.
    """
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    unknown = set(doc) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    accelerators = []
    for entry in doc.get("accelerators", []):
        if not isinstance(entry, dict) or "kernel" not in entry:
            raise ConfigError("accelerator entries must be objects with 'kernel' and 'count'")
        accelerators.append(AcceleratorSpec(str(entry["kernel"]), int(entry.get("count", 1))))

    overrides: dict[str, frozenset[str]] = {}
    for kernel, targets in doc.get("eligibility_overrides", {}).items():
        if not isinstance(targets, list):
            raise ConfigError(f"eligibility override for {kernel!r} must be a list")
        overrides[kernel] = frozenset(str(t) for t in targets)

    profiles_path = doc.get("profiles_path")
    profiles: dict[str, KernelProfile] = {}
    if profiles_path is not None:
        resolved = Path(profiles_path)
        if not resolved.is_absolute():
            resolved = Path(base_dir) / resolved
        profiles = load_profiles(resolved)
        profiles_path = str(resolved)

    config = PlatformConfig(
        smp_workers=int(doc.get("smp_workers", 1)),
        accelerators=accelerators,
        creation_overhead_ns=int(doc.get("creation_overhead_ns", DEFAULT_CREATION_OVERHEAD_NS)),
        submit_cost_ns=int(doc.get("submit_cost_ns", DEFAULT_SUBMIT_COST_NS)),
        cpu_freq_mhz=float(doc["cpu_freq_mhz"]) if "cpu_freq_mhz" in doc else None,
        profiles=profiles,
        eligibility_overrides=overrides,
        scheduler=str(doc.get("scheduler", "availability_greedy")),
        name=name if name is not None else str(doc.get("name", "default")),
        profiles_path=profiles_path,
    )
    validate_config(config)
    return config


def load_config(path: str | Path) -> PlatformConfig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc.msg}") from None
    try:
        return config_from_doc(doc, path.parent)
    except (ConfigError, ProfileError) as exc:
        raise type(exc)(f"{path}: {exc}") from None


def config_to_doc(config: PlatformConfig) -> dict:
    doc: dict = {
        "name": config.name,
        "smp_workers": config.smp_workers,
        "creation_overhead_ns": config.creation_overhead_ns,
        "submit_cost_ns": config.submit_cost_ns,
        "accelerators": [{"kernel": a.kernel, "count": a.count} for a in config.accelerators],
        "eligibility_overrides": {
            kernel: sorted(targets) for kernel, targets in sorted(config.eligibility_overrides.items())
        },
        "scheduler": config.scheduler,
    }
    if config.cpu_freq_mhz is not None:
        doc["cpu_freq_mhz"] = config.cpu_freq_mhz
    if config.profiles_path is not None:
        doc["profiles_path"] = config.profiles_path
    return doc


def write_config(config: PlatformConfig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(config_to_doc(config), indent=2) + "\n")
