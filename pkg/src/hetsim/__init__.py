"""Trace-driven performance estimator for heterogeneous SMP+FPGA task graphs.

Pipeline: load or generate a sequential task trace, rebuild the dependency
DAG a dataflow runtime would enforce, augment it with creation-cost and
DMA-model work for a candidate platform, simulate, and report makespan,
utilization and cross-configuration comparisons.
"""

from .depgraph import DepEdge, DepKind, TaskGraph, build_graph, conflict_oracle, export_dot
from .engine import (
    DeadlockError,
    DeviceInfo,
    DeviceKind,
    Interval,
    SimResult,
    critical_path,
    simulate,
)
from .expansion import (
    NodeKind,
    SimGraph,
    TaskPlan,
    UnschedulableTaskError,
    Variant,
    augment,
)
from .metrics import (
    Summary,
    apply_baseline,
    export_chrome_trace,
    export_summary_csv,
    format_ns,
    summarize,
)
from .platform import (
    AcceleratorSpec,
    ConfigError,
    KernelProfile,
    PlatformConfig,
    ProfileError,
    cycles_to_ps,
    load_config,
    load_profiles,
    write_config,
    write_profiles,
)
from .trace import (
    Dependence,
    Direction,
    TaskRecord,
    TaskTrace,
    TraceFormatError,
    load_trace,
    validate_trace,
    write_trace,
)
from .workloads import WorkloadSpec, cholesky_spec, gen_cholesky, gen_matmul, matmul_spec

__version__ = "0.1.0"

__all__ = [
    "AcceleratorSpec",
    "ConfigError",
    "DeadlockError",
    "DepEdge",
    "DepKind",
    "Dependence",
    "DeviceInfo",
    "DeviceKind",
    "Direction",
    "Interval",
    "KernelProfile",
    "NodeKind",
    "PlatformConfig",
    "ProfileError",
    "SimGraph",
    "SimResult",
    "Summary",
    "TaskGraph",
    "TaskPlan",
    "TaskRecord",
    "TaskTrace",
    "TraceFormatError",
    "UnschedulableTaskError",
    "Variant",
    "WorkloadSpec",
    "apply_baseline",
    "augment",
    "build_graph",
    "cholesky_spec",
    "conflict_oracle",
    "critical_path",
    "cycles_to_ps",
    "export_chrome_trace",
    "export_dot",
    "export_summary_csv",
    "format_ns",
    "gen_cholesky",
    "gen_matmul",
    "load_config",
    "load_profiles",
    "load_trace",
    "matmul_spec",
    "simulate",
    "summarize",
    "validate_trace",
    "write_config",
    "write_profiles",
    "write_trace",
]
