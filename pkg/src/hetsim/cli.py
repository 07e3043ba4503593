"""Command-line front end: generate traces, dump graphs, simulate, sweep.

Exit codes are a stable contract: 0 success, 2 input error (unreadable or
malformed files, bad flags), 3 simulation error (unschedulable task,
deadlock, or a sweep in which every configuration failed).
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import depgraph, engine, expansion, metrics, workloads
from .platform import (
    ConfigError,
    PlatformConfig,
    ProfileError,
    config_from_doc,
    load_config,
)
from .trace import TaskTrace, TraceFormatError, load_trace, write_trace

MATCHING_ALIASES = {"exact": "exact_base", "exact_base": "exact_base", "overlap": "overlap"}

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SIM = 3


@dataclass
class SweepEntry:
    name: str
    overrides: dict = field(default_factory=dict)
    trace: object | None = None  # path or generator spec; defaults to the sweep's


@dataclass
class SweepSpec:
    trace: object  # path string or generator spec object
    baseline: str
    entries: list[SweepEntry]
    out_dir: Path
    base_doc: dict
    base_dir: Path
    matching: str = "exact_base"


def _parse_kv_ints(pairs: list[str] | None, flag: str) -> dict[str, int]:
    out: dict[str, int] = {}
    for pair in pairs or []:
        key, sep, value = pair.partition("=")
        if not sep or not key:
            raise ConfigError(f"{flag} expects kernel=value, got {pair!r}")
        try:
            out[key] = int(value)
        except ValueError:
            raise ConfigError(f"{flag} value for {key!r} must be an integer") from None
    return out


def _parse_kv_targets(pairs: list[str] | None) -> dict[str, frozenset[str]]:
    out: dict[str, frozenset[str]] = {}
    for pair in pairs or []:
        key, sep, value = pair.partition("=")
        if not sep or not key:
            raise ConfigError(f"--targets expects kernel=smp,fpga, got {pair!r}")
        out[key] = frozenset(t for t in value.split(",") if t)
    return out


def _trace_from_genspec(doc: dict) -> TaskTrace:
    doc = dict(doc)
    name = doc.pop("workload", None)
    if name not in workloads.WORKLOAD_NAMES:
        raise ConfigError(f"unknown workload {name!r}")
    kwargs = {}
    if "cycles" in doc:
        kwargs["smp_cycles"] = {k: int(v) for k, v in doc.pop("cycles").items()}
    if "targets" in doc:
        kwargs["targets"] = {k: frozenset(v) for k, v in doc.pop("targets").items()}
    for key in ("element_size", "cpu_freq_mhz"):
        if key in doc:
            kwargs[key] = doc.pop(key)
    nb = int(doc.pop("nb"))
    bs = int(doc.pop("bs", 64))
    if doc:
        raise ConfigError(f"unknown generator keys: {sorted(doc)}")
    return workloads.generate(workloads.make_spec(name, nb, bs, **kwargs))


def cmd_gen(args) -> int:
    if args.workload not in workloads.WORKLOAD_NAMES:
        print(f"error: unknown workload {args.workload!r}", file=sys.stderr)
        return EXIT_INPUT
    kwargs = {}
    cycles = _parse_kv_ints(args.cycles, "--cycles")
    if cycles:
        kwargs["smp_cycles"] = cycles
    targets = _parse_kv_targets(args.targets)
    if targets:
        kwargs["targets"] = targets
    if args.cpu_freq_mhz is not None:
        kwargs["cpu_freq_mhz"] = args.cpu_freq_mhz
    if args.element_size is not None:
        kwargs["element_size"] = args.element_size
    spec = workloads.make_spec(args.workload, args.nb, args.bs, **kwargs)
    trace = workloads.generate(spec)
    write_trace(trace, args.out)
    print(f"tasks={len(trace.tasks)}")
    print(f"trace={args.out}")
    return EXIT_OK


def cmd_graph(args) -> int:
    trace = load_trace(args.trace)
    graph = depgraph.build_graph(trace, MATCHING_ALIASES[args.matching])
    depgraph.export_dot(graph, args.dot)
    print(f"tasks={graph.n_tasks} edges={len(graph.edges)}")
    print(f"dot={args.dot}")
    return EXIT_OK


def _run_pipeline(trace: TaskTrace, config: PlatformConfig, matching: str):
    graph = depgraph.build_graph(trace, matching)
    sim = expansion.augment(graph, config)
    result = engine.simulate(sim, config)
    return graph, result, metrics.summarize(result, config)


def cmd_sim(args) -> int:
    trace = load_trace(args.trace)
    config = load_config(args.config)
    graph, result, summary = _run_pipeline(trace, config, MATCHING_ALIASES[args.matching])
    print(f"tasks={graph.n_tasks} edges={len(graph.edges)}")
    print(f"makespan_ns={metrics.format_ns(result.makespan_ps)}")
    for device in result.devices:
        util = summary.device_utilization[device.id]
        print(f"util[{device.label}]={float(util):.4f}")
    for kernel, counts in result.dispatch_counts.items():
        print(f"dispatch[{kernel}]: smp={counts['smp']} fpga={counts['fpga']}")
    if args.chrome_trace:
        metrics.export_chrome_trace(result, args.chrome_trace)
    if args.dot:
        depgraph.export_dot(graph, args.dot)
    if args.csv:
        metrics.export_summary_csv([summary], args.csv)
    return EXIT_OK


def _load_sweep_spec(args) -> SweepSpec:
    path = Path(args.spec)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: sweep spec must be a JSON object")

    raw_configs = doc.get("configs", [])
    if not isinstance(raw_configs, list) or not all(isinstance(c, dict) for c in raw_configs):
        raise ConfigError(f"{path}: 'configs' must be a list of objects")
    entries = []
    names = set()
    for raw in raw_configs:
        name = raw.get("name")
        if not name:
            raise ConfigError(f"{path}: every sweep config needs a 'name'")
        if name in names:
            raise ConfigError(f"{path}: duplicate config name {name!r}")
        names.add(name)
        entries.append(
            SweepEntry(name=name, overrides=raw.get("overrides", {}), trace=raw.get("trace"))
        )
    if not entries:
        raise ConfigError(f"{path}: sweep spec has no configs")

    baseline = args.baseline or doc.get("baseline")
    if baseline not in names:
        raise ConfigError(f"baseline {baseline!r} is not among the sweep config names")

    trace = args.trace or doc.get("trace")
    if trace is None:
        raise ConfigError("sweep needs a trace (--trace or 'trace' in the spec)")

    base_doc: dict = {}
    base_dir = path.parent
    base_config = args.config or doc.get("base_config")
    if base_config is not None:
        base_path = Path(base_config)
        if not base_path.is_absolute():
            base_path = path.parent / base_path
        base_doc = json.loads(base_path.read_text())
        base_dir = base_path.parent

    out_dir = Path(args.out_dir or doc.get("out_dir", "sweep-out"))
    if not out_dir.is_absolute():
        out_dir = Path.cwd() / out_dir
    return SweepSpec(
        trace=trace,
        baseline=baseline,
        entries=entries,
        out_dir=out_dir,
        base_doc=base_doc,
        base_dir=base_dir,
        matching=MATCHING_ALIASES[args.matching],
        )


def _resolve_trace(spec_trace, sweep_dir: Path, cache: dict) -> TaskTrace:
    key = json.dumps(spec_trace, sort_keys=True)
    if key in cache:
        return cache[key]
    if isinstance(spec_trace, str):
        p = Path(spec_trace)
        if not p.is_absolute():
            p = sweep_dir / p
        trace = load_trace(p)
    elif isinstance(spec_trace, dict):
        trace = _trace_from_genspec(spec_trace)
    else:
        raise ConfigError("trace must be a path or a generator object")
    cache[key] = trace
    return trace


def run_sweep(spec: SweepSpec, sweep_dir: Path) -> tuple[list, list, int]:
    """Simulate every entry; returns (summaries, errors, exit code).

    Entries are independent; results are aggregated into sorted reports, so
    the outputs do not depend on evaluation order.
    """
    spec.out_dir.mkdir(parents=True, exist_ok=True)
    trace_cache: dict = {}
    graph_cache: dict = {}
    summaries = []
    errors: list[tuple[str, str]] = []
    for entry in spec.entries:
        try:
            trace = _resolve_trace(
                entry.trace if entry.trace is not None else spec.trace, sweep_dir, trace_cache
            )
            merged = {**spec.base_doc, **entry.overrides}
            merged.pop("name", None)
            config = config_from_doc(merged, spec.base_dir, name=entry.name)
            graph_key = (id(trace), spec.matching)
            if graph_key not in graph_cache:
                graph_cache[graph_key] = depgraph.build_graph(trace, spec.matching)
            graph = graph_cache[graph_key]
            sim = expansion.augment(graph, config)
            result = engine.simulate(sim, config)
            summary = metrics.summarize(result, config)
            metrics.export_chrome_trace(result, spec.out_dir / f"{entry.name}.trace.json")
            summaries.append(summary)
        except (TraceFormatError, ConfigError, ProfileError, ValueError, OSError,
                expansion.UnschedulableTaskError, engine.DeadlockError, OverflowError) as exc:
            errors.append((entry.name, str(exc)))
    if summaries:
        if any(s.name == spec.baseline for s in summaries):
            metrics.apply_baseline(summaries, spec.baseline)
        else:
            for s in summaries:  # baseline config failed; ratios undefined
                s.speedup = None
        code = EXIT_OK
    else:
        code = EXIT_SIM
    metrics.export_summary_csv(summaries, spec.out_dir / "summary.csv", errors)
    return summaries, errors, code


def cmd_sweep(args) -> int:
    spec = _load_sweep_spec(args)
    summaries, errors, code = run_sweep(spec, Path(args.spec).parent)
    for name, reason in errors:
        print(f"config {name}: error: {reason}", file=sys.stderr)
    if summaries:
        ranked = sorted(summaries, key=lambda s: (s.makespan_ps, s.name))
        for s in ranked:
            speedup = "" if s.speedup is None else f" speedup={float(s.speedup):.4f}"
            print(f"config {s.name}: makespan_ns={metrics.format_ns(s.makespan_ps)}{speedup}")
        print(f"recommended={ranked[0].name}")
    print(f"csv={spec.out_dir / 'summary.csv'}")
    return code


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hetsim",
        description="Trace-driven performance estimator for heterogeneous SMP+FPGA task graphs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate a benchmark trace")
    p_gen.add_argument("workload", help="matmul or cholesky")
    p_gen.add_argument("--nb", type=int, required=True, help="blocks per dimension")
    p_gen.add_argument("--bs", type=int, default=64, help="block edge size")
    p_gen.add_argument("--element-size", type=int, default=None)
    p_gen.add_argument("--cpu-freq-mhz", type=float, default=None)
    p_gen.add_argument("--cycles", action="append", metavar="KERNEL=CYCLES")
    p_gen.add_argument("--targets", action="append", metavar="KERNEL=smp,fpga")
    p_gen.add_argument("--out", required=True, help="output trace path")
    p_gen.set_defaults(func=cmd_gen)

    p_graph = sub.add_parser("graph", help="dump the dependency graph as DOT")
    p_graph.add_argument("--trace", required=True)
    p_graph.add_argument("--dot", required=True, help="output DOT path")
    p_graph.add_argument("--matching", choices=sorted(MATCHING_ALIASES), default="exact")
    p_graph.set_defaults(func=cmd_graph)

    p_sim = sub.add_parser("sim", help="simulate one trace under one configuration")
    p_sim.add_argument("--trace", required=True)
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--matching", choices=sorted(MATCHING_ALIASES), default="exact")
    p_sim.add_argument("--chrome-trace", default=None, help="write timeline JSON here")
    p_sim.add_argument("--dot", default=None, help="write dependency DOT here")
    p_sim.add_argument("--csv", default=None, help="write one-row summary CSV here")
    p_sim.set_defaults(func=cmd_sim)

    p_sweep = sub.add_parser("sweep", help="simulate one trace under many configurations")
    p_sweep.add_argument("spec", help="sweep spec JSON")
    p_sweep.add_argument("--trace", default=None, help="override the sweep's trace")
    p_sweep.add_argument("--config", default=None, help="override the base config document")
    p_sweep.add_argument("--out-dir", default=None)
    p_sweep.add_argument("--baseline", default=None)
    p_sweep.add_argument("--matching", choices=sorted(MATCHING_ALIASES), default="exact")
    p_sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except expansion.UnschedulableTaskError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SIM
    except engine.DeadlockError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SIM
    except (TraceFormatError, ConfigError, ProfileError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OverflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SIM


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
