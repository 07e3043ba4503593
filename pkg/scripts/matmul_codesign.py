#!/usr/bin/env python3
"""Matmul co-design sweep: block granularity x accelerator count x eligibility.

Evaluates four candidate platforms for a 256x256 tiled matrix multiply
(64- or 128-edge blocks, one or two accelerators, FPGA-only or
heterogeneous execution) and prints the ranked summary. Everything is
generated on the fly; results land in --out-dir.

Usage:
    python scripts/matmul_codesign.py [--out-dir codesign-matmul]
"""
import argparse
import json
import sys
from pathlib import Path

from hetsim.cli import main as hetsim_main
from hetsim.platform import DIGEST_HEADER


def build_inputs(work_dir: Path) -> Path:
    work_dir.mkdir(parents=True, exist_ok=True)
    # Synthetic digests: the accelerators are several times faster per
    # element than one 667 MHz core running the same block kernel.
    (work_dir / "profiles128.csv").write_text(
        DIGEST_HEADER + "\nmxmBlock,150000,20000,10000,150\n"
    )
    (work_dir / "profiles64.csv").write_text(
        DIGEST_HEADER + "\nmxmBlock,5000,1000,500,150\n"
    )
    (work_dir / "base.json").write_text(
        json.dumps(
            {
                "cpu_freq_mhz": 667.0,
                "smp_workers": 2,
                "creation_overhead_ns": 1000,
                "submit_cost_ns": 500,
            },
            indent=2,
        )
    )
    trace128 = {"workload": "matmul", "nb": 2, "bs": 128}
    trace64 = {"workload": "matmul", "nb": 4, "bs": 64}
    fpga_only = {"eligibility_overrides": {"mxmBlock": ["fpga"]}}
    spec = {
        "trace": trace128,
        "base_config": "base.json",
        "baseline": "1acc-128+smp",
        "configs": [
            {
                "name": "1acc-128-fpga-only",
                "overrides": {
                    "accelerators": [{"kernel": "mxmBlock", "count": 1}],
                    "profiles_path": "profiles128.csv",
                    **fpga_only,
                },
            },
            {
                "name": "1acc-128+smp",
                "overrides": {
                    "accelerators": [{"kernel": "mxmBlock", "count": 1}],
                    "profiles_path": "profiles128.csv",
                },
            },
            {
                "name": "2acc-64-fpga-only",
                "trace": trace64,
                "overrides": {
                    "accelerators": [{"kernel": "mxmBlock", "count": 2}],
                    "profiles_path": "profiles64.csv",
                    **fpga_only,
                },
            },
            {
                "name": "2acc-64+smp",
                "trace": trace64,
                "overrides": {
                    "accelerators": [{"kernel": "mxmBlock", "count": 2}],
                    "profiles_path": "profiles64.csv",
                },
            },
        ],
    }
    spec_path = work_dir / "sweep.json"
    spec_path.write_text(json.dumps(spec, indent=2))
    return spec_path


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="codesign-matmul")
    args = parser.parse_args()
    out_dir = Path(args.out_dir)
    spec_path = build_inputs(out_dir)
    code = hetsim_main(["sweep", str(spec_path), "--out-dir", str(out_dir / "results")])
    if code == 0:
        print((out_dir / "results" / "summary.csv").read_text())
        print("Open the per-config *.trace.json files in a Chrome-trace viewer "
              "(chrome://tracing or https://ui.perfetto.dev) to inspect timelines.")
    return code


if __name__ == "__main__":
    sys.exit(main())
