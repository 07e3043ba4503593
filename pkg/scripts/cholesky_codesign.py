#!/usr/bin/env python3
"""Cholesky accelerator-selection sweep: which kernels deserve the fabric?

A blocked Cholesky interleaves four kernels; the factorization kernel
(dpotrf) stays on the SMP. This sweep compares giving all hardware
resources to a single kernel (FR-*) against every two-accelerator
combination built around dgemm, and prints the ranked summary.

Usage:
    python scripts/cholesky_codesign.py [--nb 8] [--out-dir codesign-cholesky]
"""
import argparse
import json
import sys
from pathlib import Path

from hetsim.cli import main as hetsim_main
from hetsim.platform import DIGEST_HEADER
from hetsim.trace import write_trace
from hetsim.workloads import cholesky_spec, gen_cholesky


def build_inputs(work_dir: Path, nb: int) -> Path:
    work_dir.mkdir(parents=True, exist_ok=True)
    write_trace(gen_cholesky(cholesky_spec(nb)), work_dir / "cholesky.jsonl")
    (work_dir / "profiles.csv").write_text(
        DIGEST_HEADER
        + "\n"
        + "dgemm,80000,6000,3000,150\n"
        + "dsyrk,50000,4000,2000,150\n"
        + "dtrsm,50000,4000,2000,150\n"
    )
    (work_dir / "base.json").write_text(
        json.dumps(
            {
                "cpu_freq_mhz": 667.0,
                "smp_workers": 2,
                "creation_overhead_ns": 1000,
                "submit_cost_ns": 500,
                "profiles_path": "profiles.csv",
            },
            indent=2,
        )
    )

    def accels(*pairs):
        return {"accelerators": [{"kernel": k, "count": c} for k, c in pairs]}

    spec = {
        "trace": "cholesky.jsonl",
        "base_config": "base.json",
        "baseline": "FR-dsyrk",
        "configs": [
            {"name": "FR-dgemm", "overrides": accels(("dgemm", 1))},
            {"name": "FR-dsyrk", "overrides": accels(("dsyrk", 1))},
            {"name": "FR-dtrsm", "overrides": accels(("dtrsm", 1))},
            {"name": "dgemm+dgemm", "overrides": accels(("dgemm", 2))},
            {"name": "dgemm+dsyrk", "overrides": accels(("dgemm", 1), ("dsyrk", 1))},
            {"name": "dgemm+dtrsm", "overrides": accels(("dgemm", 1), ("dtrsm", 1))},
        ],
    }
    spec_path = work_dir / "sweep.json"
    spec_path.write_text(json.dumps(spec, indent=2))
    return spec_path


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--nb", type=int, default=8, help="blocks per matrix dimension")
    parser.add_argument("--out-dir", default="codesign-cholesky")
    args = parser.parse_args()
    out_dir = Path(args.out_dir)
    spec_path = build_inputs(out_dir, args.nb)
    code = hetsim_main(["sweep", str(spec_path), "--out-dir", str(out_dir / "results")])
    if code == 0:
        print((out_dir / "results" / "summary.csv").read_text())
    return code


if __name__ == "__main__":
    sys.exit(main())
