#!/usr/bin/env python3
"""Run every verification suite and collect the reports under reports/."""

import json
import pathlib
import sys

from holoflux.cli import SuiteConfig, run_suite
from holoflux.suites import SUITES


def main() -> int:
    seed = int(sys.argv[1]) if len(sys.argv) > 1 else 42
    out_dir = pathlib.Path(sys.argv[2]) if len(sys.argv) > 2 else pathlib.Path("reports")
    out_dir.mkdir(parents=True, exist_ok=True)
    failures = 0
    for name in sorted(SUITES):
        code, report = run_suite(SuiteConfig(suite=name, seed=seed))
        path = out_dir / f"{name}.json"
        path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
        n_pass = sum(1 for c in report["checks"] if c["pass"])
        total = len(report["checks"])
        status = "ok" if code == 0 else "FAIL"
        print(f"{name:24s} {n_pass}/{total} checks  [{status}]  "
              f"({report['wallclock']:.1f}s)  -> {path}")
        failures += code
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
