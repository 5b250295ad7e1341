"""Run every scenario file in a directory and write JSON and CSV reports next to each other."""

import argparse
from pathlib import Path

from curvlab.checks import run_scenario
from curvlab.report import emit_report


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("scenarios", nargs="?", default=str(Path(__file__).resolve().parent.parent / "scenarios"))
    p.add_argument("--out", default="reports")
    args = p.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    worst = 0
    for path in sorted(Path(args.scenarios).glob("*.json")):
        report = run_scenario(path)
        emit_report(report, out / f"{path.stem}.json")
        emit_report(report, out / f"{path.stem}.csv", fmt="csv")
        print(f"{path.stem}: " + " ".join(f"{c.name}={c.status}" for c in report.checks))
        worst = max(worst, report.exit_code)
    return worst


if __name__ == "__main__":
    raise SystemExit(main())
