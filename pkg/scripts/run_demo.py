"""Run the whole pipeline on the demo cohort and print the comparison report.

Equivalent to chaining the CLI stages by hand:
ampute -> gen-survey -> simulate-crowd -> impute-mice -> pool -> report.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from crowdimpute.cli import main as cli_main


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--data", default="demo-data", help="directory from make_demo_data.py")
    parser.add_argument("--outdir", default="demo-run", help="artifact directory (default demo-run)")
    parser.add_argument("--target", action="append", help="column(s) to mask (default fev)")
    parser.add_argument("--n", type=int, default=10, help="cells to mask per target (default 10)")
    parser.add_argument("--k", type=int, default=30, help="judgments per question (default 30)")
    parser.add_argument("--m", type=int, default=30, help="machine imputations (default 30)")
    parser.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    parser.add_argument("--preset", default="experienced", help="persona preset for the crowd")
    parser.add_argument("--format", default="txt", choices=("txt", "md", "json"))
    args = parser.parse_args()

    data = Path(args.data)
    csv_path = data / "cohort.csv"
    schema_path = data / "schema.json"
    if not csv_path.is_file():
        print(f"no {csv_path}; run scripts/make_demo_data.py first", file=sys.stderr)
        return 2

    targets = args.target or ["fev"]
    argv = [
        "run",
        "--dataset", str(csv_path),
        "--schema", str(schema_path),
        "--outdir", args.outdir,
        "--n", str(args.n),
        "--k", str(args.k),
        "--m", str(args.m),
        "--seed", str(args.seed),
        "--preset", args.preset,
        "--format", args.format,
    ]
    for t in targets:
        argv += ["--target", t]
    return cli_main(argv)


if __name__ == "__main__":
    sys.exit(main())
