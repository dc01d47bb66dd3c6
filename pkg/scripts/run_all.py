"""Run every config in scripts/configs through the ewalk CLI.

Usage::

    python3 scripts/run_all.py --out results [--jobs K] [--skip velocity_map]

Each config writes to ``<out>/<config stem>/``.
"""

import argparse
import sys
from pathlib import Path

from ewalk.cli import main as ewalk_main

CONFIGS = Path(__file__).parent / "configs"


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="results")
    parser.add_argument("--jobs", type=int, default=None)
    parser.add_argument("--skip", nargs="*", default=[], help="config stems to skip")
    args = parser.parse_args(argv)

    status = 0
    for cfg in sorted(CONFIGS.glob("*.cfg")):
        if cfg.stem in args.skip:
            continue
        print(f"running {cfg.stem}", flush=True)
        cmd = ["run", str(cfg), "--out", str(Path(args.out) / cfg.stem)]
        if args.jobs:
            cmd += ["--jobs", str(args.jobs)]
        rc = ewalk_main(cmd)
        if rc:
            print(f"  {cfg.stem} exited with status {rc}", file=sys.stderr)
            status = rc
    return status


if __name__ == "__main__":
    sys.exit(main())
