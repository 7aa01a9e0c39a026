"""Regenerate the four figure fixtures (derivative table, staircase profile,
flat-plane witness, tree convergence) into one output directory."""
import argparse
import json
import sys
from pathlib import Path

from horoshift.cli import main


def run():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="figures-out")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    code = main(["figures", "--out", args.out, "--seed", str(args.seed)])
    if code == 0:
        verdicts = json.loads((Path(args.out) / "figures.json").read_text())
        for fig, ok in verdicts.items():
            print(f"{fig}: {'ok' if ok else 'MISMATCH'}")
    return code


if __name__ == "__main__":
    sys.exit(run())
