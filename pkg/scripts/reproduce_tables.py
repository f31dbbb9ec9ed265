"""Harmonic means, costs and bound of every shipped mapping table.

Usage: python3 scripts/reproduce_tables.py [--out results.csv]
"""

import argparse
import time

from mdbicm import fixtures
from mdbicm.metrics import evaluate

CASES = [(name, 2) for name in fixtures.NAMES] + [("8psk", 3), ("8qam", 3)]


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", default=None, help="CSV output (default: stdout only)")
    args = p.parse_args()
    rows = ["table,n,phi_before,phi_after,delta,psi_l,psi_r,seconds"]
    for name, n in CASES:
        start = time.perf_counter()
        r = evaluate(fixtures.load_fixture(name, n))
        rows.append(f"{name},{n},{r.csv_row()},{time.perf_counter() - start:.2f}")
        print(rows[-1], flush=True)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write("\n".join(rows) + "\n")


if __name__ == "__main__":
    main()
