"""Best-of-seeds after-feedback harmonic mean reached by the alternating search.

Usage: python3 scripts/optimizer_recovery.py --m 4 --kind qam --seeds 16 [--out best.map]
"""

import argparse
import time

from mdbicm.mapping import serialize_mapping_file
from mdbicm.optimizer import SearchConfig, search


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--kind", default="qam")
    p.add_argument("--seeds", type=int, default=16)
    p.add_argument("--out", default=None, help="write the best mapping here")
    args = p.parse_args()
    best = None
    print("seed,phi_after,delta,seconds")
    for seed in range(args.seeds):
        start = time.perf_counter()
        res = search(SearchConfig(m=args.m, n=args.n, kind=args.kind, seed=seed))
        print(f"{seed},{res.report.phi_after:.6f},{res.report.delta:.6f},{time.perf_counter() - start:.1f}", flush=True)
        if best is None or res.report.phi_after > best.report.phi_after:
            best = res
    print(f"best phi_after {best.report.phi_after:.6f}")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(serialize_mapping_file(best.mapping))


if __name__ == "__main__":
    main()
