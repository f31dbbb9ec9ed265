"""BICM-ID BER of the proposed 4-D 16-QAM table against a seeded random MD mapping.

Usage: python3 scripts/ber_compare.py --ebn0 6 6.5 7 7.5 8 [--interleaver 2400] [--frames 300]
"""

import argparse

import numpy as np

from mdbicm.fixtures import load_fixture
from mdbicm.mapping import random_table_mapping
from mdbicm.metrics import harmonic_mean_after
from mdbicm.simulator import SimConfig, run_bicmid


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--ebn0", type=float, nargs="+", required=True)
    p.add_argument("--table", default="16qam")
    p.add_argument("--interleaver", type=int, default=2400)
    p.add_argument("--iterations", type=int, default=7)
    p.add_argument("--frames", type=int, default=300)
    p.add_argument("--min-errors", type=int, default=100)
    p.add_argument("--random-seed", type=int, default=12345)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    proposed = load_fixture(args.table)
    rnd = random_table_mapping(proposed.m, proposed.n, proposed.constellation, np.random.default_rng(args.random_seed))
    print("mapping,phi_after,ebn0_db,ber,frames,bit_errors")
    for name, mu in (("proposed", proposed), ("random", rnd)):
        config = SimConfig(mu, args.ebn0, interleaver_len=args.interleaver, iterations=args.iterations,
                           max_frames=args.frames, min_bit_errors=args.min_errors, seed=args.seed)
        for point in run_bicmid(config):
            print(f"{name},{harmonic_mean_after(mu):.4f},{point.csv_row()}", flush=True)


if __name__ == "__main__":
    main()
