"""Genie-feedback BER of the proposed, switching-baseline and random 4-D 16-QAM mappings.

The baseline runs the classic switching algorithm on the whole 4-D mapping and
stops once its after-feedback harmonic mean reaches ``--baseline-target``.

Usage: python3 scripts/genie_compare.py --ebn0 0 1 2
"""

import argparse

import numpy as np

from mdbicm.fixtures import load_fixture
from mdbicm.mapping import random_table_mapping
from mdbicm.metrics import harmonic_mean_after
from mdbicm.optimizer import classic_md_bsa
from mdbicm.simulator import SimConfig, genie_floor


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--ebn0", type=float, nargs="+", required=True)
    p.add_argument("--interleaver", type=int, default=2400)
    p.add_argument("--frames", type=int, default=2000)
    p.add_argument("--min-errors", type=int, default=3000)
    p.add_argument("--baseline-target", type=float, default=2.5814)
    p.add_argument("--random-seed", type=int, default=12345)
    args = p.parse_args()
    proposed = load_fixture("16qam")
    baseline = classic_md_bsa(proposed, 4096, rng=np.random.default_rng(1), target=args.baseline_target)
    rnd = random_table_mapping(4, 2, proposed.constellation, np.random.default_rng(args.random_seed))
    print("mapping,phi_after,ebn0_db,ber,frames,bit_errors,sigma")
    for name, mu in (("proposed", proposed), ("baseline", baseline), ("random", rnd)):
        config = SimConfig(mu, args.ebn0, interleaver_len=args.interleaver, max_frames=args.frames,
                           min_bit_errors=args.min_errors)
        for point in genie_floor(config):
            sigma = point.sigma(config.info_bits)
            print(f"{name},{harmonic_mean_after(mu):.4f},{point.csv_row()},{sigma:.2e}", flush=True)


if __name__ == "__main__":
    main()
