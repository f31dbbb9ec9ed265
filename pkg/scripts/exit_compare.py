"""EXIT curves and tunnel-opening Eb/N0 of the proposed and a random MD mapping.

Writes ``<out>/decoder.csv`` and one demapper curve per mapping at ``--ebn0``,
then scans ``--grid`` for the first Eb/N0 with an open tunnel.

Usage: python3 scripts/exit_compare.py --out exit_out [--table 16qam] [--ebn0 6]
"""

import argparse
from pathlib import Path

import numpy as np

from mdbicm.fixtures import load_fixture
from mdbicm.mapping import random_table_mapping
from mdbicm.simulator.exit import exit_decoder, exit_demapper, tunnel_threshold


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", required=True)
    p.add_argument("--table", default="16qam")
    p.add_argument("--ebn0", type=float, default=6.0)
    p.add_argument("--grid", type=float, nargs=3, default=[4.5, 7.0, 0.25], metavar=("START", "STOP", "STEP"))
    p.add_argument("--samples", type=int, default=20000)
    p.add_argument("--random-seed", type=int, default=12345)
    args = p.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ia = np.linspace(0.0, 0.99, 12)
    decoder = exit_decoder(ia, 2 * args.samples, np.random.default_rng(1))
    (out / "decoder.csv").write_text(decoder.csv())
    proposed = load_fixture(args.table)
    rnd = random_table_mapping(proposed.m, proposed.n, proposed.constellation, np.random.default_rng(args.random_seed))
    start, stop, step = args.grid
    snrs = np.arange(start, stop + step / 2, step)
    for name, mu in (("proposed", proposed), ("random", rnd)):
        curve = exit_demapper(mu, args.ebn0, ia, args.samples, np.random.default_rng(3))
        (out / f"demapper_{name}.csv").write_text(curve.csv())
        th = tunnel_threshold(mu, snrs, decoder, ia, args.samples, np.random.default_rng(2))
        print(f"{name}: tunnel opens at {th} dB", flush=True)


if __name__ == "__main__":
    main()
