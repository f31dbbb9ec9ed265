"""Command-line interface: ``mdbicm <command> [options]``.

Exit codes: 0 success, 2 validation failure, 3 guard violation, 4 I/O or parse error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import fixtures
from .constellation import Kind, make_constellation
from .mapping import (
    MappingError,
    MappingFileError,
    check_propositions,
    parse_mapping_file,
    serialize_mapping_file,
)
from .metrics import GuardError, evaluate

EXIT_OK, EXIT_INVALID, EXIT_GUARD, EXIT_IO = 0, 2, 3, 4


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _float_list(text):
    try:
        return [float(v) for v in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a list of numbers, got {text!r}") from None


def _positive(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _seed(text):
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def _read_mapping(path, n=None):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}", EXIT_IO) from None
    try:
        return parse_mapping_file(text, n=n)
    except MappingFileError as exc:
        raise CliError(f"{path}: {exc}", EXIT_INVALID if exc.invalid else EXIT_IO) from None


def _write(path, text):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror}", EXIT_IO) from None


def cmd_gen(args):
    if args.random_mapping:
        from .optimizer import SearchConfig, restart_rng, repair_coincidences
        from .mapping import FullMapping2D, HalfMapping2D, Half, build_md_mapping, derive_chi_el

        config = SearchConfig(m=args.m, n=args.n, kind=args.constellation, seed=args.seed)
        rng = restart_rng(args.seed, 0)
        M = 2**args.m
        er = FullMapping2D.from_symbols(rng.permutation(M))
        orr = repair_coincidences(er, FullMapping2D.from_symbols(rng.permutation(M)), rng)
        chi = derive_chi_el(er)
        chi_ol = [s for s in range(M) if s not in chi]
        el = HalfMapping2D(rng.permutation(np.array(chi)), Half.EL)
        ol = HalfMapping2D(rng.permutation(np.array(chi_ol)), Half.OL)
        mu = build_md_mapping(args.m, args.n, config.constellation(), el, ol, er, orr, chi)
        _write(args.out, serialize_mapping_file(mu))
    else:
        _write(args.out, make_constellation(args.constellation, args.m).to_csv())
    return EXIT_OK


def cmd_eval(args):
    mu = _read_mapping(args.mapping, args.n)
    report = evaluate(mu, before=args.method != "none", method=args.method if args.method != "none" else "kdtree")
    if args.format == "json":
        text = json.dumps({k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in report.as_dict().items()}) + "\n"
    else:
        text = report.csv_header() + "\n" + report.csv_row() + "\n"
    _write(args.out, text)
    if report.phi_before_method == "guarded":
        print(f"note: phi_before not computed, mN = {mu.width} exceeds the search guard", file=sys.stderr)
    return EXIT_OK


def cmd_optimize(args):
    from .optimizer import SearchConfig, search

    config = SearchConfig(
        m=args.m,
        n=args.n,
        kind=args.constellation,
        it_num_r=args.it_num_r,
        it_num_l=args.it_num_l,
        it_num=args.it_num,
        bsa_max_rounds=args.bsa_max_rounds,
        seed=args.seed,
        threads=args.threads,
    )
    result = search(config)
    _write(args.out, serialize_mapping_file(result.mapping))
    trace_path = args.trace or (None if args.out in (None, "-") else f"{args.out}.trace.csv")
    rows = ["restart,psi_r,psi_l,delta,phi_after"] + [rec.csv_row() for rec in result.trace]
    if trace_path:
        _write(trace_path, "\n".join(rows) + "\n")
    print(
        f"winner restart {result.winner}: phi_after={result.report.phi_after:.6f} delta={result.report.delta:.6f}",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_verify(args):
    mu = _read_mapping(args.mapping, args.n)
    report = check_propositions(mu, limit=args.limit)
    lines = [
        f"bijective: {report.bijective}",
        f"nearest-neighbour label distance: {report.max_neighbor_distance} (bound m+1 = {mu.m + 1})",
        f"parity structure: {report.parity_ok}",
    ]
    lines += [f"FAIL {msg}" for msg in report.failures]
    lines.append("PASS" if report.ok else "FAIL")
    _write(args.out, "\n".join(lines) + "\n")
    if report.guard_exceeded and not [f for f in report.failures if not f.startswith("guard exceeded")]:
        return EXIT_GUARD
    return EXIT_OK if report.ok else EXIT_INVALID


def cmd_simulate(args):
    from .simulator import SimConfig, genie_floor, run_bicmid
    from .simulator.bicmid import SimulationGuardError

    mu = _read_mapping(args.mapping, args.n)
    try:
        config = SimConfig(
            mu,
            args.ebn0,
            interleaver_len=args.interleaver_len,
            iterations=args.iterations,
            min_bit_errors=args.min_errors,
            max_frames=args.max_frames,
            channel=args.channel,
            seed=args.seed,
            noiseless=args.noiseless,
            allow_large=args.allow_large,
            threads=args.threads,
        )
    except SimulationGuardError as exc:
        raise CliError(str(exc), EXIT_GUARD) from None
    points = genie_floor(config) if args.genie else run_bicmid(config)
    rows = ["ebn0_db,ber,frames,bit_errors"] + [p.csv_row() for p in points]
    _write(args.out, "\n".join(rows) + "\n")
    return EXIT_OK


def cmd_exit_chart(args):
    from .simulator.bicmid import DEMAP_GUARD
    from .simulator.exit import exit_decoder, exit_demapper

    rng = np.random.default_rng(np.random.SeedSequence([args.seed, 7]))
    grid = np.linspace(0.0, 0.99, args.points)
    if args.side == "decoder":
        curve = exit_decoder(grid, args.samples, rng)
    else:
        mu = _read_mapping(args.mapping, args.n) if args.mapping else None
        if mu is None:
            raise CliError("the demapper side needs a mapping file", EXIT_INVALID)
        if mu.width > DEMAP_GUARD and not args.allow_large:
            raise CliError(f"mN = {mu.width} exceeds the demapping guard ({DEMAP_GUARD})", EXIT_GUARD)
        if len(args.ebn0) != 1:
            raise CliError("the demapper side needs exactly one --ebn0 value", EXIT_INVALID)
        curve = exit_demapper(mu, args.ebn0[0], grid, args.samples, rng, args.channel)
    _write(args.out, curve.csv())
    return EXIT_OK


def cmd_export_fixtures(args):
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(f"cannot create {out}: {exc.strerror}", EXIT_IO) from None
    for name in fixtures.NAMES:
        _write(out / f"{name}.map", fixtures.fixture_text(name))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mdbicm", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, mapping=True):
        if mapping:
            sp.add_argument("mapping", help="mapping file")
            sp.add_argument("--n", type=_positive, default=None, help="vector length (overrides the file)")
        sp.add_argument("--out", default=None, help="output path (default: stdout)")

    g = sub.add_parser("gen", help="constellation CSV or a random structured mapping")
    g.add_argument("--constellation", choices=[k.value for k in Kind], default="qam")
    g.add_argument("--m", type=_positive, required=True)
    g.add_argument("--n", type=_positive, default=2)
    g.add_argument("--random-mapping", action="store_true")
    g.add_argument("--seed", type=_seed, default=0)
    common(g, mapping=False)
    g.set_defaults(func=cmd_gen)

    e = sub.add_parser("eval", help="harmonic means, costs and bound of a mapping")
    common(e)
    e.add_argument("--method", choices=["kdtree", "brute", "none"], default="kdtree")
    e.add_argument("--format", choices=["csv", "json"], default="csv")
    e.set_defaults(func=cmd_eval)

    o = sub.add_parser("optimize", help="alternating switching search")
    o.add_argument("--constellation", choices=[k.value for k in Kind], default="qam")
    o.add_argument("--m", type=_positive, required=True)
    o.add_argument("--n", type=_positive, default=2)
    o.add_argument("--it-num-r", type=_positive, default=10)
    o.add_argument("--it-num-l", type=_positive, default=10)
    o.add_argument("--it-num", type=_positive, default=32)
    o.add_argument("--bsa-max-rounds", type=_positive, default=None)
    o.add_argument("--seed", type=_seed, default=0)
    o.add_argument("--threads", type=_positive, default=1)
    o.add_argument("--trace", default=None, help="trace CSV (default: <out>.trace.csv)")
    common(o, mapping=False)
    o.set_defaults(func=cmd_optimize)

    v = sub.add_parser("verify", help="structural checks of a mapping")
    common(v)
    v.add_argument("--limit", type=_positive, default=20, help="largest mN enumerated")
    v.set_defaults(func=cmd_verify)

    def sim_flags(sp):
        sp.add_argument("--ebn0", type=_float_list, required=True, help="Eb/N0 values in dB")
        sp.add_argument("--channel", choices=["rayleigh", "awgn"], default="rayleigh")
        sp.add_argument("--seed", type=_seed, default=0)
        sp.add_argument("--allow-large", action="store_true", help="lift the mN <= 14 guard")

    s = sub.add_parser("simulate", help="BICM-ID bit error rate")
    common(s)
    sim_flags(s)
    s.add_argument("--iterations", type=_positive, default=7)
    s.add_argument("--interleaver-len", type=_positive, default=10000)
    s.add_argument("--min-errors", type=_positive, default=300)
    s.add_argument("--max-frames", type=_positive, default=2000)
    s.add_argument("--threads", type=_positive, default=1)
    s.add_argument("--noiseless", action="store_true")
    s.add_argument("--genie", action="store_true", help="genie feedback error-floor proxy")
    s.set_defaults(func=cmd_simulate)

    x = sub.add_parser("exit-chart", help="EXIT transfer curve")
    x.add_argument("mapping", nargs="?", default=None, help="mapping file (demapper side)")
    x.add_argument("--n", type=_positive, default=None)
    x.add_argument("--out", default=None)
    x.add_argument("--side", choices=["demapper", "decoder"], default="demapper")
    x.add_argument("--samples", type=_positive, default=20000)
    x.add_argument("--points", type=_positive, default=12)
    sim_flags(x)
    x.set_defaults(func=cmd_exit_chart, ebn0=[0.0])
    for action in x._actions:
        if action.dest == "ebn0":
            action.required = False

    f = sub.add_parser("export-fixtures", help="write the shipped mapping tables")
    f.add_argument("--out", required=True, help="output directory")
    f.set_defaults(func=cmd_export_fixtures)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (GuardError,) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except MappingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
