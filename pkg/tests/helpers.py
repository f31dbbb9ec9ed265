"""Shared generators for the tests."""

import numpy as np

from mdbicm.constellation import make_constellation
from mdbicm.mapping import FullMapping2D, Half, HalfMapping2D, build_md_mapping, derive_chi_el


def random_mapping(m, n, rng, kind=None):
    M = 2**m
    er = FullMapping2D.from_symbols(rng.permutation(M))
    orr = FullMapping2D.from_symbols(rng.permutation(M))
    chi = derive_chi_el(er)
    chi_ol = [s for s in range(M) if s not in chi]
    el = HalfMapping2D(rng.permutation(np.array(chi)), Half.EL)
    ol = HalfMapping2D(rng.permutation(np.array(chi_ol)), Half.OL)
    if kind is None:
        kind = "qam" if m % 2 == 0 and m >= 4 else ("cross" if m in (5, 7, 9) else "psk")
    cons = make_constellation(kind, m)
    return build_md_mapping(m, n, cons, el, ol, er, orr, chi)


def cost_models(m, n, rng):
    """The three switching cost models on a random instance, each with a starting assignment."""
    from mdbicm.constellation import scale_for_vector
    from mdbicm.metrics import build_cost_tables
    from mdbicm.optimizer import MDHarmonicModel, psi_l_model, psi_r_model, repair_coincidences

    cons = scale_for_vector(make_constellation("qam" if m == 4 else "psk", m), n)
    t = build_cost_tables(m, n)
    M = 2**m
    frozen = FullMapping2D.from_symbols(rng.permutation(M))
    er = repair_coincidences(frozen, FullMapping2D.from_symbols(rng.permutation(M)), rng)
    chi = derive_chi_el(frozen)
    chi_ol = [s for s in range(M) if s not in chi]
    ol = HalfMapping2D(rng.permutation(np.array(chi_ol)), Half.OL)
    mu = random_mapping(m, n, rng)
    return [
        (psi_r_model(cons, frozen, t), er.label_of.copy()),
        (psi_l_model(cons, np.array(chi), ol, t), rng.permutation(M // 2)),
        (MDHarmonicModel(mu.vectors, mu.width), rng.permutation(mu.num_labels)),
    ]


# acceptance results, reported in the terminal summary
ACCEPTANCE = {}


def record(criterion, check, ok, detail=""):
    """Log one acceptance check and return ``ok``."""
    ACCEPTANCE.setdefault(criterion, []).append((check, bool(ok), detail))
    print(f"criterion {criterion} [{check}]: {'PASS' if ok else 'FAIL'} {detail}")
    return ok
