import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mdbicm.constellation import Constellation, make_psk
from mdbicm import metrics
from mdbicm.fixtures import load_fixture
from mdbicm.mapping import TableMapping
from mdbicm.metrics import (
    SENTINEL,
    GuardError,
    build_cost_tables,
    delta,
    evaluate,
    harmonic_mean_after,
    harmonic_mean_before,
    k_const,
    omega_e,
    omega_o,
    psi_l,
    psi_r,
)
from helpers import random_mapping
from oracles import (
    cost_tables_by_enumeration,
    phi_after_by_loops,
    phi_before_by_loops,
    psi_l_by_enumeration,
    psi_r_by_enumeration,
)

SMALL = [("8psk", 2), ("8psk", 3), ("8qam", 2), ("16qam", 2)]


def test_gray_qpsk_closed_sum():
    # Gray QPSK on the unit circle: each bit flip moves to an adjacent point, |d|^2 = 2
    gray = np.array([[0], [1], [3], [2]])  # label -> symbol, symbols counter-clockwise
    mu = TableMapping(2, 1, make_psk(2), gray)
    assert harmonic_mean_after(mu) == pytest.approx(2.0, rel=1e-15)
    # natural labels: the flip of the low bit joins 1-3 and 0-2 across the circle; 8 / (4/2 + 4/4)
    natural = TableMapping(2, 1, make_psk(2), np.arange(4)[:, None])
    assert harmonic_mean_after(natural) == pytest.approx(8 / 3, rel=1e-14)
    assert harmonic_mean_after(natural) == pytest.approx(phi_after_by_loops(natural), rel=1e-14)


@pytest.mark.parametrize("name,n", SMALL)
def test_phi_after_matches_loops(name, n):
    mu = load_fixture(name, n)
    assert harmonic_mean_after(mu) == pytest.approx(phi_after_by_loops(mu), rel=1e-13)


@pytest.mark.parametrize("name,n", [("8psk", 2), ("8qam", 2)])
def test_phi_before_matches_loops(name, n):
    mu = load_fixture(name, n)
    ref = phi_before_by_loops(mu)
    assert harmonic_mean_before(mu, "kdtree") == pytest.approx(ref, rel=1e-12)
    assert harmonic_mean_before(mu, "brute") == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("name,n", [("8psk", 3), ("16qam", 2), ("32qam", 2)])
def test_phi_before_kdtree_matches_brute(name, n):
    mu = load_fixture(name, n)
    assert harmonic_mean_before(mu, "kdtree") == pytest.approx(harmonic_mean_before(mu, "brute"), rel=1e-12)


def test_phi_before_guards():
    mu = load_fixture("512qam")
    with pytest.raises(GuardError):
        harmonic_mean_before(mu, "brute")
    with pytest.raises(ValueError):
        harmonic_mean_before(load_fixture("8psk"), "sampled")


def test_degenerate_after_is_zero():
    # a label and its flip on the same vector cannot happen in a bijection; use a non-injective table
    mu = load_fixture("8psk")
    object.__setattr__(mu, "vectors", np.zeros_like(mu.vectors))
    assert harmonic_mean_after(mu) == 0.0


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0, 2 * np.pi))
def test_rotation_invariance(seed, angle):
    mu = random_mapping(3, 2, np.random.default_rng(seed))
    rot = Constellation(mu.constellation.points * np.exp(1j * angle), mu.constellation.kind, 3,
                        mu.constellation.per_symbol_energy)
    turned = type(mu)(mu.m, mu.n, rot, mu.lambda_er, mu.lambda_or, mu.lambda_el, mu.lambda_ol, mu.chi_el)
    assert harmonic_mean_after(turned) == pytest.approx(harmonic_mean_after(mu), rel=1e-12)
    assert harmonic_mean_before(turned) == pytest.approx(harmonic_mean_before(mu), rel=1e-12)


# cost tables


@pytest.mark.parametrize("m,n", [(m, n) for m in range(1, 8) for n in range(2, 8) if m * n <= 10])
def test_cost_tables_match_enumeration(m, n):
    t = build_cost_tables(m, n)
    a_l, a_r = cost_tables_by_enumeration(m, n)
    for table, ref in ((t.a_l, a_l), (t.a_r, a_r)):
        for alpha in range(2**m):
            for k, beta in enumerate(t.B[alpha]):
                assert table[alpha, k] == ref.get((alpha, int(beta)), 0)
        # no other pair occurs
        assert sum(ref.values()) == int(table.sum())


def test_cost_table_values():
    assert build_cost_tables(4, 2).a_l[0, 0] == 32
    assert build_cost_tables(4, 2).a_l[5, 3] == 8
    assert build_cost_tables(3, 3).a_r[0, 0] == 192
    assert build_cost_tables(4, 2).coefficient("l", 0, 3) == 0
    assert build_cost_tables(4, 2).coefficient("r", 0, 8) == 8
    with pytest.raises(ValueError):
        build_cost_tables(4, 1)


# cost functions


@pytest.mark.parametrize("name,n", SMALL + [("32qam", 2)])
def test_psi_match_enumeration_on_fixtures(name, n):
    mu = load_fixture(name, n)
    t = build_cost_tables(mu.m, n)
    pl = psi_l(mu.lambda_el, mu.lambda_ol, mu.chi_el, mu.constellation, t)
    pr = psi_r(mu.lambda_er, mu.lambda_or, mu.constellation, t)
    assert pl == pytest.approx(psi_l_by_enumeration(mu), rel=1e-12)
    assert pr == pytest.approx(psi_r_by_enumeration(mu), rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([(2, 2), (2, 3), (3, 2), (2, 5), (3, 3), (4, 2), (4, 3), (6, 2)]))
def test_psi_match_enumeration_random(seed, mn):
    mu = random_mapping(*mn, np.random.default_rng(seed))
    t = build_cost_tables(*mn)
    assert psi_l(mu.lambda_el, mu.lambda_ol, mu.chi_el, mu.constellation, t) == pytest.approx(
        psi_l_by_enumeration(mu), rel=1e-12
    )
    pr = psi_r(mu.lambda_er, mu.lambda_or, mu.constellation, t)
    ref = psi_r_by_enumeration(mu)
    assert (math.isinf(pr) and math.isinf(ref)) or pr == pytest.approx(ref, rel=1e-12)


def test_psi_homogeneity():
    mu = load_fixture("16qam")
    t = build_cost_tables(4, 2)
    c = mu.constellation
    s = 1.7
    big = Constellation(c.points * s, c.kind, c.m, c.per_symbol_energy * s**2)
    assert psi_l(mu.lambda_el, mu.lambda_ol, mu.chi_el, big, t) == pytest.approx(
        psi_l(mu.lambda_el, mu.lambda_ol, mu.chi_el, c, t) / s**2, rel=1e-12
    )
    assert psi_r(mu.lambda_er, mu.lambda_or, big, t) == pytest.approx(
        psi_r(mu.lambda_er, mu.lambda_or, c, t) / s**2, rel=1e-12
    )


def test_psi_r_sentinel():
    mu = load_fixture("8psk")
    t = build_cost_tables(3, 2)
    assert psi_r(mu.lambda_er, mu.lambda_er, mu.constellation, t) == SENTINEL
    assert math.isfinite(psi_r(mu.lambda_er, mu.lambda_or, mu.constellation, t))
    # the published 8-PSK arrays never put one label on the same symbol
    assert not np.any(mu.lambda_er.label_of == mu.lambda_or.label_of)


def test_psi_l_partition_overlap():
    mu = load_fixture("16qam")
    with pytest.raises(ValueError):
        psi_l(mu.lambda_el, mu.lambda_el, mu.chi_el, mu.constellation, build_cost_tables(4, 2))


def test_delta_properties():
    assert delta(SENTINEL, 1.0, 4, 2) == 0.0
    assert delta(10.0, 30.0, 4, 2) == pytest.approx(2 * delta(20.0, 60.0, 4, 2))
    assert delta(1.0, 1.0, 4, 2) == pytest.approx(1 / (4 * k_const(4, 2)))
    with pytest.raises(ValueError):
        delta(-1.0, 1.0, 4, 2)


# bound chain


@given(st.lists(st.floats(1e-6, 1e6), min_size=1, max_size=50))
def test_harmonic_inequality(ys):
    ys = np.array(ys)
    assert 1 / ys.sum() <= np.mean(1 / ys) * (1 + 1e-12)


@pytest.mark.parametrize("name,n", SMALL + [("32qam", 2), ("64qam", 2), ("128qam", 2)])
def test_bound_chain_fixtures(name, n):
    mu = load_fixture(name, n)
    r = evaluate(mu, before=False)
    assert r.delta <= r.phi_after * (1 + 1e-9)
    oe, oo = omega_e(mu), omega_o(mu)
    assert oe == pytest.approx(oo, rel=1e-12)
    assert 1 / r.phi_after == pytest.approx(2 * oe, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([(2, 2), (3, 2), (3, 3), (4, 2), (5, 2)]))
def test_bound_chain_random(seed, mn):
    mu = random_mapping(*mn, np.random.default_rng(seed))
    r = evaluate(mu, before=False)
    assert r.delta <= r.phi_after * (1 + 1e-9)
    assert omega_e(mu) == pytest.approx(omega_o(mu), rel=1e-12)


def test_metric_report_csv(monkeypatch):
    r = evaluate(load_fixture("8psk"))
    assert r.csv_header() == "phi_before,phi_after,delta,psi_l,psi_r"
    assert len(r.csv_row().split(",")) == 5
    monkeypatch.setattr(metrics, "KDTREE_LIMIT", 5)
    r = evaluate(load_fixture("8psk"), before=True)
    assert math.isnan(r.phi_before) and r.phi_before_method == "guarded"

