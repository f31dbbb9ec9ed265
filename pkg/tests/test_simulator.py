import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import erfc

from mdbicm.constellation import make_psk
from mdbicm.fixtures import load_fixture
from mdbicm.mapping import TableMapping
from mdbicm.simulator import (
    SimConfig,
    bcjr_decode,
    conv_encode,
    genie_floor,
    run_bicmid,
    viterbi_decode,
)
from mdbicm.simulator.bicmid import SimulationGuardError, round_interleaver
from mdbicm.simulator.channel import (
    ChannelKind,
    bits_to_labels,
    channel,
    ebn0_to_n0,
    labels_to_bits,
    modulate,
)
from mdbicm.simulator.demapper import demap_extrinsic, demap_genie
from mdbicm.simulator.exit import (
    J,
    J_inv,
    ExitCurve,
    Side,
    exit_decoder,
    exit_demapper,
    gaussian_apriori,
    mutual_information,
    trajectory,
    tunnel_open,
)
from mdbicm.simulator.interleave import deinterleave, interleave, permutation
from oracles import demap_probability_domain, map_coded_bits

SIMULABLE = [("8psk", 2), ("8psk", 3), ("8qam", 2), ("8qam", 3), ("16qam", 2), ("32qam", 2), ("64qam", 2), ("128qam", 2)]

bit_arrays = st.lists(st.integers(0, 1), min_size=1, max_size=40).map(np.array)


# convolutional code


def test_impulse_response():
    # 13 -> 1 + D^2 + D^3, 15 -> 1 + D + D^3, outputs interleaved c1 c2
    assert conv_encode([1]).tolist() == [1, 1, 0, 1, 1, 0, 1, 1]
    assert conv_encode([0, 0]).tolist() == [0] * 10


@given(bit_arrays, st.integers(0, 2**32 - 1))
def test_encoder_linear(u, seed):
    v = np.random.default_rng(seed).integers(0, 2, len(u))
    assert np.array_equal(conv_encode(u ^ v), conv_encode(u) ^ conv_encode(v))


@given(bit_arrays)
def test_encoder_terminates(u):
    c = conv_encode(u)
    assert len(c) == 2 * (len(u) + 3)
    # the tail drives the register to zero: appending zeros only appends zeros
    assert np.array_equal(conv_encode(np.concatenate([u, [0, 0]]))[: len(c) - 6], c[:-6])


@settings(deadline=None)
@given(bit_arrays)
def test_viterbi_identity(u):
    llr = 4.0 * (1 - 2 * conv_encode(u).astype(float))
    assert np.array_equal(viterbi_decode(llr), u)
    _, decisions, _ = bcjr_decode(llr, len(u))
    assert np.array_equal(decisions, u)


@pytest.mark.parametrize("seed", range(6))
def test_bcjr_matches_exhaustive_map(seed):
    rng = np.random.default_rng(seed)
    k = 8
    llr = rng.normal(0, 2.5, 2 * (k + 3))
    ext, decisions, info = bcjr_decode(llr, k)
    app_c, app_u = map_coded_bits(llr, k)
    np.testing.assert_allclose(ext + llr, app_c, rtol=0, atol=1e-9)
    np.testing.assert_allclose(info, app_u, rtol=0, atol=1e-9)
    assert np.array_equal(decisions, (app_u < 0).astype(np.int8))


def test_bcjr_extrinsic_excludes_intrinsic():
    rng = np.random.default_rng(3)
    llr = rng.normal(0, 2, 22)
    ext, _, _ = bcjr_decode(llr, 8)
    moved = llr.copy()
    moved[5] += 7.0
    ext2, _, _ = bcjr_decode(moved, 8)
    assert ext2[5] == pytest.approx(ext[5], abs=1e-9)


def test_bcjr_rejects_bad_input():
    for bad in ([0.0] * 5, [0.0] * 6, [np.nan] * 8):
        with pytest.raises(ValueError):
            bcjr_decode(np.array(bad))
    with pytest.raises(ValueError):
        bcjr_decode(np.zeros(10), 4)


# interleaver and bit grouping


@given(st.integers(1, 3000), st.integers(0, 2**32 - 1))
def test_interleaver_roundtrip(length, seed):
    x = np.arange(length)
    perm = permutation(length, seed)
    assert sorted(perm.tolist()) == list(range(length))
    assert np.array_equal(deinterleave(interleave(x, seed), seed), x)
    assert np.array_equal(permutation(length, seed), perm)


@given(st.integers(1, 16), st.integers(0, 2**32 - 1))
def test_label_bits_roundtrip(width, seed):
    labels = np.random.default_rng(seed).integers(0, 2**width, 50)
    bits = labels_to_bits(labels, width)
    assert np.array_equal(bits_to_labels(bits.ravel(), width), labels)
    assert bits_to_labels([1, 0, 0, 0], 4)[0] == 8


def test_bits_to_labels_length_check():
    with pytest.raises(ValueError):
        bits_to_labels(np.zeros(7), 4)


# channel


def test_ebn0_to_n0():
    assert ebn0_to_n0(0.0, 4, 2) == pytest.approx(0.25)
    assert ebn0_to_n0(10.0, 4, 2) == pytest.approx(0.025)
    assert ebn0_to_n0(3.0, 2, 1, rate=1.0) == pytest.approx(0.5 / 10**0.3)


def test_rayleigh_and_noise_moments():
    rng = np.random.default_rng(0)
    F = 200_000
    y, h = channel(np.zeros((F, 2), dtype=complex), 0.3, "rayleigh", rng)
    assert np.mean(h**2) == pytest.approx(1.0, abs=5 * np.std(h**2) / np.sqrt(F))
    assert np.all(h >= 0)
    p = np.abs(y) ** 2
    assert np.mean(p) == pytest.approx(0.3, abs=5 * np.std(p) / np.sqrt(p.size))
    assert np.mean(y.real**2) == pytest.approx(0.15, rel=0.02)
    _, h = channel(np.zeros((10, 2), dtype=complex), 0.3, ChannelKind.AWGN, rng)
    assert np.all(h == 1)


@pytest.mark.parametrize("name,n", SIMULABLE)
def test_vector_energy(name, n):
    mu = load_fixture(name, n)
    assert np.mean(np.sum(np.abs(mu.vectors) ** 2, axis=1)) == pytest.approx(1.0, rel=1e-12)


def test_modulate_shapes():
    mu = load_fixture("16qam")
    bits = np.random.default_rng(1).integers(0, 2, 8 * 5)
    X = modulate(mu, bits)
    assert X.shape == (5, 2)
    assert np.array_equal(X, mu.vectors[bits_to_labels(bits, 8)])


# demapper


@pytest.mark.parametrize("name,n", [("8psk", 2), ("16qam", 2), ("8psk", 3)])
def test_demapper_matches_probability_oracle(name, n):
    mu = load_fixture(name, n)
    rng = np.random.default_rng(5)
    labels = rng.integers(0, mu.num_labels, 4)
    n0 = 0.3
    y, h = channel(mu.vectors[labels], n0, "rayleigh", rng)
    apriori = rng.normal(0, 1.5, (4, mu.width))
    out = demap_extrinsic(y, h, mu.vectors, apriori, n0)
    ref = demap_probability_domain(y, h, mu.vectors, apriori, n0)
    np.testing.assert_allclose(out, ref, rtol=0, atol=1e-9)


def test_demapper_extrinsic_excludes_own_prior():
    mu = load_fixture("16qam")
    rng = np.random.default_rng(2)
    y, h = channel(mu.vectors[[3, 77]], 0.2, "rayleigh", rng)
    apriori = rng.normal(0, 2, (2, 8))
    out = demap_extrinsic(y, h, mu.vectors, apriori, 0.2)
    apriori[:, 4] += 9.0
    out2 = demap_extrinsic(y, h, mu.vectors, apriori, 0.2)
    np.testing.assert_allclose(out2[:, 4], out[:, 4], atol=1e-9)
    assert not np.allclose(out2[:, 3], out[:, 3])


def test_demapper_chunking(monkeypatch):
    from mdbicm.simulator import demapper

    mu = load_fixture("8psk")
    rng = np.random.default_rng(8)
    y, h = channel(mu.vectors[rng.integers(0, 64, 50)], 0.1, "rayleigh", rng)
    ap = rng.normal(0, 1, (50, 6))
    whole = demap_extrinsic(y, h, mu.vectors, ap, 0.1)
    monkeypatch.setattr(demapper, "CHUNK_ENTRIES", 64 * 7)
    np.testing.assert_allclose(demap_extrinsic(y, h, mu.vectors, ap, 0.1), whole, rtol=1e-12, atol=1e-12)


def test_demapper_rejects_bad_input():
    mu = load_fixture("8psk")
    y = mu.vectors[:2]
    with pytest.raises(ValueError):
        demap_extrinsic(y, np.ones(2), mu.vectors, np.zeros((2, 5)), 0.1)
    with pytest.raises(ValueError):
        demap_extrinsic(y, np.ones(2), mu.vectors, np.zeros((2, 6)), 0.0)


def test_genie_demapper_two_candidate_llr():
    mu = load_fixture("16qam")
    rng = np.random.default_rng(4)
    labels = rng.integers(0, 256, 3)
    n0 = 0.15
    y, h = channel(mu.vectors[labels], n0, "rayleigh", rng)
    out = demap_genie(y, h, mu.vectors, labels, n0)
    for f in range(3):
        for k in range(8):
            bit = 1 << (7 - k)
            p0 = math.exp(-np.sum(np.abs(y[f] - h[f] * mu.vectors[labels[f] & ~bit]) ** 2) / n0)
            p1 = math.exp(-np.sum(np.abs(y[f] - h[f] * mu.vectors[labels[f] | bit]) ** 2) / n0)
            assert out[f, k] == pytest.approx(math.log(p0 / p1), abs=1e-9)


def test_uncoded_qpsk_awgn_matches_q_function():
    gray = TableMapping(2, 1, make_psk(2), np.array([[0], [1], [3], [2]]))
    rng = np.random.default_rng(11)
    ebn0 = 4.0
    n0 = ebn0_to_n0(ebn0, 2, 1, rate=1.0)
    labels = rng.integers(0, 4, 100_000)
    y, h = channel(gray.vectors[labels], n0, "awgn", rng)
    llr = demap_extrinsic(y, h, gray.vectors, np.zeros((len(y), 2)), n0)
    errors = np.count_nonzero((llr < 0) != labels_to_bits(labels, 2).astype(bool))
    ber = errors / llr.size
    ref = 0.5 * erfc(math.sqrt(10 ** (ebn0 / 10)))
    assert abs(ber - ref) < 4 * math.sqrt(ref / llr.size)


# link


@pytest.mark.parametrize("name,n", SIMULABLE)
def test_noiseless_identity(name, n):
    mu = load_fixture(name, n)
    config = SimConfig(mu, [20.0], interleaver_len=600, iterations=2, max_frames=2, noiseless=True)
    [point] = run_bicmid(config)
    assert point.bit_errors == 0 and point.frames == 2


def test_sim_config_guards_and_rounding():
    with pytest.raises(SimulationGuardError):
        SimConfig(load_fixture("256qam"), [10.0])
    SimConfig(load_fixture("256qam"), [10.0], allow_large=True)
    assert round_interleaver(2400, 8) == 2400
    assert round_interleaver(2400, 9) % 18 == 0
    assert SimConfig(load_fixture("16qam"), [5], interleaver_len=2400).info_bits == 1197
    with pytest.raises(ValueError):
        SimConfig(load_fixture("16qam"), [5], iterations=0)


def test_ber_accounting_and_determinism():
    mu = load_fixture("16qam")
    config = SimConfig(mu, [4.0, 5.0], interleaver_len=400, iterations=3, min_bit_errors=20, max_frames=6, seed=9)
    a = run_bicmid(config)
    b = run_bicmid(config)
    assert [p.csv_row() for p in a] == [p.csv_row() for p in b]
    for p in a:
        assert p.ber == p.bit_errors / (p.frames * config.info_bits)
        assert len(p.errors_by_iteration) == 3
        assert p.csv_row().count(",") == 3
    c = run_bicmid(SimConfig(mu, [4.0, 5.0], interleaver_len=400, iterations=3, min_bit_errors=20, max_frames=6,
                             seed=9, threads=2))
    assert [p.csv_row() for p in a] == [p.csv_row() for p in c]


def test_iterations_help_at_moderate_snr():
    mu = load_fixture("16qam")
    [p] = run_bicmid(SimConfig(mu, [7.0], interleaver_len=2400, iterations=4, max_frames=3, min_bit_errors=10**6))
    assert p.errors_by_iteration[-1] < p.errors_by_iteration[0]


def test_genie_not_worse_than_first_iteration():
    mu = load_fixture("16qam")
    kw = dict(interleaver_len=2400, iterations=1, max_frames=4, min_bit_errors=10**6, seed=3)
    [first] = run_bicmid(SimConfig(mu, [5.0], **kw))
    [genie] = genie_floor(SimConfig(mu, [5.0], **kw))
    assert genie.bit_errors < first.bit_errors


# EXIT


def test_j_function_inverse():
    s = np.linspace(0.05, 6, 50)
    np.testing.assert_allclose(J_inv(J(s)), s, rtol=0.02, atol=0.02)
    assert J(0.0) == 0.0 and float(J(20.0)) == 1.0
    assert np.all(np.diff(J(np.linspace(0, 9.9, 200))) > 0)
    with pytest.raises(ValueError):
        J_inv(1.5)


@pytest.mark.parametrize("ia", [0.1, 0.5, 0.9])
def test_gaussian_apriori_carries_target_information(ia):
    rng = np.random.default_rng(1)
    bits = rng.integers(0, 2, 200_000)
    assert mutual_information(gaussian_apriori(bits, ia, rng), bits) == pytest.approx(ia, abs=0.015)


def test_mutual_information_limits():
    bits = np.array([0, 1] * 500)
    assert mutual_information(np.zeros(1000), bits) == pytest.approx(0.0, abs=1e-12)
    assert mutual_information(40.0 * (1 - 2 * bits), bits) == pytest.approx(1.0, abs=1e-12)


def test_exit_demapper_monotone_and_zero_point():
    mu = load_fixture("16qam")
    grid = np.linspace(0, 0.95, 6)
    curve = exit_demapper(mu, 6.0, grid, 4000, np.random.default_rng(0))
    band = 3 * np.hypot(curve.ie_std[1:], curve.ie_std[:-1])
    assert np.all(np.diff(curve.ie_values) >= -band)
    # with I_A = 0 the a priori LLRs are exactly zero
    rng = np.random.default_rng(0)
    labels = rng.integers(0, 256, 4000)
    bits = labels_to_bits(labels, 8)
    y, h = channel(mu.vectors[labels], ebn0_to_n0(6.0, 4, 2), "rayleigh", rng)
    plain = mutual_information(demap_extrinsic(y, h, mu.vectors, np.zeros(bits.shape), ebn0_to_n0(6.0, 4, 2)), bits)
    assert curve.ie_values[0] == pytest.approx(plain, abs=1e-12)
    assert curve.csv().splitlines()[0] == "ia,ie"


def test_exit_decoder_monotone():
    curve = exit_decoder(np.linspace(0.05, 0.95, 6), 20_000, np.random.default_rng(2), block=500)
    band = 3 * np.hypot(curve.ie_std[1:], curve.ie_std[:-1])
    assert np.all(np.diff(curve.ie_values) >= -band)
    assert curve.side is Side.DECODER


def test_trajectory_on_synthetic_curves():
    grid = np.linspace(0, 0.99, 12)
    dec = ExitCurve(grid, grid**0.5, np.zeros(12), None, Side.DECODER)
    good = ExitCurve(grid, 0.6 + 0.4 * grid, np.zeros(12), 1.0, Side.DEMAPPER)
    bad = ExitCurve(grid, 0.1 + 0.05 * grid, np.zeros(12), 1.0, Side.DEMAPPER)
    assert tunnel_open(good, dec)
    assert not tunnel_open(bad, dec)
    steps = trajectory(good, dec)
    assert all(b[0] >= a[0] for a, b in zip(steps, steps[1:]))
