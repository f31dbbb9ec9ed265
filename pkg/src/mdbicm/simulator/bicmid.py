"""Monte-Carlo BICM-ID link: encoder, interleaver, MD modulator, fading channel, iterative receiver."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelKind, channel, ebn0_to_n0, labels_to_bits, bits_to_labels
from .coding import MEMORY, bcjr_decode, conv_encode
from .demapper import demap_extrinsic, demap_genie
from .interleave import permutation

DEMAP_GUARD = 14


class SimulationGuardError(ValueError):
    """The mapping is too large for exhaustive demapping without an override."""


def round_interleaver(length: int, width: int) -> int:
    """Nearest multiple of ``lcm(mN, 2)`` to ``length`` (at least one multiple)."""
    step = math.lcm(width, 2)
    return max(step * round(length / step), step * math.ceil((2 * MEMORY + 2) / step))


@dataclass
class SimConfig:
    """Link parameters; ``interleaver_len`` is rounded to a multiple of ``mN`` and 2."""

    mapping: object
    ebn0_db_list: list
    interleaver_len: int = 10000
    iterations: int = 7
    min_bit_errors: int = 300
    max_frames: int = 2000
    channel: ChannelKind | str = ChannelKind.RAYLEIGH
    seed: int = 0
    noiseless: bool = False
    allow_large: bool = False
    threads: int = 1

    def __post_init__(self):
        self.channel = ChannelKind(self.channel)
        width = self.mapping.width
        if width > DEMAP_GUARD and not self.allow_large:
            raise SimulationGuardError(
                f"mN = {width} exceeds the demapping guard ({DEMAP_GUARD}); set allow_large"
            )
        self.interleaver_len = round_interleaver(self.interleaver_len, width)
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.min_bit_errors < 1 or self.max_frames < 1:
            raise ValueError("stopping rule needs positive min_bit_errors and max_frames")
        self.ebn0_db_list = [float(x) for x in self.ebn0_db_list]

    @property
    def info_bits(self) -> int:
        return self.interleaver_len // 2 - MEMORY


@dataclass
class BerPoint:
    ebn0_db: float
    ber: float
    frames: int
    bit_errors: int
    errors_by_iteration: list = field(default_factory=list)

    def csv_row(self) -> str:
        return f"{self.ebn0_db:g},{self.ber:.6e},{self.frames},{self.bit_errors}"

    def sigma(self, bits_per_frame: int) -> float:
        """Binomial standard deviation of the BER estimate."""
        n = self.frames * bits_per_frame
        p = self.ber
        return math.sqrt(max(p * (1 - p), 1.0 / n**2) / n)


def frame_rng(seed: int, point: int, frame: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, point, frame]))


def _transmit(config: SimConfig, rng, n0):
    mu = config.mapping
    info = rng.integers(0, 2, config.info_bits, dtype=np.int8)
    coded = conv_encode(info)
    perm = permutation(config.interleaver_len, config.seed)
    tx_bits = coded[perm]
    labels = bits_to_labels(tx_bits, mu.width)
    X = mu.vectors[labels]
    if config.noiseless:
        y, h = channel(X, 0.0, config.channel, rng)
    else:
        y, h = channel(X, n0, config.channel, rng)
    return info, labels, y, h, perm


def simulate_frame(config: SimConfig, n0: float, rng):
    """Errors after each iteration for one frame."""
    mu = config.mapping
    info, _, y, h, perm = _transmit(config, rng, n0)
    apriori = np.zeros((len(y), mu.width))
    errors = []
    for _ in range(config.iterations):
        ext = demap_extrinsic(y, h, mu.vectors, apriori, n0).ravel()
        dec_in = np.empty_like(ext)
        dec_in[perm] = ext
        ext_dec, decisions, _ = bcjr_decode(dec_in, config.info_bits)
        errors.append(int(np.count_nonzero(decisions != info)))
        apriori = ext_dec[perm].reshape(-1, mu.width)
    return errors


def simulate_genie_frame(config: SimConfig, n0: float, rng):
    mu = config.mapping
    info, labels, y, h, perm = _transmit(config, rng, n0)
    llr = demap_genie(y, h, mu.vectors, labels, n0).ravel()
    dec_in = np.empty_like(llr)
    dec_in[perm] = llr
    _, decisions, _ = bcjr_decode(dec_in, config.info_bits)
    return [int(np.count_nonzero(decisions != info))]


def _run_point(args):
    config, index, ebn0, frame_fn = args
    n0 = ebn0_to_n0(ebn0, config.mapping.m, config.mapping.n)
    totals = None
    frames = 0
    while frames < config.max_frames:
        errs = frame_fn(config, n0, frame_rng(config.seed, index, frames))
        totals = errs if totals is None else [a + b for a, b in zip(totals, errs)]
        frames += 1
        if totals[-1] >= config.min_bit_errors:
            break
    return BerPoint(ebn0, totals[-1] / (frames * config.info_bits), frames, totals[-1], totals)


def _run(config: SimConfig, frame_fn):
    jobs = [(config, i, e, frame_fn) for i, e in enumerate(config.ebn0_db_list)]
    if config.threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.threads) as pool:
            return list(pool.map(_run_point, jobs))
    return [_run_point(job) for job in jobs]


def run_bicmid(config: SimConfig) -> list:
    """BER after the last iteration at each Eb/N0 point.

    Frames at a point stop once ``min_bit_errors`` errors are reached (counted
    after the last iteration) or after ``max_frames`` frames. Every frame draws
    from its own stream derived from ``(seed, point, frame)``.
    """
    return _run(config, simulate_frame)


def genie_floor(config: SimConfig) -> list:
    """BER when the demapper knows every bit of the vector but the one it detects."""
    return _run(config, simulate_genie_frame)
