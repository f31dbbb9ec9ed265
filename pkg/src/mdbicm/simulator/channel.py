"""Modulation onto MD signal vectors and the block-fading channel."""

from __future__ import annotations

import enum

import numpy as np

RATE = 0.5


class ChannelKind(str, enum.Enum):
    RAYLEIGH = "rayleigh"
    AWGN = "awgn"


def ebn0_to_n0(ebn0_db: float, m: int, n: int, rate: float = RATE) -> float:
    """Complex noise variance per symbol for unit-energy vectors.

    A vector of energy 1 carries ``m n rate`` information bits, so
    ``Eb = 1 / (m n rate)`` and ``N0 = Eb / 10^(EbN0/10)``.
    """
    return 1.0 / (m * n * rate * 10 ** (ebn0_db / 10))


def bits_to_labels(bits, width: int) -> np.ndarray:
    """Group bits into ``width``-bit labels, first bit most significant."""
    bits = np.asarray(bits, dtype=np.int64)
    if len(bits) % width:
        raise ValueError(f"{len(bits)} bits is not a multiple of mN = {width}")
    weights = 1 << np.arange(width - 1, -1, -1)
    return bits.reshape(-1, width) @ weights


def labels_to_bits(labels, width: int) -> np.ndarray:
    """Bit matrix ``(len(labels), width)``, most significant bit first."""
    labels = np.asarray(labels, dtype=np.int64)
    return ((labels[:, None] >> np.arange(width - 1, -1, -1)) & 1).astype(np.int8)


def modulate(mu, coded_bits) -> np.ndarray:
    """Signal vectors ``(num_vectors, n)`` for a bit stream."""
    return mu.vectors[bits_to_labels(coded_bits, mu.width)]


def channel(vectors, n0: float, kind, rng):
    """Apply one real fading gain per vector and complex noise of variance ``n0`` per symbol.

    Rayleigh gains are ``|CN(0, 1)|`` so that ``E[h^2] = 1``; AWGN uses ``h = 1``.
    Returns ``(received, h)``.
    """
    vectors = np.asarray(vectors)
    kind = ChannelKind(kind)
    F = vectors.shape[0]
    if kind is ChannelKind.RAYLEIGH:
        h = np.abs(rng.standard_normal(F) + 1j * rng.standard_normal(F)) / np.sqrt(2)
    else:
        h = np.ones(F)
    noise = np.sqrt(n0 / 2) * (rng.standard_normal(vectors.shape) + 1j * rng.standard_normal(vectors.shape))
    return h[:, None] * vectors + noise, h
