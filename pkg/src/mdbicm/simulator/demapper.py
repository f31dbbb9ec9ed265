"""Exact soft demapping over all ``2^(mN)`` candidate vectors."""

from __future__ import annotations

import numpy as np
from scipy.special import logsumexp

from .channel import labels_to_bits

CHUNK_ENTRIES = 2**21


def _metrics(y, h, vectors, n0):
    """``-|y - h x|^2 / n0`` for every received vector and candidate."""
    d = y[:, None, :] - h[:, None, None] * vectors[None, :, :]
    return -np.sum(d.real**2 + d.imag**2, axis=2) / n0


def demap_extrinsic(y, h, vectors, apriori, n0: float) -> np.ndarray:
    """Extrinsic bit LLRs, ``ln P(b=0) / P(b=1)``, for a block of received vectors.

    Parameters
    ----------
    y : complex array (F, n)
    h : real array (F,)
    vectors : complex array (2^(mN), n)
        Candidate vectors in label order.
    apriori : array (F, mN)
        A priori LLRs of the bits of each vector, most significant first.
    n0 : float
        Complex noise variance per symbol.
    """
    y = np.atleast_2d(np.asarray(y))
    h = np.atleast_1d(np.asarray(h, dtype=float))
    apriori = np.atleast_2d(np.asarray(apriori, dtype=float))
    L = len(vectors)
    width = L.bit_length() - 1
    if apriori.shape != (len(y), width):
        raise ValueError(f"apriori must have shape ({len(y)}, {width})")
    if not n0 > 0:
        raise ValueError("n0 must be positive")
    for arr in (y, h, apriori):
        if not np.all(np.isfinite(arr)):
            raise ValueError("inputs must be finite")
    signs = 1.0 - 2.0 * labels_to_bits(np.arange(L), width)  # +1 where the bit is 0
    zero = signs > 0
    out = np.empty((len(y), width))
    step = max(1, CHUNK_ENTRIES // L)
    for start in range(0, len(y), step):
        sl = slice(start, start + step)
        metric = _metrics(y[sl], h[sl], vectors, n0) + 0.5 * apriori[sl] @ signs.T
        for k in range(width):
            out[sl, k] = logsumexp(metric[:, zero[:, k]], axis=1) - logsumexp(metric[:, ~zero[:, k]], axis=1)
    return out - apriori


def demap_genie(y, h, vectors, labels, n0: float) -> np.ndarray:
    """LLRs with every other bit of the vector known: only the two candidates differing in bit ``k``."""
    y = np.atleast_2d(np.asarray(y))
    h = np.asarray(h, dtype=float)
    labels = np.asarray(labels, dtype=np.int64)
    L = len(vectors)
    width = L.bit_length() - 1
    out = np.empty((len(y), width))
    for k in range(width):
        bit = 1 << (width - 1 - k)
        x0 = vectors[labels & ~bit]
        x1 = vectors[labels | bit]
        d0 = np.sum(np.abs(y - h[:, None] * x0) ** 2, axis=1)
        d1 = np.sum(np.abs(y - h[:, None] * x1) ** 2, axis=1)
        out[:, k] = (d1 - d0) / n0
    return out
