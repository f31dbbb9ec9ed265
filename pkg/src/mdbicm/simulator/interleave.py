"""Seeded random bit interleaver."""

import numpy as np


def permutation(length: int, seed: int) -> np.ndarray:
    if length < 1:
        raise ValueError("length must be positive")
    return np.random.default_rng(np.random.SeedSequence([seed, length])).permutation(length)


def interleave(bits, seed: int, perm=None) -> np.ndarray:
    """``out[k] = bits[perm[k]]``."""
    bits = np.asarray(bits)
    perm = permutation(len(bits), seed) if perm is None else perm
    if len(perm) != len(bits):
        raise ValueError("length mismatch")
    return bits[perm]


def deinterleave(values, seed: int, perm=None) -> np.ndarray:
    values = np.asarray(values)
    perm = permutation(len(values), seed) if perm is None else perm
    if len(perm) != len(values):
        raise ValueError("length mismatch")
    out = np.empty_like(values)
    out[perm] = values
    return out
