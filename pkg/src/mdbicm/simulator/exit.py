"""EXIT transfer curves of the demapper and of the (13, 15) decoder."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .channel import ChannelKind, channel, ebn0_to_n0, labels_to_bits
from .coding import MEMORY, bcjr_decode, conv_encode
from .demapper import demap_extrinsic

SIGMA_MAX = 10.0


def J(sigma):
    """Mutual information of a consistent Gaussian LLR with standard deviation ``sigma``.

    Piecewise fit of ten Brink's J-function.
    """
    s = np.asarray(sigma, dtype=float)
    if np.any(s < 0):
        raise ValueError("sigma must be non-negative")
    low = -0.0421061 * s**3 + 0.209252 * s**2 - 0.00640081 * s
    high = 1 - np.exp(0.00181491 * s**3 - 0.142675 * s**2 - 0.0822054 * s + 0.0549608)
    out = np.where(s <= 1.6363, low, np.where(s < SIGMA_MAX, high, 1.0))
    return np.clip(out, 0.0, 1.0)


def J_inv(mi):
    """Inverse of :func:`J`; ``mi = 1`` is clipped to 0.9999."""
    mi = np.asarray(mi, dtype=float)
    if np.any((mi < 0) | (mi > 1)):
        raise ValueError("mutual information must lie in [0, 1]")
    mi = np.minimum(mi, 0.9999)
    low = 1.09542 * mi**2 + 0.214217 * mi + 2.33727 * np.sqrt(mi)
    with np.errstate(divide="ignore"):
        high = -0.706692 * np.log(0.386013 * (1 - mi)) + 1.75017 * mi
    return np.where(mi <= 0.3646, low, high)


def gaussian_apriori(bits, ia: float, rng) -> np.ndarray:
    """Consistent Gaussian a priori LLRs, ``ln P(0)/P(1)``, carrying ``ia`` bits of information."""
    sigma = float(J_inv(ia))
    signs = 1.0 - 2.0 * np.asarray(bits, dtype=float)
    return 0.5 * sigma**2 * signs + sigma * rng.standard_normal(signs.shape)


def mutual_information(llrs, bits, bins: int = 64) -> float:
    """Histogram estimate of ``I(L; B)`` from LLR samples and the transmitted bits."""
    llrs = np.asarray(llrs, dtype=float).ravel()
    bits = np.asarray(bits).ravel().astype(bool)
    if len(llrs) != len(bits) or bits.all() or not bits.any():
        raise ValueError("need matching LLRs and bits containing both values")
    lo, hi = np.percentile(llrs, [0.05, 99.95])
    if hi <= lo:
        hi = lo + 1.0
    edges = np.linspace(lo, hi, bins + 1)
    clipped = np.clip(llrs, lo, hi)
    p0, _ = np.histogram(clipped[~bits], bins=edges)
    p1, _ = np.histogram(clipped[bits], bins=edges)
    p0 = p0 / p0.sum()
    p1 = p1 / p1.sum()
    total = p0 + p1
    mi = 0.0
    for p in (p0, p1):
        nz = p > 0
        mi += 0.5 * np.sum(p[nz] * np.log2(2 * p[nz] / total[nz]))
    return float(np.clip(mi, 0.0, 1.0))


class Side(str, enum.Enum):
    DEMAPPER = "demapper"
    DECODER = "decoder"


@dataclass
class ExitCurve:
    ia_grid: np.ndarray
    ie_values: np.ndarray
    ie_std: np.ndarray
    ebn0_db: float | None
    side: Side

    def __call__(self, ia):
        return np.interp(ia, self.ia_grid, self.ie_values)

    def csv(self) -> str:
        rows = ["ia,ie"] + [f"{a:.6f},{e:.6f}" for a, e in zip(self.ia_grid, self.ie_values)]
        return "\n".join(rows) + "\n"


def _check_grid(ia_grid):
    ia = np.asarray(ia_grid, dtype=float)
    if np.any((ia < 0) | (ia >= 1)) or np.any(np.diff(ia) <= 0):
        raise ValueError("ia_grid must be strictly increasing within [0, 1)")
    return ia


def _batch_std(values):
    values = np.asarray(values)
    return float(values.std(ddof=1) / np.sqrt(len(values))) if len(values) > 1 else float("nan")


def exit_demapper(mu, ebn0_db, ia_grid, samples: int, rng, kind=ChannelKind.RAYLEIGH, batches: int = 4) -> ExitCurve:
    """Demapper transfer curve from ``samples`` random vectors split into ``batches``."""
    ia_grid = _check_grid(ia_grid)
    if samples < 100 * batches:
        raise ValueError("sample budget too small for a mutual-information estimate")
    n0 = ebn0_to_n0(ebn0_db, mu.m, mu.n)
    labels = rng.integers(0, mu.num_labels, samples)
    bits = labels_to_bits(labels, mu.width)
    y, h = channel(mu.vectors[labels], n0, kind, rng)
    ie, sd = [], []
    for ia in ia_grid:
        apriori = gaussian_apriori(bits, ia, rng)
        ext = demap_extrinsic(y, h, mu.vectors, apriori, n0)
        parts = [
            mutual_information(e, b) for e, b in zip(np.array_split(ext, batches), np.array_split(bits, batches))
        ]
        ie.append(mutual_information(ext, bits))
        sd.append(_batch_std(parts))
    return ExitCurve(ia_grid, np.array(ie), np.array(sd), float(ebn0_db), Side.DEMAPPER)


def exit_decoder(ia_grid, samples: int, rng, block: int = 2000, batches: int = 4) -> ExitCurve:
    """Decoder transfer curve from about ``samples`` coded bits, in blocks of ``block`` information bits."""
    ia_grid = _check_grid(ia_grid)
    frames = max(batches, int(np.ceil(samples / (2 * (block + MEMORY)))))
    info = [rng.integers(0, 2, block) for _ in range(frames)]
    coded = [conv_encode(u) for u in info]
    ie, sd = [], []
    for ia in ia_grid:
        outs = []
        for c in coded:
            ext, _, _ = bcjr_decode(gaussian_apriori(c, ia, rng), block)
            outs.append(ext)
        ext = np.concatenate(outs)
        bits = np.concatenate(coded)
        parts = [mutual_information(e, b) for e, b in zip(np.array_split(ext, batches), np.array_split(bits, batches))]
        ie.append(mutual_information(ext, bits))
        sd.append(_batch_std(parts))
    return ExitCurve(ia_grid, np.array(ie), np.array(sd), None, Side.DECODER)


def trajectory(demapper: ExitCurve, decoder: ExitCurve, max_steps: int = 200):
    """Staircase of ``(I_A demapper, I_E decoder)`` steps between the two curves."""
    ia, steps = 0.0, []
    for _ in range(max_steps):
        ie_dem = float(demapper(ia))
        ie_dec = float(decoder(ie_dem))
        steps.append((ia, ie_dem, ie_dec))
        if ie_dec <= ia + 1e-4:
            break
        ia = min(ie_dec, demapper.ia_grid[-1])
        if ia >= demapper.ia_grid[-1]:
            steps.append((ia, float(demapper(ia)), float(decoder(float(demapper(ia))))))
            break
    return steps


def tunnel_open(demapper: ExitCurve, decoder: ExitCurve, target: float = 0.98) -> bool:
    """True when the staircase reaches a decoder output of at least ``target``."""
    return trajectory(demapper, decoder)[-1][2] >= target


def tunnel_threshold(mu, ebn0_grid, decoder: ExitCurve, ia_grid, samples: int, rng, kind=ChannelKind.RAYLEIGH):
    """Smallest Eb/N0 of ``ebn0_grid`` at which the tunnel is open, or None."""
    for ebn0 in sorted(ebn0_grid):
        curve = exit_demapper(mu, ebn0, ia_grid, samples, rng, kind)
        if tunnel_open(curve, decoder):
            return ebn0
    return None
