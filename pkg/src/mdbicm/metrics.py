"""Harmonic-mean distance metrics, 2-D cost functions and the lower bound on them.

All distances are measured on the vector-normalized constellation held by the
mapping (unit average energy per signal vector).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np

from .constellation import Constellation
from .mapping import (
    ENUMERATION_LIMIT,
    FullMapping2D,
    HalfMapping2D,
    MappingError,
    MDMapping,
    popcount_parity,
)

BRUTE_LIMIT = 16
KDTREE_LIMIT = 20
SENTINEL = math.inf


class GuardError(ValueError):
    """A computation was refused because its size exceeds a configured guard."""


def _check_guard(mu: MDMapping, limit: int, what: str):
    if mu.width > limit:
        raise GuardError(f"{what}: mN = {mu.width} exceeds the guard ({limit})")


def _flip_inverse_sums(mu: MDMapping, subset=None) -> list:
    """Per bit position, ``sum 1/|x - x_flip|^2`` over the chosen labels."""
    X = mu.vectors
    labels = np.arange(mu.num_labels)
    if subset is not None:
        labels = labels[subset]
    sums = []
    for i in range(mu.width):
        d2 = np.sum(np.abs(X[labels] - X[labels ^ (1 << i)]) ** 2, axis=1)
        if np.any(d2 == 0):
            return None
        sums.append(math.fsum(1.0 / d2))
    return sums


def harmonic_mean_after(mu: MDMapping) -> float:
    """Harmonic mean of squared distances to the one-bit-flip image (perfect feedback).

    Returns 0.0 for a degenerate mapping in which a label and one of its
    bit-flip neighbours share a vector.
    """
    _check_guard(mu, ENUMERATION_LIMIT, "harmonic_mean_after")
    sums = _flip_inverse_sums(mu)
    if sums is None:
        return 0.0
    return mu.width * mu.num_labels / math.fsum(sums)


def omega_e(mu: MDMapping) -> float:
    """Inverse-distance sum restricted to even-weight labels, same normalization as the full sum."""
    _check_guard(mu, ENUMERATION_LIMIT, "omega_e")
    sums = _flip_inverse_sums(mu, popcount_parity(np.arange(mu.num_labels)) == 0)
    return math.inf if sums is None else math.fsum(sums) / (mu.width * mu.num_labels)


def omega_o(mu: MDMapping) -> float:
    _check_guard(mu, ENUMERATION_LIMIT, "omega_o")
    sums = _flip_inverse_sums(mu, popcount_parity(np.arange(mu.num_labels)) == 1)
    return math.inf if sums is None else math.fsum(sums) / (mu.width * mu.num_labels)


def _nearest_kdtree(R, mask_a, mask_b):
    from scipy.spatial import cKDTree

    dist, _ = cKDTree(R[mask_b]).query(R[mask_a], k=1)
    return dist**2


def _nearest_brute(R, mask_a, mask_b):
    A, B = R[mask_a], R[mask_b]
    out = np.empty(len(A))
    chunk = max(1, 2**22 // len(B))
    for start in range(0, len(A), chunk):
        blk = A[start:start + chunk]
        out[start:start + chunk] = np.sum((blk[:, None, :] - B[None, :, :]) ** 2, axis=2).min(axis=1)
    return out


def harmonic_mean_before(mu: MDMapping, method: str = "kdtree") -> float:
    """Harmonic mean of squared distances to the nearest vector with the complementary bit.

    ``method="kdtree"`` is an exact nearest-neighbour search on a k-d tree in
    ``2N`` real dimensions (guard ``mN <= 20``); ``method="brute"`` scans every
    candidate (guard ``mN <= 16``). Both return the same value up to rounding.
    """
    if method == "kdtree":
        _check_guard(mu, KDTREE_LIMIT, "harmonic_mean_before[kdtree]")
        nearest = _nearest_kdtree
    elif method == "brute":
        _check_guard(mu, BRUTE_LIMIT, "harmonic_mean_before[brute]")
        nearest = _nearest_brute
    else:
        raise ValueError(f"unknown method {method!r}")
    X = mu.vectors
    R = np.concatenate([X.real, X.imag], axis=1)
    labels = np.arange(mu.num_labels)
    sums = []
    for i in range(mu.width):
        one = ((labels >> i) & 1).astype(bool)
        for mask in (one, ~one):
            sums.append(math.fsum(1.0 / nearest(R, mask, ~mask)))
    return mu.width * mu.num_labels / math.fsum(sums)


# ---------------------------------------------------------------------------
# cost functions in 2-D signal space


@dataclass(frozen=True, eq=False)
class CostTables:
    """Coefficients ``a_l[alpha, k]`` and ``a_r[alpha, k]`` for ``beta = B[alpha, k]``.

    ``B[alpha, 0] = alpha`` and ``B[alpha, k]`` flips bit position ``k``
    (1 = most significant) of the ``m``-bit label ``alpha``.
    """

    m: int
    n: int
    B: np.ndarray
    a_l: np.ndarray
    a_r: np.ndarray

    def coefficient(self, side: str, alpha: int, beta: int) -> int:
        """``a`` for an arbitrary pair; 0 when ``beta`` is not within one bit of ``alpha``."""
        row = self.B[alpha]
        hits = np.flatnonzero(row == beta)
        if not len(hits):
            return 0
        table = self.a_l if side == "l" else self.a_r
        return int(table[alpha, hits[0]])


def neighbor_table(m: int) -> np.ndarray:
    """``(2^m, m + 1)`` array: each label followed by its ``m`` one-bit flips."""
    labels = np.arange(2**m)
    cols = [labels] + [labels ^ (1 << (m - k)) for k in range(1, m + 1)]
    return np.stack(cols, axis=1)


def build_cost_tables(m: int, n: int) -> CostTables:
    """Closed-form coefficient tables.

    Counting even-weight labels whose first (for ``a_l``) or second (for
    ``a_r``) block equals ``alpha`` while the one-bit flip has ``beta`` there:
    ``m(n-1) 2^(m(n-1)-1)`` when ``beta = alpha`` and ``2^(m(n-1)-1)`` when
    ``beta`` differs from ``alpha`` in one bit.
    """
    if not 1 <= m <= 10:
        raise ValueError(f"m must be in 1..10, got {m}")
    if n < 2:
        raise ValueError(f"n must be >= 2 for the cost tables, got {n}")
    r = m * (n - 1)
    same = r * 2 ** (r - 1)
    flip = 2 ** (r - 1)
    a = np.full((2**m, m + 1), flip, dtype=np.int64)
    a[:, 0] = same
    B = neighbor_table(m)
    for arr in (a, B):
        arr.setflags(write=False)
    return CostTables(m, n, B, a, a)


def _check_tables(tables: CostTables, constellation: Constellation):
    if constellation.m != tables.m:
        raise ValueError(f"tables for m = {tables.m}, constellation has m = {constellation.m}")


def psi_l(
    lambda_el: HalfMapping2D,
    lambda_ol: HalfMapping2D,
    chi_el,
    constellation: Constellation,
    tables: CostTables,
) -> float:
    """First-position cost ``sum_alpha sum_beta a_l / |lambda_el(alpha) - lambda_ol(beta)|^2``."""
    _check_tables(tables, constellation)
    chi = set(int(s) for s in chi_el)
    if set(lambda_el.symbols.tolist()) != chi:
        raise MappingError("lambda_el does not cover chi_el")
    if chi & set(lambda_ol.symbols.tolist()):
        raise MappingError("partition overlap: lambda_ol uses a symbol of chi_el")
    P = constellation.points
    x = P[lambda_el.symbol_of][:, None]
    y = P[lambda_ol.symbol_of[tables.B]]
    return math.fsum((tables.a_l / np.abs(x - y) ** 2).ravel())


def psi_r(
    lambda_er: FullMapping2D,
    lambda_or: FullMapping2D,
    constellation: Constellation,
    tables: CostTables,
) -> float:
    """Remaining-position cost, ``(n-1)`` times the ``a_r``-weighted inverse distance sum.

    A label that both mappings send to the same symbol makes a term infinite;
    the result is then :data:`SENTINEL` (``inf``).
    """
    _check_tables(tables, constellation)
    P = constellation.points
    x = P[lambda_er.symbol_of][:, None]
    y = P[lambda_or.symbol_of[tables.B]]
    d2 = np.abs(x - y) ** 2
    if np.any(d2 == 0):
        return SENTINEL
    return (tables.n - 1) * math.fsum((tables.a_r / d2).ravel())


def k_const(m: int, n: int) -> float:
    return 1.0 / (m * n * n * 2 ** (m * n))


def delta(psi_l_value: float, psi_r_value: float, m: int, n: int) -> float:
    """Lower bound ``1 / (2K(psi_l + psi_r))`` on the after-feedback harmonic mean."""
    if psi_l_value < 0 or psi_r_value < 0:
        raise ValueError("cost values must be non-negative")
    total = psi_l_value + psi_r_value
    if math.isinf(total):
        return 0.0
    return 1.0 / (2 * k_const(m, n) * total)


@dataclass
class MetricReport:
    phi_before: float
    phi_after: float
    delta: float
    psi_l: float
    psi_r: float
    k_const: float
    phi_before_method: str = "kdtree"

    FIELDS = ("phi_before", "phi_after", "delta", "psi_l", "psi_r")

    def csv_header(self) -> str:
        return ",".join(self.FIELDS)

    def csv_row(self) -> str:
        return ",".join(f"{getattr(self, f):.10g}" for f in self.FIELDS)

    def as_dict(self) -> dict:
        return asdict(self)


def evaluate(mu: MDMapping, before: bool = True, method: str = "kdtree") -> MetricReport:
    """All metrics of a mapping. ``phi_before`` is ``nan`` when skipped or guarded."""
    tables = build_cost_tables(mu.m, mu.n)
    pl = psi_l(mu.lambda_el, mu.lambda_ol, mu.chi_el, mu.constellation, tables)
    pr = psi_r(mu.lambda_er, mu.lambda_or, mu.constellation, tables)
    phi_b, used = math.nan, "skipped"
    if before:
        try:
            phi_b, used = harmonic_mean_before(mu, method), method
        except GuardError:
            used = "guarded"
    return MetricReport(
        phi_before=phi_b,
        phi_after=harmonic_mean_after(mu),
        delta=delta(pl, pr, mu.m, mu.n),
        psi_l=pl,
        psi_r=pr,
        k_const=k_const(mu.m, mu.n),
        phi_before_method=used,
    )
