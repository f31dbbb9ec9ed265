"""Alternating simplified-BSA search for the four 2-D mappings.

The remaining-position pair ``(lambda_er, lambda_or)`` is optimized first on
``psi_r``; ``chi_el`` then follows from ``lambda_er`` and the first-position pair
``(lambda_el, lambda_ol)`` is optimized on ``psi_l``. Several independent
restarts are run and the assembled mapping with the largest after-feedback
harmonic mean wins.

In every cost model one mapping is modifiable and its partner is frozen. The
cost of a position then depends only on the label it holds, so a switch changes
exactly the two swapped costs; the affected set additionally lists positions
whose labels neighbour the swapped ones, as in the classic switching algorithm,
which keeps the bookkeeping valid for models where those costs do move.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .constellation import Constellation, Kind, make_constellation, scale_for_vector
from .mapping import (
    FullMapping2D,
    Half,
    HalfMapping2D,
    MDMapping,
    TableMapping,
    build_md_mapping,
    derive_chi_el,
)
from .metrics import (
    CostTables,
    MetricReport,
    build_cost_tables,
    delta,
    evaluate,
    harmonic_mean_after,
    psi_l,
    psi_r,
)

# ---------------------------------------------------------------------------
# switching algorithm


@dataclass
class BsaResult:
    assignment: np.ndarray
    costs: np.ndarray
    total: float
    commits: list = field(default_factory=list)  # (i, j, total after the switch)
    rounds: int = 0


def simplified_bsa(model, assignment, max_rounds: int, on_commit=None, stop=None) -> BsaResult:
    """Greedy label switching with incremental cost updates.

    Parameters
    ----------
    model
        Provides ``cost(a, p)`` (cost of position ``p`` under assignment ``a``)
        and ``affected(a, i, j)`` (positions whose cost may change when the
        items at ``i`` and ``j`` are switched; evaluated after the switch). An
        optional ``swap_deltas(a, costs, p)`` returns the change of the total
        for switching ``p`` with every position at once.
    assignment : array of int
        Item held by each position; not modified.
    max_rounds : int
        Maximum number of committed switches.
    on_commit : callable, optional
        Called as ``on_commit(a, costs)`` after every committed switch.
    stop : callable, optional
        ``stop(total)`` returning True ends the search after a commit.

    Each round lists the positions by descending cost and, starting from the
    most expensive, looks for the switch that lowers the total the most. The
    first position that admits a strictly improving switch commits it and the
    round ends; a round in which no position improves terminates the search.
    """
    a = np.array(assignment, dtype=np.int64)
    n = len(a)
    costs = np.array([model.cost(a, p) for p in range(n)], dtype=float)
    total = math.fsum(costs)
    result = BsaResult(a, costs, total)
    fast = getattr(model, "swap_deltas", None)
    while result.rounds < max_rounds:
        committed = False
        for p in np.argsort(-costs, kind="stable"):
            if fast is not None:
                deltas = np.asarray(fast(a, costs, p), dtype=float)
            else:
                deltas = _trial_deltas(model, a, costs, p)
            deltas[p] = np.inf
            deltas[np.isnan(deltas)] = np.inf
            j = int(np.argmin(deltas))
            if not deltas[j] < -1e-12 * abs(total):
                continue
            a[p], a[j] = a[j], a[p]
            for q in model.affected(a, p, j):
                costs[q] = model.cost(a, q)
            total = math.fsum(costs)
            result.commits.append((int(p), j, total))
            if on_commit is not None:
                on_commit(a, costs)
            committed = True
            break
        if not committed:
            break
        result.rounds += 1
        if stop is not None and stop(total):
            break
    result.total = total
    return result


def _trial_deltas(model, a, costs, p):
    out = np.empty(len(a))
    for j in range(len(a)):
        if j == p:
            out[j] = np.inf
            continue
        a[p], a[j] = a[j], a[p]
        aff = model.affected(a, p, j)
        out[j] = math.fsum(model.cost(a, q) - costs[q] for q in aff)
        a[p], a[j] = a[j], a[p]
    return out


class _SeparableModel:
    """Cost of position ``p`` is ``C[p, a[p]]``; the item neighbourhoods give the affected set."""

    def __init__(self, C, neighbors):
        self.C = C
        self.neighbors = neighbors  # items one bit away from each item

    def cost(self, a, p):
        return float(self.C[p, a[p]])

    def affected(self, a, i, j):
        where = np.empty(len(a), dtype=np.int64)
        where[a] = np.arange(len(a))
        near = where[self.neighbors[a[[i, j]]].ravel()]
        return sorted({int(i), int(j), *near.tolist()})

    def swap_deltas(self, a, costs, p):
        C = self.C
        with np.errstate(invalid="ignore"):
            return C[p, a] + C[np.arange(len(a)), a[p]] - costs[p] - costs


def full_cost_matrix(constellation: Constellation, frozen: FullMapping2D, tables: CostTables):
    """``C[s, alpha]``: cost of symbol ``s`` holding label ``alpha`` against the frozen partner."""
    P = constellation.points
    y = P[frozen.symbol_of[tables.B]]  # (M, m+1)
    d2 = np.abs(P[:, None, None] - y[None, :, :]) ** 2
    with np.errstate(divide="ignore"):
        terms = np.where(d2 == 0, np.inf, tables.a_r / np.where(d2 == 0, 1.0, d2))
    return (tables.n - 1) * terms.sum(axis=2)


def half_cost_matrix(constellation: Constellation, symbols, frozen: HalfMapping2D, tables: CostTables):
    """``C[p, r]``: cost of half-set symbol ``symbols[p]`` holding the label pair with residue ``r``."""
    P = constellation.points
    h = len(symbols)
    y = P[frozen.symbol_of[tables.B]]  # (M, m+1)
    pts = P[np.asarray(symbols)]
    per_label = (tables.a_l / np.abs(pts[:, None, None] - y[None, :, :]) ** 2).sum(axis=2)
    return per_label[:, :h] + per_label[:, h:]


def psi_r_model(constellation, frozen: FullMapping2D, tables):
    m = tables.m
    labels = np.arange(2**m)
    neighbors = np.stack([labels ^ (1 << k) for k in range(m)], axis=1)
    return _SeparableModel(full_cost_matrix(constellation, frozen, tables), neighbors)


def psi_l_model(constellation, symbols, frozen: HalfMapping2D, tables):
    m = tables.m
    res = np.arange(2 ** (m - 1))
    neighbors = np.stack([res ^ (1 << k) for k in range(m - 1)], axis=1) if m > 1 else res[:, None]
    return _SeparableModel(half_cost_matrix(constellation, symbols, frozen, tables), neighbors)


class MDHarmonicModel:
    """Classic switching on the whole MD mapping: positions are signal vectors.

    The cost of a vector is ``sum_i 1/|x - x_i|^2`` over the vectors carrying its
    ``mN`` one-bit-flip labels, so the total is the inverse distance sum of the
    after-feedback harmonic mean.
    """

    def __init__(self, vectors: np.ndarray, width: int):
        self.X = np.asarray(vectors)
        self.flips = 1 << np.arange(width)

    def _where(self, a):
        where = np.empty(len(a), dtype=np.int64)
        where[a] = np.arange(len(a))
        return where

    def cost(self, a, p):
        q = self._where(a)[a[p] ^ self.flips]
        return math.fsum(1.0 / np.sum(np.abs(self.X[p] - self.X[q]) ** 2, axis=1))

    def affected(self, a, i, j):
        where = self._where(a)
        near = where[(a[[i, j]][:, None] ^ self.flips[None, :]).ravel()]
        return sorted({int(i), int(j), *near.tolist()})

    def swap_deltas(self, a, costs, p):
        n = len(a)
        where = self._where(a)
        J = np.arange(n)
        lp = a[p]

        def moved(q, jj):
            # positions after switching p and jj
            return np.where(q == p, jj, np.where(q == jj, p, q))

        # p now holds a[j]; j now holds lp
        qp = moved(where[a[:, None] ^ self.flips[None, :]], J[:, None])
        qj = moved(where[lp ^ self.flips][None, :], J[:, None])
        new_p = np.sum(1.0 / np.sum(np.abs(self.X[p][None, None, :] - self.X[qp]) ** 2, axis=2), axis=1)
        new_j = np.sum(1.0 / np.sum(np.abs(self.X[J][:, None, :] - self.X[qj]) ** 2, axis=2), axis=1)
        return 2.0 * (new_p + new_j - costs[p] - costs)


# ---------------------------------------------------------------------------
# search


@dataclass
class SearchConfig:
    """Budgets of the alternating search; ``bsa_max_rounds=None`` means ``8 * 2^m``."""

    m: int
    n: int = 2
    kind: Kind | str = Kind.SQUARE_QAM
    it_num_r: int = 10
    it_num_l: int = 10
    it_num: int = 32
    bsa_max_rounds: int | None = None
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        self.kind = Kind(self.kind)
        for name in ("it_num_r", "it_num_l", "it_num", "threads"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if self.bsa_max_rounds is None:
            self.bsa_max_rounds = 8 * 2**self.m
        if self.bsa_max_rounds < 1:
            raise ValueError("bsa_max_rounds must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def constellation(self) -> Constellation:
        return scale_for_vector(make_constellation(self.kind, self.m), self.n)


def restart_rng(seed: int, restart: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, restart]))


def _coincidences(er_sym, or_sym, B):
    """Labels ``beta`` of ``lambda_or`` whose symbol equals ``lambda_er`` on some neighbour of ``beta``."""
    return np.flatnonzero(np.any(er_sym[B] == or_sym[:, None], axis=1))


def repair_coincidences(er: FullMapping2D, orr: FullMapping2D, rng, max_passes=1000) -> FullMapping2D:
    """Permute ``lambda_or`` until no ``psi_r`` term has a zero distance.

    Each pass re-seats every conflicting label by a switch with a randomly
    ordered partner that leaves both labels conflict-free.
    """
    m = er.m
    B = build_cost_tables(m, 2).B
    er_sym = er.symbol_of
    or_sym = orr.symbol_of.copy()

    def clean(label, symbol):
        return not np.any(er_sym[B[label]] == symbol)

    for _ in range(max_passes):
        bad = _coincidences(er_sym, or_sym, B)
        if not len(bad):
            return FullMapping2D.from_symbols(or_sym)
        for beta in bad:
            if clean(beta, or_sym[beta]):
                continue
            partners = rng.permutation(len(or_sym))
            for gamma in partners:
                if gamma != beta and clean(beta, or_sym[gamma]) and clean(gamma, or_sym[beta]):
                    or_sym[[beta, gamma]] = or_sym[[gamma, beta]]
                    break
            else:
                gamma = partners[0] if partners[0] != beta else partners[1]
                or_sym[[beta, gamma]] = or_sym[[gamma, beta]]
    raise RuntimeError("could not remove coincidences between lambda_er and lambda_or")


def optimize_psi_r(config: SearchConfig, constellation: Constellation, rng, trace=None):
    """Alternately switch labels of ``lambda_er`` and ``lambda_or`` to lower ``psi_r``.

    Returns ``(lambda_er, lambda_or, psi_r)``. ``trace`` (a list) receives
    ``psi_r`` after the initial repair and after every BSA run.
    """
    M = 2**config.m
    tables = build_cost_tables(config.m, config.n)
    er = FullMapping2D.from_symbols(rng.permutation(M))
    orr = repair_coincidences(er, FullMapping2D.from_symbols(rng.permutation(M)), rng)
    pair = [er, orr]  # pair[0] is modified, pair[1] frozen
    if trace is not None:
        trace.append(psi_r(er, orr, constellation, tables))
    for _ in range(config.it_num_r):
        model = psi_r_model(constellation, pair[1], tables)
        res = simplified_bsa(model, pair[0].label_of, config.bsa_max_rounds)
        pair[0] = FullMapping2D.from_table(res.assignment)
        if trace is not None:
            trace.append(res.total)
        pair.reverse()
    er, orr = (pair[1], pair[0]) if config.it_num_r % 2 else (pair[0], pair[1])
    return er, orr, psi_r(er, orr, constellation, tables)


def optimize_psi_l(config: SearchConfig, constellation: Constellation, chi_el, rng, trace=None):
    """Alternately switch label pairs of ``lambda_el`` and ``lambda_ol`` to lower ``psi_l``.

    Returns ``(lambda_el, lambda_ol, psi_l)``. Switches move whole label pairs,
    so both labels of a symbol keep differing in the first bit only.
    """
    M = 2**config.m
    tables = build_cost_tables(config.m, config.n)
    chi_el = tuple(sorted(chi_el))
    chi_ol = tuple(s for s in range(M) if s not in set(chi_el))
    el = HalfMapping2D(rng.permutation(np.array(chi_el)), Half.EL)
    ol = HalfMapping2D(rng.permutation(np.array(chi_ol)), Half.OL)
    pair = [el, ol]
    sets = [chi_el, chi_ol]
    if trace is not None:
        trace.append(psi_l(el, ol, chi_el, constellation, tables))
    for _ in range(config.it_num_l):
        cur, frozen = pair
        symbols = np.array(sets[0])
        model = psi_l_model(constellation, symbols, frozen, tables)
        # position p is symbol symbols[p]; its item is the residue that symbol carries
        residue_of = np.empty(M, dtype=np.int64)
        residue_of[cur.symbols] = np.arange(M // 2)
        res = simplified_bsa(model, residue_of[symbols], config.bsa_max_rounds)
        new = np.empty(M // 2, dtype=np.int64)
        new[res.assignment] = symbols
        pair[0] = HalfMapping2D(new, cur.half)
        if trace is not None:
            trace.append(res.total)
        pair.reverse()
        sets.reverse()
    el, ol = (pair[0], pair[1]) if pair[0].half is Half.EL else (pair[1], pair[0])
    return el, ol, psi_l(el, ol, chi_el, constellation, tables)


@dataclass
class TraceRecord:
    restart: int
    psi_r: float
    psi_l: float
    delta: float
    phi_after: float

    def csv_row(self) -> str:
        return f"{self.restart},{self.psi_r:.10g},{self.psi_l:.10g},{self.delta:.10g},{self.phi_after:.10g}"


@dataclass
class SearchResult:
    mapping: MDMapping
    report: MetricReport
    restarts_run: int
    trace: list
    winner: int


def run_restart(config: SearchConfig, restart: int):
    """One full pass of the search; returns ``(mapping, TraceRecord)``."""
    rng = restart_rng(config.seed, restart)
    cons = config.constellation()
    er, orr, pr = optimize_psi_r(config, cons, rng)
    chi_el = derive_chi_el(er)
    el, ol, pl = optimize_psi_l(config, cons, chi_el, rng)
    mu = build_md_mapping(config.m, config.n, cons, el, ol, er, orr, chi_el)
    record = TraceRecord(restart, pr, pl, delta(pl, pr, config.m, config.n), harmonic_mean_after(mu))
    return mu, record


def _run_restart_args(args):
    return run_restart(*args)


def search(config: SearchConfig, before: bool = False) -> SearchResult:
    """Run ``it_num`` restarts and keep the mapping with the largest after-feedback mean.

    Ties go to the lowest restart index, so the result does not depend on
    ``config.threads``.
    """
    jobs = [(config, r) for r in range(config.it_num)]
    if config.threads > 1:
        with ProcessPoolExecutor(max_workers=config.threads) as pool:
            results = list(pool.map(_run_restart_args, jobs))
    else:
        results = [run_restart(*job) for job in jobs]
    trace = [rec for _, rec in results]
    winner = max(range(len(trace)), key=lambda r: (trace[r].phi_after, -r))
    mu = results[winner][0]
    return SearchResult(mu, evaluate(mu, before=before), len(trace), trace, winner)


def classic_md_bsa(mu, max_rounds: int, rng=None, target: float | None = None) -> TableMapping:
    """Switching directly on the ``2^(mN)`` signal vectors of ``mu``.

    A baseline that ignores the four-function structure; the starting labels are
    those of ``mu``, shuffled when ``rng`` is given. With ``target`` the search
    stops as soon as the after-feedback harmonic mean reaches it.
    """
    X = mu.vectors
    a = np.arange(mu.num_labels) if rng is None else rng.permutation(mu.num_labels)
    # position p is vector X[p]; the assignment holds its label
    model = MDHarmonicModel(X, mu.width)
    scale = mu.width * mu.num_labels
    stop = None if target is None else (lambda total: scale / total >= target)
    res = simplified_bsa(model, a, max_rounds, stop=stop)
    S = np.empty_like(mu.symbol_matrix)
    S[res.assignment] = mu.symbol_matrix
    return TableMapping(mu.m, mu.n, mu.constellation, S)
