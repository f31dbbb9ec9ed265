"""Rate-1/2 feedforward convolutional code (13, 15) in octal, memory 3.

Tap polynomials read the octal digits MSB first as coefficients of D^0..D^3:
13 -> 1 + D^2 + D^3 and 15 -> 1 + D + D^3. The trellis is terminated with
three zero tail bits. LLRs follow ``L = ln P(b=0) / P(b=1)``.
"""

from __future__ import annotations

import numpy as np
from numba import njit

GENERATORS = (0o13, 0o15)
MEMORY = 3
NUM_STATES = 2**MEMORY


def _taps(g: int) -> np.ndarray:
    return np.array([(g >> (MEMORY - k)) & 1 for k in range(MEMORY + 1)], dtype=np.int64)


TAPS = np.stack([_taps(g) for g in GENERATORS])  # (2, MEMORY + 1), column k is D^k


def _build_trellis():
    # state holds the previous inputs, most recent in the top bit
    next_state = np.empty((NUM_STATES, 2), dtype=np.int64)
    outputs = np.empty((NUM_STATES, 2, 2), dtype=np.int64)
    for s in range(NUM_STATES):
        past = [(s >> (MEMORY - 1 - k)) & 1 for k in range(MEMORY)]
        for u in (0, 1):
            reg = np.array([u] + past)
            outputs[s, u] = (TAPS @ reg) % 2
            next_state[s, u] = (u << (MEMORY - 1)) | (s >> 1)
    return next_state, outputs


NEXT_STATE, OUTPUTS = _build_trellis()


def conv_encode(info_bits) -> np.ndarray:
    """Encode and terminate; output ``c1_0 c2_0 c1_1 c2_1 ...`` of length ``2 (K + 3)``."""
    u = np.asarray(info_bits, dtype=np.int64)
    if u.ndim != 1 or len(u) == 0:
        raise ValueError("info_bits must be a nonempty 1-D array")
    u = np.concatenate([u, np.zeros(MEMORY, dtype=np.int64)])
    out = np.empty((len(u), 2), dtype=np.int8)
    for j in range(2):
        out[:, j] = np.convolve(u, TAPS[j])[: len(u)] % 2
    return out.ravel()


@njit(cache=True)
def _max_star(a, b):
    if a == -np.inf:
        return b
    if b == -np.inf:
        return a
    if a > b:
        return a + np.log1p(np.exp(b - a))
    return b + np.log1p(np.exp(a - b))


@njit(cache=True)
def _bcjr(llr, next_state, outputs, num_steps):
    S = next_state.shape[0]
    ninf = -np.inf
    alpha = np.full((num_steps + 1, S), ninf)
    beta = np.full((num_steps + 1, S), ninf)
    alpha[0, 0] = 0.0
    beta[num_steps, 0] = 0.0
    gamma = np.empty((num_steps, S, 2))
    for t in range(num_steps):
        l1 = llr[2 * t]
        l2 = llr[2 * t + 1]
        for s in range(S):
            for u in range(2):
                g = 0.5 * (1 - 2 * outputs[s, u, 0]) * l1 + 0.5 * (1 - 2 * outputs[s, u, 1]) * l2
                gamma[t, s, u] = g
    for t in range(num_steps):
        for s in range(S):
            a = alpha[t, s]
            if a == ninf:
                continue
            for u in range(2):
                ns = next_state[s, u]
                alpha[t + 1, ns] = _max_star(alpha[t + 1, ns], a + gamma[t, s, u])
        # normalize to keep the metrics bounded
        mx = ninf
        for s in range(S):
            if alpha[t + 1, s] > mx:
                mx = alpha[t + 1, s]
        for s in range(S):
            alpha[t + 1, s] -= mx
    for t in range(num_steps - 1, -1, -1):
        for s in range(S):
            acc = ninf
            for u in range(2):
                b = beta[t + 1, next_state[s, u]]
                if b != ninf:
                    acc = _max_star(acc, gamma[t, s, u] + b)
            beta[t, s] = acc
        mx = ninf
        for s in range(S):
            if beta[t, s] > mx:
                mx = beta[t, s]
        for s in range(S):
            beta[t, s] -= mx
    app_c = np.empty(2 * num_steps)
    app_u = np.empty(num_steps)
    for t in range(num_steps):
        c0 = np.full(2, ninf)
        c1 = np.full(2, ninf)
        u0 = ninf
        u1 = ninf
        for s in range(S):
            a = alpha[t, s]
            if a == ninf:
                continue
            for u in range(2):
                b = beta[t + 1, next_state[s, u]]
                if b == ninf:
                    continue
                m = a + gamma[t, s, u] + b
                if u == 0:
                    u0 = _max_star(u0, m)
                else:
                    u1 = _max_star(u1, m)
                for j in range(2):
                    if outputs[s, u, j] == 0:
                        c0[j] = _max_star(c0[j], m)
                    else:
                        c1[j] = _max_star(c1[j], m)
        app_c[2 * t] = c0[0] - c1[0]
        app_c[2 * t + 1] = c0[1] - c1[1]
        app_u[t] = u0 - u1
    return app_c, app_u


def bcjr_decode(coded_llrs, num_info: int | None = None):
    """Log-MAP decoding of a terminated block.

    Parameters
    ----------
    coded_llrs : array of float
        Channel (or demapper) LLRs of the ``2 (K + 3)`` coded bits.
    num_info : int, optional
        ``K``; inferred from the length when omitted.

    Returns
    -------
    extrinsic : ndarray
        A posteriori minus intrinsic LLRs of the coded bits.
    decisions : ndarray of int8
        Hard decisions on the ``K`` information bits.
    info_llrs : ndarray
        A posteriori LLRs of the information bits.
    """
    llr = np.ascontiguousarray(coded_llrs, dtype=np.float64)
    if llr.ndim != 1 or len(llr) % 2 or len(llr) <= 2 * MEMORY:
        raise ValueError("coded_llrs must hold 2 (K + 3) values with K >= 1")
    steps = len(llr) // 2
    if num_info is not None and num_info + MEMORY != steps:
        raise ValueError(f"length mismatch: {len(llr)} LLRs for K = {num_info}")
    if not np.all(np.isfinite(llr)):
        raise ValueError("coded_llrs must be finite")
    app_c, app_u = _bcjr(llr, NEXT_STATE, OUTPUTS, steps)
    info = app_u[: steps - MEMORY]
    return app_c - llr, (info < 0).astype(np.int8), info


def viterbi_decode(coded_llrs) -> np.ndarray:
    """Maximum-likelihood path of a terminated block; information bits only."""
    llr = np.asarray(coded_llrs, dtype=np.float64)
    steps = len(llr) // 2
    metric = np.full(NUM_STATES, -np.inf)
    metric[0] = 0.0
    back = np.zeros((steps, NUM_STATES, 2), dtype=np.int64)  # (prev state, input)
    for t in range(steps):
        new = np.full(NUM_STATES, -np.inf)
        for s in range(NUM_STATES):
            if metric[s] == -np.inf:
                continue
            for u in (0, 1):
                c = OUTPUTS[s, u]
                g = 0.5 * ((1 - 2 * c[0]) * llr[2 * t] + (1 - 2 * c[1]) * llr[2 * t + 1])
                ns = NEXT_STATE[s, u]
                if metric[s] + g > new[ns]:
                    new[ns] = metric[s] + g
                    back[t, ns] = (s, u)
        metric = new
    state, bits = 0, []
    for t in range(steps - 1, -1, -1):
        state, u = back[t, state]
        bits.append(u)
    return np.array(bits[::-1][: steps - MEMORY], dtype=np.int8)
