"""Compiled search engine (numba) for the default heuristic configuration.

This is the same traversal as the pure-Python engine in :mod:`.search` with
pruning, learned exclusions and minimum-remaining-values pivoting all
enabled; node, prune and exclusion counts are bit-identical by
construction.  Bit vectors are arrays of little-endian 64-bit words; bit
j-1 of a row is target j, exactly as in the integer bitsets elsewhere.
"""

from __future__ import annotations

import time

import numpy as np
from numba import njit, objmode

_M1 = np.uint64(0x5555555555555555)
_M2 = np.uint64(0x3333333333333333)
_M3 = np.uint64(0x0F0F0F0F0F0F0F0F)
_M4 = np.uint64(0x0101010101010101)
_S1 = np.uint64(1)
_S2 = np.uint64(2)
_S4 = np.uint64(4)
_S56 = np.uint64(56)
_ONE = np.uint64(1)
_ZERO = np.uint64(0)


@njit(cache=True, inline="always")
def _pc64(x):
    x = x - ((x >> _S1) & _M1)
    x = (x & _M2) + ((x >> _S2) & _M2)
    x = (x + (x >> _S4)) & _M3
    return np.int64((x * _M4) >> _S56)


@njit(cache=True)
def _search(rows, cols, full_t, pm, caps, d3, d9, vp, cap3, cap9, capv,
            k, half, picks0, avail0, deadline):
    wt = rows.shape[1]
    wc = avail0.shape[0]
    npr = caps.shape[0]
    n = rows.shape[0]

    avail_st = np.zeros((k + 2, wc), np.uint64)
    m_st = np.zeros((k + 2, wc), np.uint64)
    cov_st = np.zeros((k + 2, wt), np.uint64)
    picks = np.zeros(k + 1, np.int64)
    counts = np.zeros(npr, np.int64)
    gains_v = np.zeros((k + 1, n), np.int64)
    gains_i = np.zeros((k + 1, n), np.int64)
    gains_len = np.zeros(k + 1, np.int64)
    gains_ready = np.zeros(k + 1, np.uint8)
    witness = np.zeros(k, np.int64)

    c3 = np.int64(0)
    c9 = np.int64(0)
    tv = np.int64(0)
    nodes = np.int64(0)
    prunes = np.int64(0)
    excls = np.int64(0)
    tick = np.int64(0)
    status = np.int64(0)
    witness_len = np.int64(-1)

    d0 = picks0.shape[0]
    for w in range(wc):
        avail_st[d0, w] = avail0[w]
    for t in range(d0):
        i = picks0[t]
        picks[t] = i
        for w in range(wt):
            cov_st[d0, w] |= rows[i, w]
        for qi in range(npr):
            counts[qi] += pm[i, qi]
        c3 += d3[i]
        c9 += d9[i]
        tv += vp[i]

    depth = d0
    entering = True
    while True:
        if entering:
            entering = False
            nodes += 1
            tick += 1
            if deadline > 0.0 and (tick & 1023) == 0:
                now = 0.0
                with objmode(now="f8"):
                    now = time.monotonic()
                if now > deadline:
                    status = 2
                    break
            gains_ready[depth] = 0
            for w in range(wc):
                m_st[depth, w] = _ZERO
            if depth < k:
                best_j = np.int64(-1)
                best_cnt = np.int64(-1)
                done = False
                for w in range(wt):
                    uw = (~cov_st[depth, w]) & full_t[w]
                    while uw != _ZERO:
                        b = uw & (~uw + _ONE)
                        uw ^= b
                        jbit = np.int64(w * 64) + _pc64(b - _ONE)
                        cnt = np.int64(0)
                        for w2 in range(wc):
                            cnt += _pc64(cols[jbit, w2] & avail_st[depth, w2])
                        if best_cnt < 0 or cnt < best_cnt:
                            best_cnt = cnt
                            best_j = jbit
                            if cnt == 0:
                                done = True
                                break
                    if done:
                        break
                if best_cnt > 0:
                    for w in range(wc):
                        m_st[depth, w] = cols[best_j, w] & avail_st[depth, w]
            # depth == k or a zero-coverer target: m stays empty, backtrack next

        # next sibling at this depth
        i = np.int64(-1)
        for w in range(wc):
            mw = m_st[depth, w]
            if mw != _ZERO:
                b = mw & (~mw + _ONE)
                m_st[depth, w] = mw ^ b
                i = np.int64(w * 64) + _pc64(b - _ONE)
                break
        if i < 0:
            if depth == d0:
                break
            depth -= 1
            pi = picks[depth]
            for qi in range(npr):
                counts[qi] -= pm[pi, qi]
            c3 -= d3[pi]
            c9 -= d9[pi]
            tv -= vp[pi]
            avail_st[depth, pi >> 6] &= ~(_ONE << np.uint64(pi & 63))
            excls += 1
            continue

        tick += 1
        if deadline > 0.0 and (tick & 1023) == 0:
            now = 0.0
            with objmode(now="f8"):
                now = time.monotonic()
            if now > deadline:
                status = 2
                break

        ok = True
        for qi in range(npr):
            if pm[i, qi] != 0 and counts[qi] + 1 > caps[qi]:
                ok = False
                break
        if ok and d3[i] != 0 and c3 + 1 > cap3:
            ok = False
        if ok and d9[i] != 0 and c9 + 1 > cap9:
            ok = False
        if ok and tv + vp[i] > capv:
            ok = False
        if not ok:
            continue

        newcount = np.int64(0)
        for w in range(wt):
            nb = cov_st[depth, w] | rows[i, w]
            cov_st[depth + 1, w] = nb
            newcount += _pc64(nb)
        if newcount == half:
            picks[depth] = i
            witness_len = depth + 1
            for t in range(witness_len):
                witness[t] = picks[t]
            status = 1
            break
        rem = k - depth - 1
        if rem == 0:
            prunes += 1
            continue
        uncovered_after = half - newcount
        threshold = (uncovered_after + rem - 1) // rem
        if gains_ready[depth] == 0:
            glen = np.int64(0)
            for w in range(wc):
                aw = avail_st[depth, w]
                while aw != _ZERO:
                    b = aw & (~aw + _ONE)
                    aw ^= b
                    gi = np.int64(w * 64) + _pc64(b - _ONE)
                    g = np.int64(0)
                    for w2 in range(wt):
                        g += _pc64(rows[gi, w2] & ~cov_st[depth, w2] & full_t[w2])
                    gains_v[depth, glen] = g
                    gains_i[depth, glen] = gi
                    glen += 1
            order = np.argsort(-gains_v[depth, :glen], kind="mergesort")
            tmpv = np.empty(glen, np.int64)
            tmpi = np.empty(glen, np.int64)
            for t in range(glen):
                tmpv[t] = gains_v[depth, order[t]]
                tmpi[t] = gains_i[depth, order[t]]
            for t in range(glen):
                gains_v[depth, t] = tmpv[t]
                gains_i[depth, t] = tmpi[t]
            gains_len[depth] = glen
            gains_ready[depth] = 1
        # exact max gain over currently available candidates; descending
        # bounds let the scan stop as soon as the decision is settled
        s = np.int64(0)
        glen = gains_len[depth]
        for t in range(glen):
            if gains_v[depth, t] <= s:
                break
            gi = gains_i[depth, t]
            if (avail_st[depth, gi >> 6] >> np.uint64(gi & 63)) & _ONE == _ZERO:
                continue
            gval = np.int64(0)
            for w2 in range(wt):
                gval += _pc64(rows[gi, w2] & ~cov_st[depth + 1, w2])
            if gval > s:
                s = gval
                if s >= threshold:
                    break
        if s < threshold:
            prunes += 1
            continue

        picks[depth] = i
        for qi in range(npr):
            counts[qi] += pm[i, qi]
        c3 += d3[i]
        c9 += d9[i]
        tv += vp[i]
        for w in range(wc):
            avail_st[depth + 1, w] = avail_st[depth, w]
        avail_st[depth + 1, i >> 6] &= ~(_ONE << np.uint64(i & 63))
        depth += 1
        entering = True

    return status, witness_len, witness, nodes, prunes, excls


def _int_to_words(value: int, nwords: int) -> np.ndarray:
    return np.frombuffer(value.to_bytes(nwords * 8, "little"), dtype=np.uint64).copy()


def run(table, cands, profile, deadline, init_picks=(), init_avail=None):
    """Adapter matching the return convention of the Python engine."""
    params = table.params
    k, half = params.k, params.half
    n = len(cands)
    wt = (half + 63) // 64
    wc = max(1, (n + 63) // 64)

    row_ints = [table.row(c.v) for c in cands]
    if n:
        rows = np.frombuffer(
            b"".join(r.to_bytes(wt * 8, "little") for r in row_ints),
            dtype=np.uint64).reshape(n, wt).copy()
        bits = np.unpackbits(rows.view(np.uint8), axis=1,
                             bitorder="little", count=half)
        colbits = np.ascontiguousarray(bits.T)
        packed = np.packbits(colbits, axis=1, bitorder="little")
        pad = wc * 8 - packed.shape[1]
        if pad:
            packed = np.hstack([packed, np.zeros((half, pad), np.uint8)])
        cols = packed.view(np.uint64).reshape(half, wc)
    else:
        rows = np.zeros((0, wt), np.uint64)
        cols = np.zeros((half, wc), np.uint64)

    full_t = _int_to_words((1 << half) - 1, wt)
    primes = sorted(profile.per_prime_caps)
    pindex = {q: t for t, q in enumerate(primes)}
    npr = max(1, len(primes))
    pm = np.zeros((max(1, n), npr), np.uint8)
    for t, c in enumerate(cands):
        for q in c.shares:
            pm[t, pindex[q]] = 1
    caps = np.full(npr, k, np.int64)
    for t, q in enumerate(primes):
        caps[t] = profile.per_prime_caps[q]
    d3 = np.array([1 if c.div3 else 0 for c in cands] or [0], np.uint8)
    d9 = np.array([1 if c.div9 else 0 for c in cands] or [0], np.uint8)
    vp = np.array([c.valp for c in cands] or [0], np.int64)
    cap3 = profile.three_cap if profile.three_cap is not None else k + 1
    cap9 = profile.nine_cap if profile.nine_cap is not None else k + 1
    capv = profile.valuation_cap

    picks0 = np.array(list(init_picks), np.int64)
    avail_int = (1 << n) - 1 if init_avail is None else init_avail
    avail0 = _int_to_words(avail_int, wc)
    dl = deadline if deadline is not None else -1.0

    status, wlen, warr, nodes, prunes, excls = _search(
        rows, cols, full_t, pm, caps, d3, d9, vp,
        np.int64(cap3), np.int64(cap9), np.int64(capv),
        np.int64(k), np.int64(half), picks0, avail0, np.float64(dl))

    witness = [int(warr[t]) for t in range(wlen)] if status == 1 else None
    return witness, int(nodes), int(prunes), int(excls), status == 2
