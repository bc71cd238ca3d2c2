"""Jitted search core.

Solution state lives in flat arrays so every hot operation runs in nopython
mode:

    seq  int32  (m, n)  city ids per tour row (row t holds size[t] entries)
    size int32  (m,)
    pos  int32  (n+1,)  position of city c within its tour (pos[0] unused)
    tof  int32  (n+1,)  tour index of city c, -1 while removed
    cum  float64(m, n)  length from the depot to seq[t][p] along tour t
    tlen float64(m,)    full tour lengths (closing depot edge included)

Vertex 0 is the depot. Move kinds 0..9 follow the variable-neighborhood-descent
order used by the local search: single relocate, pair relocate, reversed pair
relocate, successor swap, pair-vs-city swap, pair-vs-pair swap, reversed
pair-vs-pair swap, intra-tour 2-opt, inter-tour tail swap, inter-tour
prefix/tail reconnection.
"""
import math

import numpy as np
from numba import njit

IMPROVE_EPS = 1e-9

# acceptance outcome codes
OUT_NEW_BEST = 0
OUT_IMPROVED_LOCAL = 1
OUT_ACCEPTED = 2
OUT_REJECTED = 3

# run_chunk return codes
CHUNK_DONE = 0
CHUNK_TARGET = 1
CHUNK_EXTERNAL_STI = 2
CHUNK_INVALID = 3

_U12 = np.uint64(12)
_U25 = np.uint64(25)
_U27 = np.uint64(27)
_U11 = np.uint64(11)
_MULT = np.uint64(0x2545F4914F6CDD1D)
_TWO53_INV = 1.0 / 9007199254740992.0


@njit(cache=True, inline="always")
def rng_next(state):
    x = state[0]
    x ^= x >> _U12
    x ^= x << _U25
    x ^= x >> _U27
    state[0] = x
    return x * _MULT


@njit(cache=True, inline="always")
def rng_uniform(state):
    return (rng_next(state) >> _U11) * _TWO53_INV


@njit(cache=True, inline="always")
def rng_below(state, k):
    i = int(rng_uniform(state) * k)
    if i >= k:
        i = k - 1
    return i


@njit(cache=True, inline="always")
def _d(i, j, coords, D, useD, metric):
    if i == j:
        return 0.0
    if useD:
        return D[i, j]
    dx = coords[i, 0] - coords[j, 0]
    dy = coords[i, 1] - coords[j, 1]
    if metric == 0:
        return math.sqrt(dx * dx + dy * dy)
    if metric == 1:
        return math.floor(math.sqrt(dx * dx + dy * dy) + 0.5)
    if metric == 2:
        r = math.sqrt((dx * dx + dy * dy) / 10.0)
        t = math.floor(r + 0.5)
        if t < r:
            return t + 1.0
        return t
    return math.ceil(math.sqrt(dx * dx + dy * dy))


@njit(cache=True, inline="always")
def _succ(c, sq, sz, po, to):
    t = to[c]
    p = po[c] + 1
    if p < sz[t]:
        return sq[t, p]
    return 0


@njit(cache=True, inline="always")
def _pred(c, sq, po, to):
    p = po[c]
    if p > 0:
        return sq[to[c], p - 1]
    return 0


@njit(cache=True)
def rebuild_tour(t, sq, sz, po, to, cu, tl, coords, D, useD, metric):
    acc = 0.0
    prev = 0
    for p in range(sz[t]):
        c = sq[t, p]
        po[c] = p
        to[c] = t
        acc += _d(prev, c, coords, D, useD, metric)
        cu[t, p] = acc
        prev = c
    tl[t] = acc + _d(prev, 0, coords, D, useD, metric)


@njit(cache=True)
def rebuild_all(sq, sz, po, to, cu, tl, coords, D, useD, metric):
    for t in range(sz.shape[0]):
        rebuild_tour(t, sq, sz, po, to, cu, tl, coords, D, useD, metric)


@njit(cache=True)
def makespan(tl):
    best = tl[0]
    for t in range(1, tl.shape[0]):
        if tl[t] > best:
            best = tl[t]
    return best


@njit(cache=True)
def copy_sol(dsq, dsz, dpo, dto, dcu, dtl, ssq, ssz, spo, sto, scu, stl):
    dsq[:, :] = ssq
    dsz[:] = ssz
    dpo[:] = spo
    dto[:] = sto
    dcu[:, :] = scu
    dtl[:] = stl


@njit(cache=True)
def quick_check(sq, sz, po, to, n, m):
    seen = np.zeros(n + 1, dtype=np.uint8)
    total = 0
    for t in range(m):
        if sz[t] < 1:
            return False
        for p in range(sz[t]):
            c = sq[t, p]
            if c < 1 or c > n:
                return False
            if seen[c] != 0:
                return False
            seen[c] = 1
            if to[c] != t or po[c] != p:
                return False
            total += 1
    return total == n


# ---------------------------------------------------------------------------
# Move evaluation: returns (applicable, d_metric, d_total) where d_metric is
# the change of the max length over the affected tours and d_total the change
# of their summed length (negative = shorter).
# ---------------------------------------------------------------------------

@njit(cache=True)
def eval_move(kind, u, v, sq, sz, po, to, cu, tl, coords, D, useD, metric):
    t1 = to[u]
    t2 = to[v]

    if kind == 0:  # relocate u after v
        if t1 != t2 and sz[t1] == 1:
            return False, 0.0, 0.0
        pu = _pred(u, sq, po, to)
        x = _succ(u, sq, sz, po, to)
        if t1 == t2 and v == pu:
            sv = x
        else:
            sv = _succ(v, sq, sz, po, to)
        rem = _d(pu, x, coords, D, useD, metric) - _d(pu, u, coords, D, useD, metric) - _d(u, x, coords, D, useD, metric)
        ins = _d(v, u, coords, D, useD, metric) + _d(u, sv, coords, D, useD, metric) - _d(v, sv, coords, D, useD, metric)
        if t1 == t2:
            dt = rem + ins
            return True, dt, dt
        n1 = tl[t1] + rem
        n2 = tl[t2] + ins
        before = tl[t1] if tl[t1] > tl[t2] else tl[t2]
        after = n1 if n1 > n2 else n2
        return True, after - before, rem + ins

    if kind == 1 or kind == 2:  # relocate pair (u,x): kind1 after v in order, kind2 before v reversed
        x = _succ(u, sq, sz, po, to)
        if x == 0 or v == x:
            return False, 0.0, 0.0
        if t1 != t2 and sz[t1] <= 2:
            return False, 0.0, 0.0
        pu = _pred(u, sq, po, to)
        w = _succ(x, sq, sz, po, to)
        dux = _d(u, x, coords, D, useD, metric)
        rem = (_d(pu, w, coords, D, useD, metric) - _d(pu, u, coords, D, useD, metric)
               - dux - _d(x, w, coords, D, useD, metric))
        if kind == 1:
            if t1 == t2 and v == pu:
                sv = w
            else:
                sv = _succ(v, sq, sz, po, to)
            ins = (_d(v, u, coords, D, useD, metric) + dux + _d(x, sv, coords, D, useD, metric)
                   - _d(v, sv, coords, D, useD, metric))
        else:
            pv = _pred(v, sq, po, to)
            if t1 == t2 and pv == x:
                pv = pu
            ins = (_d(pv, x, coords, D, useD, metric) + dux + _d(u, v, coords, D, useD, metric)
                   - _d(pv, v, coords, D, useD, metric))
        if t1 == t2:
            dt = rem + ins
            return True, dt, dt
        n1 = tl[t1] + rem
        n2 = tl[t2] + ins
        before = tl[t1] if tl[t1] > tl[t2] else tl[t2]
        after = n1 if n1 > n2 else n2
        return True, after - before, rem + ins

    if kind == 3:  # swap successor of u with v
        x = _succ(u, sq, sz, po, to)
        if x == 0 or v == x:
            return False, 0.0, 0.0
        if t1 == t2 and _succ(x, sq, sz, po, to) == v:
            q = _succ(v, sq, sz, po, to)
            dl = (-_d(u, x, coords, D, useD, metric) - _d(v, q, coords, D, useD, metric)
                  + _d(u, v, coords, D, useD, metric) + _d(x, q, coords, D, useD, metric))
            return True, dl, dl
        sx = _succ(x, sq, sz, po, to)
        pv = _pred(v, sq, po, to)
        sv = _succ(v, sq, sz, po, to)
        d1 = (-_d(u, x, coords, D, useD, metric) - _d(x, sx, coords, D, useD, metric)
              + _d(u, v, coords, D, useD, metric) + _d(v, sx, coords, D, useD, metric))
        d2 = (-_d(pv, v, coords, D, useD, metric) - _d(v, sv, coords, D, useD, metric)
              + _d(pv, x, coords, D, useD, metric) + _d(x, sv, coords, D, useD, metric))
        if t1 == t2:
            dt = d1 + d2
            return True, dt, dt
        n1 = tl[t1] + d1
        n2 = tl[t2] + d2
        before = tl[t1] if tl[t1] > tl[t2] else tl[t2]
        after = n1 if n1 > n2 else n2
        return True, after - before, d1 + d2

    if kind == 4:  # swap pair (u,x) with single city v
        x = _succ(u, sq, sz, po, to)
        if x == 0 or v == x:
            return False, 0.0, 0.0
        pu = _pred(u, sq, po, to)
        w = _succ(x, sq, sz, po, to)
        if t1 == t2 and v == w:
            sv = _succ(v, sq, sz, po, to)
            dl = (-_d(pu, u, coords, D, useD, metric) - _d(x, v, coords, D, useD, metric) - _d(v, sv, coords, D, useD, metric)
                  + _d(pu, v, coords, D, useD, metric) + _d(v, u, coords, D, useD, metric) + _d(x, sv, coords, D, useD, metric))
            return True, dl, dl
        if t1 == t2 and v == pu:
            pv = _pred(v, sq, po, to)
            dl = (-_d(pv, v, coords, D, useD, metric) - _d(v, u, coords, D, useD, metric) - _d(x, w, coords, D, useD, metric)
                  + _d(pv, u, coords, D, useD, metric) + _d(x, v, coords, D, useD, metric) + _d(v, w, coords, D, useD, metric))
            return True, dl, dl
        pv = _pred(v, sq, po, to)
        sv = _succ(v, sq, sz, po, to)
        dux = _d(u, x, coords, D, useD, metric)
        dA = (-_d(pu, u, coords, D, useD, metric) - dux - _d(x, w, coords, D, useD, metric)
              + _d(pu, v, coords, D, useD, metric) + _d(v, w, coords, D, useD, metric))
        dB = (-_d(pv, v, coords, D, useD, metric) - _d(v, sv, coords, D, useD, metric)
              + _d(pv, u, coords, D, useD, metric) + dux + _d(x, sv, coords, D, useD, metric))
        if t1 == t2:
            dt = dA + dB
            return True, dt, dt
        n1 = tl[t1] + dA
        n2 = tl[t2] + dB
        before = tl[t1] if tl[t1] > tl[t2] else tl[t2]
        after = n1 if n1 > n2 else n2
        return True, after - before, dA + dB

    if kind == 5 or kind == 6:  # swap pair (u,x) with pair (v,y); kind 6 reinserts (x,u)
        x = _succ(u, sq, sz, po, to)
        if x == 0:
            return False, 0.0, 0.0
        y = _succ(v, sq, sz, po, to)
        if y == 0 or v == x or y == u:
            return False, 0.0, 0.0
        pu = _pred(u, sq, po, to)
        w = _succ(x, sq, sz, po, to)
        sy = _succ(y, sq, sz, po, to)
        if t1 == t2 and v == w:
            if kind == 5:
                dl = (-_d(pu, u, coords, D, useD, metric) - _d(x, v, coords, D, useD, metric) - _d(y, sy, coords, D, useD, metric)
                      + _d(pu, v, coords, D, useD, metric) + _d(y, u, coords, D, useD, metric) + _d(x, sy, coords, D, useD, metric))
            else:
                dl = (-_d(pu, u, coords, D, useD, metric) - _d(x, v, coords, D, useD, metric) - _d(y, sy, coords, D, useD, metric)
                      + _d(pu, v, coords, D, useD, metric) + _d(y, x, coords, D, useD, metric) + _d(u, sy, coords, D, useD, metric))
            return True, dl, dl
        if t1 == t2 and sy == u:
            pv = _pred(v, sq, po, to)
            if kind == 5:
                dl = (-_d(pv, v, coords, D, useD, metric) - _d(y, u, coords, D, useD, metric) - _d(x, w, coords, D, useD, metric)
                      + _d(pv, u, coords, D, useD, metric) + _d(x, v, coords, D, useD, metric) + _d(y, w, coords, D, useD, metric))
            else:
                dl = (-_d(pv, v, coords, D, useD, metric) - _d(y, u, coords, D, useD, metric) - _d(x, w, coords, D, useD, metric)
                      + _d(pv, x, coords, D, useD, metric) + _d(u, v, coords, D, useD, metric) + _d(y, w, coords, D, useD, metric))
            return True, dl, dl
        pv = _pred(v, sq, po, to)
        dux = _d(u, x, coords, D, useD, metric)
        dvy = _d(v, y, coords, D, useD, metric)
        dA = (-_d(pu, u, coords, D, useD, metric) - dux - _d(x, w, coords, D, useD, metric)
              + _d(pu, v, coords, D, useD, metric) + dvy + _d(y, w, coords, D, useD, metric))
        if kind == 5:
            dB = (-_d(pv, v, coords, D, useD, metric) - dvy - _d(y, sy, coords, D, useD, metric)
                  + _d(pv, u, coords, D, useD, metric) + dux + _d(x, sy, coords, D, useD, metric))
        else:
            dB = (-_d(pv, v, coords, D, useD, metric) - dvy - _d(y, sy, coords, D, useD, metric)
                  + _d(pv, x, coords, D, useD, metric) + dux + _d(u, sy, coords, D, useD, metric))
        if t1 == t2:
            dt = dA + dB
            return True, dt, dt
        n1 = tl[t1] + dA
        n2 = tl[t2] + dB
        before = tl[t1] if tl[t1] > tl[t2] else tl[t2]
        after = n1 if n1 > n2 else n2
        return True, after - before, dA + dB

    if kind == 7:  # intra-tour 2-opt
        if t1 != t2:
            return False, 0.0, 0.0
        if po[u] < po[v]:
            a = u
            b = v
        else:
            a = v
            b = u
        xa = _succ(a, sq, sz, po, to)
        if xa == b:
            return False, 0.0, 0.0
        yb = _succ(b, sq, sz, po, to)
        dl = (_d(a, b, coords, D, useD, metric) + _d(xa, yb, coords, D, useD, metric)
              - _d(a, xa, coords, D, useD, metric) - _d(b, yb, coords, D, useD, metric))
        return True, dl, dl

    # kinds 8/9: inter-tour 2-opt* reconnections
    if t1 == t2:
        return False, 0.0, 0.0
    x = _succ(u, sq, sz, po, to)
    y = _succ(v, sq, sz, po, to)
    if x == 0 and y == 0:
        return False, 0.0, 0.0
    prefA = cu[t1, po[u]]
    tailA = tl[t1] - prefA - _d(u, x, coords, D, useD, metric)
    prefB = cu[t2, po[v]]
    tailB = tl[t2] - prefB - _d(v, y, coords, D, useD, metric)
    if kind == 8:  # new edges (u,y), (v,x)
        n1 = prefA + _d(u, y, coords, D, useD, metric) + tailB
        n2 = prefB + _d(v, x, coords, D, useD, metric) + tailA
    else:  # new edges (u,v), (x,y)
        n1 = prefA + _d(u, v, coords, D, useD, metric) + prefB
        n2 = tailA + _d(x, y, coords, D, useD, metric) + tailB
    before = tl[t1] if tl[t1] > tl[t2] else tl[t2]
    after = n1 if n1 > n2 else n2
    return True, after - before, (n1 + n2) - (tl[t1] + tl[t2])


# ---------------------------------------------------------------------------
# Move application
# ---------------------------------------------------------------------------

@njit(cache=True, inline="always")
def _remove_city(c, sq, sz, po, to):
    t = to[c]
    p = po[c]
    s = sz[t]
    for i in range(p, s - 1):
        cc = sq[t, i + 1]
        sq[t, i] = cc
        po[cc] = i
    sz[t] = s - 1
    to[c] = -1
    po[c] = -1
    return t


@njit(cache=True, inline="always")
def _insert_city(c, t, at, sq, sz, po, to):
    s = sz[t]
    i = s
    while i > at:
        cc = sq[t, i - 1]
        sq[t, i] = cc
        po[cc] = i
        i -= 1
    sq[t, at] = c
    po[c] = at
    to[c] = t
    sz[t] = s + 1


@njit(cache=True)
def apply_move(kind, u, v, sq, sz, po, to, cu, tl, coords, D, useD, metric, bits, freq):
    t1 = to[u]
    t2 = to[v]
    x = _succ(u, sq, sz, po, to)
    y = _succ(v, sq, sz, po, to)

    if kind <= 2:
        _remove_city(u, sq, sz, po, to)
        if kind >= 1:
            _remove_city(x, sq, sz, po, to)
        td = to[v]
        if kind <= 1:
            at = po[v] + 1
        else:
            at = po[v]
        if kind == 0:
            _insert_city(u, td, at, sq, sz, po, to)
        elif kind == 1:
            _insert_city(u, td, at, sq, sz, po, to)
            _insert_city(x, td, at + 1, sq, sz, po, to)
        else:
            _insert_city(x, td, at, sq, sz, po, to)
            _insert_city(u, td, at + 1, sq, sz, po, to)
        rebuild_tour(t1, sq, sz, po, to, cu, tl, coords, D, useD, metric)
        if td != t1:
            rebuild_tour(td, sq, sz, po, to, cu, tl, coords, D, useD, metric)

    elif kind == 3:
        px = po[x]
        pv = po[v]
        sq[t1, px] = v
        sq[t2, pv] = x
        po[v] = px
        to[v] = t1
        po[x] = pv
        to[x] = t2
        rebuild_tour(t1, sq, sz, po, to, cu, tl, coords, D, useD, metric)
        if t2 != t1:
            rebuild_tour(t2, sq, sz, po, to, cu, tl, coords, D, useD, metric)

    elif kind <= 6:
        pa = po[u]
        pb = po[v]
        if kind == 4:
            lenB = 1
            a0 = v
            a1 = -1
            b0 = u
            b1 = x
        elif kind == 5:
            lenB = 2
            a0 = v
            a1 = y
            b0 = u
            b1 = x
        else:
            lenB = 2
            a0 = v
            a1 = y
            b0 = x
            b1 = u
        if t1 == t2:
            s = sz[t1]
            scratch = np.empty(s, dtype=np.int32)
            kk = 0
            p = 0
            while p < s:
                if p == pa:
                    scratch[kk] = a0
                    kk += 1
                    if a1 >= 0:
                        scratch[kk] = a1
                        kk += 1
                    p += 2
                elif p == pb:
                    scratch[kk] = b0
                    kk += 1
                    scratch[kk] = b1
                    kk += 1
                    p += lenB
                else:
                    scratch[kk] = sq[t1, p]
                    kk += 1
                    p += 1
            for p in range(s):
                sq[t1, p] = scratch[p]
            rebuild_tour(t1, sq, sz, po, to, cu, tl, coords, D, useD, metric)
        else:
            s1 = sz[t1]
            lenA = 1 if a1 < 0 else 2
            scratch = np.empty(s1 - 2 + lenA, dtype=np.int32)
            kk = 0
            p = 0
            while p < s1:
                if p == pa:
                    scratch[kk] = a0
                    kk += 1
                    if a1 >= 0:
                        scratch[kk] = a1
                        kk += 1
                    p += 2
                else:
                    scratch[kk] = sq[t1, p]
                    kk += 1
                    p += 1
            for p in range(kk):
                sq[t1, p] = scratch[p]
            sz[t1] = kk
            s2 = sz[t2]
            scratch2 = np.empty(s2 - lenB + 2, dtype=np.int32)
            kk = 0
            p = 0
            while p < s2:
                if p == pb:
                    scratch2[kk] = b0
                    kk += 1
                    scratch2[kk] = b1
                    kk += 1
                    p += lenB
                else:
                    scratch2[kk] = sq[t2, p]
                    kk += 1
                    p += 1
            for p in range(kk):
                sq[t2, p] = scratch2[p]
            sz[t2] = kk
            rebuild_tour(t1, sq, sz, po, to, cu, tl, coords, D, useD, metric)
            rebuild_tour(t2, sq, sz, po, to, cu, tl, coords, D, useD, metric)

    elif kind == 7:
        if po[u] < po[v]:
            lo = po[u] + 1
            hi = po[v]
        else:
            lo = po[v] + 1
            hi = po[u]
        while lo < hi:
            ca = sq[t1, lo]
            cb = sq[t1, hi]
            sq[t1, lo] = cb
            sq[t1, hi] = ca
            po[cb] = lo
            po[ca] = hi
            lo += 1
            hi -= 1
        rebuild_tour(t1, sq, sz, po, to, cu, tl, coords, D, useD, metric)

    else:
        pa = po[u]
        pb = po[v]
        s1 = sz[t1]
        s2 = sz[t2]
        if kind == 8:  # tail swap
            n1 = pa + 1 + (s2 - pb - 1)
            n2 = pb + 1 + (s1 - pa - 1)
            sc1 = np.empty(n1, dtype=np.int32)
            sc2 = np.empty(n2, dtype=np.int32)
            kk = 0
            for p in range(pa + 1):
                sc1[kk] = sq[t1, p]
                kk += 1
            for p in range(pb + 1, s2):
                sc1[kk] = sq[t2, p]
                kk += 1
            kk = 0
            for p in range(pb + 1):
                sc2[kk] = sq[t2, p]
                kk += 1
            for p in range(pa + 1, s1):
                sc2[kk] = sq[t1, p]
                kk += 1
        else:  # prefix + reversed prefix / reversed tail + tail
            n1 = pa + 1 + pb + 1
            n2 = (s1 - pa - 1) + (s2 - pb - 1)
            sc1 = np.empty(n1, dtype=np.int32)
            sc2 = np.empty(n2, dtype=np.int32)
            kk = 0
            for p in range(pa + 1):
                sc1[kk] = sq[t1, p]
                kk += 1
            for p in range(pb, -1, -1):
                sc1[kk] = sq[t2, p]
                kk += 1
            kk = 0
            for p in range(s1 - 1, pa, -1):
                sc2[kk] = sq[t1, p]
                kk += 1
            for p in range(pb + 1, s2):
                sc2[kk] = sq[t2, p]
                kk += 1
        for p in range(n1):
            sq[t1, p] = sc1[p]
        sz[t1] = n1
        for p in range(n2):
            sq[t2, p] = sc2[p]
        sz[t2] = n2
        rebuild_tour(t1, sq, sz, po, to, cu, tl, coords, D, useD, metric)
        rebuild_tour(t2, sq, sz, po, to, cu, tl, coords, D, useD, metric)

    # don't-look bits: everything whose incident edges were touched rescans
    bits[u] = 0
    bits[v] = 0
    if x > 0:
        bits[x] = 0
    if y > 0:
        bits[y] = 0
    for c in (u, v):
        pn = _pred(c, sq, po, to)
        sn = _succ(c, sq, sz, po, to)
        if pn > 0:
            bits[pn] = 0
        if sn > 0:
            bits[sn] = 0
    freq[u] += 1
    freq[v] += 1


# ---------------------------------------------------------------------------
# Local search: best-improvement VND over the ten move kinds, alpha-restricted
# candidates, don't-look bits, and a final verification cycle that guarantees
# a true local optimum (the minmax metric couples moves through tour lengths,
# so bit pruning alone is not sufficient).
# ---------------------------------------------------------------------------

@njit(cache=True)
def _scan_best(kind, sq, sz, po, to, cu, tl, nbr, bits, ignore_bits, coords, D, useD, metric, n):
    found = False
    bu = -1
    bv = -1
    bdm = 0.0
    bdt = 0.0
    for u in range(1, n + 1):
        if not ignore_bits and bits[u] != 0:
            continue
        for j in range(nbr.shape[1]):
            v = nbr[u, j]
            if v <= 0:
                continue
            ok, dm, dt = eval_move(kind, u, v, sq, sz, po, to, cu, tl, coords, D, useD, metric)
            if not ok or dm >= -IMPROVE_EPS:
                continue
            if not found:
                take = True
            elif dm < bdm:
                take = True
            elif dm == bdm and dt < bdt:
                take = True
            elif dm == bdm and dt == bdt and (u < bu or (u == bu and v < bv)):
                take = True
            else:
                take = False
            if take:
                found = True
                bu = u
                bv = v
                bdm = dm
                bdt = dt
    return found, bu, bv


@njit(cache=True)
def _scan_first(kind, sq, sz, po, to, cu, tl, nbr, bits, ignore_bits, coords, D, useD, metric, n):
    for u in range(1, n + 1):
        if not ignore_bits and bits[u] != 0:
            continue
        for j in range(nbr.shape[1]):
            v = nbr[u, j]
            if v <= 0:
                continue
            ok, dm, dt = eval_move(kind, u, v, sq, sz, po, to, cu, tl, coords, D, useD, metric)
            if ok and dm < -IMPROVE_EPS:
                return True, u, v
    return False, -1, -1


@njit(cache=True)
def local_search_kernel(sq, sz, po, to, cu, tl, nbr, bits, freq, first_improv, coords, D, useD, metric, n):
    applied = 0
    while True:
        all_clear = False
        while True:
            all_clear = True
            for c in range(1, n + 1):
                if bits[c] != 0:
                    all_clear = False
                    break
            progressed = False
            for kind in range(10):
                if first_improv:
                    found, u, v = _scan_first(kind, sq, sz, po, to, cu, tl, nbr, bits, False, coords, D, useD, metric, n)
                else:
                    found, u, v = _scan_best(kind, sq, sz, po, to, cu, tl, nbr, bits, False, coords, D, useD, metric, n)
                if found:
                    apply_move(kind, u, v, sq, sz, po, to, cu, tl, coords, D, useD, metric, bits, freq)
                    applied += 1
                    progressed = True
                    break
            if not progressed:
                break
        for c in range(1, n + 1):
            bits[c] = 1
        if all_clear:
            return applied
        vfound = False
        for kind in range(10):
            if first_improv:
                found, u, v = _scan_first(kind, sq, sz, po, to, cu, tl, nbr, bits, True, coords, D, useD, metric, n)
            else:
                found, u, v = _scan_best(kind, sq, sz, po, to, cu, tl, nbr, bits, True, coords, D, useD, metric, n)
            if found:
                apply_move(kind, u, v, sq, sz, po, to, cu, tl, coords, D, useD, metric, bits, freq)
                applied += 1
                vfound = True
                break
        if not vfound:
            return applied


# ---------------------------------------------------------------------------
# Greedy randomized construction
# ---------------------------------------------------------------------------

@njit(cache=True)
def greedy_init_kernel(sq, sz, po, to, cu, tl, nbr, coords, D, useD, metric, n, m, rng):
    for c in range(n + 1):
        to[c] = -1
        po[c] = -1
    perm = np.empty(n, dtype=np.int32)
    for i in range(n):
        perm[i] = i + 1
    for t in range(m):
        j = t + rng_below(rng, n - t)
        tmp = perm[t]
        perm[t] = perm[j]
        perm[j] = tmp
        c = perm[t]
        sq[t, 0] = c
        sz[t] = 1
        to[c] = t
        po[c] = 0
        tl[t] = 2.0 * _d(0, c, coords, D, useD, metric)
    assigned = m
    while assigned < n:
        tb = 0
        for t in range(1, m):
            if tl[t] < tl[tb] - IMPROVE_EPS:
                tb = t
        v = sq[tb, sz[tb] - 1]
        dv0 = _d(v, 0, coords, D, useD, metric)
        best = -1
        bestd = 1e300
        for j in range(nbr.shape[1]):
            w = nbr[v, j]
            if w <= 0 or to[w] >= 0:
                continue
            delta = _d(v, w, coords, D, useD, metric) + _d(w, 0, coords, D, useD, metric) - dv0
            if best < 0 or delta < bestd - IMPROVE_EPS:
                best = w
                bestd = delta
            elif delta <= bestd + IMPROVE_EPS and w < best:
                best = w
                bestd = delta
        if best < 0:
            for w in range(1, n + 1):
                if to[w] >= 0:
                    continue
                delta = _d(v, w, coords, D, useD, metric) + _d(w, 0, coords, D, useD, metric) - dv0
                if best < 0 or delta < bestd - IMPROVE_EPS:
                    best = w
                    bestd = delta
                elif delta <= bestd + IMPROVE_EPS and w < best:
                    best = w
                    bestd = delta
        p = sz[tb]
        sq[tb, p] = best
        po[best] = p
        to[best] = tb
        sz[tb] = p + 1
        tl[tb] += _d(v, best, coords, D, useD, metric) + _d(best, 0, coords, D, useD, metric) - dv0
        assigned += 1
    rebuild_all(sq, sz, po, to, cu, tl, coords, D, useD, metric)


# ---------------------------------------------------------------------------
# Single-tour improvement: 2-opt + Or-opt (segments 1..3) inside one tour,
# candidates restricted to the alpha neighbor lists.
# ---------------------------------------------------------------------------

@njit(cache=True)
def improve_tour_kernel(t, sq, sz, po, to, cu, tl, nbr, coords, D, useD, metric):
    s = sz[t]
    if s < 2:
        return
    improved = True
    while improved:
        improved = False
        # 2-opt
        for pi in range(s):
            u = sq[t, pi]
            for j in range(nbr.shape[1]):
                v = nbr[u, j]
                if v <= 0 or to[v] != t or v == u:
                    continue
                pa = po[u]
                pb = po[v]
                if pa > pb:
                    tmp = pa
                    pa = pb
                    pb = tmp
                if pa + 1 == pb:
                    continue
                a = sq[t, pa]
                b = sq[t, pb]
                xa = sq[t, pa + 1]
                yb = sq[t, pb + 1] if pb + 1 < s else 0
                delta = (_d(a, b, coords, D, useD, metric) + _d(xa, yb, coords, D, useD, metric)
                         - _d(a, xa, coords, D, useD, metric) - _d(b, yb, coords, D, useD, metric))
                if delta < -IMPROVE_EPS:
                    lo = pa + 1
                    hi = pb
                    while lo < hi:
                        ca = sq[t, lo]
                        cb = sq[t, hi]
                        sq[t, lo] = cb
                        sq[t, hi] = ca
                        po[cb] = lo
                        po[ca] = hi
                        lo += 1
                        hi -= 1
                    tl[t] += delta
                    improved = True
        # Or-opt
        for L in range(1, 4):
            if s - L < 1:
                break
            pi = 0
            while pi + L <= s:
                a = sq[t, pi]
                b = sq[t, pi + L - 1]
                p = sq[t, pi - 1] if pi > 0 else 0
                snx = sq[t, pi + L] if pi + L < s else 0
                remgain = (_d(p, a, coords, D, useD, metric) + _d(b, snx, coords, D, useD, metric)
                           - _d(p, snx, coords, D, useD, metric))
                moved = False
                for j in range(nbr.shape[1]):
                    v = nbr[a, j]
                    if v <= 0 or to[v] != t:
                        continue
                    pv = po[v]
                    if pv >= pi - 1 and pv <= pi + L - 1:
                        continue
                    w2 = sq[t, pv + 1] if pv + 1 < s else 0
                    base = -_d(v, w2, coords, D, useD, metric) - remgain
                    dfwd = base + _d(v, a, coords, D, useD, metric) + _d(b, w2, coords, D, useD, metric)
                    drev = base + _d(v, b, coords, D, useD, metric) + _d(a, w2, coords, D, useD, metric)
                    rev = drev < dfwd
                    delta = drev if rev else dfwd
                    if delta < -IMPROVE_EPS:
                        seg = np.empty(L, dtype=np.int32)
                        for q in range(L):
                            seg[q] = sq[t, pi + q]
                        rest = np.empty(s - L, dtype=np.int32)
                        kk = 0
                        for q in range(s):
                            if pi <= q < pi + L:
                                continue
                            rest[kk] = sq[t, q]
                            kk += 1
                        ins = (pv if pv < pi else pv - L) + 1
                        w = 0
                        for q in range(ins):
                            sq[t, w] = rest[q]
                            w += 1
                        if rev:
                            for q in range(L - 1, -1, -1):
                                sq[t, w] = seg[q]
                                w += 1
                        else:
                            for q in range(L):
                                sq[t, w] = seg[q]
                                w += 1
                        for q in range(ins, s - L):
                            sq[t, w] = rest[q]
                            w += 1
                        for q in range(s):
                            po[sq[t, q]] = q
                        tl[t] += delta
                        moved = True
                        break
                if moved:
                    improved = True
                    break
                pi += 1
            if improved:
                break
    rebuild_tour(t, sq, sz, po, to, cu, tl, coords, D, useD, metric)


# ---------------------------------------------------------------------------
# Ruin operators. Each fills S with the removed city ids and returns the count.
# The empty-tour guard skips candidates whose tour is down to its last city.
# ---------------------------------------------------------------------------

@njit(cache=True)
def _order_with_ties(keys, ids, k):
    """Ascending by key; ties ascending by ids. Returns positions into keys."""
    out = np.argsort(keys[:k])
    i = 0
    while i < k:
        j = i + 1
        while j < k and keys[out[j]] == keys[out[i]]:
            j += 1
        for a in range(i + 1, j):
            tmp = out[a]
            b = a - 1
            while b >= i and ids[out[b]] > ids[tmp]:
                out[b + 1] = out[b]
                b -= 1
            out[b + 1] = tmp
        i = j
    return out


@njit(cache=True, inline="always")
def _biased_index(k, gamma, rng):
    yv = rng_uniform(rng)
    idx = int((yv ** gamma) * k)
    if idx >= k:
        idx = k - 1
    return idx


@njit(cache=True)
def _remove_tracked(c, sq, sz, po, to, bits):
    pn = _pred(c, sq, po, to)
    sn = _succ(c, sq, sz, po, to)
    _remove_city(c, sq, sz, po, to)
    bits[c] = 0
    if pn > 0:
        bits[pn] = 0
    if sn > 0:
        bits[sn] = 0


@njit(cache=True)
def removal_shaw(S, lnn, gamma, sq, sz, po, to, n, rng, coords, D, useD, metric, bits):
    cnt = 0
    if lnn <= 0:
        return 0
    ref = 1 + rng_below(rng, n)
    cand = np.empty(n, dtype=np.int32)
    keys = np.empty(n, dtype=np.float64)
    ids = np.empty(n, dtype=np.int64)
    while cnt < lnn:
        k = 0
        for c in range(1, n + 1):
            if to[c] >= 0:
                cand[k] = c
                keys[k] = _d(ref, c, coords, D, useD, metric)
                ids[k] = c
                k += 1
        if k == 0:
            break
        order = _order_with_ties(keys, ids, k)
        idx = _biased_index(k, gamma, rng)
        chosen = -1
        for off in range(k):
            j = idx + off
            if j >= k:
                j -= k
            c = cand[order[j]]
            if sz[to[c]] > 1:
                chosen = c
                break
        if chosen < 0:
            break
        _remove_tracked(chosen, sq, sz, po, to, bits)
        S[cnt] = chosen
        cnt += 1
        ref = chosen
    return cnt


@njit(cache=True)
def removal_random(S, lnn, sq, sz, po, to, n, rng, bits):
    cnt = 0
    if lnn <= 0:
        return 0
    perm = np.empty(n, dtype=np.int32)
    for i in range(n):
        perm[i] = i + 1
    for i in range(n - 1):
        j = i + rng_below(rng, n - i)
        tmp = perm[i]
        perm[i] = perm[j]
        perm[j] = tmp
    for i in range(n):
        if cnt >= lnn:
            break
        c = perm[i]
        if sz[to[c]] > 1:
            _remove_tracked(c, sq, sz, po, to, bits)
            S[cnt] = c
            cnt += 1
    return cnt


@njit(cache=True)
def _removal_from_static_order(S, lnn, gamma, sq, sz, po, to, n, rng, bits, keys, ids):
    order = _order_with_ties(keys, ids, n)
    alive = np.empty(n, dtype=np.int32)
    for i in range(n):
        alive[i] = np.int32(ids[order[i]])
    klen = n
    cnt = 0
    while cnt < lnn and klen > 0:
        idx = _biased_index(klen, gamma, rng)
        chosen = -1
        cpos = -1
        for off in range(klen):
            j = idx + off
            if j >= klen:
                j -= klen
            c = alive[j]
            if sz[to[c]] > 1:
                chosen = c
                cpos = j
                break
        if chosen < 0:
            break
        _remove_tracked(chosen, sq, sz, po, to, bits)
        S[cnt] = chosen
        cnt += 1
        for j in range(cpos, klen - 1):
            alive[j] = alive[j + 1]
        klen -= 1
    return cnt


@njit(cache=True)
def removal_cross(S, lnn, gamma, sq, sz, po, to, nbr, n, rng, bits):
    if lnn <= 0:
        return 0
    keys = np.empty(n, dtype=np.float64)
    ids = np.empty(n, dtype=np.int64)
    for c in range(1, n + 1):
        score = 0
        for j in range(nbr.shape[1]):
            w = nbr[c, j]
            if w > 0 and to[w] != to[c]:
                score += 1
        keys[c - 1] = -float(score)
        ids[c - 1] = c
    return _removal_from_static_order(S, lnn, gamma, sq, sz, po, to, n, rng, bits, keys, ids)


@njit(cache=True)
def removal_info(S, lnn, gamma, sq, sz, po, to, freq, n, rng, bits):
    if lnn <= 0:
        return 0
    keys = np.empty(n, dtype=np.float64)
    ids = np.empty(n, dtype=np.int64)
    for c in range(1, n + 1):
        keys[c - 1] = -float(freq[c])
        ids[c - 1] = c
    return _removal_from_static_order(S, lnn, gamma, sq, sz, po, to, n, rng, bits, keys, ids)


@njit(cache=True)
def removal_worst(S, lnn, gamma, sq, sz, po, to, n, rng, coords, D, useD, metric, bits):
    cnt = 0
    if lnn <= 0:
        return 0
    cand = np.empty(n, dtype=np.int32)
    keys = np.empty(n, dtype=np.float64)
    ids = np.empty(n, dtype=np.int64)
    while cnt < lnn:
        k = 0
        for c in range(1, n + 1):
            if to[c] < 0:
                continue
            pn = _pred(c, sq, po, to)
            sn = _succ(c, sq, sz, po, to)
            saving = (_d(pn, c, coords, D, useD, metric) + _d(c, sn, coords, D, useD, metric)
                      - _d(pn, sn, coords, D, useD, metric))
            cand[k] = c
            keys[k] = -saving
            ids[k] = c
            k += 1
        if k == 0:
            break
        order = _order_with_ties(keys, ids, k)
        idx = _biased_index(k, gamma, rng)
        chosen = -1
        for off in range(k):
            j = idx + off
            if j >= k:
                j -= k
            c = cand[order[j]]
            if sz[to[c]] > 1:
                chosen = c
                break
        if chosen < 0:
            break
        _remove_tracked(chosen, sq, sz, po, to, bits)
        S[cnt] = chosen
        cnt += 1
    return cnt


# ---------------------------------------------------------------------------
# Recreate operators
# ---------------------------------------------------------------------------

@njit(cache=True, inline="always")
def _add_pos(candT, candI, nc, t, i):
    for q in range(nc):
        if candT[q] == t and candI[q] == i:
            return nc
    candT[nc] = t
    candI[nc] = i
    return nc + 1


@njit(cache=True)
def _gather_positions(c, candT, candI, sq, sz, po, to, nbr, m):
    nc = 0
    for j in range(nbr.shape[1]):
        w = nbr[c, j]
        if w == 0:
            for t in range(m):
                nc = _add_pos(candT, candI, nc, t, 0)
                nc = _add_pos(candT, candI, nc, t, sz[t])
        elif w > 0 and to[w] >= 0:
            t = to[w]
            p = po[w]
            nc = _add_pos(candT, candI, nc, t, p)
            nc = _add_pos(candT, candI, nc, t, p + 1)
    if nc == 0:
        for t in range(m):
            for i in range(sz[t] + 1):
                candT[nc] = t
                candI[nc] = i
                nc += 1
    return nc


@njit(cache=True)
def insertion_greedy_blink(S, cnt, beta, sq, sz, po, to, cu, tl, nbr, n, m, rng,
                           coords, D, useD, metric, bits, stats):
    cap = n + 2 * m + 2 * nbr.shape[1] + 8
    candT = np.empty(cap, dtype=np.int32)
    candI = np.empty(cap, dtype=np.int32)
    for si in range(cnt):
        c = S[si]
        nc = _gather_positions(c, candT, candI, sq, sz, po, to, nbr, m)
        bestD = 1e300
        bestT = -1
        bestI = -1
        fbD = 1e300
        fbT = -1
        fbI = -1
        for q in range(nc):
            t = candT[q]
            i = candI[q]
            prev = sq[t, i - 1] if i > 0 else 0
            nxt = sq[t, i] if i < sz[t] else 0
            delta = (_d(prev, c, coords, D, useD, metric) + _d(c, nxt, coords, D, useD, metric)
                     - _d(prev, nxt, coords, D, useD, metric))
            if delta < fbD or (delta == fbD and (t < fbT or (t == fbT and i < fbI))):
                fbD = delta
                fbT = t
                fbI = i
            stats[0] += 1
            if beta > 0.0 and rng_uniform(rng) < beta:
                stats[1] += 1
                continue
            if delta < bestD or (delta == bestD and (t < bestT or (t == bestT and i < bestI))):
                bestD = delta
                bestT = t
                bestI = i
        if bestT < 0:
            bestD = fbD
            bestT = fbT
            bestI = fbI
        _insert_city(c, bestT, bestI, sq, sz, po, to)
        tl[bestT] += bestD
        bits[c] = 0
        if bestI > 0:
            pn = sq[bestT, bestI - 1]
            if pn > 0:
                bits[pn] = 0
        if bestI + 1 < sz[bestT]:
            nn = sq[bestT, bestI + 1]
            if nn > 0:
                bits[nn] = 0


@njit(cache=True)
def insertion_regret(S, cnt, kreg, sq, sz, po, to, cu, tl, nbr, n, m,
                     coords, D, useD, metric, bits):
    cap = n + 2 * m + 2 * nbr.shape[1] + 8
    candT = np.empty(cap, dtype=np.int32)
    candI = np.empty(cap, dtype=np.int32)
    rem = np.empty(cnt, dtype=np.int32)
    for i in range(cnt):
        rem[i] = S[i]
    nrem = cnt
    dk = np.empty(kreg, dtype=np.float64)
    while nrem > 0:
        bc = -1
        bReg = -1e300
        bD1 = 1e300
        bT = -1
        bI = -1
        for ri in range(nrem):
            c = rem[ri]
            nc = _gather_positions(c, candT, candI, sq, sz, po, to, nbr, m)
            for kq in range(kreg):
                dk[kq] = 1e300
            cD1 = 1e300
            cT = -1
            cI = -1
            for q in range(nc):
                t = candT[q]
                i = candI[q]
                prev = sq[t, i - 1] if i > 0 else 0
                nxt = sq[t, i] if i < sz[t] else 0
                delta = (_d(prev, c, coords, D, useD, metric) + _d(c, nxt, coords, D, useD, metric)
                         - _d(prev, nxt, coords, D, useD, metric))
                if delta < dk[kreg - 1]:
                    posk = kreg - 1
                    while posk > 0 and dk[posk - 1] > delta:
                        dk[posk] = dk[posk - 1]
                        posk -= 1
                    dk[posk] = delta
                if delta < cD1 or (delta == cD1 and (t < cT or (t == cT and i < cI))):
                    cD1 = delta
                    cT = t
                    cI = i
            avail = nc if nc < kreg else kreg
            worst = dk[avail - 1]
            reg = 0.0
            for qq in range(1, kreg):
                dq = dk[qq] if qq < avail else worst
                reg += dq - dk[0]
            if (reg > bReg or (reg == bReg and (cD1 > bD1 or (cD1 == bD1 and (bc < 0 or c < bc))))):
                bc = c
                bReg = reg
                bD1 = cD1
                bT = cT
                bI = cI
        _insert_city(bc, bT, bI, sq, sz, po, to)
        tl[bT] += bD1
        bits[bc] = 0
        if bI > 0:
            pn = sq[bT, bI - 1]
            if pn > 0:
                bits[pn] = 0
        if bI + 1 < sz[bT]:
            nn = sq[bT, bI + 1]
            if nn > 0:
                bits[nn] = 0
        found = 0
        for ri in range(nrem):
            if rem[ri] == bc:
                found = ri
                break
        for ri in range(found, nrem - 1):
            rem[ri] = rem[ri + 1]
        nrem -= 1


@njit(cache=True)
def perturb_kernel(dop, rop, S, sq, sz, po, to, cu, tl, nbr, n, m, rng,
                   coords, D, useD, metric, bits, freq,
                   l, g_shaw, g_cross, g_worst, g_info, beta, kreg, stats):
    lnn = int(l * n + 1e-9)
    if dop == 0:
        cnt = removal_shaw(S, lnn, g_shaw, sq, sz, po, to, n, rng, coords, D, useD, metric, bits)
    elif dop == 1:
        cnt = removal_random(S, lnn, sq, sz, po, to, n, rng, bits)
    elif dop == 2:
        cnt = removal_cross(S, lnn, g_cross, sq, sz, po, to, nbr, n, rng, bits)
    elif dop == 3:
        cnt = removal_worst(S, lnn, g_worst, sq, sz, po, to, n, rng, coords, D, useD, metric, bits)
    else:
        cnt = removal_info(S, lnn, g_info, sq, sz, po, to, freq, n, rng, bits)
    if cnt > 0:
        if rop == 0:
            insertion_greedy_blink(S, cnt, 0.0, sq, sz, po, to, cu, tl, nbr, n, m, rng,
                                   coords, D, useD, metric, bits, stats)
        elif rop == 1:
            insertion_greedy_blink(S, cnt, beta, sq, sz, po, to, cu, tl, nbr, n, m, rng,
                                   coords, D, useD, metric, bits, stats)
        else:
            insertion_regret(S, cnt, kreg, sq, sz, po, to, cu, tl, nbr, n, m,
                             coords, D, useD, metric, bits)
    rebuild_all(sq, sz, po, to, cu, tl, coords, D, useD, metric)
    return cnt


# ---------------------------------------------------------------------------
# Bandit
# ---------------------------------------------------------------------------

@njit(cache=True)
def bandit_select(w, eps, invert, rng):
    r = rng_uniform(rng)
    greedy = r < eps
    if invert:
        greedy = not greedy
    k = w.shape[0]
    if greedy:
        bi = 0
        for i in range(1, k):
            if w[i] > w[bi]:
                bi = i
        return bi
    return rng_below(rng, k)


@njit(cache=True)
def bandit_record(p, th, op, outcome, d1, d2, d3):
    th[op] += 1
    if outcome == OUT_NEW_BEST:
        p[op] += d1
    elif outcome == OUT_IMPROVED_LOCAL:
        p[op] += d2
    elif outcome == OUT_ACCEPTED:
        p[op] += d3


@njit(cache=True)
def bandit_end_segment(w, p, th, lam):
    k = w.shape[0]
    for i in range(k):
        if th[i] > 0:
            w[i] = (1.0 - lam) * w[i] + lam * (p[i] / th[i])
    s = 0.0
    for i in range(k):
        s += w[i]
    if s <= 0.0:
        for i in range(k):
            w[i] = 1.0 / k
    else:
        for i in range(k):
            w[i] /= s
    for i in range(k):
        p[i] = 0.0
        th[i] = 0


# ---------------------------------------------------------------------------
# Driver chunk: runs up to chunk_n iterations of the main loop. State persists
# in the passed arrays so the Python wrapper can stop on wall-clock budgets,
# stream the trace, and service external single-tour improvers.
# ---------------------------------------------------------------------------

@njit(cache=True)
def sti_builtin_kernel(sq, sz, po, to, cu, tl, nbr, bits, freq, coords, D, useD, metric, n, m, first_improv):
    for t in range(m):
        improve_tour_kernel(t, sq, sz, po, to, cu, tl, nbr, coords, D, useD, metric)
    for c in range(n + 1):
        bits[c] = 0
    local_search_fused(sq, sz, po, to, cu, tl, nbr, bits, freq, first_improv, coords, D, useD, metric, n)


@njit(cache=True)
def run_chunk(chunk_n,
              coords, D, useD, metric, nbr, n, m,
              sqA, szA, poA, toA, cuA, tlA,
              sqP, szP, poP, toP, cuP, tlP,
              sqS, szS, poS, toS, cuS, tlS,
              bits, freq, S,
              wD, pD, thD, wR, pR, thR,
              cfg_f, cfg_i, st_f, st_i, rng,
              tr_fphi, tr_floc, tr_fbest, tr_D, tr_R, tr_out, tr_T, blink_stats):
    l = cfg_f[0]
    eps = cfg_f[1]
    lam = cfg_f[2]
    g_shaw = cfg_f[3]
    g_cross = cfg_f[4]
    g_worst = cfg_f[5]
    g_info = cfg_f[6]
    beta = cfg_f[7]
    d1 = cfg_f[11]
    d2 = cfg_f[12]
    d3 = cfg_f[13]
    target = cfg_f[14]
    cool_c = cfg_f[15]
    I_max = cfg_i[0]
    I_thresh = cfg_i[1]
    seg_len = cfg_i[2]
    kreg = cfg_i[3]
    invert = cfg_i[4] != 0
    first_improv = cfg_i[5] != 0
    sti_builtin = cfg_i[6] != 0
    validate_every = cfg_i[7]

    it = 0
    while it < chunk_n:
        if st_i[4] == 0:
            local_search_fused(sqA, szA, poA, toA, cuA, tlA, nbr, bits, freq, first_improv,
                                coords, D, useD, metric, n)
            fphi = makespan(tlA)
            fstar = makespan(tlS)
            if fphi < fstar and st_i[0] >= I_thresh:
                if sti_builtin:
                    sti_builtin_kernel(sqA, szA, poA, toA, cuA, tlA, nbr, bits, freq,
                                       coords, D, useD, metric, n, m, first_improv)
                else:
                    st_i[4] = 1
                    return CHUNK_EXTERNAL_STI, it
        else:
            # resume after an external per-tour improvement: final search pass
            local_search_fused(sqA, szA, poA, toA, cuA, tlA, nbr, bits, freq, first_improv,
                                coords, D, useD, metric, n)
            st_i[4] = 0

        # probabilistic acceptance
        fphi = makespan(tlA)
        floc = makespan(tlP)
        fstar = makespan(tlS)
        T = st_f[0]
        if fphi < fstar:
            copy_sol(sqS, szS, poS, toS, cuS, tlS, sqA, szA, poA, toA, cuA, tlA)
            copy_sol(sqP, szP, poP, toP, cuP, tlP, sqA, szA, poA, toA, cuA, tlA)
            outcome = OUT_NEW_BEST
        elif fphi < floc:
            copy_sol(sqP, szP, poP, toP, cuP, tlP, sqA, szA, poA, toA, cuA, tlA)
            outcome = OUT_IMPROVED_LOCAL
        else:
            df = fphi - floc
            if math.exp(-df / T) > rng_uniform(rng):
                copy_sol(sqP, szP, poP, toP, cuP, tlP, sqA, szA, poA, toA, cuA, tlA)
                outcome = OUT_ACCEPTED
            else:
                copy_sol(sqA, szA, poA, toA, cuA, tlA, sqP, szP, poP, toP, cuP, tlP)
                for c in range(1, n + 1):
                    bits[c] = 1
                outcome = OUT_REJECTED

        # credit the operator pair that produced this solution
        if st_i[2] >= 0:
            bandit_record(pD, thD, st_i[2], outcome, d1, d2, d3)
            bandit_record(pR, thR, st_i[3], outcome, d1, d2, d3)

        st_f[0] = T * cool_c

        target_hit = (target == target) and makespan(tlS) <= target + 1e-9

        # pick operators and perturb for the next round
        Dop = bandit_select(wD, eps, invert, rng)
        Rop = bandit_select(wR, eps, invert, rng)
        perturb_kernel(Dop, Rop, S, sqA, szA, poA, toA, cuA, tlA, nbr, n, m, rng,
                       coords, D, useD, metric, bits, freq,
                       l, g_shaw, g_cross, g_worst, g_info, beta, kreg, blink_stats)
        st_i[2] = Dop
        st_i[3] = Rop

        tr_fphi[it] = fphi
        tr_floc[it] = makespan(tlP)
        tr_fbest[it] = makespan(tlS)
        tr_D[it] = Dop
        tr_R[it] = Rop
        tr_out[it] = outcome
        tr_T[it] = T

        st_i[1] += 1
        if seg_len > 0 and st_i[1] % seg_len == 0:
            bandit_end_segment(wD, pD, thD, lam)
            bandit_end_segment(wR, pR, thR, lam)

        if validate_every > 0 and st_i[1] % validate_every == 0:
            if not quick_check(sqA, szA, poA, toA, n, m):
                return CHUNK_INVALID, it + 1

        # restart when the round is exhausted
        if st_i[0] > I_max:
            greedy_init_kernel(sqA, szA, poA, toA, cuA, tlA, nbr, coords, D, useD, metric, n, m, rng)
            copy_sol(sqP, szP, poP, toP, cuP, tlP, sqA, szA, poA, toA, cuA, tlA)
            st_i[0] = 0
            st_f[0] = st_f[1]
            for c in range(n + 1):
                bits[c] = 0
            for c in range(n + 1):
                freq[c] = freq[c] // 2
        else:
            st_i[0] += 1

        it += 1
        if target_hit:
            return CHUNK_TARGET, it
    return CHUNK_DONE, it


# ---------------------------------------------------------------------------
# Fused sweep: evaluates all ten kinds per (u, v) with shared context. Selects
# exactly the move the per-kind scans would pick (lowest improving kind; within
# a kind the best by (d_metric, d_total, u, v), or the first hit in first-
# improvement mode). Scans u with bits[u] == want_bit only.
# ---------------------------------------------------------------------------

@njit(cache=True)
def _scan_sweep(sq, sz, po, to, cu, tl, nbr, bits, want_bit, first_mode,
                coords, D, useD, metric, n):
    f_found = np.zeros(10, dtype=np.uint8)
    f_dm = np.zeros(10, dtype=np.float64)
    f_dt = np.zeros(10, dtype=np.float64)
    f_u = np.full(10, -1, dtype=np.int64)
    f_v = np.full(10, -1, dtype=np.int64)
    okv = np.zeros(10, dtype=np.uint8)
    dmv = np.zeros(10, dtype=np.float64)
    dtv = np.zeros(10, dtype=np.float64)

    for u in range(1, n + 1):
        if bits[u] != want_bit:
            continue
        t1 = to[u]
        p_u = po[u]
        s1 = sz[t1]
        tl1 = tl[t1]
        pu = sq[t1, p_u - 1] if p_u > 0 else 0
        x = sq[t1, p_u + 1] if p_u + 1 < s1 else 0
        d_pu_u = _d(pu, u, coords, D, useD, metric)
        d_u_x = _d(u, x, coords, D, useD, metric)
        d_pu_x = _d(pu, x, coords, D, useD, metric)
        if x != 0:
            w = sq[t1, p_u + 2] if p_u + 2 < s1 else 0
            d_x_w = _d(x, w, coords, D, useD, metric)
            d_pu_w = _d(pu, w, coords, D, useD, metric)
        else:
            w = 0
            d_x_w = 0.0
            d_pu_w = 0.0
        prefA = cu[t1, p_u]
        tailA = tl1 - prefA - d_u_x

        for jn in range(nbr.shape[1]):
            v = nbr[u, jn]
            if v <= 0:
                continue
            t2 = to[v]
            p_v = po[v]
            s2 = sz[t2]
            tl2 = tl[t2]
            same = t1 == t2
            pv = sq[t2, p_v - 1] if p_v > 0 else 0
            y = sq[t2, p_v + 1] if p_v + 1 < s2 else 0
            d_pv_v = _d(pv, v, coords, D, useD, metric)
            d_v_y = _d(v, y, coords, D, useD, metric)
            d_u_v = _d(u, v, coords, D, useD, metric)
            d_x_y = _d(x, y, coords, D, useD, metric)
            before = tl1 if tl1 > tl2 else tl2
            for k in range(10):
                okv[k] = 0

            # kind 0: relocate u after v
            if same or s1 > 1:
                rem = d_pu_x - d_pu_u - d_u_x
                if same and v == pu:
                    ins = d_u_v + d_u_x - d_pu_x
                else:
                    ins = d_u_v + _d(u, y, coords, D, useD, metric) - d_v_y
                okv[0] = 1
                if same:
                    dmv[0] = rem + ins
                    dtv[0] = rem + ins
                else:
                    n1 = tl1 + rem
                    n2 = tl2 + ins
                    after = n1 if n1 > n2 else n2
                    dmv[0] = after - before
                    dtv[0] = rem + ins

            if x != 0 and v != x:
                # kinds 1/2: pair relocation
                if same or s1 > 2:
                    rem2 = d_pu_w - d_pu_u - d_u_x - d_x_w
                    if same and v == pu:
                        ins1 = d_u_v + d_u_x + d_x_w - d_pu_w
                    else:
                        ins1 = d_u_v + d_u_x + d_x_y - d_v_y
                    if same and pv == x:
                        ins2 = d_pu_x + d_u_x + d_u_v - _d(pu, v, coords, D, useD, metric)
                    else:
                        ins2 = (_d(pv, x, coords, D, useD, metric) + d_u_x + d_u_v - d_pv_v)
                    okv[1] = 1
                    okv[2] = 1
                    if same:
                        dmv[1] = rem2 + ins1
                        dtv[1] = rem2 + ins1
                        dmv[2] = rem2 + ins2
                        dtv[2] = rem2 + ins2
                    else:
                        n1 = tl1 + rem2
                        n2 = tl2 + ins1
                        after = n1 if n1 > n2 else n2
                        dmv[1] = after - before
                        dtv[1] = rem2 + ins1
                        n2 = tl2 + ins2
                        after = n1 if n1 > n2 else n2
                        dmv[2] = after - before
                        dtv[2] = rem2 + ins2

                # kind 3: swap x and v
                if same and w == v:
                    dl = -d_u_x - d_v_y + d_u_v + d_x_y
                    okv[3] = 1
                    dmv[3] = dl
                    dtv[3] = dl
                else:
                    dA = -d_u_x - d_x_w + d_u_v + _d(v, w, coords, D, useD, metric)
                    dB = (-d_pv_v - d_v_y + _d(pv, x, coords, D, useD, metric) + d_x_y)
                    okv[3] = 1
                    if same:
                        dmv[3] = dA + dB
                        dtv[3] = dA + dB
                    else:
                        n1 = tl1 + dA
                        n2 = tl2 + dB
                        after = n1 if n1 > n2 else n2
                        dmv[3] = after - before
                        dtv[3] = dA + dB

                # kind 4: swap (u,x) with v
                if same and v == w:
                    dl = (-d_pu_u - _d(x, v, coords, D, useD, metric) - d_v_y
                          + _d(pu, v, coords, D, useD, metric) + d_u_v + d_x_y)
                    okv[4] = 1
                    dmv[4] = dl
                    dtv[4] = dl
                elif same and v == pu:
                    dl = (-d_pv_v - d_u_v - d_x_w + _d(pv, u, coords, D, useD, metric)
                          + _d(x, v, coords, D, useD, metric) + _d(v, w, coords, D, useD, metric))
                    okv[4] = 1
                    dmv[4] = dl
                    dtv[4] = dl
                else:
                    dA = (-d_pu_u - d_u_x - d_x_w + _d(pu, v, coords, D, useD, metric)
                          + _d(v, w, coords, D, useD, metric))
                    dB = (-d_pv_v - d_v_y + _d(pv, u, coords, D, useD, metric) + d_u_x + d_x_y)
                    okv[4] = 1
                    if same:
                        dmv[4] = dA + dB
                        dtv[4] = dA + dB
                    else:
                        n1 = tl1 + dA
                        n2 = tl2 + dB
                        after = n1 if n1 > n2 else n2
                        dmv[4] = after - before
                        dtv[4] = dA + dB

                # kinds 5/6: pair-pair swaps
                if y != 0 and y != u:
                    sy = sq[t2, p_v + 2] if p_v + 2 < s2 else 0
                    d_y_sy = _d(y, sy, coords, D, useD, metric)
                    if same and v == w:
                        base = (-d_pu_u - _d(x, v, coords, D, useD, metric) - d_y_sy
                                + _d(pu, v, coords, D, useD, metric))
                        dl5 = base + _d(y, u, coords, D, useD, metric) + _d(x, sy, coords, D, useD, metric)
                        dl6 = base + _d(y, x, coords, D, useD, metric) + _d(u, sy, coords, D, useD, metric)
                        okv[5] = 1
                        dmv[5] = dl5
                        dtv[5] = dl5
                        okv[6] = 1
                        dmv[6] = dl6
                        dtv[6] = dl6
                    elif same and sy == u:
                        base = -d_pv_v - _d(y, u, coords, D, useD, metric) - d_x_w
                        dl5 = (base + _d(pv, u, coords, D, useD, metric)
                               + _d(x, v, coords, D, useD, metric) + _d(y, w, coords, D, useD, metric))
                        dl6 = (base + _d(pv, x, coords, D, useD, metric) + d_u_v
                               + _d(y, w, coords, D, useD, metric))
                        okv[5] = 1
                        dmv[5] = dl5
                        dtv[5] = dl5
                        okv[6] = 1
                        dmv[6] = dl6
                        dtv[6] = dl6
                    else:
                        dA = (-d_pu_u - d_u_x - d_x_w + _d(pu, v, coords, D, useD, metric)
                              + d_v_y + _d(y, w, coords, D, useD, metric))
                        dB5 = (-d_pv_v - d_v_y - d_y_sy + _d(pv, u, coords, D, useD, metric)
                               + d_u_x + _d(x, sy, coords, D, useD, metric))
                        dB6 = (-d_pv_v - d_v_y - d_y_sy + _d(pv, x, coords, D, useD, metric)
                               + d_u_x + _d(u, sy, coords, D, useD, metric))
                        okv[5] = 1
                        okv[6] = 1
                        if same:
                            dmv[5] = dA + dB5
                            dtv[5] = dA + dB5
                            dmv[6] = dA + dB6
                            dtv[6] = dA + dB6
                        else:
                            n1 = tl1 + dA
                            n2 = tl2 + dB5
                            after = n1 if n1 > n2 else n2
                            dmv[5] = after - before
                            dtv[5] = dA + dB5
                            n2 = tl2 + dB6
                            after = n1 if n1 > n2 else n2
                            dmv[6] = after - before
                            dtv[6] = dA + dB6

            # kind 7: intra 2-opt
            if same:
                adjacent = (p_u < p_v and x == v) or (p_v < p_u and y == u)
                if not adjacent:
                    dl = d_u_v + d_x_y - d_u_x - d_v_y
                    okv[7] = 1
                    dmv[7] = dl
                    dtv[7] = dl
            elif x != 0 or y != 0:
                # kinds 8/9: inter-tour reconnections
                prefB = cu[t2, p_v]
                tailB = tl2 - prefB - d_v_y
                n1 = prefA + _d(u, y, coords, D, useD, metric) + tailB
                n2 = prefB + _d(v, x, coords, D, useD, metric) + tailA
                after = n1 if n1 > n2 else n2
                okv[8] = 1
                dmv[8] = after - before
                dtv[8] = (n1 + n2) - (tl1 + tl2)
                n1 = prefA + d_u_v + prefB
                n2 = tailA + d_x_y + tailB
                after = n1 if n1 > n2 else n2
                okv[9] = 1
                dmv[9] = after - before
                dtv[9] = (n1 + n2) - (tl1 + tl2)

            for k in range(10):
                if okv[k] == 0:
                    continue
                dm = dmv[k]
                if dm >= -IMPROVE_EPS:
                    continue
                if first_mode:
                    if f_found[k] == 0:
                        f_found[k] = 1
                        f_dm[k] = dm
                        f_dt[k] = dtv[k]
                        f_u[k] = u
                        f_v[k] = v
                else:
                    dt = dtv[k]
                    if f_found[k] == 0:
                        take = True
                    elif dm < f_dm[k]:
                        take = True
                    elif dm == f_dm[k] and dt < f_dt[k]:
                        take = True
                    elif (dm == f_dm[k] and dt == f_dt[k]
                          and (u < f_u[k] or (u == f_u[k] and v < f_v[k]))):
                        take = True
                    else:
                        take = False
                    if take:
                        f_found[k] = 1
                        f_dm[k] = dm
                        f_dt[k] = dt
                        f_u[k] = u
                        f_v[k] = v

    for k in range(10):
        if f_found[k] != 0:
            return k, f_u[k], f_v[k]
    return -1, -1, -1


@njit(cache=True)
def local_search_fused(sq, sz, po, to, cu, tl, nbr, bits, freq, first_improv,
                       coords, D, useD, metric, n):
    applied = 0
    while True:
        all_clear = False
        while True:
            all_clear = True
            for c in range(1, n + 1):
                if bits[c] != 0:
                    all_clear = False
                    break
            k, u, v = _scan_sweep(sq, sz, po, to, cu, tl, nbr, bits, 0, first_improv,
                                  coords, D, useD, metric, n)
            if k < 0:
                break
            apply_move(k, u, v, sq, sz, po, to, cu, tl, coords, D, useD, metric, bits, freq)
            applied += 1
        if all_clear:
            for c in range(1, n + 1):
                bits[c] = 1
            return applied
        # clear-bit cities were just proven unfruitful; check the set-bit rest
        k, u, v = _scan_sweep(sq, sz, po, to, cu, tl, nbr, bits, 1, first_improv,
                              coords, D, useD, metric, n)
        if k < 0:
            for c in range(1, n + 1):
                bits[c] = 1
            return applied
        apply_move(k, u, v, sq, sz, po, to, cu, tl, coords, D, useD, metric, bits, freq)
        applied += 1
