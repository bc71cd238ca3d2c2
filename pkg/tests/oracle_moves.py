"""Independent list-based reference for the ten neighborhood operators.

Used as an oracle against the jitted implementation: builds every candidate
neighbor solution by plain list surgery and full-length recomputation, with no
code in common with the package kernels.
"""
from __future__ import annotations


def tour_length(inst, tour):
    ln, prev = 0.0, 0
    for c in tour:
        ln += inst.distance(prev, c)
        prev = c
    return ln + inst.distance(prev, 0)


def makespan_of(inst, tours):
    return max(tour_length(inst, t) for t in tours)


def locate(tours):
    loc = {}
    for t, tr in enumerate(tours):
        for p, c in enumerate(tr):
            loc[c] = (t, p)
    return loc


def _succ(tours, loc, c):
    t, p = loc[c]
    return tours[t][p + 1] if p + 1 < len(tours[t]) else 0


def candidate_neighbors(inst, nbr_lists, tours):
    """Yield (kind, u, v, new_tours) for every applicable move with v in u's
    alpha list. new_tours is a fresh list-of-lists."""
    loc = locate(tours)
    n = sum(len(t) for t in tours)
    for u in range(1, n + 1):
        t1, p1 = loc[u]
        T1 = tours[t1]
        for v0 in nbr_lists[u]:
            v = int(v0)
            if v <= 0 or v == u:
                continue
            t2, p2 = loc[v]
            T2 = tours[t2]
            same = t1 == t2
            x = _succ(tours, loc, u)
            y = _succ(tours, loc, v)

            # kind 0: relocate u after v
            if same or len(T1) > 1:
                work = [list(t) for t in tours]
                work[t1].remove(u)
                at = work[t2].index(v) + 1
                work[t2].insert(at, u)
                yield 0, u, v, work

            if x != 0 and v != x:
                # kind 1: relocate (u, x) after v in order
                if same or len(T1) > 2:
                    work = [list(t) for t in tours]
                    work[t1].remove(u)
                    work[t1].remove(x)
                    at = work[t2].index(v) + 1
                    work[t2][at:at] = [u, x]
                    yield 1, u, v, work
                    # kind 2: relocate (x, u) before v
                    work = [list(t) for t in tours]
                    work[t1].remove(u)
                    work[t1].remove(x)
                    at = work[t2].index(v)
                    work[t2][at:at] = [x, u]
                    yield 2, u, v, work
                # kind 3: interchange x and v
                work = [list(t) for t in tours]
                tx, px = loc[x]
                work[tx][px] = v
                work[t2][p2] = x
                yield 3, u, v, work
                # kind 4: interchange (u, x) and v
                work = [list(t) for t in tours]
                _replace_block(work, t1, p1, 2, [v], t2, p2, 1, [u, x])
                yield 4, u, v, work
                if y != 0 and y != u:
                    # kind 5: interchange (u, x) and (v, y)
                    work = [list(t) for t in tours]
                    _replace_block(work, t1, p1, 2, [v, y], t2, p2, 2, [u, x])
                    yield 5, u, v, work
                    # kind 6: interchange (x, u) and (v, y)
                    work = [list(t) for t in tours]
                    _replace_block(work, t1, p1, 2, [v, y], t2, p2, 2, [x, u])
                    yield 6, u, v, work

            if same:
                # kind 7: intra 2-opt, reverse the span between u and v
                pa, pb = (p1, p2) if p1 < p2 else (p2, p1)
                if pa + 1 != pb:
                    work = [list(t) for t in tours]
                    seg = work[t1][pa + 1: pb + 1]
                    work[t1][pa + 1: pb + 1] = seg[::-1]
                    yield 7, u, v, work
            elif x != 0 or y != 0:
                # kind 8: tail swap
                work = [list(t) for t in tours]
                work[t1] = T1[: p1 + 1] + T2[p2 + 1:]
                work[t2] = T2[: p2 + 1] + T1[p1 + 1:]
                yield 8, u, v, work
                # kind 9: prefix + reversed prefix / reversed tail + tail
                work = [list(t) for t in tours]
                work[t1] = T1[: p1 + 1] + T2[: p2 + 1][::-1]
                work[t2] = T1[p1 + 1:][::-1] + T2[p2 + 1:]
                yield 9, u, v, work


def _replace_block(work, t1, p1, len1, block_at_1, t2, p2, len2, block_at_2):
    """Replace the slice of length len1 at (t1, p1) with block_at_1 and the
    slice of length len2 at (t2, p2) with block_at_2, simultaneously."""
    if t1 == t2:
        row = work[t1]
        out = []
        p = 0
        while p < len(row):
            if p == p1:
                out.extend(block_at_1)
                p += len1
            elif p == p2:
                out.extend(block_at_2)
                p += len2
            else:
                out.append(row[p])
                p += 1
        work[t1] = out
    else:
        work[t1] = work[t1][:p1] + block_at_1 + work[t1][p1 + len1:]
        work[t2] = work[t2][:p2] + block_at_2 + work[t2][p2 + len2:]


def is_feasible(tours, n):
    seen = set()
    for t in tours:
        if not t:
            return False
        for c in t:
            if c in seen:
                return False
            seen.add(c)
    return seen == set(range(1, n + 1))
