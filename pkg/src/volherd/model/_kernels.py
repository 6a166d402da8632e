"""Compiled inner loops for the cluster dynamics.

Partition layout (all arrays have length M):

* ``cid[k]``      id of the cluster holding agent k. A cluster id is always
                  one of its own members, so shattering can reuse ``cid = k``.
* ``nxt[k]``      next member in the cluster's singly linked member list.
* ``head/tail``   first/last member, indexed by cluster id.
* ``size``        member count, indexed by cluster id.
* ``csign``       trade sign, indexed by cluster id.
* ``active/pos``  dense list of live cluster ids and the inverse index, for
                  O(1) uniform choice among clusters.

Scalars live in small arrays so the kernels can update them in place:
``ctr = [t, n_clusters]`` and ``vl = [V_last]``.

Merging relabels the smaller cluster and splices its list onto the larger one
(O(min size), O(log M) amortized relabels per agent between shatters); a
shatter is O(size).
"""

import numpy as np
from numba import njit

RATIONAL = 0
EXPONENTIAL = 1
UNIFORM = 0
SIZE_BIASED = 1


@njit(cache=True)
def probability(kind, p1, p2, ratio):
    if kind == RATIONAL:
        return 1.0 / (1.0 + p1 * ratio)
    return (1.0 - p1) - p1 * np.expm1(-p2 * ratio)


@njit(cache=True)
def price_return(Q, N, A):
    if Q == 0.0:
        return 0.0
    sq = np.sqrt(abs(Q))
    r = sq / (sq + A) * np.sqrt(N)
    return r if Q > 0 else -r


@njit(cache=True)
def _deactivate(c, active, pos, ctr):
    p = pos[c]
    last = active[ctr[1] - 1]
    active[p] = last
    pos[last] = p
    ctr[1] -= 1


@njit(cache=True)
def _activate(c, active, pos, ctr):
    active[ctr[1]] = c
    pos[c] = ctr[1]
    ctr[1] += 1


@njit(cache=True)
def merge(ca, cb, cid, nxt, head, tail, size, active, pos, ctr):
    """Merge two clusters; the larger keeps its id and sign, ``ca`` wins ties.

    Returns the surviving id, or -1 when ``ca == cb``.
    """
    if ca == cb:
        return -1
    if size[cb] > size[ca]:
        big = cb
        small = ca
    else:
        big = ca
        small = cb
    m = head[small]
    while m != -1:
        cid[m] = big
        m = nxt[m]
    nxt[tail[big]] = head[small]
    tail[big] = tail[small]
    size[big] += size[small]
    _deactivate(small, active, pos, ctr)
    return big


@njit(cache=True)
def shatter(gen, c, cid, nxt, head, tail, size, csign, active, pos, ctr, draw_signs):
    """Break cluster ``c`` into singletons, optionally drawing fresh signs."""
    _deactivate(c, active, pos, ctr)
    m = head[c]
    while m != -1:
        following = nxt[m]
        cid[m] = m
        head[m] = m
        tail[m] = m
        size[m] = 1
        nxt[m] = -1
        if draw_signs:
            csign[m] = 1 if gen.random() < 0.5 else -1
        _activate(m, active, pos, ctr)
        m = following


@njit(cache=True)
def trade(gen, ci, cj, kind, p1, p2, A, cid, nxt, head, tail, size, csign,
          active, pos, vlast, ctr, vl):
    """Both clusters trade (one if ``ci == cj``) and shatter.

    Returns (V, N, Q, r).
    """
    V_prev = vl[0]
    V = 0.0
    Q = 0.0
    N = 0
    n_clusters = 1 if ci == cj else 2
    for q in range(n_clusters):
        c = ci if q == 0 else cj
        s = csign[c]
        m = head[c]
        while m != -1:
            v = 1.0 / probability(kind, p1, p2, V_prev / vlast[m])
            V += v
            Q += s * v
            N += 1
            vlast[m] = v
            m = nxt[m]
    shatter(gen, ci, cid, nxt, head, tail, size, csign, active, pos, ctr, True)
    if n_clusters == 2:
        shatter(gen, cj, cid, nxt, head, tail, size, csign, active, pos, ctr, True)
    vl[0] = V
    return V, N, Q, price_return(Q, N, A)


@njit(cache=True)
def pick_partner(gen, ci, mode, cid, active, ctr):
    """Choose a cluster other than ``ci``; returns ``ci`` if it is the only one."""
    if ctr[1] == 1:
        return ci
    M = cid.shape[0]
    while True:
        if mode == UNIFORM:
            cj = active[int(gen.random() * ctr[1])]
        else:
            cj = cid[int(gen.random() * M)]
        if cj != ci:
            return cj


@njit(cache=True)
def step(gen, kind, p1, p2, A, mode, cid, nxt, head, tail, size, csign,
         active, pos, vlast, ctr, vl):
    """One step of the volume-interacting dynamics.

    Returns (traded, V, N, Q, r); volume fields are zero for merge steps.
    """
    M = cid.shape[0]
    i = int(gen.random() * M)
    ci = cid[i]
    a = probability(kind, p1, p2, vl[0] / vlast[i])
    ctr[0] += 1
    if gen.random() < a:
        cj = pick_partner(gen, ci, mode, cid, active, ctr)
        V, N, Q, r = trade(gen, ci, cj, kind, p1, p2, A, cid, nxt, head, tail,
                           size, csign, active, pos, vlast, ctr, vl)
        return True, V, N, Q, r
    j = int(gen.random() * M)
    merge(ci, cid[j], cid, nxt, head, tail, size, active, pos, ctr)
    return False, 0.0, 0, 0.0, 0.0


@njit(cache=True)
def run(gen, n_steps, kind, p1, p2, A, mode, cid, nxt, head, tail, size, csign,
        active, pos, vlast, ctr, vl, out_t, out_V, out_N, out_Q, out_r):
    """Advance ``n_steps`` steps, writing trade events; returns the event count."""
    k = 0
    for _ in range(n_steps):
        t = ctr[0]
        traded, V, N, Q, r = step(gen, kind, p1, p2, A, mode, cid, nxt, head,
                                  tail, size, csign, active, pos, vlast, ctr, vl)
        if traded:
            out_t[k] = t
            out_V[k] = V
            out_N[k] = N
            out_Q[k] = Q
            out_r[k] = r
            k += 1
    return k


@njit(cache=True)
def ez_step(gen, a, cid, nxt, head, tail, size, csign, active, pos, ctr):
    """Baseline herding step with constant activity ``a``.

    Returns the size of the cluster that traded, or 0 for a merge step.
    """
    M = cid.shape[0]
    i = int(gen.random() * M)
    ci = cid[i]
    ctr[0] += 1
    if gen.random() < a:
        s = size[ci]
        shatter(gen, ci, cid, nxt, head, tail, size, csign, active, pos, ctr, False)
        return s
    j = int(gen.random() * M)
    merge(ci, cid[j], cid, nxt, head, tail, size, active, pos, ctr)
    return 0


@njit(cache=True)
def ez_run(gen, n_steps, a, cid, nxt, head, tail, size, csign, active, pos, ctr,
           out_t, out_s):
    k = 0
    for _ in range(n_steps):
        t = ctr[0]
        s = ez_step(gen, a, cid, nxt, head, tail, size, csign, active, pos, ctr)
        if s > 0:
            out_t[k] = t
            out_s[k] = s
            k += 1
    return k


@njit(cache=True)
def check_partition(cid, nxt, head, tail, size, csign, active, pos, ctr):
    """Return the number of structural violations (0 for a sound partition)."""
    M = cid.shape[0]
    bad = 0
    seen = np.zeros(M, dtype=np.int64)
    total = 0
    for p in range(ctr[1]):
        c = active[p]
        if pos[c] != p or cid[c] != c:
            bad += 1
        count = 0
        m = head[c]
        last = -1
        while m != -1 and count <= M:
            if cid[m] != c:
                bad += 1
            seen[m] += 1
            count += 1
            last = m
            m = nxt[m]
        if count != size[c] or last != tail[c]:
            bad += 1
        if csign[c] != 1 and csign[c] != -1:
            bad += 1
        total += count
    if total != M:
        bad += 1
    for k in range(M):
        if seen[k] != 1:
            bad += 1
    return bad
