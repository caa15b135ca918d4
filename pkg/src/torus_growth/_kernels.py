"""Compiled inner loops for the witness-profile product construction.

A profile is the set of live witnesses for the word read so far, split into
"main" entries (witness aligned with the word), "post" entries (witness
already finished while the word continues in its head) and a single "pre"
slot (witness not yet started while the word is in its tail). Each entry is
a packed remainder index g plus a score s, the weight the witness saves
over the word so far, with the tie-break bonus folded in.
"""
import numpy as np
from numba import njit

NEG = -30000
INF_COST = 1000000


@njit(cache=True)
def cost(g, gref, k, strides, nlocs, diffidx, costd):
    """Lower bound on what it costs a witness to close the remainder gap g - gref."""
    tot = 0
    for j in range(k):
        a = (g // strides[j]) % nlocs[j]
        b = (gref // strides[j]) % nlocs[j]
        c = costd[j, diffidx[j, a, b]]
        if c >= INF_COST:
            return INF_COST
        tot += c
    return tot


@njit(cache=True)
def prune(cand_g, cand_s, ncand, zero_g, K, k, strides, nlocs, diffidx, costd, out_g, out_s):
    """Filter candidate entries into out. Returns -1 when the word is already beaten."""
    m = 0
    tg = np.empty(ncand, np.int64)
    ts = np.empty(ncand, np.int64)
    for e in range(ncand):
        g = cand_g[e]
        s = cand_s[e]
        if g == zero_g:
            if s >= 1:
                return -1
            continue
        c = cost(g, zero_g, k, strides, nlocs, diffidx, costd)
        if s - c >= 1:
            return -1
        if s <= -c:
            # never better than following the word itself
            continue
        if s > K or s < -K:
            continue
        tg[m] = g
        ts[m] = s
        m += 1
    order = np.argsort(-ts[:m], kind="mergesort")
    nk = 0
    for oi in range(m):
        e = order[oi]
        g2 = tg[e]
        s2 = ts[e]
        dominated = False
        for f in range(nk):
            if out_s[f] - cost(out_g[f], g2, k, strides, nlocs, diffidx, costd) >= s2:
                dominated = True
                break
        if not dominated:
            out_g[nk] = g2
            out_s[nk] = s2
            nk += 1
    o2 = np.argsort(out_g[:nk])
    rg = out_g[:nk][o2].copy()
    rs = out_s[:nk][o2].copy()
    out_g[:nk] = rg
    out_s[:nk] = rs
    return nk


@njit(cache=True)
def _sorted_pairs(g, s):
    o = np.argsort(g)
    return g[o].copy(), s[o].copy()


@njit(cache=True)
def substep(j, x, main_g, main_s, post_g, post_s, pre, C, K, nprime, tie,
            k, strides, nlocs, base, c0, zero_g, diffidx, costd, dense):
    """Advance every witness by the word's block-j coefficient x.

    Returns (dead, main_g, main_s, post_g, post_s, pre).
    """
    sj = strides[j]
    nl = nlocs[j]
    touched = np.empty(main_g.shape[0] * (2 * C + 1) + 2 * C + 2, np.int64)
    nt = 0
    ax = abs(x)
    for e in range(main_g.shape[0]):
        g = main_g[e]
        s = main_s[e]
        lj = (g // sj) % nl
        b = base[j, lj]
        if b < 0:
            continue
        rest = g - lj * sj
        c = c0[j, lj]
        for v0 in range(-C, C + 1):
            y = x - (v0 - c)
            if y > nprime or y < -nprime:
                continue
            ns = s + ax - abs(y)
            ng = rest + (b + v0) * sj
            if dense[ng] == NEG:
                touched[nt] = ng
                nt += 1
                dense[ng] = ns
            elif ns > dense[ng]:
                dense[ng] = ns
    # witnesses that agreed with the word so far and deviate here
    for delta in range(-C, C + 1):
        if delta == 0:
            continue
        y = x - delta
        if y > nprime or y < -nprime:
            continue
        ns = ax - abs(y)
        if delta > 0:
            ns += tie
        ng = zero_g + delta * sj
        if dense[ng] == NEG:
            touched[nt] = ng
            nt += 1
            dense[ng] = ns
        elif ns > dense[ng]:
            dense[ng] = ns
    cand_g = np.empty(nt, np.int64)
    cand_s = np.empty(nt, np.int64)
    for e in range(nt):
        cand_g[e] = touched[e]
        cand_s[e] = dense[touched[e]]
        dense[touched[e]] = NEG
    out_g = np.empty(nt, np.int64)
    out_s = np.empty(nt, np.int64)
    nk = prune(cand_g, cand_s, nt, zero_g, K, k, strides, nlocs, diffidx, costd, out_g, out_s)
    if nk < 0:
        return True, out_g[:0], out_s[:0], out_g[:0], out_s[:0], pre
    # finished witnesses: the word's coefficient feeds the remainder alone
    pg = np.empty(post_g.shape[0], np.int64)
    ps = np.empty(post_g.shape[0], np.int64)
    npost = 0
    for e in range(post_g.shape[0]):
        g = post_g[e]
        s = post_s[e] + ax
        lj = (g // sj) % nl
        b = base[j, lj]
        if b < 0:
            continue
        v0 = c0[j, lj] + x
        if v0 > C or v0 < -C or s > K:
            continue
        ng = g - lj * sj + (b + v0) * sj
        found = False
        for f in range(npost):
            if pg[f] == ng:
                if s > ps[f]:
                    ps[f] = s
                found = True
                break
        if not found:
            pg[npost] = ng
            ps[npost] = s
            npost += 1
    pg2, ps2 = _sorted_pairs(pg[:npost], ps[:npost])
    npre = pre.copy()
    if pre[0] == 1:
        g = pre[1]
        s = pre[2] + ax
        lj = (g // sj) % nl
        b = base[j, lj]
        v0 = c0[j, lj] + x
        if b < 0 or v0 > C or v0 < -C or s > K:
            npre[0] = 0
            npre[1] = 0
            npre[2] = 0
        else:
            npre[1] = g - lj * sj + (b + v0) * sj
            npre[2] = s
    return False, out_g[:nk], out_s[:nk], pg2, ps2, npre


@njit(cache=True)
def bstep(part, first, bw, main_g, main_s, post_g, post_s, pre, K, tie,
          k, strides, nlocs, zero_g, diffidx, costd):
    """Process the b symbol of a letter. part: 0 tail, 1 center, 2 head; bw = |b|."""
    n = main_g.shape[0]
    cg = np.empty(n + 1, np.int64)
    cs = np.empty(n + 1, np.int64)
    m = 0
    for e in range(n):
        cg[m] = main_g[e]
        cs[m] = main_s[e]
        m += 1
    npre = pre.copy()
    if first:
        if part == 0:
            npre[0] = 1
            npre[1] = zero_g
            npre[2] = tie + bw
    elif pre[0] == 1:
        if part == 2:
            npre[0] = 0
            npre[1] = 0
            npre[2] = 0
        else:
            # the late witness starts at this letter
            g = pre[1]
            s = pre[2]
            dup = False
            for f in range(m):
                if cg[f] == g:
                    dup = True
                    if s > cs[f]:
                        cs[f] = s
            if not dup:
                cg[m] = g
                cs[m] = s
                m += 1
            if part == 0 and pre[2] + bw <= K:
                npre[2] = pre[2] + bw
            else:
                npre[0] = 0
                npre[1] = 0
                npre[2] = 0
    out_g = np.empty(m, np.int64)
    out_s = np.empty(m, np.int64)
    nk = prune(cg, cs, m, zero_g, K, k, strides, nlocs, diffidx, costd, out_g, out_s)
    if nk < 0:
        return True, out_g[:0], out_s[:0], out_g[:0], out_s[:0], npre
    npo = post_g.shape[0]
    pg = np.empty(npo + nk + 1, np.int64)
    ps = np.empty(npo + nk + 1, np.int64)
    q = 0
    if part == 2:
        for e in range(npo):
            if post_s[e] + bw <= K:
                pg[q] = post_g[e]
                ps[q] = post_s[e] + bw
                q += 1
        cands_g = np.empty(nk + 1, np.int64)
        cands_s = np.empty(nk + 1, np.int64)
        for e in range(nk):
            cands_g[e] = out_g[e]
            cands_s[e] = out_s[e] + bw
        cands_g[nk] = zero_g
        cands_s[nk] = bw + tie
        for e in range(nk + 1):
            if cands_s[e] > K:
                continue
            found = False
            for f in range(q):
                if pg[f] == cands_g[e]:
                    found = True
                    if cands_s[e] > ps[f]:
                        ps[f] = cands_s[e]
                    break
            if not found:
                pg[q] = cands_g[e]
                ps[q] = cands_s[e]
                q += 1
    pg2, ps2 = _sorted_pairs(pg[:q], ps[:q])
    return False, out_g[:nk], out_s[:nk], pg2, ps2, npre


@njit(cache=True)
def is_bad(main_g, main_s, post_g, post_s, zero_g, I, k, strides, nlocs, trail):
    """True when some witness, possibly extended by up to I trailing letters, wins."""
    for e in range(post_g.shape[0]):
        if post_g[e] == zero_g and post_s[e] >= 1:
            return True
    for e in range(main_g.shape[0]):
        g = main_g[e]
        s = main_s[e]
        if g == zero_g and s >= 1:
            return True
        for mm in range(1, I + 1):
            tot = 2 * mm
            ok = True
            for j in range(k):
                lj = (g // strides[j]) % nlocs[j]
                c = trail[j, mm, lj]
                if c >= INF_COST:
                    ok = False
                    break
                tot += c
            if ok and s - tot >= 1:
                return True
    return False
