"""Fellow-traveller constants, word improvement, the minimal cross-section automaton
and the group growth series.

The cross-section is built directly as a product automaton. A word of the
strict language is read one symbol at a time (the t-exponent b of a letter,
then its k coefficients) and the state records every competing witness word
that is still alive: the remainders of the difference of types modulo the
blocks, read from the low end, together with how much lighter the witness
is so far. A word is accepted when no witness has finished with a zero
remainder while being strictly lighter (minimal language) or lighter-or-
equal and earlier in the tie-break order (canonical cross-section).
"""
from __future__ import annotations

import csv
import heapq
import io
import itertools
import json
import logging
import math
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from . import _kernels as kern
from .errors import NotImprovable, OracleMismatch, ResourceLimit
from .group_core import SPoint, bfs_spheres
from .language_machinery import (LAMBDA_ACCEPT, ExplicitDFA, LambdaWord, RationalSeries,
                                 WeightedFSA, growth_series, lambda_part_step, psi,
                                 psi_inverse_canonical, remainder_bound)
from .matrix_algebra import CanonicalSetup
from .polynomial_core import (IntPoly, LaurentPoly, LaurentTuple, head_len, norm_one, tail_len,
                              tuple_divergence, tuple_divides)

__all__ = [
    "FftpConstants", "ConstantsMode", "BuildParams", "CrossSectionDFA", "fftp_constants",
    "minimal_language", "canonical_cross_section", "build_cross_section", "group_series", "word_symbols",
    "verify_against_oracle", "series_record", "series_json", "series_csv", "improve_word",
    "improvement_checks",
]

log = logging.getLogger(__name__)

B_SYMBOLS = (-1, 1, 2)


# ----------------------------------------------------------------------------
# constants

@dataclass(frozen=True)
class FftpConstants:
    M: int
    N: int
    k: int
    A_bound: int
    B: int
    C: int
    K1: int
    K2: int
    K3: int
    K_ft: int
    blocks: tuple[IntPoly, ...] = ()

    @property
    def step3_threshold(self) -> int:
        return 10 * self.M * self.N * self.B + 4 * self.M + 1

    @property
    def step4_unit(self) -> int:
        return 12 * self.M * self.N * self.B + 4 * self.M * self.N + 1


def fftp_constants(setup: CanonicalSetup) -> FftpConstants:
    M, N, k = setup.M, setup.N, setup.k
    A = 2 * M * N
    B = 2 * A
    K1 = 2 * M * N * (B + 2)
    K2 = 2 * M * N * B
    K3 = k * (k * (12 * M * N * B + 4 * M * N + 1) + 2 * M * B + 2 * M * N * B + 4 * M)
    K_ft = K3 + (k * K1 + 6) * K2
    C = remainder_bound(setup, A)
    return FftpConstants(M, N, k, A, B, C, K1, K2, K3, K_ft, tuple(setup.blocks))


@dataclass(frozen=True)
class BuildParams:
    n: int
    i: int
    kft: int
    C: int
    nprime: int


@dataclass(frozen=True)
class ConstantsMode:
    """certified: the constants from fftp_constants. tightened: small user values.

    Unset tightened values default to n = 10, i = 3, kft = 6, C = n and a
    witness coefficient bound equal to n.
    """

    mode: str = "tightened"
    n: int | None = None
    i: int | None = None
    kft: int | None = None
    C: int | None = None
    nprime: int | None = None

    def __post_init__(self):
        if self.mode not in ("certified", "tightened"):
            raise ValueError(f"unknown mode {self.mode!r}")

    def resolve(self, setup: CanonicalSetup) -> BuildParams:
        if self.mode == "certified":
            c = fftp_constants(setup)
            n = c.K1
            return BuildParams(n=n, i=c.K2, kft=c.K_ft, C=remainder_bound(setup, n), nprime=n)
        n = 10 if self.n is None else self.n
        C = n if self.C is None else self.C
        return BuildParams(n=n, i=3 if self.i is None else self.i,
                           kft=6 if self.kft is None else self.kft, C=C,
                           nprime=n if self.nprime is None else self.nprime)


# ----------------------------------------------------------------------------
# remainder geometry

def _horner_step(q: tuple[int, ...]):
    """r -> z r + inc modulo q (low-first coefficients, lead +-1)."""
    d = len(q) - 1
    lead = q[d]

    def step(r, inc):
        top = r[d - 1]
        v = (inc,) + tuple(r)
        if top:
            f = top * lead
            return tuple(v[j] - f * q[j] for j in range(d))
        return v[:d]

    return step


class Geo:
    """Packed remainder boxes [-C, C]^d_j for each block.

    Words are read from the low exponent upwards, so divisibility by p is
    tracked as Horner division by the reciprocal polynomial.
    """

    def __init__(self, blocks, C: int):
        self.k = len(blocks)
        self.C = C
        self.W = 2 * C + 1
        self.rev = [tuple(reversed(p.coeffs)) for p in blocks]
        self.ds = [len(q) - 1 for q in self.rev]
        self.steps = [_horner_step(q) for q in self.rev]
        self.strides = []
        s = 1
        for d in self.ds:
            self.strides.append(s)
            s *= self.W ** d
        self.size = s

    def tables(self):
        """base[li] is the local index of step(r, 0) with coordinate 0 cleared,
        c0[li] that coordinate; base is -1 when the step leaves the box."""
        out = []
        for j, d in enumerate(self.ds):
            n = self.W ** d
            base = np.full(n, -1, np.int64)
            c0 = np.zeros(n, np.int64)
            for li in range(n):
                r2 = self.steps[j](self.decode(li, d), 0)
                if all(-self.C <= v <= self.C for v in r2[1:]):
                    base[li] = self.encode((0,) + r2[1:])
                    c0[li] = r2[0]
            out.append((base, c0))
        return out

    def decode(self, li: int, d: int) -> tuple[int, ...]:
        out = []
        for _ in range(d):
            out.append(li % self.W - self.C)
            li //= self.W
        return tuple(out)

    def encode(self, r) -> int:
        li, m = 0, 1
        for v in r:
            li += (v + self.C) * m
            m *= self.W
        return li


def correction_cost(q, region: int, per_step: int) -> dict:
    """Cheapest way (sum of |increments| plus per_step per step) to drive a
    remainder difference to zero, staying inside |D| <= region."""
    d = len(q) - 1
    step = _horner_step(q)
    rev = defaultdict(list)
    emax = 2 * region + 2
    for D in itertools.product(range(-region, region + 1), repeat=d):
        for e in range(-emax, emax + 1):
            D2 = step(D, e)
            if max(abs(x) for x in D2) <= region:
                rev[D2].append((D, abs(e) + per_step))
    zero = (0,) * d
    dist = {zero: 0}
    pq = [(0, zero)]
    while pq:
        c, u = heapq.heappop(pq)
        if c > dist[u]:
            continue
        for v, w in rev[u]:
            if c + w < dist.get(v, kern.INF_COST):
                dist[v] = c + w
                heapq.heappush(pq, (c + w, v))
    return dist


def trailing_tables(q, C: int, I: int) -> list[dict]:
    """T[m][r]: least sum |y| that zeroes r in exactly m witness-only steps."""
    d = len(q) - 1
    step = _horner_step(q)
    pts = list(itertools.product(range(-C, C + 1), repeat=d))
    big = kern.INF_COST
    cur = {r: (0 if not any(r) else big) for r in pts}
    out = [dict(cur)]
    for _ in range(I):
        nxt = {}
        for r in pts:
            base = step(r, 0)
            if any(abs(v) > C for v in base[1:]):
                nxt[r] = big
                continue
            best = big
            for v0 in range(-C, C + 1):
                c = cur[(v0,) + base[1:]]
                if c < big:
                    best = min(best, abs(v0 - base[0]) + c)
            nxt[r] = best
        cur = nxt
        out.append(dict(cur))
    return out


# ----------------------------------------------------------------------------
# the product construction

def _symbol_weight(sym: int, n: int) -> int:
    if sym < 3:
        return abs(B_SYMBOLS[sym])
    return abs((sym - 3) % (2 * n + 1) - n)


def word_symbols(word: LambdaWord, n: int) -> list[int]:
    """Serialize a word into the automaton's symbols: per letter, b then a_1..a_k."""
    out = []
    for x in word.letters:
        out.append(B_SYMBOLS.index(x.b))
        for j, a in enumerate(x.a):
            if abs(a) > n:
                raise ValueError(f"coefficient {a} exceeds {n}")
            out.append(3 + j * (2 * n + 1) + a + n)
    return out


class CrossSectionDFA(ExplicitDFA):
    """An ExplicitDFA over serialized letters that remembers how it was built."""

    def __init__(self, dfa: ExplicitDFA, setup: CanonicalSetup, params: BuildParams, tie: int,
                 raw_states: int):
        super().__init__(dfa.nstates, dfa.start, dfa.edges, dfa.accept,
                         alphabet=dfa.alphabet, weight=dfa.weight)
        self.setup = setup
        self.params = params
        self.tie = tie
        self.raw_states = raw_states

    def accepts_word(self, word: LambdaWord) -> bool:
        return self.accepts(word_symbols(word, self.params.n))


def _letter_part(state: str, b: int) -> int | None:
    """0 tail, 1 center, 2 head; None if a letter with this b cannot follow."""
    if b == 2:
        if state in ("S", "T"):
            return 0
        return 2 if state in ("Cp", "Cm", "H", "Hz") else None
    if b == 1:
        return 1 if state in ("S", "T", "Cp") else None
    return 1 if state in ("S", "T", "C1", "Cm") else None


def _build(setup: CanonicalSetup, p: BuildParams, tie: int, cap: int,
           table_cap: int = 20_000_000) -> tuple[ExplicitDFA, int]:
    n, C, I, K, nprime = p.n, p.C, p.i, p.kft, p.nprime
    geo = Geo(setup.blocks, C)
    rw = 4 * C + 1
    cells = geo.size + sum(rw ** d for d in geo.ds) + sum((geo.W ** d) ** 2 for d in geo.ds)
    if cells > table_cap:
        raise ResourceLimit(f"remainder tables need {cells} cells (cap {table_cap}) "
                            f"with remainder bound C = {C}", cells)
    k = geo.k
    strides = np.array(geo.strides, np.int64)
    nlocs = np.array([geo.W ** d for d in geo.ds], np.int64)
    mx = int(nlocs.max())
    base = np.full((k, mx), -1, np.int64)
    c0 = np.zeros((k, mx), np.int64)
    for j, (b, c) in enumerate(geo.tables()):
        base[j, :nlocs[j]] = b
        c0[j, :nlocs[j]] = c
    zero_g = int(sum(geo.encode((0,) * d) * geo.strides[j] for j, d in enumerate(geo.ds)))
    costd = np.full((k, max(rw ** d for d in geo.ds)), kern.INF_COST, np.int64)
    diffidx = np.zeros((k, mx, mx), np.int64)
    trail = np.full((k, I + 1, mx), kern.INF_COST, np.int64)
    for j, d in enumerate(geo.ds):
        for D, c in correction_cost(geo.rev[j], 2 * C, 2).items():
            ri, mm = 0, 1
            for v in D:
                ri += (v + 2 * C) * mm
                mm *= rw
            costd[j, ri] = c
        for a in range(nlocs[j]):
            ra = geo.decode(a, d)
            for b in range(nlocs[j]):
                ri, mm = 0, 1
                for u, v in zip(ra, geo.decode(b, d)):
                    ri += (u - v + 2 * C) * mm
                    mm *= rw
                diffidx[j, a, b] = ri
        for m, table in enumerate(trailing_tables(geo.rev[j], C, I)):
            for r, c in table.items():
                trail[j, m, geo.encode(r)] = min(c, kern.INF_COST)

    # witnesses that start up to I letters before the word
    init: dict[int, int] = {}
    for m in range(1, I + 1):
        per_block = []
        for j, d in enumerate(geo.ds):
            layer = {(0,) * d: 0}
            for _ in range(m):
                nxt = {}
                for r, c in layer.items():
                    for y in range(-nprime, nprime + 1):
                        r2 = geo.steps[j](r, -y)
                        if max(abs(v) for v in r2) > C:
                            continue
                        if nxt.get(r2, kern.INF_COST) > c + abs(y):
                            nxt[r2] = c + abs(y)
                layer = nxt
            per_block.append(list(layer.items()))
        for combo in itertools.product(*per_block):
            g = sum(geo.encode(r) * geo.strides[j] for j, (r, _) in enumerate(combo))
            s = -(2 * m + sum(c for _, c in combo))
            if init.get(g, -kern.INF_COST) < s:
                init[g] = s
    cg = np.array(list(init.keys()), np.int64)
    cs = np.array(list(init.values()), np.int64)
    og = np.empty(len(cg), np.int64)
    os_ = np.empty(len(cg), np.int64)
    nk = kern.prune(cg, cs, len(cg), zero_g, K, k, strides, nlocs, diffidx, costd, og, os_)
    empty = np.zeros(0, np.int64)
    no_pre = np.zeros(3, np.int64)
    prof0 = (og[:max(nk, 0)].copy(), os_[:max(nk, 0)].copy(), empty, empty, no_pre)
    dense = np.full(geo.size, kern.NEG, np.int64)

    def pkey(prof):
        return b"|".join(a.tobytes() for a in prof)

    dead = ("DEAD",)
    start = (("S", 0, 0, False), pkey(prof0))
    states = {start: 0}
    order = [start]
    profs = [prof0]
    edges = []
    qi = 0
    while qi < len(order):
        key, prof = order[qi], profs[qi]
        src = qi
        qi += 1
        if key == dead:
            continue
        L, pos, b, nz = key[0]
        succ = []
        if pos == 0:
            for sym, bb in enumerate(B_SYMBOLS):
                part = _letter_part(L, bb)
                if part is None:
                    continue
                res = kern.bstep(part, L == "S", abs(bb), prof[0], prof[1], prof[2], prof[3],
                                 prof[4], K, tie, k, strides, nlocs, zero_g, diffidx, costd)
                succ.append((sym, abs(bb), (L, 1, bb, False), None if res[0] else res[1:], part))
        else:
            j = pos - 1
            part = _letter_part(L, b)
            for x in range(-n, n + 1):
                res = kern.substep(j, x, prof[0], prof[1], prof[2], prof[3], prof[4], C, K,
                                   nprime, tie, k, strides, nlocs, base, c0, zero_g, diffidx,
                                   costd, dense)
                nz2 = nz or x != 0
                if pos == k:
                    L2 = lambda_part_step(L, b, nz2, strict=True)
                    if L2 is None:
                        continue
                    lab = (L2, 0, 0, False)
                else:
                    lab = (L, pos + 1, b, nz2)
                sym = 3 + j * (2 * n + 1) + x + n
                succ.append((sym, abs(x), lab, None if res[0] else res[1:], part))
        for sym, w, lab, pr, part in succ:
            if pr is None:
                nkey = dead
            else:
                if part != 0 and pr[4][0] == 0:
                    pr = (pr[0], pr[1], pr[2], pr[3], no_pre)
                nkey = (lab, pkey(pr))
            idx = states.get(nkey)
            if idx is None:
                idx = len(order)
                states[nkey] = idx
                order.append(nkey)
                profs.append(pr)
                if len(order) > cap:
                    raise ResourceLimit(f"product automaton exceeded {cap} reachable states",
                                        len(order))
            edges.append((src, sym, w, idx))
    accept = []
    for key, prof in zip(order, profs):
        if key == dead or key[0][1] != 0 or key[0][0] not in LAMBDA_ACCEPT:
            accept.append(False)
        else:
            accept.append(not kern.is_bad(prof[0], prof[1], prof[2], prof[3], zero_g, I, k,
                                          strides, nlocs, trail))
    alph = list(range(3 + k * (2 * n + 1)))
    dfa = ExplicitDFA(len(order), 0, edges, accept, alphabet=alph,
                      weight=lambda s: _symbol_weight(s, n))
    return dfa, len(order)


def _build_minimized(setup, mode, tie, cap):
    params = mode.resolve(setup)
    raw, count = _build(setup, params, tie, cap)
    log.info("product automaton: %d states", count)
    small = raw.minimize()
    log.info("minimized: %d states", small.nstates)
    return CrossSectionDFA(small, setup, params, tie, count)


def minimal_language(setup: CanonicalSetup, mode: ConstantsMode | None = None,
                     cap: int = 2_000_000) -> CrossSectionDFA:
    """Strict-language words with no strictly lighter class partner within the fellow-travel window."""
    return _build_minimized(setup, mode or ConstantsMode(), 0, cap)


def canonical_cross_section(min_lang: CrossSectionDFA, acceptor: WeightedFSA | None = None,
                            cap: int = 2_000_000) -> CrossSectionDFA:
    """One word per class: equal-weight partners also eliminate a word when they are
    earlier in the tie-break order. The pair acceptor is folded into the
    construction, so `acceptor` is accepted for interface symmetry only."""
    mode = ConstantsMode("tightened", min_lang.params.n, min_lang.params.i,
                         min_lang.params.kft, min_lang.params.C, min_lang.params.nprime)
    return _build_minimized(min_lang.setup, mode, 1, cap)


def build_cross_section(setup: CanonicalSetup, mode: ConstantsMode | None = None,
                        cap: int = 2_000_000) -> CrossSectionDFA:
    """The canonical cross-section in one pass, without the intermediate minimal language."""
    return _build_minimized(setup, mode or ConstantsMode(), 1, cap)


def group_series(cross_section: WeightedFSA) -> tuple[RationalSeries, RationalSeries]:
    g = growth_series(cross_section)
    sphere = g.shift_down()
    return sphere, sphere.over_one_minus_z()


def verify_against_oracle(setup: CanonicalSetup, sphere: RationalSeries, radius: int,
                          cap: int = 5_000_000) -> list[int]:
    expected = bfs_spheres(setup, radius, cap)
    got = sphere.coefficients(radius + 1)
    if got != expected:
        bad = next(d for d in range(radius + 1) if got[d] != expected[d])
        raise OracleMismatch(f"sphere {bad}: series gives {got[bad]}, breadth-first search "
                             f"gives {expected[bad]}")
    return expected


# ----------------------------------------------------------------------------
# output

def series_record(sphere: RationalSeries, ball: RationalSeries, terms: int = 50) -> dict:
    return {"sphere": {**sphere.to_dict(), "coefficients": sphere.coefficients(terms)},
            "ball": {**ball.to_dict(), "coefficients": ball.coefficients(terms)}}


def series_json(sphere: RationalSeries, ball: RationalSeries, terms: int = 50,
                config: dict | None = None) -> str:
    rec = series_record(sphere, ball, terms)
    if config is not None:
        rec = {"config": config, **rec}
    return json.dumps(rec, indent=2, sort_keys=False) + "\n"


def series_csv(sphere: RationalSeries, ball: RationalSeries, terms: int = 50,
               header: str | None = None) -> str:
    buf = io.StringIO()
    if header:
        buf.write(header)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["d", "sphere", "ball"])
    for d, (s, b) in enumerate(zip(sphere.coefficients(terms), ball.coefficients(terms))):
        w.writerow([d, s, b])
    return buf.getvalue()


# ----------------------------------------------------------------------------
# word improvement
#
# Everything happens on types: with t1 the type of w and t2 that of the
# witness, every t1 + p*q' lies in the class, so each step picks a new
# quotient by truncating or splicing q = (t2 - t1)/p and then repairs the
# seam with at most two terms +-z^e p_i. Head steps reuse the tail code on
# the mirrored problem (z -> 1/z, h -> -h).

def _type_weight(t: LaurentTuple, h: int) -> int:
    return 2 * tail_len(t, h) + 2 * head_len(t, h) + abs(h) + 1 + norm_one(t)


def _mirror(t: LaurentTuple) -> LaurentTuple:
    return LaurentTuple(tuple(c.mirror() for c in t))


def _low(t: LaurentTuple) -> int | None:
    lows = [c.low for c in t if not c.is_zero()]
    return min(lows) if lows else None


def _quotients(t1: LaurentTuple, t2: LaurentTuple, polys) -> list[LaurentPoly]:
    q = tuple_divides(polys, t2 - t1)
    if q is None:
        raise NotImprovable("the two words are not in the same class")
    return list(q)


def _replace(t: LaurentTuple, i: int, c: LaurentPoly) -> LaurentTuple:
    comps = list(t)
    comps[i] = c
    return LaurentTuple(tuple(comps))


def _prefix_excess(f: LaurentPoly, g: LaurentPoly, threshold: int) -> int | None:
    """Smallest exponent at which the running sum of |f| - |g| exceeds threshold."""
    run = 0
    for e in sorted(set(f.support()) | set(g.support())):
        run += abs(f.coeff(e)) - abs(g.coeff(e))
        if run > threshold:
            return e
    return None


class _Problem:
    """t1, h and the blocks in one (possibly mirrored) frame, plus the repair search."""

    def __init__(self, t1: LaurentTuple, h: int, polys: list[LaurentPoly], K2: int, wmax: int):
        self.t1, self.h, self.polys, self.K2, self.wmax = t1, h, polys, K2, wmax
        self.T1, self.H1 = tail_len(t1, h), head_len(t1, h)

    def mirrored(self) -> "_Problem":
        polys = [p.mirror() for p in self.polys]
        return _Problem(_mirror(self.t1), -self.h, polys, self.K2, self.wmax)

    def gap_excess(self, t: LaurentTuple) -> int:
        dt = abs(tail_len(t, self.h) - self.T1) - self.K2
        dh = abs(head_len(t, self.h) - self.H1) - self.K2
        return max(dt, 0) + max(dh, 0)

    def score(self, t: LaurentTuple) -> tuple[int, int]:
        return self.gap_excess(t), _type_weight(t, self.h)

    def anchors(self) -> list[int]:
        lo = _low(self.t1)
        his = [c.high for c in self.t1 if not c.is_zero()]
        out = []
        if lo is not None:
            out += [lo - self.K2, lo, lo + self.K2]
        if his:
            hi = max(his)
            out += [hi - self.K2, hi, hi + self.K2]
        return out

    def repair(self, base: LaurentTuple, seams: list[int], current: LaurentTuple):
        """Best of base and base plus one or two seam terms, or None if it is not
        lighter than w or has wider gaps than the current witness."""
        terms = []
        for i, p in enumerate(self.polys):
            d = p.high - p.low
            for a in set(seams + self.anchors()):
                for e in range(a - d - 2, a + 3):
                    for sign in (1, -1):
                        terms.append((i, p.shift(e) * sign))
        terms = list({(i, t): None for i, t in terms})

        def add(t, i, c):
            return _replace(t, i, t[i] + c)

        best, best_score = base, self.score(base)
        singles = []
        for i, c in terms:
            cand = add(base, i, c)
            sc = self.score(cand)
            singles.append((sc, i, c))
            if sc < best_score:
                best, best_score = cand, sc
        if best_score[0] > 0 or best_score[1] >= self.wmax:
            # pairs, seeded from the most promising singles
            singles.sort(key=lambda x: x[0])
            top = singles[:40]
            for (_, i1, c1), (_, i2, c2) in itertools.combinations(top, 2):
                cand = add(add(base, i1, c1), i2, c2)
                sc = self.score(cand)
                if sc < best_score:
                    best, best_score = cand, sc
        if best_score[1] >= self.wmax or best_score[0] > self.gap_excess(current):
            return None
        return best


def _tail_truncation(pb: _Problem, t2: LaurentTuple) -> LaurentTuple:
    """Step 1: the witness tail overhangs w's by more than K2; drop the lowest
    K2 exponents of the quotient until it does not."""
    for _ in range(10_000):
        if tail_len(t2, pb.h) <= pb.T1 + pb.K2:
            break
        q = _quotients(pb.t1, t2, pb.polys)
        D = min(c.low for c in q if not c.is_zero())
        cut = D + pb.K2
        base = pb.t1 + LaurentTuple(tuple(p * c.restrict(cut, math.inf)
                                          for p, c in zip(pb.polys, q)))
        nxt = pb.repair(base, [cut], t2)
        if nxt is None:
            break
        t2 = nxt
    return t2


def _tail_trim(pb: _Problem, t2: LaurentTuple) -> LaurentTuple:
    """Step 2: w's tail overhangs the witness's by more than K2; trim w's own
    tail with the low part of the quotient."""
    if pb.T1 <= tail_len(t2, pb.h) + pb.K2:
        return t2
    q = _quotients(pb.t1, t2, pb.polys)
    cut = _low(pb.t1) + pb.K2
    base = pb.t1 + LaurentTuple(tuple(p * c.restrict(-math.inf, cut - 1)
                                      for p, c in zip(pb.polys, q)))
    nxt = pb.repair(base, [cut], t2)
    return t2 if nxt is None else nxt


def _witness_excess(pb: _Problem, t2: LaurentTuple, threshold: int) -> LaurentTuple:
    """Step 3: where the witness's running absolute mass first exceeds w's by the
    threshold, replace the witness below that point by w."""
    for _ in range(1000):
        hits = [(D, i) for i in range(len(t2))
                if (D := _prefix_excess(t2[i], pb.t1[i], threshold)) is not None]
        if not hits:
            break
        D, i = min(hits)
        q = _quotients(pb.t1, t2, pb.polys)
        base = _replace(t2, i, pb.t1[i] + pb.polys[i] * q[i].restrict(D + 1, math.inf))
        nxt = pb.repair(base, [D + 1], t2)
        if nxt is None:
            break
        t2 = nxt
    return t2


def _word_excess(pb: _Problem, t2: LaurentTuple, threshold: int) -> LaurentTuple:
    """Step 4: each component where w's running mass exceeds the witness's by more
    than the threshold takes the witness up to that point and w after it."""
    seams = []
    base = t2
    q = _quotients(pb.t1, t2, pb.polys)
    for i in range(len(t2)):
        D0 = _prefix_excess(pb.t1[i], t2[i], threshold)
        if D0 is None:
            continue
        base = _replace(base, i, pb.t1[i] + pb.polys[i] * q[i].restrict(-math.inf, D0))
        seams.append(D0 + 1)
    if not seams:
        return t2
    nxt = pb.repair(base, seams, t2)
    return t2 if nxt is None else nxt


def improve_word(w: LambdaWord, witness: LambdaWord, consts: FftpConstants) -> LambdaWord:
    """A lighter partner of w within the fellow-travel bounds, built from witness."""
    if not consts.blocks:
        raise ValueError("constants carry no block polynomials")
    p1, p2 = psi(w), psi(witness)
    if p1.h != p2.h:
        raise NotImprovable("words have different heights")
    polys = [b.to_laurent() for b in consts.blocks]
    _quotients(p1.t, p2.t, polys)
    if witness.weight >= w.weight:
        raise NotImprovable("the witness is not lighter than w")
    h = p1.h
    pb = _Problem(p1.t, h, polys, consts.K2, w.weight)
    mb = pb.mirrored()
    t2 = p2.t
    t2 = _tail_truncation(pb, t2)
    t2 = _mirror(_tail_truncation(mb, _mirror(t2)))
    t2 = _tail_trim(pb, t2)
    t2 = _mirror(_tail_trim(mb, _mirror(t2)))
    t2 = _witness_excess(pb, t2, consts.step3_threshold)
    t2 = _word_excess(pb, t2, consts.k * consts.step4_unit)
    if t2 == p2.t:
        return witness
    return psi_inverse_canonical(SPoint(t2, h), consts.K1)


def improvement_checks(w: LambdaWord, w2: LambdaWord, consts: FftpConstants) -> dict[str, bool]:
    """The four bounds a result of improve_word must satisfy."""
    a, b = psi(w), psi(w2)
    coeff = max((abs(c) for x in w2.letters for c in x.a), default=0)
    return {
        "weight": w2.weight < w.weight,
        "tail_head": (abs(tail_len(a.t, a.h) - tail_len(b.t, b.h)) <= consts.K2
                      and abs(head_len(a.t, a.h) - head_len(b.t, b.h)) <= consts.K2),
        "divergence": tuple_divergence(a.t, b.t) <= consts.K3,
        "coefficients": coeff <= consts.K1,
    }
