"""Weighted automata, the tripartite word languages, the division acceptors and
rational growth series.

A WeightedFSA is deterministic and lazily explored: it is given by a start
state and a step function, and a step returning None sends the run to an
absorbing fail sink. Explicit (finite, enumerated) automata are ExplicitDFA
objects, which also behave as WeightedFSA.
"""
from __future__ import annotations

import itertools
from collections import defaultdict, deque
from dataclasses import dataclass
from typing import Callable, Hashable, Iterable, Iterator, Sequence

import networkx as nx
from sympy import QQ, Poly, Symbol, cancel, fraction
from sympy.polys.matrices import DomainMatrix

from .errors import CoefficientOverflow, ResourceLimit
from .matrix_algebra import CanonicalSetup
from .polynomial_core import (IntPoly, LaurentPoly, LaurentTuple, division_step,
                              head_len, tail_len)
from .group_core import SPoint

__all__ = [
    "Letter", "LambdaWord", "PairLetter", "PAD", "WeightedFSA", "ExplicitDFA",
    "RationalSeries", "alphabet", "build_lambda_fsa", "psi", "psi_inverse_canonical",
    "union", "intersection", "complement", "concatenation", "star", "reversal",
    "pad_pair", "regular_ops", "RightToLeftDivision", "build_r_prime", "build_r",
    "remainder_bound", "growth_series", "count_by_weight", "lambda_part_step",
    "LAMBDA_ACCEPT",
]


# ----------------------------------------------------------------------------
# letters and words

@dataclass(frozen=True, order=True)
class Letter:
    a: tuple[int, ...]
    b: int

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(int(x) for x in self.a))
        if self.b not in (-1, 1, 2):
            raise ValueError(f"b must be -1, 1 or 2, got {self.b}")

    @property
    def weight(self) -> int:
        return sum(abs(x) for x in self.a) + abs(self.b)

    @property
    def is_zero(self) -> bool:
        return not any(self.a)

    def __repr__(self):
        return f"({','.join(map(str, self.a))};{self.b})"


def alphabet(k: int, n: int) -> list[Letter]:
    return [Letter(a, b) for b in (-1, 1, 2)
            for a in itertools.product(range(-n, n + 1), repeat=k)]


@dataclass(frozen=True)
class LambdaWord:
    """A word of the tripartite shape 2* (+-1)+ 2* with a uniform center sign."""

    letters: tuple[Letter, ...]

    def __post_init__(self):
        object.__setattr__(self, "letters", tuple(self.letters))
        bs = [x.b for x in self.letters]
        i = 0
        while i < len(bs) and bs[i] == 2:
            i += 1
        j = i
        while j < len(bs) and bs[j] != 2:
            j += 1
        center = bs[i:j]
        if not center:
            raise ValueError("no center letter")
        if len(set(center)) != 1:
            raise ValueError("center letters disagree in sign")
        if any(b != 2 for b in bs[j:]):
            raise ValueError("letters after the head are not (., 2)")
        if center[0] == -1 and len(center) < 2:
            raise ValueError("a negative center needs at least two letters")
        object.__setattr__(self, "_shape", (i, j - i, len(bs) - j, center[0]))

    @classmethod
    def of(cls, *pairs) -> "LambdaWord":
        """Build from (a, b) pairs, with a an int or a tuple."""
        return cls(tuple(Letter((a,) if isinstance(a, int) else a, b) for a, b in pairs))

    @property
    def tail_len(self) -> int:
        return self._shape[0]

    @property
    def center_len(self) -> int:
        return self._shape[1]

    @property
    def head_len(self) -> int:
        return self._shape[2]

    @property
    def center_sign(self) -> int:
        return self._shape[3]

    @property
    def height(self) -> int:
        return self.center_sign * (self.center_len - 1)

    @property
    def weight(self) -> int:
        return sum(x.weight for x in self.letters)

    @property
    def k(self) -> int:
        return len(self.letters[0].a)

    def first_exponent(self) -> int:
        """Exponent carried by the first letter."""
        h = self.height
        return -self.tail_len if h >= 0 else h - self.tail_len

    def is_strict(self) -> bool:
        """Condition that boundary (., 2) letters are nonzero."""
        ls = self.letters
        if ls[0].b == 2 and ls[0].is_zero:
            return False
        if ls[-1].b == 2 and ls[-1].is_zero:
            return False
        return True

    def __len__(self):
        return len(self.letters)

    def __repr__(self):
        return "LambdaWord[" + " ".join(map(repr, self.letters)) + "]"


PAD = "$"


@dataclass(frozen=True)
class PairLetter:
    left: Letter | str
    right: Letter | str

    def __post_init__(self):
        if self.left == PAD and self.right == PAD:
            raise ValueError("a pair letter cannot be pad on both sides")


def psi(word: LambdaWord) -> SPoint:
    k = word.k
    comps: list[dict[int, int]] = [{} for _ in range(k)]
    e = word.first_exponent()
    for x in word.letters:
        for j, c in enumerate(x.a):
            if c:
                comps[j][e] = c
        e += 1
    return SPoint(LaurentTuple(tuple(LaurentPoly(c) for c in comps)), word.height)


def psi_inverse_canonical(p: SPoint, n: int) -> LambdaWord:
    t, h = p.t, p.h
    bound = max((abs(c) for poly in t for _, c in poly.items()), default=0)
    if bound > n:
        raise CoefficientOverflow(f"coefficient {bound} exceeds the alphabet bound {n}")
    T, H = tail_len(t, h), head_len(t, h)
    sign = 1 if h >= 0 else -1
    lo = -T if h >= 0 else h - T
    c_lo, c_hi = (0, h) if h >= 0 else (h, 0)
    letters = []
    for e in range(lo, c_hi + H + 1):
        b = sign if c_lo <= e <= c_hi else 2
        letters.append(Letter(tuple(poly.coeff(e) for poly in t), b))
    return LambdaWord(tuple(letters))


# ----------------------------------------------------------------------------
# generic automata

class _Sink:
    __slots__ = ()

    def __repr__(self):
        return "SINK"


SINK = _Sink()


class WeightedFSA:
    """Deterministic automaton over a finite alphabet with per-letter weights."""

    def __init__(self, alphabet: Sequence[Hashable], start: Hashable,
                 step: Callable[[Hashable, Hashable], Hashable | None],
                 accept: Callable[[Hashable], bool],
                 weight: Callable[[Hashable], int] | None = None, name: str = ""):
        self.alphabet = list(alphabet)
        self.start = start
        self._step = step
        self._accept = accept
        self.weight = weight if weight is not None else (lambda s: 1)
        self.name = name

    def delta(self, state, sym):
        if state is SINK:
            return SINK
        nxt = self._step(state, sym)
        return SINK if nxt is None else nxt

    def is_accepting(self, state) -> bool:
        return state is not SINK and bool(self._accept(state))

    def run(self, word: Iterable) -> Hashable:
        s = self.start
        for x in word:
            s = self.delta(s, x)
            if s is SINK:
                break
        return s

    def accepts(self, word: Iterable) -> bool:
        return self.is_accepting(self.run(word))

    def explore(self, cap: int = 1_000_000, keep_sink: bool = False) -> "ExplicitDFA":
        """Enumerate reachable states breadth first."""
        index = {self.start: 0}
        states = [self.start]
        edges = []
        queue = deque([self.start])
        while queue:
            s = queue.popleft()
            src = index[s]
            for sym in self.alphabet:
                t = self.delta(s, sym)
                if t is SINK and not keep_sink:
                    continue
                if t not in index:
                    index[t] = len(states)
                    states.append(t)
                    queue.append(t)
                    if len(states) > cap:
                        raise ResourceLimit(f"more than {cap} reachable states", len(states))
                edges.append((src, sym, self.weight(sym), index[t]))
        accept = [self.is_accepting(s) for s in states]
        return ExplicitDFA(len(states), 0, edges, accept, alphabet=self.alphabet,
                           weight=self.weight, labels=states)

    def words(self, max_len: int) -> Iterator[tuple]:
        """Accepted words of length at most max_len, in length-lex order of the alphabet."""
        layer = [((), self.start)]
        for _ in range(max_len + 1):
            nxt = []
            for w, s in layer:
                if self.is_accepting(s):
                    yield w
                for sym in self.alphabet:
                    t = self.delta(s, sym)
                    if t is not SINK:
                        nxt.append((w + (sym,), t))
            layer = nxt


class ExplicitDFA(WeightedFSA):
    """A finite automaton with enumerated states 0..n-1 and a missing-edge sink."""

    def __init__(self, nstates: int, start: int, edges: Sequence[tuple], accept: Sequence[bool],
                 alphabet: Sequence[Hashable] | None = None, weight=None, labels=None):
        self.nstates = nstates
        self.edges = list(edges)
        self.accept = list(accept)
        self.labels = labels
        table: dict[tuple[int, Hashable], tuple[int, int]] = {}
        for a, sym, w, b in self.edges:
            table[(a, sym)] = (w, b)
        self.table = table
        alph = alphabet if alphabet is not None else sorted({e[1] for e in self.edges}, key=repr)
        wts = {sym: w for _, sym, w, _ in self.edges}
        super().__init__(alph, start,
                         lambda s, x: table[(s, x)][1] if (s, x) in table else None,
                         lambda s: self.accept[s],
                         weight if weight is not None else (lambda x: wts.get(x, 0)))

    def trim(self) -> "ExplicitDFA":
        """Drop states that are unreachable or cannot reach acceptance."""
        g = nx.DiGraph()
        g.add_nodes_from(range(self.nstates))
        g.add_edges_from((a, b) for a, _, _, b in self.edges)
        fwd = nx.descendants(g, self.start) | {self.start}
        acc = [s for s in range(self.nstates) if self.accept[s]]
        back = set(acc)
        rev = g.reverse(copy=False)
        queue = deque(acc)
        while queue:
            for u in rev.successors(queue.popleft()):
                if u not in back:
                    back.add(u)
                    queue.append(u)
        live = sorted(fwd & back)
        if self.start not in live:
            return ExplicitDFA(1, 0, [], [False], self.alphabet, self.weight)
        idx = {s: i for i, s in enumerate(live)}
        edges = [(idx[a], x, w, idx[b]) for a, x, w, b in self.edges if a in idx and b in idx]
        return ExplicitDFA(len(live), idx[self.start], edges, [self.accept[s] for s in live],
                           self.alphabet, self.weight)

    def minimize(self) -> "ExplicitDFA":
        """Moore partition refinement on the trimmed automaton."""
        d = self.trim()
        out = defaultdict(list)
        for a, x, w, b in d.edges:
            out[a].append((x, w, b))
        cls = [1 if d.accept[s] else 0 for s in range(d.nstates)]
        ncls = len(set(cls))
        while True:
            sig: dict = {}
            new = []
            for s in range(d.nstates):
                key = (cls[s], tuple(sorted(((x, w, cls[b]) for x, w, b in out[s]), key=repr)))
                new.append(sig.setdefault(key, len(sig)))
            if len(sig) == ncls:
                break
            cls, ncls = new, len(sig)
        edges = {(cls[a], x): (w, cls[b]) for a, x, w, b in d.edges}
        acc = [False] * ncls
        for s in range(d.nstates):
            acc[cls[s]] = d.accept[s]
        return ExplicitDFA(ncls, cls[d.start], [(a, x, w, b) for (a, x), (w, b) in edges.items()],
                           acc, self.alphabet, self.weight)

    def dump(self) -> str:
        """Debug listing, one edge per line: state, letter, next state, weight (tab separated)."""
        rows = sorted(self.edges, key=lambda e: (e[0], e[3], repr(e[1])))
        return "".join(f"{a}\t{x}\t{b}\t{w}\n" for a, x, w, b in rows)


def union(f: WeightedFSA, g: WeightedFSA) -> WeightedFSA:
    return _product(f, g, lambda x, y: x or y, "union")


def intersection(f: WeightedFSA, g: WeightedFSA) -> WeightedFSA:
    return _product(f, g, lambda x, y: x and y, "intersection")


def _product(f, g, rule, name):
    alph = f.alphabet

    def step(s, x):
        a, b = f.delta(s[0], x), g.delta(s[1], x)
        if a is SINK and b is SINK:
            return None
        return (a, b)

    return WeightedFSA(alph, (f.start, g.start), step,
                       lambda s: rule(f.is_accepting(s[0]), g.is_accepting(s[1])), f.weight, name)


def complement(f: WeightedFSA) -> WeightedFSA:
    # the sink becomes an ordinary accepting state
    dead = ("dead",)

    def step(s, x):
        if s == dead:
            return dead
        t = f.delta(s, x)
        return dead if t is SINK else t

    return WeightedFSA(f.alphabet, f.start, step,
                       lambda s: s == dead or not f.is_accepting(s), f.weight, "complement")


def concatenation(f: WeightedFSA, g: WeightedFSA) -> WeightedFSA:
    def close(a, B):
        B = set(B)
        if f.is_accepting(a):
            B.add(g.start)
        return (a, frozenset(B))

    def step(s, x):
        a, B = s
        B2 = {g.delta(b, x) for b in B} - {SINK}
        a2 = f.delta(a, x)
        if a2 is SINK and not B2:
            return None
        return close(a2, B2)

    return WeightedFSA(f.alphabet, close(f.start, ()), step,
                       lambda s: any(g.is_accepting(b) for b in s[1]), f.weight, "concat")


def star(f: WeightedFSA) -> WeightedFSA:
    def close(S):
        S = set(S)
        if any(f.is_accepting(s) for s in S):
            S.add(f.start)
        return frozenset(S)

    def step(s, x):
        S = {f.delta(a, x) for a in s[1]} - {SINK}
        return (False, close(S)) if S else None

    return WeightedFSA(f.alphabet, (True, frozenset([f.start])), step,
                       lambda s: s[0] or any(f.is_accepting(a) for a in s[1]), f.weight, "star")


def reversal(f: WeightedFSA, cap: int = 1_000_000) -> WeightedFSA:
    """Reverse the language via subset construction on predecessor sets.

    Automata may expose preimages(state, sym) and accept_states() to avoid
    full exploration; otherwise f is explored explicitly first.
    """
    if hasattr(f, "preimages") and hasattr(f, "accept_states"):
        pre = f.preimages
        start = frozenset(f.accept_states())
        init = f.start
    else:
        d = f.explore(cap)
        back = defaultdict(set)
        for a, x, _, b in d.edges:
            back[(b, x)].add(a)
        pre = lambda s, x: back.get((s, x), ())
        start = frozenset(s for s in range(d.nstates) if d.accept[s])
        init = d.start

    def step(S, x):
        out = frozenset(p for s in S for p in pre(s, x))
        return out if out else None

    return WeightedFSA(f.alphabet, start, step, lambda S: init in S, f.weight, "reversal")


def pad_pair(f: WeightedFSA, g: WeightedFSA) -> WeightedFSA:
    """Padded two-variable language {(u, v) : u in L(f), v in L(g)}, pads at the end."""
    alph = [PairLetter(x, y) for x in list(f.alphabet) + [PAD] for y in list(g.alphabet) + [PAD]
            if not (x == PAD and y == PAD)]

    def side(m, s, done, x):
        if x == PAD:
            return s, True
        if done:
            return SINK, True
        return m.delta(s, x), False

    def step(s, pl):
        a, b, da, db = s
        a2, da2 = side(f, a, da, pl.left)
        b2, db2 = side(g, b, db, pl.right)
        if a2 is SINK or b2 is SINK:
            return None
        return (a2, b2, da2, db2)

    def weight(pl):
        return f.weight(pl.left) if pl.left != PAD else 0

    return WeightedFSA(alph, (f.start, g.start, False, False), step,
                       lambda s: f.is_accepting(s[0]) and g.is_accepting(s[1]), weight, "pad_pair")


def regular_ops(op: str, *fsas: WeightedFSA) -> WeightedFSA:
    table = {"union": union, "intersection": intersection, "complement": complement,
             "concatenation": concatenation, "star": star, "reversal": reversal,
             "pad_pair": pad_pair}
    return table[op](*fsas)


# ----------------------------------------------------------------------------
# the tripartite languages

# Part states: S start, T tail, C1 one negative center letter, Cm >= 2 negative,
# Cp positive center, H head (last letter nonzero), Hz head ending in a zero letter.
LAMBDA_ACCEPT = frozenset({"Cp", "Cm", "H"})


def lambda_part_step(state: str, b: int, nonzero: bool, strict: bool = True) -> str | None:
    """Part transition for a letter with t-exponent b; None means rejection."""
    if b == 2:
        if state == "S":
            return "T" if (nonzero or not strict) else None
        if state == "T":
            return "T"
        if state in ("Cp", "Cm", "H", "Hz"):
            return "H" if (nonzero or not strict) else "Hz"
        return None
    if b == 1:
        return "Cp" if state in ("S", "T", "Cp") else None
    if state in ("S", "T"):
        return "C1"
    return "Cm" if state in ("C1", "Cm") else None


def lambda_step(state: str, letter: Letter, strict: bool) -> str | None:
    return lambda_part_step(state, letter.b, not letter.is_zero, strict)


def build_lambda_fsa(k: int, n: int, strict: bool = True) -> WeightedFSA:
    return WeightedFSA(alphabet(k, n), "S", lambda s, x: lambda_step(s, x, strict),
                       lambda s: s in LAMBDA_ACCEPT, lambda x: x.weight,
                       "Lambda" if strict else "Lambda'")


# ----------------------------------------------------------------------------
# division acceptors

def remainder_bound(setup: CanonicalSetup, n: int) -> int:
    """Bound on Horner remainders for letters with coefficients in [-n, n].

    With A = n the letter bound, quotient coefficients stay below B = 2A, and
    a partial remainder below 2A + 2BM.
    """
    A, B = n, 2 * n
    return 2 * A + 2 * B * setup.M


def _pair_parts(part: str, bl: int, br: int) -> str | None:
    """Right-to-left part tracker: H -> (C1 | C-1,1 -> C-1) -> T."""
    if bl != br:
        return None
    b = bl
    if part == "H":
        return "H" if b == 2 else ("C1" if b == 1 else "Cm1")
    if part == "C1":
        return "C1" if b == 1 else ("T" if b == 2 else None)
    if part == "Cm1":
        return "Cm" if b == -1 else None
    if part == "Cm":
        return "Cm" if b == -1 else ("T" if b == 2 else None)
    if part == "T":
        return "T" if b == 2 else None
    raise ValueError(part)


def _pair_parts_inverse(part: str, b: int) -> list[str]:
    return [p for p in ("H", "C1", "Cm1", "Cm", "T") if _pair_parts(p, b, b) == part]


class RightToLeftDivision(WeightedFSA):
    """Reads a pair of equal-shape words right to left, dividing the difference.

    States are (remainders, part) with each remainder stored as a coefficient
    tuple of length d_i; exceeding the bound C fails.
    """

    ACCEPT_PARTS = ("T", "C1", "Cm")

    def __init__(self, setup: CanonicalSetup, n: int, C: int | None = None):
        self.blocks = setup.blocks
        self.degrees = [p.degree for p in setup.blocks]
        self.C = remainder_bound(setup, n) if C is None else C
        self.n = n
        k = setup.k
        zero = tuple((0,) * d for d in self.degrees)
        letters = alphabet(k, n)
        alph = [PairLetter(x, y) for x in letters + [PAD] for y in letters + [PAD]
                if not (x == PAD and y == PAD)]
        super().__init__(alph, (zero, "H"), self._step_impl, self._accept_impl,
                         lambda pl: pl.left.weight if pl.left != PAD else 0, "R'rev")
        self.zero = zero

    def _div(self, r: tuple[int, ...], inc: int, p: IntPoly) -> tuple[int, ...] | None:
        out = division_step(LaurentPoly.from_dense(r), inc, p)
        vec = tuple(out.coeff(i) for i in range(p.degree))
        return vec if all(abs(c) <= self.C for c in vec) else None

    def _step_impl(self, state, pl: PairLetter):
        if pl.left == PAD or pl.right == PAD:
            return None
        rems, part = state
        part2 = _pair_parts(part, pl.left.b, pl.right.b)
        if part2 is None:
            return None
        out = []
        for r, p, x, y in zip(rems, self.blocks, pl.left.a, pl.right.a):
            r2 = self._div(r, x - y, p)
            if r2 is None:
                return None
            out.append(r2)
        return (tuple(out), part2)

    def _accept_impl(self, state) -> bool:
        rems, part = state
        return part in self.ACCEPT_PARTS and rems == self.zero

    def accept_states(self):
        return [(self.zero, p) for p in self.ACCEPT_PARTS]

    def preimages(self, state, pl: PairLetter):
        """All states that step to `state` on `pl` (the step is injective on remainders)."""
        if pl.left == PAD or pl.right == PAD or pl.left.b != pl.right.b:
            return ()
        rems, part = state
        prev = []
        for r, p, x, y in zip(rems, self.blocks, pl.left.a, pl.right.a):
            r0 = _undo_division(r, x - y, p)
            if r0 is None or any(abs(c) > self.C for c in r0):
                return ()
            prev.append(r0)
        return [(tuple(prev), q) for q in _pair_parts_inverse(part, pl.left.b)]


def _undo_division(r: tuple[int, ...], inc: int, p: IntPoly) -> tuple[int, ...] | None:
    """Solve z*r0 + inc = r (mod p) for r0 of degree < d."""
    d = p.degree
    c = list(r)
    c[0] -= inc
    # z * r0 = c - top * p  for the unique top making the constant term vanish
    p0 = p.coeffs[0]
    if c[0] % p0:
        return None
    top = c[0] // p0
    v = [c[i] - top * p.coeffs[i] for i in range(d)] + [-top * p.coeffs[d]]
    # v = z * r0 ; and z^d coefficient of z*r0 is r0[d-1]
    r0 = v[1:]
    if v[0] != 0:
        return None
    return tuple(r0[:d])


def build_r_prime(setup: CanonicalSetup, n: int, C: int | None = None) -> WeightedFSA:
    """Pairs of equal-shape words of the non-strict language in the same class."""
    return reversal(RightToLeftDivision(setup, n, C))


def build_r(setup: CanonicalSetup, n: int, i: int, C: int | None = None) -> WeightedFSA:
    """Padded pairs of strict-language words in one class whose tail and head
    lengths differ by at most i.

    Realized as a lazily determinized union over the tail offset: a thread
    for offset D prepends |D| zero (., 2) letters to the shorter-tailed word,
    buffers the word that runs ahead, feeds exponent-aligned pairs to the
    equal-shape acceptor, and pads the shorter head with zero letters at the
    end.
    """
    base = build_r_prime(setup, n, C)
    k = setup.k
    zero = Letter((0,) * k, 2)
    letters = alphabet(k, n)
    alph = [PairLetter(x, y) for x in letters + [PAD] for y in letters + [PAD]
            if not (x == PAD and y == PAD)]

    def feed(sub, x, y):
        return base.delta(sub, PairLetter(x, y))

    def start_thread(D):
        # (acceptor state, pending left, pending right, lambda states, ended flags,
        #  offset, zero letters still owed to the shorter tail)
        return (base.start, (), (), "S", "S", False, False, D, abs(D))

    def advance(th, pl):
        sub, ql, qr, ll, lr, el, er, D, pre = th
        x, y = pl.left, pl.right
        if x != PAD:
            if el:
                return None
            ll = lambda_step(ll, x, True)
            if ll is None:
                return None
            ql = ql + (x,)
        else:
            el = True
        if y != PAD:
            if er:
                return None
            lr = lambda_step(lr, y, True)
            if lr is None:
                return None
            qr = qr + (y,)
        else:
            er = True
        # the leading |D| aligned pairs carry a zero letter on the shorter-tailed side
        while pre and ((D > 0 and ql) or (D < 0 and qr)):
            if D > 0:
                sub = feed(sub, ql[0], zero)
                ql = ql[1:]
            else:
                sub = feed(sub, zero, qr[0])
                qr = qr[1:]
            pre -= 1
            if sub is SINK:
                return None
        if not pre:
            while ql and qr:
                sub = feed(sub, ql[0], qr[0])
                ql, qr = ql[1:], qr[1:]
                if sub is SINK:
                    return None
        if len(ql) > i or len(qr) > i:
            return None
        return (sub, ql, qr, ll, lr, el, er, D, pre)

    def finish(th) -> bool:
        sub, ql, qr, ll, lr, el, er, D, pre = th
        if ll not in LAMBDA_ACCEPT or lr not in LAMBDA_ACCEPT or pre:
            return False
        for x in ql:
            sub = feed(sub, x, zero)
        for y in qr:
            sub = feed(sub, zero, y)
        return base.is_accepting(sub)

    start = frozenset(start_thread(D) for D in range(-i, i + 1))

    def step(S, pl):
        out = frozenset(t for t in (advance(th, pl) for th in S) if t is not None)
        return out or None

    return WeightedFSA(alph, start, step, lambda S: any(finish(th) for th in S),
                       lambda pl: pl.left.weight if pl.left != PAD else 0, "R")


# ----------------------------------------------------------------------------
# rational series

_z = Symbol("z")


@dataclass(frozen=True)
class RationalSeries:
    numerator: IntPoly
    denominator: IntPoly

    @classmethod
    def from_polys(cls, num: Poly, den: Poly) -> "RationalSeries":
        g = num.gcd(den)
        if not g.is_zero and g.degree() > 0:
            num, den = num.exquo(g), den.exquo(g)
        c0 = den.eval(0)
        if c0 == 0:
            raise ValueError("denominator vanishes at 0")
        # make the constant term of the denominator +1 when possible
        if c0 < 0:
            num, den = -num, -den
            c0 = -c0
        ncoef = [int(c) for c in reversed(num.all_coeffs())] if not num.is_zero else [0]
        dcoef = [int(c) for c in reversed(den.all_coeffs())]
        return cls(IntPoly(tuple(ncoef)), IntPoly(tuple(dcoef)))

    def coefficients(self, count: int) -> list[int]:
        """Taylor coefficients by exact series division."""
        num, den = self.numerator.coeffs, self.denominator.coeffs
        d0 = den[0]
        out = []
        for m in range(count):
            acc = num[m] if m < len(num) else 0
            for j in range(1, min(m, len(den) - 1) + 1):
                acc -= den[j] * out[m - j]
            if acc % d0:
                raise ValueError("series has non-integral coefficients")
            out.append(acc // d0)
        return out

    def recurrence_residuals(self, coeffs: Sequence[int], lo: int, hi: int) -> list[int]:
        """Residuals of sum_j den_j a_(m-j) - num_m for m in [lo, hi]."""
        num, den = self.numerator.coeffs, self.denominator.coeffs
        res = []
        for m in range(lo, hi + 1):
            acc = sum(den[j] * coeffs[m - j] for j in range(len(den)) if m - j >= 0)
            acc -= num[m] if m < len(num) else 0
            res.append(acc)
        return res

    def shift_down(self) -> "RationalSeries":
        """Divide by z; the numerator must vanish at 0."""
        if self.numerator.coeffs[0] != 0:
            raise ValueError("series has a nonzero constant term")
        c = self.numerator.coeffs[1:] or (0,)
        return RationalSeries(IntPoly(c), self.denominator)

    def over_one_minus_z(self) -> "RationalSeries":
        den = Poly(list(reversed(self.denominator.coeffs)), _z) * Poly(1 - _z, _z)
        num = Poly(list(reversed(self.numerator.coeffs)), _z)
        return RationalSeries.from_polys(num, den)

    def to_dict(self) -> dict:
        return {"numerator": list(self.numerator.coeffs),
                "denominator": list(self.denominator.coeffs)}


def count_by_weight(dfa: ExplicitDFA, max_weight: int) -> list[int]:
    """Number of accepted words of each weight, by dynamic programming.

    Weight-0 letters are allowed as long as they form no cycle.
    """
    out_edges = defaultdict(list)
    g0 = nx.DiGraph()
    g0.add_nodes_from(range(dfa.nstates))
    for a, _, w, b in dfa.edges:
        out_edges[a].append((w, b))
        if w == 0:
            g0.add_edge(a, b)
    try:
        order = list(nx.topological_sort(g0))
    except nx.NetworkXUnfeasible as exc:
        raise ValueError("automaton has a cycle of weight-0 letters") from exc
    layers = [defaultdict(int) for _ in range(max_weight + 1)]
    layers[0][dfa.start] = 1
    counts = [0] * (max_weight + 1)
    for wt in range(max_weight + 1):
        cur = layers[wt]
        for s in order:
            c = cur.get(s)
            if not c:
                continue
            if dfa.accept[s]:
                counts[wt] += c
            for w, b in out_edges[s]:
                if w == 0:
                    cur[b] += c
                elif wt + w <= max_weight:
                    layers[wt + w][b] += c
    return counts


def growth_series(fsa: WeightedFSA, cap: int = 200_000, check_terms: int = 30) -> RationalSeries:
    """Exact weighted growth series of an automaton's language.

    Generating functions F_s = [s accepting] + sum z^w F_t are solved one
    strongly connected component at a time, in reverse topological order,
    by exact elimination over Q(z).
    """
    dfa = fsa if isinstance(fsa, ExplicitDFA) else fsa.explore(cap)
    if dfa.nstates > cap:
        raise ResourceLimit(f"{dfa.nstates} states exceed cap {cap}", dfa.nstates)
    dfa = dfa.trim()
    if not any(dfa.accept):
        return RationalSeries(IntPoly((0,)), IntPoly((1,)))
    K = QQ.frac_field(_z)
    zK = K.convert(_z)
    out_edges = defaultdict(list)
    g = nx.DiGraph()
    g.add_nodes_from(range(dfa.nstates))
    for a, _, w, b in dfa.edges:
        out_edges[a].append((w, b))
        g.add_edge(a, b)
    cond = nx.condensation(g)
    F: dict[int, object] = {}
    for c in reversed(list(nx.topological_sort(cond))):
        members = sorted(cond.nodes[c]["members"])
        idx = {s: i for i, s in enumerate(members)}
        m = len(members)
        A = [[K.zero] * m for _ in range(m)]
        rhs = [[K.one if dfa.accept[s] else K.zero] for s in members]
        for i, s in enumerate(members):
            A[i][i] = K.one
            for w, t in out_edges[s]:
                term = zK ** w
                if t in idx:
                    A[i][idx[t]] -= term
                else:
                    rhs[i][0] += term * F[t]
        if m == 1:
            F[members[0]] = rhs[0][0] / A[0][0]
        else:
            sol = DomainMatrix(A, (m, m), K).lu_solve(DomainMatrix(rhs, (m, 1), K))
            for i, s in enumerate(members):
                F[s] = sol[i, 0].element
    num, den = fraction(cancel(K.to_sympy(F[dfa.start])))
    _, num = Poly(num, _z).clear_denoms(convert=True)
    _, den = Poly(den, _z).clear_denoms(convert=True)
    series = RationalSeries.from_polys(num, den)
    if check_terms:
        direct = count_by_weight(dfa, check_terms - 1)
        if direct != series.coefficients(check_terms):
            raise ArithmeticError("series does not match direct path counts")
    return series
