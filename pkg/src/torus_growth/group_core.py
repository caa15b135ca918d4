"""Exact arithmetic in G = Z^N x_A Z and the breadth-first growth oracle.

Elements are pairs (v, h) with (v1, h1)(v2, h2) = (v1 + A^h1 v2, h1 + h2).
Everything is integer; A^h is memoized per matrix, negative powers use the
exact inverse (det A = 1).
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence, Union

from .errors import ResourceLimit
from .matrix_algebra import CanonicalSetup, IntMatrix
from .polynomial_core import (LaurentPoly, LaurentTuple, head_len, norm_one, tail_len,
                              tuple_divides)

__all__ = [
    "GroupElement", "SPoint", "GeneratorSet", "T_GEN", "identity", "g_mul", "g_inv",
    "parse_word", "word_to_type_height", "evaluate_word", "s_point_to_group", "s_equiv",
    "min_word_length", "generator_set", "bfs_spheres", "bfs_distances", "spheres_csv",
]

T_GEN = -1  # generator index used for t; module generators are 0..k-1

Action = Union[IntMatrix, CanonicalSetup]


@dataclass(frozen=True)
class GroupElement:
    v: tuple[int, ...]
    h: int

    def __post_init__(self):
        object.__setattr__(self, "v", tuple(int(x) for x in self.v))
        object.__setattr__(self, "h", int(self.h))


@dataclass(frozen=True)
class SPoint:
    """An unreduced type together with a height."""

    t: LaurentTuple
    h: int

    @property
    def weight(self) -> int:
        return min_word_length(self) + 1


@dataclass(frozen=True)
class GeneratorSet:
    module_gens: tuple[GroupElement, ...]
    t_gen: GroupElement

    def symmetric(self) -> list[GroupElement]:
        out = []
        for g in self.module_gens:
            out.append(g)
            out.append(GroupElement(tuple(-x for x in g.v), 0))
        out.append(self.t_gen)
        out.append(GroupElement(self.t_gen.v, -self.t_gen.h))
        return out


def _matrix(action: Action) -> IntMatrix:
    return action.block_matrix if isinstance(action, CanonicalSetup) else action


@lru_cache(maxsize=64)
def _power_cache(A: IntMatrix) -> "_Powers":
    return _Powers(A)


class _Powers:
    def __init__(self, A: IntMatrix):
        self.pos = [IntMatrix.identity(A.n), A]
        self.neg = [IntMatrix.identity(A.n), A.inverse()]

    def __call__(self, h: int) -> IntMatrix:
        table = self.pos if h >= 0 else self.neg
        h = abs(h)
        while len(table) <= h:
            table.append(table[-1] @ table[1])
        return table[h]


def power(action: Action, h: int) -> IntMatrix:
    return _power_cache(_matrix(action))(h)


def identity(N: int) -> GroupElement:
    return GroupElement((0,) * N, 0)


def g_mul(a: GroupElement, b: GroupElement, action: Action) -> GroupElement:
    Av = power(action, a.h).apply(b.v)
    return GroupElement(tuple(x + y for x, y in zip(a.v, Av)), a.h + b.h)


def g_inv(a: GroupElement, action: Action) -> GroupElement:
    w = power(action, -a.h).apply(a.v)
    return GroupElement(tuple(-x for x in w), -a.h)


def parse_word(text: str) -> list[tuple[int, int]]:
    """Parse "t a1 t^-1 a2^-1" into (generator, sign) pairs; t has index T_GEN."""
    out = []
    for tok in text.split():
        name, _, exp = tok.partition("^")
        sign = -1 if exp == "-1" else 1
        if exp not in ("", "1", "-1"):
            raise ValueError(f"bad exponent in {tok!r}")
        if name == "t":
            out.append((T_GEN, sign))
        elif name.startswith("a") and name[1:].isdigit() and int(name[1:]) >= 1:
            out.append((int(name[1:]) - 1, sign))
        else:
            raise ValueError(f"unknown generator {tok!r}")
    return out


def word_to_type_height(word: Sequence[tuple[int, int]], k: int) -> SPoint:
    comps: list[dict[int, int]] = [{} for _ in range(k)]
    h = 0
    for gen, sign in word:
        if gen == T_GEN:
            h += sign
        else:
            comps[gen][h] = comps[gen].get(h, 0) + sign
    return SPoint(LaurentTuple(tuple(LaurentPoly(c) for c in comps)), h)


def generator_set(setup: CanonicalSetup) -> GeneratorSet:
    gens = []
    for off in setup.offsets:
        v = [0] * setup.N
        v[off] = 1
        gens.append(GroupElement(tuple(v), 0))
    return GeneratorSet(tuple(gens), GroupElement((0,) * setup.N, 1))


def evaluate_word(word: Sequence[tuple[int, int]], setup: CanonicalSetup) -> GroupElement:
    gens = generator_set(setup)
    g = identity(setup.N)
    for gen, sign in word:
        if gen == T_GEN:
            x = GroupElement((0,) * setup.N, sign)
        else:
            x = GroupElement(tuple(sign * c for c in gens.module_gens[gen].v), 0)
        g = g_mul(g, x, setup)
    return g


def s_point_to_group(p: SPoint, setup: CanonicalSetup) -> GroupElement:
    v = [0] * setup.N
    for j, poly in enumerate(p.t):
        off = setup.offsets[j]
        for e, c in poly.items():
            col = [row[off] for row in power(setup, e).rows]
            for i, x in enumerate(col):
                v[i] += c * x
    return GroupElement(tuple(v), p.h)


def s_equiv(p1: SPoint, p2: SPoint, blocks: Iterable) -> bool:
    if p1.h != p2.h:
        return False
    return tuple_divides(list(blocks), p1.t - p2.t) is not None


def min_word_length(p: SPoint) -> int:
    return 2 * tail_len(p.t, p.h) + 2 * head_len(p.t, p.h) + abs(p.h) + norm_one(p.t)


def _neighbours(setup: CanonicalSetup):
    """Right multiplication by each symmetric generator, as closures on (v, h)."""
    cols = {}

    def column(off: int, h: int) -> tuple[int, ...]:
        key = (off, h)
        if key not in cols:
            cols[key] = tuple(row[off] for row in power(setup, h).rows)
        return cols[key]

    def step(v: tuple[int, ...], h: int):
        for off in setup.offsets:
            c = column(off, h)
            yield tuple(a + b for a, b in zip(v, c)), h
            yield tuple(a - b for a, b in zip(v, c)), h
        yield v, h + 1
        yield v, h - 1

    return step


def bfs_distances(setup: CanonicalSetup, radius: int, cap: int = 5_000_000) -> dict[tuple, int]:
    """Word distance from the identity for every element within the radius.

    Keys are (v, h) tuples. Raises ResourceLimit if the ball exceeds cap.
    """
    step = _neighbours(setup)
    start = ((0,) * setup.N, 0)
    dist = {start: 0}
    frontier = [start]
    for r in range(1, radius + 1):
        nxt = []
        for v, h in frontier:
            for u in step(v, h):
                if u not in dist:
                    dist[u] = r
                    nxt.append(u)
        if len(dist) > cap:
            raise ResourceLimit(f"ball of radius {r} has {len(dist)} elements, cap {cap}",
                                len(dist))
        frontier = nxt
    return dist


def bfs_spheres(setup: CanonicalSetup, radius: int, cap: int = 5_000_000) -> list[int]:
    counts = [0] * (radius + 1)
    for d in bfs_distances(setup, radius, cap).values():
        counts[d] += 1
    return counts


def spheres_csv(spheres: Sequence[int], header: str | None = None) -> str:
    buf = io.StringIO()
    if header:
        buf.write(header)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "sphere", "ball"])
    ball = 0
    for n, s in enumerate(spheres):
        ball += s
        w.writerow([n, s, ball])
    return buf.getvalue()
