"""Exact integer Laurent polynomials and k-tuples of them.

Coefficients are Python ints, so nothing ever overflows. A LaurentPoly is
hashable and immutable; arithmetic returns new objects with zero
coefficients dropped.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

__all__ = [
    "LaurentPoly", "LaurentTuple", "IntPoly", "PartitionAtHeight",
    "poly_arith", "norm_inf", "norm_one", "partition_at_height",
    "tail_len", "head_len", "divergence", "tuple_divergence",
    "tuple_divides", "division_step",
]


class LaurentPoly:
    """An element of Z[z, 1/z] stored as a sparse exponent -> coefficient map."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, coeffs: Mapping[int, int] | None = None):
        terms = {}
        if coeffs:
            for e, c in coeffs.items():
                c = int(c)
                if c:
                    terms[int(e)] = c
        self._terms = dict(sorted(terms.items()))
        self._hash = None

    @classmethod
    def from_dense(cls, coeffs: Sequence[int], low: int = 0) -> "LaurentPoly":
        return cls({low + i: c for i, c in enumerate(coeffs)})

    @classmethod
    def monomial(cls, exponent: int, coeff: int = 1) -> "LaurentPoly":
        return cls({exponent: coeff})

    @property
    def terms(self) -> dict[int, int]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def support(self) -> list[int]:
        return list(self._terms)

    def coeff(self, e: int) -> int:
        return self._terms.get(e, 0)

    @property
    def low(self) -> int | None:
        return next(iter(self._terms), None)

    @property
    def high(self) -> int | None:
        return next(reversed(self._terms), None) if self._terms else None

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self):
        return bool(self._terms)

    def __eq__(self, other):
        if isinstance(other, int):
            other = LaurentPoly({0: other})
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(tuple(self._terms.items()))
        return self._hash

    def _coerce(self, other):
        if isinstance(other, LaurentPoly):
            return other
        if isinstance(other, int):
            return LaurentPoly({0: other})
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for e, c in other._terms.items():
            out[e] = out.get(e, 0) + c
        return LaurentPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly({e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: dict[int, int] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                out[e1 + e2] = out.get(e1 + e2, 0) + c1 * c2
        return LaurentPoly(out)

    __rmul__ = __mul__

    def shift(self, m: int) -> "LaurentPoly":
        """Multiply by z**m."""
        return LaurentPoly({e + m: c for e, c in self._terms.items()})

    def mirror(self) -> "LaurentPoly":
        """Substitute z -> 1/z."""
        return LaurentPoly({-e: c for e, c in self._terms.items()})

    def restrict(self, lo: float, hi: float) -> "LaurentPoly":
        return LaurentPoly({e: c for e, c in self._terms.items() if lo <= e <= hi})

    def __call__(self, x):
        return sum((c * x ** e for e, c in self._terms.items()), 0)

    def __repr__(self):
        if not self._terms:
            return "LaurentPoly(0)"
        return f"LaurentPoly({self._terms})"

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for e, c in reversed(self._terms.items()):
            mag = abs(c)
            if e == 0:
                body = str(mag)
            else:
                base = "z" if e == 1 else f"z^{e}"
                body = base if mag == 1 else f"{mag}{base}"
            parts.append(("- " if c < 0 else "+ ") + body)
        s = " ".join(parts)
        return s[2:] if s.startswith("+ ") else "-" + s[2:]


@dataclass(frozen=True)
class IntPoly:
    """Dense integer polynomial, lowest degree first."""

    coeffs: tuple[int, ...]

    def __post_init__(self):
        c = [int(x) for x in self.coeffs]
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c) if c else (0,))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1 if any(self.coeffs) else -1

    @property
    def lead(self) -> int:
        return self.coeffs[-1]

    def to_laurent(self) -> LaurentPoly:
        return LaurentPoly.from_dense(self.coeffs)

    def reciprocal(self) -> "IntPoly":
        return IntPoly(tuple(reversed(self.coeffs)))

    def norm_inf(self) -> int:
        return max(abs(c) for c in self.coeffs)

    def norm_one(self) -> int:
        return sum(abs(c) for c in self.coeffs)

    def __str__(self):
        return str(self.to_laurent())


@dataclass(frozen=True)
class LaurentTuple:
    """A k-tuple of Laurent polynomials, one per irreducible block."""

    components: tuple[LaurentPoly, ...]

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(
            c if isinstance(c, LaurentPoly) else LaurentPoly(c) for c in self.components))

    @classmethod
    def zero(cls, k: int) -> "LaurentTuple":
        return cls(tuple(LaurentPoly() for _ in range(k)))

    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    def __getitem__(self, i):
        return self.components[i]

    def __add__(self, other: "LaurentTuple") -> "LaurentTuple":
        _same_k(self, other)
        return LaurentTuple(tuple(a + b for a, b in zip(self, other)))

    def __sub__(self, other: "LaurentTuple") -> "LaurentTuple":
        _same_k(self, other)
        return LaurentTuple(tuple(a - b for a, b in zip(self, other)))

    def __neg__(self):
        return LaurentTuple(tuple(-a for a in self))

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def __str__(self):
        return "(" + ", ".join(str(c) for c in self.components) + ")"


def _same_k(a: LaurentTuple, b: LaurentTuple) -> None:
    if len(a) != len(b):
        raise ValueError(f"tuple lengths differ: {len(a)} vs {len(b)}")


@dataclass(frozen=True)
class PartitionAtHeight:
    tail: LaurentPoly
    center: LaurentPoly
    head: LaurentPoly
    height: int


def poly_arith(p: LaurentPoly, q: LaurentPoly, op: str) -> LaurentPoly:
    if op == "add":
        return p + q
    if op == "sub":
        return p - q
    if op == "mul":
        return p * q
    raise ValueError(f"unknown op {op!r}")


def norm_inf(p: LaurentPoly | LaurentTuple) -> int:
    if isinstance(p, LaurentTuple):
        return max((norm_inf(c) for c in p), default=0)
    return max((abs(c) for _, c in p.items()), default=0)


def norm_one(p: LaurentPoly | LaurentTuple) -> int:
    if isinstance(p, LaurentTuple):
        return sum(norm_one(c) for c in p)
    return sum(abs(c) for _, c in p.items())


def partition_at_height(f: LaurentPoly, h: int) -> PartitionAtHeight:
    """Split f into tail, center and head relative to the height h.

    For h >= 0 the center is the exponent window [0, h]; for h < 0 the
    picture is mirrored and the window becomes [h, 0].
    """
    lo, hi = (0, h) if h >= 0 else (h, 0)
    inf = float("inf")
    return PartitionAtHeight(
        tail=f.restrict(-inf, lo - 1),
        center=f.restrict(lo, hi),
        head=f.restrict(hi + 1, inf),
        height=h,
    )


def tail_len(f: LaurentPoly | LaurentTuple, h: int) -> int:
    if isinstance(f, LaurentTuple):
        return max((tail_len(c, h) for c in f), default=0)
    if h >= 0:
        return max((-e for e in f.support() if e <= 0), default=0)
    return max((-e + h for e in f.support() if e <= h), default=0)


def head_len(f: LaurentPoly | LaurentTuple, h: int) -> int:
    if isinstance(f, LaurentTuple):
        return max((head_len(c, h) for c in f), default=0)
    if h >= 0:
        return max((e - h for e in f.support() if e >= h), default=0)
    return max((e for e in f.support() if e >= 0), default=0)


def divergence(f1: LaurentPoly, f2: LaurentPoly) -> int:
    """Largest running excess of |coefficients of f1| over those of f2.

    The running sum starts at 0 below both supports, so the result is
    never negative.
    """
    exps = sorted(set(f1.support()) | set(f2.support()))
    best = run = 0
    for e in exps:
        run += abs(f1.coeff(e)) - abs(f2.coeff(e))
        best = max(best, run)
    return best


def tuple_divergence(t: LaurentTuple, s: LaurentTuple) -> int:
    _same_k(t, s)
    return sum(abs(divergence(a, b)) for a, b in zip(t, s))


def _dense(f: LaurentPoly) -> tuple[int, list[int]]:
    lo, hi = f.low, f.high
    return lo, [f.coeff(e) for e in range(lo, hi + 1)]


def _exact_quotient(d: LaurentPoly, p: LaurentPoly) -> LaurentPoly | None:
    if d.is_zero():
        return LaurentPoly()
    dlo, num = _dense(d)
    plo, den = _dense(p)
    lead = den[-1]
    quot = [0] * max(len(num) - len(den) + 1, 0)
    for i in range(len(quot) - 1, -1, -1):
        top = num[i + len(den) - 1]
        if top % lead:
            return None
        c = top // lead
        quot[i] = c
        if c:
            for j, pc in enumerate(den):
                num[i + j] -= c * pc
    if any(num):
        return None
    return LaurentPoly.from_dense(quot, dlo - plo)


def tuple_divides(p: LaurentTuple | Iterable, d: LaurentTuple) -> LaurentTuple | None:
    """Return q with q*p = d componentwise, or None when some p_i does not divide d_i."""
    comps = [x.to_laurent() if isinstance(x, IntPoly) else x for x in p]
    if len(comps) != len(d):
        raise ValueError("tuple lengths differ")
    out = []
    for pi, di in zip(comps, d):
        if pi.is_zero():
            raise ValueError("division by the zero polynomial")
        q = _exact_quotient(di, pi)
        if q is None:
            return None
        out.append(q)
    return LaurentTuple(tuple(out))


def division_step(r: LaurentPoly, incoming: int, p: IntPoly) -> LaurentPoly:
    """One Horner step of remainder tracking: z*r + incoming, reduced mod p.

    Requires the leading coefficient of p to be a unit so the reduction
    stays integral.
    """
    d = p.degree
    if p.lead not in (1, -1):
        raise ValueError("leading coefficient must be +-1")
    out = r.shift(1) + incoming
    top = out.coeff(d)
    if top:
        out = out - p.to_laurent() * (top * p.lead)
    return out
