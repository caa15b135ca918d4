"""Spectral checks, factorization and block companion form for A in SL(N, Z).

Exact work (characteristic polynomials, kernels, factorization) goes through
sympy; the eigenvalue margins are plain floating point numpy.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import reduce
from pathlib import Path
from typing import Sequence

import numpy as np
import sympy

from .errors import (DegenerateVector, HypothesisFailure, MarginTooSmall, NotSquareFree, ParseError,
                     PowerSearchExhausted)
from .polynomial_core import IntPoly

__all__ = [
    "IntMatrix", "SpectralReport", "CanonicalSetup", "char_poly", "spectral_classify",
    "factor_over_rationals", "companion", "block_rcf", "select_power", "condition_star",
    "parse_matrix", "read_matrix", "prepare",
]

_z = sympy.Symbol("z")


@dataclass(frozen=True)
class IntMatrix:
    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(int(x) for x in r) for r in self.rows)
        if any(len(r) != len(rows) for r in rows):
            raise ValueError("matrix must be square")
        object.__setattr__(self, "rows", rows)

    @classmethod
    def from_sympy(cls, m: sympy.Matrix) -> "IntMatrix":
        return cls(tuple(tuple(int(m[i, j]) for j in range(m.cols)) for i in range(m.rows)))

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    @property
    def n(self) -> int:
        return len(self.rows)

    def to_sympy(self) -> sympy.Matrix:
        return sympy.Matrix(self.rows)

    def to_numpy(self) -> np.ndarray:
        return np.array(self.rows, dtype=float)

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        cols = list(zip(*other.rows))
        return IntMatrix(tuple(tuple(sum(a * b for a, b in zip(r, c)) for c in cols)
                               for r in self.rows))

    def apply(self, v: Sequence[int]) -> tuple[int, ...]:
        return tuple(sum(a * b for a, b in zip(r, v)) for r in self.rows)

    def det(self) -> int:
        return int(self.to_sympy().det(method="bareiss"))

    def inverse(self) -> "IntMatrix":
        if abs(self.det()) != 1:
            raise ValueError("matrix is not unimodular")
        return IntMatrix.from_sympy(self.to_sympy().inv(method="ADJ"))

    def power(self, e: int) -> "IntMatrix":
        if e < 0:
            return self.inverse().power(-e)
        out, base = IntMatrix.identity(self.n), self
        while e:
            if e & 1:
                out = out @ base
            base = base @ base
            e >>= 1
        return out


@dataclass(frozen=True)
class SpectralReport:
    eigenvalues: list[complex]
    moduli: list[float]
    distinct: bool
    off_unit_circle: bool
    margin: float
    circle_margin: float
    separation: float


@dataclass(frozen=True)
class CanonicalSetup:
    power: int
    blocks: list[IntPoly]
    basis_change: IntMatrix
    block_matrix: IntMatrix
    M_per_block: list[int]
    M: int
    k: int
    N: int
    source: IntMatrix | None = None
    offsets: list[int] = field(default_factory=list)

    @property
    def degrees(self) -> list[int]:
        return [p.degree for p in self.blocks]


def _to_sympy_poly(p: IntPoly) -> sympy.Poly:
    return sympy.Poly(list(reversed(p.coeffs)), _z, domain="ZZ")


def _from_sympy_poly(p: sympy.Poly) -> IntPoly:
    return IntPoly(tuple(int(c) for c in reversed(p.all_coeffs())))


def char_poly(A: IntMatrix) -> IntPoly:
    """Monic characteristic polynomial via the division-free Berkowitz method."""
    cp = A.to_sympy().charpoly(_z)
    return IntPoly(tuple(int(c) for c in reversed(cp.all_coeffs())))


def spectral_classify(A: IntMatrix, tol: float = 1e-9) -> SpectralReport:
    eig = np.linalg.eigvals(A.to_numpy())
    moduli = np.abs(eig)
    circle = float(np.min(np.abs(moduli - 1.0)))
    if len(eig) > 1:
        sep = float(min(abs(a - b) for a, b in itertools.combinations(eig, 2)))
    else:
        sep = math.inf
    margin = min(circle, sep)
    report = SpectralReport(
        eigenvalues=[complex(x) for x in eig], moduli=[float(x) for x in moduli],
        distinct=sep >= tol, off_unit_circle=circle >= tol, margin=margin,
        circle_margin=circle, separation=sep)
    if circle < tol:
        raise MarginTooSmall(f"an eigenvalue lies within {tol:g} of the unit circle "
                             f"(distance {circle:.3g})")
    if sep < tol:
        raise MarginTooSmall(f"eigenvalues are not separated by {tol:g} (gap {sep:.3g})")
    return report


def factor_over_rationals(p: IntPoly) -> list[IntPoly]:
    sp = _to_sympy_poly(p)
    if sympy.gcd(sp, sp.diff(_z)).degree() > 0:
        raise NotSquareFree(f"{p} has a repeated factor")
    _, factors = sp.factor_list()
    out = []
    for f, mult in factors:
        q = _from_sympy_poly(f)
        if q.lead < 0:
            q = IntPoly(tuple(-c for c in q.coeffs))
        out.extend([q] * mult)
    # deterministic order: by degree, then coefficients
    return sorted(out, key=lambda q: (q.degree, q.norm_inf(), q.coeffs))


def condition_star(p: IntPoly) -> bool:
    """One coefficient strictly outweighs all the others combined."""
    return 2 * p.norm_inf() > p.norm_one()


def companion(p: IntPoly) -> IntMatrix:
    """Companion matrix: ones below the diagonal, last column -p_0..-p_{d-1}."""
    d = p.degree
    if p.lead != 1:
        raise ValueError("companion form needs a monic polynomial")
    rows = [[0] * d for _ in range(d)]
    for i in range(1, d):
        rows[i][i - 1] = 1
    for i in range(d):
        rows[i][d - 1] = -p.coeffs[i]
    return IntMatrix(tuple(map(tuple, rows)))


def _block_diag(mats: list[IntMatrix]) -> IntMatrix:
    n = sum(m.n for m in mats)
    rows = [[0] * n for _ in range(n)]
    off = 0
    for m in mats:
        for i, r in enumerate(m.rows):
            rows[off + i][off:off + m.n] = r
        off += m.n
    return IntMatrix(tuple(map(tuple, rows)))


def _eval_at(p: IntPoly, A: sympy.Matrix) -> sympy.Matrix:
    out = sympy.zeros(A.rows, A.cols)
    for c in reversed(p.coeffs):
        out = out * A + c * sympy.eye(A.rows)
    return out


def _integral(v: sympy.Matrix) -> sympy.Matrix:
    den = reduce(sympy.ilcm, [sympy.fraction(x)[1] for x in v], 1)
    w = v * den
    g = reduce(sympy.igcd, [int(x) for x in w], 0) or 1
    return w / g


def _cyclic_vector(A: sympy.Matrix, p: IntPoly) -> sympy.Matrix:
    kernel = _eval_at(p, A).nullspace()
    d = p.degree
    if len(kernel) != d:
        raise DegenerateVector(f"invariant subspace of {p} has dimension {len(kernel)}, not {d}")
    basis = [_integral(v) for v in kernel]
    # try basis vectors first, then small integer combinations
    candidates = list(basis)
    for coeffs in itertools.product(range(-1, 2), repeat=len(basis)):
        if sum(map(abs, coeffs)) > 1:
            candidates.append(_integral(sum((c * b for c, b in zip(coeffs, basis)),
                                            sympy.zeros(A.rows, 1))))
    for v in candidates:
        if not any(v):
            continue
        chain = [v]
        for _ in range(d - 1):
            chain.append(A * chain[-1])
        if sympy.Matrix.hstack(*chain).rank() == d:
            return v
    raise DegenerateVector(f"no cyclic vector found for {p}")


def block_rcf(A: IntMatrix, factors: list[IntPoly], power: int = 1) -> CanonicalSetup:
    """Integral change of basis to companion blocks, one per factor.

    The basis is v_i, A v_i, ..., A^(d_i - 1) v_i for an integral v_i in the
    kernel of p_i(A). Its inverse is scaled to an integer matrix Q, and
    the returned block matrix C satisfies C Q = Q A.
    """
    S = A.to_sympy()
    cols = []
    for p in factors:
        v = _cyclic_vector(S, p)
        for _ in range(p.degree):
            cols.append(v)
            v = S * v
    P = sympy.Matrix.hstack(*cols)
    Pinv = P.inv()
    den = reduce(sympy.ilcm, [sympy.fraction(x)[1] for x in Pinv], 1)
    Q = IntMatrix.from_sympy(Pinv * den)
    C = _block_diag([companion(p) for p in factors])
    if C @ Q != Q @ A:
        raise DegenerateVector("conjugation identity failed")
    Ms = [p.norm_inf() for p in factors]
    offsets = list(itertools.accumulate([0] + [p.degree for p in factors]))[:-1]
    return CanonicalSetup(power=power, blocks=list(factors), basis_change=Q, block_matrix=C,
                          M_per_block=Ms, M=max(Ms), k=len(factors), N=A.n,
                          offsets=offsets)


def select_power(A: IntMatrix, max_power: int = 12) -> CanonicalSetup:
    """Smallest power whose characteristic polynomial is square-free with all
    factors satisfying the dominant-coefficient condition."""
    B = IntMatrix.identity(A.n)
    for n in range(1, max_power + 1):
        B = B @ A
        cp = char_poly(B)
        try:
            factors = factor_over_rationals(cp)
        except NotSquareFree:
            continue
        if all(p.degree >= 2 and condition_star(p) for p in factors):
            setup = block_rcf(B, factors, power=n)
            return CanonicalSetup(**{**setup.__dict__, "source": A})
    raise PowerSearchExhausted(f"no power up to {max_power} satisfies the condition; "
                               "raise --max-power")


def prepare(A: IntMatrix, max_power: int = 12, tol: float = 1e-9) -> tuple[SpectralReport, CanonicalSetup]:
    if A.det() != 1:
        raise HypothesisFailure(f"determinant is {A.det()}, expected 1")
    report = spectral_classify(A, tol)
    return report, select_power(A, max_power)


def parse_matrix(text: str) -> IntMatrix:
    tokens = [line.split() for line in text.splitlines() if line.strip()]
    try:
        if not tokens or len(tokens[0]) != 1:
            raise ValueError("first line must hold the dimension")
        n = int(tokens[0][0])
        rows = tokens[1:]
        if n <= 0 or len(rows) != n or any(len(r) != n for r in rows):
            raise ValueError(f"expected {n} rows of {n} integers")
        return IntMatrix(tuple(tuple(int(x) for x in r) for r in rows))
    except ValueError as exc:
        raise ParseError(f"malformed matrix: {exc}") from exc


def read_matrix(path: str | Path) -> IntMatrix:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    return parse_matrix(text)
