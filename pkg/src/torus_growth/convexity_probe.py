"""Numerical side of the almost-convexity question.

The absolute Jordan form and its one-parameter subgroups, the isometric
action of G on R^n x R, the projection estimate for products, the closing
divergence estimate, and an exact search for sphere pairs that are close
in the Cayley graph but far apart inside the ball.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
import sympy
from numba import njit

from .errors import ComponentVanishes, NumericalFailure, RelationResidual, ThresholdNotMet
from .group_core import GroupElement, T_GEN, _neighbours, bfs_distances, g_inv, g_mul
from .matrix_algebra import CanonicalSetup, IntMatrix

__all__ = [
    "JordanBlock", "AbsJordan", "IsometryElement", "LatticeEmbedding", "ConvexityReport",
    "abs_jordan", "one_param", "projection", "equivariance_residual", "lemma72_bound",
    "lattice_embed", "sigma_tau",
    "divergence_bracket", "divergence_estimate", "ac2_probe", "ac2_probe_z2", "report_csv",
    "divergence_sweep_json",
]


# ----------------------------------------------------------------------------
# absolute Jordan form

@dataclass(frozen=True)
class JordanBlock:
    """Real Jordan block of an eigenvalue of modulus r and angle theta.

    Real blocks (theta = 0) have size m and dimension m; rotation blocks
    have dimension 2m and carry 2x2 rotation entries on the diagonal.
    """

    size: int
    modulus: float
    angle: float = 0.0
    is_complex: bool = False

    @property
    def dim(self) -> int:
        return 2 * self.size if self.is_complex else self.size

    def matrix(self) -> np.ndarray:
        return one_param(self, 1.0)


@dataclass
class AbsJordan:
    blocks: list[JordanBlock]
    conjugator: np.ndarray
    sign_word: tuple[int, ...]
    residual: float

    @property
    def offsets(self) -> list[int]:
        out, o = [], 0
        for b in self.blocks:
            out.append(o)
            o += b.dim
        return out

    def flip_matrix(self, flips=None) -> np.ndarray:
        flips = self.sign_word if flips is None else flips
        diag = np.ones(sum(b.dim for b in self.blocks))
        for i in flips:
            o = self.offsets[i]
            diag[o:o + self.blocks[i].dim] = -1.0
        return np.diag(diag)

    def J(self, t: float = 1.0) -> np.ndarray:
        """J(A)^t, block diagonal."""
        n = sum(b.dim for b in self.blocks)
        out = np.zeros((n, n))
        for b, o in zip(self.blocks, self.offsets):
            out[o:o + b.dim, o:o + b.dim] = one_param(b, t)
        return out


def _rot(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def _chains_exact(A: IntMatrix):
    """Real Jordan chains for a matrix with only real eigenvalues, via sympy."""
    P, J = A.to_sympy().jordan_form()
    if any(abs(complex(sympy.N(J[i, i])).imag) > 1e-12 for i in range(J.rows)):
        raise NumericalFailure("defective complex eigenvalues are not supported")
    P = np.array(P.evalf(30).tolist(), dtype=float)
    J = np.array(J.evalf(30).tolist(), dtype=float)
    chains, i, n = [], 0, J.shape[0]
    while i < n:
        j = i
        while j + 1 < n and abs(J[j, j + 1] - 1) < 1e-9:
            j += 1
        chains.append((J[i, i], P[:, i:j + 1]))
        i = j + 1
    return chains


def abs_jordan(A: IntMatrix, tol: float = 1e-9) -> AbsJordan:
    """Real block form with negative blocks paired into angle-pi rotations where
    possible and the rest absorbed into sign flips, so that
    conjugator^-1 A conjugator = S J(A)."""
    M = A.to_numpy()
    n = M.shape[0]
    vals, vecs = np.linalg.eig(M)
    defective = np.linalg.matrix_rank(vecs, tol=1e-7) < n
    reals, cplx = [], []
    if defective:
        reals = _chains_exact(A)
    else:
        for lam, v in zip(vals, vecs.T):
            if abs(lam.imag) <= 1e-9 * max(1.0, abs(lam)):
                w = np.real(v)
                reals.append((float(lam.real), (w / np.linalg.norm(w))[:, None]))
            elif lam.imag > 0:
                cplx.append((complex(lam), v))
    blocks, cols, flips = [], [], []
    negs = [(lam, c) for lam, c in reals if lam < 0]
    for lam, c in reals:
        if lam > 0:
            blocks.append(JordanBlock(c.shape[1], float(lam)))
            cols.append(c)
    # pair negative blocks of equal size and modulus into rotations by pi
    used = [False] * len(negs)
    for a in range(len(negs)):
        if used[a]:
            continue
        la, ca = negs[a]
        partner = next((b for b in range(a + 1, len(negs)) if not used[b]
                        and abs(negs[b][0] - la) <= 1e-7 * max(1, abs(la))
                        and negs[b][1].shape[1] == ca.shape[1]), None)
        if partner is None:
            used[a] = True
            m = ca.shape[1]
            # -[[r,1],[0,r]] is conjugate to [[-r,1],[0,-r]] via alternating signs
            cols.append(ca * np.array([(-1) ** i for i in range(m)]))
            flips.append(len(blocks))
            blocks.append(JordanBlock(m, float(-la)))
            continue
        used[a] = used[partner] = True
        cb = negs[partner][1]
        inter = np.empty((n, 2 * ca.shape[1]))
        inter[:, 0::2] = ca
        inter[:, 1::2] = cb
        cols.append(inter)
        blocks.append(JordanBlock(ca.shape[1], float(-la), math.pi, True))
    for lam, v in cplx:
        x, y = np.real(v), np.imag(v)
        cols.append(np.stack([x, -y], axis=1))
        blocks.append(JordanBlock(1, abs(lam), float(np.angle(lam)), True))
    P = np.concatenate(cols, axis=1)
    aj = AbsJordan(blocks, P, tuple(flips), 0.0)
    target = aj.flip_matrix() @ aj.J(1.0)
    res = float(np.max(np.abs(np.linalg.solve(P, M @ P) - target)))
    aj.residual = res
    if not res <= max(tol, 1e-9) * max(1.0, float(np.max(np.abs(M)))) * 1e3:
        raise NumericalFailure(f"conjugator residual {res:.3g} exceeds tolerance")
    return aj


# ----------------------------------------------------------------------------
# one-parameter subgroups

def _nilpotent_part(block: JordanBlock) -> np.ndarray:
    """L = log(I + D^-1 N) for block = D + N, as a finite series."""
    m, d = block.size, (2 if block.is_complex else 1)
    dim = m * d
    X = np.zeros((dim, dim))
    Dinv = (1.0 / block.modulus) * (_rot(-block.angle) if block.is_complex else np.eye(1))
    for i in range(m - 1):
        X[i * d:(i + 1) * d, (i + 1) * d:(i + 2) * d] = Dinv
    L = np.zeros_like(X)
    Xp = np.eye(dim)
    for j in range(1, m):
        Xp = Xp @ X
        L += ((-1) ** (j + 1) / j) * Xp
    return L


def one_param(block: JordanBlock, t: float) -> np.ndarray:
    """B(t) = exp(t log B) for a block with positive modulus."""
    if block.modulus <= 0:
        raise ValueError("block modulus must be positive")
    m, d = block.size, (2 if block.is_complex else 1)
    diag = block.modulus ** t * (_rot(block.angle * t) if block.is_complex else np.eye(1))
    D = np.kron(np.eye(m), diag)
    L = t * _nilpotent_part(block)
    E = np.eye(m * d)
    term = np.eye(m * d)
    for j in range(1, m):
        term = term @ L / j
        E = E + term
    return D @ E


def projection(block: JordanBlock, v: np.ndarray) -> np.ndarray:
    """Projection onto the last basis vector (or last pair) of the block."""
    return np.asarray(v)[-2:] if block.is_complex else np.asarray(v)[-1:]


def equivariance_residual(block: JordanBlock, t: float, v) -> float:
    """|pi(B(t) v) - |lambda|^t R(t theta) pi(v)|: the projection sees only the
    diagonal part of the block."""
    v = np.asarray(v, dtype=float)
    diag = block.modulus ** t * (_rot(block.angle * t) if block.is_complex else np.eye(1))
    return float(np.linalg.norm(projection(block, one_param(block, t) @ v)
                                - diag @ projection(block, v)))


def lemma72_bound(vectors, times, block: JordanBlock) -> tuple[float, float]:
    """Both sides of the projection bound for (v_1, t_1) ... (v_k, t_k).

    The product has fibre part x = sum_j B(T_(j-1)) v_j with T_0 = 0; the
    bound is sum_j |lambda|^T_(j-1) |pi(v_j)|.
    """
    T = 0.0
    x = np.zeros(block.dim)
    rhs = 0.0
    for v, t in zip(vectors, times):
        v = np.asarray(v, dtype=float)
        x = x + one_param(block, T) @ v
        rhs += block.modulus ** T * float(np.linalg.norm(projection(block, v)))
        T += t
    return float(np.linalg.norm(projection(block, x))), rhs


# ----------------------------------------------------------------------------
# isometric action

@dataclass(frozen=True)
class IsometryElement:
    """The map (x, s) -> (a + J^c S_F x, s + c), stored as translation (a, c) and flips F."""

    translation: tuple[float, ...]
    flip: frozenset = frozenset()

    @property
    def fibre(self) -> np.ndarray:
        return np.array(self.translation[:-1])

    @property
    def height(self) -> float:
        return self.translation[-1]


@dataclass
class LatticeEmbedding:
    jordan: AbsJordan
    generators: list[IsometryElement]
    residuals: dict[str, float] = field(default_factory=dict)

    def compose(self, g: IsometryElement, h: IsometryElement) -> IsometryElement:
        a = g.fibre + self.jordan.J(g.height) @ self.jordan.flip_matrix(g.flip) @ h.fibre
        return IsometryElement(tuple(a) + (g.height + h.height,), g.flip ^ h.flip)

    def inverse(self, g: IsometryElement) -> IsometryElement:
        F = self.jordan.flip_matrix(g.flip)
        a = -F @ self.jordan.J(-g.height) @ g.fibre
        return IsometryElement(tuple(a) + (-g.height,), g.flip)

    def act(self, g: IsometryElement, point: np.ndarray) -> np.ndarray:
        x, s = point[:-1], point[-1]
        y = g.fibre + self.jordan.J(g.height) @ self.jordan.flip_matrix(g.flip) @ x
        return np.append(y, s + g.height)

    def translation_of(self, v) -> IsometryElement:
        """Image of a lattice vector given in the original coordinates."""
        a = np.linalg.solve(self.jordan.conjugator, np.asarray(v, dtype=float))
        return IsometryElement(tuple(a) + (0.0,))

    def word(self, letters) -> IsometryElement:
        """Evaluate (generator index, sign) pairs; index T_GEN is t."""
        n = len(self.generators) - 1
        g = IsometryElement((0.0,) * (n + 1))
        for gen, sign in letters:
            x = self.generators[n if gen == T_GEN else gen]
            g = self.compose(g, x if sign > 0 else self.inverse(x))
        return g


def lattice_embed(setup: CanonicalSetup, samples: int = 100, tol: float = 1e-9,
                  seed: int = 0) -> LatticeEmbedding:
    """Generators of G acting on R^n x R, with the defining relations checked
    at random sample points."""
    A = setup.block_matrix
    aj = abs_jordan(A, tol)
    N = A.n
    emb = LatticeEmbedding(aj, [])
    gens = [emb.translation_of(np.eye(N)[i]) for i in range(N)]
    gens.append(IsometryElement((0.0,) * N + (1.0,), frozenset(aj.sign_word)))
    emb.generators = gens
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-3, 3, size=(samples, N + 1))
    t = gens[-1]
    An = A.to_numpy()
    conj = comm = 0.0
    for p in pts:
        for i in range(N):
            lhs = emb.act(emb.compose(emb.compose(t, gens[i]), emb.inverse(t)), p)
            rhs = emb.act(emb.translation_of(An[:, i]), p)
            conj = max(conj, float(np.max(np.abs(lhs - rhs))))
            for j in range(N):
                a = emb.act(emb.compose(gens[i], gens[j]), p)
                b = emb.act(emb.compose(gens[j], gens[i]), p)
                comm = max(comm, float(np.max(np.abs(a - b))))
    emb.residuals = {"conjugation": conj, "commutation": comm}
    scale = max(1.0, float(np.max(np.abs(An))))
    if conj > tol * scale * 10 or comm > tol:
        raise RelationResidual(f"relation residuals {emb.residuals} exceed {tol:g}")
    return emb


# ----------------------------------------------------------------------------
# the sigma/tau construction and the divergence estimate

def _extreme_blocks(aj: AbsJordan):
    mods = [b.modulus for b in aj.blocks]
    return int(np.argmax(mods)), int(np.argmin(mods))


def _block_projection(aj: AbsJordan, i: int, v) -> np.ndarray:
    y = np.linalg.solve(aj.conjugator, np.asarray(v, dtype=float))
    o = aj.offsets[i]
    return projection(aj.blocks[i], y[o:o + aj.blocks[i].dim])


def sigma_tau(setup: CanonicalSetup, k: int, j: int, x: GroupElement, y: GroupElement,
              tol: float = 1e-9) -> tuple[GroupElement, GroupElement]:
    """sigma_j = X_k Y_k w0^-j and tau_j = Y_k X_k w0^j with w0 = t^2,
    X_k = w0^k x w0^-k and Y_k = w0^-k y w0^k."""
    if x.h or y.h:
        raise ValueError("x and y must have height 0")
    aj = abs_jordan(setup.block_matrix, tol)
    up, down = _extreme_blocks(aj)
    if np.linalg.norm(_block_projection(aj, up, x.v)) <= tol:
        raise ComponentVanishes("x has no expanding component")
    if np.linalg.norm(_block_projection(aj, down, y.v)) <= tol:
        raise ComponentVanishes("y has no contracting component")
    N = setup.N
    w0 = GroupElement((0,) * N, 2)

    def pw(g, e):
        out = GroupElement((0,) * N, 0)
        base = g if e >= 0 else g_inv(g, setup)
        for _ in range(abs(e)):
            out = g_mul(out, base, setup)
        return out

    X = g_mul(g_mul(pw(w0, k), x, setup), pw(w0, -k), setup)
    Y = g_mul(g_mul(pw(w0, -k), y, setup), pw(w0, k), setup)
    sigma = g_mul(g_mul(X, Y, setup), pw(w0, -j), setup)
    tau = g_mul(g_mul(Y, X, setup), pw(w0, j), setup)
    return sigma, tau


def _estimate_data(setup: CanonicalSetup, tol: float):
    aj = abs_jordan(setup.block_matrix, tol)
    up, _ = _extreme_blocks(aj)
    lam = aj.blocks[up].modulus
    if lam <= 1:
        raise ThresholdNotMet("no expanding eigenvalue")
    gens = [np.eye(setup.N)[o] for o in range(setup.N)]
    # a*: the generator with the largest expanding projection; x = a*
    proj = [float(np.linalg.norm(_block_projection(aj, up, g))) for g in gens]
    a_star = max(proj)
    t0 = 1.0
    return lam, a_star, a_star, t0


def divergence_bracket(setup: CanonicalSetup, J: float, tol: float = 1e-9) -> float:
    """|pi(x_1)| - C |lambda|^((-J/4 + 1/2) t*) |pi(a*)| with C = 2/(|lambda|^t0 - 1), t* = 2 t0."""
    lam, px, pa, t0 = _estimate_data(setup, tol)
    tstar = 2 * t0
    C = 2.0 / (lam ** t0 - 1.0)
    return px - C * lam ** ((-J / 4 + 0.5) * tstar) * pa


def divergence_estimate(setup: CanonicalSetup, k: int, J: float, tol: float = 1e-9) -> float:
    """Main term |lambda|^(k t*) times the bracket; raises ThresholdNotMet while the
    bracket is not positive."""
    lam, _, _, t0 = _estimate_data(setup, tol)
    br = divergence_bracket(setup, J, tol)
    if br <= 0:
        raise ThresholdNotMet(f"bracket is {br:.4g} at J = {J}; increase J")
    return lam ** (k * 2 * t0) * br


# ----------------------------------------------------------------------------
# the combinatorial probe

@njit(cache=True)
def _probe_sphere(nbr, dist, n, sources):
    """For each source g on sphere n, BFS inside the ball of radius n to every h
    on sphere n within graph distance 2 of g. Returns (max distance, ordered
    pairs, worst source, worst target)."""
    nb, deg = nbr.shape
    seen = np.full(nb, -1, np.int64)
    tmark = np.full(nb, -1, np.int64)
    d = np.zeros(nb, np.int64)
    queue = np.empty(nb, np.int64)
    best = 0
    pairs = 0
    wg = -1
    wh = -1
    for si in range(sources.shape[0]):
        g = sources[si]
        ntargets = 0
        for a in range(deg):
            u = nbr[g, a]
            if u < 0:
                continue
            if dist[u] == n and u != g and tmark[u] != si:
                tmark[u] = si
                ntargets += 1
            for b in range(deg):
                v = nbr[u, b]
                if v >= 0 and dist[v] == n and v != g and tmark[v] != si:
                    tmark[v] = si
                    ntargets += 1
        pairs += ntargets
        if ntargets == 0:
            continue
        head = 0
        tail = 1
        queue[0] = g
        seen[g] = si
        d[g] = 0
        found = 0
        while head < tail and found < ntargets:
            u = queue[head]
            head += 1
            for a in range(deg):
                v = nbr[u, a]
                if v < 0 or dist[v] > n or seen[v] == si:
                    continue
                seen[v] = si
                d[v] = d[u] + 1
                queue[tail] = v
                tail += 1
                if tmark[v] == si:
                    found += 1
                    if d[v] > best:
                        best = d[v]
                        wg = g
                        wh = v
        if found < ntargets:
            return -1, pairs, g, -1
    return best, pairs, wg, wh


@dataclass
class ConvexityReport:
    records: list[dict]

    @property
    def maxima(self) -> list[int]:
        return [r["max_inner_distance"] for r in self.records]


def _probe_tables(elements, step, dist_of):
    index = {e: i for i, e in enumerate(elements)}
    deg = None
    rows = []
    for e in elements:
        row = [index.get(u, -1) for u in step(e)]
        deg = len(row)
        rows.append(row)
    nbr = np.array(rows, dtype=np.int64).reshape(len(elements), deg)
    dist = np.array([dist_of[e] for e in elements], dtype=np.int64)
    return nbr, dist


def _run_probe(elements, step, dist_of, n_max, label) -> ConvexityReport:
    nbr, dist = _probe_tables(elements, step, dist_of)
    records = []
    for n in range(1, n_max + 1):
        sources = np.nonzero(dist == n)[0].astype(np.int64)
        best, pairs, wg, wh = _probe_sphere(nbr, dist, n, sources)
        if best < 0:
            raise RuntimeError("ball is not connected")
        records.append({"n": n, "max_inner_distance": int(best), "pairs_checked": int(pairs) // 2,
                        "worst_pair": [label(elements[wg]), label(elements[wh])] if wg >= 0 else None})
    return ConvexityReport(records)


def ac2_probe(setup: CanonicalSetup, n_max: int, cap: int = 5_000_000) -> ConvexityReport:
    """Per sphere n <= n_max, the longest inside-the-ball path needed to join two
    sphere elements at Cayley distance at most 2."""
    dist = bfs_distances(setup, n_max + 1, cap)
    nb = _neighbours(setup)
    elements = list(dist)
    return _run_probe(elements, lambda e: list(nb(*e)), dist, n_max,
                      lambda e: {"v": list(e[0]), "h": e[1]})


def ac2_probe_z2(n_max: int) -> ConvexityReport:
    """The same probe on Z^2 with its standard generators, a group that is almost convex."""
    def step(e):
        x, y = e
        return [(x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)]

    r = n_max + 1
    dist = {(x, y): abs(x) + abs(y) for x in range(-r, r + 1) for y in range(-r, r + 1)
            if abs(x) + abs(y) <= r}
    return _run_probe(list(dist), step, dist, n_max, lambda e: list(e))


def report_csv(report: ConvexityReport, header: str | None = None) -> str:
    buf = io.StringIO()
    if header:
        buf.write(header)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "max_inner_distance", "pairs_checked"])
    for r in report.records:
        w.writerow([r["n"], r["max_inner_distance"], r["pairs_checked"]])
    return buf.getvalue()


def divergence_sweep_json(setup: CanonicalSetup, J_values, k_values, config=None,
                          tol: float = 1e-9) -> str:
    brackets = {str(J): divergence_bracket(setup, J, tol) for J in J_values}
    good = [J for J in J_values if brackets[str(J)] > 0]
    estimates = {}
    if good:
        J0 = good[0]
        estimates = {str(k): divergence_estimate(setup, k, J0, tol) for k in k_values}
    rec = {"brackets": brackets, "first_positive_J": good[0] if good else None,
           "main_terms": estimates}
    if config is not None:
        rec = {"config": config, **rec}
    return json.dumps(rec, indent=2) + "\n"
