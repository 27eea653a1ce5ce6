"""Conjugacy classes and the complete irreducible character table of GL_n(F_q).

Classes are orbits of the conjugation action of a generating set, and every
class carries a similarity invariant (kernel dimensions of f(g)^j for monic
irreducible f) that must separate them.  The table comes from the
class-multiplication coefficients: the central characters are the common
eigenvectors of the class matrices modulo a prime P = 1 (mod N), degrees
follow from the norm relation, and each value is lifted exactly by
recovering eigenvalue multiplicities through power maps.
"""
from __future__ import annotations

import hashlib
import json
import os
from fractions import Fraction
from functools import cached_property
from itertools import product
from math import isqrt
from pathlib import Path

import numpy as np
from sympy import isprime

from .fields import AdditiveCharacter, additive_character
from .groups import GroupContext, TooLarge
from .linalg import PrimeField, nullspace, rank, rref
from .scalars import CycloArray, CycloNumber, _shrink, cyclo_field, prime_embedding, safe_matmul

CACHE_FORMAT = 1


class InternalError(RuntimeError):
    """A computed object violates an identity it must satisfy."""


# ---------------------------------------------------------------------------
# polynomials over F_q and the similarity invariant


def _poly_mul(k, a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] = int(k.add_t[out[i + j], k.mul_t[x, y]])
    return tuple(out)


def monic_irreducibles(k, max_degree: int) -> list[tuple[int, ...]]:
    """Monic irreducible polynomials (coefficients low to high) of degree <= max_degree."""
    q = k.q
    monic = {d: [tuple(c) + (1,) for c in product(range(q), repeat=d)] for d in range(1, max_degree + 1)}
    irr: list[tuple[int, ...]] = []
    by_deg: dict[int, list] = {}
    for d in range(1, max_degree + 1):
        reducible = set()
        for a in range(1, d // 2 + 1):
            for f in monic[a]:
                for g in monic[d - a]:
                    reducible.add(_poly_mul(k, f, g))
        by_deg[d] = [f for f in monic[d] if f not in reducible]
        irr.extend(by_deg[d])
    return irr


def similarity_invariant(ctx: GroupContext, g) -> tuple:
    """Kernel dimensions of f(g)^j for monic irreducible f with deg f <= n.

    Two matrices are conjugate in GL_n(F_q) exactly when these agree."""
    k = ctx.k
    n = ctx.n
    g = np.asarray(g, dtype=np.int64)
    out = []
    for f in _irreducibles(ctx):
        d = len(f) - 1
        # Horner evaluation of f at g
        X = ctx.identity() * f[-1]
        for c in reversed(f[:-1]):
            X = k.add_t[ctx.mat_mul(X, g), ctx.identity() * c]
        dims = []
        Y = ctx.identity()
        for _ in range(n // d):
            Y = ctx.mat_mul(Y, X)
            dims.append(n - rank(k.la, Y))
        if dims[0]:
            out.append((f, tuple(dims)))
    return tuple(out)


_IRR_CACHE: dict = {}


def _irreducibles(ctx):
    key = (ctx.p, ctx.m, ctx.n)
    if key not in _IRR_CACHE:
        _IRR_CACHE[key] = monic_irreducibles(ctx.k, ctx.n)
    return _IRR_CACHE[key]


# ---------------------------------------------------------------------------
# conjugacy classes


class ClassData:
    def __init__(self, ctx: GroupContext, class_of: np.ndarray, reps: np.ndarray):
        self.ctx = ctx
        self.class_of = class_of
        self.reps = reps
        self.count = len(reps)
        self.sizes = np.bincount(class_of, minlength=self.count)
        E = ctx.elements
        self.rep_mats = E[reps]
        self.orders = np.array([ctx.element_order(g) for g in self.rep_mats])
        self.inv_class = class_of[ctx.inv_index[reps]]
        self.identity_class = int(class_of[ctx.identity_index])

    @cached_property
    def power_map(self) -> np.ndarray:
        """power_map[c, j] = class of rep_c^j for 0 <= j < exponent."""
        ctx = self.ctx
        e = int(np.lcm.reduce(self.orders))
        out = np.zeros((self.count, e), dtype=np.int64)
        X = np.broadcast_to(ctx.identity(), self.rep_mats.shape).copy()
        for j in range(e):
            out[:, j] = self.class_of[ctx.index(X)]
            X = ctx.mat_mul(X, self.rep_mats)
        return out

    @cached_property
    def sigma_class(self) -> np.ndarray:
        ctx = self.ctx
        return self.class_of[ctx.index(ctx.sigma(self.rep_mats))]

    @cached_property
    def invariants(self) -> list:
        return [similarity_invariant(self.ctx, g) for g in self.rep_mats]

    def class_of_matrix(self, A) -> np.ndarray:
        return self.class_of[self.ctx.index(A)]

    def histogram(self, indices) -> np.ndarray:
        """Number of the given elements in each class."""
        return np.bincount(self.class_of[np.asarray(indices)], minlength=self.count)

    def verify(self, rng=None, spot_checks: int = 200) -> None:
        if int(self.sizes.sum()) != self.ctx.order:
            raise InternalError("class sizes do not sum to |G|")
        inv = self.invariants
        if len(set(inv)) != self.count:
            raise InternalError("similarity invariants do not separate classes")
        rng = rng or np.random.default_rng(0)
        ctx = self.ctx
        g = rng.integers(0, ctx.order, spot_checks)
        h = rng.integers(0, ctx.order, spot_checks)
        conj = ctx.conj(ctx.elements[h], ctx.elements[g])
        if not np.array_equal(self.class_of[g], self.class_of_matrix(conj)):
            raise InternalError("class map not constant on conjugates")
        for i in g[:20]:
            c = self.class_of[i]
            if similarity_invariant(ctx, ctx.elements[i]) != inv[c]:
                raise InternalError("similarity invariant not constant on a class")


def conjugacy_classes(ctx: GroupContext) -> ClassData:
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import connected_components

    E = ctx.elements
    G = ctx.order
    src, dst = [], []
    ar = np.arange(G)
    for g in ctx.generators:
        src.append(ar)
        dst.append(ctx.index(ctx.conj(g[None], E)))
    src = np.concatenate(src)
    dst = np.concatenate(dst)
    graph = coo_matrix((np.ones(src.size, dtype=np.int8), (src, dst)), shape=(G, G))
    _, labels = connected_components(graph, directed=True, connection="weak")
    count = labels.max() + 1
    first = np.full(count, G)
    np.minimum.at(first, labels, ar)
    orders = np.array([ctx.element_order(E[i]) for i in first])
    order_key = np.lexsort((first, orders))
    relabel = np.empty(count, dtype=np.int64)
    relabel[order_key] = np.arange(count)
    class_of = relabel[labels]
    reps = first[order_key]
    return ClassData(ctx, class_of, reps)


# ---------------------------------------------------------------------------
# the character table


def _dixon_prime(N: int, group_order: int) -> int:
    P = N + 1
    lower = 2 * isqrt(group_order) + 2
    while P < lower or not isprime(P) or group_order % P == 0:
        P += N
    return P


def _singular_mask(X: np.ndarray, P: int) -> np.ndarray:
    """For a stack of square matrices mod P, flag the singular ones."""
    A = X % P
    B, d = A.shape[0], A.shape[1]
    alive = np.ones(B, dtype=bool)
    rows = np.arange(B)
    for c in range(d):
        nz = A[:, c:, c] != 0
        has = nz.any(axis=1)
        alive &= has
        piv = c + np.argmax(nz, axis=1)
        r = rows[has & (piv != c)]
        if r.size:
            tmp = A[r, c].copy()
            A[r, c] = A[r, piv[r]]
            A[r, piv[r]] = tmp
        pv = np.where(has, A[:, c, c], 1)
        pinv = np.array([pow(int(x), -1, P) for x in pv], dtype=np.int64)
        f = A[:, c + 1 :, c] * pinv[:, None] % P
        A[:, c + 1 :, c:] = (A[:, c + 1 :, c:] - f[:, :, None] * A[:, c, c:][:, None, :]) % P
    return ~alive


def _eigenvalues_mod(X: np.ndarray, P: int) -> list[int]:
    """All lam in F_P with X - lam singular."""
    d = X.shape[0]
    out = []
    step = max(1, 4_000_000 // (d * d))
    for s in range(0, P, step):
        lams = np.arange(s, min(P, s + step), dtype=np.int64)
        stack = (X[None] - lams[:, None, None] * np.eye(d, dtype=np.int64)[None]) % P
        out.extend(int(x) for x in lams[_singular_mask(stack, P)])
    return out


def _restricted(Ms, B, piv, P):
    """Matrices of the commuting operators Ms on the column space of B."""
    return [(M @ B % P)[piv] for M in Ms]


def _column_basis(F, V):
    """Column basis B (r x d) with B[piv] = identity, for the span of V's columns."""
    R, piv = rref(F, V.T)
    return R[: len(piv)].T.copy(), list(piv)


def _simultaneous_eigenvectors(Ms, P: int, rng) -> list[np.ndarray]:
    F = PrimeField(P)
    r = Ms[0].shape[0]
    pending = [np.eye(r, dtype=np.int64)]
    done: list[np.ndarray] = []
    stalls = 0
    while pending:
        B = pending.pop()
        if B.shape[1] == 1:
            done.append(B[:, 0])
            continue
        B, piv = _column_basis(F, B)
        Xs = _restricted(Ms, B, piv, P)
        d = B.shape[1]
        if stalls < 4:
            c = rng.integers(0, P, len(Xs))
            X = sum(int(ci) * Xi for ci, Xi in zip(c, Xs)) % P
        else:
            X = Xs[(stalls - 4) % len(Xs)]
        roots = _eigenvalues_mod(X, P)
        parts = []
        for lam in roots:
            E = nullspace(F, (X - lam * np.eye(d, dtype=np.int64)) % P)  # rows v with (X - lam) v = 0
            if E.shape[0]:
                parts.append(B @ E.T % P)
        if sum(p.shape[1] for p in parts) != d:
            raise InternalError("class algebra not split over F_P")
        if len(parts) == 1:
            stalls += 1
            if stalls > 4 + 2 * len(Xs):
                raise InternalError("could not separate central characters")
        else:
            stalls = 0
        pending.extend(parts)
    return done


class CharTable:
    """Irreducible characters of a group context as exact values on classes."""

    def __init__(self, ctx: GroupContext, classes: ClassData, values: CycloArray, degrees: np.ndarray):
        self.ctx = ctx
        self.classes = classes
        self.values = values  # shape (chars, classes)
        self.degrees = degrees
        self.N = values.N
        self.count = len(degrees)

    def __repr__(self):
        return f"CharTable({self.ctx!r}, {self.count} irreducibles)"

    # basic access -------------------------------------------------------
    def row(self, i) -> CycloArray:
        return self.values.take(i)

    def value(self, i, c) -> CycloNumber:
        return CycloNumber(self.N, self.values.num[i, c], self.values.den)

    def on_elements(self, i, indices) -> CycloArray:
        return self.values.take(i).take(self.classes.class_of[np.asarray(indices)])

    def class_sum(self, weights, rows=None) -> CycloArray:
        """sum_c weights[c] chi(c) for each character (integer weights)."""
        vals = self.values if rows is None else self.values.take(rows)
        num = vals.num
        C, phi = num.shape[-2:]
        flat = np.swapaxes(num, -1, -2).reshape(-1, C)
        out = safe_matmul(flat, np.asarray(weights).reshape(C, 1))
        return CycloArray(self.N, out.reshape(num.shape[:-2] + (phi,)), vals.den)

    def inner(self, f: CycloArray, g: CycloArray) -> Fraction:
        """(1/|G|) sum_g f(g) conj(g(g)) for class functions f, g."""
        prod_ = f * g.conj()
        tot = safe_matmul(self.classes.sizes.astype(np.int64)[None, :], prod_.num)[0]
        x = CycloNumber(self.N, tot, prod_.den)
        if not x.is_rational():
            raise InternalError("inner product is not rational")
        return x.to_fraction() / self.ctx.order

    def multiplicity(self, f: CycloArray, i: int) -> int:
        m = self.inner(f, self.row(i))
        if m.denominator != 1:
            raise InternalError("non-integral multiplicity")
        return int(m)

    def decompose(self, f: CycloArray) -> dict[int, int]:
        out = {}
        for i in range(self.count):
            m = self.multiplicity(f, i)
            if m:
                out[i] = m
        return out

    def index_of(self, f: CycloArray) -> int:
        """Index of the irreducible whose row equals the class function f."""
        ids = np.all(self.values.with_den(self.values.den * f.den) == f.with_den(self.values.den * f.den)[None], axis=(1, 2))
        hit = np.nonzero(ids)[0]
        if hit.size != 1:
            raise InternalError("class function is not an irreducible character")
        return int(hit[0])

    # derived characters ---------------------------------------------------
    @cached_property
    def dual_index(self) -> np.ndarray:
        """Index of the contragredient (complex conjugate) character."""
        inv = self.classes.inv_class
        return np.array([self.index_of(self.values.take(i).take(inv)) for i in range(self.count)])

    @cached_property
    def sigma_index(self) -> np.ndarray:
        """Index of chi o sigma."""
        sc = self.classes.sigma_class
        return np.array([self.index_of(self.values.take(i).take(sc)) for i in range(self.count)])

    @cached_property
    def star_index(self) -> np.ndarray:
        """Index of g -> chi(g*), the contragredient for GL_n."""
        ctx = self.ctx
        sc = self.classes.class_of_matrix(ctx.star(self.classes.rep_mats))
        return np.array([self.index_of(self.values.take(i).take(sc)) for i in range(self.count)])

    def central_character(self, i: int, z: int) -> CycloNumber:
        c = int(self.classes.class_of_matrix(self.ctx.scalar(z)))
        return self.value(i, c) * Fraction(1, int(self.degrees[i]))

    # predicates -------------------------------------------------------------
    @cached_property
    def _unipotent_histograms(self) -> list[np.ndarray]:
        ctx = self.ctx
        out = []
        for a in range(1, ctx.n):
            U = ctx.index(ctx.subgroup_enumerate(("U", (a, ctx.n - a))))
            out.append(self.classes.histogram(U))
        return out

    @cached_property
    def cuspidal(self) -> np.ndarray:
        flags = np.ones(self.count, dtype=bool)
        for h in self._unipotent_histograms:
            flags &= ~self.class_sum(h).nonzero_mask()
        return flags

    def is_cuspidal(self, i: int) -> bool:
        return bool(self.cuspidal[i])

    def n_psi_counts(self, psi: AdditiveCharacter) -> np.ndarray:
        """counts[c, t] = #{u in N in class c with psi(u) = zeta_p^t}."""
        ctx = self.ctx
        Nm = ctx.subgroup_enumerate("N")
        idx = ctx.index(Nm)
        t = np.zeros(len(Nm), dtype=np.int64)
        k = ctx.k
        s = np.zeros(len(Nm), dtype=np.int64)
        for i in range(ctx.n - 1):
            s = k.add_t[s, Nm[:, i, i + 1]]
        t = psi.exponent(s)
        out = np.zeros((self.classes.count, ctx.p), dtype=np.int64)
        np.add.at(out, (self.classes.class_of[idx], t), 1)
        return out

    def whittaker_multiplicity(self, psi: AdditiveCharacter) -> list[Fraction]:
        """(1/|N|) sum_{u in N} chi(u) conj(psi(u)) for every character."""
        counts = self.n_psi_counts(psi)
        F = cyclo_field(self.N)
        p = self.ctx.p
        total = None
        for t in range(p):
            part = self.class_sum(counts[:, t])
            part = part.mul_number(F.root_of_unity(p, -t))
            total = part if total is None else total + part
        nN = int(counts.sum())
        out = []
        for i in range(self.count):
            x = total.item(i)
            if not x.is_rational():
                raise InternalError("Whittaker multiplicity not rational")
            out.append(x.to_fraction() / nN)
        return out

    def generic_flags(self, psi: AdditiveCharacter | None = None) -> np.ndarray:
        psi = psi or additive_character(self.ctx.k)
        mult = self.whittaker_multiplicity(psi)
        if any(m not in (0, 1) for m in mult):
            raise InternalError("Gelfand-Graev multiplicity outside {0, 1}")
        return np.array([m == 1 for m in mult])

    @cached_property
    def generic(self) -> np.ndarray:
        return self.generic_flags()

    def is_generic(self, i: int, psi: AdditiveCharacter | None = None) -> bool:
        if psi is None:
            return bool(self.generic[i])
        return bool(self.generic_flags(psi)[i])

    def restriction_average(self, indices) -> list[Fraction]:
        """(1/|S|) sum_{h in S} chi(h) for a subset S given by element indices."""
        h = self.classes.histogram(indices)
        s = self.class_sum(h)
        out = []
        for i in range(self.count):
            x = s.item(i)
            if not x.is_rational():
                raise InternalError("subgroup average not rational")
            out.append(x.to_fraction() / len(indices))
        return out

    @cached_property
    def h_indices(self) -> np.ndarray:
        return self.ctx.index(self.ctx.subgroup_enumerate("H"))

    @cached_property
    def hom_h_dims(self) -> np.ndarray:
        vals = self.restriction_average(self.h_indices)
        if any(v.denominator != 1 for v in vals):
            raise InternalError("non-integral Hom dimension")
        return np.array([int(v) for v in vals])

    def hom_H_dim(self, i: int) -> int:
        return int(self.hom_h_dims[i])

    @cached_property
    def h_tilde_indices(self) -> np.ndarray:
        """H together with its coset s H, s the block swap (Levi case, even n)."""
        ctx = self.ctx
        if ctx.involution != "levi" or ctx.n % 2:
            raise ValueError("sign needs the Levi case with even n")
        H = ctx.subgroup_enumerate("H")
        sH = ctx.mat_mul(ctx.swap_in_h_coords[None], H)
        return np.concatenate([ctx.index(H), ctx.index(sH)])

    def sgn_of(self, i: int) -> int:
        if self.hom_H_dim(i) != 1:
            raise ValueError("sign undefined: Hom_H has dimension != 1")
        avg = self.restriction_average(self.h_tilde_indices)[i]
        s = 2 * avg - 1
        if s not in (1, -1):
            raise InternalError("sign is not +-1")
        return int(s)

    def is_sigma_selfdual(self, i: int) -> bool:
        return bool(self.sigma_index[i] == self.dual_index[i])

    def distinguished(self, i: int) -> bool:
        return self.hom_H_dim(i) > 0

    def summary(self) -> dict:
        out = {
            "irreducibles": self.count,
            "classes": self.classes.count,
            "cuspidal": int(self.cuspidal.sum()),
            "generic": int(self.generic.sum()),
        }
        if self.ctx.involution:
            out["sigma_selfdual"] = sum(self.is_sigma_selfdual(i) for i in range(self.count))
            out["distinguished"] = int((self.hom_h_dims > 0).sum())
        return out

    # verification -------------------------------------------------------
    def gram(self) -> np.ndarray:
        """Exact matrix of inner products <chi_i, chi_j>."""
        conj = self.values.conj()
        sizes = self.classes.sizes.astype(np.int64)
        out = np.zeros((self.count, self.count), dtype=object)
        for i in range(self.count):
            prod_ = self.values * CycloArray(self.N, np.broadcast_to(conj.num[i], self.values.num.shape).copy(), conj.den)
            tot = np.einsum("jcf,c->jf", prod_.num.astype(object), sizes.astype(object))
            for j in range(self.count):
                x = CycloNumber(self.N, tot[j], prod_.den)
                if not x.is_rational():
                    raise InternalError("non-rational inner product")
                out[i, j] = x.to_fraction() / self.ctx.order
        return out

    def verify(self) -> None:
        if sum(int(d) ** 2 for d in self.degrees) != self.ctx.order:
            raise InternalError("sum of squared degrees differs from |G|")
        g = self.gram()
        if not all(g[i, j] == (1 if i == j else 0) for i in range(self.count) for j in range(self.count)):
            raise InternalError("row orthogonality fails")
        triv = self.values.take(0)
        if not np.all(triv.with_den(1)[:, 0] == 1) or np.any(triv.with_den(1)[:, 1:]):
            raise InternalError("first row is not the trivial character")

    def column_orthogonality(self) -> bool:
        """sum_chi chi(g) conj(chi(h)) = |C_G(g)| delta_{gh} on class representatives."""
        conj = self.values.conj()
        r = self.classes.count
        for c in range(r):
            col = CycloArray(self.N, np.broadcast_to(conj.num[:, c][:, None], self.values.num.shape).copy(), conj.den)
            tot = (self.values * col).sum(axis=0)
            for d in range(r):
                x = tot.item(d)
                want = self.ctx.order // int(self.classes.sizes[c]) if c == d else 0
                if x != want:
                    return False
        return True

    # serialization ------------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "format": CACHE_FORMAT,
            "context": self.ctx.describe(),
            "modulus": self.ctx.k.modulus,
            "N": self.N,
            "class_rep_codes": [int(c) for c in self.ctx.codes[self.classes.reps]],
            "class_sizes": [int(s) for s in self.classes.sizes],
            "degrees": [int(d) for d in self.degrees],
            "den": self.values.den,
            "rows": [[[int(x) for x in v] for v in row] for row in self.values.num],
        }

    def checksum(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()


def _build_table(ctx: GroupContext, classes: ClassData, seed: int = 0) -> CharTable:
    N = ctx.N
    r = classes.count
    G = ctx.order
    cls = classes.class_of
    E = ctx.elements
    inv = ctx.inv_index
    # A[i, j, k] = #{x in C_i : x^-1 g_k in C_j}
    A = np.zeros((r, r, r), dtype=np.int64)
    ar = np.arange(G)
    for kk, g in enumerate(classes.rep_mats):
        y = ctx.index(ctx.mat_mul(E[inv], g[None]))
        np.add.at(A[:, :, kk], (cls[ar], cls[y]), 1)
    P = _dixon_prime(N, G)
    rng = np.random.default_rng(seed)
    Ms = [A[i] % P for i in range(r)]
    vecs = _simultaneous_eigenvectors(Ms, P, rng)
    if len(vecs) != r:
        raise InternalError("wrong number of central characters")
    e0 = classes.identity_class
    h = classes.sizes.astype(np.int64) % P
    h_inv = np.array([pow(int(x), -1, P) for x in h], dtype=np.int64)
    kstar = classes.inv_class
    chis = []
    degs = []
    for v in vecs:
        v = v * pow(int(v[e0]), -1, P) % P
        for i in range(r):
            if not np.array_equal(Ms[i] @ v % P, v[i] * v % P):
                raise InternalError("central character eigen-relation fails")
        S = int(((v * v[kstar]) % P * h_inv % P).sum() % P)
        target = G * pow(S, -1, P) % P
        d = next((d for d in range(1, isqrt(G) + 1) if d * d % P == target), None)
        if d is None:
            raise InternalError("no degree found")
        degs.append(d)
        chis.append(d * v % P * h_inv % P)
    chis = np.array(chis, dtype=np.int64)
    zN = prime_embedding(N, P)
    F = cyclo_field(N)
    pm = classes.power_map
    num = np.zeros((r, r, F.phi), dtype=np.int64)
    for c in range(r):
        o = int(classes.orders[c])
        zo = pow(zN, N // o, P)
        X = chis[:, pm[c, :o]]  # chi(g^j)
        tj = np.outer(np.arange(o), np.arange(o)) % o
        W = np.array([[pow(zo, -int(e), P) for e in row] for row in tj], dtype=np.int64)  # W[j, t] = z^(-tj)
        m = X @ W % P * pow(o, -1, P) % P
        degs_arr = np.array(degs)
        if np.any(m > degs_arr[:, None]) or np.any(m.sum(axis=1) != degs_arr):
            raise InternalError("eigenvalue multiplicities out of range")
        num[:, c] = m @ F.Z[(np.arange(o) * (N // o)) % N].astype(np.int64)
    values = CycloArray(N, num, 1)
    # order: trivial first, then by degree and value
    degs = np.array(degs, dtype=np.int64)
    keys = [(int(degs[i]), tuple(num[i].ravel().tolist())) for i in range(r)]
    triv = next(i for i in range(r) if degs[i] == 1 and np.all(num[i, :, 0] == 1) and not np.any(num[i, :, 1:]))
    order = sorted(range(r), key=lambda i: (i != triv, keys[i]))
    values = CycloArray(N, num[order], 1)
    return CharTable(ctx, classes, values, degs[order])


def _cache_dir(cache_dir) -> Path | None:
    if cache_dir is False:
        return None
    if cache_dir is None:
        env = os.environ.get("GLGAMMA_CACHE")
        if env is None:
            return None
        cache_dir = env
    return Path(cache_dir)


def _cache_name(ctx: GroupContext) -> str:
    inv = ctx.involution or "none"
    return f"table_v{CACHE_FORMAT}_p{ctx.p}_m{ctx.m}_n{ctx.n}_{inv}_{'-'.join(map(str, ctx.k.modulus))}.json"


_TABLES: dict = {}


def character_table(ctx: GroupContext, cache_dir=None, verify: bool = True) -> CharTable:
    """The full character table; memoized per context and optionally cached on disk."""
    key = (ctx.p, ctx.m, ctx.n, ctx.involution, tuple(ctx.k.modulus))
    if key in _TABLES:
        table = _TABLES[key]
        if table.ctx is not ctx:
            table = CharTable(ctx, _rebind_classes(ctx, table.classes), table.values, table.degrees)
            _TABLES[key] = table
        directory = _cache_dir(cache_dir)
        if directory is not None and not (directory / _cache_name(ctx)).exists():
            save_table(table, directory / _cache_name(ctx))
        return table
    if ctx.order > ctx.budget:
        raise TooLarge(f"|G| = {ctx.order} exceeds budget {ctx.budget}")
    classes = conjugacy_classes(ctx)
    directory = _cache_dir(cache_dir)
    table = None
    if directory is not None:
        path = directory / _cache_name(ctx)
        if path.exists():
            table = load_table(ctx, classes, path)
    if table is None:
        classes.verify()
        table = _build_table(ctx, classes)
        if verify:
            table.verify()
        if directory is not None:
            save_table(table, directory / _cache_name(ctx))
    _TABLES[key] = table
    return table


def _rebind_classes(ctx, classes: ClassData) -> ClassData:
    return ClassData(ctx, classes.class_of, classes.reps)


def save_table(table: CharTable, path: Path) -> str:
    path.parent.mkdir(parents=True, exist_ok=True)
    d = table.to_dict()
    d["checksum"] = table.checksum()
    path.write_text(json.dumps(d, sort_keys=True, separators=(",", ":")))
    return d["checksum"]


def load_table(ctx: GroupContext, classes: ClassData, path: Path) -> CharTable | None:
    d = json.loads(Path(path).read_text())
    if d.get("format") != CACHE_FORMAT or d.get("context") != ctx.describe():
        return None
    rep_codes = [int(c) for c in ctx.codes[classes.reps]]
    if rep_codes != d["class_rep_codes"]:
        return None
    num = np.array(d["rows"], dtype=object)
    values = CycloArray(d["N"], _shrink(num), d["den"])
    table = CharTable(ctx, classes, values, np.array(d["degrees"], dtype=np.int64))
    if table.checksum() != d["checksum"]:
        raise InternalError(f"cache checksum mismatch in {path}")
    return table


# ---------------------------------------------------------------------------
# parabolic induction


def levi_blocks(parts) -> list[slice]:
    out, start = [], 0
    for a in parts:
        out.append(slice(start, start + a))
        start += a
    return out


def induced_character(ctx: GroupContext, parts, tables: list[CharTable], rows: list[int]) -> CycloArray:
    """Class function of the parabolic induction chi_1 x ... x chi_r.

    Uses Ind(g) = |G| / (|Q| |C_g|) sum_{y in C_g and Q} f(y), with f the
    inflation of the tensor product from the Levi."""
    table = character_table(ctx)
    N = ctx.N
    Q = ctx.subgroup_enumerate(("Q", tuple(parts)))
    qcls = table.classes.class_of_matrix(Q)
    blocks = levi_blocks(parts)
    # value of the tensor product on each element of Q
    vals = None
    for sl, t, i in zip(blocks, tables, rows):
        sub = Q[:, sl, sl]
        c = t.classes.class_of_matrix(sub)
        v = t.values.take(i).embed(N).take(c)
        vals = v if vals is None else vals * v
    r = table.classes.count
    out_num = np.zeros((r, cyclo_field(N).phi), dtype=object)
    for cc in range(r):
        mask = qcls == cc
        if mask.any():
            out_num[cc] = vals.num[mask].astype(object).sum(axis=0)
    # scale each class by |G| / (|Q| |C|)
    scaled = np.zeros_like(out_num)
    den = vals.den * len(Q)
    for cc in range(r):
        fac = Fraction(ctx.order, int(table.classes.sizes[cc]))
        if fac.denominator != 1:
            raise InternalError("centralizer order not integral")
        scaled[cc] = out_num[cc] * fac.numerator
    return CycloArray(N, _shrink(scaled), den).normalized()


def generic_constituent(ctx: GroupContext, parts, tables, rows, psi=None) -> int:
    """The unique generic irreducible constituent of a parabolic induction."""
    table = character_table(ctx)
    f = induced_character(ctx, parts, tables, rows)
    dec = table.decompose(f)
    gen = table.generic if psi is None else table.generic_flags(psi)
    hits = [(i, m) for i, m in dec.items() if gen[i]]
    if len(hits) != 1 or hits[0][1] != 1:
        raise InternalError(f"expected exactly one generic constituent, found {hits}")
    return hits[0][0]
