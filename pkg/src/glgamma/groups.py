"""GL_n(F_q) as batched matrices of field codes, with subgroups and involutions.

Matrices are integer arrays of shape (..., n, n) holding F_q codes.  Small
groups can be enumerated once; every element then has an index, and group
operations become index lookups.  Subgroups are described by the set of
values allowed at each matrix position, which gives enumeration,
membership and intersection uniformly.
"""
from __future__ import annotations

from functools import cached_property, reduce
from math import gcd, prod

import numpy as np

from .fields import Fq, build_field
from .linalg import nullspace

DEFAULT_BUDGET = 250_000


class TooLarge(RuntimeError):
    """A requested enumeration exceeds the configured budget."""


def _lcm(a, b):
    return a * b // gcd(a, b)


def gl_order(n: int, q: int) -> int:
    return prod(q**n - q**i for i in range(n))


def group_exponent(n: int, p: int, q: int) -> int:
    e = 1
    while e < n:
        e *= p
    return e * reduce(_lcm, [q**d - 1 for d in range(1, n + 1)], 1)


def conductor(n: int, p: int, q: int) -> int:
    """Conductor of the cyclotomic field holding all scalars for GL_n(F_q)."""
    base = 8 if p == 2 else 4 * p
    return _lcm(group_exponent(n, p, q), base)


class GroupContext:
    """GL_n(F_q) with an optional involution ("galois" or "levi")."""

    def __init__(self, p: int, m: int, n: int, involution: str | None = None,
                 k0_degree: int | None = None, budget: int = DEFAULT_BUDGET, modulus=None):
        if involution not in (None, "galois", "levi"):
            raise ValueError(f"unknown involution {involution!r}")
        if involution == "galois":
            if m % 2:
                raise ValueError("the Galois involution needs an even degree")
            k0_degree = m // 2 if k0_degree is None else k0_degree
            if 2 * k0_degree != m:
                raise ValueError("k0 must have index 2 in k")
        if involution == "levi" and p == 2:
            raise ValueError("the Levi involution needs odd p")
        self.p, self.m, self.n = p, m, n
        self.involution = involution
        self.k0_degree = k0_degree if involution == "galois" else None
        self.k: Fq = build_field(p, m, self.k0_degree, modulus)
        self.q = self.k.q
        self.budget = budget
        self.order = gl_order(n, self.q)
        self.N = conductor(n, p, self.q)
        self._weights = (self.q ** np.arange(n * n, dtype=np.int64)).reshape(n, n)

    def __repr__(self):
        inv = f", {self.involution}" if self.involution else ""
        return f"GroupContext(GL_{self.n}(F_{self.q}){inv})"

    def describe(self) -> dict:
        return {"p": self.p, "m": self.m, "n": self.n, "involution": self.involution,
                "k0_degree": self.k0_degree}

    def with_n(self, n: int) -> "GroupContext":
        """The same field and involution in another rank."""
        inv = self.involution if (self.involution != "levi" or n >= 1) else None
        return GroupContext(self.p, self.m, n, inv, self.k0_degree, self.budget, self.k.modulus)

    # ------------------------------------------------------------------
    # matrix arithmetic
    def identity(self, n: int | None = None) -> np.ndarray:
        return np.eye(self.n if n is None else n, dtype=np.int64)

    def scalar(self, a: int) -> np.ndarray:
        return self.identity() * int(a)

    def diag(self, entries) -> np.ndarray:
        return np.diag(np.asarray(entries, dtype=np.int64))

    def elementary(self, i: int, j: int, a: int) -> np.ndarray:
        e = self.identity()
        e[i, j] = a
        return e

    def mat_mul(self, A, B) -> np.ndarray:
        A = np.asarray(A, dtype=np.int64)
        B = np.asarray(B, dtype=np.int64)
        k = self.k
        if k.m == 1:
            return np.matmul(A, B) % k.p
        n = A.shape[-1]
        acc = k.mul_t[A[..., :, 0][..., :, None], B[..., 0, :][..., None, :]]
        for t in range(1, n):
            acc = k.add_t[acc, k.mul_t[A[..., :, t][..., :, None], B[..., t, :][..., None, :]]]
        return acc

    def mat_vec(self, A, v) -> np.ndarray:
        return self.mat_mul(A, np.asarray(v)[..., :, None])[..., 0]

    def inv_det(self, A):
        """Batched inverse and determinant; singular matrices get det 0."""
        k = self.k
        A = np.array(A, dtype=np.int64, copy=True)
        single = A.ndim == 2
        if single:
            A = A[None]
        B, n = A.shape[0], A.shape[-1]
        aug = np.concatenate([A, np.broadcast_to(np.eye(n, dtype=np.int64), A.shape)], axis=2)
        det = np.ones(B, dtype=np.int64)
        ok = np.ones(B, dtype=bool)
        rows = np.arange(B)
        for c in range(n):
            nz = aug[:, c:, c] != 0
            has = nz.any(axis=1)
            ok &= has
            piv = c + np.argmax(nz, axis=1)
            swap = (piv != c) & has
            if swap.any():
                r = rows[swap]
                tmp = aug[r, c].copy()
                aug[r, c] = aug[r, piv[swap]]
                aug[r, piv[swap]] = tmp
                det[r] = k.neg_t[det[r]]
            pv = np.where(has, aug[:, c, c], 1)
            det = k.mul_t[det, np.where(has, pv, 0)]
            pinv = k.inv_t[pv]
            aug[:, c] = k.mul_t[pinv[:, None], aug[:, c]]
            for i in range(n):
                if i == c:
                    continue
                f = aug[:, i, c]
                aug[:, i] = k.add_t[aug[:, i], k.neg_t[k.mul_t[f[:, None], aug[:, c]]]]
        inv = aug[:, :, n:]
        inv[~ok] = 0
        det[~ok] = 0
        if single:
            return inv[0], int(det[0])
        return inv, det

    def inv(self, A) -> np.ndarray:
        inv, det = self.inv_det(A)
        if np.any(np.asarray(det) == 0):
            raise ZeroDivisionError("singular matrix")
        return inv

    def det(self, A):
        return self.inv_det(A)[1]

    def transpose(self, A) -> np.ndarray:
        return np.swapaxes(np.asarray(A), -1, -2)

    def star(self, A) -> np.ndarray:
        """g* = transpose of the inverse."""
        return self.transpose(self.inv(A))

    def conj(self, g, x) -> np.ndarray:
        """g x g^-1."""
        return self.mat_mul(self.mat_mul(g, x), self.inv(g))

    def power(self, A, e: int) -> np.ndarray:
        A = np.asarray(A, dtype=np.int64)
        if e < 0:
            A, e = self.inv(A), -e
        out = np.broadcast_to(self.identity(), A.shape).copy()
        base = A
        while e:
            if e & 1:
                out = self.mat_mul(out, base)
            base = self.mat_mul(base, base)
            e >>= 1
        return out

    def element_order(self, A) -> int:
        I = self.identity()
        X = np.asarray(A, dtype=np.int64)
        k = 1
        while not np.array_equal(X, I):
            X = self.mat_mul(X, A)
            k += 1
        return k

    # special elements -------------------------------------------------
    @cached_property
    def w(self) -> np.ndarray:
        """Antidiagonal permutation matrix w_n."""
        return np.fliplr(self.identity()).copy()

    @cached_property
    def delta(self) -> np.ndarray:
        """diag(1, -1, 1, ...); conjugation by it is the Levi involution."""
        d = [1 if i % 2 == 0 else int(self.k.neg(1)) for i in range(self.n)]
        return self.diag(d)

    @cached_property
    def s(self) -> np.ndarray:
        """Block swap [[0, 1], [1, 0]] for even n."""
        if self.n % 2:
            raise ValueError("block swap needs even n")
        h = self.n // 2
        s = np.zeros((self.n, self.n), dtype=np.int64)
        s[:h, h:] = np.eye(h, dtype=np.int64)
        s[h:, :h] = np.eye(h, dtype=np.int64)
        return s

    @cached_property
    def levi_perm(self) -> np.ndarray:
        """Permutation matrix P with P^-1 H P the standard block Levi.

        Coordinates with even position (0-based) come first."""
        order = [i for i in range(self.n) if i % 2 == 0] + [i for i in range(self.n) if i % 2 == 1]
        P = np.zeros((self.n, self.n), dtype=np.int64)
        for col, row in enumerate(order):
            P[row, col] = 1
        return P

    @cached_property
    def swap_in_h_coords(self) -> np.ndarray:
        """The block swap s of the standard Levi, conjugated into the interleaved form."""
        P = self.levi_perm
        return self.mat_mul(self.mat_mul(P, self.s), self.transpose(P))

    def sigma(self, A) -> np.ndarray:
        A = np.asarray(A, dtype=np.int64)
        if self.involution == "galois":
            return self.k.sigma(A)
        if self.involution == "levi":
            n = self.n
            par = np.add.outer(np.arange(n), np.arange(n)) % 2 == 1
            return np.where(par, self.k.neg_t[A], A)
        raise ValueError("no involution configured")

    # ------------------------------------------------------------------
    # encoding and enumeration
    def encode(self, A) -> np.ndarray:
        return (np.asarray(A, dtype=np.int64) * self._weights).sum(axis=(-1, -2))

    def decode(self, codes) -> np.ndarray:
        codes = np.asarray(codes, dtype=np.int64)
        out = np.zeros(codes.shape + (self.n, self.n), dtype=np.int64)
        c = codes.copy()
        for i in range(self.n):
            for j in range(self.n):
                out[..., i, j] = c % self.q
                c //= self.q
        return out

    def pattern(self, which) -> list[list[np.ndarray]]:
        """Allowed values at each position for a named subgroup.

        ``which`` is one of "G", "N", "B", "P", "H", "Gp" (G_{n-1} embedded
        as diag(g, 1)), "Hp" (H intersected with Gp), or a tuple
        ("U"|"Um"|"M"|"Q", parts)."""
        n, q = self.n, self.q
        allv = np.arange(q)
        zero = np.array([0])
        one = np.array([1])
        pat = [[allv for _ in range(n)] for _ in range(n)]
        if isinstance(which, tuple):
            kind, parts = which
            if sum(parts) != n:
                raise ValueError("parts must sum to n")
            block = np.repeat(np.arange(len(parts)), parts)
            for i in range(n):
                for j in range(n):
                    bi, bj = block[i], block[j]
                    if kind == "U":
                        pat[i][j] = (one if i == j else zero) if bi == bj else (allv if bi < bj else zero)
                    elif kind == "Um":
                        pat[i][j] = (one if i == j else zero) if bi == bj else (allv if bi > bj else zero)
                    elif kind == "M":
                        pat[i][j] = allv if bi == bj else zero
                    elif kind == "Q":
                        pat[i][j] = allv if bi <= bj else zero
                    else:
                        raise ValueError(f"unknown subgroup {which!r}")
            return pat
        if which == "G":
            return pat
        if which in ("N", "B"):
            for i in range(n):
                for j in range(i):
                    pat[i][j] = zero
                if which == "N":
                    pat[i][i] = one
            return pat
        if which == "P":
            for j in range(n - 1):
                pat[n - 1][j] = zero
            pat[n - 1][n - 1] = one
            return pat
        if which == "Gp":
            for j in range(n - 1):
                pat[n - 1][j] = zero
                pat[j][n - 1] = zero
            pat[n - 1][n - 1] = one
            return pat
        if which == "H":
            if self.involution == "galois":
                sub = self.k.subfield_elements()
                return [[sub for _ in range(n)] for _ in range(n)]
            if self.involution == "levi":
                return [[allv if (i + j) % 2 == 0 else zero for j in range(n)] for i in range(n)]
            raise ValueError("no involution configured")
        if which == "Hp":
            return self.intersect(self.pattern("H"), self.pattern("Gp"))
        raise ValueError(f"unknown subgroup {which!r}")

    @staticmethod
    def intersect(p1, p2):
        return [[np.intersect1d(a, b) for a, b in zip(r1, r2)] for r1, r2 in zip(p1, p2)]

    def pattern_size(self, pat) -> int:
        return prod(len(v) for row in pat for v in row)

    def enumerate_pattern(self, pat, budget: int | None = None) -> np.ndarray:
        """All invertible matrices matching a pattern, sorted by code."""
        budget = self.budget if budget is None else budget
        total = self.pattern_size(pat)
        if total > 20 * budget:
            raise TooLarge(f"{total} candidate matrices exceed 20 x budget {budget}")
        n = self.n
        flat = [v for row in pat for v in row]
        sizes = [len(v) for v in flat]
        out = []
        chunk = 1 << 18
        for start in range(0, total, chunk):
            idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
            mats = np.zeros((idx.size, n * n), dtype=np.int64)
            r = idx.copy()
            for pos, (vals, sz) in enumerate(zip(flat, sizes)):
                mats[:, pos] = vals[r % sz]
                r //= sz
            mats = mats.reshape(-1, n, n)
            det = self.det(mats)
            out.append(mats[det != 0])
        mats = np.concatenate(out) if out else np.zeros((0, n, n), dtype=np.int64)
        if mats.shape[0] > budget:
            raise TooLarge(f"subgroup of order {mats.shape[0]} exceeds budget {budget}")
        order = np.argsort(self.encode(mats), kind="stable")
        return mats[order]

    def member_mask(self, which, A) -> np.ndarray:
        pat = self.pattern(which)
        A = np.asarray(A)
        ok = np.ones(A.shape[:-2], dtype=bool)
        for i in range(self.n):
            for j in range(self.n):
                ok &= np.isin(A[..., i, j], pat[i][j])
        return ok

    def subgroup_enumerate(self, which) -> np.ndarray:
        return self.enumerate_pattern(self.pattern(which))

    # the whole group --------------------------------------------------
    @cached_property
    def elements(self) -> np.ndarray:
        if self.order > self.budget:
            raise TooLarge(f"|GL_{self.n}(F_{self.q})| = {self.order} exceeds budget {self.budget}")
        E = self.enumerate_pattern(self.pattern("G"))
        assert E.shape[0] == self.order
        return E

    @cached_property
    def codes(self) -> np.ndarray:
        return self.encode(self.elements)

    @cached_property
    def _lut(self):
        size = self.q ** (self.n * self.n)
        if size <= 1 << 25:
            lut = np.full(size, -1, dtype=np.int32)
            lut[self.codes] = np.arange(self.order, dtype=np.int32)
            return lut
        return None

    def index(self, A) -> np.ndarray:
        """Index of each matrix in the enumeration (-1 if singular)."""
        c = self.encode(A)
        lut = self._lut
        if lut is not None:
            return lut[c].astype(np.int64)
        pos = np.searchsorted(self.codes, c)
        pos = np.minimum(pos, self.order - 1)
        return np.where(self.codes[pos] == c, pos, -1)

    @cached_property
    def identity_index(self) -> int:
        return int(self.index(self.identity()))

    @cached_property
    def inv_index(self) -> np.ndarray:
        return self.index(self.inv(self.elements))

    def mul_index(self, i, j) -> np.ndarray:
        return self.index(self.mat_mul(self.elements[i], self.elements[j]))

    def left_mult_perm(self, g) -> np.ndarray:
        """Permutation x -> g x on indices."""
        return self.index(self.mat_mul(np.asarray(g)[None], self.elements))

    def right_mult_perm(self, g) -> np.ndarray:
        """Permutation x -> x g on indices."""
        return self.index(self.mat_mul(self.elements, np.asarray(g)[None]))

    def subgroup_indices(self, which) -> np.ndarray:
        return np.nonzero(self.member_mask(which, self.elements))[0]

    def random_elements(self, rng, count: int) -> np.ndarray:
        """Uniform random invertible matrices (rejection sampling)."""
        out = []
        got = 0
        while got < count:
            cand = rng.integers(0, self.q, size=(2 * count + 4, self.n, self.n))
            good = cand[self.det(cand) != 0]
            out.append(good)
            got += good.shape[0]
        return np.concatenate(out)[:count]

    # generators -------------------------------------------------------
    @cached_property
    def generators(self) -> np.ndarray:
        """Elementary matrices E_ij(t^b) for all i != j and basis elements, and diag(xi, 1, ...)."""
        gens = []
        for i in range(self.n):
            for j in range(self.n):
                if i != j:
                    for b in range(self.m):
                        gens.append(self.elementary(i, j, self.p**b))
        d = self.identity()
        d[0, 0] = self.k.primitive
        if self.q > 2:
            gens.append(d)
        if not gens:
            gens.append(self.identity())
        return np.array(gens)

    def closure_size(self, gens, limit: int | None = None) -> int:
        """Order of the group generated by matrices, by breadth-first search."""
        limit = self.budget if limit is None else limit
        seen = {int(self.encode(self.identity()))}
        frontier = self.identity()[None]
        gens = np.asarray(gens)
        while frontier.shape[0]:
            prods = self.mat_mul(frontier[:, None], gens[None]).reshape(-1, self.n, self.n)
            codes = self.encode(prods)
            codes, first = np.unique(codes, return_index=True)
            fresh = np.array([c not in seen for c in codes.tolist()], dtype=bool)
            seen.update(codes[fresh].tolist())
            if len(seen) > limit:
                raise TooLarge(f"closure exceeds {limit}")
            frontier = prods[first[fresh]]
        return len(seen)

    def subgroup_generators(self, which, seed: int = 0) -> np.ndarray:
        """A small generating set of a subgroup, verified by closure."""
        elems = self.subgroup_enumerate(which)
        order = elems.shape[0]
        if order == 1:
            return elems
        rng = np.random.default_rng(seed)
        gens = [elems[rng.integers(order)] for _ in range(2)]
        while self.closure_size(np.array(gens), limit=order) != order:
            gens.append(elems[rng.integers(order)])
        return np.array(gens)

    # cosets -----------------------------------------------------------
    def coset_reps_N(self) -> np.ndarray:
        """One index per right coset N g (the smallest index in the coset)."""
        N = self.subgroup_enumerate("N")
        E = self.elements
        best = np.arange(self.order)
        for u in N:
            best = np.minimum(best, self.index(self.mat_mul(u[None], E)))
        return np.unique(best)

    def double_cosets(self, left_gens, right_gens) -> np.ndarray:
        """Smallest index in each double coset <left> g <right>."""
        from scipy.sparse import coo_matrix
        from scipy.sparse.csgraph import connected_components

        E = self.elements
        src, dst = [], []
        ar = np.arange(self.order)
        for g in np.asarray(left_gens):
            src.append(ar)
            dst.append(self.index(self.mat_mul(g[None], E)))
        for h in np.asarray(right_gens):
            src.append(ar)
            dst.append(self.index(self.mat_mul(E, h[None])))
        src = np.concatenate(src)
        dst = np.concatenate(dst)
        graph = coo_matrix((np.ones(src.size, dtype=np.int8), (src, dst)), shape=(self.order, self.order))
        _, labels = connected_components(graph, directed=True, connection="weak")
        reps = np.full(labels.max() + 1, self.order)
        np.minimum.at(reps, labels, ar)
        return np.sort(reps)

    def lang_solve(self, gamma, exhaustive: bool | None = None):
        """Some x with sigma(x) x^-1 = gamma, or None if there is none."""
        gamma = np.asarray(gamma, dtype=np.int64)
        if exhaustive is None:
            exhaustive = self.order <= self.budget
        if exhaustive:
            E = self.elements
            vals = self.mat_mul(self.sigma(E), self.inv(E))
            hit = np.nonzero(self.encode(vals) == int(self.encode(gamma)))[0]
            return E[hit[0]] if hit.size else None
        return self._lang_linear(gamma)

    def _lang_linear(self, gamma, tries: int = 200, seed: int = 0):
        """Solve sigma(x) = gamma x over F_p and pick an invertible solution."""
        k = self.k
        n, m, p = self.n, self.m, self.p
        dim = n * n * m
        # basis of M_n(F_q) over F_p: unit matrix times t^b
        basis = []
        for pos in range(n * n):
            for b in range(m):
                X = np.zeros(n * n, dtype=np.int64)
                X[pos] = p**b
                basis.append(X.reshape(n, n))
        basis = np.array(basis)
        lhs = self.sigma(basis)
        rhs = self.mat_mul(gamma[None], basis)
        diff = k.add_t[lhs, k.neg_t[rhs]]
        cols = k.digits[diff.reshape(dim, n * n)].reshape(dim, n * n * m)
        from .linalg import PrimeField

        F = PrimeField(p)
        sol = nullspace(F, cols.T)
        if sol.shape[0] == 0:
            return None
        rng = np.random.default_rng(seed)
        for _ in range(tries):
            c = rng.integers(0, p, size=sol.shape[0])
            coeffs = (c @ sol) % p
            X = np.zeros((n, n), dtype=np.int64)
            for idx in np.nonzero(coeffs)[0]:
                term = k.mul_t[int(coeffs[idx]) % p, basis[idx]] if p > 2 else basis[idx]
                X = k.add_t[X, term]
            if self.det(X) != 0:
                return X
        return None


def subspace_key(ctx: GroupContext, rows) -> tuple:
    """Canonical key (RREF) of the row space of a matrix over F_q."""
    from .linalg import rref

    R, piv = rref(ctx.k.la, np.asarray(rows))
    return tuple(R[: len(piv)].astype(np.int64).ravel().tolist())
