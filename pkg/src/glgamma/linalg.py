"""Dense linear algebra over finite fields.

A field object supplies vectorized ``add``, ``sub``, ``mul``, ``inv`` on
integer arrays.  Prime fields use modular arithmetic (moduli below 2^31 so
products fit in int64); other fields use lookup tables.
"""
from __future__ import annotations

import numpy as np


class PrimeField:
    def __init__(self, p: int):
        if p >= 2**31:
            raise ValueError("modulus too large for int64 products")
        self.p = int(p)
        self.order = self.p
        self.dtype = np.int64

    def __repr__(self):
        return f"PrimeField({self.p})"

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("prime", self.p))

    def asarray(self, a) -> np.ndarray:
        return np.asarray(a, dtype=np.int64) % self.p

    def add(self, a, b):
        return (a + b) % self.p

    def sub(self, a, b):
        return (a - b) % self.p

    def neg(self, a):
        return (-a) % self.p

    def mul(self, a, b):
        return (a * b) % self.p

    def eliminate(self, block, mult, row):
        """block - mult[:, None] * row[None, :]"""
        return (block - mult[:, None] * row[None, :]) % self.p

    def inv(self, a):
        a = np.asarray(a, dtype=np.int64)
        if np.any(a % self.p == 0):
            raise ZeroDivisionError("inverse of zero")
        if a.ndim == 0:
            return np.int64(pow(int(a), -1, self.p))
        return np.array([pow(int(x), -1, self.p) for x in a.flat], dtype=np.int64).reshape(a.shape)

    def matmul(self, A, B):
        A = np.asarray(A, dtype=np.int64)
        B = np.asarray(B, dtype=np.int64)
        if self.p < 2**20 and A.shape[-1] < 2**20:
            # chunk the inner dimension so partial sums stay below 2^62
            step = max(1, (2**62) // (self.p * self.p))
            if A.shape[-1] <= step:
                return (A @ B) % self.p
            out = np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
            for s in range(0, A.shape[-1], step):
                out = (out + A[:, s : s + step] @ B[s : s + step]) % self.p
            return out
        out = np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
        for k in range(A.shape[1]):
            out = (out + np.outer(A[:, k], B[k]) % self.p) % self.p
        return out


class TableField:
    """A small finite field given by addition and multiplication tables."""

    def __init__(self, add_table: np.ndarray, mul_table: np.ndarray, name: str = "F"):
        self.add_t = np.asarray(add_table)
        self.mul_t = np.asarray(mul_table)
        self.order = self.add_t.shape[0]
        q = self.order
        self.dtype = np.int16 if q > 255 else np.uint8
        self.neg_t = np.argmin(self.add_t, axis=1).astype(self.dtype)  # a + (-a) = 0
        inv = np.zeros(q, dtype=self.dtype)
        for a in range(1, q):
            inv[a] = int(np.nonzero(self.mul_t[a] == 1)[0][0])
        self.inv_t = inv
        self.name = name

    def __repr__(self):
        return f"TableField({self.name})"

    def asarray(self, a) -> np.ndarray:
        return np.asarray(a).astype(self.dtype)

    def add(self, a, b):
        return self.add_t[a, b]

    def sub(self, a, b):
        return self.add_t[a, self.neg_t[b]]

    def neg(self, a):
        return self.neg_t[a]

    def mul(self, a, b):
        return self.mul_t[a, b]

    def eliminate(self, block, mult, row):
        return self.add_t[block, self.neg_t[self.mul_t[mult[:, None], row[None, :]]]]

    def inv(self, a):
        a = np.asarray(a)
        if np.any(a == 0):
            raise ZeroDivisionError("inverse of zero")
        return self.inv_t[a]

    def matmul(self, A, B):
        A = np.asarray(A)
        B = np.asarray(B)
        out = np.zeros((A.shape[0], B.shape[1]), dtype=self.dtype)
        for k in range(A.shape[1]):
            out = self.add_t[out, self.mul_t[A[:, k][:, None], B[k][None, :]]]
        return out


class GF2:
    """The field with two elements, using XOR/AND on uint8 arrays."""

    order = 2
    dtype = np.uint8

    def __repr__(self):
        return "GF2"

    def __eq__(self, other):
        return isinstance(other, GF2)

    def __hash__(self):
        return hash("GF2")

    def asarray(self, a):
        return (np.asarray(a) % 2).astype(np.uint8)

    def add(self, a, b):
        return a ^ b

    sub = add

    def neg(self, a):
        return a

    def mul(self, a, b):
        return a & b

    def eliminate(self, block, mult, row):
        return block ^ (mult[:, None] & row[None, :])

    def inv(self, a):
        a = np.asarray(a)
        if np.any(a == 0):
            raise ZeroDivisionError("inverse of zero")
        return a

    def matmul(self, A, B):
        A = np.asarray(A, dtype=np.int64)
        B = np.asarray(B, dtype=np.int64)
        return ((A @ B) & 1).astype(np.uint8)


def rref(F, A):
    """Reduced row echelon form; returns (R, pivot columns)."""
    A = F.asarray(A).copy()
    rows, cols = A.shape
    r = 0
    pivots: list[int] = []
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(A[r:, c])[0]
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            A[[r, p]] = A[[p, r]]
        piv = A[r, c]
        if piv != 1:
            A[r] = F.mul(A[r], F.inv(piv))
        others = np.nonzero(A[:, c])[0]
        others = others[others != r]
        if others.size:
            A[others, c:] = F.eliminate(A[others, c:], A[others, c], A[r, c:])
        pivots.append(c)
        r += 1
    return A, pivots


def rank(F, A) -> int:
    A = F.asarray(A)
    if A.size == 0:
        return 0
    return len(rref(F, A)[1])


def nullspace(F, A) -> np.ndarray:
    """Basis (as rows) of {x : A x = 0}."""
    A = F.asarray(A)
    rows, cols = A.shape
    if rows == 0:
        return np.eye(cols, dtype=F.dtype)
    R, piv = rref(F, A)
    free = [c for c in range(cols) if c not in set(piv)]
    basis = np.zeros((len(free), cols), dtype=F.dtype)
    for i, f in enumerate(free):
        basis[i, f] = 1
        for r, pc in enumerate(piv):
            if R[r, f]:
                basis[i, pc] = F.neg(R[r, f])
    return basis


def left_nullspace(F, A) -> np.ndarray:
    """Basis (as rows) of {y : y A = 0}."""
    return nullspace(F, F.asarray(A).T)


def row_space(F, A) -> np.ndarray:
    R, piv = rref(F, A)
    return R[: len(piv)]


def solve(F, A, b):
    """One solution x of A x = b, or None."""
    A = F.asarray(A)
    b = F.asarray(b).reshape(-1, 1)
    aug = np.concatenate([A, b], axis=1)
    R, piv = rref(F, aug)
    n = A.shape[1]
    if n in piv:
        return None
    x = np.zeros(n, dtype=F.dtype)
    for r, c in enumerate(piv):
        x[c] = R[r, n]
    return x


def inverse(F, A):
    A = F.asarray(A)
    n = A.shape[0]
    aug = np.concatenate([A, np.eye(n, dtype=F.dtype)], axis=1)
    R, piv = rref(F, aug)
    if piv[:n] != list(range(n)):
        raise ZeroDivisionError("singular matrix")
    return R[:, n:]


def coordinates(F, basis_rref: np.ndarray, pivots, v) -> np.ndarray:
    """Coordinates of row vectors v in a basis given in RREF with its pivots."""
    v = F.asarray(v)
    return v[..., list(pivots)]


def complement_basis(F, sub: np.ndarray, dim: int) -> np.ndarray:
    """Standard basis vectors completing the row space of ``sub`` to F^dim."""
    if sub.shape[0] == 0:
        return np.eye(dim, dtype=F.dtype)
    _, piv = rref(F, sub)
    free = [c for c in range(dim) if c not in set(piv)]
    out = np.zeros((len(free), dim), dtype=F.dtype)
    out[np.arange(len(free)), free] = 1
    return out
