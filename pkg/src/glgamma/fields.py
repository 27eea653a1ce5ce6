"""Finite fields F_q = F_p[t]/(f) as lookup tables, and additive characters.

An element is encoded as the integer sum c_i p^i where c_i is the coefficient
of t^i.  All arithmetic is table lookup on these codes, so numpy arrays of
codes can be added and multiplied element-wise.
"""
from __future__ import annotations

from functools import lru_cache
from itertools import product

import numpy as np
import sympy

from .linalg import GF2, PrimeField, TableField
from .scalars import CycloArray, CycloNumber, cyclo_field


def _poly_mulmod(a, b, f, p):
    """Multiply coefficient lists (low to high) modulo monic f (low to high)."""
    m = len(f) - 1
    res = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                res[i + j] = (res[i + j] + x * y) % p
    for d in range(len(res) - 1, m - 1, -1):
        c = res[d]
        if c:
            for i in range(m + 1):
                res[d - m + i] = (res[d - m + i] - c * f[i]) % p
    res = res[:m] + [0] * max(0, m - len(res))
    return res


def default_modulus(p: int, m: int) -> list[int]:
    """The irreducible monic polynomial of degree m with the smallest
    coefficient tuple (t^(m-1) coefficient first); low-to-high list."""
    t = sympy.Symbol("t")
    if m == 1:
        return [0, 1]
    for tail in product(range(p), repeat=m):
        coeffs = [1] + list(tail)  # high to low
        if coeffs[-1] == 0:
            continue
        if sympy.Poly(coeffs, t, modulus=p).is_irreducible:
            return coeffs[::-1]
    raise ValueError("no irreducible polynomial found")


class Fq:
    """The field with q = p^m elements."""

    def __init__(self, p: int, m: int = 1, subfield_degree: int | None = None, modulus=None):
        if not sympy.isprime(p):
            raise ValueError(f"{p} is not prime")
        if m < 1:
            raise ValueError("degree must be positive")
        if subfield_degree is not None and m % subfield_degree:
            raise ValueError("subfield degree must divide the degree")
        self.p = p
        self.m = m
        self.q = p**m
        self.modulus = list(modulus) if modulus is not None else default_modulus(p, m)
        self.subfield_degree = subfield_degree
        q = self.q
        digits = np.array([[(a // p**i) % p for i in range(m)] for a in range(q)], dtype=np.int64)
        self.digits = digits
        weights = p ** np.arange(m)
        self.add_t = (((digits[:, None, :] + digits[None, :, :]) % p) @ weights).astype(np.int64)
        mul = np.zeros((q, q), dtype=np.int64)
        for a in range(q):
            for b in range(a, q):
                c = _poly_mulmod(list(digits[a]), list(digits[b]), self.modulus, p)
                v = int(np.dot(c, weights))
                mul[a, b] = mul[b, a] = v
        self.mul_t = mul
        self.neg_t = (((-digits) % p) @ weights).astype(np.int64)
        inv = np.zeros(q, dtype=np.int64)
        for a in range(1, q):
            inv[a] = int(np.nonzero(mul[a] == 1)[0][0])
        self.inv_t = inv
        self.frob_t = self.pow_table(p)
        # absolute trace to F_p, as an integer in [0, p)
        acc = np.zeros(q, dtype=np.int64)
        cur = np.arange(q)
        for _ in range(m):
            acc = self.add_t[acc, cur]
            cur = self.frob_t[cur]
        self.trace_t = acc  # lies in the prime field, so the code equals the value
        self.primitive = self._find_primitive()
        self.log_t = np.full(q, -1, dtype=np.int64)
        x = 1
        for k in range(q - 1):
            self.log_t[x] = k
            x = int(mul[x, self.primitive])
        self.exp_t = np.zeros(q - 1, dtype=np.int64)
        self.exp_t[self.log_t[1:]] = np.arange(1, q)

    # ------------------------------------------------------------------
    def __repr__(self):
        sub = f", k0=F_{self.p ** self.subfield_degree}" if self.subfield_degree else ""
        return f"Fq(F_{self.q}{sub})"

    def describe(self) -> dict:
        return {"p": self.p, "m": self.m, "modulus": self.modulus, "k0_degree": self.subfield_degree}

    def pow_table(self, e: int) -> np.ndarray:
        out = np.zeros(self.q, dtype=np.int64)
        for a in range(self.q):
            r, b, k = 1, a, e
            while k:
                if k & 1:
                    r = int(self.mul_t[r, b])
                b = int(self.mul_t[b, b])
                k >>= 1
            out[a] = r
        return out

    def _find_primitive(self) -> int:
        if self.q == 2:
            return 1
        order = self.q - 1
        primes = list(sympy.factorint(order))
        for g in range(2, self.q):
            tabs = [self.pow_table(order // r)[g] for r in primes]
            if all(t != 1 for t in tabs):
                return g
        raise ValueError("no primitive element")

    def element(self, coeffs) -> int:
        """Code of sum coeffs[i] t^i."""
        return int(sum((int(c) % self.p) * self.p**i for i, c in enumerate(coeffs)))

    @property
    def t(self) -> int:
        return self.element([0, 1]) if self.m > 1 else self.primitive

    # arithmetic on codes ----------------------------------------------
    def add(self, a, b):
        return self.add_t[a, b]

    def sub(self, a, b):
        return self.add_t[a, self.neg_t[b]]

    def mul(self, a, b):
        return self.mul_t[a, b]

    def neg(self, a):
        return self.neg_t[a]

    def inv(self, a):
        a = np.asarray(a)
        if np.any(a == 0):
            raise ZeroDivisionError("inverse of zero in F_q")
        return self.inv_t[a]

    def power(self, a, e: int):
        if e == 0:
            return np.ones_like(np.asarray(a))
        a = np.asarray(a)
        out = np.zeros_like(a)
        nz = a != 0
        if e < 0 and not np.all(nz):
            raise ZeroDivisionError("negative power of zero in F_q")
        out[nz] = self.exp_t[(self.log_t[a[nz]] * e) % (self.q - 1)]
        return out

    def frobenius(self, a, times: int = 1):
        for _ in range(times % self.m if self.m else 0):
            a = self.frob_t[a]
        return a

    def trace(self, a):
        """Absolute trace to F_p (integers in [0, p))."""
        return self.trace_t[a]

    # subfield ---------------------------------------------------------
    def _need_sub(self):
        if not self.subfield_degree:
            raise ValueError("no designated subfield")
        return self.subfield_degree

    def sigma(self, a):
        """Generator of Gal(k/k0): x -> x^(p^d)."""
        return self.frobenius(a, self._need_sub())

    def subfield_elements(self) -> np.ndarray:
        d = self._need_sub()
        allx = np.arange(self.q)
        return allx[self.frobenius(allx, d) == allx]

    def rel_trace(self, a):
        d = self._need_sub()
        a = np.asarray(a)
        acc = np.zeros_like(a)
        cur = a
        for _ in range(self.m // d):
            acc = self.add_t[acc, cur]
            cur = self.frobenius(cur, d)
        return acc

    def rel_norm(self, a):
        d = self._need_sub()
        a = np.asarray(a)
        acc = np.ones_like(a)
        cur = a
        for _ in range(self.m // d):
            acc = self.mul_t[acc, cur]
            cur = self.frobenius(cur, d)
        return acc

    # linear algebra field ---------------------------------------------
    @property
    def la(self):
        return _la_field(self)


@lru_cache(maxsize=None)
def _la_field_cached(p, m, modulus):
    k = build_field(p, m, modulus=modulus)
    if m == 1:
        return GF2() if p == 2 else PrimeField(p)
    return TableField(k.add_t, k.mul_t, name=f"F_{k.q}")


def _la_field(k: Fq):
    return _la_field_cached(k.p, k.m, tuple(k.modulus))


@lru_cache(maxsize=None)
def _build_field(p, m, subfield_degree, modulus):
    return Fq(p, m, subfield_degree, None if modulus is None else list(modulus))


def build_field(p: int, m: int = 1, subfield_degree: int | None = None, modulus=None) -> Fq:
    return _build_field(p, m, subfield_degree, None if modulus is None else tuple(modulus))


class AdditiveCharacter:
    """psi_beta(x) = zeta_p^Tr(beta x), valued in Q(zeta_N) with p | N."""

    def __init__(self, k: Fq, beta: int, trivial_on_k0: bool = False):
        if beta == 0:
            raise ValueError("beta must be nonzero")
        self.k = k
        self.beta = int(beta)
        self.trivial_on_k0 = trivial_on_k0

    def __repr__(self):
        return f"AdditiveCharacter(beta={self.beta}, k=F_{self.k.q})"

    def exponent(self, x):
        """Integer t in [0, p) with psi(x) = zeta_p^t."""
        return self.k.trace(self.k.mul(self.beta, x))

    def value(self, x: int, N: int) -> CycloNumber:
        return cyclo_field(N).root_of_unity(self.k.p, int(self.exponent(x)))

    def values(self, xs, N: int) -> CycloArray:
        F = cyclo_field(N)
        t = np.asarray(self.exponent(np.asarray(xs)))
        return CycloArray(N, F.Z[(t * (N // self.k.p)) % N], 1)

    def power(self, a: int) -> "AdditiveCharacter":
        """x -> psi(a x)."""
        return AdditiveCharacter(self.k, int(self.k.mul(self.beta, a)), self.trivial_on_k0)

    def inverse(self) -> "AdditiveCharacter":
        return self.power(int(self.k.neg(1)))

    def describe(self) -> dict:
        return {"beta": self.beta, "trivial_on_k0": self.trivial_on_k0}


def additive_character(k: Fq, trivial_on_k0: bool = False) -> AdditiveCharacter:
    if not trivial_on_k0:
        return AdditiveCharacter(k, 1)
    k._need_sub()
    if k.m // k.subfield_degree != 2:
        raise ValueError("the trivial-on-k0 character needs an index-2 subfield")
    allx = np.arange(1, k.q)
    ker = allx[k.rel_trace(allx) == 0]
    return AdditiveCharacter(k, int(ker.min()), True)
