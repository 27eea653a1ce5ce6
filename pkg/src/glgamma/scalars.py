"""Exact scalars: cyclotomic fields Q(zeta_N), square roots of q, and
reduction maps onto finite fields of characteristic l.

Elements of Q(zeta_N) are stored in the power basis 1, z, ..., z^(phi-1)
modulo the N-th cyclotomic polynomial, as an integer numerator vector with
a positive common denominator.  The representation is canonical after
normalization, so equality is coefficient-wise.

Bulk work goes through :class:`CycloArray` (many elements sharing one
denominator) and :class:`ModArray`; the scalar classes are thin wrappers.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt

import numpy as np
import sympy
from sympy.polys.domains import ZZ
from sympy.polys.galoistools import gf_factor_sqf, gf_from_int_poly

_INT64_SAFE = 2**62


class NonIntegralScalar(ValueError):
    """Raised when reducing a scalar whose denominator is divisible by l."""


def _lcm(a: int, b: int) -> int:
    return a // gcd(a, b) * b


def _vec_gcd(v) -> int:
    g = 0
    for x in v:
        g = gcd(g, int(x))
        if g == 1:
            return 1
    return g


def _maxabs(a: np.ndarray) -> int:
    if a.size == 0:
        return 0
    if a.dtype == object:
        return max(abs(int(x)) for x in a.flat)
    return int(np.abs(a).max())


def safe_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact integer matrix product, falling back to Python ints on overflow risk."""
    inner = a.shape[-1] if a.ndim else 1
    if a.dtype != object and b.dtype != object:
        if _maxabs(a) * _maxabs(b) * max(inner, 1) < _INT64_SAFE:
            return a.astype(np.int64) @ b.astype(np.int64)
    return a.astype(object) @ b.astype(object)


def _shrink(a: np.ndarray) -> np.ndarray:
    """Return an int64 copy when every entry fits, otherwise keep objects."""
    if a.dtype == object and (a.size == 0 or _maxabs(a) < _INT64_SAFE):
        return a.astype(np.int64)
    return a


# ---------------------------------------------------------------------------
# cyclotomic fields


class CycloField:
    """Q(zeta_N) with a precomputed table of powers of zeta in the power basis."""

    def __init__(self, N: int):
        if N < 1:
            raise ValueError("conductor must be positive")
        self.N = N
        x = sympy.Symbol("x")
        coeffs = sympy.Poly(sympy.cyclotomic_poly(N, x), x).all_coeffs()[::-1]
        self.poly = np.array([int(c) for c in coeffs], dtype=np.int64)
        self.phi = len(coeffs) - 1
        phi = self.phi
        # Z[t] = power-basis vector of zeta^t, 0 <= t < N (plus a spare row)
        rows = max(N, 2 * phi)
        Z = np.zeros((rows, phi), dtype=object)
        v = [0] * phi
        v[0] = 1
        top = [-int(c) for c in self.poly[:phi]]
        for t in range(rows):
            Z[t] = v
            carry = v[-1]
            v = [0] + v[:-1]
            if carry:
                v = [a + carry * b for a, b in zip(v, top)]
        self.Z = _shrink(Z)
        # rows indexed mod N, used by products whose degree exceeds N
        self._Zmod = self.Z[np.arange(2 * phi) % N] if N > 1 else self.Z[np.zeros(2 * phi, dtype=int)]

    def __repr__(self) -> str:
        return f"CycloField({self.N})"

    # elements ---------------------------------------------------------
    def zero(self) -> "CycloNumber":
        return CycloNumber(self.N, np.zeros(self.phi, dtype=np.int64), 1)

    def one(self) -> "CycloNumber":
        return self.from_int(1)

    def from_int(self, a) -> "CycloNumber":
        a = Fraction(a)
        v = np.zeros(self.phi, dtype=object)
        v[0] = a.numerator
        return CycloNumber(self.N, v, a.denominator)

    def zeta(self, t: int = 1) -> "CycloNumber":
        return CycloNumber(self.N, self.Z[t % self.N].copy(), 1)

    def root_of_unity(self, order: int, t: int = 1) -> "CycloNumber":
        if self.N % order:
            raise ValueError(f"order {order} does not divide conductor {self.N}")
        return self.zeta(t * (self.N // order))

    def from_group_ring(self, counts) -> np.ndarray:
        """Map vectors of coefficients on zeta^0..zeta^(N-1) to the power basis."""
        counts = np.asarray(counts)
        return safe_matmul(counts, self.Z[: self.N])

    # linear maps ------------------------------------------------------
    def mul_matrix(self, x: "CycloNumber") -> np.ndarray:
        """Integer matrix M with v @ M = v * num(x) for power-basis rows v."""
        phi = self.phi
        M = np.zeros((phi, phi), dtype=object)
        row = [int(c) for c in x.num]
        top = [-int(c) for c in self.poly[:phi]]
        for i in range(phi):
            M[i] = row
            carry = row[-1]
            row = [0] + row[:-1]
            if carry:
                row = [a + carry * b for a, b in zip(row, top)]
        return _shrink(M)

    def galois_matrix(self, a: int) -> np.ndarray:
        """Matrix of the automorphism zeta -> zeta^a (a coprime to N)."""
        if gcd(a, self.N) != 1:
            raise ValueError("Galois exponent must be coprime to the conductor")
        idx = (a * np.arange(self.phi)) % self.N
        return self.Z[idx]

    def product_fold(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Row-wise exact products of power-basis numerators a, b of shape (B, phi)."""
        phi = self.phi
        B = a.shape[0]
        cbound = _maxabs(a) * _maxabs(b) * phi
        big = a.dtype == object or b.dtype == object or cbound * max(_maxabs(self.Z), 1) * 2 * phi >= _INT64_SAFE
        dt = object if big else np.int64
        c = np.zeros((B, 2 * phi - 1), dtype=dt)
        aa = a.astype(dt)
        bb = b.astype(dt)
        for s in range(phi):
            col = aa[:, s : s + 1]
            if dt is not object and not col.any():
                continue
            c[:, s : s + phi] += col * bb
        return safe_matmul(c, self._Zmod[: 2 * phi - 1])


@lru_cache(maxsize=None)
def cyclo_field(N: int) -> CycloField:
    return CycloField(N)


class CycloNumber:
    """An exact element of Q(zeta_N)."""

    __slots__ = ("N", "num", "den", "_hash")

    def __init__(self, N: int, num, den: int = 1, *, normalized: bool = False):
        self.N = int(N)
        num = np.asarray(num)
        if num.dtype != object and num.dtype != np.int64:
            num = num.astype(np.int64)
        den = int(den)
        if den == 0:
            raise ZeroDivisionError("zero denominator")
        if not normalized:
            if den < 0:
                num, den = -num, -den
            g = gcd(_vec_gcd(num.flat), den)
            if g > 1:
                num = num // g
                den //= g
            num = _shrink(num) if num.dtype == object else num
        self.num = num
        self.den = den
        self._hash = None

    @property
    def field(self) -> CycloField:
        return cyclo_field(self.N)

    # helpers ----------------------------------------------------------
    def _coerce(self, other) -> "CycloNumber":
        if isinstance(other, CycloNumber):
            if other.N != self.N:
                raise ValueError(f"conductor mismatch {self.N} vs {other.N}")
            return other
        if isinstance(other, (int, Fraction, np.integer)):
            return self.field.from_int(other)
        return NotImplemented

    def coeffs(self) -> list[Fraction]:
        return [Fraction(int(c), self.den) for c in self.num]

    def is_zero(self) -> bool:
        return not np.any(self.num)

    def is_rational(self) -> bool:
        return not np.any(self.num[1:])

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("not a rational number")
        return Fraction(int(self.num[0]), self.den)

    # arithmetic -------------------------------------------------------
    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        L = _lcm(self.den, o.den)
        a = self.num.astype(object) * (L // self.den) + o.num.astype(object) * (L // o.den)
        return CycloNumber(self.N, a, L)

    __radd__ = __add__

    def __neg__(self):
        return CycloNumber(self.N, -self.num, self.den, normalized=True)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, np.integer)):
            return CycloNumber(self.N, self.num.astype(object) * int(other), self.den)
        if isinstance(other, Fraction):
            return CycloNumber(self.N, self.num.astype(object) * other.numerator, self.den * other.denominator)
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        prod = self.field.product_fold(self.num[None, :], o.num[None, :])[0]
        return CycloNumber(self.N, prod, self.den * o.den)

    __rmul__ = __mul__

    def inverse(self) -> "CycloNumber":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in a cyclotomic field")
        if self.is_rational():
            return self.field.from_int(1 / self.to_fraction())
        y = _solve_unit(self.field.mul_matrix(self), self)
        return y * self.den

    def __truediv__(self, other):
        if isinstance(other, (int, np.integer, Fraction)):
            return self * (1 / Fraction(other))
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self.field.from_int(other) * self.inverse() if not isinstance(other, CycloNumber) else other * self.inverse()

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        result = self.field.one()
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def conj(self) -> "CycloNumber":
        return conj_bar(self)

    def galois(self, a: int) -> "CycloNumber":
        return CycloNumber(self.N, safe_matmul(self.num, self.field.galois_matrix(a)), self.den)

    def embed(self, N2: int) -> "CycloNumber":
        """The same element viewed in Q(zeta_N2), N dividing N2."""
        if N2 % self.N:
            raise ValueError("target conductor must be a multiple")
        F2 = cyclo_field(N2)
        idx = np.arange(self.field.phi) * (N2 // self.N)
        return CycloNumber(N2, safe_matmul(self.num, F2.Z[idx % N2]), self.den)

    # comparisons ------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, (int, np.integer, Fraction)):
            other = self.field.from_int(other)
        if not isinstance(other, CycloNumber):
            return NotImplemented
        if self.N != other.N:
            L = _lcm(self.N, other.N)
            return self.embed(L) == other.embed(L)
        return self.den == other.den and bool(np.array_equal(self.num, other.num))

    def __hash__(self):
        # equal numbers may live in different conductors, so only rationals hash by value
        if self._hash is None:
            self._hash = hash(self.to_fraction()) if self.is_rational() else hash(("cyclotomic", 0))
        return self._hash

    def __repr__(self) -> str:
        terms = []
        for i, c in enumerate(self.num):
            c = int(c)
            if c:
                terms.append(f"{c}" if i == 0 else f"{c}*z^{i}")
        body = " + ".join(terms) if terms else "0"
        if self.den != 1:
            body = f"({body})/{self.den}"
        return f"<Q(z{self.N}): {body}>"

    def to_json(self) -> dict:
        return {"N": self.N, "num": [int(c) for c in self.num], "den": self.den}

    @classmethod
    def from_json(cls, d: dict) -> "CycloNumber":
        return cls(d["N"], np.array(d["num"], dtype=object), d["den"])



def _rational_reconstruct(a: int, m: int):
    """Fraction r/s with r = a*s mod m and |r|, s <= sqrt(m/2), or None."""
    a %= m
    bound = isqrt(m // 2)
    r0, r1 = m, a
    s0, s1 = 0, 1
    while r1 > bound:
        qt = r0 // r1
        r0, r1 = r1, r0 - qt * r1
        s0, s1 = s1, s0 - qt * s1
    if s1 == 0 or abs(s1) > bound:
        return None
    return Fraction(r1, s1)


def _solve_unit(M: np.ndarray, x: "CycloNumber") -> "CycloNumber":
    """Solve y @ M = 1 in Q(zeta_N) by modular solves, CRT and rational
    reconstruction; the candidate is confirmed by exact multiplication."""
    from .linalg import PrimeField, solve

    phi = M.shape[0]
    Mt = M.T
    P = 2**31 - 1
    modulus = 1
    residues = np.zeros(phi, dtype=object)
    e0 = np.zeros(phi, dtype=np.int64)
    e0[0] = 1
    xnum = CycloNumber(x.N, x.num, 1)
    used = 0
    checkpoints = {1, 2, 3, 4, 6, 8, 12, 16, 24, 32, 48, 64, 96, 128, 192, 256, 384}
    for _ in range(400):
        P = int(sympy.prevprime(P))
        F = PrimeField(P)
        Mp = np.array([[int(v) % P for v in row] for row in Mt], dtype=np.int64) if Mt.dtype == object else Mt % P
        sol = solve(F, Mp, e0)
        if sol is None:
            continue
        # CRT merge
        t = pow(modulus, -1, P)
        sol = sol.astype(object)
        residues = residues + modulus * (((sol - residues) * t) % P)
        modulus *= P
        residues = residues % modulus
        used += 1
        if used not in checkpoints:
            continue
        fr = [_rational_reconstruct(int(r), modulus) for r in residues]
        if any(f is None for f in fr):
            continue
        den = 1
        for f in fr:
            den = _lcm(den, f.denominator)
        cand = CycloNumber(x.N, np.array([f.numerator * (den // f.denominator) for f in fr], dtype=object), den)
        if cand * xnum == 1:
            return cand
    raise ArithmeticError("modular inversion did not converge")


def normalize(x, N: int) -> CycloNumber:
    """Canonical element of Q(zeta_N) from a raw power-basis vector of rationals."""
    F = cyclo_field(N)
    x = list(x)
    if len(x) != F.phi:
        raise ValueError(f"expected {F.phi} coordinates, got {len(x)}")
    fr = [Fraction(c) for c in x]
    den = 1
    for f in fr:
        den = _lcm(den, f.denominator)
    return CycloNumber(N, np.array([f.numerator * (den // f.denominator) for f in fr], dtype=object), den)


def conj_bar(x: CycloNumber) -> CycloNumber:
    """Complex conjugation: every root of unity goes to its inverse."""
    return x.galois(-1)


# ---------------------------------------------------------------------------
# vectors of cyclotomic numbers


class CycloArray:
    """A stack of elements of Q(zeta_N) sharing one denominator.

    ``num`` has shape ``shape + (phi,)``.
    """

    __slots__ = ("N", "num", "den")

    def __init__(self, N: int, num: np.ndarray, den: int = 1):
        self.N = N
        self.num = num
        self.den = int(den)

    @property
    def field(self) -> CycloField:
        return cyclo_field(self.N)

    @property
    def shape(self):
        return self.num.shape[:-1]

    def __len__(self):
        return self.num.shape[0]

    @classmethod
    def from_numbers(cls, xs, N: int | None = None) -> "CycloArray":
        xs = list(xs)
        if N is None:
            N = xs[0].N
        F = cyclo_field(N)
        if not xs:
            return cls(N, np.zeros((0, F.phi), dtype=np.int64), 1)
        L = 1
        for x in xs:
            L = _lcm(L, x.den)
        num = np.array([x.num.astype(object) * (L // x.den) for x in xs], dtype=object).reshape(len(xs), F.phi)
        return cls(N, _shrink(num), L)

    @classmethod
    def zeros(cls, N: int, n: int) -> "CycloArray":
        return cls(N, np.zeros((n, cyclo_field(N).phi), dtype=np.int64), 1)

    def item(self, i) -> CycloNumber:
        return CycloNumber(self.N, self.num[i], self.den)

    def to_numbers(self) -> list[CycloNumber]:
        return [self.item(i) for i in range(len(self))]

    def take(self, idx) -> "CycloArray":
        return CycloArray(self.N, self.num[idx], self.den)

    def normalized(self) -> "CycloArray":
        g = gcd(_vec_gcd(self.num.flat), self.den) if self.num.size else self.den
        if g > 1:
            return CycloArray(self.N, self.num // g, self.den // g)
        return self

    def with_den(self, L: int) -> np.ndarray:
        """Numerators rescaled to denominator L (a multiple of self.den)."""
        if L % self.den:
            raise ValueError("target denominator must be a multiple")
        f = L // self.den
        if f == 1:
            return self.num
        if self.num.dtype != object and _maxabs(self.num) * f < _INT64_SAFE:
            return self.num * f
        return _shrink(self.num.astype(object) * f)

    def __add__(self, other: "CycloArray") -> "CycloArray":
        L = _lcm(self.den, other.den)
        a, b = self.with_den(L), other.with_den(L)
        if a.dtype == object or b.dtype == object or _maxabs(a) + _maxabs(b) >= _INT64_SAFE:
            s = _shrink(a.astype(object) + b.astype(object))
        else:
            s = a + b
        return CycloArray(self.N, s, L)

    def __neg__(self) -> "CycloArray":
        return CycloArray(self.N, -self.num, self.den)

    def __sub__(self, other: "CycloArray") -> "CycloArray":
        return self + (-other)

    def scale(self, c) -> "CycloArray":
        c = Fraction(c)
        num = self.num
        if c.numerator != 1:
            if num.dtype != object and _maxabs(num) * abs(c.numerator) < _INT64_SAFE:
                num = num * c.numerator
            else:
                num = _shrink(num.astype(object) * c.numerator)
        return CycloArray(self.N, num, self.den * c.denominator)

    def mul_number(self, x: CycloNumber) -> "CycloArray":
        M = self.field.mul_matrix(x)
        flat = self.num.reshape(-1, self.field.phi)
        out = safe_matmul(flat, M).reshape(self.num.shape)
        return CycloArray(self.N, out, self.den * x.den)

    def __mul__(self, other: "CycloArray") -> "CycloArray":
        if isinstance(other, CycloNumber):
            return self.mul_number(other)
        phi = self.field.phi
        a = self.num.reshape(-1, phi)
        b = other.num.reshape(-1, phi)
        out = np.empty((0, phi), dtype=np.int64)
        chunks = []
        step = max(1, 2_000_000 // (phi * phi))
        for s in range(0, a.shape[0], step):
            chunks.append(self.field.product_fold(a[s : s + step], b[s : s + step]))
        if chunks:
            dt = object if any(c.dtype == object for c in chunks) else np.int64
            out = np.concatenate([c.astype(dt) for c in chunks])
        return CycloArray(self.N, out.reshape(self.num.shape), self.den * other.den)

    def sum(self, axis: int = 0) -> "CycloArray | CycloNumber":
        if self.num.dtype == object:
            s = self.num.sum(axis=axis)
        else:
            bound = _maxabs(self.num) * max(self.num.shape[axis], 1)
            s = self.num.sum(axis=axis) if bound < _INT64_SAFE else self.num.astype(object).sum(axis=axis)
        if s.ndim == 1:
            return CycloNumber(self.N, s, self.den)
        return CycloArray(self.N, s, self.den)

    def embed(self, N2: int) -> "CycloArray":
        """Image in Q(zeta_N2) for a multiple N2 of N."""
        if N2 % self.N:
            raise ValueError("target conductor must be a multiple")
        if N2 == self.N:
            return self
        F2 = cyclo_field(N2)
        E = F2.Z[(np.arange(self.field.phi) * (N2 // self.N)) % N2]
        out = safe_matmul(self.num.reshape(-1, self.field.phi), E).reshape(self.shape + (F2.phi,))
        return CycloArray(N2, out, self.den)

    def galois(self, a: int) -> "CycloArray":
        G = self.field.galois_matrix(a % self.N)
        return CycloArray(self.N, safe_matmul(self.num.reshape(-1, self.field.phi), G).reshape(self.num.shape), self.den)

    def conj(self) -> "CycloArray":
        G = self.field.galois_matrix(-1)
        return CycloArray(self.N, safe_matmul(self.num.reshape(-1, self.field.phi), G).reshape(self.num.shape), self.den)

    def is_zero(self) -> bool:
        return not np.any(self.num)

    def nonzero_mask(self) -> np.ndarray:
        return np.any(self.num != 0, axis=-1)

    def row_ids(self, common_den: int | None = None) -> np.ndarray:
        """Integer ids with equal ids exactly for equal values."""
        L = common_den or self.den
        num = self.with_den(L).reshape(-1, self.field.phi)
        if num.dtype == object:
            keys = [tuple(r) for r in num]
            table: dict = {}
            return np.array([table.setdefault(k, len(table)) for k in keys], dtype=np.int64).reshape(self.shape)
        _, inv = np.unique(num, axis=0, return_inverse=True)
        return inv.reshape(self.shape)


def values_equal(a: CycloArray, b: CycloArray) -> np.ndarray:
    """Element-wise exact equality of two arrays of the same shape."""
    L = _lcm(a.den, b.den)
    x, y = a.with_den(L), b.with_den(L)
    return np.all(x == y, axis=-1)


# ---------------------------------------------------------------------------
# square roots of q


def _legendre(x: int, p: int) -> int:
    r = pow(x, (p - 1) // 2, p)
    return -1 if r == p - 1 else r


def base_conductor(p: int) -> int:
    return 8 if p == 2 else 4 * p


def sqrt_q(p: int, m: int, convention: str = "generic", conductor: int | None = None) -> CycloNumber:
    """A square root of q = p^m in Q(zeta_N).

    ``galois``: the integer p^(m/2), m must be even.
    ``generic``: the positive real square root, built from a quadratic Gauss
    sum when m is odd.
    """
    N = conductor or base_conductor(p)
    if N % base_conductor(p):
        raise ValueError(f"conductor {N} must be a multiple of {base_conductor(p)}")
    F = cyclo_field(N)
    if convention == "galois":
        if m % 2:
            raise ValueError("the galois convention needs an even degree")
        return F.from_int(p ** (m // 2))
    if convention != "generic":
        raise ValueError(f"unknown square-root convention {convention!r}")
    base = F.from_int(p ** (m // 2))
    if m % 2 == 0:
        return base
    if p == 2:
        root2 = F.root_of_unity(8, 1) + F.root_of_unity(8, 7)
        return base * root2
    g = F.zero()
    for x in range(1, p):
        g = g + F.root_of_unity(p, x) * _legendre(x, p)
    if p % 4 == 3:
        g = g * F.root_of_unity(4, 3)
    return base * g


def q_half_power(sq: CycloNumber, q: int, k: int) -> CycloNumber:
    """(q^(1/2))^k for any integer k."""
    if k >= 0:
        return sq**k
    return sq ** (-k) * Fraction(1, q ** (-k))


# ---------------------------------------------------------------------------
# finite fields F_l[x]/(f)


class ModField:
    """F_{l^m} realized as F_l[x]/(f) with f monic irreducible."""

    def __init__(self, ell: int, f):
        self.ell = int(ell)
        self.f = [int(c) % ell for c in f]  # high-to-low, monic
        if self.f[0] != 1:
            raise ValueError("defining polynomial must be monic")
        self.m = len(self.f) - 1
        m = self.m
        # X[k] = vector (low-to-high) of x^k mod f, 0 <= k <= 2m-2
        X = np.zeros((max(2 * m - 1, 1), m), dtype=np.int64)
        v = np.zeros(m, dtype=np.int64)
        v[0] = 1
        low = np.array([(-c) % ell for c in self.f[1:]][::-1], dtype=np.int64)  # x^m = sum low_i x^i
        for k in range(X.shape[0]):
            X[k] = v
            carry = v[-1]
            v = np.concatenate([[0], v[:-1]])
            if carry:
                v = (v + carry * low) % ell
        self.X = X
        self.order = ell**m

    def __repr__(self):
        return f"ModField(F_{self.ell}^{self.m})"

    def __eq__(self, other):
        return isinstance(other, ModField) and self.ell == other.ell and self.f == other.f

    def __hash__(self):
        return hash((self.ell, tuple(self.f)))

    def fold(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        m, ell = self.m, self.ell
        B = a.shape[0]
        c = np.zeros((B, 2 * m - 1), dtype=np.int64)
        for s in range(m):
            c[:, s : s + m] = (c[:, s : s + m] + a[:, s : s + 1] * b) % ell
        return (c @ self.X) % ell

    def element(self, v) -> "ModScalar":
        return ModScalar(self, np.asarray(v, dtype=np.int64) % self.ell)

    def from_int(self, a: int) -> "ModScalar":
        v = np.zeros(self.m, dtype=np.int64)
        v[0] = a % self.ell
        return ModScalar(self, v)

    def zero(self):
        return self.from_int(0)

    def one(self):
        return self.from_int(1)

    def gen(self) -> "ModScalar":
        v = np.zeros(self.m, dtype=np.int64)
        if self.m == 1:
            v[0] = (-self.f[1]) % self.ell
        else:
            v[1] = 1
        return ModScalar(self, v)


class ModScalar:
    """An element of F_{l^m}."""

    __slots__ = ("field", "value")

    def __init__(self, field: ModField, value: np.ndarray):
        self.field = field
        self.value = value

    def _c(self, o):
        if isinstance(o, ModScalar):
            if o.field != self.field:
                raise ValueError("field mismatch")
            return o
        if isinstance(o, (int, np.integer)):
            return self.field.from_int(int(o))
        return NotImplemented

    def __add__(self, o):
        o = self._c(o)
        return ModScalar(self.field, (self.value + o.value) % self.field.ell)

    __radd__ = __add__

    def __neg__(self):
        return ModScalar(self.field, (-self.value) % self.field.ell)

    def __sub__(self, o):
        return self + (-self._c(o))

    def __mul__(self, o):
        o = self._c(o)
        return ModScalar(self.field, self.field.fold(self.value[None], o.value[None])[0])

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        r = self.field.one()
        b = self
        while e:
            if e & 1:
                r = r * b
            b = b * b
            e >>= 1
        return r

    def inverse(self):
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in a finite field")
        return self ** (self.field.order - 2)

    def __truediv__(self, o):
        return self * self._c(o).inverse()

    def is_zero(self) -> bool:
        return not self.value.any()

    def __eq__(self, o):
        if isinstance(o, (int, np.integer)):
            o = self.field.from_int(int(o))
        if not isinstance(o, ModScalar):
            return NotImplemented
        return self.field == o.field and bool(np.array_equal(self.value, o.value))

    def __hash__(self):
        return hash((self.field, tuple(int(c) for c in self.value)))

    def multiplicative_order(self) -> int:
        if self.is_zero():
            raise ValueError("zero has no multiplicative order")
        n = self.field.order - 1
        order = n
        for p, e in sympy.factorint(n).items():
            for _ in range(e):
                if (self ** (order // p)) == 1:
                    order //= p
                else:
                    break
        return order

    def to_int(self) -> int:
        if self.value[1:].any():
            raise ValueError("not in the prime field")
        return int(self.value[0])

    def __repr__(self):
        if not self.value[1:].any():
            return f"<F{self.field.ell}^{self.field.m}: {int(self.value[0])}>"
        return f"<F{self.field.ell}^{self.field.m}: {[int(c) for c in self.value]}>"

    def to_json(self):
        return {"ell": self.field.ell, "f": self.field.f, "value": [int(c) for c in self.value]}


class ModArray:
    """A stack of elements of F_{l^m}; ``value`` has shape ``shape + (m,)``."""

    __slots__ = ("field", "value")

    def __init__(self, field: ModField, value: np.ndarray):
        self.field = field
        self.value = value

    @property
    def shape(self):
        return self.value.shape[:-1]

    def __len__(self):
        return self.value.shape[0]

    def take(self, idx) -> "ModArray":
        return ModArray(self.field, self.value[idx])

    def item(self, i) -> ModScalar:
        return ModScalar(self.field, self.value[i])

    def __add__(self, o: "ModArray"):
        return ModArray(self.field, (self.value + o.value) % self.field.ell)

    def __neg__(self):
        return ModArray(self.field, (-self.value) % self.field.ell)

    def __sub__(self, o):
        return self + (-o)

    def scale(self, c) -> "ModArray":
        c = Fraction(c)
        ell = self.field.ell
        k = c.numerator * pow(c.denominator, -1, ell) % ell
        return ModArray(self.field, (self.value * k) % ell)

    def mul_number(self, x: ModScalar) -> "ModArray":
        flat = self.value.reshape(-1, self.field.m)
        rep = np.broadcast_to(x.value, flat.shape)
        return ModArray(self.field, self.field.fold(flat, rep).reshape(self.value.shape))

    def __mul__(self, o):
        if isinstance(o, ModScalar):
            return self.mul_number(o)
        m = self.field.m
        out = self.field.fold(self.value.reshape(-1, m), o.value.reshape(-1, m))
        return ModArray(self.field, out.reshape(self.value.shape))

    def sum(self, axis: int = 0):
        s = self.value.sum(axis=axis) % self.field.ell
        if s.ndim == 1:
            return ModScalar(self.field, s)
        return ModArray(self.field, s)

    def is_zero(self) -> bool:
        return not self.value.any()

    def nonzero_mask(self) -> np.ndarray:
        return np.any(self.value != 0, axis=-1)

    def row_ids(self) -> np.ndarray:
        flat = self.value.reshape(-1, self.field.m)
        _, inv = np.unique(flat, axis=0, return_inverse=True)
        return inv.reshape(self.shape)


# ---------------------------------------------------------------------------
# reduction maps


def _split_ell(N: int, ell: int) -> tuple[int, int]:
    a = 0
    while N % ell == 0:
        N //= ell
        a += 1
    return a, N


@lru_cache(maxsize=None)
def cyclotomic_factors_mod(Np: int, ell: int) -> tuple[tuple[int, ...], ...]:
    """Monic irreducible factors of the Np-th cyclotomic polynomial over F_l, sorted."""
    x = sympy.Symbol("x")
    coeffs = [int(c) for c in sympy.Poly(sympy.cyclotomic_poly(Np, x), x).all_coeffs()]
    f = gf_from_int_poly(coeffs, ell)
    facs = gf_factor_sqf(f, ell, ZZ)[1]
    out = sorted(tuple(int(c) % ell for c in g) for g in facs)
    return tuple(out)


class ReductionMap:
    """Ring map Z_(l)[zeta_N] -> F_{l^m} sending zeta_N to x^c, x a root of a
    chosen irreducible factor of the N'-th cyclotomic polynomial mod l."""

    def __init__(self, N: int, ell: int, seed: int = 0):
        if not sympy.isprime(ell):
            raise ValueError(f"{ell} is not prime")
        self.N = N
        self.ell = ell
        self.a, self.Nprime = _split_ell(N, ell)
        facs = cyclotomic_factors_mod(self.Nprime, ell)
        self.num_choices = len(facs)
        self.seed = seed % len(facs)
        self.factor = facs[self.seed]
        self.target = ModField(ell, self.factor)
        self.c = pow(ell**self.a, -1, self.Nprime) if self.Nprime > 1 else 0
        F = cyclo_field(N)
        m = self.target.m
        # image of x^k for k < N' via repeated multiplication by x
        xs = np.zeros((max(self.Nprime, 1), m), dtype=np.int64)
        v = self.target.one()
        g = self.target.gen()
        for k in range(self.Nprime):
            xs[k] = v.value
            v = v * g
        self.table = xs[(self.c * np.arange(F.phi)) % max(self.Nprime, 1)]

    def __repr__(self):
        return f"ReductionMap(N={self.N}, ell={self.ell}, seed={self.seed}, m={self.target.m})"

    def descriptor(self) -> dict:
        return {"N": self.N, "ell": self.ell, "seed": self.seed, "factor": list(self.factor), "m": self.target.m}

    def zeta_image(self) -> ModScalar:
        return ModScalar(self.target, self.table[1] if self.table.shape[0] > 1 else self.target.one().value)

    def _den_inverse(self, den: int) -> int:
        if den % self.ell == 0:
            raise NonIntegralScalar(f"denominator {den} is divisible by {self.ell}")
        return pow(den, -1, self.ell)

    def __call__(self, x):
        if isinstance(x, CycloArray):
            return self.reduce_array(x)
        return reduce_scalar(x, self)

    def reduce_array(self, x: CycloArray) -> ModArray:
        if x.N != self.N:
            raise ValueError("conductor mismatch")
        g = gcd(_vec_gcd(x.num.flat), x.den) if x.num.size else x.den
        den = x.den // g
        num = x.num // g if g > 1 else x.num
        dinv = self._den_inverse(den)
        flat = num.reshape(-1, num.shape[-1])
        red = (np.asarray(flat % self.ell, dtype=np.int64) @ self.table) % self.ell
        red = (red * dinv) % self.ell
        return ModArray(self.target, red.reshape(x.shape + (self.target.m,)))


def build_reduction_map(N: int, ell: int, seed: int = 0) -> ReductionMap:
    return ReductionMap(N, ell, seed)


def reduce_scalar(x: CycloNumber, r: ReductionMap) -> ModScalar:
    if x.N != r.N:
        raise ValueError("conductor mismatch")
    dinv = r._den_inverse(x.den)
    v = np.asarray(x.num % r.ell, dtype=np.int64)
    red = (v @ r.table) % r.ell
    return ModScalar(r.target, (red * dinv) % r.ell)


def split_prime(N: int, at_least: int) -> int:
    """Smallest prime P = 1 mod N with P >= at_least."""
    P = (max(at_least, 2) - 1) // N * N + 1
    while P < at_least or not sympy.isprime(P):
        P += N
    return P


def prime_embedding(N: int, P: int) -> int:
    """An element of multiplicative order N in F_P (P = 1 mod N)."""
    if (P - 1) % N:
        raise ValueError("P must be 1 mod N")
    g = int(sympy.primitive_root(P))
    return pow(g, (P - 1) // N, P)
