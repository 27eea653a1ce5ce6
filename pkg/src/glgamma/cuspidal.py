"""Pointwise cuspidal characters of GL_n(F_q), for groups whose full table is too large.

The cuspidal representation attached to a regular character theta of
F_{q^n}^x has character

    chi(g) = (-1)^(n-1) (sum_{i<d} theta(lam^(q^i))) prod_{j=1}^{r-1} (1 - q^(dj))

when the characteristic polynomial of g is f^(n/d) with f irreducible of
degree d and root lam, r being the dimension of the lam-eigenspace of g over
F_{q^n}, and chi(g) = 0 otherwise.  Everything downstream (Bessel values,
the Bessel-sum gamma, the constant c, Hom_H dimensions) uses point
evaluations only, so no function on the whole group is ever stored."""

from __future__ import annotations

from fractions import Fraction
from itertools import permutations
from math import lcm

import numpy as np

from .fields import AdditiveCharacter, build_field
from .groups import GroupContext
from .scalars import CycloArray, CycloNumber, base_conductor, cyclo_field, q_half_power, sqrt_q
from .whittaker import GammaValue, InternalError, Rep, _n_exponents, _zeta_p_table, bessel, omega_minus_one


def _perm_sign(perm) -> int:
    sign, seen = 1, set()
    for i in range(len(perm)):
        if i in seen:
            continue
        j, length = i, 0
        while j not in seen:
            seen.add(j)
            j = perm[j]
            length += 1
        sign *= (-1) ** (length - 1)
    return sign


def det_batched(k, A: np.ndarray) -> np.ndarray:
    """Determinants of a batch of small square matrices over k (Leibniz)."""
    A = np.asarray(A, dtype=np.int64)
    n = A.shape[-1]
    out = np.zeros(A.shape[:-2], dtype=np.int64)
    for perm in permutations(range(n)):
        term = A[..., 0, perm[0]]
        for i in range(1, n):
            term = k.mul_t[term, A[..., i, perm[i]]]
        if _perm_sign(perm) < 0:
            term = k.neg_t[term]
        out = k.add_t[out, term]
    return out


def char_poly(k, A: np.ndarray) -> np.ndarray:
    """Coefficients (low to high, monic) of det(x - g) for a batch of matrices."""
    A = np.asarray(A, dtype=np.int64)
    n = A.shape[-1]
    B = A.shape[:-2]
    out = np.zeros(B + (n + 1,), dtype=np.int64)
    out[..., n] = 1
    for size in range(1, n + 1):
        e = np.zeros(B, dtype=np.int64)
        for rows in _subsets(n, size):
            sub = A[..., rows, :][..., :, rows]
            e = k.add_t[e, det_batched(k, sub)]
        out[..., n - size] = e if size % 2 == 0 else k.neg_t[e]
    return out


def _subsets(n: int, size: int):
    from itertools import combinations

    return [list(c) for c in combinations(range(n), size)]


class ExtensionField:
    """F_{q^n} together with an embedding of F_q matching the given field."""

    def __init__(self, k, n: int):
        self.k = k
        self.n = n
        self.K = build_field(k.p, k.m * n)
        K = self.K
        # a root of k's defining polynomial gives the embedding
        mod = k.modulus
        zeta = None
        for z in range(K.q):
            acc = 0
            for c in reversed(mod):
                acc = int(K.add_t[K.mul_t[acc, z], c % k.p])
            if acc == 0:
                zeta = z
                break
        if zeta is None:
            raise InternalError("no embedding of the base field")
        emb = np.zeros(k.q, dtype=np.int64)
        for a in range(k.q):
            acc, power = 0, 1
            for d in k.digits[a]:
                acc = int(K.add_t[acc, K.mul_t[int(d), power]])
                power = int(K.mul_t[power, zeta])
            emb[a] = acc
        self.emb = emb
        self.frob_q = K.pow_table(k.q)

    def orbit(self, lam: int) -> list[int]:
        out = [lam]
        while True:
            nxt = int(self.frob_q[out[-1]])
            if nxt == lam:
                return out
            out.append(nxt)

    def poly_eval(self, coeffs_K, x: int) -> int:
        K = self.K
        acc = 0
        for c in reversed(coeffs_K):
            acc = int(K.add_t[K.mul_t[acc, x], c])
        return acc

    def poly_from_roots(self, roots) -> list[int]:
        K = self.K
        poly = [1]
        for r in roots:
            nr = int(K.neg_t[r])
            new = [0] * (len(poly) + 1)
            for i, c in enumerate(poly):
                new[i + 1] = int(K.add_t[new[i + 1], c])
                new[i] = int(K.add_t[new[i], K.mul_t[c, nr]])
            poly = new
        return poly


def batched_rank(K, A: np.ndarray) -> np.ndarray:
    """Ranks of a batch of matrices over K."""
    A = np.array(A, dtype=np.int64, copy=True)
    B, r, c = A.shape
    rk = np.zeros(B, dtype=np.int64)
    rows = np.arange(r)
    ar = np.arange(B)
    for col in range(c):
        mask = (A[:, :, col] != 0) & (rows[None, :] >= rk[:, None])
        has = mask.any(axis=1)
        if not has.any():
            continue
        b = ar[has]
        piv = np.argmax(mask[has], axis=1)
        tgt = rk[has]
        pr = A[b, piv].copy()
        A[b, piv] = A[b, tgt]
        A[b, tgt] = pr
        inv = K.inv_t[A[b, tgt, col]]
        A[b, tgt] = K.mul_t[inv[:, None], A[b, tgt]]
        for i in range(r):
            sel = i > tgt
            if not sel.any():
                continue
            bb = b[sel]
            f = A[bb, i, col]
            A[bb, i] = K.add_t[A[bb, i], K.neg_t[K.mul_t[f[:, None], A[bb, tgt[sel]]]]]
        rk[has] += 1
    return rk


def regular_exponents(q: int, n: int) -> list[int]:
    """One exponent b per Frobenius orbit of regular characters x -> zeta^(b log x) of F_{q^n}^x."""
    Q1 = q**n - 1
    seen, out = set(), []
    for b in range(Q1):
        orb = {(b * q**i) % Q1 for i in range(n)}
        if len(orb) < n or b in seen:
            continue
        seen |= orb
        out.append(b)
    return out


class CuspidalCharacter:
    """The character of the cuspidal representation attached to theta = zeta^(b log)."""

    def __init__(self, ctx: GroupContext, b: int, N: int | None = None):
        self.ctx = ctx
        self.b = b
        self.ext = ExtensionField(ctx.k, ctx.n)
        Q = self.ext.K.q
        if len({(b * ctx.q**i) % (Q - 1) for i in range(ctx.n)}) < ctx.n:
            raise ValueError(f"theta = zeta^({b} log) is not regular")
        base = lcm(Q - 1, base_conductor(ctx.p))
        self.N = base if N is None else N
        if self.N % base:
            raise ValueError("conductor must be a multiple of lcm(q^n - 1, base conductor)")
        self.label = f"cusp.b{b}"
        self._info: dict = {}

    @property
    def degree(self) -> int:
        q = self.ctx.q
        d = 1
        for j in range(1, self.ctx.n):
            d *= q**j - 1
        return d

    def theta(self, x: int) -> CycloNumber:
        K = self.ext.K
        e = (self.b * int(K.log_t[x])) % (K.q - 1)
        return cyclo_field(self.N).root_of_unity(K.q - 1, e)

    def _poly(self, key: tuple):
        """(lam, d) when the polynomial is f^(n/d) with f irreducible of degree d, else None."""
        if key in self._info:
            return self._info[key]
        ext, n = self.ext, self.ctx.n
        coeffs = [int(ext.emb[c]) for c in key]
        roots = [x for x in range(1, ext.K.q) if ext.poly_eval(coeffs, x) == 0]
        out = None
        if roots:
            orb = ext.orbit(roots[0])
            d = len(orb)
            if n % d == 0 and sorted(orb) == sorted(roots):
                if ext.poly_from_roots(orb * (n // d)) == coeffs:
                    out = (roots[0], d)
        self._info[key] = out
        return out

    def values(self, A: np.ndarray) -> CycloArray:
        A = np.asarray(A, dtype=np.int64)
        n, q = self.ctx.n, self.ctx.q
        flat = A.reshape(-1, n, n)
        polys = char_poly(self.ctx.k, flat)
        F = cyclo_field(self.N)
        out = np.zeros((flat.shape[0], F.phi), dtype=object)
        keys = [tuple(int(c) for c in row) for row in polys]
        need_rank = {}
        base_val = {}
        for i, key in enumerate(keys):
            info = self._poly(key)
            if info is None:
                continue
            lam, d = info
            if key not in base_val:
                s = F.zero()
                for x in self.ext.orbit(lam):
                    s = s + self.theta(x)
                base_val[key] = s * (-1) ** (n - 1)
            if d == n:
                out[i] = base_val[key].num
            else:
                need_rank.setdefault(key, []).append(i)
        K = self.ext.K
        for key, idx in need_rank.items():
            lam, d = self._poly(key)
            M = self.ext.emb[flat[idx]]
            diag = np.arange(n)
            M[:, diag, diag] = K.add_t[M[:, diag, diag], K.neg_t[lam]]
            r = n - batched_rank(K, M)
            for i, rr in zip(idx, r):
                fac = 1
                for j in range(1, int(rr)):
                    fac *= 1 - q ** (d * j)
                out[i] = (base_val[key] * fac).num
        arr = CycloArray(self.N, _as_int(out), 1)
        return arr

    def rep_values_on_classes(self, table) -> CycloArray:
        """Values on the class representatives of a full table (for cross-checks)."""
        return self.values(table.classes.rep_mats)


def _as_int(out: np.ndarray) -> np.ndarray:
    try:
        return out.astype(np.int64)
    except OverflowError:
        return out


def matching_row(chi: CuspidalCharacter, table) -> int | None:
    """Index of the table row equal to chi, if any."""
    from .scalars import values_equal

    v = chi.rep_values_on_classes(table)
    N = lcm(v.N, table.N)
    v = v.embed(N)
    for i in range(table.count):
        if values_equal(table.row(i).embed(N), v).all():
            return i
    return None


# ---------------------------------------------------------------------------
# Bessel values, gamma and c from point evaluations


def _n_group(ctx: GroupContext, psi: AdditiveCharacter):
    U = ctx.subgroup_enumerate("N")
    return U, np.asarray(_n_exponents(ctx, psi, U))


def bessel_values(chi: CuspidalCharacter, psi: AdditiveCharacter, points: np.ndarray, N: int | None = None,
                  chunk: int = 4096) -> CycloArray:
    """J(g) = |N|^-1 sum_{u in N} psi(u)^-1 chi(g u) at the given points."""
    ctx = chi.ctx
    N = chi.N if N is None else N
    U, t = _n_group(ctx, psi)
    zs = _zeta_p_table(N, ctx.p)
    points = np.asarray(points, dtype=np.int64)
    parts = []
    step = max(1, chunk // len(U))
    for s0 in range(0, len(points), step):
        P = points[s0 : s0 + step]
        prod = ctx.mat_mul(P[:, None], U[None])  # (b, |U|, n, n)
        vals = chi.values(prod.reshape(-1, ctx.n, ctx.n)).embed(N)
        num = np.asarray(vals.num).reshape(len(P), len(U), -1)
        total = None
        for s in range(ctx.p):
            sel = t == s
            if not sel.any():
                continue
            part = CycloArray(N, num[:, sel].sum(axis=1), vals.den).mul_number(zs[(-s) % ctx.p])
            total = part if total is None else total + part
        parts.append(total)
    num = np.concatenate([np.asarray(p.num, dtype=object) for p in parts])
    den = parts[0].den
    if any(p.den != den for p in parts):
        raise InternalError("inconsistent denominators")
    return CycloArray(N, _as_int(num), den * len(U)).normalized()


def sparse_rs_gamma(chi: CuspidalCharacter, pip: Rep, psi: AdditiveCharacter,
                    convention: str = "generic") -> GammaValue:
    """The Bessel-sum gamma factor with pi given by a pointwise cuspidal character."""
    ctx_n, ctx_m = chi.ctx, pip.ctx
    n, m = ctx_n.n, ctx_m.n
    if m >= n:
        raise ValueError("needs m < n")
    psi_inv = psi.inverse()
    Jp = bessel(pip, psi_inv)
    N = lcm(chi.N, Jp.N)
    E = ctx_m.elements
    A = np.zeros((len(E), n, n), dtype=np.int64)
    A[:, : n - m, m:] = np.eye(n - m, dtype=np.int64)
    A[:, n - m :, :m] = E
    J = bessel_values(chi, psi, A, N)
    n_m = ctx_m.pattern_size(ctx_m.pattern("N"))
    s = (J * Jp.values.embed(N)).sum(axis=0) * Fraction(1, n_m)
    om = omega_minus_one(pip, psi_inv).embed(N)
    sq = sqrt_q(ctx_n.p, ctx_n.m, convention, conductor=N)
    g = om ** (n - 1) * q_half_power(sq, ctx_n.q, m * (n - m - 1)) * s
    if g.is_zero():
        raise InternalError("gamma factor vanished")
    return GammaValue(g, {"pi": chi.label, "pi_prime": pip.label, "n": n, "m": m, "psi": psi.describe(),
                          "sqrt_convention": convention, "method": "bessel-sum (pointwise character)"})


def sparse_lambda_c(chi: CuspidalCharacter, psi: AdditiveCharacter) -> dict:
    """Lambda(J) and c = Lambda*(J) from point evaluations of J."""
    ctx = chi.ctx
    Hp = ctx.subgroup_enumerate("Hp")
    nhp = ctx.pattern_size(ctx.intersect(ctx.pattern("Hp"), ctx.pattern("N")))
    J1 = bessel_values(chi, psi, Hp)
    J2 = bessel_values(chi, psi, ctx.mat_mul(ctx.w[None], ctx.star(Hp)))
    lam = J1.sum(axis=0) * Fraction(1, nhp)
    c = J2.sum(axis=0) * Fraction(1, nhp)
    return {"lambda_J": lam, "c": c, "lambda_J_is_one": lam == 1}


def hom_h_dim(chi: CuspidalCharacter) -> Fraction:
    """<chi restricted to H, 1>."""
    ctx = chi.ctx
    H = ctx.subgroup_enumerate("H")
    tot = chi.values(H).sum(axis=0)
    if not tot.is_rational():
        raise InternalError("non-rational restriction average")
    return tot.to_fraction() / len(H)


def gauss_gamma(chi: CuspidalCharacter, psi: AdditiveCharacter, convention: str = "generic",
                chunk: int = 20000) -> GammaValue:
    """q^(-n^2/2) sum_g psi(tr g) chi(g^-1) / deg, summing over the whole group in chunks."""
    ctx = chi.ctx
    k = ctx.k
    N = chi.N
    zs = _zeta_p_table(N, ctx.p)
    totals = [cyclo_field(N).zero() for _ in range(ctx.p)]
    E = ctx.elements
    for s0 in range(0, len(E), chunk):
        G = E[s0 : s0 + chunk]
        tr = np.zeros(len(G), dtype=np.int64)
        for i in range(ctx.n):
            tr = k.add_t[tr, G[:, i, i]]
        t = np.asarray(psi.exponent(tr), dtype=np.int64)
        vals = chi.values(G).conj()
        for s in range(ctx.p):
            sel = np.nonzero(t == s)[0]
            if sel.size:
                totals[s] = totals[s] + vals.take(sel).sum(axis=0)
    total = cyclo_field(N).zero()
    for s in range(ctx.p):
        total = total + totals[s] * zs[s]
    sq = sqrt_q(ctx.p, ctx.m, convention, conductor=N)
    g = total * Fraction(1, chi.degree) * q_half_power(sq, ctx.q, -ctx.n * ctx.n)
    return GammaValue(g, {"pi": chi.label, "n": ctx.n, "psi": psi.describe(), "sqrt_convention": convention,
                          "method": "matrix Gauss sum (pointwise character)"})
