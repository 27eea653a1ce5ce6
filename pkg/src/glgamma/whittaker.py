"""Bessel functions, Whittaker models and gamma factors for GL_n(F_q).

Functions on G are stored densely: a CycloArray indexed by the enumeration of
the group context.  Right translation, left translation and the map
W -> W~ (W~(g) = W(w g*)) are index permutations.

Exact checks compare values through integer ids (equal ids iff equal
values), so equivariance under N x N is checked exhaustively without
multiplying cyclotomic numbers.  Linear-algebra questions about spans of
functions (dimension of a Whittaker model, invariant forms) are answered
modulo a prime P = 1 mod N, which only ever underestimates ranks; every
positive answer that matters is backed by an exact witness.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import linalg
from .chartable import CharTable, InternalError, character_table, induced_character
from .fields import AdditiveCharacter
from .groups import GroupContext, TooLarge
from .scalars import (CycloArray, CycloNumber, ModArray, ModScalar, ReductionMap, cyclo_field,
                      prime_embedding, q_half_power, split_prime, sqrt_q, values_equal)

DENSE_LIMIT = 2500


class PropertyFailure(AssertionError):
    """A checked identity does not hold."""


def _cache(ctx: GroupContext) -> dict:
    return ctx.__dict__.setdefault("_whittaker_cache", {})


# ---------------------------------------------------------------------------
# reduction to F_P for rank computations


@dataclass(frozen=True)
class PrimeImage:
    """Ring map Z[1/d][zeta_N] -> F_P, zeta_N -> z."""

    N: int
    P: int
    z: int

    @classmethod
    def for_conductor(cls, N: int) -> "PrimeImage":
        P = split_prime(N, 1 << 29)
        return cls(N, P, prime_embedding(N, P))

    def __call__(self, a: CycloArray) -> np.ndarray:
        if a.N != self.N:
            a = a.embed(self.N)
        phi = a.field.phi
        powers = np.array([pow(self.z, k, self.P) for k in range(phi)], dtype=np.int64)
        num = a.num.reshape(-1, phi)
        num = np.asarray(num % self.P, dtype=np.int64)
        out = linalg.PrimeField(self.P).matmul(num, powers.reshape(-1, 1)).reshape(a.shape)
        if a.den % self.P == 0:
            raise ZeroDivisionError("denominator divisible by P")
        return (out * pow(a.den, -1, self.P)) % self.P

    @property
    def field(self) -> linalg.PrimeField:
        return linalg.PrimeField(self.P)


# ---------------------------------------------------------------------------
# functions on G


def _n_exponents(ctx: GroupContext, psi: AdditiveCharacter, mats) -> np.ndarray:
    """t with psi(u) = zeta_p^t, u upper unitriangular: psi(sum of superdiagonal)."""
    k = ctx.k
    mats = np.asarray(mats)
    s = np.zeros(mats.shape[:-2], dtype=np.int64)
    for i in range(ctx.n - 1):
        s = k.add_t[s, mats[..., i, i + 1]]
    return np.asarray(psi.exponent(s), dtype=np.int64)


def _n_data(ctx: GroupContext, psi: AdditiveCharacter):
    """Elements of N, their indices in G and psi-exponents (cached)."""
    key = ("N", psi.beta)
    c = _cache(ctx)
    if key not in c:
        U = ctx.subgroup_enumerate("N")
        c[key] = (U, ctx.index(U), _n_exponents(ctx, psi, U))
    return c[key]


def _left_perms(ctx: GroupContext, mats) -> np.ndarray:
    """perm[i, g] = index of mats[i] @ g."""
    E = ctx.elements
    return np.stack([ctx.index(ctx.mat_mul(np.asarray(x)[None], E)) for x in mats])


def _right_perms(ctx: GroupContext, mats) -> np.ndarray:
    E = ctx.elements
    return np.stack([ctx.index(ctx.mat_mul(E, np.asarray(x)[None])) for x in mats])


def _zeta_p_table(N: int, p: int) -> list[CycloNumber]:
    F = cyclo_field(N)
    return [F.root_of_unity(p, t) for t in range(p)]


class GFunction:
    """A function on G with W(ug) = psi(u) W(g) for u in N."""

    def __init__(self, ctx: GroupContext, values: CycloArray, psi: AdditiveCharacter):
        if values.shape != (ctx.order,):
            raise ValueError("values must be indexed by the group enumeration")
        self.ctx = ctx
        self.values = values
        self.psi = psi

    def __repr__(self):
        return f"GFunction({self.ctx!r}, beta={self.psi.beta})"

    @property
    def N(self) -> int:
        return self.values.N

    def at(self, g) -> CycloNumber:
        return self.values.item(int(self.ctx.index(g)))

    def right_translate(self, h) -> "GFunction":
        """x -> W(x h)."""
        perm = self.ctx.right_mult_perm(h)
        return GFunction(self.ctx, self.values.take(perm), self.psi)

    def tilde(self) -> "GFunction":
        """x -> W(w x*), an element of Ind_N^G(psi^-1)."""
        ctx = self.ctx
        idx = ctx.index(ctx.mat_mul(ctx.w[None], ctx.star(ctx.elements)))
        return GFunction(ctx, self.values.take(idx), self.psi.inverse())

    def __add__(self, other: "GFunction") -> "GFunction":
        if other.psi.beta != self.psi.beta:
            raise ValueError("different equivariance characters")
        return GFunction(self.ctx, (self.values + other.values).normalized(), self.psi)

    def scale(self, c) -> "GFunction":
        if isinstance(c, CycloNumber):
            return GFunction(self.ctx, self.values.mul_number(c.embed(self.N)), self.psi)
        return GFunction(self.ctx, self.values.scale(c), self.psi)

    def embed(self, N2: int) -> "GFunction":
        return GFunction(self.ctx, self.values.embed(N2), self.psi)

    def equals(self, other: "GFunction") -> bool:
        L = max(self.N, other.N)
        return bool(values_equal(self.values.embed(L), other.values.embed(L)).all())

    def left_equivariant(self) -> bool:
        """Exhaustive check of W(ug) = psi(u) W(g)."""
        ctx = self.ctx
        U, _, t = _n_data(ctx, self.psi)
        ids, shifted = _shift_ids(self.values, ctx.p)
        perms = _left_perms(ctx, U)
        return bool(np.all(ids[perms] == shifted[t]))


def _shift_ids(values: CycloArray, p: int):
    """Ids of W and of zeta_p^t W for t in [0, p), in one numbering."""
    zs = _zeta_p_table(values.N, p)
    stack = [values.mul_number(z) if t else values for t, z in enumerate(zs)]
    L = 1
    for s in stack:
        L = np.lcm(L, s.den)
    num = np.concatenate([s.with_den(int(L)) for s in stack])
    ids = CycloArray(values.N, num, int(L)).row_ids()
    ids = ids.reshape(p, -1)
    return ids[0], ids


def combination(funcs: list[GFunction], coeffs) -> GFunction:
    out = None
    for f, c in zip(funcs, coeffs):
        if c == 0:
            continue
        term = f.scale(c)
        out = term if out is None else out + term
    if out is None:
        f = funcs[0]
        return GFunction(f.ctx, CycloArray.zeros(f.N, f.ctx.order), f.psi)
    return out


# ---------------------------------------------------------------------------
# representations given by characters


class Rep:
    """A representation of GL_n given by its (exact) class function."""

    def __init__(self, table: CharTable, char: CycloArray, label: str, index: int | None = None):
        self.table = table
        self.ctx = table.ctx
        self.char = char.embed(table.N) if char.N != table.N else char
        self.label = label
        self.index = index

    def __repr__(self):
        return f"Rep({self.label} on {self.ctx!r})"

    @classmethod
    def irreducible(cls, table: CharTable, i: int) -> "Rep":
        return cls(table, table.row(i), f"chi{i}", i)

    @classmethod
    def induced(cls, ctx: GroupContext, parts, tables, rows) -> "Rep":
        table = character_table(ctx)
        f = induced_character(ctx, parts, tables, rows)
        label = "x".join(f"chi{r}" for r in rows)
        return cls(table, f, label)

    @classmethod
    def trivial(cls, ctx: GroupContext) -> "Rep":
        table = character_table(ctx)
        return cls.irreducible(table, 0)

    @property
    def degree(self) -> int:
        return int(self.char.item(self.table.classes.identity_class).to_fraction())

    def central_value(self, z: int) -> CycloNumber:
        """omega(z), the scalar by which z * 1 acts."""
        c = int(self.table.classes.class_of_matrix(self.ctx.scalar(z)))
        return self.char.item(c) * Fraction(1, self.degree)

    def star(self) -> "Rep":
        """g -> pi(g*), isomorphic to the contragredient."""
        cls_star = self.table.classes.class_of_matrix(self.ctx.star(self.table.classes.rep_mats))
        idx = None if self.index is None else int(self.table.star_index[self.index])
        return Rep(self.table, self.char.take(cls_star), f"{self.label}*", idx)

    def whittaker_dim(self, psi: AdditiveCharacter) -> Fraction:
        U, idx, t = _n_data(self.ctx, psi)
        counts = np.zeros((self.table.classes.count, self.ctx.p), dtype=np.int64)
        np.add.at(counts, (self.table.classes.class_of[idx], t), 1)
        total = None
        for s, z in enumerate(_zeta_p_table(self.table.N, self.ctx.p)):
            part = _class_pairing(self.char, counts[:, s]).__mul__(z.conj())
            total = part if total is None else total + part
        return total.to_fraction() / len(U)

    def is_whittaker_type(self, psi: AdditiveCharacter) -> bool:
        return self.whittaker_dim(psi) == 1


def _class_pairing(char: CycloArray, weights) -> CycloNumber:
    w = np.asarray(weights, dtype=np.int64)
    num = char.num
    s = (num.astype(object) * w[:, None].astype(object)).sum(axis=0)
    return CycloNumber(char.N, np.array(s), char.den)


# ---------------------------------------------------------------------------
# Bessel functions


def _bessel_counts(ctx: GroupContext, psi: AdditiveCharacter, classes) -> np.ndarray:
    """counts[g, c, t] = #{u in N : g u in class c, psi(u) = zeta_p^t}."""
    key = ("bessel_counts", psi.beta)
    cache = _cache(ctx)
    if key in cache:
        return cache[key]
    U, _, t = _n_data(ctx, psi)
    r, p, G = classes.count, ctx.p, ctx.order
    out = np.zeros(G * r * p, dtype=np.int64)
    base = np.arange(G, dtype=np.int64) * (r * p)
    for u, tu in zip(U, t):
        gu = ctx.index(ctx.mat_mul(ctx.elements, u[None]))
        flat = base + classes.class_of[gu] * p + tu
        out += np.bincount(flat, minlength=G * r * p)
    out = out.reshape(G, r * p)
    cache[key] = out
    return out


def bessel(rep: Rep, psi: AdditiveCharacter, verify: bool = True) -> GFunction:
    """J(g) = (1/|N|) sum_{u in N} psi(u)^-1 chi(g u), checked against the axioms."""
    ctx = rep.ctx
    key = ("bessel", rep.label, id(rep.char), psi.beta)
    cache = _cache(ctx)
    if key in cache:
        return cache[key]
    if not rep.is_whittaker_type(psi):
        raise ValueError(f"{rep.label} is not of Whittaker type for {psi}")
    counts = _bessel_counts(ctx, psi, rep.table.classes)
    p = ctx.p
    N = rep.table.N
    zs = _zeta_p_table(N, p)
    # V[c, t] = chi(c) zeta_p^-t
    cols = [rep.char.mul_number(zs[(-t) % p]) for t in range(p)]
    L = 1
    for c in cols:
        L = int(np.lcm(L, c.den))
    V = np.stack([c.with_den(L) for c in cols], axis=1)  # (r, p, phi)
    V = V.reshape(-1, V.shape[-1])
    from .scalars import safe_matmul

    num = safe_matmul(counts, V)
    _, U_idx, _ = _n_data(ctx, psi)
    J = GFunction(ctx, CycloArray(N, num, L * len(U_idx)).normalized(), psi)
    if verify:
        report = bessel_axioms(J)
        if not all(report.values()):
            raise InternalError(f"Bessel axioms fail for {rep.label}: {report}")
    cache[key] = J
    return J


def bessel_axioms(J: GFunction) -> dict:
    """J(1) = 1, J(x g y) = psi(x y) J(g) for all x, y in N, and vanishing on P - N."""
    ctx = J.ctx
    one = J.values.item(ctx.identity_index)
    out = {"unit": one == cyclo_field(J.N).one()}
    U, _, t = _n_data(ctx, J.psi)
    ids, shifted = _shift_ids(J.values, ctx.p)
    L = _left_perms(ctx, U)
    R = _right_perms(ctx, U)
    ok = True
    for x in range(len(U)):
        comp = R[:, L[x]]  # comp[y, g] = index of x g y
        want = shifted[(t[x] + t)[:, None] % ctx.p, np.arange(ctx.order)[None, :]]
        if not np.all(ids[comp] == want):
            ok = False
            break
    out["bi_equivariant"] = ok
    out["mirabolic_support"] = mirabolic_support(J)
    return out


def mirabolic_support(J: GFunction) -> bool:
    ctx = J.ctx
    E = ctx.elements
    inP = ctx.member_mask("P", E)
    inN = ctx.member_mask("N", E)
    nz = J.values.nonzero_mask()
    return bool(not np.any(nz & inP & ~inN))


# ---------------------------------------------------------------------------
# Whittaker models


@dataclass
class ModelModP:
    """A finite-dimensional space of functions on G, reduced mod P."""

    image: PrimeImage
    basis: np.ndarray  # (d, |G|) over F_P
    pos: np.ndarray  # d positions where the basis restricts to an invertible matrix
    inv: np.ndarray  # inverse of basis[:, pos]

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def coords(self, v: np.ndarray) -> np.ndarray:
        """Coordinates of rows v; raises if some row is outside the span."""
        F = self.image.field
        v = np.atleast_2d(v)
        c = F.matmul(v[:, self.pos], self.inv)
        if not np.array_equal(F.matmul(c, self.basis), v % self.image.P):
            raise PropertyFailure("vector outside the span")
        return c


def _independent_columns(F, M: np.ndarray) -> list[int]:
    """Indices of a maximal independent set among the columns of M."""
    _, piv = linalg.rref(F, M)
    return piv


def model_mod_p(funcs_mod: np.ndarray, image: PrimeImage) -> ModelModP:
    F = image.field
    cols = _independent_columns(F, funcs_mod.T)
    B = funcs_mod[cols]
    pos = np.array(_independent_columns(F, B), dtype=np.int64)
    inv = linalg.inverse(F, B[:, pos])
    return ModelModP(image, B, pos, inv)


@dataclass
class WhittakerModel:
    J: GFunction
    shifts: np.ndarray  # matrices h with basis W_i = J(. h_i)
    modp: ModelModP

    @property
    def dim(self) -> int:
        return self.modp.dim

    def basis(self) -> list[GFunction]:
        return [self.J.right_translate(h) for h in self.shifts]


def whittaker_model(rep: Rep, psi: AdditiveCharacter, seed: int = 0) -> WhittakerModel:
    """Basis of the span of right translates of J.

    For an irreducible the span has dimension deg(rep); for other
    representations it is grown until stable under the generators."""
    ctx = rep.ctx
    key = ("model", rep.label, id(rep.char), psi.beta)
    cache = _cache(ctx)
    if key in cache:
        return cache[key]
    J = bessel(rep, psi)
    image = PrimeImage.for_conductor(J.N)
    Jm = image(J.values)
    rng = np.random.default_rng(seed)
    d = rep.degree if rep.index is not None else None
    chosen = np.zeros(0, dtype=np.int64)
    stalled = 0
    for attempt in range(64):
        cand = np.concatenate([[ctx.identity_index], rng.integers(0, ctx.order, size=3 * (d or rep.degree) + 4)])
        cand = np.concatenate([chosen, cand])
        perms = _right_perms(ctx, ctx.elements[cand])
        rows = Jm[perms]
        cols = _independent_columns(image.field, rows.T)
        grew = len(cols) > len(chosen)
        chosen = cand[cols]
        if d is not None and len(chosen) >= d:
            break
        if d is None:
            stalled = 0 if grew else stalled + 1
            if stalled >= 2:
                break
        elif attempt >= 5:
            break
    if d is not None and len(chosen) != d:
        raise InternalError(f"Whittaker model of {rep.label} has dimension {len(chosen)} != {d}")
    perms = _right_perms(ctx, ctx.elements[chosen])
    model = model_mod_p(Jm[perms], image)
    out = WhittakerModel(J, ctx.elements[chosen], model)
    if d is None and not model_is_stable(out):
        raise InternalError(f"span of translates of J for {rep.label} did not close up")
    cache[key] = out
    return out


def translate_matrix(model: WhittakerModel, h) -> np.ndarray:
    """Matrix (mod P) of right translation by h on the model basis."""
    ctx = model.J.ctx
    rows = model.modp.basis[:, ctx.right_mult_perm(h)]
    return model.modp.coords(rows)


def model_is_stable(model: WhittakerModel, elements=None) -> bool:
    ctx = model.J.ctx
    elements = ctx.generators if elements is None else elements
    try:
        for h in elements:
            translate_matrix(model, h)
    except PropertyFailure:
        return False
    return True


def right_eigenspace_dim(model: WhittakerModel) -> tuple[int, bool]:
    """Dimension of {W in the model : W(g u) = psi(u) W(g)}, and whether J lies in it."""
    ctx = model.J.ctx
    psi = model.J.psi
    image = model.modp.image
    F = image.field
    P = image.P
    z = pow(image.z, image.N // ctx.p, P)
    d = model.dim
    blocks = []
    for i in range(ctx.n - 1):
        for a in _basis_codes(ctx):
            u = ctx.elementary(i, i + 1, a)
            t = int(_n_exponents(ctx, psi, u))
            M = translate_matrix(model, u)  # row b: coords of R_u W_b
            blocks.append((M - pow(z, t, P) * np.eye(d, dtype=np.int64)) % P)
    A = np.concatenate(blocks, axis=1) if blocks else np.zeros((d, 0), dtype=np.int64)
    sol = linalg.left_nullspace(F, A)
    cJ = model.modp.coords(image(model.J.values))
    inside = linalg.rank(F, np.concatenate([sol, cJ])) == sol.shape[0]
    return sol.shape[0], bool(inside)


def _basis_codes(ctx: GroupContext) -> list[int]:
    return [ctx.p**i for i in range(ctx.m)]


# ---------------------------------------------------------------------------
# Rankin-Selberg sums


def _gamma_blocks(ctx_n: GroupContext, ctx_m: GroupContext) -> np.ndarray:
    """Indices in G_n of [[0, 1_{n-m}], [g, 0]] for g in G_m."""
    n, m = ctx_n.n, ctx_m.n
    key = ("gamma_blocks", m)
    cache = _cache(ctx_n)
    if key not in cache:
        E = ctx_m.elements
        A = np.zeros((len(E), n, n), dtype=np.int64)
        A[:, : n - m, m:] = np.eye(n - m, dtype=np.int64)
        A[:, n - m :, :m] = E
        cache[key] = ctx_n.index(A)
    return cache[key]


def _ij_blocks(ctx_n: GroupContext, ctx_m: GroupContext, j: int) -> np.ndarray:
    """idx[g, x] = index of [[g, 0, 0], [x, 1_j, 0], [0, 0, 1]] for g in G_m, x in M_{j,m}."""
    n, m = ctx_n.n, ctx_m.n
    key = ("ij_blocks", m, j)
    cache = _cache(ctx_n)
    if key not in cache:
        E = ctx_m.elements
        q = ctx_n.q
        nx = q ** (j * m)
        X = np.zeros((nx, j, m), dtype=np.int64)
        r = np.arange(nx)
        for a in range(j):
            for b in range(m):
                X[:, a, b] = r % q
                r = r // q
        A = np.zeros((len(E), nx, n, n), dtype=np.int64)
        A[..., :, :] = np.eye(n, dtype=np.int64)
        A[:, :, :m, :m] = E[:, None]
        A[:, :, m : m + j, :m] = X[None]
        cache[key] = ctx_n.index(A)
    return cache[key]


def _n_order(ctx: GroupContext) -> int:
    return ctx.q ** (ctx.n * (ctx.n - 1) // 2)


def ij_sum(W: GFunction, Wp: GFunction, j: int) -> CycloNumber:
    """I_j(W, W') = sum over N_m backslash G_m and x in M_{j,m} of W(block) W'(g)."""
    ctx_n, ctx_m = W.ctx, Wp.ctx
    n, m = ctx_n.n, ctx_m.n
    if not 0 <= j <= n - m - 1:
        raise ValueError(f"j must lie in [0, {n - m - 1}]")
    N = max(W.N, Wp.N)
    idx = _ij_blocks(ctx_n, ctx_m, j)
    Wv = W.values.embed(N)
    S = Wv.take(idx).sum(axis=1)
    if isinstance(S, CycloNumber):  # single g
        S = CycloArray.from_numbers([S], N)
    total = (S * Wp.values.embed(N)).sum(axis=0)
    return total * Fraction(1, _n_order(ctx_m))


def _sqrt_q(ctx: GroupContext, convention: str, N: int) -> CycloNumber:
    return sqrt_q(ctx.p, ctx.m, convention, conductor=N)


@dataclass
class GammaValue:
    value: CycloNumber
    provenance: dict = field(default_factory=dict)

    def __eq__(self, other):
        o = other.value if isinstance(other, GammaValue) else other
        return self.value == o


def _check_pair(pi: Rep, pip: Rep):
    if pip.ctx.n >= pi.ctx.n:
        raise ValueError("rs_gamma needs m < n")
    if (pi.ctx.p, pi.ctx.m) != (pip.ctx.p, pip.ctx.m):
        raise ValueError("representations over different fields")


def omega_minus_one(pip: Rep, psi_inv: AdditiveCharacter) -> CycloNumber:
    Jp = bessel(pip, psi_inv)
    ctx = pip.ctx
    return Jp.at(ctx.scalar(int(ctx.k.neg(1))))


def rs_gamma(pi: Rep, pip: Rep, psi: AdditiveCharacter, convention: str = "generic") -> GammaValue:
    """omega_{pi'}(-1)^(n-1) q^(m(n-m-1)/2) sum_{N_m\\G_m} J_pi([[0,1],[g,0]]) J_{pi',psi^-1}(g)."""
    _check_pair(pi, pip)
    if pi.index is not None and not pi.table.is_cuspidal(pi.index):
        raise ValueError(f"{pi.label} is not cuspidal")
    n, m = pi.ctx.n, pip.ctx.n
    psi_inv = psi.inverse()
    J = bessel(pi, psi)
    Jp = bessel(pip, psi_inv)
    N = max(J.N, Jp.N)
    idx = _gamma_blocks(pi.ctx, pip.ctx)
    s = (J.values.embed(N).take(idx) * Jp.values.embed(N)).sum(axis=0) * Fraction(1, _n_order(pip.ctx))
    om = omega_minus_one(pip, psi_inv).embed(N)
    sq = _sqrt_q(pi.ctx, convention, N)
    g = om ** (n - 1) * q_half_power(sq, pi.ctx.q, m * (n - m - 1)) * s
    if g.is_zero():
        raise InternalError("gamma factor vanished")
    prov = {"pi": pi.label, "pi_prime": pip.label, "n": n, "m": m, "psi": psi.describe(),
            "sqrt_convention": convention, "method": "bessel-sum"}
    return GammaValue(g, prov)


def gj_gamma(pi: Rep, psi: AdditiveCharacter, convention: str = "generic") -> GammaValue:
    """gamma(pi, 1, psi) with 1 the trivial character of GL_1.

    For n = 1 there is no Rankin-Selberg pairing and the matrix Gauss sum
    is used instead (the two agree for every n >= 2 that we test)."""
    if pi.ctx.n < 2:
        return gj_gamma_gauss(pi, psi, convention)
    one = Rep.trivial(pi.ctx.with_n(1))
    g = rs_gamma(pi, one, psi, convention)
    g.provenance["method"] = "bessel-sum (pi' = 1)"
    return g


def gj_gamma_gauss(pi: Rep, psi: AdditiveCharacter, convention: str = "generic") -> GammaValue:
    """q^(-n^2/2) sum_g psi(tr g) chi(g^-1) / deg(pi)."""
    ctx = pi.ctx
    cl = pi.table.classes
    k = ctx.k
    tr = np.zeros(cl.count, dtype=np.int64)
    for i in range(ctx.n):
        tr = k.add_t[tr, cl.rep_mats[:, i, i]]
    t = np.asarray(psi.exponent(tr), dtype=np.int64)
    N = pi.table.N
    zs = _zeta_p_table(N, ctx.p)
    total = cyclo_field(N).zero()
    for s in range(ctx.p):
        w = np.where(t == s, cl.sizes, 0)
        if not w.any():
            continue
        total = total + _class_pairing(pi.char.take(cl.inv_class), w) * zs[s]
    sq = _sqrt_q(ctx, convention, N)
    g = total * Fraction(1, pi.degree) * q_half_power(sq, ctx.q, -ctx.n * ctx.n)
    if g.is_zero():
        raise InternalError("gamma factor vanished")
    prov = {"pi": pi.label, "n": ctx.n, "psi": psi.describe(), "sqrt_convention": convention,
            "method": "matrix Gauss sum"}
    return GammaValue(g, prov)


def character_of_gl1(ctx1: GroupContext, a: int) -> Rep:
    """The character x -> zeta_(q-1)^(a log x) of GL_1, as a Rep."""
    if ctx1.n != 1:
        raise ValueError("character_of_gl1 needs n = 1")
    table = character_table(ctx1)
    N = table.N
    want = _power_character(ctx1, a, N)
    cl = table.classes
    codes = cl.rep_mats[:, 0, 0]
    for i in range(table.count):
        if values_equal(table.row(i).embed(N), want.take(codes)).all():
            return Rep.irreducible(table, i)
    raise InternalError(f"no row of the GL_1 table matches exponent {a}")


def _power_character(ctx: GroupContext, a: int, N: int) -> CycloArray:
    from .classifier import multiplicative_character_values

    return multiplicative_character_values(ctx.k, a, N)


def twist(rep: Rep, a: int) -> Rep:
    """rep tensor (chi^a o det)."""
    ctx = rep.ctx
    det = ctx.det(rep.table.classes.rep_mats)
    chi = _power_character(ctx, a, rep.table.N)
    return Rep(rep.table, rep.char * chi.take(det), f"{rep.label}.det^{a}")


def twisted_gauss_gamma(pi: Rep, a: int, psi: AdditiveCharacter, convention: str = "generic") -> GammaValue:
    """gamma(pi, chi^a, psi) through the matrix Gauss sum of the twist pi chi^a."""
    g = gj_gamma_gauss(twist(pi, a), psi, convention)
    g.provenance.update(pi=pi.label, twist=a, method="matrix Gauss sum of the twist")
    return g


# ---------------------------------------------------------------------------
# the functional equation


def random_translates(J: GFunction, rng, terms: int = 3) -> GFunction:
    ctx = J.ctx
    idx = rng.integers(0, ctx.order, size=terms)
    coeffs = rng.integers(-3, 4, size=terms)
    if not coeffs.any():
        coeffs[0] = 1
    return combination([J.right_translate(ctx.elements[i]) for i in idx], [int(c) for c in coeffs])


def _block_weyl(ctx: GroupContext, m: int) -> np.ndarray:
    """diag(1_m, w_{n-m})."""
    n = ctx.n
    A = np.zeros((n, n), dtype=np.int64)
    A[:m, :m] = np.eye(m, dtype=np.int64)
    A[m:, m:] = np.fliplr(np.eye(n - m, dtype=np.int64))
    return A


def fe_sides(W: GFunction, Wp: GFunction, j: int, omega: CycloNumber, convention: str):
    """(left side, factor * I_j(W, W')) of the functional equation, without gamma."""
    ctx_n = W.ctx
    n, m = ctx_n.n, Wp.ctx.n
    lhs = ij_sum(W.tilde().right_translate(_block_weyl(ctx_n, m)), Wp.tilde(), n - m - 1 - j)
    I = ij_sum(W, Wp, j)
    N = max(lhs.N, I.N, omega.N)
    sq = _sqrt_q(ctx_n, convention, N)
    fac = omega.embed(N) ** (n - 1) * q_half_power(sq, ctx_n.q, m * (n - m - 1 - 2 * j))
    return lhs.embed(N), fac * I.embed(N)


def functional_equation_check(pi: Rep, pip: Rep, psi: AdditiveCharacter, trials: int = 20,
                              seed: int = 0, convention: str = "generic",
                              pip_functions=None) -> dict:
    """Verify the functional equation for random W, W' and every j.

    ``pip_functions`` optionally supplies a generator rng -> W' to draw W' from
    another model of pi' (for instance an induced model)."""
    _check_pair(pi, pip)
    rng = np.random.default_rng(seed)
    n, m = pi.ctx.n, pip.ctx.n
    gamma = rs_gamma(pi, pip, psi, convention)
    psi_inv = psi.inverse()
    J = bessel(pi, psi)
    Jp = bessel(pip, psi_inv)
    om = omega_minus_one(pip, psi_inv)
    residuals = []
    solved = set()
    nonzero_pairs = 0
    for _ in range(trials):
        W = random_translates(J, rng)
        Wp = pip_functions(rng) if pip_functions else random_translates(Jp, rng)
        for j in range(n - m):
            lhs, rhs = fe_sides(W, Wp, j, om, convention)
            N = max(lhs.N, gamma.value.N)
            res = lhs.embed(N) - gamma.value.embed(N) * rhs.embed(N)
            residuals.append(res.is_zero())
            if not rhs.is_zero():
                nonzero_pairs += 1
                solved.add(lhs.embed(N) / rhs.embed(N))
    agrees = len(solved) == 1 and next(iter(solved)) == gamma.value.embed(next(iter(solved)).N)
    return {
        "pi": pi.label, "pi_prime": pip.label, "n": n, "m": m, "trials": trials,
        "checks": len(residuals), "zero_residuals": int(sum(residuals)),
        "nonzero_pairs": nonzero_pairs, "solved_agrees": bool(agrees),
        "gamma": gamma.value, "ok": all(residuals) and bool(agrees),
    }


# ---------------------------------------------------------------------------
# induced models of products of characters


def induced_whittaker_functions(ctx: GroupContext, parts, tables, rows, psi: AdditiveCharacter):
    """W_f(g) = sum_{u in N} psi(u)^-1 f(w u g) for f in Ind_Q^G(chi_1 x ... x chi_r).

    Every chi_i must be one-dimensional.  Returns (coset representatives, a
    function x -> W_{f_x}) where f_x is supported on Q x_rep with f(b x_rep) = chi(b)."""
    for t, r in zip(tables, rows):
        if int(t.degrees[r]) != 1:
            raise ValueError("induced models are built for one-dimensional inducing data")
    E = ctx.elements
    Q = ctx.subgroup_enumerate(("Q", tuple(parts)))
    # coset labels for Q g
    lab = np.full(ctx.order, -1, dtype=np.int64)
    reps = []
    for g in range(ctx.order):
        if lab[g] >= 0:
            continue
        members = ctx.index(ctx.mat_mul(Q, E[g][None]))
        lab[members] = len(reps)
        reps.append(g)
    reps = np.array(reps)
    # chi(g x_rep^-1) for every g
    N = ctx.N
    b = ctx.mat_mul(E, ctx.inv(E[reps[lab]]))
    from .chartable import levi_blocks

    vals = None
    for sl, t, r in zip(levi_blocks(parts), tables, rows):
        c = t.classes.class_of_matrix(b[:, sl, sl])
        v = t.values.take(r).embed(N).take(c)
        vals = v if vals is None else vals * v
    U, _, tu = _n_data(ctx, psi)
    zs = _zeta_p_table(N, ctx.p)
    wu = ctx.mat_mul(ctx.w[None], U)
    perms = _left_perms(ctx, wu)  # perms[u, g] = index of w u g

    def W_of(coset: int) -> GFunction:
        f = CycloArray(N, np.where((lab == coset)[:, None], vals.num, 0), vals.den)
        total = None
        for s in range(ctx.p):
            sel = np.nonzero(tu == s)[0]
            if not sel.size:
                continue
            part = f.take(perms[sel]).sum(axis=0)
            if isinstance(part, CycloNumber):
                part = CycloArray.from_numbers([part], N)
            part = part.mul_number(zs[(-s) % ctx.p])
            total = part if total is None else total + part
        return GFunction(ctx, total.normalized(), psi)

    return reps, W_of


def induced_model_sampler(ctx, parts, tables, rows, psi, terms: int = 3):
    reps, W_of = induced_whittaker_functions(ctx, parts, tables, rows, psi)
    cache = {}

    def draw(rng):
        cs = rng.choice(len(reps), size=terms, replace=False) if len(reps) >= terms else np.arange(len(reps))
        funcs = []
        for c in cs:
            if c not in cache:
                cache[int(c)] = W_of(int(c))
            funcs.append(cache[int(c)])
        coeffs = [int(x) for x in rng.integers(1, 4, size=len(funcs))]
        return combination(funcs, coeffs)

    return draw


# ---------------------------------------------------------------------------
# invariant forms on the Whittaker model


def _subgroup_members(ctx: GroupContext, which) -> np.ndarray:
    return ctx.subgroup_enumerate(which)


def lambda_forms(rep: Rep, psi: AdditiveCharacter):
    """(Lambda, Lambda*) as functions of a GFunction.

    Lambda(W) = sum over (N' and H') backslash H' of W(h'),
    Lambda*(W) = same sum of W(w h'*), with H' = H intersected with GL_{n-1}."""
    ctx = rep.ctx
    Hp = _subgroup_members(ctx, "Hp")
    NHp = ctx.pattern_size(ctx.intersect(ctx.pattern("Hp"), ctx.pattern("N")))
    i1 = ctx.index(Hp)
    i2 = ctx.index(ctx.mat_mul(ctx.w[None], ctx.star(Hp)))
    scale = Fraction(1, NHp)

    def lam(W: GFunction) -> CycloNumber:
        return W.values.take(i1).sum(axis=0) * scale

    def lam_star(W: GFunction) -> CycloNumber:
        return W.values.take(i2).sum(axis=0) * scale

    return lam, lam_star


def lambda_and_c(rep: Rep, psi: AdditiveCharacter, check_p_h: bool = True) -> dict:
    ctx = rep.ctx
    if ctx.involution is None:
        raise ValueError("needs an involution")
    if ctx.involution == "galois" and not psi.trivial_on_k0:
        raise ValueError("the Galois case needs psi trivial on k0")
    if rep.index is not None and rep.table.hom_H_dim(rep.index) != 1:
        raise ValueError("Hom_H must be one-dimensional")
    lam, lam_star = lambda_forms(rep, psi)
    model = whittaker_model(rep, psi)
    J = model.J
    lJ = lam(J)
    c = lam_star(J)
    prop = all(lam_star(W) == c * lam(W) for W in model.basis())
    out = {"lambda_J": lJ, "c": c, "proportional": prop,
           "lambda_J_is_one": lJ == cyclo_field(lJ.N).one()}
    if check_p_h:
        PH = ctx.enumerate_pattern(ctx.intersect(ctx.pattern("P"), ctx.pattern("H")))
        basis = model.basis()
        inv = True
        for h in PH:
            for W in basis:
                if lam(W.right_translate(h)) != lam(W):
                    inv = False
                    break
            if not inv:
                break
        out["p_h_invariant"] = inv
    if not prop:
        raise InternalError("Lambda* is not proportional to Lambda")
    return out


def hom_dim_mod_p(model: WhittakerModel, gens) -> int:
    """dim of the forms on the model invariant under the given elements (mod P)."""
    F = model.modp.image.field
    d = model.dim
    P = model.modp.image.P
    blocks = [(translate_matrix(model, h) - np.eye(d, dtype=np.int64)) % P for h in gens]
    A = np.concatenate(blocks, axis=0)  # forms xi (columns) with (rho(h) - 1) xi = 0
    return d - linalg.rank(F, A)


def invariant_forms_mod_p(model: WhittakerModel, gens) -> np.ndarray:
    """Basis (columns as rows) of forms xi with xi(h W) = xi(W)."""
    F = model.modp.image.field
    d = model.dim
    P = model.modp.image.P
    blocks = [(translate_matrix(model, h) - np.eye(d, dtype=np.int64)) % P for h in gens]
    return linalg.nullspace(F, np.concatenate(blocks, axis=0))


def _generators_of(ctx: GroupContext, which, seed: int = 0) -> np.ndarray:
    return ctx.subgroup_generators(which, seed)


# ---------------------------------------------------------------------------
# special and class C


def _require_dense(ctx: GroupContext, limit: int | None):
    limit = DENSE_LIMIT if limit is None else limit
    if ctx.order > limit:
        raise TooLarge(f"|G| = {ctx.order} exceeds the dense-function limit {limit}")


def i_psi_project(ctx: GroupContext, f: CycloArray, psi: AdditiveCharacter) -> CycloArray:
    """I_psi(f)(g) = (1/|N|) sum_u psi(u)^-1 f(u g)."""
    U, _, t = _n_data(ctx, psi)
    perms = _left_perms(ctx, U)
    N = f.N
    zs = _zeta_p_table(N, ctx.p)
    total = None
    for s in range(ctx.p):
        sel = np.nonzero(t == s)[0]
        if not sel.size:
            continue
        part = f.take(perms[sel]).sum(axis=0)
        if isinstance(part, CycloNumber):
            part = CycloArray.from_numbers([part], N)
        part = part.mul_number(zs[(-s) % ctx.p])
        total = part if total is None else total + part
    return total.scale(Fraction(1, len(U))).normalized()


def h_sums(W: GFunction, H_indices) -> CycloArray:
    """x -> sum_{h in H} W(x h)."""
    ctx = W.ctx
    perms = _right_perms(ctx, ctx.elements[np.asarray(H_indices)])
    return W.values.take(perms).sum(axis=0)


def class_c_witness(rep: Rep, psi: AdditiveCharacter, H_indices=None):
    """An x with sum_h J(x h) != 0, or None.

    The averaged evaluations xi_x(W) = sum_h W(x h) span the H-invariant forms
    on the model, and xi_x(J) is the value at x of the function above."""
    H_indices = rep.table.h_indices if H_indices is None else H_indices
    J = bessel(rep, psi)
    S = h_sums(J, H_indices)
    nz = np.nonzero(S.nonzero_mask())[0]
    if nz.size == 0:
        return None
    return int(nz[0]), S.item(int(nz[0]))


def is_class_C(rep: Rep, psi: AdditiveCharacter, H_indices=None, limit: int | None = None) -> dict:
    """Class C: some H-invariant form on the model does not vanish on J.

    Checked two ways: exactly, by the averaged-evaluation witness, and by
    solving the invariance system on the model (mod P) and evaluating at J."""
    ctx = rep.ctx
    _require_dense(ctx, limit)
    wit = class_c_witness(rep, psi, H_indices)
    model = whittaker_model(rep, psi)
    gens = _generators_of(ctx, "H")
    forms = invariant_forms_mod_p(model, gens)
    cJ = model.modp.coords(model.modp.image(model.J.values))
    P = model.modp.image.P
    system = bool(forms.shape[0]) and bool(np.any(linalg.PrimeField(P).matmul(cJ, forms.T) % P))
    return {"class_C": wit is not None, "witness": None if wit is None else wit[0],
            "invariant_forms": int(forms.shape[0]), "system_nonvanishing": system,
            "consistent": (wit is not None) == system}


def h_coset_labels(ctx: GroupContext, H_indices) -> np.ndarray:
    """Label of the coset H g for every g (labels 0, 1, ...)."""
    H = ctx.elements[np.asarray(H_indices)]
    lab = np.full(ctx.order, -1, dtype=np.int64)
    k = 0
    for g in range(ctx.order):
        if lab[g] >= 0:
            continue
        lab[ctx.index(ctx.mat_mul(H, ctx.elements[g][None]))] = k
        k += 1
    return lab


def i_psi_coset_images_mod_p(ctx: GroupContext, psi: AdditiveCharacter, labels, image: PrimeImage) -> np.ndarray:
    """Rows I_psi(1_{H x}) for every coset, reduced mod P."""
    U, _, t = _n_data(ctx, psi)
    perms = _left_perms(ctx, U)
    P = image.P
    zp = pow(image.z, image.N // ctx.p, P)
    k = int(labels.max()) + 1
    M = np.zeros((k, ctx.order), dtype=np.int64)
    cols = np.arange(ctx.order)
    for u in range(len(U)):
        w = pow(zp, (-int(t[u])) % ctx.p, P)
        np.add.at(M, (labels[perms[u]], cols), w)
    return (M % P) * pow(len(U), -1, P) % P


def is_special(rep: Rep, psi: AdditiveCharacter, H_indices=None, limit: int | None = None) -> dict:
    """Whether W(rep, psi) meets I_psi(Ind_H^G 1).

    Exact part: for a class C witness x, f_x(g) = sum_h J(x h g) is left
    H-invariant and I_psi(f_x) = xi_x(J) J is a nonzero common element.
    Rank part (mod P): dim W + rank I - rank(W + I)."""
    ctx = rep.ctx
    _require_dense(ctx, limit)
    H_indices = rep.table.h_indices if H_indices is None else H_indices
    J = bessel(rep, psi)
    wit = class_c_witness(rep, psi, H_indices)
    exact = False
    if wit is not None:
        x, val = wit
        Hx = ctx.mat_mul(ctx.elements[x][None], ctx.elements[np.asarray(H_indices)])
        perms = _left_perms(ctx, Hx)  # f_x(g) = sum_h J(x h g)
        f = J.values.take(perms).sum(axis=0)
        if not _left_h_invariant(ctx, f, H_indices):
            raise InternalError("f_x is not left H-invariant")
        proj = i_psi_project(ctx, f, psi)
        exact = bool(values_equal(proj, J.values.mul_number(val)).all()) and not val.is_zero()
    model = whittaker_model(rep, psi)
    image = model.modp.image
    F = image.field
    labels = h_coset_labels(ctx, H_indices)
    Imat = i_psi_coset_images_mod_p(ctx, psi, labels, image)
    rI = linalg.rank(F, Imat)
    rWI = linalg.rank(F, np.concatenate([model.modp.basis, Imat]))
    inter = model.dim + rI - rWI
    return {"special": exact or inter > 0, "exact_witness": exact, "intersection_dim_mod_p": inter,
            "consistent": exact == (inter > 0)}


def _left_h_invariant(ctx, f: CycloArray, H_indices) -> bool:
    perms = _left_perms(ctx, ctx.elements[np.asarray(H_indices)])
    ids = f.row_ids()
    return bool(np.all(ids[perms] == ids[None, :]))


def h_sum_criteria(ctx: GroupContext, W: GFunction, H_indices) -> tuple[bool, bool]:
    """For W in Ind_N^G(psi^-1): (all H-sums vanish, W orthogonal to I_psi(Ind_H^G 1))."""
    psi = W.psi.inverse()
    H_indices = np.asarray(H_indices)
    cond1 = _left_sums(ctx, W.values, H_indices).is_zero()
    labels = h_coset_labels(ctx, H_indices)
    k = int(labels.max()) + 1
    U, _, t = _n_data(ctx, psi)
    perms = _left_perms(ctx, U)
    N = W.N
    phi = cyclo_field(N).phi
    zs = _zeta_p_table(N, ctx.p)
    # S[x, s] = sum over u with psi(u) = zeta^s, g with u g in H x, of W(g)
    S = np.zeros((k, ctx.p, phi), dtype=object)
    num = W.values.num.astype(object)
    for u in range(len(U)):
        lab_u = labels[perms[u]]
        for x in range(k):
            S[x, t[u]] += num[lab_u == x].sum(axis=0)
    cond2 = True
    for x in range(k):
        tot = CycloNumber(N, np.zeros(phi, dtype=np.int64))
        for s in range(ctx.p):
            tot = tot + CycloNumber(N, S[x, s], W.values.den) * zs[(-s) % ctx.p]
        if not tot.is_zero():
            cond2 = False
            break
    return cond1, cond2


def _left_sums(ctx, values: CycloArray, H_indices) -> CycloArray:
    perms = _left_perms(ctx, ctx.elements[H_indices])
    return values.take(perms).sum(axis=0)


def c_vs_gamma(pi: Rep, pip: Rep, psi: AdditiveCharacter, convention: str = "generic") -> dict:
    lc = lambda_and_c(pi, psi, check_p_h=False)
    g = rs_gamma(pi, pip, psi, convention)
    N = max(g.value.N, lc["c"].N)
    return {"pi": pi.label, "pi_prime": pip.label, "gamma": g.value, "c": lc["c"],
            "equal": g.value.embed(N) == lc["c"].embed(N)}


# ---------------------------------------------------------------------------
# reduction modulo l


def reduce_function(W: GFunction, rmap: ReductionMap) -> ModArray:
    return rmap(W.values.embed(rmap.N))


def reduced_bessel_axioms(Jl: ModArray, ctx: GroupContext, psi: AdditiveCharacter, rmap: ReductionMap) -> dict:
    """The Bessel axioms for a function with values in F_{l^m}."""
    zeta_p = rmap(cyclo_field(rmap.N).root_of_unity(ctx.p, 1))
    shifts = [Jl]
    for _ in range(1, ctx.p):
        shifts.append(shifts[-1].mul_number(zeta_p))
    stack = ModArray(Jl.field, np.concatenate([s.value for s in shifts]))
    ids = stack.row_ids().reshape(ctx.p, -1)
    U, _, t = _n_data(ctx, psi)
    L = _left_perms(ctx, U)
    R = _right_perms(ctx, U)
    ok = True
    for x in range(len(U)):
        comp = R[:, L[x]]
        want = ids[(t[x] + t)[:, None] % ctx.p, np.arange(ctx.order)[None, :]]
        if not np.all(ids[0][comp] == want):
            ok = False
            break
    one = Jl.item(ctx.identity_index)
    E = ctx.elements
    bad = ctx.member_mask("P", E) & ~ctx.member_mask("N", E)
    nz = np.any(Jl.value != 0, axis=-1)
    return {"unit": one == Jl.field.one(), "bi_equivariant": ok, "mirabolic_support": bool(not np.any(nz & bad))}


def reduced_rs_gamma(pi: Rep, pip: Rep, psi: AdditiveCharacter, rmap: ReductionMap,
                     convention: str = "generic") -> ModScalar:
    """The Bessel-sum gamma computed entirely from reduced data."""
    n, m = pi.ctx.n, pip.ctx.n
    psi_inv = psi.inverse()
    J = reduce_function(bessel(pi, psi), rmap)
    Jp = reduce_function(bessel(pip, psi_inv), rmap)
    idx = _gamma_blocks(pi.ctx, pip.ctx)
    s = (J.take(idx) * Jp).sum(axis=0)
    nm = _n_order(pip.ctx)
    s = s * rmap.target.from_int(nm).inverse()
    om = Jp.item(int(pip.ctx.index(pip.ctx.scalar(int(pip.ctx.k.neg(1))))))
    sq = rmap(_sqrt_q(pi.ctx, convention, rmap.N))
    e = m * (n - m - 1)
    return om ** (n - 1) * sq**e * s
