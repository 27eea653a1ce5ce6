"""Characteristic-2 modules for GL_n(F_q), q odd.

Parabolic induction pi x pi is realized on functions on Q backslash G with
values in V (x) V, Q the (n, n) parabolic.  The intertwiner
T f(g) = sum_{u in U} A f(s u g) satisfies (T + 1)^2 = 0 and sp_1(pi) is
Ker(T + 1) / Im(T + 1).  Modules act on column vectors; linear forms are
row vectors.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import gcd

import numpy as np

from .chartable import InternalError
from .fields import build_field
from .groups import GroupContext, TooLarge
from .linalg import GF2, left_nullspace, nullspace, rank, rref

DIM_BUDGET = 1500


class FieldTooSmall(ValueError):
    pass


def coefficient_field(m: int):
    """F_(2^m) as a linear-algebra field, with its finite-field tables."""
    k = build_field(2, m)
    return (GF2() if m == 1 else k.la), k


def _eye(F, d):
    return np.eye(d, dtype=F.dtype)


def _kron(F, A, B):
    a, b = A.shape[0], B.shape[0]
    return F.mul(A[:, None, :, None], B[None, :, None, :]).reshape(a * b, a * b)


def _plus_one(F, M):
    return F.add(F.asarray(M), _eye(F, M.shape[0]))


def _matmul(F, A, B):
    return F.matmul(F.asarray(A), F.asarray(B))


@dataclass
class FinModule:
    """A representation of GL_n(F_q) on F^d.

    ``element_matrix`` returns the matrix of any group element."""

    ctx: GroupContext
    F: object
    coeff_m: int
    dim: int
    element_matrix: object
    label: str = ""
    labels: list = field(default_factory=list)
    _cache: dict = field(default_factory=dict, repr=False)

    def matrix(self, g) -> np.ndarray:
        key = int(self.ctx.encode(g))
        if key not in self._cache:
            self._cache[key] = self.F.asarray(self.element_matrix(np.asarray(g, dtype=np.int64)))
        return self._cache[key]

    def generator_matrices(self, gens) -> list[np.ndarray]:
        return [self.matrix(g) for g in gens]

    def homomorphism_check(self, rng, trials: int = 10) -> bool:
        """M(g h) = M(g) M(h) and M(g) invertible on random pairs."""
        ctx, F = self.ctx, self.F
        X = ctx.random_elements(rng, trials)
        Y = ctx.random_elements(rng, trials)
        for g, h in zip(X, Y):
            Mg, Mh = self.matrix(g), self.matrix(h)
            if not np.array_equal(self.matrix(ctx.mat_mul(g, h)), _matmul(F, Mg, Mh)):
                return False
            if rank(F, Mg) != self.dim:
                return False
        return True


def group_generators(ctx: GroupContext) -> np.ndarray:
    """Elementary matrices, a primitive diagonal element and the antidiagonal Weyl element."""
    return np.concatenate([ctx.generators, ctx.w[None]])


# ---------------------------------------------------------------------------
# the base of the tower


def character_module(ctx: GroupContext, a: int, coeff_m: int = 1, reduce: bool = False) -> FinModule:
    """x -> chi(x) for the character chi = zeta_(q-1)^(a log x) of GL_1(F_q).

    Characters of even order have no faithful model in characteristic 2; with
    ``reduce`` their odd part (the reduction mod 2) is used instead."""
    if ctx.n != 1:
        raise ValueError("character modules live on GL_1")
    q = ctx.q
    d = (q - 1) // gcd(a, q - 1)
    odd = d
    while odd % 2 == 0:
        odd //= 2
    if odd != d and not reduce:
        raise ValueError(f"character of even order {d}; only odd-order characters are admissible")
    F, kf = coefficient_field(coeff_m)
    if (2**coeff_m - 1) % odd:
        raise FieldTooSmall(f"F_(2^{coeff_m}) has no primitive {odd}-th root of unity")
    zeta = kf.power(kf.primitive, (2**coeff_m - 1) // odd)
    b = (a // gcd(a, q - 1)) * (d // odd)  # chi reduced = zeta_odd^(b log x)

    def mat(g):
        x = int(g[0, 0])
        e = (b * int(ctx.k.log_t[x])) % odd
        return np.array([[kf.power(zeta, e)]])

    return FinModule(ctx, F, coeff_m, 1, mat, label=f"chi{a % (q - 1)}")


# ---------------------------------------------------------------------------
# cosets of the (n, n) parabolic


def rref_forms(ctx: GroupContext, r: int, c: int) -> np.ndarray:
    """All r x c matrices over F_q in reduced row echelon form of rank r."""
    q = ctx.q
    out = []
    for piv in itertools.combinations(range(c), r):
        free = [(i, j) for i in range(r) for j in range(piv[i] + 1, c) if j not in piv]
        for vals in itertools.product(range(q), repeat=len(free)):
            A = np.zeros((r, c), dtype=np.int64)
            for i, p in enumerate(piv):
                A[i, p] = 1
            for (i, j), v in zip(free, vals):
                A[i, j] = v
            out.append(A)
    return np.array(out, dtype=np.int64)


def batched_rref(ctx: GroupContext, A: np.ndarray) -> np.ndarray:
    """Row echelon normal form of a batch of full-rank r x c matrices."""
    k = ctx.k
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
        inv = k.inv_t[A[b, tgt, col]]
        A[b, tgt] = k.mul_t[inv[:, None], A[b, tgt]]
        for i in range(r):
            sel = tgt != i
            if not sel.any():
                continue
            bb = b[sel]
            f = A[bb, i, col]
            A[bb, i] = k.add_t[A[bb, i], k.neg_t[k.mul_t[f[:, None], A[bb, tgt[sel]]]]]
        rk[has] += 1
    if np.any(rk != r):
        raise ValueError("matrices are not of full row rank")
    return A


class ParabolicCosets:
    """Right cosets Q g of the (n, n) parabolic Q of GL_2n, labelled by the row
    space of the bottom n rows of g."""

    def __init__(self, ctx2: GroupContext):
        if ctx2.n % 2:
            raise ValueError("needs even rank")
        self.ctx = ctx2
        n = ctx2.n // 2
        self.n = n
        forms = rref_forms(ctx2, n, 2 * n)
        reps = []
        for R in forms:
            piv = [int(np.nonzero(row)[0][0]) for row in R]
            top = np.zeros((n, 2 * n), dtype=np.int64)
            for i, j in enumerate(c for c in range(2 * n) if c not in piv):
                top[i, j] = 1
            reps.append(np.concatenate([top, R]))
        self.reps = np.array(reps, dtype=np.int64)
        self.reps_inv = ctx2.inv(self.reps)
        self.count = len(reps)
        self._w = ctx2.q ** np.arange(2 * n * n, dtype=np.int64)
        keys = self._key(forms)
        self._lookup = {int(x): i for i, x in enumerate(keys)}

    def _key(self, R):
        return (np.asarray(R).reshape(len(R), -1) * self._w).sum(axis=1)

    def locate(self, Y: np.ndarray):
        """For matrices Y: coset indices j and Q-parts q with Y = q c_j."""
        ctx, n = self.ctx, self.n
        Y = np.asarray(Y, dtype=np.int64)
        keys = self._key(batched_rref(ctx, Y[:, n:, :]))
        j = np.array([self._lookup[int(x)] for x in keys], dtype=np.int64)
        qpart = ctx.mat_mul(Y, self.reps_inv[j])
        if np.any(qpart[:, n:, :n] != 0):
            raise InternalError("coset decomposition left the parabolic")
        return j, qpart


def _block_matrix(F, nblocks: int, bs: int):
    return np.zeros((nblocks * bs, nblocks * bs), dtype=F.dtype)


def _add_block(F, M, i, j, bs, B):
    sl_i = slice(i * bs, (i + 1) * bs)
    sl_j = slice(j * bs, (j + 1) * bs)
    M[sl_i, sl_j] = F.add(M[sl_i, sl_j], B)


@dataclass
class InducedModule:
    """pi x pi on GL_2n with its coset bookkeeping."""

    module: FinModule
    base: FinModule
    cosets: ParabolicCosets

    def levi_matrix(self, qpart) -> np.ndarray:
        n = self.cosets.n
        F = self.base.F
        return _kron(F, self.base.matrix(qpart[:n, :n]), self.base.matrix(qpart[n:, n:]))

    def value_rows(self, Y, form) -> tuple[np.ndarray, np.ndarray]:
        """For f -> <f(y), form> with y in Y: the coset blocks and row vectors."""
        j, qp = self.cosets.locate(Y)
        F = self.base.F
        rows = [_matmul(F, np.asarray(form)[None], self.levi_matrix(x))[0] for x in qp]
        return j, np.array(rows, dtype=F.dtype)


def parabolic_induce(base: FinModule, ctx2: GroupContext | None = None,
                     dim_budget: int = DIM_BUDGET) -> InducedModule:
    """pi x pi as functions f on GL_2n with f(q g) = (pi (x) pi)(q) f(g)."""
    ctx = base.ctx
    n = ctx.n
    if ctx2 is None:
        ctx2 = GroupContext(ctx.p, ctx.m, 2 * n, ctx.involution if ctx.involution else None,
                            budget=ctx.budget, modulus=ctx.k.modulus)
    cos = ParabolicCosets(ctx2)
    d = base.dim
    bs = d * d
    dim = cos.count * bs
    if dim > dim_budget:
        raise TooLarge(f"induced dimension {dim} exceeds budget {dim_budget}")
    F = base.F
    holder: dict = {}

    def mat(g):
        j, qp = cos.locate(ctx2.mat_mul(cos.reps, g[None]))
        M = _block_matrix(F, cos.count, bs)
        for i in range(cos.count):
            _add_block(F, M, i, int(j[i]), bs, holder["ind"].levi_matrix(qp[i]))
        return M

    mod = FinModule(ctx2, F, base.coeff_m, dim, mat, label=f"{base.label}x{base.label}",
                    labels=[(c, b) for c in range(cos.count) for b in range(bs)])
    ind = InducedModule(mod, base, cos)
    holder["ind"] = ind
    return ind


def swap_matrix(F, d: int) -> np.ndarray:
    """A: v (x) w -> w (x) v on V (x) V."""
    P = np.zeros((d * d, d * d), dtype=F.dtype)
    for i in range(d):
        for j in range(d):
            P[j * d + i, i * d + j] = 1
    return P


def t_operator(ind: InducedModule) -> np.ndarray:
    """T f(g) = sum_{u in U} A f(s u g)."""
    ctx2 = ind.module.ctx
    cos = ind.cosets
    F = ind.base.F
    d = ind.base.dim
    bs = d * d
    A = swap_matrix(F, d)
    U = ctx2.subgroup_enumerate(("U", (cos.n, cos.n)))
    sU = ctx2.mat_mul(ctx2.s[None], U)
    T = _block_matrix(F, cos.count, bs)
    for i in range(cos.count):
        j, qp = cos.locate(ctx2.mat_mul(sU, cos.reps[i][None]))
        for jj, x in zip(j, qp):
            _add_block(F, T, i, int(jj), bs, _matmul(F, A, ind.levi_matrix(x)))
    return T


# ---------------------------------------------------------------------------
# invariant forms


def invariant_forms(F, mats, vanish_on=None) -> np.ndarray:
    """Rows xi with xi M = xi for all M, and xi S^T = 0 for the rows S of vanish_on."""
    d = mats[0].shape[0] if mats else vanish_on.shape[1]
    cols = [_plus_one(F, M) if isinstance(F, GF2) else F.sub(F.asarray(M), _eye(F, d)) for M in mats]
    if vanish_on is not None and len(vanish_on):
        cols.append(F.asarray(vanish_on).T)
    if not cols:
        return _eye(F, d)
    return left_nullspace(F, np.concatenate(cols, axis=1))


def hom_dim(M: FinModule, H_gens) -> int:
    """dim Hom_H(M, 1) from a generating set of H."""
    return invariant_forms(M.F, M.generator_matrices(H_gens)).shape[0]


def hom_dim_vanishing(M: FinModule, H_gens, S: np.ndarray) -> int:
    """dim of H-invariant forms vanishing on the row space of S."""
    return invariant_forms(M.F, M.generator_matrices(H_gens), S).shape[0]


def subgroup_gens(ctx: GroupContext, which="H", seed: int = 0) -> np.ndarray:
    return ctx.subgroup_generators(which, seed)


def _orbit_with_elements(ind: InducedModule, start, gens):
    """Breadth-first H-orbit of the coset Q start: coset index -> some y in start H."""
    cos = ind.cosets
    ctx2 = ind.module.ctx
    start = np.asarray(start, dtype=np.int64)
    j0, _ = cos.locate(start[None])
    found = {int(j0[0]): start}
    frontier = [start]
    while frontier:
        Y = ctx2.mat_mul(np.array(frontier)[:, None], np.asarray(gens)[None]).reshape(-1, ctx2.n, ctx2.n)
        j, _ = cos.locate(Y)
        frontier = []
        for jj, y in zip(j.tolist(), Y):
            if jj not in found:
                found[jj] = y
                frontier.append(y)
    return found


def _orbit_form(ind: InducedModule, start, gens, pair_form) -> np.ndarray:
    """f -> sum over the H-orbit of Q start of <f(y), pair_form>."""
    F = ind.base.F
    bs = ind.base.dim ** 2
    orbit = _orbit_with_elements(ind, start, gens)
    xi = np.zeros(ind.module.dim, dtype=F.dtype)
    ys = np.array(list(orbit.values()))
    j, rows = ind.value_rows(ys, pair_form)
    for jj, row in zip(j, rows):
        sl = slice(int(jj) * bs, (int(jj) + 1) * bs)
        xi[sl] = F.add(xi[sl], row)
    return xi


def lambda0(ind: InducedModule, lam: np.ndarray, H_gens) -> np.ndarray:
    """Lambda^0(f) = sum_{h in (Q cap H)\\H} <f(h), lam (x) lam>."""
    F = ind.base.F
    lam = F.asarray(lam)
    pair = F.mul(lam[:, None], lam[None, :]).reshape(-1)
    return _orbit_form(ind, ind.module.ctx.identity(), H_gens, pair)


def twisted_pairing(base: FinModule, theta) -> np.ndarray:
    """All forms L on V (x) V with L(theta(g) v, g w) = L(v, w) for every g."""
    F = base.F
    gens = group_generators(base.ctx)
    mats = [_kron(F, base.matrix(theta(g)), base.matrix(g)) for g in gens]
    return invariant_forms(F, mats)


def lang_element(ctx2: GroupContext) -> np.ndarray:
    """x with sigma(x) x^-1 = delta s (delta = 1 in the Galois case)."""
    target = ctx2.s if ctx2.involution == "galois" else ctx2.mat_mul(ctx2.delta, ctx2.s)
    x = ctx2.lang_solve(target)
    if x is None:
        raise InternalError("no solution of the Lang equation for delta s")
    return x


def lambda1(ind: InducedModule, x: np.ndarray, pairing: np.ndarray, H_gens) -> np.ndarray:
    """Lambda^1(f) = sum_{h in (M^x cap H)\\H} <f(x h), pairing>."""
    return _orbit_form(ind, x, H_gens, pairing)


# ---------------------------------------------------------------------------
# sp_1 and the tower


def quotient_module(M: FinModule, big: np.ndarray, small: np.ndarray, label: str = "") -> FinModule:
    """The subquotient (row space of big) / (row space of small), small inside big."""
    F = M.F
    Rs, ps = rref(F, small) if len(small) else (small, [])
    # complement of small inside big, chosen from the rows of big
    comp = []
    cur = Rs[: len(ps)] if len(small) else np.zeros((0, M.dim), dtype=F.dtype)
    r0 = cur.shape[0]
    for v in F.asarray(big):
        trial = np.concatenate([cur, v[None]])
        if rank(F, trial) > cur.shape[0]:
            cur = trial
            comp.append(v)
    comp = np.array(comp, dtype=F.dtype).reshape(-1, M.dim)
    basis = np.concatenate([Rs[: len(ps)] if len(small) else np.zeros((0, M.dim), dtype=F.dtype), comp])
    k = comp.shape[0]
    # coordinates with respect to basis: solve c B = v by rref of B^T | v^T
    BT = basis.T

    def coords(V):
        aug = np.concatenate([BT, F.asarray(V).T], axis=1)
        R, piv = rref(F, aug)
        nb = basis.shape[0]
        if any(p >= nb for p in piv):
            raise InternalError("vector left the subquotient")
        C = np.zeros((nb, V.shape[0]), dtype=F.dtype)
        C[: len(piv)] = R[: len(piv), nb:]
        # pivots of B^T are 0..nb-1 since the rows of basis are independent
        return C[r0:]

    def mat(g):
        img = _matmul(F, comp, M.matrix(g).T)  # rows: g . comp_i
        return coords(img)

    return FinModule(M.ctx, F, M.coeff_m, k, mat, label=label)


def fixed_vectors_dim(M: FinModule, gens) -> int:
    F = M.F
    rows = [F.sub(F.asarray(M.matrix(g)), _eye(F, M.dim)) for g in gens]
    return nullspace(F, np.concatenate(rows, axis=0)).shape[0]


def unipotent_generators(ctx: GroupContext, parts) -> np.ndarray:
    block = np.repeat(np.arange(len(parts)), parts)
    gens = []
    for i in range(ctx.n):
        for j in range(ctx.n):
            if block[i] < block[j]:
                for b in range(ctx.m):
                    gens.append(ctx.elementary(i, j, ctx.p**b))
    return np.array(gens)


def is_cuspidal(M: FinModule) -> bool:
    """No nonzero vectors fixed by the radical of any maximal parabolic."""
    n = M.ctx.n
    return all(fixed_vectors_dim(M, unipotent_generators(M.ctx, (k, n - k))) == 0 for k in range(1, n))


def spin_dim(M: FinModule, v: np.ndarray, gens) -> int:
    """Dimension of the submodule generated by v."""
    F = M.F
    mats = [M.matrix(g) for g in gens]
    R, piv = rref(F, F.asarray(v)[None])
    cur = R[: len(piv)]
    new = cur
    while new.shape[0]:
        imgs = np.concatenate([_matmul(F, new, Mg.T) for Mg in mats])
        stack = np.concatenate([cur, imgs])
        R, piv = rref(F, stack)
        R = R[: len(piv)]
        if R.shape[0] == cur.shape[0]:
            break
        new = imgs
        cur = R
    return cur.shape[0]


def _random_vector_outside(F, rng, basis_sub, dim, coeff_order):
    while True:
        v = F.asarray(rng.integers(0, coeff_order, size=dim))
        if rank(F, np.concatenate([basis_sub, v[None]])) > rank(F, basis_sub):
            return v


@dataclass
class LevelReport:
    n: int
    ambient_dim: int
    ker_dim: int
    im_dim: int
    layers: tuple
    checks: dict
    hom: dict

    def ok(self) -> bool:
        return all(self.checks.values())


def _sigma_map(ctx):
    if ctx.involution == "galois":
        return lambda g: ctx.sigma(g)
    return lambda g: g


def analyze_level(base: FinModule, lam: np.ndarray, rng, ctx2: GroupContext | None = None,
                  dim_budget: int = DIM_BUDGET, spin_trials: int = 2, spin_limit: int = 600):
    """Build pi x pi from an H_n-distinguished pi and run every check on it.

    Returns (report, sp_1 module, an H_2n-invariant form on sp_1 or None)."""
    ind = parabolic_induce(base, ctx2, dim_budget)
    M = ind.module
    ctx2 = M.ctx
    F = M.F
    gens = group_generators(ctx2)
    Hg = subgroup_gens(ctx2, "H")
    T = t_operator(ind)
    T1 = _plus_one(F, T)
    checks = {}
    checks["module_homomorphism"] = M.homomorphism_check(rng, trials=4)
    checks["T_commutes"] = all(np.array_equal(_matmul(F, T, M.matrix(g)), _matmul(F, M.matrix(g), T)) for g in gens)
    checks["T_plus_one_squared_zero"] = not np.any(_matmul(F, T1, T1))
    # subspaces as rows: image of T + 1 and its kernel (column convention)
    im_rows = rref(F, T1.T)[0][: rank(F, T1)]
    ker_rows = nullspace(F, T1)
    d = M.dim
    checks["rank_nullity"] = im_rows.shape[0] + ker_rows.shape[0] == d
    checks["image_inside_kernel"] = rank(F, np.concatenate([ker_rows, im_rows])) == ker_rows.shape[0]
    layers = (im_rows.shape[0], ker_rows.shape[0] - im_rows.shape[0], d - ker_rows.shape[0])
    checks["socle_matches_cosocle"] = layers[0] == layers[2]
    # invariant forms
    L0 = lambda0(ind, lam, Hg)
    theta = _sigma_map(ctx2.with_n(base.ctx.n) if base.ctx.involution else base.ctx)
    pairings = twisted_pairing(base, theta)
    checks["twisted_pairing_unique"] = pairings.shape[0] == 1
    x = lang_element(ctx2)
    L1 = lambda1(ind, x, pairings[0], Hg)
    Hmats = M.generator_matrices(Hg)
    checks["lambda0_nonzero"] = bool(np.any(L0))
    checks["lambda1_nonzero"] = bool(np.any(L1))
    checks["lambda0_invariant"] = all(np.array_equal(_matmul(F, L0[None], Mh)[0], L0) for Mh in Hmats)
    checks["lambda1_invariant"] = all(np.array_equal(_matmul(F, L1[None], Mh)[0], L1) for Mh in Hmats)
    checks["lambda0_T"] = np.array_equal(_matmul(F, L0[None], T)[0], L0)
    checks["lambda1_T"] = np.array_equal(_matmul(F, L1[None], T)[0], L1)
    checks["lambda_independent"] = rank(F, np.stack([L0, L1])) == 2
    hom = {}
    hom["ambient"] = invariant_forms(F, Hmats).shape[0]
    hom["vanishing_on_socle"] = invariant_forms(F, Hmats, im_rows).shape[0]
    hom["cosocle"] = invariant_forms(F, Hmats, ker_rows).shape[0]
    checks["cosocle_at_most_one"] = hom["cosocle"] <= 1
    checks["two_forms_vanish_on_socle"] = hom["vanishing_on_socle"] >= 2
    sp1 = quotient_module(M, ker_rows, im_rows, label=f"sp1({base.label})")
    sp_forms = invariant_forms(F, sp1.generator_matrices(Hg))
    hom["sp1"] = sp_forms.shape[0]
    checks["sp1_distinguished"] = hom["sp1"] >= 1
    checks["sp1_cuspidal"] = is_cuspidal(sp1)
    checks["sp1_homomorphism"] = sp1.homomorphism_check(rng, trials=3)
    if d <= spin_limit:
        # the kernel is the unique maximal submodule: vectors outside it generate M
        order = 2**M.coeff_m
        gen_ok = True
        for _ in range(spin_trials):
            v = _random_vector_outside(F, rng, ker_rows, d, order)
            gen_ok &= spin_dim(M, v, gens) == d
        checks["kernel_unique_maximal_sampled"] = gen_ok
    rep = LevelReport(ctx2.n, d, ker_rows.shape[0], im_rows.shape[0], layers, checks, hom)
    return rep, sp1, (sp_forms[0] if sp_forms.shape[0] else None)


@dataclass
class TowerReport:
    case: str
    q: int
    base: str
    coeff_m: int
    levels: list
    truncated: str | None = None

    def ok(self) -> bool:
        return all(lv.ok() for lv in self.levels)


def sp_tower(p: int, m: int, case: str, chi: int = 0, steps: int = 1, coeff_m: int = 1,
             seed: int = 0, dim_budget: int = DIM_BUDGET) -> TowerReport:
    """pi_0 = chi on GL_1, pi_(i+1) = sp_1(pi_i), with all level checks."""
    rng = np.random.default_rng(seed)
    ctx1 = GroupContext(p, m, 1, case)
    pi = character_module(ctx1, chi, coeff_m)
    Hg = subgroup_gens(ctx1, "H")
    forms = invariant_forms(pi.F, pi.generator_matrices(Hg))
    report = TowerReport(case, ctx1.q, pi.label, coeff_m, [])
    if forms.shape[0] == 0:
        report.truncated = "base character is not distinguished"
        return report
    lam = forms[0]
    for _ in range(steps):
        ctx2 = GroupContext(p, m, 2 * pi.ctx.n, case)
        try:
            rep, pi, lam = analyze_level(pi, lam, rng, ctx2, dim_budget)
        except TooLarge as exc:
            report.truncated = str(exc)
            break
        report.levels.append(rep)
        if lam is None:
            report.truncated = f"sp1 at GL_{ctx2.n} is not distinguished"
            break
    return report


# ---------------------------------------------------------------------------
# double cosets Q \ G / H


def double_coset_parameters(ctx2: GroupContext) -> list:
    """The Lang-equation targets indexing (Q, H)-double cosets."""
    n = ctx2.n // 2
    k = ctx2.k
    m1 = int(k.neg(1))
    out = []
    if ctx2.involution == "galois":
        for i in range(n + 1):
            g = np.zeros((2 * n, 2 * n), dtype=np.int64)
            for t in range(i):
                g[t, t] = 1
                g[2 * n - 1 - t, 2 * n - 1 - t] = 1
            for t in range(n - i):
                g[i + t, n + t] = 1
                g[n + t, i + t] = 1
            out.append(((i,), g))
        return out
    for i in range(n + 1):
        for j in range(n + 1 - i):
            g = np.zeros((2 * n, 2 * n), dtype=np.int64)
            diag = [1] * i + [m1] * j
            for t, v in enumerate(diag):
                g[t, t] = v
            tail = [1] * j + [m1] * i
            for t, v in enumerate(tail):
                g[n + (n - i - j) + t, n + (n - i - j) + t] = v
            r = n - i - j
            for t in range(r):
                g[i + j + t, n + t] = 1
                g[n + t, i + j + t] = 1
            out.append(((i, j), ctx2.mat_mul(ctx2.delta, g)))
    return out


def double_coset_check(ctx2: GroupContext) -> dict:
    """Each (Q, H)-double coset contains exactly one x with sigma(x) x^-1 a listed parameter."""
    cos = ParabolicCosets(ctx2)
    Hg = subgroup_gens(ctx2, "H") if ctx2.order <= ctx2.budget else _h_generators_direct(ctx2)
    # orbit labels of H on Q\G
    label = np.full(cos.count, -1, dtype=np.int64)
    norb = 0
    for start in range(cos.count):
        if label[start] >= 0:
            continue
        label[start] = norb
        frontier = [start]
        while frontier:
            Y = ctx2.mat_mul(cos.reps[frontier][:, None], Hg[None]).reshape(-1, ctx2.n, ctx2.n)
            j, _ = cos.locate(Y)
            frontier = []
            for jj in j.tolist():
                if label[jj] < 0:
                    label[jj] = norb
                    frontier.append(jj)
        norb += 1
    hits = []
    for par, gamma in double_coset_parameters(ctx2):
        x = ctx2.lang_solve(gamma)
        if x is None:
            hits.append((par, None))
            continue
        if not np.array_equal(ctx2.mat_mul(ctx2.sigma(x), ctx2.inv(x)), gamma):
            raise InternalError("Lang solution does not solve")
        j, _ = cos.locate(np.asarray(x)[None])
        hits.append((par, int(label[j[0]])))
    orbits = [h for _, h in hits]
    ok = None not in orbits and sorted(orbits) == list(range(norb))
    return {"orbits": norb, "parameters": len(hits), "hits": hits, "complete": ok}


def _h_generators_direct(ctx2: GroupContext) -> np.ndarray:
    """Generators of H without enumerating it."""
    n = ctx2.n
    if ctx2.involution == "galois":
        k0 = ctx2.k.subfield_elements()
        prim = next(int(a) for a in k0 if a and _order_in(ctx2.k, int(a)) == len(k0) - 1)
        gens = [ctx2.elementary(i, j, 1) for i in range(n) for j in range(n) if i != j]
        d = ctx2.identity()
        d[0, 0] = prim
        gens.append(d)
        return np.array(gens)
    # Levi: GL on the even and on the odd coordinates
    gens = []
    prim = ctx2.k.primitive
    for par in (0, 1):
        idx = [i for i in range(n) if i % 2 == par]
        for a in idx:
            for b in idx:
                if a != b:
                    for e in range(ctx2.m):
                        gens.append(ctx2.elementary(a, b, ctx2.p**e))
        d = ctx2.identity()
        d[idx[0], idx[0]] = prim
        gens.append(d)
    return np.array(gens)


def _order_in(k, a: int) -> int:
    x, t = a, 1
    while x != 1:
        x = int(k.mul(x, a))
        t += 1
    return t


def dump_matrix(F, kf, M: np.ndarray) -> str:
    """Plain-text exchange format: one row per line, entries as coefficient tuples."""
    lines = []
    for row in np.asarray(M):
        lines.append(" ".join("(" + ",".join(str(int(c)) for c in kf.digits[int(v)]) + ")" for v in row))
    return "\n".join(lines) + "\n"
