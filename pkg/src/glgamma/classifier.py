"""Arithmetic of modular cuspidal parameters, the distinction predictor and
the gamma-factor congruence suite.

A non-supercuspidal cuspidal representation in characteristic l is described
by (q, l, n, k, r, u): it sits in rho^{x r} for a supercuspidal rho of GL_k,
n = k r and r = l^u e / gcd(e, k) with e the order of q mod l.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from fractions import Fraction
from math import gcd, isqrt

import numpy as np
import sympy

from .fields import AdditiveCharacter, additive_character
from .groups import GroupContext
from .scalars import CycloArray, CycloNumber, ReductionMap, build_reduction_map, cyclo_field, q_half_power, sqrt_q

CASES = ("galois", "levi")


def multiplicative_order(a: int, ell: int) -> int:
    a %= ell
    if a == 0:
        raise ValueError(f"{a} is not invertible mod {ell}")
    k, x = 1, a
    while x != 1:
        x = x * a % ell
        k += 1
    return k


def _prime_power(q: int) -> tuple[int, int]:
    f = sympy.factorint(q)
    if len(f) != 1:
        raise ValueError(f"{q} is not a prime power")
    (p, m), = f.items()
    return int(p), int(m)


def base_field_size(q: int, case: str) -> int:
    """q0: the subfield size (Galois) or q itself (Levi)."""
    if case == "galois":
        q0 = isqrt(q)
        if q0 * q0 != q:
            raise ValueError(f"q = {q} is not a square")
        return q0
    if case == "levi":
        return q
    raise ValueError(f"unknown case {case!r}")


def order_params(q: int, ell: int, case: str) -> tuple[int, int]:
    """(e, e0): orders of q and q0 modulo l."""
    p, _ = _prime_power(q)
    if ell == p:
        raise ValueError("l must differ from p")
    return multiplicative_order(q, ell), multiplicative_order(base_field_size(q, case), ell)


def v2(a: int) -> int:
    v = 0
    while a % 2 == 0:
        a //= 2
        v += 1
    return v


@dataclass(frozen=True)
class CuspidalParams:
    q: int
    ell: int
    n: int
    k: int
    r: int
    u: int
    case: str

    @property
    def e(self) -> int:
        return order_params(self.q, self.ell, self.case)[0]

    @property
    def e0(self) -> int:
        return order_params(self.q, self.ell, self.case)[1]

    def validate(self) -> None:
        if self.case not in CASES:
            raise ValueError(f"unknown case {self.case!r}")
        if not sympy.isprime(self.ell):
            raise ValueError(f"{self.ell} is not prime")
        p, _ = _prime_power(self.q)
        if self.ell == p:
            raise ValueError("l must differ from p")
        if self.n != self.k * self.r:
            raise ValueError("n must equal k r")
        if self.r > 1 and self.r != self.ell**self.u * self.e // gcd(self.e, self.k):
            raise ValueError("r must equal l^u e / gcd(e, k)")
        if self.case == "galois":
            base_field_size(self.q, "galois")
        if self.case == "levi" and self.n % 2:
            raise ValueError("the Levi case needs even n")

    def as_dict(self) -> dict:
        d = asdict(self)
        d.update(e=self.e, e0=self.e0)
        return d


def cuspidal_params(q: int, ell: int, k: int, u: int, case: str) -> CuspidalParams:
    """Parameters of the non-supercuspidal cuspidals built from a supercuspidal of GL_k."""
    e, _ = order_params(q, ell, case)
    r = ell**u * e // gcd(e, k)
    P = CuspidalParams(q, ell, k * r, k, r, u, case)
    P.validate()
    return P


@dataclass(frozen=True)
class Prediction:
    predicted: str  # distinguished-with-lift | distinguished-no-lift | not-distinguished
    clause: str

    @property
    def distinguished(self) -> bool:
        return self.predicted != "not-distinguished"


def lift_clause(params: CuspidalParams, sigma_selfdual: bool) -> bool:
    """Existence of a distinguished lift: sigma-self-dual and
    Galois: n odd and e0 even; Levi: r and n/e odd, or r = n."""
    if not sigma_selfdual:
        return False
    if params.case == "galois":
        return params.n % 2 == 1 and params.e0 % 2 == 0
    return (params.r % 2 == 1 and (params.n // params.e) % 2 == 1) or params.r == params.n


def predict(params: CuspidalParams, sigma_selfdual: bool) -> Prediction:
    params.validate()
    if params.r < 2:
        raise ValueError("the predictor covers non-supercuspidal cuspidals (r >= 2)")
    if not sigma_selfdual:
        return Prediction("not-distinguished", "distinguished representations are sigma-self-dual")
    lift = lift_clause(params, sigma_selfdual)
    if params.ell == 2:
        kind = "distinguished-with-lift" if lift else "distinguished-no-lift"
        return Prediction(kind, "l = 2: sigma-self-dual cuspidals are distinguished")
    if params.case == "galois":
        if lift:
            return Prediction("distinguished-with-lift", "galois: sigma-self-dual, n odd, e0 even")
        return Prediction("not-distinguished", "galois: n even or e0 odd")
    if lift:
        clause = "levi: r = n" if params.r == params.n else "levi: r and n/e odd"
        return Prediction("distinguished-with-lift", clause)
    return Prediction("not-distinguished", "levi: neither r, n/e odd nor r = n")


# ---------------------------------------------------------------------------
# parameter grid


def prime_powers(limit: int) -> list[int]:
    out = []
    for q in range(2, limit + 1):
        f = sympy.factorint(q)
        if len(f) == 1:
            out.append(q)
    return out


def parameter_grid(q_max: int = 49, ell_max: int = 13, k_max: int = 4, u_max: int = 2):
    """All valid parameter sets with r >= 2 in the given ranges."""
    for q in prime_powers(q_max):
        p, m = _prime_power(q)
        for ell in sympy.primerange(2, ell_max + 1):
            if ell == p:
                continue
            for case in CASES:
                if case == "galois" and m % 2:
                    continue
                if case == "levi" and p == 2:
                    continue
                for k in range(1, k_max + 1):
                    for u in range(u_max + 1):
                        e, _ = order_params(q, ell, case)
                        r = ell**u * e // gcd(e, k)
                        if r < 2 or (case == "levi" and (k * r) % 2):
                            continue
                        yield cuspidal_params(q, ell, k, u, case)


def lift_arithmetic(P: CuspidalParams) -> bool:
    """The arithmetic part of the lift criterion (distinction of rho assumed).

    Unramified shadow (Galois): e, k odd and e0 even.
    Ramified shadow (Levi): e even and k = 1 or v2(k) = v2(e) with k even."""
    if P.case == "galois":
        return P.e % 2 == 1 and P.k % 2 == 1 and P.e0 % 2 == 0
    return P.e % 2 == 0 and (P.k == 1 or (P.k % 2 == 0 and v2(P.k) == v2(P.e)))


def grid_checks(P: CuspidalParams) -> dict:
    """Arithmetic properties that must hold at every grid point."""
    out = {}
    # e is the order of q0^2 when q = q0^2
    q0 = base_field_size(P.q, P.case)
    if P.case == "galois":
        out["e_from_e0"] = P.e == P.e0 // gcd(P.e0, 2)
    # n / e = l^u k / gcd(e, k)
    out["n_over_e"] = P.n * gcd(P.e, P.k) == P.e * P.ell**P.u * P.k
    if lift_arithmetic(P):
        ram_parity = 1 if P.case == "galois" else 0
        out["ramification_parity"] = P.e0 % 2 == 0 and P.e % 2 == ram_parity
    if P.r % 2 == 0:
        # q^(n/2) = -1 mod l (n is even since r is)
        out["half_power_minus_one"] = pow(P.q, P.n // 2, P.ell) == (P.ell - 1) % P.ell
    out["q0_consistent"] = q0 * q0 == P.q if P.case == "galois" else q0 == P.q
    return out


# ---------------------------------------------------------------------------
# principal series and the congruence suite


def flag_representatives(ctx: GroupContext) -> np.ndarray:
    """One matrix x per complete flag, so that the cosets x B exhaust G/B."""
    n, q = ctx.n, ctx.q

    def rec(cols: list[int]) -> list[list[np.ndarray]]:
        # flags in the span of the standard basis vectors listed in cols
        if len(cols) == 1:
            v = np.zeros(n, dtype=np.int64)
            v[cols[0]] = 1
            return [[v]]
        out = []
        d = len(cols)
        for pivot in range(d):
            for tail in np.ndindex(*([q] * (d - pivot - 1))):
                v = np.zeros(n, dtype=np.int64)
                v[cols[pivot]] = 1
                for t, c in zip(tail, cols[pivot + 1 :]):
                    v[c] = t
                rest = cols[:pivot] + cols[pivot + 1 :]
                for sub in rec(rest):
                    out.append([v] + sub)
        return out

    flags = rec(list(range(n)))
    X = np.array([np.stack(f, axis=1) for f in flags], dtype=np.int64)
    assert np.all(ctx.det(X) != 0)
    return X


def multiplicative_character_values(k, a: int, N: int) -> CycloArray:
    """x -> zeta_{q-1}^(a log x) on codes 0..q-1 (value 0 at x = 0)."""
    F = cyclo_field(N)
    q = k.q
    if N % (q - 1):
        raise ValueError("conductor must be divisible by q - 1")
    num = np.zeros((q, F.phi), dtype=F.Z.dtype)
    logs = k.log_t[1:]
    num[1:] = F.Z[(a * logs * (N // (q - 1))) % N]
    return CycloArray(N, num, 1)


def principal_series_character(ctx: GroupContext, exps, N: int):
    """g -> trace of g on Ind_B^G(chi_1 x ... x chi_n), chi_i = x -> zeta^(exps[i] log x)."""
    X = flag_representatives(ctx)
    Xinv = ctx.inv(X)
    chars = [multiplicative_character_values(ctx.k, a, N) for a in exps]
    n = ctx.n
    lower = np.tril(np.ones((n, n), dtype=bool), -1)

    def chi(G: np.ndarray) -> CycloArray:
        G = np.asarray(G)
        conj = ctx.mat_mul(ctx.mat_mul(Xinv[None], G[:, None]), X[None])  # (g, flag, n, n)
        in_b = ~np.any(conj[..., lower] != 0, axis=-1)
        total = None
        for i in range(n):
            v = chars[i].take(conj[..., i, i])
            total = v if total is None else total * v
        num = np.where(in_b[..., None], total.num, 0)
        return CycloArray(N, num, total.den).sum(axis=1)

    return chi


def bessel_at(ctx: GroupContext, chi, psi: AdditiveCharacter, points: np.ndarray, N: int) -> CycloArray:
    """J(g) = (1/|N|) sum_u psi(u)^-1 chi(g u) at the given matrices."""
    U = ctx.subgroup_enumerate("N")
    k = ctx.k
    s = np.zeros(len(U), dtype=np.int64)
    for i in range(ctx.n - 1):
        s = k.add_t[s, U[:, i, i + 1]]
    wts = psi.values(s, N).conj()
    out = []
    for g in points:
        vals = chi(ctx.mat_mul(g[None], U))
        out.append((vals * wts).sum(axis=0))
    return CycloArray.from_numbers(out, N).scale(Fraction(1, len(U))).normalized()


def gamma_against_character(ctx: GroupContext, exps, b: int, psi: AdditiveCharacter,
                            convention: str = "generic", N: int | None = None) -> CycloNumber:
    """gamma(Ind(chi_exps), chi_b, psi) for a character chi_b of GL_1.

    Bessel sum chi_b(-1)^(n-1) q^((n-2)/2) sum_x J([[0, 1_(n-1)], [x, 0]]) chi_b(x),
    with J the Bessel function of the principal series."""
    n, q = ctx.n, ctx.q
    N = N or _congruence_conductor(ctx)
    chi = principal_series_character(ctx, exps, N)
    xs = np.arange(1, q)
    pts = np.zeros((q - 1, n, n), dtype=np.int64)
    pts[:, : n - 1, 1:] = np.eye(n - 1, dtype=np.int64)
    pts[:, n - 1, 0] = xs
    J = bessel_at(ctx, chi, psi, pts, N)
    rho = multiplicative_character_values(ctx.k, b, N)
    s = (J * rho.take(xs)).sum(axis=0)
    minus_one = int(ctx.k.neg(1))
    om = rho.item(minus_one)
    sq = sqrt_q(ctx.p, ctx.m, convention, conductor=N)
    return om ** (n - 1) * q_half_power(sq, q, n - 2) * s


def _congruence_conductor(ctx: GroupContext) -> int:
    base = 8 if ctx.p == 2 else 4 * ctx.p
    return int(np.lcm(base, ctx.q - 1))


def reduced_sigma_selfdual(q: int, ell: int, a: int, case: str) -> bool:
    """Whether the reduction mod l of x -> zeta_(q-1)^(a log x) is sigma-self-dual.

    The reduction only sees a modulo the l'-part w of q - 1; sigma acts by
    x -> x^q0 in the Galois case and trivially in the Levi case."""
    w = q - 1
    while w % ell == 0:
        w //= ell
    twist = base_field_size(q, case) if case == "galois" else 1
    return (a * (twist + 1)) % w == 0


@dataclass
class CongruenceReport:
    params: dict
    rho: int
    gamma: CycloNumber
    expected: CycloNumber
    reductions: list  # (seed, reduce(gamma), reduce(expected))
    agrees: bool
    prediction: Prediction
    distinguished_value: int | None  # predicted reduce(gamma) when distinguished
    distinguished_agrees: bool | None

    def ok(self) -> bool:
        return self.agrees and self.distinguished_agrees is not False


def congruence_check(q: int, ell: int, n: int, k: int, r: int, case: str,
                     convention: str = "generic", rhos=None) -> list[CongruenceReport]:
    """reduce(gamma(tau, rho^vee, psi)) = reduce(omega(-1)^(k-1) (-1)^r q^(n/2)) for every rho.

    tau is the generic constituent of rho^{x r}; its Bessel function is that of
    the whole induced representation.  When the reduction is predicted to be
    distinguished, reduce(gamma) must also be -1 (Levi, k = 1) or 1 (otherwise).
    Every reduction ideal is tried.  Only k = 1 is supported."""
    if k != 1:
        raise NotImplementedError("the congruence suite covers k = 1")
    p, m = _prime_power(q)
    params = CuspidalParams(q, ell, n, k, r, _solve_u(q, ell, k, r, case), case)
    params.validate()
    ctx = GroupContext(p, m, n)
    psi = additive_character(ctx.k)
    N = _congruence_conductor(ctx)
    rhos = range(q - 1) if rhos is None else rhos
    reports = []
    sq = sqrt_q(p, m, convention, conductor=N)
    n_choices = build_reduction_map(N, ell, 0).num_choices
    for a in rhos:
        g = gamma_against_character(ctx, [a] * n, (-a) % (q - 1), psi, convention, N)
        rho_m1 = multiplicative_character_values(ctx.k, a, N).item(int(ctx.k.neg(1)))
        omega_m1 = rho_m1**r
        expected = omega_m1 ** (k - 1) * (-1) ** r * q_half_power(sq, q, n)
        pred = predict(params, reduced_sigma_selfdual(q, ell, a, case))
        dval = None
        if pred.distinguished:
            dval = -1 if (case == "levi" and k == 1) else 1
        reds = []
        ok = True
        dok = None if dval is None else True
        for seed in range(n_choices):
            rmap = build_reduction_map(N, ell, seed)
            rg, re = rmap(g), rmap(expected)
            reds.append((seed, rg, re))
            ok &= rg == re
            if dval is not None:
                dok &= rg == rmap.target.from_int(dval)
        reports.append(CongruenceReport(params.as_dict(), a, g, expected, reds, bool(ok), pred, dval, dok))
    return reports


def _solve_u(q, ell, k, r, case) -> int:
    e, _ = order_params(q, ell, case)
    base = e // gcd(e, k)
    u = 0
    while base * ell**u < r:
        u += 1
    if base * ell**u != r:
        raise ValueError(f"r = {r} is not l^u e/(e, k)")
    return u


def reduce_gamma(g, rmap: ReductionMap):
    """Reduction of a gamma value; GammaValue inputs keep their provenance."""
    from .whittaker import GammaValue

    if isinstance(g, GammaValue):
        x = g.value
        prov = dict(g.provenance, reduction=rmap.descriptor())
    else:
        x, prov = g, None
    if x.N != rmap.N:
        if rmap.N % x.N:
            raise ValueError("reduction map conductor must be a multiple of the value's")
        x = x.embed(rmap.N)
    red = rmap(x)
    return red if prov is None else GammaValue(red, prov)
