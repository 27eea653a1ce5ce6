"""Verification suites shared by the command line and the acceptance tests.

Each suite is a list of tasks; a task is a top-level function returning rows
(check id, anchor, status, witness).  Tasks may run in worker processes, and
rows are ordered by check id so reports are deterministic."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import classifier, mod2
from .chartable import character_table
from .cuspidal import (CuspidalCharacter, gauss_gamma, hom_h_dim, regular_exponents, sparse_lambda_c,
                       sparse_rs_gamma)
from .fields import additive_character
from .groups import DEFAULT_BUDGET, GroupContext, TooLarge
from .scalars import CycloNumber, ModScalar, NonIntegralScalar, build_reduction_map
from .whittaker import (Rep, bessel, bessel_axioms, c_vs_gamma, character_of_gl1, functional_equation_check,
                        gj_gamma, induced_model_sampler, is_class_C, is_special, lambda_and_c, h_sum_criteria,
                        random_translates, reduce_function, reduced_bessel_axioms, reduced_rs_gamma, rs_gamma,
                        twisted_gauss_gamma)

SUITES = ("bessel", "gamma", "section6", "section7", "congruence")


@dataclass
class RunConfig:
    p: int | None = None
    m: int = 1
    n: int = 2
    case: str | None = None
    k0_degree: int | None = None
    ells: tuple = ()  # (ell, seed or None)
    convention: str = "generic"
    budget_elems: int = DEFAULT_BUDGET
    budget_dim: int = mod2.DIM_BUDGET
    seed: int = 0
    out: str | None = None
    cache_dir: str | None = None
    jobs: int = 1

    def validate(self) -> None:
        if self.case not in (None, "galois", "levi"):
            raise ValueError(f"unknown case {self.case!r}")
        if self.convention not in ("generic", "galois"):
            raise ValueError(f"unknown sqrt convention {self.convention!r}")
        if self.p is not None:
            if self.case == "galois":
                if self.m % 2:
                    raise ValueError("the Galois case needs m even")
                if self.k0_degree not in (None, self.m // 2):
                    raise ValueError("k0 must have degree m/2")
            if self.case == "levi" and self.p == 2:
                raise ValueError("the Levi case needs p odd")
            for ell, _ in self.ells:
                if ell == self.p:
                    raise ValueError(f"ell = {ell} equals the characteristic")

    def target(self):
        return None if self.p is None else (self.p, self.m, self.n)


@dataclass
class Row:
    check: str
    anchor: str
    ok: bool
    witness: dict = field(default_factory=dict)
    gating: bool = True

    def as_dict(self) -> dict:
        status = "pass" if self.ok else ("fail" if self.gating else "fail-nongating")
        return {"check": self.check, "anchor": self.anchor, "status": status, "witness": jsonable(self.witness)}


@dataclass
class SuiteReport:
    suite: str
    rows: list

    def ok(self) -> bool:
        return all(r.ok for r in self.rows if r.gating)

    def select(self, prefix: str) -> list:
        return [r for r in self.rows if r.check.startswith(prefix)]

    def as_dict(self) -> dict:
        return {"suite": self.suite, "ok": self.ok(), "rows": [r.as_dict() for r in self.rows]}

    def tsv(self) -> str:
        lines = ["check\tanchor\tstatus"]
        lines += [f"{d['check']}\t{d['anchor']}\t{d['status']}" for d in (r.as_dict() for r in self.rows)]
        return "\n".join(lines) + "\n"


def jsonable(x):
    """Exact scalars become conductor plus integer vectors; no floats survive."""
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, str) or x is None:
        return x
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (CycloNumber, ModScalar)):
        return x.to_json()
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [jsonable(v) for v in x]
    if isinstance(x, float):
        raise TypeError("floats are not allowed in reports")
    if hasattr(x, "as_dict"):
        return jsonable(x.as_dict())
    return str(x)


def _tag(ctx: GroupContext) -> str:
    return f"GL{ctx.n}(F{ctx.q})"


def _ctx(p, m, n, case=None, budget=DEFAULT_BUDGET):
    return GroupContext(p, m, n, case, budget=budget)


def _table(ctx, cache_dir):
    return character_table(ctx, cache_dir)


def _convention(case) -> str:
    return "galois" if case == "galois" else "generic"


def _psi(ctx):
    return additive_character(ctx.k, trivial_on_k0=ctx.involution == "galois")


# ---------------------------------------------------------------------------
# bessel


BESSEL_GROUPS = [(3, 1, 2), (2, 2, 2), (5, 1, 2), (2, 1, 3), (3, 1, 3)]


def bessel_task(p, m, n, budget=DEFAULT_BUDGET, cache_dir=None) -> list:
    ctx = _ctx(p, m, n, budget=budget)
    T = _table(ctx, cache_dir)
    psi = additive_character(ctx.k)
    rows = []
    for i in range(T.count):
        if not T.generic[i]:
            continue
        ax = bessel_axioms(bessel(Rep.irreducible(T, i), psi))
        rows.append(Row(f"bessel/{_tag(ctx)}/chi{i:03d}", "bessel-axioms", all(ax.values()),
                        dict(ax, degree=int(T.degrees[i]), cuspidal=bool(T.cuspidal[i]))))
    rows.append(Row(f"bessel/{_tag(ctx)}/count", "bessel-axioms", len(rows) > 0, {"generic": len(rows)}))
    return rows


def bessel_tasks(cfg: RunConfig) -> list:
    groups = [cfg.target()] if cfg.p else BESSEL_GROUPS
    return [(bessel_task, (p, m, n, cfg.budget_elems, cfg.cache_dir)) for p, m, n in groups]


# ---------------------------------------------------------------------------
# gamma: functional equation, identities, distinguished values, reductions


FE_CASES = [(2, 1, 2, 1), (3, 1, 2, 1), (2, 1, 3, 1), (3, 1, 3, 1), (2, 1, 3, 2), (3, 1, 3, 2), (2, 1, 4, 2)]
FE_MIN_PAIRS = 20


def _fe_partners(ctx_m, psi, cache_dir, limit=3):
    """A sample of Whittaker-type representations of GL_m: generic irreducibles and 1 x ... x 1."""
    Tm = _table(ctx_m, cache_dir)
    out = [(Rep.irreducible(Tm, j), None) for j in range(Tm.count) if Tm.generic[j]][:limit]
    if ctx_m.n >= 2:
        c1 = ctx_m.with_n(1)
        T1 = _table(c1, cache_dir)
        parts, tables, rows = (1,) * ctx_m.n, [T1] * ctx_m.n, [0] * ctx_m.n
        out.append((Rep.induced(ctx_m, parts, tables, rows),
                    induced_model_sampler(ctx_m, parts, tables, rows, psi.inverse())))
    return out


def fe_task(p, m, n, mm, seed=0, convention="generic", budget=DEFAULT_BUDGET, cache_dir=None) -> list:
    ctx = _ctx(p, m, n, budget=budget)
    T = _table(ctx, cache_dir)
    psi = additive_character(ctx.k)
    cusp = [i for i in range(T.count) if T.cuspidal[i]]
    partners = _fe_partners(ctx.with_n(mm), psi, cache_dir)
    npairs = len(cusp) * len(partners)
    trials = max(2, math.ceil(FE_MIN_PAIRS / max(npairs, 1)))
    rows = []
    total = nonzero = 0
    base = f"gamma/fe/{_tag(ctx)}xGL{mm}"
    for i in cusp:
        pi = Rep.irreducible(T, i)
        for pip, sampler in partners:
            r = functional_equation_check(pi, pip, psi, trials=trials, seed=seed + i, convention=convention,
                                          pip_functions=sampler)
            total += trials
            nonzero += r["nonzero_pairs"]
            rows.append(Row(f"{base}/chi{i:03d}/{pip.label}", "functional-equation", r["ok"], r))
    rows.append(Row(f"{base}/pairs", "functional-equation", total >= FE_MIN_PAIRS and nonzero > 0,
                    {"random_pairs": total, "nonzero_pairs": nonzero, "cuspidals": len(cusp),
                     "partners": [pip.label for pip, _ in partners]}))
    return rows


IDENTITY_GROUPS = [(3, 1, 2), (2, 2, 2), (2, 1, 3), (3, 1, 3)]


def _covariance(pi, pip, psi, g, convention):
    """gamma(pi, pi', psi^a) = omega_pi(a)^m omega_pi'(a)^n gamma(pi, pi', psi) for every a."""
    ctx = pi.ctx
    n, mm = ctx.n, pip.ctx.n
    bad = []
    for a in range(1, ctx.q):
        ga = rs_gamma(pi, pip, psi.power(a), convention).value
        w = pi.central_value(a) ** mm * pip.central_value(a).embed(pi.table.N) ** n
        N = max(ga.N, w.N, g.N)
        if ga.embed(N) != w.embed(N) * g.embed(N):
            bad.append(a)
    return bad


def identities_task(p, m, n, convention="generic", budget=DEFAULT_BUDGET, cache_dir=None) -> list:
    ctx = _ctx(p, m, n, budget=budget)
    T = _table(ctx, cache_dir)
    psi = additive_character(ctx.k)
    c1 = ctx.with_n(1)
    T1 = _table(c1, cache_dir)
    tag = _tag(ctx)
    rows = []
    for i in [i for i in range(T.count) if T.cuspidal[i]][:3]:
        pi = Rep.irreducible(T, i)
        partners = [(f"GL1.a{a}", character_of_gl1(c1, a), a) for a in range(ctx.q - 1)]
        for mm in range(2, n):
            Tm = _table(ctx.with_n(mm), cache_dir)
            partners += [(f"GL{mm}.chi{j}", Rep.irreducible(Tm, j), None)
                         for j in range(Tm.count) if Tm.generic[j]][:3]
        for name, pip, a in partners:
            base = f"gamma/identity/{tag}/chi{i:03d}/{name}"
            g = rs_gamma(pi, pip, psi, convention)
            rows.append(Row(f"{base}/nonzero", "gamma-nonzero", not g.value.is_zero(), {"gamma": g.value}))
            gs = rs_gamma(pi.star(), pip.star(), psi.inverse(), convention).value
            N = max(g.value.N, gs.N)
            rows.append(Row(f"{base}/inverse", "gamma-dual-inverse", g.value.embed(N) * gs.embed(N) == 1,
                            {"gamma_dual": gs}))
            bad = _covariance(pi, pip, psi, g.value, convention)
            rows.append(Row(f"{base}/psi-covariance", "psi-covariance", not bad,
                            {"failing_a": bad, "weights": f"omega_pi(a)^{pip.ctx.n} omega_pi'(a)^{n}"}))
            if a is not None:
                g2 = twisted_gauss_gamma(pi, a, psi, convention)
                rows.append(Row(f"{base}/second-route", "gamma-two-routes", g2.value == g.value,
                                {"gauss_sum_route": g2.value}))
        if n == 3:
            c2 = ctx.with_n(2)
            T2 = _table(c2, cache_dir)
            from .chartable import generic_constituent

            for a in range(ctx.q - 1):
                for b in range(a, ctx.q - 1):
                    ra, rb = character_of_gl1(c1, a), character_of_gl1(c1, b)
                    ind = Rep.induced(c2, (1, 1), [T1, T1], [ra.index, rb.index])
                    g = rs_gamma(pi, ind, psi, convention).value
                    tau = generic_constituent(c2, (1, 1), [T1, T1], [ra.index, rb.index])
                    gt = rs_gamma(pi, Rep.irreducible(T2, tau), psi, convention).value
                    ga = rs_gamma(pi, ra, psi, convention).value
                    gb = rs_gamma(pi, rb, psi, convention).value
                    base = f"gamma/identity/{tag}/chi{i:03d}/a{a}xa{b}"
                    rows.append(Row(f"{base}/generic-constituent", "generic-constituent-invariance", g == gt,
                                    {"constituent": tau, "gamma": g}))
                    rows.append(Row(f"{base}/multiplicativity", "multiplicativity", g == ga * gb,
                                    {"gamma_a": ga, "gamma_b": gb}))
    return rows


DIST_GROUPS = [(2, 2, 1, "galois"), (3, 2, 1, "galois"), (3, 1, 2, "levi"), (5, 1, 2, "levi")]
DIST_STRETCH = [(2, 2, 3, "galois")]


def distinguished_task(p, m, n, case, gating=True, budget=DEFAULT_BUDGET, cache_dir=None) -> list:
    """gj gamma and c for H-distinguished cuspidals: 1 (Galois) or sgn (Levi)."""
    ctx = _ctx(p, m, n, case, budget=budget)
    tag = f"{_tag(ctx)}-{case}"
    try:
        T = _table(ctx, cache_dir)
    except TooLarge as exc:
        return [Row(f"gamma/distinguished/{tag}/table", "distinguished-gamma", False, {"too_large": str(exc)},
                    gating)]
    psi = _psi(ctx)
    conv = _convention(case)
    rows = []
    for i in range(T.count):
        if not (T.cuspidal[i] and T.hom_H_dim(i) == 1):
            continue
        pi = Rep.irreducible(T, i)
        sgn = T.sgn_of(i) if case == "levi" else 1
        g = gj_gamma(pi, psi, conv)
        lc = lambda_and_c(pi, psi)
        base = f"gamma/distinguished/{tag}/chi{i:03d}"
        rows.append(Row(f"{base}/gamma", "distinguished-gamma", g.value == sgn,
                        {"gamma": g.value, "expected": sgn, "method": g.provenance["method"]}, gating))
        rows.append(Row(f"{base}/c", "c-constant", lc["c"] == sgn ** (n - 1),
                        {"c": lc["c"], "expected": sgn ** (n - 1), "lambda_J_is_one": lc["lambda_J_is_one"],
                         "p_h_invariant": lc.get("p_h_invariant")}, gating))
    rows.append(Row(f"gamma/distinguished/{tag}/count", "distinguished-gamma", len(rows) > 0,
                    {"instances": len(rows) // 2}, gating))
    return rows


REDUCTION_GROUPS = [(3, 1, 2), (2, 2, 2), (5, 1, 2), (2, 1, 3)]
REDUCTION_ELLS = (2, 3, 5, 7)


def reduction_task(p, m, n, ells, budget=DEFAULT_BUDGET, cache_dir=None) -> list:
    """Integrality, reduced axioms and reduce(gamma) = gamma(reduced data) for each reduction ideal."""
    ctx = _ctx(p, m, n, budget=budget)
    T = _table(ctx, cache_dir)
    psi = additive_character(ctx.k)
    c1 = ctx.with_n(1)
    rows = []
    tag = _tag(ctx)
    for ell, seed in ells:
        if ell == p:
            continue
        seeds = range(build_reduction_map(T.N, ell, 0).num_choices) if seed is None else [seed]
        for s in seeds:
            rmap = build_reduction_map(T.N, ell, s)
            integral = axioms = gammas = True
            checked = 0
            for i in range(T.count):
                if not T.generic[i]:
                    continue
                pi = Rep.irreducible(T, i)
                try:
                    Jl = reduce_function(bessel(pi, psi), rmap)
                except NonIntegralScalar:
                    integral = False
                    continue
                axioms &= all(reduced_bessel_axioms(Jl, ctx, psi, rmap).values())
                if T.cuspidal[i]:
                    for a in range(ctx.q - 1):
                        pip = character_of_gl1(c1, a)
                        g = classifier.reduce_gamma(rs_gamma(pi, pip, psi).value, rmap)
                        gammas &= g == reduced_rs_gamma(pi, pip, psi, rmap)
                        checked += 1
            base = f"gamma/reduction/{tag}/l{ell}/s{s}"
            desc = rmap.descriptor()
            rows.append(Row(f"{base}/integral", "ell-integrality", integral, desc))
            rows.append(Row(f"{base}/axioms", "reduced-bessel-axioms", integral and axioms, {}))
            rows.append(Row(f"{base}/gamma", "reduced-gamma", integral and gammas, {"pairs": checked}))
    return rows


def gamma_tasks(cfg: RunConfig) -> list:
    kw = {"budget": cfg.budget_elems, "cache_dir": cfg.cache_dir}
    ells = cfg.ells or tuple((ell, None) for ell in REDUCTION_ELLS)
    if cfg.p:
        p, m, n = cfg.target()
        tasks = [(fe_task, (p, m, n, mm, cfg.seed, cfg.convention), kw) for mm in range(1, n)]
        tasks.append((identities_task, (p, m, n, cfg.convention), kw))
        if cfg.case:
            tasks.append((distinguished_task, (p, m, n, cfg.case), kw))
        tasks.append((reduction_task, (p, m, n, ells), kw))
        return tasks
    tasks = [(fe_task, (p, m, n, mm, cfg.seed, cfg.convention), kw) for p, m, n, mm in FE_CASES]
    tasks += [(identities_task, (p, m, n, cfg.convention), kw) for p, m, n in IDENTITY_GROUPS]
    tasks += [(distinguished_task, (p, m, n, case), kw) for p, m, n, case in DIST_GROUPS]
    tasks += [(distinguished_pointwise_task, (p, m, n, case, False, cfg.budget_elems))
              for p, m, n, case in DIST_STRETCH]
    tasks += [(reduction_task, (p, m, n, ells), kw) for p, m, n in REDUCTION_GROUPS]
    return tasks


# ---------------------------------------------------------------------------
# class C, special, the H-sum lemma and gamma = c


SECTION6_GROUPS = [(3, 1, 2, "levi"), (5, 1, 2, "levi"), (7, 1, 2, "levi"), (2, 2, 2, "galois")]
DENSE_LIMIT = 2500


def section6_task(p, m, n, case, seed=0, trials=12, budget=DEFAULT_BUDGET, cache_dir=None) -> list:
    ctx = _ctx(p, m, n, case, budget=budget)
    T = _table(ctx, cache_dir)
    psi = _psi(ctx)
    conv = _convention(case)
    tag = f"{_tag(ctx)}-{case}"
    rows = []
    dist = [i for i in range(T.count) if T.cuspidal[i] and T.hom_H_dim(i) > 0]
    for i in dist:
        pi = Rep.irreducible(T, i)
        cc = is_class_C(pi, psi, limit=DENSE_LIMIT)
        sp = is_special(pi, psi, limit=DENSE_LIMIT)
        base = f"section6/{tag}/chi{i:03d}"
        rows.append(Row(f"{base}/class-C", "distinguished-cuspidal-class-C", cc["class_C"] and cc["consistent"], cc))
        rows.append(Row(f"{base}/special", "class-C-implies-special", sp["special"] and sp["consistent"], sp))
    rows.append(Row(f"section6/{tag}/distinguished-cuspidals", "distinguished-cuspidal-class-C", True,
                    {"count": len(dist)}))
    # 1 x ... x 1 is of class C
    c1 = ctx.with_n(1)
    T1 = _table(c1, cache_dir)
    ones = Rep.induced(ctx, (1,) * n, [T1] * n, [0] * n)
    cc = is_class_C(ones, psi, limit=DENSE_LIMIT)
    rows.append(Row(f"section6/{tag}/trivial-product/class-C", "induced-trivial-class-C",
                    cc["class_C"] and cc["consistent"], cc))
    # the H-sum lemma on random W in Ind(psi^-1)
    rng = np.random.default_rng(seed)
    agree = 0
    both_true = 0
    sources = [Rep.irreducible(T, i) for i in range(T.count) if T.generic[i]]
    for t in range(trials):
        W = random_translates(bessel(sources[t % len(sources)], psi.inverse()), rng)
        c_1, c_2 = h_sum_criteria(ctx, W, T.h_indices)
        agree += c_1 == c_2
        both_true += c_1 and c_2
    rows.append(Row(f"section6/{tag}/h-sum-lemma", "h-sums-vs-orthogonality", agree == trials,
                    {"trials": trials, "agreeing": agree, "both_true": both_true}))
    rows += _gamma_equals_c(ctx, T, psi, conv, dist, tag, cache_dir)
    return rows


def _special_partners(ctx_m, psi, cache_dir, limit=None):
    """H-distinguished Whittaker-type representations of GL_m checked to be special."""
    Tm = _table(ctx_m, cache_dir)
    cands = [Rep.irreducible(Tm, j) for j in range(Tm.count) if Tm.generic[j] and Tm.hom_H_dim(j) > 0]
    if ctx_m.n >= 2:
        T1 = _table(ctx_m.with_n(1), cache_dir)
        cands.append(Rep.induced(ctx_m, (1,) * ctx_m.n, [T1] * ctx_m.n, [0] * ctx_m.n))
    out = []
    for r in cands:
        if ctx_m.n == 1 or is_special(r, psi.inverse(), limit=limit)["special"]:
            out.append(r)
    return out


def _gamma_equals_c(ctx, T, psi, conv, dist, tag, cache_dir) -> list:
    rows = []
    if not dist:
        return rows
    partners = _special_partners(ctx.with_n(ctx.n - 1), psi, cache_dir)
    for i in dist:
        pi = Rep.irreducible(T, i)
        for pip in partners:
            r = c_vs_gamma(pi, pip, psi, conv)
            rows.append(Row(f"section6/{tag}/chi{i:03d}/gamma-vs-c/{pip.label}", "gamma-equals-c", r["equal"], r))
    return rows


SECTION6_TWO_PARTNERS = [(2, 2, 3, "galois")]


def two_partner_task(p, m, n, case, partners=3, budget=DEFAULT_BUDGET, cache_dir=None) -> list:
    """gamma(pi, pi', psi) = c(pi, psi) = gamma(pi, pi'', psi) for different special pi', pi''.

    The cuspidal pi is evaluated pointwise, so the full table of GL_n is not needed."""
    ctx = _ctx(p, m, n, case, budget=budget)
    tag = f"{_tag(ctx)}-{case}"
    psi = _psi(ctx)
    conv = _convention(case)
    dist = [b for b in regular_exponents(ctx.q, n) if hom_h_dim(CuspidalCharacter(ctx, b)) > 0]
    special = _special_partners(ctx.with_n(n - 1), psi, cache_dir)
    chosen = special[: partners - 1] + special[-1:] if len(special) > partners else special
    rows = []
    for b in dist:
        chi = CuspidalCharacter(ctx, b)
        c = sparse_lambda_c(chi, psi)["c"]
        for pip in chosen:
            g = sparse_rs_gamma(chi, pip, psi, conv).value
            rows.append(Row(f"section6/{tag}/{chi.label}/gamma-vs-c/{pip.label}", "gamma-equals-c", g == c,
                            {"gamma": g, "c": c}))
    labels = {pip.label for pip in chosen}
    rows.append(Row(f"section6/{tag}/two-special-partners", "gamma-equals-c",
                    bool(dist) and len(labels) >= 2 and all(r.ok for r in rows),
                    {"distinguished_cuspidals": [f"b{b}" for b in dist], "partners": sorted(labels),
                     "special_available": len(special)}))
    return rows


def distinguished_pointwise_task(p, m, n, case, gating=False, budget=DEFAULT_BUDGET) -> list:
    """gj gamma (two routes) and c for distinguished cuspidals evaluated pointwise."""
    ctx = _ctx(p, m, n, case, budget=budget)
    tag = f"{_tag(ctx)}-{case}"
    psi = _psi(ctx)
    conv = _convention(case)
    one = Rep.trivial(ctx.with_n(1))
    rows = []
    for b in regular_exponents(ctx.q, n):
        chi = CuspidalCharacter(ctx, b)
        if hom_h_dim(chi) != 1:
            continue
        if case == "levi":
            raise NotImplementedError("the pointwise route has no sign computation")
        g = sparse_rs_gamma(chi, one, psi, conv).value
        g2 = gauss_gamma(chi, psi, conv).value
        lc = sparse_lambda_c(chi, psi)
        base = f"gamma/distinguished/{tag}/{chi.label}"
        rows.append(Row(f"{base}/gamma", "distinguished-gamma", g == 1 and g2 == g,
                        {"gamma": g, "gauss_sum_route": g2, "expected": 1}, gating))
        rows.append(Row(f"{base}/c", "c-constant", lc["c"] == 1,
                        {"c": lc["c"], "expected": 1, "lambda_J_is_one": lc["lambda_J_is_one"]}, gating))
    rows.append(Row(f"gamma/distinguished/{tag}/count", "distinguished-gamma", len(rows) > 0,
                    {"instances": len(rows) // 2}, gating))
    return rows


def section6_tasks(cfg: RunConfig) -> list:
    kw = {"budget": cfg.budget_elems, "cache_dir": cfg.cache_dir}
    if cfg.p:
        if not cfg.case:
            raise ValueError("section6 needs --case")
        return [(section6_task, (*cfg.target(), cfg.case, cfg.seed), kw)]
    tasks = [(section6_task, (p, m, n, case, cfg.seed), kw) for p, m, n, case in SECTION6_GROUPS]
    tasks += [(two_partner_task, (p, m, n, case), kw) for p, m, n, case in SECTION6_TWO_PARTNERS]
    return tasks


# ---------------------------------------------------------------------------
# the mod 2 towers


TOWERS = [(3, 1, "levi", 2), (3, 2, "galois", 1)]


def _tower_params(q, level_n, case):
    """Cuspidal parameters of sp_u(trivial character of GL_1) at GL_level_n, ell = 2."""
    u = int(level_n).bit_length() - 1
    return classifier.cuspidal_params(q, 2, 1, u, case)


def tower_task(p, m, case, steps, coeff_m=1, seed=0, dim_budget=mod2.DIM_BUDGET) -> list:
    rep = mod2.sp_tower(p, m, case, steps=steps, coeff_m=coeff_m, seed=seed, dim_budget=dim_budget)
    tag = f"{case}-q{p ** m}" + ("" if coeff_m == 1 else f"-coeffs-F{2 ** coeff_m}")
    rows = []
    for lv in rep.levels:
        base = f"section7/{tag}/GL{lv.n}"
        for name, ok in sorted(lv.checks.items()):
            rows.append(Row(f"{base}/{name}", f"tower-{name.replace('_', '-')}", bool(ok),
                            {"ambient": lv.ambient_dim, "layers": lv.layers}))
        lay = lv.layers
        rows.append(Row(f"{base}/length-three", "three-layer-structure",
                        len(lay) == 3 and min(lay) > 0 and lay[0] == lay[2] and sum(lay) == lv.ambient_dim,
                        {"layers": lay, "ambient": lv.ambient_dim, "kernel": lv.ker_dim, "image": lv.im_dim}))
        rows.append(Row(f"{base}/hom-dims", "hom-dimensions", lv.hom["cosocle"] <= 1 and lv.hom["sp1"] >= 1,
                        lv.hom))
        P = _tower_params(p ** m, lv.n, case)
        pred = classifier.predict(P, True)
        rows.append(Row(f"section7/predict/{tag}/GL{lv.n}", "predictor-agreement",
                        P.n == lv.n and pred.distinguished == (lv.hom["sp1"] >= 1),
                        {"params": P.as_dict(), "clause": pred.clause, "predicted": pred.predicted,
                         "computed_hom_dim": lv.hom["sp1"]}))
    rows.append(Row(f"section7/{tag}/levels", "tower-levels", len(rep.levels) == steps,
                    {"levels": len(rep.levels), "truncated": rep.truncated, "coeff_m": coeff_m}))
    return rows


DOUBLE_COSETS = [(2, 2, "galois"), (3, 2, "galois"), (3, 1, "levi"), (5, 1, "levi")]


def double_coset_task(p, m, case, budget=DEFAULT_BUDGET) -> list:
    rows = []
    for n in (2, 4):
        ctx = _ctx(p, m, n, case, budget=budget)
        r = mod2.double_coset_check(ctx)
        rows.append(Row(f"section7/double-cosets/{case}-q{ctx.q}/GL{n}", "double-coset-parameters",
                        bool(r["complete"]), r))
    return rows


def section7_tasks(cfg: RunConfig) -> list:
    if cfg.p:
        if not cfg.case:
            raise ValueError("section7 needs --case")
        steps = max(1, int(cfg.n).bit_length() - 1)
        return [(tower_task, (cfg.p, cfg.m, cfg.case, steps, 1, cfg.seed, cfg.budget_dim)),
                (double_coset_task, (cfg.p, cfg.m, cfg.case, cfg.budget_elems))]
    tasks = [(tower_task, (p, m, case, steps, 1, cfg.seed, cfg.budget_dim)) for p, m, case, steps in TOWERS]
    tasks.append((tower_task, (3, 1, "levi", 1, 2, cfg.seed, cfg.budget_dim)))
    tasks += [(double_coset_task, (p, m, case, cfg.budget_elems)) for p, m, case in DOUBLE_COSETS]
    return tasks


# ---------------------------------------------------------------------------
# congruences and the parameter grid


CONGRUENCES = [(9, 5, 2, 1, 2, "levi"), (3, 2, 2, 1, 2, "levi"), (4, 3, 3, 1, 3, "galois")]


def congruence_task(q, ell, n, k, r, case, convention="generic") -> list:
    rows = []
    tag = f"{case}-q{q}-l{ell}-n{n}"
    for rep in classifier.congruence_check(q, ell, n, k, r, case, convention):
        w = {"params": rep.params, "gamma": rep.gamma, "expected": rep.expected,
             "reductions": [{"seed": s, "gamma": a, "expected": b} for s, a, b in rep.reductions],
             "clause": rep.prediction.clause, "predicted": rep.prediction.predicted,
             "distinguished_value": rep.distinguished_value}
        rows.append(Row(f"congruence/{tag}/rho{rep.rho:02d}", "gamma-congruence", rep.agrees, w))
        if rep.distinguished_value is not None:
            rows.append(Row(f"congruence/{tag}/rho{rep.rho:02d}/distinguished", "distinguished-congruence",
                            bool(rep.distinguished_agrees), {"value": rep.distinguished_value}))
    return rows


def grid_task(q_max=49, ell_max=13) -> list:
    counts: dict = {}
    failures: dict = {}
    for P in classifier.parameter_grid(q_max, ell_max):
        for name, ok in classifier.grid_checks(P).items():
            counts[name] = counts.get(name, 0) + 1
            if not ok:
                failures.setdefault(name, []).append(P.as_dict())
    return [Row(f"congruence/grid/{name}", f"grid-{name.replace('_', '-')}", name not in failures,
                {"points": counts[name], "failures": failures.get(name, [])[:5]})
            for name in sorted(counts)]


def congruence_tasks(cfg: RunConfig) -> list:
    tasks = [(congruence_task, (*c, cfg.convention)) for c in CONGRUENCES]
    tasks.append((grid_task, ()))
    return tasks


# ---------------------------------------------------------------------------
# running


TASKS = {"bessel": bessel_tasks, "gamma": gamma_tasks, "section6": section6_tasks,
         "section7": section7_tasks, "congruence": congruence_tasks}


def _run(task):
    fn, args, *rest = task
    kwargs = rest[0] if rest else {}
    return fn(*args, **kwargs)


def run_suite(name: str, cfg: RunConfig | None = None) -> SuiteReport:
    if name not in TASKS:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    cfg = cfg or RunConfig()
    cfg.validate()
    tasks = TASKS[name](cfg)
    if cfg.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as ex:
            results = list(ex.map(_run, tasks))
    else:
        results = [_run(t) for t in tasks]
    rows = sorted((r for rs in results for r in rs), key=lambda r: r.check)
    return SuiteReport(name, rows)


# acceptance criteria as (suite, check-id prefixes)
CRITERIA = {
    1: ("bessel", ("bessel/",)),
    2: ("gamma", ("gamma/fe/",)),
    3: ("gamma", ("gamma/identity/",)),
    4: ("gamma", ("gamma/distinguished/",)),
    5: ("section6", ("section6/",)),
    6: ("gamma", ("gamma/reduction/",)),
    7: ("congruence", ("congruence/galois", "congruence/levi")),
    8: ("section7", ("section7/levi", "section7/galois")),
    9: ("section7", ("section7/predict/",)),
}
GRID_PREFIX = "congruence/grid/"


def criterion_rows(n: int, reports: dict) -> list:
    suite, prefixes = CRITERIA[n]
    rows = [r for r in reports[suite].rows if r.check.startswith(prefixes)]
    if n == 9:
        rows += reports["congruence"].select(GRID_PREFIX)
    return rows
