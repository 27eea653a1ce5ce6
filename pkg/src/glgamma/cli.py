"""Command line driver: character tables, gamma tables and the verification suites.

    glgamma table --p 3 --n 2
    glgamma gamma --p 3 --n 2 --mm 1 --ell 2 --ell 3:1
    glgamma verify bessel --out reports/bessel
    glgamma verify all --jobs 4

Every option may also be given through the environment (GLGAMMA_P,
GLGAMMA_M, GLGAMMA_N, GLGAMMA_CASE, GLGAMMA_SEED, GLGAMMA_JOBS,
GLGAMMA_BUDGET_ELEMS, GLGAMMA_BUDGET_DIM, GLGAMMA_CACHE).  Reports are JSON
with sorted keys plus a TSV summary; exact values are serialized as a
conductor and integer vectors.  The exit status is 0 iff every check passes.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import classifier, mod2
from .chartable import _cache_dir, _cache_name, character_table
from .groups import DEFAULT_BUDGET, GroupContext, TooLarge
from .scalars import NonIntegralScalar, build_reduction_map
from .suites import (SUITES, Row, RunConfig, SuiteReport, _covariance, _fe_partners, _psi, jsonable, run_suite)
from .whittaker import Rep, character_of_gl1, functional_equation_check, rs_gamma, twisted_gauss_gamma

ENV = {
    "p": ("GLGAMMA_P", int),
    "m": ("GLGAMMA_M", int),
    "n": ("GLGAMMA_N", int),
    "case": ("GLGAMMA_CASE", str),
    "seed": ("GLGAMMA_SEED", int),
    "jobs": ("GLGAMMA_JOBS", int),
    "budget_elems": ("GLGAMMA_BUDGET_ELEMS", int),
    "budget_dim": ("GLGAMMA_BUDGET_DIM", int),
    "cache_dir": ("GLGAMMA_CACHE", str),
}


def _ell(text: str):
    """ell or ell:seed."""
    ell, _, seed = text.partition(":")
    try:
        return int(ell), (int(seed) if seed else None)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected ell or ell:seed, got {text!r}")


def _common(ap: argparse.ArgumentParser) -> None:
    ap.add_argument("--p", type=int, help="characteristic of k")
    ap.add_argument("--m", type=int, help="degree of k over F_p (default 1)")
    ap.add_argument("--n", type=int, help="rank of GL_n (default 2)")
    ap.add_argument("--case", choices=("galois", "levi"), help="involution")
    ap.add_argument("--k0-degree", type=int, help="degree of k0 over F_p (Galois case, must be m/2)")
    ap.add_argument("--ell", type=_ell, action="append", default=[], metavar="ELL[:SEED]",
                    help="reduction prime with optional choice of prime ideal; repeatable")
    ap.add_argument("--sqrt-convention", choices=("generic", "galois"), help="choice of q^(1/2)")
    ap.add_argument("--budget-elems", type=int, help=f"group enumeration bound (default {DEFAULT_BUDGET})")
    ap.add_argument("--budget-dim", type=int, help=f"mod 2 module dimension bound (default {mod2.DIM_BUDGET})")
    ap.add_argument("--seed", type=int, help="random seed (default 0)")
    ap.add_argument("--out", help="output path prefix; writes PREFIX.json and PREFIX.tsv")
    ap.add_argument("--cache-dir", help="character table cache directory")
    ap.add_argument("--jobs", type=int, help="worker processes for the suites (default 1)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="glgamma", description="Exact gamma factors and distinction for GL_n(F_q).")
    sub = ap.add_subparsers(dest="command", required=True)
    t = sub.add_parser("table", help="build (or load) a character table and summarize it")
    _common(t)
    g = sub.add_parser("gamma", help="gamma factors of cuspidal pi against Whittaker-type pi'")
    _common(g)
    g.add_argument("--mm", type=int, default=1, help="rank of the partner group GL_mm (default 1)")
    g.add_argument("--pi", type=int, action="append", help="table index of pi (default: every cuspidal)")
    g.add_argument("--partner", action="append",
                   help="partner: the exponent a of chi^a when mm = 1, otherwise a generic table index of GL_mm "
                        "or 'ones' for 1 x ... x 1 (default: all)")
    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("suite", help=f"one of {', '.join(SUITES + ('all',))}")
    _common(v)
    return ap


def config_from_args(args, environ=None) -> RunConfig:
    environ = os.environ if environ is None else environ
    vals = {}
    for key, (var, conv) in ENV.items():
        v = getattr(args, key, None)
        if v is None and var in environ:
            v = conv(environ[var])
        if v is not None:
            vals[key] = v
    cfg = RunConfig(**vals)
    cfg.k0_degree = args.k0_degree
    cfg.ells = tuple(args.ell)
    cfg.convention = args.sqrt_convention or ("galois" if cfg.case == "galois" else "generic")
    cfg.out = args.out
    cfg.validate()
    return cfg


def _context(cfg: RunConfig, n=None) -> GroupContext:
    if cfg.p is None:
        raise ValueError("--p is required")
    return GroupContext(cfg.p, cfg.m, cfg.n if n is None else n, cfg.case, k0_degree=cfg.k0_degree,
                        budget=cfg.budget_elems)


def cmd_table(cfg: RunConfig) -> dict:
    ctx = _context(cfg)
    T = character_table(ctx, cfg.cache_dir)
    directory = _cache_dir(cfg.cache_dir)
    summary = dict(T.summary(), checksum=T.checksum())
    return {"command": "table", "context": ctx.describe(), "summary": summary,
            "cache_file": None if directory is None else str(directory / _cache_name(ctx))}


def _partners(cfg, ctx, psi, choice):
    mm = cfg.mm
    cm = ctx.with_n(mm)
    if mm == 1:
        exps = range(ctx.q - 1) if choice is None else [int(a) for a in choice]
        if any(not 0 <= a < ctx.q - 1 for a in exps):
            raise ValueError(f"characters of GL_1 are indexed by 0..{ctx.q - 2}")
        return [(character_of_gl1(cm, a), None, a) for a in exps]
    avail = _fe_partners(cm, psi, cfg.cache_dir, limit=None)
    out = []
    for pip, sampler in avail:
        tag = "ones" if pip.index is None else str(pip.index)
        if choice is None or tag in choice:
            out.append((pip, sampler, None))
    if choice is not None and len(out) != len(set(choice)):
        raise ValueError(f"unknown partner among {choice}; use generic indices of GL_{mm} or 'ones'")
    return out


def cmd_gamma(cfg: RunConfig, pis=None, partners=None) -> SuiteReport:
    ctx = _context(cfg)
    if not 1 <= cfg.mm < ctx.n:
        raise ValueError(f"need 1 <= mm < n, got mm = {cfg.mm}, n = {ctx.n}")
    T = character_table(ctx, cfg.cache_dir)
    psi = _psi(ctx)
    pis = pis or [i for i in range(T.count) if T.cuspidal[i]]
    for i in pis:
        if not 0 <= i < T.count or not T.cuspidal[i]:
            raise ValueError(f"pi = {i} is not a cuspidal index of GL_{ctx.n}")
    rows = []
    tag = f"GL{ctx.n}(F{ctx.q})xGL{cfg.mm}"
    for i in pis:
        pi = Rep.irreducible(T, i)
        for pip, sampler, a in _partners(cfg, ctx, psi, partners):
            g = rs_gamma(pi, pip, psi, cfg.convention)
            if a is not None:
                other = twisted_gauss_gamma(pi, a, psi, cfg.convention).value
                cross = {"route": "matrix Gauss sum of the twist", "value": other, "agrees": other == g.value}
            else:
                fe = functional_equation_check(pi, pip, psi, trials=3, seed=cfg.seed, convention=cfg.convention,
                                               pip_functions=sampler)
                cross = {"route": "functional equation", "agrees": bool(fe["ok"])}
            bad = _covariance(pi, pip, psi, g.value, cfg.convention)
            reductions = {}
            for ell, seed in cfg.ells:
                rmap = build_reduction_map(T.N, ell, seed or 0)
                try:
                    reductions[f"l{ell}:s{seed or 0}"] = classifier.reduce_gamma(g.value, rmap)
                except NonIntegralScalar:
                    reductions[f"l{ell}:s{seed or 0}"] = "not integral"
            witness = {"value": g.value, "provenance": g.provenance, "cross_check": cross,
                       "psi_covariance": {"failing_a": bad, "weights": f"omega_pi(a)^{cfg.mm} omega_pi'(a)^{ctx.n}"},
                       "reductions": reductions}
            rows.append(Row(f"gamma/{tag}/chi{i:03d}/{pip.label}", "gamma-table",
                            cross["agrees"] and not bad, witness))
    return SuiteReport("gamma-table", sorted(rows, key=lambda r: r.check))


def cmd_verify(cfg: RunConfig, suite: str) -> SuiteReport:
    if suite == "all":
        rows = []
        for name in SUITES:
            rows += run_suite(name, cfg).rows
        return SuiteReport("all", rows)
    return run_suite(suite, cfg)


def _dump(obj) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, indent=1) + "\n"


def emit(report: dict, tsv: str | None, out: str | None) -> None:
    text = _dump(report)
    if out:
        base = Path(out)
        base.parent.mkdir(parents=True, exist_ok=True)
        Path(f"{out}.json").write_text(text)
        if tsv is not None:
            Path(f"{out}.tsv").write_text(tsv)
    sys.stdout.write(tsv if tsv is not None else text)


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.command == "verify" and args.suite not in SUITES + ("all",):
        ap.error(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES + ('all',))}")
    try:
        cfg = config_from_args(args)
        if args.command == "table":
            emit(cmd_table(cfg), None, cfg.out)
            return 0
        if args.command == "gamma":
            cfg.mm = args.mm
            rep = cmd_gamma(cfg, args.pi, args.partner)
        else:
            rep = cmd_verify(cfg, args.suite)
    except TooLarge as exc:
        print(f"glgamma: too large: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        ap.error(str(exc))
    emit(rep.as_dict(), rep.tsv(), cfg.out)
    return 0 if rep.ok() else 1


if __name__ == "__main__":
    sys.exit(main())
