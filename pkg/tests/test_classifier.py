import pytest
import sympy
from hypothesis import given, settings, strategies as st

from glgamma import classifier as C
from glgamma.chartable import character_table
from glgamma.fields import additive_character
from glgamma.groups import GroupContext
from glgamma.whittaker import character_of_gl1, gj_gamma


def test_orders():
    assert C.multiplicative_order(3, 2) == 1
    assert C.order_params(9, 2, "galois") == (1, 1)
    assert C.order_params(4, 3, "galois") == (1, 2)
    assert C.order_params(3, 5, "levi") == (4, 4)
    assert C.v2(12) == 2
    with pytest.raises(ValueError):
        C.order_params(9, 3, "levi")


def test_params_validation():
    P = C.cuspidal_params(3, 2, 1, 1, "levi")
    assert (P.n, P.r, P.e) == (2, 2, 1)
    with pytest.raises(ValueError):
        C.CuspidalParams(3, 2, 3, 1, 3, 0, "levi").validate()


def test_predictions():
    # l = 2: every sigma-self-dual cuspidal is distinguished
    P = C.cuspidal_params(3, 2, 1, 1, "levi")
    assert C.predict(P, True).distinguished
    assert not C.predict(P, False).distinguished
    # l odd, Galois: needs n odd and e0 even
    P = C.cuspidal_params(4, 3, 1, 1, "galois")
    assert P.n == 3 and P.e0 == 2
    assert C.predict(P, True).predicted == "distinguished-with-lift"
    P = C.cuspidal_params(9, 5, 1, 0, "galois")
    assert P.n == 2
    assert C.predict(P, True).predicted == "not-distinguished"


qs = st.sampled_from(C.prime_powers(49))
ells = st.sampled_from(list(sympy.primerange(2, 14)))


@given(qs, ells, st.integers(1, 4), st.integers(0, 2), st.sampled_from(["galois", "levi"]), st.booleans())
@settings(max_examples=200, deadline=None)
def test_predictor_properties(q, ell, k, u, case, selfdual):
    p = sympy.factorint(q)
    (p, m), = p.items()
    if ell == p or (case == "galois" and m % 2) or (case == "levi" and p == 2):
        return
    e, _ = C.order_params(q, ell, case)
    r = ell**u * e // sympy.gcd(e, k)
    if r < 2 or (case == "levi" and (k * r) % 2):
        return
    P = C.cuspidal_params(q, ell, k, u, case)
    pred = C.predict(P, selfdual)
    # distinction forces sigma-self-duality; a lift forces distinction
    assert not pred.distinguished or selfdual
    if pred.predicted == "distinguished-with-lift":
        assert C.lift_clause(P, selfdual)
    if ell == 2:
        assert pred.distinguished == selfdual
    assert all(C.grid_checks(P).values())


def test_grid_is_nonempty():
    assert sum(1 for _ in C.parameter_grid(16, 7)) > 50


def test_principal_series_character_decomposes():
    ctx = GroupContext(3, 1, 2)
    T = character_table(ctx)
    chi = C.principal_series_character(ctx, [0, 1], T.N)
    f = chi(T.classes.rep_mats)
    dec = T.decompose(f)
    assert sum(dec.values()) == 1
    assert int(T.degrees[next(iter(dec))]) == 4


@pytest.mark.parametrize("p,m", [(3, 1), (5, 1)])
def test_principal_series_gamma_is_multiplicative(p, m):
    ctx = GroupContext(p, m, 2)
    c1 = ctx.with_n(1)
    q = ctx.q
    psi = additive_character(ctx.k)
    for a, b, c in [(0, 1, 0), (0, 1, 1), (1, 2, 3), (1, 1, 2)]:
        if max(a, b, c) >= q - 1:
            continue
        g = C.gamma_against_character(ctx, [a, b], c, psi)
        ga = gj_gamma(character_of_gl1(c1, (a + c) % (q - 1)), psi).value
        gb = gj_gamma(character_of_gl1(c1, (b + c) % (q - 1)), psi).value
        assert g == ga * gb


def test_reduced_sigma_selfdual():
    # q = 9, Galois: sigma acts by x -> x^3 on characters, so a is self-dual iff 4a = 0 mod w
    assert C.reduced_sigma_selfdual(9, 5, 0, "galois")
    assert C.reduced_sigma_selfdual(9, 5, 2, "galois")
    assert not C.reduced_sigma_selfdual(9, 5, 1, "galois")


def test_congruence_small_case():
    reports = C.congruence_check(3, 2, 2, 1, 2, "levi")
    assert len(reports) == 2
    assert all(r.ok() for r in reports)
