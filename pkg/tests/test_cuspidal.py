import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from glgamma.chartable import character_table
from glgamma.cuspidal import (CuspidalCharacter, ExtensionField, batched_rank, char_poly, det_batched, gauss_gamma,
                              hom_h_dim, matching_row, regular_exponents, sparse_lambda_c, sparse_rs_gamma)
from glgamma.fields import additive_character
from glgamma.groups import GroupContext
from glgamma.whittaker import Rep, character_of_gl1, gj_gamma, lambda_and_c, rs_gamma


@given(st.integers(0, 2**31))
@settings(max_examples=20, deadline=None)
def test_det_and_char_poly(seed):
    ctx = GroupContext(3, 1, 3)
    k = ctx.k
    rng = np.random.default_rng(seed)
    A = rng.integers(0, 3, (5, 3, 3))
    assert np.array_equal(det_batched(k, A), [int(ctx.det(a)) for a in A])
    cp = char_poly(k, A)
    # constant term is (-1)^n det, top coefficient 1
    assert np.all(cp[:, -1] == 1)
    assert np.array_equal(cp[:, 0], k.neg(det_batched(k, A)))


def test_extension_field_embedding():
    k = GroupContext(2, 2, 1).k
    E = ExtensionField(k, 2)
    emb = E.emb
    K = E.K
    for a in range(k.q):
        for b in range(k.q):
            assert emb[k.mul(a, b)] == K.mul_t[emb[a], emb[b]]
            assert emb[k.add(a, b)] == K.add_t[emb[a], emb[b]]
    # F_q is the fixed field of x -> x^q
    assert all(E.frob_q[emb[a]] == emb[a] for a in range(k.q))
    assert batched_rank(K, np.eye(3, dtype=np.int64)[None])[0] == 3


def test_regular_exponents_count():
    # number of Frobenius orbits of regular characters of F_(q^n)^x
    assert len(regular_exponents(3, 2)) == 3
    assert len(regular_exponents(2, 3)) == 2
    assert len(regular_exponents(2, 4)) == 3


@pytest.mark.parametrize("p,m,n", [(3, 1, 2), (2, 2, 2), (5, 1, 2), (2, 1, 3), (3, 1, 3)])
def test_pointwise_characters_are_the_cuspidal_rows(p, m, n):
    ctx = GroupContext(p, m, n)
    T = character_table(ctx)
    rows = [matching_row(CuspidalCharacter(ctx, b), T) for b in regular_exponents(ctx.q, n)]
    assert None not in rows
    assert sorted(rows) == [i for i in range(T.count) if T.cuspidal[i]]


@pytest.mark.parametrize("p,m,n", [(3, 1, 2), (2, 1, 3)])
def test_pointwise_gammas_match_table_route(p, m, n):
    ctx = GroupContext(p, m, n)
    T = character_table(ctx)
    psi = additive_character(ctx.k)
    c1 = ctx.with_n(1)
    for b in regular_exponents(ctx.q, n):
        chi = CuspidalCharacter(ctx, b)
        pi = Rep.irreducible(T, matching_row(chi, T))
        for a in range(ctx.q - 1):
            pip = character_of_gl1(c1, a)
            assert sparse_rs_gamma(chi, pip, psi).value == rs_gamma(pi, pip, psi).value
        assert gauss_gamma(chi, psi).value == gj_gamma(pi, psi).value


@pytest.mark.parametrize("p,m,n,case", [(2, 2, 2, "galois"), (3, 1, 2, "levi"), (5, 1, 2, "levi")])
def test_pointwise_distinction(p, m, n, case):
    ctx = GroupContext(p, m, n, case)
    T = character_table(ctx)
    psi = additive_character(ctx.k, trivial_on_k0=case == "galois")
    for b in regular_exponents(ctx.q, n):
        chi = CuspidalCharacter(ctx, b)
        i = matching_row(chi, T)
        assert hom_h_dim(chi) == T.hom_H_dim(i)
        if T.hom_H_dim(i) == 1:
            assert sparse_lambda_c(chi, psi)["c"] == lambda_and_c(Rep.irreducible(T, i), psi)["c"]
