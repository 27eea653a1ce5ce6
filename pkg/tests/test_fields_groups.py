import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from glgamma.fields import additive_character, build_field
from glgamma.groups import GroupContext, TooLarge, gl_order


@pytest.mark.parametrize("p,m", [(2, 1), (3, 1), (2, 2), (3, 2), (2, 3), (5, 1)])
def test_field_axioms(p, m):
    k = build_field(p, m)
    q = k.q
    a = np.arange(q)
    A, B = np.meshgrid(a, a)
    assert np.array_equal(k.mul_t, k.mul_t.T)
    assert np.array_equal(k.add_t, k.add_t.T)
    assert np.all(k.add(a, k.neg(a)) == 0)
    assert np.all(k.mul(a[1:], k.inv(a[1:])) == 1)
    # distributivity on all triples through a sample
    rng = np.random.default_rng(0)
    x, y, z = rng.integers(0, q, (3, 200))
    assert np.all(k.mul(x, k.add(y, z)) == k.add(k.mul(x, y), k.mul(x, z)))
    # the multiplicative group is cyclic of order q - 1
    assert sorted(k.exp_t.tolist()) == list(range(1, q))


@pytest.mark.parametrize("p,m", [(2, 2), (3, 2), (2, 4)])
def test_subfield_trace_and_norm(p, m):
    k = build_field(p, m, m // 2)
    q0 = p ** (m // 2)
    sub = k.subfield_elements()
    assert len(sub) == q0
    a = np.arange(k.q)
    assert set(k.rel_trace(a).tolist()) == set(sub.tolist())
    assert set(k.rel_norm(a[1:]).tolist()) == set(sub[sub != 0].tolist())
    assert np.all(k.sigma(k.sigma(a)) == a)


def test_additive_character():
    k = build_field(3, 2, 1)
    psi = additive_character(k)
    vals = [int(psi.exponent(x)) for x in range(k.q)]
    assert len(set(vals)) > 1
    psi0 = additive_character(k, trivial_on_k0=True)
    assert all(int(psi0.exponent(x)) == 0 for x in k.subfield_elements())
    assert any(int(psi0.exponent(x)) != 0 for x in range(k.q))
    # psi(x + y) = psi(x) psi(y)
    for x in range(k.q):
        for y in range(k.q):
            assert (psi.exponent(k.add(x, y)) - psi.exponent(x) - psi.exponent(y)) % 3 == 0


@pytest.mark.parametrize("p,m,n", [(2, 1, 2), (3, 1, 2), (2, 2, 2), (2, 1, 3)])
def test_enumeration(p, m, n):
    ctx = GroupContext(p, m, n)
    E = ctx.elements
    assert len(E) == gl_order(n, p**m) == ctx.order
    assert len(np.unique(ctx.codes)) == len(E)
    assert np.all(ctx.det(E) != 0)
    assert np.array_equal(ctx.inv_index[ctx.inv_index], np.arange(len(E)))


@given(st.integers(0, 10**6))
@settings(max_examples=25, deadline=None)
def test_det_multiplicative_and_inverse(seed):
    ctx = GroupContext(3, 1, 3)
    rng = np.random.default_rng(seed)
    g, h = ctx.random_elements(rng, 2)
    k = ctx.k
    assert ctx.det(ctx.mat_mul(g, h)) == k.mul(ctx.det(g), ctx.det(h))
    assert np.array_equal(ctx.mat_mul(g, ctx.inv(g)), ctx.identity())


@pytest.mark.parametrize("case,p,m", [("galois", 2, 2), ("levi", 3, 1), ("levi", 5, 1)])
def test_involution_and_fixed_points(case, p, m):
    ctx = GroupContext(p, m, 2, case)
    E = ctx.elements
    S = ctx.sigma(E)
    assert np.array_equal(ctx.sigma(S), E)
    # sigma is a group automorphism
    rng = np.random.default_rng(1)
    g, h = ctx.random_elements(rng, 2)
    assert np.array_equal(ctx.sigma(ctx.mat_mul(g, h)), ctx.mat_mul(ctx.sigma(g), ctx.sigma(h)))
    H = ctx.subgroup_indices("H")
    q0 = p ** (m // 2) if case == "galois" else ctx.q
    expected = gl_order(2, q0) if case == "galois" else (ctx.q - 1) ** 2
    assert len(H) == expected


def test_budget_is_enforced():
    ctx = GroupContext(7, 1, 3, budget=1000)
    with pytest.raises(TooLarge, match="1000"):
        ctx.elements


def test_invalid_contexts():
    with pytest.raises(ValueError):
        GroupContext(3, 1, 2, "galois")
    with pytest.raises(ValueError):
        GroupContext(2, 1, 2, "levi")
