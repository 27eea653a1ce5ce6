import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from glgamma import mod2
from glgamma.groups import GroupContext
from glgamma.linalg import GF2, PrimeField, nullspace, rank, rref, solve


@given(st.integers(0, 2**31), st.sampled_from([2, 3, 5]))
@settings(max_examples=40, deadline=None)
def test_rank_nullity(seed, p):
    F = GF2() if p == 2 else PrimeField(p)
    rng = np.random.default_rng(seed)
    A = F.asarray(rng.integers(0, p, (4, 6)))
    K = nullspace(F, A)
    assert rank(F, A) + K.shape[0] == 6
    if K.shape[0]:
        assert not np.any(F.matmul(A, K.T))
    R, piv = rref(F, A)[:2]
    assert len(piv) == rank(F, A)


@given(st.integers(0, 2**31))
@settings(max_examples=30, deadline=None)
def test_solve(seed):
    F = PrimeField(5)
    rng = np.random.default_rng(seed)
    A = F.asarray(rng.integers(0, 5, (4, 4)))
    x = F.asarray(rng.integers(0, 5, 4))
    b = F.matmul(A, x[:, None])[:, 0]
    y = solve(F, A, b)
    assert y is not None
    assert np.array_equal(F.matmul(A, y[:, None])[:, 0], b)


def test_character_modules():
    ctx = GroupContext(2, 2, 1, "galois")
    rng = np.random.default_rng(0)
    M = mod2.character_module(ctx, 1, coeff_m=2)
    assert M.homomorphism_check(rng)
    with pytest.raises(mod2.FieldTooSmall):
        mod2.character_module(ctx, 1, coeff_m=1)
    ctx9 = GroupContext(3, 2, 1, "galois")
    with pytest.raises(ValueError):
        mod2.character_module(ctx9, 1)
    red = mod2.character_module(ctx9, 1, reduce=True)
    assert red.homomorphism_check(rng)


def test_galois_tower_first_level():
    rep = mod2.sp_tower(3, 2, "galois", steps=1)
    assert len(rep.levels) == 1
    lv = rep.levels[0]
    assert lv.ok(), {k: v for k, v in lv.checks.items() if not v}
    a, b, c = lv.layers
    assert a == c and a + b + c == lv.ambient_dim
    assert lv.hom["cosocle"] <= 1 and lv.hom["sp1"] >= 1


def test_levi_tower_from_gl1_known_deviation():
    """From GL_1 the block swap is not in H, and Lambda0 is not fixed by T at GL_2.

    Every other level check holds."""
    rep = mod2.sp_tower(3, 1, "levi", steps=1)
    lv = rep.levels[0]
    failing = {k for k, v in lv.checks.items() if not v}
    assert failing == {"lambda0_T"}
    assert lv.hom["sp1"] >= 1


@pytest.mark.parametrize("p,m,case", [(2, 2, "galois"), (3, 1, "levi")])
def test_double_cosets(p, m, case):
    r = mod2.double_coset_check(GroupContext(p, m, 2, case))
    assert r["complete"]
    assert r["orbits"] == r["parameters"]
