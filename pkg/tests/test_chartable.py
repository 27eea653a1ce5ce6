from collections import Counter

import pytest

from glgamma.chartable import character_table, generic_constituent
from glgamma.groups import GroupContext
from glgamma.scalars import CycloArray, cyclo_field


def gl2(p, m=1, case=None):
    return GroupContext(p, m, 2, case)


@pytest.mark.parametrize("p,m", [(2, 1), (3, 1), (2, 2), (5, 1), (7, 1)])
def test_gl2_degree_pattern(p, m):
    """Classical GL_2(F_q): q - 1 characters of each degree 1 and q,
    (q-1)(q-2)/2 principal series of degree q + 1 and (q^2-q)/2 cuspidals of degree q - 1."""
    T = character_table(gl2(p, m))
    q = p**m
    assert T.count == q * q - 1
    want = Counter({1: q - 1, q: q - 1, q + 1: (q - 1) * (q - 2) // 2})
    want[q - 1] += (q * q - q) // 2
    assert Counter(int(d) for d in T.degrees) == want
    assert int(T.cuspidal.sum()) == (q * q - q) // 2
    assert all(int(T.degrees[i]) == q - 1 for i in range(T.count) if T.cuspidal[i])
    # generic = every irreducible except the q - 1 characters
    assert int(T.generic.sum()) == T.count - (q - 1)


def _eigen(k, g):
    """Eigenvalues of a 2 x 2 matrix over k lying in k."""
    tr = k.add(g[0, 0], g[1, 1])
    det = k.sub(k.mul(g[0, 0], g[1, 1]), k.mul(g[0, 1], g[1, 0]))
    return [x for x in range(1, k.q) if k.add(k.sub(k.mul(x, x), k.mul(tr, x)), det) == 0]


@pytest.mark.parametrize("p,m", [(3, 1), (5, 1), (2, 2)])
def test_gl2_principal_series_oracle(p, m):
    ctx = gl2(p, m)
    T = character_table(ctx)
    k = ctx.k
    q = k.q
    F = cyclo_field(T.N)

    def chi(a, x):
        return F.root_of_unity(q - 1, (a * int(k.log_t[x])) % (q - 1))

    found = set()
    for a in range(q - 1):
        for b in range(a + 1, q - 1):
            vals = []
            for g in T.classes.rep_mats:
                ev = _eigen(k, g)
                if len(ev) == 2:
                    x, y = ev
                    vals.append(chi(a, x) * chi(b, y) + chi(a, y) * chi(b, x))
                elif len(ev) == 1:
                    z = ev[0]
                    scalar = g[0, 1] == 0 and g[1, 0] == 0
                    vals.append(chi(a, z) * chi(b, z) * (q + 1 if scalar else 1))
                else:
                    vals.append(F.zero())
            found.add(T.index_of(CycloArray.from_numbers(vals, N=T.N)))
    assert len(found) == (q - 1) * (q - 2) // 2
    assert all(int(T.degrees[i]) == q + 1 for i in found)


@pytest.mark.parametrize("p,m,n", [(3, 1, 2), (2, 1, 3), (2, 2, 2)])
def test_orthogonality(p, m, n):
    T = character_table(GroupContext(p, m, n))
    g = T.gram()
    assert all(g[i, j] == (i == j) for i in range(T.count) for j in range(T.count))
    assert T.column_orthogonality()


def test_gl3_f2_counts():
    T = character_table(GroupContext(2, 1, 3))
    assert T.count == 6
    assert sorted(int(d) for d in T.degrees) == [1, 3, 3, 6, 7, 8]
    assert int(T.cuspidal.sum()) == 2


def test_distinction_counts():
    T = character_table(GroupContext(3, 2, 1, "galois"))
    s = T.summary()
    assert s["irreducibles"] == 8
    assert s["distinguished"] == 4
    assert s["sigma_selfdual"] == 4
    T = character_table(gl2(3, 1, "levi"))
    assert T.summary()["cuspidal"] == 3


def test_cache_round_trip(tmp_path):
    ctx = GroupContext(3, 1, 2)
    T = character_table(ctx, tmp_path)
    files = list(tmp_path.iterdir())
    assert len(files) == 1
    from glgamma.chartable import _TABLES, load_table

    again = load_table(ctx, T.classes, files[0])
    assert again.checksum() == T.checksum()
    _TABLES.clear()
    assert character_table(GroupContext(3, 1, 2), tmp_path).checksum() == T.checksum()


def test_generic_constituent_of_trivial_product():
    ctx = GroupContext(3, 1, 2)
    T = character_table(ctx)
    T1 = character_table(ctx.with_n(1))
    i = generic_constituent(ctx, (1, 1), [T1, T1], [0, 0])
    # the Steinberg character: degree q
    assert int(T.degrees[i]) == 3
    assert T.generic[i]
