import itertools
from fractions import Fraction
from math import ceil, comb

import pytest

from cubicloc.counting import (
    CountingBudgetError,
    SparsityQuery,
    count_sparse_exact,
    sweep_row,
    typicality_bound,
)


def brute_force(q: SparsityQuery) -> int:
    dist = q.lattice.distance_matrix()
    return sum(
        all(dist[a, b] >= q.d for a, b in itertools.combinations(c, 2))
        for c in itertools.combinations(range(q.V), q.m)
    )


def test_reference_value():
    q = SparsityQuery(4, 2, 2)
    assert q.v == 27
    c = count_sparse_exact(q)
    assert (c.sparse_count, c.total_count) == (1184, 2016)
    assert c.fraction == Fraction(1184, 2016)
    b = typicality_bound(q)
    assert b.simple == Fraction(10, 64) ** 2
    assert c.fraction >= b.product >= b.simple


@pytest.mark.parametrize("L,m,d", [(3, 2, 2), (3, 3, 1), (4, 3, 2), (2, 2, 1), (5, 2, 3), (4, 4, 2)])
def test_matches_brute_force(L, m, d):
    q = SparsityQuery(L, m, d)
    assert count_sparse_exact(q).sparse_count == brute_force(q)


def test_trivial_cases():
    assert count_sparse_exact(SparsityQuery(4, 0, 2)).fraction == 1
    assert count_sparse_exact(SparsityQuery(4, 2, 1)).fraction == 1
    q = SparsityQuery(5, 1, 2)
    assert count_sparse_exact(q).fraction == 1
    assert typicality_bound(q).simple == 1 - Fraction(q.v, q.V)


def test_domain_guards():
    with pytest.raises(ValueError):
        SparsityQuery(4, 2, 0)
    with pytest.raises(CountingBudgetError):
        count_sparse_exact(SparsityQuery(17, 2, 2))


def test_bound_clipped_when_meaningless():
    b = typicality_bound(SparsityQuery(3, 3, 2))
    assert b.simple == 0 and b.product == 0


def test_sweep_row_columns():
    row = sweep_row(SparsityQuery(4, 2, 2))
    assert row["sparse_count"] == 1184 and abs(row["bound_simple"] - 0.0244140625) < 1e-15


def test_fraction_grows_with_L_at_fixed_d():
    fractions = [count_sparse_exact(SparsityQuery(L, 2, 2)).fraction for L in range(4, 9)]
    assert all(a < b for a, b in zip(fractions, fractions[1:]))


@pytest.mark.xfail(strict=True, reason="d = ceil(sqrt(L)) jumps from 2 to 3 at L=5, where no pair on the "
                   "5^3 torus is 3 apart: fractions 0, 0.587, 0, 0.423 for L=3..6")
def test_scaling_with_growing_d():
    fractions = [count_sparse_exact(SparsityQuery(L, 2, ceil(L**0.5))).fraction for L in (3, 4, 5, 6)]
    assert all(a <= b for a, b in zip(fractions, fractions[1:]))


def test_total_is_binomial():
    q = SparsityQuery(3, 3, 1)
    assert count_sparse_exact(q).total_count == comb(27, 3)
