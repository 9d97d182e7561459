"""How many m-defect placements on the 3D torus are sparse (pairwise separation >= d)."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from .gf2 import Lattice

CSV_COLUMNS = ["L", "m", "d", "v", "sparse_count", "total", "fraction", "bound_simple", "bound_product"]


class CountingBudgetError(ValueError):
    pass


@dataclass(frozen=True)
class SparsityQuery:
    L: int
    m: int
    d: int
    dims: int = 3

    def __post_init__(self):
        if self.L < 1 or self.m < 0 or self.d < 1:
            raise ValueError(f"invalid query L={self.L}, m={self.m}, d={self.d} (d >= 1 required)")
        if self.m > self.V:
            raise ValueError(f"cannot place {self.m} defects on {self.V} sites")

    @property
    def lattice(self) -> Lattice:
        return Lattice((self.L,) * self.dims + (1,) * (3 - self.dims))

    @property
    def V(self) -> int:
        return self.L**self.dims

    @property
    def v(self) -> int:
        """Sites at L-infinity torus distance < d from a given site, itself included."""
        per_axis = min(2 * self.d - 1, self.L)
        return per_axis**self.dims


@dataclass(frozen=True)
class SparseCount:
    sparse_count: int
    total_count: int

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.sparse_count, self.total_count)


def _far_graph(q: SparsityQuery) -> np.ndarray:
    return (q.lattice.distance_matrix() >= q.d).astype(np.int64)


def _count_cliques(adj: np.ndarray, m: int, budget: int) -> int:
    n = adj.shape[0]
    if m == 0:
        return 1
    if m == 1:
        return n
    if m == 2:
        return int(np.triu(adj, 1).sum())
    if m == 3:
        return int(np.trace(adj @ adj @ adj)) // 6
    # general m: extend ordered cliques one vertex at a time
    neighbours = [np.flatnonzero(np.triu(adj, 1)[i]) for i in range(n)]
    count = 0
    steps = 0

    def grow(cands, depth):
        nonlocal count, steps
        if depth == m:
            count += 1
            return
        for v in cands:
            steps += 1
            if steps > budget:
                raise CountingBudgetError("enumeration budget exceeded; use bound-only mode")
            grow(np.intersect1d(cands, neighbours[v], assume_unique=True), depth + 1)

    grow(np.arange(n), 0)
    return count


def count_sparse_exact(q: SparsityQuery, budget: int = 5_000_000) -> SparseCount:
    """Exact number of m-subsets of sites with all pairwise distances >= d."""
    if q.V > 4096:
        raise CountingBudgetError(f"V={q.V} too large for exact counting; use bound-only mode")
    total = comb(q.V, q.m)
    if q.m <= 1:
        return SparseCount(total, total)
    return SparseCount(_count_cliques(_far_graph(q), q.m, budget), total)


@dataclass(frozen=True)
class TypicalityBound:
    """Exact rational lower bounds on the sparse fraction."""

    simple: Fraction
    product: Fraction


def typicality_bound(q: SparsityQuery) -> TypicalityBound:
    """Lower bounds on the sparse fraction: the placement product and (1 - m v / V)**m.

    Either form is reported as 0 once it stops being a meaningful bound.
    """
    V, v, m = q.V, q.v, q.m
    simple = (1 - Fraction(m * v, V)) ** m if m * v <= V else Fraction(0)
    product = Fraction(1)
    for k in range(m):
        if V - k * v <= 0:
            product = Fraction(0)
            break
        product *= Fraction(V - k * v, V - k)
    return TypicalityBound(simple, product)


def sweep_row(q: SparsityQuery) -> dict:
    c = count_sparse_exact(q)
    b = typicality_bound(q)
    return {
        "L": q.L,
        "m": q.m,
        "d": q.d,
        "v": q.v,
        "sparse_count": c.sparse_count,
        "total": c.total_count,
        "fraction": float(c.fraction),
        "bound_simple": float(b.simple),
        "bound_product": float(b.product),
    }
