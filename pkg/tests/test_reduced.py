from __future__ import annotations

import itertools
import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperslice.core import Hyperplane, PlaneSet, count_sliced, verify_full
from hyperslice.errors import InvalidInput, ResourceGuard
from hyperslice.fixtures import get_fixture
from hyperslice.reduced import (
    Composition,
    ReducedHyperplane,
    ReducedVertex,
    build_grid,
    compositions,
    expected_edge_count,
    expected_vertex_count,
    lift_planes,
    per_plane_sliced,
    reduce_plane,
    reduced_dot,
    sliced_reduced_edges,
    weighted_sliced_count,
)


def project(v, comp: Composition) -> tuple[int, ...]:
    return tuple(sum(v[s]) for s in comp.block_slices())


def projected_edge_histogram(comp: Composition) -> Counter:
    """Oracle: project every Q_n edge to (lower reduced vertex, block) and count."""
    n = comp.n
    block_of = [j for j, b in enumerate(comp.blocks) for _ in range(b)]
    hist: Counter = Counter()
    for v in itertools.product((-1, 1), repeat=n):
        for i in range(n):
            if v[i] == -1:
                hist[(project(v, comp), block_of[i])] += 1
    return hist


def test_figure_grid_counts():
    g = build_grid(Composition((3, 2, 1)))
    assert (g.n_vertices, g.n_edges) == (24, 46)


def test_q10_grid_edges(grid_q10):
    assert grid_q10.n_edges == 320
    assert int(grid_q10.multiplicity.sum()) == 5120


@pytest.mark.parametrize("n", [1, 3, 6])
def test_identity_composition(n):
    g = build_grid(Composition.identity(n))
    assert g.n_vertices == 1 << n
    assert g.n_edges == n * (1 << (n - 1))
    assert np.all(g.multiplicity == 1)


@pytest.mark.parametrize("n", range(1, 13))
def test_counting_identities(n):
    comps = list(compositions(n))
    assert len(comps) == 1 << (n - 1)
    for comp in comps:
        g = build_grid(comp)
        assert g.n_vertices == expected_vertex_count(comp) == math.prod(b + 1 for b in comp.blocks)
        assert g.n_edges == expected_edge_count(comp)
        assert int(g.multiplicity.sum()) == n * (1 << (n - 1))
        assert int(g.preimages.sum()) == 1 << n


@pytest.mark.parametrize("blocks", [(3, 2, 1), (2, 2, 2), (1, 4), (5,), (1, 2, 1, 2)])
def test_grid_matches_projection_oracle(blocks):
    comp = Composition(blocks)
    g = build_grid(comp)
    hist = projected_edge_histogram(comp)
    got = {(e.lower.coords, e.dim): e.multiplicity for e in g.edges()}
    assert got == dict(hist)
    for e in g.edges():
        up = e.upper.coords
        assert up[e.dim] - e.lower.coords[e.dim] == 2
        b = comp.blocks
        nh = e.lower.negatives(comp)
        assert e.multiplicity == nh[e.dim] * math.prod(math.comb(bj, u) for bj, u in zip(b, nh))


def test_edge_order_is_lexicographic():
    g = build_grid(Composition((2, 3, 1)))
    keys = [(int(lo), int(d)) for lo, d in zip(g.edge_lower, g.edge_dim)]
    assert keys == sorted(keys)
    for r in range(g.n_vertices):
        assert g.vertex_rank(g.vertex(r).coords) == r


def test_reduce_plane_eq1_row():
    plane = get_fixture("eq1_q10_8planes").planes().planes[0]
    r = reduce_plane(plane, Composition((6, 1, 1, 1, 1)))
    assert r.coeffs == (-2, 1, 3, -8, -1)
    assert r.bias == Fraction(1, 2)


def test_reduce_plane_single_block_and_identity():
    assert reduce_plane(Hyperplane((4, 4, 4), 0), Composition((3,))).coeffs == (4,)
    p = Hyperplane((3, -1, 2), Fraction(1, 2))
    assert reduce_plane(p, Composition.identity(3)).coeffs == p.coefficients


def test_reduce_plane_names_offending_block():
    with pytest.raises(InvalidInput, match="block 1"):
        reduce_plane(Hyperplane((1, 1, 2, 3, 5), 0), Composition((2, 2, 1)))


def test_reduced_dot_example():
    r = ReducedHyperplane((-2, 1, 3, -8, -1))
    assert reduced_dot(r, ReducedVertex((6, 1, 1, 1, 1))) == -17
    full = r.lift(Composition((6, 1, 1, 1, 1)))
    assert sum(full.coefficients) == -17
    assert reduced_dot(ReducedHyperplane((0, 0)), (3, -1)) == 0
    with pytest.raises(InvalidInput):
        reduced_dot(r, (1, 1))


def test_identity_reduction_reproduces_dot_products():
    rng = np.random.default_rng(11)
    for _ in range(100):
        n = int(rng.integers(1, 12))
        a = rng.integers(-40, 41, n)
        v = rng.choice([-1, 1], n)
        comp = Composition.identity(n)
        r = reduce_plane(Hyperplane(tuple(a)), comp)
        assert reduced_dot(r, project(tuple(v), comp)) == int(a @ v)


def test_eq1_slices_whole_grid(grid_q10):
    planes = get_fixture("eq1_q10_8planes").planes()
    assert len(sliced_reduced_edges(planes, grid_q10)) == 320
    assert weighted_sliced_count(planes, grid_q10) == 5120


def test_empty_planeset(grid_q10):
    empty = PlaneSet((), 10, Composition((6, 1, 1, 1, 1)))
    assert sliced_reduced_edges(empty, grid_q10) == frozenset()
    assert weighted_sliced_count(empty, grid_q10) == 0


def test_random_pair_on_figure_grid():
    comp = Composition((3, 2, 1))
    g = build_grid(comp)
    rng = np.random.default_rng(5)
    for _ in range(20):
        planes = lift_planes(rng.integers(-6, 7, (2, 3)), comp)
        assert weighted_sliced_count(planes, g) == count_sliced(planes)
        per = per_plane_sliced(planes, g)
        assert frozenset().union(*per) == sliced_reduced_edges(planes, g)


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 8).flatmap(lambda n: st.tuples(
    st.integers(0, (1 << (n - 1)) - 1).map(lambda i: list(compositions(n))[i]),
    st.integers(0, 5),
    st.integers(0, 2**32 - 1),
)))
def test_reduction_equivalence(case):
    comp, k, seed = case
    rng = np.random.default_rng(seed)
    planes = lift_planes(rng.integers(-9, 10, (k, comp.length)), comp)
    g = build_grid(comp)
    count = weighted_sliced_count(planes, g)
    assert count == count_sliced(planes)
    assert (len(sliced_reduced_edges(planes, g)) == g.n_edges) == verify_full(planes).ok


def test_composition_validation():
    assert Composition.parse("6,1,1,1,1").blocks == (6, 1, 1, 1, 1)
    assert str(Composition((3, 2, 1))) == "3,2,1"
    for bad in ("", "3,0", "a,b", "2,-1"):
        with pytest.raises(InvalidInput):
            Composition.parse(bad)


def test_grid_guards():
    with pytest.raises(ResourceGuard):
        build_grid(Composition.identity(30))
    with pytest.raises(ResourceGuard):
        build_grid(Composition((60,)))


def test_preimages_are_binomial_products():
    comp = Composition((4, 3))
    g = build_grid(comp)
    for r in range(g.n_vertices):
        v = g.vertex(r)
        expect = math.prod(math.comb(b, u) for b, u in zip(comp.blocks, v.negatives(comp)))
        assert int(g.preimages[r]) == expect
