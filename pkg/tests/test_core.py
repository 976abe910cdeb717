from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperslice.core import (
    ConstructionFormatError,
    Edge,
    Hyperplane,
    PlaneSet,
    count_sliced,
    format_planes,
    parse_planes,
    read_planes,
    slices,
    vertex_from_index,
    vertex_index,
    verify_full,
    write_planes,
)
from hyperslice.errors import InvalidInput, ResourceGuard
from hyperslice.fixtures import FIXTURES, get_fixture


def naive_count(planes: PlaneSet) -> int:
    """Edge-by-edge oracle using Python integers and Fractions."""
    n = planes.dimension
    total = 0
    for v in itertools.product((-1, 1), repeat=n):
        for i in range(n):
            if v[i] != -1:
                continue
            e = Edge(v, i)
            if any(slices(p, e) for p in planes):
                total += 1
    return total


plane_strategy = st.integers(1, 6).flatmap(
    lambda n: st.lists(
        st.tuples(st.lists(st.integers(-5, 5), min_size=n, max_size=n), st.sampled_from([0, 1, -1, Fraction(1, 2)])),
        min_size=0, max_size=4,
    ).map(lambda rows: (n, rows))
)


def make_planes(n, rows) -> PlaneSet:
    return PlaneSet(tuple(Hyperplane(tuple(c), b) for c, b in rows), n)


def test_axis_plane_slices_its_own_edges():
    plane = Hyperplane((1, 0, 0), 0)
    assert slices(plane, Edge((-1, 1, 1), 0))
    assert not slices(plane, Edge((-1, 1, 1), 1))


def test_dimension_mismatch():
    with pytest.raises(InvalidInput):
        slices(Hyperplane((1, 0), 0), Edge((-1, 1, 1), 0))


@pytest.mark.parametrize("n", [1, 2, 5, 9])
def test_single_axis_plane_count(n):
    coeffs = (1,) + (0,) * (n - 1)
    assert count_sliced(PlaneSet((Hyperplane(coeffs, 0),), n)) == 1 << (n - 1)


def test_eq1_verifies():
    res = verify_full(get_fixture("eq1_q10_8planes").planes())
    assert res.ok and res.sliced == 5120 and res.unsliced_count == 0


def test_paterson_count():
    assert count_sliced(get_fixture("paterson_q6_5planes").planes()) == 192


def test_q15_construction_unsliced_edges():
    planes = get_fixture("appC_q15_12planes").planes()
    res = verify_full(planes)
    assert not res.ok
    assert res.sliced == 245628
    edges = res.unsliced_edges()
    assert len(edges) == 132
    # every reported edge is genuinely unsliced
    assert not any(slices(p, e) for e in edges[:20] for p in planes)
    # report order: flip dimension outer, base index inner
    keys = [(e.flip_index, vertex_index(e.base)) for e in edges]
    assert keys == sorted(keys)


def test_empty_q1():
    res = verify_full(PlaneSet((), 1))
    assert not res.ok
    assert res.unsliced_count == 1
    assert res.unsliced_edges()[0].canonical == (0, 0)


def test_brute_force_guard():
    with pytest.raises(ResourceGuard):
        count_sliced(PlaneSet((Hyperplane((1,) * 21, Fraction(1, 2)),), 21))


@pytest.mark.parametrize("name", list(FIXTURES))
def test_fixture_counts(name):
    fx = FIXTURES[name]
    assert count_sliced(fx.planes()) == fx.expected_sliced
    assert format_planes(fx.planes()) == fx.text


def test_fixtures_never_touch_a_vertex():
    for name in ("eq1_q10_8planes", "appB_q10_orig", "appB_q10_alt"):
        for plane in FIXTURES[name].planes():
            p, q = plane.scaled_bias()
            # half-integer bias against integer dot products: q*dot - p is always odd
            assert q == 2 and p % 2 == 1


@settings(max_examples=60, deadline=None)
@given(plane_strategy)
def test_count_matches_edge_by_edge_oracle(case):
    n, rows = case
    planes = make_planes(n, rows)
    count = count_sliced(planes)
    assert count == naive_count(planes)
    assert count <= n * (1 << (n - 1))
    assert (count == n * (1 << (n - 1))) == verify_full(planes).ok


@settings(max_examples=60, deadline=None)
@given(plane_strategy, st.lists(st.integers(-5, 5), min_size=6, max_size=6))
def test_adding_a_plane_never_decreases_count(case, extra):
    n, rows = case
    planes = make_planes(n, rows)
    bigger = make_planes(n, rows + [(extra[:n], Fraction(1, 2))])
    assert count_sliced(bigger) >= count_sliced(planes)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 7).flatmap(lambda n: st.tuples(
    st.lists(st.integers(-9, 9), min_size=n, max_size=n),
    st.lists(st.sampled_from([-1, 1]), min_size=n, max_size=n),
    st.integers(0, n - 1),
    st.sampled_from([0, 2, -3, Fraction(1, 2), Fraction(-5, 2)]),
)))
def test_slicing_symmetric_in_endpoints(case):
    coeffs, v, i, b = case
    plane = Hyperplane(tuple(coeffs), b)
    e = Edge(tuple(v), i)
    u, w = e.endpoints
    d1 = plane.affine_sign(u)
    d2 = plane.affine_sign(w)
    assert slices(plane, e) == (d1 * d2 < 0) == (d2 * d1 < 0)
    # the base is normalised to the -1 endpoint whichever end is supplied
    assert Edge(w, i) == e


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 12).flatmap(lambda n: st.integers(0, (1 << n) - 1).map(lambda i: (n, i))))
def test_vertex_index_roundtrip(case):
    n, idx = case
    v = vertex_from_index(idx, n)
    assert all(x in (-1, 1) for x in v)
    assert vertex_index(v) == idx


def test_file_roundtrip(tmp_path):
    planes = get_fixture("paterson_q6_5planes").planes()
    path = tmp_path / "p.txt"
    write_planes(path, planes, header=["paterson"])
    text = path.read_text()
    assert text.startswith("# paterson\n")
    again = read_planes(path)
    assert [p.coefficients for p in again] == [p.coefficients for p in planes]
    assert [p.bias for p in again] == [p.bias for p in planes]


def test_parse_skips_comments_and_blank_lines():
    planes = parse_planes("# header\n\n1 0 0.5\n   \n0 1 -1.25\n")
    assert planes.dimension == 2 and planes.k == 2
    assert planes.planes[1].bias == Fraction(-5, 4)


@pytest.mark.parametrize("text,line", [
    ("1 2 0.5\n1 2\n", 2),
    ("# c\n1 x 0.5\n", 2),
    ("1 2 half\n", 1),
])
def test_parse_errors_report_line(text, line):
    with pytest.raises(ConstructionFormatError) as exc:
        parse_planes(text)
    assert exc.value.lineno == line


def test_parse_dimension_override():
    with pytest.raises(ConstructionFormatError):
        parse_planes("1 2 0.5\n", n=3)


def test_float_bias_accepted_exactly():
    assert Hyperplane((1,), 0.5).bias == Fraction(1, 2)


def test_counts_agree_with_numpy_signs():
    rng = np.random.default_rng(3)
    for _ in range(5):
        n = 7
        rows = [(tuple(rng.integers(-4, 5, n)), Fraction(1, 2)) for _ in range(3)]
        planes = make_planes(n, rows)
        assert count_sliced(planes) == naive_count(planes)
