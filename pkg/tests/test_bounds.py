from __future__ import annotations

import math

import pytest

from hyperslice.bounds import (
    PUBLISHED_TABLES,
    BoundTable,
    lookup_snk,
    paterson_bound,
    subadditive_chain,
    upper_bound,
)
from hyperslice.core import count_sliced
from hyperslice.errors import InvalidInput, NotFound
from hyperslice.fixtures import get_fixture


def closed_form(n: int) -> int:
    if n <= 5:
        return n
    if n % 10 == 5:
        return 4 * n // 5 + 1
    return math.ceil(4 * n / 5)


def cheapest_decomposition(n: int) -> int:
    """Minimum of 8a + 5b + c over 10a + 6b + c = n, by enumeration."""
    best = n
    for a in range(n // 10 + 1):
        for b in range((n - 10 * a) // 6 + 1):
            best = min(best, 8 * a + 5 * b + (n - 10 * a - 6 * b))
    return best


@pytest.mark.parametrize("n,expected", [(10, 8), (15, 13), (4, 4), (1, 1), (6, 5), (16, 13), (25, 21), (20, 16)])
def test_upper_bound_examples(n, expected):
    assert upper_bound(n) == expected


def test_upper_bound_against_closed_form():
    for n in range(1, 201):
        assert upper_bound(n) == closed_form(n) == cheapest_decomposition(n)
        assert upper_bound(n) <= n
        assert upper_bound(n) <= paterson_bound(n) or n < 6


def test_chain_witnesses():
    for n in range(1, 201):
        chain = subadditive_chain(n)
        assert sum(p for p, _ in chain) == n
        assert sum(b for _, b in chain) == upper_bound(n)
        assert all(p in (1, 6, 10) for p, _ in chain)


def test_chain_examples():
    assert subadditive_chain(16) == [(10, 8), (6, 5)]
    assert subadditive_chain(1) == [(1, 1)]
    assert [p for p, _ in subadditive_chain(23)] in ([10, 10, 1, 1, 1], [10, 6, 6, 1])


def test_invalid_n():
    with pytest.raises(InvalidInput):
        upper_bound(0)
    with pytest.raises(InvalidInput):
        subadditive_chain(0)


def test_lookup_examples():
    assert lookup_snk(10, 8).value == 5120
    assert lookup_snk(12, 9).value == 24552
    assert lookup_snk(5, 5).value == 80
    assert lookup_snk(8, 6).value == 1018
    assert lookup_snk(10, 8).provenance == "paper-table"
    with pytest.raises(NotFound):
        lookup_snk(30, 2)


def test_tables_are_consistent():
    for name, table in PUBLISHED_TABLES.items():
        for (n, k), v in table.items():
            assert 0 < v <= n * (1 << (n - 1)), (name, n, k)
            if (n, k + 1) in table:
                assert table[(n, k + 1)] >= v, (name, n, k)


def test_embedded_constructions_reach_stored_counts():
    assert count_sliced(get_fixture("eq1_q10_8planes").planes()) == lookup_snk(10, 8).value
    assert count_sliced(get_fixture("paterson_q6_5planes").planes()) == lookup_snk(6, 5).value
    # the 12-plane construction is not the record holder for (15, 12)
    assert get_fixture("appC_q15_12planes").expected_sliced <= lookup_snk(15, 12).value


def test_local_layer(tmp_path):
    table = BoundTable()
    assert not table.record_local(10, 8, 5000)
    assert table.record_local(16, 13, 523431)
    entry = table.lookup(16, 13)
    assert entry.provenance == "locally-discovered" and entry.value == 523431
    assert table.record_local(20, 3, 100)
    assert table.lookup(20, 3).value == 100
    with pytest.raises(InvalidInput):
        table.record_local(3, 1, 13)
    path = tmp_path / "local.json"
    table.save_local(path)
    other = BoundTable()
    other.load_local(path)
    assert other.lookup(20, 3).value == 100
    # the published layer is untouched
    assert PUBLISHED_TABLES["tabu"][(16, 13)] == 523430
