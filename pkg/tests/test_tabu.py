from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from hyperslice import kernels
from hyperslice.core import Hyperplane, PlaneSet, count_sliced
from hyperslice.errors import InvalidInput
from hyperslice.fixtures import get_fixture
from hyperslice.reduced import Composition, build_grid, incidence_matrix, lift_planes
from hyperslice.search import init_state
from hyperslice.tabu import Frontier, IncidenceHash, TabuConfig, incidence_hash, neighbour_moves, run_tabu

Q6 = Composition((3, 1, 1, 1))
Q10 = Composition((6, 1, 1, 1, 1))


def test_positive_scaling_keeps_hash(grid_q10):
    planes = get_fixture("eq1_q10_8planes").planes()
    first = planes.planes[0]
    scaled = Hyperplane(tuple(3 * c for c in first.coefficients), 3 * first.bias)
    other = PlaneSet((scaled,) + planes.planes[1:], 10, Q10)
    assert incidence_hash(planes, grid_q10) == incidence_hash(other, grid_q10)


def test_empty_sets_hash_equal(grid_q10):
    a = PlaneSet((), 10, Q10)
    b = PlaneSet((), 10, Q10)
    assert incidence_hash(a, grid_q10) == incidence_hash(b, grid_q10)


def test_distinct_constructions_hash_differently(grid_q10):
    a = incidence_hash(get_fixture("eq1_q10_8planes").planes(), grid_q10)
    b = incidence_hash(get_fixture("appB_q10_orig").planes(), grid_q10)
    assert a != b
    assert len(a.digest) == 16 and len(a.hex) == 32


def test_hash_is_order_sensitive_by_row(grid_q6):
    rng = np.random.default_rng(0)
    coeffs = rng.integers(-5, 6, (3, 4))
    a = incidence_hash(lift_planes(coeffs, Q6), grid_q6)
    b = incidence_hash(lift_planes(coeffs[::-1], Q6), grid_q6)
    inc = incidence_matrix(lift_planes(coeffs, Q6), grid_q6)
    assert (a == b) == bool((inc == inc[::-1]).all())


def test_hash_rejects_composition_violation(grid_q6):
    bad = PlaneSet((Hyperplane((1, 2, 3, 4, 5, 6), Fraction(1, 2)),), 6)
    with pytest.raises(InvalidInput):
        incidence_hash(bad, grid_q6)


@pytest.mark.parametrize("use_numba", [True, False])
def test_kernel_hashes_match_reference(grid_q10, use_numba):
    planes = get_fixture("appB_q10_alt").planes()
    inc = incidence_matrix(planes, grid_q10)
    ra, rb = kernels.row_hashes(inc, use_numba=use_numba)
    if use_numba:
        got = tuple(int(x) for x in kernels._matrix_digest_nb(ra, rb, inc.shape[1]))
    else:
        got = kernels.matrix_digest_py([int(x) for x in ra], [int(x) for x in rb], inc.shape[0], inc.shape[1])
    assert IncidenceHash.from_parts(*got) == incidence_hash(planes, grid_q10)


@pytest.mark.parametrize("use_numba", [True, False])
def test_expansion_matches_fresh_evaluation(grid_q6, use_numba):
    rng = np.random.default_rng(8)
    coeffs = rng.integers(-6, 7, (3, 4))
    state = init_state(coeffs, grid_q6)
    ra, rb = kernels.row_hashes(state.cut, use_numba=use_numba)
    moves = neighbour_moves(coeffs, np.arange(4), 6, 2)
    assert len(moves) == len({tuple(m) for m in moves.tolist()})
    phis, wcs, has, hbs = kernels.expand_neighbours(
        grid_q6.coords, grid_q6.edge_lower, grid_q6.edge_upper, grid_q6.multiplicity, 1, 2,
        state.dots, state.cut, state.cnt, ra, rb, moves, use_numba=use_numba,
    )
    for m, (p, j, d) in enumerate(moves.tolist()):
        child = coeffs.copy()
        child[p, j] += d
        assert abs(child[p, j]) <= 6 and d != 0
        planes = lift_planes(child, Q6)
        inc = incidence_matrix(planes, grid_q6)
        assert phis[m] == inc.any(axis=0).sum()
        assert wcs[m] == count_sliced(planes)
        assert IncidenceHash.from_parts(int(has[m]), int(hbs[m])) == incidence_hash(planes, grid_q6)


def test_frontier_order_and_eviction():
    f = Frontier(capacity=4)
    for key, item in [(3, "a"), (5, "b"), (3, "c"), (5, "d")]:
        f.push(key, item)
    f.push(1, "e")  # over capacity: lowest bucket loses its newest entry, which is "e" itself
    assert len(f) == 4 and f.evicted == 1
    f.push(4, "g")  # evicts "c", the newest of the key-3 bucket
    assert [f.pop() for _ in range(len(f))] == [(5, "b"), (5, "d"), (4, "g"), (3, "a")]


def greedy_local_optimum(grid, coeffs, C, d):
    free = np.arange(coeffs.shape[1])
    while True:
        state = init_state(coeffs, grid)
        ra, rb = kernels.row_hashes(state.cut)
        moves = neighbour_moves(coeffs, free, C, d)
        phis, *_ = kernels.expand_neighbours(
            grid.coords, grid.edge_lower, grid.edge_upper, grid.multiplicity, 1, 2,
            state.dots, state.cut, state.cnt, ra, rb, moves,
        )
        best = int(np.argmax(phis))
        if phis[best] <= state.phi:
            return coeffs
        p, j, dl = moves[best]
        coeffs = coeffs.copy()
        coeffs[p, j] += dl


def test_stagnation_one_stops_after_single_expansion(grid_q6):
    start = greedy_local_optimum(grid_q6, np.random.default_rng(3).integers(-8, 9, (3, 4)), 8, 1)
    cfg = TabuConfig(n=6, k=3, composition=Q6, coeff_bound=8, delta=1, stagnation_limit=1,
                     max_restarts=1, time_limit=60)
    res = run_tabu(cfg, start=start, trace=True)
    assert res.trace.expansions_per_run == [1]
    assert res.iterations == 1


def _split_runs(trace):
    out, i = [], 0
    for count in trace.expansions_per_run:
        out.append((trace.expanded[i:i + count], trace.popped_keys[i:i + count], trace.run_best[i:i + count]))
        i += count
    return out


@pytest.mark.parametrize("mode", ["plain", "weighted"])
def test_trace_invariants(mode):
    cfg = TabuConfig(n=6, k=4, composition=Q6, coeff_bound=8, delta=2, stagnation_limit=3000,
                     frontier_capacity=500, max_restarts=3, time_limit=120, seed=2, fitness_mode=mode)
    res = run_tabu(cfg, trace=True)
    runs = _split_runs(res.trace)
    assert len(runs) == res.restarts == 3
    for expanded, popped, best in runs:
        assert len(set(expanded)) == len(expanded)
        assert all(a <= b for a, b in zip(best, best[1:]))
        # best-first: nothing popped later in a run beats the run-best seen so far
        assert all(k <= b for k, b in zip(popped, best))
    assert res.verified_full == res.full_sliced == count_sliced(res.planes)


def test_determinism_and_backend_parity():
    cfg = TabuConfig(n=6, k=4, composition=Q6, coeff_bound=8, delta=2, stagnation_limit=800,
                     max_restarts=2, time_limit=120, seed=5)
    a = run_tabu(cfg, trace=True, use_numba=True)
    b = run_tabu(cfg, trace=True, use_numba=True)
    c = run_tabu(cfg, trace=True, use_numba=False)
    assert a.trace.digest() == b.trace.digest() == c.trace.digest()
    assert a.full_sliced == c.full_sliced


def test_k_zero_and_validation():
    res = run_tabu(TabuConfig(n=6, k=0, composition=Q6, time_limit=1))
    assert res.full_sliced == 0 and res.planes.k == 0
    with pytest.raises(InvalidInput):
        TabuConfig(n=6, k=5, composition=Q6, stagnation_limit=0)
    with pytest.raises(InvalidInput):
        TabuConfig(n=6, k=5, composition=Q6, frontier_capacity=0)
    with pytest.raises(InvalidInput):
        run_tabu(TabuConfig(n=6, k=5, composition=Q6, time_limit=0))


def test_frozen_block_stays_fixed():
    cfg = TabuConfig(n=10, k=8, composition=Q10, coeff_bound=10, freeze_value=-2, stagnation_limit=500,
                     max_restarts=1, time_limit=60)
    res = run_tabu(cfg)
    assert all(p.coefficients[0] == -2 for p in res.planes)
