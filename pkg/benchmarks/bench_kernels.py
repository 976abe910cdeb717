"""Throughput of the numba and numpy kernels on the same inputs.

    python benchmarks/bench_kernels.py --steps 20000
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from hyperslice import kernels
from hyperslice._accel import HAVE_NUMBA
from hyperslice.reduced import Composition, build_grid
from hyperslice.search import SearchConfig, init_state, random_coefficients
from hyperslice.tabu import neighbour_moves


def bench_hill_climb(cfg: SearchConfig, steps: int, use_numba: bool) -> tuple[float, int]:
    grid = build_grid(cfg.composition)
    rng = np.random.default_rng(cfg.seed)
    state = init_state(random_coefficients(cfg, rng), grid)
    uniforms = rng.random((steps, kernels.UNIFORMS_PER_STEP))
    vptr, vedges = kernels.vertex_edge_csr(grid.n_vertices, grid.edge_lower, grid.edge_upper)
    empty = np.zeros(0, np.int64)
    args = (grid.coords, grid.edge_lower, grid.edge_upper, grid.multiplicity, False, True, 1, 2,
            state.coeffs, state.dots, state.side, state.cut, state.cnt, state.pc, state.weights, state.st,
            state.best_coeffs, cfg.free_coordinates(), cfg.coeff_bound, cfg.delta, 10**12,
            cfg.period_for(grid), cfg.weight_limit, uniforms, np.zeros(0, bool), empty, empty, empty, empty,
            empty, vptr, vedges)
    t0 = time.perf_counter()
    kernels.hill_climb_chunk(*args, use_numba=use_numba)
    return time.perf_counter() - t0, int(state.st[kernels.ST_PHI])


def bench_expand(cfg: SearchConfig, rounds: int, use_numba: bool) -> float:
    grid = build_grid(cfg.composition)
    rng = np.random.default_rng(cfg.seed)
    coeffs = random_coefficients(cfg, rng)
    state = init_state(coeffs, grid)
    ra, rb = kernels.row_hashes(state.cut, use_numba=use_numba)
    moves = neighbour_moves(coeffs, cfg.free_coordinates(), cfg.coeff_bound, cfg.delta)
    t0 = time.perf_counter()
    for _ in range(rounds):
        kernels.expand_neighbours(grid.coords, grid.edge_lower, grid.edge_upper, grid.multiplicity, 1, 2,
                                  state.dots, state.cut, state.cnt, ra, rb, moves, use_numba=use_numba)
    return time.perf_counter() - t0


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--composition", default="6,1,1,1,1")
    ap.add_argument("--k", type=int, default=8)
    ap.add_argument("--steps", type=int, default=20000, help="hill-climbing iterations per backend")
    ap.add_argument("--rounds", type=int, default=50, help="full neighbourhood expansions per backend")
    args = ap.parse_args(argv)

    comp = Composition.parse(args.composition)
    cfg = SearchConfig(n=comp.n, k=args.k, composition=comp, freeze_value=-9, seed=1)
    backends = [False] + ([True] if HAVE_NUMBA else [])
    if HAVE_NUMBA:
        # compile outside the timed region
        bench_hill_climb(cfg, 10, True)
        bench_expand(cfg, 1, True)

    print(f"grid {comp}: k={args.k}")
    results = {}
    for use_numba in backends:
        name = "numba" if use_numba else "numpy"
        hc, phi = bench_hill_climb(cfg, args.steps, use_numba)
        ex = bench_expand(cfg, args.rounds, use_numba)
        results[name] = (hc, ex)
        print(f"{name:6s} hill-climb {args.steps / hc:12,.0f} it/s (final phi {phi})   "
              f"expansion {args.rounds / ex:9,.1f} neighbourhoods/s")
    if len(results) == 2:
        print(f"speed-up: hill-climb x{results['numpy'][0] / results['numba'][0]:.1f}, "
              f"expansion x{results['numpy'][1] / results['numba'][1]:.1f}")


if __name__ == "__main__":
    main()
