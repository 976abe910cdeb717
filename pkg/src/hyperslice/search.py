"""Adaptive edge-weighted hill climbing over composition-respecting plane sets.

Each restart draws ``k`` random planes and unit edge weights, then proposes
neighbours that change one plane in one or two reduced coordinates.  A
neighbour is kept when its fitness ``psi`` is at least the current one.
Whenever the fitness has not strictly improved for ``weight_period``
iterations, every currently unsliced reduced edge has its weight bumped by one
(capped at ``weight_limit``).  A restart ends after ``max_iterations``
iterations without an increase in the number of sliced reduced edges.
"""
from __future__ import annotations

import hashlib
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from typing import Literal

import numpy as np

from . import kernels
from ._accel import USE_NUMBA, backend_name
from .core import BRUTE_FORCE_LIMIT, PlaneSet, count_sliced
from .errors import DegenerateConfig, InvalidInput
from .reduced import (
    Composition,
    ReducedGrid,
    build_grid,
    incidence_matrix,
    lift_planes,
    reduced_matrix,
)

log = logging.getLogger(__name__)

FitnessMode = Literal["plain", "weighted"]
OFFSET = Fraction(1, 2)


@dataclass(frozen=True)
class SearchConfig:
    n: int
    k: int
    composition: Composition
    coeff_bound: int = 40
    delta: int = 3
    max_iterations: int | None = None  # default 50 * |E^beta|
    weight_period: int | None = None  # default 2 * |E^beta|
    weight_limit: int = 32
    fitness_mode: FitnessMode = "plain"
    variance_penalty: bool = True
    seed: int = 0
    time_limit: float = 60.0
    freeze_value: int | None = None
    freeze_block: int = 0
    max_restarts: int | None = None
    chunk: int = 4096
    target: int | None = None  # stop once this many Q_n edges are sliced

    def __post_init__(self):
        if isinstance(self.composition, str):
            object.__setattr__(self, "composition", Composition.parse(self.composition))
        elif not isinstance(self.composition, Composition):
            object.__setattr__(self, "composition", Composition(tuple(self.composition)))
        if self.composition.n != self.n:
            raise InvalidInput(f"composition {self.composition} sums to {self.composition.n}, not n={self.n}")
        if self.k < 0:
            raise InvalidInput("k must be non-negative")
        if self.coeff_bound < 0 or self.delta < 1:
            raise InvalidInput("coeff_bound must be >= 0 and delta >= 1")
        if self.delta > 2 * max(self.coeff_bound, 1):
            raise InvalidInput(f"delta {self.delta} exceeds 2 * coeff_bound")
        if self.weight_limit < 1:
            raise InvalidInput("weight_limit must be >= 1")
        if self.fitness_mode not in ("plain", "weighted"):
            raise InvalidInput(f"unknown fitness mode {self.fitness_mode!r}")
        for name in ("max_iterations", "weight_period", "max_restarts", "target"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise InvalidInput(f"{name} must be positive")
        if self.chunk < 1:
            raise InvalidInput("chunk must be positive")
        if self.freeze_value is not None:
            if not 0 <= self.freeze_block < self.composition.length:
                raise InvalidInput(f"freeze_block {self.freeze_block} out of range")
            if abs(self.freeze_value) > self.coeff_bound:
                raise InvalidInput(f"frozen value {self.freeze_value} outside [-C, C]")

    def iterations_for(self, grid: ReducedGrid) -> int:
        return self.max_iterations or 50 * grid.n_edges

    def period_for(self, grid: ReducedGrid) -> int:
        return self.weight_period or 2 * grid.n_edges

    def free_coordinates(self) -> np.ndarray:
        blocks = range(self.composition.length)
        frozen = self.freeze_block if self.freeze_value is not None else -1
        return np.array([j for j in blocks if j != frozen], dtype=np.int64)


class WeightMap:
    """Per-reduced-edge integer weights in ``[1, limit]``."""

    def __init__(self, n_edges: int, limit: int = 32):
        self.weights = np.ones(n_edges, dtype=np.int64)
        self.limit = limit

    def bump(self, unsliced: np.ndarray) -> None:
        self.weights[unsliced] = np.minimum(self.weights[unsliced] + 1, self.limit)

    def check(self) -> bool:
        return bool(np.all((self.weights >= 1) & (self.weights <= self.limit)))


# ---------------------------------------------------------------------------
# fitness, reference form


def fitness_psi(planes: PlaneSet, weights, grid: ReducedGrid, fitness_mode: FitnessMode = "plain",
                variance_penalty: bool = True) -> float:
    """``sum_{e in phi(H)} w(e) - Var(|phi(H_i)|)`` with population variance.

    In ``weighted`` mode each covered edge contributes ``w(e) * mu(e)``; the
    variance term always uses the unweighted per-plane reduced counts.
    """
    w = weights.weights if isinstance(weights, WeightMap) else np.asarray(weights, dtype=np.int64)
    if w.shape != (grid.n_edges,):
        raise InvalidInput(f"weights have shape {w.shape}, grid has {grid.n_edges} edges")
    inc = incidence_matrix(planes, grid)
    if inc.shape[0] == 0:
        return 0.0
    covered = inc.any(axis=0)
    contrib = w * grid.multiplicity if fitness_mode == "weighted" else w
    total = int(contrib[covered].sum())
    if not variance_penalty:
        return float(total)
    return float(total - np.var(inc.sum(axis=1)))


# ---------------------------------------------------------------------------
# samplers


def _check_movable(config: SearchConfig) -> np.ndarray:
    free = config.free_coordinates()
    if config.k > 0 and free.size == 0:
        raise DegenerateConfig("every reduced coordinate is frozen; no neighbour exists")
    if config.k > 0 and config.coeff_bound == 0:
        raise DegenerateConfig("coeff_bound 0 leaves no admissible coefficient change")
    return free


def random_coefficients(config: SearchConfig, rng: np.random.Generator) -> np.ndarray:
    C = config.coeff_bound
    coeffs = rng.integers(-C, C + 1, size=(config.k, config.composition.length), dtype=np.int64)
    if config.freeze_value is not None:
        coeffs[:, config.freeze_block] = config.freeze_value
    return coeffs


def random_valid_planeset(config: SearchConfig, rng: np.random.Generator) -> PlaneSet:
    """``k`` random planes obeying the composition, bias 1/2, frozen block pinned."""
    return lift_planes(random_coefficients(config, rng), config.composition, OFFSET)


def random_neighbor(planes: PlaneSet, config: SearchConfig, rng: np.random.Generator) -> PlaneSet:
    """Copy of ``planes`` with one plane moved in one or two free reduced coordinates."""
    free = _check_movable(config)
    coeffs, biases = reduced_matrix(planes, config.composition)
    u = rng.random(kernels.UNIFORMS_PER_STEP)
    p, j1, d1, j2, d2 = kernels.decode_move(u, config.k, free, coeffs, config.coeff_bound, config.delta)
    coeffs[p, j1] += d1
    if j2 >= 0:
        coeffs[p, j2] += d2
    out = [lift_planes(row[None, :], config.composition, b).planes[0] for row, b in zip(coeffs, biases)]
    return PlaneSet(tuple(out), config.n, config.composition)


# ---------------------------------------------------------------------------
# state


@dataclass
class SearchState:
    coeffs: np.ndarray
    dots: np.ndarray
    side: np.ndarray
    cut: np.ndarray
    cnt: np.ndarray
    pc: np.ndarray
    weights: np.ndarray
    st: np.ndarray
    best_coeffs: np.ndarray

    @property
    def phi(self) -> int:
        return int(self.st[kernels.ST_PHI])


def init_state(coeffs: np.ndarray, grid: ReducedGrid, fitness_mode: FitnessMode = "plain",
               bias: Fraction = OFFSET) -> SearchState:
    coeffs = np.ascontiguousarray(coeffs, dtype=np.int64)
    dots = coeffs @ grid.coords.T
    side = np.sign(dots * bias.denominator - bias.numerator).astype(np.int8)
    a = side[:, grid.edge_lower]
    b = side[:, grid.edge_upper]
    cut = (a != 0) & (b != 0) & (a != b)
    cnt = cut.sum(axis=0).astype(np.int64)
    pc = cut.sum(axis=1).astype(np.int64)
    weights = np.ones(grid.n_edges, dtype=np.int64)
    covered = cnt > 0
    contrib = weights * grid.multiplicity if fitness_mode == "weighted" else weights
    st = np.zeros(kernels.ST_SIZE, dtype=np.int64)
    st[kernels.ST_S] = contrib[covered].sum()
    st[kernels.ST_PHI] = covered.sum()
    st[kernels.ST_WC] = grid.multiplicity[covered].sum()
    st[kernels.ST_SUMPC] = pc.sum()
    st[kernels.ST_SUMPC2] = (pc * pc).sum()
    st[kernels.ST_BEST_PHI] = st[kernels.ST_PHI]
    st[kernels.ST_BEST_WC] = st[kernels.ST_WC]
    st[kernels.ST_FULL] = int(st[kernels.ST_PHI] == grid.n_edges)
    return SearchState(coeffs, np.ascontiguousarray(dots), side, cut, cnt, pc, weights, st, coeffs.copy())


@dataclass
class Trace:
    accepted: list = field(default_factory=list)
    psi_old: list = field(default_factory=list)
    psi_new: list = field(default_factory=list)
    phi: list = field(default_factory=list)
    wmin: list = field(default_factory=list)
    wmax: list = field(default_factory=list)
    restart_starts: list = field(default_factory=list)

    def arrays(self) -> dict[str, np.ndarray]:
        def cat(xs, dtype):
            return np.concatenate(xs).astype(dtype) if xs else np.zeros(0, dtype)
        return {
            "accepted": cat(self.accepted, bool),
            "psi_old": cat(self.psi_old, np.int64),
            "psi_new": cat(self.psi_new, np.int64),
            "phi": cat(self.phi, np.int64),
            "wmin": cat(self.wmin, np.int64),
            "wmax": cat(self.wmax, np.int64),
        }

    def digest(self) -> str:
        h = hashlib.blake2b(digest_size=16)
        for name, arr in self.arrays().items():
            h.update(name.encode())
            h.update(np.ascontiguousarray(arr).tobytes())
        h.update(np.asarray(self.restart_starts, dtype=np.int64).tobytes())
        return h.hexdigest()


@dataclass
class SearchResult:
    planes: PlaneSet
    reduced_sliced: int
    reduced_total: int
    full_sliced: int
    full_total: int
    iterations: int
    restarts: int
    elapsed: float
    seed: int
    backend: str
    verified_full: int | None = None
    trace: Trace | None = field(default=None, repr=False)

    @property
    def complete(self) -> bool:
        return self.reduced_sliced == self.reduced_total

    def summary(self) -> str:
        return f"sliced={self.full_sliced}/{self.full_total} reduced={self.reduced_sliced}/{self.reduced_total}"

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("planes")
        d.pop("trace")
        return d


def _better(phi: int, wc: int, best_phi: int, best_wc: int) -> bool:
    return phi > best_phi or (phi == best_phi and wc > best_wc)


def _finish(best_coeffs, best_phi, best_wc, grid, config, iterations, restarts, start, backend, trace):
    planes = lift_planes(best_coeffs, config.composition, OFFSET)
    verified = count_sliced(planes) if config.n <= BRUTE_FORCE_LIMIT else None
    return SearchResult(
        planes=planes,
        reduced_sliced=int(best_phi),
        reduced_total=grid.n_edges,
        full_sliced=int(best_wc),
        full_total=grid.total_full_edges,
        iterations=int(iterations),
        restarts=restarts,
        elapsed=time.perf_counter() - start,
        seed=config.seed,
        backend=backend,
        verified_full=verified,
        trace=trace,
    )


def run_search(config: SearchConfig, grid: ReducedGrid | None = None, *, trace: bool = False,
               use_numba: bool | None = None) -> SearchResult:
    """Adaptive edge-weighted search; returns the best plane set over all restarts.

    Restarts continue until ``time_limit`` seconds have elapsed, ``max_restarts``
    restarts have run, a plane set slicing every reduced edge is found, or the
    best plane set slices at least ``target`` edges of Q_n.
    """
    if config.time_limit <= 0:
        raise InvalidInput("time_limit must be positive")
    if use_numba is None:
        use_numba = USE_NUMBA
    grid = grid or build_grid(config.composition)
    if grid.composition != config.composition:
        raise InvalidInput("grid was built for a different composition")
    start = time.perf_counter()
    backend = backend_name(use_numba)
    tr = Trace() if trace else None

    if config.k == 0:
        empty = np.zeros((0, config.composition.length), dtype=np.int64)
        return _finish(empty, 0, 0, grid, config, 0, 0, start, backend, tr)

    free = _check_movable(config)
    rng = np.random.default_rng(config.seed)
    max_iter = config.iterations_for(grid)
    period = config.period_for(grid)
    weighted = config.fitness_mode == "weighted"
    chunk = config.chunk
    bias_p, bias_q = OFFSET.numerator, OFFSET.denominator
    empty_i64 = np.zeros(0, np.int64)
    vptr, vedges = kernels.vertex_edge_csr(grid.n_vertices, grid.edge_lower, grid.edge_upper)

    best = None  # (phi, wc, coeffs)
    iterations = 0
    restarts = 0
    total_steps = 0
    while True:
        if restarts and time.perf_counter() - start >= config.time_limit:
            break
        if config.max_restarts is not None and restarts >= config.max_restarts:
            break
        state = init_state(random_coefficients(config, rng), grid, config.fitness_mode)
        if tr is not None:
            tr.restart_starts.append(total_steps)
        while True:
            if state.st[kernels.ST_T] >= max_iter or state.st[kernels.ST_FULL]:
                break
            uniforms = rng.random((chunk, kernels.UNIFORMS_PER_STEP))
            if tr is not None:
                bufs = (np.zeros(chunk, bool), np.zeros(chunk, np.int64), np.zeros(chunk, np.int64),
                        np.zeros(chunk, np.int64), np.zeros(chunk, np.int64), np.zeros(chunk, np.int64))
            else:
                bufs = (np.zeros(0, bool), empty_i64, empty_i64, empty_i64, empty_i64, empty_i64)
            used = kernels.hill_climb_chunk(
                grid.coords, grid.edge_lower, grid.edge_upper, grid.multiplicity, weighted,
                config.variance_penalty, bias_p, bias_q,
                state.coeffs, state.dots, state.side, state.cut, state.cnt, state.pc, state.weights,
                state.st, state.best_coeffs, free, config.coeff_bound, config.delta, max_iter, period,
                config.weight_limit, uniforms, *bufs, vptr, vedges, use_numba=use_numba,
            )
            total_steps += used
            if tr is not None:
                for lst, buf in zip((tr.accepted, tr.psi_old, tr.psi_new, tr.phi, tr.wmin, tr.wmax), bufs):
                    lst.append(buf[:used].copy())
            if time.perf_counter() - start >= config.time_limit:
                break
            if config.target is not None and state.st[kernels.ST_BEST_WC] >= config.target:
                break
        iterations += int(state.st[kernels.ST_ITERS])
        restarts += 1
        phi, wc = int(state.st[kernels.ST_BEST_PHI]), int(state.st[kernels.ST_BEST_WC])
        reached = config.target is not None and wc >= config.target > (best[1] if best else -1)
        if best is None or reached or _better(phi, wc, best[0], best[1]):
            best = (phi, wc, state.best_coeffs.copy())
            log.debug("restart %d: best reduced %d/%d, full %d", restarts, phi, grid.n_edges, wc)
        if best[0] == grid.n_edges or (config.target is not None and best[1] >= config.target):
            break
    return _finish(best[2], best[0], best[1], grid, config, iterations, restarts, start, backend, tr)


# ---------------------------------------------------------------------------
# parallel restarts


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("HYPERSLICE_WORKERS", "1")))
    except ValueError:
        return 1


def _worker(args):
    runner, config = args
    return runner(config)


def pick_best(results):
    """Highest reduced count, then weighted count; earliest wins ties."""
    best = None
    for r in results:
        if best is None or _better(r.reduced_sliced, r.full_sliced, best.reduced_sliced, best.full_sliced):
            best = r
    return best


def run_parallel(runner, config, workers: int):
    """Run ``runner`` on ``workers`` copies of ``config`` seeded ``seed ^ worker_id``."""
    if workers <= 1:
        return runner(config)
    configs = [replace(config, seed=config.seed ^ w) for w in range(workers)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(_worker, [(runner, c) for c in configs]))
    best = pick_best(results)
    best.iterations = sum(r.iterations for r in results)
    best.restarts = sum(r.restarts for r in results)
    return best
