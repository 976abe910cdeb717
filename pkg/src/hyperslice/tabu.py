"""Best-first tabu search over single-coefficient moves.

The frontier holds unexplored plane sets ordered by their number of sliced
reduced edges; the best one is expanded into every neighbour that changes a
single reduced coefficient by at most ``delta``.  A neighbour is skipped when
its plane-by-edge incidence matrix has been seen before in this run, so
plane sets slicing exactly the same edges are explored only once.  A run
stops once ``stagnation_limit`` new solutions have been seen since the last
improvement; then the search restarts from a fresh random plane set.
"""
from __future__ import annotations

import bisect
import time
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from ._accel import USE_NUMBA, backend_name
from .core import PlaneSet
from .errors import InvalidInput
from .reduced import Composition, ReducedGrid, build_grid, incidence_matrix
from .search import (
    OFFSET,
    FitnessMode,
    SearchConfig,
    SearchResult,
    _check_movable,
    _finish,
    init_state,
    random_coefficients,
)


@dataclass(frozen=True)
class IncidenceHash:
    digest: bytes

    @classmethod
    def from_parts(cls, a: int, b: int) -> "IncidenceHash":
        return cls(int(a).to_bytes(8, "big") + int(b).to_bytes(8, "big"))

    @property
    def hex(self) -> str:
        return self.digest.hex()


def incidence_hash(planes: PlaneSet, grid: ReducedGrid) -> IncidenceHash:
    """128-bit digest of the row-major ``(k, |E^beta|)`` slicing bit matrix."""
    return IncidenceHash.from_parts(*kernels.incidence_digest(incidence_matrix(planes, grid)))


@dataclass(frozen=True)
class TabuConfig:
    n: int
    k: int
    composition: Composition
    coeff_bound: int = 10  # best-first search degrades quickly with wider coefficient ranges
    delta: int = 3
    stagnation_limit: int = 20_000
    frontier_capacity: int = 100_000
    fitness_mode: FitnessMode = "plain"
    seed: int = 0
    time_limit: float = 60.0
    freeze_value: int | None = None
    freeze_block: int = 0
    max_restarts: int | None = None
    target: int | None = None

    def __post_init__(self):
        if self.stagnation_limit < 1:
            raise InvalidInput("stagnation_limit must be >= 1")
        if self.frontier_capacity < 1:
            raise InvalidInput("frontier_capacity must be >= 1")
        # reuse the shared validation
        object.__setattr__(self, "composition", self.search_config().composition)

    def search_config(self) -> SearchConfig:
        return SearchConfig(
            n=self.n, k=self.k, composition=self.composition, coeff_bound=self.coeff_bound,
            delta=self.delta, fitness_mode=self.fitness_mode, seed=self.seed,
            time_limit=self.time_limit, freeze_value=self.freeze_value,
            freeze_block=self.freeze_block, max_restarts=self.max_restarts, target=self.target,
        )


class Frontier:
    """Bucket queue: pop the highest key, oldest first; evict the lowest key, newest first."""

    def __init__(self, capacity: int):
        self.capacity = capacity
        self.buckets: dict[int, deque] = {}
        self.keys: list[int] = []
        self.size = 0
        self.evicted = 0

    def __len__(self) -> int:
        return self.size

    def push(self, key: int, item) -> None:
        bucket = self.buckets.get(key)
        if bucket is None:
            bucket = self.buckets[key] = deque()
            bisect.insort(self.keys, key)
        bucket.append(item)
        self.size += 1
        if self.size > self.capacity:
            self._take(self.keys[0], newest=True)
            self.evicted += 1

    def pop(self):
        return self.keys[-1], self._take(self.keys[-1], newest=False)

    def _take(self, key: int, newest: bool):
        bucket = self.buckets[key]
        item = bucket.pop() if newest else bucket.popleft()
        if not bucket:
            del self.buckets[key]
            self.keys.pop(bisect.bisect_left(self.keys, key))
        self.size -= 1
        return item


@dataclass
class TabuTrace:
    expanded: list = field(default_factory=list)  # (digest_a, digest_b) per expansion
    popped_keys: list = field(default_factory=list)
    run_best: list = field(default_factory=list)  # run-best key after each expansion
    expansions_per_run: list = field(default_factory=list)

    def digest(self) -> str:
        import hashlib

        h = hashlib.blake2b(digest_size=16)
        h.update(np.asarray(self.expanded, dtype=np.uint64).tobytes())
        h.update(np.asarray(self.popped_keys, dtype=np.int64).tobytes())
        h.update(np.asarray(self.run_best, dtype=np.int64).tobytes())
        return h.hexdigest()


def neighbour_moves(coeffs: np.ndarray, free: np.ndarray, C: int, d: int) -> np.ndarray:
    """Moves ``(plane, coordinate, delta)`` ordered by plane, coordinate, then delta."""
    k = coeffs.shape[0]
    deltas = np.array([x for x in range(-d, d + 1) if x != 0], dtype=np.int64)
    P, J, D = np.meshgrid(np.arange(k, dtype=np.int64), free, deltas, indexing="ij")
    P, J, D = P.ravel(), J.ravel(), D.ravel()
    ok = np.abs(coeffs[P, J] + D) <= C
    return np.ascontiguousarray(np.stack([P[ok], J[ok], D[ok]], axis=1))


def run_tabu(config: TabuConfig, grid: ReducedGrid | None = None, *, trace: bool = False,
             start: np.ndarray | None = None, use_numba: bool | None = None) -> SearchResult:
    """Restarted best-first tabu search; ``start`` fixes the first run's initial reduced coefficients."""
    if config.time_limit <= 0:
        raise InvalidInput("time_limit must be positive")
    if use_numba is None:
        use_numba = USE_NUMBA
    sc = config.search_config()
    grid = grid or build_grid(sc.composition)
    t0 = time.perf_counter()
    backend = backend_name(use_numba)
    tr = TabuTrace() if trace else None

    if config.k == 0:
        empty = np.zeros((0, sc.composition.length), dtype=np.int64)
        return _finish(empty, 0, 0, grid, sc, 0, 0, t0, backend, tr)

    free = _check_movable(sc)
    rng = np.random.default_rng(config.seed)
    weighted = config.fitness_mode == "weighted"
    shape = (config.k, sc.composition.length)
    E = grid.n_edges
    args = (grid.coords, grid.edge_lower, grid.edge_upper, grid.multiplicity, OFFSET.numerator, OFFSET.denominator)

    best = None  # (key, phi, wc, coeffs)
    expansions_total = 0
    restarts = 0
    while True:
        if restarts and time.perf_counter() - t0 >= config.time_limit:
            break
        if config.max_restarts is not None and restarts >= config.max_restarts:
            break
        if restarts == 0 and start is not None:
            s0 = np.array(start, dtype=np.int64).reshape(shape)
        else:
            s0 = random_coefficients(sc, rng)
        st0 = init_state(s0, grid)
        phi0, wc0 = int(st0.st[kernels.ST_PHI]), int(st0.st[kernels.ST_WC])
        h0 = kernels.incidence_digest(st0.cut)
        key0 = wc0 if weighted else phi0
        seen = {h0}
        frontier = Frontier(config.frontier_capacity)
        # entries are (parent coefficients, plane, coordinate, delta, digest); children materialise on pop
        frontier.push(key0, (s0.tobytes(), 0, 0, 0, h0))
        run_best = (key0, phi0, wc0, s0)
        mark = len(seen)
        expansions = 0
        while len(seen) - mark < config.stagnation_limit and len(frontier):
            key, (blob, p0, j0, d0, digest) = frontier.pop()
            coeffs = np.frombuffer(blob, dtype=np.int64).reshape(shape).copy()
            coeffs[p0, j0] += d0
            blob = coeffs.tobytes()
            state = init_state(coeffs, grid)
            ra, rb = kernels.row_hashes(state.cut, use_numba=use_numba)
            moves = neighbour_moves(coeffs, free, config.coeff_bound, config.delta)
            phis, wcs, has, hbs = kernels.expand_neighbours(
                *args, state.dots, state.cut, state.cnt, ra, rb, moves, use_numba=use_numba
            )
            expansions += 1
            if tr is not None:
                tr.expanded.append(digest)
                tr.popped_keys.append(key)
            keys = (wcs if weighted else phis).tolist()
            move_list = moves.tolist()
            push = frontier.push
            for m, h in enumerate(zip(has.tolist(), hbs.tolist())):
                if h in seen:
                    continue
                seen.add(h)
                p, j, dlt = move_list[m]
                ck = keys[m]
                push(ck, (blob, p, j, dlt, h))
                if ck > run_best[0]:
                    child = coeffs.copy()
                    child[p, j] += dlt
                    run_best = (ck, int(phis[m]), int(wcs[m]), child)
                    mark = len(seen)
            if tr is not None:
                tr.run_best.append(run_best[0])
            if run_best[1] == E or time.perf_counter() - t0 >= config.time_limit:
                break
            if config.target is not None and run_best[2] >= config.target:
                break
        restarts += 1
        expansions_total += expansions
        if tr is not None:
            tr.expansions_per_run.append(expansions)
        reached = config.target is not None and run_best[2] >= config.target > (best[2] if best else -1)
        if best is None or reached or run_best[0] > best[0]:
            best = run_best
        if best[1] == E or (config.target is not None and best[2] >= config.target):
            break
    return _finish(best[3], best[1], best[2], grid, sc, expansions_total, restarts, t0, backend, tr)
