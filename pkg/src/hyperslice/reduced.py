"""Compositions of n and the reduced hypercube they induce.

For a composition ``[b_1, ..., b_l]`` every hypercube vertex projects to the
vector of its block sums.  Block ``j`` takes values ``-b_j, -b_j + 2, ..., b_j``,
so the reduced vertices form an ``(b_1 + 1) x ... x (b_l + 1)`` grid.  Two grid
points are joined when they differ by 2 in a single coordinate, and each grid
edge stands for ``mu(e)`` edges of Q_n.

Vertices are ranked in mixed radix with digit ``j`` equal to the number of
+1 coordinates in block ``j`` (so the order is lexicographic in the block
sums, first block most significant).  Edges are ordered by lower endpoint,
then by direction.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

from .core import Hyperplane, PlaneSet, _as_fraction, offending_block
from .errors import InvalidInput, ResourceGuard

GRID_VERTEX_LIMIT = 1 << 24
MAX_DIMENSION = 56  # keeps n * 2^(n-1) and every multiplicity inside int64


@dataclass(frozen=True)
class Composition:
    blocks: tuple[int, ...]

    def __post_init__(self):
        blocks = tuple(int(b) for b in self.blocks)
        if not blocks:
            raise InvalidInput("composition needs at least one block")
        if any(b < 1 for b in blocks):
            raise InvalidInput(f"composition blocks must be positive, got {list(blocks)}")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def parse(cls, text: str) -> "Composition":
        """Parse ``"6,1,1,1,1"``."""
        try:
            return cls(tuple(int(t) for t in text.replace(" ", "").split(",") if t))
        except ValueError:
            raise InvalidInput(f"cannot parse composition {text!r}") from None

    @classmethod
    def identity(cls, n: int) -> "Composition":
        return cls((1,) * n)

    @property
    def n(self) -> int:
        return sum(self.blocks)

    @property
    def length(self) -> int:
        return len(self.blocks)

    def block_slices(self) -> list[slice]:
        out, start = [], 0
        for b in self.blocks:
            out.append(slice(start, start + b))
            start += b
        return out

    def __str__(self) -> str:
        return ",".join(map(str, self.blocks))


def compositions(n: int) -> Iterator[Composition]:
    """All 2^(n-1) compositions of ``n``."""
    if n < 1:
        return
    for mask in range(1 << (n - 1)):
        blocks, size = [], 1
        for i in range(n - 1):
            if mask >> i & 1:
                blocks.append(size)
                size = 1
            else:
                size += 1
        blocks.append(size)
        yield Composition(tuple(blocks))


@dataclass(frozen=True)
class ReducedVertex:
    coords: tuple[int, ...]

    def negatives(self, composition: Composition) -> tuple[int, ...]:
        """Number of -1 coordinates per block among the vertex's preimages."""
        return tuple((b - c) // 2 for b, c in zip(composition.blocks, self.coords))


@dataclass(frozen=True)
class ReducedEdge:
    lower: ReducedVertex
    dim: int
    multiplicity: int

    @property
    def upper(self) -> ReducedVertex:
        c = list(self.lower.coords)
        c[self.dim] += 2
        return ReducedVertex(tuple(c))


@dataclass(frozen=True)
class ReducedHyperplane:
    coeffs: tuple[int, ...]
    bias: Fraction = Fraction(1, 2)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(int(c) for c in self.coeffs))
        object.__setattr__(self, "bias", _as_fraction(self.bias))

    def lift(self, composition: Composition) -> Hyperplane:
        if len(self.coeffs) != composition.length:
            raise InvalidInput(f"{len(self.coeffs)} reduced coefficients for {composition.length} blocks")
        full = []
        for c, b in zip(self.coeffs, composition.blocks):
            full.extend([c] * b)
        return Hyperplane(tuple(full), self.bias)


@dataclass(frozen=True, eq=False)
class ReducedGrid:
    """Dense arrays describing ``Q^beta``; build with :func:`build_grid`."""

    composition: Composition
    coords: np.ndarray = field(repr=False)  # (V, l) block sums
    preimages: np.ndarray = field(repr=False)  # (V,) hypercube vertices per grid vertex
    edge_lower: np.ndarray = field(repr=False)  # (E,) vertex rank
    edge_upper: np.ndarray = field(repr=False)
    edge_dim: np.ndarray = field(repr=False)
    multiplicity: np.ndarray = field(repr=False)  # (E,) int64

    @property
    def n(self) -> int:
        return self.composition.n

    @property
    def n_vertices(self) -> int:
        return int(self.coords.shape[0])

    @property
    def n_edges(self) -> int:
        return int(self.edge_lower.shape[0])

    @property
    def total_full_edges(self) -> int:
        return self.n * (1 << (self.n - 1))

    @cached_property
    def strides(self) -> tuple[int, ...]:
        radices = [b + 1 for b in self.composition.blocks]
        return tuple(math.prod(radices[j + 1:]) for j in range(len(radices)))

    def vertex_rank(self, coords: Sequence[int]) -> int:
        if len(coords) != self.composition.length:
            raise InvalidInput(f"reduced vertex has {len(coords)} coordinates, grid has {self.composition.length}")
        rank = 0
        for c, b, s in zip(coords, self.composition.blocks, self.strides):
            if abs(c) > b or (c - b) % 2:
                raise InvalidInput(f"coordinate {c} invalid for block of size {b}")
            rank += (c + b) // 2 * s
        return rank

    def vertex(self, rank: int) -> ReducedVertex:
        return ReducedVertex(tuple(int(x) for x in self.coords[rank]))

    def vertices(self) -> Iterator[ReducedVertex]:
        for r in range(self.n_vertices):
            yield self.vertex(r)

    def edge(self, index: int) -> ReducedEdge:
        return ReducedEdge(
            self.vertex(int(self.edge_lower[index])), int(self.edge_dim[index]), int(self.multiplicity[index])
        )

    def edges(self) -> Iterator[ReducedEdge]:
        for e in range(self.n_edges):
            yield self.edge(e)

    def multiplicity_histogram(self) -> dict[int, int]:
        return dict(sorted(Counter(self.multiplicity.tolist()).items()))


def expected_vertex_count(composition: Composition) -> int:
    return math.prod(b + 1 for b in composition.blocks)


def expected_edge_count(composition: Composition) -> int:
    bs = composition.blocks
    return sum(b * math.prod(c + 1 for j, c in enumerate(bs) if j != i) for i, b in enumerate(bs))


def build_grid(composition: Composition, vertex_limit: int = GRID_VERTEX_LIMIT) -> ReducedGrid:
    """Enumerate the reduced vertices, edges and multiplicities of ``composition``."""
    blocks = composition.blocks
    if composition.n > MAX_DIMENSION:
        raise ResourceGuard(f"n={composition.n} exceeds the supported maximum {MAX_DIMENSION}")
    radices = tuple(b + 1 for b in blocks)
    n_vertices = math.prod(radices)
    if n_vertices > vertex_limit:
        raise ResourceGuard(f"reduced grid has {n_vertices} vertices, limit is {vertex_limit}")

    digits = np.stack(np.unravel_index(np.arange(n_vertices, dtype=np.int64), radices), axis=1).astype(np.int64)
    b = np.array(blocks, dtype=np.int64)
    coords = 2 * digits - b
    negatives = b - digits

    # per-block binomial lookup, exact in int64 for n <= MAX_DIMENSION
    binom = np.zeros((len(blocks), max(blocks) + 1), dtype=np.int64)
    for j, bj in enumerate(blocks):
        binom[j, : bj + 1] = [math.comb(bj, u) for u in range(bj + 1)]
    preimages = np.ones(n_vertices, dtype=np.int64)
    for j in range(len(blocks)):
        preimages *= binom[j, negatives[:, j]]

    strides = np.array([math.prod(radices[j + 1:]) for j in range(len(radices))], dtype=np.int64)
    can_step = digits < b  # lower endpoint needs at least one -1 left in the block
    lower, dim = np.nonzero(can_step)  # row-major: ordered by vertex, then direction
    lower = lower.astype(np.int64)
    dim = dim.astype(np.int64)
    upper = lower + strides[dim]
    mult = negatives[lower, dim] * preimages[lower]
    return ReducedGrid(composition, coords, preimages, lower, upper, dim, mult)


# ---------------------------------------------------------------------------
# planes on the grid


def reduce_plane(plane: Hyperplane, composition: Composition) -> ReducedHyperplane:
    """One coefficient per block; fails naming the first non-constant block."""
    bad = offending_block(plane, composition.blocks)
    if bad is not None:
        raise InvalidInput(f"plane is not constant on block {bad} of composition {list(composition.blocks)}")
    coeffs = tuple(plane.coefficients[s.start] for s in composition.block_slices())
    return ReducedHyperplane(coeffs, plane.bias)


def lift_planes(coeffs: np.ndarray, composition: Composition, bias=Fraction(1, 2)) -> PlaneSet:
    """Full-space :class:`PlaneSet` from a ``(k, l)`` reduced coefficient matrix."""
    coeffs = np.asarray(coeffs, dtype=np.int64).reshape(-1, composition.length)
    planes = tuple(ReducedHyperplane(tuple(row.tolist()), bias).lift(composition) for row in coeffs)
    return PlaneSet(planes, composition.n, composition)


def reduced_dot(rplane: ReducedHyperplane, rvertex: ReducedVertex | Sequence[int]) -> int:
    """``<a^beta, v^beta>``, equal to ``<a, v>`` for every preimage ``v``."""
    coords = rvertex.coords if isinstance(rvertex, ReducedVertex) else tuple(rvertex)
    if len(coords) != len(rplane.coeffs):
        raise InvalidInput(f"reduced plane has {len(rplane.coeffs)} coefficients, vertex has {len(coords)}")
    return sum(a * v for a, v in zip(rplane.coeffs, coords))


def reduced_matrix(planes: PlaneSet, composition: Composition) -> tuple[np.ndarray, list[Fraction]]:
    """``(k, l)`` reduced coefficient matrix and per-plane biases."""
    if planes.dimension != composition.n:
        raise InvalidInput(f"planes live in dimension {planes.dimension}, composition sums to {composition.n}")
    reduced = [reduce_plane(p, composition) for p in planes]
    mat = np.array([r.coeffs for r in reduced], dtype=np.int64).reshape(len(reduced), composition.length)
    return mat, [r.bias for r in reduced]


def grid_signs(coeffs: np.ndarray, biases: Sequence[Fraction], grid: ReducedGrid) -> np.ndarray:
    """``(k, V)`` int8 sign of ``<a, v> - b`` at each reduced vertex."""
    coeffs = np.asarray(coeffs, dtype=np.int64)
    dots = coeffs @ grid.coords.T
    out = np.empty(dots.shape, dtype=np.int8)
    for i, bias in enumerate(biases):
        out[i] = np.sign(dots[i] * bias.denominator - bias.numerator)
    return out


def incidence_matrix(planes: PlaneSet, grid: ReducedGrid) -> np.ndarray:
    """``(k, E)`` boolean matrix: plane ``i`` slices reduced edge ``j``."""
    coeffs, biases = reduced_matrix(planes, grid.composition)
    signs = grid_signs(coeffs, biases, grid).astype(np.int16)
    return signs[:, grid.edge_lower] * signs[:, grid.edge_upper] < 0


def per_plane_sliced(planes: PlaneSet, grid: ReducedGrid) -> list[frozenset[int]]:
    return [frozenset(np.flatnonzero(row).tolist()) for row in incidence_matrix(planes, grid)]


def sliced_reduced_edges(planes: PlaneSet, grid: ReducedGrid) -> frozenset[int]:
    """Indices of reduced edges sliced by some plane of ``planes``."""
    inc = incidence_matrix(planes, grid)
    return frozenset(np.flatnonzero(inc.any(axis=0)).tolist())


def weighted_sliced_count(planes: PlaneSet, grid: ReducedGrid) -> int:
    """Number of Q_n edges sliced, computed on the grid via multiplicities."""
    covered = incidence_matrix(planes, grid).any(axis=0)
    return int(grid.multiplicity[covered].sum())


def grid_report(grid: ReducedGrid) -> dict:
    return {
        "composition": list(grid.composition.blocks),
        "n": grid.n,
        "vertices": grid.n_vertices,
        "edges": grid.n_edges,
        "full_edges": grid.total_full_edges,
        "multiplicity_sum": int(grid.multiplicity.sum()),
        "multiplicity_histogram": {str(k): v for k, v in grid.multiplicity_histogram().items()},
    }
