"""Exact model of the hypercube Q_n on {-1, 1}^n and of hyperplanes slicing its edges.

Vertices are ranked lexicographically with ``-1 < +1`` and coordinate 0 most
significant, so a vertex index is the integer whose bit ``n-1-i`` is set when
coordinate ``i`` is ``+1``.  An edge is stored canonically as
``(index of its -1 endpoint, flip dimension)``.

All sign tests are done in integers: a bias ``p/q`` is cleared by comparing
``q * <a, v>`` against ``p``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import InvalidInput, ResourceGuard

BRUTE_FORCE_LIMIT = 20
_INT64_SAFE = 1 << 62


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        # floats are accepted only when they are exact short decimals such as 0.5
        return Fraction(repr(value))
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, (str, Decimal)):
        try:
            return Fraction(str(value).strip())
        except ValueError as exc:
            raise InvalidInput(f"bias {value!r} is not a decimal literal") from exc
    raise InvalidInput(f"unsupported bias type {type(value).__name__}")


def format_bias(bias: Fraction) -> str:
    """Shortest decimal literal for ``bias``; raises if it has no finite expansion."""
    if bias.denominator == 1:
        return str(bias.numerator)
    den = bias.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        raise InvalidInput(f"bias {bias} has no finite decimal representation")
    digits = max(twos, fives)
    text = f"{Decimal(bias.numerator) / Decimal(bias.denominator):.{digits}f}"
    return text


@dataclass(frozen=True)
class Hyperplane:
    """The hyperplane ``<coefficients, x> = bias`` with integer coefficients."""

    coefficients: tuple[int, ...]
    bias: Fraction = Fraction(1, 2)

    def __post_init__(self):
        coeffs = tuple(int(c) for c in self.coefficients)
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "bias", _as_fraction(self.bias))

    @property
    def dimension(self) -> int:
        return len(self.coefficients)

    def affine_sign(self, vertex: Sequence[int]) -> int:
        """Sign of ``<a, v> - b`` computed exactly."""
        if len(vertex) != self.dimension:
            raise InvalidInput(f"vertex has {len(vertex)} coordinates, plane has {self.dimension}")
        dot = sum(a * x for a, x in zip(self.coefficients, vertex))
        q, p = self.bias.denominator, self.bias.numerator
        diff = q * dot - p
        return (diff > 0) - (diff < 0)

    def satisfies(self, blocks: Sequence[int]) -> bool:
        """True when coefficients are constant inside every block of ``blocks``."""
        return offending_block(self, blocks) is None

    def scaled_bias(self) -> tuple[int, int]:
        """``(numerator, denominator)`` of the bias, denominator positive."""
        return self.bias.numerator, self.bias.denominator


def offending_block(plane: Hyperplane, blocks: Sequence[int]) -> int | None:
    if sum(blocks) != plane.dimension:
        raise InvalidInput(
            f"composition {list(blocks)} sums to {sum(blocks)}, plane has dimension {plane.dimension}"
        )
    start = 0
    for j, size in enumerate(blocks):
        group = plane.coefficients[start:start + size]
        if any(c != group[0] for c in group):
            return j
        start += size
    return None


def vertex_index(coords: Sequence[int]) -> int:
    """Lexicographic rank of a {-1, 1} vertex."""
    idx = 0
    for x in coords:
        if x not in (-1, 1):
            raise InvalidInput(f"vertex coordinate {x!r} not in {{-1, 1}}")
        idx = (idx << 1) | (x == 1)
    return idx


def vertex_from_index(index: int, n: int) -> tuple[int, ...]:
    return tuple(1 if (index >> (n - 1 - i)) & 1 else -1 for i in range(n))


@dataclass(frozen=True)
class Edge:
    """Edge of Q_n; ``base`` is normalised to the endpoint whose flipped coordinate is -1."""

    base: tuple[int, ...]
    flip_index: int

    def __post_init__(self):
        base = tuple(int(x) for x in self.base)
        if any(x not in (-1, 1) for x in base):
            raise InvalidInput(f"edge endpoint {base} is not a hypercube vertex")
        if not 0 <= self.flip_index < len(base):
            raise InvalidInput(f"flip index {self.flip_index} out of range for dimension {len(base)}")
        if base[self.flip_index] == 1:
            base = base[:self.flip_index] + (-1,) + base[self.flip_index + 1:]
        object.__setattr__(self, "base", base)

    @property
    def dimension(self) -> int:
        return len(self.base)

    @property
    def endpoints(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        i = self.flip_index
        return self.base, self.base[:i] + (1,) + self.base[i + 1:]

    @property
    def canonical(self) -> tuple[int, int]:
        return vertex_index(self.base), self.flip_index

    @classmethod
    def from_canonical(cls, index: int, flip_index: int, n: int) -> "Edge":
        return cls(vertex_from_index(index, n), flip_index)


def slices(plane: Hyperplane, edge: Edge) -> bool:
    """Whether ``plane`` separates the two endpoints of ``edge`` strictly."""
    if plane.dimension != edge.dimension:
        raise InvalidInput(f"plane dimension {plane.dimension} != edge dimension {edge.dimension}")
    v1, v2 = edge.endpoints
    return plane.affine_sign(v1) * plane.affine_sign(v2) < 0


@dataclass(frozen=True)
class PlaneSet:
    """A collection of hyperplanes in a common ambient dimension."""

    planes: tuple[Hyperplane, ...]
    dimension: int
    composition: object | None = None  # reduced.Composition; typed loosely to avoid an import cycle

    def __post_init__(self):
        planes = tuple(self.planes)
        object.__setattr__(self, "planes", planes)
        if self.dimension < 1:
            raise InvalidInput(f"dimension must be positive, got {self.dimension}")
        for i, p in enumerate(planes):
            if p.dimension != self.dimension:
                raise InvalidInput(f"plane {i} has dimension {p.dimension}, expected {self.dimension}")
        if self.composition is not None:
            blocks = tuple(self.composition.blocks)
            for i, p in enumerate(planes):
                bad = offending_block(p, blocks)
                if bad is not None:
                    raise InvalidInput(
                        f"plane {i} is not constant on block {bad} of composition {list(blocks)}"
                    )

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence], composition=None) -> "PlaneSet":
        """Build from rows ``[a_1, ..., a_n, bias]``."""
        planes = [Hyperplane(tuple(r[:-1]), r[-1]) for r in rows]
        if not planes:
            raise InvalidInput("from_rows needs at least one row to infer the dimension")
        return cls(tuple(planes), planes[0].dimension, composition)

    def __len__(self) -> int:
        return len(self.planes)

    def __iter__(self) -> Iterator[Hyperplane]:
        return iter(self.planes)

    @property
    def k(self) -> int:
        return len(self.planes)

    @property
    def total_edges(self) -> int:
        return self.dimension * (1 << (self.dimension - 1))

    def with_composition(self, composition) -> "PlaneSet":
        return PlaneSet(self.planes, self.dimension, composition)

    def coefficient_matrix(self) -> np.ndarray:
        return np.array([p.coefficients for p in self.planes], dtype=np.int64).reshape(self.k, self.dimension)


# ---------------------------------------------------------------------------
# brute force over all n * 2^(n-1) edges


def _check_dimension(n: int, limit: int) -> None:
    if n > limit:
        raise ResourceGuard(
            f"n={n} exceeds the brute-force limit {limit}; use the reduced-grid path "
            "(hyperslice.reduced.weighted_sliced_count) for composition-respecting planes"
        )


def vertex_dot_products(coefficients: Sequence[int]) -> np.ndarray:
    """``<a, v>`` for every vertex in lexicographic order (int64, overflow-checked)."""
    bound = sum(abs(int(c)) for c in coefficients)
    if bound >= _INT64_SAFE:
        raise InvalidInput("coefficients too large for exact 64-bit evaluation")
    vals = np.zeros(1, dtype=np.int64)
    for c in coefficients:
        c = int(c)
        vals = np.add.outer(vals, np.array([-c, c], dtype=np.int64)).ravel()
    return vals


def vertex_signs(plane: Hyperplane) -> np.ndarray:
    """Sign of ``<a, v> - b`` at every vertex, as int8."""
    p, q = plane.scaled_bias()
    bound = sum(abs(c) for c in plane.coefficients)
    if bound * q + abs(p) >= _INT64_SAFE:
        raise InvalidInput("plane too large for exact 64-bit evaluation")
    diff = vertex_dot_products(plane.coefficients) * q - p
    return np.sign(diff).astype(np.int8)


def _direction_cuts(signs: np.ndarray, n: int, i: int) -> np.ndarray:
    """Boolean mask over the 2^(n-1) edges in direction ``i`` (ordered by -1 endpoint)."""
    view = signs.reshape(1 << i, 2, 1 << (n - 1 - i))
    return (view[:, 0, :].astype(np.int16) * view[:, 1, :] < 0).ravel()


def coverage_masks(planes: PlaneSet, limit: int = BRUTE_FORCE_LIMIT) -> list[np.ndarray]:
    """Per flip direction, which edges are sliced by at least one plane."""
    n = planes.dimension
    _check_dimension(n, limit)
    masks = [np.zeros(1 << (n - 1), dtype=bool) for _ in range(n)]
    for plane in planes:
        signs = vertex_signs(plane)
        for i in range(n):
            masks[i] |= _direction_cuts(signs, n, i)
    return masks


def count_sliced(planes: PlaneSet, limit: int = BRUTE_FORCE_LIMIT) -> int:
    """Number of edges of Q_n sliced by at least one plane of ``planes``."""
    return int(sum(int(m.sum()) for m in coverage_masks(planes, limit)))


def _lower_indices(n: int, i: int) -> np.ndarray:
    """Vertex indices with coordinate ``i`` equal to -1, in increasing order."""
    hi = np.arange(1 << i, dtype=np.int64) << (n - i)
    lo = np.arange(1 << (n - 1 - i), dtype=np.int64)
    return (hi[:, None] + lo[None, :]).ravel()


@dataclass(frozen=True)
class VerificationResult:
    ok: bool
    sliced: int
    total: int
    dimension: int
    # canonical (vertex index, flip dimension) pairs, outer loop over flip dimension
    unsliced_canonical: np.ndarray = field(repr=False, compare=False)

    def __bool__(self) -> bool:
        return self.ok

    @property
    def unsliced_count(self) -> int:
        return self.total - self.sliced

    def unsliced_edges(self) -> list[Edge]:
        return [Edge.from_canonical(int(v), int(i), self.dimension) for v, i in self.unsliced_canonical]


def verify_full(planes: PlaneSet, limit: int = BRUTE_FORCE_LIMIT) -> VerificationResult:
    """Check every edge of Q_n; on failure report all unsliced edges.

    Edges are visited with the flip dimension in the outer loop and the
    -1 endpoint in increasing lexicographic order in the inner loop.
    """
    n = planes.dimension
    masks = coverage_masks(planes, limit)
    missing = []
    sliced = 0
    for i, mask in enumerate(masks):
        sliced += int(mask.sum())
        holes = np.flatnonzero(~mask)
        if holes.size:
            idx = _lower_indices(n, i)[holes]
            missing.append(np.column_stack([idx, np.full(idx.size, i, dtype=np.int64)]))
    unsliced = np.concatenate(missing) if missing else np.zeros((0, 2), dtype=np.int64)
    total = n * (1 << (n - 1))
    return VerificationResult(sliced == total, sliced, total, n, unsliced)


# ---------------------------------------------------------------------------
# construction file format


class ConstructionFormatError(InvalidInput):
    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        prefix = f"line {lineno}: " if lineno is not None else ""
        super().__init__(prefix + message)


def parse_planes(text: str, n: int | None = None) -> PlaneSet:
    """Parse the plain-text construction format.

    Lines starting with ``#`` and blank lines are skipped.  Every other line
    holds ``n`` integer coefficients followed by the bias as a decimal literal.
    """
    planes: list[Hyperplane] = []
    dim = n
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if dim is None:
            dim = len(tokens) - 1
            if dim < 1:
                raise ConstructionFormatError("need at least one coefficient and a bias", lineno)
        if len(tokens) != dim + 1:
            raise ConstructionFormatError(f"expected {dim + 1} tokens, found {len(tokens)}", lineno)
        try:
            coeffs = tuple(int(t) for t in tokens[:-1])
        except ValueError as exc:
            raise ConstructionFormatError(f"non-integer coefficient ({exc})", lineno) from None
        try:
            bias = Fraction(tokens[-1])
        except ValueError:
            raise ConstructionFormatError(f"bias {tokens[-1]!r} is not a decimal literal", lineno) from None
        planes.append(Hyperplane(coeffs, bias))
    if dim is None:
        raise ConstructionFormatError("no hyperplanes found and no dimension given")
    return PlaneSet(tuple(planes), dim)


def format_planes(planes: PlaneSet, header: Iterable[str] = ()) -> str:
    lines = [f"# {h}" for h in header]
    for p in planes:
        lines.append(" ".join([*map(str, p.coefficients), format_bias(p.bias)]))
    return "\n".join(lines) + "\n"


def read_planes(path, n: int | None = None) -> PlaneSet:
    with open(path, encoding="utf-8") as fh:
        return parse_planes(fh.read(), n)


def write_planes(path, planes: PlaneSet, header: Iterable[str] = ()) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_planes(planes, header))
