"""Published slicing constructions, embedded as golden data.

Each fixture is stored in the construction file format; the expected sliced
count is the value stated alongside the construction where it was published.
"""
from __future__ import annotations

from dataclasses import dataclass

from .core import PlaneSet, count_sliced, format_planes, parse_planes
from .reduced import Composition


@dataclass(frozen=True)
class Fixture:
    name: str
    n: int
    k: int
    composition: tuple[int, ...]
    expected_sliced: int
    source: str
    text: str

    @property
    def total_edges(self) -> int:
        return self.n * (1 << (self.n - 1))

    def planes(self) -> PlaneSet:
        return parse_planes(self.text, self.n).with_composition(Composition(self.composition))


# 8 planes slicing all of Q_10, composition [6,1,1,1,1]
_EQ1 = """\
-2 -2 -2 -2 -2 -2 1 3 -8 -1 0.5
-2 -2 -2 -2 -2 -2 -1 -3 8 1 0.5
-2 -2 -2 -2 -2 -2 -1 8 3 -1 0.5
-2 -2 -2 -2 -2 -2 1 -8 -3 1 0.5
-2 -2 -2 -2 -2 -2 4 -1 1 -7 0.5
-2 -2 -2 -2 -2 -2 -4 1 -1 7 0.5
-2 -2 -2 -2 -2 -2 -7 -1 -1 -4 0.5
-2 -2 -2 -2 -2 -2 7 1 1 4 0.5
"""

# Paterson's 5 planes for Q_6, composition [3,2,1], zero bias
_PATERSON = """\
1 1 1 3 3 -4 0
-2 -2 -2 3 3 -1 0
3 3 3 1 1 -4 0
-1 -1 -1 3 3 6 0
3 3 3 1 1 8 0
"""

# first full Q_10 solution found with the constant -9 frozen
_APPB_ORIG = """\
-9 -9 -9 -9 -9 -9 7 -16 5 35 0.5
-9 -9 -9 -9 -9 -9 -32 -4 -17 8 0.5
-9 -9 -9 -9 -9 -9 32 5 19 -4 0.5
-9 -9 -9 -9 -9 -9 -3 15 -3 -38 0.5
-9 -9 -9 -9 -9 -9 15 3 -36 4 0.5
-9 -9 -9 -9 -9 -9 8 -35 -2 -12 0.5
-9 -9 -9 -9 -9 -9 -4 33 7 16 0.5
-9 -9 -9 -9 -9 -9 -18 -4 34 -5 0.5
"""

# restricted-magnitude full Q_10 solution
_APPB_ALT = """\
-9 -9 -9 -9 -9 -9 30 4 3 -20 0.5
-9 -9 -9 -9 -9 -9 20 -3 4 30 0.5
-9 -9 -9 -9 -9 -9 -30 -3 -4 20 0.5
-9 -9 -9 -9 -9 -9 -20 3 -3 -30 0.5
-9 -9 -9 -9 -9 -9 -3 -38 11 -3 0.5
-9 -9 -9 -9 -9 -9 4 -11 -38 -4 0.5
-9 -9 -9 -9 -9 -9 3 38 -11 3 0.5
-9 -9 -9 -9 -9 -9 -4 11 38 3 0.5
"""

_APPC_ROWS = [(-2, -2), (-2, 0), (2, -2), (2, 0), (-6, -2), (-6, 10), (-6, 0), (6, 0), (8, 16), (8, 0), (-10, 0), (10, 0)]
# 12 planes on Q_15, composition [13,1,1]
_APPC = "".join(" ".join(["-1"] * 13 + [str(a), str(b), "0.5"]) + "\n" for a, b in _APPC_ROWS)


FIXTURES: dict[str, Fixture] = {
    f.name: f
    for f in (
        Fixture("eq1_q10_8planes", 10, 8, (6, 1, 1, 1, 1), 5120,
                "main construction: 8 planes slicing all 5120 edges of Q_10", _EQ1),
        Fixture("paterson_q6_5planes", 6, 5, (3, 2, 1), 192,
                "Paterson construction for Q_6 (5 planes)", _PATERSON),
        Fixture("appB_q10_orig", 10, 8, (6, 1, 1, 1, 1), 5120,
                "first full Q_10 solution found, constant -9", _APPB_ORIG),
        Fixture("appB_q10_alt", 10, 8, (6, 1, 1, 1, 1), 5120,
                "Q_10 solution with restricted coefficient magnitudes", _APPB_ALT),
        Fixture("appC_q15_12planes", 15, 12, (13, 1, 1), 245628,
                "12 planes slicing 245628 of the 245760 edges of Q_15", _APPC),
    )
}


def get_fixture(name: str) -> Fixture:
    try:
        return FIXTURES[name]
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; known: {', '.join(FIXTURES)}") from None


def selftest() -> list[tuple[str, int, int, bool]]:
    """Verify every fixture; returns ``(name, expected, found, ok)`` rows."""
    rows = []
    for fx in FIXTURES.values():
        planes = fx.planes()
        found = count_sliced(planes)
        roundtrip = format_planes(planes) == fx.text
        rows.append((fx.name, fx.expected_sliced, found, found == fx.expected_sliced and roundtrip))
    return rows
