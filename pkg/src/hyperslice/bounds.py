"""Upper bounds on S(n) by subadditivity, and tables of known S(n, k) lower bounds.

S(n) is the least number of hyperplanes slicing every edge of Q_n and
S(n, k) the most edges that ``k`` hyperplanes can slice.  Upper bounds on
S(n) chain the base cases S(m) = m (m <= 5), S(6) <= 5 and S(10) <= 8
through ``S(a + b) <= S(a) + S(b)``.
"""
from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass

from .errors import InvalidInput, NotFound

BASE_BOUNDS = {1: 1, 2: 2, 3: 3, 4: 4, 5: 5, 6: 5, 10: 8}
CHAIN_PARTS = {1: 1, 6: 5, 10: 8}


def upper_bound(n: int) -> int:
    """ceil(4n/5), or 4n/5 + 1 when n is an odd multiple of 5; n itself for n <= 5."""
    if n < 1:
        raise InvalidInput(f"n must be positive, got {n}")
    if n <= 5:
        return n
    if n % 5 == 0 and (n // 5) % 2 == 1:
        return 4 * n // 5 + 1
    return -(-4 * n // 5)


def subadditive_chain(n: int) -> list[tuple[int, int]]:
    """Parts from {10, 6, 1} with their S-bounds, minimising the bound sum.

    Ties prefer fewer parts, then larger parts first.  The bound sum equals
    :func:`upper_bound` for every n (checked in the test-suite).
    """
    if n < 1:
        raise InvalidInput(f"n must be positive, got {n}")
    # best[m] = (bound sum, number of parts, parts tuple descending)
    best: list[tuple[int, int, tuple[int, ...]] | None] = [None] * (n + 1)
    best[0] = (0, 0, ())
    for m in range(1, n + 1):
        cands = []
        for part, bound in CHAIN_PARTS.items():
            if part <= m and best[m - part] is not None:
                s, c, parts = best[m - part]
                merged = tuple(sorted(parts + (part,), reverse=True))
                cands.append((s + bound, c + 1, tuple(-p for p in merged), merged))
        s, c, _, parts = min(cands)
        best[m] = (s, c, parts)
    return [(p, CHAIN_PARTS[p]) for p in best[n][2]]


# ---------------------------------------------------------------------------
# S(n, k) lower bounds

# Best values reported with the 8-plane Q_10 construction (n = 5..11, k = 4..10).
_PUBLISHED_BEST = {
    5: {4: 78, 5: 80},
    6: {4: 184, 5: 192, 6: 192},
    7: {4: 410, 5: 440, 6: 448, 7: 448},
    8: {4: 920, 5: 980, 6: 1018, 7: 1024, 8: 1024},
    9: {4: 1974, 5: 2184, 6: 2266, 7: 2298, 8: 2304, 9: 2304},
    10: {4: 4312, 5: 4704, 6: 4998, 7: 5088, 8: 5120, 9: 5120, 10: 5120},
    11: {4: 9072, 5: 10248, 6: 10816, 7: 11128, 8: 11240, 9: 11264, 10: 11264},
}
# Same source, n = k + 3.
_PUBLISHED_KPLUS3 = {(12, 9): 24552, (13, 10): 53224, (14, 11): 114666, (15, 12): 245748}
# Best known before that work; (4, 5) was left blank.
_PRIOR = {
    3: {1: 6, 2: 10, 3: 12},
    4: {1: 12, 2: 24, 3: 30, 4: 32},
    5: {1: 30, 2: 54, 3: 70, 4: 78, 5: 80},
    6: {1: 60, 2: 120, 3: 160, 4: 184, 5: 192, 6: 192},
    7: {1: 140, 2: 260, 3: 350, 4: 410, 5: 434, 6: 448, 7: 448},
    8: {1: 280, 2: 560, 3: 770, 4: 908, 5: 980, 6: 1008, 7: 1024, 8: 1024},
}
# Earlier tabu-search results, kept for comparison.
_TABU = {
    5: {4: 78, 5: 80},
    6: {4: 184, 5: 192, 6: 192},
    7: {4: 410, 5: 440, 6: 448, 7: 448},
    8: {4: 920, 5: 980, 6: 1016, 7: 1024, 8: 1024},
    9: {4: 1974, 5: 2184, 6: 2254, 7: 2298, 8: 2304, 9: 2304},
    10: {4: 4312, 5: 4704, 6: 4984, 7: 5064, 8: 5114, 9: 5120, 10: 5120},
    11: {4: 9072, 5: 10052, 6: 10536, 7: 10844, 8: 11042, 9: 11258, 10: 11264, 11: 11264},
}
_TABU_LARGE = {(13, 10): 53008, (14, 11): 114286, (15, 12): 245252, (16, 13): 523430, (17, 14): 1114088}


def _flatten(table: dict) -> dict[tuple[int, int], int]:
    return {(n, k): v for n, row in table.items() for k, v in row.items()}


PUBLISHED_TABLES: dict[str, dict[tuple[int, int], int]] = {
    "best": {**_flatten(_PUBLISHED_BEST), **_PUBLISHED_KPLUS3},
    "prior": _flatten(_PRIOR),
    "tabu": {**_flatten(_TABU), **_TABU_LARGE},
}


@dataclass(frozen=True)
class BoundEntry:
    n: int
    k: int
    value: int
    provenance: str  # "paper-table" or "locally-discovered"
    table: str | None = None  # which published table the value comes from

    def to_dict(self) -> dict:
        return {"n": self.n, "k": self.k, "value": self.value, "provenance": self.provenance, "table": self.table}


class BoundTable:
    """Published values (read-only) plus a locally discovered layer."""

    def __init__(self):
        self._local: dict[tuple[int, int], int] = {}
        self._lock = threading.Lock()

    @property
    def base_values(self) -> dict[int, int]:
        return dict(BASE_BOUNDS)

    def published_entry(self, n: int, k: int) -> BoundEntry | None:
        hits = [(v[(n, k)], name) for name, v in PUBLISHED_TABLES.items() if (n, k) in v]
        if not hits:
            return None
        # highest value; on ties prefer the order best > prior > tabu
        order = list(PUBLISHED_TABLES)
        value, name = max(hits, key=lambda h: (h[0], -order.index(h[1])))
        return BoundEntry(n, k, value, "paper-table", name)

    def lookup(self, n: int, k: int) -> BoundEntry:
        published = self.published_entry(n, k)
        with self._lock:
            local = self._local.get((n, k))
        if local is not None and (published is None or local > published.value):
            return BoundEntry(n, k, local, "locally-discovered")
        if published is None:
            raise NotFound(f"no known S({n},{k}) value")
        return published

    def record_local(self, n: int, k: int, value: int) -> bool:
        """Store ``value`` if it beats everything known; returns whether it was stored."""
        if not 0 <= value <= n * (1 << (n - 1)):
            raise InvalidInput(f"{value} is not a possible edge count for Q_{n}")
        published = self.published_entry(n, k)
        with self._lock:
            current = max(self._local.get((n, k), -1), published.value if published else -1)
            if value > current:
                self._local[(n, k)] = value
                return True
        return False

    def rows(self, n: int | None = None, k: int | None = None) -> list[dict]:
        out = []
        keys = set()
        for name, table in PUBLISHED_TABLES.items():
            keys.update(table)
        keys.update(self._local)
        for nn, kk in sorted(keys):
            if (n is not None and nn != n) or (k is not None and kk != k):
                continue
            row = {"n": nn, "k": kk, "total": nn * (1 << (nn - 1))}
            for name, table in PUBLISHED_TABLES.items():
                if (nn, kk) in table:
                    row[name] = table[(nn, kk)]
            if (nn, kk) in self._local:
                row["local"] = self._local[(nn, kk)]
            best = self.lookup(nn, kk)
            row["best"] = best.value
            row["provenance"] = best.provenance
            out.append(row)
        return out

    def save_local(self, path) -> None:
        with self._lock:
            data = [{"n": n, "k": k, "value": v} for (n, k), v in sorted(self._local.items())]
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(data, fh, indent=1)

    def load_local(self, path) -> None:
        with open(path, encoding="utf-8") as fh:
            for row in json.load(fh):
                self.record_local(int(row["n"]), int(row["k"]), int(row["value"]))


DEFAULT_TABLE = BoundTable()


def lookup_snk(n: int, k: int, table: BoundTable | None = None) -> BoundEntry:
    return (table or DEFAULT_TABLE).lookup(n, k)


def paterson_bound(n: int) -> int:
    """The earlier ceil(5n/6) upper bound, for comparison."""
    return math.ceil(5 * n / 6)
