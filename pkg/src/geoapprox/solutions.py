"""Solution containers, intersection graphs and validators."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .geom import Box, GeomObject, contains_point, intersects


def edge_allowed(a: GeomObject, b: GeomObject, bipartite: bool) -> bool:
    if bipartite and (a.color is None or a.color == b.color):
        return False
    return intersects(a, b)


def adjacency(objs: Sequence[GeomObject], bipartite: bool = False) -> dict[int, set[int]]:
    """Intersection graph as id -> set of neighbor ids (pair scan)."""
    adj: dict[int, set[int]] = {o.id: set() for o in objs}
    lst = list(objs)
    for i, a in enumerate(lst):
        for b in lst[i + 1:]:
            if edge_allowed(a, b, bipartite):
                adj[a.id].add(b.id)
                adj[b.id].add(a.id)
    return adj


def edges(adj: dict[int, set[int]]) -> list[tuple[int, int]]:
    return sorted((u, v) for u, nb in adj.items() for v in nb if u < v)


@dataclass
class PiercingSolution:
    points: list
    exact: bool = True  # False when produced by a fallback or an upper-bound oracle
    counters: dict = field(default_factory=dict)

    @property
    def value(self) -> int:
        return len(self.points)


@dataclass
class ISolution:
    ids: frozenset
    value: float
    exact: bool = True
    counters: dict = field(default_factory=dict)

    @classmethod
    def of(cls, ids: Iterable[int], objs_by_id: dict, weighted: bool = False, **kw) -> "ISolution":
        ids = frozenset(ids)
        val = sum(objs_by_id[i].weight for i in ids) if weighted else len(ids)
        return cls(ids, val, **kw)


@dataclass
class VCSolution:
    ids: frozenset
    counters: dict = field(default_factory=dict)

    @property
    def value(self) -> int:
        return len(self.ids)


class Matching:
    """Symmetric partner map over object ids."""

    def __init__(self, pairs: Iterable[tuple[int, int]] = ()):
        self.partner: dict[int, int] = {}
        for u, v in pairs:
            self.add(u, v)

    def add(self, u: int, v: int) -> None:
        if u == v or u in self.partner or v in self.partner:
            raise ValueError(f"cannot match {u}-{v}")
        self.partner[u] = v
        self.partner[v] = u

    def remove(self, u: int) -> int | None:
        v = self.partner.pop(u, None)
        if v is not None:
            del self.partner[v]
        return v

    def mate(self, u: int) -> int | None:
        return self.partner.get(u)

    def pairs(self) -> list[tuple[int, int]]:
        return sorted((u, v) for u, v in self.partner.items() if u < v)

    def copy(self) -> "Matching":
        m = Matching()
        m.partner = dict(self.partner)
        return m

    def augment(self, path: Sequence[int]) -> None:
        """Flip an augmenting path v0 u1 v1 ... u_{k} given as a vertex list."""
        if len(path) % 2:
            raise ValueError("augmenting path needs an even vertex count")
        for i in range(1, len(path) - 1, 2):
            if self.partner.get(path[i]) != path[i + 1]:
                raise ValueError("path does not alternate with the matching")
        if path[0] in self.partner or path[-1] in self.partner:
            raise ValueError("path endpoints must be exposed")
        for i in range(1, len(path) - 1, 2):
            self.remove(path[i])
        for i in range(0, len(path), 2):
            self.add(path[i], path[i + 1])

    @property
    def size(self) -> int:
        return len(self.partner) // 2

    def __len__(self) -> int:
        return self.size


# ---------------------------------------------------------------- validators

def pierces_all(objs: Iterable[GeomObject], points: Sequence) -> list[int]:
    """Ids of objects containing none of the points (empty list means valid).

    A vectorised prefilter proposes a containing point; the exact scalar
    predicate has the final word.
    """
    objs = list(objs)
    if not points:
        return [o.id for o in objs]
    P = np.asarray(points, dtype=float)
    bad = []
    for o in objs:
        s = o.shape
        if isinstance(s, Box):
            hit = np.all((P >= np.asarray(s.lo)) & (P <= np.asarray(s.hi)), axis=1)
        else:
            diff = P - np.asarray(s.center)
            hit = (diff * diff).sum(axis=1) <= s.radius * s.radius * (1 + 1e-9)
        idx = np.flatnonzero(hit)
        if any(contains_point(o, points[i]) for i in idx[:8]):
            continue
        if not any(contains_point(o, p) for p in points):
            bad.append(o.id)
    return bad


def independence_violations(objs_by_id: dict, ids: Iterable[int]) -> list[tuple[int, int]]:
    ids = sorted(ids)
    bad = []
    for i, a in enumerate(ids):
        for b in ids[i + 1:]:
            if intersects(objs_by_id[a], objs_by_id[b]):
                bad.append((a, b))
    return bad


def uncovered_edges(objs: Sequence[GeomObject], cover: Iterable[int],
                    bipartite: bool = False) -> list[tuple[int, int]]:
    cover = set(cover)
    rest = [o for o in objs if o.id not in cover]
    return edges(adjacency(rest, bipartite))


def matching_violations(objs_by_id: dict, m: Matching, bipartite: bool = False) -> list[str]:
    bad = []
    for u, v in m.partner.items():
        if m.partner.get(v) != u:
            bad.append(f"asymmetric {u}->{v}")
        if u not in objs_by_id or v not in objs_by_id:
            bad.append(f"dead id in pair {u}-{v}")
            continue
        if not edge_allowed(objs_by_id[u], objs_by_id[v], bipartite):
            bad.append(f"pair {u}-{v} is not an edge")
    return bad
