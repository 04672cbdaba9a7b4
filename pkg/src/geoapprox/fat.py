"""Shifted quadtree-partition trees over fat objects, static and dynamic.

Objects are mapped affinely into [0, 1/2)^d and copied under each diagonal
shift; every object joins the tree of the first shift under which it is
c0-good (or a fallback group when none is). Inside a tree, each node splits
R^d into at most b cells by partitioning the object centers; objects meeting
two or more cells stay at the node, the rest recurse into their cell.
"""

from __future__ import annotations

import math
from typing import Callable, Iterable, Sequence

from .geom import Cell, GeomObject, bbox, center, is_good, quadtree_partition, shifts, translate


def cell_signature(o, cells: Sequence[Cell]) -> tuple:
    """Indices of the cells whose closure meets the object."""
    return tuple(i for i, c in enumerate(cells) if c.meets(o))


class FatNode:
    def __init__(self, forest: "FatForest", objs: list[GeomObject], depth: int):
        self.forest = forest
        self.depth = depth
        self._build(objs)

    def _build(self, objs: list[GeomObject]):
        f = self.forest
        self.n_build = len(objs)
        self.updates = 0
        self.cells = None
        self.children: dict[int, FatNode] = {}
        self.stored: dict[int, GeomObject] = {}
        cells = None
        if len(objs) > f.leaf_size:
            cells = quadtree_partition([center(o) for o in objs], f.b)
            if len(cells) <= 1:
                cells = None
        if cells is not None:
            groups: dict[int, list] = {}
            for o in objs:
                s = cell_signature(o, cells)
                if len(s) >= 2:
                    self.stored[o.id] = o
                else:
                    groups.setdefault(s[0], []).append(o)
            if not self.stored and len(groups) == 1:
                cells = None  # no progress; keep everything here
        if cells is None:
            self.stored = {o.id: o for o in objs}
        else:
            self.cells = cells
            self.children = {k: FatNode(f, g, self.depth + 1) for k, g in sorted(groups.items())}
        self.solve()

    def solve(self):
        f = self.forest
        objs = [self.stored[i] for i in sorted(self.stored)]
        if not objs:
            self.solution = None
        elif self.cells is None:
            self.solution = f.leaf_solver(objs)
        else:
            self.solution = f.node_solver(objs, self.cells)
        f.counters["node_solves"] += 1

    def _tick(self) -> bool:
        self.updates += 1
        if self.updates >= math.ceil(max(self.n_build, 1) / self.forest.b):
            self.forest.counters["rebuilds"] += 1
            return True
        return False

    def _route(self, o) -> int | None:
        s = cell_signature(o, self.cells)
        return None if len(s) >= 2 else s[0]

    def insert(self, o):
        if self._tick():
            self._build(self.all_objects() + [o])
            return
        k = None if self.cells is None else self._route(o)
        if k is None:
            self.stored[o.id] = o
            self.solve()
        elif k in self.children:
            self.children[k].insert(o)
        else:
            self.children[k] = FatNode(self.forest, [o], self.depth + 1)

    def delete(self, o):
        if self._tick():
            self._build([x for x in self.all_objects() if x.id != o.id])
            return
        if o.id in self.stored:
            del self.stored[o.id]
            self.solve()
        else:
            self.children[self._route(o)].delete(o)

    def all_objects(self) -> list[GeomObject]:
        out = list(self.stored.values())
        for ch in self.children.values():
            out.extend(ch.all_objects())
        return out

    def nodes(self):
        yield self
        for k in sorted(self.children):
            yield from self.children[k].nodes()


class FatForest:
    """One partition tree per diagonal shift plus a fallback group.

    ``node_solver(objs, cells)`` handles boundary-crossing objects at an
    internal node, ``leaf_solver(objs)`` the objects of a leaf and
    ``fallback_solver(objs)`` objects good under no shift. All solvers see
    mapped coordinates; use ``to_original`` to map points back.
    ``domain`` is (lo corner, span); None fits it to the initial objects.
    """

    def __init__(self, objs: Sequence[GeomObject], b: int, c0: float,
                 node_solver: Callable, leaf_solver: Callable, fallback_solver: Callable,
                 d: int | None = None, domain: tuple | None = None, leaf_size: int = 1):
        objs = list(objs)
        if d is None:
            d = objs[0].dim if objs else 2
        self.d = d
        self.b = max(b, 2 ** d + 2)  # fewer cells cannot split a quadtree node
        self.c0 = c0
        self.leaf_size = leaf_size
        self.node_solver, self.leaf_solver, self.fallback_solver = node_solver, leaf_solver, fallback_solver
        self.counters = {"node_solves": 0, "rebuilds": 0, "fallback_objects": 0}
        if domain is None:
            domain = _fit_domain(objs, d)
        self.lo, span = domain
        self.scale = 0.5 * 0.999 / span
        self.vs = [tuple(x / 2 for x in v) for v in shifts(d)]
        self.live: dict[int, GeomObject] = {}
        self.group: dict[int, int | None] = {}
        by_group: dict[int | None, list] = {}
        for o in objs:
            if o.id in self.live:
                raise ValueError(f"duplicate id {o.id}")
            j, m = self._place(o)
            self.live[o.id] = o
            self.group[o.id] = j
            by_group.setdefault(j, []).append(m)
        self.trees: list[FatNode | None] = [
            FatNode(self, by_group[j], 0) if j in by_group else None for j in range(len(self.vs))]
        self.fallback: dict[int, GeomObject] = {m.id: m for m in by_group.get(None, [])}
        self._solve_fallback()

    def _map(self, o: GeomObject, v) -> GeomObject:
        off = [t - a * self.scale for a, t in zip(self.lo, v)]
        return translate(o, off, self.scale)

    def to_original(self, p, j: int | None) -> tuple:
        v = self.vs[j] if j is not None else (0.0,) * self.d
        return tuple((x - t) / self.scale + a for x, t, a in zip(p, v, self.lo))

    def _place(self, o: GeomObject):
        if o.dim != self.d:
            raise ValueError(f"object {o.id} has dimension {o.dim}, expected {self.d}")
        lo, hi = bbox(o)
        base = self._map(o, (0.0,) * self.d)
        blo, bhi = bbox(base)
        if any(x < 0 or y >= 0.5 for x, y in zip(blo, bhi)):
            raise ValueError(f"object {o.id} lies outside the structure's domain")
        for j, v in enumerate(self.vs):
            m = self._map(o, v)
            if is_good(m, self.c0):
                return j, m
        return None, base

    def _solve_fallback(self):
        objs = [self.fallback[i] for i in sorted(self.fallback)]
        self.fallback_solution = self.fallback_solver(objs) if objs else None
        self.counters["fallback_objects"] = len(objs)

    def insert(self, o: GeomObject):
        if o.id in self.live:
            raise ValueError(f"id {o.id} already present")
        j, m = self._place(o)
        self.live[o.id] = o
        self.group[o.id] = j
        if j is None:
            self.fallback[o.id] = m
            self._solve_fallback()
        elif self.trees[j] is None:
            self.trees[j] = FatNode(self, [m], 0)
        else:
            self.trees[j].insert(m)

    def delete(self, oid: int):
        if oid not in self.live:
            raise KeyError(f"unknown id {oid}")
        o = self.live.pop(oid)
        j = self.group.pop(oid)
        if j is None:
            del self.fallback[oid]
            self._solve_fallback()
        else:
            self.trees[j].delete(self._map(o, self.vs[j]))

    def levels(self, j: int) -> dict[int, list[FatNode]]:
        out: dict[int, list] = {}
        if self.trees[j] is not None:
            for nd in self.trees[j].nodes():
                out.setdefault(nd.depth, []).append(nd)
        return out

    def solutions(self) -> Iterable[tuple[int, object]]:
        """(shift index, solution) for every nonempty node."""
        for j, root in enumerate(self.trees):
            if root is None:
                continue
            for nd in root.nodes():
                if nd.solution is not None:
                    yield j, nd.solution


def _fit_domain(objs: Sequence[GeomObject], d: int) -> tuple:
    if not objs:
        return (0.0,) * d, 1.0
    los = [bbox(o)[0] for o in objs]
    his = [bbox(o)[1] for o in objs]
    mn = tuple(min(p[k] for p in los) for k in range(d))
    mx = tuple(max(p[k] for p in his) for k in range(d))
    span = max(max(b - a for a, b in zip(mn, mx)), 1e-12)
    pad = 1e-9 * span  # absorbs rounding in the affine map
    return tuple(x - pad for x in mn), span + 2 * pad
