"""Multi-level b-ary interval trees over axis-aligned boxes.

A stage handles one axis. Each node picks dividing hyperplanes along its axis
so every slab holds few box endpoints; boxes crossing a divider are stored at
the node and handed to the next stage together with the dividers, the rest
recurse into their slab. After the last stage every box is stabbed on each
scheduled axis, and a leaf solver handles the stabbed subproblem.

Leaf results are combined either by union over all nodes (piercing) or by
picking the best level of every stage tree (independent set), where nodes at
one level have disjoint slabs so their results can be unioned.
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .geom import GeomObject, bbox


@dataclass(frozen=True)
class StabbingGrid:
    """Sorted hyperplane coordinates per axis; ``axis_ids`` names the object axes."""

    lines: tuple
    axis_ids: tuple = ()

    def __post_init__(self):
        if not self.axis_ids:
            object.__setattr__(self, "axis_ids", tuple(range(len(self.lines))))
        if len(self.axis_ids) != len(self.lines):
            raise ValueError("axis_ids and lines differ in length")
        for ln in self.lines:
            if any(a >= b for a, b in zip(ln, ln[1:])):
                raise ValueError("grid coordinates must be strictly increasing")

    def slab(self, k: int, x: float) -> int:
        """Index of the half-open slab of axis position k containing x."""
        return bisect_right(self.lines[k], x)

    def slab_bounds(self, k: int, i: int) -> tuple:
        ln = self.lines[k]
        return ((ln[i - 1],) if i >= 1 else ()) + ((ln[i],) if i < len(ln) else ())

    def stabbed(self, o) -> bool:
        lo, hi = bbox(o)
        for k, ax in enumerate(self.axis_ids):
            ln = self.lines[k]
            j = bisect_left(ln, lo[ax])
            if j == len(ln) or ln[j] > hi[ax]:
                return False
        return True

    def class_key(self, o) -> tuple:
        lo, hi = bbox(o)
        return tuple((self.slab(k, lo[ax]), self.slab(k, hi[ax]))
                     for k, ax in enumerate(self.axis_ids))

    @property
    def class_bound(self) -> int:
        return math.prod((len(ln) + 1) ** 2 for ln in self.lines)


def choose_dividers(objs: Sequence[GeomObject], axis: int, fanout: int) -> tuple:
    """fanout-1 quantiles of the endpoint multiset along ``axis`` (deduplicated)."""
    coords = []
    for o in objs:
        lo, hi = bbox(o)
        coords.append(lo[axis])
        coords.append(hi[axis])
    coords.sort()
    m = len(coords)
    if m == 0:
        return ()
    picks = sorted({coords[min(m - 1, (i * m) // fanout)] for i in range(1, fanout)})
    return tuple(picks)


def _crosses(lo: float, hi: float, dividers: tuple) -> bool:
    j = bisect_left(dividers, lo)
    return j < len(dividers) and dividers[j] <= hi


class Leaf:
    def __init__(self, tree: "DivideTree", objs: Iterable[GeomObject], lines: tuple, levels: tuple):
        self.tree = tree
        self.objs: dict[int, GeomObject] = {o.id: o for o in objs}
        self.grid = StabbingGrid(tuple(lines[i] for i in tree.leaf_stages),
                                 tuple(tree.schedule[i][0] for i in tree.leaf_stages))
        self.levels = levels
        self.solution = None
        self.solve()

    def solve(self):
        objs = sorted(self.objs.values(), key=lambda o: o.id)
        self.solution = self.tree.leaf_solver(objs, self.grid) if objs else None
        self.tree.counters["leaf_solves"] += 1

    def insert(self, o):
        self.objs[o.id] = o
        self.solve()

    def delete(self, o):
        del self.objs[o.id]
        self.solve()

    def all_objects(self) -> list[GeomObject]:
        return list(self.objs.values())

    def leaves(self):
        if self.objs:
            yield self


class Node:
    def __init__(self, tree: "DivideTree", objs: list[GeomObject], stage: int, lines: tuple,
                 levels: tuple, depth: int):
        self.tree = tree
        self.stage = stage
        self.lines = lines
        self.levels = levels
        self.depth = depth
        self._build(objs)

    def _build(self, objs: list[GeomObject]):
        tree = self.tree
        axis, fan = tree.schedule[self.stage]
        self.axis, self.fan = axis, fan
        self.dividers = choose_dividers(objs, axis, fan)
        self.n_build = len(objs)
        self.updates = 0
        stabbed, groups = [], {}
        for o in objs:
            lo, hi = bbox(o)
            if _crosses(lo[axis], hi[axis], self.dividers):
                stabbed.append(o)
            else:
                groups.setdefault(bisect_left(self.dividers, lo[axis]), []).append(o)
        self.stored = tree.make_stage(stabbed, self.stage + 1, self.lines + (self.dividers,),
                                      self.levels + (self.depth,))
        self.children: dict[int, Node] = {
            k: Node(tree, g, self.stage, self.lines, self.levels, self.depth + 1)
            for k, g in sorted(groups.items())}

    def _route(self, o) -> int | None:
        lo, hi = bbox(o)
        if _crosses(lo[self.axis], hi[self.axis], self.dividers):
            return None
        return bisect_left(self.dividers, lo[self.axis])

    def _tick(self) -> bool:
        self.updates += 1
        if self.updates >= math.ceil(max(self.n_build, 1) / self.fan):
            self.tree.counters["rebuilds"] += 1
            return True
        return False

    def insert(self, o):
        if self._tick():
            self._build(self.all_objects() + [o])
            return
        k = self._route(o)
        if k is None:
            if self.stored is None:
                self.stored = self.tree.make_stage([o], self.stage + 1, self.lines + (self.dividers,),
                                                   self.levels + (self.depth,))
            else:
                self.stored.insert(o)
        elif k in self.children:
            self.children[k].insert(o)
        else:
            self.children[k] = Node(self.tree, [o], self.stage, self.lines, self.levels,
                                    self.depth + 1)

    def delete(self, o):
        if self._tick():
            self._build([x for x in self.all_objects() if x.id != o.id])
            return
        k = self._route(o)
        if k is None:
            self.stored.delete(o)
        else:
            self.children[k].delete(o)

    def all_objects(self) -> list[GeomObject]:
        out = self.stored.all_objects() if self.stored is not None else []
        for ch in self.children.values():
            out.extend(ch.all_objects())
        return out

    def nodes_by_depth(self, acc: dict[int, list] | None = None) -> dict[int, list]:
        acc = {} if acc is None else acc
        acc.setdefault(self.depth, []).append(self)
        for k in sorted(self.children):
            self.children[k].nodes_by_depth(acc)
        return acc

    def leaves(self):
        if self.stored is not None:
            yield from self.stored.leaves()
        for k in sorted(self.children):
            yield from self.children[k].leaves()


class DivideTree:
    """Static or dynamic multi-stage tree.

    ``schedule`` lists (axis, fanout) per stage; ``leaf_stages`` picks which
    stages' dividers form the leaf grid (default: all).
    """

    def __init__(self, objs: Sequence[GeomObject], schedule: Sequence[tuple[int, int]],
                 leaf_solver: Callable, leaf_stages: Sequence[int] | None = None):
        for _, fan in schedule:
            if fan < 2:
                raise ValueError("fan-out must be at least 2")
        self.schedule = list(schedule)
        self.leaf_solver = leaf_solver
        self.leaf_stages = tuple(range(len(schedule)) if leaf_stages is None else leaf_stages)
        self.counters = {"leaf_solves": 0, "rebuilds": 0}
        self.live: dict[int, GeomObject] = {}
        for o in objs:
            if o.id in self.live:
                raise ValueError(f"duplicate id {o.id}")
            self.live[o.id] = o
        self.root = self.make_stage(list(objs), 0, (), ())

    def make_stage(self, objs: list[GeomObject], stage: int, lines: tuple, levels: tuple):
        if stage == len(self.schedule):
            return Leaf(self, objs, lines, levels)
        if not objs:
            return None
        return Node(self, objs, stage, lines, levels, 0)

    # dynamic interface
    def insert(self, o: GeomObject):
        if o.id in self.live:
            raise ValueError(f"id {o.id} already present")
        self.live[o.id] = o
        if self.root is None:
            self.root = self.make_stage([o], 0, (), ())
        else:
            self.root.insert(o)

    def delete(self, oid: int):
        if oid not in self.live:
            raise KeyError(f"unknown id {oid}")
        o = self.live.pop(oid)
        self.root.delete(o)

    def leaves(self) -> list[Leaf]:
        return [] if self.root is None else list(self.root.leaves())

    # aggregation
    def union_solutions(self) -> list:
        return [lf.solution for lf in self.leaves() if lf.solution is not None]

    def best_levels(self, value: Callable, ids: Callable) -> tuple[float, frozenset]:
        return _best(self.root, value, ids)


def _best(stage, value, ids) -> tuple[float, frozenset]:
    """Best-of-levels value and chosen ids for a stage tree (nested)."""
    if stage is None:
        return 0, frozenset()
    if isinstance(stage, Leaf):
        if stage.solution is None:
            return 0, frozenset()
        return value(stage.solution), frozenset(ids(stage.solution))
    best_val, best_ids = None, frozenset()
    for depth, nodes in sorted(stage.nodes_by_depth().items()):
        tot, chosen = 0, set()
        for nd in nodes:
            v, s = _best(nd.stored, value, ids)
            tot += v
            chosen |= s
        if best_val is None or tot > best_val:
            best_val, best_ids = tot, frozenset(chosen)
    return best_val, best_ids


def level_table(stage, value) -> list[list[float]]:
    """Per-level sums of nested best values, for recomputation checks."""
    if stage is None or isinstance(stage, Leaf):
        return []
    rows = []
    for depth, nodes in sorted(stage.nodes_by_depth().items()):
        rows.append([_best(nd.stored, value, lambda s: ())[0] for nd in nodes])
    return rows
