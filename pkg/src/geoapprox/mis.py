"""Maximum (weight) independent set: rounding with heaviest representatives,
best-level selection over divide-and-conquer trees, boxes and fat objects."""

from __future__ import annotations

import random
from typing import Iterable, Sequence

from .divide import DivideTree, StabbingGrid
from .fat import FatForest, cell_signature
from .geom import GeomObject, intersects, linf_diameter, max_depth
from .mps import ClassIndex, PreconditionError, _index, check_fat
from .oracle import mis_on_graph
from .solutions import ISolution, adjacency


def _heavier(a: GeomObject, b: GeomObject) -> bool:
    return a.weight > b.weight


def round_select_representatives(S: Sequence[GeomObject], grid: StabbingGrid) -> ClassIndex:
    """Classes as for piercing; the representative is the heaviest member
    (ties go to the smaller id)."""
    for o in S:
        if not grid.stabbed(o):
            raise PreconditionError(f"object {o.id} is not stabbed on every axis")
    return _index(S, grid.class_key, _heavier)


# ---------------------------------------------------------------- oracles

class ExactMISOracle:
    """Per-component branch and bound; weight-greedy beyond ``cap`` objects or
    when the node cap stops the search (the result is then flagged inexact)."""

    ratio = 1.0

    def __init__(self, weighted: bool = False, cap: int = 64, node_cap: int = 200_000):
        self.weighted = weighted
        self.cap = cap
        self.node_cap = node_cap

    def solve(self, objs: Sequence[GeomObject]) -> ISolution:
        objs = list(objs)
        by_id = {o.id: o for o in objs}
        if len(objs) > self.cap:
            return greedy_mis(objs, self.weighted)
        adj = adjacency(objs)
        w = {o.id: (o.weight if self.weighted else 1.0) for o in objs}
        ids, exact = mis_on_graph(adj, w, None, self.node_cap)
        return ISolution.of(ids, by_id, self.weighted, exact=exact)


class GreedyMISOracle:
    ratio = float("inf")

    def __init__(self, weighted: bool = False):
        self.weighted = weighted

    def solve(self, objs: Sequence[GeomObject]) -> ISolution:
        return greedy_mis(list(objs), self.weighted)


def greedy_mis(objs: Sequence[GeomObject], weighted: bool = False) -> ISolution:
    """Heaviest first (weighted) or smallest first (unweighted), skipping conflicts."""
    if weighted:
        order = sorted(objs, key=lambda o: (-o.weight, linf_diameter(o), o.id))
    else:
        order = sorted(objs, key=lambda o: (linf_diameter(o), o.id))
    by_id = {o.id: o for o in objs}
    adj = adjacency(objs)
    chosen, blocked = [], set()
    for o in order:
        if o.id not in blocked:
            chosen.append(o.id)
            blocked |= adj[o.id]
            blocked.add(o.id)
    return ISolution.of(chosen, by_id, weighted, exact=False)


def greedy_fat_mis(S: Sequence[GeomObject], weighted: bool = False, cap: int = 64) -> ISolution:
    """Smallest-first greedy when unweighted. Weighted: exact under ``cap``,
    heaviest-first greedy above it."""
    S = list(S)
    if weighted and len(S) <= cap:
        return ExactMISOracle(True, cap).solve(S)
    return greedy_mis(S, weighted)


def make_oracle(name: str, weighted: bool = False, cap: int = 64):
    if name == "exact":
        return ExactMISOracle(weighted, cap)
    if name == "greedy":
        return GreedyMISOracle(weighted)
    raise ValueError(f"unknown oracle {name!r}")


# ---------------------------------------------------------------- stabbed rectangles

def mis_stabbed_rects(S: Sequence[GeomObject], grid: StabbingGrid, oracle) -> ISolution:
    """Solve the representatives and return the oracle's answer unchanged."""
    S = list(S)
    if not S:
        return ISolution(frozenset(), 0)
    ci = round_select_representatives(S, grid)
    by_id = {o.id: o for o in S}
    sol = oracle.solve([by_id[i] for i in ci.representatives()])
    sol.counters = {**sol.counters, "classes": len(ci)}
    return sol


def depth_of_representatives(I: Iterable[int], ci: ClassIndex, objs_by_id: dict) -> int:
    reps = {ci.rep[ci.key_of[i]] for i in I}
    return max_depth([objs_by_id[r] for r in sorted(reps)])[0]


def random_Z_filter(I: Iterable[int], ci: ClassIndex, grid: StabbingGrid,
                    rng: random.Random) -> set[int]:
    """Keep representatives of members whose low slab is in a random Z and
    whose high slab is not, on both axes; Z holds each slab with probability 1/2."""
    zs = [{i for i in range(len(ln) + 1) if rng.random() < 0.5} for ln in grid.lines]
    out = set()
    for s in I:
        key = ci.key_of[s]
        if all(lo in z and hi not in z for (lo, hi), z in zip(key, zs)):
            out.add(ci.rep[key])
    return out


# ---------------------------------------------------------------- trees

def complete_independent(ids: Iterable[int], objs_by_id: dict, weighted: bool = False) -> list[int]:
    """Extend an independent set greedily with every live object that meets
    no chosen one (heaviest first when weighted, else smallest first)."""
    chosen = [objs_by_id[i] for i in ids]
    taken = {o.id for o in chosen}
    if weighted:
        order = sorted(objs_by_id.values(), key=lambda o: (-o.weight, linf_diameter(o), o.id))
    else:
        order = sorted(objs_by_id.values(), key=lambda o: (linf_diameter(o), o.id))
    for o in order:
        if o.id not in taken and not any(intersects(o, c) for c in chosen):
            chosen.append(o)
            taken.add(o.id)
    return sorted(taken)


def _completed(level_ids, level_val, objs_by_id, weighted, counters) -> ISolution:
    ids = complete_independent(level_ids, objs_by_id, weighted)
    return ISolution.of(ids, objs_by_id, weighted, exact=False,
                        counters={**counters, "level_value": level_val})


def _tree_solution(tree: DivideTree, weighted: bool) -> ISolution:
    val, ids = tree.best_levels(lambda s: s.value, lambda s: s.ids)
    return _completed(ids, val, tree.live, weighted, dict(tree.counters))


def rect_schedule(d: int, b: int) -> tuple[list, tuple | None]:
    """Stage schedule and leaf-grid stages for boxes in dimension d."""
    if b < 2:
        raise ValueError("b must be at least 2")
    if d == 2:
        return [(0, b), (1, b)], None
    # binary splits on the extra axes, then the planar stages
    return [(k, 2) for k in range(2, d)] + [(0, b), (1, b)], (d - 2, d - 1)


def _rect_tree(S, b, oracle, d) -> DivideTree:
    schedule, stages = rect_schedule(d, b)
    return DivideTree(S, schedule, lambda objs, grid: mis_stabbed_rects(objs, grid, oracle),
                      leaf_stages=stages)


def mis_rects(S: Sequence[GeomObject], b: int, oracle=None, weighted: bool = False) -> ISolution:
    """Best single level of the interval tree, nested per stage."""
    S = list(S)
    if S and S[0].dim != 2:
        raise ValueError("mis_rects expects rectangles; use mis_boxes_highdim for d >= 3")
    oracle = oracle or ExactMISOracle(weighted)
    return _tree_solution(_rect_tree(S, b, oracle, 2), weighted)


def mis_boxes_highdim(S: Sequence[GeomObject], b: int, oracle=None,
                      weighted: bool = False) -> ISolution:
    """Binary median splits on axes beyond the second, planar solver below.

    Boxes reaching a leaf all cross one hyperplane per extra axis, so two of
    them intersect exactly when their projections to the first two axes do.
    """
    S = list(S)
    if not S:
        return ISolution(frozenset(), 0)
    d = S[0].dim
    if d < 3:
        raise ValueError("mis_boxes_highdim needs d >= 3")
    oracle = oracle or ExactMISOracle(weighted)
    return _tree_solution(_rect_tree(S, b, oracle, d), weighted)


class DynMISRects:
    def __init__(self, b: int, oracle=None, weighted: bool = False, d: int = 2,
                 objs: Sequence[GeomObject] = ()):
        self.weighted = weighted
        self.tree = _rect_tree(list(objs), b, oracle or ExactMISOracle(weighted), d)

    def insert(self, o: GeomObject):
        self.tree.insert(o)

    def delete(self, oid: int):
        self.tree.delete(oid)

    def live(self) -> list[GeomObject]:
        return list(self.tree.live.values())

    def current(self) -> ISolution:
        return _tree_solution(self.tree, self.weighted)


# ---------------------------------------------------------------- fat objects

def mis_fat_boundary(S: Sequence[GeomObject], cells, c0: float, oracle,
                     weighted: bool = False) -> ISolution:
    """Objects meeting two or more cells, classed by signature; the heaviest
    member of each class goes to the oracle."""
    S = list(S)
    if not S:
        return ISolution(frozenset(), 0)
    sig = {}
    for o in S:
        s = cell_signature(o, cells)
        if len(s) < 2:
            raise PreconditionError(f"object {o.id} meets no cell boundary")
        sig[o.id] = s
    ci = _index(S, lambda o: sig[o.id], _heavier)
    by_id = {o.id: o for o in S}
    sol = oracle.solve([by_id[i] for i in ci.representatives()])
    sol.counters = {**sol.counters, "classes": len(ci)}
    return sol


def _fat_forest(S, b, c0, oracle, weighted, d=None, domain=None) -> FatForest:
    return FatForest(S, b, c0,
                     node_solver=lambda objs, cells: mis_fat_boundary(objs, cells, c0, oracle, weighted),
                     leaf_solver=oracle.solve,
                     fallback_solver=lambda objs: greedy_fat_mis(objs, weighted),
                     d=d, domain=domain)


def forest_best(forest: FatForest, weighted: bool) -> ISolution:
    """Best level of the best shift, or the fallback group's answer."""
    best_val, best_ids, best_src = 0, frozenset(), None
    for j in range(len(forest.trees)):
        for depth, nodes in sorted(forest.levels(j).items()):
            ids = set()
            for nd in nodes:
                if nd.solution is not None:
                    ids |= nd.solution.ids
            val = sum(forest.live[i].weight for i in ids) if weighted else len(ids)
            if val > best_val:
                best_val, best_ids, best_src = val, frozenset(ids), (j, depth)
    fb = forest.fallback_solution
    if fb is not None and fb.value > best_val:
        best_val, best_ids, best_src = fb.value, fb.ids, ("fallback", 0)
    return _completed(best_ids, best_val, forest.live, weighted,
                      {**forest.counters, "source": best_src})


def mis_fat(S: Sequence[GeomObject], b: int, c0: float | None = None, oracle=None,
            weighted: bool = False) -> ISolution:
    S = list(S)
    if not S:
        return ISolution(frozenset(), 0)
    check_fat(S)
    c0 = 4 * (S[0].dim + 1) if c0 is None else c0
    oracle = oracle or ExactMISOracle(weighted)
    return forest_best(_fat_forest(S, b, c0, oracle, weighted), weighted)


class DynMISFat:
    def __init__(self, b: int, c0: float | None = None, oracle=None, weighted: bool = False,
                 d: int = 2, domain: tuple | None = None, objs: Sequence[GeomObject] = ()):
        check_fat(objs)
        c0 = 4 * (d + 1) if c0 is None else c0
        self.weighted = weighted
        domain = domain or ((0.0,) * d, 1.0)
        self.forest = _fat_forest(list(objs), b, c0, oracle or ExactMISOracle(weighted),
                                  weighted, d, domain)

    def insert(self, o: GeomObject):
        check_fat([o])
        self.forest.insert(o)

    def delete(self, oid: int):
        self.forest.delete(oid)

    def live(self) -> list[GeomObject]:
        return list(self.forest.live.values())

    def current(self) -> ISolution:
        return forest_best(self.forest, self.weighted)
