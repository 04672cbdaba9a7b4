"""Minimum piercing set: rounding to classes and divide-and-conquer trees."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Iterable, Sequence

from .divide import DivideTree, StabbingGrid
from .fat import FatForest, cell_signature
from .geom import (Box, Cell, Disk, GeomObject, bbox, center, contains_point, linf_diameter,
                   locate_cell)
from .oracle import piercing_bb
from .solutions import PiercingSolution, pierces_all

# Fat boxes must have max side <= FAT_ASPECT * min side.
FAT_ASPECT = 2.0


class PreconditionError(ValueError):
    pass


@dataclass
class ClassIndex:
    members: dict = field(default_factory=dict)  # key -> sorted list of ids
    rep: dict = field(default_factory=dict)      # key -> representative id
    key_of: dict = field(default_factory=dict)   # id -> key

    def representatives(self) -> list[int]:
        return [self.rep[k] for k in sorted(self.rep)]

    def __len__(self) -> int:
        return len(self.members)


def _index(S: Iterable[GeomObject], key: Callable, better: Callable) -> ClassIndex:
    ci = ClassIndex()
    objs = {}
    for o in S:
        k = key(o)
        objs[o.id] = o
        ci.key_of[o.id] = k
        ci.members.setdefault(k, []).append(o.id)
    for k, ids in ci.members.items():
        ids.sort()
        r = ids[0]
        for i in ids[1:]:
            if better(objs[i], objs[r]):
                r = i
        ci.rep[k] = r
    return ci


def round_to_classes(S: Sequence[GeomObject], grid: StabbingGrid) -> ClassIndex:
    """Group stabbed boxes by the slabs their extents start and end in."""
    for o in S:
        if not grid.stabbed(o):
            raise PreconditionError(f"object {o.id} is not stabbed on every axis")
    return _index(S, grid.class_key, lambda a, b: False)


# ---------------------------------------------------------------- oracles

def box_candidates(objs: Sequence[GeomObject]) -> list[tuple]:
    """Candidate points for boxes, one per distinct set of containing boxes.

    Some optimal piercing set uses points whose k-th coordinate is the lower
    k-th bound of a box containing them, so axis-by-axis enumeration over the
    lower bounds of still-active boxes is exhaustive.
    """
    if not objs:
        return []
    d = objs[0].dim
    seen: dict[frozenset, tuple] = {}

    def rec(active: list, prefix: tuple):
        k = len(prefix)
        if k == d:
            key = frozenset(o.id for o in active)
            if key not in seen:
                seen[key] = prefix
            return
        for c in sorted({o.shape.lo[k] for o in active}):
            nxt = [o for o in active if o.shape.lo[k] <= c <= o.shape.hi[k]]
            rec(nxt, prefix + (c,))

    rec(list(objs), ())
    # drop candidates dominated by a superset
    keys = sorted(seen, key=len, reverse=True)
    kept = []
    for key in keys:
        if not any(key <= big for big in kept):
            kept.append(key)
    return [seen[k] for k in kept]


def fat_candidates(objs: Sequence[GeomObject]) -> list[tuple]:
    from .geom import candidate_points
    pts = candidate_points(objs)
    pts.extend(center(o) for o in objs)
    return sorted(set(pts))


class ExactMPSOracle:
    """Branch and bound over candidate points; greedy beyond ``cap`` objects."""

    ratio = 1.0

    def __init__(self, cap: int = 64, node_cap: int = 200_000):
        self.cap = cap
        self.node_cap = node_cap

    def solve(self, objs: Sequence[GeomObject]) -> PiercingSolution:
        objs = list(objs)
        if not objs:
            return PiercingSolution([])
        boxes = all(isinstance(o.shape, Box) for o in objs)
        cands = box_candidates(objs) if boxes else fat_candidates(objs)
        if len(objs) > self.cap:
            return _greedy_cover(objs, cands)
        pts, exact = piercing_bb(objs, cands, self.node_cap)
        return PiercingSolution(pts, exact=exact and boxes)


class GreedyMPSOracle:
    ratio = math.inf

    def solve(self, objs: Sequence[GeomObject]) -> PiercingSolution:
        objs = list(objs)
        if not objs:
            return PiercingSolution([])
        boxes = all(isinstance(o.shape, Box) for o in objs)
        if not boxes:
            return greedy_fat_piercing(objs)
        return _greedy_cover(objs, box_candidates(objs))


def _greedy_cover(objs, cands) -> PiercingSolution:
    masks = []
    for p in cands:
        masks.append(sum(1 << i for i, o in enumerate(objs) if contains_point(o, p)))
    unc = (1 << len(objs)) - 1
    pts = []
    while unc:
        j = max(range(len(cands)), key=lambda t: (bin(masks[t] & unc).count("1"), -t))
        if masks[j] & unc == 0:
            raise ValueError("candidate set cannot pierce every object")
        pts.append(cands[j])
        unc &= ~masks[j]
    return PiercingSolution(pts, exact=False)


def make_oracle(name: str, cap: int = 64):
    if name == "exact":
        return ExactMPSOracle(cap)
    if name == "greedy":
        return GreedyMPSOracle()
    raise ValueError(f"unknown oracle {name!r}")


# ---------------------------------------------------------------- boxes

def _dedupe(points: Iterable[tuple]) -> list[tuple]:
    return list(dict.fromkeys(points))


def grid_cell_corners(p, grid: StabbingGrid) -> list[tuple]:
    """Finite corners of the closed grid cell containing p (at most 2^d)."""
    per_axis = [grid.slab_bounds(k, grid.slab(k, p[ax])) for k, ax in enumerate(grid.axis_ids)]
    return [tuple(c) for c in product(*per_axis)]


def pierce_stabbed_boxes(S: Sequence[GeomObject], grid: StabbingGrid, oracle) -> PiercingSolution:
    """Pierce representatives with the oracle and replace each point by the
    corners of its grid cell."""
    S = list(S)
    if not S:
        return PiercingSolution([])
    if len(grid.axis_ids) != S[0].dim:
        raise ValueError("the grid must cover every axis")
    ci = round_to_classes(S, grid)
    by_id = {o.id: o for o in S}
    reps = [by_id[i] for i in ci.representatives()]
    sol = oracle.solve(reps)
    pts = _dedupe(c for p in sol.points for c in grid_cell_corners(p, grid))
    return PiercingSolution(pts, exact=False,
                            counters={"oracle_value": sol.value, "classes": len(ci)})


def pierce_boxes(S: Sequence[GeomObject], b: int, oracle=None) -> PiercingSolution:
    tree = build_box_tree(S, b, oracle)
    return _union(tree)


def build_box_tree(S: Sequence[GeomObject], b: int, oracle=None) -> DivideTree:
    if b < 2:
        raise ValueError("b must be at least 2")
    oracle = oracle or ExactMPSOracle()
    S = list(S)
    d = S[0].dim if S else 2
    return DivideTree(S, [(k, b) for k in range(d)],
                      lambda objs, grid: pierce_stabbed_boxes(objs, grid, oracle))


def _union(tree: DivideTree) -> PiercingSolution:
    sols = tree.union_solutions()
    pts = _dedupe(p for s in sols for p in s.points)
    return PiercingSolution(pts, exact=False, counters={
        "oracle_value": sum(s.counters.get("oracle_value", 0) for s in sols),
        "leaves": len(sols), **tree.counters})


class DynPierceBoxes:
    """Dynamic piercing of boxes with weight-balanced subtree rebuilding."""

    def __init__(self, b: int, oracle=None, d: int = 2, objs: Sequence[GeomObject] = ()):
        if b < 2:
            raise ValueError("b must be at least 2")
        self.b = b
        oracle = oracle or ExactMPSOracle()
        self.tree = DivideTree(list(objs), [(k, b) for k in range(d)],
                               lambda o, g: pierce_stabbed_boxes(o, g, oracle))

    def insert(self, o: GeomObject):
        self.tree.insert(o)

    def delete(self, oid: int):
        self.tree.delete(oid)

    def live(self) -> list[GeomObject]:
        return list(self.tree.live.values())

    def current(self) -> PiercingSolution:
        return _union(self.tree)


# ---------------------------------------------------------------- fat objects

def _is_fat(o) -> bool:
    s = o.shape
    if isinstance(s, Disk):
        return True
    sides = [b - a for a, b in zip(s.lo, s.hi)]
    return min(sides) > 0 and max(sides) <= FAT_ASPECT * min(sides)


def _axis_grid(lo: float, hi: float, gap: float) -> list[float]:
    if hi <= lo:
        return [lo]
    steps = max(1, math.ceil((hi - lo) / gap))
    return [lo + (hi - lo) * i / steps for i in range(steps)] + [hi]


def _dist_to_boundary(p, lo, hi) -> float:
    inside = all(a <= x <= b for a, x, b in zip(lo, p, hi))
    if inside:
        return min(min(x - a, b - x) for a, x, b in zip(lo, p, hi))
    return max(max(a - x, x - b, 0.0) for a, x, b in zip(lo, p, hi))


def lambda_box(lo: tuple, hi: tuple, dmin: float) -> list[tuple]:
    """Points piercing every disk or fat box of L-inf diameter >= dmin that
    meets the boundary of the closed box [lo, hi].

    Such an object contains an axis-parallel cube of side dmin/2 lying within
    L-inf distance 0.625*dmin of the touching point and reaching within
    dmin/4 of the box. A grid with gaps <= dmin/2 spanning the box inflated by
    dmin/4 (endpoints included) therefore has a point in every such cube; only
    grid points near the boundary are kept.
    """
    if dmin <= 0:
        raise ValueError("dmin must be positive")
    side = dmin / 2
    pad = dmin / 4
    axes = [_axis_grid(a - pad, b + pad, side) for a, b in zip(lo, hi)]
    keep = 1.25 * side
    return [p for p in product(*axes) if _dist_to_boundary(p, lo, hi) <= keep]


def lambda_points(cell: Cell, c0: float, dmin: float | None = None, floor: float = 0.0) -> list[tuple]:
    """Union of the boundary-piercing sets of the cell's outer and inner boxes.

    With ``dmin`` None each box uses its own side divided by c0, raised to
    ``floor`` when every object of interest is known to be at least that large.
    """
    pts = []
    for q in cell.boxes():
        dm = max(q.side / c0, floor) if dmin is None else dmin
        pts.extend(lambda_box(q.lo, q.hi, dm))
    return _dedupe(pts)


def pierce_boundary_fat(S: Sequence[GeomObject], cells: Sequence[Cell], c0: float,
                        oracle=None) -> PiercingSolution:
    """Pierce fat objects that each meet at least two cells of a partition."""
    S = list(S)
    if not S:
        return PiercingSolution([])
    oracle = oracle or ExactMPSOracle()
    sig = {}
    for o in S:
        s = cell_signature(o, cells)
        if len(s) < 2:
            raise PreconditionError(f"object {o.id} meets no cell boundary")
        sig[o.id] = s
    ci = _index(S, lambda o: sig[o.id], lambda a, b: False)
    by_id = {o.id: o for o in S}
    reps = [by_id[i] for i in ci.representatives()]
    sol = oracle.solve(reps)
    floor = min(linf_diameter(o) for o in S)
    per_cell: dict[int, list] = {}
    for p in sol.points:
        k = locate_cell(cells, p)
        if k not in per_cell:
            per_cell[k] = lambda_points(cells[k], c0, floor=floor)
    pts = _dedupe(p for k in sorted(per_cell) for p in per_cell[k])
    # objects outside the supported size range get a point of their own
    missed = []
    for o in S:
        if not any(contains_point(o, p) for k in sig[o.id] for p in per_cell.get(k, ())):
            missed.append(o.id)
            pts.append(center(o))
    return PiercingSolution(pts, exact=False, counters={
        "oracle_value": sol.value, "classes": len(ci), "fallback_points": len(missed),
        "max_lambda": max((len(v) for v in per_cell.values()), default=0)})


def greedy_fat_piercing(S: Sequence[GeomObject]) -> PiercingSolution:
    """Smallest-first greedy: pierce everything touching the smallest object
    with the boundary grid of its enclosing hypercube plus its center."""
    rest = sorted(S, key=lambda o: (linf_diameter(o), o.id))
    pts = []
    while rest:
        o = rest[0]
        lo, hi = bbox(o)
        side = linf_diameter(o)
        c = center(o)
        hlo = tuple(x - side / 2 for x in c)
        hhi = tuple(x + side / 2 for x in c)
        cand = [c] + (lambda_box(hlo, hhi, side) if side > 0 else [])
        # keep only candidates that pierce something not pierced yet
        for p in cand:
            hit = [r for r in rest if contains_point(r, p)]
            if hit:
                pts.append(p)
                rest = [r for r in rest if not contains_point(r, p)]
    return PiercingSolution(_dedupe(pts), exact=False)


def check_fat(S: Iterable[GeomObject]) -> None:
    for o in S:
        if not _is_fat(o):
            raise PreconditionError(f"object {o.id} is not fat")


def _fat_forest(S, b, c0, oracle, d=None, domain=None) -> FatForest:
    return FatForest(S, b, c0,
                     node_solver=lambda objs, cells: pierce_boundary_fat(objs, cells, c0, oracle),
                     leaf_solver=oracle.solve, fallback_solver=greedy_fat_piercing,
                     d=d, domain=domain)


def _forest_points(forest: FatForest) -> PiercingSolution:
    pts = []
    counters = {"oracle_value": 0, "fallback_points": 0}
    for j, sol in forest.solutions():
        counters["oracle_value"] += sol.counters.get("oracle_value", sol.value)
        counters["fallback_points"] += sol.counters.get("fallback_points", 0)
        pts.extend(forest.to_original(p, j) for p in sol.points)
    if forest.fallback_solution is not None:
        pts.extend(forest.to_original(p, None) for p in forest.fallback_solution.points)
    pts = _dedupe(pts)
    # float round-off of the inverse map can push a boundary point out
    live = forest.live
    for oid in pierces_all(live.values(), pts):
        pts.append(center(live[oid]))
        counters["fallback_points"] += 1
    counters.update(forest.counters)
    return PiercingSolution(pts, exact=False, counters=counters)


def pierce_fat(S: Sequence[GeomObject], b: int, c0: float | None = None,
               oracle=None) -> PiercingSolution:
    """Union over shifts and tree nodes of boundary piercings, mapped back."""
    S = list(S)
    if not S:
        return PiercingSolution([])
    check_fat(S)
    d = S[0].dim
    c0 = 4 * (d + 1) if c0 is None else c0
    return _forest_points(_fat_forest(S, b, c0, oracle or ExactMPSOracle()))


class DynPierceFat:
    """Dynamic fat-object piercing over a fixed domain (lo corner, span)."""

    def __init__(self, b: int, c0: float | None = None, oracle=None, d: int = 2,
                 domain: tuple | None = None, objs: Sequence[GeomObject] = ()):
        check_fat(objs)
        c0 = 4 * (d + 1) if c0 is None else c0
        domain = domain or ((0.0,) * d, 1.0)
        self.forest = _fat_forest(list(objs), b, c0, oracle or ExactMPSOracle(), d, domain)

    def insert(self, o: GeomObject):
        check_fat([o])
        self.forest.insert(o)

    def delete(self, oid: int):
        self.forest.delete(oid)

    def live(self) -> list[GeomObject]:
        return list(self.forest.live.values())

    def current(self) -> PiercingSolution:
        return _forest_points(self.forest)
