"""Geometric primitives shared by every solver.

Objects are closed sets: touching boundaries count as intersecting. All
comparisons are exact float comparisons so predicates are deterministic.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Sequence, Union

Point = tuple

# Objects whose L-inf diameter is below this are treated as points by the
# quadtree code (no dyadic box is small enough to be "good" for them).
MAX_QUAD_LEVEL = 1100


@dataclass(frozen=True)
class Box:
    lo: tuple
    hi: tuple

    def __post_init__(self):
        if len(self.lo) != len(self.hi):
            raise ValueError("lo/hi dimension mismatch")
        for a, b in zip(self.lo, self.hi):
            if not (a <= b):
                raise ValueError(f"degenerate box bounds {a} > {b}")

    @property
    def dim(self) -> int:
        return len(self.lo)


@dataclass(frozen=True)
class Disk:
    center: tuple
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("disk radius must be positive")

    @property
    def dim(self) -> int:
        return len(self.center)


Shape = Union[Box, Disk]


@dataclass(frozen=True)
class GeomObject:
    id: int
    shape: Shape
    weight: float = 1.0
    color: str | None = None

    @property
    def dim(self) -> int:
        return self.shape.dim


def make_box(oid: int, lo: Sequence[float], hi: Sequence[float], weight: float = 1.0,
             color: str | None = None) -> GeomObject:
    return GeomObject(oid, Box(tuple(float(v) for v in lo), tuple(float(v) for v in hi)),
                      float(weight), color)


def make_disk(oid: int, center: Sequence[float], radius: float, weight: float = 1.0,
              color: str | None = None) -> GeomObject:
    return GeomObject(oid, Disk(tuple(float(v) for v in center), float(radius)),
                      float(weight), color)


def _shape(o) -> Shape:
    return o.shape if isinstance(o, GeomObject) else o


def bbox(o) -> tuple[tuple, tuple]:
    """Smallest closed axis-aligned box containing the shape."""
    s = _shape(o)
    if isinstance(s, Box):
        return s.lo, s.hi
    r = s.radius
    return tuple(c - r for c in s.center), tuple(c + r for c in s.center)


def center(o) -> tuple:
    s = _shape(o)
    if isinstance(s, Disk):
        return s.center
    return tuple((a + b) / 2 for a, b in zip(s.lo, s.hi))


def linf_diameter(o) -> float:
    s = _shape(o)
    if isinstance(s, Disk):
        return 2 * s.radius
    return max(b - a for a, b in zip(s.lo, s.hi))


def _boxes_meet(alo, ahi, blo, bhi) -> bool:
    for a0, a1, b0, b1 in zip(alo, ahi, blo, bhi):
        if a1 < b0 or b1 < a0:
            return False
    return True


def _disk_meets_box(d: Disk, lo, hi) -> bool:
    acc = 0.0
    for c, a, b in zip(d.center, lo, hi):
        if c < a:
            acc += (a - c) ** 2
        elif c > b:
            acc += (c - b) ** 2
    return acc <= d.radius * d.radius


def shape_meets_box(o, lo, hi) -> bool:
    """True iff the closed shape meets the closed box [lo, hi] (bounds may be infinite)."""
    s = _shape(o)
    if isinstance(s, Box):
        return _boxes_meet(s.lo, s.hi, lo, hi)
    return _disk_meets_box(s, lo, hi)


def intersects(a, b) -> bool:
    sa, sb = _shape(a), _shape(b)
    if sa.dim != sb.dim:
        raise ValueError(f"dimension mismatch: {sa.dim} vs {sb.dim}")
    if isinstance(sa, Box):
        return shape_meets_box(sb, sa.lo, sa.hi)
    if isinstance(sb, Box):
        return _disk_meets_box(sa, sb.lo, sb.hi)
    dist2 = sum((x - y) ** 2 for x, y in zip(sa.center, sb.center))
    rr = sa.radius + sb.radius
    return dist2 <= rr * rr


def contains_point(o, p: Sequence[float]) -> bool:
    s = _shape(o)
    if isinstance(s, Box):
        return all(a <= x <= b for a, x, b in zip(s.lo, p, s.hi))
    return sum((x - c) ** 2 for x, c in zip(p, s.center)) <= s.radius * s.radius


def translate(o: GeomObject, v: Sequence[float], scale: float = 1.0) -> GeomObject:
    """Return o scaled by ``scale`` about the origin and then shifted by v."""
    s = o.shape
    if isinstance(s, Box):
        shape = Box(tuple(a * scale + t for a, t in zip(s.lo, v)),
                    tuple(b * scale + t for b, t in zip(s.hi, v)))
    else:
        shape = Disk(tuple(c * scale + t for c, t in zip(s.center, v)), s.radius * scale)
    return GeomObject(o.id, shape, o.weight, o.color)


# ---------------------------------------------------------------- quadtree

@dataclass(frozen=True)
class QuadtreeBox:
    """Dyadic box [i_k/2^level, (i_k+1)/2^level) per axis; level None is all of R^d."""

    level: int | None
    idx: tuple = ()

    @property
    def is_whole(self) -> bool:
        return self.level is None

    @property
    def side(self) -> float:
        return math.inf if self.level is None else math.ldexp(1.0, -self.level)

    @property
    def lo(self) -> tuple:
        if self.level is None:
            raise ValueError("whole space has no finite corner")
        return tuple(math.ldexp(float(i), -self.level) for i in self.idx)

    @property
    def hi(self) -> tuple:
        if self.level is None:
            raise ValueError("whole space has no finite corner")
        return tuple(math.ldexp(float(i + 1), -self.level) for i in self.idx)

    def contains_point(self, p) -> bool:
        if self.level is None:
            return True
        return all(a <= x < b for a, x, b in zip(self.lo, p, self.hi))

    def contains_qbox(self, other: "QuadtreeBox") -> bool:
        if self.level is None:
            return True
        if other.level is None or other.level < self.level:
            return False
        sh = other.level - self.level
        return all((j >> sh) == i for i, j in zip(self.idx, other.idx))

    def children(self) -> list["QuadtreeBox"]:
        if self.level is None:
            raise ValueError("whole space has no quadtree children")
        lvl = self.level + 1
        return [QuadtreeBox(lvl, tuple(2 * i + b for i, b in zip(self.idx, bits)))
                for bits in product((0, 1), repeat=len(self.idx))]


def unit_box(d: int) -> QuadtreeBox:
    return QuadtreeBox(0, (0,) * d)


WHOLE = QuadtreeBox(None, ())


def quadtree_box_of_point(p, level: int) -> QuadtreeBox:
    return QuadtreeBox(level, tuple(math.floor(math.ldexp(x, level)) for x in p))


@dataclass(frozen=True)
class Cell:
    """Region outer minus inner (inner optional, inner inside outer)."""

    outer: QuadtreeBox
    inner: QuadtreeBox | None = None

    def contains_point(self, p) -> bool:
        if not self.outer.contains_point(p):
            return False
        return self.inner is None or not self.inner.contains_point(p)

    def closure_pieces(self) -> list[tuple[tuple, tuple]]:
        """Closed boxes (possibly unbounded) whose union is the closure of the cell."""
        if self.outer.is_whole:
            if self.inner is None:
                return [((-math.inf,), (math.inf,))]  # marker: any dimension
            d = len(self.inner.idx)
            olo, ohi = (-math.inf,) * d, (math.inf,) * d
        else:
            olo, ohi = self.outer.lo, self.outer.hi
        if self.inner is None:
            return [(olo, ohi)]
        ilo, ihi = self.inner.lo, self.inner.hi
        pieces = []
        for k in range(len(ilo)):
            lo_hi = list(ohi)
            lo_hi[k] = ilo[k]
            pieces.append((olo, tuple(lo_hi)))
            hi_lo = list(olo)
            hi_lo[k] = ihi[k]
            pieces.append((tuple(hi_lo), ohi))
        return pieces

    def meets(self, o) -> bool:
        """True iff the closed object meets the closure of the cell."""
        s = _shape(o)
        for lo, hi in self.closure_pieces():
            if len(lo) != s.dim:
                lo, hi = (lo[0],) * s.dim, (hi[0],) * s.dim
            if shape_meets_box(s, lo, hi):
                return True
        return False

    def boxes(self) -> list[QuadtreeBox]:
        out = [] if self.outer.is_whole else [self.outer]
        if self.inner is not None:
            out.append(self.inner)
        return out


def smallest_quadtree_box(o) -> QuadtreeBox:
    """Smallest quadtree box whose closure contains the object (object inside [0,1)^d)."""
    lo, hi = bbox(o)
    for a, b in zip(lo, hi):
        if a < 0 or b >= 1:
            raise ValueError("object outside the unit cube")
    best = unit_box(len(lo))
    for level in range(1, MAX_QUAD_LEVEL):
        q = quadtree_box_of_point(lo, level)
        if all(b <= t for b, t in zip(hi, q.hi)):
            best = q
        else:
            break
    return best


def is_good(o, c0: float) -> bool:
    if c0 == math.inf:
        return True
    q = smallest_quadtree_box(o)
    return q.side <= c0 * linf_diameter(o)


def shifts(d: int) -> list[tuple]:
    if d < 1:
        raise ValueError("d must be >= 1")
    return [tuple(j / (d + 1) for _ in range(d)) for j in range(d + 1)]


# ---------------------------------------------------------------- depth

def _depth_1d(intervals: list[tuple[float, float]]) -> tuple[int, float | None]:
    events = []
    for a, b in intervals:
        events.append((a, 0))
        events.append((b, 1))
    events.sort()
    best, cur, where = 0, 0, None
    for x, kind in events:
        if kind == 0:
            cur += 1
            if cur > best:
                best, where = cur, x
        else:
            cur -= 1
    return best, where


def _depth_boxes(boxes: list[tuple[tuple, tuple]], axis: int, d: int) -> tuple[int, tuple | None]:
    if not boxes:
        return 0, None
    if axis == d - 1:
        dep, x = _depth_1d([(lo[axis], hi[axis]) for lo, hi in boxes])
        return dep, (x,)
    best, wit = 0, None
    for c in sorted({lo[axis] for lo, _ in boxes}):
        active = [bx for bx in boxes if bx[0][axis] <= c <= bx[1][axis]]
        if len(active) <= best:
            continue
        dep, rest = _depth_boxes(active, axis + 1, d)
        if dep > best:
            best, wit = dep, (c,) + rest
    return best, wit


def _circle_points(a: Disk, b: Disk) -> list[tuple]:
    (x0, y0), (x1, y1) = a.center, b.center
    dx, dy = x1 - x0, y1 - y0
    dist = math.hypot(dx, dy)
    if dist == 0 or dist > a.radius + b.radius or dist < abs(a.radius - b.radius):
        return []
    t = (a.radius ** 2 - b.radius ** 2 + dist ** 2) / (2 * dist)
    h = math.sqrt(max(a.radius ** 2 - t * t, 0.0))
    mx, my = x0 + t * dx / dist, y0 + t * dy / dist
    pts = [(mx + h * dy / dist, my - h * dx / dist), (mx - h * dy / dist, my + h * dx / dist)]
    pts.append((mx, my))
    return pts


def candidate_points(objs: Sequence[GeomObject]) -> list[tuple]:
    """Finite point set containing a deepest point for boxes, and a good
    approximation of one for disks (boundary crossings, lens midpoints, centers)."""
    if not objs:
        return []
    d = objs[0].dim
    boxes = [o for o in objs if isinstance(o.shape, Box)]
    disks = [o for o in objs if isinstance(o.shape, Disk)]
    pts: set = set()
    if boxes:
        axes = [sorted({o.shape.lo[k] for o in boxes}) for k in range(d)]
        pts.update(product(*axes))
    for i, a in enumerate(disks):
        pts.add(a.shape.center)
        for b in disks[i + 1:]:
            pts.update(_circle_points(a.shape, b.shape))
    if boxes and disks:
        for o in disks:
            for bx in boxes:
                lo, hi = bx.shape.lo, bx.shape.hi
                pts.add(tuple(min(max(c, a), b) for c, a, b in zip(o.shape.center, lo, hi)))
    return sorted(pts)


def depth_at(objs: Iterable, p) -> int:
    return sum(1 for o in objs if contains_point(o, p))


def max_depth(S: Sequence[GeomObject], method: str = "auto") -> tuple[int, tuple | None]:
    """Maximum number of objects sharing a point, with a witness point.

    ``method`` is "sweep" (boxes only), "brute" (candidate enumeration) or "auto".
    """
    if not S:
        return 0, None
    all_boxes = all(isinstance(o.shape, Box) for o in S)
    if method == "sweep" or (method == "auto" and all_boxes):
        if not all_boxes:
            raise ValueError("sweep depth needs boxes")
        return _depth_boxes([(o.shape.lo, o.shape.hi) for o in S], 0, S[0].dim)
    best, wit = 0, None
    for p in candidate_points(S):
        dep = depth_at(S, p)
        if dep > best:
            best, wit = dep, p
    return best, wit


# ---------------------------------------------------------------- partition

def _common_box(pts: list[tuple], start: QuadtreeBox) -> QuadtreeBox:
    best = start
    for level in range(start.level + 1, MAX_QUAD_LEVEL):
        q = quadtree_box_of_point(pts[0], level)
        if all(q.contains_point(p) for p in pts[1:]):
            best = q
        else:
            break
    return best


def _build_cqt(box: QuadtreeBox, pts: list[tuple]):
    if len(pts) <= 1 or all(p == pts[0] for p in pts):
        return ("leaf", box, len(pts))
    tight = _common_box(pts, box)
    if tight != box:
        return ("comp", box, _build_cqt(tight, pts))
    kids = []
    for ch in box.children():
        kids.append(_build_cqt(ch, [p for p in pts if ch.contains_point(p)]))
    return ("split", box, kids)


def _cluster(node, t: int, out: list):
    kind, box = node[0], node[1]
    if kind == "leaf":
        return box, None, node[2]
    if kind == "comp":
        _, hole, k = _cluster(node[2], t, out)
        return box, hole, k
    parts = [_cluster(ch, t, out) for ch in node[2]]
    holes = [p[1] for p in parts if p[1] is not None]
    total = sum(p[2] for p in parts)
    if len(holes) <= 1 and total <= t:
        return box, (holes[0] if holes else None), total
    for root, hole, _ in parts:
        if hole != root:
            out.append(Cell(root, hole))
    return box, box, 0


def _partition_with(tree, t: int) -> tuple[list[Cell], int]:
    """Cells for threshold t, and how many of them count against b (the
    exterior cell is free when it holds no points)."""
    cells: list[Cell] = []
    _, hole, k = _cluster(tree, t, cells)
    cells.append(Cell(WHOLE, hole))
    return cells, len(cells) - (k == 0 and hole is not None)


def quadtree_partition(P: Sequence[Sequence[float]], b: int) -> list[Cell]:
    """Split R^d into interior-disjoint cells of roughly |P|/b points.

    Cells come from clustering the compressed quadtree of P bottom-up: a node
    absorbs its children while they hold few points and at most one hole;
    otherwise each child region becomes a cell. The threshold grows until at
    most b cells remain, not counting the exterior cell R^d minus the
    clustered region when it holds no points. Points must lie in [0,1)^d.
    """
    pts = [tuple(float(x) for x in p) for p in P]
    if not pts or not 1 <= b:
        raise ValueError("need |P| >= 1 and b >= 1")
    d = len(pts[0])
    for p in pts:
        if any(not 0 <= x < 1 for x in p):
            raise ValueError("partition points must lie in [0,1)^d")
    tree = ("comp", WHOLE, _build_cqt(unit_box(d), pts))
    n = len(pts)
    t = max(1, math.ceil(n / b))
    failed = t - 1
    while True:
        cells, used = _partition_with(tree, t)
        if used <= b:
            break
        failed, t = t, max(t + 1, math.ceil(t * 1.25))
    # tighten the threshold between the last failure and the first success
    while t - failed > 1:
        mid = (t + failed) // 2
        trial, used = _partition_with(tree, mid)
        if used <= b:
            t, cells = mid, trial
        else:
            failed = mid
    return cells


def locate_cell(cells: Sequence[Cell], p) -> int:
    for i, c in enumerate(cells):
        if c.contains_point(p):
            return i
    raise ValueError("point not covered by any cell")


# ---------------------------------------------------------------- I/O

class InstanceFormatError(ValueError):
    def __init__(self, line: int, msg: str):
        super().__init__(f"line {line}: {msg}")
        self.line = line


def object_to_record(o: GeomObject) -> dict:
    s = o.shape
    if isinstance(s, Box):
        rec = {"id": o.id, "kind": "box", "coords": list(s.lo) + list(s.hi)}
    else:
        rec = {"id": o.id, "kind": "disk", "coords": list(s.center) + [s.radius]}
    rec["weight"] = o.weight
    if o.color is not None:
        rec["color"] = o.color
    return rec


def record_to_object(rec: dict) -> GeomObject:
    kind = rec["kind"]
    coords = [float(v) for v in rec["coords"]]
    if any(not math.isfinite(v) for v in coords):
        raise ValueError("non-finite coordinate")
    weight = float(rec.get("weight", 1.0))
    if weight < 0:
        raise ValueError("negative weight")
    color = rec.get("color")
    if color not in (None, "A", "B"):
        raise ValueError(f"bad color {color!r}")
    oid = rec["id"]
    if not isinstance(oid, int) or isinstance(oid, bool):
        raise ValueError("id must be an integer")
    if kind == "box":
        if len(coords) % 2 or not 2 <= len(coords) // 2 <= 4:
            raise ValueError("box needs 2d coordinates with 2 <= d <= 4")
        d = len(coords) // 2
        return GeomObject(oid, Box(tuple(coords[:d]), tuple(coords[d:])), weight, color)
    if kind == "disk":
        if len(coords) != 3:
            raise ValueError("disk needs [cx, cy, r]")
        return GeomObject(oid, Disk(tuple(coords[:2]), coords[2]), weight, color)
    raise ValueError(f"unknown kind {kind!r}")


def parse_instance(text: str) -> list[GeomObject]:
    out, seen = [], set()
    dim = None
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            o = record_to_object(json.loads(line))
        except (ValueError, KeyError, TypeError) as exc:
            raise InstanceFormatError(lineno, str(exc)) from None
        if o.id in seen:
            raise InstanceFormatError(lineno, f"duplicate id {o.id}")
        if dim is not None and o.dim != dim:
            raise InstanceFormatError(lineno, "mixed dimensions")
        dim = o.dim
        seen.add(o.id)
        out.append(o)
    return out


def dump_instance(objs: Iterable[GeomObject]) -> str:
    return "".join(json.dumps(object_to_record(o)) + "\n" for o in objs)


def read_instance(path) -> list[GeomObject]:
    with open(path, encoding="utf-8") as fh:
        return parse_instance(fh.read())


def write_instance(path, objs: Iterable[GeomObject]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_instance(objs))
