"""Minimum vertex cover: multiplicative-weight fractional LP, kernelization,
phase-based dynamic maintenance and the static solvers used on kernels."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .geom import GeomObject, bbox, center, linf_diameter, max_depth, shape_meets_box
from .mis import complete_independent, greedy_mis
from .mps import lambda_box
from .oracle import mis_on_graph
from .solutions import ISolution, VCSolution, adjacency, edge_allowed


# ---------------------------------------------------------------- min-weight edge oracle

class NaiveMinEdgeOracle:
    """Minimum-weight intersecting pair by scanning a cached edge list.

    Edges are found by pair scan on insert. Edge weight sums live in an array
    refreshed for incident edges on every weight change, and ``min_edge`` is
    an argmin over it (ties go to the lexicographically smallest pair).
    """

    def __init__(self, objs: Sequence[GeomObject] = (), bipartite: bool = False):
        self.bipartite = bipartite
        self.objs: dict[int, GeomObject] = {}
        self.adj: dict[int, set[int]] = {}
        self._w: dict[int, float] = {}
        self._dirty = True
        for o in objs:
            self.insert(o)

    def insert(self, o: GeomObject):
        if o.id in self.objs:
            raise ValueError(f"id {o.id} already present")
        self._sync()
        self.adj[o.id] = set()
        for u, p in self.objs.items():
            if edge_allowed(o, p, self.bipartite):
                self.adj[o.id].add(u)
                self.adj[u].add(o.id)
        self.objs[o.id] = o
        self._w[o.id] = 1.0
        self._dirty = True

    def remove(self, oid: int):
        if oid not in self.objs:
            raise KeyError(f"unknown id {oid}")
        self._sync()
        for u in self.adj.pop(oid):
            self.adj[u].discard(oid)
        del self.objs[oid], self._w[oid]
        self._dirty = True

    def _sync(self):
        """Copy array weights back to the dict before the layout changes."""
        if not self._dirty:
            for i, v in enumerate(self._ids):
                self._w[v] = float(self._wa[i])

    def _rebuild(self):
        ids = sorted(self.objs)
        self._ids = ids
        self._pos = {v: i for i, v in enumerate(ids)}
        self._wa = np.array([self._w[v] for v in ids], dtype=float)
        pairs = [(self._pos[u], self._pos[v]) for u in ids for v in sorted(self.adj[u]) if u < v]
        self._eu = np.array([p[0] for p in pairs], dtype=np.int64)
        self._ev = np.array([p[1] for p in pairs], dtype=np.int64)
        inc: list[list[int]] = [[] for _ in ids]
        for k, (a, b) in enumerate(pairs):
            inc[a].append(k)
            inc[b].append(k)
        self._inc = [np.array(x, dtype=np.int64) for x in inc]
        self._indptr = np.cumsum([0] + [len(x) for x in inc]).astype(np.int64)
        self._indices = np.array([k for x in inc for k in x], dtype=np.int64)
        self._es = self._wa[self._eu] + self._wa[self._ev]
        self._dirty = False

    def weight(self, v: int) -> float:
        if self._dirty:
            return self._w[v]
        return float(self._wa[self._pos[v]])

    def set_weight(self, v: int, w: float):
        if self._dirty:
            self._rebuild()
        i = self._pos[v]
        self._wa[i] = w
        k = self._inc[i]
        if len(k):
            self._es[k] = self._wa[self._eu[k]] + self._wa[self._ev[k]]

    def scale_all(self, f: float):
        if self._dirty:
            self._rebuild()
        self._wa *= f
        self._es *= f

    def reset_weights(self):
        if self._dirty:
            self._rebuild()
        self._wa[:] = 1.0
        self._es[:] = 2.0

    def min_edge(self):
        """(u, v, w_u + w_v) for a lightest live edge, or None."""
        if self._dirty:
            self._rebuild()
        if len(self._es) == 0:
            return None
        k = int(np.argmin(self._es))
        return self._ids[self._eu[k]], self._ids[self._ev[k]], float(self._es[k])

    def maximal_matching_size(self) -> int:
        used, m = set(), 0
        for u in sorted(self.adj):
            if u in used:
                continue
            for v in sorted(self.adj[u]):
                if v not in used:
                    used |= {u, v}
                    m += 1
                    break
        return m

    def __len__(self) -> int:
        return len(self.objs)


# ---------------------------------------------------------------- MWU

@dataclass
class FractionalVC:
    x: dict
    default: float = 0.0  # value of vertices absent from x
    counters: dict = field(default_factory=dict)

    def value(self, v) -> float:
        return self.x.get(v, self.default)

    def size(self, ids: Sequence[int]) -> float:
        return sum(self.value(v) for v in ids)


def t_max(z: float, n: int, delta: float) -> int:
    return math.ceil(z * math.log(n) / (math.log(1 + delta) - delta / (1 + delta)))


# Guards x_u + x_v >= 1 against the last bits of float round-off.
FEAS_SLACK = 1e-9


# Weights are renormalised by a common factor once W passes this bound;
# every test in the loop compares ratios, so the run is unchanged.
RESCALE_AT = 1e150


def _mwu_run(oracle, z: float, delta: float, ids: list[int]):
    """One run at target z. Returns (x map or None, iterations, iteration cap)."""
    n = len(ids)
    cap = t_max(z, n, delta)
    W = float(n)
    it = 0
    ok = False
    if isinstance(oracle, NaiveMinEdgeOracle):
        return _mwu_run_arrays(oracle, z, delta, ids, cap)
    try:
        while True:
            e = oracle.min_edge()
            if e is None or e[2] >= W / z:
                ok = True
                break
            if it >= cap:
                break
            u, v, s = e
            W += delta * s
            for t in (u, v):
                oracle.set_weight(t, oracle.weight(t) * (1 + delta))
            it += 1
            if W > RESCALE_AT:
                oracle.scale_all(1 / W)
                W = 1.0
        x = None
        if ok:
            thr = W / z
            x = {v: min(oracle.weight(v) / thr * (1 + FEAS_SLACK), 1.0) for v in ids}
        return x, it, cap
    finally:
        oracle.reset_weights()


def _mwu_loop_py(wa, es, eu, ev, indptr, indices, W, z, delta, cap):
    g = 1 + delta
    it = 0
    while True:
        k = np.argmin(es)
        s = es[k]
        if s >= W / z:
            return True, it, W
        if it >= cap:
            return False, it, W
        W += delta * s
        for i in (eu[k], ev[k]):
            wa[i] *= g
            ks = indices[indptr[i]:indptr[i + 1]]
            es[ks] = wa[eu[ks]] + wa[ev[ks]]
        it += 1
        if W > RESCALE_AT:
            wa /= W
            es /= W
            W = 1.0


def _mwu_loop_nb(wa, es, eu, ev, indptr, indices, W, z, delta, cap):
    g = 1 + delta
    it = 0
    m = es.shape[0]
    while True:
        k = 0
        s = es[0]
        for j in range(1, m):
            if es[j] < s:
                s = es[j]
                k = j
        if s >= W / z:
            return True, it, W
        if it >= cap:
            return False, it, W
        W += delta * s
        for i in (eu[k], ev[k]):
            wa[i] *= g
            for t in range(indptr[i], indptr[i + 1]):
                e = indices[t]
                es[e] = wa[eu[e]] + wa[ev[e]]
        it += 1
        if W > RESCALE_AT:
            for j in range(wa.shape[0]):
                wa[j] /= W
            for j in range(m):
                es[j] /= W
            W = 1.0


try:
    import numba
    _mwu_loop = numba.njit(cache=True)(_mwu_loop_nb)
except ImportError:  # plain numpy fallback
    _mwu_loop = _mwu_loop_py


def _mwu_run_arrays(oracle: NaiveMinEdgeOracle, z: float, delta: float, ids: list[int], cap: int):
    """The loop of ``_mwu_run`` on the oracle's arrays (compiled when numba is present)."""
    oracle.min_edge()  # refresh the layout
    try:
        ok, it, W = _mwu_loop(oracle._wa, oracle._es, oracle._eu, oracle._ev,
                              oracle._indptr, oracle._indices, float(len(ids)), float(z),
                              float(delta), int(cap))
        x = None
        if ok:
            thr = W / z
            wa = oracle._wa
            x = {v: min(float(wa[i]) / thr * (1 + FEAS_SLACK), 1.0) for i, v in enumerate(oracle._ids)}
        return x, it, cap
    finally:
        oracle.reset_weights()


def mwu_fractional_vc(oracle, delta: float = 0.1) -> FractionalVC:
    """Approximate minimum fractional vertex cover of the oracle's live graph.

    Searches z by doubling from a maximal-matching lower bound, then bisects
    until consecutive failure and success differ by a factor 1 + delta.
    """
    if not 0 < delta <= 0.25:
        raise ValueError("delta must lie in (0, 1/4]")
    ids = sorted(oracle.objs)
    if not ids or oracle.min_edge() is None:
        return FractionalVC({v: 0.0 for v in ids}, counters={"runs": 0, "iterations": []})
    runs = []

    def attempt(z):
        x, it, cap = _mwu_run(oracle, z, delta, ids)
        if it > cap:
            raise AssertionError("iteration cap exceeded")
        runs.append({"z": z, "iterations": it, "t_max": cap, "accepted": x is not None})
        return x

    lo = float(max(1, oracle.maximal_matching_size()))  # never above the optimum
    x = attempt(lo)
    if x is not None:
        best = x
    else:
        hi = lo
        while True:
            hi *= 2
            x = attempt(hi)
            if x is not None:
                best = x
                break
            lo = hi
        while hi > lo * (1 + delta):
            mid = math.sqrt(lo * hi)
            x = attempt(mid)
            if x is not None:
                best, hi = x, mid
            else:
                lo = mid
    return FractionalVC(best, counters={"runs": len(runs), "iterations": [r["iterations"] for r in runs],
                                        "z": [r["z"] for r in runs],
                                        "t_max": [r["t_max"] for r in runs],
                                        "accepted": [r["accepted"] for r in runs]})


def fractional_feasible(x: FractionalVC, adj: dict[int, set[int]]) -> list[tuple[int, int]]:
    return [(u, v) for u in adj for v in adj[u] if u < v and x.value(u) + x.value(v) < 1]


# ---------------------------------------------------------------- kernel

@dataclass
class KernelResult:
    K: frozenset
    H: frozenset
    L: frozenset
    alpha: float


def kernelize(x: FractionalVC, ids: Sequence[int], gamma: float = 0.1,
              delta: float = 0.01) -> KernelResult:
    """Split vertices at a threshold alpha near 1/2 chosen where few x-values fall."""
    if not 0 <= delta < gamma < 0.25:
        raise ValueError("need 0 <= delta < gamma < 1/4")
    lam = math.sqrt(gamma * delta)
    lo_a, hi_a = 0.5 - gamma - lam, 0.5 - lam
    if lam == 0:
        alpha = hi_a
    else:
        k0 = math.ceil(lo_a / lam - 1e-9)
        k1 = math.floor(hi_a / lam + 1e-9)
        counts: dict[int, int] = {k: 0 for k in range(k0, k1 + 1)}
        for v in ids:
            xv = x.value(v)
            if xv >= lo_a:
                k = math.floor(xv / lam)
                if k in counts:
                    counts[k] += 1
        kbest = min(counts, key=lambda k: (counts[k], k))
        alpha = kbest * lam
    L = frozenset(v for v in ids if x.value(v) < alpha)
    H = frozenset(v for v in ids if x.value(v) > 1 - alpha)
    K = frozenset(ids) - L - H
    return KernelResult(K, H, L, alpha)


def vc_from_kernel(kr: KernelResult, inner: Callable[[list], VCSolution],
                   objs_by_id: dict) -> VCSolution:
    sub = inner([objs_by_id[i] for i in sorted(kr.K)]) if kr.K else VCSolution(frozenset())
    return VCSolution(frozenset(sub.ids) | kr.H, counters=dict(sub.counters))


# ---------------------------------------------------------------- separator

@dataclass
class SeparatorResult:
    lo: tuple
    hi: tuple
    inside: list
    outside: list
    crossing: list
    counters: dict = field(default_factory=dict)


def _window_sums(grid: np.ndarray, s: int) -> np.ndarray:
    """Sums over all s-wide hypercube windows of an integer grid."""
    d = grid.ndim
    cs = grid
    for ax in range(d):
        cs = np.cumsum(cs, axis=ax)
        pad = [(0, 0)] * d
        pad[ax] = (1, 0)
        cs = np.pad(cs, pad)
        sl_hi = [slice(None)] * d
        sl_lo = [slice(None)] * d
        sl_hi[ax] = slice(s, None)
        sl_lo[ax] = slice(None, -s)
        cs = cs[tuple(sl_hi)] - cs[tuple(sl_lo)]
    return cs


def separator(S: Sequence[GeomObject], C: int = 64) -> SeparatorResult:
    """Hypercube whose inside and outside each hold a constant fraction of the
    objects while few small objects meet its boundary."""
    S = list(S)
    n = len(S)
    if n < 2:
        raise ValueError("separator needs at least two objects")
    d = S[0].dim
    cs = np.array([center(o) for o in S], dtype=float)
    mn = cs.min(axis=0)
    span = float((cs.max(axis=0) - mn).max())
    w = span / C if span > 0 else 1.0
    cell = np.minimum(np.floor((cs - mn) / w).astype(int), C - 1)
    grid = np.zeros((C,) * d, dtype=np.int64)
    np.add.at(grid, tuple(cell.T), 1)
    need = n / (2 ** d + 1)
    # smallest window side holding enough rounded centers
    lo_s, hi_s = 1, C
    while lo_s < hi_s:
        mid = (lo_s + hi_s) // 2
        if _window_sums(grid, mid).max() >= need:
            hi_s = mid
        else:
            lo_s = mid + 1
    r = lo_s
    sums = _window_sums(grid, r)
    corner = np.array(np.unravel_index(int(np.argmax(sums)), sums.shape))
    # cell k spans [mn + k w, mn + (k+1) w]
    b0_lo = mn + corner * w
    mid_pt = b0_lo + r * w / 2
    h = max(2, math.ceil(n ** (1 / d)))
    small = r * w / h
    diam = [linf_diameter(o) for o in S]
    best = None
    for i in range(1, h):
        t = i / h
        half = (1 + t) * r * w / 2
        lo, hi = tuple(mid_pt - half), tuple(mid_pt + half)
        crossing_small = sum(1 for o, dm in zip(S, diam) if dm <= small and _crosses_box(o, lo, hi))
        if best is None or crossing_small < best[0]:
            best = (crossing_small, t, lo, hi)
    crossing_small, t, lo, hi = best
    inside, outside, crossing = [], [], []
    for o in S:
        olo, ohi = bbox(o)
        if all(a < x and y < b for a, x, y, b in zip(lo, olo, ohi, hi)):
            inside.append(o)
        elif not _meets_closed_box(o, lo, hi):
            outside.append(o)
        else:
            crossing.append(o)
    c_in = sum(1 for c in cs if all(a <= x <= b for a, x, b in zip(lo, c, hi)))
    return SeparatorResult(lo, hi, inside, outside, crossing, counters={
        "t": t, "h": h, "r_cells": r, "small_threshold": small,
        "small_crossing": crossing_small,
        "large_crossing": sum(1 for o in crossing if linf_diameter(o) > small),
        "centers_inside": c_in, "centers_outside": n - c_in})


def stab_large_crossing(sep: SeparatorResult) -> list[tuple]:
    """Points on and near the separator boundary piercing every fat crossing
    object above the small-size threshold."""
    return lambda_box(sep.lo, sep.hi, sep.counters["small_threshold"])


def _meets_closed_box(o, lo, hi) -> bool:
    return shape_meets_box(o.shape, lo, hi)


def _crosses_box(o, lo, hi) -> bool:
    """Object meets the boundary of the closed box [lo, hi]."""
    if not _meets_closed_box(o, lo, hi):
        return False
    olo, ohi = bbox(o)
    return not all(a < x and y < b for a, x, y, b in zip(lo, olo, ohi, hi))


# ---------------------------------------------------------------- fat promise case

def mis_fat_additive(S: Sequence[GeomObject], eps: float = 0.5, node_cap: int = 200_000,
                     C: int = 64) -> ISolution:
    """Separator recursion; objects crossing the separator are dropped and
    pieces below 1/eps^2 objects are solved by branch and bound. Dropped
    objects meeting nothing chosen are added back at the end."""
    S = list(S)
    base = math.ceil(1 / eps ** 2)
    counters = {"dropped": 0, "leaves": 0, "inexact_leaves": 0}

    def rec(objs) -> set[int]:
        if len(objs) <= max(base, 1):
            counters["leaves"] += 1
            ids, exact = mis_on_graph(adjacency(objs), {o.id: 1.0 for o in objs}, None, node_cap)
            counters["inexact_leaves"] += not exact
            return set(ids)
        sep = separator(objs, C)
        if len(sep.inside) == len(objs) or len(sep.outside) == len(objs):
            counters["leaves"] += 1
            return set(greedy_mis(objs).ids)
        counters["dropped"] += len(sep.crossing)
        return rec(sep.inside) | rec(sep.outside)

    ids = rec(S) if S else set()
    before = len(ids)
    ids = complete_independent(ids, {o.id: o for o in S})
    counters["restored"] = len(ids) - before
    return ISolution(frozenset(ids), len(ids), exact=False, counters=counters)


def vc_fat_promise(S: Sequence[GeomObject], eps: float = 0.5) -> VCSolution:
    mis = mis_fat_additive(S, eps)
    return VCSolution(frozenset(o.id for o in S if o.id not in mis.ids), counters=mis.counters)


# ---------------------------------------------------------------- rectangles

def _contains_box(a: GeomObject, b: GeomObject) -> bool:
    return all(x <= y for x, y in zip(a.shape.lo, b.shape.lo)) and \
        all(x >= y for x, y in zip(a.shape.hi, b.shape.hi))


def remove_containers(S: Sequence[GeomObject]) -> tuple[list, list]:
    """Put every rectangle containing another live one into the cover.

    A container's closed neighbourhood includes that of the contained one, so
    some minimum cover uses the container. Returns (remaining, removed).
    """
    order = sorted(S, key=lambda o: (-math.prod(h - l for l, h in zip(o.shape.lo, o.shape.hi)), o.id))
    live = {o.id: o for o in S}
    removed = []
    for o in order:
        if any(p.id != o.id and _contains_box(o, p) for p in live.values()):
            removed.append(o)
            del live[o.id]
    return [live[i] for i in sorted(live)], removed


def _dominates(s: GeomObject, t: GeomObject) -> bool:
    """s and t cross like a plus sign with s the taller one."""
    (sx0, sy0), (sx1, sy1) = s.shape.lo, s.shape.hi
    (tx0, ty0), (tx1, ty1) = t.shape.lo, t.shape.hi
    return tx0 < sx0 and sx1 < tx1 and sy0 < ty0 and ty1 < sy1


def dominance_decompose(S: Sequence[GeomObject]) -> tuple[list, list]:
    S = list(S)
    if S and max_depth(S)[0] > 2:
        raise ValueError("dominance decomposition needs depth at most 2")
    dominated = {t.id for s in S for t in S if s.id != t.id and _dominates(s, t)}
    return [o for o in S if o.id not in dominated], [o for o in S if o.id in dominated]


def triangle_removal_sweep(S: Sequence[GeomObject]) -> tuple[list, list]:
    """Left-to-right sweep; whenever three active rectangles share a point,
    remove them as a triangle. Returns (remaining, triangles)."""
    events = []
    for o in S:
        events.append((o.shape.lo[0], 0, o.id))
        events.append((o.shape.hi[0], 1, o.id))
    events.sort()
    by_id = {o.id: o for o in S}
    active: dict[int, GeomObject] = {}
    removed: set[int] = set()
    triangles = []
    for _, kind, oid in events:
        if oid in removed:
            continue
        if kind == 1:
            active.pop(oid, None)
            continue
        o = by_id[oid]
        ylo, yhi = o.shape.lo[1], o.shape.hi[1]
        over = [p for p in active.values() if p.shape.lo[1] <= yhi and ylo <= p.shape.hi[1]]
        hit = None
        for y in sorted({ylo} | {p.shape.lo[1] for p in over if ylo <= p.shape.lo[1]}):
            cover = [p for p in over if p.shape.lo[1] <= y <= p.shape.hi[1]]
            if len(cover) >= 2:
                hit = sorted(cover, key=lambda p: p.id)[:2]
                break
        if hit is None:
            active[oid] = o
            continue
        tri = (hit[0].id, hit[1].id, oid)
        triangles.append(tuple(sorted(tri)))
        for t in tri:
            removed.add(t)
            active.pop(t, None)
    rest = [o for o in S if o.id not in removed]
    return rest, triangles


def planar_mis_inner(S: Sequence[GeomObject], eps: float = 0.1,
                     node_cap: int = 1_000_000) -> ISolution:
    """Branch and bound per component; greedy (flagged) when the cap is hit."""
    S = list(S)
    adj = adjacency(S)
    ids, exact = mis_on_graph(adj, {o.id: 1.0 for o in S}, None, node_cap)
    if not exact:
        g = greedy_mis(S)
        if g.value > len(ids):
            ids = g.ids
    return ISolution(frozenset(ids), len(ids), exact=exact, counters={"fallback": not exact})


def vc_rects_trifree_promise(S: Sequence[GeomObject], eps: float = 0.1) -> VCSolution:
    S1, S2 = dominance_decompose(S)
    ids1 = {o.id for o in S1}
    ids2 = {o.id for o in S2}
    m1 = planar_mis_inner(S1, eps)
    m2 = planar_mis_inner(S2, eps)
    X1 = (ids1 - m1.ids) | ids2
    X2 = (ids2 - m2.ids) | ids1
    X = X1 if len(X1) <= len(X2) else X2
    return VCSolution(frozenset(X), counters={
        "s1": len(S1), "s2": len(S2), "fallback": m1.counters["fallback"] or m2.counters["fallback"]})


def vc_rects_promise(S: Sequence[GeomObject], eps: float = 0.1) -> VCSolution:
    """Containers first, then triangles in full, then the triangle-free solver."""
    rest, containers = remove_containers(S)
    rest, triangles = triangle_removal_sweep(rest)
    inner = vc_rects_trifree_promise(rest, eps)
    T = {v for tri in triangles for v in tri}
    X = set(inner.ids) | T | {o.id for o in containers}
    return VCSolution(frozenset(X), counters={**inner.counters, "triangles": len(triangles),
                                              "containers": len(containers)})


def vc_bipartite_promise(S: Sequence[GeomObject]) -> VCSolution:
    """The smaller color class (ties to A)."""
    A = frozenset(o.id for o in S if o.color == "A")
    B = frozenset(o.id for o in S if o.color != "A")
    return VCSolution(A if len(A) <= len(B) else B)


def vc_exact_inner(S: Sequence[GeomObject], bipartite: bool = False) -> VCSolution:
    adj = adjacency(list(S), bipartite)
    ids, exact = mis_on_graph(adj, {v: 1.0 for v in adj}, None, 1_000_000)
    return VCSolution(frozenset(set(adj) - set(ids)), counters={"exact": exact})


FAMILIES = ("disk", "fatbox", "rect", "bipartite-disk", "bipartite-box")


def inner_solver(family: str, eps: float) -> Callable:
    if family in ("disk", "fatbox"):
        return lambda objs: vc_fat_promise(objs, eps)
    if family == "rect":
        return lambda objs: vc_rects_promise(objs, eps)
    if family in ("bipartite-disk", "bipartite-box"):
        return vc_bipartite_promise
    if family == "exact":
        return vc_exact_inner
    raise ValueError(f"unknown family {family!r}")


def is_bipartite_family(family: str) -> bool:
    return family.startswith("bipartite")


# ---------------------------------------------------------------- pipelines

def vc_pipeline(oracle: NaiveMinEdgeOracle, family: str, eps: float = 0.1, gamma: float = 0.1,
                delta: float = 0.01, inner: Callable | None = None,
                mwu_delta: float = 0.1) -> VCSolution:
    """Fractional solution, kernel, promise-case solver on the kernel.

    ``delta`` sets the kernel's threshold granularity; the fractional solver
    runs at ``mwu_delta``.
    """
    inner = inner or inner_solver(family, eps)
    x = mwu_fractional_vc(oracle, mwu_delta)
    ids = sorted(oracle.objs)
    kr = kernelize(x, ids, gamma, delta)
    sol = vc_from_kernel(kr, inner, oracle.objs)
    sol.counters.update({"mwu_runs": x.counters["runs"], "mwu_iterations": sum(x.counters["iterations"]),
                         "kernel": len(kr.K), "H": len(kr.H), "L": len(kr.L), "alpha": kr.alpha,
                         "fractional": x.size(ids)})
    return sol


def vc_static(S: Sequence[GeomObject], family: str, eps: float = 0.1, gamma: float = 0.1,
              delta: float = 0.01, inner: Callable | None = None,
              mwu_delta: float = 0.1) -> VCSolution:
    oracle = NaiveMinEdgeOracle(S, bipartite=is_bipartite_family(family))
    return vc_pipeline(oracle, family, eps, gamma, delta, inner, mwu_delta)


class _Instance:
    def __init__(self, b: int, eps: float):
        self.b = b
        self.phase_len = max(1, math.floor(eps * b))
        self.ops = 0
        self.cover: set[int] = set()
        self.estimate = None  # phase-start optimum estimate
        self.phases = 0


class DynVC:
    """Phase-based dynamic cover with one instance per power-of-two guess b.

    Updates are applied to every instance's cover by the in-phase rules
    (insert: add to the cover; delete: drop it). Only the served instance
    recomputes when its phase ends; others recompute when they are next
    served. Every instance's cover is valid at all times.
    """

    def __init__(self, family: str, eps: float = 0.1, gamma: float = 0.1, delta: float = 0.01,
                 ratio: float = 2.0, inner: Callable | None = None, mwu_delta: float = 0.1):
        self.family = family
        self.mwu_delta = mwu_delta
        self.eps, self.gamma, self.delta = eps, gamma, delta
        self.ratio = ratio
        self.inner = inner
        self.oracle = NaiveMinEdgeOracle(bipartite=is_bipartite_family(family))
        self.instances: dict[int, _Instance] = {}
        self.served: _Instance | None = None
        self.log: list[dict] = []
        self.ops = 0

    def _ensure(self):
        n = max(1, len(self.oracle))
        top = 1 << max(0, math.ceil(math.log2(n + 1)))
        b = 1
        while b <= top:
            if b not in self.instances:
                inst = _Instance(b, self.eps)
                inst.cover = set(self.oracle.objs)  # trivially valid until recomputed
                inst.ops = inst.phase_len           # force a recompute when served
                self.instances[b] = inst
            b *= 2

    def _recompute(self, inst: _Instance):
        sol = vc_pipeline(self.oracle, self.family, self.eps, self.gamma, self.delta, self.inner,
                          self.mwu_delta)
        inst.cover = set(sol.ids)
        inst.estimate = len(sol.ids) / self.ratio
        inst.ops = 0
        inst.phases += 1
        self.log.append({"op": self.ops, "b": inst.b, "size": len(self.oracle),
                         "cover": len(sol.ids),
                         "mwu_iterations": sol.counters.get("mwu_iterations", 0),
                         "kernel": sol.counters.get("kernel", 0)})

    def _pick(self):
        self._ensure()
        chosen = None
        for b in sorted(self.instances):
            inst = self.instances[b]
            if inst.estimate is not None and b <= inst.estimate < 2 * b:
                chosen = inst
                break
        if chosen is None:
            chosen = self.instances[min(self.instances)] if self.served is None else self.served
        if chosen.ops >= chosen.phase_len:
            self._recompute(chosen)
            # the recompute may move the estimate into another instance's range
            for b in sorted(self.instances):
                inst = self.instances[b]
                if b <= chosen.estimate < 2 * b and inst is not chosen:
                    inst.cover, inst.estimate, inst.ops = set(chosen.cover), chosen.estimate, 0
                    chosen = inst
                    break
        self.served = chosen

    def insert(self, o: GeomObject):
        self.oracle.insert(o)
        self.ops += 1
        for inst in self.instances.values():
            inst.cover.add(o.id)
            inst.ops += 1
        self._pick()

    def delete(self, oid: int):
        self.oracle.remove(oid)
        self.ops += 1
        for inst in self.instances.values():
            inst.cover.discard(oid)
            inst.ops += 1
        self._pick()

    def live(self) -> list[GeomObject]:
        return list(self.oracle.objs.values())

    def current(self) -> VCSolution:
        if self.served is None:
            return VCSolution(frozenset())
        return VCSolution(frozenset(self.served.cover), counters={"b": self.served.b,
                                                                  "phases": len(self.log)})
