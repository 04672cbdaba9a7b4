"""Exact brute-force reference solvers for desk-scale instances."""

from __future__ import annotations

from functools import lru_cache
from typing import Callable, Sequence

from .geom import Disk, GeomObject, candidate_points, contains_point
from .solutions import (ISolution, Matching, PiercingSolution, VCSolution, adjacency)


class CapExceeded(ValueError):
    pass


def _popcount(x: int) -> int:
    return bin(x).count("1")


def _bits(x: int):
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


# ---------------------------------------------------------------- set cover

def set_cover_bb(masks: Sequence[int], universe: int, node_cap: int | None = None):
    """Minimum number of masks covering ``universe``.

    Returns (chosen mask indices, exact flag). The flag is False when the
    node cap stopped the search early; the answer is then the best found.
    """
    if universe == 0:
        return [], True
    uniq: dict[int, int] = {}
    for i, m in enumerate(masks):
        m &= universe
        if m and m not in uniq:
            uniq[m] = i
    items = sorted(uniq.items(), key=lambda kv: -_popcount(kv[0]))
    kept = []
    for m, i in items:
        if not any((m | k) == k for k, _ in kept):
            kept.append((m, i))
    covering: dict[int, list[int]] = {}
    for j, (m, _) in enumerate(kept):
        for e in _bits(m):
            covering.setdefault(e, []).append(j)
    for e in _bits(universe):
        if e not in covering:
            raise ValueError(f"element {e} cannot be covered")

    def greedy(unc: int) -> list[int]:
        out = []
        while unc:
            j = max(range(len(kept)), key=lambda t: (_popcount(kept[t][0] & unc), -t))
            out.append(j)
            unc &= ~kept[j][0]
        return out

    best = greedy(universe)
    nodes = 0
    exact = True

    def lower_bound(unc: int) -> int:
        used = set()
        lb = 0
        for e in sorted(_bits(unc), key=lambda e: len(covering[e])):
            cs = covering[e]
            if not used.intersection(cs):
                used.update(cs)
                lb += 1
        return lb

    def rec(unc: int, chosen: list[int]):
        nonlocal best, nodes, exact
        if unc == 0:
            if len(chosen) < len(best):
                best = list(chosen)
            return
        nodes += 1
        if node_cap is not None and nodes > node_cap:
            exact = False
            return
        if len(chosen) + lower_bound(unc) >= len(best):
            return
        e = min(_bits(unc), key=lambda e: len(covering[e]))
        opts = sorted(covering[e], key=lambda j: -_popcount(kept[j][0] & unc))
        for j in opts:
            chosen.append(j)
            rec(unc & ~kept[j][0], chosen)
            chosen.pop()
            if not exact:
                return

    rec(universe, [])
    return [kept[j][1] for j in best], exact


def piercing_bb(objs: Sequence[GeomObject], candidates: Sequence, node_cap: int | None = None):
    masks = []
    for p in candidates:
        m = 0
        for i, o in enumerate(objs):
            if contains_point(o, p):
                m |= 1 << i
        masks.append(m)
    chosen, exact = set_cover_bb(masks, (1 << len(objs)) - 1, node_cap)
    return [candidates[i] for i in chosen], exact


def exact_mps(S: Sequence[GeomObject], cap_boxes: int = 20, cap_disks: int = 16) -> PiercingSolution:
    """Minimum piercing set over a finite candidate set.

    For boxes the candidate set (all combinations of lower corners) is exact.
    For disks it consists of centers, pairwise boundary crossings and lens
    midpoints, so the result is an upper bound and ``exact`` is False.
    """
    S = list(S)
    if not S:
        return PiercingSolution([], True)
    has_disk = any(isinstance(o.shape, Disk) for o in S)
    cap = cap_disks if has_disk else cap_boxes
    if cap is not None and len(S) > cap:
        raise CapExceeded(f"exact_mps limited to {cap} objects, got {len(S)}")
    pts, _ = piercing_bb(S, candidate_points(S))
    return PiercingSolution(pts, exact=not has_disk)


# ---------------------------------------------------------------- independent set

def mwis_bitmask(weights: Sequence[float], adj: Sequence[int], node_cap: int | None = None):
    """Maximum-weight independent set on a graph given as adjacency bitmasks.

    Returns (vertex index list, exact flag).
    """
    n = len(weights)
    order = sorted(range(n), key=lambda v: -weights[v])
    best_set = _greedy_mwis(weights, adj)
    best_w = sum(weights[v] for v in _bits(best_set))
    nodes = 0
    exact = True

    def clique_bound(cand: int) -> float:
        cliques: list[int] = []
        total = 0.0
        for v in order:
            if not (cand >> v) & 1:
                continue
            for k, cm in enumerate(cliques):
                if cm & ~adj[v] == 0:
                    cliques[k] = cm | (1 << v)
                    break
            else:
                cliques.append(1 << v)
                total += weights[v]
        return total

    def rec(cand: int, chosen: int, w: float):
        nonlocal best_w, best_set, nodes, exact
        # take vertices with no remaining neighbours
        changed = True
        while changed and cand:
            changed = False
            for v in _bits(cand):
                if adj[v] & cand == 0:
                    cand &= ~(1 << v)
                    chosen |= 1 << v
                    w += weights[v]
                    changed = True
        if cand == 0:
            if w > best_w:
                best_w, best_set = w, chosen
            return
        nodes += 1
        if node_cap is not None and nodes > node_cap:
            exact = False
            return
        if w + clique_bound(cand) <= best_w:
            return
        v = max(_bits(cand), key=lambda u: (_popcount(adj[u] & cand), weights[u], -u))
        rec(cand & ~adj[v] & ~(1 << v), chosen | (1 << v), w + weights[v])
        if not exact:
            return
        rec(cand & ~(1 << v), chosen, w)

    rec((1 << n) - 1, 0, 0.0)
    return list(_bits(best_set)), exact


def _greedy_mwis(weights, adj) -> int:
    chosen, blocked = 0, 0
    for v in sorted(range(len(weights)), key=lambda v: (-weights[v], v)):
        if not (blocked >> v) & 1:
            chosen |= 1 << v
            blocked |= adj[v] | (1 << v)
    return chosen


def components(adj: dict[int, set[int]]) -> list[list[int]]:
    seen, comps = set(), []
    for s in sorted(adj):
        if s in seen:
            continue
        stack, comp = [s], []
        seen.add(s)
        while stack:
            u = stack.pop()
            comp.append(u)
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        comps.append(sorted(comp))
    return comps


def mis_on_graph(adj: dict[int, set[int]], weight: dict[int, float],
                 cap: int | None = None, node_cap: int | None = None):
    """Exact MWIS per connected component. Returns (id set, exact flag)."""
    chosen: set[int] = set()
    exact = True
    for comp in components(adj):
        if len(comp) == 1:
            chosen.add(comp[0])
            continue
        if cap is not None and len(comp) > cap:
            raise CapExceeded(f"component of size {len(comp)} exceeds cap {cap}")
        index = {v: i for i, v in enumerate(comp)}
        masks = [sum(1 << index[u] for u in adj[v]) for v in comp]
        picked, ok = mwis_bitmask([weight[v] for v in comp], masks, node_cap)
        exact &= ok
        chosen.update(comp[i] for i in picked)
    return chosen, exact


def exact_mis(S: Sequence[GeomObject], weighted: bool = False, cap: int | None = 40) -> ISolution:
    """Maximum (weight) independent set. The cap bounds each connected component."""
    S = list(S)
    by_id = {o.id: o for o in S}
    adj = adjacency(S)
    w = {o.id: (o.weight if weighted else 1.0) for o in S}
    ids, _ = mis_on_graph(adj, w, cap)
    return ISolution.of(ids, by_id, weighted)


def exact_vc(S: Sequence[GeomObject], cap: int | None = 40) -> VCSolution:
    mis = exact_mis(S, False, cap)
    return VCSolution(frozenset(o.id for o in S if o.id not in mis.ids))


def exact_vc_graph(adj: dict[int, set[int]], cap: int | None = 40) -> set[int]:
    ids, _ = mis_on_graph(adj, {v: 1.0 for v in adj}, cap)
    return set(adj) - ids


# ---------------------------------------------------------------- fractional VC

def fractional_vc_enum(adj: dict[int, set[int]]) -> float:
    """Optimal fractional vertex cover by search over {0, 1/2, 1}^n."""
    verts = sorted((v for v in adj if adj[v]), key=lambda v: (-len(adj[v]), v))
    pos = {v: i for i, v in enumerate(verts)}
    back = [[pos[u] for u in adj[v] if pos[u] < i] for i, v in enumerate(verts)]
    n = len(verts)
    best = n * 2  # in half units
    val = [0] * n

    def rec(i: int, cur: int):
        nonlocal best
        if cur >= best:
            return
        if i == n:
            best = cur
            return
        need = max((2 - val[j] for j in back[i]), default=0)
        for x in range(max(need, 0), 3):
            val[i] = x
            rec(i + 1, cur + x)
        val[i] = 0

    rec(0, 0)
    return best / 2


def exact_fractional_vc(S: Sequence[GeomObject], cap: int = 12) -> float:
    if len(S) > cap:
        raise CapExceeded(f"exact_fractional_vc limited to {cap} objects")
    return fractional_vc_enum(adjacency(S))


def fractional_vc_double_cover(adj: dict[int, set[int]]) -> float:
    """Half the maximum matching of the bipartite double cover (LP duality)."""
    left = sorted(adj)
    bip = {("L", v): {("R", u) for u in adj[v]} for v in left}
    m = _bipartite_matching_size(bip)
    return m / 2


# ---------------------------------------------------------------- matching

def _bipartite_matching_pairs(left_adj: dict) -> dict:
    """Kuhn augmenting-path matching; returns right -> left."""
    match_r: dict = {}

    def try_aug(u, seen) -> bool:
        for v in sorted(left_adj[u], key=repr):
            if v in seen:
                continue
            seen.add(v)
            if v not in match_r or try_aug(match_r[v], seen):
                match_r[v] = u
                return True
        return False

    for u in sorted(left_adj, key=repr):
        try_aug(u, set())
    return match_r


def _bipartite_matching_size(left_adj: dict) -> int:
    return len(_bipartite_matching_pairs(left_adj))


def exact_mcm(S: Sequence[GeomObject], bipartite: bool = False,
              cap: int | None = None) -> Matching:
    """Maximum-cardinality matching of the intersection graph.

    Bipartite mode saturates augmenting paths (cap 60 by default). General
    mode memoises over vertex bitmasks (cap 24 by default); passing
    ``cap=0`` lifts the cap and uses networkx's blossom algorithm beyond 24.
    """
    S = list(S)
    adj = adjacency(S, bipartite)
    if bipartite:
        limit = 60 if cap is None else cap
        if limit and len(S) > limit:
            raise CapExceeded(f"bipartite exact_mcm limited to {limit}")
        left = {o.id: adj[o.id] for o in S if o.color == "A"}
        return Matching((u, v) for v, u in _bipartite_matching_pairs(left).items())
    limit = 24 if cap is None else cap
    if limit and len(S) > limit:
        raise CapExceeded(f"general exact_mcm limited to {limit}")
    if len(S) > 24:
        import networkx as nx
        g = nx.Graph()
        g.add_nodes_from(adj)
        g.add_edges_from((u, v) for u in adj for v in adj[u] if u < v)
        return Matching(tuple(sorted(e)) for e in nx.max_weight_matching(g, maxcardinality=True))
    return Matching(general_mcm_memo(adj))


def general_mcm_memo(adj: dict[int, set[int]]) -> list[tuple[int, int]]:
    ids = sorted(adj)
    index = {v: i for i, v in enumerate(ids)}
    nb = [sum(1 << index[u] for u in adj[v]) for v in ids]

    @lru_cache(maxsize=None)
    def best(mask: int) -> tuple[int, int]:
        # returns (size, chosen pair code) for the remaining vertex set
        if mask == 0:
            return 0, -1
        v = (mask & -mask).bit_length() - 1
        rest = mask & ~(1 << v)
        top = (best(rest)[0], -1)
        for u in _bits(nb[v] & rest):
            s = 1 + best(rest & ~(1 << u))[0]
            if s > top[0]:
                top = (s, u)
        return top

    pairs = []
    mask = (1 << len(ids)) - 1
    while mask:
        v = (mask & -mask).bit_length() - 1
        _, u = best(mask)
        mask &= ~(1 << v)
        if u >= 0:
            pairs.append((ids[v], ids[u]))
            mask &= ~(1 << u)
    best.cache_clear()
    return pairs


def find_aug_path(adj: dict[int, set[int]], m: Matching, max_len: int,
                  allowed: Callable[[int, int], bool] | None = None) -> list[int] | None:
    """Exhaustive search for a simple augmenting path with at most max_len edges."""
    free = [v for v in sorted(adj) if m.mate(v) is None]
    free_set = set(free)

    def ok(u, v) -> bool:
        return allowed is None or allowed(u, v)

    def dfs(path: list[int], on: set[int]) -> list[int] | None:
        last = path[-1]
        edges_used = len(path) - 1
        for w in sorted(adj[last]):
            if w in on or not ok(last, w) or m.mate(last) == w:
                continue
            if w in free_set:
                return path + [w]
            if edges_used + 3 > max_len:
                continue
            x = m.mate(w)
            if x is None or x in on or not ok(w, x):
                continue
            path.extend((w, x))
            on.update((w, x))
            got = dfs(path, on)
            if got:
                return got
            path.pop()
            path.pop()
            on.discard(w)
            on.discard(x)
        return None

    if max_len < 1:
        return None
    for s in free:
        got = dfs([s], {s})
        if got:
            return got
    return None
