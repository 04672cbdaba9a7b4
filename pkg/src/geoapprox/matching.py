"""Maximum-cardinality matching in intersection graphs: maximal matching
maintenance, layered DFS for short augmenting paths, color-coding families
for non-bipartite graphs, and phase-based dynamic structures."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .geom import GeomObject
from .solutions import Matching, adjacency, edge_allowed


# ---------------------------------------------------------------- maximal matching

class MaximalMatching:
    """Greedy maximal matching kept maximal under insertions and deletions."""

    def __init__(self, bipartite: bool = False, objs: Iterable[GeomObject] = ()):
        self.bipartite = bipartite
        self.objs: dict[int, GeomObject] = {}
        self.m = Matching()
        for o in objs:
            self.insert(o)

    def _match_free(self, oid: int):
        o = self.objs[oid]
        for u in sorted(self.objs):
            if u != oid and self.m.mate(u) is None and edge_allowed(o, self.objs[u], self.bipartite):
                self.m.add(oid, u)
                return

    def insert(self, o: GeomObject) -> Matching:
        if o.id in self.objs:
            raise ValueError(f"id {o.id} already present")
        self.objs[o.id] = o
        self._match_free(o.id)
        return self.m

    def delete(self, oid: int) -> Matching:
        if oid not in self.objs:
            raise KeyError(f"unknown id {oid}")
        v = self.m.remove(oid)
        del self.objs[oid]
        if v is not None:
            self._match_free(v)
        return self.m


def greedy_maximal_matching(adj: dict[int, set[int]]) -> Matching:
    m = Matching()
    for u in sorted(adj):
        if m.mate(u) is None:
            for v in sorted(adj[u]):
                if m.mate(v) is None:
                    m.add(u, v)
                    break
    return m


# ---------------------------------------------------------------- augmenting paths

class MaskGraph:
    """Graph over indices 0..n-1 with adjacency bitmasks (lowest index first)."""

    def __init__(self, adj: dict[int, set[int]], labels: dict[int, int] | None = None,
                 n: int | None = None):
        if labels is None:
            labels = {v: i for i, v in enumerate(sorted(adj))}
        self.labels = labels
        self.n = max(max(labels.values(), default=-1) + 1, n or 0)
        self.ids = [None] * self.n
        for v, i in labels.items():
            self.ids[i] = v
        self.nb = [0] * self.n
        for v, nbrs in adj.items():
            self.nb[labels[v]] = sum(1 << labels[u] for u in nbrs)
        self.present = sum(1 << labels[v] for v in adj)


def _low(mask: int) -> int:
    return (mask & -mask).bit_length() - 1


@dataclass
class AugTrace:
    """Instrumentation of a single call: deletions made on failure and output paths."""

    failed: list = field(default_factory=list)  # (layer i, vertex u, paths found so far)
    paths: list = field(default_factory=list)

    def discipline_violations(self) -> list[tuple]:
        """Failed (i, u) that later reappear as the i-th interior u of an output path."""
        bad = []
        for i, u, k in self.failed:
            for p in self.paths[k:]:
                if p[2 * i - 1] == u:
                    bad.append((i, u, tuple(p)))
        return bad


def _maximal_aug_paths_idx(ell: int, g: MaskGraph, mate: list[int], Z: int | None = None,
                           excluded: int = 0, trace: AugTrace | None = None) -> list[list[int]]:
    """Layered DFS on indices. With Z set, only edges between Z and its
    complement are used (and only matched edges crossing Z)."""
    matched = 0
    for i in range(g.n):
        if mate[i] >= 0:
            if Z is None or ((Z >> i) & 1) != ((Z >> mate[i]) & 1):
                matched |= 1 << i
    # exposed vertices only: matched vertices whose edge misses G_Z are not endpoints
    X = g.present & ~excluded & ~sum(1 << i for i in range(g.n) if mate[i] >= 0)
    Xs = [0] + [matched & ~excluded for _ in range(ell)]
    out: list[list[int]] = []
    nb = g.nb

    def nbr(u: int, allowed: int) -> int:
        m = nb[u] & allowed
        if Z is not None:
            m &= ~Z if (Z >> u) & 1 else Z
        return _low(m) if m else -1

    def extend(walk: list[int], on: int) -> bool:
        nonlocal X
        i = len(walk) // 2
        ui = walk[-1]
        vi = mate[ui]
        walk.append(vi)
        on |= 1 << vi
        if i == ell:
            u_end = nbr(vi, X & ~on)
            if u_end < 0:
                Xs[ell] &= ~(1 << ui)
                if trace is not None:
                    trace.failed.append((ell, ui, len(out)))
                walk.pop()
                return False
            path = walk + [u_end]
            out.append(path)
            X &= ~((1 << path[0]) | (1 << u_end))
            inner = 0
            for t in path[1:-1]:
                inner |= 1 << t
            for k in range(1, ell + 1):
                Xs[k] &= ~inner
            return True
        while True:
            nxt = nbr(vi, Xs[i + 1] & ~(1 << ui) & ~on)
            if nxt < 0:
                break
            walk.append(nxt)
            if extend(walk, on | (1 << nxt)):
                return True
            walk.pop()
            # extend deleted nxt from X_{i+1}, so the loop advances
        Xs[i] &= ~(1 << ui)
        if trace is not None:
            trace.failed.append((i, ui, len(out)))
        walk.pop()
        return False

    u1 = 0
    while True:
        cand = Xs[1] >> u1
        if not cand:
            break
        u1 += _low(cand)
        if (Xs[1] >> u1) & 1:
            v0 = nbr(u1, X & ~(1 << u1))
            if v0 < 0:
                Xs[1] &= ~(1 << u1)
            else:
                extend([v0, u1], (1 << v0) | (1 << u1))
        u1 += 1
    if trace is not None:
        trace.paths.extend(out)
    return out


def maximal_aug_paths(ell: int, adj: dict[int, set[int]], m: Matching, Z: set | None = None,
                      excluded: Iterable[int] = (), trace: AugTrace | None = None) -> list[list[int]]:
    """A maximal set of vertex-disjoint augmenting paths with 2*ell+1 edges.

    Assumes ``m`` has no augmenting path shorter than that. Paths are vertex
    lists v0 u1 v1 ... u_ell v_ell u_{ell+1} of object ids.
    """
    if ell < 1:
        raise ValueError("ell must be at least 1")
    g = MaskGraph(adj)
    mate = [-1] * g.n
    for u, v in m.partner.items():
        mate[g.labels[u]] = g.labels[v]
    zmask = None if Z is None else sum(1 << g.labels[v] for v in Z if v in g.labels)
    ex = sum(1 << g.labels[v] for v in excluded if v in g.labels)
    paths = _maximal_aug_paths_idx(ell, g, mate, zmask, ex, trace)
    res = [[g.ids[i] for i in p] for p in paths]
    if trace is not None:
        trace.failed = [(i, g.ids[u], k) for i, u, k in trace.failed]
        trace.paths = [[g.ids[i] for i in p] for p in trace.paths]
    return res


def augment_all(m: Matching, paths: Sequence[Sequence[int]]) -> None:
    before = m.size
    for p in paths:
        m.augment(p)
    assert m.size == before + len(paths)


# ---------------------------------------------------------------- bipartite

def _initial(adj, M0: Matching | None) -> Matching:
    return greedy_maximal_matching(adj) if M0 is None else M0.copy()


def approx_bipartite_mcm(S: Sequence[GeomObject], eps: float, M0: Matching | None = None,
                         adj: dict | None = None) -> tuple[Matching, dict]:
    """Augment along maximal sets of shortest augmenting paths for
    ell = 1 .. ceil(1/eps); |M| >= OPT * (ell+1)/(ell+2) afterwards."""
    if adj is None:
        adj = adjacency(list(S), bipartite=True)
    m = _initial(adj, M0)
    ell_max = math.ceil(1 / eps)
    per = []
    for ell in range(1, ell_max + 1):
        paths = maximal_aug_paths(ell, adj, m)
        augment_all(m, paths)
        per.append(len(paths))
    return m, {"iterations": ell_max, "paths": per}


# ---------------------------------------------------------------- color coding

@dataclass
class ZFamily:
    sets: list  # bitmasks over labels 0..n-1
    n: int
    ell: int
    trials: int

    def separates(self, A: Iterable[int], B: Iterable[int]) -> bool:
        a = sum(1 << i for i in A)
        b = sum(1 << i for i in B)
        return any(z & a == a and z & b == 0 for z in self.sets)

    def __len__(self) -> int:
        return len(self.sets)


def family_trials(n: int, ell: int) -> int:
    return max(1, math.ceil(math.e ** ell * ell * math.log(max(n, 2))))


def build_z_family(n: int, ell: int, rng: random.Random, trials: int | None = None) -> ZFamily:
    """Random maps h: [n] -> [ell], each expanded over all index subsets I
    into Z = {v : h(v) in I}. Duplicate sets are dropped."""
    if ell < 1:
        raise ValueError("ell must be at least 1")
    T = family_trials(n, ell) if trials is None else trials
    seen: dict[int, None] = {}
    for _ in range(T):
        h = [rng.randrange(ell) for _ in range(n)]
        by_color = [0] * ell
        for v, c in enumerate(h):
            by_color[c] |= 1 << v
        for I in range(1 << ell):
            z = 0
            for c in range(ell):
                if (I >> c) & 1:
                    z |= by_color[c]
            seen.setdefault(z, None)
    return ZFamily(list(seen), n, ell, T)


def general_ell_max(eps: float) -> int:
    return max(0, math.floor((1 / eps - 2) / 2))


def approx_general_mcm(S: Sequence[GeomObject], eps: float, M0: Matching | None = None,
                       rng: random.Random | None = None, adj: dict | None = None,
                       labels: dict | None = None, families: dict | None = None,
                       trials: int | None = None, n: int | None = None) -> tuple[Matching, dict]:
    """For ell = 1 .. floor((1/eps - 2)/2), sweep a color-coding family and
    collect vertex-disjoint augmenting paths in each bipartite subgraph G_Z."""
    rng = rng or random.Random(0)
    if adj is None:
        adj = adjacency(list(S))
    m = _initial(adj, M0)
    g = MaskGraph(adj, labels, n)
    ell_max = general_ell_max(eps)
    per = []
    for ell in range(1, ell_max + 1):
        k = 2 * ell + 2
        key = (g.n, k)
        if families is not None and key in families:
            fam = families[key]
        else:
            fam = build_z_family(g.n, k, rng, trials)
            if families is not None:
                families[key] = fam
        mate = [-1] * g.n
        for u, v in m.partner.items():
            mate[g.labels[u]] = g.labels[v]
        used = 0
        found: list[list[int]] = []
        for z in fam.sets:
            paths = _maximal_aug_paths_idx(ell, g, mate, z, used)
            for p in paths:
                for t in p:
                    used |= 1 << t
            found.extend(paths)
        augment_all(m, [[g.ids[i] for i in p] for p in found])
        per.append(len(found))
    return m, {"iterations": ell_max, "paths": per}


# ---------------------------------------------------------------- dynamic

class _MInstance:
    def __init__(self, b: int, eps: float):
        self.b = b
        self.phase_len = max(1, math.floor(eps * b))
        self.ops = 0
        self.m = Matching()
        self.phases = 0


class DynMCM:
    """Phase-based dynamic matching served from the guess b with b <= |M0| < 2b.

    A maximal matching M0 is maintained throughout. Within a phase,
    insertions leave the served matching alone and deletions drop the
    incident matched edge; at a phase end the served instance recomputes
    from M0. In general mode object ids get labels in [0, cap), with cap
    doubled or halved (and labels rebuilt) as the live count crosses cap or
    cap/4.
    """

    def __init__(self, bipartite: bool, eps: float = 1 / 3, seed: int = 0,
                 trials: int | None = None):
        self.bipartite = bipartite
        self.eps = eps
        self.rng = random.Random(seed)
        self.trials = trials
        self.mm = MaximalMatching(bipartite)
        self.adj: dict[int, set[int]] = {}
        self.instances: dict[int, _MInstance] = {}
        self.served: _MInstance | None = None
        self.cap = 1
        self.labels: dict[int, int] = {}
        self.families: dict = {}
        self.counters = {"recomputes": 0, "relabels": 0}

    # label management for the color-coding family
    def _relabel(self):
        self.labels = {v: i for i, v in enumerate(sorted(self.adj))}
        self.families = {}
        self.counters["relabels"] += 1

    def _label_insert(self, oid: int):
        if len(self.adj) > self.cap:
            while self.cap < len(self.adj):
                self.cap *= 2
            self._relabel()
        else:
            free = set(range(self.cap)) - set(self.labels.values())
            self.labels[oid] = min(free)

    def _label_delete(self, oid: int):
        del self.labels[oid]
        if self.cap > 1 and len(self.adj) < self.cap / 4:
            self.cap //= 2
            self._relabel()

    def _ensure(self):
        top = 1 << max(0, math.ceil(math.log2(len(self.adj) + 1)))
        b = 1
        while b <= top:
            if b not in self.instances:
                inst = _MInstance(b, self.eps)
                inst.m = self.mm.m.copy()
                self.instances[b] = inst
            b *= 2

    def _recompute(self, inst: _MInstance):
        objs = list(self.mm.objs.values())
        if self.bipartite:
            m, _ = approx_bipartite_mcm(objs, self.eps, self.mm.m, self.adj)
        else:
            m, _ = approx_general_mcm(objs, self.eps, self.mm.m, self.rng, self.adj,
                                      self.labels, self.families, self.trials, self.cap)
        inst.m = m
        inst.ops = 0
        inst.phases += 1
        self.counters["recomputes"] += 1

    def _pick(self):
        self._ensure()
        est = self.mm.m.size
        chosen = None
        for b in sorted(self.instances):
            if b <= est < 2 * b:
                chosen = self.instances[b]
                break
        if chosen is None:
            chosen = self.instances[min(self.instances)]
        if chosen.ops >= chosen.phase_len:
            self._recompute(chosen)
        self.served = chosen

    def insert(self, o: GeomObject):
        if o.id in self.adj:
            raise ValueError(f"id {o.id} already present")
        self.adj[o.id] = set()
        for u, p in self.mm.objs.items():
            if edge_allowed(o, p, self.bipartite):
                self.adj[o.id].add(u)
                self.adj[u].add(o.id)
        self.mm.insert(o)
        if not self.bipartite:
            self._label_insert(o.id)
        for inst in self.instances.values():
            inst.ops += 1
        self._pick()

    def delete(self, oid: int):
        if oid not in self.adj:
            raise KeyError(f"unknown id {oid}")
        for u in self.adj.pop(oid):
            self.adj[u].discard(oid)
        self.mm.delete(oid)
        if not self.bipartite:
            self._label_delete(oid)
        for inst in self.instances.values():
            inst.m.remove(oid)
            inst.ops += 1
        self._pick()

    def live(self) -> list[GeomObject]:
        return list(self.mm.objs.values())

    def current(self) -> Matching:
        return Matching() if self.served is None else self.served.m.copy()
