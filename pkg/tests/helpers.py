"""Shared generators and independent reference checks for the test suite."""

from __future__ import annotations

import itertools
import random

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, linprog, milp

from geoapprox.geom import bbox, contains_point, make_box, make_disk
from geoapprox.solutions import adjacency, edges


def rand_rects(rng: random.Random, n: int, s_min=0.01, s_max=0.2, weighted=False, color=False):
    out = []
    for i in range(n):
        lo = [rng.random(), rng.random()]
        hi = [a + rng.uniform(s_min, s_max) for a in lo]
        out.append(make_box(i, lo, hi, rng.uniform(1, 5) if weighted else 1.0,
                            rng.choice("AB") if color else None))
    return out


def rand_boxes(rng: random.Random, n: int, d: int, s_min=0.05, s_max=0.3):
    out = []
    for i in range(n):
        lo = [rng.random() for _ in range(d)]
        out.append(make_box(i, lo, [a + rng.uniform(s_min, s_max) for a in lo]))
    return out


def rand_disks(rng: random.Random, n: int, r_min=0.01, r_max=0.06, weighted=False, color=False,
               unit=True):
    """Disks; with ``unit`` set they lie inside [0, 1]^2."""
    out = []
    for i in range(n):
        r = rng.uniform(r_min, r_max)
        c = [rng.uniform(r, 1 - r) for _ in range(2)] if unit else [rng.random(), rng.random()]
        out.append(make_disk(i, c, r, rng.uniform(1, 5) if weighted else 1.0,
                             rng.choice("AB") if color else None))
    return out


def stabbed_rects(rng: random.Random, n: int, lines_per_axis=3, s_max=0.3, weighted=False):
    """Rectangles each crossing one of a few random lines per axis."""
    lines = [sorted(rng.uniform(0.1, 0.9) for _ in range(lines_per_axis)) for _ in range(2)]
    out = []
    for i in range(n):
        lo, hi = [], []
        for k in range(2):
            g = rng.choice(lines[k])
            side = rng.uniform(0.01, s_max)
            a = g - rng.uniform(0.001, 0.999) * side
            lo.append(a)
            hi.append(a + side)
        out.append(make_box(i, lo, hi, rng.uniform(1, 5) if weighted else 1.0))
    return out, lines


# ---------------------------------------------------------------- independent references

def brute_intersects_boxes(a, b) -> bool:
    (alo, ahi), (blo, bhi) = bbox(a), bbox(b)
    return all(max(x0, y0) <= min(x1, y1) for x0, x1, y0, y1 in zip(alo, ahi, blo, bhi))


def milp_vc(objs, bipartite=False) -> int:
    """Minimum vertex cover through an integer program."""
    adj = adjacency(objs, bipartite)
    ids = sorted(adj)
    E = edges(adj)
    if not E:
        return 0
    ix = {v: i for i, v in enumerate(ids)}
    A = np.zeros((len(E), len(ids)))
    for k, (u, v) in enumerate(E):
        A[k, ix[u]] = A[k, ix[v]] = 1
    res = milp(np.ones(len(ids)), constraints=LinearConstraint(A, 1, np.inf),
               integrality=np.ones(len(ids)), bounds=Bounds(0, 1))
    return round(res.fun)


def milp_mis(objs, weighted=False) -> float:
    adj = adjacency(objs)
    ids = sorted(adj)
    E = edges(adj)
    w = np.array([o.weight if weighted else 1.0 for o in sorted(objs, key=lambda o: o.id)])
    if not E:
        return float(w.sum())
    ix = {v: i for i, v in enumerate(ids)}
    A = np.zeros((len(E), len(ids)))
    for k, (u, v) in enumerate(E):
        A[k, ix[u]] = A[k, ix[v]] = 1
    res = milp(-w, constraints=LinearConstraint(A, -np.inf, 1),
               integrality=np.ones(len(ids)), bounds=Bounds(0, 1))
    return -res.fun


def lp_fractional_vc(adj) -> dict:
    """Optimal fractional vertex cover (HiGHS simplex, a vertex solution)."""
    ids = sorted(adj)
    E = edges(adj)
    if not E:
        return {v: 0.0 for v in ids}
    ix = {v: i for i, v in enumerate(ids)}
    A = np.zeros((len(E), len(ids)))
    for k, (u, v) in enumerate(E):
        A[k, ix[u]] = A[k, ix[v]] = -1
    res = linprog(np.ones(len(ids)), A_ub=A, b_ub=-np.ones(len(E)), bounds=(0, 1),
                  method="highs-ds")
    return {v: float(res.x[ix[v]]) for v in ids}


def exhaustive_mps(objs, candidates) -> int:
    """Smallest candidate subset piercing everything (tiny inputs only).

    Candidates are reduced to their distinct maximal hit sets first, which
    keeps the search exhaustive."""
    objs = list(objs)
    if not objs:
        return 0
    hits = {sum(1 << i for i, o in enumerate(objs) if contains_point(o, p)) for p in candidates}
    hits = [h for h in hits if h and not any(h != g and h & g == h for g in hits)]
    full = (1 << len(objs)) - 1
    for k in range(1, len(objs) + 1):
        for combo in itertools.combinations(hits, k):
            acc = 0
            for h in combo:
                acc |= h
            if acc == full:
                return k
    raise AssertionError("candidates do not pierce everything")


def exhaustive_mis(objs, weighted=False) -> float:
    """Best independent subset over all 2^n subsets (bitmask test)."""
    objs = sorted(objs, key=lambda o: o.id)
    adj = adjacency(objs)
    pos = {o.id: i for i, o in enumerate(objs)}
    nb = [sum(1 << pos[u] for u in adj[o.id]) for o in objs]
    w = [o.weight if weighted else 1.0 for o in objs]
    best = 0.0
    for mask in range(1 << len(objs)):
        ok, tot, m = True, 0.0, mask
        while m:
            i = (m & -m).bit_length() - 1
            if nb[i] & mask:
                ok = False
                break
            tot += w[i]
            m &= m - 1
        if ok and tot > best:
            best = tot
    return best
