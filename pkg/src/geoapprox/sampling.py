"""Value-only estimators: sample per-subproblem solution values instead of
solving every subproblem, and boost with a median of independent runs."""

from __future__ import annotations

import math
import random
import statistics
from bisect import bisect_right
from dataclasses import dataclass, field
from itertools import accumulate
from typing import Callable, Sequence

import numpy as np

from .divide import DivideTree
from .geom import GeomObject
from .mis import ExactMISOracle, mis_stabbed_rects, rect_schedule
from .mps import ExactMPSOracle, pierce_stabbed_boxes

BOUND_TOL = 1e-9


class BoundViolation(ValueError):
    pass


@dataclass
class TermSource:
    """Terms a_0..a_{m-1} evaluated on demand.

    Without ``weights`` indices are drawn uniformly and each term must lie in
    [1, B]; with weights, index i is drawn with probability w_i/W and a_i must
    lie in [w_i, B*w_i].
    """

    m: int
    evaluator: Callable[[int], float]
    B: float
    weights: Sequence[float] | None = None
    evaluations: int = 0
    _cum: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        if self.weights is not None:
            if len(self.weights) != self.m:
                raise ValueError("weights must have one entry per term")
            self._cum = list(accumulate(self.weights))

    @property
    def total_weight(self) -> float:
        return float(self.m) if self.weights is None else self._cum[-1]

    def weight(self, i: int) -> float:
        return 1.0 if self.weights is None else self.weights[i]

    def draw(self, rng: random.Random) -> int:
        if self.weights is None:
            return rng.randrange(self.m)
        return min(bisect_right(self._cum, rng.random() * self._cum[-1]), self.m - 1)

    def value(self, i: int) -> float:
        a = self.evaluator(i)
        self.evaluations += 1
        w = self.weight(i)
        if not (w * (1 - BOUND_TOL) <= a <= self.B * w * (1 + BOUND_TOL)):
            raise BoundViolation(f"term {i} = {a} outside [{w}, {self.B * w}]")
        return a


def sample_count(B: float, eps: float) -> int:
    return math.ceil(4 * B / eps ** 2)


def estimate_sum(src: TermSource, eps: float, rng: random.Random) -> float:
    """Unbiased estimate of the term sum, within a (1 +- eps) factor with
    probability at least 3/4."""
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    if src.m == 0:
        raise ValueError("empty term source")
    ell = sample_count(src.B, eps)
    W = src.total_weight
    total = 0.0
    for _ in range(ell):
        i = src.draw(rng)
        total += src.value(i) * W / src.weight(i)
    return total / ell


def trial_rng(seed: int, trial: int) -> random.Random:
    """Independent stream per (seed, trial)."""
    state = np.random.SeedSequence([seed, trial]).generate_state(2)
    return random.Random(int(state[0]) << 32 | int(state[1]))


def median_boost(est: Callable[[random.Random], float], trials: int = 15, seed: int = 0) -> float:
    if trials < 1 or trials % 2 == 0:
        raise ValueError("trials must be a positive odd number")
    return statistics.median(est(trial_rng(seed, t)) for t in range(trials))


# ---------------------------------------------------------------- subproblem terms

class _Lazy:
    """Leaf payload that solves its subproblem only when first asked."""

    __slots__ = ("objs", "grid", "solver", "_value")

    def __init__(self, objs, grid, solver):
        self.objs, self.grid, self.solver = objs, grid, solver
        self._value = None

    @property
    def value(self) -> float:
        if self._value is None:
            self._value = self.solver(self.objs, self.grid).value
        return self._value

    @property
    def bound(self) -> int:
        return math.prod(len(ln) + 1 for ln in self.grid.lines)


@dataclass
class Estimate:
    value: float
    terms: int
    B: float
    samples_per_run: int
    evaluations: int
    groups: int = 1

    def as_dict(self) -> dict:
        return dict(self.__dict__)


BOX_FAMILIES = ("box", "rect")


def _lazy_tree(S: Sequence[GeomObject], b: int, problem: str, weighted: bool = False) -> DivideTree:
    S = list(S)
    d = S[0].dim if S else 2
    if problem == "mps":
        if b < 2:
            raise ValueError("b must be at least 2")
        oracle = ExactMPSOracle()
        schedule, stages = [(k, b) for k in range(d)], None
        solve = lambda o, g: pierce_stabbed_boxes(o, g, oracle)  # noqa: E731
    else:
        oracle = ExactMISOracle(weighted)
        schedule, stages = rect_schedule(d, b)
        solve = lambda o, g: mis_stabbed_rects(o, g, oracle)  # noqa: E731
    return DivideTree(S, schedule, lambda objs, grid: _Lazy(objs, grid, solve), stages)


def _check_family(family: str):
    if family not in BOX_FAMILIES:
        raise ValueError(f"estimation supports families {BOX_FAMILIES}, got {family!r}")


def mps_terms(S: Sequence[GeomObject], b: int = 4) -> list[_Lazy]:
    tree = _lazy_tree(S, b, "mps")
    return [lf.solution for lf in tree.leaves()]


def estimate_mps_value(S: Sequence[GeomObject], family: str = "box", eps: float = 0.3,
                       b: int = 4, trials: int = 15, seed: int = 0) -> Estimate:
    """Estimate the summed leaf piercing sizes of the box pipeline."""
    _check_family(family)
    S = list(S)
    if not S:
        return Estimate(0.0, 0, 0, 0, 0)
    terms = mps_terms(S, b)
    B = max(t.bound for t in terms)
    src = TermSource(len(terms), lambda i: terms[i].value, B)
    val = median_boost(lambda rng: estimate_sum(src, eps, rng), trials, seed)
    return Estimate(val, len(terms), B, sample_count(B, eps),
                    sum(t._value is not None for t in terms))


def mis_term_groups(S: Sequence[GeomObject], b: int = 4, weighted: bool = False) -> dict:
    """Leaves grouped by their level in every stage, with importance weights."""
    tree = _lazy_tree(S, b, "mis", weighted)
    groups: dict[tuple, list] = {}
    for lf in tree.leaves():
        w = max(o.weight for o in lf.objs.values()) if weighted else 1.0
        groups.setdefault(lf.levels, []).append((lf.solution, w))
    return groups


def mis_level_value(groups: dict) -> float:
    """Exact target of the MIS estimator: best summed level."""
    return max((sum(t.value for t, _ in g) for g in groups.values()), default=0.0)


def estimate_mis_value(S: Sequence[GeomObject], family: str = "rect", eps: float = 0.3,
                       weighted: bool = False, b: int = 4, trials: int = 15,
                       seed: int = 0) -> Estimate:
    """Estimate each level's summed leaf value and return the best level."""
    _check_family(family)
    S = list(S)
    if not S:
        return Estimate(0.0, 0, 0, 0, 0)
    groups = mis_term_groups(S, b, weighted)
    B = max(t.bound for g in groups.values() for t, _ in g)
    srcs = []
    for key in sorted(groups):
        g = groups[key]
        srcs.append(TermSource(len(g), lambda i, g=g: g[i][0].value, B,
                               [w for _, w in g] if weighted else None))

    def run(rng):
        return max(estimate_sum(s, eps, rng) for s in srcs)

    val = median_boost(run, trials, seed)
    terms = [t for g in groups.values() for t, _ in g]
    return Estimate(val, len(terms), B, sample_count(B, eps),
                    sum(t._value is not None for t in terms), len(groups))
