import math
import random

import pytest

from geoapprox.bench import RATIO_BOUNDS
from geoapprox.divide import StabbingGrid, level_table
from geoapprox.geom import make_box, make_disk
from geoapprox.mis import (
    DynMISFat, DynMISRects, ExactMISOracle, GreedyMISOracle, _rect_tree,
    depth_of_representatives, greedy_fat_mis, mis_boxes_highdim, mis_fat, mis_rects,
    mis_stabbed_rects, random_Z_filter, round_select_representatives,
)
from geoapprox.mps import PreconditionError
from geoapprox.oracle import exact_mis
from geoapprox.solutions import adjacency, independence_violations
from helpers import milp_mis, rand_boxes, rand_disks, rand_rects, stabbed_rects


def grid_of(lines):
    return StabbingGrid(tuple(tuple(ln) for ln in lines))


def valid(objs, sol):
    return independence_violations({o.id: o for o in objs}, sol.ids) == []


def random_independent(rng, S):
    """Random maximal independent subset."""
    adj = adjacency(S)
    chosen, blocked = [], set()
    for o in rng.sample(S, len(S)):
        if o.id not in blocked:
            chosen.append(o.id)
            blocked |= adj[o.id] | {o.id}
    return chosen


# ---------------------------------------------------------------- representatives

def test_equal_weight_duplicates_pick_smaller_id():
    g = StabbingGrid(((0.5,), (0.5,)))
    S = [make_box(i, [0.2, 0.2], [0.8, 0.8]) for i in (4, 2, 9)]
    ci = round_select_representatives(S, g)
    assert ci.representatives() == [2]


def test_heaviest_represents():
    g = StabbingGrid(((0.5,), (0.5,)))
    S = [make_box(i, [0.2, 0.2], [0.8, 0.8], weight=w) for i, w in enumerate([3, 1, 5, 2, 4])]
    ci = round_select_representatives(S, g)
    assert [S[r].weight for r in ci.representatives()] == [5]


def test_representative_is_class_max_by_scan():
    rng = random.Random(41)
    S, lines = stabbed_rects(rng, 300, weighted=True)
    g = grid_of(lines)
    ci = round_select_representatives(S, g)
    by_id = {o.id: o for o in S}
    for key, ids in ci.members.items():
        best = max(ids, key=lambda i: (by_id[i].weight, -i))
        assert ci.rep[key] == best


def test_unstabbed_rejected():
    with pytest.raises(PreconditionError):
        round_select_representatives([make_box(0, [0.6, 0], [0.9, 1])], StabbingGrid(((0.5,), (0.5,))))


# ---------------------------------------------------------------- stabbed solver

def test_stabbed_disjoint_all_returned():
    g = StabbingGrid(((0.5, 1.5, 2.5), (0.5,)))
    S = [make_box(i, [i + 0.4, 0.4], [i + 0.6, 0.6]) for i in range(3)]
    assert mis_stabbed_rects(S, g, ExactMISOracle()).value == 3


def test_stabbed_one_class_one_chosen():
    g = StabbingGrid(((0.5,), (0.5,)))
    S = [make_box(i, [0.4 - 0.01 * i, 0.4], [0.6, 0.6 + 0.01 * i]) for i in range(8)]
    sol = mis_stabbed_rects(S, g, ExactMISOracle())
    assert sol.value == 1 and sol.counters["classes"] == 1


def test_stabbed_random_n200_ratio():
    rng = random.Random(42)
    bound = RATIO_BOUNDS[("mis", "rect")]
    for _ in range(5):
        S, lines = stabbed_rects(rng, 200)
        sol = mis_stabbed_rects(S, grid_of(lines), ExactMISOracle())
        assert valid(S, sol)
        assert sol.value * bound >= milp_mis(S)


# ---------------------------------------------------------------- depth claim

def test_depth_single():
    g = StabbingGrid(((0.5,), (0.5,)))
    S = [make_box(0, [0.4, 0.4], [0.6, 0.6])]
    ci = round_select_representatives(S, g)
    assert depth_of_representatives([0], ci, {0: S[0]}) == 1


def test_depth_four_around_a_corner():
    g = StabbingGrid(((0.4, 0.6), (0.4, 0.6)))
    lo_side, hi_side = (0.3, 0.45), (0.55, 0.7)
    big_lo, big_hi = (0.05, 0.59), (0.41, 0.95)
    S = []
    for k, (xs, ys, bx, by) in enumerate([(lo_side, lo_side, big_lo, big_lo),
                                          (hi_side, hi_side, big_hi, big_hi),
                                          (hi_side, lo_side, big_hi, big_lo),
                                          (lo_side, hi_side, big_lo, big_hi)]):
        S.append(make_box(k, [xs[0], ys[0]], [xs[1], ys[1]], weight=1))
        S.append(make_box(10 + k, [bx[0], by[0]], [bx[1], by[1]], weight=2))
    by_id = {o.id: o for o in S}
    ci = round_select_representatives(S, g)
    assert independence_violations(by_id, [0, 1, 2, 3]) == []
    assert len({ci.key_of[i] for i in range(4)}) == 4
    assert depth_of_representatives([0, 1, 2, 3], ci, by_id) == 4


def test_depth_at_most_four_random():
    rng = random.Random(43)
    for _ in range(200):
        S, lines = stabbed_rects(rng, 60, weighted=True)
        ci = round_select_representatives(S, grid_of(lines))
        I = random_independent(rng, S)
        assert depth_of_representatives(I, ci, {o.id: o for o in S}) <= 4


def test_z_filter_empty():
    g = StabbingGrid(((0.5,), (0.5,)))
    assert random_Z_filter([], round_select_representatives([], g), g, random.Random(0)) == set()


def test_z_filter_independent_and_mean():
    rng = random.Random(44)
    S, lines = stabbed_rects(rng, 120, lines_per_axis=4)
    g = grid_of(lines)
    by_id = {o.id: o for o in S}
    ci = round_select_representatives(S, g)
    I = random_independent(rng, S)
    sizes = []
    for _ in range(2000):
        out = random_Z_filter(I, ci, g, rng)
        assert independence_violations(by_id, out) == []
        sizes.append(len(out))
    mean = sum(sizes) / len(sizes)
    sd = math.sqrt(sum((x - mean) ** 2 for x in sizes) / (len(sizes) - 1))
    assert abs(mean - len(I) / 16) <= 3 * sd / math.sqrt(len(sizes))


# ---------------------------------------------------------------- rectangle trees

def test_rects_disjoint_all():
    S = [make_box(5 * i + j, [i, j], [i + 0.5, j + 0.5]) for i in range(5) for j in range(5)]
    assert mis_rects(S, 3).value == 25


def test_rects_copies_one():
    S = [make_box(i, [0.1, 0.1], [0.4, 0.3]) for i in range(20)]
    assert mis_rects(S, 3).value == 1


def test_rects_random_300_ratio():
    rng = random.Random(45)
    bound = RATIO_BOUNDS[("mis", "rect")]
    for weighted in (False, True):
        S = rand_rects(rng, 300, 0.01, 0.1, weighted=weighted)
        sol = mis_rects(S, 4, weighted=weighted)
        assert valid(S, sol)
        assert sol.value * bound >= milp_mis(S, weighted) - 1e-9


def test_best_of_levels_recomputation():
    rng = random.Random(46)
    for _ in range(10):
        S = rand_rects(rng, 150, 0.01, 0.15)
        tree = _rect_tree(S, 3, ExactMISOracle(), 2)
        sol = mis_rects(S, 3)
        rows = level_table(tree.root, lambda s: s.value)
        assert sol.counters["level_value"] == max(sum(r) for r in rows)
        # completion only adds objects
        assert sol.value >= sol.counters["level_value"]


def test_removal_keeps_independence():
    rng = random.Random(47)
    S = rand_rects(rng, 200, 0.01, 0.1)
    sol = mis_rects(S, 4)
    for i in list(sol.ids)[:20]:
        assert independence_violations({o.id: o for o in S}, set(sol.ids) - {i}) == []


def test_rects_greedy_oracle_valid():
    S = rand_rects(random.Random(48), 300, 0.01, 0.1)
    assert valid(S, mis_rects(S, 4, GreedyMISOracle()))


def test_rects_reject_3d():
    with pytest.raises(ValueError):
        mis_rects(rand_boxes(random.Random(0), 3, 3), 2)


# ---------------------------------------------------------------- higher dimension

def test_highdim_disjoint_all():
    S = [make_box(i, [2 * i, 0, 2 * i], [2 * i + 1, 1, 2 * i + 1]) for i in range(10)]
    assert mis_boxes_highdim(S, 2).value == 10


def test_highdim_common_point_one():
    rng = random.Random(49)
    S = [make_box(i, [0.5 - rng.random() * 0.3] * 3, [0.5 + rng.random() * 0.3] * 3)
         for i in range(15)]
    assert mis_boxes_highdim(S, 2).value == 1


def test_highdim_random_150():
    rng = random.Random(50)
    S = rand_boxes(rng, 150, 3, 0.05, 0.3)
    sol = mis_boxes_highdim(S, 3)
    assert valid(S, sol)
    assert sol.value * RATIO_BOUNDS[("mis", "box")] >= milp_mis(S)


# ---------------------------------------------------------------- fat objects

def test_fat_disjoint_all():
    S = [make_disk(5 * i + j, [3 * i, 3 * j], 1) for i in range(5) for j in range(5)]
    assert mis_fat(S, 4).value == 25


def test_fat_common_point_one():
    rng = random.Random(51)
    S = []
    for i in range(30):
        ang = rng.uniform(0, 2 * math.pi)
        S.append(make_disk(i, [0.5 + 0.05 * math.cos(ang), 0.5 + 0.05 * math.sin(ang)], 0.1))
    assert mis_fat(S, 4).value == 1


def test_fat_weighted_random_200():
    rng = random.Random(52)
    S = rand_disks(rng, 200, 0.01, 0.05, weighted=True)
    sol = mis_fat(S, 6, weighted=True)
    assert valid(S, sol)
    assert sol.value == pytest.approx(sum(o.weight for o in S if o.id in sol.ids))
    assert sol.value * RATIO_BOUNDS[("mis", "fat")] >= milp_mis(S, True)


def test_greedy_fat_chain_picks_smallest():
    S = [make_disk(i, [0, 0], 1 + i) for i in range(6)]
    sol = greedy_fat_mis(S)
    assert sol.ids == {0}


def test_greedy_fat_disjoint_all():
    S = [make_disk(i, [3 * i, 0], 1) for i in range(8)]
    assert greedy_fat_mis(S).value == 8


def test_greedy_fat_random_150_measured():
    rng = random.Random(53)
    worst = 1.0
    for _ in range(5):
        S = rand_disks(rng, 150, 0.01, 0.06)
        sol = greedy_fat_mis(S)
        assert valid(S, sol)
        worst = max(worst, milp_mis(S) / sol.value)
    print(f"greedy fat MIS measured c = {worst:.3f}")
    assert worst <= RATIO_BOUNDS[("mis", "fat")]


def test_fat_weighted_exact_under_cap():
    rng = random.Random(54)
    S = rand_disks(rng, 30, 0.05, 0.2, weighted=True)
    assert greedy_fat_mis(S, True).value == pytest.approx(exact_mis(S, True).value)


# ---------------------------------------------------------------- dynamic

def _run_stream(dyn, rng, make, ops=400, check_every=1):
    live, nxt = [], 0
    for step in range(ops):
        if live and rng.random() < 0.4:
            dyn.delete(live.pop(rng.randrange(len(live))))
        else:
            dyn.insert(make(nxt))
            live.append(nxt)
            nxt += 1
        if step % check_every == 0:
            sol = dyn.current()
            assert set(sol.ids) <= set(live)
            assert valid(dyn.live(), sol)


def test_dynamic_rects_stream():
    rng = random.Random(55)

    def make(i):
        lo = [rng.random(), rng.random()]
        return make_box(i, lo, [a + rng.uniform(0.01, 0.15) for a in lo], rng.uniform(1, 5))

    dyn = DynMISRects(3, weighted=True)
    _run_stream(dyn, rng, make)
    live = dyn.live()
    assert valid(live, mis_rects(live, 3, weighted=True))


def test_dynamic_fat_stream():
    rng = random.Random(56)

    def make(i):
        r = rng.uniform(0.005, 0.04)
        return make_disk(i, [rng.uniform(r, 1 - r), rng.uniform(r, 1 - r)], r)

    dyn = DynMISFat(4)
    _run_stream(dyn, rng, make, 300, check_every=3)
    live = dyn.live()
    assert valid(live, mis_fat(live, 4))
