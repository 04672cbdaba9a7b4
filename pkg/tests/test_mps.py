import math
import random

import numpy as np
import pytest

from geoapprox.bench import RATIO_BOUNDS
from geoapprox.divide import DivideTree, StabbingGrid
from geoapprox.geom import Cell, QuadtreeBox, make_box, make_disk, quadtree_partition
from geoapprox.mps import (
    DynPierceBoxes, DynPierceFat, ExactMPSOracle, GreedyMPSOracle, PreconditionError,
    build_box_tree, grid_cell_corners, greedy_fat_piercing, lambda_box, lambda_points,
    pierce_boundary_fat, pierce_boxes, pierce_fat, pierce_stabbed_boxes, round_to_classes,
)
from geoapprox.fat import cell_signature
from geoapprox.oracle import exact_mps
from geoapprox.solutions import PiercingSolution, pierces_all
from helpers import rand_boxes, rand_disks, rand_rects, stabbed_rects


def grid_of(lines):
    return StabbingGrid(tuple(tuple(ln) for ln in lines))


# ---------------------------------------------------------------- classes

def test_single_box_single_class():
    ci = round_to_classes([make_box(0, [0, 0], [1, 1])], StabbingGrid(((0.5,), (0.5,))))
    assert len(ci) == 1 and ci.representatives() == [0]


def test_same_slab_range_same_key():
    g = StabbingGrid(((0.5,), (0.5,)))
    a = make_box(0, [0.1, 0.2], [0.9, 0.6])
    b = make_box(1, [0.3, 0.4], [0.7, 0.8])
    assert g.class_key(a) == g.class_key(b)
    assert len(round_to_classes([a, b], g)) == 1


def test_unstabbed_box_names_id():
    g = StabbingGrid(((0.5,), (0.5,)))
    with pytest.raises(PreconditionError, match="7"):
        round_to_classes([make_box(7, [0.6, 0.1], [0.9, 0.9])], g)


def _brute_signature(o, lines):
    sig = []
    for k, ln in enumerate(lines):
        bounds = [-math.inf] + list(ln) + [math.inf]
        sig.append(frozenset(i for i in range(len(ln) + 1)
                             if bounds[i] <= o.shape.hi[k] and o.shape.lo[k] < bounds[i + 1]))
    return tuple(sig)


def test_class_count_matches_signature_enumeration():
    rng = random.Random(21)
    for _ in range(5):
        S, lines = stabbed_rects(rng, 500)
        g = grid_of(lines)
        ci = round_to_classes(S, g)
        assert len(ci) == len({_brute_signature(o, lines) for o in S})
        assert len(ci) <= g.class_bound
        assert sorted(i for ids in ci.members.values() for i in ids) == list(range(500))


# ---------------------------------------------------------------- stabbed boxes

def test_single_box_four_corners():
    # lines through both sides too, so the oracle point's cell is bounded
    o = make_box(0, [0, 0], [1, 1])
    sol = pierce_stabbed_boxes([o], StabbingGrid(((0.0, 0.5, 1.0),) * 2), ExactMPSOracle())
    assert sol.value == 4
    assert all(pierces_all([o], [p]) == [] for p in sol.points)
    assert sol.value <= 4 * exact_mps([o]).value


def test_empty_stabbed():
    assert pierce_stabbed_boxes([], StabbingGrid(((0.5,), (0.5,))), ExactMPSOracle()).value == 0


def test_stabbed_random_n200_valid_and_bounded():
    rng = random.Random(22)
    for _ in range(10):
        S, lines = stabbed_rects(rng, 200)
        g = grid_of(lines)
        sol = pierce_stabbed_boxes(S, g, ExactMPSOracle())
        assert pierces_all(S, sol.points) == []
        # the oracle is exact on the representatives, whose optimum is at most OPT(S)
        by_id = {o.id: o for o in S}
        reps = [by_id[i] for i in round_to_classes(S, g).representatives()]
        assert sol.counters["oracle_value"] == exact_mps(reps, cap_boxes=64).value
        assert sol.value <= 4 * sol.counters["oracle_value"]


def test_stabbed_small_vs_exact():
    rng = random.Random(23)
    for _ in range(40):
        S, lines = stabbed_rects(rng, rng.randint(1, 18))
        sol = pierce_stabbed_boxes(S, grid_of(lines), ExactMPSOracle())
        assert pierces_all(S, sol.points) == []
        assert sol.value <= 4 * exact_mps(S).value


def test_class_soundness_corners():
    rng = random.Random(24)
    for _ in range(20):
        S, lines = stabbed_rects(rng, 100)
        g = grid_of(lines)
        ci = round_to_classes(S, g)
        by_id = {o.id: o for o in S}
        for key, ids in ci.members.items():
            r = by_id[ci.rep[key]].shape
            p = tuple(rng.uniform(a, b) for a, b in zip(r.lo, r.hi))
            corners = grid_cell_corners(p, g)
            for i in ids:
                assert pierces_all([by_id[i]], corners) == []


def test_stabbed_3d_uses_eight_corners():
    o = make_box(0, [0, 0, 0], [1, 1, 1])
    sol = pierce_stabbed_boxes([o], StabbingGrid(((0.0, 0.5, 1.0),) * 3), ExactMPSOracle())
    assert sol.value == 8


# ---------------------------------------------------------------- trees

def test_pierce_boxes_single():
    sol = pierce_boxes([make_box(0, [0.2, 0.2], [0.3, 0.4])], 2)
    assert sol.counters["oracle_value"] == 1
    assert pierces_all([make_box(0, [0.2, 0.2], [0.3, 0.4])], sol.points) == []


def test_common_lines_single_leaf():
    rng = random.Random(25)
    S = [make_box(i, [0.5 - rng.uniform(0.01, 0.3), 0.5 - rng.uniform(0.01, 0.3)],
                  [0.5 + rng.uniform(0.01, 0.3), 0.5 + rng.uniform(0.01, 0.3)]) for i in range(30)]
    tree = build_box_tree(S, 4)
    assert len(tree.leaves()) == 1
    sol = pierce_boxes(S, 4)
    assert sol.counters["oracle_value"] == 1
    assert pierces_all(S, sol.points) == []


@pytest.mark.parametrize("oracle", [ExactMPSOracle(), GreedyMPSOracle()])
def test_pierce_boxes_300_valid(oracle):
    S = rand_rects(random.Random(26), 300, 0.05, 0.3)
    assert pierces_all(S, pierce_boxes(S, 8, oracle).points) == []


def test_pierce_boxes_ratio_small():
    rng = random.Random(27)
    bound = RATIO_BOUNDS[("mps", "box")]
    for _ in range(40):
        S = rand_rects(rng, rng.randint(1, 20), 0.05, 0.4)
        sol = pierce_boxes(S, 2)
        assert pierces_all(S, sol.points) == []
        assert sol.value <= bound * exact_mps(S).value


def test_pierce_boxes_3d():
    S = rand_boxes(random.Random(28), 120, 3)
    assert pierces_all(S, pierce_boxes(S, 3).points) == []


def test_b_below_two_rejected():
    with pytest.raises(ValueError):
        pierce_boxes([make_box(0, [0, 0], [1, 1])], 1)


# ---------------------------------------------------------------- dynamic boxes

def test_insert_then_delete_empty():
    dyn = DynPierceBoxes(4)
    dyn.insert(make_box(0, [0, 0], [1, 1]))
    dyn.delete(0)
    assert dyn.current().value == 0


def test_delete_unknown_id():
    with pytest.raises(KeyError):
        DynPierceBoxes(4).delete(3)


def _stream(rng, make, ops=500):
    live, nxt = [], 0
    for _ in range(ops):
        if live and rng.random() < 0.4:
            yield "delete", live.pop(rng.randrange(len(live)))
        else:
            o = make(nxt)
            live.append(o.id)
            nxt += 1
            yield "insert", o


def test_dynamic_boxes_stream_valid_every_op():
    rng = random.Random(29)
    dyn = DynPierceBoxes(3)
    make = lambda i: make_box(i, *(lambda lo: (lo, [a + rng.uniform(0.02, 0.3) for a in lo]))(
        [rng.random(), rng.random()]))
    for op, x in _stream(rng, make):
        dyn.insert(x) if op == "insert" else dyn.delete(x)
        assert pierces_all(dyn.live(), dyn.current().points) == []
    assert dyn.tree.counters["rebuilds"] > 0
    # rebuilding from scratch is equally valid
    live = dyn.live()
    assert pierces_all(live, pierce_boxes(live, 3).points) == []


def test_rebuild_at_counter_threshold():
    rng = random.Random(30)
    S = rand_rects(rng, 40)
    tree = DivideTree(S, [(0, 4)], lambda objs, g: PiercingSolution([]))
    need = math.ceil(40 / 4)
    for i in range(need):
        assert tree.counters["rebuilds"] == 0
        # spans every divider, so it is stored at the root and only the root ticks
        tree.insert(make_box(100 + i, [-1, 0], [2, 1]))
    assert tree.counters["rebuilds"] == 1
    assert tree.root.updates == 0 and tree.root.n_build == 40 + need


# ---------------------------------------------------------------- Lambda sets

def _touching_squares(rng, n, s_lo, s_hi):
    """Axis squares of side in [s_lo, s_hi] touching the boundary of [0,1]^2."""
    t = rng.random(n)
    edge = rng.integers(0, 4, n)
    px = np.where(edge == 0, 0.0, np.where(edge == 1, 1.0, t))
    py = np.where(edge == 2, 0.0, np.where(edge == 3, 1.0, t))
    s = rng.uniform(s_lo, s_hi, n)
    lo = np.stack([px - rng.random(n) * s, py - rng.random(n) * s], axis=1)
    return lo, lo + s[:, None]


def _all_pierced(lo, hi, pts):
    P = np.array(pts)
    inside = ((P[None, :, :] >= lo[:, None, :]) & (P[None, :, :] <= hi[:, None, :])).all(axis=2)
    return inside.any(axis=1).all()


def test_lambda_unit_square_adversarial():
    cell = Cell(QuadtreeBox(0, (0, 0)), None)
    pts = lambda_points(cell, 1, dmin=1.0)
    assert len(pts) <= 81
    lo, hi = _touching_squares(np.random.default_rng(31), 100_000, 1.0, 3.0)
    assert _all_pierced(lo, hi, pts)


def test_lambda_huge_objects():
    cell = Cell(QuadtreeBox(0, (0, 0)), None)
    pts = lambda_points(cell, 1, dmin=10.0)
    assert len(pts) <= 9
    lo, hi = _touching_squares(np.random.default_rng(32), 20_000, 10.0, 30.0)
    assert _all_pierced(lo, hi, pts)
    rng = random.Random(33)
    for _ in range(2000):
        r = rng.uniform(5, 15)
        ang = rng.uniform(0, 2 * math.pi)
        q = (rng.choice([0.0, 1.0]), rng.random())
        c = (q[0] + r * math.cos(ang) * rng.random(), q[1] + r * math.sin(ang) * rng.random())
        assert pierces_all([make_disk(0, c, r)], pts) == []


def test_lambda_empty_inner_is_outer_only():
    q = QuadtreeBox(2, (1, 2))
    assert lambda_points(Cell(q, None), 4, dmin=0.1) == lambda_box(q.lo, q.hi, 0.1)


def test_lambda_disks_touching_boundary():
    pts = lambda_box((0, 0), (1, 1), 0.25)
    rng = random.Random(34)
    for _ in range(5000):
        r = rng.uniform(0.125, 0.6)
        q = rng.choice([(rng.random(), 0.0), (rng.random(), 1.0), (0.0, rng.random()),
                        (1.0, rng.random())])
        ang = rng.uniform(0, 2 * math.pi)
        c = (q[0] + r * math.cos(ang), q[1] + r * math.sin(ang))
        assert pierces_all([make_disk(0, c, r)], pts) == []


# ---------------------------------------------------------------- fat pipeline

def _quadrants():
    return quadtree_partition([(0.25, 0.25), (0.75, 0.25), (0.25, 0.75), (0.75, 0.75)], 4)


def test_boundary_one_disk():
    cells = _quadrants()
    o = make_disk(0, [0.5, 0.25], 0.1)
    sol = pierce_boundary_fat([o], cells, 12)
    assert pierces_all([o], sol.points) == []
    assert sol.counters["fallback_points"] == 0


def test_boundary_congruent_pair_one_class():
    cells = _quadrants()
    S = [make_disk(0, [0.5, 0.25], 0.1), make_disk(1, [0.5, 0.26], 0.1)]
    sol = pierce_boundary_fat(S, cells, 12)
    assert sol.counters["classes"] == 1
    assert pierces_all(S, sol.points) == []


def test_boundary_requires_crossing():
    with pytest.raises(PreconditionError):
        pierce_boundary_fat([make_disk(0, [0.25, 0.25], 0.05)], _quadrants(), 12)


def test_boundary_random_n200():
    rng = random.Random(35)
    for _ in range(5):
        cells = quadtree_partition([(rng.random(), rng.random()) for _ in range(50)], 8)
        S = [o for o in rand_disks(rng, 1500, 0.01, 0.08)
             if len(cell_signature(o, cells)) >= 2][:200]
        sol = pierce_boundary_fat(S, cells, 12)
        assert pierces_all(S, sol.points) == []
        c = sol.counters
        assert sol.value <= c["max_lambda"] * c["oracle_value"] + c["fallback_points"]


def test_pierce_fat_single_disk():
    o = make_disk(0, [0.3, 0.3], 0.1)
    sol = pierce_fat([o], 4)
    assert sol.value >= 1 and pierces_all([o], sol.points) == []


def test_pierce_fat_disjoint_grid():
    S = [make_disk(5 * i + j, [3 * i, 3 * j], 1) for i in range(5) for j in range(5)]
    sol = pierce_fat(S, 4)
    assert sol.value >= 25
    assert pierces_all(S, sol.points) == []


def test_pierce_fat_300_random():
    S = rand_disks(random.Random(36), 300, 0.005, 0.05)
    assert pierces_all(S, pierce_fat(S, 8).points) == []


def test_pierce_fat_ratio_small():
    rng = random.Random(37)
    bound = RATIO_BOUNDS[("mps", "fat")]
    for _ in range(20):
        S = rand_disks(rng, rng.randint(1, 14), 0.03, 0.2)
        sol = pierce_fat(S, 4)
        assert pierces_all(S, sol.points) == []
        assert sol.value <= bound * exact_mps(S).value


def test_pierce_fat_rejects_thin_box():
    with pytest.raises(PreconditionError):
        pierce_fat([make_box(0, [0, 0], [1, 0.1])], 4)


def test_greedy_fat_disjoint_one_each():
    S = [make_disk(i, [3 * i, 0], 1) for i in range(7)]
    assert greedy_fat_piercing(S).value == 7


def test_greedy_fat_common_point_constant():
    rng = random.Random(38)
    c = 1 + len(lambda_box((0, 0), (1, 1), 1.0))
    for k in (5, 20, 60):
        S = []
        for i in range(k):
            ang = rng.uniform(0, 2 * math.pi)
            S.append(make_disk(i, [math.cos(ang) * 0.9, math.sin(ang) * 0.9], 1))
        sol = greedy_fat_piercing(S)
        assert pierces_all(S, sol.points) == []
        assert sol.value <= c


def test_greedy_fat_random_vs_exact():
    rng = random.Random(39)
    c = 1 + len(lambda_box((0, 0), (1, 1), 1.0))
    for _ in range(30):
        S = rand_disks(rng, rng.randint(1, 14), 0.03, 0.2)
        sol = greedy_fat_piercing(S)
        assert pierces_all(S, sol.points) == []
        assert sol.value <= c * exact_mps(S).value


def test_dynamic_fat_stream_valid():
    rng = random.Random(40)
    dyn = DynPierceFat(4)

    def make(i):
        r = rng.uniform(0.005, 0.04)
        return make_disk(i, [rng.uniform(r, 1 - r), rng.uniform(r, 1 - r)], r)

    for step, (op, x) in enumerate(_stream(rng, make, 300)):
        dyn.insert(x) if op == "insert" else dyn.delete(x)
        if step % 5 == 0:
            assert pierces_all(dyn.live(), dyn.current().points) == []
    live = dyn.live()
    assert pierces_all(live, dyn.current().points) == []
    assert pierces_all(live, pierce_fat(live, 4).points) == []
