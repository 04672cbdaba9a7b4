"""Instance and update-stream generation, problem runners with validation
and oracle ratios, and a suite driver that writes JSONL and CSV reports."""

from __future__ import annotations

import csv
import io
import json
import math
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .fat import _fit_domain
from .geom import GeomObject, make_box, make_disk, object_to_record, read_instance, record_to_object
from .matching import DynMCM, approx_bipartite_mcm, approx_general_mcm
from .mis import DynMISFat, DynMISRects, make_oracle as mis_oracle, mis_boxes_highdim, mis_fat, mis_rects
from .mps import FAT_ASPECT, DynPierceBoxes, DynPierceFat, make_oracle as mps_oracle, pierce_boxes, pierce_fat
from .oracle import CapExceeded, exact_mcm, exact_mis, exact_mps, exact_vc
from .solutions import independence_violations, matching_violations, pierces_all, uncovered_edges
from .vc import DynVC, vc_static

GEN_FAMILIES = ("box", "fatbox", "disk")


# ---------------------------------------------------------------- generation

@dataclass(frozen=True)
class GeneratorSpec:
    """Random instance recipe; the same spec always yields the same objects.

    Sizes are uniform in [s_min, s_max] (box side or disk diameter). Box
    aspect ratios are uniform in ``aspect``. ``color_mix`` is the probability
    of color "A" (None leaves objects uncolored). ``stabbed`` > 0 picks that
    many lines per axis and forces every box across one of them.
    """

    family: str = "box"
    n: int = 100
    dimension: int = 2
    s_min: float = 0.01
    s_max: float = 0.1
    aspect: tuple = (1.0, 1.0)
    color_mix: float | None = None
    weights: tuple | None = None
    seed: int = 0
    stabbed: int = 0

    def validate(self):
        if self.family not in GEN_FAMILIES:
            raise ValueError(f"family must be one of {GEN_FAMILIES}")
        if self.n < 0:
            raise ValueError("n must be non-negative")
        if not 2 <= self.dimension <= 4 or (self.family == "disk" and self.dimension != 2):
            raise ValueError("dimension must be 2..4 (disks: 2)")
        if not 0 < self.s_min <= self.s_max <= 1:
            raise ValueError("need 0 < s_min <= s_max <= 1")
        a_lo, a_hi = self.aspect
        if not 1 <= a_lo <= a_hi:
            raise ValueError("aspect bounds need 1 <= lo <= hi")
        if self.family == "fatbox" and a_lo > FAT_ASPECT:
            raise ValueError(f"fat boxes need aspect at most {FAT_ASPECT}")
        if self.color_mix is not None and not 0 <= self.color_mix <= 1:
            raise ValueError("color_mix must lie in [0, 1]")
        if self.weights is not None and not 0 < self.weights[0] <= self.weights[1]:
            raise ValueError("weight bounds need 0 < lo <= hi")
        if self.stabbed < 0 or (self.stabbed and self.family == "disk"):
            raise ValueError("stabbed mode applies to boxes only")

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorSpec":
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown generator fields {sorted(extra)}")
        d = dict(d)
        for k in ("aspect", "weights"):
            if d.get(k) is not None:
                d[k] = tuple(d[k])
        return cls(**d)


class _Gen:
    def __init__(self, spec: GeneratorSpec, rng: random.Random):
        spec.validate()
        self.spec, self.rng = spec, rng
        d = spec.dimension
        self.lines = [sorted(rng.uniform(0.1, 0.9) for _ in range(spec.stabbed)) for _ in range(d)]

    def make(self, oid: int) -> GeomObject:
        sp, rng = self.spec, self.rng
        s = rng.uniform(sp.s_min, sp.s_max)
        w = rng.uniform(*sp.weights) if sp.weights else 1.0
        color = None
        if sp.color_mix is not None:
            color = "A" if rng.random() < sp.color_mix else "B"
        if sp.family == "disk":
            r = s / 2
            c = [rng.uniform(r, 1 - r) for _ in range(2)]
            return make_disk(oid, c, r, w, color)
        a_lo, a_hi = sp.aspect
        if sp.family == "fatbox":
            a_hi = min(a_hi, FAT_ASPECT)
        a = rng.uniform(a_lo, a_hi)
        sides = [s] * sp.dimension
        k = rng.randrange(sp.dimension)
        sides[k] = min(1.0, s * a)
        if sp.stabbed:
            lo = []
            for ax, side in enumerate(sides):
                g = rng.choice(self.lines[ax])
                lo.append(g - rng.random() * side)
        else:
            lo = [rng.uniform(0, 1 - side) for side in sides]
        return make_box(oid, lo, [x + side for x, side in zip(lo, sides)], w, color)


def generate(spec: GeneratorSpec) -> list[GeomObject]:
    gen = _Gen(spec, random.Random(spec.seed))
    return [gen.make(i) for i in range(spec.n)]


def stabbing_lines(spec: GeneratorSpec) -> list[list[float]]:
    """The lines used by stabbed mode for this spec."""
    return _Gen(spec, random.Random(spec.seed)).lines


@dataclass
class UpdateStream:
    ops: list  # ("insert", GeomObject) or ("delete", id)
    checkpoints: list = field(default_factory=list)

    def dumps(self) -> str:
        out = []
        for kind, arg in self.ops:
            rec = {"op": kind, "obj": object_to_record(arg)} if kind == "insert" else {"op": kind, "id": arg}
            out.append(json.dumps(rec))
        out.append(json.dumps({"checkpoints": self.checkpoints}))
        return "\n".join(out) + "\n"

    @classmethod
    def loads(cls, text: str) -> "UpdateStream":
        ops, cps = [], []
        live = set()
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            rec = json.loads(line)
            if "checkpoints" in rec:
                cps = list(rec["checkpoints"])
            elif rec.get("op") == "insert":
                o = record_to_object(rec["obj"])
                if o.id in live:
                    raise ValueError(f"line {lineno}: id {o.id} already live")
                live.add(o.id)
                ops.append(("insert", o))
            elif rec.get("op") == "delete":
                if rec["id"] not in live:
                    raise ValueError(f"line {lineno}: delete of non-live id {rec['id']}")
                live.discard(rec["id"])
                ops.append(("delete", rec["id"]))
            else:
                raise ValueError(f"line {lineno}: unknown record")
        return cls(ops, cps)

    def inserted(self) -> list[GeomObject]:
        return [a for k, a in self.ops if k == "insert"]


def generate_stream(spec: GeneratorSpec, ops: int, churn: float = 0.3, window: int | None = None,
                    checkpoint_every: int = 50) -> UpdateStream:
    """Random churn (each op deletes a uniform live id with probability
    ``churn``) or, with ``window`` set, a sliding window that deletes the
    oldest object once ``window`` are live."""
    if not 0 <= churn < 1:
        raise ValueError("churn must lie in [0, 1)")
    if window is not None and window < 1:
        raise ValueError("window must be positive")
    rng = random.Random(spec.seed)
    gen = _Gen(spec, rng)
    live: list[int] = []
    out = []
    nid = 0
    for _ in range(ops):
        if window is not None:
            delete = len(live) >= window
        else:
            delete = bool(live) and rng.random() < churn
        if delete:
            k = live.pop(0) if window is not None else live.pop(rng.randrange(len(live)))
            out.append(("delete", k))
        else:
            out.append(("insert", gen.make(nid)))
            live.append(nid)
            nid += 1
    cps = [i for i in range(ops) if checkpoint_every and (i + 1) % checkpoint_every == 0]
    if ops and (not cps or cps[-1] != ops - 1):
        cps.append(ops - 1)
    return UpdateStream(out, cps)


# ---------------------------------------------------------------- runners

@dataclass
class Outcome:
    value: float
    violations: int
    counters: dict
    payload: object = None


def _counters(sol) -> dict:
    return dict(getattr(sol, "counters", {}) or {})


def _mps_check(objs, sol) -> Outcome:
    return Outcome(sol.value, len(pierces_all(objs, sol.points)), _counters(sol), sol.points)


def _mis_check(objs, sol) -> Outcome:
    bad = independence_violations({o.id: o for o in objs}, sol.ids)
    return Outcome(sol.value, len(bad), _counters(sol), sorted(sol.ids))


def _vc_check(bipartite):
    def check(objs, sol) -> Outcome:
        return Outcome(sol.value, len(uncovered_edges(objs, sol.ids, bipartite)), _counters(sol),
                       sorted(sol.ids))
    return check


def _mcm_check(bipartite):
    def check(objs, m) -> Outcome:
        bad = matching_violations({o.id: o for o in objs}, m, bipartite)
        return Outcome(m.size, len(bad), {}, m.pairs())
    return check


def _mps_static(objs, family, p):
    oracle = mps_oracle(p.get("oracle", "exact"))
    if family == "fat":
        return pierce_fat(objs, p.get("b", 4), oracle=oracle)
    return pierce_boxes(objs, p.get("b", 4), oracle)


def _mps_dynamic(family, p, d, domain):
    oracle = mps_oracle(p.get("oracle", "exact"))
    if family == "fat":
        return DynPierceFat(p.get("b", 4), oracle=oracle, d=d, domain=domain)
    return DynPierceBoxes(p.get("b", 4), oracle, d)


def _mis_static(objs, family, p):
    w = bool(p.get("weighted", False))
    oracle = mis_oracle(p.get("oracle", "exact"), w)
    if family == "fat":
        return mis_fat(objs, p.get("b", 4), oracle=oracle, weighted=w)
    if objs and objs[0].dim >= 3:
        return mis_boxes_highdim(objs, p.get("b", 4), oracle, w)
    return mis_rects(objs, p.get("b", 4), oracle, w)


def _mis_dynamic(family, p, d, domain):
    w = bool(p.get("weighted", False))
    oracle = mis_oracle(p.get("oracle", "exact"), w)
    if family == "fat":
        return DynMISFat(p.get("b", 4), oracle=oracle, weighted=w, d=d, domain=domain)
    return DynMISRects(p.get("b", 4), oracle, w, d)


def _vc_kw(p):
    return {k: p[k] for k in ("eps", "gamma", "delta", "mwu_delta") if k in p}


def _vc_static(objs, family, p):
    return vc_static(objs, family, **_vc_kw(p))


def _vc_dynamic(family, p, d, domain):
    return DynVC(family, **_vc_kw(p))


def _mcm_static(objs, family, p):
    eps = p.get("eps", 1 / 3)
    if family == "bipartite":
        return approx_bipartite_mcm(objs, eps)[0]
    return approx_general_mcm(objs, eps, rng=random.Random(p.get("seed", 0)),
                              trials=p.get("trials"))[0]


def _mcm_dynamic(family, p, d, domain):
    return DynMCM(family == "bipartite", p.get("eps", 1 / 3), p.get("seed", 0), p.get("trials"))


def _mps_oracle(objs, family, p):
    sol = exact_mps(objs)
    return sol.value, "exact" if sol.exact else "vs-upper-bound"


def _mis_oracle(objs, family, p):
    return exact_mis(objs, bool(p.get("weighted", False))).value, "exact"


def _vc_oracle(objs, family, p):
    if family.startswith("bipartite"):
        return exact_mcm(objs, True, cap=0).size, "exact"
    return exact_vc(objs).value, "exact"


def _mcm_oracle(objs, family, p):
    return exact_mcm(objs, family == "bipartite", cap=0).size, "exact"


PROBLEMS = {
    "mps": {"families": ("box", "fat"), "maximize": False},
    "mis": {"families": ("rect", "box", "fat"), "maximize": True},
    "vc": {"families": ("disk", "fatbox", "rect", "bipartite-disk", "bipartite-box"), "maximize": False},
    "mcm": {"families": ("bipartite", "general"), "maximize": True},
}

# (problem, mode) -> solver; tests may swap entries to inject faults
SOLVERS: dict[tuple[str, str], Callable] = {
    ("mps", "static"): _mps_static, ("mps", "dynamic"): _mps_dynamic,
    ("mis", "static"): _mis_static, ("mis", "dynamic"): _mis_dynamic,
    ("vc", "static"): _vc_static, ("vc", "dynamic"): _vc_dynamic,
    ("mcm", "static"): _mcm_static, ("mcm", "dynamic"): _mcm_dynamic,
}
CHECKS = {
    "mps": lambda fam: _mps_check, "mis": lambda fam: _mis_check,
    "vc": lambda fam: _vc_check(fam.startswith("bipartite")),
    "mcm": lambda fam: _mcm_check(fam == "bipartite"),
}
ORACLES = {"mps": _mps_oracle, "mis": _mis_oracle, "vc": _vc_oracle, "mcm": _mcm_oracle}
ORACLE_CAP = {"mps": 20, "mis": 200, "vc": 200, "mcm": 400}

# Default ratio bounds per (problem, family), set from measured worst cases
# on random 500-op streams with headroom; params["ratio_bound"] overrides.
RATIO_BOUNDS = {
    ("mps", "box"): 8.0, ("mps", "fat"): 100.0,
    ("mis", "rect"): 4.0, ("mis", "box"): 5.0, ("mis", "fat"): 5.0,
    ("vc", "disk"): 2.2, ("vc", "fatbox"): 2.2, ("vc", "rect"): 1.6,
    ("vc", "bipartite-disk"): 1.5, ("vc", "bipartite-box"): 1.5,
    ("mcm", "bipartite"): 1.5, ("mcm", "general"): 2.0,
}


def ratio_of(problem: str, value: float, opt: float) -> float | None:
    """Approximation ratio oriented so that 1 is optimal and larger is worse."""
    if PROBLEMS[problem]["maximize"]:
        return opt / value if value else (1.0 if opt == 0 else None)
    return value / opt if opt else (1.0 if value == 0 else None)


def _run_oracle(problem, objs, family, params) -> tuple:
    if len(objs) > ORACLE_CAP[problem]:
        return None, None
    try:
        return ORACLES[problem](objs, family, params)
    except CapExceeded:
        return None, None


def run_problem(problem: str, family: str, objs: Sequence[GeomObject], params: dict | None = None,
                mode: str = "static", stream: UpdateStream | None = None,
                oracle: bool = True) -> dict:
    """Solve, validate with the problem's validator, and optionally compare to
    an exact oracle. Dynamic mode replays ``stream`` (default: insert every
    object) and validates at each checkpoint."""
    params = dict(params or {})
    if problem not in PROBLEMS:
        raise ValueError(f"unknown problem {problem!r}")
    if family not in PROBLEMS[problem]["families"]:
        raise ValueError(f"family {family!r} not supported for {problem}")
    if mode not in ("static", "dynamic"):
        raise ValueError(f"unknown mode {mode!r}")
    check = CHECKS[problem](family)
    row: dict = {"problem": problem, "algorithm": family, "mode": mode, "params": params}
    t0 = time.perf_counter()
    if mode == "static":
        objs = list(objs)
        sol = SOLVERS[(problem, "static")](objs, family, params)
        final_objs = objs
        out = check(objs, sol)
        checkpoints = []
    else:
        if stream is None:
            stream = UpdateStream([("insert", o) for o in objs], [len(objs) - 1] if objs else [])
        ins = stream.inserted()
        d = ins[0].dim if ins else 2
        domain = _fit_domain(ins, d)
        dyn = SOLVERS[(problem, "dynamic")](family, params, d, domain)
        cps = set(stream.checkpoints)
        checkpoints = []
        out = Outcome(0, 0, {})
        for i, (kind, arg) in enumerate(stream.ops):
            if kind == "insert":
                dyn.insert(arg)
            else:
                dyn.delete(arg)
            if i in cps:
                live = dyn.live()
                out = check(live, dyn.current())
                cp = {"op": i, "n": len(live), "value": out.value, "violations": out.violations}
                if oracle:
                    ov, kind_ = _run_oracle(problem, live, family, params)
                    if ov is not None:
                        cp["oracle_value"] = ov
                        cp["ratio"] = ratio_of(problem, out.value, ov)
                checkpoints.append(cp)
        final_objs = dyn.live()
        if not stream.ops:
            out = check([], dyn.current())
        extra = getattr(dyn, "log", None)
        if extra:
            out.counters["phases"] = len(extra)
            out.counters["phase_log"] = extra
    wall = (time.perf_counter() - t0) * 1000
    row.update({"n": len(final_objs), "value": out.value,
                "violations": out.violations + sum(c["violations"] for c in checkpoints)})
    row["validity"] = row["violations"] == 0
    row["oracle_value"] = row["ratio"] = row["ratio_kind"] = None
    if oracle:
        ov, kind = _run_oracle(problem, final_objs, family, params)
        if ov is not None:
            row.update({"oracle_value": ov, "ratio": ratio_of(problem, out.value, ov), "ratio_kind": kind})
    bound = params.get("ratio_bound", RATIO_BOUNDS.get((problem, family)))
    ratios = [c["ratio"] for c in checkpoints if c.get("ratio") is not None]
    if row["ratio"] is not None:
        ratios.append(row["ratio"])
    row["ratio_bound"] = bound
    row["within_bound"] = None if bound is None or not ratios else max(ratios) <= bound
    row["counters"] = _jsonable(out.counters)
    if checkpoints:
        row["checkpoints"] = checkpoints
    row["solution"] = _jsonable(out.payload)
    row["wall_ms"] = wall
    return row


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        seq = sorted(x) if isinstance(x, (set, frozenset)) else x
        return [_jsonable(v) for v in seq]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    if x is None or isinstance(x, (bool, int, float, str)):
        return x
    return str(x)


# ---------------------------------------------------------------- suite

CSV_COLUMNS = ["row", "problem", "algorithm", "mode", "n", "value", "oracle_value", "ratio",
               "ratio_kind", "validity", "violations", "wall_ms", "error", "counters"]


def _row_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def _execute(args) -> dict:
    index, spec, suite_seed, base = args
    row = {"row": index}
    try:
        inst = spec.get("instance")
        stream = None
        if "input" in spec:
            objs = read_instance(Path(base, spec["input"]))
            inst_desc = {"input": spec["input"]}
        else:
            inst = dict(inst or {})
            inst.setdefault("seed", _row_seed(suite_seed, index))
            gspec = GeneratorSpec.from_dict(inst)
            objs = generate(gspec)
            inst_desc = asdict(gspec)
            if spec.get("mode") == "dynamic" and spec.get("stream"):
                st = dict(spec["stream"])
                stream = generate_stream(gspec, st.get("ops", 200), st.get("churn", 0.3),
                                         st.get("window"), st.get("checkpoint_every", 50))
        res = run_problem(spec["problem"], spec["family"], objs, spec.get("params"),
                          spec.get("mode", "static"), stream, spec.get("oracle", True))
        res.pop("solution", None)
        row.update(res)
        row["instance"] = _jsonable(inst_desc)
        row["error"] = None
    except Exception as exc:  # recorded per row, the suite continues
        row.update({"problem": spec.get("problem"), "algorithm": spec.get("family"),
                    "mode": spec.get("mode", "static"), "validity": False,
                    "error": f"{type(exc).__name__}: {exc}"})
    return row


def run_suite(config: dict, out_dir=None, base_dir=".") -> list[dict]:
    """Run every row of ``config`` and write report.jsonl and report.csv.

    Config keys: ``rows`` (list of {problem, family, mode, params, instance |
    input, stream, oracle, repeat}), ``seed``, ``workers`` and ``timing``
    (wall times are dropped unless true, so reruns are byte-identical).
    """
    seed = int(config.get("seed", 0))
    jobs = []
    for spec in config.get("rows", []):
        for _ in range(int(spec.get("repeat", 1))):
            jobs.append((len(jobs), spec, seed, str(base_dir)))
    workers = int(config.get("workers", 1))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(workers) as ex:
            rows = list(ex.map(_execute, jobs))
    else:
        rows = [_execute(j) for j in jobs]
    if not config.get("timing", False):
        for r in rows:
            r.pop("wall_ms", None)
    if out_dir is not None:
        write_report(rows, out_dir)
    return rows


def report_jsonl(rows: list[dict]) -> str:
    return "".join(json.dumps(r, sort_keys=True) + "\n" for r in rows)


def report_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, CSV_COLUMNS, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in rows:
        flat = dict(r)
        flat["counters"] = json.dumps(r.get("counters", {}), sort_keys=True)
        w.writerow(flat)
    return buf.getvalue()


def write_report(rows: list[dict], out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.jsonl").write_text(report_jsonl(rows), encoding="utf-8")
    (out / "report.csv").write_text(report_csv(rows), encoding="utf-8")
