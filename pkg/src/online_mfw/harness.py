"""Experiment runner: seeded reward streams, algorithm drivers, offline
reference curves, regret logging and CSV/JSON reports."""

import csv
import dataclasses
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import _rng
from .mfw import VARIANTS, Schedule, make_algorithm, make_schedule, offline_measured_greedy
from .objectives import (
    gen_constraints,
    gen_quadratic_objective,
    gen_revenue_constraints,
    load_graph,
    objective_from_dict,
    sample_round_objective,
)
from .oracles import StochasticGradientOracle, ValueOracle
from .polytope import DownClosedPolytope

log = logging.getLogger(__name__)

CSV_HEADER = ["t", "reward", "cum_reward", "ref_value", "ratio", "grad_calls", "value_calls"]
K_REF = 200


class ConfigError(ValueError):
    pass


def bundled_graph_path():
    return resources.files("online_mfw") / "data" / "collab_sample_316.txt"


@dataclass
class ExperimentConfig:
    family: str = "quadratic"
    T: int = 200
    n: int = 25
    m: int = 15
    sigma: float = 0.1
    seed: int = 0
    variants: List[str] = field(default_factory=lambda: ["meta34"])
    stride: int = 10
    out: Optional[str] = None
    stationary: bool = False
    graph: Optional[str] = None
    instance: Optional[str] = None
    k_ref: int = K_REF
    allow_meta32: bool = False
    schedule: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in ("quadratic", "revenue"):
            raise ConfigError(f"family must be 'quadratic' or 'revenue', got {self.family!r}")
        if isinstance(self.variants, str):
            self.variants = [self.variants]
        for v in self.variants:
            if v not in VARIANTS:
                raise ConfigError(f"unknown variant {v!r}")
        if self.T < 1:
            raise ConfigError("T must be at least 1")
        if self.sigma < 0:
            raise ConfigError("sigma must be nonnegative")
        if self.stride < 1 or self.k_ref < 1:
            raise ConfigError("stride and k_ref must be positive")
        unknown = set(self.schedule) - {"K", "Q", "L", "delta"}
        if unknown:
            raise ConfigError(f"unknown schedule overrides: {sorted(unknown)}")

    @classmethod
    def from_dict(cls, d):
        names = {f.name for f in dataclasses.fields(cls)}
        extra = set(d) - names
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def load(cls, path):
        try:
            with open(path) as fh:
                return cls.from_dict(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None


@dataclass
class RegretRecord:
    t: int
    reward: float
    cum_reward: float
    ref_value: Optional[float]
    ratio: Optional[float]
    grad_calls: int
    value_calls: int


@dataclass
class RunResult:
    variant: str
    schedule: Schedule
    records: List[RegretRecord]
    plays: np.ndarray
    wall_seconds: float
    csv_path: Optional[Path] = None

    @property
    def grad_calls(self):
        return self.records[-1].grad_calls if self.records else 0

    @property
    def value_calls(self):
        return self.records[-1].value_calls if self.records else 0

    @property
    def final_ratio(self):
        return self.records[-1].ratio if self.records else None


# -- instances ---------------------------------------------------------------


def build_instance(cfg):
    """Constraint polytope and the T reward functions of the configured stream."""
    if cfg.instance:
        return load_instance(cfg.instance, cfg.T)
    if cfg.family == "quadratic":
        P = gen_constraints(cfg.n, cfg.m, _rng.substream(cfg.seed, _rng.INSTANCE))

        def make(t):
            return gen_quadratic_objective(cfg.n, _rng.substream(cfg.seed, _rng.OBJECTIVE, t))

    else:
        graph = load_graph(cfg.graph or bundled_graph_path())
        P = gen_revenue_constraints(graph.n_vertices, cfg.m, _rng.substream(cfg.seed, _rng.INSTANCE))

        def make(t):
            return sample_round_objective(graph, _rng.substream(cfg.seed, _rng.OBJECTIVE, t))

    if cfg.stationary:
        f = make(1)
        return P, [f] * cfg.T
    return P, [make(t) for t in range(1, cfg.T + 1)]


def instance_to_json(cfg, P, objectives):
    objs = json.dumps([f.to_dict() for f in objectives])
    return (
        "{"
        f'"family": {json.dumps(cfg.family)}, "seed": {cfg.seed}, '
        f'"polytope": {P.to_json()}, "objectives": {objs}'
        "}"
    )


def load_instance(path, T=None):
    with open(path) as fh:
        d = json.load(fh)
    P = DownClosedPolytope.from_dict(d["polytope"])
    objs = [objective_from_dict(o) for o in d["objectives"]]
    if T is not None:
        if len(objs) < T:
            raise ConfigError(f"instance has {len(objs)} reward functions, config asks for T={T}")
        objs = objs[:T]
    return P, objs


def build_schedule(cfg, variant, P):
    sched = make_schedule(cfg.T, variant, P, allow_meta32=cfg.allow_meta32)
    if cfg.schedule:
        over = dict(cfg.schedule)
        if variant == "mono" and ("K" in over or "Q" in over):
            over.setdefault("Q", sched.T // over.get("K", sched.K))
            over["T"] = over.get("K", sched.K) * over["Q"]
        if variant == "bandit" and ("L" in over or "Q" in over):
            over.setdefault("Q", sched.T // over.get("L", sched.L))
            over["T"] = over.get("L", sched.L) * over["Q"]
        if over.get("T", sched.T) > cfg.T:
            raise ConfigError("schedule overrides exceed the configured horizon")
        sched = dataclasses.replace(sched, **over)
    return sched


# -- reference curve ---------------------------------------------------------


def reference_points(T, stride):
    pts = list(range(stride, T + 1, stride))
    if not pts or pts[-1] != T:
        pts.append(T)
    return pts


def reference_curve(P, objectives, points, k_ref=K_REF):
    """Offline reference ``sum_{m<=t} f_m(x*_t)`` at each t in ``points``.

    ``x*_t`` is the better (on the running sum) of the measured-greedy output
    and the previous reference point, so the curve is nondecreasing whenever
    rewards are nonnegative.
    """
    out = {}
    total = None
    done = 0
    incumbent = None
    for t in sorted(set(points)):
        for f in objectives[done:t]:
            total = f if total is None else total + f
        done = t
        x = offline_measured_greedy(total, P, k_ref)
        val = float(total.value(x))
        if incumbent is not None:
            inc_val = float(total.value(incumbent))
            if inc_val > val:
                x, val = incumbent, inc_val
        incumbent = x
        out[t] = (val, x)
    return out


# -- driving the algorithms --------------------------------------------------


def play_stream(P, objectives, schedule, sigma, seed):
    """Run one algorithm over the stream.

    Returns ``(plays, rewards, grad_calls, value_calls)`` with per-round counts
    attributed to the reward function that was queried.
    """
    T = schedule.T
    alg = make_algorithm(P, schedule, seed)
    plays = np.zeros((T, P.n))
    grad_calls = np.zeros(T, dtype=int)
    value_calls = np.zeros(T, dtype=int)

    def grad_oracle(t):
        return StochasticGradientOracle(objectives[t], sigma, _rng.substream(seed, _rng.NOISE, t + 1))

    if schedule.variant in ("meta32", "meta34"):
        for t in range(T):
            oracle = grad_oracle(t)
            plays[t] = alg.round(oracle)
            grad_calls[t] = oracle.call_count
    elif schedule.variant == "mono":
        K = schedule.K
        for q in range(schedule.Q):
            ts = range(q * K, (q + 1) * K)
            oracles = [grad_oracle(t) for t in ts]
            plays[q * K:(q + 1) * K] = alg.block(oracles)
            grad_calls[q * K:(q + 1) * K] = [o.call_count for o in oracles]
    else:
        L = schedule.L
        for q in range(schedule.Q):
            oracles = [ValueOracle(objectives[t]) for t in range(q * L, (q + 1) * L)]
            plays[q * L:(q + 1) * L] = alg.block(oracles)
            value_calls[q * L:(q + 1) * L] = [o.call_count for o in oracles]
    rewards = np.array([float(objectives[t].value(plays[t])) for t in range(T)])
    return plays, rewards, grad_calls, value_calls


def make_records(rewards, grad_calls, value_calls, reference):
    records = []
    cum = 0.0
    gc = vc = 0
    for i, r in enumerate(rewards):
        t = i + 1
        cum += r
        gc += int(grad_calls[i])
        vc += int(value_calls[i])
        ref = ratio = None
        if t in reference:
            ref = reference[t][0]
            ratio = (ref - cum) / t
        records.append(RegretRecord(t, float(r), cum, ref, ratio, gc, vc))
    return records


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".12g")


def write_csv(records, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in records:
            w.writerow([_fmt(getattr(r, k)) for k in CSV_HEADER])


def read_csv(path):
    records = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_HEADER:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        for lineno, row in enumerate(reader, 2):
            try:
                records.append(
                    RegretRecord(
                        int(row["t"]),
                        float(row["reward"]),
                        float(row["cum_reward"]),
                        float(row["ref_value"]) if row["ref_value"] else None,
                        float(row["ratio"]) if row["ratio"] else None,
                        int(row["grad_calls"]),
                        int(row["value_calls"]),
                    )
                )
            except (TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    return records


def run_name(cfg, variant):
    return f"{cfg.family}_{variant}_seed{cfg.seed}"


def run_experiment(cfg, P=None, objectives=None, reference=None):
    """Run every configured variant on one seeded stream.

    Returns ``{variant: RunResult}``; with ``cfg.out`` set, writes one CSV and
    one metadata JSON per variant.
    """
    if P is None:
        P, objectives = build_instance(cfg)
    schedules = {v: build_schedule(cfg, v, P) for v in cfg.variants}
    points = set()
    for s in schedules.values():
        points.update(reference_points(s.T, cfg.stride))
    reference = dict(reference or {})
    missing = sorted(points - set(reference))
    if missing:
        reference.update(reference_curve(P, objectives, missing, cfg.k_ref))

    results = {}
    for variant, sched in schedules.items():
        start = time.perf_counter()
        plays, rewards, gcalls, vcalls = play_stream(P, objectives[: sched.T], sched, cfg.sigma, cfg.seed)
        wall = time.perf_counter() - start
        ref = {t: reference[t] for t in reference_points(sched.T, cfg.stride)}
        records = make_records(rewards, gcalls, vcalls, ref)
        res = RunResult(variant, sched, records, plays, wall)
        if cfg.out:
            res.csv_path = Path(cfg.out) / f"{run_name(cfg, variant)}.csv"
            write_csv(records, res.csv_path)
            meta = {
                "variant": variant,
                "family": cfg.family,
                "seed": cfg.seed,
                "n": P.n,
                "m": P.m,
                "sigma": cfg.sigma,
                "stride": cfg.stride,
                "K_ref": cfg.k_ref,
                "schedule": sched.to_dict(),
                "T": sched.T,
                "grad_calls": res.grad_calls,
                "value_calls": res.value_calls,
                "wall_seconds": wall,
            }
            res.csv_path.with_suffix(".json").write_text(json.dumps(meta, indent=2) + "\n")
        results[variant] = res
    return results


def _run_one(cfg):
    return cfg.seed, run_experiment(cfg)


def run_many(configs, workers=None):
    """Run independent configs (e.g. seeds) in a process pool.

    Returns a list of ``{variant: RunResult}`` in the order of ``configs``.
    """
    configs = list(configs)
    if workers == 1 or len(configs) == 1:
        return [run_experiment(c) for c in configs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return [res for _, res in pool.map(_run_one, configs)]


# -- brute force and reporting ---------------------------------------------


def brute_force_opt(objective, P, step):
    """Best feasible point of the grid ``{0, step, 2 step, ...}^n`` (n <= 4)."""
    if P.n > 4:
        raise ValueError(f"grid search limited to n <= 4, got n={P.n}")
    ticks = np.unique(np.append(np.arange(0.0, 1.0 + 1e-12, step), 1.0))
    ticks = ticks[ticks <= 1.0]
    mesh = np.meshgrid(*([ticks] * P.n), indexing="ij")
    X = np.stack([g.ravel() for g in mesh], axis=1)
    keep = np.all(X <= P.u + 1e-12, axis=1)
    if P.m:
        keep &= np.all(X @ P.A.T <= P.b + 1e-12, axis=1)
    X = X[keep]
    vals = objective.value(X)
    i = int(np.argmax(vals))
    return X[i], float(vals[i])


def summarize(csv_path):
    path = Path(csv_path)
    records = read_csv(path)
    meta_path = path.with_suffix(".json")
    meta = json.loads(meta_path.read_text()) if meta_path.exists() else {}
    final_ratio = next((r.ratio for r in reversed(records) if r.ratio is not None), None)
    return {
        "variant": meta.get("variant", path.stem),
        "T": records[-1].t if records else 0,
        "final_ratio": final_ratio,
        "grad_calls": records[-1].grad_calls if records else 0,
        "value_calls": records[-1].value_calls if records else 0,
        "wall_seconds": meta.get("wall_seconds"),
    }


def report(csv_paths, json_out=None, stream=None):
    rows = [summarize(p) for p in csv_paths]
    lines = [f"{'variant':<10} {'T':>6} {'final_ratio':>14} {'grad_calls':>11} {'value_calls':>12} {'wall_s':>9}"]
    for r in rows:
        ratio = "" if r["final_ratio"] is None else f"{r['final_ratio']:.6g}"
        wall = "" if r["wall_seconds"] is None else f"{r['wall_seconds']:.2f}"
        lines.append(
            f"{r['variant']:<10} {r['T']:>6} {ratio:>14} {r['grad_calls']:>11} {r['value_calls']:>12} {wall:>9}"
        )
    if stream is not None:
        print("\n".join(lines), file=stream)
    if json_out is not None:
        Path(json_out).write_text(json.dumps(rows, indent=2) + "\n")
    return rows


def write_reference_csv(reference, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "ref_value"] + [f"x{i}" for i in range(len(next(iter(reference.values()))[1]))])
        for t in sorted(reference):
            val, x = reference[t]
            w.writerow([t, _fmt(val)] + [_fmt(v) for v in x])


