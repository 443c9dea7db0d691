"""Batch experiment orchestration: dispatch, persistence, and reports.

A run takes a validated config, executes the kind-specific pipeline with
replicate seeds derived from the master seed by logical index (so results
never depend on scheduling), and writes a deterministic set of artifacts:
`results.jsonl` (one record per measured quantity), plot-data CSVs, and
`manifest.json` (config hash, derived seeds, file inventory, timings).
Reports re-read those files and evaluate the `tol.*` thresholds shipped in
the config, emitting one PASS/FAIL line per check.
"""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import ExperimentConfig, parse_config
from .errors import FroglabError
from .frog import ActivationRecord, FrogSimulation, run_frog
from .groups import WordMetric, build_ball_table, induced_quotient_generators
from .rng import derive_seed
from . import shapes, walks

TOOL_VERSION = "0.1.0"

MANIFEST_NAME = "manifest.json"
RESULTS_NAME = "results.jsonl"
SUMMARY_NAME = "summary.txt"


def _jsonable(obj):
    """Recursively convert numpy containers/scalars to plain JSON types."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, float) and math.isinf(obj):
        return "inf" if obj > 0 else "-inf"
    return obj


def _parallel(fn, count: int, degree: int) -> list:
    """Apply fn to 0..count-1, merging results in index order."""
    if degree <= 1 or count <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=min(degree, count)) as pool:
        futures = [pool.submit(fn, i) for i in range(count)]
        return [f.result() for f in futures]


@dataclass(frozen=True)
class RunManifest:
    """Provenance and inventory of one experiment run."""

    config_hash: str
    tool_version: str
    kind: str
    master_seed: int
    derived_seeds: tuple[int, ...]
    outputs: tuple[str, ...]
    timings: dict
    status: str
    config_text: str

    def to_json(self) -> str:
        return json.dumps({
            "config_hash": self.config_hash,
            "tool_version": self.tool_version,
            "kind": self.kind,
            "master_seed": self.master_seed,
            "derived_seeds": list(self.derived_seeds),
            "outputs": list(self.outputs),
            "timings": self.timings,
            "status": self.status,
            "config_text": self.config_text,
        }, sort_keys=True, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        d = json.loads(text)
        return cls(d["config_hash"], d["tool_version"], d["kind"],
                   d["master_seed"], tuple(d["derived_seeds"]),
                   tuple(d["outputs"]), d["timings"], d["status"],
                   d["config_text"])


def run_dir_for(config: ExperimentConfig, output_root=None) -> Path:
    root = Path(output_root) if output_root is not None else Path(config.output_dir)
    return root / f"{config.kind}-{config.config_hash[:12]}"


def run_experiment(config: ExperimentConfig, output_root=None) -> RunManifest:
    """Execute one experiment and persist its artifacts; deterministic."""
    runner = _RUNNERS.get(config.kind)
    if runner is None:
        raise FroglabError(f"no runner for kind {config.kind!r}")
    out = run_dir_for(config, output_root)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.monotonic()
    status = "complete"
    rows: list[dict] = []
    tables: dict[str, tuple[list[str], list[list]]] = {}
    seeds: list[int] = []
    try:
        rows, tables, seeds = runner(config)
    except Exception:
        status = "incomplete"
        raise
    finally:
        outputs = [RESULTS_NAME]
        with open(out / RESULTS_NAME, "w") as fh:
            for row in rows:
                fh.write(json.dumps(_jsonable(row), sort_keys=True) + "\n")
        for name, (header, body) in sorted(tables.items()):
            fname = f"{name}.csv"
            outputs.append(fname)
            with open(out / fname, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(header)
                w.writerows(_jsonable(body))
        manifest = RunManifest(
            config_hash=config.config_hash,
            tool_version=TOOL_VERSION,
            kind=config.kind,
            master_seed=config.master_seed,
            derived_seeds=tuple(int(s) for s in seeds),
            outputs=tuple(outputs),
            timings={"total_s": round(time.monotonic() - t0, 3)},
            status=status,
            config_text=config.to_text(),
        )
        (out / MANIFEST_NAME).write_text(manifest.to_json())
    return manifest


# ---------------------------------------------------------------------------
# Kind runners.  Each returns (result rows, plot tables, derived seeds).


def _require(params: dict, *keys):
    missing = [k for k in keys if k not in params]
    if missing:
        raise FroglabError(f"experiment params missing {missing}")
    return [params[k] for k in keys]


def _run_walk_diagnostics(cfg: ExperimentConfig):
    g, s, p = cfg.group, cfg.generators, cfg.params
    rows, tables, seeds = [], {}, []
    hk = walks.HeatKernel(g, s, cfg.budget)

    if "scaling_n_values" in p:
        ns = sorted(int(n) for n in p["scaling_n_values"])
        seq = hk.diagonal_sequence(max(ns))
        pts = seq[np.asarray(ns)]
        fit = walks.power_law_fit(ns, pts)
        rows.append({"quantity": "heat_scaling", "n_values": ns,
                     "slope": fit.slope, "intercept": fit.intercept,
                     "r_squared": fit.r_squared})
        tables["heat_scaling"] = (["n", "p_n"], [[n, float(v)] for n, v in zip(ns, pts)])

    if "green_horizon" in p:
        est = hk.green_estimate(int(p["green_horizon"]))
        rows.append({"quantity": "green", "horizon": est.horizon,
                     "value": est.value, "partial_sum": est.partial_sum,
                     "tail": est.tail})

    if "range_n_steps" in p:
        n_steps, n_walks = _require(p, "range_n_steps", "range_n_walks")
        seed = derive_seed(cfg.master_seed, 0, "range")
        seeds.append(seed)
        rr = walks.range_ratio_mc(g, s, master_seed=seed,
                                  n_steps=int(n_steps), n_walks=int(n_walks))
        rows.append({"quantity": "range", "n_steps": rr.n_steps,
                     "n_walks": rr.n_walks, "mean": rr.mean,
                     "stderr": rr.std_error})

    if "exit_horizon" in p:
        horizon, t_values, n_walks = _require(
            p, "exit_horizon", "exit_t_values", "exit_n_walks")
        horizon = int(horizon)
        radii = [max(1, int(round(t * math.sqrt(horizon)))) for t in t_values]
        seed = derive_seed(cfg.master_seed, 0, "exit")
        seeds.append(seed)
        et = walks.exit_tail_mc(g, s, master_seed=seed, radii=radii,
                                horizon=horizon, n_walks=int(n_walks))
        probs = et.probs
        body = []
        for t, r, prob in zip(t_values, radii, probs):
            rows.append({"quantity": "exit_tail", "t": float(t), "radius": r,
                         "horizon": horizon, "prob": float(prob),
                         "n_walks": int(n_walks)})
            body.append([float(t), r, float(prob)])
        tables["exit_tail"] = (["t", "radius", "prob"], body)
        tv = np.asarray([float(t) for t in t_values])
        mask = probs > 0
        fit = walks.linear_fit(tv[mask] ** 2, np.log(probs[mask]))
        rows.append({"quantity": "exit_fit", "slope": fit.slope,
                     "intercept": fit.intercept, "r_squared": fit.r_squared,
                     "n_points": fit.n_points})

    if "return_times" in p:
        n_walks = int(p.get("return_n_walks", 100_000))
        for n in p["return_times"]:
            n = int(n)
            seed = derive_seed(cfg.master_seed, n, "return")
            seeds.append(seed)
            stats = walks.return_probability_mc(g, s, master_seed=seed,
                                                n_walks=n_walks, time=n)
            exact = hk.return_probability(n)
            se = stats.std_error[0]
            z = (stats.estimate[0] - exact) / se if se > 0 else 0.0
            rows.append({"quantity": "return_check", "n": n,
                         "mc": stats.estimate[0], "stderr": se,
                         "exact": float(exact), "z": float(z)})
    return rows, tables, seeds


def _run_frog_tails(cfg: ExperimentConfig):
    g, s, p = cfg.group, cfg.generators, cfg.params
    rows, tables, seeds = [], {}, []

    if "tail_n_values" in p:
        target, n_values, replicas = _require(
            p, "tail_target", "tail_n_values", "tail_replicas")
        replicas = int(replicas)
        n_values = sorted(int(n) for n in n_values)
        horizon = n_values[-1]
        tgt = np.asarray(g.from_coords([int(v) for v in target]).coords,
                         dtype=np.int64)
        ball = build_ball_table(g, s, horizon, cfg.budget)
        rep_seeds = [derive_seed(cfg.master_seed, i) for i in range(replicas)]
        seeds.extend(rep_seeds)

        def one(i):
            sim = FrogSimulation(g, s, rep_seeds[i], horizon, ball=ball,
                                 budget=cfg.budget)
            rec = sim.run(until_targets=tgt[None, :])
            t = rec.activation_time(tgt)
            return math.inf if t is None else float(t)

        times = np.asarray(_parallel(one, replicas, cfg.parallelism))
        survival = np.asarray([(times >= n).mean() for n in n_values])
        monotone = bool(np.all(np.diff(survival) <= 0))
        rows.append({"quantity": "tail_curve",
                     "target": [int(v) for v in tgt], "n_values": n_values,
                     "replicas": replicas, "survival": survival.tolist(),
                     "censored": int(np.isinf(times).sum()),
                     "monotone": monotone})
        tables["survival"] = (["n", "survival"],
                              [[n, float(sv)] for n, sv in zip(n_values, survival)])
        pos = survival > 0
        logs = np.log(survival[pos])
        ns = np.asarray(n_values, dtype=np.float64)[pos]
        if logs.size >= 3:
            # Trend of the log-survival increments: negative means the decay
            # steepens with n, the log-concave signature.
            inc = np.diff(logs) / np.diff(ns)
            mid = (ns[:-1] + ns[1:]) / 2
            fit = walks.linear_fit(mid, inc)
            rows.append({"quantity": "tail_trend", "increment_slope": fit.slope,
                         "n_points": fit.n_points})

    if "invariant_seeds" in p:
        inv_seeds = [int(x) for x in p["invariant_seeds"]]
        inv_h = int(p.get("invariant_horizon", 40))
        ball = build_ball_table(g, s, inv_h, cfg.budget)
        checked = violations = 0
        for seed in inv_seeds:
            rec = run_frog(g, s, inv_h, seed, ball=ball, budget=cfg.budget)
            norms = ball.norm_lookup(rec.elements)
            checked += rec.times.size
            violations += int((rec.times < norms).sum())
        rows.append({"quantity": "activation_lower_bound", "seeds": inv_seeds,
                     "horizon": inv_h, "checked": checked,
                     "violations": violations})
    return rows, tables, seeds


def _run_linear_growth(cfg: ExperimentConfig):
    g, s, p = cfg.group, cfg.generators, cfg.params
    direction, k_values, replicas, horizon = _require(
        p, "direction", "k_values", "replicas", "horizon")
    replicas, horizon = int(replicas), int(horizon)
    k_values = sorted(int(k) for k in k_values)
    d = np.asarray(g.from_coords([int(v) for v in direction]).coords, dtype=np.int64)
    targets = {k: np.asarray(g.from_coords((k * d).tolist()).coords, dtype=np.int64)
               for k in k_values}
    metric = WordMetric(g, s, budget=cfg.budget)
    norms = {k: metric.word_norm(targets[k]) for k in k_values}
    ball = build_ball_table(g, s, horizon, cfg.budget)
    stop_rows = np.stack([targets[k] for k in k_values])
    rep_seeds = [derive_seed(cfg.master_seed, i) for i in range(replicas)]

    def one(i):
        sim = FrogSimulation(g, s, rep_seeds[i], horizon, ball=ball,
                             budget=cfg.budget)
        rec = sim.run(until_targets=stop_rows)
        return [rec.activation_time(targets[k]) for k in k_values]

    raw = _parallel(one, replicas, cfg.parallelism)
    rows, tables = [], {}
    boot = np.random.default_rng(derive_seed(cfg.master_seed, 0, "boot"))
    n_boot = int(p.get("bootstrap_samples", 500))
    body = []
    for j, k in enumerate(k_values):
        vals = np.asarray([r[j] for r in raw if r[j] is not None], dtype=np.float64)
        ratios = vals / norms[k]
        censored = replicas - vals.size
        p99 = float(np.quantile(ratios, 0.99)) if ratios.size else math.inf
        if ratios.size:
            idx = boot.integers(0, ratios.size, size=(n_boot, ratios.size))
            boot_p99 = np.quantile(ratios[idx], 0.99, axis=1)
            se = float(boot_p99.std(ddof=1))
        else:
            se = math.inf
        rows.append({"quantity": "growth_k", "k": k, "norm": int(norms[k]),
                     "count": int(ratios.size), "censored": int(censored),
                     "mean": float(ratios.mean()) if ratios.size else math.inf,
                     "p99": p99, "p99_boot_se": se})
        body.append([k, int(norms[k]), float(ratios.mean()) if ratios.size else "",
                     p99, se, int(censored)])
    tables["growth"] = (["k", "norm", "mean_ratio", "p99", "p99_boot_se", "censored"],
                        body)
    by_k = {r["k"]: r for r in rows if r["quantity"] == "growth_k"}
    if len(k_values) >= 2:
        rows.append(_growth_compare_row(by_k, k_values[0], k_values[-1]))
    return rows, tables, rep_seeds


def _growth_compare_row(by_k: dict, k_lo: int, k_hi: int) -> dict:
    lo, hi = by_k[k_lo], by_k[k_hi]
    se = math.hypot(lo["p99_boot_se"], hi["p99_boot_se"])
    return {"quantity": "growth_compare", "k_low": k_lo, "k_high": k_hi,
            "p99_low": lo["p99"], "p99_high": hi["p99"], "se_combined": se}


def _rows_at(rows: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Boolean mask of the coordinate rows that appear in targets."""
    span = np.maximum(np.abs(rows).max(axis=0) if rows.size else 0,
                      np.abs(targets).max(axis=0)).astype(np.int64)
    mult = np.ones_like(span)
    acc = 1
    for j in range(span.size - 1, -1, -1):
        mult[j] = acc
        acc *= int(2 * span[j] + 2)
    return np.isin((rows + span) @ mult, (targets + span) @ mult)


def _phi_pool(cfg: ExperimentConfig, grids: dict, horizon: int, count: int,
              tag: str, ball):
    """Independent activation records stopping once every grid target wakes.

    Each record is cut down to its rows at the grid targets before it is
    retained: the directional estimators only ever query those sites, and a
    full record at these horizons holds every activated site (tens of MB),
    which does not fit in memory across a whole pool.
    """
    g, s = cfg.group, cfg.generators
    targets = np.unique(np.asarray(
        [[k * c for c in v] for v, ks in grids.items() for k in ks],
        dtype=np.int64), axis=0)
    pool_seeds = [derive_seed(cfg.master_seed, i, tag) for i in range(count)]

    def one(i):
        sim = FrogSimulation(g, s, pool_seeds[i], horizon, ball=ball,
                             budget=cfg.budget)
        rec = sim.run(until_targets=targets)
        mask = _rows_at(rec.elements, targets)
        return ActivationRecord(g, s, rec.horizon, rec.master_seed, rec.origin,
                                rec.elements[mask], rec.times[mask])

    return _parallel(one, count, cfg.parallelism), pool_seeds


def _run_shape(cfg: ExperimentConfig):
    g, s, p = cfg.group, cfg.generators, cfg.params
    rows, tables, seeds = [], {}, []
    metric_tag = p.get("metric", "l2")
    main_records = []

    if "convergence_n_grid" in p:
        replicas, horizon, n_grid = _require(
            p, "convergence_replicas", "convergence_horizon", "convergence_n_grid")
        replicas, horizon = int(replicas), int(horizon)
        grid = sorted(int(n) for n in n_grid)
        # Full records at these horizons run to tens of MB; a whole replicate
        # set does not fit in memory, so each record's pair distances are
        # taken immediately and only the records the sandwich block will
        # evaluate are kept.
        keep = 0
        if "sandwich_epsilon" in p:
            keep = min(int(p.get("sandwich_eval_records", 5)), replicas)
        ball = build_ball_table(g, s, horizon, cfg.budget)
        main_seeds = [derive_seed(cfg.master_seed, i, "main") for i in range(replicas)]
        seeds.extend(main_seeds)

        def one(i):
            rec = run_frog(g, s, horizon, main_seeds[i], ball=ball,
                           budget=cfg.budget)
            parts = shapes.shape_convergence_series([rec], grid, metric_tag)
            dists = [(pair.n, pair.m, pair.distances[0]) for pair in parts]
            return (rec if i < keep else None), dists

        outcomes = _parallel(one, replicas, cfg.parallelism)
        main_records = [rec for rec, _ in outcomes if rec is not None]
        per_pair: dict[tuple[int, int], list[float]] = {}
        for _, dists in outcomes:
            for n, m, d in dists:
                per_pair.setdefault((n, m), []).append(d)
        body = []
        for i, n in enumerate(grid):
            for m in grid[i + 1:]:
                arr = np.asarray(per_pair[(n, m)])
                std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
                rows.append({"quantity": "hausdorff_pair", "n": n, "m": m,
                             "mean": float(arr.mean()), "std": std,
                             "records": int(arr.size)})
                body.append([n, m, float(arr.mean()), std])
        tables["hausdorff"] = (["n", "m", "mean_distance", "std"], body)

    if "sandwich_epsilon" in p:
        if not main_records:
            raise FroglabError("sandwich block needs the convergence block "
                               "(it evaluates on those records)")
        epsilon, held_n, held_h = _require(
            p, "sandwich_epsilon", "heldout_replicas", "heldout_horizon")
        resolution = int(p.get("fan_resolution", 1))
        t_time, ax_rate, ex_rate = _require(
            p, "phi_target_time", "phi_pilot_axis", "phi_pilot_extra")
        fan = shapes.fan_directions(g.rank, resolution)
        grids = {v: shapes.phi_k_grid(v, float(t_time), float(ax_rate),
                                      float(ex_rate)) for v in fan}
        ball = build_ball_table(g, s, int(held_h), cfg.budget)
        pool, pool_seeds = _phi_pool(cfg, grids, int(held_h), int(held_n),
                                     "heldout", ball)
        seeds.extend(pool_seeds)
        ests = [shapes.phi_from_records(pool, v, grids[v], cfg.master_seed)
                for v in fan]
        fan_body = []
        for est in ests:
            rows.append(est.to_record())
            fan_body.append([list(est.direction), est.estimate, est.std_error])
        tables["phi_fan"] = (["direction", "phi", "stderr"], fan_body)
        model = shapes.PhiModel.from_estimates(ests, resolution)
        eval_count = min(int(p.get("sandwich_eval_records", 5)), len(main_records))
        word = WordMetric(g, s, budget=cfg.budget)
        sand_body = []
        inner, outer = [], []
        for i in range(eval_count):
            rep = shapes.sandwich_check(main_records[i], model, float(epsilon),
                                        metric=word, budget=cfg.budget)
            rec = rep.to_record()
            rec["record_index"] = i
            rows.append(rec)
            inner.append(rep.inner_fraction)
            outer.append(rep.outer_fraction)
            sand_body.append([i, rep.inner_fraction, rep.outer_fraction])
        tables["sandwich"] = (["record_index", "inner_fraction", "outer_fraction"],
                              sand_body)
        rows.append({"quantity": "sandwich_summary",
                     "records": eval_count, "epsilon": float(epsilon),
                     "mean_inner": float(np.mean(inner)),
                     "mean_outer": float(np.mean(outer)),
                     "max_inner": float(np.max(inner)),
                     "max_outer": float(np.max(outer))})

    if "homsub_pool_replicas" in p:
        pool_n, pool_h, n_pairs = _require(
            p, "homsub_pool_replicas", "homsub_horizon", "homsub_pairs")
        t_time, ax_rate, ex_rate = _require(
            p, "phi_target_time", "phi_pilot_axis", "phi_pilot_extra")
        pool_n, pool_h = int(pool_n), int(pool_h)
        fan = shapes.fan_directions(g.rank, 1)
        rng = np.random.default_rng(derive_seed(cfg.master_seed, 0, "pairs"))
        all_pairs = [(fan[i], fan[j]) for i in range(len(fan))
                     for j in range(i + 1, len(fan))]
        chosen = sorted(rng.choice(len(all_pairs), size=min(int(n_pairs),
                                                            len(all_pairs)),
                                   replace=False).tolist())
        pairs = [all_pairs[i] for i in chosen]

        def kg(v):
            return shapes.phi_k_grid(v, float(t_time), float(ax_rate),
                                     float(ex_rate))

        grids_a = {v: kg(v) for v in fan}
        for u, v in pairs:
            w = tuple(a + b for a, b in zip(u, v))
            grids_a.setdefault(w, kg(w))
        grids_b = {tuple(2 * c for c in v): kg(tuple(2 * c for c in v))
                   for v in fan}
        ball = build_ball_table(g, s, pool_h, cfg.budget)
        pool_a, seeds_a = _phi_pool(cfg, grids_a, pool_h, pool_n, "phiA", ball)
        pool_b, seeds_b = _phi_pool(cfg, grids_b, pool_h, pool_n, "phiB", ball)
        seeds.extend(seeds_a)
        seeds.extend(seeds_b)
        est_a = {v: shapes.phi_from_records(pool_a, v, grids_a[v], cfg.master_seed)
                 for v in grids_a}
        hom_body = []
        for v in fan:
            dv = tuple(2 * c for c in v)
            e2 = shapes.phi_from_records(pool_b, dv, grids_b[dv], cfg.master_seed)
            base = est_a[v]
            half, half_se = e2.estimate / 2, e2.std_error / 2
            sigma = math.hypot(base.std_error, half_se)
            diff = half - base.estimate
            z = diff / sigma if sigma > 0 else (0.0 if diff == 0 else math.inf)
            rows.append({"quantity": "phi_homogeneity", "direction": list(v),
                         "phi": base.estimate, "phi_se": base.std_error,
                         "phi_double_half": half, "phi_double_half_se": half_se,
                         "sigma_combined": sigma, "z": z})
            hom_body.append([list(v), base.estimate, half, z])
        tables["phi_homogeneity"] = (["direction", "phi", "phi_double_half", "z"],
                                     hom_body)
        sub_body = []
        for u, v in pairs:
            w = tuple(a + b for a, b in zip(u, v))
            eu, ev, ew = est_a[u], est_a[v], est_a[w]
            sigma = math.sqrt(eu.std_error ** 2 + ev.std_error ** 2
                              + ew.std_error ** 2)
            rows.append({"quantity": "phi_subadditivity", "u": list(u),
                         "v": list(v), "sum_direction": list(w),
                         "lhs": ew.estimate,
                         "rhs": eu.estimate + ev.estimate,
                         "sigma_combined": sigma})
            sub_body.append([list(u), list(v), ew.estimate,
                             eu.estimate + ev.estimate, sigma])
        tables["phi_subadditivity"] = (["u", "v", "phi_sum", "phi_parts_sum",
                                        "sigma"], sub_body)
    return rows, tables, seeds


def _run_torsion_compare(cfg: ExperimentConfig):
    g, s, p = cfg.group, cfg.generators, cfg.params
    if not g.torsion_orders:
        raise FroglabError("torsion_compare needs a group with torsion")
    horizon, replicas = _require(p, "horizon", "replicas")
    horizon, replicas = int(horizon), int(replicas)
    metric_tag = p.get("metric", "l2")
    qg = g.quotient()
    qs = induced_quotient_generators(s)
    ball_full = build_ball_table(g, s, horizon, cfg.budget)
    ball_q = build_ball_table(qg, qs, horizon, cfg.budget)
    rep_seeds = [derive_seed(cfg.master_seed, i) for i in range(replicas)]

    def one(i):
        rec_full = run_frog(g, s, horizon, rep_seeds[i], ball=ball_full,
                            budget=cfg.budget)
        rec_q = run_frog(qg, qs, horizon, rep_seeds[i], ball=ball_q,
                         budget=cfg.budget)
        a = shapes.free_coordinates(g, rec_full.activation_ball(horizon))
        b = rec_q.activation_ball(horizon)
        return shapes.hausdorff_distance(a.astype(np.float64),
                                         b.astype(np.float64), metric_tag)

    dists = _parallel(one, replicas, cfg.parallelism)
    rows, body = [], []
    for i, d in enumerate(dists):
        rows.append({"quantity": "torsion_seed", "index": i,
                     "seed": rep_seeds[i], "distance": float(d),
                     "ratio": float(d) / horizon})
        body.append([i, float(d), float(d) / horizon])
    rows.append({"quantity": "torsion_summary", "horizon": horizon,
                 "replicas": replicas,
                 "mean_ratio": float(np.mean(dists)) / horizon})
    return rows, {"torsion": (["index", "distance", "ratio"], body)}, rep_seeds


def _run_symmetry(cfg: ExperimentConfig):
    g, s, p = cfg.group, cfg.generators, cfg.params
    horizon, replicas = _require(p, "horizon", "replicas")
    horizon, replicas = int(horizon), int(replicas)
    level = int(p.get("level", horizon))
    metric_tag = p.get("metric", "l2")
    mats = shapes.signed_permutations(g.rank)
    ball = build_ball_table(g, s, horizon, cfg.budget)
    rep_seeds = [derive_seed(cfg.master_seed, i) for i in range(replicas)]

    def one(i):
        rec = run_frog(g, s, horizon, rep_seeds[i], ball=ball, budget=cfg.budget)
        return shapes.symmetry_check(rec, mats, level=level, metric=metric_tag)

    reports = _parallel(one, replicas, cfg.parallelism)
    rows, body = [], []
    for i, rep in enumerate(reports):
        rows.append({"quantity": "symmetry_seed", "index": i,
                     "seed": rep_seeds[i], "max_asymmetry": rep.max_asymmetry,
                     "ratio": rep.max_asymmetry / level})
        body.append([i, rep.max_asymmetry, rep.max_asymmetry / level])
    mean_ratio = float(np.mean([r.max_asymmetry for r in reports])) / level
    rows.append({"quantity": "symmetry_summary", "level": level,
                 "replicas": replicas, "mean_ratio": mean_ratio})
    return rows, {"symmetry": (["index", "max_asymmetry", "ratio"], body)}, rep_seeds


_RUNNERS = {
    "walk_diagnostics": _run_walk_diagnostics,
    "frog_tails": _run_frog_tails,
    "linear_growth": _run_linear_growth,
    "shape": _run_shape,
    "torsion_compare": _run_torsion_compare,
    "symmetry": _run_symmetry,
}


# ---------------------------------------------------------------------------
# Reports


@dataclass(frozen=True)
class Check:
    """One evaluated tolerance with its observed value."""

    name: str
    passed: bool
    observed: float
    description: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.description}"


@dataclass(frozen=True)
class Report:
    """Evaluated summary of one run."""

    kind: str
    config_hash: str
    checks: tuple[Check, ...]
    text: str

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def _one_row(rows, quantity: str) -> dict:
    found = [r for r in rows if r.get("quantity") == quantity]
    if len(found) != 1:
        raise FroglabError(f"expected exactly one {quantity!r} row, "
                           f"found {len(found)}")
    return found[0]


def evaluate_checks(kind: str, rows: list[dict], tol: dict) -> list[Check]:
    """Turn configured tolerances plus result rows into pass/fail checks."""
    pending = dict(tol)
    checks: list[Check] = []

    def pop(*keys):
        return [pending.pop(k) for k in keys]

    if kind == "walk_diagnostics":
        if "scaling_slope_target" in pending:
            target, width = pop("scaling_slope_target", "scaling_slope_tol")
            row = _one_row(rows, "heat_scaling")
            dev = abs(row["slope"] - target)
            checks.append(Check(
                "heat_scaling_slope", dev <= width, row["slope"],
                f"slope {row['slope']:.4f} within {target} +/- {width}"))
        if "range_abs_tol" in pending:
            (width,) = pop("range_abs_tol")
            green = _one_row(rows, "green")
            rng_row = _one_row(rows, "range")
            ref = 1.0 / green["value"]
            dev = abs(rng_row["mean"] - ref)
            checks.append(Check(
                "range_vs_green", dev <= width, rng_row["mean"],
                f"|{rng_row['mean']:.5f} - {ref:.5f}| = {dev:.5f} <= {width}"))
        if "exit_r2_min" in pending:
            (r2_min,) = pop("exit_r2_min")
            fit = _one_row(rows, "exit_fit")
            ok = fit["r_squared"] >= r2_min and fit["slope"] < 0
            checks.append(Check(
                "exit_tail_fit", ok, fit["r_squared"],
                f"R^2 {fit['r_squared']:.4f} >= {r2_min} with negative slope "
                f"({fit['slope']:.4f})"))
        if "return_sigma_mult" in pending:
            (mult,) = pop("return_sigma_mult")
            zs = [abs(r["z"]) for r in rows if r.get("quantity") == "return_check"]
            worst = max(zs) if zs else math.inf
            checks.append(Check(
                "return_mc_vs_exact", bool(zs) and worst <= mult, worst,
                f"max |z| = {worst:.2f} <= {mult}"))

    elif kind == "frog_tails":
        if "invariant_max_violations" in pending:
            (vmax,) = pop("invariant_max_violations")
            row = _one_row(rows, "activation_lower_bound")
            checks.append(Check(
                "activation_lower_bound", row["violations"] <= vmax,
                row["violations"],
                f"{row['violations']}/{row['checked']} word-norm violations "
                f"<= {vmax}"))
        if "tail_require_monotone" in pending:
            (req,) = pop("tail_require_monotone")
            row = _one_row(rows, "tail_curve")
            ok = row["monotone"] or not req
            checks.append(Check("tail_monotone", ok, float(row["monotone"]),
                                f"survival non-increasing: {row['monotone']}"))
        if "tail_trend_slope_max" in pending:
            (smax,) = pop("tail_trend_slope_max")
            row = _one_row(rows, "tail_trend")
            checks.append(Check(
                "tail_log_concave_trend", row["increment_slope"] <= smax,
                row["increment_slope"],
                f"log-survival increment slope {row['increment_slope']:.4f} "
                f"<= {smax}"))

    elif kind == "linear_growth":
        if "p99_sigma_mult" in pending:
            mult, k_lo, k_hi = pop("p99_sigma_mult", "p99_k_low", "p99_k_high")
            by_k = {r["k"]: r for r in rows if r.get("quantity") == "growth_k"}
            cmp_row = _growth_compare_row(by_k, int(k_lo), int(k_hi))
            margin = cmp_row["p99_low"] + mult * cmp_row["se_combined"]
            ok = cmp_row["p99_high"] <= margin
            checks.append(Check(
                "p99_not_increasing", ok, cmp_row["p99_high"],
                f"p99(k={k_hi}) = {cmp_row['p99_high']:.4f} <= "
                f"p99(k={k_lo}) + {mult} sigma = {margin:.4f}"))
        if "censored_max" in pending:
            (cmax,) = pop("censored_max")
            worst = max(r["censored"] for r in rows
                        if r.get("quantity") == "growth_k")
            checks.append(Check("growth_censoring", worst <= cmax, worst,
                                f"max censored replicates {worst} <= {cmax}"))

    elif kind == "shape":
        if "convergence_decreasing" in pending:
            (req,) = pop("convergence_decreasing")
            pairs = [r for r in rows if r.get("quantity") == "hausdorff_pair"]
            grid = sorted({r["n"] for r in pairs} | {r["m"] for r in pairs})
            first = next(r for r in pairs if r["n"] == grid[0] and r["m"] == grid[1])
            last = next(r for r in pairs if r["n"] == grid[-2] and r["m"] == grid[-1])
            ok = last["mean"] < first["mean"] or not req
            checks.append(Check(
                "hausdorff_decreasing", ok, last["mean"],
                f"d_H({grid[-2]},{grid[-1]}) = {last['mean']:.4f} < "
                f"d_H({grid[0]},{grid[1]}) = {first['mean']:.4f}"))
        if "sandwich_max_fraction" in pending:
            (fmax,) = pop("sandwich_max_fraction")
            row = _one_row(rows, "sandwich_summary")
            worst = max(row["mean_inner"], row["mean_outer"])
            checks.append(Check(
                "sandwich_violations", worst < fmax, worst,
                f"mean violation fractions inner {row['mean_inner']:.5f} / "
                f"outer {row['mean_outer']:.5f} < {fmax}"))
        if "homogeneity_sigma_mult" in pending:
            (mult,) = pop("homogeneity_sigma_mult")
            zs = [abs(r["z"]) for r in rows
                  if r.get("quantity") == "phi_homogeneity"]
            worst = max(zs) if zs else math.inf
            checks.append(Check(
                "phi_homogeneity", bool(zs) and worst <= mult, worst,
                f"max |phi(2v)/2 - phi(v)| / sigma = {worst:.2f} <= {mult}"))
        if "subadd_sigma_mult" in pending:
            (mult,) = pop("subadd_sigma_mult")
            margins = []
            for r in rows:
                if r.get("quantity") != "phi_subadditivity":
                    continue
                margins.append(r["lhs"] - r["rhs"] - mult * r["sigma_combined"])
            worst = max(margins) if margins else math.inf
            checks.append(Check(
                "phi_subadditivity", bool(margins) and worst <= 0, worst,
                f"max (phi(u+v) - phi(u) - phi(v) - {mult} sigma) = "
                f"{worst:.4f} <= 0"))

    elif kind == "torsion_compare":
        if "ratio_max" in pending:
            (rmax,) = pop("ratio_max")
            row = _one_row(rows, "torsion_summary")
            checks.append(Check(
                "torsion_shape_ratio", row["mean_ratio"] < rmax,
                row["mean_ratio"],
                f"mean d_H / horizon = {row['mean_ratio']:.4f} < {rmax}"))

    elif kind == "symmetry":
        if "ratio_max" in pending:
            (rmax,) = pop("ratio_max")
            row = _one_row(rows, "symmetry_summary")
            checks.append(Check(
                "symmetry_ratio", row["mean_ratio"] < rmax, row["mean_ratio"],
                f"mean asymmetry / level = {row['mean_ratio']:.4f} < {rmax}"))

    if pending:
        raise FroglabError(f"unknown tolerance keys for kind {kind!r}: "
                           f"{sorted(pending)}")
    return checks


def load_results(run_dir) -> tuple[RunManifest, list[dict]]:
    run_dir = Path(run_dir)
    manifest = RunManifest.from_json((run_dir / MANIFEST_NAME).read_text())
    rows = []
    with open(run_dir / RESULTS_NAME) as fh:
        for line in fh:
            if line.strip():
                rows.append(json.loads(line))
    return manifest, rows


def emit_report(run_dir) -> Report:
    """Evaluate a finished run against its configured tolerances."""
    run_dir = Path(run_dir)
    manifest, rows = load_results(run_dir)
    if manifest.status != "complete":
        raise FroglabError(f"run at {run_dir} is {manifest.status}; "
                           "report needs a complete manifest")
    cfg = parse_config(manifest.config_text)
    checks = evaluate_checks(manifest.kind, rows, cfg.tolerances)
    lines = [
        f"froglab {manifest.tool_version} experiment report",
        f"kind: {manifest.kind}",
        f"config: {manifest.config_hash}",
        f"master_seed: {manifest.master_seed}",
        f"results: {len(rows)} rows in {RESULTS_NAME}",
    ]
    for c in checks:
        lines.append(c.line())
    if checks:
        n_ok = sum(c.passed for c in checks)
        lines.append(f"result: {'PASS' if n_ok == len(checks) else 'FAIL'} "
                     f"({n_ok}/{len(checks)} checks)")
    else:
        lines.append("result: PASS (no configured checks)")
    text = "\n".join(lines) + "\n"
    (run_dir / SUMMARY_NAME).write_text(text)
    return Report(manifest.kind, manifest.config_hash, tuple(checks), text)
