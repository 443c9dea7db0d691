"""Acceptance suite: one test per advertised guarantee, at shipped tolerances.

Criteria 1-8 execute checked-in configs from configs/acceptance/ through the
full experiment pipeline and assert the evaluated report.  Criteria 9 and 10
are record-level and oracle-level equivalences checked directly, with their
parameters read from plain key/value files in the same directory.  Every test
prints its measured values and elapsed wall time for the record.
"""

import ast
import time
from collections import deque
from itertools import product
from pathlib import Path

import numpy as np

from froglab.config import load_config
from froglab.experiments import emit_report, run_dir_for, run_experiment
from froglab.frog import run_frog
from froglab.groups import (GroupSpec, build_ball_table, generator_set,
                            standard_generators)
from froglab.rng import derive_seed
from froglab.shapes import hausdorff_distance, pointwise_distance
from froglab.walks import HeatKernel, return_probability_mc

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs" / "acceptance"


def run_and_report(name, tmp_path):
    cfg = load_config(CONFIG_DIR / name)
    t0 = time.perf_counter()
    run_experiment(cfg, tmp_path)
    report = emit_report(run_dir_for(cfg, tmp_path))
    elapsed = time.perf_counter() - t0
    print(f"\n[{name}] elapsed {elapsed:.1f}s")
    for line in report.text.strip().splitlines():
        print("   ", line)
    return report


def plain_config(name):
    out = {}
    for raw in (CONFIG_DIR / name).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            key, _, rhs = line.partition("=")
            out[key.strip()] = ast.literal_eval(rhs.strip())
    return out


def test_criterion_01_heat_kernel_scaling(tmp_path):
    for name in ("c01_heat_z3.cfg", "c01_heat_z4.cfg"):
        report = run_and_report(name, tmp_path)
        assert report.passed, f"{name} failed:\n{report.text}"


def test_criterion_02_range_matches_green_constant(tmp_path):
    report = run_and_report("c02_range.cfg", tmp_path)
    assert report.passed, f"c02_range failed:\n{report.text}"


def test_criterion_03_exit_time_tails(tmp_path):
    report = run_and_report("c03_exit.cfg", tmp_path)
    assert report.passed, f"c03_exit failed:\n{report.text}"


def test_criterion_04_activation_bound_and_tails(tmp_path):
    report = run_and_report("c04_tails.cfg", tmp_path)
    assert report.passed, f"c04_tails failed:\n{report.text}"


def test_criterion_05_linear_growth(tmp_path):
    report = run_and_report("c05_growth.cfg", tmp_path)
    assert report.passed, f"c05_growth failed:\n{report.text}"


def test_criterion_06_shape_convergence_and_sandwich(tmp_path):
    report = run_and_report("c06_shape.cfg", tmp_path)
    assert report.passed, f"c06_shape failed:\n{report.text}"


def test_criterion_07_direction_constant_properties(tmp_path):
    report = run_and_report("c07_phi.cfg", tmp_path)
    assert report.passed, f"c07_phi failed:\n{report.text}"


def test_criterion_08_torsion_invariance(tmp_path):
    report = run_and_report("c08_torsion.cfg", tmp_path)
    assert report.passed, f"c08_torsion failed:\n{report.text}"


def test_criterion_09_truncation_coupling():
    cfg = plain_config("c09_coupling.cfg")
    g = GroupSpec(cfg["rank"])
    s = standard_generators(g)
    h_lo, h_hi = cfg["horizon_low"], cfg["horizon_high"]
    t0 = time.perf_counter()
    ball_lo = build_ball_table(g, s, h_lo)
    ball_hi = build_ball_table(g, s, h_hi)
    compared = 0
    for i in range(cfg["n_seeds"]):
        seed = derive_seed(cfg["master_seed"], i)
        rec_lo = run_frog(g, s, h_lo, seed, ball=ball_lo)
        rec_hi = run_frog(g, s, h_hi, seed, ball=ball_hi)
        d_lo = {tuple(c): t for c, t in
                zip(rec_lo.elements.tolist(), rec_lo.times.tolist())}
        d_hi = {tuple(c): t for c, t in
                zip(rec_hi.elements.tolist(), rec_hi.times.tolist())
                if t <= h_lo}
        assert d_hi == d_lo, (
            f"seed index {i}: restriction of the horizon-{h_hi} run to times "
            f"<= {h_lo} differs from the horizon-{h_lo} run")
        compared += len(d_lo)
    print(f"\n[c09_coupling] {cfg['n_seeds']} seeds, {compared} activations "
          f"bit-identical across horizons {h_lo}/{h_hi}; "
          f"elapsed {time.perf_counter() - t0:.1f}s")


def python_bfs_ball(group, gens, radius):
    """Word norms by plain breadth-first search; trusted reference."""
    moves = [tuple(row) for row in gens.matrix.tolist()]
    start = tuple([0] * group.ncoords)
    norms = {start: 0}
    frontier = deque([start])
    while frontier:
        here = frontier.popleft()
        if norms[here] == radius:
            continue
        for mv in moves:
            nxt = list(a + b for a, b in zip(here, mv))
            for j, m in enumerate(group.torsion_orders):
                nxt[group.rank + j] %= m
            key = tuple(nxt)
            if key not in norms:
                norms[key] = norms[here] + 1
                frontier.append(key)
    return norms


def test_criterion_10_oracle_equivalence():
    cfg = plain_config("c10_oracles.cfg")
    g = GroupSpec(cfg["rank"])
    s = standard_generators(g)
    t0 = time.perf_counter()

    # (a) Monte Carlo return probabilities against the exact recursion
    hk = HeatKernel(g, s)
    worst_z = 0.0
    for n in cfg["return_times"]:
        stats = return_probability_mc(
            g, s, derive_seed(cfg["master_seed"], n, "return"),
            cfg["return_n_walks"], n)
        exact = hk.return_probability(n)
        z = (stats.estimate[0] - exact) / stats.std_error[0]
        worst_z = max(worst_z, abs(z))
        assert abs(z) <= cfg["return_sigma_mult"], (
            f"n={n}: sampled {stats.estimate[0]:.6f} vs exact {exact:.6f} "
            f"gives |z| = {abs(z):.2f}")

    # (b) tree-accelerated Hausdorff against a dense scan, exact equality
    rng = np.random.default_rng(derive_seed(cfg["master_seed"], 0, "clouds"))
    for i in range(cfg["hausdorff_pairs"]):
        na = int(rng.integers(1, cfg["hausdorff_max_points"] + 1))
        nb = int(rng.integers(1, cfg["hausdorff_max_points"] + 1))
        if i % 2:
            a = rng.normal(scale=4.0, size=(na, 3))
            b = rng.normal(scale=4.0, size=(nb, 3))
        else:  # integer clouds force exact ties
            a = rng.integers(-5, 6, size=(na, 3)).astype(np.float64)
            b = rng.integers(-5, 6, size=(nb, 3)).astype(np.float64)
        for metric in ("l1", "l2"):
            full = pointwise_distance(a[:, None, :], b[None, :, :], metric)
            dense = max(full.min(axis=1).max(), full.min(axis=0).max())
            assert hausdorff_distance(a, b, metric) == dense, f"pair {i}"

    # (c) BFS balls against direct enumeration
    rmax = cfg["ball_radius_max"]
    table = build_ball_table(g, s, rmax)
    for r in range(rmax + 1):
        got = {tuple(p) for p in table.ball_points(r).tolist()}
        box = {p for p in product(range(-r, r + 1), repeat=3)
               if sum(abs(c) for c in p) <= r}
        assert got == box, f"standard generators, r={r}"
    diag = generator_set(g, [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0),
                             (0, 0, 1), (0, 0, -1), (1, 1, 0), (-1, -1, 0)])
    oracle = python_bfs_ball(g, diag, 4)
    table_d = build_ball_table(g, diag, 4)
    for r in range(5):
        got = {tuple(p) for p in table_d.ball_points(r).tolist()}
        want = {c for c, n in oracle.items() if n <= r}
        assert got == want, f"diagonal generators, r={r}"

    print(f"\n[c10_oracles] max |z| = {worst_z:.2f} over return times "
          f"{cfg['return_times']}; {cfg['hausdorff_pairs']} cloud pairs and "
          f"balls to r={rmax} matched exactly; "
          f"elapsed {time.perf_counter() - t0:.1f}s")
