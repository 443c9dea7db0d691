"""Shape analysis: distances, directional models, sandwich and symmetry checks."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from froglab.errors import (EmptyCloudError, FroglabError,
                            InapplicableSymmetryError)
from froglab.frog import run_frog
from froglab.groups import GroupSpec, generator_set, standard_generators
from froglab.shapes import (EnvelopePhi, PhiModel, fan_directions,
                            hausdorff_distance, phi_from_records, phi_hat,
                            phi_k_grid, pilot_rate, pointwise_distance,
                            rescale, sandwich_check, shape_convergence_series,
                            signed_permutations, symmetry_check,
                            torsion_invariance_check)

Z3 = GroupSpec(3)
STD3 = standard_generators(Z3)


def brute_hausdorff(a, b, metric):
    full = pointwise_distance(a[:, None, :], b[None, :, :], metric)
    return max(full.min(axis=1).max(), full.min(axis=0).max())


# -- Hausdorff distance


def test_hausdorff_hand_values():
    a = np.array([[0.0, 0.0]])
    b = np.array([[3.0, 4.0]])
    assert hausdorff_distance(a, b, "l2") == 5.0
    assert hausdorff_distance(a, b, "l1") == 7.0
    # one-sided containment still measures the far point
    c = np.array([[0.0, 0.0], [3.0, 4.0]])
    assert hausdorff_distance(a, c, "l2") == 5.0


def test_hausdorff_equals_dense_scan_exactly():
    rng = np.random.default_rng(2)
    for _ in range(60):
        a = rng.normal(size=(rng.integers(1, 30), 3))
        b = rng.normal(size=(rng.integers(1, 30), 3))
        for metric in ("l1", "l2"):
            assert hausdorff_distance(a, b, metric) == brute_hausdorff(a, b, metric)
    # integer clouds exercise exact ties
    for _ in range(40):
        a = rng.integers(-4, 5, size=(rng.integers(1, 25), 3)).astype(float)
        b = rng.integers(-4, 5, size=(rng.integers(1, 25), 3)).astype(float)
        for metric in ("l1", "l2"):
            assert hausdorff_distance(a, b, metric) == brute_hausdorff(a, b, metric)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.tuples(st.integers(-8, 8), st.integers(-8, 8)), min_size=1,
             max_size=12),
    st.lists(st.tuples(st.integers(-8, 8), st.integers(-8, 8)), min_size=1,
             max_size=12),
    st.sampled_from(["l1", "l2"]),
)
def test_hausdorff_metric_properties(pa, pb, metric):
    a = np.asarray(pa, dtype=np.float64)
    b = np.asarray(pb, dtype=np.float64)
    d = hausdorff_distance(a, b, metric)
    assert d >= 0
    assert hausdorff_distance(b, a, metric) == d
    assert hausdorff_distance(a, a, metric) == 0.0
    if {tuple(p) for p in pa} == {tuple(p) for p in pb}:
        assert d == 0.0


def test_hausdorff_input_validation():
    with pytest.raises(ValueError, match="metric"):
        hausdorff_distance(np.zeros((1, 2)), np.zeros((1, 2)), "linf")
    with pytest.raises(ValueError, match="dimensions"):
        hausdorff_distance(np.zeros((1, 2)), np.zeros((1, 3)))
    with pytest.raises(EmptyCloudError):
        hausdorff_distance(np.zeros((0, 2)), np.zeros((1, 2)))


# -- rescaling


def test_rescale_scales_and_drops_torsion():
    g = GroupSpec(2, (2,))
    pts = np.array([[2, -4, 0], [2, -4, 1], [0, 6, 1]])
    cloud = rescale(pts, 0.5, g)
    got = {tuple(p) for p in cloud.points.tolist()}
    assert got == {(1.0, -2.0), (0.0, 3.0)}
    with pytest.raises(ValueError):
        rescale(pts, 0.0, g)


def test_rescale_accepts_group_elements():
    els = [Z3.from_coords([2, 0, -2]), Z3.from_coords([4, 4, 0])]
    cloud = rescale(els, 0.25)
    assert {tuple(p) for p in cloud.points.tolist()} == {(0.5, 0.0, -0.5),
                                                         (1.0, 1.0, 0.0)}


# -- direction fans and k grids


def test_fan_direction_counts_and_orientation():
    fan1 = fan_directions(3, 1)
    assert len(fan1) == 13
    fan2 = fan_directions(3, 2)
    assert len(fan2) == 49
    for fan in (fan1, fan2):
        for v in fan:
            assert math.gcd(math.gcd(abs(v[0]), abs(v[1])), abs(v[2])) == 1
            assert next(c for c in v if c) > 0
    assert set(fan1) <= set(fan2)


def test_pilot_rate_and_grid_homogeneity():
    assert pilot_rate((1, 0, 0), 2.0, 0.5) == 2.0
    assert pilot_rate((1, 1, 1), 2.0, 0.5) == 3.0
    assert pilot_rate((2, 1, 0), 2.0, 0.5) == 4.5
    grid = phi_k_grid((1, 0, 0), 100.0, 2.0, 0.5)
    assert grid == (12, 25, 50)
    double = phi_k_grid((2, 0, 0), 100.0, 2.0, 0.5)
    assert double[-1] == grid[-1] // 2  # same top wake time for v and 2v
    assert phi_k_grid((1, 0, 0), 1.0, 2.0, 0.5) == (1, 2, 3)


# -- piecewise-linear directional models


def test_model_reproduces_l1_norm_at_both_resolutions():
    rng = np.random.default_rng(8)
    pts = rng.normal(scale=5.0, size=(300, 3))
    for res in (1, 2):
        values = {v: float(sum(abs(c) for c in v)) for v in fan_directions(3, res)}
        model = PhiModel(values, res)
        got = model.evaluate(pts)
        expect = np.abs(pts).sum(axis=1)
        assert np.allclose(got, expect, atol=1e-10)


def test_model_reproduces_linf_norm_at_resolution_two():
    # the max-norm unit sphere has vertices strictly inside cube faces, so
    # resolution one cannot represent it but resolution two can
    rng = np.random.default_rng(9)
    pts = rng.normal(scale=3.0, size=(200, 3))
    values = {v: float(max(abs(c) for c in v)) for v in fan_directions(3, 2)}
    model = PhiModel(values, 2)
    assert np.allclose(model.evaluate(pts), np.abs(pts).max(axis=1), atol=1e-10)


def test_model_positive_homogeneity_and_origin():
    values = {v: float(sum(abs(c) for c in v)) + 0.5 for v in fan_directions(3, 1)}
    model = PhiModel(values, 1)
    rng = np.random.default_rng(10)
    pts = rng.normal(size=(50, 3))
    base = model.evaluate(pts)
    for t in (0.25, 2.0, 17.0):
        assert np.allclose(model.evaluate(t * pts), t * base, rtol=1e-12)
    assert model.evaluate(np.zeros((1, 3)))[0] == 0.0


def test_model_validation():
    with pytest.raises(ValueError, match="positive"):
        PhiModel({(1, 0, 0): 0.0, (0, 1, 0): 1.0, (0, 0, 1): 1.0,
                  (1, 1, 0): 1.0, (1, -1, 0): 1.0, (1, 0, 1): 1.0,
                  (1, 0, -1): 1.0, (0, 1, 1): 1.0, (0, 1, -1): 1.0,
                  (1, 1, 1): 1.0, (1, 1, -1): 1.0, (1, -1, 1): 1.0,
                  (1, -1, -1): 1.0})
    with pytest.raises(ValueError, match="no value"):
        PhiModel({(1, 0, 0): 1.0, (0, 1, 0): 1.0, (0, 0, 1): 1.0})
    with pytest.raises(ValueError, match="R\\^3"):
        PhiModel({(1, 0): 1.0})


# -- directional estimates from records


def test_phi_estimates_from_shared_records_match_fresh_runs():
    ms = 555
    k_values = (2, 4)
    horizon = 20
    est_fresh = phi_hat(Z3, STD3, (1, 0, 0), k_values, replicas=5,
                        master_seed=ms, horizon=horizon)
    from froglab.rng import derive_seed
    targets = np.array([[2, 0, 0], [4, 0, 0]])
    records = [run_frog(Z3, STD3, horizon, derive_seed(ms, i),
                        until_targets=targets) for i in range(5)]
    est_shared = phi_from_records(records, (1, 0, 0), k_values, ms)
    assert est_shared.means == est_fresh.means
    assert est_shared.std_errors == est_fresh.std_errors
    assert est_shared.counts == est_fresh.counts
    assert est_fresh.estimate == est_fresh.means[-1]
    assert est_fresh.min_mean <= est_fresh.estimate
    assert est_fresh.means[-1] >= 1.0


def test_phi_estimate_records_serialize():
    rec = phi_hat(Z3, STD3, (1, 1, 0), (2, 3), replicas=3, master_seed=1,
                  horizon=25).to_record()
    assert rec["quantity"] == "phi_direction"
    assert rec["params"]["direction"] == [1, 1, 0]
    assert len(rec["means"]) == 2


# -- convergence series and the sandwich


def test_convergence_series_structure():
    records = [run_frog(Z3, STD3, 16, seed) for seed in (1, 2, 3)]
    series = shape_convergence_series(records, (4, 8, 16))
    assert [(p.n, p.m) for p in series] == [(4, 8), (4, 16), (8, 16)]
    for pair in series:
        assert len(pair.distances) == 3
        assert pair.mean_distance >= 0
        assert pair.std >= 0


def test_convergence_series_rejects_deep_grids():
    records = [run_frog(Z3, STD3, 10, 1)]
    with pytest.raises(FroglabError):
        shape_convergence_series(records, (4, 12))


def test_envelope_model_reports_exact_times():
    rec = run_frog(Z3, STD3, 12, 42)
    env = EnvelopePhi(rec)
    pts = rec.elements.astype(np.float64)
    vals = env.evaluate(pts)
    assert np.array_equal(vals, rec.times.astype(np.float64))
    outside = env.evaluate(np.array([[99.0, 0.0, 0.0]]))
    assert np.isinf(outside[0])


def test_sandwich_against_own_envelope_has_no_violations():
    rec = run_frog(Z3, STD3, 14, 7)
    report = sandwich_check(rec, EnvelopePhi(rec), epsilon=0.0)
    assert report.inner_violations == 0
    assert report.outer_violations == 0
    assert report.inner_total > 0
    assert report.outer_total == len(rec.activation_ball(14))
    d = report.to_record()
    assert d["inner_fraction"] == 0.0 and d["outer_fraction"] == 0.0


def test_sandwich_flags_a_too_small_model():
    rec = run_frog(Z3, STD3, 14, 7)
    # claiming activation spreads twice as fast as it does must create
    # inner violations: the claimed shape includes never-activated sites
    values = {v: 0.5 * sum(abs(c) for c in v) for v in fan_directions(3, 1)}
    report = sandwich_check(rec, PhiModel(values, 1), epsilon=0.1)
    assert report.inner_violations > 0


def test_sandwich_requires_torsion_free_records():
    g = GroupSpec(1, (2,))
    s = generator_set(g, [(1, 0), (-1, 0), (0, 1)])
    rec = run_frog(g, s, 6, 1)
    values = {v: 1.0 for v in fan_directions(3, 1)}
    with pytest.raises(FroglabError):
        sandwich_check(rec, PhiModel(values, 1), epsilon=0.1)


# -- torsion comparison


def test_torsion_comparison_shares_seeds_and_scales():
    g = GroupSpec(1, (2,))
    s = generator_set(g, [(1, 0), (-1, 0), (0, 1), (1, 1), (-1, 1)])
    cmp1 = torsion_invariance_check(g, s, horizon=15, seeds=(1, 2, 3))
    assert len(cmp1.distances) == 3
    assert cmp1.horizon == 15
    assert cmp1.mean_ratio == pytest.approx(
        float(np.mean(cmp1.distances)) / 15)
    cmp2 = torsion_invariance_check(g, s, horizon=15, seeds=(1, 2, 3))
    assert cmp1.distances == cmp2.distances
    rec = cmp1.to_record()
    assert rec["quantity"] == "torsion_compare"


def test_torsion_comparison_needs_torsion():
    with pytest.raises(FroglabError):
        torsion_invariance_check(Z3, STD3, horizon=6, seeds=(1,))


# -- symmetry


def test_signed_permutation_enumeration():
    mats2 = signed_permutations(2)
    assert len(mats2) == 8
    mats3 = signed_permutations(3)
    assert len(mats3) == 48
    assert len({m.tobytes() for m in mats3}) == 48
    for m in mats3:
        assert np.array_equal(m @ m.T, np.eye(3, dtype=np.int64))


def test_symmetry_check_on_invariant_generators():
    rec = run_frog(Z3, STD3, 10, 5)
    rep = symmetry_check(rec, signed_permutations(3), level=8)
    assert rep.level == 8
    assert len(rep.per_matrix) == 48
    assert min(rep.per_matrix) == 0.0  # the identity matrix is in the list
    assert rep.max_asymmetry == max(rep.per_matrix)


def test_symmetry_check_rejects_noninvariant_generators():
    g = GroupSpec(2)
    s = generator_set(g, [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1)])
    rec = run_frog(g, s, 6, 3)
    with pytest.raises(InapplicableSymmetryError):
        symmetry_check(rec, signed_permutations(2))
