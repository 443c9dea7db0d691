"""Walk engine: exact kernels vs independent oracles, and seeded Monte Carlo."""

import itertools
import math

import numpy as np
import pytest

from froglab.groups import GroupSpec, generator_set, standard_generators
from froglab.walks import (HeatKernel, SiteRandomness, bipartite_character,
                           exit_tail_mc, exit_time, hit_probability_mc,
                           is_bipartite, linear_fit, power_law_fit,
                           range_ratio_mc, range_size, return_probability_mc,
                           sample_positions, simulate_walk)

Z3 = GroupSpec(3)
STD3 = standard_generators(Z3)

# Independent reference for the total expected visit count at the origin of
# the simple cubic walk, from the classical triple-integral evaluation.
GREEN_Z3 = 1.5163860592


def brute_step_probability(gens, target, n):
    """Endpoint probability by full enumeration of generator sequences."""
    gm = gens.matrix
    tgt = np.asarray(target, dtype=np.int64)
    count = sum(
        1 for seq in itertools.product(range(len(gens)), repeat=n)
        if np.array_equal(gm[list(seq)].sum(axis=0), tgt)
    )
    return count / len(gens) ** n


# -- exact kernels


def test_kernel_matches_brute_force_enumeration():
    hk = HeatKernel(Z3, STD3)
    for n in (2, 3, 4):
        for target in ((0, 0, 0), (1, 0, 0), (1, 1, 0)):
            brute = brute_step_probability(STD3, target, n)
            dp = hk.probability((0, 0, 0), target, n)
            assert dp == pytest.approx(brute, abs=1e-12), (n, target)


def test_kernel_array_mass_and_symmetry():
    hk = HeatKernel(Z3, STD3)
    arr = hk.kernel_array(5)
    assert arr.total_mass == pytest.approx(1.0, abs=1e-12)
    rng = np.random.default_rng(4)
    for _ in range(20):
        x = rng.integers(-3, 4, size=3)
        assert arr.value(x) == pytest.approx(arr.value(-x), abs=1e-15)


def test_pair_sequence_consistent_with_full_array():
    hk = HeatKernel(Z3, STD3)
    arr = hk.kernel_array(6)
    for target in ((0, 0, 0), (2, 0, 0), (1, 1, 0), (2, 2, 2)):
        seq = hk.pair_sequence(target, 6)
        assert seq[6] == pytest.approx(arr.value(target), abs=1e-14)
        assert seq.shape == (7,)


def test_translation_invariance_of_probability():
    hk = HeatKernel(Z3, STD3)
    p1 = hk.probability((1, -2, 0), (2, -2, 1), 4)
    p2 = hk.probability((0, 0, 0), (1, 0, 1), 4)
    assert p1 == p2


def test_diagonal_decay_exponent_z3():
    hk = HeatKernel(Z3, STD3)
    fit = hk.heat_kernel_scaling(range(20, 61, 2))
    assert fit.slope == pytest.approx(-1.5, abs=0.15)
    assert fit.r_squared > 0.999


def test_green_estimate_matches_reference_constant():
    hk = HeatKernel(Z3, STD3)
    est = hk.green_estimate(120)
    assert est.value == pytest.approx(GREEN_Z3, abs=1e-4)
    assert est.tail > 0
    assert est.partial_sum < est.value


def test_hitting_dp_matches_hand_count():
    # P(first visit to e1 within 3 steps) counted by hand over step words:
    # time 1: 1/6; time 2: impossible (parity); time 3: 9 paths of weight
    # 6^-3 (five through the origin, four through the side neighbors).
    hk = HeatKernel(Z3, STD3)
    assert hk.hitting_probability_dp([1, 0, 0], 3) == pytest.approx(5 / 24, abs=1e-12)


# -- bipartite structure


def test_bipartite_detection():
    assert is_bipartite(STD3)
    diag = generator_set(GroupSpec(2), [(1, 0), (-1, 0), (0, 1), (0, -1),
                                        (1, 1), (-1, -1), (1, -1), (-1, 1)])
    assert not is_bipartite(diag)
    # A torsion step of order two can carry the alternating character.
    gt = GroupSpec(3, (2,))
    st = generator_set(gt, [(1, 0, 0, 0), (-1, 0, 0, 0), (0, 1, 0, 0),
                            (0, -1, 0, 0), (0, 0, 1, 0), (0, 0, -1, 0),
                            (0, 0, 0, 1)])
    assert is_bipartite(st)
    chi = bipartite_character(st)
    assert chi is not None


def test_bipartite_kernel_vanishes_off_parity():
    hk = HeatKernel(Z3, STD3)
    assert hk.probability((0, 0, 0), (0, 0, 0), 3) == 0.0
    assert hk.probability((0, 0, 0), (1, 0, 0), 4) == 0.0


# -- single trajectories


def test_simulate_walk_steps_lie_in_generator_set():
    stream = SiteRandomness(STD3, 99, Z3.identity())
    traj = simulate_walk(Z3.identity(), 200, stream)
    assert len(traj) == 201
    coords = traj.coords
    diffs = np.diff(coords, axis=0)
    allowed = {tuple(r) for r in STD3.matrix.tolist()}
    assert {tuple(d) for d in diffs.tolist()} <= allowed
    assert range_size(traj) <= 201
    # replaying the same stream gives the same path
    again = simulate_walk(Z3.identity(), 200, SiteRandomness(STD3, 99, Z3.identity()))
    assert np.array_equal(coords, again.coords)


def test_exit_time_radius_zero_is_first_step():
    stream = SiteRandomness(STD3, 5, Z3.identity())
    assert exit_time(Z3.identity(), 0, 10, stream) == 1


def test_walker_prefix_property():
    # The first walkers of a larger batch are exactly the smaller batch:
    # streams are keyed by walker index, not batch size.
    small = sample_positions(Z3, STD3, 42, n_walks=7, n_steps=30)
    large = sample_positions(Z3, STD3, 42, n_walks=20, n_steps=30)
    assert np.array_equal(small, large[:7])


# -- Monte Carlo against exact values


def test_return_probability_mc_within_sampling_error():
    hk = HeatKernel(Z3, STD3)
    stats = return_probability_mc(Z3, STD3, master_seed=2718, n_walks=50000, time=4)
    z = (stats.estimate[0] - hk.return_probability(4)) / stats.std_error[0]
    assert abs(z) < 4.0


def test_hit_probability_mc_matches_hand_count():
    est = hit_probability_mc(Z3, STD3, master_seed=314, target=[1, 0, 0],
                             horizon=3, n_walks=40000)
    z = (est.prob - 5 / 24) / est.std_error
    assert abs(z) < 4.0


def test_range_per_step_approaches_inverse_green():
    rr = range_ratio_mc(Z3, STD3, master_seed=161, n_steps=2000, n_walks=300)
    assert rr.mean == pytest.approx(1.0 / GREEN_Z3, abs=0.05)
    assert rr.std_error < 0.01


def test_exit_tail_probs_decrease_in_radius():
    et = exit_tail_mc(Z3, STD3, master_seed=271, radii=[10, 15, 20, 25],
                      horizon=100, n_walks=20000)
    probs = et.probs
    assert probs.shape == (4,)
    assert np.all(np.diff(probs) < 0)
    assert 0 < probs[-1] < probs[0] <= 1


def test_exit_tail_log_linear_in_t_squared():
    t = np.array([1.0, 1.5, 2.0, 2.5])
    et = exit_tail_mc(Z3, STD3, master_seed=272,
                      radii=[int(round(v * 10)) for v in t],
                      horizon=100, n_walks=20000)
    mask = et.probs > 0
    fit = linear_fit(t[mask] ** 2, np.log(et.probs[mask]))
    assert fit.slope < 0
    assert fit.r_squared > 0.95


# -- fit helpers


def test_power_law_fit_recovers_exact_relationship():
    xs = np.array([4.0, 8.0, 16.0, 32.0, 64.0])
    fit = power_law_fit(xs, 3.0 * xs ** -2.5)
    assert fit.slope == pytest.approx(-2.5, abs=1e-12)
    assert fit.intercept == pytest.approx(math.log(3.0), abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
    assert fit.n_points == 5


def test_linear_fit_recovers_exact_line():
    xs = np.arange(1.0, 9.0)
    fit = linear_fit(xs, 2.0 - 0.75 * xs)
    assert fit.slope == pytest.approx(-0.75, abs=1e-12)
    assert fit.intercept == pytest.approx(2.0, abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
