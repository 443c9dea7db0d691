"""Limit-shape analysis: Hausdorff distances, rescaling, direction-wise
growth constants, sandwich checks, torsion-quotient and symmetry diagnostics.

Activation balls rescaled by 1/n are compared pairwise (a Cauchy-style
convergence proxy, since the limit shape has no closed form), and a
positively homogeneous piecewise-linear model interpolates the estimated
per-direction growth constants over a fan of integer directions so the
two-sided sandwich inclusion can be tested on lattice points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .errors import (
    EmptyCloudError,
    FroglabError,
    InapplicableSymmetryError,
    OutOfHorizonError,
)
from .frog import ActivationRecord, FrogSimulation, run_frog
from .groups import (
    DEFAULT_BUDGET,
    GeneratorSet,
    GroupElement,
    GroupSpec,
    MemoryBudget,
    WordMetric,
    build_ball_table,
    induced_quotient_generators,
    torsion_quotient,
)
from .rng import derive_seed

_METRIC_P = {"l1": 1, "l2": 2}


# ---------------------------------------------------------------------------
# Point clouds, Hausdorff distance, rescaling


@dataclass(frozen=True)
class PointCloud:
    """Finite non-empty set of real vectors."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=np.float64))
        if pts.size == 0:
            raise EmptyCloudError("point cloud is empty")
        if not np.isfinite(pts).all():
            raise ValueError("point cloud contains non-finite coordinates")
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


def _as_cloud(obj) -> PointCloud:
    if isinstance(obj, PointCloud):
        return obj
    return PointCloud(np.asarray(obj, dtype=np.float64))


def pointwise_distance(x: np.ndarray, y: np.ndarray, metric: str = "l2") -> np.ndarray:
    """Elementwise distance along the last axis (broadcasting allowed)."""
    if metric not in _METRIC_P:
        raise ValueError(f"unknown metric {metric!r}; choose 'l1' or 'l2'")
    d = np.asarray(x, dtype=np.float64) - np.asarray(y, dtype=np.float64)
    if _METRIC_P[metric] == 1:
        return np.abs(d).sum(axis=-1)
    return np.sqrt((d * d).sum(axis=-1))


def _directed_hausdorff(src: np.ndarray, dst: np.ndarray, metric: str) -> float:
    # The tree only picks nearest*indices*; the achieved distances are
    # recomputed with the same arithmetic a dense scan would use, so the
    # result matches a brute-force evaluation exactly.
    idx = cKDTree(dst).query(src, k=1, p=_METRIC_P[metric])[1]
    return float(pointwise_distance(src, dst[idx], metric).max())


def hausdorff_distance(a, b, metric: str = "l2") -> float:
    """Symmetric Hausdorff distance between two finite clouds.

    metric selects the underlying point norm: "l1" or "l2".
    """
    if metric not in _METRIC_P:
        raise ValueError(f"unknown metric {metric!r}; choose 'l1' or 'l2'")
    ca, cb = _as_cloud(a), _as_cloud(b)
    if ca.dim != cb.dim:
        raise ValueError("clouds live in different dimensions")
    return max(_directed_hausdorff(ca.points, cb.points, metric),
               _directed_hausdorff(cb.points, ca.points, metric))


def free_coordinates(group: GroupSpec, coords: np.ndarray) -> np.ndarray:
    """Distinct free parts of coordinate rows (torsion dropped)."""
    arr = np.atleast_2d(np.asarray(coords, dtype=np.int64))[:, : group.rank]
    if group.torsion_orders:
        arr = np.unique(arr, axis=0)
    return arr


def rescale(points, t: float, group: GroupSpec | None = None) -> PointCloud:
    """Image of lattice points in R^rank under scaling by t.

    Accepts group elements (their torsion part is dropped via the quotient)
    or raw coordinate rows together with the owning group.
    """
    if t <= 0:
        raise ValueError("scale factor must be positive")
    if group is None:
        elems = list(points)
        if not elems:
            raise EmptyCloudError("no points to rescale")
        group = elems[0].group
        arr = np.asarray([p.coords for p in elems], dtype=np.int64)
    else:
        arr = np.atleast_2d(np.asarray(points, dtype=np.int64))
    if group.rank == 0:
        raise FroglabError("rescaling needs at least one free coordinate")
    return PointCloud(free_coordinates(group, arr).astype(np.float64) * t)


# ---------------------------------------------------------------------------
# Direction-wise growth constants


def fan_directions(rank: int = 3, resolution: int = 1) -> list[tuple[int, ...]]:
    """Primitive direction representatives of the cube-surface grid.

    The fan at a given resolution S consists of the integer vectors with
    max-norm exactly S; each is reduced to its primitive multiple, and each
    {v, -v} pair is represented by the member whose first nonzero coordinate
    is positive.  Rank 3 yields 13 directions at resolution 1 and 49 at
    resolution 2.
    """
    if resolution < 1:
        raise ValueError("resolution must be >= 1")
    seen = set()
    out = []
    side = 2 * resolution + 1
    for raw in np.ndindex(*(side,) * rank):
        v = tuple(c - resolution for c in raw)
        if max(abs(c) for c in v) != resolution:
            continue
        g = 0
        for c in v:
            g = math.gcd(g, abs(c))
        p = tuple(c // g for c in v)
        if next(c for c in p if c) < 0:
            p = tuple(-c for c in p)
        if p not in seen:
            seen.add(p)
            out.append(p)
    return out


def pilot_rate(direction, axis_rate: float, extra_rate: float) -> float:
    """Rough per-unit activation rate along a direction, for grid sizing.

    A crude norm-like surrogate: axis_rate per max-coordinate unit plus
    extra_rate per remaining L1 unit.  Used only to choose k grids whose
    largest target wakes near a prescribed time.
    """
    l1 = sum(abs(int(c)) for c in direction)
    linf = max(abs(int(c)) for c in direction)
    return axis_rate * linf + extra_rate * (l1 - linf)


def phi_k_grid(direction, target_time: float, axis_rate: float,
               extra_rate: float) -> tuple[int, ...]:
    """Three-point k grid whose top target wakes near target_time.

    Aligning the top of the grid with a common wake time keeps the
    finite-k bias of the ratio estimates comparable across directions
    (and equal between a direction and its doubles, since the surrogate
    rate is homogeneous).
    """
    kmax = max(3, int(target_time / pilot_rate(direction, axis_rate, extra_rate)))
    return tuple(sorted({max(1, kmax // 4), max(2, kmax // 2), kmax}))


@dataclass(frozen=True)
class PhiEstimate:
    """Directional growth-constant estimate from activation records.

    means[i] is the average of T(e, k_i * direction) / k_i over replicates;
    the headline estimate uses the largest k.  min_mean is the smallest
    mean over the k grid, an upper-bound cross-check motivated by the
    infimum characterisation of the limit.
    """

    direction: tuple[int, ...]
    k_values: tuple[int, ...]
    means: tuple[float, ...]
    std_errors: tuple[float, ...]
    counts: tuple[int, ...]
    censored: tuple[int, ...]
    master_seed: int

    @property
    def estimate(self) -> float:
        return self.means[-1]

    @property
    def std_error(self) -> float:
        return self.std_errors[-1]

    @property
    def min_mean(self) -> float:
        return min(self.means)

    def to_record(self) -> dict:
        return {
            "quantity": "phi_direction",
            "params": {"direction": list(self.direction), "k_values": list(self.k_values)},
            "estimate": self.estimate,
            "stderr": self.std_error,
            "means": list(self.means),
            "stderrs": list(self.std_errors),
            "counts": list(self.counts),
            "censored": list(self.censored),
            "master_seed": self.master_seed,
        }


def phi_from_records(records: Sequence[ActivationRecord], direction,
                     k_values, master_seed: int = 0) -> PhiEstimate:
    """Estimate the directional growth constant from existing records.

    Every record contributes T(e, k * direction) for each k it activated;
    sharing one record set across directions and k values is exact because
    a record stores the full realization.
    """
    if not records:
        raise ValueError("need at least one record")
    group = records[0].group
    d = np.asarray(group.from_coords([int(v) for v in direction]).coords, dtype=np.int64)
    k_values = tuple(sorted(int(k) for k in k_values))
    means, stderrs, counts, censored = [], [], [], []
    for k in k_values:
        target = group.from_coords((k * d).tolist()).coords
        vals = []
        miss = 0
        for rec in records:
            t = rec.activation_time(target)
            if t is None:
                miss += 1
            else:
                vals.append(t / k)
        arr = np.asarray(vals, dtype=np.float64)
        if arr.size == 0:
            means.append(math.inf)
            stderrs.append(math.inf)
        else:
            means.append(float(arr.mean()))
            sd = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
            stderrs.append(sd / math.sqrt(arr.size))
        counts.append(arr.size)
        censored.append(miss)
    return PhiEstimate(tuple(int(v) for v in d), k_values, tuple(means),
                       tuple(stderrs), tuple(counts), tuple(censored), master_seed)


def phi_hat(group: GroupSpec, gens: GeneratorSet, direction, k_values,
            replicas: int, master_seed: int, horizon: int | None = None,
            budget: MemoryBudget = DEFAULT_BUDGET) -> PhiEstimate:
    """Directional growth constant from fresh replicate runs.

    Runs its own realizations (seeds derived from master_seed by replicate
    index) and stops each one as soon as the largest target wakes.
    """
    d = np.asarray(group.from_coords([int(v) for v in direction]).coords, dtype=np.int64)
    k_values = tuple(sorted(int(k) for k in k_values))
    metric = WordMetric(group, gens, budget)
    top = group.from_coords((k_values[-1] * d).tolist())
    if horizon is None:
        horizon = 3 * metric.word_norm(top) + 10
    targets = np.stack([
        np.asarray(group.from_coords((k * d).tolist()).coords, dtype=np.int64)
        for k in k_values
    ])
    ball = build_ball_table(group, gens, horizon, budget)
    records = []
    for i in range(replicas):
        sim = FrogSimulation(group, gens, derive_seed(master_seed, i), horizon,
                             ball=ball, budget=budget)
        records.append(sim.run(until_targets=targets))
    return phi_from_records(records, direction, k_values, master_seed)


# ---------------------------------------------------------------------------
# Homogeneous piecewise-linear model over the rank-3 fan


class PhiModel:
    """Positively homogeneous interpolant of directional constants (rank 3).

    Values are keyed by primitive directions; the model places them on the
    cube-surface grid of the chosen resolution S (vectors with max-norm S,
    scaled from their primitive representatives by homogeneity; a missing
    vector inherits the value of its negative).  A point is evaluated by
    projecting onto the surface of the scaled cube, locating the containing
    triangle of the face's cell split, and combining the three vertex values
    with the unique conic weights.  Higher resolutions need more measured
    directions but shrink the interpolation gap between them.
    """

    def __init__(self, values: dict, resolution: int = 1):
        if resolution < 1:
            raise ValueError("resolution must be >= 1")
        s = int(resolution)
        side = 2 * s + 1
        filled = {}
        for key, val in values.items():
            k = tuple(int(c) for c in key)
            if len(k) != 3 or not any(k):
                raise ValueError(f"{k} is not a nonzero integer direction in R^3")
            if val <= 0 or not math.isfinite(val):
                raise ValueError(f"model value for {k} must be positive and finite")
            filled[k] = float(val)
        for k, val in list(filled.items()):
            filled.setdefault(tuple(-c for c in k), val)
        table = np.full(side ** 3, np.nan)
        missing = []
        for raw in np.ndindex(side, side, side):
            v = tuple(c - s for c in raw)
            if max(abs(c) for c in v) != s:
                continue
            g = 0
            for c in v:
                g = math.gcd(g, abs(c))
            p = tuple(c // g for c in v)
            if p not in filled:
                missing.append(p if next(c for c in p if c) > 0
                               else tuple(-c for c in p))
                continue
            table[self._encode(np.asarray(v)[None, :], s)[0]] = g * filled[p]
        if missing:
            raise ValueError(
                f"no value for primitive directions {sorted(set(missing))}")
        self.resolution = s
        self._table = table
        self.values = filled

    @staticmethod
    def _encode(vecs: np.ndarray, s: int) -> np.ndarray:
        side = 2 * s + 1
        return ((vecs[..., 0] + s) * side + (vecs[..., 1] + s)) * side + (vecs[..., 2] + s)

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Model values at each row of an (N, 3) float array."""
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        if pts.shape[1] != 3:
            raise ValueError("model is defined on R^3")
        n = pts.shape[0]
        s = self.resolution
        out = np.zeros(n, dtype=np.float64)
        scale = np.abs(pts).max(axis=1)
        live = scale > 0
        if not live.any():
            return out
        u = pts[live] / scale[live, None]
        j = np.argmax(np.abs(u), axis=1)
        rows = np.arange(u.shape[0])
        sigma = np.sign(u[rows, j]).astype(np.int64)
        a_ax = (j + 1) % 3
        b_ax = (j + 2) % 3
        # Face-local grid coordinates in [0, 2S]; cell index plus offset.
        ga = (u[rows, a_ax] + 1.0) * s
        gb = (u[rows, b_ax] + 1.0) * s
        ia = np.clip(np.floor(ga).astype(np.int64), 0, 2 * s - 1)
        ib = np.clip(np.floor(gb).astype(np.int64), 0, 2 * s - 1)
        fa = ga - ia
        fb = gb - ib
        upper = fa >= fb
        v00 = np.zeros((u.shape[0], 3), dtype=np.int64)
        v00[rows, j] = sigma * s
        v00[rows, a_ax] = ia - s
        v00[rows, b_ax] = ib - s
        v11 = v00.copy()
        v11[rows, a_ax] += 1
        v11[rows, b_ax] += 1
        vmid = v00.copy()
        vmid[rows, np.where(upper, a_ax, b_ax)] += 1
        w00 = np.where(upper, 1.0 - fa, 1.0 - fb)
        wmid = np.abs(fa - fb)
        w11 = np.where(upper, fb, fa)
        phi_u = (w00 * self._table[self._encode(v00, s)]
                 + wmid * self._table[self._encode(vmid, s)]
                 + w11 * self._table[self._encode(v11, s)])
        out[live] = scale[live] * phi_u / s
        return out

    @classmethod
    def from_estimates(cls, estimates: Iterable[PhiEstimate],
                       resolution: int = 1) -> "PhiModel":
        return cls({e.direction: e.estimate for e in estimates}, resolution)


class EnvelopePhi:
    """Exact activation-time field of one record, as a sandwich model.

    evaluate(x) is T(e, x) for activated x and +inf otherwise, so the
    sandwich check against the record itself at matching level has zero
    violations by construction.
    """

    def __init__(self, record: ActivationRecord):
        self.record = record
        rank = record.group.rank
        table = {}
        for coords, t in record.items():
            key = coords[:rank]
            if key not in table or t < table[key]:
                table[key] = t
        self._table = table

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=np.int64))
        out = np.full(pts.shape[0], np.inf)
        get = self._table.get
        for i, row in enumerate(map(tuple, pts.tolist())):
            t = get(row)
            if t is not None:
                out[i] = t
        return out


# ---------------------------------------------------------------------------
# Convergence series, sandwich, torsion, symmetry


@dataclass(frozen=True)
class HausdorffPair:
    """Mean rescaled-ball distance between two horizons over a record set."""

    n: int
    m: int
    mean_distance: float
    std: float
    distances: tuple[float, ...]


def shape_convergence_series(records: Sequence[ActivationRecord], n_grid,
                             metric: str = "l2") -> list[HausdorffPair]:
    """Pairwise d_H between (1/n)-rescaled activation balls over a horizon grid.

    For each record and each grid pair n < m, the record's time-n and time-m
    balls are rescaled to unit scale and compared; means run over records.
    """
    n_grid = sorted(int(n) for n in n_grid)
    if not records:
        raise ValueError("need at least one record")
    for n in n_grid:
        if n < 1:
            raise ValueError("grid horizons must be >= 1")
        if n > min(r.horizon for r in records):
            raise OutOfHorizonError(f"grid horizon {n} beyond a record's horizon")
    out = []
    for i, n in enumerate(n_grid):
        for m in n_grid[i + 1:]:
            dists = []
            for rec in records:
                a = rescale(rec.activation_ball(n), 1.0 / n, rec.group)
                b = rescale(rec.activation_ball(m), 1.0 / m, rec.group)
                dists.append(hausdorff_distance(a, b, metric))
            arr = np.asarray(dists)
            out.append(HausdorffPair(n, m, float(arr.mean()),
                                     float(arr.std(ddof=1)) if arr.size > 1 else 0.0,
                                     tuple(float(d) for d in arr)))
    return out


@dataclass(frozen=True)
class SandwichReport:
    """Violation fractions of the two-sided shape inclusion at one level."""

    level: int
    epsilon: float
    inner_total: int
    inner_violations: int
    outer_total: int
    outer_violations: int

    @property
    def inner_fraction(self) -> float:
        return self.inner_violations / self.inner_total if self.inner_total else 0.0

    @property
    def outer_fraction(self) -> float:
        return self.outer_violations / self.outer_total if self.outer_total else 0.0

    def to_record(self) -> dict:
        return {
            "quantity": "sandwich",
            "level": self.level,
            "epsilon": self.epsilon,
            "inner_total": self.inner_total,
            "inner_violations": self.inner_violations,
            "inner_fraction": self.inner_fraction,
            "outer_total": self.outer_total,
            "outer_violations": self.outer_violations,
            "outer_fraction": self.outer_fraction,
        }


def _pack_free(coords: np.ndarray, span: np.ndarray) -> np.ndarray:
    """Collision-free int64 keys for integer rows bounded by |c_j| <= span_j."""
    coords = np.atleast_2d(np.asarray(coords, dtype=np.int64))
    mult = np.ones(len(span), dtype=np.int64)
    acc = 1
    for j in range(len(span) - 1, -1, -1):
        mult[j] = acc
        acc *= int(2 * span[j] + 2)
    return ((coords + span) * mult).sum(axis=1)


def sandwich_check(record: ActivationRecord, phi_model, epsilon: float,
                   level_fraction: float = 1.0,
                   metric: WordMetric | None = None,
                   budget: MemoryBudget = DEFAULT_BUDGET) -> SandwichReport:
    """Test both inclusions of the sandwich at level n = horizon * level_fraction.

    Inner:  lattice points with model value <= n(1-eps) should be activated.
    Outer:  activated points should have model value <= n(1+eps).
    Candidate lattice points are enumerated over the word ball of radius n,
    which is exhaustive whenever the model dominates the word norm (true for
    activation-time models, since activation is at least the word norm).
    """
    group = record.group
    if group.torsion_orders:
        raise FroglabError("sandwich check expects a torsion-free record")
    if not 0 < level_fraction <= 1:
        raise ValueError("level_fraction must be in (0, 1]")
    n_eff = int(round(record.horizon * level_fraction))
    if n_eff < 1:
        raise ValueError("effective level is below 1")
    act = record.activation_ball(n_eff)
    if metric is None:
        metric = WordMetric(group, record.gens, budget)
    candidates = metric.ball_points(group.identity(), n_eff)
    span = n_eff * np.maximum(record.gens.max_coord_step, 1)
    act_codes = np.sort(_pack_free(act, span))
    inner_level = n_eff * (1.0 - epsilon)
    outer_level = n_eff * (1.0 + epsilon)
    vals = np.asarray(phi_model.evaluate(candidates.astype(np.float64)))
    in_level = vals <= inner_level
    inner_total = int(in_level.sum())
    if inner_total:
        codes = _pack_free(candidates[in_level], span)
        pos = np.searchsorted(act_codes, codes)
        pos = np.clip(pos, 0, act_codes.size - 1)
        activated = act_codes.size > 0
        member = act_codes[pos] == codes if activated else np.zeros(codes.size, bool)
        inner_violations = int((~member).sum())
    else:
        inner_violations = 0
    vals_act = np.asarray(phi_model.evaluate(act.astype(np.float64)))
    outer_violations = int((vals_act > outer_level).sum())
    return SandwichReport(n_eff, float(epsilon), inner_total, inner_violations,
                          int(act.shape[0]), outer_violations)


@dataclass(frozen=True)
class TorsionComparison:
    """Per-seed shape distance between a torsion group and its quotient."""

    horizon: int
    seeds: tuple[int, ...]
    distances: tuple[float, ...]      # raw d_H between projected balls
    mean_ratio: float                 # mean d_H divided by the horizon

    def to_record(self) -> dict:
        return {
            "quantity": "torsion_compare",
            "horizon": self.horizon,
            "seeds": list(self.seeds),
            "distances": list(self.distances),
            "mean_ratio": self.mean_ratio,
        }


def torsion_invariance_check(group: GroupSpec, gens: GeneratorSet, horizon: int,
                             seeds: Sequence[int], metric: str = "l2",
                             budget: MemoryBudget = DEFAULT_BUDGET) -> TorsionComparison:
    """Compare activation balls of a torsion group and its torsion-free quotient.

    For each seed, one realization runs on the full group and one on the
    quotient with the induced generators; the full-group ball is projected
    by dropping torsion coordinates, and the Hausdorff distance between the
    two lattice clouds is reported relative to the horizon.
    """
    if not group.torsion_orders:
        raise FroglabError("group has no torsion to compare")
    qgroup = group.quotient()
    qgens = induced_quotient_generators(gens)
    ball_full = build_ball_table(group, gens, horizon, budget)
    ball_q = build_ball_table(qgroup, qgens, horizon, budget)
    dists = []
    for seed in seeds:
        rec_full = run_frog(group, gens, horizon, seed, ball=ball_full, budget=budget)
        rec_q = run_frog(qgroup, qgens, horizon, seed, ball=ball_q, budget=budget)
        a = free_coordinates(group, rec_full.activation_ball(horizon)).astype(np.float64)
        b = rec_q.activation_ball(horizon).astype(np.float64)
        dists.append(hausdorff_distance(a, b, metric))
    arr = np.asarray(dists)
    return TorsionComparison(horizon, tuple(int(s) for s in seeds),
                             tuple(float(d) for d in arr),
                             float(arr.mean()) / horizon)


def signed_permutations(rank: int) -> list[np.ndarray]:
    """All signed coordinate-permutation matrices of the given rank."""
    from itertools import permutations, product
    out = []
    for perm in permutations(range(rank)):
        for signs in product((1, -1), repeat=rank):
            m = np.zeros((rank, rank), dtype=np.int64)
            for i, (p, s) in enumerate(zip(perm, signs)):
                m[i, p] = s
            out.append(m)
    return out


@dataclass(frozen=True)
class SymmetryReport:
    """Shape asymmetry of one record under a set of signed permutations."""

    level: int
    max_asymmetry: float
    per_matrix: tuple[float, ...]

    def to_record(self) -> dict:
        return {
            "quantity": "symmetry",
            "level": self.level,
            "max_asymmetry": self.max_asymmetry,
            "per_matrix": list(self.per_matrix),
        }


def symmetry_check(record: ActivationRecord, matrices: Sequence[np.ndarray],
                   level: int | None = None, metric: str = "l2") -> SymmetryReport:
    """Max Hausdorff distance between the activation ball and its images.

    Each matrix must leave the generator set invariant (acting on free
    coordinates, fixing torsion); otherwise the transformed ball is not
    equal in law to the original and the check is inapplicable.
    """
    group = record.group
    rank = group.rank
    gm = record.gens.matrix
    gen_set = {tuple(int(v) for v in row) for row in gm.tolist()}
    for m in matrices:
        m = np.asarray(m, dtype=np.int64)
        if m.shape != (rank, rank):
            raise InapplicableSymmetryError("matrix rank does not match the group")
        moved = gm.copy()
        moved[:, :rank] = gm[:, :rank] @ m.T
        moved_set = {tuple(int(v) for v in row) for row in moved.tolist()}
        if moved_set != gen_set:
            raise InapplicableSymmetryError(
                "generator set is not invariant under a supplied permutation")
    if level is None:
        level = record.horizon
    base = free_coordinates(group, record.activation_ball(level)).astype(np.float64)
    dists = []
    for m in matrices:
        img = base @ np.asarray(m, dtype=np.float64).T
        dists.append(hausdorff_distance(base, img, metric))
    arr = np.asarray(dists)
    return SymmetryReport(int(level), float(arr.max()),
                          tuple(float(d) for d in arr))
