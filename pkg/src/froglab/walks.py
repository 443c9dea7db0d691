"""Random-walk engine: exact kernels by dynamic programming, plus Monte Carlo.

The exact side evolves the full step distribution of a symmetric random walk
on a dense coordinate box.  Probabilities at time n come out of a
half-length sweep through the doubling identity

    p_i(e, z) = sum_w p_t(e, w) p_{i-t}(w, z),   t = floor(i/2),

so only times up to ceil(n/2) are ever materialised; the diagonal sequence is
the lag-zero case.  Hitting probabilities use the same evolution with an
absorbing cell.  The Monte Carlo side draws walk increments from
counter-based streams, one stream per walker or per lattice site, so every
estimate is reproducible from (seed, stream id, step index) alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import zeta as hurwitz_zeta

from .errors import BudgetExceededError, GroupMismatchError
from .groups import (
    DEFAULT_BUDGET,
    BoxIndex,
    GeneratorSet,
    GroupElement,
    GroupSpec,
    MemoryBudget,
    WordMetric,
    _ball_box,
)
from .rng import encode_sites, step_indices, stream_bases

INFINITY = math.inf

_CHUNK_TARGET_BYTES = 128 * 1024 * 1024


# ---------------------------------------------------------------------------
# Per-site streams and single trajectories


@dataclass(frozen=True)
class SiteRandomness:
    """The step stream owned by one lattice site.

    The i-th step (i >= 1) is a pure function of (master_seed, site, i); all
    sites share nothing, realising an independent product of per-site step
    sequences.
    """

    gens: GeneratorSet
    master_seed: int
    site: GroupElement
    _base: np.uint64 = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.site.group != self.gens.group:
            raise GroupMismatchError("site does not belong to the generator set's group")
        coords = np.asarray(self.site.coords, dtype=np.int64)[None, :]
        base = stream_bases(self.master_seed, encode_sites(coords))[0]
        object.__setattr__(self, "_base", base)

    def step_index(self, local_time: int) -> int:
        """Index into the generator list for the step at the given local time."""
        if local_time < 1:
            raise ValueError("local time starts at 1")
        t = np.asarray([local_time], dtype=np.int64)
        return int(step_indices(np.asarray([self._base]), t, len(self.gens))[0])

    def step_indices_range(self, t_lo: int, t_hi: int) -> np.ndarray:
        """Generator indices for local times t_lo..t_hi inclusive."""
        if t_lo < 1:
            raise ValueError("local time starts at 1")
        times = np.arange(t_lo, t_hi + 1, dtype=np.int64)
        return step_indices(np.asarray([self._base])[:, None], times[None, :],
                            len(self.gens))[0]

    def step_element(self, local_time: int) -> GroupElement:
        return self.gens.elements[self.step_index(local_time)]


def walk_step(position: GroupElement, site_rng: SiteRandomness,
              local_time: int) -> GroupElement:
    """One step of the walk driven by the site's stream at the given time."""
    return position + site_rng.step_element(local_time)


@dataclass(frozen=True)
class WalkTrajectory:
    """A walk path: positions[0] is the origin, increments lie in the generator set."""

    origin: GroupElement
    positions: tuple[GroupElement, ...]

    def __len__(self):
        return len(self.positions)

    @property
    def coords(self) -> np.ndarray:
        return np.asarray([p.coords for p in self.positions], dtype=np.int64)


def simulate_walk(origin: GroupElement, n_steps: int,
                  site_rng: SiteRandomness) -> WalkTrajectory:
    """Walk of n_steps steps from origin, driven by the site's stream."""
    if n_steps < 0:
        raise ValueError("n_steps must be non-negative")
    group = origin.group
    if group != site_rng.gens.group:
        raise GroupMismatchError("origin does not belong to the stream's group")
    positions = [origin]
    if n_steps:
        idx = site_rng.step_indices_range(1, n_steps)
        inc = site_rng.gens.matrix[idx]
        pos = np.cumsum(inc, axis=0) + np.asarray(origin.coords, dtype=np.int64)
        group.reduce_torsion_columns(pos)
        positions.extend(group.from_coords(row) for row in pos.tolist())
    return WalkTrajectory(origin, tuple(positions))


def hitting_time(x: GroupElement, y: GroupElement, horizon: int,
                 site_rng: SiteRandomness) -> float:
    """First time the walk from x sits at y, or inf when censored at horizon.

    Time 0 counts: hitting_time(x, x, ...) is 0.
    """
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    if x == y:
        return 0
    group = x.group
    if horizon == 0:
        return INFINITY
    idx = site_rng.step_indices_range(1, horizon)
    inc = site_rng.gens.matrix[idx]
    pos = np.cumsum(inc, axis=0) + np.asarray(x.coords, dtype=np.int64)
    group.reduce_torsion_columns(pos)
    tgt = np.asarray(y.coords, dtype=np.int64)
    hit = (pos == tgt).all(axis=1)
    if not hit.any():
        return INFINITY
    return int(np.argmax(hit)) + 1


def exit_time(x: GroupElement, r: int, horizon: int, site_rng: SiteRandomness,
              metric: WordMetric | None = None) -> float:
    """First time the walk from x is at word distance > r from x; inf if censored."""
    if r < 0:
        raise ValueError("radius must be non-negative")
    if horizon <= 0:
        return INFINITY
    group = x.group
    gens = site_rng.gens
    if metric is None:
        metric = WordMetric(group, gens)
    table = metric.ensure_radius(r + 1)
    idx = site_rng.step_indices_range(1, horizon)
    inc = site_rng.gens.matrix[idx]
    disp = np.cumsum(inc, axis=0)
    group.reduce_torsion_columns(disp)
    norms = table.norm_lookup(disp)
    norms[norms < 0] = table.radius + 1
    out = norms > r
    if not out.any():
        return INFINITY
    return int(np.argmax(out)) + 1


def range_size(trajectory: WalkTrajectory) -> int:
    """Number of distinct sites the trajectory visits."""
    return len(set(p.coords for p in trajectory.positions))


# ---------------------------------------------------------------------------
# Batched sampling core


def walker_stream_bases(master_seed: int, n_walks: int, offset: int = 0) -> np.ndarray:
    """One independent stream base per walker index."""
    ids = np.arange(offset, offset + n_walks, dtype=np.int64)[:, None]
    return stream_bases(master_seed, encode_sites(ids))


def _chunk_size(n_steps: int, ncoords: int, n_walks: int) -> int:
    per_walk = max(1, n_steps) * (8 + 6 * ncoords)
    return max(1, min(n_walks, _CHUNK_TARGET_BYTES // per_walk))


def _iter_position_chunks(group, gens, master_seed, n_walks, n_steps):
    """Yield (start_index, positions) with positions of shape (b, n_steps, K).

    Positions are after steps 1..n_steps; the shared origin row is omitted.
    """
    gm = gens.matrix.astype(np.int16)
    times = np.arange(1, n_steps + 1, dtype=np.int64)
    chunk = _chunk_size(n_steps, group.ncoords, n_walks)
    done = 0
    while done < n_walks:
        b = min(chunk, n_walks - done)
        bases = walker_stream_bases(master_seed, b, offset=done)
        idx = step_indices(bases[:, None], times[None, :], len(gens))
        inc = gm[idx]
        pos = np.cumsum(inc, axis=1, dtype=np.int64)
        group.reduce_torsion_columns(pos)
        yield done, pos
        done += b


def sample_positions(group, gens, master_seed, n_walks, n_steps) -> np.ndarray:
    """(n_walks, n_steps + 1, K) positions including the origin row.

    Materialises everything; intended for small batches and debugging.
    """
    out = np.zeros((n_walks, n_steps + 1, group.ncoords), dtype=np.int64)
    for start, pos in _iter_position_chunks(group, gens, master_seed, n_walks, n_steps):
        out[start: start + pos.shape[0], 1:] = pos
    return out


# ---------------------------------------------------------------------------
# Estimator records


@dataclass(frozen=True)
class WalkStats:
    """Point estimate bundle for one walk quantity, ready to serialize."""

    quantity: str                      # heat_kernel | green | hit_prob | exit_tail | range
    estimate: tuple[float, ...]
    std_error: tuple[float, ...]
    replicas: int
    master_seed: int
    params: dict

    def __post_init__(self):
        if self.replicas <= 0:
            raise ValueError("replicas must be positive")
        for se in self.std_error:
            if not math.isfinite(se):
                raise ValueError("standard errors must be finite")

    def to_record(self) -> dict:
        return {
            "quantity": self.quantity,
            "params": self.params,
            "estimate": list(self.estimate),
            "stderr": list(self.std_error),
            "replicas": self.replicas,
            "master_seed": self.master_seed,
        }


def _binomial_se(p: float, n: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / n)


# ---------------------------------------------------------------------------
# Monte Carlo estimators


@dataclass(frozen=True)
class EndpointDistribution:
    """Empirical endpoint counts of walks of a fixed length, on a dense box."""

    box: BoxIndex
    counts: np.ndarray        # (box.size,) int64
    n_walks: int
    time: int

    def frequency(self, coords) -> float:
        codes = self.box.ravel(np.atleast_2d(np.asarray(coords, dtype=np.int64)))
        return float(self.counts[codes[0]]) / self.n_walks


def endpoint_distribution_mc(group, gens, master_seed, n_walks, time) -> EndpointDistribution:
    """Sampled endpoint distribution at a fixed time, aligned to the exact box."""
    box = _ball_box(group, gens, time)
    counts = np.zeros(box.size, dtype=np.int64)
    gm = gens.matrix.astype(np.int16)
    times = np.arange(1, time + 1, dtype=np.int64)
    chunk = _chunk_size(time, group.ncoords, n_walks)
    done = 0
    while done < n_walks:
        b = min(chunk, n_walks - done)
        bases = walker_stream_bases(master_seed, b, offset=done)
        idx = step_indices(bases[:, None], times[None, :], len(gens))
        end = gm[idx].sum(axis=1, dtype=np.int64)
        group.reduce_torsion_columns(end)
        counts += np.bincount(box.ravel(end), minlength=box.size)
        done += b
    return EndpointDistribution(box, counts, n_walks, time)


def return_probability_mc(group, gens, master_seed, n_walks, time) -> WalkStats:
    """Monte Carlo estimate of p_time(e, e)."""
    dist = endpoint_distribution_mc(group, gens, master_seed, n_walks, time)
    p = dist.frequency(np.zeros(group.ncoords, dtype=np.int64))
    return WalkStats("heat_kernel", (p,), (_binomial_se(p, n_walks),),
                     n_walks, master_seed, {"n": time, "target": [0] * group.ncoords})


@dataclass(frozen=True)
class HitEstimate:
    """Monte Carlo estimate of P(walk visits target within the horizon)."""

    target: tuple[int, ...]
    horizon: int
    n_walks: int
    n_hits: int
    master_seed: int

    @property
    def prob(self) -> float:
        return self.n_hits / self.n_walks

    @property
    def std_error(self) -> float:
        return _binomial_se(self.prob, self.n_walks)

    def as_walk_stats(self) -> WalkStats:
        return WalkStats("hit_prob", (self.prob,), (self.std_error,),
                         self.n_walks, self.master_seed,
                         {"n": self.horizon, "target": list(self.target)})


def hit_probability_mc(group, gens, master_seed, target, horizon, n_walks) -> HitEstimate:
    """Fraction of walks from the identity that visit target by the horizon.

    A visit at step 0 does not count, so with target equal to the identity
    this estimates the return probability within the horizon.  For a walk
    from x to y, pass target = y - x; the law only depends on the difference.
    """
    tgt = np.asarray(group.from_coords([int(v) for v in target]).coords, dtype=np.int64)
    hits = 0
    for _, pos in _iter_position_chunks(group, gens, master_seed, n_walks, horizon):
        hits += int((pos == tgt).all(axis=2).any(axis=1).sum())
    return HitEstimate(tuple(int(v) for v in tgt), horizon, n_walks, hits, master_seed)


@dataclass(frozen=True)
class ExitTailResult:
    """P(max word norm along the walk exceeds r within the horizon), per radius."""

    radii: tuple[int, ...]
    horizon: int
    n_walks: int
    counts: tuple[int, ...]
    master_seed: int

    @property
    def probs(self) -> np.ndarray:
        return np.asarray(self.counts, dtype=np.float64) / self.n_walks

    def as_walk_stats(self) -> WalkStats:
        probs = self.probs
        return WalkStats("exit_tail", tuple(float(p) for p in probs),
                         tuple(_binomial_se(float(p), self.n_walks) for p in probs),
                         self.n_walks, self.master_seed,
                         {"n": self.horizon, "radii": list(self.radii)})


def exit_tail_mc(group, gens, master_seed, radii, horizon, n_walks,
                 metric: WordMetric | None = None) -> ExitTailResult:
    """Tail of the exit time from word-metric balls around the start.

    The exit time from radius r is the first step at which the walk's word
    norm exceeds r; one batch of walks serves every requested radius because
    only the running maximum of the norm matters.
    """
    radii = tuple(sorted(int(r) for r in radii))
    if metric is None:
        metric = WordMetric(group, gens)
    table = metric.ensure_radius(max(radii) + 1)
    counts = np.zeros(len(radii), dtype=np.int64)
    for _, pos in _iter_position_chunks(group, gens, master_seed, n_walks, horizon):
        b, n, k = pos.shape
        norms = table.norm_lookup(pos.reshape(b * n, k))
        # -1 marks "beyond the cached radius", which exceeds every radius here.
        norms[norms < 0] = table.radius + 1
        peak = norms.reshape(b, n).max(axis=1)
        for i, r in enumerate(radii):
            counts[i] += int((peak > r).sum())
    return ExitTailResult(radii, horizon, n_walks, tuple(int(c) for c in counts),
                          master_seed)


@dataclass(frozen=True)
class RangeRatio:
    """Distinct sites visited in n steps, as a fraction of n, across walks."""

    n_steps: int
    n_walks: int
    mean: float
    std: float
    master_seed: int

    @property
    def std_error(self) -> float:
        return self.std / math.sqrt(self.n_walks)

    def as_walk_stats(self) -> WalkStats:
        return WalkStats("range", (self.mean,), (self.std_error,),
                         self.n_walks, self.master_seed, {"n": self.n_steps})


def range_ratio_mc(group, gens, master_seed, n_steps, n_walks) -> RangeRatio:
    """Mean of |{X_0, ..., X_n}| / n over independent walks."""
    k = group.ncoords
    # Pack coordinates into int64 keys when the bit budget allows.
    extents = []
    for j in range(group.rank):
        w = max(int(np.abs(gens.matrix[:, j]).max()), 1)
        extents.append(2 * n_steps * w + 1)
    extents.extend(group.torsion_orders)
    bits = [max(1, int(v - 1).bit_length()) for v in extents]
    if sum(bits) > 63:
        raise BudgetExceededError("coordinate packing exceeds 63 bits; reduce n_steps")
    lo = np.asarray(
        [-n_steps * max(int(np.abs(gens.matrix[:, j]).max()), 1) for j in range(group.rank)]
        + [0] * len(group.torsion_orders), dtype=np.int64)
    mult = np.ones(k, dtype=np.int64)
    acc = 1
    for j in range(k - 1, -1, -1):
        mult[j] = acc
        acc <<= bits[j]
    ratios = []
    for _, pos in _iter_position_chunks(group, gens, master_seed, n_walks, n_steps):
        b = pos.shape[0]
        full = np.concatenate([np.zeros((b, 1, k), dtype=np.int64), pos], axis=1)
        codes = ((full - lo) * mult).sum(axis=2)
        codes.sort(axis=1)
        distinct = 1 + (np.diff(codes, axis=1) > 0).sum(axis=1)
        ratios.append(distinct / n_steps)
    ratios = np.concatenate(ratios)
    return RangeRatio(n_steps, n_walks, float(ratios.mean()),
                      float(ratios.std(ddof=1)), master_seed)


# ---------------------------------------------------------------------------
# Structure checks and fits


def bipartite_character(gens: GeneratorSet) -> np.ndarray | None:
    """Mod-2 form u with (-1)^(u . x) = -1 on every generator, or None.

    Such a form exists exactly when the Cayley graph is bipartite.  The
    returned vector has one entry per group coordinate; entries on odd-order
    torsion coordinates are always 0 because those factors admit no
    nontrivial {+1, -1} character.
    """
    g = gens.group
    cols = list(range(g.rank))
    cols += [g.rank + j for j, m in enumerate(g.torsion_orders) if m % 2 == 0]
    rows = np.remainder(gens.matrix[:, cols], 2).astype(np.int8)
    rhs = np.ones(len(gens), dtype=np.int8)
    aug = np.concatenate([rows, rhs[:, None]], axis=1)
    nrow, ncol = aug.shape
    pivots = []
    r = 0
    for c in range(ncol - 1):
        piv = None
        for i in range(r, nrow):
            if aug[i, c]:
                piv = i
                break
        if piv is None:
            continue
        aug[[r, piv]] = aug[[piv, r]]
        for i in range(nrow):
            if i != r and aug[i, c]:
                aug[i] ^= aug[r]
        pivots.append(c)
        r += 1
        if r == nrow:
            break
    bad = np.logical_and(aug[:, :-1].sum(axis=1) == 0, aug[:, -1] == 1)
    if bool(bad.any()):
        return None
    solution = np.zeros(len(cols), dtype=np.int8)
    for row_i, c in enumerate(pivots):
        solution[c] = aug[row_i, -1]
    full = np.zeros(g.ncoords, dtype=np.int8)
    full[cols] = solution
    return full


def is_bipartite(gens: GeneratorSet) -> bool:
    """Whether the Cayley graph is bipartite."""
    return bipartite_character(gens) is not None


def parity_class(gens: GeneratorSet, coords) -> int | None:
    """0 or 1: which step parities can reach coords; None if both parities can."""
    char = bipartite_character(gens)
    if char is None:
        return None
    c = np.asarray(gens.group.from_coords([int(v) for v in coords]).coords, dtype=np.int64)
    return int((c * char).sum() % 2)


@dataclass(frozen=True)
class PowerLawFit:
    """Least-squares fit of log y against log x."""

    slope: float
    intercept: float
    r_squared: float
    n_points: int


def power_law_fit(xs: Sequence[float], ys: Sequence[float]) -> PowerLawFit:
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.shape != ys.shape or xs.size < 2:
        raise ValueError("need at least two matching points")
    if (xs <= 0).any() or (ys <= 0).any():
        raise ValueError("power-law fit requires positive data")
    lx, ly = np.log(xs), np.log(ys)
    slope, intercept = np.polyfit(lx, ly, 1)
    pred = slope * lx + intercept
    ss_res = float(((ly - pred) ** 2).sum())
    ss_tot = float(((ly - ly.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return PowerLawFit(float(slope), float(intercept), float(r2), int(xs.size))


@dataclass(frozen=True)
class LinearFit:
    """Least-squares fit of y against x."""

    slope: float
    intercept: float
    r_squared: float
    n_points: int


def linear_fit(xs: Sequence[float], ys: Sequence[float]) -> LinearFit:
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.shape != ys.shape or xs.size < 2:
        raise ValueError("need at least two matching points")
    slope, intercept = np.polyfit(xs, ys, 1)
    pred = slope * xs + intercept
    ss_res = float(((ys - pred) ** 2).sum())
    ss_tot = float(((ys - ys.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return LinearFit(float(slope), float(intercept), float(r2), int(xs.size))


# ---------------------------------------------------------------------------
# Exact kernels


@dataclass(frozen=True)
class KernelArray:
    """Exact step-n distribution of the walk from the identity, on a box."""

    box: BoxIndex
    array: np.ndarray
    time: int

    def value(self, coords) -> float:
        c = np.atleast_2d(np.asarray(coords, dtype=np.int64))
        if not bool(self.box.contains(c)[0]):
            return 0.0
        return float(self.array.reshape(-1)[self.box.ravel(c)[0]])

    @property
    def total_mass(self) -> float:
        return float(self.array.sum())


@dataclass(frozen=True)
class GreenEstimate:
    """Green function value: exact partial sum plus a modelled tail.

    The tail model fits p_i * i^(rank/2) = A + B/i on a trailing window of
    the exact sequence, then sums the model beyond the horizon with Hurwitz
    zeta functions, restricted to the parity class that actually carries
    mass.
    """

    horizon: int
    partial_sum: float
    tail: float
    coeff_main: float
    coeff_correction: float
    window: tuple[int, int]
    parity: int | None

    @property
    def value(self) -> float:
        return self.partial_sum + self.tail


class HeatKernel:
    """Exact distribution dynamics for one walk law on one group.

    Sequence results are cached per target; a cache for a longer horizon
    answers any shorter query.  Build caches single-threaded, then share
    freely: queries never mutate.
    """

    def __init__(self, group: GroupSpec, gens: GeneratorSet,
                 budget: MemoryBudget = DEFAULT_BUDGET, dtype=np.float64):
        if gens.group != group:
            raise GroupMismatchError("generator set belongs to a different group")
        self.group = group
        self.gens = gens
        self.budget = budget
        self.dtype = np.dtype(dtype)
        self._rank = group.rank
        self._maxstep = np.maximum(gens.max_coord_step, 1).astype(np.int64)
        self._seq_cache: dict[tuple[int, ...], np.ndarray] = {}

    # -- box / slab helpers

    def _box(self, radius: int) -> BoxIndex:
        box = _ball_box(self.group, self.gens, radius)
        if box.size > self.budget.max_box_cells:
            raise BudgetExceededError(
                f"kernel box needs {box.size} cells, budget is {self.budget.max_box_cells}"
            )
        return box

    def _center(self, box: BoxIndex) -> tuple[int, ...]:
        return tuple(-lo for lo in box.lo[: self._rank])

    def _extent(self, box: BoxIndex, t: int) -> tuple[slice, ...]:
        c = self._center(box)
        w = self._maxstep
        free = tuple(
            slice(c[j] - t * int(w[j]), c[j] + t * int(w[j]) + 1) for j in range(self._rank)
        )
        return free + (slice(None),) * len(self.group.torsion_orders)

    def _initial(self, box: BoxIndex) -> np.ndarray:
        a = np.zeros(box.shape, dtype=self.dtype)
        origin = np.zeros((1, self.group.ncoords), dtype=np.int64)
        a.reshape(-1)[box.ravel(origin)[0]] = 1.0
        return a

    def _step(self, box: BoxIndex, src: np.ndarray, dst: np.ndarray, t: int) -> None:
        """dst <- one-step evolution of src, where src is supported on extent t."""
        d = self._rank
        c = self._center(box)
        w = self._maxstep
        dst[self._extent(box, t + 1)] = 0.0
        src_view = src[self._extent(box, t)]
        for row in self.gens.matrix:
            block = src_view
            for ax, m in enumerate(self.group.torsion_orders):
                shift = int(row[d + ax]) % m
                if shift:
                    block = np.roll(block, shift, axis=d + ax)
            dest = tuple(
                slice(c[j] - t * int(w[j]) + int(row[j]),
                      c[j] + t * int(w[j]) + 1 + int(row[j]))
                for j in range(d)
            ) + (slice(None),) * len(self.group.torsion_orders)
            dst[dest] += block
        dst[self._extent(box, t + 1)] *= self.dtype.type(1.0 / len(self.gens))

    def _lag_dot(self, box: BoxIndex, a: np.ndarray, b: np.ndarray,
                 t_a: int, t_b: int, z: np.ndarray) -> float:
        """sum_w a[w] * b[z - w] over the supports (extent t_a and t_b)."""
        d = self._rank
        c = self._center(box)
        w = self._maxstep
        # Overlap of the two supports, per free axis: a lives on extent t_a,
        # the mirrored-and-shifted b on [z - t_b*w, z + t_b*w].
        a_slices = []
        b_slices = []
        for j in range(d):
            za = int(z[j])
            lo = max(c[j] - t_a * int(w[j]), c[j] - t_b * int(w[j]) + za)
            hi = min(c[j] + t_a * int(w[j]), c[j] + t_b * int(w[j]) + za)
            if lo > hi:
                return 0.0
            a_slices.append(slice(lo, hi + 1))
            # The flip sends index i to 2c - i, so b[z - u] sits at mirrored
            # index u - z.
            b_slices.append(slice(lo - za, hi + 1 - za))
        bm = b
        if d:
            bm = np.flip(bm, axis=tuple(range(d)))
        for ax, m in enumerate(self.group.torsion_orders):
            idx = (int(z[d + ax]) - np.arange(m)) % m
            bm = np.take(bm, idx, axis=d + ax)
        tors = (slice(None),) * len(self.group.torsion_orders)
        av = a[tuple(a_slices) + tors]
        bv = bm[tuple(b_slices) + tors]
        if av.ndim == 0:
            return float(av * bv)
        if av.shape[0] == 0:
            return 0.0
        total = 0.0
        for i in range(av.shape[0]):
            total += float((av[i] * bv[i]).sum(dtype=np.float64))
        return total

    # -- exact quantities

    def kernel_array(self, n: int) -> KernelArray:
        """Full distribution at time n; box scales with n, so keep n modest."""
        if n < 0:
            raise ValueError("time must be non-negative")
        box = self._box(n)
        a = self._initial(box)
        b = np.zeros_like(a)
        for t in range(n):
            self._step(box, a, b, t)
            a, b = b, a
        return KernelArray(box, a, n)

    def pair_sequence(self, target, n: int) -> np.ndarray:
        """p_i(e, target) for i = 0..n, from a sweep to ceil(n/2)."""
        if n < 0:
            raise ValueError("time must be non-negative")
        z = np.asarray(self.group.from_coords([int(v) for v in target]).coords,
                       dtype=np.int64)
        key = tuple(int(v) for v in z)
        cached = self._seq_cache.get(key)
        if cached is not None and cached.size > n:
            return cached[: n + 1].copy()
        m = (n + 1) // 2
        box = self._box(m)
        a = self._initial(box)
        b = np.zeros_like(a)
        p = np.zeros(n + 1, dtype=np.float64)
        for t in range(m):
            if 2 * t <= n:
                p[2 * t] = self._lag_dot(box, a, a, t, t, z)
            self._step(box, a, b, t)
            if 2 * t + 1 <= n:
                p[2 * t + 1] = self._lag_dot(box, a, b, t, t + 1, z)
            a, b = b, a
        if 2 * m <= n:
            p[2 * m] = self._lag_dot(box, a, a, m, m, z)
        self._seq_cache[key] = p.copy()
        return p

    def diagonal_sequence(self, n: int) -> np.ndarray:
        """p_i(e, e) for i = 0..n."""
        return self.pair_sequence((0,) * self.group.ncoords, n)

    def probability(self, x, y, n: int) -> float:
        """p_n(x, y), exactly; depends only on y - x by translation invariance."""
        gx = x if isinstance(x, GroupElement) else self.group.from_coords(x)
        gy = y if isinstance(y, GroupElement) else self.group.from_coords(y)
        z = gy - gx
        return float(self.pair_sequence(z.coords, n)[n])

    def return_probability(self, n: int) -> float:
        """p_n(e, e)."""
        return float(self.diagonal_sequence(n)[n])

    def green_function(self, x, y, n: int) -> float:
        """G_n(x, y) = sum of p_i(x, y) for i <= n, exactly."""
        gx = x if isinstance(x, GroupElement) else self.group.from_coords(x)
        gy = y if isinstance(y, GroupElement) else self.group.from_coords(y)
        z = gy - gx
        return float(self.pair_sequence(z.coords, n).sum())

    def green_partial(self, n: int) -> float:
        """G_n(e, e)."""
        return float(self.diagonal_sequence(n).sum())

    def green_estimate(self, n: int, target=None,
                       window: tuple[int, int] | None = None) -> GreenEstimate:
        """Green function with a zeta-summed polynomial tail beyond horizon n."""
        rank = self._rank
        if rank < 3:
            raise ValueError("green function diverges for free rank below 3")
        if target is None:
            target = (0,) * self.group.ncoords
        p = self.pair_sequence(target, n)
        parity = parity_class(self.gens, target)
        if window is None:
            window = (max(4, n // 2), n)
        lo, hi = window
        idx = np.arange(lo, hi + 1)
        if parity is not None:
            idx = idx[idx % 2 == parity]
        vals = p[idx]
        if (vals <= 0).any():
            raise ValueError("tail window contains non-positive probabilities")
        s = rank / 2.0
        x = idx.astype(np.float64)
        y = vals * x ** s
        design = np.stack([np.ones_like(x), 1.0 / x], axis=1)
        (a_coef, b_coef), *_ = np.linalg.lstsq(design, y, rcond=None)

        def parity_tail(expo: float) -> float:
            if parity is None:
                return float(hurwitz_zeta(expo, n + 1))
            # First index beyond the horizon in the right parity class.
            i0 = n + 1 if (n + 1) % 2 == parity else n + 2
            return 2.0 ** (-expo) * float(hurwitz_zeta(expo, i0 / 2.0))

        tail = float(a_coef) * parity_tail(s) + float(b_coef) * parity_tail(s + 1.0)
        return GreenEstimate(n, float(p.sum()), tail, float(a_coef), float(b_coef),
                             (lo, hi), parity)

    def hitting_probability_dp(self, target, horizon: int) -> float:
        """P(walk from e visits target within the horizon), exactly.

        The target cell absorbs from step 1 on, so a target equal to the
        identity gives the return probability within the horizon.
        """
        tgt = np.asarray(self.group.from_coords([int(v) for v in target]).coords,
                         dtype=np.int64)[None, :]
        box = self._box(horizon)
        if not bool(box.contains(tgt)[0]):
            return 0.0
        code = int(box.ravel(tgt)[0])
        a = self._initial(box)
        b = np.zeros_like(a)
        absorbed = 0.0
        for t in range(horizon):
            self._step(box, a, b, t)
            flat = b.reshape(-1)
            absorbed += float(flat[code])
            flat[code] = 0.0
            a, b = b, a
        return absorbed

    def heat_kernel_scaling(self, n_values: Sequence[int]) -> PowerLawFit:
        """Power-law fit of the exact return probabilities at the given times.

        Callers choose parity-consistent times on bipartite graphs; mixing
        parities raises because half the values vanish.
        """
        ns = sorted(int(n) for n in n_values)
        p = self.diagonal_sequence(max(ns))
        return power_law_fit(ns, p[ns])
