"""Frog-model dynamics: one sleeping frog per site, activation by visit.

The process runs in discrete synchronous time.  Every active frog advances
one step per tick using the step stream owned by its ORIGIN site, then any
sleeping site occupied by at least one active frog wakes, with set
semantics for simultaneous arrivals.  A frog activated at global time n
sits at its origin at time n and takes its first step at time n+1.

Truncation is exact rather than approximate: an activation time is at least
the word norm of the site, so no frog outside the radius-`horizon` word ball
can wake by time `horizon`.  Sleeping frogs therefore live only on that
ball, while active frogs may wander anywhere.  Because step streams are
keyed by (master_seed, origin site, local time), two runs with different
horizons share every trajectory bit-for-bit, and a run started from a
different origin reuses the same site streams — which is what makes
pathwise subadditivity checks possible.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import FroglabError, GroupMismatchError, OutOfHorizonError
from .groups import (
    DEFAULT_BUDGET,
    BallTable,
    GeneratorSet,
    GroupElement,
    GroupSpec,
    MemoryBudget,
    build_ball_table,
    generator_set,
)
from .rng import encode_sites, step_indices, stream_bases

_FORMAT_VERSION = 1


@dataclass(frozen=True)
class FrogState:
    """Snapshot of one active frog."""

    origin: GroupElement
    position: GroupElement
    local_clock: int
    activation_time: int


class ActivationRecord:
    """Activation times of one realization, canonically ordered.

    Rows are sorted by (activation time, coordinates), so records from runs
    that share a seed agree on any common horizon prefix byte-for-byte.
    """

    def __init__(self, group: GroupSpec, gens: GeneratorSet, horizon: int,
                 master_seed: int, origin: GroupElement,
                 elements: np.ndarray, times: np.ndarray):
        order = np.lexsort(tuple(elements[:, j] for j in range(elements.shape[1] - 1, -1, -1))
                           + (times,))
        self.group = group
        self.gens = gens
        self.horizon = int(horizon)
        self.master_seed = int(master_seed)
        self.origin = origin
        self.elements = np.ascontiguousarray(elements[order], dtype=np.int64)
        self.times = np.ascontiguousarray(times[order], dtype=np.int64)
        self._lookup: dict[tuple[int, ...], int] | None = None

    def __len__(self) -> int:
        return self.elements.shape[0]

    def _table(self) -> dict[tuple[int, ...], int]:
        if self._lookup is None:
            self._lookup = {
                tuple(int(v) for v in row): int(t)
                for row, t in zip(self.elements, self.times)
            }
        return self._lookup

    def activation_time(self, x) -> int | None:
        """T(origin, x), or None when x never woke within the horizon."""
        if isinstance(x, GroupElement):
            x = x.coords
        return self._table().get(tuple(int(v) for v in x))

    def activation_ball(self, n: int) -> np.ndarray:
        """Coordinates of all sites with activation time <= n, record order."""
        if n > self.horizon:
            raise OutOfHorizonError(f"queried time {n} beyond horizon {self.horizon}")
        return self.elements[self.times <= n]

    def activation_ball_elements(self, n: int) -> list[GroupElement]:
        return [self.group.from_coords(row) for row in self.activation_ball(n).tolist()]

    def items(self):
        for row, t in zip(self.elements.tolist(), self.times.tolist()):
            yield tuple(row), int(t)

    # -- serialization

    def _header(self) -> dict:
        return {
            "format_version": _FORMAT_VERSION,
            "rank": self.group.rank,
            "torsion_orders": list(self.group.torsion_orders),
            "generators": self.gens.matrix.tolist(),
            "horizon": self.horizon,
            "master_seed": self.master_seed,
            "origin": list(self.origin.coords),
        }

    def to_npz(self, path) -> None:
        header = json.dumps(self._header(), sort_keys=True)
        np.savez_compressed(path, header=np.frombuffer(header.encode(), dtype=np.uint8),
                            elements=self.elements, times=self.times)

    @classmethod
    def from_npz(cls, path) -> "ActivationRecord":
        with np.load(path) as data:
            header = json.loads(bytes(data["header"]).decode())
            elements = np.asarray(data["elements"], dtype=np.int64)
            times = np.asarray(data["times"], dtype=np.int64)
        return cls._from_header(header, elements, times)

    def to_jsonl(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(json.dumps({"header": self._header()}, sort_keys=True) + "\n")
            for coords, t in self.items():
                fh.write(json.dumps({"x": list(coords), "t": t}) + "\n")

    @classmethod
    def from_jsonl(cls, path) -> "ActivationRecord":
        with open(path) as fh:
            header = json.loads(fh.readline())["header"]
            rows = []
            times = []
            for line in fh:
                if not line.strip():
                    continue
                rec = json.loads(line)
                rows.append(rec["x"])
                times.append(rec["t"])
        elements = np.asarray(rows, dtype=np.int64).reshape(len(rows), -1)
        return cls._from_header(header, elements, np.asarray(times, dtype=np.int64))

    @classmethod
    def _from_header(cls, header, elements, times) -> "ActivationRecord":
        if header.get("format_version") != _FORMAT_VERSION:
            raise FroglabError(f"unknown record format version {header.get('format_version')}")
        group = GroupSpec(header["rank"], tuple(header["torsion_orders"]))
        gens = generator_set(group, header["generators"])
        origin = group.from_coords(header["origin"])
        return cls(group, gens, header["horizon"], header["master_seed"],
                   origin, elements, times)


def activation_ball(record: ActivationRecord, n: int) -> np.ndarray:
    """Coordinates with activation time <= n (module-level convenience)."""
    return record.activation_ball(n)


class FrogSimulation:
    """Mutable state of one frog-model realization.

    The origin's frog is active at time 0; every other site of
    B(origin, horizon) sleeps.  `step_system` advances one tick; `run`
    drives to the horizon (optionally stopping early once given targets
    are all awake, which cannot change any recorded value).
    """

    _GROW = 1024

    def __init__(self, group: GroupSpec, gens: GeneratorSet, master_seed: int,
                 horizon: int, origin: GroupElement | None = None,
                 ball: BallTable | None = None,
                 budget: MemoryBudget = DEFAULT_BUDGET):
        if horizon < 0:
            raise ValueError("horizon must be non-negative")
        if gens.group != group:
            raise GroupMismatchError("generator set belongs to a different group")
        if origin is None:
            origin = group.identity()
        if origin.group != group:
            raise GroupMismatchError("origin belongs to a different group")
        if ball is None:
            ball = build_ball_table(group, gens, horizon, budget)
        elif ball.radius < horizon and not ball.exhausted:
            raise ValueError("shared ball table is smaller than the horizon")
        self.group = group
        self.gens = gens
        self.master_seed = int(master_seed)
        self.horizon = int(horizon)
        self.origin = origin
        self.ball = ball
        self.global_time = 0
        self._gm = gens.matrix
        self._origin_coords = np.asarray(origin.coords, dtype=np.int64)
        m = ball.ball_size(horizon)
        self._n_sites = m
        # Activation bookkeeping over the sleeping ball, indexed in BFS order.
        self._awake = np.zeros(m, dtype=bool)
        self._times = np.full(m, -1, dtype=np.int64)
        self._awake[0] = True
        self._times[0] = 0
        self._n_awake = 1
        # Active frog arrays, grown on demand; slot i is the i-th activation.
        cap = self._GROW
        k = group.ncoords
        self._origins = np.empty((cap, k), dtype=np.int64)
        self._positions = np.empty((cap, k), dtype=np.int64)
        self._act_times = np.empty(cap, dtype=np.int64)
        self._bases = np.empty(cap, dtype=np.uint64)
        self._n_active = 0
        self._append(self._origin_coords[None, :], 0)

    # -- bookkeeping

    def _append(self, origin_rows: np.ndarray, t: int) -> None:
        n_new = origin_rows.shape[0]
        need = self._n_active + n_new
        if need > self._origins.shape[0]:
            cap = max(need, 2 * self._origins.shape[0])
            for name in ("_origins", "_positions"):
                arr = getattr(self, name)
                new = np.empty((cap, arr.shape[1]), dtype=arr.dtype)
                new[: self._n_active] = arr[: self._n_active]
                setattr(self, name, new)
            for name in ("_act_times", "_bases"):
                arr = getattr(self, name)
                new = np.empty(cap, dtype=arr.dtype)
                new[: self._n_active] = arr[: self._n_active]
                setattr(self, name, new)
        sl = slice(self._n_active, need)
        self._origins[sl] = origin_rows
        self._positions[sl] = origin_rows
        self._act_times[sl] = t
        self._bases[sl] = stream_bases(self.master_seed, encode_sites(origin_rows))
        self._n_active = need

    @property
    def n_active(self) -> int:
        return self._n_active

    @property
    def sleeping_count(self) -> int:
        return self._n_sites - self._n_awake

    def frog_states(self) -> list[FrogState]:
        """Snapshot of every active frog (small instances only)."""
        out = []
        for i in range(self._n_active):
            t = int(self._act_times[i])
            out.append(FrogState(
                self.group.from_coords(self._origins[i].tolist()),
                self.group.from_coords(self._positions[i].tolist()),
                self.global_time - t,
                t,
            ))
        return out

    # -- dynamics

    def step_system(self) -> "FrogSimulation":
        """Advance one synchronous tick: all active frogs move, then wake-ups."""
        if self.global_time >= self.horizon:
            raise OutOfHorizonError("simulation already at its horizon")
        t_next = self.global_time + 1
        a = self._n_active
        local = t_next - self._act_times[:a]
        idx = step_indices(self._bases[:a], local, len(self.gens))
        self._positions[:a] += self._gm[idx]
        self.group.reduce_torsion_columns(self._positions[:a])
        rel = self._positions[:a] - self._origin_coords
        self.group.reduce_torsion_columns(rel)
        codes = self.ball.lookup(rel)
        codes = codes[codes >= 0]
        if codes.size:
            codes = codes[~self._awake[codes]]
        if codes.size:
            fresh = np.unique(codes)
            self._awake[fresh] = True
            self._times[fresh] = t_next
            self._n_awake += fresh.size
            rows = self.ball.elements[fresh].astype(np.int64) + self._origin_coords
            self.group.reduce_torsion_columns(rows)
            self._append(rows, t_next)
        self.global_time = t_next
        return self

    def run(self, until_targets: np.ndarray | None = None) -> ActivationRecord:
        """Drive to the horizon and return the record.

        `until_targets` is an optional array of coordinate rows; once every
        one of them is awake the loop stops early.  Early stopping cannot
        alter any activation time at or before the stopping tick, and the
        returned record's horizon is the full requested horizon only when
        the run was not cut short (otherwise it is the stopping time).
        """
        waiting = None
        if until_targets is not None:
            rel = np.atleast_2d(np.asarray(until_targets, dtype=np.int64)) - self._origin_coords
            self.group.reduce_torsion_columns(rel)
            codes = self.ball.lookup(rel)
            if (codes < 0).any():
                raise OutOfHorizonError("a stop target lies outside the sleeping ball")
            waiting = codes
        while self.global_time < self.horizon:
            if self.sleeping_count == 0:
                break
            if waiting is not None and bool(self._awake[waiting].all()):
                break
            self.step_system()
        return self.record()

    def record(self) -> ActivationRecord:
        """Snapshot of all activations so far.

        The record's horizon is the current global time when the run stopped
        early, so its contents always cover exactly [0, horizon].
        """
        live = self._times >= 0
        rows = self.ball.elements[live].astype(np.int64) + self._origin_coords
        self.group.reduce_torsion_columns(rows)
        horizon = self.horizon
        if self.global_time < self.horizon and self.sleeping_count > 0:
            horizon = self.global_time
        return ActivationRecord(self.group, self.gens, horizon, self.master_seed,
                                self.origin, rows, self._times[live])


# -- functional entry points


def init_state(group: GroupSpec, gens: GeneratorSet, horizon: int, master_seed: int,
               ball: BallTable | None = None,
               budget: MemoryBudget = DEFAULT_BUDGET) -> FrogSimulation:
    """Fresh simulation: one active frog at the identity, the rest asleep."""
    return FrogSimulation(group, gens, master_seed, horizon, ball=ball, budget=budget)


def step_system(state: FrogSimulation) -> FrogSimulation:
    """Advance one synchronous tick (mutates and returns the state)."""
    return state.step_system()


def run_frog(group: GroupSpec, gens: GeneratorSet, horizon: int, master_seed: int,
             origin: GroupElement | None = None, ball: BallTable | None = None,
             budget: MemoryBudget = DEFAULT_BUDGET,
             until_targets: np.ndarray | None = None) -> ActivationRecord:
    """One full realization -> activation record; deterministic in its arguments."""
    sim = FrogSimulation(group, gens, master_seed, horizon, origin=origin,
                         ball=ball, budget=budget)
    return sim.run(until_targets=until_targets)


# ---------------------------------------------------------------------------
# Experiments


@dataclass(frozen=True)
class TailCurve:
    """Empirical survival function of one activation time across replicates.

    survival[i] = fraction of replicates with T >= n_values[i]; censored
    replicates (target still asleep at the horizon) count toward every
    n <= horizon, so the curve is exact on its whole grid.
    """

    target: tuple[int, ...]
    n_values: tuple[int, ...]
    replicas: int
    survival: tuple[float, ...]
    n_censored: int
    horizon: int
    master_seed: int

    def to_record(self) -> dict:
        return {
            "quantity": "activation_tail",
            "params": {"target": list(self.target), "n_values": list(self.n_values),
                       "horizon": self.horizon},
            "survival": list(self.survival),
            "replicas": self.replicas,
            "censored": self.n_censored,
            "master_seed": self.master_seed,
        }


def t_tail_experiment(group: GroupSpec, gens: GeneratorSet, target,
                      n_values, replicas: int, master_seed: int,
                      seed_for=None, budget: MemoryBudget = DEFAULT_BUDGET) -> TailCurve:
    """Survival curve of T(e, target) over independent realizations.

    Each replicate runs just long enough to wake the target (or to the
    horizon max(n_values)); per-site streams make longer runs agree with
    shorter ones, so early stopping is exact.
    """
    from .rng import derive_seed
    if seed_for is None:
        seed_for = lambda i: derive_seed(master_seed, i)
    n_values = tuple(sorted(int(n) for n in n_values))
    horizon = n_values[-1]
    tgt = np.asarray(group.from_coords([int(v) for v in target]).coords, dtype=np.int64)
    ball = build_ball_table(group, gens, horizon, budget)
    times = np.empty(replicas, dtype=np.float64)
    censored = 0
    for i in range(replicas):
        sim = FrogSimulation(group, gens, seed_for(i), horizon, ball=ball, budget=budget)
        sim.run(until_targets=tgt[None, :])
        t = sim.record().activation_time(tgt)
        if t is None:
            censored += 1
            times[i] = math.inf
        else:
            times[i] = t
    survival = tuple(float((times >= n).mean()) for n in n_values)
    return TailCurve(tuple(int(v) for v in tgt), n_values, replicas, survival,
                     censored, horizon, master_seed)


@dataclass(frozen=True)
class GrowthTable:
    """Activation-time ratios T(e, k*direction) / ||k*direction|| per k.

    ratios[k] lists one value per replicate; censored replicates are
    excluded from ratios and counted separately (the word norms in the
    denominator are exact word-metric values, not coordinate sums).
    """

    direction: tuple[int, ...]
    k_values: tuple[int, ...]
    norms: tuple[int, ...]
    replicas: int
    ratios: dict[int, np.ndarray]
    censored: dict[int, int]
    horizon: int
    master_seed: int

    def quantile(self, k: int, q: float) -> float:
        vals = self.ratios[k]
        if vals.size == 0:
            return math.inf
        return float(np.quantile(vals, q))

    def max_ratio(self, k: int) -> float:
        vals = self.ratios[k]
        return float(vals.max()) if vals.size else math.inf

    def mean_ratio(self, k: int) -> float:
        vals = self.ratios[k]
        return float(vals.mean()) if vals.size else math.inf

    def to_record(self) -> dict:
        return {
            "quantity": "linear_growth",
            "params": {"direction": list(self.direction), "k_values": list(self.k_values),
                       "norms": list(self.norms), "horizon": self.horizon},
            "quantiles_99": [self.quantile(k, 0.99) for k in self.k_values],
            "max_ratios": [self.max_ratio(k) for k in self.k_values],
            "mean_ratios": [self.mean_ratio(k) for k in self.k_values],
            "censored": [self.censored[k] for k in self.k_values],
            "replicas": self.replicas,
            "master_seed": self.master_seed,
        }


def linear_growth_experiment(group: GroupSpec, gens: GeneratorSet, direction,
                             k_values, replicas: int, master_seed: int,
                             horizon: int, metric=None, seed_for=None,
                             budget: MemoryBudget = DEFAULT_BUDGET) -> GrowthTable:
    """Distribution of T(e, k*direction)/||k*direction|| for each k.

    One realization per replicate serves every k: all targets are read off
    the same record, which both saves work and couples the ratios across k
    within a replicate.
    """
    from .groups import WordMetric
    from .rng import derive_seed
    if seed_for is None:
        seed_for = lambda i: derive_seed(master_seed, i)
    k_values = tuple(sorted(int(k) for k in k_values))
    dir_el = group.from_coords([int(v) for v in direction])
    targets = {k: np.asarray((k * np.asarray(dir_el.coords, dtype=np.int64)),
                             dtype=np.int64) for k in k_values}
    for k in k_values:
        targets[k] = np.asarray(
            group.from_coords(targets[k].tolist()).coords, dtype=np.int64)
    if metric is None:
        metric = WordMetric(group, gens)
    norms = {k: metric.word_norm(targets[k]) for k in k_values}
    if max(norms.values()) > horizon:
        raise OutOfHorizonError("largest target lies outside the horizon ball")
    ball = build_ball_table(group, gens, horizon, budget)
    stop_rows = np.stack([targets[k] for k in k_values])
    raw: dict[int, list[float]] = {k: [] for k in k_values}
    censored = {k: 0 for k in k_values}
    for i in range(replicas):
        sim = FrogSimulation(group, gens, seed_for(i), horizon, ball=ball, budget=budget)
        rec = sim.run(until_targets=stop_rows)
        for k in k_values:
            t = rec.activation_time(targets[k])
            if t is None:
                censored[k] += 1
            else:
                raw[k].append(t / norms[k])
    ratios = {k: np.asarray(raw[k], dtype=np.float64) for k in k_values}
    return GrowthTable(tuple(dir_el.coords), k_values,
                       tuple(norms[k] for k in k_values), replicas, ratios,
                       censored, horizon, master_seed)


def subadditivity_witness(record: ActivationRecord, via: GroupElement,
                          sub_horizon: int,
                          budget: MemoryBudget = DEFAULT_BUDGET) -> dict:
    """Check T(e,x) <= T(e,via) + T(via,x) pathwise on shared site streams.

    Runs a second realization started at `via` with the same master seed;
    because both phases consume the same per-site streams, the inequality
    holds for every x the sub-run activates (within both horizons), not
    just in distribution.  Returns counts of comparisons and violations.
    """
    t_via = record.activation_time(via)
    if t_via is None:
        raise FroglabError("via site was never activated in the base record")
    sub = run_frog(record.group, record.gens, sub_horizon, record.master_seed,
                   origin=via, budget=budget)
    checked = 0
    violations = 0
    for coords, t_sub in sub.items():
        t_base = record.activation_time(coords)
        if t_base is None:
            continue
        checked += 1
        if t_base > t_via + t_sub:
            violations += 1
    return {"via": tuple(via.coords), "t_via": int(t_via),
            "checked": checked, "violations": violations}
