"""Finitely generated abelian groups, their Cayley graphs and word metrics.

A group is Z^rank plus a product of cyclic factors in canonical divisor
order.  Elements are kept in reduced form (torsion residues in [0, m_i)), so
equality and hashing are plain field comparisons.  The word metric for a
finite symmetric generator set is computed exactly by breadth-first search
over a dense coordinate box, cached as flat numpy arrays so the simulation
engines can do O(1) distance and membership lookups on whole batches of
sites at once.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    BudgetExceededError,
    DegenerateQuotientError,
    FroglabError,
    GroupMismatchError,
)

DEFAULT_MAX_ELEMENTS = 20_000_000
DEFAULT_MAX_BOX_CELLS = 130_000_000


@dataclass(frozen=True)
class MemoryBudget:
    """Caps on cached group elements and on dense-grid cells."""

    max_elements: int = DEFAULT_MAX_ELEMENTS
    max_box_cells: int = DEFAULT_MAX_BOX_CELLS


DEFAULT_BUDGET = MemoryBudget()


@dataclass(frozen=True)
class GroupSpec:
    """Z^rank direct sum of cyclic groups of the given orders.

    Torsion orders must be in canonical form: each order >= 2 and dividing
    the next.  rank + number of torsion factors must be at least 1.
    """

    rank: int
    torsion_orders: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "torsion_orders", tuple(int(m) for m in self.torsion_orders))
        if self.rank < 0:
            raise ValueError(f"rank must be non-negative, got {self.rank}")
        if self.rank + len(self.torsion_orders) < 1:
            raise ValueError("group must have at least one factor")
        for m in self.torsion_orders:
            if m < 2:
                raise ValueError(f"torsion order must be >= 2, got {m}")
        for a, b in zip(self.torsion_orders, self.torsion_orders[1:]):
            if b % a != 0:
                raise ValueError(f"torsion orders must divide in order: {a} does not divide {b}")

    @property
    def ncoords(self) -> int:
        return self.rank + len(self.torsion_orders)

    @property
    def torsion_free(self) -> bool:
        return not self.torsion_orders

    def identity(self) -> "GroupElement":
        return GroupElement(self, (0,) * self.rank, (0,) * len(self.torsion_orders))

    def element(self, free: Sequence[int] = (), torsion: Sequence[int] = ()) -> "GroupElement":
        return GroupElement(self, tuple(int(v) for v in free), tuple(int(v) for v in torsion))

    def from_coords(self, coords: Sequence[int]) -> "GroupElement":
        coords = tuple(int(v) for v in coords)
        if len(coords) != self.ncoords:
            raise ValueError(f"expected {self.ncoords} coordinates, got {len(coords)}")
        return GroupElement(self, coords[: self.rank], coords[self.rank:])

    def reduce_torsion_columns(self, coords: np.ndarray) -> np.ndarray:
        """Reduce the torsion columns of a (..., ncoords) array in place."""
        for j, m in enumerate(self.torsion_orders):
            col = self.rank + j
            np.remainder(coords[..., col], m, out=coords[..., col])
        return coords

    def quotient(self) -> "GroupSpec":
        """Torsion-free quotient Z^rank."""
        if self.rank == 0:
            raise DegenerateQuotientError("quotient of a finite group is trivial")
        return GroupSpec(self.rank, ())


@dataclass(frozen=True)
class GroupElement:
    """Element in reduced form: torsion entries always in [0, m_i)."""

    group: GroupSpec
    free: tuple[int, ...]
    torsion: tuple[int, ...]

    def __post_init__(self):
        free = tuple(int(v) for v in self.free)
        if len(free) != self.group.rank:
            raise ValueError(f"free part must have length {self.group.rank}")
        orders = self.group.torsion_orders
        if len(self.torsion) != len(orders):
            raise ValueError(f"torsion part must have length {len(orders)}")
        torsion = tuple(int(v) % m for v, m in zip(self.torsion, orders))
        object.__setattr__(self, "free", free)
        object.__setattr__(self, "torsion", torsion)

    @property
    def coords(self) -> tuple[int, ...]:
        return self.free + self.torsion

    def is_identity(self) -> bool:
        return not any(self.coords)

    def __add__(self, other: "GroupElement") -> "GroupElement":
        return compose(self, other)

    def __neg__(self) -> "GroupElement":
        return inverse(self)

    def __sub__(self, other: "GroupElement") -> "GroupElement":
        return compose(self, inverse(other))

    def __repr__(self):
        return f"GroupElement{self.coords}"


def compose(a: GroupElement, b: GroupElement) -> GroupElement:
    """Group law, written additively; torsion entries reduce mod m_i."""
    if a.group != b.group:
        raise GroupMismatchError(f"cannot compose elements of {a.group} and {b.group}")
    free = tuple(x + y for x, y in zip(a.free, b.free))
    torsion = tuple(x + y for x, y in zip(a.torsion, b.torsion))
    return GroupElement(a.group, free, torsion)


def inverse(a: GroupElement) -> GroupElement:
    free = tuple(-x for x in a.free)
    torsion = tuple(-x for x in a.torsion)
    return GroupElement(a.group, free, torsion)


def torsion_quotient(a: GroupElement) -> GroupElement:
    """Project to the torsion-free quotient by dropping the torsion part."""
    return GroupElement(a.group.quotient(), a.free, ())


# ---------------------------------------------------------------------------
# Generator sets


@dataclass(frozen=True)
class GeneratorSet:
    """Finite symmetric generating set, identity excluded.

    Validation enforces symmetry and exclusion of the identity exactly, and
    generation of the whole group through a bounded, decidable proxy: a
    breadth-first search to radius 2 * (max torsion order + rank) must reach
    every torsion residue tuple, and the integer span of the free parts it
    reaches must be all of Z^rank.
    """

    group: GroupSpec
    elements: tuple[GroupElement, ...]
    check_generates: bool = True

    def __post_init__(self):
        elems = tuple(self.elements)
        object.__setattr__(self, "elements", elems)
        if not elems:
            raise ValueError("generator set is empty")
        seen = set()
        for s in elems:
            if s.group != self.group:
                raise GroupMismatchError("generator from a different group")
            if s.is_identity():
                raise ValueError("identity is not allowed in the generator set")
            if s.coords in seen:
                raise ValueError(f"duplicate generator {s.coords}")
            seen.add(s.coords)
        for s in elems:
            if inverse(s).coords not in seen:
                raise ValueError(f"generator set is not symmetric: missing inverse of {s.coords}")
        if self.check_generates and not self._generates():
            raise ValueError("generator set does not generate the group")

    def _generates(self) -> bool:
        g = self.group
        radius = 2 * ((max(g.torsion_orders) if g.torsion_orders else 0) + g.rank)
        reached = _bfs_reach_set(g, self.matrix, radius, limit=2_000_000)
        if g.torsion_orders:
            residues = {c[g.rank:] for c in reached}
            n_residues = 1
            for m in g.torsion_orders:
                n_residues *= m
            if len(residues) < n_residues:
                return False
        if g.rank:
            free_parts = [c[: g.rank] for c in reached]
            if not _span_is_full_lattice(free_parts, g.rank):
                return False
        return True

    @property
    def matrix(self) -> np.ndarray:
        """(n_gens, ncoords) int64 rows in the declared order."""
        return np.array([s.coords for s in self.elements], dtype=np.int64)

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    @property
    def max_coord_step(self) -> np.ndarray:
        """Per free coordinate, the largest absolute entry over generators."""
        d = self.group.rank
        if d == 0:
            return np.zeros(0, dtype=np.int64)
        return np.abs(self.matrix[:, :d]).max(axis=0)


def generator_set(group: GroupSpec, rows: Iterable[Sequence[int]]) -> GeneratorSet:
    """Build a GeneratorSet from raw coordinate rows (free part then torsion)."""
    return GeneratorSet(group, tuple(group.from_coords(r) for r in rows))


def standard_generators(group: GroupSpec) -> GeneratorSet:
    """The +-unit vectors of the free part (torsion factors get no generator)."""
    rows = []
    for j in range(group.rank):
        for sign in (1, -1):
            v = [0] * group.ncoords
            v[j] = sign
            rows.append(v)
    return generator_set(group, rows)


def _bfs_reach_set(group: GroupSpec, gen_matrix: np.ndarray, radius: int, limit: int) -> set:
    """Set-based BFS for validation; bounded by element count, not box size."""
    steps = [tuple(int(v) for v in row) for row in gen_matrix]
    orders = group.torsion_orders
    rank = group.rank

    def add(c, s):
        out = list(x + y for x, y in zip(c, s))
        for j, m in enumerate(orders):
            out[rank + j] %= m
        return tuple(out)

    origin = (0,) * group.ncoords
    reached = {origin}
    frontier = [origin]
    for _ in range(radius):
        nxt = []
        for c in frontier:
            for s in steps:
                y = add(c, s)
                if y not in reached:
                    reached.add(y)
                    nxt.append(y)
        if len(reached) > limit:
            raise BudgetExceededError("generation check exceeded element limit")
        if not nxt:
            break
        frontier = nxt
    return reached


def _span_is_full_lattice(vectors: Iterable[Sequence[int]], d: int) -> bool:
    """Exact check that the integer span of the vectors is all of Z^d."""
    if d == 0:
        return True
    pool = [list(map(int, v)) for v in vectors if any(v)]
    det = 1
    for j in range(d):
        rows_j = [r for r in pool if r[j] != 0]
        if not rows_j:
            return False
        piv = rows_j[0]
        for r in rows_j[1:]:
            while r[j] != 0:
                q = piv[j] // r[j]
                if q:
                    for k in range(j, d):
                        piv[k] -= q * r[k]
                piv, r = r, piv
        det *= piv[j]
        pool = [r for r in pool if r is not piv and any(r[j + 1:])]
    return abs(det) == 1


def induced_quotient_generators(gens: GeneratorSet) -> GeneratorSet:
    """Images of the generators in the torsion-free quotient.

    Pure-torsion generators map to the identity and are dropped; duplicate
    images collapse.  The result is symmetric because the source is.
    """
    q = gens.group.quotient()
    seen = {}
    for s in gens.elements:
        img = GroupElement(q, s.free, ())
        if img.is_identity():
            continue
        seen.setdefault(img.coords, img)
    if not seen:
        raise DegenerateQuotientError("all generators are pure torsion")
    try:
        return GeneratorSet(q, tuple(seen.values()))
    except ValueError as exc:
        raise DegenerateQuotientError(f"quotient generators invalid: {exc}") from exc


# ---------------------------------------------------------------------------
# Dense coordinate boxes and ball tables


@dataclass(frozen=True)
class BoxIndex:
    """Dense box of integer coordinates with C-order flat indexing.

    Free coordinates live in [lo_j, lo_j + shape_j); torsion coordinates
    always span [0, m_j).  Flat codes are lexicographic in the coordinate
    tuple, which the BFS relies on for deterministic shell ordering.
    """

    lo: tuple[int, ...]
    shape: tuple[int, ...]
    strides: tuple[int, ...] = field(init=False)
    size: int = field(init=False)

    def __post_init__(self):
        strides = []
        acc = 1
        for n in reversed(self.shape):
            strides.append(acc)
            acc *= n
        object.__setattr__(self, "strides", tuple(reversed(strides)))
        object.__setattr__(self, "size", acc)

    def contains(self, coords: np.ndarray) -> np.ndarray:
        lo = np.asarray(self.lo, dtype=np.int64)
        hi = lo + np.asarray(self.shape, dtype=np.int64)
        return np.logical_and(coords >= lo, coords < hi).all(axis=-1)

    def ravel(self, coords: np.ndarray) -> np.ndarray:
        """Flat codes; caller guarantees containment."""
        off = np.asarray(coords, dtype=np.int64) - np.asarray(self.lo, dtype=np.int64)
        return off @ np.asarray(self.strides, dtype=np.int64)

    def unravel(self, codes: np.ndarray) -> np.ndarray:
        codes = np.asarray(codes, dtype=np.int64)
        out = np.empty(codes.shape + (len(self.shape),), dtype=np.int64)
        rem = codes
        for j, (stride, lo) in enumerate(zip(self.strides, self.lo)):
            q, rem = np.divmod(rem, stride)
            out[..., j] = q + lo
        return out


def _ball_box(group: GroupSpec, gens: GeneratorSet, radius: int) -> BoxIndex:
    maxstep = gens.max_coord_step
    lo = [-radius * int(m) for m in maxstep] + [0] * len(group.torsion_orders)
    shape = [2 * radius * int(m) + 1 for m in maxstep] + list(group.torsion_orders)
    return BoxIndex(tuple(lo), tuple(shape))


@dataclass
class BallTable:
    """Word-metric ball of a given radius around the identity, fully indexed.

    elements are ordered by (distance, lexicographic coordinates); index_of
    maps flat box codes to element indices (-1 outside the ball).
    """

    group: GroupSpec
    gens: GeneratorSet
    radius: int
    box: BoxIndex
    elements: np.ndarray          # (M, K) int32
    norms: np.ndarray             # (M,) int32
    index_of: np.ndarray          # (box.size,) int32
    shell_starts: np.ndarray      # (radius + 2,) int64; ball_size(r) = shell_starts[r+1]
    exhausted: bool               # True when the whole (finite) group fits inside

    def ball_size(self, r: int) -> int:
        r = min(r, self.radius)
        return int(self.shell_starts[r + 1])

    def ball_points(self, r: int) -> np.ndarray:
        """(M_r, K) int array of elements with norm <= r, BFS order (view)."""
        if r > self.radius and not self.exhausted:
            raise ValueError(f"radius {r} beyond table radius {self.radius}")
        return self.elements[: self.ball_size(r)]

    def lookup(self, coords: np.ndarray) -> np.ndarray:
        """Element indices for coordinate rows; -1 if outside the table."""
        coords = np.atleast_2d(np.asarray(coords, dtype=np.int64))
        inbox = self.box.contains(coords)
        idx = np.full(coords.shape[0], -1, dtype=np.int64)
        if inbox.any():
            codes = self.box.ravel(coords[inbox])
            idx[inbox] = self.index_of[codes]
        return idx

    def norm_lookup(self, coords: np.ndarray) -> np.ndarray:
        """Word norms for coordinate rows; -1 if beyond the cached radius."""
        idx = self.lookup(coords)
        out = np.full(idx.shape, -1, dtype=np.int64)
        hit = idx >= 0
        out[hit] = self.norms[idx[hit]]
        return out


def build_ball_table(
    group: GroupSpec,
    gens: GeneratorSet,
    radius: int,
    budget: MemoryBudget = DEFAULT_BUDGET,
) -> BallTable:
    """BFS from the identity out to the given radius.

    Shells are explored in order; within a shell, elements are sorted
    lexicographically, so the table layout is a pure function of
    (group, gens, radius).
    """
    if radius < 0:
        raise ValueError("radius must be non-negative")
    box = _ball_box(group, gens, radius)
    if box.size > budget.max_box_cells:
        raise BudgetExceededError(
            f"ball box needs {box.size} cells, budget is {budget.max_box_cells}"
        )
    k = group.ncoords
    gm = gens.matrix
    index_of = np.full(box.size, -1, dtype=np.int32)
    origin = np.zeros((1, k), dtype=np.int64)
    index_of[box.ravel(origin)] = 0
    chunks = [origin]
    shell_starts = [0, 1]
    frontier = origin
    count = 1
    exhausted = False
    for _ in range(1, radius + 1):
        cand = (frontier[:, None, :] + gm[None, :, :]).reshape(-1, k)
        group.reduce_torsion_columns(cand)
        codes = box.ravel(cand)
        fresh = index_of[codes] < 0
        ucodes = np.unique(codes[fresh])
        if ucodes.size == 0:
            exhausted = True
            break
        if count + ucodes.size > budget.max_elements:
            raise BudgetExceededError(
                f"ball exceeds element budget {budget.max_elements} at radius {len(shell_starts) - 1}"
            )
        index_of[ucodes] = np.arange(count, count + ucodes.size, dtype=np.int32)
        frontier = box.unravel(ucodes)
        chunks.append(frontier)
        count += ucodes.size
        shell_starts.append(count)
    while len(shell_starts) < radius + 2:
        shell_starts.append(count)
    elements = np.concatenate(chunks, axis=0).astype(np.int32)
    shell_starts = np.asarray(shell_starts, dtype=np.int64)
    norms = np.empty(count, dtype=np.int32)
    for r in range(len(shell_starts) - 1):
        norms[shell_starts[r]: shell_starts[r + 1]] = r
    return BallTable(group, gens, radius, box, elements, norms, index_of, shell_starts, exhausted)


# ---------------------------------------------------------------------------
# Word metric oracle


class WordMetric:
    """Cached word-metric oracle backed by a lazily grown ball table."""

    def __init__(
        self,
        group: GroupSpec,
        gens: GeneratorSet,
        budget: MemoryBudget = DEFAULT_BUDGET,
        initial_radius: int = 8,
    ):
        self.group = group
        self.gens = gens
        self.budget = budget
        self._table = build_ball_table(group, gens, initial_radius, budget)

    @property
    def table(self) -> BallTable:
        return self._table

    def ensure_radius(self, radius: int) -> BallTable:
        if radius > self._table.radius and not self._table.exhausted:
            self._table = build_ball_table(self.group, self.gens, radius, self.budget)
        return self._table

    def _coords(self, x) -> np.ndarray:
        if isinstance(x, GroupElement):
            if x.group != self.group:
                raise GroupMismatchError("element from a different group")
            return np.asarray(x.coords, dtype=np.int64)
        return np.asarray(x, dtype=np.int64)

    def word_norm(self, x) -> int:
        """Length of a shortest generator word for x; grows the cache on demand."""
        c = self._coords(x)[None, :]
        while True:
            n = int(self._table.norm_lookup(c)[0])
            if n >= 0:
                return n
            if self._table.exhausted:
                raise FroglabError(f"element {tuple(c[0])} is not reachable")
            # Growth doubles, floored at an L-infinity based lower bound.
            maxstep = np.maximum(self.gens.max_coord_step, 1)
            d = self.group.rank
            lower = int(np.ceil(np.abs(c[0][:d]) / maxstep).max()) if d else 1
            self.ensure_radius(max(2 * self._table.radius, lower, 1))

    def distance(self, x, y) -> int:
        diff = self._coords(y) - self._coords(x)
        return self.word_norm(self.group.from_coords(diff.tolist()))

    def ball(self, center: GroupElement, r: int) -> list[GroupElement]:
        """All elements within distance r of center (translate of the e-ball)."""
        pts = self.ball_points(center, r)
        return [self.group.from_coords(row) for row in pts.tolist()]

    def ball_points(self, center, r: int) -> np.ndarray:
        if r < 0:
            raise ValueError("radius must be non-negative")
        self.ensure_radius(r)
        pts = self._table.ball_points(r).astype(np.int64) + self._coords(center)[None, :]
        return self.group.reduce_torsion_columns(pts)

    def ball_sizes(self, r_max: int) -> np.ndarray:
        """|B(e, r)| for r = 0..r_max."""
        self.ensure_radius(r_max)
        t = self._table
        return np.asarray([t.ball_size(r) for r in range(r_max + 1)], dtype=np.int64)

    def growth_exponent(self, r_max: int) -> float:
        """Least-squares slope of log |B(e,r)| vs log r over r in [r_max/2, r_max]."""
        if r_max < 4:
            raise ValueError("r_max must be at least 4")
        sizes = self.ball_sizes(r_max)
        rs = np.arange(r_max // 2, r_max + 1)
        slope = np.polyfit(np.log(rs), np.log(sizes[rs]), 1)[0]
        return float(slope)

    def geodesic(self, x) -> list[GroupElement]:
        """Shortest path from the identity to x, lexicographic tie-break."""
        if isinstance(x, GroupElement) and x.group != self.group:
            raise GroupMismatchError("element from a different group")
        target = self._coords(x)
        total = self.word_norm(x)
        path = [self.group.identity()]
        cur = np.zeros_like(target)
        gm = self.gens.matrix
        for remaining in range(total, 0, -1):
            cand = cur[None, :] + gm
            self.group.reduce_torsion_columns(cand)
            rem = target[None, :] - cand
            self.group.reduce_torsion_columns(rem)
            dists = self._table.norm_lookup(rem)
            choices = cand[dists == remaining - 1]
            order = np.lexsort(choices.T[::-1])
            cur = choices[order[0]]
            path.append(self.group.from_coords(cur.tolist()))
        return path
