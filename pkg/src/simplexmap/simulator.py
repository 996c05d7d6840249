"""Virtual-grid execution engine.

A launch evaluates the grid's map once per block, drops Void blocks, expands
each surviving block into ``rho**m`` threads at ``target * rho + local`` and
drops threads outside the domain (the per-thread membership filter). The
remaining *useful* threads run one of four kernel bodies:

``MAP``    records the coordinate only (coverage multiset),
``ACCUM``  adds 1 to its cell,
``EDM``    writes the Euclidean distance of the point pair the cell stands for,
``CA``     one Game of Life step per launch, double buffered.

Domains use the lower-triangular view of :mod:`simplexmap.core`; a domain
``SimplexSpec.of_side(m, N)`` has ``N`` cells per axis. EDM over ``n`` points
lives on side ``n - 1``: cell ``(x, y)`` holds ``d(p_x, p_{y+1})``.

CA boundaries are pinned as follows. ``PERIODIC_2D`` wraps every neighbour
coordinate modulo ``N`` componentwise and treats a wrapped coordinate outside
the triangle as dead. ``DEAD_3D`` treats every neighbour outside the
tetrahedron as dead. Neither rule changes across maps, which is what the
cross-map equality checks rely on.
"""
from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import kernels
from .core import ContractViolation, Coord, SimplexSpec, lower_contains, lower_index
from .maps import GridSpec, MapKind, grid_bb, grid_for_side


class KernelKind(enum.Enum):
    MAP = "map"
    ACCUM = "accum"
    EDM = "edm"
    CA = "ca"


class Boundary(enum.Enum):
    PERIODIC_2D = "periodic2d"
    DEAD_3D = "dead3d"


@dataclass
class SimplexGridState:
    """Dense per-cell storage over a simplex domain, linearized row by row."""

    domain: SimplexSpec
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (self.domain.volume,):
            raise ContractViolation(
                f"state holds {self.values.shape} values, domain has {self.domain.volume} cells"
            )

    @classmethod
    def zeros(cls, domain: SimplexSpec, dtype=np.int64) -> "SimplexGridState":
        return cls(domain, np.zeros(domain.volume, dtype=dtype))

    @property
    def side(self) -> int:
        return self.domain.side

    def index(self, c: Sequence[int]) -> int:
        return lower_index(c, self.side)

    def __getitem__(self, c):
        return self.values[self.index(c)]

    def __setitem__(self, c, v):
        self.values[self.index(c)] = v

    def copy(self) -> "SimplexGridState":
        return SimplexGridState(self.domain, self.values.copy())

    def same_as(self, other: "SimplexGridState") -> bool:
        return (
            self.domain == other.domain
            and self.values.dtype == other.values.dtype
            and self.values.tobytes() == other.values.tobytes()
        )

    def to_dense(self, fill=0, symmetric=False) -> np.ndarray:
        """Square/cube array indexed ``[x, y(, z)]``; optional symmetric completion (2D)."""
        cells = lower_cells(self.side, self.domain.m)
        out = np.full((self.side,) * self.domain.m, fill, dtype=self.values.dtype)
        out[tuple(cells.T)] = self.values
        if symmetric and self.domain.m == 2:
            out[cells[:, 1], cells[:, 0]] = self.values
        return out


@dataclass
class SimReport:
    domain: SimplexSpec
    blocks_launched: int
    blocks_void: int
    threads_launched: int
    threads_useful: int
    counts: np.ndarray  # multiplicity per domain cell, linear index
    stray: Dict[Coord, int] = field(default_factory=dict)  # raw mode only
    kernel_output: object = None

    @property
    def space_overhead(self) -> Fraction:
        if self.threads_useful == 0:
            raise ZeroDivisionError("no useful threads")
        return Fraction(self.threads_launched, self.threads_useful) - 1

    @property
    def slack_threads(self) -> int:
        """Threads of non-Void blocks dropped by the per-thread filter."""
        per = self.threads_launched // self.blocks_launched if self.blocks_launched else 0
        return (self.blocks_launched - self.blocks_void) * per - self.threads_useful

    def multiplicity(self, c: Sequence[int]) -> int:
        if lower_contains(c, self.domain.side):
            return int(self.counts[lower_index(c, self.domain.side)])
        return self.stray.get(tuple(c), 0)

    @property
    def coverage(self) -> Dict[Coord, int]:
        """Visited coordinate -> count. Materializes a dict; meant for small domains."""
        cells = lower_cells(self.domain.side, self.domain.m)
        hit = np.flatnonzero(self.counts)
        out = {tuple(int(v) for v in cells[i]): int(self.counts[i]) for i in hit}
        out.update(self.stray)
        return out

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(repr((self.domain.m, self.domain.n, self.blocks_launched, self.blocks_void,
                       self.threads_launched, self.threads_useful)).encode())
        h.update(np.ascontiguousarray(self.counts, dtype=np.int64).tobytes())
        h.update(repr(sorted(self.stray.items())).encode())
        out = self.kernel_output
        if isinstance(out, SimplexGridState):
            h.update(str(out.values.dtype).encode())
            h.update(out.values.tobytes())
        return h.hexdigest()


@dataclass(frozen=True)
class CoverVerdict:
    exact: bool
    witness: Optional[Coord] = None
    multiplicity: int = 1

    def __bool__(self):
        return self.exact

    def __str__(self):
        if self.exact:
            return "Exact"
        return f"NotExact at {self.witness} (multiplicity {self.multiplicity})"


# geometry tables ----------------------------------------------------------------


@lru_cache(maxsize=16)
def lower_cells(side: int, m: int) -> np.ndarray:
    """Coordinates of every lower-view cell, in linear-index order, ``(V, m)``."""
    if m == 2:
        y = np.repeat(np.arange(side, dtype=np.int64), np.arange(1, side + 1))
        x = np.arange(y.size, dtype=np.int64) - y * (y + 1) // 2
        out = np.stack([x, y], axis=1)
    elif m == 3:
        parts = []
        for y in range(side):
            x, z = np.nonzero(np.add.outer(np.arange(y + 1), np.arange(y + 1)) <= y)
            parts.append(np.stack([x, np.full(x.size, y), z], axis=1))
        out = np.concatenate(parts).astype(np.int64) if parts else np.zeros((0, 3), np.int64)
    else:
        raise ContractViolation("the lower view exists for m in {2, 3}")
    out.setflags(write=False)
    return out


def _linear(cells: np.ndarray, side: int) -> np.ndarray:
    x, y = cells[:, 0], cells[:, 1]
    inside = (x >= 0) & (x <= y) & (y < side)
    if cells.shape[1] == 2:
        idx = y * (y + 1) // 2 + x
    else:
        z = cells[:, 2]
        inside &= (z >= 0) & (z <= y - x)
        idx = y * (y + 1) * (y + 2) // 6 + x * (y + 1) - x * (x - 1) // 2 + z
    return np.where(inside, idx, -1)


@lru_cache(maxsize=8)
def neighbor_table(side: int, boundary: Boundary) -> np.ndarray:
    """Moore neighbours of every cell; missing (dead) neighbours point at index ``V``."""
    m = 2 if boundary is Boundary.PERIODIC_2D else 3
    cells = lower_cells(side, m)
    offsets = [d for d in np.ndindex(*(3,) * m) if any(v != 1 for v in d)]
    cols = []
    for d in offsets:
        nb = cells + (np.array(d) - 1)
        if boundary is Boundary.PERIODIC_2D:
            nb = nb % side
        idx = _linear(nb, side)
        cols.append(np.where(idx < 0, cells.shape[0], idx))
    out = np.stack(cols, axis=1)
    out.setflags(write=False)
    return out


# launching -----------------------------------------------------------------------


Grids = Union[GridSpec, Sequence[GridSpec]]


def _as_list(grid: Grids) -> List[GridSpec]:
    return [grid] if isinstance(grid, GridSpec) else list(grid)


def _check_dims(grids: List[GridSpec], domain: SimplexSpec):
    if not grids:
        raise ContractViolation("nothing to launch")
    for g in grids:
        if g.m != domain.m:
            raise ContractViolation(f"{g.map_kind.value} grid is {g.m}D, domain is {domain.m}D")


def shuffled_order(total_blocks: int, seed: int) -> np.ndarray:
    return np.random.default_rng(seed).permutation(total_blocks)


@dataclass
class _Schedule:
    blocks: int
    void: int
    threads: int
    cells: np.ndarray  # useful threads only, in execution order


def schedule(grid: Grids, domain: SimplexSpec, order: Optional[Sequence[int]] = None) -> _Schedule:
    """Map every block, filter, expand; cell index of each useful thread in order.

    ``order`` permutes blocks, numbered consecutively across all grids.
    """
    grids = _as_list(grid)
    _check_dims(grids, domain)
    side, m = domain.side, domain.m
    per_grid = []
    blocks = void = threads = 0
    for g in grids:
        coords, valid = kernels.block_targets(g)
        idx = kernels.expand_threads(coords, valid, g.rho, side, m)
        per_grid.append(idx.reshape(coords.shape[0], -1))
        blocks += coords.shape[0]
        void += int((~valid).sum())
        threads += idx.size
    if order is not None:
        order = np.asarray(order)
        if sorted(order.tolist()) != list(range(blocks)):
            raise ContractViolation("order must be a permutation of the launched blocks")
        if len({a.shape[1] for a in per_grid}) != 1:
            raise ContractViolation("block order across grids needs a common rho")
        flat = np.concatenate(per_grid)[order].reshape(-1)
    else:
        flat = np.concatenate([a.reshape(-1) for a in per_grid])
    return _Schedule(blocks, void, threads, flat[flat >= 0])


def _raw_launch(grids: List[GridSpec], domain: SimplexSpec) -> SimReport:
    side, m = domain.side, domain.m
    counts = np.zeros(domain.volume, dtype=np.int64)
    stray_parts = []
    blocks = void = threads = useful = 0
    for g in grids:
        coords, valid = kernels.block_targets(g)
        local = np.indices((g.rho,) * m, dtype=np.int64).reshape(m, -1).T
        cells = (coords[:, None, :m] * g.rho + local[None]).reshape(-1, m)
        idx = _linear(cells, side)
        counts += np.bincount(idx[idx >= 0], minlength=counts.size)
        stray_parts.append(cells[idx < 0])
        blocks += coords.shape[0]
        void += int((~valid).sum())
        threads += cells.shape[0]
        useful += int((idx >= 0).sum())
    stray = {}
    rest = np.concatenate(stray_parts)
    if rest.size:
        uniq, cnt = np.unique(rest, axis=0, return_counts=True)
        stray = {tuple(int(v) for v in u): int(c) for u, c in zip(uniq, cnt)}
    return SimReport(domain, blocks, void, threads, useful, counts, stray)


def launch(
    grid: Grids,
    domain: SimplexSpec,
    kernel: KernelKind = KernelKind.MAP,
    state: Optional[SimplexGridState] = None,
    *,
    points=None,
    steps: int = 1,
    boundary: Optional[Boundary] = None,
    order: Optional[Sequence[int]] = None,
    filter_void: bool = True,
) -> SimReport:
    """Run one kernel over ``domain`` through ``grid`` (a grid or a list of grids).

    ``filter_void=False`` skips both the Void filter and the per-thread filter
    and records every thread; cells outside the domain land in
    ``SimReport.stray``. Only the MAP kernel runs in that mode.
    """
    grids = _as_list(grid)
    _check_dims(grids, domain)
    if not filter_void:
        if kernel is not KernelKind.MAP:
            raise ContractViolation("unfiltered launches only run the MAP kernel")
        return _raw_launch(grids, domain)

    if kernel in (KernelKind.MAP, KernelKind.ACCUM) and order is None:
        # fused path, no per-thread arrays
        counts = np.zeros(domain.volume, dtype=np.int64)
        blocks = void = threads = useful = 0
        for g in grids:
            v, u = kernels.cover_into(g, domain.side, counts)
            blocks += g.blocks
            threads += g.threads
            void += v
            useful += u
        rep = SimReport(domain, blocks, void, threads, useful, counts)
        if kernel is KernelKind.ACCUM:
            rep.kernel_output = _accum(domain, state, counts)
        return rep

    sch = schedule(grids, domain, order)
    counts = np.bincount(sch.cells, minlength=domain.volume).astype(np.int64)
    rep = SimReport(domain, sch.blocks, sch.void, sch.threads, sch.cells.size, counts)
    if kernel is KernelKind.ACCUM:
        rep.kernel_output = _accum(domain, state, counts)
    elif kernel is KernelKind.EDM:
        rep.kernel_output = kernel_edm(points, _state_or_new(domain, state, np.float64), sch.cells)
    elif kernel is KernelKind.CA:
        rep.kernel_output = kernel_ca_run(_required(state), steps, boundary, sch.cells)
    return rep


def _required(state):
    if state is None:
        raise ContractViolation("this kernel needs an input state")
    return state


def _state_or_new(domain, state, dtype):
    if state is None:
        return SimplexGridState.zeros(domain, dtype)
    if state.domain != domain:
        raise ContractViolation(f"state domain {state.domain} does not match launch domain {domain}")
    return state.copy()


def _accum(domain, state, counts):
    out = _state_or_new(domain, state, np.int64)
    out.values += counts.astype(out.values.dtype)
    return out


# kernel bodies ---------------------------------------------------------------------


def kernel_edm(points, state: SimplexGridState, cells: np.ndarray) -> SimplexGridState:
    """Write ``d(p_x, p_{y+1})`` at every scheduled cell ``(x, y)``.

    The squared terms are summed coordinate by coordinate in index order, so
    the value of a cell never depends on the map or the schedule.
    """
    pts = np.asarray(points, dtype=np.float64)
    if state.domain.m != 2:
        raise ContractViolation("EDM runs on 2-simplex domains only")
    if pts.ndim != 2 or pts.shape[0] != state.side + 1:
        raise ContractViolation(
            f"EDM over a side-{state.side} domain needs {state.side + 1} points, got shape {pts.shape}"
        )
    xy = lower_cells(state.side, 2)[cells]
    a, b = pts[xy[:, 0]], pts[xy[:, 1] + 1]
    d2 = np.zeros(cells.size, dtype=np.float64)
    for k in range(pts.shape[1]):
        diff = a[:, k] - b[:, k]
        d2 = d2 + diff * diff
    state.values[cells] = np.sqrt(d2)
    return state


def kernel_ca_run(
    state: SimplexGridState,
    steps: int,
    boundary: Optional[Boundary],
    cells: np.ndarray,
) -> SimplexGridState:
    """``steps`` Life updates; each step evaluates the rule only at scheduled cells."""
    if steps < 0:
        raise ContractViolation("steps must be >= 0")
    expected = Boundary.PERIODIC_2D if state.domain.m == 2 else Boundary.DEAD_3D
    boundary = boundary or expected
    if boundary is not expected:
        raise ContractViolation(f"{boundary.value} boundary does not apply to a {state.domain.m}D domain")
    nb = neighbor_table(state.side, boundary)[cells]
    cur = state.values.astype(np.uint8)
    for _ in range(steps):
        nxt = cur.copy()
        nxt[cells] = _life_at(cur, nb, cells)
        cur = nxt
    return SimplexGridState(state.domain, cur)


def _life_at(cur: np.ndarray, nb: np.ndarray, cells: np.ndarray) -> np.ndarray:
    padded = np.append(cur, np.uint8(0))
    s = padded[nb].sum(axis=1, dtype=np.int64)
    a = cur[cells].astype(bool)
    return ((a & ((s == 2) | (s == 3))) | (~a & (s == 3))).astype(np.uint8)


# verification ------------------------------------------------------------------------


def verify_exact_cover(report: SimReport, domain: Optional[SimplexSpec] = None) -> CoverVerdict:
    """Exact iff every domain cell was visited once and nothing else was visited.

    The witness is the first cell (in linear order) with the wrong
    multiplicity, or failing that the smallest stray coordinate.
    """
    domain = domain or report.domain
    if domain != report.domain:
        raise ContractViolation("report was produced for a different domain")
    bad = kernels.first_not_one(report.counts)
    if bad >= 0:
        c = tuple(int(v) for v in lower_cells(domain.side, domain.m)[bad])
        return CoverVerdict(False, c, int(report.counts[bad]))
    if report.stray:
        c = min(report.stray)
        return CoverVerdict(False, c, report.stray[c])
    return CoverVerdict(True)


def check_cover(grid: Grids, domain: SimplexSpec) -> Tuple[CoverVerdict, int, int]:
    """Verdict plus ``(void_blocks, useful_threads)`` without building a report.

    Uses a 16-bit counter per cell; meant for exhaustive sweeps.
    """
    grids = _as_list(grid)
    _check_dims(grids, domain)
    counts = np.zeros(domain.volume, dtype=np.uint16)
    void = useful = 0
    for g in grids:
        v, u = kernels.cover_into(g, domain.side, counts)
        void += v
        useful += u
    bad = kernels.first_not_one(counts)
    if bad < 0:
        return CoverVerdict(True), void, useful
    c = tuple(int(v) for v in lower_cells(domain.side, domain.m)[bad]) if domain.volume < 1 << 26 else None
    return CoverVerdict(False, c, int(counts[bad])), void, useful


# planning ------------------------------------------------------------------------------


def plan_grids(kind: MapKind, side: int, m: int = 2, rho: int = 1, T: int = 1) -> List[GridSpec]:
    """Smallest launch of ``kind`` with block edge ``rho`` covering a cell domain of ``side``.

    H2D and H3D round the block side up to ``2**k - 1``.
    """
    if side < 1 or rho < 1:
        raise ContractViolation(f"side and rho must be positive, got side={side}, rho={rho}")
    bside = -(-side // rho)
    if kind is MapKind.BB:
        grids = [grid_bb(bside, m)]
    elif m != 2 and kind is not MapKind.H3D:
        raise ContractViolation(f"{kind.value} maps 2-simplices only")
    elif kind is MapKind.H3D:
        if m != 3:
            raise ContractViolation("h3d maps 3-simplices only")
        grids = [grid_for_side(kind, max(1 << (bside.bit_length()), 4) - 1)]
    elif kind is MapKind.H2D:
        grids = [grid_for_side(kind, (1 << bside.bit_length()) - 1)]
    else:
        g = grid_for_side(kind, bside, T)
        grids = g if isinstance(g, list) else [g]
    return [g.with_rho(rho) for g in grids]


def domain_of_side(m: int, side: int) -> SimplexSpec:
    return SimplexSpec.of_side(m, side)
