"""Block-space maps from launchable orthotopes onto simplex block tilings.

Every map works on *blocks*: it is evaluated once per block and the threads of
the block add their local offsets afterwards (see :mod:`simplexmap.simulator`).

Two target conventions are in use, both lower-triangular with ``y`` growing
downwards:

* inclusive view, ``0 <= x <= y <= n-1`` (``z <= y - x`` in 3D): BB, RB, lambda;
* strict view, ``0 <= x < y <= n-1`` (``z < y - x`` in 3D): the H family.

The strict view of side ``n`` is the inclusive view of side ``n - 1`` shifted
one row down; :func:`to_inclusive` applies the shift.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from . import _arith
from .core import ContractViolation, Coord, ceil_log2, is_pow2


class MapKind(enum.Enum):
    BB = "bb"
    RB = "rb"
    LAMBDA2D = "lambda"
    H2D = "h2d"
    H2D_TRAPEZOID = "trapezoid"
    H2D_PADDED = "padded"
    H3D = "h3d"

    @property
    def code(self) -> int:
        return _KIND_CODES[self]

    @property
    def strict(self) -> bool:
        return self in (MapKind.H2D, MapKind.H2D_TRAPEZOID, MapKind.H2D_PADDED, MapKind.H3D)


_KIND_CODES = {k: i for i, k in enumerate(MapKind)}

# maps that may return Void for some launched block
OVER_PROVISIONING = frozenset({MapKind.BB, MapKind.H2D_PADDED, MapKind.H2D_TRAPEZOID, MapKind.H3D})


class _Void:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Void"

    def __bool__(self):
        return False

    def __reduce__(self):
        return (_Void, ())


VOID = _Void()


@dataclass(frozen=True)
class MapOutcome:
    target: object  # tuple of ints or VOID
    level_b: int = 1
    index_q: int = 0

    @property
    def is_void(self) -> bool:
        return self.target is VOID


@dataclass(frozen=True)
class GridSpec:
    """A launchable orthotope of blocks with the map attached to it.

    ``params`` holds the map constants as plain ints, in the order the
    kernels expect them (see :meth:`kernel_params`).
    """

    extents: Tuple[int, ...]
    map_kind: MapKind
    params: Tuple[int, ...]
    rho: int = 1

    def __post_init__(self):
        if self.rho < 1:
            raise ContractViolation(f"block edge rho must be >= 1, got {self.rho}")
        if any(e < 1 for e in self.extents):
            raise ContractViolation(f"grid extents must be positive, got {self.extents}")

    @property
    def m(self) -> int:
        """Dimension of the data domain (the lambda grid itself is 1D)."""
        if self.map_kind is MapKind.BB:
            return self.params[1]
        return 3 if self.map_kind is MapKind.H3D else 2

    @property
    def blocks(self) -> int:
        return math.prod(self.extents)

    @property
    def threads(self) -> int:
        return self.blocks * self.rho ** self.m

    @property
    def side(self) -> int:
        """Inclusive-view side, in blocks, of the tiling this grid targets."""
        k, p = self.map_kind, self.params
        if k in (MapKind.BB, MapKind.RB, MapKind.LAMBDA2D):
            return p[0]
        if k is MapKind.H2D_PADDED:
            return p[1] - 1
        if k is MapKind.H2D_TRAPEZOID:
            return p[5] - 1
        return p[0] - 1

    def with_rho(self, rho: int) -> "GridSpec":
        return GridSpec(self.extents, self.map_kind, self.params, rho)

    def kernel_params(self) -> np.ndarray:
        out = np.zeros(8, dtype=np.int64)
        out[: len(self.params)] = self.params
        return out


@dataclass(frozen=True)
class TrapezoidParams:
    """Constants of one concurrent trapezoid.

    The trapezoid is a strict simplex of ``size`` (a power of two) with a
    ``size x h2`` rectangle hanging below it, placed at ``delta``. Its grid is
    ``size/2`` blocks wide: rows ``[0, size-1)`` hold the simplex, rows up to
    ``h1`` the left half of the rectangle (B1) and the last ``h2`` rows the
    right half (B2). ``n`` is the side of the whole decomposed simplex; cells
    past row ``n - 1`` come only from a padded final trapezoid and are Void.
    """

    delta: Tuple[int, int]
    h1: int
    h2: int
    grid_width: int
    size: int
    n: int
    padded: bool = False

    @property
    def grid(self) -> GridSpec:
        dx, dy = self.delta
        return GridSpec(
            (self.grid_width, self.h1 + 1 + self.h2),
            MapKind.H2D_TRAPEZOID,
            (dx, dy, self.h1, self.h2, self.grid_width, self.n),
        )


def to_inclusive(kind: MapKind, target: Coord) -> Coord:
    if not kind.strict:
        return tuple(target)
    return (target[0], target[1] - 1) + tuple(target[2:])


def _check_omega(omega: Sequence[int], extents: Sequence[int]):
    if len(omega) != len(extents) or any(not 0 <= w < e for w, e in zip(omega, extents)):
        raise ContractViolation(f"block {tuple(omega)} outside grid {tuple(extents)}")


def _require_pow2(n: int, minimum: int, hint: str):
    if not is_pow2(n) or n < minimum:
        raise ContractViolation(f"n={n} must be a power of two >= {minimum}; {hint}")


# bounding box -----------------------------------------------------------------


def grid_bb(n: int, m: int) -> GridSpec:
    if n < 1 or m not in (2, 3):
        raise ContractViolation(f"BB grid needs n >= 1 and m in {{2, 3}}, got n={n}, m={m}")
    return GridSpec((n,) * m, MapKind.BB, (n, m))


def map_bb(omega: Sequence[int], n: int, m: int) -> MapOutcome:
    _check_omega(omega, (n,) * m)
    if m == 2:
        x, y, ok = _arith.bb2(*omega)
    else:
        x, y, _, ok = _arith.bb3(*omega)
    return MapOutcome(tuple(omega) if ok else VOID)


# rectangular box ----------------------------------------------------------------


def grid_rb(n: int) -> GridSpec:
    if n < 2 or n % 2:
        raise ContractViolation(f"RB needs an even n >= 2, got {n}")
    return GridSpec((n // 2, n + 1), MapKind.RB, (n,))


def map_rb_2d(omega: Sequence[int], n: int) -> Coord:
    """Fold the ``(n/2) x (n+1)`` rectangle onto ``{0 <= x <= y <= n-1}``.

    Blocks with ``wx <= wy < n`` keep their place, blocks below the diagonal
    are point-reflected into the right half, and the extra row ``wy = n``
    fills column ``x = n/2``.
    """
    if n < 2 or n % 2:
        raise ContractViolation(f"RB needs an even n >= 2, got {n}")
    _check_omega(omega, (n // 2, n + 1))
    return _arith.rb(omega[0], omega[1], n)


# enumeration map ----------------------------------------------------------------


def grid_lambda(n: int, faithful: bool = False) -> GridSpec:
    if n < 1:
        raise ContractViolation(f"lambda needs n >= 1, got {n}")
    return GridSpec((n * (n + 1) // 2,), MapKind.LAMBDA2D, (n, int(faithful)))


def map_lambda_2d(block_linear_index: int, n: int, faithful: bool = False) -> Coord:
    """Row-major enumeration index -> ``(x, y)`` with ``x <= y``.

    The row comes from the root of ``y(y+1)/2 = index``. By default the
    float64 root is corrected by one integer step, which is exact for every
    index below ``2**53``; ``faithful=True`` keeps the uncorrected float32
    root instead, reproducing its precision failures.
    """
    i = block_linear_index
    if not 0 <= i < n * (n + 1) // 2:
        raise ContractViolation(f"index {i} outside [0, {n * (n + 1) // 2})")
    if faithful:
        y = int(_arith_lambda_fp32(i))
    else:
        y = _arith.tri_row_fix(i, int((math.sqrt(8 * i + 1) - 1) / 2))
    return (i - y * (y + 1) // 2, y)


def _arith_lambda_fp32(i):
    f = np.float32(8.0) * np.float32(i) + np.float32(1.0)
    return np.floor((np.sqrt(f) - np.float32(1.0)) * np.float32(0.5))


def lambda_first_failure(n_max: int) -> Optional[int]:
    """Smallest ``n <= n_max`` whose float32 lambda map misplaces a block, or None."""
    from .kernels import lambda_fp32_first_bad

    i = lambda_fp32_first_bad(n_max * (n_max + 1) // 2)
    if i < 0:
        return None
    # index i is launched by every n whose triangle extends past it
    return _arith.tri_row_fix(i, math.isqrt(2 * i)) + 1


# H, 2-simplices -------------------------------------------------------------------


def grid_h2d(n: int) -> GridSpec:
    _require_pow2(n, 2, "use decompose_trapezoids or grid_h2d_padded for other sizes")
    return GridSpec((n // 2, n - 1), MapKind.H2D, (n,))


def map_h2d(omega: Sequence[int], n: Optional[int] = None) -> MapOutcome:
    if n is not None:
        _check_omega(omega, grid_h2d(n).extents)
    elif len(omega) != 2 or min(omega) < 0:
        raise ContractViolation(f"bad block coordinate {tuple(omega)}")
    x, y, b, q = _arith.h2d(omega[0], omega[1])
    return MapOutcome((x, y), b, q)


def grid_h2d_padded(n: int) -> GridSpec:
    if n < 2:
        raise ContractViolation(f"padded H2D needs n >= 2, got {n}")
    n_grid = 1 << ceil_log2(n)
    return GridSpec((n_grid // 2, n_grid - 1), MapKind.H2D_PADDED, (n_grid, n))


def map_h2d_padded(omega: Sequence[int], n: int) -> MapOutcome:
    g = grid_h2d_padded(n)
    _check_omega(omega, g.extents)
    x, y, b, q = _arith.h2d(omega[0], omega[1])
    return MapOutcome((x, y) if y <= n - 1 else VOID, b, q)


def decompose_trapezoids(n: int, T: int) -> Tuple[TrapezoidParams, ...]:
    """Greedy power-of-two decomposition of the strict simplex of side ``n``.

    Bands are peeled from below: with ``r`` cells of side left, a simplex of
    ``2**floor(log2 r)`` plus the rectangle under it forms the next
    trapezoid. As soon as ``2**ceil(log2 r) - r < T`` the remainder is instead
    covered from above by one padded simplex. Empty pieces (side 1) are
    dropped.
    """
    if n < 2 or T < 1:
        raise ContractViolation(f"decompose_trapezoids needs n >= 2 and T >= 1, got n={n}, T={T}")
    pieces = []
    start = 0
    r = n
    while r > 1:
        up = 1 << ceil_log2(r)
        if up - r < T:
            size, h, padded = up, 0, up != r
        else:
            size = 1 << (r.bit_length() - 1)
            h, padded = r - size, False
        pieces.append(
            TrapezoidParams(
                delta=(start, start),
                h1=size - 2 + h,
                h2=h,
                grid_width=size // 2,
                size=size,
                n=n,
                padded=padded,
            )
        )
        if h == 0:
            break
        start += size
        r -= size
    return tuple(pieces)


def map_h2d_trapezoid(omega: Sequence[int], p: TrapezoidParams) -> MapOutcome:
    _check_omega(omega, p.grid.extents)
    x, y, b, q = _arith.trapezoid(omega[0], omega[1], p.delta[0], p.delta[1], p.h1, p.h2, p.grid_width)
    return MapOutcome((x, y) if y <= p.n - 1 else VOID, b, q)


# H, 3-simplices -------------------------------------------------------------------


def grid_h3d(n: int) -> GridSpec:
    """``(n/2) x (n/2) x ceil(3(n-1)/4)`` blocks: the major cube plus one slab.

    The displaced major cube fills the bottom ``n/2`` layers; every smaller
    stack level sits in the ``n/4``-high slab on top of it, laid out like the
    2D super-orthotope rows.
    """
    _require_pow2(n, 4, "the 3D map has no general-n variant")
    return GridSpec((n // 2, n // 2, -(-3 * (n - 1) // 4)), MapKind.H3D, (n,))


def map_h3d(omega: Sequence[int], n: int) -> MapOutcome:
    """H3D in the strict view ``{x < y <= n-1, 0 <= z < y - x}``.

    The major cube (``wz < n/2``) lands on the level-``n/2`` square at
    ``(wx, wy + n/2, wz)``; slab blocks use the 2D map on ``(wx, wy)`` with
    ``z = wz - n/2``, and are Void above their cube or in the slab's last row.
    Cube cells above the ``z = y - x`` surface are point-reflected in ``x, y``
    within their square and complemented in ``z`` to ``2b - 1 - z``.
    """
    _check_omega(omega, grid_h3d(n).extents)
    x, y, z, b, q, void = _arith.h3d(omega[0], omega[1], omega[2], n)
    return MapOutcome(VOID if void else (x, y, z), b, q)


# dispatch -------------------------------------------------------------------------


def grid_for_side(kind: MapKind, side: int, T: int = 1):
    """Smallest grid (or trapezoid list) of ``kind`` covering inclusive ``side``.

    Raises :class:`ContractViolation` for kinds that cannot cover ``side``
    (H2D and H3D need ``side + 1`` to be a power of two).
    """
    if side < 1:
        raise ContractViolation(f"side must be >= 1, got {side}")
    if kind is MapKind.BB:
        raise ContractViolation("BB needs the dimension; call grid_bb(side, m)")
    if kind is MapKind.RB:
        return grid_rb(side + side % 2)
    if kind is MapKind.LAMBDA2D:
        return grid_lambda(side)
    if kind is MapKind.H2D:
        return grid_h2d(side + 1)
    if kind is MapKind.H2D_PADDED:
        return grid_h2d_padded(side + 1)
    if kind is MapKind.H2D_TRAPEZOID:
        return [p.grid for p in decompose_trapezoids(side + 1, T)]
    return grid_h3d(side + 1)


def map_block(grid: GridSpec, omega: Sequence[int]) -> MapOutcome:
    """Evaluate the grid's map at one block; target left in the map's own view."""
    k, p = grid.map_kind, grid.params
    if k is MapKind.BB:
        return map_bb(omega, p[0], p[1])
    if k is MapKind.RB:
        return MapOutcome(map_rb_2d(omega, p[0]))
    if k is MapKind.LAMBDA2D:
        _check_omega(omega, grid.extents)
        return MapOutcome(map_lambda_2d(omega[0], p[0], bool(p[1])))
    if k is MapKind.H2D:
        return map_h2d(omega, p[0])
    if k is MapKind.H2D_PADDED:
        return map_h2d_padded(omega, p[1])
    if k is MapKind.H2D_TRAPEZOID:
        dx, dy, h1, h2, gx, n = p
        tp = TrapezoidParams((dx, dy), h1, h2, gx, 2 * gx, n)
        return map_h2d_trapezoid(omega, tp)
    return map_h3d(omega, p[0])
