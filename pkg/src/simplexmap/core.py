"""Simplex geometry, volumes and the bit-level helpers the maps rely on.

Two conventions meet here and it pays to keep them apart:

* :func:`simplex_contains` is the closed inequality ``x_i >= 0, sum(x) <= n``
  taken at face value for a :class:`SimplexSpec` with bound ``n``.
* :func:`simplex_volume` ``(n, m)`` is the simplicial polytopic number
  ``C(n+m-1, m)``, i.e. the number of lattice points whose coordinate sum is
  at most ``n - 1``.

A spec with bound ``n`` therefore has ``n + 1`` cells along each axis and holds
``simplex_volume(n + 1, m)`` cells; :attr:`SimplexSpec.side` names that
``n + 1``.

Maps and the simulator address cells through a *lower-triangular view* of
side ``s``: ``0 <= x <= y <= s-1`` in 2D, plus ``0 <= z <= y - x`` in 3D. The
view is an affine image of the canonical corner simplex (see
:func:`to_lower` / :func:`from_lower`) and is linearized row by row.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Tuple

from . import _arith

WORD_BITS = 64
ACCUMULATOR_BITS = 128

Coord = Tuple[int, ...]


class ContractViolation(ValueError):
    """An argument breaks an operation's precondition."""


class RangeError(OverflowError):
    """A count does not fit the fixed-width accumulator."""


class Orientation(enum.Enum):
    ORIGIN_ORTHOGONAL_CORNER = "origin-orthogonal-corner"


@dataclass(frozen=True)
class SimplexSpec:
    m: int
    n: int
    orientation: Orientation = Orientation.ORIGIN_ORTHOGONAL_CORNER

    def __post_init__(self):
        if self.m < 1:
            raise ContractViolation(f"dimension must be >= 1, got {self.m}")
        if self.n < 0:
            raise ContractViolation(f"bound must be >= 0, got {self.n}")

    @classmethod
    def of_side(cls, m: int, side: int) -> "SimplexSpec":
        """Spec with ``side`` cells along each axis."""
        if side < 1:
            raise ContractViolation(f"side must be >= 1, got {side}")
        return cls(m, side - 1)

    @property
    def side(self) -> int:
        return self.n + 1

    @property
    def volume(self) -> int:
        return simplex_volume(self.side, self.m)


def _check_dim(spec: SimplexSpec, x: Sequence[int]):
    if len(x) != spec.m:
        raise ContractViolation(f"coordinate {tuple(x)} has {len(x)} components, expected {spec.m}")


def simplex_contains(spec: SimplexSpec, x: Sequence[int]) -> bool:
    _check_dim(spec, x)
    return all(c >= 0 for c in x) and sum(x) <= spec.n


def simplex_volume(n: int, m: int) -> int:
    """``C(n+m-1, m)``, exact.

    Raises :class:`RangeError` when the count does not fit 128 bits; with
    ``m = 8`` that happens just below ``n = 2**20``.
    """
    if n < 1 or m < 1:
        raise ContractViolation(f"simplex_volume needs n, m >= 1, got n={n}, m={m}")
    v = 1
    for i in range(m):
        # running value is C(n+i, i+1): the product of i+1 consecutive
        # integers is divisible by (i+1)!
        v = v * (n + i) // (i + 1)
    if v >> ACCUMULATOR_BITS:
        raise RangeError(f"simplex_volume({n}, {m}) exceeds {ACCUMULATOR_BITS} bits")
    return v


def bb_waste_fraction(m: int) -> Fraction:
    """Asymptotic fraction of a bounding box lying outside the simplex."""
    if m < 1:
        raise ContractViolation(f"m must be >= 1, got {m}")
    f = math.factorial(m)
    if f >> ACCUMULATOR_BITS:
        raise RangeError(f"{m}! exceeds {ACCUMULATOR_BITS} bits")
    return Fraction(f - 1)


def _check_word(v):
    if isinstance(v, bool) or not isinstance(v, int):
        raise ContractViolation(f"expected an integer, got {v!r}")
    if v < 1:
        raise ContractViolation(f"argument must be >= 1, got {v}")
    if v >> WORD_BITS:
        raise RangeError(f"{v} does not fit a {WORD_BITS}-bit word")


def count_leading_zeros(v: int) -> int:
    _check_word(v)
    return _arith.clz64(v)


def floor_log2(v: int) -> int:
    """``floor(log2(v))`` as ``word - 1 - clz(v)``."""
    _check_word(v)
    return WORD_BITS - 1 - _arith.clz64(v)


def pow2_floor_log2(v: int) -> int:
    return 1 << floor_log2(v)


def ceil_log2(v: int) -> int:
    _check_word(v)
    return 0 if v == 1 else floor_log2(v - 1) + 1


def is_pow2(v: int) -> bool:
    return v >= 1 and v & (v - 1) == 0


# lower-triangular view ------------------------------------------------------


def to_lower(x: Sequence[int], spec: SimplexSpec) -> Coord:
    """Canonical corner coordinates -> lower view of side ``spec.side``."""
    _check_dim(spec, x)
    if spec.m == 2:
        return (x[0], spec.n - x[1])
    if spec.m == 3:
        return (x[0], spec.n - x[1], x[2])
    raise ContractViolation("the lower view exists for m in {2, 3}")


def from_lower(c: Sequence[int], spec: SimplexSpec) -> Coord:
    if spec.m == 2:
        return (c[0], spec.n - c[1])
    if spec.m == 3:
        return (c[0], spec.n - c[1], c[2])
    raise ContractViolation("the lower view exists for m in {2, 3}")


def lower_contains(c: Sequence[int], side: int) -> bool:
    if len(c) == 2:
        x, y = c
        return 0 <= x <= y < side
    if len(c) == 3:
        x, y, z = c
        return 0 <= x <= y < side and 0 <= z <= y - x
    raise ContractViolation(f"lower view coordinates have 2 or 3 components, got {tuple(c)}")


def lower_index(c: Sequence[int], side: int) -> int:
    """Row-major linear index of a lower-view cell; rejects non-members."""
    if not lower_contains(c, side):
        raise ContractViolation(f"{tuple(c)} is outside the lower view of side {side}")
    if len(c) == 2:
        return _arith.tri_index(c[0], c[1])
    return _arith.tet_index(c[0], c[1], c[2])


def lower_coord(index: int, side: int, m: int) -> Coord:
    """Inverse of :func:`lower_index`."""
    size = simplex_volume(side, m)
    if not 0 <= index < size:
        raise ContractViolation(f"index {index} outside [0, {size})")
    if m == 2:
        y = (math.isqrt(8 * index + 1) - 1) // 2
        return (index - y * (y + 1) // 2, y)
    if m != 3:
        raise ContractViolation("the lower view exists for m in {2, 3}")
    lo, hi = 0, side - 1
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if mid * (mid + 1) * (mid + 2) // 6 <= index:
            lo = mid
        else:
            hi = mid - 1
    y = lo
    rest = index - y * (y + 1) * (y + 2) // 6
    x = 0
    while rest > y - x:
        rest -= y - x + 1
        x += 1
    return (x, y, rest)
