"""Compiled path: numba loops over the shared arithmetic in :mod:`_arith`.

The functions of ``_arith`` are re-created against a private globals dict and
jitted one by one, so that their calls to each other resolve to compiled
versions while the Python originals stay untouched.
"""
import types

import numba
import numpy as np
from numba import prange

from .. import _arith
from ._codes import BB, H2D, H2DPAD, LAMBDA, RB, TRAP

_ORDER = (
    "clz64", "floor_log2", "pow2_floor", "h2d", "trapezoid", "h3d",
    "bb2", "bb3", "rb", "tri_row_fix", "tri_index", "tet_index",
)
_ns = {"__name__": __name__}
for _name in _ORDER:
    _f = getattr(_arith, _name)
    _ns[_name] = numba.njit(types.FunctionType(_f.__code__, _ns, _name, _f.__defaults__))

floor_log2 = _ns["floor_log2"]
h2d = _ns["h2d"]
trapezoid = _ns["trapezoid"]
h3d = _ns["h3d"]
rb = _ns["rb"]
tri_row_fix = _ns["tri_row_fix"]
tri_index = _ns["tri_index"]
tet_index = _ns["tet_index"]


@numba.njit
def _lambda_row(i, faithful):
    if faithful:
        f = np.float32(8.0) * np.float32(i) + np.float32(1.0)
        return np.int64(np.floor((np.sqrt(f) - np.float32(1.0)) * np.float32(0.5)))
    y = np.int64(np.floor((np.sqrt(8.0 * i + 1.0) - 1.0) / 2.0))
    return tri_row_fix(i, y)


@numba.njit
def _target(kind, p, wx, wy, wz):
    """Inclusive-view target ``(x, y, z, valid)`` of one block."""
    if kind == BB:
        if p[1] == 2:
            return wx, wy, 0, wx <= wy
        return wx, wy, wz, wx <= wy and wz <= wy - wx
    if kind == RB:
        x, y = rb(wx, wy, p[0])
        return x, y, 0, True
    if kind == LAMBDA:
        y = _lambda_row(wx, p[1] != 0)
        return wx - y * (y + 1) // 2, y, 0, True
    if kind == H2D:
        x, y, b, q = h2d(wx, wy)
        return x, y - 1, 0, True
    if kind == H2DPAD:
        x, y, b, q = h2d(wx, wy)
        return x, y - 1, 0, y <= p[1] - 1
    if kind == TRAP:
        x, y, b, q = trapezoid(wx, wy, p[0], p[1], p[2], p[3], p[4])
        return x, y - 1, 0, y <= p[5] - 1
    x, y, z, b, q, void = h3d(wx, wy, wz, p[0])
    return x, y - 1, z, void == 0


@numba.njit(parallel=True, cache=True)
def _block_targets(kind, p, e0, e1, e2, coords, valid):
    per_x = e1 * e2
    for a in prange(e0):
        for bb in range(e1):
            for c in range(e2):
                i = a * per_x + bb * e2 + c
                x, y, z, ok = _target(kind, p, a, bb, c)
                coords[i, 0] = x
                coords[i, 1] = y
                coords[i, 2] = z
                valid[i] = ok


def block_targets(kind, p, extents, m):
    e = tuple(extents) + (1,) * (3 - len(extents))
    total = e[0] * e[1] * e[2]
    coords = np.empty((total, 3), dtype=np.int64)
    valid = np.empty(total, dtype=np.bool_)
    _block_targets(kind, p, e[0], e[1], e[2], coords, valid)
    return coords, valid


@numba.njit(inline="always")
def _cell_index(x, y, z, side, m):
    if x < 0 or x > y or y >= side:
        return -1
    if m == 2:
        return tri_index(x, y)
    if z < 0 or z > y - x:
        return -1
    return tet_index(x, y, z)


@numba.njit(parallel=True, cache=True)
def _expand(coords, valid, rho, side, m, out):
    per = rho ** m
    rz = rho if m == 3 else 1
    for blk in prange(coords.shape[0]):
        base = blk * per
        if not valid[blk]:
            for t in range(per):
                out[base + t] = -1
            continue
        x0 = coords[blk, 0] * rho
        y0 = coords[blk, 1] * rho
        z0 = coords[blk, 2] * rho
        t = 0
        for i in range(rho):
            for j in range(rho):
                for k in range(rz):
                    out[base + t] = _cell_index(x0 + i, y0 + j, z0 + k, side, m)
                    t += 1


def expand_threads(coords, valid, rho, side, m):
    out = np.empty(coords.shape[0] * rho ** m, dtype=np.int64)
    _expand(coords, valid, rho, side, m, out)
    return out


@numba.njit(cache=True)
def _cover_into(kind, p, e0, e1, e2, m, rho, side, counts):
    void_blocks = 0
    useful = 0
    rz = rho if m == 3 else 1
    # y outermost: the stack level of the H maps depends on wy only and is
    # hoisted out of the inner loops
    for bb in range(e1):
        for a in range(e0):
            for c in range(e2):
                x, y, z, ok = _target(kind, p, a, bb, c)
                if not ok:
                    void_blocks += 1
                    continue
                for i in range(rho):
                    for j in range(rho):
                        for k in range(rz):
                            idx = _cell_index(x * rho + i, y * rho + j, z * rho + k, side, m)
                            if idx >= 0:
                                counts[idx] += 1
                                useful += 1
    return void_blocks, useful


@numba.njit(cache=True)
def _cover_h2d_rows(dx, dy, h1, h2, gx, ylimit, e0, e1, side, counts):
    # rho = 1 fast path for the H2D family: for a fixed wy the blocks of one
    # orthotope index q land on consecutive cells of a single row
    void_blocks = 0
    useful = 0
    for wy in range(e1):
        lg = floor_log2(wy + 1)
        b = 1 << lg
        k = 1 if wy > h1 else 0
        q = 0
        while q * b < e0:
            run = min(b, e0 - q * b)
            x0 = dx + 2 * q * b + k * gx
            y = dy + wy + 2 * q * b + 1 - k * h2
            q += 1
            if y > ylimit:
                void_blocks += run
                continue
            yi = y - 1
            if yi < 0 or yi >= side:
                continue
            lo = max(x0, 0)
            hi = min(x0 + run, yi + 1)
            base = yi * (yi + 1) // 2
            for x in range(lo, hi):
                counts[base + x] += 1
            useful += max(hi - lo, 0)
    return void_blocks, useful


@numba.njit(cache=True)
def _cover_rb(n, side, counts):
    # rho = 1 fast path for RB: no thread loop, one membership test per block
    useful = 0
    for wy in range(n + 1):
        for wx in range(n // 2):
            x, y = rb(wx, wy, n)
            if 0 <= x <= y < side:
                counts[y * (y + 1) // 2 + x] += 1
                useful += 1
    return 0, useful


def cover_into(kind, p, extents, m, rho, side, counts):
    e = tuple(extents) + (1,) * (3 - len(extents))
    if rho == 1 and kind == RB:
        v, u = _cover_rb(p[0], side, counts)
        return int(v), int(u)
    if rho == 1 and kind in (H2D, H2DPAD, TRAP):
        big = np.iinfo(np.int64).max
        if kind == TRAP:
            args = (p[0], p[1], p[2], p[3], p[4], p[5] - 1)
        else:
            args = (0, 0, big, 0, 0, p[1] - 1 if kind == H2DPAD else big)
        v, u = _cover_h2d_rows(*args, e[0], e[1], side, counts)
        return int(v), int(u)
    v, u = _cover_into(kind, p, e[0], e[1], e[2], m, rho, side, counts)
    return int(v), int(u)


@numba.njit(cache=True)
def _first_not_one(counts):
    for i in range(counts.size):
        if counts[i] != 1:
            return i
    return -1


def first_not_one(counts):
    return int(_first_not_one(counts))


@numba.njit(cache=True)
def _lambda_fp32_first_bad(stop):
    for i in range(stop):
        if _lambda_row(i, True) != _lambda_row(i, False):
            return i
    return -1


def lambda_fp32_first_bad(stop):
    return int(_lambda_fp32_first_bad(stop))
