"""Vectorized numpy path: the same arithmetic applied to whole index arrays."""
import numpy as np

from .. import _arith
from ._codes import BB, H2D, H2DPAD, H3D, LAMBDA, RB, TRAP


def block_omegas(extents):
    """All block coordinates of a grid, ``(B, 3)``, first axis slowest."""
    axes = np.indices(tuple(extents), dtype=np.int64).reshape(len(extents), -1)
    out = np.zeros((axes.shape[1], 3), dtype=np.int64)
    out[:, : len(extents)] = axes.T
    return out


def lambda_rows(i, faithful):
    if faithful:
        f = np.float32(8.0) * i.astype(np.float32) + np.float32(1.0)
        return np.floor((np.sqrt(f) - np.float32(1.0)) * np.float32(0.5)).astype(np.int64)
    y = np.floor((np.sqrt(8.0 * i + 1.0) - 1.0) / 2.0).astype(np.int64)
    return _arith.tri_row_fix(i, y)


def lambda_fp32_first_bad(stop, chunk=1 << 22):
    for lo in range(0, stop, chunk):
        i = np.arange(lo, min(stop, lo + chunk), dtype=np.int64)
        bad = np.flatnonzero(lambda_rows(i, True) != lambda_rows(i, False))
        if bad.size:
            return int(i[bad[0]])
    return -1


def block_targets(kind, p, extents, m):
    """Inclusive-view target of every block plus its non-Void flag.

    Returns ``coords`` of shape ``(B, 3)`` (unused axes zero) and ``valid``.
    Strict-view maps are shifted one row up here so that every caller sees a
    single convention.
    """
    w = block_omegas(extents)
    wx, wy, wz = w[:, 0], w[:, 1], w[:, 2]
    coords = np.zeros_like(w)
    valid = np.ones(w.shape[0], dtype=bool)
    if kind == BB:
        coords[:] = w
        valid = _arith.bb2(wx, wy)[2] if m == 2 else _arith.bb3(wx, wy, wz)[3]
    elif kind == RB:
        coords[:, 0], coords[:, 1] = _arith.rb(wx, wy, p[0])
    elif kind == LAMBDA:
        y = lambda_rows(wx, bool(p[1]))
        coords[:, 0] = wx - y * (y + 1) // 2
        coords[:, 1] = y
    elif kind in (H2D, H2DPAD, TRAP):
        if kind == TRAP:
            x, y, _, _ = _arith.trapezoid(wx, wy, p[0], p[1], p[2], p[3], p[4])
            valid = y <= p[5] - 1
        else:
            x, y, _, _ = _arith.h2d(wx, wy)
            if kind == H2DPAD:
                valid = y <= p[1] - 1
        coords[:, 0], coords[:, 1] = x, y - 1
    elif kind == H3D:
        x, y, z, _, _, void = _arith.h3d(wx, wy, wz, p[0])
        coords[:, 0], coords[:, 1], coords[:, 2] = x, y - 1, z
        valid = void == 0
    else:
        raise ValueError(f"unknown map code {kind}")
    return coords, np.asarray(valid, dtype=bool)


def _local_offsets(rho, m):
    return np.indices((rho,) * m, dtype=np.int64).reshape(m, -1).T


def expand_threads(coords, valid, rho, side, m):
    """Cell index of every thread of every block, ``-1`` when filtered.

    Threads are laid out block by block (in ``coords`` order), local offsets
    row-major inside a block. Void blocks and threads outside the lower view
    of ``side`` both yield ``-1``.
    """
    local = _local_offsets(rho, m)
    cells = coords[:, None, :m] * rho + local[None, :, :]
    x, y = cells[..., 0], cells[..., 1]
    inside = (x >= 0) & (x <= y) & (y < side) & valid[:, None]
    if m == 2:
        idx = _arith.tri_index(x, y)
    else:
        z = cells[..., 2]
        inside &= (z >= 0) & (z <= y - x)
        idx = _arith.tet_index(x, y, z)
    return np.where(inside, idx, -1).reshape(-1)


def cover_into(kind, p, extents, m, rho, side, counts):
    """Add every useful thread of the grid into ``counts``.

    Returns ``(void_blocks, useful_threads)``.
    """
    coords, valid = block_targets(kind, p, extents, m)
    idx = expand_threads(coords, valid, rho, side, m)
    idx = idx[idx >= 0]
    counts += np.bincount(idx, minlength=counts.size).astype(counts.dtype)
    return int((~valid).sum()), int(idx.size)


def first_not_one(counts):
    bad = np.flatnonzero(counts != 1)
    return int(bad[0]) if bad.size else -1
