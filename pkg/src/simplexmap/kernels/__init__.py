"""Hot loops, dispatched to the numba or the numpy implementation.

Both implementations share the same integer arithmetic and produce identical
arrays; :func:`simplexmap._backend.set_backend` or ``SIMPLEXMAP_BACKEND``
picks one.
"""
from .. import _backend
from . import _np
from ._codes import BB, H2D, H2DPAD, H3D, LAMBDA, RB, TRAP

if _backend.HAVE_NUMBA:
    from . import _nb
else:  # pragma: no cover
    _nb = None


def _impl():
    return _nb if _backend.get_backend() == "numba" else _np


def block_targets(grid):
    """``(coords, valid)`` for every block of ``grid`` (inclusive view)."""
    return _impl().block_targets(grid.map_kind.code, grid.kernel_params(), grid.extents, grid.m)


def expand_threads(coords, valid, rho, side, m):
    return _impl().expand_threads(coords, valid, rho, side, m)


def cover_into(grid, side, counts):
    """Fused map + expand + count; returns ``(void_blocks, useful_threads)``."""
    return _impl().cover_into(
        grid.map_kind.code, grid.kernel_params(), grid.extents, grid.m, grid.rho, side, counts
    )


def first_not_one(counts):
    return _impl().first_not_one(counts)


def lambda_fp32_first_bad(stop):
    """First index below ``stop`` whose float32 row differs from the exact row, or -1."""
    return _impl().lambda_fp32_first_bad(stop)


__all__ = [
    "BB", "RB", "LAMBDA", "H2D", "TRAP", "H2DPAD", "H3D",
    "block_targets", "expand_threads", "cover_into", "first_not_one", "lambda_fp32_first_bad",
]
