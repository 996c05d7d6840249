"""Block-space maps onto triangular and tetrahedral domains, plus an exact simulator.

Submodules: :mod:`core` (geometry, volumes, bit helpers), :mod:`maps`,
:mod:`analysis` (self-similar set volumes), :mod:`simulator`, :mod:`report`
and :mod:`cli`.
"""
from ._backend import get_backend, set_backend, use_backend
from .core import (
    ContractViolation,
    Orientation,
    RangeError,
    SimplexSpec,
    bb_waste_fraction,
    count_leading_zeros,
    floor_log2,
    pow2_floor_log2,
    simplex_contains,
    simplex_volume,
)
from .maps import (
    VOID,
    GridSpec,
    MapKind,
    MapOutcome,
    TrapezoidParams,
    decompose_trapezoids,
    grid_bb,
    grid_h2d,
    grid_h2d_padded,
    grid_h3d,
    grid_lambda,
    grid_rb,
    map_bb,
    map_h2d,
    map_h2d_padded,
    map_h2d_trapezoid,
    map_h3d,
    map_lambda_2d,
    map_rb_2d,
)
from .simulator import (
    Boundary,
    CoverVerdict,
    KernelKind,
    SimplexGridState,
    SimReport,
    launch,
    verify_exact_cover,
)

__version__ = "0.1.0"
