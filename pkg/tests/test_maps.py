import math
from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

from simplexmap.core import ContractViolation, simplex_volume
from simplexmap.maps import (
    OVER_PROVISIONING,
    VOID,
    MapKind,
    decompose_trapezoids,
    grid_bb,
    grid_for_side,
    grid_h2d,
    grid_h2d_padded,
    grid_h3d,
    grid_lambda,
    grid_rb,
    lambda_first_failure,
    map_bb,
    map_block,
    map_h2d,
    map_h2d_padded,
    map_h2d_trapezoid,
    map_h3d,
    map_lambda_2d,
    map_rb_2d,
    to_inclusive,
)


def h2d_oracle(wx, wy):
    b = 1 << ((wy + 1).bit_length() - 1)
    q = wx // b
    return (wx + q * b, wy + 2 * q * b + 1)


def strict_2d(n):
    return {(x, y) for y in range(n) for x in range(y)}


def strict_3d(n):
    return {(x, y, z) for y in range(n) for x in range(y) for z in range(y - x)}


def all_blocks(extents):
    if len(extents) == 2:
        return [(a, b) for a in range(extents[0]) for b in range(extents[1])]
    return [(a, b, c) for a in range(extents[0]) for b in range(extents[1]) for c in range(extents[2])]


# BB --------------------------------------------------------------------------------


def test_bb_examples():
    assert map_bb((1, 3), 8, 2).target == (1, 3)
    assert map_bb((7, 2), 8, 2).target is VOID


def test_bb_3d_non_void_count():
    hits = [w for w in all_blocks((8, 8, 8)) if not map_bb(w, 8, 3).is_void]
    assert len(hits) == simplex_volume(8, 3) == 120


def test_bb_rejects_out_of_grid():
    with pytest.raises(ContractViolation):
        map_bb((8, 0), 8, 2)


# RB --------------------------------------------------------------------------------


def test_rb_examples():
    assert map_rb_2d((2, 5), 8) == (2, 5)
    assert map_rb_2d((3, 1), 8) == (5, 6)


@pytest.mark.parametrize("n", [2, 4, 8, 10, 64, 130])
def test_rb_bijection(n):
    image = Counter(map_rb_2d(w, n) for w in all_blocks(grid_rb(n).extents))
    assert set(image) == {(x, y) for y in range(n) for x in range(y + 1)}
    assert set(image.values()) == {1}
    assert sum(image.values()) == n * (n + 1) // 2


def test_rb_contract():
    with pytest.raises(ContractViolation):
        map_rb_2d((0, 0), 7)
    with pytest.raises(ContractViolation):
        map_rb_2d((4, 0), 8)


# lambda -----------------------------------------------------------------------------


def test_lambda_examples():
    assert map_lambda_2d(0, 4) == (0, 0)
    assert map_lambda_2d(3, 4) == (0, 2)
    with pytest.raises(ContractViolation):
        map_lambda_2d(10, 4)


def test_lambda_round_trip_small_exhaustive():
    n = 300
    seen = set()
    for i in range(n * (n + 1) // 2):
        x, y = map_lambda_2d(i, n)
        assert 0 <= x <= y < n
        assert y * (y + 1) // 2 + x == i
        seen.add((x, y))
    assert len(seen) == n * (n + 1) // 2


@given(st.integers(0, 2 ** 53 - 1))
def test_lambda_exact_below_2_53(i):
    n = math.isqrt(2 * i) + 2
    x, y = map_lambda_2d(i, n)
    assert y * (y + 1) // 2 + x == i and 0 <= x <= y


def test_lambda_faithful_reports_first_failure():
    # float32 is exact on small triangles; the failure onset is reported, not pinned
    for i in range(2016):
        assert map_lambda_2d(i, 63, faithful=True) == map_lambda_2d(i, 63)
    onset = lambda_first_failure(2 ** 13)
    assert onset is None or 64 <= onset <= 2 ** 13
    if onset is not None:
        # the first misplaced block lies in row onset - 1
        n = onset
        bad = [
            i for i in range((n - 1) * n // 2, n * (n + 1) // 2)
            if map_lambda_2d(i, n, faithful=True) != map_lambda_2d(i, n)
        ]
        assert bad


# H2D -----------------------------------------------------------------------------


@pytest.mark.parametrize(
    "omega,target,b,q",
    [((0, 0), (0, 1), 1, 0), ((3, 0), (6, 7), 1, 3), ((2, 1), (4, 6), 2, 1), ((1, 2), (1, 3), 2, 0)],
)
def test_h2d_examples(omega, target, b, q):
    out = map_h2d(omega, 8)
    assert (out.target, out.level_b, out.index_q) == (target, b, q)


@pytest.mark.parametrize("n,extents,blocks", [(8, (4, 7), 28), (2, (1, 1), 1), (1024, (512, 1023), 523776)])
def test_h2d_grid_examples(n, extents, blocks):
    g = grid_h2d(n)
    assert g.extents == extents and g.blocks == blocks == simplex_volume(n - 1, 2)


def test_h2d_grid_rejects_non_pow2():
    with pytest.raises(ContractViolation, match="decompose_trapezoids"):
        grid_h2d(12)
    with pytest.raises(ContractViolation):
        grid_h2d(1)


@pytest.mark.parametrize("k", range(1, 9))
def test_h2d_bijection(k):
    n = 2 ** k
    outs = [map_h2d(w, n) for w in all_blocks(grid_h2d(n).extents)]
    image = Counter(o.target for o in outs)
    assert set(image) == strict_2d(n) and set(image.values()) == {1}


@given(st.integers(0, 2 ** 20), st.integers(0, 2 ** 20))
def test_h2d_matches_formula_and_level_invariants(wx, wy):
    out = map_h2d((wx, wy))
    assert out.target == h2d_oracle(wx, wy)
    b, q = out.level_b, out.index_q
    assert b & (b - 1) == 0 and q * b <= wx
    assert out.target[0] < out.target[1]


# padded ---------------------------------------------------------------------------


def test_padded_examples():
    assert grid_h2d_padded(8).extents == grid_h2d(8).extents
    assert grid_h2d_padded(9).extents == (8, 15)


def test_padded_ratio_tends_to_four():
    n = 2 ** 12 + 1
    ratio = grid_h2d_padded(n).blocks / simplex_volume(n - 1, 2)
    assert 3.99 < ratio < 4.0


@pytest.mark.parametrize("n", [2, 3, 5, 9, 17, 33, 100])
def test_padded_cover(n):
    g = grid_h2d_padded(n)
    outs = [map_h2d_padded(w, n) for w in all_blocks(g.extents)]
    image = Counter(o.target for o in outs if not o.is_void)
    assert set(image) == strict_2d(n) and set(image.values()) == {1}
    assert sum(o.is_void for o in outs) == g.blocks - n * (n - 1) // 2


# trapezoids -------------------------------------------------------------------------


def trapezoid_oracle(w, p):
    wx, wy = w
    k = 1 if wy > p.h1 else 0
    x, y = h2d_oracle(wx, wy)
    return (p.delta[0] + x + k * p.grid_width, p.delta[1] + y - k * p.h2)


def test_trapezoid_n27_band_sizes():
    pieces = decompose_trapezoids(27, 1)
    assert [(p.size, p.h2, p.delta) for p in pieces] == [(16, 11, (0, 0)), (8, 3, (16, 16)), (2, 1, (24, 24))]
    assert all(p.grid.extents[1] == p.h1 + p.h2 + 1 for p in pieces)


@pytest.mark.parametrize("T", [1, 4, 16, 100])
def test_trapezoid_power_of_two_is_single_h2d(T):
    (p,) = decompose_trapezoids(16, T)
    assert p.grid.extents == grid_h2d(16).extents
    for w in all_blocks(p.grid.extents):
        assert map_h2d_trapezoid(w, p).target == map_h2d(w).target


def test_trapezoid_mask_boundary_row_belongs_to_simplex():
    p = decompose_trapezoids(27, 1)[0]
    on = map_h2d_trapezoid((0, p.h1), p)
    below = map_h2d_trapezoid((0, p.h1 + 1), p)
    assert on.target == (0, p.h1 + 1)
    assert below.target == (p.grid_width, p.h1 + 2 - p.h2)


@pytest.mark.parametrize("T", [1, 2, 3, 4, 16])
def test_trapezoid_exact_cover_small_n(T):
    for n in range(2, 70):
        pieces = decompose_trapezoids(n, T)
        assert len(pieces) <= math.ceil(math.log2(n))
        image = Counter()
        for p in pieces:
            for w in all_blocks(p.grid.extents):
                out = map_h2d_trapezoid(w, p)
                assert out.is_void or out.target == trapezoid_oracle(w, p)
                if not out.is_void:
                    image[out.target] += 1
        assert set(image) == strict_2d(n), (n, T)
        assert set(image.values()) == {1}, (n, T)


def test_trapezoid_void_only_in_padded_piece():
    for n in range(2, 70):
        for p in decompose_trapezoids(n, 4):
            voids = sum(map_h2d_trapezoid(w, p).is_void for w in all_blocks(p.grid.extents))
            assert (voids > 0) == p.padded


def test_trapezoid_rejects_bad_args():
    with pytest.raises(ContractViolation):
        decompose_trapezoids(1, 1)
    with pytest.raises(ContractViolation):
        decompose_trapezoids(10, 0)


# H3D ------------------------------------------------------------------------------------


@pytest.mark.parametrize("n,extents", [(4, (2, 2, 3)), (8, (4, 4, 6)), (64, (32, 32, 48))])
def test_h3d_grid_examples(n, extents):
    assert grid_h3d(n).extents == extents


def test_h3d_major_cube_origin():
    # strict view with the n/2 offset; see the conformance note in the README
    assert map_h3d((0, 0, 0), 8).target == (0, 4, 0)


# grid minus C(n+1, 3) useful tiles, frozen from the counting oracle
H3D_VOID = {4: 2, 8: 12, 16: 88, 32: 688}


@pytest.mark.parametrize("n", [4, 8, 16, 32])
def test_h3d_exact_cover(n):
    g = grid_h3d(n)
    outs = [map_h3d(w, n) for w in all_blocks(g.extents)]
    image = Counter(o.target for o in outs if not o.is_void)
    assert set(image) == strict_3d(n)
    assert set(image.values()) == {1}
    voids = sum(o.is_void for o in outs)
    assert voids == H3D_VOID[n] == g.blocks - math.comb(n + 1, 3)
    assert all(o.level_b & (o.level_b - 1) == 0 for o in outs)


def test_h3d_n64_counts():
    g = grid_h3d(64)
    assert g.blocks == 49152
    assert simplex_volume(63, 3) == 43680


def test_h3d_rejects_bad_n():
    for n in (2, 12):
        with pytest.raises(ContractViolation):
            grid_h3d(n)


# generic --------------------------------------------------------------------------------


def test_void_only_from_over_provisioning_maps():
    cases = [grid_bb(6, 2), grid_bb(5, 3), grid_rb(6), grid_lambda(6), grid_h2d(8),
             grid_h2d_padded(6), grid_h3d(8)] + [p.grid for p in decompose_trapezoids(11, 4)]
    for g in cases:
        omegas = [(i,) for i in range(g.extents[0])] if len(g.extents) == 1 else all_blocks(g.extents)
        voids = sum(map_block(g, w).is_void for w in omegas)
        if g.map_kind not in OVER_PROVISIONING:
            assert voids == 0


def test_maps_are_pure():
    g = grid_h3d(16)
    w = (3, 5, 9)
    assert map_block(g, w) == map_block(g, w)


def test_to_inclusive_shift():
    assert to_inclusive(MapKind.H2D, (0, 1)) == (0, 0)
    assert to_inclusive(MapKind.RB, (0, 1)) == (0, 1)
    assert to_inclusive(MapKind.H3D, (0, 4, 2)) == (0, 3, 2)


def test_grid_for_side():
    assert grid_for_side(MapKind.H2D, 7).extents == (4, 7)
    assert grid_for_side(MapKind.RB, 7).extents == (4, 9)
    with pytest.raises(ContractViolation):
        grid_for_side(MapKind.H2D, 6)
    with pytest.raises(ContractViolation):
        grid_for_side(MapKind.BB, 4)
