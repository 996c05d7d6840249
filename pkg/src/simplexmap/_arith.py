"""Branch-free integer arithmetic shared by every execution path.

Each function here is written with masks instead of ``if`` so that the same
source evaluates on Python ints, on int64 numpy arrays (the vectorized
fallback) and, after :mod:`simplexmap.kernels._nb` recompiles it, inside numba
loops. Inputs are assumed valid; range checks live in the public wrappers.

Coordinates returned by the strict-view maps (``h2d``, ``trapezoid``,
``h3d``) satisfy ``x < y``; the inclusive-view maps (``bb``, ``rb``,
``lambda``) satisfy ``x <= y``.
"""


def clz64(v):
    # halving search; v in [1, 2**64)
    n = 0
    s = ((v >> 32) == 0) * 32
    n = n + s
    v = v << s
    s = ((v >> 48) == 0) * 16
    n = n + s
    v = v << s
    s = ((v >> 56) == 0) * 8
    n = n + s
    v = v << s
    s = ((v >> 60) == 0) * 4
    n = n + s
    v = v << s
    s = ((v >> 62) == 0) * 2
    n = n + s
    v = v << s
    n = n + ((v >> 63) == 0) * 1
    return n


def floor_log2(v):
    return 63 - clz64(v)


def pow2_floor(v):
    return 1 << floor_log2(v)


def h2d(wx, wy):
    """Stack level, orthotope index and target of one H2D block."""
    lg = floor_log2(wy + 1)
    b = 1 << lg
    q = wx >> lg
    return wx + q * b, wy + 2 * q * b + 1, b, q


def trapezoid(wx, wy, dx, dy, h1, h2, gx):
    x, y, b, q = h2d(wx, wy)
    # (h1 - wy) >> 31 on a signed 32-bit word
    k = (wy > h1) * 1
    return dx + x + k * gx, dy + y - k * h2, b, q


def h3d(wx, wy, wz, n):
    """H3D block map; returns ``(x, y, z, b, q, void)`` in the strict view."""
    half = n >> 1
    major = (wz < half) * 1
    minor = 1 - major
    zl = wz - half
    lg = floor_log2(wy + 1)
    sb = 1 << lg
    sq = wx >> lg
    void = minor * (((sb >= half) + (zl >= sb)) > 0)

    b = major * half + minor * sb
    q = minor * sq
    x = major * wx + minor * (wx + sq * sb)
    y = major * (wy + half) + minor * (wy + 2 * sq * sb + 1)
    z = major * wz + minor * zl
    lx = wx & (b - 1)
    ly = major * wy + minor * ((wy + 1) & (sb - 1))
    lz = z
    # hinge: cells above the y - x surface fold into the holes of the same cube
    out = (z >= y - x) * 1
    x = x + out * (b - 1 - 2 * lx)
    y = y + out * (b - 1 - 2 * ly)
    z = z + out * (2 * b - 1 - 2 * lz)
    return x, y, z, b, q, void


def bb2(wx, wy):
    return wx, wy, (wx <= wy)


def bb3(wx, wy, wz):
    return wx, wy, wz, ((wx <= wy) * (wz <= wy - wx)) > 0


def rb(wx, wy, n):
    """Fold of the ``(n/2) x (n+1)`` rectangle onto ``{x <= y <= n-1}``."""
    top = (wy == n) * 1
    fold = (wx > wy) * (1 - top)
    keep = 1 - top - fold
    x = top * (n >> 1) + fold * (n - wx) + keep * wx
    y = top * ((n >> 1) + wx) + fold * (n - wy - 1) + keep * wy
    return x, y


def tri_row_fix(i, y):
    """Correct a root-based row estimate ``y`` of linear index ``i`` by one step."""
    y = y + ((y + 1) * (y + 2) // 2 <= i)
    return y - (y * (y + 1) // 2 > i)


def tri_index(x, y):
    return y * (y + 1) // 2 + x


def tet_index(x, y, z):
    # layers by y: layer y holds {(x, z): x + z <= y}
    return (y * (y + 1) * (y + 2)) // 6 + x * (y + 1) - (x * (x - 1)) // 2 + z
