"""Sequential reference computations, kept independent of the simulator.

These work on plain square/cube arrays with a membership mask instead of the
linearized simplex storage, and never touch a map. Results are returned as
dense arrays indexed ``[x, y(, z)]`` with zeros outside the domain, which is
what :meth:`SimplexGridState.to_dense` produces.
"""
import numpy as np


def lower_mask(side, m):
    idx = np.indices((side,) * m)
    x, y = idx[0], idx[1]
    mask = x <= y
    if m == 3:
        mask &= idx[2] <= y - x
    return mask


def edm_dense(points):
    """Distances ``d(p_x, p_{y+1})`` for ``x <= y``, summed coordinate by coordinate."""
    pts = np.asarray(points, dtype=np.float64)
    side = pts.shape[0] - 1
    s = np.zeros((side, side))
    for k in range(pts.shape[1]):
        d = pts[:side, k][:, None] - pts[1:, k][None, :]
        s = s + d * d
    return np.where(lower_mask(side, 2), np.sqrt(s), 0.0)


def life_dense(alive, steps, periodic):
    """Game of Life on the masked square (2D, periodic) or cube (3D, dead border)."""
    a = np.asarray(alive, dtype=np.uint8).copy()
    m, side = a.ndim, a.shape[0]
    mask = lower_mask(side, m)
    a[~mask] = 0
    for _ in range(steps):
        s = np.zeros(a.shape, dtype=np.int64)
        if periodic:
            for d in np.ndindex(*(3,) * m):
                if all(v == 1 for v in d):
                    continue
                # neighbour at +offset is brought to the cell by rolling by -offset
                s += np.roll(a, shift=tuple(1 - v for v in d), axis=tuple(range(m)))
        else:
            p = np.pad(a, 1)
            for d in np.ndindex(*(3,) * m):
                if all(v == 1 for v in d):
                    continue
                s += p[tuple(slice(v, v + side) for v in d)]
        new = ((a == 1) & ((s == 2) | (s == 3))) | ((a == 0) & (s == 3))
        a = (new & mask).astype(np.uint8)
    return a


def coverage_by_enumeration(map_fn, omegas):
    """Multiset of ``map_fn(omega)`` over the given blocks, as a dict."""
    out = {}
    for w in omegas:
        t = map_fn(w)
        if t is None:
            continue
        out[t] = out.get(t, 0) + 1
    return out
