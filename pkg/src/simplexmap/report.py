"""CSV rows and SVG diagrams. Output is a pure function of its inputs."""
from __future__ import annotations

import csv
import io
import math
from decimal import ROUND_HALF_EVEN, Context, Decimal
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence

from . import _arith
from .maps import MapKind, decompose_trapezoids, grid_h3d, map_block

SCHEMA_VERSION = "1"

EFFICIENCY_COLUMNS = [
    "map", "m", "n", "side", "rho",
    "blocks_launched", "blocks_void", "threads_launched", "threads_useful",
    "overhead_num", "overhead_den", "overhead_decimal",
    "closed_num", "closed_den", "limit_num", "limit_den",
    "verdict", "kernel", "seed", "state_sha256", "oracle",
    "schema_version",
]

OPTIMIZE_COLUMNS = [
    "rank", "m", "inv_r", "beta", "n_eval", "covers",
    "alpha_num", "alpha_den", "alpha_decimal", "n0", "schema_version",
]

_CTX = Context(prec=60)


def decimal_str(q: Fraction, places: int = 9) -> str:
    d = _CTX.divide(Decimal(q.numerator), Decimal(q.denominator))
    return format(d.quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_EVEN, context=_CTX), "f")


def to_csv(rows: Iterable[Dict[str, object]], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n", extrasaction="raise")
    w.writeheader()
    for r in rows:
        out = {c: "" for c in columns}
        out["schema_version"] = SCHEMA_VERSION
        out.update({k: _cell(v) for k, v in r.items()})
        w.writerow(out)
    return buf.getvalue()


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else decimal_str(v)
    return str(v)


def fraction_fields(prefix: str, q: Optional[Fraction]) -> Dict[str, object]:
    if q is None:
        return {}
    return {f"{prefix}_num": q.numerator, f"{prefix}_den": q.denominator}


def to_text(rows: List[Dict[str, object]], columns: Sequence[str]) -> str:
    used = [c for c in columns if any(_cell(r.get(c)) for r in rows)]
    table = [used] + [[_cell(r.get(c)) for c in used] for r in rows]
    widths = [max(len(row[i]) for row in table) for i in range(len(used))]
    return "".join(
        "  ".join(v.rjust(w) for v, w in zip(row, widths)).rstrip() + "\n" for row in table
    )


# closed forms ----------------------------------------------------------------------


def closed_overhead(kind: MapKind, n: int, m: int, T: int = 1) -> Optional[Fraction]:
    """Block-level overhead at ``rho = 1`` predicted by counting, or None."""
    if kind is MapKind.BB:
        return Fraction(n ** m, math.comb(n + m - 1, m)) - 1
    if kind is MapKind.H3D:
        return Fraction(n * n + 8, 8 * (n * n - 1))
    if kind in (MapKind.RB, MapKind.LAMBDA2D, MapKind.H2D):
        return Fraction(0)
    if kind is MapKind.H2D_TRAPEZOID:
        pieces = decompose_trapezoids(n, T)
        launched = sum(p.grid.blocks for p in pieces)
        return Fraction(launched, n * (n - 1) // 2) - 1
    return None


def limit_overhead(kind: MapKind, m: int) -> Optional[Fraction]:
    if kind is MapKind.BB:
        return Fraction(math.factorial(m) - 1)
    if kind is MapKind.H3D:
        return Fraction(1, 8)
    if kind in (MapKind.RB, MapKind.LAMBDA2D, MapKind.H2D, MapKind.H2D_TRAPEZOID):
        return Fraction(0)
    return None


# SVG ---------------------------------------------------------------------------------

PALETTE = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
    "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
]
VOID_FILL = "#ffffff"
EMPTY_FILL = "#eeeeee"


class _Svg:
    def __init__(self):
        self.parts: List[str] = []
        self.width = 0
        self.height = 0

    def rect(self, x, y, w, h, fill, stroke="#333333", sw=0.5):
        self.parts.append(
            f'<rect x="{x}" y="{y}" width="{w}" height="{h}" fill="{fill}" '
            f'stroke="{stroke}" stroke-width="{sw}"/>'
        )
        self.width = max(self.width, x + w)
        self.height = max(self.height, y + h)

    def text(self, x, y, s, size=12):
        self.parts.append(f'<text x="{x}" y="{y}" font-family="monospace" font-size="{size}">{s}</text>')
        self.height = max(self.height, y)

    def document(self, title: str) -> str:
        w, h = self.width + 10, self.height + 10
        head = (
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
            f'width="{w}" height="{h}" viewBox="0 0 {w} {h}">\n'
            f"<title>{title}</title>\n"
        )
        return head + "\n".join(self.parts) + "\n</svg>\n"


def _cell_px(n: int) -> int:
    return max(2, min(16, 512 // max(n, 1)))


def _level_color(b: int) -> str:
    return PALETTE[(b.bit_length() - 1) % len(PALETTE)]


def render_2d(kind: MapKind, n: int, grids, T: int = 1) -> str:
    """Grid space on the left, data space (lower view) on the right.

    Blocks are colored by stack level ``b``, or by trapezoid for the
    trapezoid scheme; Void blocks are left white.
    """
    px = _cell_px(n)
    svg = _Svg()
    svg.text(10, 16, f"{kind.value} n={n}" + (f" T={T}" if kind is MapKind.H2D_TRAPEZOID else ""))
    top = 28
    gx0 = 10
    data = {}
    offset_y = top
    max_w = 0
    for gi, g in enumerate(grids):
        flat = len(g.extents) == 1
        # the 1D lambda grid is drawn wrapped into rows of n blocks
        ex = (n, -(-g.extents[0] // n)) if flat else g.extents
        for wy in range(ex[1]):
            for wx in range(ex[0]):
                if flat and wy * n + wx >= g.extents[0]:
                    continue
                omega = (wy * n + wx,) if flat else (wx, wy)
                out = map_block(g, omega)
                if kind is MapKind.H2D_TRAPEZOID:
                    color = PALETTE[gi % len(PALETTE)]
                elif kind in (MapKind.H2D, MapKind.H2D_PADDED):
                    color = _level_color(out.level_b)
                else:
                    color = PALETTE[0]
                fill = VOID_FILL if out.is_void else color
                svg.rect(gx0 + wx * px, offset_y + wy * px, px, px, fill)
                if not out.is_void:
                    data[tuple(out.target)] = color
        max_w = max(max_w, ex[0] * px)
        offset_y += ex[1] * px + 2 * px
    dx0 = gx0 + max_w + 4 * px
    side = grids[0].side
    ylo = 1 if kind.strict else 0
    for y in range(ylo, ylo + side):
        for x in range(0, y + 1 - ylo):
            fill = data.get((x, y), EMPTY_FILL)
            svg.rect(dx0 + x * px, top + (y - ylo) * px, px, px, fill)
    return svg.document(f"{kind.value} n={n}")


def render_h3d(n: int) -> str:
    """Per-layer slices: grid layers ``wz`` (top) and data layers ``z`` (bottom).

    Colors follow the stack level; blocks moved by the hinge get a thick
    outline in both views.
    """
    g = grid_h3d(n)
    px = _cell_px(2 * n)
    svg = _Svg()
    svg.text(10, 16, f"h3d n={n}: grid layers wz (top), data layers z (bottom)")
    top = 28
    data = {}
    ex, ey, ez = g.extents
    for wz in range(ez):
        ox = 10 + wz * (ex + 2) * px
        for wy in range(ey):
            for wx in range(ex):
                x, y, z, b, q, void = _arith.h3d(wx, wy, wz, n)
                hinge = _pre_hinge_violates(wx, wy, wz, n)
                stroke, sw = ("#000000", 2) if hinge else ("#333333", 0.5)
                fill = VOID_FILL if void else _level_color(b)
                svg.rect(ox + wx * px, top + wy * px, px, px, fill, stroke, sw)
                if not void:
                    data[(x, y, z)] = (fill, hinge)
    top2 = top + (ey + 3) * px
    side = n - 1
    for z in range(side):
        ox = 10 + z * (side + 2) * px
        for y in range(1, n):
            for x in range(0, y):
                if z >= y - x:
                    continue
                fill, hinge = data.get((x, y, z), (EMPTY_FILL, False))
                stroke, sw = ("#000000", 2) if hinge else ("#333333", 0.5)
                svg.rect(ox + x * px, top2 + (y - 1) * px, px, px, fill, stroke, sw)
    return svg.document(f"h3d n={n}")


def _pre_hinge_violates(wx, wy, wz, n) -> bool:
    half = n // 2
    if wz < half:
        x, y, z = wx, wy + half, wz
    else:
        x, y, _, _ = _arith.h2d(wx, wy)
        z = wz - half
    return z >= y - x
