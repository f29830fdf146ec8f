"""Deterministic SVG rendering of tilings.

All combinatorics elsewhere is integer; geometry lives only here.  A
hexagon's center sits at ``a*(2, 0) + b*(1, sqrt3)`` in lattice units
(unit cell edge).  Integer work uses the doubled coordinates of
:func:`kagome.lattice.hex_pos2` (x doubled, y in sqrt3/2 units), so
corner and slot-apex offsets are exact integer tables; floats appear
only when writing coordinates.

Each tile is one closed path: the six hexagon corners, detouring to
the outer apex of the attached triangle at each owned slot, giving an
8-gon of area ``8 * sqrt3/4``.  Fill color is keyed by (tile type,
orientation class): 3 lozenge orientations, 6 trapeze, 6 fish.
Identical inputs produce identical bytes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from kagome.errors import KagomeError
from kagome.lattice import HexCoord, hex_pos2, tri_slot, vertex_pos2
from kagome.tiling import TileType, Tiling, _SEPARATION_TYPE, available_flips, height_field, slot_separation

SQRT3 = math.sqrt(3.0)
TILE_AREA = 2.0 * SQRT3  # hexagon + 2 unit triangles, edge 1

# doubled-coordinate offsets from the hexagon center
_CORNER = ((2, 0), (1, 1), (-1, 1), (-2, 0), (-1, -1), (1, -1))
_APEX = ((3, 1), (0, 2), (-3, 1), (-3, -1), (0, -2), (3, -1))

_DEFAULT_COLORS = {
    (TileType.LOZENGE, 0): "#d64545",
    (TileType.LOZENGE, 1): "#2e7eb3",
    (TileType.LOZENGE, 2): "#5ea25e",
    (TileType.TRAPEZE, 0): "#f0c987",
    (TileType.TRAPEZE, 1): "#e3aa75",
    (TileType.TRAPEZE, 2): "#d19c97",
    (TileType.TRAPEZE, 3): "#b99ac4",
    (TileType.TRAPEZE, 4): "#93a8d0",
    (TileType.TRAPEZE, 5): "#94c4a5",
    (TileType.FISH, 0): "#30303c",
    (TileType.FISH, 1): "#44445a",
    (TileType.FISH, 2): "#585878",
    (TileType.FISH, 3): "#6c6c96",
    (TileType.FISH, 4): "#8080b4",
    (TileType.FISH, 5): "#9494d2",
}


@dataclass(frozen=True)
class RenderStyle:
    colors: dict[tuple[TileType, int], str] = field(
        default_factory=lambda: dict(_DEFAULT_COLORS))
    show_heights: bool = False
    show_flips: bool = False
    scale: float = 24.0  # pixels per lattice unit
    stroke: str = "#1a1a1a"
    stroke_width: float = 0.045  # lattice units
    background: str = "#ffffff"
    margin: float = 0.7  # lattice units


def tile_orientation(s1: int, s2: int) -> tuple[TileType, int]:
    """Type and orientation class of a tile owning slots ``s1 < s2``.

    The orientation is the slot from which the other is reached going
    counterclockwise by the separation (for lozenges the two choices
    coincide mod 3, leaving 3 classes; trapezes and fish keep 6).
    """
    sep = slot_separation(s1, s2)
    tt = _SEPARATION_TYPE[sep]
    if (s2 - s1) % 6 == sep:
        orient = s1
    else:
        orient = s2
    if tt is TileType.LOZENGE:
        orient %= 3
    return tt, orient


def tile_polygon(tiling: Tiling, h: HexCoord) -> list[tuple[float, float]]:
    """Tile outline in lattice units, y up; 8 vertices, counterclockwise."""
    cx2, cy2 = hex_pos2(h)
    owned = [tri_slot(t, h) for t in tiling.hex_tiles()[h]]
    pts2 = []
    for k in range(6):
        pts2.append((cx2 + _CORNER[k][0], cy2 + _CORNER[k][1]))
        if k in owned:
            pts2.append((cx2 + _APEX[k][0], cy2 + _APEX[k][1]))
    return [(x2 / 2.0, y2 * (SQRT3 / 2.0)) for x2, y2 in pts2]


def polygon_area(points: list[tuple[float, float]]) -> float:
    acc = 0.0
    for (x1, y1), (x2, y2) in zip(points, points[1:] + points[:1]):
        acc += x1 * y2 - x2 * y1
    return abs(acc) / 2.0


def rendered_area(tiling: Tiling) -> float:
    """Sum of drawn tile areas; equals ``TILE_AREA * |hexes|`` for a
    valid tiling (the coverage check of the acceptance suite)."""
    return sum(polygon_area(tile_polygon(tiling, h))
               for h in tiling.region.hex_list)


def _fmt(x: float) -> str:
    s = f"{x:.4f}".rstrip("0").rstrip(".")
    return "0" if s == "-0" else s


def _tile_paths(tiling: Tiling, style: RenderStyle):
    """(path d, fill) per hexagon plus the svg-space bounding box."""
    out = []
    lo_x = lo_y = math.inf
    hi_x = hi_y = -math.inf
    tiles = tiling.hex_tiles()
    for h in tiling.region.hex_list:
        s1, s2 = sorted(tri_slot(t, h) for t in tiles[h])
        tt, orient = tile_orientation(s1, s2)
        fill = style.colors.get((tt, orient), "#bbbbbb")
        cmds = []
        for i, (x, y) in enumerate(tile_polygon(tiling, h)):
            sx = x * style.scale
            sy = -y * style.scale  # svg y points down
            lo_x, hi_x = min(lo_x, sx), max(hi_x, sx)
            lo_y, hi_y = min(lo_y, sy), max(hi_y, sy)
            cmds.append(f"{'M' if i == 0 else 'L'}{_fmt(sx)} {_fmt(sy)}")
        out.append(("".join(cmds) + "Z", fill))
    return out, (lo_x, lo_y, hi_x, hi_y)


def _vertex_px(v, style: RenderStyle) -> tuple[float, float]:
    x2, y2 = vertex_pos2(v)
    return (x2 / 2.0) * style.scale, -(y2 * (SQRT3 / 2.0)) * style.scale


def render(tiling: Tiling, style: RenderStyle | None = None) -> str:
    """Complete SVG 1.1 document for one tiling; byte-deterministic."""
    style = style if style is not None else RenderStyle()
    if style.scale <= 0:
        raise KagomeError("scale must be positive")
    paths, bbox = _tile_paths(tiling, style)
    if not paths:
        bbox = (0.0, 0.0, 0.0, 0.0)
    pad = style.margin * style.scale
    x0 = bbox[0] - pad
    y0 = bbox[1] - pad
    w = (bbox[2] - bbox[0]) + 2 * pad
    ht = (bbox[3] - bbox[1]) + 2 * pad
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_fmt(w)}" height="{_fmt(ht)}" '
        f'viewBox="{_fmt(x0)} {_fmt(y0)} {_fmt(w)} {_fmt(ht)}">',
        f'<rect x="{_fmt(x0)}" y="{_fmt(y0)}" width="{_fmt(w)}" '
        f'height="{_fmt(ht)}" fill="{style.background}"/>',
        f'<g stroke="{style.stroke}" '
        f'stroke-width="{_fmt(style.stroke_width * style.scale)}" '
        'stroke-linejoin="round">',
    ]
    for d, fill in paths:
        lines.append(f'<path d="{d}" fill="{fill}"/>')
    lines.append("</g>")
    if style.show_flips and tiling.region.hexes:
        lines.append('<g stroke="none">')
        for v, info in sorted(available_flips(tiling).items()):
            px, py = _vertex_px(v, style)
            color = "#d68f00" if info.direction > 0 else "#00857a"
            lines.append(
                f'<circle cx="{_fmt(px)}" cy="{_fmt(py)}" '
                f'r="{_fmt(0.16 * style.scale)}" fill="{color}"/>')
        lines.append("</g>")
    if style.show_heights and tiling.region.hexes:
        heights = height_field(tiling)
        fs = 0.34 * style.scale
        lines.append(
            f'<g font-family="monospace" font-size="{_fmt(fs)}" '
            'text-anchor="middle">')
        for v in tiling.region.vertices:
            px, py = _vertex_px(v, style)
            lines.append(
                f'<circle cx="{_fmt(px)}" cy="{_fmt(py)}" '
                f'r="{_fmt(0.26 * style.scale)}" fill="#ffffff" '
                f'fill-opacity="0.85"/>')
            lines.append(
                f'<text x="{_fmt(px)}" y="{_fmt(py + fs * 0.36)}">'
                f"{heights[v]}</text>")
        lines.append("</g>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def render_prototiles(style: RenderStyle | None = None) -> str:
    """Reference sheet of all 15 tile shapes, labeled by type and
    orientation class; the artifact that pins the shape naming."""
    style = style if style is not None else RenderStyle()
    sc = style.scale
    rows = [
        (TileType.LOZENGE, [(s, s + 3) for s in range(3)]),
        (TileType.TRAPEZE, [(s, (s + 2) % 6) for s in range(6)]),
        (TileType.FISH, [(s, (s + 1) % 6) for s in range(6)]),
    ]
    cell = 8.0 * sc
    width = cell * 6 + 2 * sc
    height = cell * 3 + 2 * sc
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_fmt(width)}" height="{_fmt(height)}" '
        f'viewBox="0 0 {_fmt(width)} {_fmt(height)}">',
        f'<rect x="0" y="0" width="{_fmt(width)}" height="{_fmt(height)}" '
        f'fill="{style.background}"/>',
    ]
    fs = 0.5 * sc
    for row, (tt, slot_pairs) in enumerate(rows):
        for col, pair in enumerate(slot_pairs):
            s1, s2 = sorted(pair)
            _, orient = tile_orientation(s1, s2)
            fill = style.colors.get((tt, orient), "#bbbbbb")
            cx = cell * col + cell / 2 + sc
            cy = cell * row + cell / 2 + sc
            pts = []
            for k in range(6):
                pts.append((_CORNER[k][0], _CORNER[k][1]))
                if k in (s1, s2):
                    pts.append((_APEX[k][0], _APEX[k][1]))
            cmds = []
            for i, (x2, y2) in enumerate(pts):
                px = cx + (x2 / 2.0) * sc
                py = cy - (y2 * (SQRT3 / 2.0)) * sc
                cmds.append(f"{'M' if i == 0 else 'L'}{_fmt(px)} {_fmt(py)}")
            lines.append(
                f'<path d="{"".join(cmds)}Z" fill="{fill}" '
                f'stroke="{style.stroke}" '
                f'stroke-width="{_fmt(style.stroke_width * sc)}"/>')
            lines.append(
                f'<text x="{_fmt(cx)}" y="{_fmt(cy + 3.1 * sc)}" '
                f'font-family="monospace" font-size="{_fmt(fs)}" '
                f'text-anchor="middle">{tt.value}:{orient}</text>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
