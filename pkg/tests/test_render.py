import math
import xml.etree.ElementTree as ET

import pytest

from kagome.errors import KagomeError
from kagome.lattice import Region, make_nonflat_lozenge, make_square_region
from kagome.minimal import maximal_tiling, minimal_tiling
from kagome.render import (
    TILE_AREA,
    RenderStyle,
    polygon_area,
    render,
    render_prototiles,
    rendered_area,
    tile_orientation,
    tile_polygon,
)
from kagome.tiling import TileType, Tiling, find_tiling


def test_fifteen_distinct_orientation_classes():
    classes = set()
    for s in range(3):
        classes.add(tile_orientation(s, s + 3))
    for s in range(6):
        classes.add(tile_orientation(*sorted((s, (s + 2) % 6))))
        classes.add(tile_orientation(*sorted((s, (s + 1) % 6))))
    assert len(classes) == 15
    by_type = {tt: sum(1 for t, _ in classes if t is tt) for tt in TileType}
    assert by_type[TileType.LOZENGE] == 3
    assert by_type[TileType.TRAPEZE] == 6
    assert by_type[TileType.FISH] == 6


def test_tile_polygon_has_eight_sides_of_unit_or_double_length(loz3):
    t = find_tiling(loz3)
    for h in loz3.hex_list:
        pts = tile_polygon(t, h)
        assert len(pts) == 8
        for (x1, y1), (x2, y2) in zip(pts, pts[1:] + pts[:1]):
            d = math.hypot(x2 - x1, y2 - y1)
            assert d == pytest.approx(1.0, rel=1e-9) \
                or d == pytest.approx(2.0, rel=1e-9)


def test_rendered_area_covers_region_exactly(loz3, sq3, nf3):
    for region in (loz3, sq3, nf3):
        for t in (minimal_tiling(region, flips="all"),
                  maximal_tiling(region, flips="all")):
            want = TILE_AREA * len(region.hexes)
            assert rendered_area(t) == pytest.approx(want, rel=1e-9)


def test_polygon_area_unit_triangle():
    tri = [(0.0, 0.0), (1.0, 0.0), (0.5, math.sqrt(3) / 2)]
    assert polygon_area(tri) == pytest.approx(math.sqrt(3) / 4)


def test_render_is_byte_deterministic(sq3):
    t = find_tiling(sq3)
    style = RenderStyle(show_heights=True, show_flips=True)
    assert render(t, style) == render(t, style)


def test_render_is_valid_xml_with_one_path_per_tile(sq3):
    t = find_tiling(sq3)
    svg = render(t, RenderStyle(show_heights=True, show_flips=True))
    root = ET.fromstring(svg)
    ns = "{http://www.w3.org/2000/svg}"
    assert root.tag == f"{ns}svg"
    paths = root.findall(f".//{ns}path")
    assert len(paths) == len(sq3.hexes)
    texts = root.findall(f".//{ns}text")
    assert len(texts) == len(sq3.vertices)
    for p in paths:
        assert p.get("d").startswith("M") and p.get("d").endswith("Z")


def test_render_empty_region_is_valid():
    empty = Region(family="custom", n=0, hexes=frozenset(), tris=frozenset())
    svg = render(Tiling(empty, {}))
    root = ET.fromstring(svg)
    assert not root.findall(".//{http://www.w3.org/2000/svg}path")


def test_render_rejects_nonpositive_scale(loz2):
    with pytest.raises(KagomeError):
        render(find_tiling(loz2), RenderStyle(scale=0))


def test_scale_changes_pixel_size_not_structure(nf3):
    t = find_tiling(nf3)
    small = render(t, RenderStyle(scale=10))
    big = render(t, RenderStyle(scale=40))
    assert small.count("<path") == big.count("<path")
    w_small = float(ET.fromstring(small).get("width"))
    w_big = float(ET.fromstring(big).get("width"))
    assert w_big == pytest.approx(4 * w_small, rel=1e-6)


def test_prototile_sheet_shows_all_classes():
    svg = render_prototiles()
    root = ET.fromstring(svg)
    ns = "{http://www.w3.org/2000/svg}"
    labels = [t.text for t in root.findall(f".//{ns}text")]
    assert len(labels) == 15
    assert sorted(labels) == sorted(
        [f"lozenge:{k}" for k in range(3)]
        + [f"trapeze:{k}" for k in range(6)]
        + [f"fish:{k}" for k in range(6)])
    fills = {p.get("fill") for p in root.findall(f".//{ns}path")}
    assert len(fills) == 15  # every class gets its own color


def test_custom_palette_is_used(loz2):
    t = find_tiling(loz2)
    colors = {(tt, k): "#123456" for tt in TileType for k in range(6)}
    svg = render(t, RenderStyle(colors=colors))
    assert svg.count("#123456") == len(loz2.hexes)


def test_flip_markers_match_flip_count(sq3):
    from kagome.tiling import available_flips
    t = find_tiling(sq3)
    svg = render(t, RenderStyle(show_flips=True))
    root = ET.fromstring(svg)
    ns = "{http://www.w3.org/2000/svg}"
    circles = root.findall(f".//{ns}circle")
    assert len(circles) == len(available_flips(t))
