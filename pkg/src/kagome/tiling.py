"""Tilings of Kagome regions: construction, heights and flips.

A tiling assigns every triangle of a region to an adjacent hexagon so
that each hexagon receives exactly two triangles; a tile is a hexagon
together with its two triangles.  Tile shapes are classified by the
circular slot separation of the two triangles around the hexagon:
separation 3 is a side-2 rhombus (Lozenge), separation 2 an isosceles
trapezoid with sides 1-2-3-2 (Trapeze), separation 1 the nonconvex
shape (Fish).

Heights live on lattice vertices.  Every Kagome edge is oriented
canonically with its triangle on the right (equivalently clockwise
around triangles, counterclockwise around hexagons); following that
orientation the height increases by +1 across an edge on a tile
boundary and by -2 across an edge interior to a tile.  The increments
sum to zero around every cell, so integrating from the region's base
vertex is well defined; boundary heights do not depend on the tiling.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Iterator

from .errors import KagomeError, NotFlippable, NotTileable
from .lattice import (
    HexCoord,
    Region,
    TriCoord,
    Vertex,
    edge_canonical_away,
    incident_cells,
    tri_corners,
    tri_slot,
    tri_vertices,
    vertex_between,
    vertex_tris,
)


class TileType(Enum):
    TRAPEZE = "trapeze"
    FISH = "fish"
    LOZENGE = "lozenge"


_SEPARATION_TYPE = {1: TileType.FISH, 2: TileType.TRAPEZE, 3: TileType.LOZENGE}


def slot_separation(s1: int, s2: int) -> int:
    d = (s1 - s2) % 6
    return min(d, 6 - d)


@dataclass(frozen=True)
class FlipInfo:
    """The unique flip available at a vertex.

    ``direction`` is +1 if performing it raises the height at the vertex
    by 3 and -1 if it lowers it.  ``fish_delta`` is the change in the
    number of Fish tiles.  ``restrained`` is True when all four tiles
    involved, before and after, are Trapezes or Lozenges.
    """

    vertex: Vertex
    direction: int
    fish_delta: int
    restrained: bool


class Tiling:
    """Immutable assignment of region triangles to hexagons."""

    __slots__ = ("region", "assign", "_key")

    def __init__(self, region: Region, assign: dict[TriCoord, HexCoord]):
        self.region = region
        self.assign = assign
        self._key = tuple(assign[t] for t in region.tri_list)

    @property
    def key(self) -> tuple:
        return self._key

    def __eq__(self, other) -> bool:
        return isinstance(other, Tiling) and self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def hex_tiles(self) -> dict[HexCoord, tuple[TriCoord, ...]]:
        """Map each hexagon to its two triangles, sorted."""
        out: dict[HexCoord, list[TriCoord]] = {h: [] for h in self.region.hex_list}
        for t, h in self.assign.items():
            out[h].append(t)
        return {h: tuple(sorted(ts)) for h, ts in out.items()}

    def tile_of(self, h: HexCoord) -> tuple[TriCoord, ...]:
        return tuple(sorted(t for t, hh in self.assign.items() if hh == h))

    def __repr__(self) -> str:
        return f"Tiling({self.region!r}, {len(self.assign)} triangles)"


def validate_tiling(tiling: Tiling) -> None:
    """Raise if the assignment is not a valid tiling of its region."""
    region = tiling.region
    if set(tiling.assign) != set(region.tris):
        raise KagomeError("assignment does not cover the region triangles")
    loads = {h: 0 for h in region.hexes}
    for t, h in tiling.assign.items():
        if h not in region.hexes:
            raise KagomeError(f"triangle {t} assigned outside the region")
        if h not in tri_corners(t):
            raise KagomeError(f"triangle {t} not adjacent to hexagon {h}")
        loads[h] += 1
    bad = {h: c for h, c in loads.items() if c != 2}
    if bad:
        raise KagomeError(f"hexagons without exactly two triangles: {bad}")


def find_tiling(region: Region, restrained: bool = False) -> Tiling:
    """Find one tiling by most-constrained-first backtracking.

    Triangles are matched to adjacent hexagons with free capacity,
    always branching on a triangle with the fewest live choices.  With
    ``restrained=True`` only trapeze and lozenge tiles are allowed (the
    two triangles of a hexagon may not sit on adjacent hexagon edges).
    Raises :class:`NotTileable` when no such tiling exists.
    """
    if not region.hexes:
        return Tiling(region, {})
    tri_opts = {t: list(region.tri_adjacent_hexes[t]) for t in region.tri_list}
    for t, opts in tri_opts.items():
        if not opts:
            raise NotTileable(f"triangle {t} has no adjacent hexagon in the region")
    capacity = {h: 2 for h in region.hex_list}
    owner_tris: dict[HexCoord, list[TriCoord]] = {h: [] for h in region.hex_list}
    assign: dict[TriCoord, HexCoord] = {}

    def compatible(t: TriCoord, h: HexCoord) -> bool:
        if not restrained or not owner_tris[h]:
            return True
        return slot_separation(tri_slot(t, h), tri_slot(owner_tris[h][0], h)) >= 2

    def completable(h: HexCoord) -> bool:
        # a half-filled hexagon must keep a non-fish partner available
        if not restrained or capacity[h] != 1:
            return True
        return any(
            t not in assign and compatible(t, h) for t in region.hex_adjacent_tris[h]
        )

    def choices(t: TriCoord) -> list[HexCoord]:
        return [h for h in tri_opts[t] if capacity[h] > 0 and compatible(t, h)]

    def solve() -> bool:
        if len(assign) == len(tri_opts):
            return True
        best_t, best_c = None, None
        for t in tri_opts:
            if t in assign:
                continue
            c = choices(t)
            if not c:
                return False
            if best_c is None or len(c) < len(best_c):
                best_t, best_c = t, c
                if len(c) == 1:
                    break
        for h in best_c:
            assign[best_t] = h
            capacity[h] -= 1
            owner_tris[h].append(best_t)
            if completable(h) and solve():
                return True
            capacity[h] += 1
            owner_tris[h].pop()
            del assign[best_t]
        return False

    if not solve():
        raise NotTileable(f"{region!r} admits no tiling")
    tiling = Tiling(region, dict(assign))
    validate_tiling(tiling)
    return tiling


def classify_tile(tiling: Tiling, h: HexCoord) -> TileType:
    t1, t2 = tiling.tile_of(h)
    return _SEPARATION_TYPE[slot_separation(tri_slot(t1, h), tri_slot(t2, h))]


def tile_type_counts(tiling: Tiling) -> dict[TileType, int]:
    counts = {tt: 0 for tt in TileType}
    for h, (t1, t2) in tiling.hex_tiles().items():
        counts[_SEPARATION_TYPE[slot_separation(tri_slot(t1, h), tri_slot(t2, h))]] += 1
    return counts


def fish_count(tiling: Tiling) -> int:
    return tile_type_counts(tiling)[TileType.FISH]


# -- heights ----------------------------------------------------------------


def _edge_increment(tiling: Tiling, v: Vertex, m: Vertex, t: TriCoord, h: HexCoord) -> int:
    """Height change from v to m across the edge bordered by (t, h)."""
    region = tiling.region
    if t in region.tris and h in region.hexes and tiling.assign[t] == h:
        flow = -2  # interior to a tile
    else:
        flow = 1  # on a tile boundary (or on the region boundary)
    return flow if edge_canonical_away(v, m, t) else -flow


def _vertex_edges(region: Region, v: Vertex) -> Iterator[tuple[Vertex, TriCoord, HexCoord]]:
    """Edges at ``v`` that belong to the region: (other end, triangle, hexagon)."""
    for t in vertex_tris(v):
        for h in (v.h1, v.h2):
            if t not in region.tris and h not in region.hexes:
                continue
            third = [c for c in tri_corners(t) if c != v.h1 and c != v.h2][0]
            m = vertex_between(h, third)
            yield m, t, h


def height_field(tiling: Tiling) -> dict[Vertex, int]:
    """Integrate edge increments over the region from the base vertex."""
    region = tiling.region
    if not region.hexes:
        return {}
    base = region.base_vertex
    heights: dict[Vertex, int] = {base: 0}
    vert_set = set(region.vertices)
    queue = deque([base])
    while queue:
        v = queue.popleft()
        for m, t, h in _vertex_edges(region, v):
            if m not in vert_set or m in heights:
                continue
            heights[m] = heights[v] + _edge_increment(tiling, v, m, t, h)
            queue.append(m)
    if len(heights) != len(region.vertices):
        raise KagomeError("height integration did not reach every vertex")
    return heights


def boundary_heights(region: Region) -> dict[Vertex, int]:
    """Heights on the region boundary; independent of any tiling.

    Uses the fact that every boundary edge lies on a tile boundary, so
    its increment is +1 along the canonical orientation regardless of
    the tiling.  Computed by integrating over boundary edges only.
    """
    if not region.hexes:
        return {}
    base = region.base_vertex
    boundary = set(region.boundary_vertices)
    heights = {base: 0}
    queue = deque([base])
    while queue:
        v = queue.popleft()
        for m, t, h in _vertex_edges(region, v):
            if m not in boundary or m in heights:
                continue
            if t in region.tris and h in region.hexes:
                continue  # interior edge, increment depends on the tiling
            inc = 1 if edge_canonical_away(v, m, t) else -1
            heights[m] = heights[v] + inc
            queue.append(m)
    if set(heights) != boundary:
        raise KagomeError("boundary is not edge-connected")
    return heights


def total_height(tiling: Tiling) -> int:
    return sum(height_field(tiling).values())


def pointwise_leq(t_low: Tiling, t_high: Tiling) -> bool:
    """True if the height of ``t_low`` is <= that of ``t_high`` everywhere."""
    if t_low.region is not t_high.region and t_low.region != t_high.region:
        raise KagomeError("tilings live on different regions")
    h_low = height_field(t_low)
    h_high = height_field(t_high)
    return all(h_low[v] <= h_high[v] for v in h_low)


# -- flips ------------------------------------------------------------------


def _flip_direction(v: Vertex, t_up: TriCoord, up_owner: HexCoord) -> int:
    """Direction of the available flip when ``assign[t_up] == up_owner``.

    Derived from the edge between ``t_up`` and its owner: that edge is
    interior (increment -2 from the vertex along the canonical
    orientation), so the vertex sits above its neighbor when the
    canonical orientation points away from the vertex, and the flip
    lowers it; symmetrically otherwise.
    """
    third = [c for c in tri_corners(t_up) if c != v.h1 and c != v.h2][0]
    m = vertex_between(up_owner, third)
    return -1 if edge_canonical_away(v, m, t_up) else 1


def flip_at(tiling: Tiling, v: Vertex) -> FlipInfo:
    """Describe the flip available at inner vertex ``v``.

    Raises :class:`NotFlippable` unless the two triangles at ``v`` are
    assigned to the two hexagons at ``v``, one each.
    """
    region = tiling.region
    t_up, h1, t_dn, h2 = incident_cells(v)
    if not (
        t_up in region.tris
        and t_dn in region.tris
        and h1 in region.hexes
        and h2 in region.hexes
    ):
        raise NotFlippable(f"{v} is not an inner vertex")
    own_up = tiling.assign[t_up]
    own_dn = tiling.assign[t_dn]
    if {own_up, own_dn} != {h1, h2} or own_up == own_dn:
        raise NotFlippable(f"triangles at {v} are not split between its hexagons")

    direction = _flip_direction(v, t_up, own_up)

    # tile types of the two affected hexagons, before and after the swap
    def types(assign_up: HexCoord, assign_dn: HexCoord) -> list[TileType]:
        out = []
        for h in (h1, h2):
            slots = []
            for t, owner in ((t_up, assign_up), (t_dn, assign_dn)):
                if owner == h:
                    slots.append(tri_slot(t, h))
            for t, owner in tiling.assign.items():
                if owner == h and t not in (t_up, t_dn):
                    slots.append(tri_slot(t, h))
            assert len(slots) == 2
            out.append(_SEPARATION_TYPE[slot_separation(slots[0], slots[1])])
        return out

    before = types(own_up, own_dn)
    after = types(own_dn, own_up)
    fish_delta = sum(tt is TileType.FISH for tt in after) - sum(
        tt is TileType.FISH for tt in before
    )
    ok = {TileType.TRAPEZE, TileType.LOZENGE}
    restrained = all(tt in ok for tt in before) and all(tt in ok for tt in after)
    return FlipInfo(v, direction, fish_delta, restrained)


def apply_flip(tiling: Tiling, v: Vertex) -> Tiling:
    """Return the tiling with the flip at ``v`` performed."""
    flip_at(tiling, v)  # validates flippability
    t_up, h1, t_dn, h2 = incident_cells(v)
    assign = dict(tiling.assign)
    assign[t_up], assign[t_dn] = assign[t_dn], assign[t_up]
    return Tiling(tiling.region, assign)


def available_flips(tiling: Tiling) -> dict[Vertex, FlipInfo]:
    out = {}
    for v in tiling.region.inner_vertices:
        try:
            out[v] = flip_at(tiling, v)
        except NotFlippable:
            continue
    return out


def local_extrema(tiling: Tiling) -> tuple[set[Vertex], set[Vertex], set[Vertex], set[Vertex]]:
    """(minima, maxima, flippable_minima, flippable_maxima) over inner vertices.

    An inner vertex is a local extremum when its height is strictly
    below/above all four lattice neighbors; it is a flippable extremum
    when additionally a restrained flip moves it by 3 toward the other
    extreme.
    """
    heights = height_field(tiling)
    flips = available_flips(tiling)
    minima: set[Vertex] = set()
    maxima: set[Vertex] = set()
    fmin: set[Vertex] = set()
    fmax: set[Vertex] = set()
    for v in tiling.region.inner_vertices:
        t_up, h1, t_dn, h2 = incident_cells(v)
        nbs = []
        for t in (t_up, t_dn):
            third = [c for c in tri_corners(t) if c != v.h1 and c != v.h2][0]
            nbs.append(vertex_between(v.h1, third))
            nbs.append(vertex_between(v.h2, third))
        hv = heights[v]
        if all(hv < heights[m] for m in nbs):
            minima.add(v)
            fi = flips.get(v)
            if fi is not None and fi.restrained and fi.direction == 1:
                fmin.add(v)
        elif all(hv > heights[m] for m in nbs):
            maxima.add(v)
            fi = flips.get(v)
            if fi is not None and fi.restrained and fi.direction == -1:
                fmax.add(v)
    return minima, maxima, fmin, fmax
