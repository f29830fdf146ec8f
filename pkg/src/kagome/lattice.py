"""Kagome lattice coordinates, incidence and region constructors.

The Kagome (trihexagonal) lattice is modelled through the triangular
Bravais lattice of its hexagon centers:

* a hexagon is an axial coordinate pair ``(a, b)``; its center sits at
  ``a*(2, 0) + b*(1, sqrt(3))``, so neighboring centers are 2 apart and
  every cell edge has length 1;
* a triangle is a face of that lattice: ``Up(a, b)`` has hexagon corners
  ``(a,b), (a+1,b), (a,b+1)`` and ``Down(a, b)`` has corners
  ``(a+1,b), (a,b+1), (a+1,b+1)``;
* a Kagome vertex is an unordered pair of adjacent hexagons (an edge of
  the center lattice); geometrically it is the midpoint between the two
  centers.  Every vertex has four incident cells in cyclic order
  triangle, hexagon, triangle, hexagon.

The six triangles adjacent to a hexagon occupy "slots" ``0..5``; slot
``k`` sits in direction ``30 + 60*k`` degrees from the center.  All
incidence questions reduce to integer arithmetic on these coordinates.
Plane positions only appear in rendering and use the doubled integer
basis returned by :func:`hex_pos2` (y carries an implicit sqrt(3)).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple

from .errors import KagomeError

UP = "U"
DOWN = "D"


class HexCoord(NamedTuple):
    a: int
    b: int


class TriCoord(NamedTuple):
    a: int
    b: int
    o: str  # UP or DOWN


class Vertex(NamedTuple):
    """Kagome vertex: ordered pair of adjacent hexagons, lex-least first."""

    h1: HexCoord
    h2: HexCoord


HEX_NEIGHBOR_STEPS = ((1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1))


def hex_neighbors(h: HexCoord) -> list[HexCoord]:
    return [HexCoord(h.a + da, h.b + db) for da, db in HEX_NEIGHBOR_STEPS]


def tri_corners(t: TriCoord) -> tuple[HexCoord, HexCoord, HexCoord]:
    """The three hexagons adjacent to a triangle (its face corners)."""
    if t.o == UP:
        return (HexCoord(t.a, t.b), HexCoord(t.a + 1, t.b), HexCoord(t.a, t.b + 1))
    return (HexCoord(t.a + 1, t.b), HexCoord(t.a, t.b + 1), HexCoord(t.a + 1, t.b + 1))


def hex_tris(h: HexCoord) -> tuple[TriCoord, ...]:
    """The six triangles adjacent to a hexagon, indexed by slot.

    Slot k is the triangle in direction 30 + 60*k degrees.
    """
    a, b = h
    return (
        TriCoord(a, b, UP),
        TriCoord(a - 1, b, DOWN),
        TriCoord(a - 1, b, UP),
        TriCoord(a - 1, b - 1, DOWN),
        TriCoord(a, b - 1, UP),
        TriCoord(a, b - 1, DOWN),
    )


def tri_slot(t: TriCoord, h: HexCoord) -> int:
    """Slot of triangle ``t`` around hexagon ``h``; raises if not adjacent."""
    for k, cand in enumerate(hex_tris(h)):
        if cand == t:
            return k
    raise KagomeError(f"triangle {t} not adjacent to hexagon {h}")


def vertex_between(c1: HexCoord, c2: HexCoord) -> Vertex:
    if c2 < c1:
        c1, c2 = c2, c1
    if (c2.a - c1.a, c2.b - c1.b) not in HEX_NEIGHBOR_STEPS:
        raise KagomeError(f"hexagons {c1} and {c2} are not adjacent")
    return Vertex(c1, c2)


def vertex_tris(v: Vertex) -> tuple[TriCoord, TriCoord]:
    """The Up and Down faces containing the center-lattice edge ``v``."""
    (a1, b1), (a2, b2) = v
    d = (a2 - a1, b2 - b1)
    if d == (1, 0):  # east edge {(a,b),(a+1,b)}
        return TriCoord(a1, b1, UP), TriCoord(a1, b1 - 1, DOWN)
    if d == (0, 1):  # north-east edge {(a,b),(a,b+1)}
        return TriCoord(a1, b1, UP), TriCoord(a1 - 1, b1, DOWN)
    if d == (1, -1):  # north-west edge {(a,b+1),(a+1,b)}, lex-least is (a,b+1)
        return TriCoord(a1, b1 - 1, UP), TriCoord(a1, b1 - 1, DOWN)
    raise KagomeError(f"bad vertex {v}")


def incident_cells(v: Vertex) -> tuple[TriCoord, HexCoord, TriCoord, HexCoord]:
    """The four cells around a vertex in cyclic order (t, h, t, h)."""
    t_up, t_dn = vertex_tris(v)
    return (t_up, v.h1, t_dn, v.h2)


def vertex_neighbors(v: Vertex) -> list[Vertex]:
    """The four lattice vertices sharing a Kagome edge with ``v``."""
    out = []
    for t in vertex_tris(v):
        third = [c for c in tri_corners(t) if c != v.h1 and c != v.h2]
        x = third[0]
        out.append(vertex_between(v.h1, x))
        out.append(vertex_between(v.h2, x))
    return out


def hex_vertices(h: HexCoord) -> list[Vertex]:
    return [vertex_between(h, nb) for nb in hex_neighbors(h)]


def tri_vertices(t: TriCoord) -> list[Vertex]:
    c1, c2, c3 = tri_corners(t)
    return [vertex_between(c1, c2), vertex_between(c1, c3), vertex_between(c2, c3)]


def hex_pos2(h: HexCoord) -> tuple[int, int]:
    """Center position in doubled units: real position is (x/2, y/2*sqrt(3))."""
    return (2 * (2 * h.a + h.b), 2 * h.b)


def vertex_pos2(v: Vertex) -> tuple[int, int]:
    x1, y1 = hex_pos2(v.h1)
    x2, y2 = hex_pos2(v.h2)
    return ((x1 + x2) // 2, (y1 + y2) // 2)


def tri_centroid6(t: TriCoord) -> tuple[int, int]:
    """Centroid in six-fold units: real position is (x/6, y/6*sqrt(3))."""
    cs = tri_corners(t)
    return (sum(hex_pos2(c)[0] for c in cs), sum(hex_pos2(c)[1] for c in cs))


def edge_canonical_away(v: Vertex, m: Vertex, t: TriCoord) -> bool:
    """True if the canonical orientation of Kagome edge (v, m) points v -> m.

    The canonical orientation keeps the triangle on the right and the
    hexagon on the left; equivalently it runs clockwise around the
    triangle ``t`` that borders the edge.
    """
    vx, vy = vertex_pos2(v)
    mx, my = vertex_pos2(m)
    cx, cy = tri_centroid6(t)
    # common integer basis: vertex positions carry a factor 2, centroids 6
    dx, dy = 3 * (mx - vx), 3 * (my - vy)
    wx, wy = cx - 3 * vx, cy - 3 * vy
    cross = dx * wy - dy * wx
    if cross == 0:
        raise KagomeError("degenerate edge orientation")
    return cross < 0  # triangle centroid strictly right of v -> m


@dataclass(frozen=True)
class Region:
    """A finite, simply connected set of Kagome cells.

    ``hexes`` and ``tris`` are the cells; every stored region satisfies
    ``len(tris) == 2 * len(hexes)``, is edge-connected and has no holes
    (checked at construction).  ``family`` and ``n`` record how the
    region was built and are carried through serialization.
    """

    family: str
    n: int
    hexes: frozenset[HexCoord]
    tris: frozenset[TriCoord]

    def __post_init__(self):
        if len(self.tris) != 2 * len(self.hexes):
            raise KagomeError(
                f"region needs 2 triangles per hexagon, got {len(self.hexes)} "
                f"hexagons and {len(self.tris)} triangles"
            )
        if not self.hexes:
            if self.tris:
                raise KagomeError("triangles without hexagons")
            return
        _check_connected(self)
        _check_simply_connected(self)

    # -- derived structure ------------------------------------------------

    @cached_property
    def hex_list(self) -> tuple[HexCoord, ...]:
        return tuple(sorted(self.hexes))

    @cached_property
    def tri_list(self) -> tuple[TriCoord, ...]:
        return tuple(sorted(self.tris))

    @cached_property
    def hex_index(self) -> dict[HexCoord, int]:
        return {h: i for i, h in enumerate(self.hex_list)}

    @cached_property
    def tri_index(self) -> dict[TriCoord, int]:
        return {t: i for i, t in enumerate(self.tri_list)}

    @cached_property
    def vertices(self) -> tuple[Vertex, ...]:
        """All lattice vertices incident to at least one region cell."""
        seen: set[Vertex] = set()
        for h in self.hexes:
            seen.update(hex_vertices(h))
        for t in self.tris:
            seen.update(tri_vertices(t))
        return tuple(sorted(seen))

    @cached_property
    def inner_vertices(self) -> tuple[Vertex, ...]:
        """Vertices whose four incident cells all belong to the region."""
        out = []
        for v in self.vertices:
            t_up, h1, t_dn, h2 = incident_cells(v)
            if (
                t_up in self.tris
                and t_dn in self.tris
                and h1 in self.hexes
                and h2 in self.hexes
            ):
                out.append(v)
        return tuple(out)

    @cached_property
    def inner_set(self) -> frozenset[Vertex]:
        return frozenset(self.inner_vertices)

    @cached_property
    def boundary_vertices(self) -> tuple[Vertex, ...]:
        return tuple(v for v in self.vertices if v not in self.inner_set)

    @cached_property
    def base_vertex(self) -> Vertex:
        """Lexicographically least boundary vertex; heights are 0 here."""
        if not self.boundary_vertices:
            raise KagomeError("empty region has no base vertex")
        return min(self.boundary_vertices)

    @cached_property
    def tri_adjacent_hexes(self) -> dict[TriCoord, tuple[HexCoord, ...]]:
        """For each region triangle, its in-region corner hexagons."""
        return {
            t: tuple(c for c in tri_corners(t) if c in self.hexes)
            for t in self.tri_list
        }

    @cached_property
    def hex_adjacent_tris(self) -> dict[HexCoord, tuple[TriCoord, ...]]:
        """For each region hexagon, its in-region adjacent triangles."""
        return {
            h: tuple(t for t in hex_tris(h) if t in self.tris) for h in self.hex_list
        }

    def __contains__(self, cell) -> bool:
        if isinstance(cell, TriCoord):
            return cell in self.tris
        return cell in self.hexes

    def __repr__(self) -> str:
        return f"Region({self.family}:{self.n}, {len(self.hexes)} hexes)"


def _cell_edge_graph_neighbors(region: Region, cell):
    """Cells of the region sharing a Kagome edge with ``cell``."""
    if isinstance(cell, TriCoord):
        return [c for c in tri_corners(cell) if c in region.hexes]
    return [t for t in hex_tris(cell) if t in region.tris]


def _check_connected(region: Region) -> None:
    cells: set = set(region.hexes) | set(region.tris)
    start = next(iter(cells))
    stack = [start]
    seen = {start}
    while stack:
        c = stack.pop()
        for nb in _cell_edge_graph_neighbors(region, c):
            if nb not in seen:
                seen.add(nb)
                stack.append(nb)
    if seen != cells:
        raise KagomeError("region is not edge-connected")


def _check_simply_connected(region: Region) -> None:
    """Euler characteristic check: V - E + F must equal 1 for a disk."""
    faces = len(region.hexes) + len(region.tris)
    verts = len(region.vertices)
    edges = 0
    # every Kagome edge borders exactly one triangle and one hexagon; count
    # per triangle side plus hexagon sides whose triangle is outside
    for t in region.tris:
        edges += 3
    for h in region.hexes:
        for t in hex_tris(h):
            if t not in region.tris:
                edges += 1
    if verts - edges + faces != 1:
        raise KagomeError(
            f"region is not simply connected (V-E+F = {verts - edges + faces})"
        )


# -- region families -------------------------------------------------------


def make_lozenge_region(n: int) -> Region:
    """Flat-sided 60/120-degree rhombus with n x n hexagons (side 2n).

    Triangles are ``Up(a,b)`` and ``Down(a-1,b-1)`` for every hexagon
    ``(a,b)``, which makes the boundary four straight lines and gives the
    all-lozenge tiling ``(a,b) + Up(a,b) + Down(a-1,b-1)`` by construction.
    """
    if n < 0:
        raise KagomeError("lozenge size must be >= 0")
    hexes = {HexCoord(a, b) for a in range(n) for b in range(n)}
    tris: set[TriCoord] = set()
    for a in range(n):
        for b in range(n):
            tris.add(TriCoord(a, b, UP))
            tris.add(TriCoord(a - 1, b - 1, DOWN))
    return Region("lozenge", n, frozenset(hexes), frozenset(tris))


def make_square_region(n: int) -> Region:
    """Staggered n x n hexagon block whose bounding box is near-square.

    Row b holds hexagons ``(-(b//2) + i, b)`` for i in [0, n); the
    half-row stagger cancels the shear of the axial basis, leaving a
    bounding box of aspect 2:sqrt(3).  Same triangle recipe as the
    lozenge, so the region is tileable by construction (n^2 tiles).
    """
    if n < 1:
        raise KagomeError("square size must be >= 1")
    hexes: set[HexCoord] = set()
    tris: set[TriCoord] = set()
    for b in range(n):
        a0 = -(b // 2)
        for i in range(n):
            a = a0 + i
            hexes.add(HexCoord(a, b))
            tris.add(TriCoord(a, b, UP))
            tris.add(TriCoord(a - 1, b - 1, DOWN))
    return Region("square", n, frozenset(hexes), frozenset(tris))


def make_nonflat_lozenge(n: int) -> Region:
    """Lozenge-shaped region whose boundary height climbs linearly.

    Keeps the n x n hexagon block of the flat lozenge but, for every
    odd column, moves the under-row ``Down`` triangle to a protruding
    tooth above the top row.  A bare stretch of hexagon row boundary
    gains height at the maximal rate (+1 per edge) and a tooth loses 3,
    so boundary heights span ``3*(n//2) + 2`` against a span of 2 for
    the flat lozenge.  Only every other column is modified, which keeps
    the slope sub-maximal: the region stays tileable in many ways (the
    all-lozenge pairing works on even columns) rather than freezing.
    """
    if n < 2:
        raise KagomeError("nonflat lozenge size must be >= 2")
    hexes = {HexCoord(a, b) for a in range(n) for b in range(n)}
    tris: set[TriCoord] = set()
    for a in range(n):
        for b in range(n):
            tris.add(TriCoord(a, b, UP))
            if b > 0:
                tris.add(TriCoord(a - 1, b - 1, DOWN))
        if a % 2 == 0:
            tris.add(TriCoord(a - 1, -1, DOWN))
        else:
            tris.add(TriCoord(a - 1, n - 1, DOWN))
    return Region("nonflat", n, frozenset(hexes), frozenset(tris))


def region_from_cells(
    hexes: Iterable[HexCoord], tris: Iterable[TriCoord], family: str = "custom", n: int = 0
) -> Region:
    """Build a region from raw cell sets (used by tests and deserialization)."""
    return Region(
        family,
        n,
        frozenset(HexCoord(*h) for h in hexes),
        frozenset(TriCoord(*t) for t in tris),
    )


_FAMILIES = {
    "lozenge": make_lozenge_region,
    "square": make_square_region,
    "nonflat": make_nonflat_lozenge,
}


def make_region(family: str, n: int) -> Region:
    try:
        ctor = _FAMILIES[family]
    except KeyError:
        raise KagomeError(f"unknown region family {family!r}") from None
    return ctor(n)
