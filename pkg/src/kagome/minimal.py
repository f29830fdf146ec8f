"""Extremal tilings: greedy flip descent/ascent, boundary-determined
height floors and ceilings, and the contour-peeled minimal restrained
tiling of a lozenge region.

Greedy descent applies height-decreasing flips until none remain; the
endpoint does not depend on the flip order (tested against enumeration,
not assumed).  Height floors turn the fact that boundary heights are
tiling-independent into a direct construction: going counterclockwise
around a hexagon, each edge raises the height by 1 on a tile boundary
and drops it by 2 inside a tile, and a fish is exactly two consecutive
drops, so extremal height fields are multi-source shortest-path
solutions of the resulting difference constraints.  The peel constructs
the unique restrained tiling without inner flippable local maxima two
boundary lines at a time, with each placement forced by the floor.
"""

from __future__ import annotations

from collections import deque

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from kagome.errors import KagomeError, NotFlippable
from kagome.lattice import (
    HexCoord,
    Region,
    TriCoord,
    Vertex,
    edge_canonical_away,
    hex_neighbors,
    hex_tris,
    hex_vertices,
    make_lozenge_region,
    tri_corners,
    tri_slot,
    tri_vertices,
    vertex_between,
)
from kagome.tiling import Tiling, apply_flip, boundary_heights, flip_at, validate_tiling


def _receivers(region: Region, v: Vertex) -> list[Vertex]:
    """Inner vertices whose flip availability can change with a flip at v.

    Triangle owners change only at v's two triangles; tile types (the
    restrained flag) change only at v's two hexagons.
    """
    from kagome.lattice import incident_cells

    t_up, h1, t_dn, h2 = incident_cells(v)
    out: set[Vertex] = set()
    out.update(tri_vertices(t_up))
    out.update(tri_vertices(t_dn))
    out.update(hex_vertices(h1))
    out.update(hex_vertices(h2))
    return [u for u in out if u in region.inner_set]


def _greedy_extremal(tiling: Tiling, flips: str, direction: int) -> Tiling:
    if flips not in ("all", "restrained"):
        raise KagomeError(f"unknown flip family {flips!r}")
    region = tiling.region
    queue = deque(region.inner_vertices)
    queued = set(region.inner_vertices)
    while queue:
        v = queue.popleft()
        queued.discard(v)
        try:
            info = flip_at(tiling, v)
        except NotFlippable:
            continue
        if info.direction != direction:
            continue
        if flips == "restrained" and not info.restrained:
            continue
        tiling = apply_flip(tiling, v)
        for u in _receivers(region, v):
            if u not in queued:
                queued.add(u)
                queue.append(u)
    return tiling


def greedy_descent(tiling: Tiling, flips: str = "all") -> Tiling:
    """Apply lowering flips until none remain (order-independent endpoint)."""
    return _greedy_extremal(tiling, flips, -1)


def greedy_ascent(tiling: Tiling, flips: str = "all") -> Tiling:
    """Apply raising flips until none remain."""
    return _greedy_extremal(tiling, flips, +1)


def _hexagon_sides(region: Region, h: HexCoord):
    """The tileable sides of ``h``: (slot, v_from, v_to, triangle), with
    v_from -> v_to the canonical (counterclockwise) orientation."""
    ring = [vertex_between(h, nb) for nb in hex_neighbors(h)]
    tris = hex_tris(h)
    out = []
    for k in range(6):
        t = tris[k]
        if t not in region.tris:
            continue
        v_from, v_to = ring[k], ring[(k + 1) % 6]
        if not edge_canonical_away(v_from, v_to, t):
            raise KagomeError("hexagon side not oriented counterclockwise")
        out.append((k, v_from, v_to, t))
    return out


def extremal_heights(region: Region, side: str, restrained: bool = False) -> dict[Vertex, int]:
    """Pointwise lowest ("floor") or highest ("ceiling") height field over
    the region's tilings, directly from the boundary heights.

    Every interior edge steps by +1 or -2 counterclockwise around its
    hexagon, and forbidding fish forbids two consecutive -2 steps, so
    the extremal fields solve a difference-constraint system: a
    multi-source shortest-path problem seeded with the (tiling
    independent) boundary heights.
    """
    if side not in ("floor", "ceiling"):
        raise KagomeError(f"side must be floor or ceiling, not {side!r}")
    verts = region.vertices
    index = {v: i for i, v in enumerate(verts)}
    n = len(verts)
    fixed = boundary_heights(region)

    rows: list[int] = []
    cols: list[int] = []
    costs: list[int] = []

    def arc(i: int, j: int, c: int) -> None:
        rows.append(i)
        cols.append(j)
        costs.append(c)

    for h in region.hexes:
        sides = _hexagon_sides(region, h)
        for k, v_from, v_to, _ in sides:
            i, j = index[v_from], index[v_to]
            if side == "floor":
                # h(to) >= h(from) - 2 and h(from) >= h(to) - 1
                arc(i, j, 2)
                arc(j, i, 1)
            else:
                # h(to) <= h(from) + 1 and h(from) <= h(to) + 2
                arc(i, j, 1)
                arc(j, i, 2)
        if restrained:
            by_slot = {k: (v_from, v_to) for k, v_from, v_to, _ in sides}
            for k, (v_from, _) in by_slot.items():
                nxt = by_slot.get((k + 1) % 6)
                if nxt is None:
                    continue
                i, j = index[v_from], index[nxt[1]]
                # no fish: the two-step drop -4 is forbidden, so
                # h(v_{k+2}) >= h(v_k) - 1 and h(v_k) <= h(v_{k+2}) + 1
                if side == "floor":
                    arc(i, j, 1)
                else:
                    arc(j, i, 1)

    # supersource carrying the boundary offsets
    src = n
    if side == "floor":
        base = max(fixed.values())
        for v, hv in fixed.items():
            arc(src, index[v], base - hv)
    else:
        base = min(fixed.values())
        for v, hv in fixed.items():
            arc(src, index[v], hv - base)
    graph = csr_matrix(
        (np.array(costs, dtype=np.float64), (np.array(rows), np.array(cols))),
        shape=(n + 1, n + 1),
    )
    dist = dijkstra(graph, indices=src)
    if np.isinf(dist[:n]).any():
        raise KagomeError("height constraint graph is not connected")
    out: dict[Vertex, int] = {}
    for v, i in index.items():
        d = int(round(dist[i]))
        out[v] = base - d if side == "floor" else base + d
    for v, hv in fixed.items():
        if out[v] != hv:
            raise KagomeError("extremal heights conflict with boundary heights")
    return out


def tiling_from_heights(region: Region, heights: dict[Vertex, int]) -> Tiling:
    """Rebuild the tiling whose height field is ``heights``: each hexagon
    owns exactly the two triangles across its -2 steps."""
    assign: dict[TriCoord, HexCoord] = {}
    for h in region.hexes:
        owned = []
        for _, v_from, v_to, t in _hexagon_sides(region, h):
            step = heights[v_to] - heights[v_from]
            if step == -2:
                owned.append(t)
            elif step != 1:
                raise KagomeError(f"height step {step} at {h} is not a tiling")
        if len(owned) != 2:
            raise KagomeError(f"hexagon {h} owns {len(owned)} triangles, wanted 2")
        for t in owned:
            if t in assign:
                raise KagomeError(f"triangle {t} claimed twice")
            assign[t] = h
    tiling = Tiling(region, assign)
    validate_tiling(tiling)
    return tiling


def minimal_tiling(region: Region, flips: str = "restrained") -> Tiling:
    """The unique pointwise-lowest tiling: fish-free for "restrained",
    unrestricted for "all"."""
    return tiling_from_heights(
        region, extremal_heights(region, "floor", restrained=flips == "restrained")
    )


def maximal_tiling(region: Region, flips: str = "all") -> Tiling:
    """The unique pointwise-highest tiling."""
    return tiling_from_heights(
        region, extremal_heights(region, "ceiling", restrained=flips == "restrained")
    )


# Closed-form minimal patterns for the smallest lozenges, keyed by size.
# Entries are (tri_a, tri_b, orientation, hex_a, hex_b) relative to the
# lozenge's lower-left hexagon.  Frozen from exhaustive enumeration.
_BASE_PATTERNS: dict[int, tuple[tuple[int, int, str, int, int], ...]] = {
    1: (
        (0, 0, "U", 0, 0),
        (-1, -1, "D", 0, 0),
    ),
    2: (
        (-1, -1, "D", 0, 0),
        (0, -1, "D", 0, 0),
        (-1, 0, "D", 0, 1),
        (0, 0, "D", 0, 1),
        (0, 0, "U", 1, 0),
        (1, 0, "U", 1, 0),
        (0, 1, "U", 1, 1),
        (1, 1, "U", 1, 1),
    ),
    3: (
        (-1, -1, "D", 0, 0),
        (0, -1, "D", 0, 0),
        (-1, 0, "D", 0, 1),
        (0, 0, "D", 0, 1),
        (-1, 1, "D", 0, 2),
        (0, 1, "D", 0, 2),
        (0, 0, "U", 1, 0),
        (1, -1, "D", 1, 0),
        (0, 1, "U", 1, 1),
        (1, 0, "D", 1, 1),
        (0, 2, "U", 1, 2),
        (1, 1, "D", 1, 2),
        (1, 0, "U", 2, 0),
        (2, 0, "U", 2, 0),
        (1, 1, "U", 2, 1),
        (2, 1, "U", 2, 1),
        (1, 2, "U", 2, 2),
        (2, 2, "U", 2, 2),
    ),
}


class _PeelState:
    """Mutable placement state shared across peeling rounds."""

    __slots__ = ("region", "assign", "owned")

    def __init__(self, region: Region):
        self.region = region
        self.assign: dict[TriCoord, HexCoord] = {}
        self.owned: dict[HexCoord, list[TriCoord]] = {h: [] for h in region.hex_list}

    def complete(self, h: HexCoord) -> bool:
        return len(self.owned[h]) == 2

    def place(self, h: HexCoord, t1: TriCoord, t2: TriCoord) -> None:
        self.assign[t1] = h
        self.assign[t2] = h
        self.owned[h] = [t1, t2]

    def unplace(self, h: HexCoord, t1: TriCoord, t2: TriCoord) -> None:
        del self.assign[t1]
        del self.assign[t2]
        self.owned[h] = []


def _makes_inner_lower_restrained(state: _PeelState, h: HexCoord) -> bool:
    """True if completing ``h`` finished an inner vertex that now hosts a
    restrained lowering flip (a flippable local maximum in the making)."""
    from kagome.lattice import incident_cells
    from kagome.tiling import _SEPARATION_TYPE, TileType, _flip_direction, slot_separation

    region = state.region
    for u in hex_vertices(h):
        if u not in region.inner_set:
            continue
        t_up, h1, t_dn, h2 = incident_cells(u)
        if not (state.complete(h1) and state.complete(h2)):
            continue
        own_up = state.assign.get(t_up)
        own_dn = state.assign.get(t_dn)
        if {own_up, own_dn} != {h1, h2} or own_up == own_dn:
            continue
        if _flip_direction(u, t_up, own_up) != -1:
            continue
        # after the swap both tiles must stay fish-free for the flip
        # to be restrained (before-types are non-fish by construction)
        restrained = True
        for hx in (h1, h2):
            mine = t_up if own_up == hx else t_dn
            other = t_dn if own_up == hx else t_up
            partner = [t for t in state.owned[hx] if t != mine][0]
            sep = slot_separation(tri_slot(other, hx), tri_slot(partner, hx))
            if _SEPARATION_TYPE[sep] is TileType.FISH:
                restrained = False
                break
        if restrained:
            return True
    return False


def _strands_neighbor(state: _PeelState, h: HexCoord, t1: TriCoord, t2: TriCoord) -> bool:
    """True if the placement leaves an adjacent cell uncoverable."""
    from kagome.tiling import slot_separation

    region = state.region
    for t in region.hex_adjacent_tris[h]:
        if t in state.assign:
            continue
        if not any(
            c in region.hexes and not state.complete(c) for c in tri_corners(t)
        ):
            return True
    for t in (t1, t2):
        for c in tri_corners(t):
            if c not in region.hexes or state.complete(c):
                continue
            free = [
                tri_slot(x, c)
                for x in region.hex_adjacent_tris[c]
                if x not in state.assign
            ]
            if not any(
                slot_separation(s1, s2) >= 2
                for i, s1 in enumerate(free)
                for s2 in free[i + 1 :]
            ):
                return True
    return False


def _candidate_pairs(state: _PeelState, h: HexCoord):
    from kagome.tiling import slot_separation

    avail = [t for t in state.region.hex_adjacent_tris[h] if t not in state.assign]
    return [
        (t1, t2)
        for i, t1 in enumerate(avail)
        for t2 in avail[i + 1 :]
        if slot_separation(tri_slot(t1, h), tri_slot(t2, h)) >= 2
    ]


def _lozenge_cells(a0: int, b0: int, s: int) -> tuple[set, set]:
    hexes = {HexCoord(a0 + i, b0 + j) for i in range(s) for j in range(s)}
    tris = {TriCoord(a0 + i, b0 + j, "U") for i in range(s) for j in range(s)}
    tris |= {TriCoord(a0 + i - 1, b0 + j - 1, "D") for i in range(s) for j in range(s)}
    return hexes, tris


def _ring_scan(a0: int, b0: int, s: int):
    """Hexagons of the outer two lines of a sub-lozenge, in forced order:
    top two rows left to right, bottom two rows right to left, left two
    columns downward, right two columns upward."""
    for b in (b0 + s - 1, b0 + s - 2):
        for a in range(a0, a0 + s):
            yield HexCoord(a, b)
    for b in (b0, b0 + 1):
        for a in range(a0 + s - 1, a0 - 1, -1):
            yield HexCoord(a, b)
    for a in (a0, a0 + 1):
        for b in range(b0 + s - 3, b0 + 1, -1):
            yield HexCoord(a, b)
    for a in (a0 + s - 1, a0 + s - 2):
        for b in range(b0 + 2, b0 + s - 2):
            yield HexCoord(a, b)


def contour_peel_minimal(region: Region) -> Tiling:
    """Construct the unique restrained tiling of a lozenge region with no
    inner flippable local maxima, without search.

    Works inward two lines at a time: every boundary hexagon admits
    exactly one non-fish tile that neither completes an inner vertex
    carrying a restrained lowering flip nor strands a neighboring cell.
    Each round shrinks the lozenge size by four; sizes one to three are
    closed by frozen patterns.  Raises :class:`KagomeError` if a scan
    step is not forced (which would mean the region was not built by
    :func:`make_lozenge_region`).
    """
    if region.family != "lozenge":
        raise KagomeError(f"contour peel needs a lozenge region, got {region.family}")
    floor = extremal_heights(region, "floor", restrained=True)
    state = _PeelState(region)
    known = dict(boundary_heights(region))

    def matches_floor(h: HexCoord, owned: tuple[TriCoord, TriCoord]) -> bool:
        """Walk the hexagon's six sides from a known vertex; True if the
        propagated heights agree with everything known and sit on the
        floor (any lift above it would ripen into a flippable maximum)."""
        ring = [vertex_between(h, nb) for nb in hex_neighbors(h)]
        tris = hex_tris(h)
        start = next((k for k, v in enumerate(ring) if v in known), None)
        if start is None:
            raise KagomeError(f"no known height around {h}")
        fresh: dict[Vertex, int] = {}
        cur = known[ring[start]]
        for off in range(6):
            k = (start + off) % 6
            cur_v, nxt_v = ring[k], ring[(k + 1) % 6]
            have = known.get(cur_v, fresh.get(cur_v))
            if have is None:
                fresh[cur_v] = cur
            elif have != cur:
                return False
            if cur != floor[cur_v]:
                return False
            cur += -2 if tris[k] in owned else 1
        known.update(fresh)
        return True

    def place_forced(h: HexCoord) -> None:
        survivors = []
        saved = dict(known)
        for t1, t2 in _candidate_pairs(state, h):
            known.clear()
            known.update(saved)
            if matches_floor(h, (t1, t2)):
                survivors.append((t1, t2, dict(known)))
        if len(survivors) != 1:
            raise KagomeError(
                f"contour peel not forced at {h}: {len(survivors)} candidates match"
            )
        t1, t2, heights = survivors[0]
        known.clear()
        known.update(heights)
        state.place(h, t1, t2)
        if _makes_inner_lower_restrained(state, h) or _strands_neighbor(state, h, t1, t2):
            raise KagomeError(f"forced placement at {h} fails the case analysis")

    a0 = b0 = 0
    s = region.n
    while s >= 4:
        for h in _ring_scan(a0, b0, s):
            place_forced(h)
        a0 += 2
        b0 += 2
        s -= 4
        want_hexes, want_tris = _lozenge_cells(a0, b0, s)
        left_hexes = {h for h in region.hex_list if not state.complete(h)}
        left_tris = {t for t in region.tri_list if t not in state.assign}
        if left_hexes != want_hexes or left_tris != want_tris:
            raise KagomeError("contour peel did not reduce to the inner lozenge")
    for ta, tb, o, ha, hb in _BASE_PATTERNS.get(s, ()):
        t = TriCoord(ta + a0, tb + b0, o)
        h = HexCoord(ha + a0, hb + b0)
        if t in state.assign:
            raise KagomeError("base pattern overlaps the peeled rings")
        state.assign[t] = h
    tiling = Tiling(region, dict(state.assign))
    validate_tiling(tiling)
    from kagome.tiling import height_field

    if height_field(tiling) != floor:
        raise KagomeError("peeled tiling does not realize the height floor")
    return tiling
