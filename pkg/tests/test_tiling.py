import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kagome.errors import KagomeError, NotFlippable, NotTileable
from kagome.lattice import make_lozenge_region, make_nonflat_lozenge, make_square_region
from kagome.tiling import (
    TileType,
    Tiling,
    apply_flip,
    available_flips,
    boundary_heights,
    classify_tile,
    find_tiling,
    fish_count,
    flip_at,
    height_field,
    local_extrema,
    pointwise_leq,
    slot_separation,
    tile_type_counts,
    total_height,
    validate_tiling,
)


def test_slot_separation_table():
    assert [slot_separation(0, s) for s in range(6)] == [0, 1, 2, 3, 2, 1]
    assert slot_separation(4, 1) == 3


def test_find_tiling_single_hexagon():
    region = make_lozenge_region(1)
    t = find_tiling(region)
    validate_tiling(t)
    assert len(t.assign) == 2
    assert classify_tile(t, next(iter(region.hexes))) is TileType.LOZENGE


def test_every_family_is_tileable():
    for region in (make_lozenge_region(4), make_square_region(4),
                   make_nonflat_lozenge(4)):
        validate_tiling(find_tiling(region))


def test_restrained_find_tiling_has_no_fish():
    for region in (make_lozenge_region(4), make_square_region(4),
                   make_nonflat_lozenge(3)):
        assert fish_count(find_tiling(region, restrained=True)) == 0


def test_even_nonflat_regions_admit_no_fish_free_tiling():
    # the moved teeth force at least one fish when the column count is even
    for n in (2, 4):
        with pytest.raises(NotTileable):
            find_tiling(make_nonflat_lozenge(n), restrained=True)


def test_tile_type_counts_sum(loz3):
    t = find_tiling(loz3)
    counts = tile_type_counts(t)
    assert sum(counts.values()) == len(loz3.hexes)
    assert counts[TileType.FISH] == fish_count(t)


def test_validate_rejects_foreign_and_double_assignment(loz2):
    t = find_tiling(loz2)
    h0 = loz2.hex_list[0]
    bad = dict(t.assign)
    for tri in loz2.tri_list:
        bad[tri] = h0
    with pytest.raises(KagomeError):
        validate_tiling(Tiling(loz2, bad))


def test_boundary_heights_match_any_tiling(loz3, sq3, nf3):
    for region in (loz3, sq3, nf3):
        fixed = boundary_heights(region)
        h = height_field(find_tiling(region))
        assert all(h[v] == hv for v, hv in fixed.items())


def test_height_base_vertex_is_zero(loz3):
    assert height_field(find_tiling(loz3))[loz3.base_vertex] == 0


def test_flip_changes_height_by_three_only_at_vertex(loz3):
    t = find_tiling(loz3)
    for v, info in available_flips(t).items():
        before = height_field(t)
        after = height_field(apply_flip(t, v))
        for m in loz3.vertices:
            want = 3 * info.direction if m == v else 0
            assert after[m] - before[m] == want


def test_flip_info_matches_fish_recount(loz3):
    t = find_tiling(loz3)
    n0 = fish_count(t)
    for v, info in available_flips(t).items():
        assert fish_count(apply_flip(t, v)) - n0 == info.fish_delta


def test_double_fish_changers_exist():
    # a flip can create or destroy two fish at once; the library reports
    # the true change instead of clamping it
    region = make_square_region(3)
    graph_deltas = set()
    stack = [find_tiling(region)]
    seen = {stack[0]}
    while stack:
        t = stack.pop()
        for v, info in available_flips(t).items():
            graph_deltas.add(info.fish_delta)
            nxt = apply_flip(t, v)
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    assert 2 in graph_deltas and -2 in graph_deltas


def test_flip_at_rejects_boundary_and_frozen_vertices(loz3):
    t = find_tiling(loz3)
    flippable = set(available_flips(t))
    for v in loz3.boundary_vertices:
        with pytest.raises(NotFlippable):
            flip_at(t, v)
    frozen = [v for v in loz3.inner_vertices if v not in flippable]
    for v in frozen[:3]:
        with pytest.raises(NotFlippable):
            flip_at(t, v)


def test_restrained_flag_means_no_fish_before_or_after(loz3):
    t = find_tiling(loz3)
    for v, info in available_flips(t).items():
        after = apply_flip(t, v)
        involved = {t.assign[tri] for tri in
                    set(t.assign) if t.assign[tri] != after.assign[tri]}
        no_fish = all(classify_tile(s, h) is not TileType.FISH
                      for s in (t, after) for h in involved)
        assert info.restrained == no_fish


def test_total_height_and_pointwise_order(loz2):
    from kagome.minimal import minimal_tiling
    t = minimal_tiling(loz2, flips="all")
    flips = available_flips(t)
    v = next(v for v, i in flips.items() if i.direction > 0)
    up = apply_flip(t, v)
    assert pointwise_leq(t, up)
    assert not pointwise_leq(up, t)
    assert total_height(up) == total_height(t) + 3


def test_local_extrema_nesting(loz3):
    t = find_tiling(loz3)
    minima, maxima, fmin, fmax = local_extrema(t)
    inner = set(loz3.inner_vertices)
    assert fmin <= minima <= inner and fmax <= maxima <= inner
    assert not (minima & maxima)
    flips = available_flips(t)
    for v in fmin:
        assert flips[v].direction == 1 and flips[v].restrained
    for v in fmax:
        assert flips[v].direction == -1 and flips[v].restrained


def test_untileable_region_raises():
    # leave the second hexagon only one adjacent triangle in the region
    from kagome.lattice import HexCoord, hex_tris, region_from_cells
    h1, h2 = HexCoord(0, 0), HexCoord(1, 0)
    shared = sorted(set(hex_tris(h1)) & set(hex_tris(h2)))
    h1_only = sorted(set(hex_tris(h1)) - set(hex_tris(h2)))
    region = region_from_cells({h1, h2}, set(shared[:1]) | set(h1_only[:3]))
    with pytest.raises(NotTileable):
        find_tiling(region)


@given(st.lists(st.integers(0, 10 ** 6), min_size=1, max_size=30))
@settings(max_examples=25, deadline=None)
def test_random_flip_walks_stay_valid(picks):
    region = make_square_region(3)
    t = find_tiling(region)
    fixed = boundary_heights(region)
    for p in picks:
        flips = available_flips(t)
        if not flips:
            break
        v = sorted(flips)[p % len(flips)]
        t = apply_flip(t, v)
    validate_tiling(t)
    h = height_field(t)
    assert all(h[v] == hv for v, hv in fixed.items())


def test_tiling_equality_and_hash(loz2):
    a = find_tiling(loz2)
    b = Tiling(loz2, dict(a.assign))
    assert a == b and hash(a) == hash(b) and len({a, b}) == 1
