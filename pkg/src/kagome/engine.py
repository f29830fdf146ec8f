"""Array back end for long chain runs.

The reference chain semantics live in :mod:`kagome.chain`; this module
replays them on flat numpy state so numba can push millions of steps
per second for the perfect sampler and the coupling-time benchmark.
The vertex stream and coins are bit-identical to :func:`chain.seed_at`.
Fire thresholds are the correctly rounded float64 values of the exact
rational thresholds, so the two back ends can disagree only when a
coin falls within one ulp of an irrational-in-binary threshold (never
for the general and restrained chains, whose only threshold is 1/2).

State per chain is three arrays: ``owner`` (triangle index -> hexagon
index), ``mask`` (hexagon index -> 6-bit set of owned slots) and
``heights`` (inner vertex index -> height).  A flip at an inner vertex
swaps the owners of its two triangles; the mask update is the same XOR
in both flip directions, and only the stepped vertex's height moves.

Coupled runs track the number of triangles on which the two chains
disagree (coalescence is ``diff == 0``) and check the height order at
the stepped vertex after every flip.  Heights change nowhere else, so
that single comparison is a complete monotonicity monitor: the first
step that breaks ``lower <= upper`` is caught at the vertex it breaks.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numba import njit

from kagome.chain import ChainVariant
from kagome.errors import KagomeError
from kagome.lattice import Region, incident_cells, tri_slot
from kagome.tiling import Tiling, _flip_direction, height_field, slot_separation

_U = np.uint64
_M1 = _U(0xBF58476D1CE4E5B9)
_M2 = _U(0x94D049BB133111EB)
_S30 = _U(30)
_S27 = _U(27)
_S31 = _U(31)
_S11 = _U(11)
_COIN_SCALE = 2.0**-53


@dataclass(frozen=True)
class RegionTables:
    """Flat lookup tables for one region, in ``inner_vertices`` order.

    Table dtypes (int64) deliberately differ from the mutable state
    dtypes (int32/uint8) so the compiler knows chain stores cannot
    clobber table entries.
    """

    region: Region
    n_inner: int
    vt_tu: np.ndarray  # int64, up-triangle index per inner vertex
    vt_td: np.ndarray  # int64, down-triangle index
    vt_h1: np.ndarray  # int64, lex-lesser hexagon index
    vt_h2: np.ndarray  # int64, lex-greater hexagon index
    vt_xor1: np.ndarray  # int64, owned-slot mask toggle for h1
    vt_xor2: np.ndarray  # int64, owned-slot mask toggle for h2
    vt_dir1: np.ndarray  # int64, flip direction when h1 owns t_up
    type_of_mask: np.ndarray  # int64[64], 1 fish / 2 trapeze / 3 lozenge


def build_tables(region: Region) -> RegionTables:
    inner = region.inner_vertices
    if not inner:
        raise KagomeError("region has no inner vertices")
    n = len(inner)
    ti = region.tri_index
    hi = region.hex_index
    vt_tu = np.empty(n, np.int64)
    vt_td = np.empty(n, np.int64)
    vt_h1 = np.empty(n, np.int64)
    vt_h2 = np.empty(n, np.int64)
    vt_xor1 = np.empty(n, np.int64)
    vt_xor2 = np.empty(n, np.int64)
    vt_dir1 = np.empty(n, np.int64)
    for k, v in enumerate(inner):
        t_up, h1, t_dn, h2 = incident_cells(v)
        vt_tu[k] = ti[t_up]
        vt_td[k] = ti[t_dn]
        vt_h1[k] = hi[h1]
        vt_h2[k] = hi[h2]
        vt_xor1[k] = (1 << tri_slot(t_up, h1)) | (1 << tri_slot(t_dn, h1))
        vt_xor2[k] = (1 << tri_slot(t_up, h2)) | (1 << tri_slot(t_dn, h2))
        vt_dir1[k] = _flip_direction(v, t_up, h1)
    type_of_mask = np.zeros(64, np.int64)
    for s1 in range(6):
        for s2 in range(s1 + 1, 6):
            type_of_mask[(1 << s1) | (1 << s2)] = slot_separation(s1, s2)
    return RegionTables(
        region, n, vt_tu, vt_td, vt_h1, vt_h2, vt_xor1, vt_xor2, vt_dir1,
        type_of_mask,
    )


def state_arrays(tiling: Tiling) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(owner, mask, heights) arrays for one chain state."""
    region = tiling.region
    ti = region.tri_index
    hi = region.hex_index
    owner = np.empty(len(region.tri_list), np.int32)
    mask = np.zeros(len(region.hex_list), np.uint8)
    for t, h in tiling.assign.items():
        owner[ti[t]] = hi[h]
        mask[hi[h]] |= 1 << tri_slot(t, h)
    hf = height_field(tiling)
    heights = np.array([hf[v] for v in region.inner_vertices], np.int32)
    return owner, mask, heights


def tiling_from_arrays(region: Region, owner: np.ndarray) -> Tiling:
    hl = region.hex_list
    return Tiling(region, {t: hl[owner[i]] for i, t in enumerate(region.tri_list)})


def variant_params(variant: ChainVariant) -> tuple[int, np.ndarray]:
    """(code, fire thresholds) for the step kernels.

    Thresholds are ``[A1, B1, A2, B2]`` with ``A_k = 1/(1 + lam**k)``
    and ``B_k = lam**k/(1 + lam**k)`` rounded to float64.  A lowering
    flip with fish effect d fires on ``coin < A`` (d < 0) or
    ``coin < B`` (d > 0); a raising one on ``coin >= B`` / ``coin >= A``
    (B and A are exactly the complementary interval endpoints).
    """
    if variant.kind == "general":
        code = 0
    elif variant.kind == "weighted":
        code = 1
    else:
        code = 2
    params = np.full(4, 0.5)
    if code == 1:
        for k in (1, 2):
            a = Fraction(1) / (1 + variant.lam**k)
            params[2 * k - 2] = float(a)
            params[2 * k - 1] = float(1 - a)
    return code, params


@njit(cache=True, inline="always")
def _mix64(z):
    z = _U(z)
    z ^= z >> _S30
    z *= _M1
    z ^= z >> _S27
    z *= _M2
    z ^= z >> _S31
    return z


@njit(cache=True, inline="always")
def _fires(tb1, tb2, ta1, ta2, code, params, d, coin):
    """Fire decision given before/after tile types of the two hexagons."""
    if code == 2:
        if tb1 == 1 or tb2 == 1 or ta1 == 1 or ta2 == 1:
            return False
        thr = 0.5
    elif code == 1:
        delta = (1 if ta1 == 1 else 0) + (1 if ta2 == 1 else 0) \
            - (1 if tb1 == 1 else 0) - (1 if tb2 == 1 else 0)
        if delta == 0:
            thr = 0.5
        else:
            base = 0 if (delta == 1 or delta == -1) else 2
            if d < 0:
                thr = params[base] if delta < 0 else params[base + 1]
            else:
                thr = params[base + 1] if delta < 0 else params[base]
    else:
        thr = 0.5
    if d < 0:
        return coin < thr
    return coin >= thr


@njit(cache=True)
def _run_steps(owner, mask, heights,
               vt_tu, vt_td, vt_h1, vt_h2, vt_xor1, vt_xor2,
               vt_dir1, type_of_mask, code, params, rng_seed, i0, i1):
    """Steps indices [i0, i1) of the stream on one chain, in place."""
    n_in = _U(len(vt_tu))
    for i in range(i0, i1):
        x = _mix64(rng_seed ^ _mix64(_U(i)))
        v = np.int64(x % n_in)
        coin = np.float64(_mix64(x) >> _S11) * _COIN_SCALE
        tu = vt_tu[v]
        td = vt_td[v]
        h1 = vt_h1[v]
        h2 = vt_h2[v]
        ou = owner[tu]
        od = owner[td]
        if ou == h1 and od == h2:
            d = vt_dir1[v]
        elif ou == h2 and od == h1:
            d = -vt_dir1[v]
        else:
            continue
        m1 = mask[h1]
        m2 = mask[h2]
        n1 = m1 ^ vt_xor1[v]
        n2 = m2 ^ vt_xor2[v]
        if _fires(type_of_mask[m1], type_of_mask[m2],
                  type_of_mask[n1], type_of_mask[n2], code, params, d, coin):
            owner[tu] = od
            owner[td] = ou
            mask[h1] = np.uint8(n1)
            mask[h2] = np.uint8(n2)
            heights[v] += 3 * d


@njit(cache=True)
def _coupled_run(owner_a, mask_a, heights_a, owner_b, mask_b, heights_b,
                 vt_tu, vt_td, vt_h1, vt_h2, vt_xor1, vt_xor2,
                 vt_dir1, type_of_mask, code, params, rng_seed, i0, i1,
                 diff, check_order):
    """Coupled steps over [i0, i1); stops early on coalescence.

    Returns (diff, last_index, violated): the number of differing
    triangles, the last index actually stepped (i0 - 1 if none), and
    whether chain a's height exceeded chain b's at a stepped vertex.
    ``diff`` must be the true disagreement count at entry.  The body is
    the fused pair of single steps, sharing the per-vertex table loads
    and keeping the diff/order bookkeeping in locals.
    """
    n_in = _U(len(vt_tu))
    last = i0 - 1
    for i in range(i0, i1):
        x = _mix64(rng_seed ^ _mix64(_U(i)))
        v = np.int64(x % n_in)
        coin = np.float64(_mix64(x) >> _S11) * _COIN_SCALE
        last = i
        tu = vt_tu[v]
        td = vt_td[v]
        h1 = vt_h1[v]
        h2 = vt_h2[v]
        x1 = vt_xor1[v]
        x2 = vt_xor2[v]
        d1 = vt_dir1[v]

        au = owner_a[tu]
        ad = owner_a[td]
        da = 0
        if au == h1 and ad == h2:
            da = d1
        elif au == h2 and ad == h1:
            da = -d1
        if da != 0:
            m1 = mask_a[h1]
            m2 = mask_a[h2]
            n1 = m1 ^ x1
            n2 = m2 ^ x2
            if _fires(type_of_mask[m1], type_of_mask[m2],
                      type_of_mask[n1], type_of_mask[n2],
                      code, params, da, coin):
                owner_a[tu] = ad
                owner_a[td] = au
                mask_a[h1] = np.uint8(n1)
                mask_a[h2] = np.uint8(n2)
                heights_a[v] += 3 * da
            else:
                da = 0

        bu = owner_b[tu]
        bd = owner_b[td]
        db = 0
        if bu == h1 and bd == h2:
            db = d1
        elif bu == h2 and bd == h1:
            db = -d1
        if db != 0:
            m1 = mask_b[h1]
            m2 = mask_b[h2]
            n1 = m1 ^ x1
            n2 = m2 ^ x2
            if _fires(type_of_mask[m1], type_of_mask[m2],
                      type_of_mask[n1], type_of_mask[n2],
                      code, params, db, coin):
                owner_b[tu] = bd
                owner_b[td] = bu
                mask_b[h1] = np.uint8(n1)
                mask_b[h2] = np.uint8(n2)
                heights_b[v] += 3 * db
            else:
                db = 0

        if da != 0 or db != 0:
            if check_order and heights_a[v] > heights_b[v]:
                return diff, last, True
            # owner values after the step, from locals
            pau, pad = (ad, au) if da != 0 else (au, ad)
            pbu, pbd = (bd, bu) if db != 0 else (bu, bd)
            before = (1 if au != bu else 0) + (1 if ad != bd else 0)
            after = (1 if pau != pbu else 0) + (1 if pad != pbd else 0)
            diff += after - before
            if diff == 0:
                return 0, last, False
    return diff, last, False


class EngineState:
    """Mutable chain state bound to a table set."""

    __slots__ = ("tables", "owner", "mask", "heights")

    def __init__(self, tables: RegionTables, tiling: Tiling):
        if tiling.region != tables.region:
            raise KagomeError("tiling region does not match tables")
        self.tables = tables
        self.owner, self.mask, self.heights = state_arrays(tiling)

    def copy_from(self, other: "EngineState") -> None:
        self.owner[:] = other.owner
        self.mask[:] = other.mask
        self.heights[:] = other.heights

    def tiling(self) -> Tiling:
        return tiling_from_arrays(self.tables.region, self.owner)


def _table_args(t: RegionTables):
    return (t.vt_tu, t.vt_td, t.vt_h1, t.vt_h2, t.vt_xor1, t.vt_xor2,
            t.vt_dir1, t.type_of_mask)


def run_steps(state: EngineState, variant: ChainVariant, rng_seed: int,
              i0: int, i1: int) -> None:
    """Advance one chain over stream indices [i0, i1)."""
    code, params = variant_params(variant)
    _run_steps(state.owner, state.mask, state.heights,
               *_table_args(state.tables), code, params,
               _U(rng_seed & (2**64 - 1)), i0, i1)


def coupled_run(lower: EngineState, upper: EngineState, variant: ChainVariant,
                rng_seed: int, i0: int, i1: int, diff: int,
                check_order: bool = True) -> tuple[int, int]:
    """Advance the coupled pair over [i0, i1); early exit on coalescence.

    Returns (diff, next_index); raises :class:`OrderViolation` if the
    pair leaves the pointwise height order (the caller guarantees
    ``lower <= upper`` at entry).
    """
    from kagome.errors import OrderViolation

    code, params = variant_params(variant)
    diff, last, violated = _coupled_run(
        lower.owner, lower.mask, lower.heights,
        upper.owner, upper.mask, upper.heights,
        *_table_args(lower.tables), code, params,
        _U(rng_seed & (2**64 - 1)), i0, i1, diff, check_order)
    if violated:
        raise OrderViolation(
            f"coupled chains broke the height order at step index {last}")
    return diff, last + 1


def diff_count(a: EngineState, b: EngineState) -> int:
    return int(np.count_nonzero(a.owner != b.owner))
