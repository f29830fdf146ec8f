"""Exhaustive flip-graph enumeration and exact rational chain analysis.

Everything here is small-state-space machinery: breadth-first closure of
a region's tilings under flips, transition kernels with ``Fraction``
entries, verified stationary laws, exact mixing times, and the
path-coupling ledger that accounts, pair by pair and vertex by vertex,
for the expected change of the flip distance under one coupled step.

The distance used by the ledger is
``phi(A, B) = sum_v |h_A(v) - h_B(v)| / 3``.  Each flip moves one
vertex height by 3, so phi is integer-valued, changes by at most 1 per
flip, and the pairs at distance 1 are exactly the flip-graph edges.
For such a pair the tilings agree except at the edge's vertex, which
makes the per-step accounting local: a coupled step can only alter the
gap at the selected vertex.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

import numpy as np

from kagome.chain import ChainVariant, fire_interval
from kagome.errors import EnumerationCapExceeded, KagomeError
from kagome.lattice import Region, Vertex
from kagome.tiling import (
    FlipInfo,
    Tiling,
    apply_flip,
    available_flips,
    find_tiling,
    fish_count,
    height_field,
    total_height,
)

DEFAULT_NODE_CAP = 200_000
MIXING_NODE_CAP = 5_000


def _node_cap(cap: int | None) -> int:
    if cap is not None:
        return cap
    env = os.environ.get("KAGOME_NODE_CAP")
    return int(env) if env else DEFAULT_NODE_CAP


@dataclass(frozen=True)
class GraphEdge:
    """Flip-graph edge; direction and fish_delta are oriented i -> j."""

    i: int
    j: int
    vertex: Vertex
    direction: int
    fish_delta: int
    restrained: bool

    def info(self) -> FlipInfo:
        return FlipInfo(self.vertex, self.direction, self.fish_delta, self.restrained)

    def reversed_info(self) -> FlipInfo:
        return FlipInfo(self.vertex, -self.direction, -self.fish_delta, self.restrained)


@dataclass
class TilingGraph:
    region: Region
    flips: str  # "all" | "restrained"
    nodes: tuple[Tiling, ...]
    edges: tuple[GraphEdge, ...]
    index: dict[Tiling, int] = field(init=False, repr=False)

    def __post_init__(self):
        self.index = {t: i for i, t in enumerate(self.nodes)}

    @property
    def adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in self.nodes]
        for e in self.edges:
            adj[e.i].append(e.j)
            adj[e.j].append(e.i)
        return adj

    def __len__(self) -> int:
        return len(self.nodes)


def _eligible_flips(tiling: Tiling, flips: str) -> Iterator[tuple[Vertex, FlipInfo]]:
    for v, info in available_flips(tiling).items():
        if flips == "restrained" and not info.restrained:
            continue
        yield v, info


def restrained_seed(region: Region) -> Tiling:
    """A fish-free tiling, from the restrained backtracking tiler."""
    return find_tiling(region, restrained=True)


def enumerate_tilings(
    region: Region,
    flips: str = "all",
    cap: int | None = None,
    seed: Tiling | None = None,
) -> TilingGraph:
    """BFS closure of the region's tilings under the given flip family.

    For ``flips="all"`` on a simply connected region this is the whole
    tiling space; for ``flips="restrained"`` it is the restrained
    component of the seed (a fish-free tiling found by greedy descent
    when none is supplied).  Exceeding the node cap (argument, else
    ``KAGOME_NODE_CAP``, else 200000) raises, never truncates.
    """
    if flips not in ("all", "restrained"):
        raise KagomeError(f"unknown flip family {flips!r}")
    cap = _node_cap(cap)
    if seed is None:
        seed = find_tiling(region) if flips == "all" else restrained_seed(region)
    elif seed.region != region:
        raise KagomeError("seed tiling is not on the given region")

    ids: dict[Tiling, int] = {seed: 0}
    order: list[Tiling] = [seed]
    raw_edges: dict[tuple[int, int], FlipInfo] = {}
    frontier = [seed]
    while frontier:
        nxt: list[Tiling] = []
        for t in frontier:
            i = ids[t]
            for v, info in _eligible_flips(t, flips):
                u = apply_flip(t, v)
                j = ids.get(u)
                if j is None:
                    j = len(order)
                    if j >= cap:
                        raise EnumerationCapExceeded(cap)
                    ids[u] = j
                    order.append(u)
                    nxt.append(u)
                if i < j:
                    raw_edges[(i, j)] = info
                else:
                    raw_edges.setdefault(
                        (j, i),
                        FlipInfo(info.vertex, -info.direction, -info.fish_delta, info.restrained),
                    )
        frontier = nxt

    # canonical node order: sort by assignment key, remap edges
    perm = sorted(range(len(order)), key=lambda k: order[k].key)
    rank = [0] * len(order)
    for new, old in enumerate(perm):
        rank[old] = new
    nodes = tuple(order[old] for old in perm)
    edges = []
    for (i, j), info in raw_edges.items():
        a, b = rank[i], rank[j]
        if a > b:
            a, b = b, a
            info = FlipInfo(info.vertex, -info.direction, -info.fish_delta, info.restrained)
        edges.append(GraphEdge(a, b, info.vertex, info.direction, info.fish_delta, info.restrained))
    edges.sort(key=lambda e: (e.i, e.j))
    return TilingGraph(region, flips, nodes, tuple(edges))


def brute_force_tilings(
    region: Region, restrained_only: bool = False, cap: int = 1_000_000
) -> list[Tiling]:
    """All tilings by direct search over per-hexagon triangle pairs.

    Independent of the flip machinery; used as the oracle that flip
    closure reaches everything.  Hexagons are processed in sorted order,
    each choosing an unordered pair of its still-free adjacent
    triangles; every valid tiling arises from exactly one choice path.
    """
    from kagome.tiling import classify_tile

    hexes = region.hex_list
    out: list[Tiling] = []
    assign: dict = {}
    used: set = set()

    def place(k: int) -> None:
        if len(out) > cap:
            raise EnumerationCapExceeded(cap)
        if k == len(hexes):
            t = Tiling(region, dict(assign))
            if restrained_only:
                if all(classify_tile(t, h).name != "FISH" for h in hexes):
                    out.append(t)
            else:
                out.append(t)
            return
        h = hexes[k]
        free = [t for t in region.hex_adjacent_tris[h] if t not in used]
        for x in range(len(free)):
            for y in range(x + 1, len(free)):
                t1, t2 = free[x], free[y]
                assign[t1] = h
                assign[t2] = h
                used.add(t1)
                used.add(t2)
                place(k + 1)
                used.discard(t1)
                used.discard(t2)
                del assign[t1], assign[t2]

    place(0)
    return out


# -- kernels and stationary laws -------------------------------------------


def _interval_measure(iv: tuple[Fraction, Fraction]) -> Fraction:
    lo, hi = iv
    return hi - lo if hi > lo else Fraction(0)


def transition_kernel(
    graph: TilingGraph, variant: ChainVariant
) -> list[dict[int, Fraction]]:
    """Sparse exact one-step kernel rows (diagonal included)."""
    n_inner = len(graph.region.inner_vertices)
    rows: list[dict[int, Fraction]] = [{} for _ in graph.nodes]
    if n_inner == 0:
        for i in range(len(graph.nodes)):
            rows[i][i] = Fraction(1)
        return rows
    for e in graph.edges:
        p_ij = _interval_measure(fire_interval(variant, e.info())) / n_inner
        p_ji = _interval_measure(fire_interval(variant, e.reversed_info())) / n_inner
        if p_ij:
            rows[e.i][e.j] = rows[e.i].get(e.j, Fraction(0)) + p_ij
        if p_ji:
            rows[e.j][e.i] = rows[e.j].get(e.i, Fraction(0)) + p_ji
    for i, row in enumerate(rows):
        off = sum(row.values())
        if off > 1:
            raise KagomeError("kernel row exceeds 1; broken flip bookkeeping")
        row[i] = 1 - off
    return rows


def _check_variant_graph(graph: TilingGraph, variant: ChainVariant) -> None:
    if variant.kind == "restrained" and graph.flips != "restrained":
        raise KagomeError("restrained chain analysis needs a restrained graph")
    if variant.kind != "restrained" and graph.flips != "all":
        raise KagomeError(f"{variant.kind} chain analysis needs the full graph")


def exact_stationary(graph: TilingGraph, variant: ChainVariant) -> tuple[Fraction, ...]:
    """The verified stationary law of the variant's kernel on the graph.

    Uniform for general/restrained, proportional to lam**fish_count for
    weighted; detailed balance is checked entrywise in exact arithmetic
    rather than assumed.
    """
    _check_variant_graph(graph, variant)
    n = len(graph.nodes)
    if variant.kind == "weighted":
        weights = [variant.lam ** fish_count(t) for t in graph.nodes]
        z = sum(weights)
        pi = tuple(w / z for w in weights)
    else:
        pi = tuple(Fraction(1, n) for _ in range(n))
    kernel = transition_kernel(graph, variant)
    for i, row in enumerate(kernel):
        if sum(row.values()) != 1:
            raise KagomeError(f"kernel row {i} does not sum to 1")
        for j, p in row.items():
            if i < j and pi[i] * p != pi[j] * kernel[j].get(i, Fraction(0)):
                raise KagomeError(f"detailed balance fails on edge ({i},{j})")
    return pi


def kernel_dense(kernel: list[dict[int, Fraction]]) -> np.ndarray:
    n = len(kernel)
    mat = np.zeros((n, n))
    for i, row in enumerate(kernel):
        for j, p in row.items():
            mat[i, j] = float(p)
    return mat


def _tv_max_exact(
    kernel: list[dict[int, Fraction]], pi: tuple[Fraction, ...], t: int
) -> Fraction:
    """max_x TV(P^t(x, .), pi) in exact arithmetic (small graphs only)."""
    n = len(kernel)
    denom = 1
    for row in kernel:
        for p in row.values():
            denom = denom * p.denominator // math.gcd(denom, p.denominator)
    mat = [[0] * n for _ in range(n)]
    for i, row in enumerate(kernel):
        for j, p in row.items():
            mat[i][j] = int(p * denom)

    def matmul(a, b):
        bt = list(zip(*b))
        return [[sum(x * y for x, y in zip(ra, cb)) for cb in bt] for ra in a]

    # binary exponentiation of the integer matrix P*denom; the scales of
    # the multiplied factors add up, so result == P^t * denom**t
    result = [[int(i == j) for j in range(n)] for i in range(n)]
    base, e = mat, t
    while e:
        if e & 1:
            result = matmul(result, base)
        base = matmul(base, base)
        e >>= 1
    scale = denom**t
    worst = Fraction(0)
    for i in range(n):
        tv = sum(abs(Fraction(result[i][j], scale) - pi[j]) for j in range(n)) / 2
        worst = max(worst, tv)
    return worst


def _tv_max_float(mat_t: np.ndarray, pi: np.ndarray) -> float:
    return float(np.max(np.abs(mat_t - pi[None, :]).sum(axis=1)) / 2)


def exact_mixing_time(
    graph: TilingGraph,
    variant: ChainVariant,
    eps: Fraction = Fraction(1, 4),
    node_cap: int = MIXING_NODE_CAP,
    exact_verify_cap: int = 24,
) -> int:
    """Least t with worst-start total-variation distance <= eps.

    Uses float64 matrix powers (with doubling and binary search; the
    worst-start distance is nonincreasing in t) and, on graphs of at
    most ``exact_verify_cap`` nodes, settles the boundary exactly with
    integer matrix powers.
    """
    n = len(graph.nodes)
    if n > node_cap:
        raise EnumerationCapExceeded(node_cap)
    pi_exact = exact_stationary(graph, variant)
    if n == 1:
        return 0
    kernel = transition_kernel(graph, variant)
    mat = kernel_dense(kernel)
    pi = np.array([float(p) for p in pi_exact])
    eps_f = float(eps)

    # bracket by doubling over P^(2^k)
    powers = [mat]
    while _tv_max_float(powers[-1], pi) > eps_f:
        nxt = powers[-1] @ powers[-1]
        nxt /= nxt.sum(axis=1, keepdims=True)
        powers.append(nxt)
        if len(powers) > 64:
            raise KagomeError("mixing time exceeds 2**64 steps?")
    if len(powers) == 1:
        t = 1
    else:
        lo, hi = 1 << (len(powers) - 2), 1 << (len(powers) - 1)
        # invariant: d(lo) > eps >= d(hi)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            acc = None
            m = mid
            k = 0
            while m:
                if m & 1:
                    acc = powers[k] if acc is None else acc @ powers[k]
                m >>= 1
                k += 1
            if _tv_max_float(acc, pi) <= eps_f:
                hi = mid
            else:
                lo = mid
        t = hi

    if n <= exact_verify_cap:
        while t > 1 and _tv_max_exact(kernel, pi_exact, t - 1) <= eps:
            t -= 1
        while _tv_max_exact(kernel, pi_exact, t) > eps:
            t += 1
    return t


# -- path-coupling ledger ----------------------------------------------------


@dataclass
class CouplingLedgerEntry:
    """Exact E[phi-change] for one distance-1 pair, split by vertex."""

    pair: tuple[int, int]
    vertex: Vertex
    expected_delta: Fraction
    contributions: dict[Vertex, Fraction]


@dataclass
class LedgerResult:
    entries: list[CouplingLedgerEntry]
    n_inner: int

    @property
    def worst_delta(self) -> Fraction:
        return max(e.expected_delta for e in self.entries)

    def worst_entries(self) -> list[CouplingLedgerEntry]:
        w = self.worst_delta
        return [e for e in self.entries if e.expected_delta == w]


def _fires(iv: tuple[Fraction, Fraction], coin: Fraction) -> bool:
    return iv[0] <= coin < iv[1]


def path_coupling_ledger(graph: TilingGraph, variant: ChainVariant) -> LedgerResult:
    """Exact expected flip-distance change for every distance-1 pair.

    For a pair (A, B) differing by one flip at w, one coupled step can
    change the height gap only at the selected vertex u.  With
    directions dA, dB and fire indicators fA, fB under a common coin,
    the phi change is |fA + fB - 1| - 1 at u = w (the two fire
    intervals are complementary there) and |dA*fA - dB*fB| at u != w.
    The per-vertex expectation integrates this over the coin, exactly.
    """
    _check_variant_graph(graph, variant)
    n_inner = len(graph.region.inner_vertices)
    flips_by_node = [available_flips(t) for t in graph.nodes]
    entries: list[CouplingLedgerEntry] = []
    zero = Fraction(0)
    one = Fraction(1)
    for e in graph.edges:
        fa = flips_by_node[e.i]
        fb = flips_by_node[e.j]
        contributions: dict[Vertex, Fraction] = {}
        for u in set(fa) | set(fb):
            ia = fa.get(u)
            ib = fb.get(u)
            iva = fire_interval(variant, ia) if ia else (zero, zero)
            ivb = fire_interval(variant, ib) if ib else (zero, zero)
            cuts = sorted({zero, one, *iva, *ivb})
            acc = Fraction(0)
            for lo, hi in zip(cuts, cuts[1:]):
                if hi <= lo:
                    continue
                coin = (lo + hi) / 2
                f_a = ia is not None and _fires(iva, coin)
                f_b = ib is not None and _fires(ivb, coin)
                if u == e.vertex:
                    dphi = abs((1 if f_a else 0) + (1 if f_b else 0) - 1) - 1
                else:
                    da = ia.direction if f_a else 0
                    db = ib.direction if f_b else 0
                    dphi = abs(da - db)
                if dphi:
                    acc += (hi - lo) * dphi
            if acc:
                contributions[u] = acc / n_inner
        entries.append(
            CouplingLedgerEntry(
                (e.i, e.j), e.vertex, sum(contributions.values(), zero), contributions
            )
        )
    return LedgerResult(entries, n_inner)


# -- graph measurements -------------------------------------------------------


def diameter(graph: TilingGraph) -> int:
    """Exact diameter via per-node BFS (scipy's C implementation)."""
    n = len(graph.nodes)
    if n == 1:
        return 0
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import shortest_path

    rows, cols = [], []
    for e in graph.edges:
        rows += [e.i, e.j]
        cols += [e.j, e.i]
    adj = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    dist = shortest_path(adj, method="D", unweighted=True, directed=False)
    if np.isinf(dist).any():
        raise KagomeError("tiling graph is disconnected")
    return int(dist.max())


def node_heights(graph: TilingGraph) -> list[dict[Vertex, int]]:
    return [height_field(t) for t in graph.nodes]


def height_extremes(graph: TilingGraph) -> tuple[list[int], list[int]]:
    """Node ids of minimal and maximal total height (lists; ties kept)."""
    totals = [total_height(t) for t in graph.nodes]
    lo, hi = min(totals), max(totals)
    return (
        [i for i, h in enumerate(totals) if h == lo],
        [i for i, h in enumerate(totals) if h == hi],
    )


def distinct_height_counts(graph: TilingGraph) -> dict[Vertex, int]:
    """Per vertex, the number of distinct heights across all tilings."""
    seen: dict[Vertex, set[int]] = {v: set() for v in graph.region.vertices}
    for h in node_heights(graph):
        for v, val in h.items():
            seen[v].add(val)
    return {v: len(s) for v, s in seen.items()}


def max_distinct_heights(graph: TilingGraph) -> int:
    return max(distinct_height_counts(graph).values())


# -- export -------------------------------------------------------------------


def graph_to_json(graph: TilingGraph) -> dict:
    from kagome.serialize import SCHEMA_VERSION, region_to_json

    return {
        "schema_version": SCHEMA_VERSION,
        "flips": graph.flips,
        "region": region_to_json(graph.region),
        "nodes": [
            [[[t.a, t.b, t.o], [tt.assign[t].a, tt.assign[t].b]] for t in graph.region.tri_list]
            for tt in graph.nodes
        ],
        "edges": [
            {
                "i": e.i,
                "j": e.j,
                "vertex": [[e.vertex.h1.a, e.vertex.h1.b], [e.vertex.h2.a, e.vertex.h2.b]],
                "direction": e.direction,
                "fish_delta": e.fish_delta,
                "restrained": e.restrained,
            }
            for e in graph.edges
        ],
    }


def graph_to_dot(graph: TilingGraph) -> str:
    """DOT rendering; restrained edges solid, fish changers dashed."""
    lines = ["graph tilings {"]
    for i, t in enumerate(graph.nodes):
        lines.append(f'  n{i} [label="{i} (h={total_height(t)})"];')
    for e in graph.edges:
        style = "solid" if e.restrained else "dashed"
        lines.append(
            f"  n{e.i} -- n{e.j} [style={style}, restrained={str(e.restrained).lower()}, "
            f"fish_delta={e.fish_delta}];"
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
