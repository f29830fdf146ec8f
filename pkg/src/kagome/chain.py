"""Single-site flip Markov chains over Kagome tilings.

Three variants share one step shape: pick an inner vertex uniformly,
draw one uniform coin, and decide whether the (unique, if any) flip at
that vertex fires.

* ``general`` -- the coin picks a direction: ``coin < 1/2`` means lower,
  otherwise raise; the flip fires iff its direction matches.  Every
  specific flip fires with probability ``1 / (2 n_inner)`` per step, so
  the kernel is symmetric and its stationary law uniform.
* ``weighted(lam)`` -- flips that change the fish count by ``d != 0``
  use a heat-bath rule: the fish-destroying move fires iff
  ``coin < 1 / (1 + lam**|d|)``, the fish-creating move on the
  complementary event.  This satisfies detailed balance with respect to
  ``pi(T) ~ lam**fish_count(T)`` for every ``|d|``, and for ``|d| = 1``
  reduces to firing the destroyer with probability ``1/(1+lam)``.
  Fish-stable flips behave as in ``general``.  ``lam = 1`` makes every
  threshold 1/2, so the one-step distribution equals ``general``'s.
* ``restrained`` -- as ``general`` but only flips whose before and
  after tiles are all trapezes or lozenges are eligible.

A :class:`StepSeed` fully determines the transition out of *any* state
(grand coupling): :func:`coupled_step` just applies the same seed to
both components.  The seed stream is counter-based (splitmix64 of the
step index, keyed by a 64-bit seed), so step ``i`` of a run can be
regenerated without storing state; sampling from the past reuses the
same indices across restarts.

Thresholds are exact ``Fraction`` values.  Comparing a float coin with
a ``Fraction`` is exact in Python, so this module is the reference
semantics; the array engine mirrors it with float64 thresholds (the
two can disagree only when a coin lands within one ulp of a threshold).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from kagome.errors import KagomeError, NotFlippable
from kagome.lattice import Region, Vertex
from kagome.tiling import FlipInfo, Tiling, apply_flip, flip_at

Coin = Union[float, Fraction]

_HALF = Fraction(1, 2)


@dataclass(frozen=True)
class ChainVariant:
    """One of the three chain flavours; ``lam`` is set only for weighted."""

    kind: str
    lam: Fraction | None = None

    def __post_init__(self):
        if self.kind not in ("general", "weighted", "restrained"):
            raise KagomeError(f"unknown chain variant {self.kind!r}")
        if self.kind == "weighted":
            if self.lam is None or self.lam <= 0:
                raise KagomeError("weighted variant needs lam > 0")
        elif self.lam is not None:
            raise KagomeError(f"{self.kind} variant takes no lam")

    def __str__(self) -> str:
        if self.kind == "weighted":
            return f"weighted:{self.lam}"
        return self.kind


GENERAL = ChainVariant("general")
RESTRAINED = ChainVariant("restrained")


def weighted(lam) -> ChainVariant:
    return ChainVariant("weighted", Fraction(lam))


@dataclass(frozen=True)
class StepSeed:
    """Shared randomness for one step: the chosen vertex and one coin."""

    vertex: Vertex
    coin: Coin


def fire_interval(variant: ChainVariant, info: FlipInfo) -> tuple[Fraction, Fraction]:
    """Coin interval [lo, hi) on which this flip fires.

    Lowering flips fire on an interval anchored at 0, raising flips on
    one anchored at 1; only the interval's length depends on the fish
    effect.  Anchoring by direction aligns the fire events of
    same-direction flips across coupled states (the coupling stays
    monotone in practice), while a flip and its reverse get exactly
    complementary intervals, so coupled chains coalesce at the
    differing vertex of a distance-1 pair.
    """
    if variant.kind == "restrained" and not info.restrained:
        return _HALF, _HALF
    if variant.kind == "weighted" and info.fish_delta != 0:
        # heat-bath measure: destroying fires with 1/(1+lam^|d|),
        # creating with the complementary lam^|d|/(1+lam^|d|)
        hot = 1 / (1 + variant.lam ** abs(info.fish_delta))
        measure = hot if info.fish_delta < 0 else 1 - hot
    else:
        measure = _HALF
    if info.direction < 0:
        return Fraction(0), measure
    return 1 - measure, Fraction(1)


def step(tiling: Tiling, seed: StepSeed, variant: ChainVariant) -> Tiling:
    """Apply one chain step; pure in (tiling, seed, variant)."""
    v = seed.vertex
    if v not in tiling.region.inner_set:
        raise KagomeError(f"step vertex {v} is not inner")
    try:
        info = flip_at(tiling, v)
    except NotFlippable:
        return tiling
    lo, hi = fire_interval(variant, info)
    if lo <= seed.coin < hi:
        return apply_flip(tiling, v)
    return tiling


def coupled_step(
    pair: tuple[Tiling, Tiling], seed: StepSeed, variant: ChainVariant
) -> tuple[Tiling, Tiling]:
    """Step both components with the same seed (grand coupling)."""
    a, b = pair
    if a.region is not b.region and a.region != b.region:
        raise KagomeError("coupled_step needs tilings on one region")
    if a == b:
        c = step(a, seed, variant)
        return c, c
    return step(a, seed, variant), step(b, seed, variant)


# -- counter-based seed stream -------------------------------------------

_MASK64 = (1 << 64) - 1


def mix64(z: int) -> int:
    """splitmix64 finalizer; bijective on 64-bit words."""
    z &= _MASK64
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & _MASK64
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & _MASK64
    z ^= z >> 31
    return z


def seed_at(region: Region, rng_seed: int, index: int) -> StepSeed:
    """StepSeed for step ``index`` of the stream keyed by ``rng_seed``.

    ``index`` may be negative (sampling from the past addresses steps by
    absolute time).  The vertex is taken modulo the inner-vertex count;
    the bias is below 2**-50 for any workable region.
    """
    inner = region.inner_vertices
    if not inner:
        raise KagomeError("region has no inner vertices")
    x = mix64(rng_seed ^ mix64(index & _MASK64))
    vertex = inner[x % len(inner)]
    coin = (mix64(x) >> 11) * 2.0**-53
    return StepSeed(vertex, coin)


def run(tiling: Tiling, variant: ChainVariant, steps: int, rng_seed: int) -> Tiling:
    """Iterate ``step`` along the deterministic stream; bit-reproducible."""
    if steps < 0:
        raise KagomeError("steps must be >= 0")
    region = tiling.region
    for i in range(steps):
        tiling = step(tiling, seed_at(region, rng_seed, i), variant)
    return tiling
