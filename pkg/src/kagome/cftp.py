"""Perfect sampling by coupling from the past, and coupling-time benchmarks.

The sampler runs the lower/upper sandwich (the region's pointwise
minimal and maximal tilings, restrained ones for the restrained chain)
from times -1, -2, -4, ... to 0 under the grand coupling.  Randomness
is addressed by absolute step index through :func:`kagome.chain.seed_at`,
so the overlapping part of consecutive windows replays bit-identical
seeds without storing anything.  Once the pair coalesces inside a
window, the remaining steps run on the single merged chain; the value
at time 0 is the sample.

Monotonicity of the coupling is monitored, not assumed: every engine
step that fires a flip checks the height order at the stepped vertex
(a complete check, since heights change nowhere else) and a violation
raises :class:`OrderViolation` instead of returning a biased sample.
``debug=True`` additionally replays window prefixes through
:func:`seed_at` and verifies that revisited indices reproduce the
recorded vertex and coin bit-for-bit.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

from kagome.chain import GENERAL, ChainVariant, mix64, seed_at
from kagome.engine import EngineState, RegionTables, build_tables, coupled_run, diff_count, run_steps
from kagome.errors import KagomeError
from kagome.lattice import Region, make_region
from kagome.minimal import maximal_tiling, minimal_tiling
from kagome.tiling import Tiling

DEFAULT_BUDGET = 10**9
# debug replay verifies at most this many indices per window prefix
_DEBUG_PROBE = 4096


@dataclass(frozen=True)
class CftpRun:
    """One complete sample with its doubling history."""

    region: Region
    variant: ChainVariant
    rng_seed: int
    epochs: tuple[int, ...]  # window lengths tried, in order
    result: Tiling
    total_steps: int  # chain-step executions summed over all windows


@dataclass(frozen=True)
class CouplingTimeSample:
    n: int  # region size parameter
    n_tiles: int
    n_inner: int
    trial: int
    steps: int  # -1 when the trial exceeded its budget
    seed: int


def sandwich_tilings(region: Region, variant: ChainVariant) -> tuple[Tiling, Tiling]:
    """Pointwise-extremal start states bounding the variant's state space."""
    flips = "restrained" if variant.kind == "restrained" else "all"
    return minimal_tiling(region, flips), maximal_tiling(region, flips)


class _Sandwich:
    """Reusable lower/upper engine states for one (region, variant).

    A region whose extremal tilings coincide has one reachable state;
    ``diff0 == 0`` then short-circuits every driver before any engine
    table is built (such regions may have no inner vertices at all).
    """

    def __init__(self, region: Region, variant: ChainVariant,
                 tables: RegionTables | None = None):
        lo, hi = sandwich_tilings(region, variant)
        self.unique = lo if lo == hi else None
        self.diff0 = 0 if self.unique is not None else -1
        if self.unique is not None:
            return
        self.tables = tables if tables is not None else build_tables(region)
        self.template_lo = EngineState(self.tables, lo)
        self.template_hi = EngineState(self.tables, hi)
        self.lo = EngineState(self.tables, lo)
        self.hi = EngineState(self.tables, hi)
        self.diff0 = diff_count(self.lo, self.hi)

    def reset(self) -> None:
        self.lo.copy_from(self.template_lo)
        self.hi.copy_from(self.template_hi)


def _verify_seed_reuse(region: Region, rng_seed: int, window: int,
                       recorder: dict[int, tuple[int, float]]) -> None:
    """Record/compare the seeds a window [-window, 0) will consume."""
    probe = min(window, _DEBUG_PROBE)
    for idx in range(-window, -window + probe):
        s = seed_at(region, rng_seed, idx)
        got = (region.inner_vertices.index(s.vertex), s.coin)
        prev = recorder.setdefault(idx, got)
        if prev != got:
            raise KagomeError(
                f"randomness reuse broken at index {idx}: {prev} != {got}")


def cftp_run(region: Region, variant: ChainVariant = GENERAL,
             rng_seed: int = 0, *, budget: int = DEFAULT_BUDGET,
             debug: bool = False,
             tables: RegionTables | None = None,
             _sandwich: _Sandwich | None = None) -> CftpRun:
    """Sample the variant's stationary law exactly; full run record."""
    sw = _sandwich if _sandwich is not None else _Sandwich(region, variant, tables)
    if sw.unique is not None:
        return CftpRun(region, variant, rng_seed, (), sw.unique, 0)
    recorder: dict[int, tuple[int, float]] = {}
    epochs: list[int] = []
    total = 0
    window = 1
    while True:
        if total + 2 * window > budget:
            raise KagomeError(
                f"cftp exceeded its step budget {budget} at window {window}")
        epochs.append(window)
        if debug:
            _verify_seed_reuse(region, rng_seed, window, recorder)
        sw.reset()
        diff, nxt = coupled_run(sw.lo, sw.hi, variant, rng_seed,
                                -window, 0, sw.diff0, check_order=True)
        total += 2 * (nxt + window)  # indices stepped, both chains
        if diff == 0:
            if nxt < 0:
                run_steps(sw.lo, variant, rng_seed, nxt, 0)
                total += -nxt
            return CftpRun(region, variant, rng_seed, tuple(epochs),
                           sw.lo.tiling(), total)
        window *= 2


def cftp_sample(region: Region, variant: ChainVariant = GENERAL,
                rng_seed: int = 0, *, budget: int = DEFAULT_BUDGET,
                debug: bool = False,
                tables: RegionTables | None = None) -> Tiling:
    """Exact stationary sample (uniform, or fish-weighted for weighted)."""
    return cftp_run(region, variant, rng_seed, budget=budget, debug=debug,
                    tables=tables).result


def sample_seed(rng_seed: int, index: int) -> int:
    """Per-sample stream key for batches: disjoint streams per index."""
    return mix64(rng_seed ^ mix64(index))


def cftp_runs(region: Region, variant: ChainVariant, rng_seed: int,
              count: int, *, budget: int = DEFAULT_BUDGET,
              tables: RegionTables | None = None):
    """Yield ``count`` independent run records (seeds derived by index)."""
    sw = _Sandwich(region, variant, tables)
    for i in range(count):
        yield cftp_run(region, variant, sample_seed(rng_seed, i),
                       budget=budget, _sandwich=sw)


def cftp_samples(region: Region, variant: ChainVariant, rng_seed: int,
                 count: int, *, budget: int = DEFAULT_BUDGET,
                 tables: RegionTables | None = None):
    """Yield ``count`` independent exact samples (seeds derived by index)."""
    for run in cftp_runs(region, variant, rng_seed, count,
                         budget=budget, tables=tables):
        yield run.result


def forward_coupling_time(region: Region, variant: ChainVariant = GENERAL,
                          rng_seed: int = 0, *, budget: int = DEFAULT_BUDGET,
                          _sandwich: _Sandwich | None = None) -> int:
    """Steps until the sandwich coalesces running forward from time 0."""
    sw = _sandwich if _sandwich is not None else _Sandwich(region, variant)
    if sw.unique is not None:
        return 0
    sw.reset()
    diff = sw.diff0
    i = 0
    window = 1 << 14
    while True:
        end = min(i + window, budget)
        diff, i = coupled_run(sw.lo, sw.hi, variant, rng_seed, i, end, diff,
                              check_order=True)
        if diff == 0:
            return i
        if i >= budget:
            raise KagomeError(f"no coalescence within the budget {budget}")
        window *= 2


@dataclass
class BenchResult:
    """Coupling-time scaling study over one region family."""

    family: str
    variant: ChainVariant
    samples: list[CouplingTimeSample]
    exponent: float | None  # log-log slope of mean steps vs tile count

    def table(self) -> list[tuple[int, int, int, float, float, int]]:
        """(n, tiles, inner, mean, stderr, trials_used) per size."""
        out = []
        for n in sorted({s.n for s in self.samples}):
            good = [s for s in self.samples if s.n == n and s.steps >= 0]
            any_s = next(s for s in self.samples if s.n == n)
            if not good:
                out.append((n, any_s.n_tiles, any_s.n_inner,
                            float("nan"), float("nan"), 0))
                continue
            k = len(good)
            mean = sum(s.steps for s in good) / k
            var = (sum((s.steps - mean) ** 2 for s in good) / (k - 1)
                   if k > 1 else 0.0)
            out.append((n, any_s.n_tiles, any_s.n_inner, mean,
                        math.sqrt(var / k), k))
        return out

    def excluded(self) -> list[CouplingTimeSample]:
        return [s for s in self.samples if s.steps < 0]

    def csv(self) -> str:
        buf = io.StringIO()
        buf.write("n,N_tiles,N_inner_vertices,trial,steps,seed\n")
        for s in self.samples:
            buf.write(f"{s.n},{s.n_tiles},{s.n_inner},{s.trial},{s.steps},{s.seed}\n")
        return buf.getvalue()


def trial_seed(rng_seed: int, n: int, trial: int) -> int:
    return mix64(rng_seed ^ mix64((n << 32) | trial))


def _fit_exponent(samples: list[CouplingTimeSample]) -> float | None:
    by_n: dict[int, list[int]] = {}
    tiles: dict[int, int] = {}
    for s in samples:
        if s.steps >= 0:
            by_n.setdefault(s.n, []).append(s.steps)
            tiles[s.n] = s.n_tiles
    if len(by_n) < 2:
        return None
    # least-squares slope of log(mean) against log(tiles)
    xs = [math.log(tiles[n]) for n in by_n]
    ys = [math.log(sum(v) / len(v)) for v in by_n.values()]
    mx = sum(xs) / len(xs)
    my = sum(ys) / len(ys)
    sxx = sum((x - mx) ** 2 for x in xs)
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    return sxy / sxx


def benchmark_scaling(sizes: list[int], trials: int,
                      variant: ChainVariant = GENERAL, *,
                      family: str = "square", rng_seed: int = 0,
                      budget: int = DEFAULT_BUDGET,
                      progress=None) -> BenchResult:
    """Mean sandwich coupling time per size, with a log-log exponent fit.

    Trials run sequentially in (size, trial) order with per-trial seeds
    from :func:`trial_seed`, so the output is one deterministic record
    regardless of scheduling.  Over-budget trials are kept in the
    sample list with ``steps = -1`` and skipped by the fit.
    """
    if trials < 1:
        raise KagomeError("benchmark needs at least one trial per size")
    samples: list[CouplingTimeSample] = []
    for n in sizes:
        region = make_region(family, n)
        sw = _Sandwich(region, variant)
        n_tiles = len(region.hexes)
        n_inner = len(region.inner_vertices)
        for trial in range(trials):
            seed = trial_seed(rng_seed, n, trial)
            try:
                steps = forward_coupling_time(region, variant, seed,
                                              budget=budget, _sandwich=sw)
            except KagomeError:
                steps = -1
            samples.append(CouplingTimeSample(n, n_tiles, n_inner, trial,
                                              steps, seed))
            if progress is not None:
                progress(samples[-1])
    return BenchResult(family, variant, samples, _fit_exponent(samples))
