import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest

from kagome.cftp import (
    BenchResult,
    CouplingTimeSample,
    benchmark_scaling,
    cftp_run,
    cftp_sample,
    cftp_samples,
    forward_coupling_time,
    sample_seed,
    sandwich_tilings,
    trial_seed,
)
from kagome.chain import GENERAL, RESTRAINED, fire_interval, weighted
from kagome.errors import KagomeError
from kagome.exact import enumerate_tilings, exact_stationary
from kagome.lattice import make_lozenge_region
from kagome.minimal import maximal_tiling, minimal_tiling
from kagome.tiling import available_flips, pointwise_leq


def _tv_from_counts(counts, pi_by_key, total):
    tv = 0.0
    for key, p in pi_by_key.items():
        tv += abs(counts.get(key, 0) / total - float(p))
    return tv / 2


def test_single_tiling_region_needs_no_steps():
    run = cftp_run(make_lozenge_region(1), GENERAL, 123)
    assert run.total_steps == 0 and run.epochs == ()


def test_cftp_is_deterministic(loz2):
    a = cftp_run(loz2, GENERAL, 77)
    b = cftp_run(loz2, GENERAL, 77)
    assert a.result == b.result and a.epochs == b.epochs \
        and a.total_steps == b.total_steps
    assert a.epochs == tuple(2 ** k for k in range(len(a.epochs)))


def test_cftp_budget_exceeded(loz2):
    with pytest.raises(KagomeError):
        cftp_run(loz2, GENERAL, 77, budget=4)


def test_batch_equals_individual_samples(loz2):
    batch = list(cftp_samples(loz2, GENERAL, 31, 6))
    single = [cftp_sample(loz2, GENERAL, sample_seed(31, i))
              for i in range(6)]
    assert batch == single


def test_sandwich_tilings_bound_samples(loz2):
    lo, hi = sandwich_tilings(loz2, GENERAL)
    for t in cftp_samples(loz2, GENERAL, 5, 20):
        assert pointwise_leq(lo, t) and pointwise_leq(t, hi)


def test_debug_replay_instrumentation(loz2):
    plain = cftp_run(loz2, GENERAL, 9)
    checked = cftp_run(loz2, GENERAL, 9, debug=True)
    assert checked.result == plain.result


SAMPLES = 20_000
TV_BOUND = 0.03  # ~4x the expected TV noise floor at 20k samples


@pytest.mark.parametrize("variant", [GENERAL, RESTRAINED, weighted("1/3")],
                         ids=["general", "restrained", "weighted_1_3"])
def test_cftp_matches_exact_stationary_law(variant, loz2):
    flips = "restrained" if variant.kind == "restrained" else "all"
    graph = enumerate_tilings(loz2, flips=flips)
    pi = exact_stationary(graph, variant)
    pi_by_key = {t.key: p for t, p in zip(graph.nodes, pi)}
    counts = Counter(t.key for t in
                     cftp_samples(loz2, variant, 2024, SAMPLES))
    assert set(counts) <= set(pi_by_key)
    tv = _tv_from_counts(counts, pi_by_key, SAMPLES)
    assert tv < TV_BOUND, f"{variant.kind}: tv={tv:.4f}"


def _absorption_expectation(region, variant):
    """Exact mean coalescence time of the synchronous pair chain,
    started from the two extreme tilings (absorbing on the diagonal)."""
    from kagome.tiling import apply_flip

    graph = enumerate_tilings(region)
    n = len(graph.nodes)
    inner = list(region.inner_vertices)
    index = graph.index
    flips_of = [available_flips(t) for t in graph.nodes]

    trans = {}
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            row = Counter()
            for v in inner:
                infos = (flips_of[i].get(v), flips_of[j].get(v))
                ivals = [None if f is None else fire_interval(variant, f)
                         for f in infos]
                cuts = {Fraction(0), Fraction(1)}
                for iv in ivals:
                    if iv is not None:
                        cuts.update(iv)
                pts = sorted(cuts)
                for lo, hi in zip(pts, pts[1:]):
                    if lo == hi:
                        continue
                    mid = (lo + hi) / 2
                    nxt = []
                    for node, iv in zip((i, j), ivals):
                        if iv is not None and iv[0] <= mid < iv[1]:
                            node = index[apply_flip(graph.nodes[node], v)]
                        nxt.append(node)
                    row[tuple(nxt)] += Fraction(hi - lo, len(inner))
            trans[(i, j)] = row

    transient = sorted(trans)
    pos = {pair: k for k, pair in enumerate(transient)}
    m = len(transient)
    q = np.zeros((m, m))
    for pair, row in trans.items():
        for nxt, p in row.items():
            if nxt[0] != nxt[1]:
                q[pos[pair], pos[nxt]] += float(p)
    t = np.linalg.solve(np.eye(m) - q, np.ones(m))
    lo = minimal_tiling(region, flips="all")
    hi = maximal_tiling(region, flips="all")
    return t[pos[(index[lo], index[hi])]]


def test_forward_coupling_time_matches_absorbing_chain_oracle(loz2):
    want = _absorption_expectation(loz2, GENERAL)
    trials = 400
    times = [forward_coupling_time(loz2, GENERAL, trial_seed(5, 2, k))
             for k in range(trials)]
    mean = sum(times) / trials
    var = sum((x - mean) ** 2 for x in times) / (trials - 1)
    stderr = math.sqrt(var / trials)
    assert abs(mean - want) <= 3 * stderr, \
        f"mean {mean:.2f} vs exact {want:.2f} (stderr {stderr:.2f})"


def test_forward_coupling_time_frozen(loz2):
    assert forward_coupling_time(loz2, GENERAL, 3) == 39


def test_forward_coupling_time_budget(loz2):
    with pytest.raises(KagomeError):
        forward_coupling_time(loz2, GENERAL, 3, budget=10)


def test_forward_coupling_unique_region_is_zero():
    assert forward_coupling_time(make_lozenge_region(1), GENERAL, 1) == 0


def test_benchmark_scaling_smoke_and_determinism():
    a = benchmark_scaling([3, 4], 3, GENERAL, family="lozenge", rng_seed=8)
    b = benchmark_scaling([3, 4], 3, GENERAL, family="lozenge", rng_seed=8)
    assert a.csv() == b.csv()
    assert a.csv().splitlines()[0] == "n,N_tiles,N_inner_vertices,trial,steps,seed"
    assert len(a.samples) == 6
    assert a.exponent is not None and a.exponent > 0
    rows = a.table()
    assert [r[0] for r in rows] == [3, 4]
    assert all(r[5] == 3 for r in rows)


def test_benchmark_budget_marks_trials_excluded():
    r = benchmark_scaling([4], 2, GENERAL, family="lozenge", rng_seed=8,
                          budget=64)
    assert all(s.steps == -1 for s in r.samples)
    assert len(r.excluded()) == 2
    assert r.exponent is None


def test_trial_seeds_are_distinct():
    seeds = {trial_seed(1, n, k) for n in range(1, 30) for k in range(200)}
    assert len(seeds) == 29 * 200


def test_bench_result_table_handles_gaps():
    samples = [CouplingTimeSample(3, 9, 4, 0, 100, 1),
               CouplingTimeSample(3, 9, 4, 1, -1, 2)]
    r = BenchResult("lozenge", GENERAL, samples, None)
    ((n, tiles, inner, mean, err, used),) = r.table()
    assert (n, used) == (3, 1) and mean == 100.0 and err == 0.0
