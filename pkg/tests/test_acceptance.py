"""Acceptance suite: one test per release criterion, each printing a verdict.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines. The FCC-scale checks need real interference data and hours of compute;
they are skipped unless REPACKER_FCC_DATA points at a CSV directory.
"""

from __future__ import annotations

import functools
import itertools
import math
import os
import random
import time

import pytest

from repacker.cliques import CliqueCatalog, blocking_check, enumerate_cliques_greedy
from repacker.driver import check_feasibility, min_dmas_with_clearing, min_nationwide_clearings, sample_solutions
from repacker.encoder import CnfFormula, VarPool, at_most_true, decode, encode
from repacker.instance import Affiliation, ChannelAssignment, RepackProblem, validate_assignment
from repacker.instance_io import load_instance
from repacker.montecarlo import BACKEND_CLIQUE_THEN_SAT, BACKEND_SAT, estimate_success
from repacker.participation import ModelSpec, revenue_probabilities, sample
from repacker.solver import solve
from repacker.synthetic import generate_synthetic

from conftest import assignment_with_cleared, build_instance, make_sample_set, random_problem
from oracles import brute_force_min_cleared, brute_force_repack


def criterion(name: str):
    def decorate(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            start = time.monotonic()
            try:
                result = fn(*args, **kwargs)
            except BaseException:
                print(f"\nACCEPTANCE  {name}: FAIL")
                raise
            print(f"\nACCEPTANCE  {name}: PASS ({time.monotonic() - start:.1f}s)")
            return result

        return wrapper

    return decorate


@criterion("encoder/solver oracle equivalence (500 instances)")
def test_oracle_equivalence_500():
    rng = random.Random(987654)
    sat = unsat = 0
    for i in range(500):
        prob = random_problem(rng, max_n=12, max_c=5)
        formula = encode(prob)
        outcome = solve(formula, seed=rng.randrange(10**6), time_budget=60)
        oracle = brute_force_repack(prob)
        assert not outcome.timed_out
        assert outcome.is_sat == (oracle is not None), f"instance {i}: verdict mismatch"
        if outcome.is_sat:
            assignment = decode(formula, outcome.model)
            assert validate_assignment(prob, assignment) == [], f"instance {i}: dirty decode"
            sat += 1
        else:
            unsat += 1
    assert sat >= 50 and unsat >= 50, f"unbalanced mix sat={sat} unsat={unsat}"


@criterion("cardinality encoding exhaustive (|vars| <= 10, all k)")
def test_at_most_true_exhaustive():
    for n in range(1, 11):
        variables = list(range(1, n + 1))
        for k in range(0, n + 1):
            pool = VarPool(start=n + 1)
            clauses, aux = at_most_true(variables, k, pool)
            var_count = pool.count if pool.count >= n else n
            base = tuple(clauses)
            for bits in itertools.product((False, True), repeat=n):
                units = tuple((v,) if bit else (-v,) for v, bit in zip(variables, bits))
                formula = CnfFormula(var_count=var_count, clauses=base + units)
                extendable = solve(formula, seed=0, time_budget=10).is_sat
                assert extendable == (sum(bits) <= k), f"n={n} k={k} bits={bits}"


@criterion("minimum-search bracketing + planted-clique exactness")
def test_min_search_bracketing():
    rng = random.Random(24601)
    for i in range(100):
        prob = random_problem(rng, max_n=10, max_c=4, allow_caps=False)
        inst = prob.instance
        result = min_nationwide_clearings(
            inst, prob.clearing_target_mhz, prob.use_domain_constraints,
            seed=rng.randrange(10**6), time_budget=60,
        )
        assert result.certified, f"instance {i}: no bracket"

        def independent(cap):
            return check_feasibility(
                RepackProblem(
                    instance=inst,
                    clearing_target_mhz=prob.clearing_target_mhz,
                    use_domain_constraints=prob.use_domain_constraints,
                    max_cleared_nationwide=cap,
                ),
                seed=rng.randrange(10**6),
                time_budget=60,
            )

        assert independent(result.value).feasible, f"instance {i}: value not feasible"
        if result.value > 0:
            lower = independent(result.value - 1)
            assert lower.verdict.value == "unsat", f"instance {i}: value-1 not infeasible"

    # Planted cliques: a co-channel clique of c+1+j stations on c channels can
    # place only c of them, so exactly j+1 must be cleared (pigeonhole).
    c = 3
    target = 12  # 5-channel band, 2 cleared, c = 3
    for j in range(0, 4):
        size = c + 1 + j
        inst = generate_synthetic(
            12, channel_count=5, co_density=0.0, planted_clique=size, seed=100 + j
        )
        result = min_nationwide_clearings(inst, target, seed=j)
        oracle = brute_force_min_cleared(
            lambda cap: RepackProblem(
                instance=inst, clearing_target_mhz=target, max_cleared_nationwide=cap
            ),
            inst.n,
        )
        assert result.value == oracle == j + 1 == size - c


@criterion("participation-model marginals (10^4 draws, +/-0.02)")
def test_participation_marginals():
    affiliations = {}
    nets = [Affiliation.ABC, Affiliation.CBS, Affiliation.FOX, Affiliation.NBC, Affiliation.PBS]
    ids = [chr(ord("a") + i) for i in range(16)]
    for i, net in enumerate(nets):
        affiliations[ids[2 * i]] = net
        affiliations[ids[2 * i + 1]] = net
    inst = build_instance(16, channels=(1, 2, 3), affiliations=affiliations)
    groups: dict[Affiliation, list[str]] = {}
    for s in inst.stations:
        if s.is_affiliate:
            groups.setdefault(s.affiliation, []).append(s.id)

    draws = 10_000
    for kind, builder in (
        ("random-broadcasters", ModelSpec.random_broadcasters),
        ("random-affiliates", ModelSpec.random_affiliates),
        ("correlated-affiliates", ModelSpec.correlated_affiliates),
    ):
        for alpha in (0.3, 0.6, 0.9):
            spec = builder(alpha)
            counts = {sid: 0 for sid in inst.station_ids}
            for i in range(draws):
                pv = sample(spec, inst, seed=i * 3 + 1)
                nps = pv.non_participants()
                for sid in nps:
                    counts[sid] += 1
                if kind != "random-broadcasters":
                    for members in groups.values():
                        bits = {pv.bits[sid] for sid in members}
                        assert len(bits) == 1, f"{kind}: group split at draw {i}"
            for sid, hit in counts.items():
                freq = hit / draws
                assert abs(freq - alpha) <= 0.02, f"{kind} alpha={alpha} {sid}: {freq:.4f}"


@criterion("revenue model pivot/extremes/gamma")
def test_revenue_model_exact_values():
    inst = build_instance(5, revenues={"a": 0.0, "b": 1.0, "c": 2.0, "d": 3.0, "e": 4.0})
    probs = revenue_probabilities(inst, beta=0.5, gamma=1.0)
    assert probs["c"] == 0.5  # the pivot maps to sigmoid(0) exactly
    assert abs(probs["e"] - 1.0 / (1.0 + math.exp(-4.0))) <= 1e-12
    assert abs(probs["a"] - 1.0 / (1.0 + math.exp(4.0))) <= 1e-12

    aff = build_instance(
        4,
        affiliations={"a": Affiliation.ABC, "b": Affiliation.PBS},
        revenues={"a": 5.0, "b": 10.0, "c": 15.0, "d": 20.0},
    )
    zeroed = revenue_probabilities(aff, beta=0.5, gamma=0.0)
    assert zeroed["a"] == 0.0 and zeroed["b"] == 0.0
    assert zeroed["c"] > 0.0 and zeroed["d"] > 0.0


@criterion("blocking-clique soundness (1000 trials, 0 disagreements)")
def test_blocking_soundness_1000():
    inst = generate_synthetic(
        12, channel_count=5, co_density=0.12, planted_clique=6,
        planted_clique_dma=1, seed=314,
    )
    target = 12  # c = 3, blocking threshold 4
    model = ModelSpec.random_broadcasters(0.5)
    catalog = enumerate_cliques_greedy(inst, seed=1)
    exact = estimate_success(
        model, inst, target, trials=1000, seed=42, backend=BACKEND_SAT,
    )
    fast = estimate_success(
        model, inst, target, trials=1000, seed=42,
        backend=BACKEND_CLIQUE_THEN_SAT, catalog=catalog,
    )
    disagreements = sum(
        1 for a, b in zip(exact.trials, fast.trials) if a.verdict != b.verdict
    )
    assert disagreements == 0
    blocked = sum(1 for t in fast.trials if t.blocked)
    assert blocked > 100  # the fast path actually fired
    for a, b in zip(exact.trials, fast.trials):
        if b.blocked:
            assert a.verdict == "infeasible"

    # Degree of infeasibility is the union size, never the sum.
    c1 = frozenset({"a", "b", "c", "d"})
    c2 = frozenset({"c", "d", "e", "f"})
    report = blocking_check(CliqueCatalog(cliques=(c1, c2)), c1 | c2, channel_count=2)
    assert report.blocked and report.z == len(c1 | c2) == 6


@criterion("analytics estimators (missing mass, metric, conservation, r=-1)")
def test_analytics_estimators():
    from repacker import analytics

    # Missing mass at the published fixture counts: 117 singletons / 300 draws.
    inst = build_instance(12, channels=tuple(range(1, 10)))
    u = list(inst.station_ids)

    def fresh(k: int) -> ChannelAssignment:
        return ChannelAssignment(channels={s: 1 + (k // 8**i) % 8 for i, s in enumerate(u)})

    assignments, key = [], 0
    for _ in range(117):
        assignments.append(fresh(key)); key += 1
    for i in range(73):
        a = fresh(key); key += 1
        assignments.extend([a] * (3 if i < 37 else 2))
    mm = analytics.missing_mass(make_sample_set(inst, assignments, target_mhz=6))
    assert (mm.draws, mm.unique, mm.singletons) == (300, 190, 117)
    assert mm.estimate == 117 / 300 == 0.39

    # Jaccard distance is a [0, 1] metric: 10^4 random triples.
    rng = random.Random(5150)
    universe = [f"s{i:02d}" for i in range(12)]

    def rand_assignment():
        cleared = {s for s in universe if rng.random() < 0.4}
        return ChannelAssignment(channels={s: (None if s in cleared else 1) for s in universe})

    for _ in range(10_000):
        a, b, c = rand_assignment(), rand_assignment(), rand_assignment()
        dab = analytics.solution_distance(a, b)
        assert 0.0 <= dab <= 1.0
        assert dab == analytics.solution_distance(b, a)
        assert (dab == 0.0) == (a.cleared_set() == b.cleared_set())
        assert dab <= analytics.solution_distance(a, c) + analytics.solution_distance(c, b) + 1e-12

    # Conservation on real stored sample sets: DMA means sum to the
    # nationwide mean cleared count.
    synth = generate_synthetic(10, channel_count=6, co_density=0.3, seed=77)
    for target in (6, 12):
        ss = sample_solutions(synth, target, count=12, buffer=2, seed=9)
        stats = analytics.dma_stats(ss)
        assert math.isclose(stats.sum_of_means(), stats.nationwide_mean, rel_tol=1e-12)

    # Perfectly anti-varying DMA pair: r = -1 within 1e-9, significant.
    ids = [chr(ord("a") + i) for i in range(8)]
    pair_inst = build_instance(
        8, dma_of={s: (1 if s in ids[:4] else 2) for s in ids}, n_dmas=2
    )
    fixture = []
    for k in (2, 3, 4, 2, 3, 4):
        cleared = set(ids[:k]) | set(ids[4:][: 6 - k])
        fixture.append(assignment_with_cleared(pair_inst, cleared))
    pairs = analytics.dma_correlations(
        make_sample_set(pair_inst, fixture), min_mean=1.0, p_threshold=0.01
    )
    assert len(pairs) == 1
    assert abs(pairs[0].r + 1.0) <= 1e-9


@criterion("threshold shape: p non-increasing in alpha with a >0.9 -> <0.1 drop")
def test_threshold_shape():
    inst = generate_synthetic(
        30, channel_count=12, co_density=0.03, planted_clique=20,
        planted_clique_dma=1, seed=2718,
    )
    target = 18  # c = 9, blocking threshold 10
    catalog = enumerate_cliques_greedy(inst, seed=3)
    alphas = [0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
    estimates = []
    for i, alpha in enumerate(alphas):
        estimates.append(
            estimate_success(
                ModelSpec.random_broadcasters(alpha), inst, target,
                trials=200, seed=1000 + i, backend=BACKEND_CLIQUE_THEN_SAT,
                catalog=catalog,
            )
        )
    ps = [e.p for e in estimates]
    ses = [e.stderr for e in estimates]
    for i in range(len(ps) - 1):
        slack = 2.0 * math.sqrt(ses[i] ** 2 + ses[i + 1] ** 2)
        assert ps[i + 1] <= ps[i] + slack, f"p rose beyond noise at alpha={alphas[i + 1]}"
    assert max(ps) > 0.9, f"no comfortable region: {ps}"
    assert min(ps) < 0.1, f"no hopeless region: {ps}"
    assert ps[0] > 0.9 and ps[-1] < 0.1


FCC_ENV = "REPACKER_FCC_DATA"


@pytest.mark.skipif(FCC_ENV not in os.environ, reason=f"set {FCC_ENV} to run FCC-scale checks")
@criterion("FCC-scale minima (data-dependent, optional)")
def test_fcc_scale_minima():
    # Expects a directory of CSVs equivalent to the July 2013 public release.
    # Hours of compute; never part of CI.
    inst = load_instance(os.environ[FCC_ENV])
    assert inst.n == 1672
    no_domain = min_nationwide_clearings(inst, 84, use_domain=False, time_budget=60)
    assert no_domain.value == 196
    with_domain = min_nationwide_clearings(inst, 84, use_domain=True, time_budget=60)
    assert abs(with_domain.value - 275) <= 5
    dmas = min_dmas_with_clearing(inst, 84, use_domain=False, time_budget=60)
    assert dmas.value == 43
