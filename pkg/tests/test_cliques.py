"""Greedy clique enumeration and the blocking-clique fast path."""

from __future__ import annotations

import pytest

from repacker.cliques import (
    CliqueCatalog,
    CliqueError,
    attribution_fraction,
    blocking_check,
    enumerate_cliques_greedy,
)
from repacker.montecarlo import TrialReport
from repacker.participation import ParticipationVector
from repacker.synthetic import generate_synthetic, planted_clique_ids

from conftest import build_instance


class TestEnumeration:
    def test_planted_clique_found(self):
        inst = generate_synthetic(10, co_density=0.05, planted_clique=6, seed=5)
        catalog = enumerate_cliques_greedy(inst, seed=1)
        planted = set(planted_clique_ids(6))
        assert any(planted <= c for c in catalog.cliques)

    def test_empty_graph_empty_catalog(self):
        inst = build_instance(5)
        catalog = enumerate_cliques_greedy(inst, min_size=2)
        assert len(catalog) == 0

    def test_triangle_found(self):
        inst = build_instance(4, co_pairs=(("a", "b"), ("a", "c"), ("b", "c")))
        catalog = enumerate_cliques_greedy(inst, min_size=3)
        assert frozenset({"a", "b", "c"}) in catalog.cliques

    def test_deterministic_for_seed(self):
        inst = generate_synthetic(14, co_density=0.3, seed=8)
        a = enumerate_cliques_greedy(inst, seed=4)
        b = enumerate_cliques_greedy(inst, seed=4)
        assert a.cliques == b.cliques

    def test_catalog_deduplicated(self):
        inst = build_instance(3, co_pairs=(("a", "b"), ("a", "c"), ("b", "c")))
        catalog = enumerate_cliques_greedy(inst, attempts_per_vertex=8, min_size=3)
        assert len(catalog.cliques) == len(set(catalog.cliques))

    def test_every_entry_pairwise_connected(self):
        inst = generate_synthetic(15, co_density=0.35, seed=3)
        catalog = enumerate_cliques_greedy(inst, seed=2)
        adj = inst.co_adjacency
        for clique in catalog.cliques:
            members = sorted(clique)
            for i, a in enumerate(members):
                for b in members[i + 1 :]:
                    assert b in adj[a]

    def test_min_size_filter(self):
        inst = build_instance(4, co_pairs=(("a", "b"),))
        assert len(enumerate_cliques_greedy(inst, min_size=3)) == 0
        assert len(enumerate_cliques_greedy(inst, min_size=2)) == 1

    def test_jsonl_round_trip(self, tmp_path):
        inst = generate_synthetic(10, co_density=0.3, seed=6)
        catalog = enumerate_cliques_greedy(inst, seed=9)
        path = tmp_path / "cliques.jsonl"
        catalog.save_jsonl(path, inst, seed=9)
        loaded = CliqueCatalog.load_jsonl(path, inst)
        assert loaded.cliques == catalog.cliques

    def test_load_verifies_membership(self, tmp_path):
        inst = build_instance(3, co_pairs=(("a", "b"),))
        path = tmp_path / "bad.jsonl"
        good = enumerate_cliques_greedy(inst, min_size=2)
        good.save_jsonl(path, inst)
        text = path.read_text().replace('["a", "b"]', '["a", "c"]')
        path.write_text(text)
        with pytest.raises(CliqueError):
            CliqueCatalog.load_jsonl(path, inst)


def participation_all(ids) -> ParticipationVector:
    return ParticipationVector(bits={sid: 1 for sid in ids})


class TestBlockingCheck:
    def test_clique_of_c_plus_one_blocks(self):
        catalog = CliqueCatalog(cliques=(frozenset(f"s{i}" for i in range(25)),))
        ids = [f"s{i}" for i in range(25)]
        report = blocking_check(catalog, frozenset(ids), channel_count=24)
        assert report.blocked and report.z == 25

    def test_intersection_below_threshold_not_blocked(self):
        catalog = CliqueCatalog(cliques=(frozenset({"a", "b", "c"}),))
        report = blocking_check(catalog, frozenset({"a", "b"}), channel_count=2)
        assert not report.blocked
        assert report.z is None

    def test_all_participating_is_unknown(self):
        catalog = CliqueCatalog(cliques=(frozenset({"a", "b", "c"}),))
        report = blocking_check(catalog, frozenset(), channel_count=1)
        assert not report.blocked

    def test_disjoint_blocking_cliques_sum(self):
        big1 = frozenset(f"x{i}" for i in range(25))
        big2 = frozenset(f"y{i}" for i in range(27))
        catalog = CliqueCatalog(cliques=(big1, big2))
        report = blocking_check(catalog, big1 | big2, channel_count=24)
        assert report.blocked and report.z == 52

    def test_overlapping_blocking_cliques_union_not_sum(self):
        c1 = frozenset({"a", "b", "c", "d"})
        c2 = frozenset({"c", "d", "e", "f"})
        catalog = CliqueCatalog(cliques=(c1, c2))
        report = blocking_check(catalog, c1 | c2, channel_count=2)
        assert report.blocked
        assert report.z == 6  # union, not 8
        assert report.clique_count == 2

    def test_partial_overlap_with_nonparticipants(self):
        clique = frozenset({"a", "b", "c", "d", "e"})
        catalog = CliqueCatalog(cliques=(clique,))
        # Three of five members refuse; threshold c+1 = 3 met.
        report = blocking_check(catalog, frozenset({"a", "b", "c"}), channel_count=2)
        assert report.blocked and report.z == 3
        # Only two refuse: not enough.
        report = blocking_check(catalog, frozenset({"a", "b"}), channel_count=2)
        assert not report.blocked


def _trial(verdict: str, z=None) -> TrialReport:
    return TrialReport(
        index=0, seed=0, draw_digest="", verdict=verdict, z=z,
        blocking_cliques=None if z is None else 1,
    )


class TestAttribution:
    def test_all_blocked(self):
        trials = [_trial("infeasible", z=5), _trial("infeasible", z=7)]
        result = attribution_fraction(trials)
        assert result.fraction == 1.0
        assert result.blocked_infeasible == 2

    def test_none_blocked(self):
        trials = [_trial("infeasible"), _trial("infeasible")]
        assert attribution_fraction(trials).fraction == 0.0

    def test_mixed(self):
        trials = [_trial("infeasible", z=5), _trial("infeasible"), _trial("feasible")]
        result = attribution_fraction(trials)
        assert result.fraction == 0.5
        assert result.infeasible == 2

    def test_no_infeasible_trials_undefined(self):
        result = attribution_fraction([_trial("feasible")])
        assert result.fraction is None
