"""Feasibility checks, minimum-clearing searches, and solution sampling.

Timeouts are interpreted as infeasible (the standing convention for these
experiments) but always reported distinctly, so a minimum found through a
timed-out probe is flagged as an upper bound rather than certified.
"""

from __future__ import annotations

import json
import logging
import math
import os
from dataclasses import dataclass, field
from typing import Callable, Optional

from .encoder import decode, encode
from .instance import ChannelAssignment, Instance, RepackProblem, validate_assignment
from .instance_io import instance_digest
from .solver import EmbeddedSolver, SolveStats, Verdict
from .util import derive_seed
from . import parallel

log = logging.getLogger(__name__)

DEFAULT_TIME_BUDGET = 60.0
DEFAULT_BUFFER = 10
DEFAULT_SLACK = 0.05


class SearchError(RuntimeError):
    """A minimum search could not establish its base case."""


class SamplingError(RuntimeError):
    """Sampling could not produce any solution within its retry budget."""


@dataclass
class FeasibilityResult:
    verdict: Verdict
    assignment: Optional[ChannelAssignment]
    stats: SolveStats
    seed: int

    @property
    def feasible(self) -> bool:
        return self.verdict is Verdict.SAT

    @property
    def infeasible_by_timeout(self) -> bool:
        return self.verdict is Verdict.TIMEOUT


def check_feasibility(
    problem: RepackProblem,
    seed: int = 0,
    time_budget: float = DEFAULT_TIME_BUDGET,
    engine=None,
) -> FeasibilityResult:
    """Encode, solve, and decode one problem.

    A satisfiable outcome returns the decoded assignment after it has been
    re-validated against the problem; any validator complaint indicates an
    encoder bug and raises.
    """
    engine = engine or EmbeddedSolver()
    formula = encode(problem)
    outcome = engine.solve(formula, seed=seed, time_budget=time_budget)
    assignment = None
    if outcome.is_sat:
        assert outcome.model is not None
        assignment = decode(formula, outcome.model)
        violations = validate_assignment(problem, assignment)
        if violations:
            raise RuntimeError(f"decoded assignment violates the problem: {violations[:3]}")
    return FeasibilityResult(outcome.verdict, assignment, outcome.stats, seed)


@dataclass
class ProbeRecord:
    cap: int
    verdict: Verdict
    seed: int


@dataclass
class MinSearchResult:
    """Smallest feasible cap plus the evidence gathered along the way.

    ``certified`` means the bracketing pair (feasible at ``value``, infeasible
    at ``value - 1``) was established without any timeout; otherwise ``value``
    is only an upper bound.
    """

    value: int
    witness: ChannelAssignment
    probes: list[ProbeRecord] = field(default_factory=list)
    timed_out: bool = False

    @property
    def certified(self) -> bool:
        feasible_at = {p.cap for p in self.probes if p.verdict is Verdict.SAT}
        infeasible_at = {p.cap for p in self.probes if p.verdict is Verdict.UNSAT}
        return self.value in feasible_at and (self.value == 0 or self.value - 1 in infeasible_at)

    def to_json_dict(self) -> dict:
        return {
            "value": self.value,
            "certified": self.certified,
            "timed_out": self.timed_out,
            "probes": [
                {"cap": p.cap, "verdict": p.verdict.value, "seed": p.seed} for p in self.probes
            ],
        }


def _min_cap_search(
    make_problem: Callable[[int], RepackProblem],
    hi: int,
    *,
    seed: int,
    time_budget: float,
    engine,
    what: str,
) -> MinSearchResult:
    """Find the smallest cap in [0, hi] whose problem is feasible.

    Binary search over the cap. A timed-out probe is never trusted as
    infeasibility evidence: the search abandons the binary phase and walks
    down from the last certified-feasible cap, re-probing timed-out caps with
    fresh seeds, until it either brackets the minimum (feasible at the value,
    genuinely infeasible one below) or times out again and reports the value
    as an upper bound.
    """
    probes: list[ProbeRecord] = []
    attempts: dict[int, int] = {}

    def probe(cap: int) -> FeasibilityResult:
        attempt = attempts.get(cap, 0)
        attempts[cap] = attempt + 1
        res = check_feasibility(
            make_problem(cap), seed=derive_seed(seed, "probe", cap, attempt),
            time_budget=time_budget, engine=engine,
        )
        probes.append(ProbeRecord(cap, res.verdict, res.seed))
        log.debug("%s: cap=%d -> %s", what, cap, res.verdict.value)
        return res

    top = probe(hi)
    if not top.feasible:
        detail = "timed out" if top.infeasible_by_timeout else "is infeasible"
        raise SearchError(
            f"{what}: the base case with cap {hi} {detail}; the target cannot be certified"
        )
    best_cap, best = hi, top
    timed_out = False

    lo, high = 0, hi
    while lo < high:
        mid = (lo + high) // 2
        res = probe(mid)
        if res.feasible:
            high = mid
            best_cap, best = mid, res
        elif res.infeasible_by_timeout:
            timed_out = True
            break
        else:
            lo = mid + 1

    # Establish the bracket, scanning further down when probes timed out.
    while best_cap > 0:
        if any(p.cap == best_cap - 1 and p.verdict is Verdict.UNSAT for p in probes):
            break
        res = probe(best_cap - 1)
        if res.feasible:
            best_cap, best = best_cap - 1, res
        elif res.infeasible_by_timeout:
            timed_out = True
            break
        else:
            break

    assert best.assignment is not None
    return MinSearchResult(
        value=best_cap, witness=best.assignment, probes=probes, timed_out=timed_out
    )


def min_nationwide_clearings(
    instance: Instance,
    target_mhz: int,
    use_domain: bool = True,
    *,
    seed: int = 0,
    time_budget: float = DEFAULT_TIME_BUDGET,
    engine=None,
) -> MinSearchResult:
    """Smallest number of stations that must be cleared to reach the target."""

    def make(cap: int) -> RepackProblem:
        return RepackProblem(
            instance=instance,
            clearing_target_mhz=target_mhz,
            use_domain_constraints=use_domain,
            max_cleared_nationwide=cap,
        )

    return _min_cap_search(
        make, instance.n, seed=seed, time_budget=time_budget, engine=engine,
        what=f"min-clearings@{target_mhz}MHz",
    )


def min_dmas_with_clearing(
    instance: Instance,
    target_mhz: int,
    use_domain: bool = True,
    *,
    seed: int = 0,
    time_budget: float = DEFAULT_TIME_BUDGET,
    engine=None,
) -> MinSearchResult:
    """Smallest number of DMAs in which any clearing occurs."""

    def make(cap: int) -> RepackProblem:
        return RepackProblem(
            instance=instance,
            clearing_target_mhz=target_mhz,
            use_domain_constraints=use_domain,
            max_dmas_with_clearing=cap,
        )

    return _min_cap_search(
        make, len(instance.dmas), seed=seed, time_budget=time_budget, engine=engine,
        what=f"min-dmas@{target_mhz}MHz",
    )


def min_dma_clearings_isolated(
    instance: Instance,
    target_mhz: int,
    dma_id: int,
    *,
    use_domain: bool = True,
    b_star: Optional[int] = None,
    slack: float = DEFAULT_SLACK,
    seed: int = 0,
    time_budget: float = DEFAULT_TIME_BUDGET,
    engine=None,
) -> MinSearchResult:
    """Smallest clearing count for one DMA, holding nationwide near-minimal.

    The nationwide cap is the minimum plus a relative slack. Per-DMA minima
    found this way are generally not achievable simultaneously across DMAs;
    each is a statement about that DMA in isolation.
    """
    if dma_id not in instance.dmas:
        raise ValueError(f"unknown DMA {dma_id}")
    if b_star is None:
        b_star = min_nationwide_clearings(
            instance, target_mhz, use_domain,
            seed=derive_seed(seed, "b-star"), time_budget=time_budget, engine=engine,
        ).value
    nationwide_cap = math.ceil(b_star * (1.0 + slack))

    def make(cap: int) -> RepackProblem:
        return RepackProblem(
            instance=instance,
            clearing_target_mhz=target_mhz,
            use_domain_constraints=use_domain,
            max_cleared_nationwide=nationwide_cap,
            dma_caps={dma_id: cap},
        )

    hi = len(instance.dma_members.get(dma_id, ()))
    return _min_cap_search(
        make, hi, seed=seed, time_budget=time_budget, engine=engine,
        what=f"min-dma-{dma_id}@{target_mhz}MHz",
    )


@dataclass
class Sample:
    seed: int
    assignment: ChannelAssignment
    stats: Optional[SolveStats] = None


@dataclass
class SampleSet:
    """Solutions drawn by re-solving one capped problem with fresh seeds."""

    problem: RepackProblem
    samples: list[Sample]
    buffer: int = 0
    b_star: Optional[int] = None
    requested: Optional[int] = None

    @property
    def cap(self) -> Optional[int]:
        return self.problem.max_cleared_nationwide

    @property
    def shortfall(self) -> int:
        if self.requested is None:
            return 0
        return max(0, self.requested - len(self.samples))

    def assignments(self) -> list[ChannelAssignment]:
        return [s.assignment for s in self.samples]

    def save_jsonl(self, path: str | os.PathLike, config_digest: Optional[str] = None) -> None:
        meta = {
            "type": "meta",
            "kind": "sample-set",
            "instance_digest": instance_digest(self.problem.instance),
            "target_mhz": self.problem.clearing_target_mhz,
            "use_domain": self.problem.use_domain_constraints,
            "cap": self.cap,
            "b_star": self.b_star,
            "buffer": self.buffer,
            "requested": self.requested,
        }
        if config_digest:
            meta["config_digest"] = config_digest
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(meta, sort_keys=True) + "\n")
            for s in self.samples:
                record = {
                    "type": "sample",
                    "seed": s.seed,
                    "assignment": s.assignment.to_json_dict(),
                }
                if s.stats is not None:
                    record["stats"] = s.stats.to_json_dict()
                fh.write(json.dumps(record, sort_keys=True) + "\n")

    @classmethod
    def load_jsonl(cls, path: str | os.PathLike, instance: Instance) -> "SampleSet":
        with open(path, encoding="utf-8") as fh:
            lines = [json.loads(line) for line in fh if line.strip()]
        if not lines or lines[0].get("type") != "meta" or lines[0].get("kind") != "sample-set":
            raise ValueError(f"{path}: not a sample-set file")
        meta = lines[0]
        digest = instance_digest(instance)
        if meta["instance_digest"] != digest:
            raise ValueError(
                f"{path}: sample set was drawn from a different instance "
                f"({meta['instance_digest'][:12]}... vs {digest[:12]}...)"
            )
        problem = RepackProblem(
            instance=instance,
            clearing_target_mhz=int(meta["target_mhz"]),
            use_domain_constraints=bool(meta["use_domain"]),
            max_cleared_nationwide=meta["cap"],
        )
        samples = []
        for rec in lines[1:]:
            if rec.get("type") != "sample":
                continue
            stats = None
            if "stats" in rec:
                stats = SolveStats(**rec["stats"])
            samples.append(
                Sample(
                    seed=int(rec["seed"]),
                    assignment=ChannelAssignment.from_json_dict(rec["assignment"]),
                    stats=stats,
                )
            )
        return cls(
            problem=problem,
            samples=samples,
            buffer=int(meta.get("buffer") or 0),
            b_star=meta.get("b_star"),
            requested=meta.get("requested"),
        )


def _solve_sample(args) -> Optional[Sample]:
    problem, seed, time_budget, engine = args
    res = check_feasibility(problem, seed=seed, time_budget=time_budget, engine=engine)
    if not res.feasible:
        return None
    assert res.assignment is not None
    return Sample(seed=seed, assignment=res.assignment, stats=res.stats)


def sample_solutions(
    instance: Instance,
    target_mhz: int,
    use_domain: bool = True,
    *,
    count: int,
    buffer: int = DEFAULT_BUFFER,
    b_star: Optional[int] = None,
    seed: int = 0,
    time_budget: float = DEFAULT_TIME_BUDGET,
    retry_factor: int = 3,
    workers: int = 1,
    engine=None,
) -> SampleSet:
    """Draw ``count`` solutions at the minimum-plus-buffer clearing cap.

    Randomized solver seeds vary the models between draws; duplicates are
    kept, as downstream estimators need raw draw counts. Probes that fail or
    time out are retried with fresh seeds up to ``retry_factor * count``
    attempts in total; a shortfall is recorded on the returned set (and raised
    when nothing at all could be sampled).
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    if b_star is None:
        b_star = min_nationwide_clearings(
            instance, target_mhz, use_domain,
            seed=derive_seed(seed, "b-star"), time_budget=time_budget, engine=engine,
        ).value
    cap = b_star + buffer
    problem = RepackProblem(
        instance=instance,
        clearing_target_mhz=target_mhz,
        use_domain_constraints=use_domain,
        max_cleared_nationwide=cap,
    )

    max_attempts = max(count, retry_factor * count)
    samples: list[Sample] = []
    attempt = 0
    while len(samples) < count and attempt < max_attempts:
        batch = min(count - len(samples), max_attempts - attempt)
        tasks = [
            (problem, derive_seed(seed, "sample", attempt + i), time_budget, engine)
            for i in range(batch)
        ]
        attempt += batch
        for result in parallel.run_tasks(_solve_sample, tasks, workers=workers):
            if result is not None:
                samples.append(result)
    if not samples:
        raise SamplingError(
            f"no solutions sampled in {max_attempts} attempts at cap {cap} "
            f"(target {target_mhz} MHz)"
        )
    if len(samples) < count:
        log.warning(
            "sampled %d of %d requested solutions in %d attempts", len(samples), count, attempt
        )
    return SampleSet(
        problem=problem, samples=samples, buffer=buffer, b_star=b_star, requested=count
    )
