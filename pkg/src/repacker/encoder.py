"""Translation of repacking problems into CNF, and back out of models.

Variable layout per station: one "cleared" variable plus one variable per
retained channel. Reserved channels stay in the layout (the channel count is
defined over the retained slice) and are blocked for every station by unit
clauses. Cardinality caps use the sequential-counter encoding, and the
DMA-count cap introduces one indicator variable per DMA that is true exactly
when some station of that DMA is cleared.
"""

from __future__ import annotations

import io
import re
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, TextIO

from .instance import ChannelAssignment, ConstraintKind, RepackProblem


class EncodingError(ValueError):
    """Malformed formula, var map, or solver model."""


class VarPool:
    """Allocates fresh 1-based CNF variable indices."""

    def __init__(self, start: int = 1) -> None:
        self._next = start

    def fresh(self) -> int:
        v = self._next
        self._next += 1
        return v

    @property
    def count(self) -> int:
        return self._next - 1


@dataclass
class VarMap:
    """Bidirectional map between semantic variables and CNF indices."""

    assign: dict[tuple[str, int], int] = field(default_factory=dict)
    cleared: dict[str, int] = field(default_factory=dict)
    dma_any_clearing: dict[int, int] = field(default_factory=dict)
    var_count: int = 0

    def names(self) -> dict[int, str]:
        out: dict[int, str] = {}
        for (sid, ch), v in self.assign.items():
            out[v] = f"assign:{sid}:{ch}"
        for sid, v in self.cleared.items():
            out[v] = f"cleared:{sid}"
        for dma, v in self.dma_any_clearing.items():
            out[v] = f"dma_any_clearing:{dma}"
        return out

    def to_json_dict(self) -> dict:
        named = self.names()
        return {
            "var_count": self.var_count,
            "vars": {str(v): named[v] for v in sorted(named)},
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "VarMap":
        vm = cls(var_count=int(data["var_count"]))
        for idx_text, name in data["vars"].items():
            idx = int(idx_text)
            kind, _, rest = name.partition(":")
            if kind == "assign":
                sid, _, ch = rest.rpartition(":")
                vm.assign[(sid, int(ch))] = idx
            elif kind == "cleared":
                vm.cleared[rest] = idx
            elif kind == "dma_any_clearing":
                vm.dma_any_clearing[int(rest)] = idx
            else:
                raise EncodingError(f"unknown variable name {name!r}")
        return vm


@dataclass(frozen=True)
class CnfFormula:
    var_count: int
    clauses: tuple[tuple[int, ...], ...]
    var_map: Optional[VarMap] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "clauses", tuple(tuple(c) for c in self.clauses))
        for clause in self.clauses:
            if not clause:
                raise EncodingError("empty clause")
            for lit in clause:
                if lit == 0 or abs(lit) > self.var_count:
                    raise EncodingError(f"literal {lit} outside 1..{self.var_count}")

    @property
    def clause_count(self) -> int:
        return len(self.clauses)


def at_most_true(
    variables: Sequence[int], k: int, pool: VarPool
) -> tuple[list[tuple[int, ...]], list[int]]:
    """Clauses forcing at most ``k`` of ``variables`` to be true.

    Sequential-counter encoding (Sinz 2005): register s[i][j] means "at least
    j of the first i variables are true". Returns the clause list and the
    fresh auxiliary variables it allocated. Projected onto ``variables``, the
    satisfying assignments are exactly those with at most ``k`` true.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    if not variables:
        raise ValueError("variables must be non-empty")
    n = len(variables)
    if k >= n:
        return [], []
    if k == 0:
        return [(-v,) for v in variables], []

    # s[i][j], 0-based: counter register for prefix i+1 and count j+1.
    s = [[pool.fresh() for _ in range(k)] for _ in range(n - 1)]
    aux = [v for row in s for v in row]
    clauses: list[tuple[int, ...]] = []
    clauses.append((-variables[0], s[0][0]))
    for j in range(1, k):
        clauses.append((-s[0][j],))
    for i in range(1, n - 1):
        xi = variables[i]
        clauses.append((-xi, s[i][0]))
        clauses.append((-s[i - 1][0], s[i][0]))
        for j in range(1, k):
            clauses.append((-xi, -s[i - 1][j - 1], s[i][j]))
            clauses.append((-s[i - 1][j], s[i][j]))
        clauses.append((-xi, -s[i - 1][k - 1]))
    clauses.append((-variables[n - 1], -s[n - 2][k - 1]))
    return clauses, aux


def encode(problem: RepackProblem) -> CnfFormula:
    """Encode a repacking problem as CNF.

    Per station: exactly one of {cleared, channel...} holds, with the cleared
    slot ruled out for must-repack stations. Interference clauses range over
    actual channels only; two cleared stations never conflict. Domain rows are
    dropped when the problem ignores domain constraints, but reserved-channel
    prohibitions always apply.
    """
    inst = problem.instance
    plan = problem.channel_plan
    channels = plan.channels
    channel_set = set(channels)
    pool = VarPool()
    vm = VarMap()

    for sid in inst.station_ids:
        vm.cleared[sid] = pool.fresh()
        for ch in channels:
            vm.assign[(sid, ch)] = pool.fresh()

    clauses: list[tuple[int, ...]] = []

    # Exactly-one slot per station.
    for sid in inst.station_ids:
        slots = [vm.assign[(sid, ch)] for ch in channels]
        if sid in problem.must_repack:
            if slots:
                clauses.append(tuple(slots))
            else:
                # No channels left: the station cannot be placed at all.
                clauses.append((vm.cleared[sid],))
                clauses.append((-vm.cleared[sid],))
        else:
            clauses.append((vm.cleared[sid], *slots))
        all_slots = [vm.cleared[sid], *slots]
        for p in range(len(all_slots)):
            for q in range(p + 1, len(all_slots)):
                clauses.append((-all_slots[p], -all_slots[q]))

    # Pairwise interference over actual channels.
    for ic in inst.sorted_interference():
        if ic.kind is ConstraintKind.CO:
            for ch in channels:
                clauses.append((-vm.assign[(ic.a, ch)], -vm.assign[(ic.b, ch)]))
        elif ic.kind is ConstraintKind.ADJ_UP:
            # channel(a) != channel(b) + 1; vacuous when ch+1 is not retained.
            for ch in channels:
                if ch + 1 in channel_set:
                    clauses.append((-vm.assign[(ic.a, ch + 1)], -vm.assign[(ic.b, ch)]))
        else:
            for ch in channels:
                if ch - 1 in channel_set:
                    clauses.append((-vm.assign[(ic.a, ch - 1)], -vm.assign[(ic.b, ch)]))

    # Channel prohibitions: reserved channels for everyone, then per-station rows.
    for sid in inst.station_ids:
        for ch in channels:
            if ch in plan.flagged:
                clauses.append((-vm.assign[(sid, ch)],))
    if problem.use_domain_constraints:
        for dc in inst.sorted_domain():
            if dc.channel in channel_set and dc.channel not in plan.flagged:
                clauses.append((-vm.assign[(dc.station, dc.channel)],))

    # Cardinality caps.
    cleared_vars = [vm.cleared[sid] for sid in inst.station_ids]
    if problem.max_cleared_nationwide is not None:
        extra, _ = at_most_true(cleared_vars, problem.max_cleared_nationwide, pool)
        clauses.extend(extra)
    for dma in sorted(problem.dma_caps):
        members = inst.dma_members.get(dma, ())
        if not members:
            continue
        extra, _ = at_most_true([vm.cleared[sid] for sid in members], problem.dma_caps[dma], pool)
        clauses.extend(extra)

    if problem.max_dmas_with_clearing is not None:
        for dma in sorted(inst.dmas):
            vm.dma_any_clearing[dma] = pool.fresh()
        for dma in sorted(inst.dmas):
            y = vm.dma_any_clearing[dma]
            members = inst.dma_members.get(dma, ())
            for sid in members:
                clauses.append((-vm.cleared[sid], y))
            clauses.append(tuple(vm.cleared[sid] for sid in members) + (-y,))
        extra, _ = at_most_true(
            [vm.dma_any_clearing[dma] for dma in sorted(inst.dmas)],
            problem.max_dmas_with_clearing,
            pool,
        )
        clauses.extend(extra)

    vm.var_count = pool.count
    return CnfFormula(var_count=pool.count, clauses=tuple(clauses), var_map=vm)


def decode(formula: CnfFormula, model: Sequence[bool]) -> ChannelAssignment:
    """Read a channel assignment out of a satisfying model.

    The model must assign every variable (index 0 unused). A station with
    anything other than exactly one true slot signals an encoder bug.
    """
    if formula.var_map is None:
        raise EncodingError("formula carries no variable map")
    vm = formula.var_map
    if len(model) != formula.var_count + 1:
        raise EncodingError(
            f"model covers {len(model) - 1} variables, formula has {formula.var_count}"
        )
    channels: dict[str, Optional[int]] = {}
    per_station: dict[str, list[Optional[int]]] = {sid: [] for sid in vm.cleared}
    for sid, v in vm.cleared.items():
        if model[v]:
            per_station[sid].append(None)
    for (sid, ch), v in vm.assign.items():
        if model[v]:
            per_station[sid].append(ch)
    for sid, slots in per_station.items():
        if len(slots) != 1:
            raise EncodingError(f"station {sid} has {len(slots)} true slots in the model")
        channels[sid] = slots[0]
    return ChannelAssignment(channels=channels)


def export_dimacs(formula: CnfFormula, sink: TextIO) -> None:
    """Write the formula in DIMACS CNF format."""
    sink.write(f"p cnf {formula.var_count} {formula.clause_count}\n")
    for clause in formula.clauses:
        sink.write(" ".join(str(lit) for lit in clause))
        sink.write(" 0\n")


def dimacs_text(formula: CnfFormula) -> str:
    buf = io.StringIO()
    export_dimacs(formula, buf)
    return buf.getvalue()


@dataclass(frozen=True)
class ExternalResult:
    satisfiable: bool
    literals: tuple[int, ...] = ()


_STATUS_RE = re.compile(r"^s\s+(SATISFIABLE|UNSATISFIABLE)\s*$")


def parse_dimacs_result(text: str) -> ExternalResult:
    """Parse standard SAT-solver output (``s`` status line plus ``v`` lines)."""
    status: Optional[bool] = None
    literals: list[int] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        m = _STATUS_RE.match(line)
        if m:
            if status is not None:
                raise ValueError("multiple status lines in solver output")
            status = m.group(1) == "SATISFIABLE"
            continue
        if line.startswith("v"):
            for tok in line[1:].split():
                lit = int(tok)
                if lit != 0:
                    literals.append(lit)
            continue
        if line in ("SAT", "SATISFIABLE"):
            status = True
        elif line in ("UNSAT", "UNSATISFIABLE"):
            status = False
    if status is None:
        raise ValueError("no status line found in solver output")
    if status and not literals:
        raise ValueError("satisfiable result without a model")
    return ExternalResult(satisfiable=status, literals=tuple(literals))


def model_from_literals(literals: Iterable[int], var_count: int) -> tuple[bool, ...]:
    """Build a full model vector; unmentioned variables default to false."""
    model = [False] * (var_count + 1)
    for lit in literals:
        v = abs(lit)
        if v == 0 or v > var_count:
            raise ValueError(f"literal {lit} outside 1..{var_count}")
        model[v] = lit > 0
    return tuple(model)
