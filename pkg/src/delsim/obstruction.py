"""Obstruction formulas: synthesis from a stalled simulation, and independent
verification by model checking.

The characteristic formula of depth n at a facet X is the positive formula
that exactly refutes n-step similarity: X' falsifies it precisely when X is
n-step simulated by X'. When the maximum-simulation chain between a protocol
model and a task model stabilizes without covering some protocol facet X, the
characteristic formula at X holds everywhere on the task model but fails at X,
which is the logical obstruction to solvability. Verification never consults
the simulation engine; it only model-checks.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InternalConsistencyError, UsageError
from .logic import (Formula, FormulaClass, ModelTable, atom, classify, disj,
                    dknow, know, neg)
from .simulation import Mode, SimulationEngine, totality_witnesses


def characteristic_formulas(model, mode: Mode, n: int) -> list[list[Formula]]:
    """Level table: entry [k][X] is the depth-k formula at facet X.

    Depth 0 disagrees with X's label on some atom. In K mode each later level
    adds, per agent and per indistinguishable facet Y, that the agent knows
    Y's previous-level formula; in D mode it disjoins, over every facet Y,
    distributed knowledge (for the colors shared with Y) of Y's formula - Y
    ranging over all facets, including X itself and color-disjoint ones.
    """
    if mode not in ("K", "D"):
        raise UsageError(f"mode must be 'K' or 'D', got {mode!r}")
    if n < 0:
        raise UsageError("formula depth must be >= 0")
    ws = model.workspace
    universe = [atom(a, v) for (a, v) in ws.atom_universe()]
    if not universe:
        raise UsageError("empty atom universe")

    base: list[Formula] = []
    for lab in model.facet_labels:
        parts = [neg(p) for p in universe if p.payload in lab]
        parts += [p for p in universe if p.payload not in lab]
        base.append(disj(parts))
    levels = [base]

    n_agents = ws.n_agents
    nf = model.n_facets
    for _ in range(n):
        prev = levels[-1]
        cur: list[Formula] = []
        for x in range(nf):
            if mode == "K":
                parts = [base[x]]
                for a in range(n_agents):
                    ys = sorted({x} | {y for y, colors in model.neighbors(x)
                                       if a in colors})
                    parts.extend(know(a, prev[y]) for y in ys)
            else:
                shared = dict(model.neighbors(x))
                full = frozenset(range(n_agents))
                parts = []
                for y in range(nf):
                    colors = full if y == x else shared.get(y, frozenset())
                    parts.append(dknow(colors, prev[y]))
            cur.append(disj(parts))
        levels.append(cur)
    return levels


def characteristic_formula(model, mode: Mode, n: int, facet: int) -> Formula:
    if not 0 <= facet < model.n_facets:
        raise UsageError(f"facet index {facet} out of range")
    return characteristic_formulas(model, mode, n)[n][facet]


@dataclass
class ObstructionCheck:
    """Model-checking outcome for a candidate obstruction formula."""

    task_models_phi: bool
    protocol_countermodel: int | None

    @property
    def confirms(self) -> bool:
        return self.task_models_phi and self.protocol_countermodel is not None

    def to_json(self) -> dict:
        return {"task_models_phi": self.task_models_phi,
                "protocol_countermodel": self.protocol_countermodel}


def verify_obstruction(phi: Formula, task, protocol) -> ObstructionCheck:
    """phi obstructs when the task model satisfies it everywhere and some
    protocol facet refutes it. Only positive formulas qualify."""
    if classify(phi) not in (FormulaClass.LK_POS, FormulaClass.LD_POS):
        raise UsageError("obstruction candidates must be positive formulas")
    task_vec = ModelTable(task).satisfies(phi)
    prot_vec = ModelTable(protocol).satisfies(phi)
    counter = None
    for i, ok in enumerate(prot_vec):
        if not ok:
            counter = i
            break
    return ObstructionCheck(task_models_phi=bool(task_vec.all()),
                            protocol_countermodel=counter)


@dataclass
class ObstructionVerdict:
    exists: bool
    mode: Mode
    n: int
    witness: int | None
    phi: Formula | None
    verification: ObstructionCheck | None
    step_sizes: list[int]
    step_total: list[bool]

    def to_json(self, phi_file: str | None = None) -> dict:
        return {
            "exists": self.exists,
            "mode": self.mode,
            "n": self.n,
            "witness": self.witness,
            "phi_file": phi_file,
            "verified": self.verification.to_json() if self.verification else None,
            "steps": [{"n": i, "pairs": p, "total": t}
                      for i, (p, t) in enumerate(zip(self.step_sizes, self.step_total))],
        }


def decide_obstruction(protocol, task, mode: Mode) -> ObstructionVerdict:
    """Run the chain; either it is total at stabilization (no obstruction,
    the task is solvable as far as this mode can tell) or the characteristic
    formula at the lowest uncovered facet is a verified obstruction.

    The per-step totality record lets callers spot smaller depths by hand.
    A synthesized formula that fails verification raises
    InternalConsistencyError: the two routes must agree.
    """
    engine = SimulationEngine(protocol, task)
    chain = engine.chain(mode)
    sizes = [s.count for s in chain.steps]
    totals = [s.is_total() for s in chain.steps]
    witnesses = totality_witnesses(chain.fixpoint)
    if not witnesses:
        return ObstructionVerdict(False, mode, chain.stabilized_at, None, None,
                                  None, sizes, totals)
    x = witnesses[0]
    n = chain.stabilized_at
    phi = characteristic_formula(protocol, mode, n, x)
    check = verify_obstruction(phi, task, protocol)
    refuted_at_witness = not ModelTable(protocol).check(x, phi)
    if not (check.task_models_phi and refuted_at_witness):
        raise InternalConsistencyError(
            f"obstruction at facet {x} (depth {n}) failed verification: "
            f"{check.to_json()}")
    return ObstructionVerdict(True, mode, n, x, phi, check, sizes, totals)
