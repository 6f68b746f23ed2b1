"""
One round of snapshots solves 2-set agreement
=============================================

Relaxing consensus to "at most two distinct decisions" flips the verdict:
the maximum simulation stays total, an explicit decide-what-you-saw
relation certifies it, and a task-solving map exists outright.
"""

from delsim.generators import (agreement_run, explicit_agreement_relation,
                               snapshot_run)
from delsim.models import find_morphism, graph_of_morphism, standard_workspace
from delsim.obstruction import decide_obstruction
from delsim.simulation import SimulationEngine

ws = standard_workspace(3)
snap = snapshot_run(ws, 1)
agree = agreement_run(ws, 2)
print("protocol facets:", snap.model.n_facets)
print("task facets:    ", agree.model.n_facets)

# the chain stabilizes while still covering every protocol facet
verdict = decide_obstruction(snap.model, agree.model, "K")
print("obstruction exists:", verdict.exists)
print("chain sizes:", verdict.step_sizes, "| total at end:", verdict.step_total[-1])

# a hand-built relation no bigger than the fixpoint: relate a protocol facet
# to an output facet when inputs match and every decision was seen
eng = SimulationEngine(snap.model, agree.model)
explicit = explicit_agreement_relation(snap, agree)
report = eng.verify(explicit, "K")
print("explicit relation pairs:", explicit.count)
print("is a K-simulation:", report.is_simulation, "| total:", report.total)

# with two agents the search even finds a pointwise map; its graph is a
# simulation in both modes at once
ws2 = standard_workspace(2, (0, 1))
snap2 = snapshot_run(ws2, 1)
agree2 = agreement_run(ws2, 2)
f = find_morphism(snap2.model, agree2.model)
print("2-agent morphism found:", f is not None)
rel = graph_of_morphism(f, snap2.model, agree2.model)
for mode in ("K", "D"):
    rep = SimulationEngine(snap2.model, agree2.model).verify(rel, mode)
    print(f"  graph verifies as {mode}-simulation:", rep.is_simulation)
