"""
Message graphs: domination number versus agreement strength
===========================================================

One round of know-all exchange along a fixed directed graph lets each
agent learn the inputs of its in-neighborhood. Whether k-set agreement
survives that protocol is governed by the graph's domination number: the
smallest set of agents whose messages reach everyone.

Three graphs on three agents tell the whole story for k = 2: with only
self-loops the domination number is 3 and an obstruction formula exists;
adding a directed triangle drops it to 2 and the obstruction disappears.
"""

from delsim.generators import (DiGraph, agreement_run, domination_number,
                               knowall_run)
from delsim.models import standard_workspace
from delsim.obstruction import decide_obstruction

ws = standard_workspace(3)

loops = DiGraph.from_edges(3, [(a, a) for a in range(3)])
triangle = DiGraph.from_edges(3, [(0, 0), (1, 1), (2, 2),
                                  (0, 1), (1, 2), (2, 0)])
complete = DiGraph.from_edges(3, [(p, q) for p in range(3)
                                  for q in range(3)])
for name, g in (("loops only", loops), ("triangle + loops", triangle),
                ("complete", complete)):
    print(f"{name:18s} domination number {domination_number(g)}")

agree = agreement_run(ws, 2)

# silent network: nobody learns anything, so agents cannot narrow down to
# two decision values and the distributed-knowledge fixpoint dies
silent = knowall_run(ws, [loops], 1)
verdict = decide_obstruction(silent.model, agree.model, "D")
print("\nloops only, k=2:")
print("  chain sizes:", verdict.step_sizes)
print("  obstruction exists:", verdict.exists,
      "| verified:", verdict.verification.confirms)
print("  witness facet:", verdict.witness,
      "with inputs", sorted(silent.model.label(verdict.witness)))

# one triangle round: every agent hears one other agent, two senders
# cover everyone, and the fixpoint stays total at every depth
ring = knowall_run(ws, [triangle], 1)
verdict = decide_obstruction(ring.model, agree.model, "D")
print("\ntriangle + loops, k=2:")
print("  chain sizes:", verdict.step_sizes)
print("  obstruction exists:", verdict.exists)
