"""
The staircase: slow convergence and growing obstruction formulas
===============================================================

A finite slice of a task where two agents pick naturals d0, d1 with
0 <= d0 - d1 <= 1 and each decision's parity must match that agent's
input bit. Truncating decisions at 4 gives a 9-facet path. Against the
do-nothing protocol the simulation chain shrinks by a constant amount
per step, so the refinement depth (and the obstruction formula) grows
with the truncation bound instead of stabilizing after a round or two.
"""

from delsim.generators import staircase_setup
from delsim.logic import dag_size, tree_size
from delsim.obstruction import characteristic_formula, decide_obstruction
from delsim.simulation import SimulationEngine

stair = staircase_setup(4)
print("decision pairs:", stair.task.facet_decisions)

proto = stair.protocol_run.model
task = stair.task_run.model
print("protocol facets:", proto.n_facets, "| task facets:", task.n_facets)

# the path erodes from both ends at once: two pairs vanish per step
for mode in ("K", "D"):
    chain = SimulationEngine(proto, task).chain(mode)
    print(f"{mode}-chain sizes: {[s.count for s in chain.steps]}"
          f" (stabilizes at n={chain.stabilized_at})")

verdict = decide_obstruction(proto, task, "K")
print("obstruction at depth", verdict.n,
      "| verified:", verdict.verification.confirms)

# each refinement level wraps the last in fresh knowledge operators, so
# the shared-subterm size grows linearly while the tree form explodes
print("\nlevel  dag_size  tree_size")
for n in range(verdict.n + 1):
    phi = characteristic_formula(proto, "K", n, verdict.witness)
    print(f"{n:5d}  {dag_size(phi):8d}  {tree_size(phi):9d}")
