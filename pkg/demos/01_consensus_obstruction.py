"""
Why one round of snapshots cannot reach consensus
=================================================

Two agents each hold a bit and exchange one round of immediate snapshots.
Consensus (everyone decides the same, already-held value) is unsolvable;
this script watches the refinement chain collapse and then checks the
synthesized obstruction formula by plain model checking.
"""

from delsim.generators import agreement_run, snapshot_run
from delsim.logic import ModelTable, dag_size, to_sexp, tree_size
from delsim.models import find_morphism, standard_workspace
from delsim.obstruction import decide_obstruction

ws = standard_workspace(2, (0, 1))

# the protocol model: 4 input assignments x 3 interleavings = 12 facets
snap = snapshot_run(ws, 1)
print("protocol facets:", snap.model.n_facets)

# the task model: per input, the agreed decisions allowed by consensus
agree = agreement_run(ws, 1)
print("task facets:    ", agree.model.n_facets)

# the maximum K-simulation shrinks step by step until nothing is left
verdict = decide_obstruction(snap.model, agree.model, "K")
for step in verdict.to_json()["steps"]:
    print(f"  step {step['n']}: {step['pairs']} candidate pairs")

# an empty fixpoint yields a formula the task satisfies everywhere but the
# protocol refutes at the witness facet; both checks run independently of
# the chain that produced the formula
print("obstruction exists:", verdict.exists)
print("witness facet:", verdict.witness, "| depth:", verdict.n)
print("task models formula:", verdict.verification.task_models_phi)
print("protocol countermodel:", verdict.verification.protocol_countermodel)

# the formula is tiny as a shared dag but large written out as a tree
print("dag size:", dag_size(verdict.phi), "| tree size:", tree_size(verdict.phi))
print(to_sexp(verdict.phi)[:200], "...")

# sanity: no task-solving map exists either
print("morphism search:", find_morphism(snap.model, agree.model))

# and indeed no protocol facet satisfies the formula
table = ModelTable(snap.model)
print("protocol facets satisfying the formula:",
      int(table.satisfies(verdict.phi).sum()))
