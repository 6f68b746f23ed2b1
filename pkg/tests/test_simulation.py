"""Relations, refinement chains, verification, and the vectorized forth."""

import random

import numpy as np
import pytest

import oracles
from delsim.errors import UsageError
from delsim.models import input_model, standard_workspace
from delsim.simulation import (Relation, SimulationEngine, initial_relation,
                               max_simulation, refine, simulation_chain,
                               totality_witnesses)

# chain sizes frozen after matching the set-based oracle pair-for-pair
CONSENSUS_K = [18, 14, 10, 6, 2, 0]
CONSENSUS_D = [18, 14, 10, 0]
TWO_AGENT_K2 = [30, 22]
STAIR_K = [9, 7, 5, 3, 1, 0]
STAIR_D = [9, 7, 5, 3, 0]


def test_relation_basics():
    r = Relation.from_pairs((2, 3), [(0, 1), (1, 2), (0, 1)])
    assert r.dims == (2, 3)
    assert r.count == 2
    assert r.contains(0, 1) and not r.contains(1, 1)
    assert r.pairs() == [(0, 1), (1, 2)]
    assert r.is_total()
    smaller = Relation.from_pairs((2, 3), [(0, 1)])
    assert smaller <= r and not r <= smaller
    assert totality_witnesses(smaller) == [1]


def test_relation_bounds_checked():
    with pytest.raises(UsageError):
        Relation.from_pairs((2, 2), [(2, 0)])
    with pytest.raises(UsageError):
        Relation.from_pairs((2, 2), [(0, -1)])


def test_initial_relation_is_label_equality(snap1_2, agree1_2):
    r = initial_relation(snap1_2.model, agree1_2.model)
    for i in range(snap1_2.model.n_facets):
        for j in range(agree1_2.model.n_facets):
            same = oracles.facet_label(snap1_2.model, i) == \
                oracles.facet_label(agree1_2.model, j)
            assert r.contains(i, j) == same


@pytest.mark.parametrize("mode,expected", [("K", CONSENSUS_K),
                                           ("D", CONSENSUS_D)])
def test_consensus_chain_matches_oracle(snap1_2, agree1_2, mode, expected):
    ch = simulation_chain(snap1_2.model, agree1_2.model, mode)
    assert [s.count for s in ch.steps] == expected
    naive = oracles.chain_naive(snap1_2.model, agree1_2.model, mode)
    assert [frozenset(s.pairs()) for s in ch.steps] == naive
    assert ch.stabilized_at == len(expected) - 1
    assert ch.fixpoint.count == 0


@pytest.mark.parametrize("mode", ["K", "D"])
def test_two_agent_two_set_chain_total(snap1_2, agree2_2, mode):
    ch = simulation_chain(snap1_2.model, agree2_2.model, mode)
    assert [s.count for s in ch.steps] == TWO_AGENT_K2
    assert ch.fixpoint.is_total()
    naive = oracles.chain_naive(snap1_2.model, agree2_2.model, mode)
    assert frozenset(ch.fixpoint.pairs()) == naive[-1]


@pytest.mark.parametrize("mode,expected", [("K", STAIR_K), ("D", STAIR_D)])
def test_staircase_chain_matches_oracle(stair, mode, expected):
    left = stair.protocol_run.model
    right = stair.task_run.model
    ch = simulation_chain(left, right, mode)
    assert [s.count for s in ch.steps] == expected
    assert [frozenset(s.pairs()) for s in ch.steps] == \
        oracles.chain_naive(left, right, mode)


def test_identity_pair_stabilizes_immediately():
    m = input_model(standard_workspace(2, (0, 1)))
    for mode in ("K", "D"):
        ch = simulation_chain(m, m, mode)
        assert [s.count for s in ch.steps] == [4]
        assert ch.fixpoint.is_total()


def test_chain_descends_stepwise(snap1_2, agree1_2, stair):
    for left, right in [(snap1_2.model, agree1_2.model),
                        (stair.protocol_run.model, stair.task_run.model)]:
        for mode in ("K", "D"):
            ch = simulation_chain(left, right, mode)
            for a, b in zip(ch.steps, ch.steps[1:]):
                assert b <= a and b.count < a.count


def test_max_simulation_wrapper(snap1_2, agree1_2):
    fix, n = max_simulation(snap1_2.model, agree1_2.model, "K")
    assert n == len(CONSENSUS_K) - 1
    assert fix.count == 0


def test_vectorized_forth_equals_naive_on_random_relations(snap1_2, agree2_2):
    eng = SimulationEngine(snap1_2.model, agree2_2.model)
    rng = random.Random(40)
    nl, nr = snap1_2.model.n_facets, agree2_2.model.n_facets
    for mode in ("K", "D"):
        for _ in range(60):
            bits = np.zeros((nl, nr), dtype=bool)
            for i in range(nl):
                for j in range(nr):
                    bits[i, j] = rng.random() < 0.55
            r = Relation(bits)
            fast = eng.forth(r, mode)
            slow = eng.forth_naive(r, mode)
            assert np.array_equal(fast, slow), mode


def test_refine_drops_unmatched_pairs(snap1_2, agree1_2):
    s0 = initial_relation(snap1_2.model, agree1_2.model)
    s1 = refine(snap1_2.model, agree1_2.model, s0, "K")
    assert s1 <= s0 and s1.count == CONSENSUS_K[1]


def test_fixpoint_is_maximal(snap1_2, agree2_2):
    # adding any absent pair to the fixpoint breaks the simulation property
    eng = SimulationEngine(snap1_2.model, agree2_2.model)
    for mode in ("K", "D"):
        fix = eng.chain(mode).fixpoint
        absent = [(i, j)
                  for i in range(snap1_2.model.n_facets)
                  for j in range(agree2_2.model.n_facets)
                  if not fix.contains(i, j)]
        rng = random.Random(7)
        for i, j in rng.sample(absent, min(100, len(absent))):
            bits = fix.bits.copy()
            bits[i, j] = True
            report = eng.verify(Relation(bits), mode)
            assert not report.is_simulation


def test_verify_reports_counterexamples(snap1_2, agree1_2):
    eng = SimulationEngine(snap1_2.model, agree1_2.model)
    s0 = eng.initial_relation()
    report = eng.verify(s0, "K")
    assert report.atom_ok
    assert not report.forth_ok
    assert report.counterexamples
    ce = report.counterexamples[0]
    assert ce["kind"] == "forth"
    assert not eng.verify(s0, "K", max_counterexamples=1).forth_ok


def test_verify_flags_label_mismatches(snap1_2, agree1_2):
    nl, nr = snap1_2.model.n_facets, agree1_2.model.n_facets
    full = Relation(np.ones((nl, nr), dtype=bool))
    report = SimulationEngine(snap1_2.model, agree1_2.model).verify(full, "K")
    assert not report.atom_ok
    assert any(c["kind"] == "atom" for c in report.counterexamples)


def test_verify_accepts_the_fixpoint(snap1_2, agree2_2):
    eng = SimulationEngine(snap1_2.model, agree2_2.model)
    for mode in ("K", "D"):
        fix = eng.chain(mode).fixpoint
        report = eng.verify(fix, mode)
        assert report.is_simulation and report.total
        assert report.to_json()["forth_ok"]


def test_mode_validation(snap1_2, agree1_2):
    with pytest.raises(UsageError):
        simulation_chain(snap1_2.model, agree1_2.model, "KD")


def test_dims_validation(snap1_2, agree1_2):
    eng = SimulationEngine(snap1_2.model, agree1_2.model)
    with pytest.raises(UsageError):
        eng.verify(Relation.from_pairs((3, 3), [(0, 0)]), "K")
