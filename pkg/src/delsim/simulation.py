"""Simulations between simplicial models, as bitmatrix fixpoints.

A relation R between the facets of two models is a K-simulation when related
facets carry equal labels and every ``a``-indistinguishability step on the
left can be matched on the right (Forth); a D-simulation strengthens Forth to
all facets Y at once, requiring the matched pair to share at least the colors
that X and Y share. The maximum n-step simulations arise as a descending
chain: S_0 relates label-equal facets, each refinement step keeps the pairs
whose Forth obligations are met inside the previous step.

Two structural facts drive the implementation. In D mode, a facet Y sharing no
vertex with X only demands that R relate Y to *something*, so a non-total R
refines to the empty relation and, for total R, only facet-adjacent Y
constrain a pair; moreover taking Y = X forces the matched facet to be X'
itself, so each D refinement only shrinks. Both modes then reduce to boolean
matrix products ("which right facets have an R-successor matching this
obligation?") plus a per-row gather, which numpy handles at the scales used
here; a definition-chasing scan is kept alongside for cross-checking.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Literal, Sequence

import numpy as np

from .errors import InternalConsistencyError, UsageError

Mode = Literal["K", "D"]


def _check_mode(mode: str) -> Mode:
    if mode not in ("K", "D"):
        raise UsageError(f"mode must be 'K' or 'D', got {mode!r}")
    return mode  # type: ignore[return-value]


class Relation:
    """An immutable boolean matrix over facet-index pairs (left x right)."""

    __slots__ = ("bits",)

    def __init__(self, bits: np.ndarray):
        bits = np.asarray(bits, dtype=bool)
        if bits.ndim != 2:
            raise UsageError("relation must be a 2-d boolean matrix")
        bits = bits.copy()
        bits.setflags(write=False)
        self.bits = bits

    @classmethod
    def from_pairs(cls, dims: tuple[int, int], pairs: Iterable[Sequence[int]]) -> "Relation":
        bits = np.zeros(dims, dtype=bool)
        for i, j in pairs:
            if not (0 <= i < dims[0] and 0 <= j < dims[1]):
                raise UsageError(f"pair ({i}, {j}) outside dims {dims}")
            bits[i, j] = True
        return cls(bits)

    @property
    def dims(self) -> tuple[int, int]:
        return self.bits.shape  # type: ignore[return-value]

    @property
    def count(self) -> int:
        return int(self.bits.sum())

    def contains(self, i: int, j: int) -> bool:
        return bool(self.bits[i, j])

    def pairs(self) -> list[tuple[int, int]]:
        """All related pairs in lexicographic order."""
        return [(int(i), int(j)) for i, j in np.argwhere(self.bits)]

    def row(self, i: int) -> np.ndarray:
        return self.bits[i]

    def is_total(self) -> bool:
        return bool(self.bits.any(axis=1).all())

    def __eq__(self, other):
        return (isinstance(other, Relation)
                and self.dims == other.dims
                and bool(np.array_equal(self.bits, other.bits)))

    def __hash__(self):
        return hash((self.dims, self.bits.tobytes()))

    def __le__(self, other: "Relation") -> bool:
        return self.dims == other.dims and not bool((self.bits & ~other.bits).any())

    def __repr__(self):
        return f"<Relation {self.dims[0]}x{self.dims[1]}, {self.count} pairs>"


def totality_witnesses(r: Relation) -> list[int]:
    """Left facets with no related right facet (empty = total relation)."""
    return [int(i) for i in np.flatnonzero(~r.bits.any(axis=1))]


@dataclass
class SimulationChain:
    """The descending chain S_0, S_1, ..., ending at its fixpoint."""

    mode: Mode
    steps: list[Relation]

    @property
    def fixpoint(self) -> Relation:
        return self.steps[-1]

    @property
    def stabilized_at(self) -> int:
        return len(self.steps) - 1


@dataclass
class VerificationReport:
    atom_ok: bool
    forth_ok: bool
    total: bool
    counterexamples: list[dict] = field(default_factory=list)

    @property
    def is_simulation(self) -> bool:
        return self.atom_ok and self.forth_ok

    def to_json(self) -> dict:
        return {"atom_ok": self.atom_ok, "forth_ok": self.forth_ok,
                "total": self.total, "counterexamples": self.counterexamples}


class SimulationEngine:
    """Refinement machinery for one (left, right) model pair.

    Precomputes the label-equality base relation, per-facet Forth obligations
    on the left, and per-obligation successor matrices on the right.
    """

    def __init__(self, left, right):
        if left.workspace != right.workspace:
            raise UsageError("left and right models use different workspaces")
        self.left = left
        self.right = right
        nl, nr = left.n_facets, right.n_facets

        labels: dict[frozenset, list[int]] = {}
        for j, lab in enumerate(right.facet_labels):
            labels.setdefault(lab, []).append(j)
        s0 = np.zeros((nl, nr), dtype=bool)
        for i, lab in enumerate(left.facet_labels):
            for j in labels.get(lab, ()):
                s0[i, j] = True
        s0.setflags(write=False)
        self._s0 = s0

        n_agents = left.workspace.n_agents
        full = frozenset(range(n_agents))
        # K obligations: for each agent, each indistinguishable Y (self incl.)
        k_cons: list[tuple[np.ndarray, np.ndarray]] = []
        # D obligations: each facet-adjacent Y with its shared colors, plus
        # (X, full); color-disjoint Y reduce to the totality precheck.
        group_ids: dict[frozenset, int] = {full: 0}
        d_cons: list[tuple[np.ndarray, np.ndarray]] = []
        for i in range(nl):
            row = left.neighbors(i)
            ks_a, ks_y = [], []
            for a in range(n_agents):
                ks_a.append(a)
                ks_y.append(i)
                for j, colors in row:
                    if a in colors:
                        ks_a.append(a)
                        ks_y.append(j)
            k_cons.append((np.array(ks_a, dtype=np.intp), np.array(ks_y, dtype=np.intp)))
            ds_g, ds_y = [0], [i]
            for j, colors in row:
                gid = group_ids.setdefault(colors, len(group_ids))
                ds_g.append(gid)
                ds_y.append(j)
            d_cons.append((np.array(ds_g, dtype=np.intp), np.array(ds_y, dtype=np.intp)))
        self._k_constraints = k_cons
        self._d_constraints = d_cons
        self._groups = sorted(group_ids, key=group_ids.get)

        self._right_agent: np.ndarray | None = None   # [agents, nr, nr] float32
        self._right_group: np.ndarray | None = None   # [groups, nr, nr] float32

    # -- right-side successor structure -------------------------------------

    def _right_agent_mats(self) -> np.ndarray:
        if self._right_agent is None:
            n_agents = self.left.workspace.n_agents
            self._right_agent = np.stack(
                [self.right.agent_adjacency_f32(a) for a in range(n_agents)])
        return self._right_agent

    def _right_group_mats(self) -> np.ndarray:
        if self._right_group is None:
            nr = self.right.n_facets
            mats = np.zeros((len(self._groups), nr, nr), dtype=np.float32)
            idx = np.arange(nr)
            mats[:, idx, idx] = 1.0
            for i in range(nr):
                for j, shared in self.right.neighbors(i):
                    for g, colors in enumerate(self._groups):
                        if colors <= shared:
                            mats[g, i, j] = 1.0
            self._right_group = mats
        return self._right_group

    # -- core steps ----------------------------------------------------------

    def initial_relation(self) -> Relation:
        return Relation(self._s0)

    def forth(self, r: Relation, mode: Mode) -> np.ndarray:
        """The Forth operator applied to ``r``, evaluated at every pair."""
        _check_mode(mode)
        self._check_dims(r)
        nl, nr = r.dims
        rt = r.bits.T.astype(np.float32)
        out = np.zeros((nl, nr), dtype=bool)
        if mode == "K":
            ok = (self._right_agent_mats() @ rt) > 0.5
            cons = self._k_constraints
        else:
            if not r.is_total():
                return out
            ok = (self._right_group_mats() @ rt) > 0.5
            cons = self._d_constraints
        for i in range(nl):
            sel, ys = cons[i]
            out[i] = ok[sel, :, ys].all(axis=0)
        return out

    def forth_naive(self, r: Relation, mode: Mode) -> np.ndarray:
        """Definition-chasing reference for ``forth`` (small models only)."""
        _check_mode(mode)
        self._check_dims(r)
        nl, nr = r.dims
        out = np.zeros((nl, nr), dtype=bool)
        for i in range(nl):
            for j in range(nr):
                out[i, j] = self._forth_holds_naive(r, i, j, mode) is None
        return out

    def _forth_holds_naive(self, r: Relation, i: int, j: int, mode: Mode):
        """None if the Forth condition holds at (i, j); else a violation dict."""
        if mode == "K":
            n_agents = self.left.workspace.n_agents
            for a in range(n_agents):
                ys = [i] + [y for y, colors in self.left.neighbors(i) if a in colors]
                for y in ys:
                    ok = any(r.contains(y, yy)
                             and a in self.right.shared_colors(j, yy)
                             for yy in range(self.right.n_facets))
                    if not ok:
                        return {"kind": "forth", "left": i, "right": j,
                                "agent": a, "witness": y}
            return None
        for y in range(self.left.n_facets):
            colors = self.left.shared_colors(i, y)
            ok = any(r.contains(y, yy)
                     and colors <= self.right.shared_colors(j, yy)
                     for yy in range(self.right.n_facets))
            if not ok:
                return {"kind": "forth", "left": i, "right": j, "witness": y}
        return None

    def refine(self, r: Relation, mode: Mode) -> Relation:
        """One chain step: S_0 ∩ Forth(r) in K mode, Forth(r) in D mode."""
        mode = _check_mode(mode)
        fo = self.forth(r, mode)
        if mode == "K":
            fo &= self._s0
        return Relation(fo)

    def chain(self, mode: Mode) -> SimulationChain:
        mode = _check_mode(mode)
        steps = [self.initial_relation()]
        while True:
            nxt = self.refine(steps[-1], mode)
            if not nxt <= steps[-1]:
                raise InternalConsistencyError(
                    "refinement added pairs; the chain must descend")
            if nxt == steps[-1]:
                return SimulationChain(mode, steps)
            steps.append(nxt)

    def verify(self, r: Relation, mode: Mode, max_counterexamples: int = 10) -> VerificationReport:
        """Check the simulation conditions for an arbitrary relation."""
        mode = _check_mode(mode)
        self._check_dims(r)
        atom_bad = r.bits & ~self._s0
        forth_bad = r.bits & ~self.forth(r, mode)
        examples: list[dict] = []
        for i, j in np.argwhere(atom_bad)[:max_counterexamples]:
            examples.append({"kind": "atom", "left": int(i), "right": int(j)})
        room = max_counterexamples - len(examples)
        for i, j in np.argwhere(forth_bad)[:max(room, 0)]:
            examples.append(self._forth_holds_naive(r, int(i), int(j), mode))
        return VerificationReport(
            atom_ok=not bool(atom_bad.any()),
            forth_ok=not bool(forth_bad.any()),
            total=r.is_total(),
            counterexamples=examples,
        )

    def _check_dims(self, r: Relation) -> None:
        want = (self.left.n_facets, self.right.n_facets)
        if r.dims != want:
            raise UsageError(f"relation dims {r.dims} do not match models {want}")


# ---------------------------------------------------------------------------
# Functional wrappers

def initial_relation(left, right) -> Relation:
    return SimulationEngine(left, right).initial_relation()


def refine(left, right, r: Relation, mode: Mode) -> Relation:
    return SimulationEngine(left, right).refine(r, mode)


def simulation_chain(left, right, mode: Mode) -> SimulationChain:
    return SimulationEngine(left, right).chain(mode)


def max_simulation(left, right, mode: Mode) -> tuple[Relation, int]:
    """The maximum simulation and the step at which the chain stabilized."""
    chain = simulation_chain(left, right, mode)
    return chain.fixpoint, chain.stabilized_at


def verify_simulation(left, right, r: Relation, mode: Mode,
                      max_counterexamples: int = 10) -> VerificationReport:
    return SimulationEngine(left, right).verify(r, mode, max_counterexamples)
