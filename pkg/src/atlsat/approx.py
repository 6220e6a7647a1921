"""Partial models and two-sided approximation of satisfaction sets.

A :class:`PartialModel` leaves protocol and valuation cells three-valued:
determined-true, determined-false, or undefined.  From it, total structures
are built by resolving undefined cells pessimistically (*necessary*: undef
excluded) or optimistically (*possible*: undef included).

:func:`sapp` computes, for a core formula, a state set guaranteed to contain
(mode ``OVER``) or be contained in (mode ``UNDER``) the exact satisfaction
set of every total model compatible with the partial model.  Negation swaps
the mode of the subformula; strategic operators evaluate on a structure
whose optimism is split by coalition membership:

* ``OVER``: coalition agents get possible protocols, all others necessary
  ones, and the valuation is possible — extra coalition options and fewer
  adversary options can only grow the result;
* ``UNDER``: coalition agents get necessary protocols, all others possible
  ones, and the valuation is necessary — the exact dual.

The under split is what makes the lower bound sound: giving the adversary
anything less than its full possible protocol would let a state pass here
and still fail in some compatible completion where the adversary uses an
undetermined action.
"""

from __future__ import annotations

from enum import Enum
from typing import Callable, Sequence

from .formula import And, Formula, Globally, Next, Not, Prop, Until
from .mas import Assignment, Model, ModelShape, TransitionStructure
from .mc import StateSet, solve_globally, solve_next, solve_until

Cell = int | None


class Mode(Enum):
    OVER = "over"
    UNDER = "under"

    def flipped(self) -> "Mode":
        return Mode.UNDER if self is Mode.OVER else Mode.OVER


class PartialModel:
    """Shape plus three-valued protocol tables and valuation table.

    Rejects protocol rows that are determined false everywhere; such a row
    admits no compatible model.
    """

    def __init__(
        self,
        shape: ModelShape,
        cp: Sequence[Sequence[Sequence[Cell]]],
        cv: Sequence[Sequence[Cell]],
    ):
        self.shape = shape
        self.cp = tuple(tuple(tuple(row) for row in agent) for agent in cp)
        self.cv = tuple(tuple(row) for row in cv)
        if len(self.cp) != shape.agent_count:
            raise ValueError("one partial protocol per agent required")
        for i, table in enumerate(self.cp):
            n = shape.locals_per_agent[i]
            if len(table) != n or any(len(row) != n for row in table):
                raise ValueError(f"partial protocol of agent {i} must be {n}x{n}")
            for k, row in enumerate(table):
                if any(c not in (0, 1, None) for c in row):
                    raise ValueError("protocol cells must be 0, 1 or None")
                if all(c == 0 for c in row):
                    raise ValueError(
                        f"agent {i}, local state {k}: row determined empty, "
                        "no compatible model exists"
                    )
        if len(self.cv) != shape.state_count or any(
            len(row) != shape.prop_count for row in self.cv
        ):
            raise ValueError("partial valuation must be |St| x prop_count")
        for row in self.cv:
            if any(c not in (0, 1, None) for c in row):
                raise ValueError("valuation cells must be 0, 1 or None")

    @classmethod
    def unconstrained(cls, shape: ModelShape) -> "PartialModel":
        cp = tuple(
            tuple((None,) * n for _ in range(n)) for n in shape.locals_per_agent
        )
        cv = tuple((None,) * shape.prop_count for _ in range(shape.state_count))
        return cls(shape, cp, cv)

    @classmethod
    def from_assignment(cls, a: Assignment) -> "PartialModel":
        shape = a.shape
        cp = []
        for i, n in enumerate(shape.locals_per_agent):
            off = shape.tb_offsets[i]
            cp.append(
                tuple(
                    tuple(a.bits[off + k * n + j] for j in range(n)) for k in range(n)
                )
            )
        off = shape.vb_offset
        cv = tuple(
            tuple(a.bits[off + s * shape.prop_count + v] for v in range(shape.prop_count))
            for s in range(shape.state_count)
        )
        return cls(shape, tuple(cp), cv)

    def to_assignment(self) -> Assignment:
        bits: list[Cell] = []
        for table in self.cp:
            for row in table:
                bits.extend(row)
        for row in self.cv:
            bits.extend(row)
        return Assignment(self.shape, tuple(bits))

    def with_cell(self, index: int, value: Cell) -> "PartialModel":
        """A refined copy with one cell set (used by tests and diagnostics)."""
        a = self.to_assignment()
        bits = list(a.bits)
        bits[index] = value
        return PartialModel.from_assignment(Assignment(self.shape, tuple(bits)))

    def _protocol_rows(self, agent: int, optimistic: bool) -> tuple[tuple[int, ...], ...]:
        if optimistic:
            return tuple(
                tuple(j for j, c in enumerate(row) if c != 0) for row in self.cp[agent]
            )
        return tuple(
            tuple(j for j, c in enumerate(row) if c == 1) for row in self.cp[agent]
        )

    def _valuation_masks(self, optimistic: bool) -> tuple[int, ...]:
        masks = [0] * self.shape.prop_count
        for s, row in enumerate(self.cv):
            for v, c in enumerate(row):
                if c == 1 or (optimistic and c is None):
                    masks[v] |= 1 << s
        return tuple(masks)


def build_under_model(pm: PartialModel) -> TransitionStructure:
    """The all-necessary structure: only determined-true protocol cells and
    valuation cells.  Rows may come out empty, so the result is flagged:
    strategic operators evaluate false at successor-less states."""
    enabled = tuple(
        pm._protocol_rows(i, optimistic=False) for i in range(pm.shape.agent_count)
    )
    return TransitionStructure(
        pm.shape, enabled, pm._valuation_masks(optimistic=False), strategic_false_at_dead=True
    )


def build_over_model(pm: PartialModel, coalition) -> TransitionStructure:
    """Coalition agents get possible protocols, the rest necessary ones; the
    valuation is possible.  Coalition rows are nonempty by the partial-model
    invariant."""
    members = set(coalition)
    enabled = tuple(
        pm._protocol_rows(i, optimistic=i in members)
        for i in range(pm.shape.agent_count)
    )
    return TransitionStructure(pm.shape, enabled, pm._valuation_masks(optimistic=True))


def _split_structure(pm: PartialModel, coalition, mode: Mode) -> TransitionStructure:
    # The structure a strategic operator evaluates on.  OVER equals
    # build_over_model; UNDER is its coalition dual (necessary inside the
    # coalition, possible outside, necessary valuation), left unflagged:
    # empty coalition rows already yield no choice in the pre-image, and a
    # goal state with no successors still under-approximates soundly since
    # every compatible total model is serial.
    members = set(coalition)
    optimistic_inside = mode is Mode.OVER
    enabled = tuple(
        pm._protocol_rows(i, optimistic=(i in members) == optimistic_inside)
        for i in range(pm.shape.agent_count)
    )
    return TransitionStructure(pm.shape, enabled, pm._valuation_masks(optimistic_inside))


def is_compatible(m: Model, pm: PartialModel) -> bool:
    """Whether every determined cell of the partial model agrees with the
    model; undefined cells are unconstrained."""
    if m.shape != pm.shape:
        raise ValueError("model and partial model have different shapes")
    for table, ctable in zip(m.protocols, pm.cp):
        for row, crow in zip(table, ctable):
            for have, want in zip(row, crow):
                if want is not None and int(have) != want:
                    return False
    for row, crow in zip(m.valuation, pm.cv):
        for have, want in zip(row, crow):
            if want is not None and int(have) != want:
                return False
    return True


def sapp(
    pm: PartialModel,
    f: Formula,
    mode: Mode,
    _trace: Callable[[Formula, Mode], None] | None = None,
) -> StateSet:
    """Approximate the satisfaction set of a core formula across all models
    compatible with the partial model: a superset in mode ``OVER``, a subset
    in mode ``UNDER``.  The two coincide with the exact set once the partial
    model is fully determined."""
    full = (1 << pm.shape.state_count) - 1
    structures: dict[tuple[Mode, tuple[int, ...]], TransitionStructure] = {}
    valuations = {
        Mode.OVER: pm._valuation_masks(optimistic=True),
        Mode.UNDER: pm._valuation_masks(optimistic=False),
    }

    def structure(coalition, md: Mode) -> TransitionStructure:
        key = (md, coalition.members)
        s = structures.get(key)
        if s is None:
            s = structures[key] = _split_structure(pm, coalition.members, md)
        return s

    def rec(node: Formula, md: Mode) -> StateSet:
        if _trace is not None:
            _trace(node, md)
        if isinstance(node, Prop):
            if node.index >= pm.shape.prop_count:
                raise IndexError(
                    f"p{node.index} out of range ({pm.shape.prop_count} propositions)"
                )
            return valuations[md][node.index]
        if isinstance(node, Not):
            return full & ~rec(node.child, md.flipped())
        if isinstance(node, And):
            return rec(node.left, md) & rec(node.right, md)
        if isinstance(node, (Next, Globally, Until)):
            coal = node.coalition
            if len(coal) and coal.members[-1] >= pm.shape.agent_count:
                raise IndexError(
                    f"agent {coal.members[-1]} out of range "
                    f"({pm.shape.agent_count} agents)"
                )
            st = structure(coal, md)
            if isinstance(node, Next):
                return solve_next(st, coal.members, rec(node.child, md))
            if isinstance(node, Globally):
                return solve_globally(st, coal.members, rec(node.child, md))
            return solve_until(
                st, coal.members, rec(node.left, md), rec(node.right, md)
            )
        raise ValueError(f"formula is not core-normalized: {node!r}")

    return rec(f, mode)
