"""Running threads against service families.

``run`` steps a regular thread through a service family and reports one of
three outcomes:

* ``COMPLETED``: the thread terminated; the reply is its Boolean and the
  family is the final service family.
* ``PROVEN_DIVERGENT``: the thread can never terminate (deadlock state,
  missing focus, rejected method, or a repeated configuration).  The reply
  is divergent and the family is empty.
* ``BUDGET_EXHAUSTED``: the step budget ran out before either of the above
  could be established.

The distinction between the last two matters: over infinite state spaces
divergence is undecidable, so "proven divergent" and "unknown" must not be
conflated.  Cycle detection hashes the exact (thread state, family)
configuration and is exact whenever the visited configuration space is
finite.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Any, Hashable

from .isa import BasicInstruction
from .services import EMPTY_FAMILY, Reply, ServiceFamily, service_step
from .threads import Deadlock, LinearSpec, Post, Tau, TermN, TermP

if TYPE_CHECKING:  # pragma: no cover
    from .funit import FunctionalUnit


class Status(Enum):
    COMPLETED = "completed"
    PROVEN_DIVERGENT = "proven-divergent"
    BUDGET_EXHAUSTED = "budget-exhausted"


class BudgetExhausted(RuntimeError):
    """Raised by operations whose result type has no room for "unknown"."""


@dataclass(frozen=True)
class ExecMode:
    """Execution limits: a step budget and/or exact cycle detection.

    The budget counts thread transitions (internal steps included).  At least
    one of the two mechanisms must be enabled, otherwise a run could hang.
    """

    budget: int | None = 1_000_000
    detect_cycles: bool = True

    def __post_init__(self):
        if self.budget is None and not self.detect_cycles:
            raise ValueError("enable a budget, cycle detection, or both")
        if self.budget is not None and self.budget < 0:
            raise ValueError("budget must be a natural")


DEFAULT_MODE = ExecMode()


@dataclass(frozen=True)
class TraceStep:
    """One processed basic action: thread state, action, reply, new state."""

    state: int
    action: BasicInstruction
    reply: Reply
    service_state: Hashable


@dataclass(frozen=True)
class ExecOutcome:
    status: Status
    reply: Reply
    family: ServiceFamily
    steps: int
    trace: tuple[TraceStep, ...] | None = None


def run(
    thread: LinearSpec,
    family: ServiceFamily,
    mode: ExecMode = DEFAULT_MODE,
    collect_trace: bool = False,
) -> ExecOutcome:
    """Execute a regular thread against a service family.

    The input family is never mutated; every processed method yields a new
    family with the focus concerned updated.
    """
    entries = thread.entries
    cur = thread.root
    steps = 0
    trace: list[TraceStep] | None = [] if collect_trace else None
    visited: set[tuple[int, ServiceFamily]] | None = set() if mode.detect_cycles else None

    def finish(status: Status, reply: Reply, fam: ServiceFamily) -> ExecOutcome:
        return ExecOutcome(
            status, reply, fam, steps, tuple(trace) if trace is not None else None
        )

    while True:
        entry = entries[cur]
        if isinstance(entry, TermP):
            return finish(Status.COMPLETED, Reply.T, family)
        if isinstance(entry, TermN):
            return finish(Status.COMPLETED, Reply.F, family)
        if isinstance(entry, Deadlock):
            return finish(Status.PROVEN_DIVERGENT, Reply.D, EMPTY_FAMILY)
        assert isinstance(entry, Post)
        if visited is not None:
            config = (cur, family)
            if config in visited:
                return finish(Status.PROVEN_DIVERGENT, Reply.D, EMPTY_FAMILY)
            visited.add(config)
        if mode.budget is not None and steps >= mode.budget:
            return finish(Status.BUDGET_EXHAUSTED, Reply.D, EMPTY_FAMILY)
        action = entry.action
        if isinstance(action, Tau):
            cur = entry.true_next
            steps += 1
            continue
        svc = family.get(action.focus)
        if svc is None:
            return finish(Status.PROVEN_DIVERGENT, Reply.D, EMPTY_FAMILY)
        reply, nxt = service_step(svc, action.method)
        if reply is Reply.D:
            return finish(Status.PROVEN_DIVERGENT, Reply.D, EMPTY_FAMILY)
        family = family.updated(action.focus, nxt)
        if trace is not None:
            trace.append(TraceStep(cur, action, reply, nxt.state))
        cur = entry.true_next if reply is Reply.T else entry.false_next
        steps += 1


@dataclass(frozen=True)
class Reachable:
    """States reachable through a unit's effects, with a completeness flag."""

    states: frozenset
    complete: bool


def reachable_states(unit: "FunctionalUnit", start: Any, bound: int) -> Reachable:
    """Close the start state under the effect parts of the unit's operations.

    At most ``bound`` distinct states are collected; the result is flagged
    complete only if the closure was fully explored within the bound.  Every
    operation a program can derive from the unit maps the start state into
    this set, which is what makes the flagged-complete case a sound
    refutation device.
    """
    if bound < 1:
        raise ValueError("bound must be positive")
    states = {start}
    frontier = [start]
    complete = True
    while frontier and complete:
        s = frontier.pop()
        for op in unit.ops.values():
            nxt = op(s)[1]
            if nxt in states:
                continue
            if len(states) >= bound:
                complete = False
                break
            states.add(nxt)
            frontier.append(nxt)
    return Reachable(frozenset(states), complete)
