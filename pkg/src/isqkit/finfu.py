"""Functional units over finite state spaces: closures, comparison, degrees.

Over a k-state space the behaviour of any program against a unit is a table
mapping each state to a (reply, next state) pair or to divergence.  The set
of operations derivable from a unit is the least set of such tables that
contains the two termination behaviours and the everywhere-divergent table
and is closed under one branching step through a generator.  Divergent
tables are kept during the fixpoint (they arise as unreachable branches) and
filtered at the end; only the total tables are method operations.

Two units are equivalent exactly when their closures have the same total
members, so counting distinct closures counts the unit degrees.
"""

from __future__ import annotations

import itertools
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from .funit import FunctionalUnit, MethodOperation, TableRow

# One table row per state: (reply, next state), or None for divergence.
Behavior = tuple[Optional[TableRow], ...]

MAX_ENUMERATED_STATES = 4


def const_true(k: int) -> Behavior:
    return tuple((True, s) for s in range(k))


def const_false(k: int) -> Behavior:
    return tuple((False, s) for s in range(k))


def diverged(k: int) -> Behavior:
    return (None,) * k


def is_total(table: Behavior) -> bool:
    return all(row is not None for row in table)


def compose_behavior(generator: Behavior, on_true: Behavior, on_false: Behavior) -> Behavior:
    """Perform the generator once, then continue per reply."""
    out = []
    for row in generator:
        if row is None:
            out.append(None)
            continue
        flag, nxt = row
        out.append(on_true[nxt] if flag else on_false[nxt])
    return tuple(out)


def _as_table(op: Union[MethodOperation, Behavior, Iterable[TableRow]], k: int) -> Behavior:
    if isinstance(op, MethodOperation):
        return op.tabulate(k)
    table = tuple(op)
    if len(table) != k:
        raise ValueError(f"expected a {k}-state table")
    for row in table:
        if row is None:
            raise ValueError("generators must be total")
        flag, nxt = row
        if not isinstance(flag, bool) or not 0 <= nxt < k:
            raise ValueError(f"bad table row {row!r}")
    return table


def enumerate_mo(k: int, max_states: int = MAX_ENUMERATED_STATES) -> list[MethodOperation]:
    """All (2k)^k method operations over a k-state space, in table order.

    Replies sort false before true and next states ascend, with the last
    state's entry varying fastest.
    """
    if not 1 <= k <= max_states:
        raise ValueError(f"k must be in 1..{max_states}")
    rows = [(flag, s) for flag in (False, True) for s in range(k)]
    ops = []
    for i, assignment in enumerate(itertools.product(rows, repeat=k)):
        ops.append(MethodOperation.from_table(f"m{i}", assignment))
    return ops


@dataclass(frozen=True)
class ClosedSet:
    """The total operations derivable from some generator set."""

    members: frozenset[Behavior]
    k: int

    @property
    def fingerprint(self) -> tuple[Behavior, ...]:
        return tuple(sorted(self.members))

    def __contains__(self, table: Behavior) -> bool:
        return table in self.members

    def __len__(self) -> int:
        return len(self.members)


def _close(generators: Iterable[Behavior], k: int) -> set[Behavior]:
    members: set[Behavior] = {const_true(k), const_false(k), diverged(k)}
    gens = list(generators)
    new = set(members)
    while new:
        fresh: set[Behavior] = set()
        for g in gens:
            for a in members:
                for b in new:
                    c = compose_behavior(g, a, b)
                    if c not in members and c not in fresh:
                        fresh.add(c)
                    c = compose_behavior(g, b, a)
                    if c not in members and c not in fresh:
                        fresh.add(c)
        members |= fresh
        new = fresh
    return members


def derived_closure(ops: Iterable, k: int) -> ClosedSet:
    """The derivable method operations of the unit generated by ``ops``."""
    generators = [_as_table(op, k) for op in ops]
    members = _close(generators, k)
    return ClosedSet(frozenset(t for t in members if is_total(t)), k)


def derivation_witnesses(unit: FunctionalUnit) -> dict[Behavior, "object"]:
    """A witness program for every derivable operation of a finite unit.

    Reruns the closure while recording, for each table, a regular thread
    computing it; the threads are compiled back to programs.  Mainly a
    testing device: it certifies that closure membership and program
    derivability coincide.
    """
    from .threads import LinearSpec, Post, compile_thread, DEADLOCK, TERM_N, TERM_P
    from .isa import BasicInstruction

    if unit.size is None:
        raise ValueError("witnesses are only computed over finite spaces")
    k = unit.size
    named = sorted(unit.ops)
    gen_tables = {name: unit.ops[name].tabulate(k) for name in named}

    # threads are kept as (entries, root) with entries growing append-only
    witness: dict[Behavior, tuple] = {
        const_true(k): (TERM_P,),
        const_false(k): (TERM_N,),
        diverged(k): (DEADLOCK,),
    }

    def merged(action, wt: tuple, wf: tuple) -> tuple:
        offset = 1 + len(wt)
        entries = [Post(action, 1, offset)]
        for e in wt:
            entries.append(_offset_entry(e, 1))
        for e in wf:
            entries.append(_offset_entry(e, offset))
        return tuple(entries)

    def _offset_entry(e, base):
        return Post(e.action, e.true_next + base, e.false_next + base) if isinstance(e, Post) else e

    new = set(witness)
    while new:
        fresh: dict[Behavior, tuple] = {}
        for name in named:
            g = gen_tables[name]
            action = BasicInstruction("f", name)
            for a in list(witness):
                for b in new:
                    for on_true, on_false in ((a, b), (b, a)):
                        c = compose_behavior(g, on_true, on_false)
                        if c in witness or c in fresh:
                            continue
                        fresh[c] = merged(action, witness[on_true], witness[on_false])
        witness.update(fresh)
        new = set(fresh)
    return {
        table: compile_thread(LinearSpec(entries, 0))
        for table, entries in witness.items()
        if is_total(table)
    }


@dataclass(frozen=True)
class ClosureBudget:
    """Exploration limits for degree counting on larger spaces."""

    max_sets: int | None = None
    max_seconds: float | None = None


@dataclass(frozen=True)
class DegreeCount:
    count: int
    exact: bool
    sets: tuple[ClosedSet, ...] = field(repr=False, default=())


def count_degrees(k: int, budget: ClosureBudget = ClosureBudget()) -> DegreeCount:
    """Count the distinct derivable-operation closures over a k-state space.

    Breadth-first over generator additions: starting from the closure of the
    empty unit, each closed set is extended by every operation not already in
    it and the results are deduplicated by fingerprint.  Adding one generator
    at a time reaches every closure because closing a closed set plus a
    generator equals closing the underlying generators together.
    """
    all_tables = [op.table for op in enumerate_mo(k)]
    start = derived_closure((), k)
    seen: dict[tuple, ClosedSet] = {start.fingerprint: start}
    queue: deque[ClosedSet] = deque([start])
    t0 = time.monotonic()

    def out_of_budget() -> bool:
        if budget.max_seconds is not None and time.monotonic() - t0 > budget.max_seconds:
            return True
        return budget.max_sets is not None and len(seen) >= budget.max_sets

    exact = True
    while queue and exact:
        current = queue.popleft()
        for table in all_tables:
            if out_of_budget():
                exact = False
                break
            if table in current.members:
                continue
            extended = derived_closure(current.members | {table}, k)
            fp = extended.fingerprint
            if fp not in seen:
                seen[fp] = extended
                queue.append(extended)
    return DegreeCount(len(seen), exact, tuple(seen.values()))


def leq_by_closure(left: FunctionalUnit, right: FunctionalUnit) -> bool:
    """True iff every operation of ``left`` is derivable from ``right``."""
    if left.size is None or right.size is None:
        raise ValueError("comparison by closure needs finite state spaces")
    if left.size != right.size:
        raise ValueError("units must share a state space")
    closure = derived_closure(right.ops.values(), right.size)
    return all(op.tabulate(left.size) in closure.members for op in left.ops.values())


def equivalent_by_closure(left: FunctionalUnit, right: FunctionalUnit) -> bool:
    return leq_by_closure(left, right) and leq_by_closure(right, left)


def minimal_generators(closed: ClosedSet, max_combos: int = 200_000) -> tuple[Behavior, ...]:
    """A smallest generator subset reproducing the closed set.

    Searches subsets in ascending size; past ``max_combos`` candidate
    subsets it falls back to a greedy (small but not necessarily minimal)
    generating set.
    """
    candidates = sorted(closed.members)
    checked = 0
    for size in range(0, len(candidates) + 1):
        for combo in itertools.combinations(candidates, size):
            checked += 1
            if checked > max_combos:
                return _greedy_generators(closed, candidates)
            if derived_closure(combo, closed.k).members == closed.members:
                return combo
    return tuple(candidates)


def _greedy_generators(closed: ClosedSet, candidates: list[Behavior]) -> tuple[Behavior, ...]:
    chosen: list[Behavior] = []
    have = derived_closure((), closed.k).members
    for table in candidates:
        if table in have:
            continue
        chosen.append(table)
        have = derived_closure(chosen, closed.k).members
        if have == closed.members:
            break
    return tuple(chosen)


def render_behavior(table: Behavior) -> str:
    """Compact text form: per state, T/F plus next state, or '-' when divergent."""
    parts = []
    for row in table:
        if row is None:
            parts.append("-")
        else:
            flag, nxt = row
            parts.append(f"{'T' if flag else 'F'}{nxt}")
    return ",".join(parts)
