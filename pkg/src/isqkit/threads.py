"""Regular threads as finite systems of linear recursion equations.

A thread is the behaviour an instruction sequence exhibits under execution:
at every step it either deadlocks, terminates delivering a Boolean, or
performs an action and branches on the reply.  Regular threads have finitely
many states and are represented here by ``LinearSpec``: a table of entries
indexed by state id, plus a root id.

``extract`` maps a program to its thread, resolving jump chains eagerly (a
cycle consisting solely of jumps is a deadlock).  ``project`` cuts a thread
off after a given number of actions, yielding a finite tree.  ``bisimilar``
decides behavioural equality of tau-free specs, and ``compile_thread`` maps
any tau-free spec back to a program with bisimilar extraction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .isa import (
    BasicInstruction,
    BwdJump,
    FwdJump,
    HaltN,
    HaltP,
    NegTest,
    Plain,
    PosTest,
    Program,
)


@dataclass(frozen=True)
class Tau:
    """The internal action; always replied to with true."""

    def __str__(self) -> str:
        return "tau"


TAU = Tau()

Action = Union[BasicInstruction, Tau]


@dataclass(frozen=True)
class Deadlock:
    def __str__(self) -> str:
        return "D"


@dataclass(frozen=True)
class TermP:
    """Termination delivering true."""

    def __str__(self) -> str:
        return "S+"


@dataclass(frozen=True)
class TermN:
    """Termination delivering false."""

    def __str__(self) -> str:
        return "S-"


@dataclass(frozen=True)
class Post:
    """Perform the action, continue at true_next or false_next by reply."""

    action: Action
    true_next: int
    false_next: int


Entry = Union[Deadlock, TermP, TermN, Post]

DEADLOCK = Deadlock()
TERM_P = TermP()
TERM_N = TermN()


@dataclass(frozen=True)
class Branch:
    """Internal node of a finite thread tree."""

    action: Action
    true_branch: "FiniteThread"
    false_branch: "FiniteThread"


FiniteThread = Union[Deadlock, TermP, TermN, Branch]


@dataclass(frozen=True)
class LinearSpec:
    """A regular thread: entries indexed by state id, with a root state."""

    entries: tuple[Entry, ...]
    root: int = 0

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        n = len(self.entries)
        if n == 0:
            raise ValueError("a linear spec needs at least one state")
        if not 0 <= self.root < n:
            raise ValueError(f"root {self.root} out of range")
        for e in self.entries:
            if isinstance(e, Post):
                for ref in (e.true_next, e.false_next):
                    if not 0 <= ref < n:
                        raise ValueError(f"state reference {ref} out of range")
            elif not isinstance(e, (Deadlock, TermP, TermN)):
                raise TypeError(f"not a thread entry: {e!r}")

    def __len__(self) -> int:
        return len(self.entries)


def contains_tau(s: LinearSpec) -> bool:
    return any(isinstance(e, Post) and isinstance(e.action, Tau) for e in s.entries)


def _require_tau_free(s: LinearSpec, operation: str):
    if contains_tau(s):
        raise ValueError(f"{operation} is only defined for tau-free threads")


def extract(x: Program) -> LinearSpec:
    """Thread extraction: one state per reachable non-jump position.

    Jump aliases are resolved away eagerly; a control transfer off either end
    of the sequence, a zero-length jump, and any cycle consisting solely of
    jump instructions all become a deadlock state.
    """
    k = len(x)
    cache: dict[int, int | None] = {}

    def resolve(i: int) -> int | None:
        seen: list[int] = []
        cur = i
        result: int | None
        while True:
            if cur in cache:
                result = cache[cur]
                break
            if not 1 <= cur <= k:
                result = None
                break
            instr = x[cur - 1]
            if isinstance(instr, FwdJump):
                nxt = cur + instr.offset
            elif isinstance(instr, BwdJump):
                nxt = max(0, cur - instr.offset)
            else:
                result = cur
                break
            if cur in seen:
                result = None  # jumps forever
                break
            seen.append(cur)
            cur = nxt
        for p in seen:
            cache[p] = result
        cache[i] = result
        return result

    entries: list[Entry | None] = []
    index: dict[int | None, int] = {}
    order: list[int | None] = []

    def state_id(target: int | None) -> int:
        if target not in index:
            index[target] = len(order)
            order.append(target)
            entries.append(None)
        return index[target]

    root = state_id(resolve(1))
    sid = 0
    while sid < len(order):
        target = order[sid]
        if target is None:
            entries[sid] = DEADLOCK
        else:
            instr = x[target - 1]
            if isinstance(instr, HaltP):
                entries[sid] = TERM_P
            elif isinstance(instr, HaltN):
                entries[sid] = TERM_N
            elif isinstance(instr, Plain):
                nid = state_id(resolve(target + 1))
                entries[sid] = Post(instr.basic, nid, nid)
            elif isinstance(instr, PosTest):
                entries[sid] = Post(
                    instr.basic, state_id(resolve(target + 1)), state_id(resolve(target + 2))
                )
            elif isinstance(instr, NegTest):
                entries[sid] = Post(
                    instr.basic, state_id(resolve(target + 2)), state_id(resolve(target + 1))
                )
            else:  # jumps never survive resolve
                raise AssertionError("unresolved jump")
        sid += 1
    return LinearSpec(tuple(entries), root)


def project(s: LinearSpec, n: int) -> FiniteThread:
    """Approximation of the thread up to depth n (cut points become deadlock)."""
    if n < 0:
        raise ValueError("projection depth must be a natural")
    memo: dict[tuple[int, int], FiniteThread] = {}

    def go(state: int, depth: int) -> FiniteThread:
        key = (state, depth)
        hit = memo.get(key)
        if hit is not None:
            return hit
        entry = s.entries[state]
        if depth == 0:
            result: FiniteThread = DEADLOCK
        elif isinstance(entry, Post):
            result = Branch(
                entry.action, go(entry.true_next, depth - 1), go(entry.false_next, depth - 1)
            )
        else:
            result = entry
        memo[key] = result
        return result

    return go(s.root, n)


def truncate(s: LinearSpec, n: int) -> LinearSpec:
    """The depth-n approximation of s, itself as a linear spec."""
    if n < 0:
        raise ValueError("projection depth must be a natural")
    index: dict[tuple[int, int], int] = {}
    order: list[tuple[int, int]] = []

    def state_id(state: int, depth: int) -> int:
        key = (state, depth)
        if key not in index:
            index[key] = len(order)
            order.append(key)
        return index[key]

    root = state_id(s.root, n)
    entries: list[Entry] = []
    sid = 0
    while sid < len(order):
        state, depth = order[sid]
        entry = s.entries[state]
        if depth == 0:
            entries.append(DEADLOCK)
        elif isinstance(entry, Post):
            entries.append(
                Post(
                    entry.action,
                    state_id(entry.true_next, depth - 1),
                    state_id(entry.false_next, depth - 1),
                )
            )
        else:
            entries.append(entry)
        sid += 1
    return LinearSpec(tuple(entries), root)


def tau_contract(t: FiniteThread) -> FiniteThread:
    """Rewrite every tau branching to follow its true branch on both replies."""
    memo: dict[FiniteThread, FiniteThread] = {}

    def go(node: FiniteThread) -> FiniteThread:
        hit = memo.get(node)
        if hit is not None:
            return hit
        if isinstance(node, Branch):
            if isinstance(node.action, Tau):
                tb = go(node.true_branch)
                result: FiniteThread = Branch(TAU, tb, tb)
            else:
                result = Branch(node.action, go(node.true_branch), go(node.false_branch))
        else:
            result = node
        memo[node] = result
        return result

    return go(t)


def _label(entry: Entry):
    if isinstance(entry, Post):
        return ("post", entry.action)
    return type(entry).__name__


def bisimilar(a: LinearSpec, b: LinearSpec) -> bool:
    """Decide rooted bisimilarity of two tau-free linear specs."""
    _require_tau_free(a, "bisimilar")
    _require_tau_free(b, "bisimilar")
    na = len(a.entries)
    total = na + len(b.entries)
    parent = list(range(total))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def node(i: int) -> Entry:
        return a.entries[i] if i < na else b.entries[i - na]

    def successors(i: int, entry: Post) -> tuple[int, int]:
        base = 0 if i < na else na
        return entry.true_next + base, entry.false_next + base

    stack = [(a.root, b.root + na)]
    while stack:
        p, q = stack.pop()
        rp, rq = find(p), find(q)
        if rp == rq:
            continue
        ep, eq = node(p), node(q)
        if _label(ep) != _label(eq):
            return False
        parent[rp] = rq
        if isinstance(ep, Post):
            pt, pf = successors(p, ep)
            qt, qf = successors(q, eq)
            stack.append((pt, qt))
            stack.append((pf, qf))
    return True


def minimize(s: LinearSpec) -> LinearSpec:
    """Collapse bisimilar states by partition refinement; root block first."""
    n = len(s.entries)
    labels = [_label(e) for e in s.entries]
    block: dict = {}
    part = [block.setdefault(lab, len(block)) for lab in labels]
    while True:
        signatures = []
        for i, e in enumerate(s.entries):
            if isinstance(e, Post):
                signatures.append((part[i], part[e.true_next], part[e.false_next]))
            else:
                signatures.append((part[i],))
        block = {}
        new_part = [block.setdefault(sig, len(block)) for sig in signatures]
        if len(block) == len(set(part)):
            part = new_part
            break
        part = new_part

    # renumber blocks in traversal order from the root, keeping only
    # the reachable ones
    index: dict[int, int] = {}
    order: list[int] = []  # representative state per block

    def block_id(state: int) -> int:
        b = part[state]
        if b not in index:
            index[b] = len(order)
            order.append(state)
        return index[b]

    root = block_id(s.root)
    entries: list[Entry] = []
    sid = 0
    while sid < len(order):
        entry = s.entries[order[sid]]
        if isinstance(entry, Post):
            entries.append(
                Post(entry.action, block_id(entry.true_next), block_id(entry.false_next))
            )
        else:
            entries.append(entry)
        sid += 1
    return LinearSpec(tuple(entries), root)


def compile_thread(s: LinearSpec) -> Program:
    """A program whose extraction is bisimilar to s.

    Every branching state becomes a three-instruction block (positive test
    plus jumps to the two target blocks); terminations become halts and
    deadlock becomes ``#0``.
    """
    _require_tau_free(s, "compile_thread")

    index: dict[int, int] = {}
    order: list[int] = []

    def visit(state: int) -> int:
        if state not in index:
            index[state] = len(order)
            order.append(state)
        return index[state]

    visit(s.root)
    sid = 0
    while sid < len(order):
        entry = s.entries[order[sid]]
        if isinstance(entry, Post):
            visit(entry.true_next)
            visit(entry.false_next)
        sid += 1

    starts: dict[int, int] = {}
    total = 0
    for state in order:
        starts[state] = total + 1
        total += 3 if isinstance(s.entries[state], Post) else 1

    def jump_to(pos: int, target: int):
        if target > pos:
            return FwdJump(target - pos)
        return BwdJump(pos - target)

    out: list = []
    pos = 0
    for state in order:
        entry = s.entries[state]
        pos += 1
        if isinstance(entry, TermP):
            out.append(HaltP())
        elif isinstance(entry, TermN):
            out.append(HaltN())
        elif isinstance(entry, Deadlock):
            out.append(FwdJump(0))
        else:
            out.append(PosTest(entry.action))
            out.append(jump_to(pos + 1, starts[entry.true_next]))
            out.append(jump_to(pos + 2, starts[entry.false_next]))
            pos += 2
    return Program(tuple(out))


def dump(s: LinearSpec) -> str:
    """One line per state: ``<id>: D | S+ | S- | <action> ? <t> : <f>``."""
    lines = []
    for i, e in enumerate(s.entries):
        mark = "*" if i == s.root else " "
        if isinstance(e, Post):
            body = f"{e.action} ? {e.true_next} : {e.false_next}"
        else:
            body = str(e)
        lines.append(f"{mark} {i}: {body}")
    return "\n".join(lines)


def parse_dump(text: str) -> LinearSpec:
    """Inverse of dump; accepts states in any order."""
    import re

    line_re = re.compile(r"^\s*(\*?)\s*(\d+):\s*(.+?)\s*$")
    post_re = re.compile(r"^(\S+)\s*\?\s*(\d+)\s*:\s*(\d+)$")
    entries: dict[int, Entry] = {}
    root = None
    for raw in text.splitlines():
        if not raw.strip():
            continue
        m = line_re.match(raw)
        if not m:
            raise ValueError(f"bad spec line: {raw!r}")
        starred, sid, body = m.group(1), int(m.group(2)), m.group(3)
        if starred:
            if root is not None:
                raise ValueError("multiple root markers")
            root = sid
        if body == "D":
            entries[sid] = DEADLOCK
        elif body == "S+":
            entries[sid] = TERM_P
        elif body == "S-":
            entries[sid] = TERM_N
        else:
            pm = post_re.match(body)
            if not pm:
                raise ValueError(f"bad entry: {body!r}")
            name = pm.group(1)
            if name == "tau":
                action: Action = TAU
            else:
                focus, _, method = name.partition(".")
                if not _:
                    raise ValueError(f"bad action: {name!r}")
                action = BasicInstruction(focus, method)
            entries[sid] = Post(action, int(pm.group(2)), int(pm.group(3)))
    if not entries:
        raise ValueError("empty spec")
    if sorted(entries) != list(range(len(entries))):
        raise ValueError("state ids must be 0..n-1")
    if root is None:
        raise ValueError("no root marker")
    return LinearSpec(tuple(entries[i] for i in range(len(entries))), root)
