"""Instruction sequence syntax: parsing, printing, repetition, normalization.

Concrete grammar (whitespace between tokens is ignored)::

    program := instr (';' instr)*
    instr   := basic | '+' basic | '-' basic | '#' nat | '\\' nat | '!t' | '!f'
    basic   := ident '.' ident
    ident   := [a-z][a-z0-9_]*
    nat     := '0' | [1-9][0-9]*

A basic instruction ``f.m`` asks the service named ``f`` to process method
``m``; the Boolean reply steers execution.  ``+f.m`` continues with the next
instruction on a true reply and skips one instruction on a false reply;
``-f.m`` swaps the two roles; plain ``f.m`` always continues with the next
instruction.  ``#l`` and ``\\l`` are relative jumps (``#0``, ``\\0`` and jumps
off either end of the sequence deadlock).  ``!t`` and ``!f`` halt execution,
delivering true respectively false.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Union

IDENT_RE = re.compile(r"[a-z][a-z0-9_]*")
_NAT_RE = re.compile(r"0|[1-9][0-9]*")


class ParseError(ValueError):
    """Raised on malformed program text; carries the failing offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


@dataclass(frozen=True)
class BasicInstruction:
    """A focus.method pair naming one request to a named service."""

    focus: str
    method: str

    def __post_init__(self):
        for part in (self.focus, self.method):
            if not IDENT_RE.fullmatch(part):
                raise ValueError(f"bad identifier {part!r}")

    def __str__(self) -> str:
        return f"{self.focus}.{self.method}"


@dataclass(frozen=True)
class Plain:
    basic: BasicInstruction

    def __str__(self) -> str:
        return str(self.basic)


@dataclass(frozen=True)
class PosTest:
    basic: BasicInstruction

    def __str__(self) -> str:
        return f"+{self.basic}"


@dataclass(frozen=True)
class NegTest:
    basic: BasicInstruction

    def __str__(self) -> str:
        return f"-{self.basic}"


@dataclass(frozen=True)
class FwdJump:
    offset: int

    def __post_init__(self):
        if self.offset < 0:
            raise ValueError("jump offsets are naturals")

    def __str__(self) -> str:
        return f"#{self.offset}"


@dataclass(frozen=True)
class BwdJump:
    offset: int

    def __post_init__(self):
        if self.offset < 0:
            raise ValueError("jump offsets are naturals")

    def __str__(self) -> str:
        return f"\\{self.offset}"


@dataclass(frozen=True)
class HaltP:
    """Halt delivering true (rendered ``!t``)."""

    def __str__(self) -> str:
        return "!t"


@dataclass(frozen=True)
class HaltN:
    """Halt delivering false (rendered ``!f``)."""

    def __str__(self) -> str:
        return "!f"


Instruction = Union[Plain, PosTest, NegTest, FwdJump, BwdJump, HaltP, HaltN]

_INSTRUCTION_TYPES = (Plain, PosTest, NegTest, FwdJump, BwdJump, HaltP, HaltN)


@dataclass(frozen=True)
class Program:
    """A nonempty, immutable sequence of primitive instructions."""

    instructions: tuple[Instruction, ...]

    def __post_init__(self):
        object.__setattr__(self, "instructions", tuple(self.instructions))
        if not self.instructions:
            raise ValueError("a program needs at least one instruction")
        for u in self.instructions:
            if not isinstance(u, _INSTRUCTION_TYPES):
                raise TypeError(f"not an instruction: {u!r}")

    def __len__(self) -> int:
        return len(self.instructions)

    def __iter__(self) -> Iterator[Instruction]:
        return iter(self.instructions)

    def __getitem__(self, index: int) -> Instruction:
        return self.instructions[index]

    def __str__(self) -> str:
        return render_program(self)


def render_program(x: Program) -> str:
    """Inverse of parse_program, up to whitespace."""
    return " ; ".join(str(u) for u in x)


def parse_program(text: str) -> Program:
    """Parse program text; raises ParseError with the failing offset."""
    instrs: list[Instruction] = []
    pos = 0
    n = len(text)

    def skip_ws():
        nonlocal pos
        while pos < n and text[pos].isspace():
            pos += 1

    def parse_nat() -> int:
        nonlocal pos
        m = _NAT_RE.match(text, pos)
        if not m:
            raise ParseError("expected a natural number", pos)
        pos = m.end()
        return int(m.group())

    def parse_ident() -> str:
        nonlocal pos
        m = IDENT_RE.match(text, pos)
        if not m:
            raise ParseError("expected an identifier", pos)
        pos = m.end()
        return m.group()

    def parse_basic() -> BasicInstruction:
        nonlocal pos
        focus = parse_ident()
        if pos >= n or text[pos] != ".":
            raise ParseError("expected '.' in basic instruction", pos)
        pos += 1
        return BasicInstruction(focus, parse_ident())

    def parse_instruction() -> Instruction:
        nonlocal pos
        if pos >= n:
            raise ParseError("expected an instruction", pos)
        ch = text[pos]
        if ch == "!":
            if text.startswith("!t", pos):
                pos += 2
                return HaltP()
            if text.startswith("!f", pos):
                pos += 2
                return HaltN()
            raise ParseError("expected '!t' or '!f'", pos)
        if ch == "#":
            pos += 1
            return FwdJump(parse_nat())
        if ch == "\\":
            pos += 1
            return BwdJump(parse_nat())
        if ch == "+":
            pos += 1
            return PosTest(parse_basic())
        if ch == "-":
            pos += 1
            return NegTest(parse_basic())
        if ch.isalpha() and ch.islower():
            return Plain(parse_basic())
        raise ParseError(f"unexpected character {ch!r}", pos)

    skip_ws()
    if pos == n:
        raise ParseError("empty program", pos)
    while True:
        instrs.append(parse_instruction())
        skip_ws()
        if pos == n:
            break
        if text[pos] != ";":
            raise ParseError("expected ';' or end of input", pos)
        pos += 1
        skip_ws()
        if pos == n:
            raise ParseError("expected an instruction after ';'", pos)
    return Program(tuple(instrs))


def repeat_instruction(u: Instruction, n: int) -> Program:
    """n-fold repetition of a single instruction.

    The zero-fold repetition is the skip ``#1``, so splicing a repetition
    into a larger sequence always consumes exactly max(n, 1) positions.
    """
    if n < 0:
        raise ValueError("repetition count must be a natural")
    if n == 0:
        return Program((FwdJump(1),))
    return Program((u,) * n)


# Targets used while assembling normalized programs: an original position,
# one of the two mandated halts, or "nowhere" (deadlock).
_EXIT_P = "exit_p"
_EXIT_N = "exit_n"
_DEAD = "dead"


def normalize(x: Program) -> Program:
    """Rewrite x so only positive tests and jumps precede a final ``!t ; !f``.

    Each source instruction becomes a small block: a plain basic instruction
    becomes a positive test whose branches converge, a negative test becomes a
    positive test with swapped continuations, halts become jumps to the
    mandated tail.  Control transfers off either end of the source sequence
    stay deadlocks (emitted as ``#0``).  The extracted behaviour of the result
    is bisimilar to that of the input.
    """
    k = len(x)

    def succ(j: int):
        return ("pos", j) if 1 <= j <= k else _DEAD

    blocks: list[list] = []
    for i, u in enumerate(x, start=1):
        if isinstance(u, Plain):
            after = succ(i + 1)
            blocks.append([("test", u.basic), ("goto", after), ("goto", after)])
        elif isinstance(u, PosTest):
            blocks.append([("test", u.basic), ("goto", succ(i + 1)), ("goto", succ(i + 2))])
        elif isinstance(u, NegTest):
            blocks.append([("test", u.basic), ("goto", succ(i + 2)), ("goto", succ(i + 1))])
        elif isinstance(u, FwdJump):
            blocks.append([("goto", succ(i + u.offset) if u.offset else _DEAD)])
        elif isinstance(u, BwdJump):
            blocks.append([("goto", succ(i - u.offset) if u.offset else _DEAD)])
        elif isinstance(u, HaltP):
            blocks.append([("goto", _EXIT_P)])
        else:
            blocks.append([("goto", _EXIT_N)])

    starts = {}
    total = 0
    for i, block in enumerate(blocks, start=1):
        starts[i] = total + 1
        total += len(block)

    def resolve(target) -> int:
        if target == _EXIT_P:
            return total + 1
        if target == _EXIT_N:
            return total + 2
        if target == _DEAD:
            return 0  # placeholder; emitted as a zero-length jump
        return starts[target[1]]

    out: list[Instruction] = []
    pos = 0
    for block in blocks:
        for item in block:
            pos += 1
            if item[0] == "test":
                out.append(PosTest(item[1]))
                continue
            target = resolve(item[1])
            if target == 0 or target == pos:
                out.append(FwdJump(0))
            elif target > pos:
                out.append(FwdJump(target - pos))
            else:
                out.append(BwdJump(pos - target))
    out.append(HaltP())
    out.append(HaltN())
    return Program(tuple(out))


def is_normalized(x: Program) -> bool:
    """True when x has the shape produced by normalize."""
    if len(x) < 2:
        return False
    *body, p, q = x.instructions
    if not isinstance(p, HaltP) or not isinstance(q, HaltN):
        return False
    return all(isinstance(u, (PosTest, FwdJump, BwdJump)) for u in body)
