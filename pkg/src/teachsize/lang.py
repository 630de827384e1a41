"""The toy bit-tape language TL: programs, ordering, enumeration, unfolding
and a step-counted reference interpreter.

Programs are stored as tuples of integer tokens.  Tokens 0..6 are the base
opcodes ``> < + . , [ ]`` and a token ``7 + k`` is a call to library slot k.
Comparing token tuples therefore gives the same answer as comparing the bit
encodings, because the codewords are prefix-free and order preserving.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, NamedTuple, Sequence

SYMBOLS = "><+.,[]@"
RIGHT, LEFT, FLIP, OUT, IN, OPEN, CLOSE, CALL = range(8)
OPCODE_BITS = 3

_BASE_CHARS = {ch: op for op, ch in enumerate(SYMBOLS[:7])}


def index_bits(library_size: int) -> int:
    if library_size <= 1:
        return 0
    return (library_size - 1).bit_length()


class Instruction(NamedTuple):
    symbol: str
    index: int | None = None


@dataclass(frozen=True)
class LanguageContext:
    library_size: int = 0

    @property
    def index_bits(self) -> int:
        return index_bits(self.library_size)

    @property
    def call_bits(self) -> int:
        return OPCODE_BITS + self.index_bits


BASE = LanguageContext(0)


class InvalidProgram(ValueError):
    pass


def _match_brackets(tokens: Sequence[int]) -> tuple[int, ...]:
    jumps = [-1] * len(tokens)
    stack = []
    for pos, tok in enumerate(tokens):
        if tok == OPEN:
            stack.append(pos)
        elif tok == CLOSE:
            if not stack:
                raise InvalidProgram("unmatched ']'")
            start = stack.pop()
            jumps[start] = pos
            jumps[pos] = start
    if stack:
        raise InvalidProgram("unmatched '['")
    return tuple(jumps)


@dataclass(frozen=True)
class Program:
    tokens: tuple[int, ...]
    library_size: int = 0
    _jumps: tuple[int, ...] = field(default=(), init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        limit = CALL + max(self.library_size, 1)
        for tok in self.tokens:
            if not 0 <= tok < limit:
                raise InvalidProgram(f"call index {tok - CALL} out of range for |B|={self.library_size}")
        object.__setattr__(self, "_jumps", _match_brackets(self.tokens))

    @property
    def context(self) -> LanguageContext:
        return LanguageContext(self.library_size)

    @property
    def jumps(self) -> tuple[int, ...]:
        return self._jumps

    @cached_property
    def calls(self) -> int:
        return sum(1 for t in self.tokens if t >= CALL)

    @property
    def ninst(self) -> int:
        return len(self.tokens)

    @cached_property
    def ell(self) -> int:
        extra = index_bits(self.library_size) * self.calls
        return OPCODE_BITS * len(self.tokens) + extra

    @cached_property
    def bits(self) -> str:
        ib = index_bits(self.library_size)
        parts = []
        for tok in self.tokens:
            if tok >= CALL:
                parts.append("111")
                if ib:
                    parts.append(format(tok - CALL, f"0{ib}b"))
            else:
                parts.append(format(tok, "03b"))
        return "".join(parts)

    @property
    def instructions(self) -> tuple[Instruction, ...]:
        return tuple(
            Instruction("@", t - CALL) if t >= CALL else Instruction(SYMBOLS[t]) for t in self.tokens
        )

    @cached_property
    def text(self) -> str:
        show_index = self.library_size > 1
        out = []
        for tok in self.tokens:
            if tok >= CALL:
                out.append(f"@{tok - CALL}" if show_index else "@")
            else:
                out.append(SYMBOLS[tok])
        return "".join(out)

    def sort_key(self) -> tuple[int, tuple[int, ...]]:
        return (self.ell, self.tokens)

    def __str__(self) -> str:
        return self.text or "ε"


EMPTY_PROGRAM = Program(())


def parse_program(text: str, library_size: int = 0) -> Program:
    """Parse program text; ``@`` takes a decimal index when the library has more than one slot."""
    tokens = []
    pos = 0
    text = "".join(text.split())
    if text == "ε":
        text = ""
    while pos < len(text):
        ch = text[pos]
        pos += 1
        if ch in _BASE_CHARS:
            tokens.append(_BASE_CHARS[ch])
        elif ch == "@":
            digits = ""
            while pos < len(text) and text[pos].isdigit():
                digits += text[pos]
                pos += 1
            if not digits:
                if library_size > 1:
                    raise InvalidProgram("call needs an index when |B| > 1")
                digits = "0"
            tokens.append(CALL + int(digits))
        else:
            raise InvalidProgram(f"unknown symbol {ch!r}")
    return Program(tuple(tokens), library_size)


def program_from_bits(bits: str, library_size: int = 0) -> Program:
    ib = index_bits(library_size)
    tokens = []
    pos = 0
    while pos < len(bits):
        op = int(bits[pos:pos + 3], 2)
        if len(bits[pos:pos + 3]) < 3:
            raise InvalidProgram("truncated bit string")
        pos += 3
        if op == CALL:
            idx = int(bits[pos:pos + ib], 2) if ib else 0
            if len(bits[pos:pos + ib]) < ib:
                raise InvalidProgram("truncated call index")
            pos += ib
            tokens.append(CALL + idx)
        else:
            tokens.append(op)
    return Program(tuple(tokens), library_size)


def _check_same_context(p: Program, q: Program) -> None:
    if p.library_size != q.library_size:
        raise ValueError("programs belong to different language contexts")


def precedes(p: Program, q: Program) -> bool:
    _check_same_context(p, q)
    return p.sort_key() < q.sort_key()


def enumerate_programs(ctx: LanguageContext | int, max_bits: int) -> Iterator[Program]:
    """Yield every valid program with at most ``max_bits`` bits, in ≺ order."""
    size = ctx if isinstance(ctx, int) else ctx.library_size
    call_bits = OPCODE_BITS + index_bits(size)
    alphabet = [(t, OPCODE_BITS) for t in range(7)]
    alphabet += [(CALL + k, call_bits) for k in range(max(size, 1))]

    def walk(target, used, depth, acc):
        if used == target:
            if depth == 0:
                yield Program(tuple(acc), size)
            return
        remaining = target - used
        for tok, cost in alphabet:
            if cost > remaining:
                continue
            d = depth + (tok == OPEN) - (tok == CLOSE)
            if d < 0 or OPCODE_BITS * d > remaining - cost:
                continue
            acc.append(tok)
            yield from walk(target, used + cost, d, acc)
            acc.pop()

    for length in range(max_bits + 1):
        yield from walk(length, 0, 0, [])


@dataclass(frozen=True)
class Library:
    """Ordered primitives, each a call-free base program, plus optional labels."""

    primitives: tuple[Program, ...] = ()
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        prims = tuple(self.primitives)
        object.__setattr__(self, "primitives", prims)
        for prim in prims:
            if prim.library_size != 0 or prim.calls:
                raise ValueError("library primitives must be unfolded base programs")
        labels = tuple(self.labels) or tuple(p.text for p in prims)
        if len(labels) != len(prims):
            raise ValueError("one label per primitive")
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return len(self.primitives)

    @property
    def context(self) -> LanguageContext:
        return LanguageContext(len(self.primitives))

    @property
    def text(self) -> str:
        return "[" + "; ".join(p.text or "ε" for p in self.primitives) + "]"

    def __eq__(self, other):
        return isinstance(other, Library) and self.primitives == other.primitives

    def __hash__(self):
        return hash(self.primitives)


EMPTY_LIBRARY = Library()
# spins on either cell value: `[]` catches a 1, `+[]` catches a 0
DIVERGER = (OPEN, CLOSE, FLIP, OPEN, CLOSE)


def _check_library(p: Program, library: Library | None) -> Library:
    library = library or EMPTY_LIBRARY
    if p.library_size != len(library.primitives):
        raise ValueError(f"program expects |B|={p.library_size}, library has {len(library.primitives)}")
    return library


def unfold(p: Program, library: Library | None = None) -> Program:
    """Replace every call by its primitive's body; with no library a call becomes ``[]+[]``."""
    library = _check_library(p, library)
    out: list[int] = []
    for tok in p.tokens:
        if tok < CALL:
            out.append(tok)
        elif library.primitives:
            out.extend(library.primitives[tok - CALL].tokens)
        else:
            out.extend(DIVERGER)
    return Program(tuple(out), 0)


def frame_input(s: str) -> tuple[int, ...]:
    """Input as read by ``,``: each bit b arrives as the pair 1 b, then a single 0 ends the stream."""
    framed = []
    for ch in s:
        framed += (1, int(ch))
    framed.append(0)
    return tuple(framed)


@dataclass(frozen=True)
class ExecOutcome:
    halted: bool
    output: str | None
    steps_used: int
    calls_executed: int = 0

    @property
    def kind(self) -> str:
        return "Halted" if self.halted else "StillRunning"

    @property
    def outcome(self) -> str | None:
        """Outcome class: the output, or None for ⊥."""
        return self.output if self.halted else None


def execute(p: Program, inp: str, budget: int, library: Library | None = None) -> ExecOutcome:
    library = _check_library(p, library)
    if budget < 0:
        raise ValueError("budget must be non-negative")
    stream = frame_input(inp)
    tape: dict[int, int] = {}
    head = 0
    read = 0
    steps = 0
    calls = 0
    out: list[str] = []
    frames = [[p.tokens, p.jumps, 0]]
    while frames:
        frame = frames[-1]
        code, jumps, pc = frame
        if pc >= len(code):
            frames.pop()
            continue
        tok = code[pc]
        if tok >= CALL:
            if not library.primitives:
                return ExecOutcome(False, None, budget, calls)
            calls += 1
            frame[2] = pc + 1
            body = library.primitives[tok - CALL]
            frames.append([body.tokens, body.jumps, 0])
            continue
        if steps == budget:
            return ExecOutcome(False, None, steps, calls)
        steps += 1
        pc += 1
        if tok == RIGHT:
            head += 1
        elif tok == LEFT:
            head -= 1
        elif tok == FLIP:
            tape[head] = tape.get(head, 0) ^ 1
        elif tok == OUT:
            out.append("1" if tape.get(head, 0) else "0")
        elif tok == IN:
            tape[head] = stream[read] if read < len(stream) else 0
            read += 1
        elif tok == OPEN:
            if not tape.get(head, 0):
                pc = jumps[pc - 1] + 1
        elif tok == CLOSE:
            if tape.get(head, 0):
                pc = jumps[pc - 1] + 1
        frame[2] = pc
    return ExecOutcome(True, "".join(out), steps, calls)
