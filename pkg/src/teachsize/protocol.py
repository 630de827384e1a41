"""Teacher-learner protocol: compatibility, learner, teacher, the teaching
book, hard-coded trie programs and bounded complexity."""

from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .codec import Example, ExampleSet, decode_exact, example_sets
from .config import DEFAULT_CONFIG, ComplexityFunction, Config, TrieBoundParams
from .lang import (
    CLOSE,
    EMPTY_LIBRARY,
    FLIP,
    IN,
    OPEN,
    OUT,
    RIGHT,
    LEFT,
    Library,
    Program,
    execute,
    program_from_bits,
)
from . import space as _space
from .space import example_budget, reference_signature, space_for

__all__ = [
    "ComplexityFunction",
    "TrieBoundParams",
    "TeachingBookEntry",
    "TeachingBook",
    "CapExhausted",
    "lambda_bound",
    "f_compatible",
    "learner",
    "concept_equiv",
    "teacher",
    "teaching_size",
    "build_book",
    "compile_trie",
    "k_len",
    "write_book",
    "read_book",
]


class CapExhausted(RuntimeError):
    """A search ran out of its configured caps before finding an answer."""


def lambda_bound(inp: str, s: ExampleSet, params: TrieBoundParams = TrieBoundParams()) -> int:
    return _space.lambda_bound(inp, s, params.rho, params.kappa)


def f_compatible(p: Program, s: ExampleSet, config: Config = DEFAULT_CONFIG, library: Library | None = None) -> bool:
    """p ⊨_f S, checked by direct interpretation."""
    for e in s.examples:
        res = execute(p, e.input, example_budget(e.input, s, config), library)
        if res.outcome != e.output:
            return False
    return True


def learner(
    s: ExampleSet,
    config: Config = DEFAULT_CONFIG,
    library: Library | None = None,
    max_prog_bits: int | None = None,
) -> Program | None:
    """≺-first f-compatible program within the bit cap, or None."""
    sp = space_for(library, max_prog_bits or config.max_prog_bits, config)
    k = sp.first_compatible(s)
    return None if k is None else sp.programs[k]


def concept_equiv(p: Program, q: Program, config: Config = DEFAULT_CONFIG, library: Library | None = None) -> bool:
    """Same outcome class on every input up to ``h_in`` bits.

    Base programs are run without a library and call-using programs with
    ``library``, so a base program can be compared against an L_B one."""
    lp = EMPTY_LIBRARY if p.library_size == 0 else library
    lq = EMPTY_LIBRARY if q.library_size == 0 else library
    return reference_signature(p, config, lp) == reference_signature(q, config, lq)


def teacher(c_ref: Program, config: Config = DEFAULT_CONFIG, library: Library | None = None) -> ExampleSet | None:
    """⋖-first witness within caps whose learner output is equivalent to ``c_ref``."""
    target = reference_signature(c_ref, config, EMPTY_LIBRARY if c_ref.library_size == 0 else library)
    sp = space_for(library, config.max_prog_bits, config)
    for s in example_sets(config.max_witness_bits, config.input_cap):
        k = sp.first_compatible(s)
        if k is not None and sp.signature(k) == target:
            return s
    return None


def teaching_size(c_ref: Program, config: Config = DEFAULT_CONFIG, library: Library | None = None) -> int | None:
    w = teacher(c_ref, config, library)
    return None if w is None else w.delta


def k_len(c_ref: Program, config: Config = DEFAULT_CONFIG, library: Library | None = None) -> int | None:
    """Bit length of the ≺-first program equivalent to ``c_ref`` within the cap."""
    p = first_equivalent_program(c_ref, config, library)
    return None if p is None else p.ell


def first_equivalent_program(c_ref: Program, config: Config, library: Library | None = None, max_bits: int | None = None) -> Program | None:
    target = reference_signature(c_ref, config, EMPTY_LIBRARY if c_ref.library_size == 0 else library)
    sp = space_for(library, max_bits or config.max_prog_bits, config)
    k = sp.first_with_signature(target)
    return None if k is None else sp.programs[k]


@dataclass(frozen=True)
class TeachingBookEntry:
    program: Program
    witness: ExampleSet

    @property
    def ts_bits(self) -> int:
        return self.witness.delta

    @property
    def k_bits(self) -> int:
        return self.program.ell


@dataclass(frozen=True)
class TeachingBook:
    entries: tuple[TeachingBookEntry, ...]
    config: Config
    library: Library = EMPTY_LIBRARY

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, k: int) -> TeachingBookEntry:
        return self.entries[k]

    def find(self, p: Program) -> int | None:
        """Index of the entry whose concept is equivalent to ``p``."""
        lib = EMPTY_LIBRARY if p.library_size == 0 else self.library
        target = reference_signature(p, self.config, lib)
        for k, e in enumerate(self.entries):
            if reference_signature(e.program, self.config, self.library if e.program.library_size else EMPTY_LIBRARY) == target:
                return k
        return None

    def to_bytes(self) -> bytes:
        return book_bytes(self)


def build_book(
    config: Config = DEFAULT_CONFIG,
    library: Library | None = None,
    threads: int | None = None,
    max_witness_bits: int | None = None,
) -> TeachingBook:
    """Run the protocol over every witness in ⋖ order and keep first occurrences of each concept."""
    library = library or EMPTY_LIBRARY
    threads = threads or config.threads
    sets = example_sets(max_witness_bits or config.max_witness_bits, config.input_cap)
    sp = space_for(library, config.max_prog_bits, config)
    if threads > 1:
        inputs = sorted({e.input for s in sets for e in s.examples}, key=len)
        sp.precompute(inputs, threads=threads)
        chunk = max(1, len(sets) // (threads * 8))
        chunks = [sets[k:k + chunk] for k in range(0, len(sets), chunk)]
        with ThreadPoolExecutor(threads) as pool:
            firsts = [k for part in pool.map(lambda c: [sp.first_compatible(s) for s in c], chunks) for k in part]
    else:
        firsts = (sp.first_compatible(s) for s in sets)
    seen = set()
    entries = []
    # commit strictly in ⋖ order
    for s, k in zip(sets, firsts):
        if k is None:
            continue
        sig = sp.signature(k)
        if sig in seen:
            continue
        seen.add(sig)
        entries.append(TeachingBookEntry(sp.programs[k], s))
    return TeachingBook(tuple(entries), config.semantic(), library)


BOOK_MAGIC = "TSB1"
BOOK_VERSION = 1


def _hex(bits: str) -> str:
    if not bits:
        return "-"
    padded = bits + "0" * (-len(bits) % 4)
    return format(int(padded, 2), f"0{len(padded) // 4}x")


def _unhex(text: str, nbits: int) -> str:
    if text == "-":
        return ""
    return format(int(text, 16), f"0{len(text) * 4}b")[:nbits]


def book_bytes(book: TeachingBook) -> bytes:
    if book.library.primitives:
        raise ValueError("only base-language books are stored")
    cfg = book.config
    lines = [
        BOOK_MAGIC,
        f"version={BOOK_VERSION}",
        "alphabet=><+.,[]@",
        "opcode_bits=3",
        "codec=gamma-count-index-outcode",
    ]
    lines += [f"{k}={'' if v is None else v}" for k, v in cfg.items() if k != "threads"]
    lines.append(f"digest={cfg.digest()}")
    lines.append(f"entries={len(book.entries)}")
    for e in book.entries:
        lines.append(f"{_hex(e.program.bits)} {_hex(e.witness.bits)} {e.ts_bits} {e.k_bits}")
    return ("\n".join(lines) + "\n").encode("ascii")


def write_book(book: TeachingBook, path: str | Path) -> None:
    Path(path).write_bytes(book_bytes(book))


class BookMismatch(ValueError):
    pass


def read_book(path: str | Path, config: Config | None = None) -> TeachingBook:
    """Load a TSB1 file; refuses it when ``config`` has a different digest."""
    lines = Path(path).read_text(encoding="ascii").splitlines()
    if not lines or lines[0] != BOOK_MAGIC:
        raise BookMismatch("not a TSB1 book file")
    header = {}
    pos = 1
    while not lines[pos].startswith("entries="):
        key, value = lines[pos].split("=", 1)
        header[key] = value
        pos += 1
    count = int(lines[pos].split("=", 1)[1])
    if int(header.get("version", -1)) != BOOK_VERSION:
        raise BookMismatch("unsupported book version")
    stored = Config.from_mapping({k: v for k, v in header.items() if k in dict(Config().items())})
    if stored.digest() != header.get("digest"):
        raise BookMismatch("book header does not match its digest")
    if config is not None and config.digest() != stored.digest():
        raise BookMismatch(f"book digest {stored.digest()} differs from config digest {config.digest()}")
    entries = []
    for line in lines[pos + 1:pos + 1 + count]:
        phex, whex, delta, ell = line.split()
        prog = program_from_bits(_unhex(phex, int(ell)))
        wit = decode_exact(_unhex(whex, int(delta)))
        entries.append(TeachingBookEntry(prog, wit))
    if len(entries) != count:
        raise BookMismatch("truncated book file")
    return TeachingBook(tuple(entries), stored)


def book_digest(book: TeachingBook) -> str:
    return hashlib.sha256(book_bytes(book)).hexdigest()


# Trie compilation.
#
# ``,`` delivers the framed stream: a flag 1 before every input bit and a
# flag 0 at the end.  Each trie node reads the flag, then either finishes
# (flag 0) or reads the next bit and descends.  All code runs on fresh zero
# cells to the right of the head and every finished branch leaves the head
# on a zero cell with only zeros to its right, which turns the remaining
# enclosing code into a harmless tail.

_DIVERGE = (FLIP, OPEN, CLOSE)
_IF_ZERO_DIVERGE = (FLIP, OPEN, CLOSE)  # flips first, so loops exactly when the cell was 0
_IF_ONE_DIVERGE = (OPEN, CLOSE)


def _if_else(then_code, else_code):
    """Run then_code if the current cell is 1, else else_code; both start two cells right."""
    return (RIGHT, FLIP, LEFT, OPEN, RIGHT, RIGHT, *then_code, CLOSE, RIGHT, OPEN, RIGHT, *else_code, CLOSE)


def _emit(output: str | None):
    if output is None:
        return _DIVERGE
    code = []
    cell = "0"
    for bit in output:
        if bit != cell:
            code.append(FLIP)
            cell = bit
        code.append(OUT)
    if cell == "1":
        code.append(RIGHT)
    return tuple(code)


_ABSENT = object()


def compile_trie(s: ExampleSet) -> Program:
    """Base program answering every pair of ``s`` and diverging elsewhere."""
    table = s.as_dict()
    if not table:
        return Program(_DIVERGE)
    prefixes = {i[:k] for i in table for k in range(len(i) + 1)}

    def node(prefix: str):
        end = table.get(prefix, _ABSENT)
        more = any(prefix + b in prefixes for b in "01")
        terminal = _DIVERGE if end is _ABSENT else _emit(end)
        if not more:
            return (IN, *_IF_ONE_DIVERGE, *terminal)
        descend = (IN, *branch(prefix))
        if end is _ABSENT:
            return (IN, *_IF_ZERO_DIVERGE, *descend)
        return (IN, *_if_else(descend, terminal))

    def branch(prefix: str):
        zero = prefix + "0" in prefixes
        one = prefix + "1" in prefixes
        if zero and one:
            return _if_else(node(prefix + "1"), node(prefix + "0"))
        if one:
            return (*_IF_ZERO_DIVERGE, *node(prefix + "1"))
        return (*_IF_ONE_DIVERGE, *node(prefix + "0"))

    return Program(node(""))
