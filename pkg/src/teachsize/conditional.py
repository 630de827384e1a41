"""Libraries built from a teaching book, and conditional teaching size and
complexity in the extended language."""

from __future__ import annotations

from typing import Sequence, Union

from .config import DEFAULT_CONFIG, Config
from .lang import EMPTY_LIBRARY, Library, Program, parse_program, unfold
from .protocol import TeachingBook, first_equivalent_program, k_len, teacher
from .space import reference_signature

__all__ = [
    "Library",
    "ConceptNotInBook",
    "make_library",
    "library_from_programs",
    "cond_teaching_size",
    "cond_teacher",
    "first_equivalent",
    "cond_k_len",
    "resolve_concept",
]

ConceptRef = Union[int, Program, str]


class ConceptNotInBook(LookupError):
    pass


def resolve_concept(book: TeachingBook, ref: ConceptRef) -> int:
    """Book index for an entry index, a program, or program text."""
    if isinstance(ref, int):
        if not 0 <= ref < len(book.entries):
            raise ConceptNotInBook(f"no book entry {ref}")
        return ref
    if isinstance(ref, str):
        ref = parse_program(ref)
    k = book.find(ref)
    if k is None:
        raise ConceptNotInBook(f"concept of {ref} is not in the book")
    return k


def library_from_programs(programs: Sequence[Program], labels: Sequence[str] = ()) -> Library:
    return Library(tuple(unfold(p) for p in programs), tuple(labels))


def make_library(book: TeachingBook, concepts: Sequence[ConceptRef]) -> Library:
    """The book programs of ``concepts``, in the given order, unfolded."""
    idx = [resolve_concept(book, c) for c in concepts]
    if not idx:
        return EMPTY_LIBRARY
    return library_from_programs([book.entries[k].program for k in idx], [f"c{k}" for k in idx])


def _target(c_ref: ConceptRef, book: TeachingBook | None) -> Program:
    if isinstance(c_ref, int):
        return book.entries[c_ref].program
    if isinstance(c_ref, str):
        return parse_program(c_ref)
    return c_ref


def cond_teacher(c_ref: ConceptRef, given: Sequence[ConceptRef], book: TeachingBook, config: Config | None = None):
    config = config or book.config
    return teacher(_target(c_ref, book), config, make_library(book, given))


def cond_teaching_size(
    c_ref: ConceptRef, given: Sequence[ConceptRef], book: TeachingBook, config: Config | None = None
) -> int | None:
    w = cond_teacher(c_ref, given, book, config)
    return None if w is None else w.delta


def first_equivalent(p: Program, library: Library | None = None, config: Config = DEFAULT_CONFIG) -> Program:
    """≺-first program of L_B equivalent to the base program ``p``.

    The search cap is widened to ℓ of the unfolded ``p``, which is itself a
    valid L_B program, so an answer always exists."""
    library = library or EMPTY_LIBRARY
    base = unfold(p)
    cap = max(config.max_prog_bits, base.ell)
    found = first_equivalent_program(p, config, library, cap)
    if found is None:
        return Program(base.tokens, len(library))
    return found


def cond_k_len(c_ref: ConceptRef, given: Sequence[ConceptRef], book: TeachingBook, config: Config | None = None) -> int | None:
    config = config or book.config
    return k_len(_target(c_ref, book), config, make_library(book, given))


def same_concept(p: Program, q: Program, config: Config, library: Library | None = None) -> bool:
    lp = EMPTY_LIBRARY if p.library_size == 0 else library
    lq = EMPTY_LIBRARY if q.library_size == 0 else library
    return reference_signature(p, config, lp) == reference_signature(q, config, lq)
