"""Teaching size, interposition and curriculum search for a small bit-tape language."""

from .codec import Example, ExampleSet, encode_example_set, enumerate_example_sets, string_index, witness_precedes
from .config import ComplexityFunction, Config, TrieBoundParams
from .lang import ExecOutcome, Library, Program, enumerate_programs, execute, parse_program, precedes, unfold
from .protocol import (
    CapExhausted,
    TeachingBook,
    TeachingBookEntry,
    build_book,
    compile_trie,
    concept_equiv,
    f_compatible,
    k_len,
    lambda_bound,
    learner,
    teacher,
)

__version__ = "0.1.0"
