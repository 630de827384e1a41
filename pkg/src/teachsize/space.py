"""Precomputed behaviour of every program up to a bit cap.

A :class:`ProgramSpace` runs all programs of one language context on an input
in a single batch and caches the result as a column.  Learner queries then
reduce to AND-ing Python integer bitsets, one bit per program in ≺ order.
"""

from __future__ import annotations

import threading
from functools import lru_cache

import numpy as np

from .codec import ExampleSet, index_string
from .config import Config
from .lang import CALL, EMPTY_LIBRARY, Library, Program, enumerate_programs, execute, frame_input
from ._machine import CodeBatch, key_output, output_key


def all_inputs(max_len: int) -> tuple[str, ...]:
    return tuple(index_string(n) for n in range((1 << (max_len + 1)) - 1))


def lambda_bound(inp: str, s: ExampleSet, rho: int, kappa: int) -> int:
    if not s.examples:
        return kappa
    longest_in = max(len(e.input) for e in s.examples)
    longest_out = max((len(e.output) for e in s.examples if e.output is not None), default=0)
    return rho * min(len(inp), longest_in) + longest_out + kappa


def example_budget(inp: str, s: ExampleSet, config: Config) -> int:
    return max(config.f(len(inp)), lambda_bound(inp, s, config.rho, config.kappa))


def signature_budget(inp: str, config: Config) -> int:
    return max(config.f(len(inp)), config.kappa)


_long_codes: dict[str, int] = {}
_long_lock = threading.Lock()


def class_code(outcome: str | None) -> int:
    """Integer code of an outcome class: 0 for ⊥, the output key, or an interned negative id."""
    if outcome is None:
        return 0
    key = output_key(outcome)
    if key >= 0:
        return key
    with _long_lock:
        return _long_codes.setdefault(outcome, -2 - len(_long_codes))


def _bitset(mask: np.ndarray) -> int:
    return int.from_bytes(np.packbits(mask, bitorder="little").tobytes(), "little")


def lowest_bit(bits: int) -> int | None:
    if not bits:
        return None
    return (bits & -bits).bit_length() - 1


class ProgramSpace:
    def __init__(self, library: Library, max_bits: int, config: Config):
        self.library = library
        self.max_bits = max_bits
        self.config = config
        self.programs: list[Program] = list(enumerate_programs(len(library), max_bits))
        self.index = {p: k for k, p in enumerate(self.programs)}
        if library.primitives:
            bodies = [prim.tokens for prim in library.primitives]
            code = []
            for p in self.programs:
                toks: list[int] = []
                for t in p.tokens:
                    toks.extend(bodies[t - CALL] if t >= CALL else (t,))
                code.append(toks)
        else:
            code = [p.tokens for p in self.programs]
        self.ninst_unfolded = np.array([len(c) for c in code], np.int64)
        self.calls = np.array([p.calls for p in self.programs], np.int64)
        self.batch = CodeBatch(code)
        self.all_bits = (1 << len(self.programs)) - 1
        self._columns: dict[str, tuple] = {}
        self._masks: dict[tuple, int] = {}
        self._signatures: list[bytes] | None = None
        self._first_by_signature: dict[bytes, int] | None = None
        self._lock = threading.Lock()
        # derived bitsets cached by other modules
        self.extras: dict = {}

    def __len__(self) -> int:
        return len(self.programs)

    def _default_budget(self, inp: str) -> int:
        return signature_budget(inp, self.config)

    def column(self, inp: str, budget: int | None = None):
        """Steps, output keys and overlong outputs of every program on ``inp``."""
        need = self._default_budget(inp) if budget is None else budget
        col = self._columns.get(inp)
        if col is not None and col[0] >= need:
            return col
        run_budget = max(need, self._default_budget(inp))

        steps, keys = self.batch.run(frame_input(inp), run_budget)
        longs = {}
        for k in np.flatnonzero((steps >= 0) & (keys == -1)):
            res = execute(self.programs[k], inp, run_budget, self.library)
            longs[int(k)] = res.output
        col = (run_budget, steps, keys, longs)
        with self._lock:
            old = self._columns.get(inp)
            if old is None or old[0] < run_budget:
                self._columns[inp] = col
        return col

    def outcome_mask(self, inp: str, out: str | None, budget: int) -> int:
        key = (inp, out, budget)
        hit = self._masks.get(key)
        if hit is not None:
            return hit
        _, steps, keys, longs = self.column(inp, budget)
        halted = (steps >= 0) & (steps <= budget)
        if out is None:
            mask = ~halted
        else:
            code = output_key(out)
            if code >= 0:
                mask = halted & (keys == code)
            else:
                mask = halted & (keys == -1)
                for k in np.flatnonzero(mask):
                    if longs[int(k)] != out:
                        mask[k] = False
        bits = _bitset(mask)
        self._masks[key] = bits
        return bits

    def compatible(self, s: ExampleSet) -> int:
        """Bitset of programs f-compatible with ``s``."""
        bits = self.all_bits
        for e in s.examples:
            bits &= self.outcome_mask(e.input, e.output, example_budget(e.input, s, self.config))
            if not bits:
                break
        return bits

    def first_compatible(self, s: ExampleSet) -> int | None:
        return lowest_bit(self.compatible(s))

    def outcome(self, k: int, inp: str, budget: int) -> str | None:
        _, steps, keys, longs = self.column(inp, budget)
        st = int(steps[k])
        if st < 0 or st > budget:
            return None
        key = int(keys[k])
        return longs[k] if key == -1 else key_output(key)

    def _build_signatures(self) -> None:
        rows = []
        for inp in all_inputs(self.config.h_in):
            budget = signature_budget(inp, self.config)
            _, steps, keys, longs = self.column(inp, budget)
            halted = (steps >= 0) & (steps <= budget)
            row = np.where(halted, keys, 0)
            for k in np.flatnonzero(halted & (keys == -1)):
                row[k] = class_code(longs[int(k)])
            rows.append(row)
        matrix = np.ascontiguousarray(np.array(rows, np.int64).T)
        sigs = [row.tobytes() for row in matrix]
        first: dict[bytes, int] = {}
        for k, sig in enumerate(sigs):
            first.setdefault(sig, k)
        self._signatures = sigs
        self._first_by_signature = first

    def signature(self, k: int) -> bytes:
        if self._signatures is None:
            self._build_signatures()
        return self._signatures[k]

    def first_with_signature(self, sig: bytes) -> int | None:
        if self._first_by_signature is None:
            self._build_signatures()
        return self._first_by_signature.get(sig)

    def precompute(self, inputs, budget_of=None, threads: int = 1) -> None:
        inputs = list(inputs)
        budgets = [budget_of(i) if budget_of else None for i in inputs]
        if threads <= 1:
            for inp, b in zip(inputs, budgets):
                self.column(inp, b)
            return
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(threads) as pool:
            list(pool.map(self.column, inputs, budgets))


@lru_cache(maxsize=128)
def _space(library: Library, max_bits: int, config: Config) -> ProgramSpace:
    return ProgramSpace(library, max_bits, config)


def space_for(library: Library | None, max_bits: int, config: Config) -> ProgramSpace:
    return _space(library or EMPTY_LIBRARY, max_bits, config.semantic())


@lru_cache(maxsize=100_000)
def _reference_signature(p: Program, library: Library, config: Config) -> bytes:
    codes = [class_code(execute(p, inp, signature_budget(inp, config), library).outcome) for inp in all_inputs(config.h_in)]
    return np.array(codes, np.int64).tobytes()


def reference_signature(p: Program, config: Config, library: Library | None = None) -> bytes:
    """Outcome class of ``p`` on every input up to the equivalence horizon, by direct interpretation."""
    if library is None:
        library = EMPTY_LIBRARY if p.library_size == 0 else None
        if library is None:
            raise ValueError("program uses calls but no library was given")
    return _reference_signature(p, library, config.semantic())
