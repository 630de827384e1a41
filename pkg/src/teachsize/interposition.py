"""Interposition sets, the size/call ranges that confine them, I-safe witness
augmentation and the interposing-library construction."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np

from .codec import Example, ExampleSet, example_sets
from .config import DEFAULT_CONFIG, Config
from .lang import CALL, EMPTY_LIBRARY, Library, Program, execute, precedes
from .protocol import (
    CapExhausted,
    TeachingBook,
    TeachingBookEntry,
    compile_trie,
    f_compatible,
    k_len,
    learner,
    teacher,
)
from .space import all_inputs, lowest_bit, reference_signature, signature_budget, space_for

ALPHABET = 8
BASE_CHOICES = ALPHABET - 1


@dataclass(frozen=True)
class SCRanges:
    """Admissible (unfolded size, call count) pairs for interposed programs."""

    i_min: int
    i_max: int
    j_bounds: dict = field(default_factory=dict)
    basis: str = "bits"

    @property
    def empty(self) -> bool:
        return not self.j_bounds

    def contains(self, i: int, j: int) -> bool:
        b = self.j_bounds.get(i)
        return b is not None and b[0] <= j <= b[1]

    def to_dict(self) -> dict:
        return {
            "i_min": self.i_min,
            "i_max": self.i_max,
            "i_min_bits": 3 * self.i_min,
            "i_max_bits": 3 * self.i_max,
            "empty": self.empty,
            "j_bounds": {str(i): list(b) for i, b in sorted(self.j_bounds.items())},
        }


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def sc_ranges_single(n_a: int, n_b: int, n_bp: int) -> tuple[SCRanges, int]:
    """Ranges and cardinality bound for a one-primitive library.

    n_a is the primitive's size, n_b the size of the base learner's program
    and n_bp the size of the target's L_B program (all in instructions)."""
    if n_a <= 1:
        raise ValueError("the primitive needs at least two instructions")
    i_min = n_b if n_a < n_b else n_a + 1
    i_max = 1 + (n_bp - 1) * n_a
    bounds = {}
    total = 0
    for i in range(i_min, i_max + 1):
        j_lo = max(0, _ceil_div(i - n_bp, n_a - 1))
        j_hi = i // n_a
        if j_lo > j_hi:
            continue
        bounds[i] = (j_lo, j_hi)
        for j in range(j_lo, j_hi + 1):
            base = i - n_a * j
            total += comb(base + j, j) * BASE_CHOICES ** base
    return SCRanges(i_min, i_max, bounds), total


def multi_bound(library_size: int, ell_target: int) -> int:
    """|B| · Σ_{s=2}^{S} Σ_{t=1}^{s} 7^(s−t) |B|^(t−1) with S the most tokens a program of ``ell_target`` bits can hold."""
    top = ell_target // 3
    b = library_size
    return b * sum(BASE_CHOICES ** (s - t) * b ** (t - 1) for s in range(2, top + 1) for t in range(1, s + 1))


def sc_ranges_multi_sizes(library_size: int, n_min: int, n_max: int, n_c: int, ell_target: int) -> tuple[SCRanges, int]:
    if library_size <= 1:
        raise ValueError("needs a library of at least two primitives")
    call_bits = 3 + (library_size - 1).bit_length()
    d, r = divmod(ell_target, call_bits)
    i_min = n_c if n_min <= n_c else n_min + 1
    i_max = d * n_max + r // 3
    slope = call_bits - 3 * n_max
    bounds = {}
    for i in range(i_min, i_max + 1):
        j_lo = max(1, (ell_target - 3 * i) // slope) if slope < 0 else 1
        j_hi = min(d, i // n_min) if n_min > 0 else d
        if j_lo <= j_hi:
            bounds[i] = (j_lo, j_hi)
    return SCRanges(i_min, i_max, bounds), multi_bound(library_size, ell_target)


def sc_ranges_multi(library: Library, p_c: Program, p_cp: Program) -> tuple[SCRanges, int]:
    sizes = [prim.ninst for prim in library.primitives]
    if len(sizes) <= 1:
        raise ValueError("needs a library of at least two primitives")
    # the ≺-greatest primitive is the longest one, the ≺-least the shortest
    return sc_ranges_multi_sizes(len(sizes), min(sizes), max(sizes), p_c.ninst, p_cp.ell)


def is_interposition_impossible(n_a: int, n_b: int, n_bp: int) -> bool:
    return n_b > 1 + (n_bp - 1) * n_a


@dataclass
class InterpositionReport:
    members: list[Program]
    ranges: SCRanges | None
    bound: int | None
    pruned_fraction: float
    candidates: int
    setting: str

    def to_dict(self) -> dict:
        return {
            "members": [q.text or "ε" for q in self.members],
            "ranges": None if self.ranges is None else self.ranges.to_dict(),
            "bound": self.bound,
            "pruned_fraction": round(self.pruned_fraction, 6),
            "candidates": self.candidates,
            "setting": self.setting,
        }


def pruning_ranges(w: ExampleSet, p: Program, library: Library, config: Config = DEFAULT_CONFIG, compat: int | None = None):
    """Ranges for 𝕀_w(p|B) when the pruning hypotheses can be verified, else (None, None, reason)."""
    size = len(library.primitives)
    if size == 0:
        return None, None, "no library"
    cap = max(config.max_prog_bits, p.ell)
    sp = space_for(library, cap, config)
    if compat is None:
        compat = sp.compatible(w)
    for k in range(size):
        single = sp.index.get(Program((CALL + k,), size))
        if single is None or compat >> single & 1:
            return None, None, "a primitive is compatible with the witness"
    base = space_for(EMPTY_LIBRARY, cap, config)
    kb = base.first_compatible(w)
    if kb is None:
        n_b = cap // 3 + 1
    else:
        p_b = base.programs[kb]
        n_b = p_b.ninst
        if p_b.calls:
            # a base program whose call diverges has no L_B counterpart
            return None, None, "base learner output uses the diverging call"
        if precedes(Program(p_b.tokens, size), p):
            return None, None, "a call-free program precedes the target"
    sizes = [prim.ninst for prim in library.primitives]
    if min(sizes) < 2:
        return None, None, "a primitive has fewer than two instructions"
    if size == 1:
        ranges, bound = sc_ranges_single(sizes[0], n_b, p.ninst)
        return ranges, bound, "single"
    ranges, bound = sc_ranges_multi_sizes(size, min(sizes), max(sizes), n_b, p.ell)
    return ranges, bound, "multi"


def range_mask(sp, ranges: SCRanges) -> int:
    key = ("ranges", tuple(sorted(ranges.j_bounds.items())))
    hit = sp.extras.get(key)
    if hit is not None:
        return hit
    keep = np.zeros(len(sp), bool)
    for i, (lo, hi) in ranges.j_bounds.items():
        keep |= (sp.ninst_unfolded == i) & (sp.calls >= lo) & (sp.calls <= hi)
    bits = int.from_bytes(np.packbits(keep, bitorder="little").tobytes(), "little")
    sp.extras[key] = bits
    return bits


def _members(bits: int, programs) -> list[Program]:
    out = []
    while bits:
        low = bits & -bits
        out.append(programs[low.bit_length() - 1])
        bits ^= low
    return out


def interposition_set(
    w: ExampleSet, p: Program, library: Library | None = None, config: Config = DEFAULT_CONFIG, prune: bool = True
) -> InterpositionReport:
    """All q ≺ p with q ⊨_f w, skipping (size, calls) pairs the ranges rule out."""
    library = library or EMPTY_LIBRARY
    sp = space_for(library, max(config.max_prog_bits, p.ell), config)
    idx = sp.index[p]
    before = (1 << idx) - 1
    full = sp.compatible(w)
    compat = full & before
    ranges, bound, setting = pruning_ranges(w, p, library, config, full) if prune else (None, None, "unpruned")
    if ranges is None:
        return InterpositionReport(_members(compat, sp.programs), None, bound, 0.0, idx, setting)
    allowed = range_mask(sp, ranges) & before
    kept = bin(allowed).count("1")
    pruned = 1.0 - kept / idx if idx else 0.0
    return InterpositionReport(_members(compat & allowed, sp.programs), ranges, bound, pruned, idx, setting)


def first_interposer(w: ExampleSet, p: Program, library: Library, config: Config, compat: int | None = None) -> Program | None:
    """≺-least member of 𝕀_w(p|B), or None."""
    sp = space_for(library, max(config.max_prog_bits, p.ell), config)
    idx = sp.index[p]
    if compat is None:
        compat = sp.compatible(w)
    bits = compat & ((1 << idx) - 1)
    if bits:
        ranges, _, _ = pruning_ranges(w, p, library, config, compat)
        if ranges is not None:
            bits &= range_mask(sp, ranges)
    k = lowest_bit(bits)
    return None if k is None else sp.programs[k]


def _outcome(p: Program, inp: str, config: Config, library: Library) -> str | None:
    lib = EMPTY_LIBRARY if p.library_size == 0 else library
    return execute(p, inp, signature_budget(inp, config), lib).outcome


def _singletons(config: Config):
    """Single-example sets within caps, in ⋖ order."""
    return [s.examples[0] for s in example_sets(config.max_witness_bits, config.input_cap) if len(s) == 1]


def isafe_augment(w: ExampleSet, p_target: Program, library: Library | None = None, config: Config = DEFAULT_CONFIG) -> ExampleSet:
    """Extend ``w`` with distinguishing pairs until no earlier L_B program survives."""
    library = library or EMPTY_LIBRARY
    if not f_compatible(p_target, w, config, library):
        raise ValueError("target program is not compatible with the witness")
    target_sig = reference_signature(p_target, config, library)
    candidates = sorted(
        (Example(i, _outcome(p_target, i, config, library)) for i in all_inputs(config.input_cap)),
        key=lambda e: (len(e.bits), e.bits),
    )
    augmented = w
    for q in interposition_set(w, p_target, library, config).members:
        if not f_compatible(q, augmented, config, library):
            continue
        if reference_signature(q, config, library) == target_sig:
            break
        taken = augmented.as_dict()
        for pair in candidates:
            if pair.input in taken:
                continue
            trial = augmented.union([pair])
            if f_compatible(p_target, trial, config, library) and not f_compatible(q, trial, config, library):
                augmented = trial
                break
        else:
            raise CapExhausted(f"no input within caps separates {q.text} from {p_target.text}")
    final = learner(augmented, config, library, max(config.max_prog_bits, p_target.ell))
    assert final is not None and reference_signature(final, config, library) == target_sig
    assert f_compatible(p_target, augmented, config, library)
    return augmented


@dataclass
class InterposingResult:
    library: Library
    covered: ExampleSet
    fresh: Example
    ts_before: int
    ts_after: int | None  # None: no witness within the caps

    @property
    def interposes(self) -> bool:
        return self.ts_after is None or self.ts_after > self.ts_before


def interposing_library(entry: TeachingBookEntry, config: Config = DEFAULT_CONFIG) -> InterposingResult:
    """A one-trie library that makes the concept of ``entry`` harder to teach."""
    c = entry.program
    if c.ninst < 2:
        raise ValueError("needs a concept whose program has at least two instructions")
    ts = entry.ts_bits
    pairs = {}
    for inp in all_inputs(config.input_cap):
        out = _outcome(c, inp, config, EMPTY_LIBRARY)
        if 3 + len(Example(inp, out).bits) <= ts:
            pairs[inp] = out
    fresh = None
    for e in _singletons(config):
        if e.input not in pairs and e.output != _outcome(c, e.input, config, EMPTY_LIBRARY):
            fresh = e
            break
    if fresh is None:
        raise CapExhausted("no fresh contradicting pair within caps")
    covered = ExampleSet.from_pairs(pairs)
    trie = compile_trie(covered.union([fresh]))
    library = Library((trie,), ("trie",))
    ts_after = teacher(c, config, library)
    result = InterposingResult(library, covered, fresh, ts, None if ts_after is None else ts_after.delta)
    assert result.interposes, "interposing library failed to raise the teaching size"
    return result


@dataclass
class NonmonotonicPair:
    a: int
    b: int
    k_ab: int
    k_ba: int
    ts_ab: int
    ts_ba: int


def nonmonotonicity_scan(book: TeachingBook, config: Config | None = None, limit: int | None = None) -> list[NonmonotonicPair]:
    """Pairs with K(a|b) < K(b|a) but TS(a|b) > TS(b|a), each re-verified."""
    from .conditional import library_from_programs

    config = config or book.config
    entries = list(book.entries[:limit] if limit else book.entries)
    ts: dict[tuple[int, int], int | None] = {}
    kk: dict[tuple[int, int], int | None] = {}

    def measure(a, b):
        lib = library_from_programs([entries[b].program])
        w = teacher(entries[a].program, config, lib)
        return (None if w is None else w.delta), k_len(entries[a].program, config, lib)

    n = len(entries)
    for a in range(n):
        for b in range(n):
            if a != b:
                ts[a, b], kk[a, b] = measure(a, b)
    found = []
    for a in range(n):
        for b in range(n):
            if a == b:
                continue
            vals = (kk[a, b], kk[b, a], ts[a, b], ts[b, a])
            if None in vals:
                continue
            if kk[a, b] < kk[b, a] and ts[a, b] > ts[b, a]:
                # recompute from scratch before reporting
                assert measure(a, b) == (ts[a, b], kk[a, b]) and measure(b, a) == (ts[b, a], kk[b, a])
                found.append(NonmonotonicPair(a, b, kk[a, b], kk[b, a], ts[a, b], ts[b, a]))
    return found
