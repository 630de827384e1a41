"""Acceptance suite: one test per criterion, summarised at the end of the run."""

import random

import pytest

from instances import brute_interposers, random_instances
from oracles import naive_compatible, naive_encode, naive_learner, naive_programs
from teachsize import codec, space
from teachsize.codec import Example, ExampleSet, decode_exact, example_sets
from teachsize.conditional import first_equivalent, library_from_programs
from teachsize.config import DEFAULT_CONFIG
from teachsize.curriculum import (
    Evaluator,
    brute_force_optimum,
    curriculum_count,
    curriculum_ts,
    enumerate_curricula,
    i_search,
    pairwise_prune,
)
from teachsize.interposition import (
    CapExhausted,
    interposing_library,
    interposition_set,
    is_interposition_impossible,
    isafe_augment,
    pruning_ranges,
)
from teachsize.lang import EMPTY_LIBRARY, Library, Program, enumerate_programs, execute, parse_program, unfold
from teachsize.protocol import book_bytes, build_book, f_compatible, k_len, learner, teacher
from teachsize.space import reference_signature

SMALL = DEFAULT_CONFIG.with_(max_prog_bits=12)
QSETS = [[16, 25], [23, 24, 33], [16, 25, 23], [23, 33, 16]]


def fresh_caches():
    codec._all_sets.cache_clear()
    space._space.cache_clear()
    space._reference_signature.cache_clear()


def equivalent(p: Program, q: Program, config, lib) -> bool:
    lp = lib if p.library_size else EMPTY_LIBRARY
    lq = lib if q.library_size else EMPTY_LIBRARY
    return reference_signature(p, config, lp) == reference_signature(q, config, lq)


@pytest.mark.criterion(1, "learner equals brute-force first compatible program")
def test_learner_minimality(metric):
    sets = list(example_sets(16, SMALL.input_cap))
    chosen = sets[:: max(1, len(sets) // 200)][:200]
    assert len(chosen) == 200
    progs = naive_programs(0, SMALL.max_prog_bits)
    found = 0
    for s in chosen:
        expect = naive_learner(s.as_dict(), programs=progs)
        assert learner(s, SMALL) == expect, s.text
        found += expect is not None
    metric(f"200 sets, {found} learnable within 12 bits")


@pytest.mark.criterion(2, "teaching book soundness over witnesses up to 20 bits")
def test_book_soundness(small_book, metric):
    cfg = small_book.config
    progs = naive_programs(0, cfg.max_prog_bits)
    for e in small_book.entries:
        assert naive_learner(e.witness.as_dict(), programs=progs) == e.program
        assert f_compatible(e.program, e.witness, cfg)
    # replay the protocol with the reference interpreter deciding equivalence
    seen = []
    book_sigs = {}
    for s in example_sets(20, cfg.input_cap):
        p = learner(s, cfg)
        if p is None:
            continue
        sig = reference_signature(p, cfg)
        if sig not in book_sigs:
            book_sigs[sig] = s
            seen.append((p, s))
    assert [(e.program, e.witness) for e in small_book.entries] == seen
    metric(f"{len(seen)} entries")


@pytest.mark.criterion(3, "witness/program bijection with stable constants")
def test_bijection_constants(metric):
    def run():
        fresh_caches()
        book = build_book(DEFAULT_CONFIG)
        sigs = {reference_signature(e.program, book.config) for e in book.entries}
        assert len({e.program for e in book.entries}) == len(book) == len({e.witness for e in book.entries}) == len(sigs)
        ks = [k_len(e.program, book.config) for e in book.entries]
        assert None not in ks
        up = max(k - e.ts_bits for k, e in zip(ks, book.entries))
        down = max(e.ts_bits - k for k, e in zip(ks, book.entries))
        return book_bytes(book), up, down

    first, second = run(), run()
    assert first == second
    metric(f"max(K-TS)={first[1]}, max(TS-K)={first[2]}")


@pytest.mark.criterion(4, "K(c) <= TS(c) + k_M with one book-wide constant")
def test_complexity_bound(book, metric):
    ks = [k_len(e.program, book.config) for e in book.entries]
    k_m = max(k - e.ts_bits for k, e in zip(ks, book.entries))
    for k, e in zip(ks, book.entries):
        assert k <= e.ts_bits + k_m
        assert k <= e.program.ell
    metric(f"k_M={k_m} over {len(book)} concepts")


@pytest.mark.criterion(5, "interposing library raises the teaching size")
def test_interposing_library(book, metric):
    cfg = book.config
    shown = []
    for k, e in enumerate(book.entries):
        if len(shown) >= 5:
            break
        if e.program.ninst < 2:
            continue
        try:
            res = interposing_library(e, cfg)
        except CapExhausted:
            continue
        lib = res.library
        # independent check: the naive learner now returns a program outside [c]
        prims = (lib.primitives[0].tokens,)
        q = naive_learner(e.witness.as_dict(), 1, 6, prims)
        assert q is not None and not equivalent(q, e.program, cfg, lib)
        after = teacher(e.program, cfg, lib)
        assert after is None or after.delta > e.ts_bits
        shown.append(f"c{k}:{e.ts_bits}->{'>' + str(cfg.max_witness_bits) if after is None else after.delta}")
    assert len(shown) >= 3
    metric(", ".join(shown))


@pytest.mark.criterion(6, "s/c ranges contain every interposer and pruning is exact")
def test_range_soundness(book, metric):
    rng = random.Random(2024)
    with_ranges = 0
    members = 0
    total = 0
    while with_ranges < 24:
        for w, p, lib in random_instances(book, SMALL, rng, 10):
            total += 1
            brute = brute_interposers(w, p, lib)
            pruned = interposition_set(w, p, lib, SMALL)
            assert pruned.members == brute
            assert interposition_set(w, p, lib, SMALL, prune=False).members == brute
            if pruned.ranges is None:
                continue
            with_ranges += 1
            members += len(brute)
            for q in brute:
                assert pruned.ranges.contains(unfold(q, lib).ninst, q.calls)
            assert len(brute) <= pruned.bound
    assert members > 0
    metric(f"{total} instances, {with_ranges} with ranges, {members} interposers checked")


@pytest.mark.criterion(7, "size-impossible triples have no interposers, including (4,8,2)")
def test_impossible_interposition(metric):
    p_a = parse_program("+.>.")
    lib = library_from_programs([p_a])
    w = ExampleSet.from_pairs({"": "1010"})
    target = parse_program("@@", 1)
    assert not f_compatible(p_a, w) and f_compatible(target, w, DEFAULT_CONFIG, lib)
    # n_b = 8 exactly: nothing within 7 instructions, and p_a·p_a itself fits
    assert learner(w, DEFAULT_CONFIG, None, 21) is None
    assert f_compatible(unfold(target, lib), w)
    assert is_interposition_impossible(4, 8, 2)
    assert brute_interposers(w, target, lib) == []
    assert interposition_set(w, target, lib).members == []

    # every p_a up to 12 bits, witness taken from p_a·p_a on short inputs
    tested = 1
    for p_a in enumerate_programs(0, 12):
        if p_a.ninst < 2 or p_a.calls:
            continue
        doubled = Program(p_a.tokens * 2)
        pairs = {}
        for i in ("", "1"):
            r = execute(doubled, i, 600)
            if r.halted:
                pairs[i] = r.output
        if not pairs:
            continue
        w = ExampleSet.from_pairs(pairs)
        lib = Library((p_a,))
        if f_compatible(p_a, w) or not f_compatible(target, w, DEFAULT_CONFIG, lib):
            continue
        base = learner(w, DEFAULT_CONFIG, None, 18)
        n_b = base.ninst if base is not None else 7  # a lower bound suffices
        if not is_interposition_impossible(p_a.ninst, n_b, 2):
            continue
        assert brute_interposers(w, target, lib) == []
        assert interposition_set(w, target, lib).members == []
        tested += 1
    assert tested > 1
    metric(f"{tested} triples")


@pytest.mark.criterion(8, "I-safe augmentation recovers the target")
def test_isafe(book, metric):
    cfg = book.config
    cases = []
    for e in book.entries[3:12]:
        if e.program.ninst < 2:
            continue
        try:
            lib = interposing_library(e, cfg).library
        except CapExhausted:
            continue
        cases.append((e.witness, first_equivalent(e.program, lib, cfg), lib, cfg))
    rng = random.Random(7)
    for w, p, lib in random_instances(book, SMALL, rng, 40):
        if interposition_set(w, p, lib, SMALL).members:
            cases.append((w, p, lib, SMALL))
    checked = skipped = 0
    for w, p, lib, c in cases:
        try:
            wbar = isafe_augment(w, p, lib, c)
        except CapExhausted:
            skipped += 1
            continue
        out = learner(wbar, c, lib, max(c.max_prog_bits, p.ell))
        assert equivalent(out, p, c, lib)
        ts = teacher(p, c, lib)
        if wbar.delta <= c.max_witness_bits:
            assert ts is not None and ts.delta <= wbar.delta
        checked += 1
    assert checked >= 10
    metric(f"{checked} instances, {skipped} without a separating input within caps")


@pytest.mark.criterion(9, "curriculum counts 1, 3, 13, 73, 501")
def test_curriculum_counts():
    assert [curriculum_count(n) for n in range(1, 6)] == [1, 3, 13, 73, 501]
    for n in range(1, 6):
        got = list(enumerate_curricula(list(range(n))))
        assert len(got) == len(set(got)) == curriculum_count(n)


@pytest.mark.criterion(10, "I-search total equals exhaustive optimum")
def test_isearch_optimal(book, metric):
    ev = Evaluator(book)
    notes = []
    for q in QSETS:
        best = brute_force_optimum(q, book, evaluator=ev)
        found = i_search(q, book, evaluator=ev)
        assert found.total_ts_bits == best.total_ts_bits
        allowed = pairwise_prune(q, book, evaluator=ev)
        kept = [
            curriculum_ts(pi, book, evaluator=ev).total_ts_bits
            for pi in enumerate_curricula(q)
            if all(len(b) < 2 or (b[0], b[1]) in allowed for b in pi.branches)
        ]
        assert min(kept) == best.total_ts_bits
        notes.append(f"{found.curriculum}={found.total_ts_bits}")
    metric(", ".join(notes))


@pytest.mark.criterion(11, "serial and parallel runs are identical")
def test_determinism(metric):
    fresh_caches()
    serial = book_bytes(build_book(DEFAULT_CONFIG, threads=1))
    fresh_caches()
    parallel = book_bytes(build_book(DEFAULT_CONFIG, threads=4))
    assert serial == parallel
    book = build_book(DEFAULT_CONFIG)
    for q in QSETS[:2]:
        a = i_search(q, book, threads=1, evaluator=Evaluator(book))
        b = i_search(q, book, threads=4, evaluator=Evaluator(book))
        assert a.to_dict() == b.to_dict()
    metric(f"book {len(serial)} bytes")


def _random_program(rng, size, n):
    toks = []
    depth = 0
    for _ in range(n):
        t = rng.choice([0, 1, 2, 3, 4, 5] + ([6] if depth else []) + [7 + k for k in range(size)] * 2)
        depth += (t == 5) - (t == 6)
        toks.append(t)
    return Program(tuple(toks + [6] * depth), size)


@pytest.mark.criterion(12, "interpreter and codec conformance")
def test_conformance(metric):
    rng = random.Random(12)
    for _ in range(1000):
        size = rng.randint(1, 3)
        lib = Library(tuple(_random_program(rng, 0, rng.randint(0, 6)) for _ in range(size)))
        p = _random_program(rng, size, rng.randint(0, 8))
        inp = "".join(rng.choice("01") for _ in range(rng.randint(0, 5)))
        a = execute(p, inp, 500, lib)
        b = execute(unfold(p, lib), inp, 500)
        assert (a.halted, a.output, a.steps_used) == (b.halted, b.output, b.steps_used)

    for _ in range(10_000):
        pairs = {}
        for _ in range(rng.randint(0, 5)):
            i = "".join(rng.choice("01") for _ in range(rng.randint(0, 6)))
            pairs[i] = None if rng.random() < 0.25 else "".join(rng.choice("01") for _ in range(rng.randint(0, 6)))
        s = ExampleSet.from_pairs(pairs)
        assert s.bits == naive_encode(pairs)
        assert decode_exact(s.bits) == s

    codes = {s.bits for s in example_sets(20, 5)}
    for c in codes:
        assert not any(c[:k] in codes for k in range(len(c)))
    metric(f"prefix-free over {len(codes)} sets")
