import random

import pytest

from oracles import naive_budget, naive_compatible, naive_learner, naive_programs
from teachsize.codec import EMPTY_SET, ExampleSet, example_sets
from teachsize.config import Config, DEFAULT_CONFIG
from teachsize.lang import Program, execute, parse_program
from teachsize.protocol import (
    BookMismatch,
    CapExhausted,
    TrieBoundParams,
    book_bytes,
    compile_trie,
    concept_equiv,
    f_compatible,
    first_equivalent_program,
    k_len,
    lambda_bound,
    learner,
    read_book,
    teacher,
    teaching_size,
    write_book,
)
from teachsize.space import all_inputs, example_budget

P = parse_program
S = ExampleSet.from_pairs
SMALL = DEFAULT_CONFIG.with_(max_prog_bits=12)


def test_lambda_bound():
    s = S({"01": "1", "1": None})
    assert lambda_bound("01", s) == 16 * 2 + 1 + 32
    assert lambda_bound("0110", s) == 16 * 2 + 1 + 32
    assert lambda_bound("", EMPTY_SET) == 32
    assert lambda_bound("1", s, TrieBoundParams(4, 8)) == 4 + 1 + 8
    for i in ["", "0", "0101", "11111"]:
        assert example_budget(i, s, DEFAULT_CONFIG) == naive_budget(i, s.as_dict())


def test_f_compatible():
    assert f_compatible(P("+."), S({"": "1"}))
    assert not f_compatible(P("."), S({"": "1"}))
    assert f_compatible(P("+[]"), S({"": None, "1": None}))
    assert f_compatible(P(""), EMPTY_SET)


def test_learner_examples():
    assert learner(S({"1": "1"})) == P("+.")
    assert learner(S({"": None})) == P("@")
    assert learner(EMPTY_SET) == P("")


def test_learner_matches_brute_force():
    progs = naive_programs(0, 12)
    for s in example_sets(13, 5):
        assert learner(s, SMALL) == naive_learner(s.as_dict(), programs=progs), s.text


def test_teacher_examples():
    assert teacher(P("+.")).text == "{ -> 1}"
    assert teaching_size(P("+.")) == 9
    assert teacher(P("@")).text == "{ -> _|_}"
    assert teacher(P("")) == EMPTY_SET


def test_teacher_witness_makes_learner_recover_concept():
    for text in ["+.", "..", ",[]", ",+[]", "+..", ".,,[]"]:
        p = P(text)
        w = teacher(p)
        assert w is not None
        assert concept_equiv(learner(w), p)


def test_concept_equiv():
    assert concept_equiv(P("+."), P("+.>"))
    assert concept_equiv(P("@"), P("+[]"))
    assert not concept_equiv(P("."), P("+."))


def test_k_len():
    assert k_len(P("")) == 0
    assert k_len(P("+.")) == 6
    assert k_len(P("+.>")) == 6
    assert first_equivalent_program(P("+.>"), DEFAULT_CONFIG) == P("+.")


def test_book_first_entries(book):
    texts = [str(e.program) for e in book.entries[:5]]
    assert texts == ["ε", "@", ".", "+.", ".."]
    assert len(book) == 87
    assert book.entries[0].witness == EMPTY_SET
    deltas = [e.ts_bits for e in book.entries]
    assert deltas == sorted(deltas)


def test_book_entries_are_learner_fixed_points(book):
    for e in book.entries:
        assert learner(e.witness) == e.program
        assert teacher(e.program) == e.witness


def test_book_file_round_trip(tmp_path, small_book):
    path = tmp_path / "b.tsb"
    write_book(small_book, path)
    again = read_book(path, DEFAULT_CONFIG)
    assert again.entries == small_book.entries
    assert book_bytes(again) == book_bytes(small_book)
    with pytest.raises(BookMismatch):
        read_book(path, DEFAULT_CONFIG.with_(rho=20))
    text = path.read_text().replace("rho=16", "rho=17")
    path.write_text(text)
    with pytest.raises(BookMismatch):
        read_book(path)


def test_config_text_round_trip():
    cfg = DEFAULT_CONFIG.with_(rho=7, h=30)
    assert Config.from_text(cfg.to_text()) == cfg
    assert cfg.digest() != DEFAULT_CONFIG.digest()
    assert DEFAULT_CONFIG.with_(threads=8).digest() == DEFAULT_CONFIG.digest()
    with pytest.raises(ValueError):
        Config.from_text("bogus=1")


def _check_trie(s: ExampleSet, rng: random.Random):
    p = compile_trie(s)
    for e in s.examples:
        budget = 2000 if e.output is None else 10**5
        r = execute(p, e.input, budget)
        assert r.outcome == e.output
        if e.output is not None:
            assert r.steps_used <= lambda_bound(e.input, s)
    table = s.as_dict()
    for i in rng.sample(all_inputs(5), 6):
        if i not in table:
            assert not execute(p, i, 500).halted


def test_trie_on_enumerated_sets():
    rng = random.Random(0)
    for s in example_sets(15, 5):
        _check_trie(s, rng)


def test_trie_on_random_sets():
    rng = random.Random(1)
    for _ in range(300):
        d = {}
        for _ in range(rng.randint(1, 8)):
            i = "".join(rng.choice("01") for _ in range(rng.randint(0, 5)))
            d[i] = None if rng.random() < 0.2 else "".join(rng.choice("01") for _ in range(rng.randint(0, 8)))
        _check_trie(S(d), rng)


def test_trie_is_f_compatible_even_when_saturated():
    s = S({i: "10101010" for i in all_inputs(5)})
    assert f_compatible(compile_trie(s), s)


def test_empty_trie_diverges():
    assert compile_trie(EMPTY_SET) == P("+[]")


def test_naive_compatibility_agrees():
    progs = naive_programs(0, 9)
    sets = example_sets(13, 3)
    for _, toks in progs:
        p = Program(toks)
        for s in sets[::7]:
            assert f_compatible(p, s) == naive_compatible(toks, s.as_dict())


def test_cap_exhausted_is_runtime_error():
    assert issubclass(CapExhausted, RuntimeError)
