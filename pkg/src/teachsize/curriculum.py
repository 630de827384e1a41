"""Curricula over a set of book concepts: counting, enumeration, overall
teaching size, the I-search branch-and-bound and a greedy baseline."""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import comb, factorial
from typing import Iterator, Sequence

from .codec import ExampleSet, example_sets
from .conditional import library_from_programs
from .config import Config
from .interposition import first_interposer
from .lang import EMPTY_LIBRARY, Program, execute
from .protocol import CapExhausted, TeachingBook, teacher
from .space import example_budget, reference_signature, signature_budget, space_for

Branch = tuple[int, ...]


@dataclass(frozen=True)
class Curriculum:
    """A partition of book concepts into ordered branches, stored canonically."""

    branches: tuple[Branch, ...]

    def __post_init__(self):
        branches = tuple(sorted((tuple(b) for b in self.branches), key=lambda b: b[0]))
        if any(not b for b in branches):
            raise ValueError("branches must be non-empty")
        flat = [c for b in branches for c in b]
        if len(flat) != len(set(flat)):
            raise ValueError("a concept appears in two places")
        object.__setattr__(self, "branches", branches)

    @property
    def concepts(self) -> frozenset[int]:
        return frozenset(c for b in self.branches for c in b)

    def text(self, labels=None) -> str:
        name = labels or (lambda k: f"c{k}")
        return "{" + " | ".join(">".join(name(c) for c in b) for b in self.branches) + "}"

    def __str__(self) -> str:
        return self.text()


@dataclass
class Step:
    concept: int
    given: Branch
    ts_bits: int | None
    witness: ExampleSet | None


@dataclass
class CurriculumResult:
    curriculum: Curriculum
    total_ts_bits: int | None
    per_step: list[Step] = field(default_factory=list)

    @property
    def exact(self) -> bool:
        return self.total_ts_bits is not None

    def to_dict(self) -> dict:
        return {
            "curriculum": self.curriculum.text(),
            "total_ts_bits": self.total_ts_bits,
            "per_step": [
                {
                    "concept": f"c{s.concept}",
                    "given": [f"c{g}" for g in s.given],
                    "ts_bits": s.ts_bits,
                    "witness": None if s.witness is None else s.witness.text,
                }
                for s in self.per_step
            ],
        }


class PreconditionViolation(RuntimeError):
    def __init__(self, concept: int, witness: ExampleSet):
        super().__init__(f"concept c{concept} is consistent with {witness.text} only beyond its time bound")
        self.concept = concept
        self.witness = witness


def curriculum_count(n: int) -> int:
    if n < 1:
        raise ValueError("need at least one concept")
    return sum(comb(n - 1, k) * factorial(n) // factorial(k + 1) for k in range(n))


def enumerate_curricula(q: Sequence[int]) -> Iterator[Curriculum]:
    """Every curriculum over ``q`` exactly once; all-singletons first, then by branch count descending."""
    q = list(q)
    if not q:
        raise ValueError("need at least one concept")
    if len(set(q)) != len(q):
        raise ValueError("repeated concept")
    found: list[tuple[tuple[Branch, ...], Curriculum]] = []

    def grow(k: int, branches: list[list[int]]):
        if k == len(q):
            c = Curriculum(tuple(tuple(b) for b in branches))
            found.append((c.branches, c))
            return
        item = q[k]
        for b in branches:
            for pos in range(len(b) + 1):
                b.insert(pos, item)
                grow(k + 1, branches)
                b.pop(pos)
        branches.append([item])
        grow(k + 1, branches)
        branches.pop()

    grow(0, [])
    order = {c: k for k, c in enumerate(q)}
    found.sort(key=lambda pair: (-len(pair[0]), [[order[c] for c in b] for b in pair[0]]))
    for _, c in found:
        yield c


class Evaluator:
    """Memoised conditional teaching sizes for one book and configuration."""

    def __init__(self, book: TeachingBook, config: Config | None = None):
        self.book = book
        self.config = (config or book.config).semantic()
        self._ts: dict[tuple[int, Branch], ExampleSet | None] = {}
        self._lock = threading.Lock()

    def program(self, c: int) -> Program:
        return self.book.entries[c].program

    def library(self, given: Branch):
        if not given:
            return EMPTY_LIBRARY
        return library_from_programs([self.program(g) for g in given], [f"c{g}" for g in given])

    def witness(self, c: int, given: Branch = ()) -> ExampleSet | None:
        key = (c, tuple(given))
        if key in self._ts:
            return self._ts[key]
        if not given and self.book.entries[c].witness is not None and self.book.config == self.config:
            w = self.book.entries[c].witness
        else:
            w = teacher(self.program(c), self.config, self.library(key[1]))
        with self._lock:
            self._ts[key] = w
        return w

    def ts(self, c: int, given: Branch = ()) -> int | None:
        w = self.witness(c, given)
        return None if w is None else w.delta


def curriculum_ts(pi: Curriculum, book: TeachingBook, config: Config | None = None, evaluator: Evaluator | None = None) -> CurriculumResult:
    ev = evaluator or Evaluator(book, config)
    steps = []
    total: int | None = 0
    for branch in pi.branches:
        for pos, c in enumerate(branch):
            w = ev.witness(c, branch[:pos])
            steps.append(Step(c, branch[:pos], None if w is None else w.delta, w))
            if w is None:
                total = None
            elif total is not None:
                total += w.delta
    return CurriculumResult(pi, total, steps)


def _lower_bound(result: CurriculumResult, cap: int) -> int:
    """Smallest total consistent with the known steps; unknown steps exceed ``cap``."""
    return sum(s.ts_bits if s.ts_bits is not None else cap + 1 for s in result.per_step)


def _pick_best(results: list[CurriculumResult], cap: int) -> CurriculumResult:
    exact = [r for r in results if r.exact]
    if not exact:
        raise CapExhausted("no curriculum could be evaluated within the witness cap")
    best = min(exact, key=lambda r: r.total_ts_bits)  # min keeps the earliest on ties
    for r in results:
        if not r.exact and _lower_bound(r, cap) < best.total_ts_bits:
            raise CapExhausted(f"curriculum {r.curriculum} may beat the optimum but exceeds the witness cap")
    return best


def brute_force_optimum(q: Sequence[int], book: TeachingBook, config: Config | None = None, evaluator: Evaluator | None = None) -> CurriculumResult:
    if curriculum_count(len(q)) > 501:
        raise ValueError("too many curricula for exhaustive evaluation")
    ev = evaluator or Evaluator(book, config)
    results = [curriculum_ts(pi, book, evaluator=ev) for pi in enumerate_curricula(q)]
    return _pick_best(results, ev.config.max_witness_bits)


def pairwise_prune(q: Sequence[int], book: TeachingBook, config: Config | None = None, evaluator: Evaluator | None = None) -> set[tuple[int, int]]:
    """Ordered pairs (first, second) allowed to open a branch.

    A start y→x is dropped when x helps y at least as much as y helps x,
    TS(y|x) ≤ TS(y) and TS(x|y) ≥ TS(x), with one of the two strict."""
    ev = evaluator or Evaluator(book, config)
    allowed = set()
    for x in q:
        for y in q:
            if x == y:
                continue
            ts_y, ts_x = ev.ts(y), ev.ts(x)
            ts_y_x, ts_x_y = ev.ts(y, (x,)), ev.ts(x, (y,))
            if None in (ts_y, ts_x, ts_y_x, ts_x_y):
                allowed.add((y, x))
                continue
            dominated = ts_y_x <= ts_y and ts_x_y >= ts_x and (ts_y_x < ts_y or ts_x_y > ts_x)
            if not dominated:
                allowed.add((y, x))
    return allowed


def _admissible(pi: Curriculum, allowed: set[tuple[int, int]]) -> bool:
    return all(len(b) < 2 or (b[0], b[1]) in allowed for b in pi.branches)


def check_time_assumption(q: Sequence[int], book: TeachingBook, config: Config, max_bits: int, slack: int = 16) -> None:
    """Raise when some concept fits a witness only beyond its f-bound.

    The concept's unbounded behaviour is approximated by its book program
    run ``slack`` times longer than the f-bound."""
    inputs = {}
    sets = [s for s in example_sets(min(max_bits, config.max_witness_bits), config.input_cap)]
    for c in q:
        p = book.entries[c].program
        runs = {}
        for s in sets:
            for e in s.examples:
                if e.input not in runs:
                    runs[e.input] = execute(p, e.input, slack * signature_budget(e.input, config))
        inputs[c] = runs
    for c in q:
        runs = inputs[c]
        for s in sets:
            if not all(runs[e.input].outcome == e.output for e in s.examples):
                continue
            for e in s.examples:
                r = runs[e.input]
                if r.halted and r.steps_used > example_budget(e.input, s, config):
                    raise PreconditionViolation(c, s)


class _Search:
    def __init__(self, q, book, ev: Evaluator, h: int):
        self.q = list(q)
        self.book = book
        self.ev = ev
        self.config = ev.config
        self.cap = min(h - 1, self.config.max_witness_bits)
        self.sets = example_sets(self.cap, self.config.input_cap)
        self.exact: dict[tuple[int, Branch], int] = {}
        self.lower: dict[tuple[int, Branch], int] = {}
        self._lock = threading.Lock()
        self._targets = {}

    def step(self, x: int, given: Branch, room: int, strict: bool) -> int | None:
        """TS(x | given) if it can keep the branch competitive, else None.

        ``room`` is the incumbent total minus the partial total; with
        ``strict`` a branch must beat it, otherwise equalling is enough."""
        key = (x, given)
        known = self.exact.get(key)
        if known is not None:
            return known if (known < room if strict else known <= room) else None
        lb = self.lower.get(key, 0)
        if (room <= lb) if strict else (room < lb):
            return None
        lib = self.ev.library(given)
        cfg = self.config
        p_x = self.ev.program(x)
        target = reference_signature(p_x, cfg)
        from .conditional import first_equivalent

        p_xp = first_equivalent(p_x, lib, cfg)
        sp = space_for(lib, max(cfg.max_prog_bits, p_xp.ell), cfg)
        idx = sp.index[p_xp]
        for w in self.sets:
            if (room <= w.delta) if strict else (room < w.delta):
                with self._lock:
                    self.lower[key] = max(self.lower.get(key, 0), w.delta)
                return None
            compat = sp.compatible(w)
            if not compat >> idx & 1:
                continue
            p = first_interposer(w, p_xp, lib, cfg, compat) or p_xp
            if sp.signature(sp.index[p]) == target:
                with self._lock:
                    self.exact[key] = w.delta
                return w.delta
        if (room <= self.cap + 1) if strict else (room < self.cap + 1):
            with self._lock:
                self.lower[key] = max(self.lower.get(key, 0), self.cap + 1)
            return None
        raise CapExhausted(f"TS(c{x} | {list(given)}) exceeds the witness cap of {self.cap} bits")

    def evaluate(self, pi: Curriculum, incumbent: int, strict: bool) -> int | None:
        total = 0
        for branch in pi.branches:
            total += self.ev.ts(branch[0])
        for branch in pi.branches:
            for pos in range(1, len(branch)):
                t = self.step(branch[pos], branch[:pos], incumbent - total, strict)
                if t is None:
                    return None
                total += t
        if (total < incumbent) if strict else (total <= incumbent):
            return total
        return None


def i_search(
    q: Sequence[int],
    book: TeachingBook,
    config: Config | None = None,
    h: int | None = None,
    threads: int | None = None,
    evaluator: Evaluator | None = None,
    check_assumption: bool = True,
) -> CurriculumResult:
    """Branch-and-bound over curricula starting from the all-singletons curriculum."""
    ev = evaluator or Evaluator(book, config)
    cfg = ev.config
    threads = threads or (config.threads if config else 1)
    base_ts = {x: ev.ts(x) for x in q}
    if None in base_ts.values():
        raise CapExhausted("a concept has no witness within the caps")
    total0 = sum(base_ts.values())
    h = h or cfg.h or total0 + 8
    if check_assumption:
        check_time_assumption(q, book, cfg, total0)
    allowed = pairwise_prune(q, book, evaluator=ev)
    search = _Search(q, book, ev, h)
    candidates = list(enumerate_curricula(q))
    best, best_total = candidates[0], total0
    rest = [pi for pi in candidates[1:] if _admissible(pi, allowed)]
    if threads <= 1:
        for pi in rest:
            t = search.evaluate(pi, best_total, strict=True)
            if t is not None:
                best, best_total = pi, t
    else:
        # ties are kept so the earliest optimum can be chosen after the merge
        shared = {"bound": best_total}
        lock = threading.Lock()

        def run(pi):
            t = search.evaluate(pi, shared["bound"], strict=False)
            if t is not None:
                with lock:
                    shared["bound"] = min(shared["bound"], t)
            return t

        with ThreadPoolExecutor(threads) as pool:
            totals = list(pool.map(run, rest))
        for pi, t in zip(rest, totals):
            if t is not None and t < best_total:
                best, best_total = pi, t
    result = curriculum_ts(best, book, evaluator=ev)
    assert result.total_ts_bits == best_total, (result.total_ts_bits, best_total)
    return result


def greedy_curriculum(q: Sequence[int], book: TeachingBook, config: Config | None = None, evaluator: Evaluator | None = None) -> CurriculumResult:
    """One branch, each time adding the concept whose teaching size drops most."""
    ev = evaluator or Evaluator(book, config)
    remaining = sorted(q)
    taught: Branch = ()
    while remaining:
        best = None
        for c in remaining:
            cond = ev.ts(c, taught)
            if cond is None:
                continue
            gain = ev.ts(c) - cond
            if best is None or gain > best[0]:
                best = (gain, c)
        if best is None:
            raise CapExhausted("no remaining concept can be taught within the caps")
        taught += (best[1],)
        remaining.remove(best[1])
    return curriculum_ts(Curriculum((taught,)), book, evaluator=ev)
