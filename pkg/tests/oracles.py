"""Slow, independent reimplementations used as test oracles.

None of these share code with the package beyond the Program container and
the example-set constructor."""

from __future__ import annotations

import itertools
from math import ceil, log2

from teachsize.codec import Example, ExampleSet
from teachsize.lang import Program

SYMS = "><+.,[]"


def naive_index(s: str) -> int:
    # position in the length-lexicographic listing of binary strings
    return (2 ** len(s) - 1) + (int(s, 2) if s else 0)


def naive_gamma(n: int) -> str:
    width = n.bit_length()
    return "0" * (width - 1) + "".join("1" if n >> k & 1 else "0" for k in range(width - 1, -1, -1))


def naive_encode(pairs: dict) -> str:
    out = naive_gamma(len(pairs) + 1)
    for i in sorted(pairs, key=naive_index):
        o = pairs[i]
        out += naive_gamma(naive_index(i) + 1)
        out += naive_gamma(1 if o is None else naive_index(o) + 2)
    return out


def call_bits(size: int) -> int:
    return 3 + (ceil(log2(size)) if size > 1 else 0)


def naive_programs(size: int, max_bits: int) -> list[tuple[str, tuple[int, ...]]]:
    """All valid programs as (bit string, tokens), sorted by (length, bits)."""
    cb = call_bits(size)
    alphabet = [(t, format(t, "03b")) for t in range(7)]
    ib = cb - 3
    for k in range(max(size, 1)):
        alphabet.append((7 + k, "111" + (format(k, f"0{ib}b") if ib else "")))
    found = []
    max_tokens = max_bits // 3
    for n in range(max_tokens + 1):
        for combo in itertools.product(alphabet, repeat=n):
            bits = "".join(b for _, b in combo)
            if len(bits) > max_bits:
                continue
            depth = 0
            ok = True
            for t, _ in combo:
                depth += (t == 5) - (t == 6)
                if depth < 0:
                    ok = False
                    break
            if ok and depth == 0:
                found.append((bits, tuple(t for t, _ in combo)))
    found.sort(key=lambda x: (len(x[0]), x[0]))
    return found


def naive_run(tokens, inp: str, budget: int, library=()):
    """Straightforward interpreter; calls are expanded textually first."""
    code = []
    for t in tokens:
        if t >= 7:
            # an empty library makes every call spin forever once reached
            code.extend(library[t - 7] if library else (5, 6, 2, 5, 6))
        else:
            code.append(t)
    stream = []
    for ch in inp:
        stream += [1, int(ch)]
    stream.append(0)
    match = {}
    stack = []
    for k, t in enumerate(code):
        if t == 5:
            stack.append(k)
        elif t == 6:
            j = stack.pop()
            match[j], match[k] = k, j
    tape = {}
    head = pc = steps = rd = 0
    out = ""
    while pc < len(code):
        if steps >= budget:
            return ("running", budget)
        steps += 1
        t = code[pc]
        cell = tape.get(head, 0)
        if t == 0:
            head += 1
        elif t == 1:
            head -= 1
        elif t == 2:
            tape[head] = 1 - cell
        elif t == 3:
            out += str(cell)
        elif t == 4:
            tape[head] = stream[rd] if rd < len(stream) else 0
            rd += 1
        elif t == 5 and cell == 0:
            pc = match[pc]
        elif t == 6 and cell == 1:
            pc = match[pc]
        pc += 1
    return ("halted", out, steps)


def naive_outcome(tokens, inp, budget, library=()):
    r = naive_run(tokens, inp, budget, library)
    return r[1] if r[0] == "halted" else None


def naive_budget(inp: str, s: dict, f=(64, 512), rho=16, kappa=32) -> int:
    fa, fb = f
    if s:
        imax = max(len(i) for i in s)
        omax = max((len(o) for o in s.values() if o is not None), default=0)
        lam = rho * min(len(inp), imax) + omax + kappa
    else:
        lam = kappa
    return max(fa * len(inp) + fb, lam)


def naive_compatible(tokens, s: dict, library=()) -> bool:
    for i, o in s.items():
        if naive_outcome(tokens, i, naive_budget(i, s), library) != o:
            return False
    return True


def naive_learner(s: dict, size: int = 0, max_bits: int = 12, library=(), programs=None):
    for bits, toks in programs or naive_programs(size, max_bits):
        if naive_compatible(toks, s, library):
            return Program(toks, size)
    return None


def naive_sets(max_bits: int, input_cap: int) -> list[ExampleSet]:
    """Every example set with δ ≤ max_bits, by recursive choice of pairs."""
    inputs = [format(n, f"0{k}b") if k else "" for k in range(input_cap + 1) for n in range(2 ** k)]
    outs = [None] + [format(n, f"0{k}b") if k else "" for k in range(max_bits // 2 + 1) for n in range(2 ** k)]
    options = []
    for i in inputs:
        row = []
        for o in outs:
            cost = len(naive_gamma(naive_index(i) + 1)) + len(naive_gamma(1 if o is None else naive_index(o) + 2))
            if cost + 3 <= max_bits:
                row.append((o, cost))
        if row:
            options.append((i, row))
    found = []

    def grow(start, chosen, spent):
        size = len(naive_gamma(len(chosen) + 1))
        if spent + size <= max_bits:
            found.append(dict(chosen))
        for k in range(start, len(options)):
            i, row = options[k]
            for o, cost in row:
                if spent + cost + len(naive_gamma(len(chosen) + 2)) <= max_bits:
                    chosen[i] = o
                    grow(k + 1, chosen, spent + cost)
                    del chosen[i]

    grow(0, {}, 0)
    found.sort(key=lambda d: (len(naive_encode(d)), naive_encode(d)))
    return [ExampleSet.from_pairs(d) for d in found]
