"""Prefix-free encoding of example sets, the size measure δ, the order ⋖
and canonical enumeration of example sets."""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, Iterator, Mapping, NamedTuple

BOTTOM_TEXT = "_|_"


def string_index(s: str) -> int:
    return int("1" + s, 2) - 1


def index_string(n: int) -> str:
    if n < 0:
        raise ValueError("index must be non-negative")
    return bin(n + 1)[3:]


def gamma_encode(n: int) -> str:
    if n < 1:
        raise ValueError("Elias gamma encodes positive integers only")
    b = bin(n)[2:]
    return "0" * (len(b) - 1) + b


def gamma_decode(bits: str, pos: int = 0) -> tuple[int, int]:
    zeros = 0
    while pos + zeros < len(bits) and bits[pos + zeros] == "0":
        zeros += 1
    end = pos + 2 * zeros + 1
    if end > len(bits):
        raise ValueError("truncated gamma code")
    return int(bits[pos + zeros:end], 2), end


def encode_natural(n: int) -> str:
    return gamma_encode(n + 1)


def decode_natural(bits: str, pos: int = 0) -> tuple[int, int]:
    value, pos = gamma_decode(bits, pos)
    return value - 1, pos


def _check_binary(s: str) -> None:
    if s.strip("01"):
        raise ValueError(f"not a binary string: {s!r}")


class Example(NamedTuple):
    input: str
    output: str | None  # None is ⊥

    @property
    def outcode(self) -> int:
        return 0 if self.output is None else string_index(self.output) + 1

    @property
    def bits(self) -> str:
        return encode_natural(string_index(self.input)) + encode_natural(self.outcode)


@dataclass(frozen=True)
class ExampleSet:
    examples: tuple[Example, ...] = ()

    def __post_init__(self):
        exs = tuple(sorted((Example(*e) for e in self.examples), key=lambda e: string_index(e.input)))
        for e in exs:
            _check_binary(e.input)
            if e.output is not None:
                _check_binary(e.output)
        for a, b in zip(exs, exs[1:]):
            if a.input == b.input:
                raise ValueError(f"two examples share input {a.input!r}")
        object.__setattr__(self, "examples", exs)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, str | None]] | Mapping[str, str | None]) -> "ExampleSet":
        if isinstance(pairs, Mapping):
            pairs = pairs.items()
        return cls(tuple(Example(i, o) for i, o in pairs))

    @cached_property
    def bits(self) -> str:
        return encode_natural(len(self.examples)) + "".join(e.bits for e in self.examples)

    @property
    def delta(self) -> int:
        return len(self.bits)

    def sort_key(self) -> tuple[int, str]:
        return (len(self.bits), self.bits)

    def as_dict(self) -> dict[str, str | None]:
        return dict(self.examples)

    def __len__(self) -> int:
        return len(self.examples)

    def __iter__(self):
        return iter(self.examples)

    def union(self, extra: Iterable[Example]) -> "ExampleSet":
        return ExampleSet(self.examples + tuple(extra))

    @property
    def text(self) -> str:
        return format_example_set(self)

    def __str__(self) -> str:
        return self.text


EMPTY_SET = ExampleSet()


def encode_example_set(s: ExampleSet) -> str:
    return s.bits


def decode_example_set(bits: str, pos: int = 0) -> tuple[ExampleSet, int]:
    count, pos = decode_natural(bits, pos)
    examples = []
    for _ in range(count):
        n, pos = decode_natural(bits, pos)
        code, pos = decode_natural(bits, pos)
        examples.append(Example(index_string(n), None if code == 0 else index_string(code - 1)))
    decoded = ExampleSet(tuple(examples))
    if [e.input for e in decoded.examples] != [e.input for e in examples]:
        raise ValueError("examples not in canonical input order")
    return decoded, pos


def decode_exact(bits: str) -> ExampleSet:
    s, pos = decode_example_set(bits)
    if pos != len(bits):
        raise ValueError("trailing bits after example set")
    return s


def witness_precedes(s: ExampleSet, t: ExampleSet) -> bool:
    return s.sort_key() < t.sort_key()


def format_example_set(s: ExampleSet) -> str:
    parts = [f"{e.input} -> {BOTTOM_TEXT if e.output is None else e.output}" for e in s.examples]
    return "{" + ", ".join(parts) + "}"


_PAIR = re.compile(r"^\s*([01]*)\s*->\s*([01]*|_\|_|⊥)\s*$")


def parse_example_set(text: str) -> ExampleSet:
    body = text.strip()
    if not (body.startswith("{") and body.endswith("}")):
        raise ValueError(f"witness text must be enclosed in braces: {text!r}")
    body = body[1:-1]
    if not body.strip():
        return EMPTY_SET
    examples = []
    for chunk in body.split(","):
        m = _PAIR.match(chunk)
        if not m:
            raise ValueError(f"malformed example {chunk!r}")
        out = m.group(2)
        examples.append(Example(m.group(1), None if out in (BOTTOM_TEXT, "⊥") else out))
    return ExampleSet(tuple(examples))


@lru_cache(maxsize=16)
def _all_sets(max_bits: int, input_len_cap: int | None, output_len_cap: int | None) -> tuple[ExampleSet, ...]:
    if max_bits < 1:
        return ()
    # the cheapest non-empty set spends 3 bits on the count
    room = max_bits - 3
    inputs = []
    for n in range(1 << 30):
        cost = len(encode_natural(n))
        s = index_string(n)
        if cost > room or (input_len_cap is not None and len(s) > input_len_cap):
            break
        inputs.append((s, cost))
    outputs: list[tuple[str | None, int]] = [(None, 1)]
    for code in range(1, 1 << 30):
        cost = len(encode_natural(code))
        if cost > room:
            break
        o = index_string(code - 1)
        if output_len_cap is not None and len(o) > output_len_cap:
            break
        outputs.append((o, cost))

    results: list[ExampleSet] = [EMPTY_SET]
    chosen: list[Example] = []

    def extend(start: int, used: int):
        for k in range(start, len(inputs)):
            inp, icost = inputs[k]
            count_cost = len(encode_natural(len(chosen) + 1))
            if used + icost + 1 + count_cost > max_bits:
                # input costs never decrease, so nothing later fits either
                break
            for out, ocost in outputs:
                total = used + icost + ocost
                if total + count_cost > max_bits:
                    break
                chosen.append(Example(inp, out))
                results.append(ExampleSet(tuple(chosen)))
                extend(k + 1, total)
                chosen.pop()

    extend(0, 0)
    results.sort(key=ExampleSet.sort_key)
    return tuple(results)


def enumerate_example_sets(
    max_bits: int, input_len_cap: int | None = None, output_len_cap: int | None = None
) -> Iterator[ExampleSet]:
    """Yield every canonical example set with δ ≤ max_bits and strings within the caps, in ⋖ order."""
    return iter(_all_sets(max_bits, input_len_cap, output_len_cap))


def example_sets(max_bits: int, input_len_cap: int | None = None, output_len_cap: int | None = None) -> tuple[ExampleSet, ...]:
    return _all_sets(max_bits, input_len_cap, output_len_cap)
