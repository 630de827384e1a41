"""Run configuration shared by every module: time bounds and search caps."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace
from pathlib import Path


@dataclass(frozen=True)
class ComplexityFunction:
    """Affine time bound f(n) = a*n + b."""

    a: int = 64
    b: int = 512

    def __post_init__(self):
        if self.a < 0 or self.b < 0 or (self.a == 0 and self.b == 0):
            raise ValueError("f needs a, b >= 0 and not both zero")

    def __call__(self, n: int) -> int:
        return self.a * n + self.b


@dataclass(frozen=True)
class TrieBoundParams:
    rho: int = 16
    kappa: int = 32

    def __post_init__(self):
        if self.rho <= 0 or self.kappa <= 0:
            raise ValueError("rho and kappa must be positive")


# file key -> attribute name
CONFIG_KEYS = {
    "f.a": "f_a",
    "f.b": "f_b",
    "rho": "rho",
    "kappa": "kappa",
    "max_witness_bits": "max_witness_bits",
    "max_prog_bits": "max_prog_bits",
    "h_in": "h_in",
    "h": "h",
    "input_len_cap": "input_len_cap",
    "threads": "threads",
}
# keys that change results; threads only changes speed
SEMANTIC_KEYS = ("f.a", "f.b", "rho", "kappa", "max_witness_bits", "max_prog_bits", "h_in", "h", "input_len_cap")


@dataclass(frozen=True)
class Config:
    f_a: int = 64
    f_b: int = 512
    rho: int = 16
    kappa: int = 32
    max_witness_bits: int = 24
    max_prog_bits: int = 15
    h_in: int = 5
    h: int | None = None
    input_len_cap: int | None = None
    threads: int = 1

    def __post_init__(self):
        ComplexityFunction(self.f_a, self.f_b)
        TrieBoundParams(self.rho, self.kappa)
        for name in ("max_witness_bits", "max_prog_bits", "threads"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.h_in < 0:
            raise ValueError("h_in must be non-negative")
        for name in ("h", "input_len_cap"):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise ValueError(f"{name} must be positive")

    @property
    def f(self) -> ComplexityFunction:
        return ComplexityFunction(self.f_a, self.f_b)

    @property
    def trie(self) -> TrieBoundParams:
        return TrieBoundParams(self.rho, self.kappa)

    @property
    def input_cap(self) -> int:
        """Longest witness input considered; defaults to the equivalence horizon."""
        return self.h_in if self.input_len_cap is None else self.input_len_cap

    def semantic(self) -> "Config":
        return replace(self, threads=1)

    def with_(self, **changes) -> "Config":
        return replace(self, **changes)

    def items(self):
        for key, attr in CONFIG_KEYS.items():
            yield key, getattr(self, attr)

    def to_text(self) -> str:
        lines = []
        for key, value in self.items():
            lines.append(f"{key}={'' if value is None else value}")
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        canon = "".join(f"{k}={'' if v is None else v}\n" for k, v in self.items() if k in SEMANTIC_KEYS)
        return hashlib.sha256(canon.encode()).hexdigest()[:16]

    @classmethod
    def from_mapping(cls, values: dict[str, str], base: "Config | None" = None) -> "Config":
        changes = {}
        for key, raw in values.items():
            if key not in CONFIG_KEYS:
                raise ValueError(f"unknown config key {key!r}")
            raw = raw.strip()
            changes[CONFIG_KEYS[key]] = None if raw in ("", "none", "None") else int(raw)
        return replace(base or cls(), **changes)

    @classmethod
    def from_text(cls, text: str, base: "Config | None" = None) -> "Config":
        values = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"line {lineno}: expected key=value")
            key, value = line.split("=", 1)
            values[key.strip()] = value
        return cls.from_mapping(values, base)

    @classmethod
    def load(cls, path: str | Path, base: "Config | None" = None) -> "Config":
        return cls.from_text(Path(path).read_text(), base)


DEFAULT_CONFIG = Config()
