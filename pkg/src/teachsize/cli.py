"""Command-line interface."""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from .codec import parse_example_set
from .conditional import ConceptNotInBook, library_from_programs, resolve_concept
from .config import Config
from .curriculum import (
    Evaluator,
    PreconditionViolation,
    brute_force_optimum,
    curriculum_count,
    enumerate_curricula,
    greedy_curriculum,
    i_search,
)
from .interposition import (
    interposing_library,
    interposition_set,
    is_interposition_impossible,
    isafe_augment,
    nonmonotonicity_scan,
    sc_ranges_multi_sizes,
    sc_ranges_single,
)
from .lang import EMPTY_LIBRARY, InvalidProgram, Library, parse_program
from .protocol import BookMismatch, CapExhausted, TeachingBook, build_book, k_len, read_book, teacher, write_book

EXIT_OK, EXIT_CAP, EXIT_USAGE = 0, 1, 2

_OVERRIDES = [
    ("--f-a", "f.a"),
    ("--f-b", "f.b"),
    ("--rho", "rho"),
    ("--kappa", "kappa"),
    ("--max-witness-bits", "max_witness_bits"),
    ("--max-prog-bits", "max_prog_bits"),
    ("--h-in", "h_in"),
    ("--h", "h"),
    ("--input-len-cap", "input_len_cap"),
    ("--threads", "threads"),
]


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    config: Config
    book_path: Path | None = None
    output: str = "table"


@dataclass
class Report:
    command: str
    digest: str
    results: list = field(default_factory=list)
    lines: list = field(default_factory=list)
    seconds: float = 0.0

    def emit(self, fmt: str, out) -> None:
        if fmt == "records":
            for r in self.results:
                out.write(json.dumps({"command": self.command, "config_digest": self.digest, **r}, sort_keys=True) + "\n")
        else:
            for line in self.lines:
                out.write(line + "\n")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="key=value configuration file")
    for flag, key in _OVERRIDES:
        p.add_argument(flag, dest="cfg_" + key.replace(".", "_"), type=int, metavar="N", help=f"override {key}")
    p.add_argument("--book", type=Path, help="TSB1 teaching-book file")
    p.add_argument("--format", choices=("table", "records"), default="table")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="teachsize", description="Teaching size, interposition and curricula for a toy language")
    sub = parser.add_subparsers(dest="command", required=True)

    book = sub.add_parser("book", help="teaching-book operations")
    book_sub = book.add_subparsers(dest="action", required=True)
    bb = book_sub.add_parser("build", help="build a teaching book and write it as TSB1")
    _common(bb)
    bb.add_argument("--out", type=Path, required=True)

    for name, helptext in (("ts", "teaching size of a concept"), ("k", "shortest equivalent program length")):
        p = sub.add_parser(name, help=helptext)
        _common(p)
        p.add_argument("--concept", required=True, help="program text or book label cN")
    for name, helptext in (("cond-ts", "conditional teaching size"), ("cond-k", "conditional program length")):
        p = sub.add_parser(name, help=helptext)
        _common(p)
        p.add_argument("--concept", required=True)
        p.add_argument("--given", nargs="*", default=[], help="concepts forming the library, in order")

    for name, helptext in (("interpose", "interposition set of a program on a witness"), ("isafe", "augment a witness against interposers")):
        p = sub.add_parser(name, help=helptext)
        _common(p)
        p.add_argument("--witness", required=True, help="e.g. '{ -> 1, 0 -> _|_}'")
        p.add_argument("--program", required=True, help="program in the library language")
        p.add_argument("--library", default="[]", help="e.g. '[+.; ,.]'")
        if name == "interpose":
            p.add_argument("--no-prune", action="store_true")

    r = sub.add_parser("ranges", help="size/call ranges for interposed programs")
    _common(r)
    r.add_argument("--na", type=int, help="primitive size (one-primitive library)")
    r.add_argument("--nb", type=int, help="size of the base learner's program")
    r.add_argument("--nbp", type=int, help="size of the target's library program")
    r.add_argument("--library-size", type=int)
    r.add_argument("--n-min", type=int)
    r.add_argument("--n-max", type=int)
    r.add_argument("--ell", type=int, help="bit length of the target's library program")

    d = sub.add_parser("demo-interposition", help="build interposing libraries for book concepts")
    _common(d)
    d.add_argument("--count", type=int, default=3)

    s = sub.add_parser("scan-nonmono", help="search concept pairs with opposite K and TS orderings")
    _common(s)
    s.add_argument("--limit", type=int, default=12)

    cur = sub.add_parser("curricula", help="count or list curricula")
    cur_sub = cur.add_subparsers(dest="action", required=True)
    cc = cur_sub.add_parser("count")
    _common(cc)
    cc.add_argument("--n", type=int, required=True)
    cl = cur_sub.add_parser("list")
    _common(cl)
    cl.add_argument("--concepts", nargs="+", required=True)

    for name, helptext in (("isearch", "optimal curriculum by I-search"), ("greedy", "greedy single-branch curriculum")):
        p = sub.add_parser(name, help=helptext)
        _common(p)
        p.add_argument("--concepts", nargs="+", required=True)
        if name == "isearch":
            p.add_argument("--verify", action="store_true", help="also run exhaustive search and compare")
    return parser


def run_config(args) -> RunConfig:
    cfg = Config.load(args.config) if getattr(args, "config", None) else Config()
    overrides = {}
    for _, key in _OVERRIDES:
        value = getattr(args, "cfg_" + key.replace(".", "_"), None)
        if value is not None:
            overrides[key] = str(value)
    if overrides:
        cfg = Config.from_mapping(overrides, cfg)
    return RunConfig(cfg, getattr(args, "book", None), getattr(args, "format", "table"))


def _load_book(rc: RunConfig) -> TeachingBook:
    if rc.book_path is not None:
        return read_book(rc.book_path, rc.config)
    return build_book(rc.config)


def _concept(book: TeachingBook, ref: str) -> int:
    ref = ref.strip()
    if ref.startswith("c") and ref[1:].isdigit():
        return resolve_concept(book, int(ref[1:]))
    return resolve_concept(book, parse_program(ref))


def parse_library(text: str) -> Library:
    body = text.strip()
    if not (body.startswith("[") and body.endswith("]")):
        raise UsageError(f"library text must be enclosed in brackets: {text!r}")
    items = [t.strip() for t in body[1:-1].split(";")]
    items = [t for t in items if t]
    if not items:
        return EMPTY_LIBRARY
    return library_from_programs([parse_program(t) for t in items])


def _show(p) -> str:
    return p.text or "ε"


def _cmd_book(args, rc, rep):
    book = build_book(rc.config)
    write_book(book, args.out)
    from .protocol import book_digest

    rep.results.append({"entries": len(book), "path": str(args.out), "sha256": book_digest(book)})
    rep.lines.append(f"wrote {len(book)} entries to {args.out} (config digest {rc.config.digest()})")


def _cmd_ts(args, rc, rep):
    book = _load_book(rc)
    k = _concept(book, args.concept)
    entry = book.entries[k]
    rep.results.append({"concept": f"c{k}", "program": _show(entry.program), "ts_bits": entry.ts_bits, "witness": entry.witness.text})
    rep.lines.append(f"c{k} {_show(entry.program)}: {entry.ts_bits} bits  {entry.witness.text}")


def _cmd_cond(args, rc, rep, kind):
    book = _load_book(rc)
    k = _concept(book, args.concept)
    given = [_concept(book, g) for g in args.given]
    ev = Evaluator(book, rc.config)
    lib = ev.library(tuple(given))
    target = book.entries[k].program
    if kind == "ts":
        w = teacher(target, rc.config, lib)
        if w is None:
            raise CapExhausted(f"no witness within {rc.config.max_witness_bits} bits")
        value, extra = w.delta, {"witness": w.text}
    else:
        value = k_len(target, rc.config, lib)
        if value is None:
            raise CapExhausted(f"no equivalent program within {rc.config.max_prog_bits} bits")
        extra = {}
    name = "ts_bits" if kind == "ts" else "k_bits"
    rep.results.append({"concept": f"c{k}", "given": [f"c{g}" for g in given], "library": lib.text, name: value, **extra})
    rep.lines.append(f"c{k} | {lib.text}: {value} bits" + (f"  {extra['witness']}" if extra else ""))


def _cmd_k(args, rc, rep):
    book = _load_book(rc)
    k = _concept(book, args.concept)
    value = k_len(book.entries[k].program, rc.config)
    if value is None:
        raise CapExhausted("no equivalent program within the cap")
    rep.results.append({"concept": f"c{k}", "k_bits": value})
    rep.lines.append(f"c{k}: {value} bits")


def _cmd_interpose(args, rc, rep):
    lib = parse_library(args.library)
    w = parse_example_set(args.witness)
    p = parse_program(args.program, len(lib))
    report = interposition_set(w, p, lib, rc.config, prune=not args.no_prune)
    rep.results.append(report.to_dict())
    rep.lines.append(f"interposers of {_show(p)} on {w.text} with {lib.text}: {len(report.members)}")
    for q in report.members:
        rep.lines.append(f"  {_show(q)}")
    if report.ranges is not None:
        rep.lines.append(f"ranges i=[{report.ranges.i_min}, {report.ranges.i_max}] bound={report.bound} pruned={report.pruned_fraction:.3f}")
    else:
        rep.lines.append(f"no ranges applied ({report.setting})")


def _cmd_isafe(args, rc, rep):
    lib = parse_library(args.library)
    w = parse_example_set(args.witness)
    p = parse_program(args.program, len(lib))
    out = isafe_augment(w, p, lib, rc.config)
    rep.results.append({"witness": w.text, "augmented": out.text, "delta_before": w.delta, "delta_after": out.delta})
    rep.lines.append(f"{w.text} ({w.delta} bits) -> {out.text} ({out.delta} bits)")


def _cmd_ranges(args, rc, rep):
    if args.na is not None:
        if args.nb is None or args.nbp is None:
            raise UsageError("--na needs --nb and --nbp")
        ranges, bound = sc_ranges_single(args.na, args.nb, args.nbp)
        impossible = is_interposition_impossible(args.na, args.nb, args.nbp)
    else:
        needed = (args.library_size, args.n_min, args.n_max, args.nb, args.ell)
        if None in needed:
            raise UsageError("give --na/--nb/--nbp, or --library-size/--n-min/--n-max/--nb/--ell")
        ranges, bound = sc_ranges_multi_sizes(args.library_size, args.n_min, args.n_max, args.nb, args.ell)
        impossible = ranges.empty
    rep.results.append({"ranges": ranges.to_dict(), "bound": bound, "impossible": impossible})
    if ranges.empty:
        rep.lines.append("empty (interposition impossible)" if impossible else "empty")
    else:
        rep.lines.append(f"i in [{ranges.i_min}, {ranges.i_max}] instructions, bound {bound}")
        for i, (lo, hi) in sorted(ranges.j_bounds.items()):
            rep.lines.append(f"  i={i}: calls in [{lo}, {hi}]")


def _cmd_demo(args, rc, rep):
    book = _load_book(rc)
    shown = 0
    for k, entry in enumerate(book.entries):
        if shown >= args.count:
            break
        if entry.program.ninst < 2:
            continue
        try:
            res = interposing_library(entry, rc.config)
        except CapExhausted:
            continue
        shown += 1
        after = res.ts_after if res.ts_after is not None else f">{rc.config.max_witness_bits}"
        rep.results.append({"concept": f"c{k}", "program": _show(entry.program), "ts": res.ts_before, "ts_given_trie": res.ts_after, "fresh": [res.fresh.input, res.fresh.output], "trie_instructions": res.library.primitives[0].ninst})
        rep.lines.append(f"c{k} {_show(entry.program)}: TS {res.ts_before} -> {after} with a {res.library.primitives[0].ninst}-instruction trie")
    if shown < args.count:
        raise CapExhausted(f"only {shown} concepts could be demonstrated within the caps")


def _cmd_scan(args, rc, rep):
    book = _load_book(rc)
    found = nonmonotonicity_scan(book, rc.config, args.limit)
    for f in found:
        rep.results.append(f.__dict__ | {"a": f"c{f.a}", "b": f"c{f.b}"})
        rep.lines.append(f"c{f.a}, c{f.b}: K(a|b)={f.k_ab} < K(b|a)={f.k_ba} and TS(a|b)={f.ts_ab} > TS(b|a)={f.ts_ba}")
    if not found:
        rep.lines.append(f"no pair found among the first {args.limit} concepts")


def _cmd_curricula(args, rc, rep):
    if args.action == "count":
        if args.n < 1:
            raise UsageError("--n must be positive")
        n = curriculum_count(args.n)
        rep.results.append({"n": args.n, "count": n})
        rep.lines.append(str(n))
        return
    book = _load_book(rc)
    q = [_concept(book, c) for c in args.concepts]
    for pi in enumerate_curricula(q):
        rep.results.append({"curriculum": pi.text()})
        rep.lines.append(pi.text())


def _result_lines(res) -> list[str]:
    lines = [f"{res.curriculum.text()}  total {res.total_ts_bits} bits"]
    for s in res.per_step:
        given = ",".join(f"c{g}" for g in s.given) or "-"
        lines.append(f"  c{s.concept} | {given}: {s.ts_bits} bits  {s.witness.text if s.witness else ''}")
    return lines


def _cmd_search(args, rc, rep, kind):
    book = _load_book(rc)
    q = [_concept(book, c) for c in args.concepts]
    ev = Evaluator(book, rc.config)
    if kind == "isearch":
        res = i_search(q, book, rc.config, threads=rc.config.threads, evaluator=ev)
        if args.verify:
            bf = brute_force_optimum(q, book, evaluator=ev)
            if bf.total_ts_bits != res.total_ts_bits:
                raise RuntimeError(f"I-search total {res.total_ts_bits} differs from exhaustive {bf.total_ts_bits}")
    else:
        res = greedy_curriculum(q, book, evaluator=ev)
    rep.results.append(res.to_dict())
    rep.lines.extend(_result_lines(res))


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    start = time.perf_counter()
    try:
        rc = run_config(args)
        command = args.command + (f" {args.action}" if getattr(args, "action", None) else "")
        rep = Report(command, rc.config.digest())
        handlers = {
            "book": _cmd_book,
            "ts": _cmd_ts,
            "k": _cmd_k,
            "cond-ts": lambda a, r, p: _cmd_cond(a, r, p, "ts"),
            "cond-k": lambda a, r, p: _cmd_cond(a, r, p, "k"),
            "interpose": _cmd_interpose,
            "isafe": _cmd_isafe,
            "ranges": _cmd_ranges,
            "demo-interposition": _cmd_demo,
            "scan-nonmono": _cmd_scan,
            "curricula": _cmd_curricula,
            "isearch": lambda a, r, p: _cmd_search(a, r, p, "isearch"),
            "greedy": lambda a, r, p: _cmd_search(a, r, p, "greedy"),
        }
        handlers[args.command](args, rc, rep)
    except CapExhausted as exc:
        print(f"cap exhausted: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (UsageError, ValueError, InvalidProgram, BookMismatch, ConceptNotInBook, PreconditionViolation, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    rep.seconds = time.perf_counter() - start
    rep.emit(rc.output, sys.stdout)
    print(f"[{rep.command}] config {rep.digest}, {rep.seconds:.2f}s", file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
