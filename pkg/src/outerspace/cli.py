"""Command-line front end.

    outerspace translen TREE WORD
    outerspace stretch T1 T2 [--brute L]
    outerspace distance T1 T2
    outerspace candidates TREE
    outerspace whitehead (primitive|simple) WORD --rank N
    outerspace pull-equiv T1 T2 --max-len L [--class primitive|simple|all]
    outerspace spectrum TREE --max-len L [--primitive-only]

Exit status: 0 on success, 1 on a parse or validation error, 2 when a
bounded lower-bound search finds no word with positive length.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from outerspace import boundary, stretch, whitehead
from outerspace.boundary import PulledTree, TreeFormatError
from outerspace.marked_graph import GraphFormatError, MarkedGraph
from outerspace.stretch import format_value
from outerspace.words import Word, WordSyntaxError, enumerate_cyclic_words

EXIT_OK, EXIT_INPUT, EXIT_INCONCLUSIVE = 0, 1, 2


class InputError(Exception):
    pass


def load_tree(path: str) -> MarkedGraph | PulledTree:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise InputError(f"{path}: cannot read file ({exc.strerror})") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    kind = doc.get("type") if isinstance(doc, dict) else None
    try:
        if kind == "marked_graph":
            return MarkedGraph.from_json(doc)
        if kind == "pulled_tree":
            return PulledTree.from_json(doc)
    except (GraphFormatError, TreeFormatError, WordSyntaxError) as exc:
        raise InputError(f"{path}: {exc}") from None
    raise InputError(f"{path}: type: expected 'marked_graph' or 'pulled_tree', got {kind!r}")


def parse_word(text: str, rank: int) -> Word:
    try:
        return Word(text, rank)
    except WordSyntaxError as exc:
        raise InputError(f"word: {exc}") from None


def _same_kind(t1, t2, verb: str):
    if type(t1) is not type(t2):
        raise InputError(f"{verb}: both trees must be of the same type")
    if t1.rank != t2.rank:
        raise InputError(f"rank: trees have ranks {t1.rank} and {t2.rank}")


class Output:
    def __init__(self, as_json: bool, decimal: bool):
        self.as_json = as_json
        self.decimal = decimal

    def num(self, x) -> str:
        return format_value(x, self.decimal)

    def emit(self, doc: dict, text: str) -> None:
        if self.as_json:
            print(json.dumps(doc, sort_keys=True, indent=2))
        else:
            print(text)


def cmd_translen(args, out: Output) -> int:
    T = load_tree(args.tree)
    w = parse_word(args.word, T.rank)
    value = T.translation_length(w)
    out.emit({"word": str(w), "length": out.num(value)}, out.num(value))
    return EXIT_OK


def cmd_stretch(args, out: Output) -> int:
    T1, T2 = load_tree(args.t1), load_tree(args.t2)
    _same_kind(T1, T2, "stretch")
    if isinstance(T1, MarkedGraph):
        report = (stretch.brute_force_stretch(T1, T2, args.brute) if args.brute
                  else stretch.stretch_factor(T1, T2))
    else:
        if not args.brute:
            raise InputError("--brute: required for boundary trees (only a lower bound is computable)")
        report = boundary.stretch_lower_bound(T1, T2, args.brute)
    out.emit(report.to_json(out.decimal), report.render(out.decimal))
    return EXIT_INCONCLUSIVE if report.witness is None else EXIT_OK


def cmd_distance(args, out: Output) -> int:
    T1, T2 = load_tree(args.t1), load_tree(args.t2)
    _same_kind(T1, T2, "distance")
    if not isinstance(T1, MarkedGraph):
        raise InputError("distance: only defined here for marked graphs")
    report = stretch.stretch_factor(T1.normalize_covolume(), T2.normalize_covolume())
    d = math.log(report.factor)
    out.emit({"distance": f"{d:.12g}", "lambda": out.num(report.factor), "witness": str(report.witness)},
             f"{d:.12g}  (lambda = {out.num(report.factor)}, witness {report.witness})")
    return EXIT_OK


def cmd_candidates(args, out: Output) -> int:
    T = load_tree(args.tree)
    if isinstance(T, MarkedGraph):
        cands = stretch.enumerate_candidates(T)
        rows = [{"shape": c.shape, "word": str(c.word), "edge_path": [T.edge_ref(e) for e in c.edge_path],
                 "length": out.num(T.translation_length(c.word))} for c in cands]
        text = "\n".join(f"{r['word']:<12} {r['shape']:<9} {r['length']:<8} {' '.join(r['edge_path'])}" for r in rows)
    else:
        cands = boundary.enumerate_candidates_boundary(T)
        rows = [{"shape": c.shape} for c in cands]
        text = "\n".join(r["shape"] for r in rows)
    out.emit({"candidates": rows}, text)
    return EXIT_OK


def cmd_whitehead(args, out: Output) -> int:
    if args.rank < 1:
        raise InputError("--rank: must be positive")
    w = parse_word(args.word, args.rank)
    if not w:
        raise InputError("word: the trivial word is neither primitive nor simple")
    cert = whitehead.certify(w, args.rank)
    if args.question == "primitive":
        verdict = cert.verdict == whitehead.PRIMITIVE
    else:
        verdict = cert.verdict != whitehead.NONSIMPLE
    moves = [str(m) for m in cert.move_sequence]
    doc = {"question": args.question, "verdict": verdict, "certificate": cert.to_json()}
    text = "\n".join([f"{args.question}: {'true' if verdict else 'false'}",
                      f"classification: {cert.verdict}",
                      f"moves: {' '.join(moves) if moves else '(none)'}",
                      f"reduced word: {cert.final_word}"])
    out.emit(doc, text)
    return EXIT_OK


def cmd_pull_equiv(args, out: Output) -> int:
    T1, T2 = load_tree(args.t1), load_tree(args.t2)
    _same_kind(T1, T2, "pull-equiv")
    if not isinstance(T1, PulledTree):
        raise InputError("pull-equiv: both trees must be pulled trees")
    if args.max_len < 1:
        raise InputError("--max-len: must be >= 1")
    sp = boundary.special_pull_equivalent(T1, T2)
    spec = boundary.spectrum_compare(T1, T2, args.cls, args.max_len)
    out.emit({"special_pull": sp.to_json(out.decimal), "spectrum": spec.to_json(out.decimal)},
             sp.render(out.decimal) + "\n" + spec.render(out.decimal))
    return EXIT_OK


def cmd_spectrum(args, out: Output) -> int:
    T = load_tree(args.tree)
    if args.max_len < 1:
        raise InputError("--max-len: must be >= 1")
    rows = []
    for w in enumerate_cyclic_words(T.rank, args.max_len):
        if args.primitive_only and not whitehead.is_primitive(w, T.rank):
            continue
        rows.append((w, T.translation_length(w)))
    out.emit({"max_len": args.max_len, "primitive_only": args.primitive_only,
              "lengths": [{"word": str(w), "length": out.num(v)} for w, v in rows]},
             "\n".join(f"{str(w):<{args.max_len}}  {out.num(v)}" for w, v in rows))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help="machine-readable output")
    common.add_argument("--decimal", action="store_true", default=argparse.SUPPRESS,
                        help="print numbers as decimals, not p/q")
    p = argparse.ArgumentParser(prog="outerspace", parents=[common],
                                description="Translation lengths, stretch factors and equivalences of F_N-trees.")
    sub = p.add_subparsers(dest="verb", required=True)

    s = sub.add_parser("translen", parents=[common], help="translation length of a word")
    s.add_argument("tree")
    s.add_argument("word")
    s.set_defaults(func=cmd_translen)

    s = sub.add_parser("stretch", parents=[common], help="stretch factor Lambda(T1, T2)")
    s.add_argument("t1")
    s.add_argument("t2")
    s.add_argument("--brute", type=int, metavar="L", help="maximise over all words of length <= L")
    s.set_defaults(func=cmd_stretch)

    s = sub.add_parser("distance", parents=[common], help="Lipschitz distance on covolume-1 representatives")
    s.add_argument("t1")
    s.add_argument("t2")
    s.set_defaults(func=cmd_distance)

    s = sub.add_parser("candidates", parents=[common], help="candidate loops of a tree")
    s.add_argument("tree")
    s.set_defaults(func=cmd_candidates)

    s = sub.add_parser("whitehead", parents=[common], help="decide primitivity or simplicity")
    s.add_argument("question", choices=["primitive", "simple"])
    s.add_argument("word")
    s.add_argument("--rank", type=int, required=True)
    s.set_defaults(func=cmd_whitehead)

    s = sub.add_parser("pull-equiv", parents=[common], help="special-pull equivalence and spectrum comparison")
    s.add_argument("t1")
    s.add_argument("t2")
    s.add_argument("--max-len", type=int, required=True)
    s.add_argument("--class", dest="cls", choices=boundary.CLASSES, default="primitive")
    s.set_defaults(func=cmd_pull_equiv)

    s = sub.add_parser("spectrum", parents=[common], help="table of translation lengths")
    s.add_argument("tree")
    s.add_argument("--max-len", type=int, required=True)
    s.add_argument("--primitive-only", action="store_true")
    s.set_defaults(func=cmd_spectrum)
    return p


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    out = Output(getattr(args, "json", False), getattr(args, "decimal", False))
    try:
        return args.func(args, out)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main() -> None:
    sys.exit(run())
