"""Command-line front end.

chrg compile GRAMMAR              show the translated rules
chrg parse GRAMMAR --text "..."   run the parser, print the final store
chrg bench ...                    scaling measurements (see chrg.bench)

Grammars are .chrg files; a bare name (e.g. "arithmetic") picks the
bundled one.  Exit codes: 0 success, 1 failed derivation (no answer),
2 bad usage or grammar errors.
"""

from __future__ import annotations

import argparse
import os
import sys

from chrg import bench as bench_mod
from chrg.compiler import GrammarError, compile_grammar
from chrg.driver import (
    boundary_line, dump_store, maximal_unambiguous_sets, parse, render_snap,
    tokenize_text, trees,
)
from chrg.reader import ReaderError, read_term
from chrg.source import SourceError


def _load_source(spec):
    if os.path.exists(spec):
        with open(spec) as fh:
            return fh.read()
    bundled = os.path.join(os.path.dirname(__file__), "grammars",
                           spec + ".chrg")
    if os.path.exists(bundled):
        with open(bundled) as fh:
            return fh.read()
    raise FileNotFoundError("no grammar file %r and no bundled grammar "
                            "with that name" % spec)


def _compile(args):
    text = _load_source(args.grammar)
    passive = None
    if args.passive:
        passive = True
    elif args.no_passive:
        passive = False
    return compile_grammar(text, passive=passive, indexed=args.indexed,
                           compaction=True if args.compaction else None)


def cmd_compile(args):
    c = _compile(args)
    for d in c.diags:
        print(str(d), file=sys.stderr)
    print("%% passive optimization: %s, ambiguity indexing: %s, "
          "compaction: %s"
          % ("on" if c.passive else "off",
             "on" if c.indexed else "off",
             "on" if c.compaction else "off"))
    print(c.dump())
    return 0


def cmd_parse(args):
    c = _compile(args)
    for d in c.diags:
        print(str(d), file=sys.stderr)

    if args.tokens_file:
        with open(args.tokens_file) as fh:
            text = fh.read()
    else:
        text = args.text or ""
    words = tokenize_text(text)
    post = [read_term(t) for t in args.post or []]
    pre = [read_term(t) for t in args.pre or []]

    trace = None
    if args.trace:
        def trace(ev):
            heads = " + ".join(ev.get("heads", ()))
            print("%% %s %s [%s]" % (ev["event"], ev["rule"], heads),
                  file=sys.stderr)

    answers, _st = parse(c, words, post=post, pre=pre,
                         all_answers=args.all_answers or args.limit is not None,
                         limit=args.limit, trace=trace)
    if not answers:
        print("no answer: the derivation failed", file=sys.stderr)
        return 1

    for i, ans in enumerate(answers):
        if len(answers) > 1:
            print("%% answer %d" % (i + 1))
        if args.show_boundaries:
            print(boundary_line(words))
        print(dump_store(ans, None, show_tokens=args.show_tokens))
        if args.trees:
            functor = None if args.trees == "*" else args.trees
            for t in trees(ans, functor=functor, indexed=c.indexed):
                print(t.format())
        if args.unambiguous_sets:
            for group in maximal_unambiguous_sets(ans, indexed=c.indexed):
                print("{ %s }" % ", ".join(render_snap(s) for s in group))
        if i + 1 < len(answers):
            print()
    return 0


def main(argv=None):
    ap = argparse.ArgumentParser(
        prog="chrg",
        description="grammar compiler and bottom-up parser built on "
                    "committed-choice rewriting")
    sub = ap.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("grammar", help=".chrg file or bundled grammar name")
        p.add_argument("--passive", action="store_true",
                       help="force the passive optimization on")
        p.add_argument("--no-passive", action="store_true",
                       help="force the passive optimization off")
        p.add_argument("--indexed", action="store_true",
                       help="ambiguity indexing: one node per reading")
        p.add_argument("--compaction", action="store_true",
                       help="offer merge-or-separate choices for "
                            "unifiable assumed facts")

    pc = sub.add_parser("compile", help="show the translated rules")
    add_common(pc)
    pc.set_defaults(func=cmd_compile)

    pp = sub.add_parser("parse", help="parse text with a grammar")
    add_common(pp)
    pp.add_argument("--text", help="input text")
    pp.add_argument("--tokens-file", help="read input text from a file")
    pp.add_argument("--all-answers", action="store_true",
                    help="enumerate every finished derivation")
    pp.add_argument("--limit", type=int, help="cap on enumerated answers")
    pp.add_argument("--post", action="append", metavar="TERM",
                    help="constraint to add after the last word "
                         "(repeatable)")
    pp.add_argument("--pre", action="append", metavar="TERM",
                    help="constraint to add before the first word "
                         "(repeatable)")
    pp.add_argument("--trees", nargs="?", const="*", metavar="FUNCTOR",
                    help="print parse trees (optionally for one symbol)")
    pp.add_argument("--unambiguous-sets", action="store_true",
                    help="group phrases into maximal consistent sets")
    pp.add_argument("--show-boundaries", action="store_true",
                    help="print the word/boundary line")
    pp.add_argument("--show-tokens", action="store_true",
                    help="include token constraints in the store listing")
    pp.add_argument("--trace", action="store_true",
                    help="log rule applications to stderr")
    pp.set_defaults(func=cmd_parse)

    sub.add_parser("bench", help="scaling measurements",
                   add_help=False)

    if argv is None:
        argv = sys.argv[1:]
    if argv and argv[0] == "bench":
        return bench_mod.main(argv[1:])

    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (SourceError, GrammarError) as e:
        for d in e.diags:
            print(str(d), file=sys.stderr)
        return 2
    except (ReaderError, FileNotFoundError) as e:
        print(str(e), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
