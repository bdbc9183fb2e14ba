"""Shared helpers: term conversions, alpha-comparison of rule dumps,
store rendering, and the seeded random-grammar generators."""

from __future__ import annotations

import random
import re

import pytest

from chrg.compiler import compile_grammar, GrammarError
from chrg.kernel import (
    Atom, Struct, Var, K_GRAM, K_HOST, K_ABD, K_NABD, deref, render_term,
)
from chrg.source import parse_source


# ---------------------------------------------------------------------------
# term conversion: package terms <-> the oracle encoding in tests/oracles.py
# ---------------------------------------------------------------------------

def to_oracle(t):
    t = deref(t)
    ty = type(t)
    if ty is Var:
        return ("v", "_%d" % t.id)
    if ty is int:
        return t
    if ty is Atom:
        return ("a", t.name)
    return ("s", t.functor, tuple(to_oracle(a) for a in t.args))


def from_oracle(t, vars_=None):
    if vars_ is None:
        vars_ = {}
    if isinstance(t, int):
        return t
    if t[0] == "v":
        return vars_.setdefault(t[1], Var())
    if t[0] == "a":
        return Atom(t[1])
    return Struct(t[1], tuple(from_oracle(a, vars_) for a in t[2]))


def render_oracle(t, names=None):
    """Render an oracle term with canonical variable names (wildcarded)."""
    if isinstance(t, int):
        return str(t)
    if t[0] == "v":
        return "_"
    if t[0] == "a":
        return t[1]
    return "%s(%s)" % (t[1], ",".join(render_oracle(a) for a in t[2]))


def wildcard_render(t):
    """Render a package term with every variable as `_`."""
    t = deref(t)
    ty = type(t)
    if ty is Var:
        return "_"
    if ty is int:
        return str(t)
    if ty is Atom:
        return t.name
    return "%s(%s)" % (t.functor, ",".join(wildcard_render(a) for a in t.args))


# ---------------------------------------------------------------------------
# alpha-equivalence of dumped rules
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*|\d+|[^\sA-Za-z0-9_]")


def canon_rule(text):
    """Canonicalize one rule string: variables (capitalized or _-leading
    identifiers) renamed V1, V2, ... by first occurrence; `_` always fresh;
    whitespace dropped; the `name @` prefix dropped."""
    if "@" in text.split("\\")[0].split("<")[0]:
        text = text.split("@", 1)[1]
    out = []
    seen = {}
    for tok in _TOKEN_RE.findall(text):
        if tok == "_":
            out.append("V%d" % (len(seen) + 1))
            seen["_#%d" % len(out)] = True
        elif re.fullmatch(r"[A-Z_][A-Za-z0-9_]*", tok):
            if tok not in seen:
                seen[tok] = "V%d" % (len(seen) + 1)
            out.append(seen[tok])
        else:
            out.append(tok)
    return "".join(out)


def assert_rule_alpha_eq(got, expected):
    cg, ce = canon_rule(got), canon_rule(expected)
    assert cg == ce, "\n got:      %s\n expected: %s\n (canon %s vs %s)" % (
        got, expected, cg, ce)


# ---------------------------------------------------------------------------
# store rendering
# ---------------------------------------------------------------------------

def store_set(answer, kinds=(K_GRAM,), show_tokens=True):
    """Rendered set of live constraints: functor(args...) with boundary
    args included."""
    out = set()
    for (_cid, functor, args, kind, _timed, _apos) in answer.live(kinds):
        if not show_tokens and functor == "token":
            continue
        if args:
            out.add("%s(%s)" % (functor, ",".join(render_term(a)
                                                  for a in args)))
        else:
            out.add(functor)
    return out


def grammar_spans(answer, functor=None):
    """Set of (functor, from, to) for live grammar symbols, tokens left out."""
    out = set()
    for (_cid, f, args, kind, _t, _a) in answer.live((K_GRAM,)):
        if f == "token" or (functor and f != functor):
            continue
        out.add((f, deref(args[0]), deref(args[1])))
    return out


def compile_text(src, **kw):
    return compile_grammar(src, **kw)


# ---------------------------------------------------------------------------
# random word-grammar generator (shared by the least-model, disambiguation
# and unambiguity criteria) — emits both package source text and the rule
# IR understood by oracles.closure_oracle
# ---------------------------------------------------------------------------

SYMS = ["s0", "s1", "s2"]
WORDS = ["a", "b"]


def _gen_rule(rng, syms, allow_context, allow_gaps, body_sym):
    """One rule as (heads, body) in oracle IR; heads in text order."""
    heads = []

    def elems(section, lo, hi):
        n = rng.randint(lo, hi)
        for _ in range(n):
            gap = None
            if allow_gaps and heads:
                r = rng.random()
                if r < 0.15:
                    gap = "..."
                elif r < 0.25:
                    low = rng.randint(0, 2)
                    gap = (low, low + rng.randint(0, 2))
            if rng.random() < 0.45:
                heads.append((section, "tok", rng.choice(WORDS), gap))
            else:
                heads.append((section, "sym", rng.choice(syms), gap))

    if allow_context and rng.random() < 0.4:
        elems("left", 1, 2)
    core_at = len(heads)
    elems("core", 1, 3)
    # a symbol-producing core must be bounded: a gap before the first core
    # element is only representable (as the context's trailing gap) when a
    # left context exists
    if core_at == 0 and heads[0][3] is not None:
        sec, kind, name, _ = heads[0]
        heads[0] = (sec, kind, name, None)
    if allow_context and rng.random() < 0.4:
        elems("right", 1, 2)
    return {"heads": heads, "body": body_sym}


def rule_to_source(rule, op):
    parts = {"left": [], "core": [], "right": []}
    prev_section = None
    for (section, kind, name, gap) in rule["heads"]:
        # a gap between the left context and the core belongs to the
        # context part textually (the core itself must stay bounded)
        gap_seq = parts[prev_section] if (gap is not None
                                          and section == "core"
                                          and prev_section == "left") \
            else parts[section]
        if gap == "...":
            gap_seq.append("...")
        elif isinstance(gap, tuple):
            gap_seq.append("%d...%d" % gap)
        parts[section].append("[%s]" % name if kind == "tok" else name)
        prev_section = section
    txt = ", ".join(parts["core"])
    if parts["left"]:
        txt = ", ".join(parts["left"]) + " -\\ " + txt
    if parts["right"]:
        txt = txt + " /- " + ", ".join(parts["right"])
    return "%s %s %s." % (txt, op, rule["body"])


def rules_to_source(tag, syms, rules_with_ops):
    lines = [rule_to_source(r, op) for (r, op) in rules_with_ops]
    return ("handler %s.\ngrammar_symbols %s.\n%s\nend_of_CHRG_source.\n"
            % (tag, ", ".join("%s/0" % s for s in syms), "\n".join(lines)))


def gen_grammar(seed, n_rules_max=5, allow_context=True, allow_gaps=True,
                op="::>"):
    """Deterministic random grammar; returns (source_text, oracle_rules,
    syms, has_context).  Resamples internally until the package compiler
    accepts it (single-production cycles etc. are rejected there)."""
    attempt = 0
    while True:
        rng = random.Random("grammar/%d/%d" % (seed, attempt))
        syms = SYMS[: rng.randint(1, 3)]
        n_rules = rng.randint(1, n_rules_max)
        rules = [_gen_rule(rng, syms, allow_context, allow_gaps,
                           rng.choice(syms))
                 for _ in range(n_rules)]
        src = rules_to_source("g%d" % seed, syms, [(r, op) for r in rules])
        try:
            compile_grammar(src)
        except GrammarError:
            attempt += 1
            continue
        has_context = any(h[0] != "core" for rule in rules
                          for h in rule["heads"])
        return src, rules, syms, has_context


def all_inputs(max_len, words=WORDS):
    out = [[]]
    frontier = [[]]
    for _ in range(max_len):
        frontier = [s + [w] for s in frontier for w in words]
        out.extend(frontier)
    return out


@pytest.fixture
def rng():
    return random.Random(20260818)
