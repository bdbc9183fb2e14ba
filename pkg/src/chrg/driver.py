"""Running a compiled grammar over an input word sequence.

Words enter the derivation one at a time, left to right: each word's
token constraint is inserted and processed to quiescence before the next
is touched, so earlier parsing decisions are made on the prefix alone.
The agenda is seeded with one lazy insertion goal per token (and any
extra constraints to post after the last word); pending insertions ride
along in choice-point snapshots, which keeps answer enumeration sound
when a disjunction splits the derivation mid-sentence.

A finished derivation is frozen into an Answer.  From its application
log this module rebuilds parse trees (every recorded application of a
rule is one way of deriving its produced constraint), counts distinct
trees, groups mutually consistent phrases into maximal unambiguous
sets, and pretty-prints the final store.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import product

from chrg.kernel import (
    Answer, ASSUMPTION_FUNCTORS, Atom, DerivationState, K_GRAM, K_HOST,
    Struct, deref, mkatom, render_term,
)

_WORD_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_']*|\d+|[^\sA-Za-z0-9_]")


def tokenize_text(text):
    """Split text into words: alphabetic runs (lower-cased), integers,
    and single punctuation marks."""
    out = []
    for m in _WORD_RE.finditer(text):
        s = m.group(0)
        if s.isdigit():
            out.append(int(s))
        else:
            out.append(s.lower())
    return out


def _classified_goal(program, term, position):
    t = deref(term)
    if type(t) is Struct and len(t.args) == 1 \
            and t.functor in ASSUMPTION_FUNCTORS:
        kind, timed = ASSUMPTION_FUNCTORS[t.functor]
        return ("assume", kind, timed, t.args[0],
                position if timed else None)
    if type(t) is Atom:
        f, args = t.name, ()
    elif type(t) is Struct:
        f, args = t.functor, t.args
    else:
        raise ValueError("cannot post %r" % (t,))
    kind = program.kind_of_functor.get((f, len(args)), K_HOST)
    return ("add", f, args, kind, None, None)


def parse(compiled, words, post=(), pre=(), all_answers=False, limit=None,
          trace=None, max_steps=2_000_000):
    """Run the grammar over words; returns (answers, state).

    words: list of strings/ints.  pre/post: extra constraint terms
    inserted before the first and after the last word.  With all_answers,
    every finished derivation is collected (bounded by limit); otherwise
    just the first."""
    program = compiled.program
    st = DerivationState(program, input_length=len(words),
                         indexed=compiled.indexed, trace=trace,
                         max_steps=max_steps)
    goals = []
    for t in pre:
        goals.append(_classified_goal(program, t, 0))
    for i, w in enumerate(words):
        wt = w if isinstance(w, int) else mkatom(w)
        goals.append(("add", "token", (i, i + 1, wt), K_GRAM, None, None))
    for t in post:
        goals.append(_classified_goal(program, t, len(words)))
    st.agenda.extend(reversed(goals))
    if all_answers:
        answers = st.run_all(Answer, limit=limit)
    else:
        answers = [Answer(st)] if st.run() else []
    return answers, st


def parse_text(compiled, text, **kw):
    return parse(compiled, tokenize_text(text), **kw)


# ---------------------------------------------------------------------------
# snapshots: spans and rendering
# ---------------------------------------------------------------------------

def snap_span(snap, indexed=False):
    """(from, to) word boundaries of a constraint snapshot, or None."""
    _, functor, args, kind, _, _ = snap
    if kind != K_GRAM or len(args) < 2:
        return None
    a0, a1 = deref(args[0]), deref(args[1])
    if type(a0) is int and type(a1) is int:
        return (a0, a1)
    return None


def snap_attrs(snap, indexed=False):
    """Attribute arguments of a grammar-symbol snapshot (boundaries and,
    in indexed mode, the node argument stripped)."""
    args = snap[2]
    base = 2 + (1 if indexed and snap[1] != "token" else 0)
    return args[base:]


def render_snap(snap):
    _, functor, args, _, _, _ = snap
    if not args:
        return functor
    return render_term(Struct(functor, tuple(args)))


# ---------------------------------------------------------------------------
# parse trees from the application log
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Tree:
    label: str
    cid: int
    children: tuple = ()

    def format(self, indent=0):
        lines = ["%s%s" % ("  " * indent, self.label)]
        for c in self.children:
            lines.append(c.format(indent + 1))
        return "\n".join(lines)

    def leaves(self):
        if not self.children:
            return [self]
        out = []
        for c in self.children:
            out.extend(c.leaves())
        return out


def _productions(answer):
    by_prod = {}
    for (rid, child_cids, prod) in answer.applog:
        by_prod.setdefault(prod, []).append((rid, child_cids))
    return by_prod


def _snap_index(answer):
    return {s[0]: s for s in answer.constraints + answer.hidden}


def roots(answer, functor=None, span=None, indexed=False):
    """Live grammar symbols acting as tree roots, optionally filtered by
    functor and exact span.  span='input' selects whole-input symbols."""
    if span == "input":
        span = (0, answer.input_length)
    out = []
    for snap in answer.constraints:
        if snap[3] != K_GRAM or snap[1] == "token":
            continue
        if functor is not None and snap[1] != functor:
            continue
        if span is not None and snap_span(snap, indexed) != span:
            continue
        out.append(snap)
    return out


def trees_for(answer, cid, _by_prod=None, _snaps=None, _path=None):
    """Every distinct derivation tree of the constraint cid."""
    by_prod = _by_prod if _by_prod is not None else _productions(answer)
    snaps = _snaps if _snaps is not None else _snap_index(answer)
    path = _path if _path is not None else frozenset()
    snap = snaps.get(cid)
    label = render_snap(snap) if snap is not None else "?%d" % cid
    prods = by_prod.get(cid)
    if not prods or cid in path:
        return [Tree(label, cid)]
    path = path | {cid}
    out = []
    for (rid, child_cids) in prods:
        if cid in child_cids:
            continue
        child_alts = [trees_for(answer, k, by_prod, snaps, path)
                      for k in child_cids]
        if not child_cids:
            out.append(Tree(label, cid))
            continue
        for combo in product(*child_alts):
            out.append(Tree(label, cid, tuple(combo)))
    return out or [Tree(label, cid)]


def trees(answer, functor=None, span="input", indexed=False):
    """All parse trees rooted at matching live symbols."""
    by_prod = _productions(answer)
    snaps = _snap_index(answer)
    out = []
    for snap in roots(answer, functor, span, indexed):
        out.extend(trees_for(answer, snap[0], by_prod, snaps))
    return out


def count_trees(answer, functor=None, span="input", indexed=False):
    """Number of distinct derivation trees over matching roots (memoized,
    no materialization)."""
    by_prod = _productions(answer)
    memo = {}

    def count(cid, path):
        if cid in memo:
            return memo[cid]
        prods = by_prod.get(cid)
        if not prods or cid in path:
            return 1
        path = path | {cid}
        total = 0
        for (rid, child_cids) in prods:
            if cid in child_cids:
                continue
            n = 1
            for k in child_cids:
                n *= count(k, path)
            total += n
        total = total or 1
        memo[cid] = total
        return total

    return sum(count(s[0], frozenset())
               for s in roots(answer, functor, span, indexed))


# ---------------------------------------------------------------------------
# maximal unambiguous sets
# ---------------------------------------------------------------------------

def _reachable(by_prod, top, goal):
    """goal participates in some recorded derivation of top."""
    seen = set()
    stack = [top]
    while stack:
        cid = stack.pop()
        if cid == goal:
            return True
        if cid in seen:
            continue
        seen.add(cid)
        for (_rid, child_cids) in by_prod.get(cid, ()):
            stack.extend(child_cids)
    return False


def maximal_unambiguous_sets(answer, indexed=False):
    """Group live phrases into maximal sets of mutually consistent ones.

    Two phrases are consistent when their spans do not properly overlap,
    and a phrase containing another (equal spans included) is consistent
    with it only when the inner one takes part in a derivation of the
    outer.  Returns a list of lists of constraint snapshots, each sorted
    by (from, to, functor); the list itself is sorted for determinism."""
    items = [s for s in answer.constraints
             if s[3] == K_GRAM and s[1] != "token"
             and snap_span(s, indexed) is not None]
    by_prod = _productions(answer)

    def compatible(a, b):
        (i, j) = snap_span(a, indexed)
        (k, l) = snap_span(b, indexed)
        if j <= k or l <= i:
            return True
        if i <= k and l <= j:
            return _reachable(by_prod, a[0], b[0])
        if k <= i and j <= l:
            return _reachable(by_prod, b[0], a[0])
        return False

    n = len(items)
    adj = [set() for _ in range(n)]
    for x in range(n):
        for y in range(x + 1, n):
            if compatible(items[x], items[y]):
                adj[x].add(y)
                adj[y].add(x)

    cliques = []

    def bron(r, p, x):
        if not p and not x:
            cliques.append(sorted(r))
            return
        pivot = max(p | x, key=lambda v: len(adj[v])) if (p or x) else None
        for v in sorted(p - (adj[pivot] if pivot is not None else set())):
            bron(r | {v}, p & adj[v], x & adj[v])
            p = p - {v}
            x = x | {v}

    bron(set(), set(range(n)), set())

    def sort_key(idx):
        s = items[idx]
        return (snap_span(s, indexed), s[1], render_snap(s))

    out = [[items[i] for i in sorted(cl, key=sort_key)] for cl in cliques]
    out.sort(key=lambda group: [sort_key(items.index(s)) for s in group])
    return out


# ---------------------------------------------------------------------------
# store presentation
# ---------------------------------------------------------------------------

def boundary_line(words):
    parts = ["<0>"]
    for i, w in enumerate(words):
        parts.append(str(w))
        parts.append("<%d>" % (i + 1))
    return " ".join(parts)


def dump_store(answer, words=None, show_tokens=False):
    """Text listing of the final store: optional boundary-annotated input
    line, then live constraints sorted by functor and span."""
    lines = []
    if words is not None:
        lines.append(boundary_line(words))
    snaps = [s for s in answer.constraints if show_tokens or s[1] != "token"]

    def key(s):
        span = snap_span(s) or (-1, -1)
        return (s[1], span[0], span[1], render_snap(s))

    for s in sorted(snaps, key=key):
        lines.append(render_snap(s))
    for (a, b) in answer.difs:
        lines.append("dif(%s,%s)" % (render_term(a), render_term(b)))
    return "\n".join(lines)
