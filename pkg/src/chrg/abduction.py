"""Abductive interpretation: read a text, collect the facts that would
make it true.

A grammar whose rule bodies add abducible facts turns parsing into
explanation building: every finished derivation leaves behind the set of
abducibles it had to assume, pruned by the integrity rules (explicit
negation conflicts and any user rules deriving fail).

The other direction checks an explanation: `verification_grammar` moves
each rule's body abducibles into its head as context facts, so the
transformed grammar can only parse when those facts are already in the
store.  `admits` runs it with a candidate fact set posted up front;
`is_minimal` additionally rejects the set if dropping any single fact
still lets the goal phrase through (fact sets act monotonically here, so
single-drop checking suffices for conflict-free sets).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from chrg.kernel import K_ABD, K_NABD, Struct, mkatom, render_term, term_key
from chrg.driver import parse, roots
from chrg.source import (
    BodyCall, BodyDisj, ChrRule, Grammar, GrammarRule, HostElem, functor_of,
)


@dataclass
class Explanation:
    facts: list                 # abducible constraint snapshots
    difs: list                  # pending disequation pairs
    answer: object = field(repr=False, default=None)

    def fact_terms(self, indexed=False):
        out = []
        for snap in self.facts:
            args = snap[2][1:] if indexed else snap[2]
            out.append(Struct(snap[1], tuple(args)) if args
                       else mkatom(snap[1]))
        return out

    def render(self, indexed=False):
        return sorted(render_term(t) for t in self.fact_terms(indexed))


def explanations(compiled, words, post=(), limit=None, goal=None,
                 span="input", **kw):
    """Every answer's abducible set; with goal, only answers containing a
    live goal phrase over the span count."""
    answers, _st = parse(compiled, words, post=post, all_answers=True,
                         limit=limit, **kw)
    out = []
    for ans in answers:
        if goal is not None and not roots(ans, goal, span, compiled.indexed):
            continue
        out.append(Explanation(_fact_set(ans), list(ans.difs), ans))
    return out


def _fact_set(ans):
    """Live abducibles as a set: integrity-rule unifications can leave two
    copies of one fact in the store, and an explanation names it once."""
    facts, seen = [], set()
    for snap in ans.live((K_ABD, K_NABD)):
        key = (snap[1],) + tuple(term_key(a) for a in snap[2])
        if key not in seen:
            seen.add(key)
            facts.append(snap)
    return facts


# ---------------------------------------------------------------------------
# the checking direction
# ---------------------------------------------------------------------------

def verification_grammar(g):
    """Copy of the grammar with body abducibles turned into head context
    facts: rules then demand the facts instead of assuming them."""
    out = Grammar(handler=g.handler,
                  symbol_decls=dict(g.symbol_decls),
                  constraint_decls=dict(g.constraint_decls),
                  abducible_decls=dict(g.abducible_decls),
                  passive_override=g.passive_override,
                  compaction=False)
    for rule in g.rules:
        if isinstance(rule, GrammarRule):
            moved, body = _split_abducibles(g, rule.body)
            out.rules.append(GrammarRule(
                op=rule.op, left=rule.left,
                core=list(rule.core) + [HostElem(t, kept=True)
                                        for t in moved],
                right=rule.right, guard=rule.guard, body=body,
                name=rule.name, line=rule.line))
        else:
            moved, body = _split_abducibles(g, rule.body)
            out.rules.append(ChrRule(
                op=rule.op,
                heads=list(rule.heads) + [(t, True) for t in moved],
                guard=rule.guard, body=body,
                name=rule.name, line=rule.line))
    return out


def _split_abducibles(g, items):
    moved, kept = [], []
    for item in items or []:
        if isinstance(item, BodyCall):
            kind = g.declared_kind(*functor_of(item.term))
            if kind in ("abducible", "abducible_neg"):
                moved.append(item.term)
                continue
        if isinstance(item, BodyDisj):
            # leave disjunctions alone: moving per-branch assumptions into
            # one head would conflate the branches
            kept.append(item)
            continue
        kept.append(item)
    return moved, kept


def admits(compiled, words, facts, goal=None, span="input", **kw):
    """Does the fact set let the (verification) grammar derive the goal
    phrase over the words?"""
    answers, _st = parse(compiled, words, pre=facts, all_answers=True, **kw)
    for ans in answers:
        if goal is None or roots(ans, goal, span, compiled.indexed):
            return True
    return False


def is_minimal(compiled, words, facts, goal=None, span="input", **kw):
    facts = list(facts)
    if not admits(compiled, words, facts, goal, span, **kw):
        return False
    for i in range(len(facts)):
        if admits(compiled, words, facts[:i] + facts[i + 1:], goal, span,
                  **kw):
            return False
    return True


@dataclass
class CompetenceReport:
    sound: bool     # facts survive the integrity rules and derive the goal
    minimal: bool   # and no single fact can be dropped

    @property
    def ok(self):
        return self.sound and self.minimal


def check_competence(compiled, words, facts, goal=None, span="input", **kw):
    """Judge a candidate explanation against the verification grammar:
    sound when posting the facts still derives the goal phrase (so the
    facts are consistent under the integrity rules and strong enough),
    minimal when removing any one fact breaks that."""
    facts = list(facts)
    sound = admits(compiled, words, facts, goal, span, **kw)
    minimal = sound and not any(
        admits(compiled, words, facts[:i] + facts[i + 1:], goal, span, **kw)
        for i in range(len(facts)))
    return CompetenceReport(sound=sound, minimal=minimal)
