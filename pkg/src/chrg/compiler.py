"""Translation of grammar rules into runtime rewrite rules.

Every grammar symbol gets two word-boundary arguments prepended; a
terminal list item [w] becomes token(From, To, w).  Elements of one rule
head share boundary variables at their junctions; a gap between two
elements lowers to boundary inequations (`...` gives End1 =< Start2, a
bounded gap i...j adds both End1+i =< Start2 and Start2 =< End1+j); the
`all` element pins its span to the whole input.  A parallel match gives
each operand sequence the same outer boundaries.  The rule body's
grammar symbol spans the core section.  Simplification removes the core
(kept contexts become the kept part of the runtime rule); `!` keeps a
marked core element.

Abducible declarations add, per abducible f/n: the functor f_/n for its
explicit negation and the integrity rule  f(Xs), f_(Xs) ==> fail.  With
compaction on, a pairwise merge rule per abducible offers X=Y ; dif(X,Y)
for every untried unifiable pair.

Ambiguity indexing threads a node-identity argument through grammar
symbols (after the boundaries) and abducibles (in front); plain rewrite
rules then require all indexed heads to share one node.  A rule building
a node copies the parent nodes' abducibles into the new node first.

Activation marking (the passive optimization): with the option on, only
the rightmost boundary-bearing head of core + right context stays
active, so a rule is tried only when its last constituent arrives.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from chrg.kernel import (
    Atom, Struct, Var, K_ABD, K_GRAM, K_HOST, K_HYP_INT, K_HYP_LIN, K_EXP,
    K_NABD, Program, RtHead, RtRule, deref, render_term,
)
from chrg import source as src
from chrg.source import (
    AllElem, BodyAssume, BodyCall, BodyDisj, BodyFail, BodyTrue, Diag,
    GapElem, Grammar, GrammarRule, ChrRule, HostElem, ParallelElem,
    SourceError, SymbolElem, Terminal, functor_of, validate,
)

ASSUME_KIND = {"=+": K_HYP_LIN, "=*": K_HYP_INT, "=-": K_EXP,
               "+": K_HYP_LIN, "*": K_HYP_INT, "-": K_EXP}

CMP_OPS = ("=", "\\=", "==", "\\==", "=<", "<", ">", ">=")


class GrammarError(SourceError):
    pass


@dataclass
class CompiledGrammar:
    grammar: Grammar
    program: Program
    rules: list
    passive: bool
    indexed: bool
    compaction: bool
    diags: list = field(default_factory=list)

    def dump(self):
        return dump_rules(self.rules)


def compile_grammar(g, passive=None, indexed=False, compaction=None):
    """Compile a Grammar (or source text) into an executable program."""
    if isinstance(g, str):
        g = src.parse_source(g)
    errors, warnings = validate(g)
    if errors:
        raise GrammarError(errors + warnings)

    if compaction is None:
        compaction = g.compaction

    rules = []
    rid = 0
    for rule in g.rules:
        for expanded in _expand_contexts(rule):
            rid += 1
            if isinstance(expanded, GrammarRule):
                rules.append(_compile_grammar_rule(g, expanded, rid))
            else:
                rules.append(_compile_chr_rule(g, expanded, rid))

    # generated rules for abducibles: conflict with the explicit negation,
    # then the optional pairwise merge
    for (f, n) in sorted(g.abducible_decls):
        rid += 1
        rules.append(_conflict_rule(f, n, rid))
        if compaction:
            rid += 1
            rules.append(_compaction_rule(f, n, rid))

    if indexed:
        rules = [_index_rule(r) for r in rules]

    # decide the passive optimization and mark activation
    all_prop = all(r.op in ("::>", "==>") for r in g.rules) if g.rules else False
    has_left = any(isinstance(r, GrammarRule) and r.left for r in g.rules)
    if g.passive_override is not None:
        passive_on = g.passive_override
    elif passive is not None:
        passive_on = passive
    else:
        passive_on = all_prop
    if passive_on and (not all_prop or has_left):
        warnings.append(Diag(
            "warning", 0,
            "passive optimization with left contexts or removals can skip "
            "rule applications"))
    _mark_activation(g, rules, passive_on)

    kind_table = _kind_table(g, indexed)
    program = Program(rules, kind_table)
    return CompiledGrammar(grammar=g, program=program, rules=rules,
                           passive=passive_on, indexed=indexed,
                           compaction=compaction, diags=warnings)


def _kind_table(g, indexed):
    extra = 1 if indexed else 0
    table = {("token", 3): K_GRAM}
    for (f, n) in g.symbol_decls:
        table[(f, n + 2 + extra)] = K_GRAM
    for (f, n) in g.constraint_decls:
        table[(f, n)] = K_HOST
    for (f, n) in g.abducible_decls:
        table[(f, n + extra)] = K_ABD
        table[(f + "_", n + extra)] = K_NABD
    return table


# ---------------------------------------------------------------------------
# context disjunction expansion: cartesian product, left varies slower
# ---------------------------------------------------------------------------

def _expand_contexts(rule):
    if not isinstance(rule, GrammarRule):
        return [rule]
    lefts = _alts(rule.left)
    rights = _alts(rule.right)
    if len(lefts) == 1 and len(rights) == 1:
        return [rule]
    out = []
    for rt in rights:
        for lt in lefts:
            out.append(GrammarRule(op=rule.op, left=lt, core=rule.core,
                                   right=rt, guard=rule.guard, body=rule.body,
                                   name=rule.name, line=rule.line))
    return out


def _alts(context):
    if len(context) == 1 and isinstance(context[0], tuple) \
            and context[0][0] == "alts":
        return context[0][1]
    return [context]


# ---------------------------------------------------------------------------
# grammar rule translation
# ---------------------------------------------------------------------------

class _Threader:
    """Walks an element chain left to right, assigning shared boundary
    variables at junctions and lowering gaps to guards."""

    def __init__(self, g, propagation):
        self.g = g
        self.propagation = propagation
        self.heads = []            # RtHead
        self.head_meta = []        # (section, is_boundary)
        self.bounds = []           # (section, start_var, end_var) per element
        self.guards = []
        self.counter = [0]

    def fresh(self):
        self.counter[0] += 1
        return Var("N%d" % self.counter[0])

    def gap_guards(self, left, right, gap):
        if gap.lo is None:
            self.guards.append(("cmp", "=<", left, right))
        else:
            self.guards.append(("cmp", "=<",
                                Struct("+", (left, gap.lo)), right))
            self.guards.append(("cmp", "=<", right,
                                Struct("+", (left, gap.hi))))

    def kept(self, section, elem):
        if self.propagation or section != "core":
            return True
        return bool(getattr(elem, "kept", False))

    def walk(self, chain, start=None, end=None, record_bounds=True):
        """Thread elements; start/end anchor the outer boundaries when the
        chain is a parallel-match operand."""
        current = start
        pending_gap = None
        # the element whose end is pinned to `end`: the last non-host one,
        # and only if it is boundary-bearing (a trailing gap stretches to
        # `end` through its guards instead)
        non_host = [i for i, (_s, e) in enumerate(chain)
                    if not isinstance(e, HostElem)]
        tail = non_host[-1] if non_host else None

        for i, (section, elem) in enumerate(chain):
            if isinstance(elem, GapElem):
                pending_gap = elem
                continue
            if isinstance(elem, HostElem):
                f = functor_of(elem.term)
                kind = {None: K_HOST, "symbol": K_GRAM, "constraint": K_HOST,
                        "abducible": K_ABD, "abducible_neg": K_NABD}[
                    self.g.declared_kind(*f)]
                self.heads.append(RtHead(
                    f[0], _term_args(elem.term),
                    kept=self.kept(section, elem), active=True, kind=kind))
                self.head_meta.append((section, False))
                continue
            # boundary-bearing element
            if pending_gap is not None:
                s = self.fresh()
                if current is not None:
                    self.gap_guards(current, s, pending_gap)
                pending_gap = None
            elif current is None:
                s = self.fresh()
            else:
                s = current
            if end is not None and i == tail:
                e_var = end
            else:
                e_var = self.fresh()
            self.emit(section, elem, s, e_var, record_bounds)
            if record_bounds:
                self.bounds.append((section, s, e_var))
            current = e_var
        if pending_gap is not None and end is not None and current is not None:
            self.gap_guards(current, end, pending_gap)

    def emit(self, section, elem, s, e, record_bounds):
        if isinstance(elem, Terminal):
            self.heads.append(RtHead(
                "token", (s, e, elem.word),
                kept=self.kept(section, elem), active=True, kind=K_GRAM))
            self.head_meta.append((section, True))
            return
        if isinstance(elem, SymbolElem):
            self.heads.append(RtHead(
                elem.functor, (s, e) + tuple(elem.args),
                kept=self.kept(section, elem), active=True, kind=K_GRAM))
            self.head_meta.append((section, True))
            return
        if isinstance(elem, AllElem):
            # spans the whole input: no store constraint, two anchors
            self.guards.append(("cmp", "=", s, 0))
            self.guards.append(("input_length", e))
            return
        if isinstance(elem, ParallelElem):
            # every operand sequence stretches between the same outer bounds
            for opnd in elem.operands:
                sub = [(section, x) for x in opnd]
                self.walk(sub, start=s, end=e, record_bounds=False)
            return
        raise ValueError("unexpected element %r" % (elem,))


def _term_args(t):
    t = deref(t)
    if type(t) is Struct:
        return t.args
    return ()


def _compile_grammar_rule(g, rule, rid):
    th = _Threader(g, propagation=(rule.op == "::>"))
    chain = [("left", e) for e in rule.left] \
        + [("core", e) for e in rule.core] \
        + [("right", e) for e in rule.right]
    th.walk(chain)

    # the produced symbol spans the core
    core_spans = [(s, e) for (sec, s, e) in th.bounds if sec == "core"]
    span = (core_spans[0][0], core_spans[-1][1]) if core_spans else None

    guards = list(th.guards) + [_compile_guard_atom(a) for a in rule.guard]
    guards = [x for x in guards if x != ("true",)]
    body = _sym_last(_compile_body(g, rule.body, span))
    rt = RtRule(rid, rule.name or "r%d" % rid, th.heads, guards, body)
    rt.source = rule
    rt.span_vars = span
    rt.child_positions = tuple(
        i for i, (sec, isb) in enumerate(th.head_meta)
        if sec == "core" and isb)
    return rt


def _compile_guard_atom(a):
    f = functor_of(a)
    if f == ("true", 0):
        return ("true",)
    if f == ("fail", 0):
        return ("fail",)
    if f == ("integer", 1):
        return ("integer", deref(a).args[0])
    if f and f[0] in CMP_OPS and f[1] == 2:
        t = deref(a)
        return ("cmp", f[0], t.args[0], t.args[1])
    # validation rejects anything else; never-true keeps the rule inert
    return ("fail",)


def _compile_body(g, items, span):
    out = []
    for item in items:
        if isinstance(item, BodyTrue):
            out.append(("true",))
        elif isinstance(item, BodyFail):
            out.append(("fail",))
        elif isinstance(item, BodyAssume):
            out.append(("assume", ASSUME_KIND[item.op], item.timed,
                        item.payload))
        elif isinstance(item, BodyDisj):
            out.append(("disj", [_compile_body(g, b, span)
                                 for b in item.branches]))
        elif isinstance(item, BodyCall):
            f = functor_of(item.term)
            args = _term_args(item.term)
            if f[0] == "=" and f[1] == 2:
                out.append(("eq", args[0], args[1]))
            elif f[0] == "dif" and f[1] == 2:
                out.append(("dif", args[0], args[1]))
            else:
                kind = g.declared_kind(*f)
                if kind == "symbol":
                    if span is None:
                        raise GrammarError([Diag(
                            "error", 0,
                            "rule with no boundary-bearing core cannot "
                            "build %s/%d" % f)])
                    out.append(("sym", f[0],
                                (span[0], span[1]) + tuple(args), K_GRAM))
                elif kind == "abducible":
                    out.append(("sym", f[0], tuple(args), K_ABD))
                elif kind == "abducible_neg":
                    out.append(("sym", f[0], tuple(args), K_NABD))
                else:
                    out.append(("sym", f[0], tuple(args), K_HOST))
        else:
            raise ValueError("unknown body item %r" % (item,))
    return out


def _sym_last(items):
    """Move the produced grammar symbol to the end of (its branch of) the
    body, so a node's facts are all in place before the symbol's
    activation cascades into rules building on it."""
    front, syms = [], []
    for it in items:
        if it[0] == "sym" and it[3] == K_GRAM:
            syms.append(it)
        elif it[0] == "disj":
            front.append(("disj", [_sym_last(b) for b in it[1]]))
        else:
            front.append(it)
    return front + syms


# ---------------------------------------------------------------------------
# plain rewrite rules
# ---------------------------------------------------------------------------

def _compile_chr_rule(g, rule, rid):
    heads = []
    for (h, kept) in rule.heads:
        f = functor_of(h)
        kind_name = g.declared_kind(*f)
        kind = {None: K_HOST, "symbol": K_GRAM, "constraint": K_HOST,
                "abducible": K_ABD, "abducible_neg": K_NABD}[kind_name]
        if f[0] == "token":
            kind = K_GRAM
        heads.append(RtHead(f[0], _term_args(h), kept=kept, active=True,
                            kind=kind))
    guards = [_compile_guard_atom(a) for a in rule.guard]
    guards = [x for x in guards if x != ("true",)]
    body = _compile_body(g, rule.body, None)
    rt = RtRule(rid, rule.name or "r%d" % rid, heads, guards, body)
    rt.source = rule
    return rt


def _conflict_rule(f, n, rid):
    xs = tuple(Var("X%d" % i) for i in range(n))
    heads = [RtHead(f, xs, kept=True, active=True, kind=K_ABD),
             RtHead(f + "_", xs, kept=True, active=True, kind=K_NABD)]
    return RtRule(rid, "%s_conflict" % f, heads, [], [("fail",)])


def _compaction_rule(f, n, rid):
    xs = tuple(Var("X%d" % i) for i in range(n))
    ys = tuple(Var("Y%d" % i) for i in range(n))
    heads = [RtHead(f, xs, kept=True, active=True, kind=K_ABD),
             RtHead(f, ys, kept=True, active=True, kind=K_ABD)]
    tx = Struct("$t", xs) if xs else Atom("$t")
    ty = Struct("$t", ys) if ys else Atom("$t")
    guard = [("compactable", 0, 1, 0)]
    body = [("disj", [[("eq", tx, ty)], [("dif", tx, ty)]])]
    rule = RtRule(rid, "%s_compaction" % f, heads, guard, body)
    rule.compaction_pair = (0, 1)
    return rule


# ---------------------------------------------------------------------------
# ambiguity indexing
# ---------------------------------------------------------------------------

def _index_rule(rule):
    is_grammar = isinstance(rule.source, GrammarRule)
    heads = []
    parents = []
    shared = Var("Node")
    for h in rule.heads:
        if h.kind == K_GRAM and h.functor != "token":
            iv = Var("I%d" % len(parents)) if is_grammar else shared
            if is_grammar:
                parents.append(iv)
            heads.append(RtHead(h.functor,
                                h.args[:2] + (iv,) + h.args[2:],
                                h.kept, h.active, h.kind))
        elif h.kind in (K_ABD, K_NABD):
            iv = Var("I%d" % len(parents)) if is_grammar else shared
            if is_grammar:
                parents.append(iv)
            heads.append(RtHead(h.functor, (iv,) + h.args,
                                h.kept, h.active, h.kind))
        else:
            heads.append(h)

    builds_node = is_grammar and _adds_indexed(rule.body)
    ivar = Var("NewNode") if builds_node else None
    body = _index_body(rule.body, ivar if builds_node else shared)

    out = RtRule(rule.id, rule.name, heads, rule.guard, body)
    out.source = rule.source
    out.span_vars = rule.span_vars
    out.child_positions = rule.child_positions
    out.compaction_pair = rule.compaction_pair
    if builds_node:
        out.index_var = ivar
        out.parent_index_vars = tuple(parents)
        out.copies_context = True
    return out


def _adds_indexed(items):
    for it in items:
        if it[0] == "sym" and it[3] in (K_GRAM, K_ABD, K_NABD):
            return True
        if it[0] == "disj" and any(_adds_indexed(b) for b in it[1]):
            return True
    return False


def _index_body(items, ivar):
    out = []
    for it in items:
        if it[0] == "sym" and it[3] == K_GRAM and it[1] != "token":
            out.append(("sym", it[1], it[2][:2] + (ivar,) + it[2][2:], it[3]))
        elif it[0] == "sym" and it[3] in (K_ABD, K_NABD):
            out.append(("sym", it[1], (ivar,) + it[2], it[3]))
        elif it[0] == "disj":
            out.append(("disj", [_index_body(b, ivar) for b in it[1]]))
        else:
            out.append(it)
    return out


# ---------------------------------------------------------------------------
# activation marking
# ---------------------------------------------------------------------------

def _mark_activation(g, rules, passive_on):
    for rule in rules:
        if rule.compaction_pair is not None:
            rule.heads[rule.compaction_pair[0]].active = True
            rule.heads[rule.compaction_pair[1]].active = False
            continue
        if not passive_on or not isinstance(rule.source, GrammarRule):
            for h in rule.heads:
                h.active = True
            continue
        # keep only store-constraint heads and the rightmost boundary head
        # of core + right context active
        meta = _rule_meta(g, rule)
        last = None
        for i, (section, is_boundary) in enumerate(meta):
            if is_boundary and section in ("core", "right"):
                last = i
        for i, h in enumerate(rule.heads):
            section, is_boundary = meta[i]
            h.active = (not is_boundary) or (i == last)


def _rule_meta(g, rule):
    src_rule = rule.source
    th = _Threader(g, propagation=(src_rule.op == "::>"))
    chain = [("left", e) for e in src_rule.left] \
        + [("core", e) for e in src_rule.core] \
        + [("right", e) for e in src_rule.right]
    th.walk(chain)
    return th.head_meta


# ---------------------------------------------------------------------------
# debug listing
# ---------------------------------------------------------------------------

def dump_rules(rules):
    lines = []
    for r in rules:
        kept = [h for h in r.heads if h.kept]
        removed = [h for h in r.heads if not h.kept]
        if not removed:
            head = _pp_heads(r.heads)
            op = "==>"
        elif not kept:
            head = _pp_heads(removed)
            op = "<=>"
        else:
            head = "%s \\ %s" % (_pp_heads(kept), _pp_heads(removed))
            op = "<=>"
        passive = [h.functor for h in r.heads if not h.active]
        guard = ""
        if r.guard:
            guard = ", ".join(_pp_guard(gx) for gx in r.guard) + " | "
        body = ", ".join(_pp_body_item(it) for it in r.body) or "true"
        note = ""
        if passive:
            note = "   %% passive: %s" % ", ".join(passive)
        lines.append("%s @ %s %s %s%s.%s"
                     % (r.name, head, op, guard, body, note))
    return "\n".join(lines)


def _pp_heads(heads):
    return ", ".join(
        h.functor if not h.args
        else "%s(%s)" % (h.functor, ",".join(render_term(a) for a in h.args))
        for h in heads)


def _pp_guard(gx):
    if gx[0] == "cmp":
        return "%s%s%s" % (render_term(gx[2]), gx[1], render_term(gx[3]))
    if gx[0] == "integer":
        return "integer(%s)" % render_term(gx[1])
    if gx[0] == "input_length":
        return "%s=input_length" % render_term(gx[1])
    if gx[0] == "compactable":
        return "untried_unifiable_pair"
    return gx[0]


def _pp_body_item(it):
    tag = it[0]
    if tag == "sym":
        if not it[2]:
            return it[1]
        return "%s(%s)" % (it[1], ",".join(render_term(a) for a in it[2]))
    if tag == "assume":
        name = {K_HYP_LIN: "=+", K_HYP_INT: "=*", K_EXP: "=-"}[it[1]]
        if it[2]:
            name = name[1]
        return "%s%s" % (name, render_term(it[3]))
    if tag == "eq":
        return "%s=%s" % (render_term(it[1]), render_term(it[2]))
    if tag == "dif":
        return "dif(%s,%s)" % (render_term(it[1]), render_term(it[2]))
    if tag == "true":
        return "true"
    if tag == "fail":
        return "fail"
    if tag == "disj":
        return "(%s)" % " ; ".join(
            ", ".join(_pp_body_item(x) for x in b) or "true" for b in it[1])
    raise ValueError(tag)
