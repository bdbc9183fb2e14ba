"""Grammar source model: declarations, rules, validation, pretty-printing.

A source file is a sequence of clauses ended by `end_of_CHRG_source.`:

    handler Name.
    grammar_symbols f/1, g/0.        nonterminals with attribute counts
    constraints h/2.                 plain store constraints
    abducibles a/1.                  abducible context facts
    gpragma passive.                 compile options
    <rules>

Grammar rules relate element sequences:

    LeftCtx -\\ Core /- RightCtx ::> Body.      propagation
    ...                           <:> Body.      simplification (core removed)

Head elements: grammar symbols `np(X)`, terminal lists `[the, N]`, gaps
`...` / `2...5`, the whole-input anchor `all`, parallel match `A $ B`,
context facts `{h(Y)}`, and `!Elem` to keep a core element across a
simplification.  Bodies are comma lists of: one grammar symbol,
`{goals}` (store constraints, abducibles, built-ins = and dif),
assumption operators (=+ =* =- and timed + * -), `true`, `fail`, and
`(B1 ; B2)` disjunction; an optional `Guard |` prefix holds entailment
tests.  Plain rewrite rules over store constraints use `==>` / `<=>`
with `Kept \\ Removed <=> ...` for the mixed form.  A rule may be named
(`name @@ Rule`) and abbreviated (`Rule where V = Term, ...`).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from chrg.kernel import (
    Atom, Struct, Var, deref, identical, list_parts, mkatom, render_term,
)
from chrg import reader
from chrg.reader import ReaderError

RULE_OPS = ("::>", "<:>", "==>", "<=>")
GRAMMAR_OPS = ("::>", "<:>")
ASSUME_OPS = {"=+": ("=+", False), "=*": ("=*", False), "=-": ("=-", False),
              "+": ("+", True), "*": ("*", True), "-": ("-", True)}
GUARD_BUILTINS = ("=", "\\=", "==", "\\==", "=<", "<", ">", ">=", "integer",
                  "true", "fail")
END_MARKER = "end_of_CHRG_source"


class SourceError(Exception):
    def __init__(self, diags):
        self.diags = list(diags)
        super().__init__("; ".join(str(d) for d in self.diags))


@dataclass
class Diag:
    severity: str   # 'error' | 'warning'
    line: int
    message: str

    def __str__(self):
        return "%s (line %s): %s" % (self.severity, self.line, self.message)


# --- head elements ----------------------------------------------------------

@dataclass
class Terminal:
    word: object          # term
    kept: bool = False


@dataclass
class SymbolElem:
    functor: str
    args: tuple = ()
    kept: bool = False


@dataclass
class HostElem:
    term: object          # Atom or Struct
    kept: bool = False


@dataclass
class GapElem:
    lo: object = None     # ints for bounded gaps, both None for ...
    hi: object = None


@dataclass
class AllElem:
    pass


@dataclass
class ParallelElem:
    operands: list = field(default_factory=list)   # list of element lists


# --- body items ---------------------------------------------------------------

@dataclass
class BodyCall:
    term: object
    braced: bool = False


@dataclass
class BodyAssume:
    op: str
    timed: bool
    payload: object


@dataclass
class BodyTrue:
    pass


@dataclass
class BodyFail:
    pass


@dataclass
class BodyDisj:
    branches: list = field(default_factory=list)


# --- rules ---------------------------------------------------------------------

@dataclass
class GrammarRule:
    op: str                       # '::>' | '<:>'
    left: list
    core: list
    right: list
    guard: list                   # raw guard atom terms
    body: list                    # body items
    name: str = None
    line: int = 0


@dataclass
class ChrRule:
    op: str                       # '==>' | '<=>'
    heads: list                   # [(term, kept)]
    guard: list
    body: list
    name: str = None
    line: int = 0


@dataclass
class Grammar:
    handler: str = None
    symbol_decls: dict = field(default_factory=dict)      # (f, n) -> line
    constraint_decls: dict = field(default_factory=dict)
    abducible_decls: dict = field(default_factory=dict)
    gpragmas: list = field(default_factory=list)
    passive_override: bool = None
    compaction: bool = False
    rules: list = field(default_factory=list)
    diags: list = field(default_factory=list)

    def declared_kind(self, functor, arity):
        if (functor, arity) in self.symbol_decls:
            return "symbol"
        if (functor, arity) in self.constraint_decls:
            return "constraint"
        if (functor, arity) in self.abducible_decls:
            return "abducible"
        if functor.endswith("_") and (functor[:-1], arity) in self.abducible_decls:
            return "abducible_neg"
        return None


# ---------------------------------------------------------------------------
# term decomposition helpers
# ---------------------------------------------------------------------------

def comma_list(t):
    out = []
    t = deref(t)
    while type(t) is Struct and t.functor == "," and len(t.args) == 2:
        out.append(t.args[0])
        t = deref(t.args[1])
    out.append(t)
    return out


def semicolon_list(t):
    out = []
    t = deref(t)
    while type(t) is Struct and t.functor == ";" and len(t.args) == 2:
        out.append(t.args[0])
        t = deref(t.args[1])
    out.append(t)
    return out


def functor_of(t):
    t = deref(t)
    if type(t) is Atom:
        return (t.name, 0)
    if type(t) is Struct:
        return (t.functor, len(t.args))
    return None


def args_of(t):
    t = deref(t)
    if type(t) is Struct:
        return t.args
    return ()


def is_struct(t, functor, arity):
    t = deref(t)
    return type(t) is Struct and t.functor == functor and len(t.args) == arity


# ---------------------------------------------------------------------------
# parsing clause terms into the grammar model
# ---------------------------------------------------------------------------

def parse_source(text):
    """Parse a whole source file; raises SourceError on hard errors.
    Collected warnings live in grammar.diags."""
    g = Grammar()
    errors = []
    try:
        clauses = reader.read_terms(text)
    except ReaderError as e:
        raise SourceError([Diag("error", e.line or 0, str(e))])

    ended = False
    for term, line, _vars in clauses:
        if ended:
            errors.append(Diag("error", line,
                               "clause after the end-of-source marker"))
            break
        t = deref(term)
        if type(t) is Atom and t.name == END_MARKER:
            ended = True
            continue
        try:
            _interpret_clause(g, t, line)
        except _ClauseError as e:
            errors.append(Diag("error", line, e.args[0]))
    if not ended:
        errors.append(Diag("error", 0,
                           "missing end-of-source marker %r" % END_MARKER))
    if errors:
        raise SourceError(errors + g.diags)
    return g


class _ClauseError(Exception):
    pass


def _interpret_clause(g, t, line):
    f = functor_of(t)
    if f == ("handler", 1):
        a = deref(args_of(t)[0])
        if type(a) is not Atom:
            raise _ClauseError("handler name must be an atom")
        g.handler = a.name
        return
    if f in (("grammar_symbols", 1), ("constraints", 1), ("abducibles", 1)):
        table = {"grammar_symbols": g.symbol_decls,
                 "constraints": g.constraint_decls,
                 "abducibles": g.abducible_decls}[f[0]]
        for spec in comma_list(args_of(t)[0]):
            spec = deref(spec)
            if not is_struct(spec, "/", 2):
                raise _ClauseError("declaration item must be name/arity")
            nm, ar = deref(spec.args[0]), deref(spec.args[1])
            if type(nm) is not Atom or type(ar) is not int or ar < 0:
                raise _ClauseError("declaration item must be name/arity")
            table[(nm.name, ar)] = line
        return
    if f == ("gpragma", 1):
        p = deref(args_of(t)[0])
        g.gpragmas.append(p)
        name = p.name if type(p) is Atom else None
        if name == "passive":
            g.passive_override = True
        elif name == "nopassive":
            g.passive_override = False
        elif name == "compaction":
            g.compaction = True
        else:
            g.diags.append(Diag("warning", line,
                                "unrecognized gpragma %s kept as annotation"
                                % render_term(p)))
        return
    # rule clause, possibly wrapped in where / @@
    name = None
    if is_struct(t, "where", 2):
        t, bindings = deref(t).args
        _run_where(bindings, line)
        t = deref(t)
    if is_struct(t, "@@", 2):
        nm, t = deref(t).args
        name = render_term(nm)
        t = deref(t)
    f = functor_of(t)
    if f is None or f[0] not in RULE_OPS or f[1] != 2:
        raise _ClauseError("cannot interpret clause %s" % render_term(t))
    rule = _parse_rule(g, t, name, line)
    if rule is not None:
        g.rules.append(rule)


def _run_where(bindings, line):
    for b in comma_list(bindings):
        b = deref(b)
        if not is_struct(b, "=", 2):
            raise _ClauseError(
                "where-expansion failed: %s is not a binding" % render_term(b))
        v, val = deref(b.args[0]), b.args[1]
        if type(v) is not Var:
            raise _ClauseError(
                "where-expansion failed: left side of %s is not a variable"
                % render_term(b))
        if occurs_var(v, val):
            raise _ClauseError(
                "where-expansion failed: %s would bind a variable to a term "
                "containing itself" % render_term(b))
        v.ref = val


def occurs_var(v, t):
    t = deref(t)
    if t is v:
        return True
    if type(t) is Struct:
        return any(occurs_var(v, a) for a in t.args)
    return False


def _parse_rule(g, t, name, line):
    op = functor_of(t)[0]
    head_term, body_term = deref(t).args
    guard, body = _parse_body(g, body_term, line)
    if op in GRAMMAR_OPS:
        left, core, right = _parse_grammar_head(g, head_term, line)
        return GrammarRule(op=op, left=left, core=core, right=right,
                           guard=guard, body=body, name=name, line=line)
    heads = _parse_chr_head(g, head_term, op, line)
    return ChrRule(op=op, heads=heads, guard=guard, body=body, name=name,
                   line=line)


def _parse_grammar_head(g, t, line):
    t = deref(t)
    left = []
    right = []
    if is_struct(t, "-\\", 2):
        lt, t = deref(t).args
        left = _parse_context(g, lt, line)
        t = deref(t)
    if is_struct(t, "/-", 2):
        t, rt = deref(t).args
        right = _parse_context(g, rt, line)
        t = deref(t)
    core = _parse_elem_seq(g, t, line, context=False)
    return left, core, right


def _parse_context(g, t, line):
    """A context is an element sequence, or a disjunction of them; the
    disjunction is kept as alternatives for the compiler to expand."""
    alts = semicolon_list(t)
    if len(alts) == 1:
        return _parse_elem_seq(g, alts[0], line, context=True)
    return [("alts", [_parse_elem_seq(g, a, line, context=True)
                      for a in alts])]


def _parse_elem_seq(g, t, line, context):
    out = []
    for item in comma_list(t):
        out.extend(_parse_elem(g, item, line, context))
    return out


def _parse_elem(g, t, line, context):
    t = deref(t)
    if type(t) is Var:
        raise _ClauseError("a variable cannot stand alone in a rule head")
    if type(t) is int:
        raise _ClauseError("an integer cannot stand alone in a rule head")
    if is_struct(t, ";", 2):
        raise _ClauseError(
            "disjunction is only allowed in context sections")
    if type(t) is Atom:
        if t.name == "...":
            return [GapElem(None, None)]
        if t.name == "all":
            return [AllElem()]
        if t.name == "[]":
            g.diags.append(Diag("warning", line,
                                "empty terminal list contributes nothing"))
            return []
        return [SymbolElem(t.name, ())]
    if is_struct(t, "...", 2):
        lo, hi = (deref(a) for a in deref(t).args)
        if type(lo) is not int or type(hi) is not int or lo < 0 or hi < lo:
            raise _ClauseError("bounded gap needs integers lo...hi, lo=<hi")
        return [GapElem(lo, hi)]
    if is_struct(t, "$", 2):
        ops = []
        stack = [t]
        while stack:
            x = deref(stack.pop(0))
            if is_struct(x, "$", 2):
                stack = list(deref(x).args) + stack
            else:
                ops.append(_parse_elem_seq(g, x, line, context))
        return [ParallelElem(ops)]
    if is_struct(t, "!", 1):
        inner = _parse_elem(g, deref(t).args[0], line, context)
        for e in inner:
            e.kept = True
        return inner
    if is_struct(t, "{}", 1):
        out = []
        for goal in comma_list(deref(t).args[0]):
            goal = deref(goal)
            kept = False
            if is_struct(goal, "!", 1):
                kept = True
                goal = deref(deref(goal).args[0])
            if type(goal) not in (Atom, Struct):
                raise _ClauseError("context fact must be atom or compound")
            out.append(HostElem(goal, kept=kept))
        return out
    if type(t) is Struct and t.functor == "." and len(t.args) == 2:
        items, tail = list_parts(t)
        if not (type(deref(tail)) is Atom and deref(tail).name == "[]"):
            raise _ClauseError("terminal list must be proper")
        return [Terminal(w) for w in items]
    if type(t) is Struct:
        return [SymbolElem(t.functor, t.args)]
    raise _ClauseError("cannot interpret head element %s" % render_term(t))


def _parse_chr_head(g, t, op, line):
    t = deref(t)
    heads = []
    if is_struct(t, "\\", 2):
        kept_t, removed_t = deref(t).args
        for h in comma_list(kept_t):
            heads.append((_chr_head_atom(h), True))
        for h in comma_list(removed_t):
            heads.append((_chr_head_atom(h), False))
        return heads
    default_kept = op == "==>"
    for h in comma_list(t):
        h = deref(h)
        kept = default_kept
        if is_struct(h, "!", 1):
            kept = True
            h = deref(deref(h).args[0])
        heads.append((_chr_head_atom(h), kept))
    return heads


def _chr_head_atom(h):
    h = deref(h)
    if type(h) not in (Atom, Struct):
        raise _ClauseError("rule head must be atom or compound")
    return h


def _parse_body(g, t, line):
    t = deref(t)
    guard = []
    if is_struct(t, "|", 2):
        gt, t = deref(t).args
        guard = [deref(x) for x in comma_list(gt)]
    return guard, _parse_body_items(g, t, line)


def _parse_body_items(g, t, line):
    items = []
    for item in comma_list(t):
        item = deref(item)
        if type(item) is Var:
            raise _ClauseError("a variable cannot be a body item")
        if is_struct(item, ";", 2):
            branches = [_parse_body_items(g, b, line)
                        for b in semicolon_list(item)]
            items.append(BodyDisj(branches))
            continue
        if type(item) is Atom:
            if item.name == "true":
                items.append(BodyTrue())
                continue
            if item.name == "fail":
                items.append(BodyFail())
                continue
            items.append(BodyCall(item, braced=False))
            continue
        if is_struct(item, "{}", 1):
            for goal in comma_list(deref(item).args[0]):
                goal = deref(goal)
                sub = _classify_braced(goal)
                items.append(sub)
            continue
        if type(item) is Struct and len(item.args) == 1 \
                and item.functor in ASSUME_OPS:
            op, timed = ASSUME_OPS[item.functor]
            items.append(BodyAssume(op, timed, item.args[0]))
            continue
        if type(item) is Struct:
            items.append(BodyCall(item, braced=False))
            continue
        raise _ClauseError("cannot interpret body item %s" % render_term(item))
    return items


def _classify_braced(goal):
    if type(goal) is Struct and len(goal.args) == 1 \
            and goal.functor in ASSUME_OPS:
        op, timed = ASSUME_OPS[goal.functor]
        return BodyAssume(op, timed, goal.args[0])
    if type(goal) is Atom and goal.name == "true":
        return BodyTrue()
    if type(goal) is Atom and goal.name == "fail":
        return BodyFail()
    if type(goal) not in (Atom, Struct):
        raise _ClauseError("cannot interpret braced goal %s"
                           % render_term(goal))
    return BodyCall(goal, braced=True)


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

def validate(g):
    """Structural checks; returns (errors, warnings) as Diag lists and marks
    rules to drop in g (empty cores, identity rules)."""
    errors = []
    warnings = list(g.diags)
    dropped = []

    declared_all = set(g.symbol_decls) | set(g.constraint_decls) \
        | set(g.abducible_decls)
    for key in set(g.symbol_decls) & set(g.constraint_decls):
        errors.append(Diag("error", g.symbol_decls[key],
                           "%s/%d declared both grammar symbol and constraint"
                           % key))
    for key in set(g.symbol_decls) & set(g.abducible_decls):
        errors.append(Diag("error", g.symbol_decls[key],
                           "%s/%d declared both grammar symbol and abducible"
                           % key))
    for key in set(g.constraint_decls) & set(g.abducible_decls):
        errors.append(Diag("error", g.constraint_decls[key],
                           "%s/%d declared both constraint and abducible"
                           % key))
    for (f, n), line in list(g.abducible_decls.items()):
        if f.endswith("_"):
            errors.append(Diag("error", line,
                               "abducible %s/%d: trailing underscore is "
                               "reserved for negations" % (f, n)))
    if ("token", 3) in declared_all or ("token", 1) in declared_all:
        errors.append(Diag("error", 0, "functor token is reserved"))

    unit_edges = []
    for rule in g.rules:
        if isinstance(rule, GrammarRule):
            _validate_grammar_rule(g, rule, errors, warnings, dropped,
                                   unit_edges)
        else:
            _validate_chr_rule(g, rule, errors, warnings)

    # single-production cycles over the unit-production graph
    cycles = _find_cycle(unit_edges)
    if cycles:
        errors.append(Diag("error", cycles[1],
                           "single-production cycle through %s"
                           % " -> ".join(cycles[0])))

    for r in dropped:
        if r in g.rules:
            g.rules.remove(r)
    return errors, warnings


def _validate_grammar_rule(g, rule, errors, warnings, dropped, unit_edges):
    line = rule.line

    def check_elems(elems, section):
        for e in elems:
            if isinstance(e, tuple) and e[0] == "alts":
                for alt in e[1]:
                    check_elems(alt, section)
                continue
            if isinstance(e, SymbolElem):
                kind = g.declared_kind(e.functor, len(e.args))
                if kind is None:
                    errors.append(Diag(
                        "error", line,
                        "undeclared symbol %s/%d in rule head"
                        % (e.functor, len(e.args))))
                elif kind != "symbol":
                    errors.append(Diag(
                        "error", line,
                        "%s/%d is declared a %s; write it in braces"
                        % (e.functor, len(e.args), kind)))
            elif isinstance(e, HostElem):
                f = functor_of(e.term)
                kind = g.declared_kind(*f)
                if kind is None:
                    errors.append(Diag(
                        "error", line,
                        "undeclared context fact %s/%d" % f))
                elif kind == "symbol":
                    errors.append(Diag(
                        "error", line,
                        "%s/%d is a grammar symbol; drop the braces" % f))
            elif isinstance(e, ParallelElem):
                for opnd in e.operands:
                    check_elems(opnd, section)
            elif isinstance(e, GapElem) and section == "core":
                pass
            if isinstance(e, AllElem) and section != "core":
                # harmless but almost surely a mistake
                warnings.append(Diag(
                    "warning", line, "`all` inside a context section"))

    check_elems(rule.left, "left")
    check_elems(rule.core, "core")
    check_elems(rule.right, "right")

    core_real = [e for e in rule.core
                 if not isinstance(e, (GapElem,))]
    if not core_real:
        warnings.append(Diag("warning", line,
                             "rule core is empty; rule dropped"))
        dropped.append(rule)
        return
    if not _core_bounded(rule.core):
        errors.append(Diag("error", line,
                           "rule core must start and end with a matchable "
                           "element, not a gap"))

    # guard discipline
    for ga in rule.guard:
        f = functor_of(ga)
        if f is None or f[0] not in GUARD_BUILTINS:
            errors.append(Diag(
                "error", line,
                "unsupported guard %s: guards are entailment tests over "
                "matched variables and may not bind rule heads"
                % render_term(ga)))

    # body shape: at most one grammar symbol along any derivation path
    syms = _body_grammar_symbols(g, rule.body, errors, line)
    if _max_path_syms(g, rule.body) > 1:
        errors.append(Diag("error", line,
                           "rule body may build at most one grammar symbol "
                           "per derivation path"))

    # identity production p(Args) ::> p(Args) and unit-production edges
    if len(core_real) == 1 and isinstance(core_real[0], SymbolElem) \
            and syms and not rule.left and not rule.right:
        src = core_real[0]
        if len(syms) == 1 \
                and (src.functor, len(src.args)) == functor_of(syms[0]) \
                and rule.op == "::>" and len(rule.core) == 1:
            if identical(Struct(src.functor, src.args) if src.args
                         else mkatom(src.functor), syms[0]):
                warnings.append(Diag(
                    "warning", line,
                    "identity production is useless under set semantics; "
                    "rule dropped"))
                dropped.append(rule)
                return
        if len(rule.core) == 1 and not rule.guard:
            for dst in syms:
                unit_edges.append((src.functor, functor_of(dst)[0], line))

    # range restriction: body/guard variables should occur in the head
    head_vars = set()
    for e in _walk_elems(rule.left + rule.core + rule.right):
        if isinstance(e, SymbolElem):
            for a in e.args:
                head_vars.update(v.id for v in _vars_of(a))
        elif isinstance(e, Terminal):
            head_vars.update(v.id for v in _vars_of(e.word))
        elif isinstance(e, HostElem):
            head_vars.update(v.id for v in _vars_of(e.term))
    loose = set()
    for item in _walk_body(rule.body):
        if isinstance(item, BodyCall):
            loose.update(v.id for v in _vars_of(item.term))
        elif isinstance(item, BodyAssume):
            loose.update(v.id for v in _vars_of(item.payload))
    if loose - head_vars and rule.body:
        warnings.append(Diag(
            "warning", line,
            "rule is not range-restricted: body variables not bound by the "
            "head stay unbound in the store"))

    _warn_assume_on_abducible(g, rule, warnings)


def _warn_assume_on_abducible(g, rule, warnings):
    """An assumption operator whose payload functor is a declared abducible
    almost certainly meant the negation twin, which is written with a
    trailing underscore instead."""
    for item in _walk_body(rule.body):
        if not isinstance(item, BodyAssume):
            continue
        f = functor_of(item.payload)
        if f is not None and g.declared_kind(*f) == "abducible":
            warnings.append(Diag(
                "warning", rule.line,
                "assumption operator %s on declared abducible %s/%d; write "
                "%s_(...) if the negation was meant" % (item.op, f[0], f[1],
                                                        f[0])))


def _validate_chr_rule(g, rule, errors, warnings):
    line = rule.line
    for (h, _kept) in rule.heads:
        f = functor_of(h)
        kind = g.declared_kind(*f)
        if kind is None and f[0] != "token":
            errors.append(Diag("error", line,
                               "undeclared constraint %s/%d in rule head" % f))
    for ga in rule.guard:
        f = functor_of(ga)
        if f is None or f[0] not in GUARD_BUILTINS:
            errors.append(Diag(
                "error", line,
                "unsupported guard %s: guards are entailment tests over "
                "matched variables and may not bind rule heads"
                % render_term(ga)))
    for item in _walk_body(rule.body):
        if isinstance(item, BodyCall):
            f = functor_of(item.term)
            if f[0] in ("=", "dif") and f[1] == 2:
                continue
            if g.declared_kind(*f) is None:
                errors.append(Diag(
                    "error", line,
                    "undeclared constraint %s/%d in rule body" % f))
    _warn_assume_on_abducible(g, rule, warnings)


def _core_bounded(core):
    def elem_bounded(e, side):
        if isinstance(e, (SymbolElem, Terminal, HostElem, AllElem)):
            return not isinstance(e, HostElem)
        if isinstance(e, ParallelElem):
            return any(_seq_bounded(o, side) for o in e.operands)
        return False

    def _seq_bounded(seq, side):
        real = [e for e in seq]
        if not real:
            return False
        e = real[0] if side == "left" else real[-1]
        return elem_bounded(e, side)

    real = [e for e in core if not isinstance(e, HostElem)]
    if not real:
        return True
    return elem_bounded(real[0], "left") and elem_bounded(real[-1], "right")


def _body_grammar_symbols(g, body, errors, line):
    syms = []
    for item in _walk_body(body):
        if isinstance(item, BodyCall):
            f = functor_of(item.term)
            kind = g.declared_kind(*f)
            if item.braced:
                if kind == "symbol":
                    errors.append(Diag(
                        "error", line,
                        "%s/%d is a grammar symbol; drop the braces" % f))
                elif kind is None and f[0] not in ("=", "dif"):
                    errors.append(Diag(
                        "error", line,
                        "undeclared goal %s/%d in braces" % f))
            else:
                if kind == "symbol":
                    syms.append(item.term)
                elif f[0] in ("=", "dif") and f[1] == 2:
                    pass
                elif kind is not None:
                    errors.append(Diag(
                        "error", line,
                        "%s/%d is a %s; write it in braces"
                        % (f[0], f[1], kind)))
                else:
                    errors.append(Diag(
                        "error", line,
                        "undeclared grammar symbol %s/%d in rule body" % f))
    return syms


def _max_path_syms(g, items):
    """Largest number of grammar symbols built along one derivation path
    through the body (disjunction branches are alternatives)."""
    total = 0
    for it in items:
        if isinstance(it, BodyDisj):
            total += max((_max_path_syms(g, b) for b in it.branches),
                         default=0)
        elif isinstance(it, BodyCall) and not it.braced \
                and g.declared_kind(*functor_of(it.term)) == "symbol":
            total += 1
    return total


def _walk_body(items):
    for it in items:
        if isinstance(it, BodyDisj):
            for b in it.branches:
                yield from _walk_body(b)
        else:
            yield it


def _walk_elems(elems):
    for e in elems:
        if isinstance(e, tuple) and e[0] == "alts":
            for alt in e[1]:
                yield from _walk_elems(alt)
        elif isinstance(e, ParallelElem):
            for o in e.operands:
                yield from _walk_elems(o)
        else:
            yield e


def _vars_of(t):
    out = []
    seen = set()
    stack = [t]
    while stack:
        x = deref(stack.pop())
        if type(x) is Var:
            if x.id not in seen:
                seen.add(x.id)
                out.append(x)
        elif type(x) is Struct:
            stack.extend(x.args)
    return out


def _find_cycle(edges):
    graph = {}
    lines = {}
    for (a, b, line) in edges:
        graph.setdefault(a, set()).add(b)
        lines[(a, b)] = line
    for start in graph:
        path = [start]
        seen = {start}
        stack = [iter(graph.get(start, ()))]
        while stack:
            it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                stack.pop()
                seen.discard(path.pop())
                continue
            if nxt == start:
                return path + [start], lines[(path[-1], start)]
            if nxt in seen or nxt not in graph:
                continue
            path.append(nxt)
            seen.add(nxt)
            stack.append(iter(graph[nxt]))
    return None


# ---------------------------------------------------------------------------
# pretty printing (round-trips through parse_source)
# ---------------------------------------------------------------------------

def pretty_print(g):
    out = []
    if g.handler:
        out.append("handler %s." % g.handler)
    for label, table in (("grammar_symbols", g.symbol_decls),
                         ("constraints", g.constraint_decls),
                         ("abducibles", g.abducible_decls)):
        if table:
            items = ", ".join("%s/%d" % k for k in sorted(table))
            out.append("%s %s." % (label, items))
    for p in g.gpragmas:
        out.append("gpragma %s." % render_term(p))
    for rule in g.rules:
        out.append(_pp_rule(rule))
    out.append("%s." % END_MARKER)
    return "\n".join(out) + "\n"


def _pp_rule(rule):
    body = _pp_body(rule.guard, rule.body)
    if isinstance(rule, GrammarRule):
        head = _pp_elems(rule.core)
        if rule.left:
            head = "%s -\\ %s" % (_pp_context(rule.left), head)
        if rule.right:
            head = "%s /- %s" % (head, _pp_context(rule.right))
        text = "%s %s %s." % (head, rule.op, body)
    else:
        kept = [h for (h, k) in rule.heads if k]
        removed = [h for (h, k) in rule.heads if not k]
        if rule.op == "<=>" and kept and removed:
            head = "%s \\ %s" % (", ".join(render_term(h) for h in kept),
                                 ", ".join(render_term(h) for h in removed))
        else:
            head = ", ".join(render_term(h) for (h, _k) in rule.heads)
        text = "%s %s %s." % (head, rule.op, body)
    if rule.name:
        text = "%s @@ %s" % (rule.name, text)
    return text


def _pp_context(elems):
    if len(elems) == 1 and isinstance(elems[0], tuple) and elems[0][0] == "alts":
        return "(%s)" % ("; ".join(_pp_elems(a) for a in elems[0][1]))
    return _pp_elems(elems)


def _pp_elems(elems):
    parts = []
    for e in elems:
        parts.append(_pp_elem(e))
    return ", ".join(parts)


def _pp_elem(e):
    if isinstance(e, Terminal):
        return "[%s]" % render_term(e.word)
    if isinstance(e, SymbolElem):
        base = e.functor if not e.args else "%s(%s)" % (
            e.functor, ",".join(render_term(a) for a in e.args))
        return "!%s" % base if e.kept else base
    if isinstance(e, HostElem):
        inner = render_term(e.term)
        return "{!%s}" % inner if e.kept else "{%s}" % inner
    if isinstance(e, GapElem):
        if e.lo is None:
            return "..."
        return "%d...%d" % (e.lo, e.hi)
    if isinstance(e, AllElem):
        return "all"
    if isinstance(e, ParallelElem):
        return "(%s)" % (" $ ".join("(%s)" % _pp_elems(o)
                                    for o in e.operands))
    if isinstance(e, tuple) and e[0] == "alts":
        return "(%s)" % ("; ".join(_pp_elems(a) for a in e[1]))
    raise ValueError("unknown element %r" % (e,))


def _pp_body(guard, items):
    body = ", ".join(_pp_item(i) for i in items) or "true"
    if guard:
        return "%s | %s" % (", ".join(render_term(x) for x in guard), body)
    return body


def _pp_item(item):
    if isinstance(item, BodyTrue):
        return "true"
    if isinstance(item, BodyFail):
        return "fail"
    if isinstance(item, BodyCall):
        t = render_term(item.term)
        return "{%s}" % t if item.braced else t
    if isinstance(item, BodyAssume):
        return "%s%s" % (item.op, render_term(item.payload))
    if isinstance(item, BodyDisj):
        return "(%s)" % (" ; ".join(
            ", ".join(_pp_item(i) for i in b) or "true"
            for b in item.branches))
    raise ValueError("unknown body item %r" % (item,))
