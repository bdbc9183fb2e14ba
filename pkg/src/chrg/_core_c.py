"""Runtime kernel: terms, unification, constraint store, rule engine.

This module is deliberately self-contained and written in conservative
Python so that Cython can compile it unchanged (setup.py builds a twin
under the name chrg._core_c when Cython is present; chrg.kernel picks
whichever is available).  Nothing here knows about grammar notation --
the compiler hands the engine ready-made rewrite rules over constraints.

Execution model
---------------
Constraints live in an indexed store.  A stack-shaped agenda drives the
computation: the newest pending item is processed first.  Activating a
constraint tries the program's rules in order; the first applicable rule
commits, removes the heads a simplification asked to remove, and pushes
the rule body one item at a time (leftmost runs to quiescence first,
like the usual refined semantics).  The active constraint is pushed back
below the body so it re-scans the program afterwards; a propagation
history keeps rules from re-firing on the same head identities.

Disjunctive bodies push chronological choice points (trail mark + agenda
snapshot); `fail` and failed built-ins backtrack to the newest one.
Binding a variable re-activates the constraints it occurs in and
re-checks pending disequations.

Hypothesis/expectation constraints (the assumption operators) are
resolved natively: a new expectation scans live hypotheses newest-first,
a new hypothesis scans pending expectations newest-first, and each pair
is tried at most once, branching between consuming and skipping.

When ambiguity indexing is on, a rule application that builds a new node
runs as a transaction: failure inside it first exhausts choice points
opened inside the node, then rolls the node back and lets the derivation
continue; reaching the end of the node's body commits it.
"""

from __future__ import annotations

# ---------------------------------------------------------------------------
# terms
# ---------------------------------------------------------------------------
#
# Variables are mutable cells (ref is None while unbound); atoms are interned
# wrappers around their name; integers are plain Python ints; compounds are
# Struct(functor, args).  Strings never appear as bare terms.

_var_counter = [0]


class Var:
    __slots__ = ("ref", "name", "id")

    def __init__(self, name=None):
        _var_counter[0] += 1
        self.id = _var_counter[0]
        self.ref = None
        self.name = name if name is not None else "_G%d" % self.id

    def __repr__(self):
        return "Var(%s)" % self.name


class Atom:
    __slots__ = ("name",)

    def __init__(self, name):
        self.name = name

    def __repr__(self):
        return "Atom(%s)" % self.name


class Struct:
    __slots__ = ("functor", "args")

    def __init__(self, functor, args):
        self.functor = functor
        self.args = tuple(args)

    def __repr__(self):
        return "Struct(%s/%d)" % (self.functor, len(self.args))


_atom_table = {}


def mkatom(name):
    a = _atom_table.get(name)
    if a is None:
        a = Atom(name)
        _atom_table[name] = a
    return a


def mkstruct(functor, args):
    if not args:
        return mkatom(functor)
    return Struct(functor, args)


NIL = mkatom("[]")
TRUE = mkatom("true")
FAIL = mkatom("fail")


def deref(t):
    while type(t) is Var and t.ref is not None:
        t = t.ref
    return t


def is_atom(t, name=None):
    t = deref(t)
    if type(t) is not Atom:
        return False
    return name is None or t.name == name


def mklist(items, tail=NIL):
    out = tail
    for x in reversed(items):
        out = Struct(".", (x, out))
    return out


def list_parts(t):
    """Return (items, tail) decomposing a ./2 chain."""
    items = []
    t = deref(t)
    while type(t) is Struct and t.functor == "." and len(t.args) == 2:
        items.append(t.args[0])
        t = deref(t.args[1])
    return items, t


def identical(t1, t2):
    """Syntactic identity after dereferencing (==/2)."""
    stack = [(t1, t2)]
    while stack:
        a, b = stack.pop()
        a = deref(a)
        b = deref(b)
        if a is b:
            continue
        ta = type(a)
        tb = type(b)
        if ta is Var or tb is Var:
            return False
        if ta is int or tb is int:
            if ta is not tb or a != b:
                return False
            continue
        if ta is Atom or tb is Atom:
            if ta is not tb or a.name != b.name:
                return False
            continue
        if a.functor != b.functor or len(a.args) != len(b.args):
            return False
        stack.extend(zip(a.args, b.args))
    return True


def term_key(t):
    """Hashable structural key under current bindings; distinct unbound
    variables stay distinct."""
    t = deref(t)
    ty = type(t)
    if ty is Var:
        return ("v", t.id)
    if ty is int:
        return t
    if ty is Atom:
        return ("a", t.name)
    return (t.functor,) + tuple(term_key(a) for a in t.args)


def term_vars(t, acc=None, seen=None):
    """Free variables in order of first occurrence."""
    if acc is None:
        acc = []
        seen = set()
    t = deref(t)
    ty = type(t)
    if ty is Var:
        if t.id not in seen:
            seen.add(t.id)
            acc.append(t)
    elif ty is Struct:
        for a in t.args:
            term_vars(a, acc, seen)
    return acc


def occurs_in(v, t):
    stack = [t]
    while stack:
        x = deref(stack.pop())
        if x is v:
            return True
        if type(x) is Struct:
            stack.extend(x.args)
    return False


def bind(v, t, trail):
    v.ref = t
    trail.append(("b", v))


def unify(t1, t2, trail):
    """Destructive unification with occurs check; bindings go on trail.
    Returns True/False; on False the caller must unwind the trail."""
    stack = [(t1, t2)]
    while stack:
        a, b = stack.pop()
        a = deref(a)
        b = deref(b)
        if a is b:
            continue
        ta = type(a)
        tb = type(b)
        if ta is Var:
            if tb is Var:
                bind(a, b, trail)
                continue
            if occurs_in(a, b):
                return False
            bind(a, b, trail)
            continue
        if tb is Var:
            if occurs_in(b, a):
                return False
            bind(b, a, trail)
            continue
        if ta is int or tb is int:
            if ta is not tb or a != b:
                return False
            continue
        if ta is Atom or tb is Atom:
            if ta is not tb or a.name != b.name:
                return False
            continue
        if a.functor != b.functor or len(a.args) != len(b.args):
            return False
        stack.extend(zip(a.args, b.args))
    return True


def undo_trail(trail, mark, state=None):
    """Pop trail entries back to mark, undoing each effect."""
    while len(trail) > mark:
        tag = trail.pop()
        kind = tag[0]
        if kind == "b":
            tag[1].ref = None
        elif kind == "k":
            state._revive(tag[1])
        elif kind == "a":
            state._retract(tag[1])
        elif kind == "h":
            state.history.discard(tag[1])
        elif kind == "m":
            state.memo.discard(tag[1])
        elif kind == "da":
            state.difs.pop()
        elif kind == "dr":
            state.difs[tag[1]][2] = True
        elif kind == "log":
            state.applog.pop()
        elif kind == "res":
            state.resolutions.pop()


def unifiable(t1, t2):
    """Non-destructive unifiability test (occurs check included)."""
    trail = []
    ok = unify(t1, t2, trail)
    while trail:
        trail.pop()[1].ref = None
    return ok


def copy_term(t, mapping):
    """Structure copy with fresh variables; mapping is shared across calls
    to preserve sharing inside one copied group."""
    t = deref(t)
    ty = type(t)
    if ty is Var:
        c = mapping.get(t.id)
        if c is None:
            c = Var()
            mapping[t.id] = c
        return c
    if ty is Struct:
        return Struct(t.functor, tuple(copy_term(a, mapping) for a in t.args))
    return t


# --- functional unification (public interface; also used by checkers) ------
#
# A substitution is a plain dict {Var: term} with fully resolved (idempotent)
# range terms.  Failure is returned as None, never raised.

def subst_walk(t, s):
    t = deref(t)
    while type(t) is Var and t in s:
        t = deref(s[t])
    return t


def apply_subst(s, t):
    t = subst_walk(t, s)
    if type(t) is Struct:
        return Struct(t.functor, tuple(apply_subst(s, a) for a in t.args))
    return t


def _occurs_subst(v, t, s):
    t = subst_walk(t, s)
    if t is v:
        return True
    if type(t) is Struct:
        return any(_occurs_subst(v, a, s) for a in t.args)
    return False


def unify_subst(t1, t2, s=None):
    """Functional unification: returns an idempotent substitution dict, or
    None on failure.  Does not touch variable cells."""
    s = dict(s) if s else {}
    stack = [(t1, t2)]
    while stack:
        a, b = stack.pop()
        a = subst_walk(a, s)
        b = subst_walk(b, s)
        if a is b:
            continue
        ta = type(a)
        tb = type(b)
        if ta is Var:
            if _occurs_subst(a, b, s):
                return None
            s[a] = b
            continue
        if tb is Var:
            if _occurs_subst(b, a, s):
                return None
            s[b] = a
            continue
        if ta is int or tb is int:
            if ta is not tb or a != b:
                return None
            continue
        if ta is Atom or tb is Atom:
            if ta is not tb or a.name != b.name:
                return None
            continue
        if a.functor != b.functor or len(a.args) != len(b.args):
            return None
        stack.extend(zip(a.args, b.args))
    return {v: apply_subst(s, t) for v, t in s.items()}


def rename_apart(t, mapping=None):
    """Fresh-variable copy; returns (copy, mapping)."""
    if mapping is None:
        mapping = {}
    return copy_term(t, mapping), mapping


# ---------------------------------------------------------------------------
# constraint kinds
# ---------------------------------------------------------------------------

K_GRAM = 0      # grammar symbol (token included), boundary args first
K_HOST = 1      # plain constraint, no boundaries
K_ABD = 2       # abducible
K_NABD = 3      # explicit negation of an abducible (underscore functor)
K_HYP_LIN = 4   # linear hypothesis      =+/1 (or timed +/1)
K_HYP_INT = 5   # intuitionistic hypothesis =*/1 (or timed */1)
K_EXP = 6       # expectation            =-/1 (or timed -/1)

ASSUMPTION_KINDS = (K_HYP_LIN, K_HYP_INT, K_EXP)

# functor -> (kind, timed)
ASSUMPTION_FUNCTORS = {
    "=+": (K_HYP_LIN, False),
    "=*": (K_HYP_INT, False),
    "=-": (K_EXP, False),
    "+": (K_HYP_LIN, True),
    "*": (K_HYP_INT, True),
    "-": (K_EXP, True),
}


class Constraint:
    __slots__ = ("id", "functor", "args", "kind", "alive", "timed", "apos",
                 "dkey", "bkey")

    def __init__(self, cid, functor, args, kind, timed=False, apos=None):
        self.id = cid
        self.functor = functor
        self.args = tuple(args)
        self.kind = kind
        self.alive = True
        self.timed = timed      # assumptions only
        self.apos = apos        # birth / span-start position, assumptions only
        # keys frozen at insert time: later bindings must not change how the
        # constraint is unindexed on retraction
        self.dkey = None        # structural identity key (set semantics)
        self.bkey = None        # (from, to) boundary key for grammar symbols

    def boundaries(self):
        """(from, to) for grammar symbols with integer boundaries, else None."""
        if self.kind != K_GRAM or len(self.args) < 2:
            return None
        a = deref(self.args[0])
        b = deref(self.args[1])
        if type(a) is int and type(b) is int:
            return (a, b)
        return None


# ---------------------------------------------------------------------------
# runtime rules (built by the compiler, executed here)
# ---------------------------------------------------------------------------

class RtHead:
    __slots__ = ("functor", "arity", "args", "kept", "active", "kind")

    def __init__(self, functor, args, kept, active, kind):
        self.functor = functor
        self.args = tuple(args)
        self.arity = len(self.args)
        self.kept = kept
        self.active = active
        self.kind = kind


class RtRule:
    """One committed-choice rewrite rule, ready to run.

    guard: list of guard atoms, each a tuple:
        ('cmp', op, t1, t2)   op in '=', '\\=', '==', '\\==', '=<', '<', '>', '>='
        ('integer', t)
        ('input_length', t)   t must equal the current input length
        ('compactable', i, j, skip) internal: args of heads i and j (after
                              dropping the first `skip` args) form an
                              untried, non-identical, unifiable pair
        ('true',)
    body: list of body items, each a tuple:
        ('sym', functor, args, kind)       constraint to add
        ('assume', kind, timed, payload)   assumption operator
        ('eq', t1, t2)  ('dif', t1, t2)    built-ins
        ('true',)  ('fail',)
        ('disj', [itemlist, ...])          chronological disjunction
    """
    __slots__ = (
        "id", "name", "heads", "guard", "body", "all_kept", "produces_sym",
        "child_positions", "span_vars", "index_var", "parent_index_vars",
        "copies_context", "compaction_pair", "source",
    )

    def __init__(self, rid, name, heads, guard, body):
        self.id = rid
        self.name = name
        self.heads = heads
        self.guard = guard
        self.body = body
        self.all_kept = all(h.kept for h in heads)
        self.produces_sym = any(it[0] == "sym" and it[3] == K_GRAM for it in body)
        self.child_positions = ()   # head indexes that are core grammar symbols
        self.span_vars = None       # (start Var, end Var) of the produced core
        self.index_var = None       # fresh-node index variable (indexed mode)
        self.parent_index_vars = () # head index variables (indexed mode)
        self.copies_context = False # copy parent abducibles into the new node
        self.compaction_pair = None # (i, j) head positions for pairwise merge
        self.source = None


class Program:
    """Rules plus the functor tables the engine needs."""

    def __init__(self, rules, kind_of_functor, input_length=0):
        self.rules = rules
        self.kind_of_functor = dict(kind_of_functor)  # (functor, arity)->kind
        # occurrence table: (functor, arity) -> ((rule, head_idx), ...)
        occ = {}
        for rule in rules:
            for i, h in enumerate(rule.heads):
                if not h.active:
                    continue
                occ.setdefault((h.functor, h.arity), []).append((rule, i))
        self.occurrences = {k: tuple(v) for k, v in occ.items()}


# ---------------------------------------------------------------------------
# matching and guards
# ---------------------------------------------------------------------------

def match_term(pat, t, env):
    """One-way match: pattern variables bind in env (never store variables).
    env maps var id -> store term."""
    stack = [(pat, t)]
    while stack:
        p, x = stack.pop()
        p = deref(p)
        if type(p) is Var:
            bound = env.get(p.id)
            if bound is None:
                env[p.id] = x
                continue
            if not identical(bound, x):
                return False
            continue
        x = deref(x)
        tp = type(p)
        tx = type(x)
        if tx is Var:
            return False
        if tp is int or tx is int:
            if tp is not tx or p != x:
                return False
            continue
        if tp is Atom or tx is Atom:
            if tp is not tx or p.name != x.name:
                return False
            continue
        if p.functor != x.functor or len(p.args) != len(x.args):
            return False
        stack.extend(zip(p.args, x.args))
    return True


def instantiate(t, env):
    """Build a term from a pattern under env; unseen pattern variables get
    fresh variables recorded in env (body-local variables)."""
    t = deref(t)
    ty = type(t)
    if ty is Var:
        bound = env.get(t.id)
        if bound is None:
            bound = Var()
            env[t.id] = bound
        return bound
    if ty is Struct:
        return Struct(t.functor, tuple(instantiate(a, env) for a in t.args))
    return t


def eval_int(t, env):
    """Evaluate a guard-side arithmetic expression to an int, or None."""
    t = deref(t)
    if type(t) is Var:
        b = env.get(t.id)
        if b is None:
            return None
        t = deref(b)
    if type(t) is int:
        return t
    if type(t) is Struct and len(t.args) == 2 and t.functor in ("+", "-", "*"):
        a = eval_int(t.args[0], env)
        b = eval_int(t.args[1], env)
        if a is None or b is None:
            return None
        if t.functor == "+":
            return a + b
        if t.functor == "-":
            return a - b
        return a * b
    return None


# ---------------------------------------------------------------------------
# the derivation state
# ---------------------------------------------------------------------------

class ChoicePoint:
    __slots__ = ("mark", "agenda", "branches", "env_snapshot")

    def __init__(self, mark, agenda, branches):
        self.mark = mark
        self.agenda = agenda
        self.branches = branches


class TxnFrame:
    __slots__ = ("mark", "agenda", "cp_depth", "node_index")

    def __init__(self, mark, agenda, cp_depth, node_index):
        self.mark = mark
        self.agenda = agenda
        self.cp_depth = cp_depth
        self.node_index = node_index


class DerivationState:
    """Constraint store + agenda + backtracking machinery for one run."""

    def __init__(self, program, input_length=0, indexed=False, trace=None,
                 max_steps=None):
        self.program = program
        self.input_length = input_length
        self.indexed = indexed
        self.trace = trace
        self.max_steps = max_steps

        self.cons = {}            # cid -> Constraint
        self.by_fa = {}           # (functor, arity) -> [cid, ...] append order
        self.by_start = {}        # (functor, arity, start) -> [cid, ...]
        self.by_end = {}          # (functor, arity, end) -> [cid, ...]
        self.dedup = {}           # structural key -> [cid, ...] live only
        self.var_watch = {}       # var id -> [cid, ...]

        self.agenda = []
        self.trail = []
        self.cps = []
        self.txns = []
        self.history = set()
        self.memo = set()
        self.difs = []            # [t1, t2, alive] triples (lists)
        self.applog = []          # (rule_id, child_cids, produced_cid)
        self.resolutions = []     # (hyp_cid, exp_cid, hyp_payload, exp_payload)

        self.failed = False
        self.next_cid = 0
        self.next_index = 0
        self.frontier = 0         # input position reached so far

        self.n_applications = 0
        self.n_created = 0        # grammar symbols actually inserted
        self.n_steps = 0

    # -- store primitives ---------------------------------------------------

    def fresh_index(self):
        self.next_index += 1
        return mkatom("#%d" % self.next_index)

    def _insert(self, functor, args, kind, timed=False, apos=None):
        """Raw insertion (no dedup); returns the new Constraint."""
        self.next_cid += 1
        c = Constraint(self.next_cid, functor, args, kind, timed, apos)
        self.cons[c.id] = c
        self.by_fa.setdefault((functor, len(args)), []).append(c.id)
        b = c.boundaries()
        c.bkey = b
        if b is not None:
            self.by_start.setdefault((functor, len(args), b[0]), []).append(c.id)
            self.by_end.setdefault((functor, len(args), b[1]), []).append(c.id)
        if kind not in ASSUMPTION_KINDS:
            c.dkey = (functor,) + tuple(term_key(a) for a in args)
            self.dedup.setdefault(c.dkey, []).append(c.id)
        for v in term_vars(Struct(functor, args) if args else mkatom(functor)):
            lst = self.var_watch.setdefault(v.id, [])
            if c.id not in lst:
                lst.append(c.id)
        self.trail.append(("a", c.id))
        if kind == K_GRAM and functor != "token":
            self.n_created += 1
        if functor == "token" and b is not None and b[1] > self.frontier:
            self.frontier = b[1]
        return c

    def _retract(self, cid):
        """Undo of _insert (trail replay only)."""
        c = self.cons.pop(cid)
        fa = (c.functor, len(c.args))
        self.by_fa[fa].remove(cid)
        if c.bkey is not None:
            self.by_start[(c.functor, len(c.args), c.bkey[0])].remove(cid)
            self.by_end[(c.functor, len(c.args), c.bkey[1])].remove(cid)
        if c.dkey is not None:
            lst = self.dedup.get(c.dkey)
            if lst and cid in lst:
                lst.remove(cid)
        if c.kind == K_GRAM and c.functor != "token":
            self.n_created -= 1

    def _revive(self, c):
        """Undo of kill (trail replay only)."""
        c.alive = True
        if c.dkey is not None:
            lst = self.dedup.setdefault(c.dkey, [])
            if c.id not in lst:
                lst.append(c.id)

    def find_identical_live(self, functor, args):
        """Set behavior: a live constraint syntactically identical to the
        candidate, if any."""
        key = (functor,) + tuple(term_key(a) for a in args)
        for cid in self.dedup.get(key, ()):
            c = self.cons.get(cid)
            if c is not None and c.alive and len(c.args) == len(args):
                if all(identical(a, b) for a, b in zip(c.args, args)):
                    return c
        return None

    def kill(self, c):
        c.alive = False
        if c.dkey is not None:
            lst = self.dedup.get(c.dkey)
            if lst and c.id in lst:
                lst.remove(c.id)
        self.trail.append(("k", c))

    def add_constraint(self, functor, args, kind=None, timed=False, apos=None,
                       activate=True):
        """Public insertion with set semantics; returns the Constraint
        (existing one on a dedup hit)."""
        if kind is None:
            kind = self.program.kind_of_functor.get(
                (functor, len(args)), K_HOST)
        if kind not in ASSUMPTION_KINDS:
            existing = self.find_identical_live(functor, args)
            if existing is not None:
                return existing
        c = self._insert(functor, args, kind, timed, apos)
        if activate:
            self.agenda.append(("act", c.id))
        return c

    # -- disequations ---------------------------------------------------------

    def add_dif(self, t1, t2):
        """Record t1 ~= t2; False means immediate inconsistency."""
        if identical(t1, t2):
            return False
        if not unifiable(t1, t2):
            return True
        self.difs.append([t1, t2, True])
        self.trail.append(("da", None))
        return True

    def recheck_difs(self):
        for i, pair in enumerate(self.difs):
            if not pair[2]:
                continue
            if identical(pair[0], pair[1]):
                return False
            if not unifiable(pair[0], pair[1]):
                pair[2] = False
                self.trail.append(("dr", i))
        return True

    # -- binding notifications ------------------------------------------------

    def after_bindings(self, mark):
        """Re-activate constraints whose variables were bound since mark and
        re-check disequations.  Returns False on dif inconsistency."""
        i = mark
        bound = []
        while i < len(self.trail):
            e = self.trail[i]
            if e[0] == "b":
                bound.append(e[1])
            i += 1
        for v in bound:
            watchers = self.var_watch.get(v.id)
            if not watchers:
                continue
            new_vars = term_vars(v.ref)
            for cid in list(watchers):
                c = self.cons.get(cid)
                if c is None or not c.alive:
                    continue
                for nv in new_vars:
                    lst = self.var_watch.setdefault(nv.id, [])
                    if cid not in lst:
                        lst.append(cid)
                self.agenda.append(("act", cid))
        return self.recheck_difs()

    # -- failure / backtracking ------------------------------------------------

    def signal_failure(self):
        """Backtrack: newest choice point first, then enclosing transaction,
        else the whole derivation fails."""
        while True:
            cp_live = bool(self.cps)
            txn_live = bool(self.txns)
            if cp_live and (not txn_live or self.cps[-1].mark >= self.txns[-1].mark):
                cp = self.cps[-1]
                undo_trail(self.trail, cp.mark, self)
                self.agenda = list(cp.agenda)
                branch = cp.branches.pop(0)
                if not cp.branches:
                    self.cps.pop()
                self.agenda.extend(reversed(branch))
                return True
            if txn_live:
                fr = self.txns.pop()
                undo_trail(self.trail, fr.mark, self)
                self.agenda = list(fr.agenda)
                del self.cps[fr.cp_depth:]
                if self.trace:
                    self.trace({"event": "node_cancelled",
                                "index": fr.node_index})
                return True
            self.failed = True
            return False

    def force_fail(self):
        """Drive the search into the next alternative (answer enumeration)."""
        return self.signal_failure()

    # -- rule application -------------------------------------------------------

    def activate(self, cid):
        c = self.cons.get(cid)
        if c is None or not c.alive:
            return
        k = c.kind
        if k == K_EXP:
            self._resolve_expectation(c)
            return
        if k == K_HYP_LIN or k == K_HYP_INT:
            self._resolve_hypothesis(c)
            return
        occ = self.program.occurrences.get((c.functor, len(c.args)))
        if not occ:
            return
        for rule, hidx in occ:
            if self._try_rule(rule, hidx, c):
                return

    def _try_rule(self, rule, hidx, c):
        env = {}
        if not match_term_args(rule.heads[hidx].args, c.args, env):
            return False
        chosen = [None] * len(rule.heads)
        chosen[hidx] = c
        return self._search_partners(rule, chosen, env, 0, c)

    def _search_partners(self, rule, chosen, env, next_pos, active):
        # find the next unfilled head position
        pos = next_pos
        nheads = len(rule.heads)
        while pos < nheads and chosen[pos] is not None:
            pos += 1
        if pos == nheads:
            return self._complete_match(rule, chosen, env, active)
        head = rule.heads[pos]
        for cand in self._candidates(head, env):
            if not cand.alive:
                continue
            dup = False
            for ch in chosen:
                if ch is not None and ch.id == cand.id:
                    dup = True
                    break
            if dup:
                continue
            env2 = dict(env)
            if not match_term_args(head.args, cand.args, env2):
                continue
            chosen[pos] = cand
            if self._search_partners(rule, chosen, env2, pos + 1, active):
                return True
            chosen[pos] = None
        return False

    def _candidates(self, head, env):
        """Candidate constraints for a head pattern, newest first, using a
        boundary index when the pattern pins a boundary."""
        fa = (head.functor, head.arity)
        lst = None
        if head.kind == K_GRAM and head.arity >= 2:
            p0 = deref(head.args[0])
            if type(p0) is Var:
                b = env.get(p0.id)
                p0 = deref(b) if b is not None else None
            if type(p0) is int:
                lst = self.by_start.get((head.functor, head.arity, p0))
            else:
                p1 = deref(head.args[1])
                if type(p1) is Var:
                    b = env.get(p1.id)
                    p1 = deref(b) if b is not None else None
                if type(p1) is int:
                    lst = self.by_end.get((head.functor, head.arity, p1))
        if lst is None:
            lst = self.by_fa.get(fa)
        if not lst:
            return ()
        return (self.cons[cid] for cid in reversed(lst))

    def _complete_match(self, rule, chosen, env, active):
        if rule.all_kept and rule.compaction_pair is None:
            key = (rule.id,) + tuple(c.id for c in chosen)
            if key in self.history:
                return False
        if not self._check_guard(rule, chosen, env):
            return False
        self._apply(rule, chosen, env, active)
        return True

    def _check_guard(self, rule, chosen, env):
        for g in rule.guard:
            tag = g[0]
            if tag == "true":
                continue
            if tag == "integer":
                t = deref(g[1])
                if type(t) is Var:
                    t = env.get(t.id)
                    t = deref(t) if t is not None else None
                if type(t) is not int:
                    return False
                continue
            if tag == "input_length":
                # boundary anchored at the right end of the whole input
                t = deref(g[1])
                if type(t) is Var:
                    b = env.get(t.id)
                    if b is None:
                        env[t.id] = self.input_length
                        continue
                    t = deref(b)
                if type(t) is not int or t != self.input_length:
                    return False
                continue
            if tag == "compactable":
                c1 = chosen[g[1]]
                c2 = chosen[g[2]]
                lo, hi = (c1.id, c2.id) if c1.id < c2.id else (c2.id, c1.id)
                if ("cp", lo, hi) in self.memo:
                    return False
                t1 = Struct("$args", c1.args[g[3]:])
                t2 = Struct("$args", c2.args[g[3]:])
                if identical(t1, t2):
                    return False
                if not unifiable(t1, t2):
                    return False
                continue
            if tag == "cmp":
                if not self._check_cmp(g[1], g[2], g[3], env):
                    return False
                continue
            return False
        return True

    def _check_cmp(self, op, t1, t2, env):
        if op == "=":
            # entailment equality; may solve for a rule-local variable that
            # occurs in no head (used to anchor computed boundaries)
            a = deref(t1)
            if type(a) is Var and a.id not in env:
                v = eval_int(t2, env)
                if v is None:
                    return False
                env[a.id] = v
                return True
            a = self._guard_value(t1, env)
            b = self._guard_value(t2, env)
            if a is None or b is None:
                return False
            return identical(a, b)
        if op in ("==",):
            a = self._guard_value(t1, env)
            b = self._guard_value(t2, env)
            if a is None or b is None:
                return False
            return identical(a, b)
        if op in ("\\=", "\\=="):
            a = self._guard_value(t1, env)
            b = self._guard_value(t2, env)
            if a is None or b is None:
                return False
            if op == "\\==":
                return not identical(a, b)
            return not unifiable(a, b)
        # arithmetic comparisons: both sides must evaluate to integers
        a = eval_int(t1, env)
        b = eval_int(t2, env)
        if a is None or b is None:
            return False
        if op == "=<":
            return a <= b
        if op == "<":
            return a < b
        if op == ">":
            return a > b
        if op == ">=":
            return a >= b
        return False

    def _guard_value(self, t, env):
        t = deref(t)
        if type(t) is Var:
            b = env.get(t.id)
            if b is None:
                return None
            if type(b) is int:
                return b
            return deref(b)
        if type(t) is Struct:
            return instantiate(t, dict(env))
        return t

    def _apply(self, rule, chosen, env, active):
        self.n_applications += 1
        if self.trace:
            self.trace({
                "event": "apply", "rule": rule.name or str(rule.id),
                "heads": [render_constraint(c) for c in chosen],
            })

        # the active constraint reconsiders the program after the body wave
        # (dead constraints are skipped at pop time)
        self.agenda.append(("act", active.id))

        if rule.all_kept and rule.compaction_pair is None:
            key = (rule.id,) + tuple(c.id for c in chosen)
            self.history.add(key)
            self.trail.append(("h", key))
        if rule.compaction_pair is not None:
            i, j = rule.compaction_pair
            a, b = chosen[i].id, chosen[j].id
            lo, hi = (a, b) if a < b else (b, a)
            mkey = ("cp", lo, hi)
            self.memo.add(mkey)
            self.trail.append(("m", mkey))

        # node transaction (indexed mode, node-building rules only)
        open_txn = self.indexed and rule.index_var is not None
        node_index = None
        if open_txn:
            node_index = self.fresh_index()
            env[rule.index_var.id] = node_index
            frame = TxnFrame(len(self.trail), list(self.agenda),
                             len(self.cps), node_index)
            self.txns.append(frame)
            self.agenda.append(("txn_end",))

        for k, c in zip(rule.heads, chosen):
            if not k.kept:
                self.kill(c)

        goals = []
        if open_txn and rule.copies_context:
            parents = []
            for pv in rule.parent_index_vars:
                val = env.get(pv.id)
                if val is not None:
                    val = deref(val)
                    if type(val) is Atom and all(
                            not (type(p) is Atom and p.name == val.name)
                            for p in parents):
                        parents.append(val)
            goals.extend(self._context_copy_goals(parents, node_index))

        span = None
        if rule.span_vars is not None:
            s0 = env.get(rule.span_vars[0].id)
            s1 = env.get(rule.span_vars[1].id)
            s0 = deref(s0) if s0 is not None else None
            s1 = deref(s1) if s1 is not None else None
            if type(s0) is int and type(s1) is int:
                span = (s0, s1)

        child_cids = tuple(chosen[i].id for i in rule.child_positions)
        goals.extend(self._instantiate_body(rule.body, env, rule, child_cids,
                                            span))
        self.agenda.extend(reversed(goals))

    def _context_copy_goals(self, parents, node_index):
        """Copies of every live abducible belonging to a parent node, with
        the fresh node index; one shared renaming for the whole group."""
        group = []
        for (f, a), lst in self.by_fa.items():
            for cid in lst:
                c = self.cons.get(cid)
                if c is None or not c.alive:
                    continue
                if c.kind not in (K_ABD, K_NABD) or not c.args:
                    continue
                idx = deref(c.args[0])
                if type(idx) is Atom and any(p.name == idx.name for p in parents):
                    group.append(c)
        group.sort(key=lambda c: c.id)
        mapping = {}
        goals = []
        for c in group:
            new_args = (node_index,) + tuple(
                copy_term(a, mapping) for a in c.args[1:])
            goals.append(("add", c.functor, new_args, c.kind, None, None))
        return goals

    def _instantiate_body(self, items, env, rule, child_cids, span):
        goals = []
        for it in items:
            tag = it[0]
            if tag == "sym":
                args = tuple(instantiate(a, env) for a in it[2])
                logref = None
                if it[3] == K_GRAM and rule is not None:
                    logref = (rule.id, child_cids)
                goals.append(("add", it[1], args, it[3], logref, None))
            elif tag == "assume":
                payload = instantiate(it[3], env)
                kind, timed = it[1], it[2]
                if timed:
                    if span is not None:
                        pos = span[1] if kind in (K_HYP_LIN, K_HYP_INT) else span[0]
                    else:
                        pos = self.frontier
                else:
                    pos = None
                goals.append(("assume", kind, timed, payload, pos))
            elif tag == "eq":
                goals.append(("eq", instantiate(it[1], env),
                              instantiate(it[2], env)))
            elif tag == "dif":
                goals.append(("dif", instantiate(it[1], env),
                              instantiate(it[2], env)))
            elif tag == "true":
                pass
            elif tag == "fail":
                goals.append(("fail",))
            elif tag == "disj":
                branches = [self._instantiate_body(b, env, rule, child_cids,
                                                   span)
                            for b in it[1]]
                goals.append(("disj", branches))
            else:
                raise ValueError("unknown body item %r" % (tag,))
        return goals

    # -- assumption resolution ---------------------------------------------------

    def _assumption_live(self, kinds):
        out = []
        for functor in ("=+", "=*", "=-", "+", "*", "-"):
            for cid in self.by_fa.get((functor, 1), ()):
                c = self.cons.get(cid)
                if c is not None and c.alive and c.kind in kinds:
                    out.append(c)
        out.sort(key=lambda c: c.id)
        return out

    def _pair_eligible(self, hyp, exp):
        if hyp.timed and exp.timed:
            if hyp.apos is not None and exp.apos is not None:
                return exp.apos >= hyp.apos
        return True

    def _resolve_expectation(self, e):
        for h in reversed(self._assumption_live((K_HYP_LIN, K_HYP_INT))):
            key = ("as", h.id, e.id)
            if key in self.memo:
                continue
            if not self._pair_eligible(h, e):
                continue
            if not unifiable(h.args[0], e.args[0]):
                continue
            self._branch_resolution(h, e, reactivate=e.id)
            return
        # stays pending

    def _resolve_hypothesis(self, h):
        for e in reversed(self._assumption_live((K_EXP,))):
            key = ("as", h.id, e.id)
            if key in self.memo:
                continue
            if not self._pair_eligible(h, e):
                continue
            if not unifiable(h.args[0], e.args[0]):
                continue
            self._branch_resolution(h, e, reactivate=h.id)
            return

    def _branch_resolution(self, h, e, reactivate):
        consume = [("consume", h.id, e.id), ("act", reactivate)]
        skip = [("memo", ("as", h.id, e.id)), ("act", reactivate)]
        cp = ChoicePoint(len(self.trail), list(self.agenda), [skip])
        self.cps.append(cp)
        self.agenda.extend(reversed(consume))

    # -- the step loop -------------------------------------------------------------

    def step(self):
        entry = self.agenda.pop()
        tag = entry[0]

        if tag == "act":
            self.activate(entry[1])
            return

        if tag == "add":
            _, functor, args, kind, logref, _ = entry
            if kind not in ASSUMPTION_KINDS:
                existing = self.find_identical_live(functor, args)
                if existing is not None:
                    if logref is not None:
                        self.applog.append((logref[0], logref[1], existing.id))
                        self.trail.append(("log", None))
                    return
            c = self._insert(functor, args, kind)
            if logref is not None:
                self.applog.append((logref[0], logref[1], c.id))
                self.trail.append(("log", None))
            self.agenda.append(("act", c.id))
            return

        if tag == "assume":
            _, kind, timed, payload, pos = entry
            functor = {
                (K_HYP_LIN, False): "=+", (K_HYP_INT, False): "=*",
                (K_EXP, False): "=-", (K_HYP_LIN, True): "+",
                (K_HYP_INT, True): "*", (K_EXP, True): "-",
            }[(kind, timed)]
            c = self._insert(functor, (payload,), kind, timed, pos)
            self.agenda.append(("act", c.id))
            return

        if tag == "eq":
            mark = len(self.trail)
            if not unify(entry[1], entry[2], self.trail):
                undo_trail(self.trail, mark, self)
                self.signal_failure()
                return
            if not self.after_bindings(mark):
                self.signal_failure()
            return

        if tag == "dif":
            if not self.add_dif(entry[1], entry[2]):
                self.signal_failure()
            return

        if tag == "fail":
            self.signal_failure()
            return

        if tag == "true":
            return

        if tag == "disj":
            branches = entry[1]
            if not branches:
                self.signal_failure()
                return
            first, rest = branches[0], branches[1:]
            if rest:
                cp = ChoicePoint(len(self.trail), list(self.agenda),
                                 [list(b) for b in rest])
                self.cps.append(cp)
            self.agenda.extend(reversed(first))
            return

        if tag == "memo":
            self.memo.add(entry[1])
            self.trail.append(("m", entry[1]))
            return

        if tag == "consume":
            h = self.cons.get(entry[1])
            e = self.cons.get(entry[2])
            if h is None or e is None or not h.alive or not e.alive:
                self.signal_failure()
                return
            self.kill(e)
            if h.kind == K_HYP_LIN:
                self.kill(h)
            mark = len(self.trail)
            if not unify(h.args[0], e.args[0], self.trail):
                undo_trail(self.trail, mark, self)
                self.signal_failure()
                return
            self.resolutions.append((h.id, e.id, h.args[0], e.args[0]))
            self.trail.append(("res", None))
            if self.trace:
                self.trace({"event": "assumption_resolved",
                            "hypothesis": render_term(h.args[0]),
                            "expectation": render_term(e.args[0])})
            if not self.after_bindings(mark):
                self.signal_failure()
            return

        if tag == "txn_end":
            if self.txns:
                fr = self.txns.pop()
                del self.cps[fr.cp_depth:]
            return

        raise ValueError("unknown agenda entry %r" % (tag,))

    def run(self):
        """Run to quiescence.  True on success, False when the derivation
        failed with no alternatives left."""
        while self.agenda and not self.failed:
            self.n_steps += 1
            if self.max_steps is not None and self.n_steps > self.max_steps:
                raise RuntimeError("derivation exceeded step limit")
            self.step()
        return not self.failed

    def run_all(self, collect, limit=None):
        """Enumerate final states chronologically; collect(state) snapshots
        each answer."""
        out = []
        if self.run():
            out.append(collect(self))
        while limit is None or len(out) < limit:
            if not self.force_fail():
                break
            if self.run():
                out.append(collect(self))
        return out

    # -- queries --------------------------------------------------------------

    def live_constraints(self):
        return [c for c in self.cons.values() if c.alive]

    def live_difs(self):
        return [(p[0], p[1]) for p in self.difs if p[2]]


def match_term_args(pat_args, args, env):
    if len(pat_args) != len(args):
        return False
    for p, a in zip(pat_args, args):
        if not match_term(p, a, env):
            return False
    return True


# ---------------------------------------------------------------------------
# rendering (shared by driver and CLI)
# ---------------------------------------------------------------------------

_SYMBOLIC_INFIX = {"+", "-", "*", "/", "^", "=", "\\=", "==", "\\==",
                   "=<", "<", ">", ">=", ":", "@"}


def render_term(t):
    t = deref(t)
    ty = type(t)
    if ty is Var:
        return "_" + str(t.id) if t.name.startswith("_G") else t.name
    if ty is int:
        return str(t)
    if ty is Atom:
        return _render_atom(t.name)
    if t.functor == "." and len(t.args) == 2:
        items, tail = list_parts(t)
        inner = ",".join(render_term(x) for x in items)
        if type(deref(tail)) is Atom and deref(tail).name == "[]":
            return "[%s]" % inner
        return "[%s|%s]" % (inner, render_term(tail))
    if t.functor in _SYMBOLIC_INFIX and len(t.args) == 2:
        return "%s%s%s" % (render_term(t.args[0]), t.functor,
                           render_term(t.args[1]))
    return "%s(%s)" % (_render_atom(t.functor),
                       ",".join(render_term(a) for a in t.args))


def _render_atom(name):
    if name == "[]" or name == "":
        return "[]" if name == "[]" else "''"
    if all(c.isalnum() or c == "_" for c in name) and (name[0].islower()):
        return name
    if all(c in "+-*/\\^<>=~:.?@#&$" for c in name):
        return name
    if name in ("!", ";", "|"):
        return name
    return "'%s'" % name.replace("\\", "\\\\").replace("'", "\\'")


def render_constraint(c):
    if c.kind in ASSUMPTION_KINDS:
        return "%s%s" % (c.functor, render_term(c.args[0]))
    if not c.args:
        return _render_atom(c.functor)
    return "%s(%s)" % (_render_atom(c.functor),
                       ",".join(render_term(a) for a in c.args))


# ---------------------------------------------------------------------------
# answer snapshots
# ---------------------------------------------------------------------------

class Answer:
    """Frozen copy of a final state: live constraints, pending disequations,
    assumption resolutions, and the tree-building log."""

    __slots__ = ("constraints", "difs", "resolutions", "applog", "hidden",
                 "input_length", "n_applications", "n_created")

    def __init__(self, state):
        mapping = {}
        self.constraints = []
        self.hidden = []
        for c in sorted(state.cons.values(), key=lambda c: c.id):
            snap = (c.id, c.functor,
                    tuple(copy_term(a, mapping) for a in c.args),
                    c.kind, c.timed, c.apos)
            if c.alive:
                self.constraints.append(snap)
            else:
                self.hidden.append(snap)
        self.difs = [(copy_term(a, mapping), copy_term(b, mapping))
                     for (a, b) in state.live_difs()]
        self.resolutions = [
            (h, e, copy_term(th, mapping), copy_term(te, mapping))
            for (h, e, th, te) in state.resolutions]
        self.applog = list(state.applog)
        self.input_length = state.input_length
        self.n_applications = state.n_applications
        self.n_created = state.n_created

    def live(self, kinds=None):
        if kinds is None:
            return list(self.constraints)
        return [c for c in self.constraints if c[3] in kinds]
