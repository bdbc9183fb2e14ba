"""Term reader: operator table, grammar-notation operators, errors."""

import pytest

from chrg.kernel import Atom, Struct, Var, deref, render_term
from chrg.reader import read_term, read_terms, ReaderError


def s(t):
    return render_term(t)


def test_basic_terms():
    assert s(read_term("foo")) == "foo"
    assert s(read_term("foo(bar, 3)")) == "foo(bar,3)"
    assert s(read_term("[a, b, c]")) == "[a,b,c]"
    assert s(read_term("[H|T]")) == "[H|T]"
    assert s(read_term("'quoted atom'")) == "'quoted atom'"


def test_arithmetic_precedence():
    t = read_term("1 + 2 * 3")
    assert t.functor == "+" and t.args[1].functor == "*"
    t = read_term("1 * 2 + 3")
    assert t.functor == "+" and t.args[0].functor == "*"
    t = read_term("2 ^ 3 ^ 4")            # xfy: right associative
    assert t.functor == "^" and t.args[1].functor == "^"
    t = read_term("1 - 2 - 3")            # yfx: left associative
    assert t.functor == "-" and t.args[0].functor == "-"


def test_comparison_and_unify_ops():
    for op in ("=", "=<", "<", ">", ">=", "==", "\\==", "\\="):
        t = read_term("a %s b" % op)
        assert t.functor == op and len(t.args) == 2


def test_rule_operators():
    t = read_term("a ::> b")
    assert t.functor == "::>" and len(t.args) == 2
    t = read_term("a <:> b")
    assert t.functor == "<:>" and len(t.args) == 2
    t = read_term("a ==> b")
    assert t.functor == "==>"
    t = read_term("a <=> b")
    assert t.functor == "<=>"
    t = read_term("h \\ r <=> b")
    assert t.functor == "<=>" and t.args[0].functor == "\\"
    t = read_term("a, b ::> c | d")       # guard binds into the body side
    assert t.functor == "::>"
    assert t.args[1].functor == "|"


def test_context_operators():
    t = read_term("a -\\ b /- c ::> d")
    assert t.functor == "::>"
    head = t.args[0]
    assert head.functor == "-\\"          # left context binds loosest
    assert head.args[1].functor == "/-"


def test_parallel_match_operator():
    t = read_term("a, b $ c ::> d")
    head = read_term("a, b $ c")
    # $ binds looser than ',': operands are the full sequences
    assert head.functor == "$"
    assert head.args[0].functor == ","
    assert s(head.args[1]) == "c"
    assert t.args[0].functor == "$"


def test_gap_and_bang():
    t = read_term("...")
    assert isinstance(t, Atom) and t.name == "..."
    t = read_term("2...5")
    assert t.functor == "..." and t.args == (2, 5)
    t = read_term("!np(X)")
    assert t.functor == "!" and t.args[0].functor == "np"


def test_where_and_names():
    t = read_term("(a ::> b) where X = f(Y)")
    assert t.functor == "where"
    (t2,) = [t]
    t = read_term("name @@ (a ::> b)")
    assert t.functor == "@@"


def test_assumption_prefixes():
    for op in ("=+", "=*", "=-", "+", "-", "*"):
        t = read_term("%sh(a)" % op)
        assert t.functor == op and len(t.args) == 1, op


def test_disjunction_and_curly():
    t = read_term("(a ; b)")
    assert t.functor == ";"
    t = read_term("{goal(X)}")
    assert t.functor == "{}" and t.args[0].functor == "goal"


def test_negative_numbers_and_vars():
    t = read_term("f(-1, X, _)")
    assert t.args[0] == -1
    assert isinstance(deref(t.args[1]), Var)
    assert isinstance(deref(t.args[2]), Var)
    # two _ are distinct; two X are the same
    t = read_term("g(X, X, _, _)")
    assert deref(t.args[0]) is deref(t.args[1])
    assert deref(t.args[2]) is not deref(t.args[3])


def test_read_terms_multiple_clauses_and_lines():
    clauses = read_terms("a.\nb ==> c.\n")
    assert len(clauses) == 2
    assert clauses[0][1] == 1 and clauses[1][1] == 2
    # varnames map recorded
    clauses = read_terms("f(Xy).")
    assert "Xy" in clauses[0][2]


def test_reader_errors():
    with pytest.raises(ReaderError):
        read_terms("f(a.")            # unclosed paren
    with pytest.raises(ReaderError):
        read_terms("f(a) g(b).")      # missing operator
    with pytest.raises(ReaderError):
        read_terms("'unterminated")


def test_comments_ignored():
    clauses = read_terms("% line comment\na. /* block\ncomment */ b.\n")
    assert len(clauses) == 2
