"""Input handling and answer presentation: tokenization, parse-tree
recovery and counting, phrase grouping, and store dumps."""

from chrg import (
    boundary_line, compile_grammar, count_trees, dump_store,
    maximal_unambiguous_sets, parse, parse_text, roots, tokenize_text,
    trees,
)
from chrg.kernel import K_HOST
from chrg.reader import read_term

from conftest import store_set

AMBIG = compile_grammar("""handler t.
grammar_symbols x/0.
[a] ::> x.
x, x ::> x.
end_of_CHRG_source.
""")


def test_tokenize_text():
    assert tokenize_text("Peter likes Mary.") == \
        ["peter", "likes", "mary", "."]
    assert tokenize_text("a,b") == ["a", ",", "b"]
    assert tokenize_text("x 12 y") == ["x", 12, "y"]
    assert tokenize_text("don't") == ["don't"]
    assert tokenize_text("") == []


def test_parse_text_matches_parse():
    a1 = parse_text(AMBIG, "a a")[0][0]
    a2 = parse(AMBIG, ["a", "a"])[0][0]
    assert store_set(a1) == store_set(a2)


def test_roots_filtering():
    (a,) = parse(AMBIG, ["a", "a", "a"])[0]
    assert {s[2][:2] for s in roots(a, "x", span="input")} == {(0, 3)}
    assert {s[2][:2] for s in roots(a, "x")} == {
        (0, 1), (1, 2), (2, 3), (0, 2), (1, 3), (0, 3)}
    assert {s[2][:2] for s in roots(a, "x", span=(1, 3))} == {(1, 3)}
    assert roots(a, "nosuch") == []


def test_trees_enumerate_bracketings():
    (a,) = parse(AMBIG, ["a", "a", "a"])[0]
    got = {t.format() for t in trees(a, "x")}
    left = ("x(0,3)\n  x(0,2)\n    x(0,1)\n      token(0,1,a)\n"
            "    x(1,2)\n      token(1,2,a)\n  x(2,3)\n      token(2,3,a)"
            .replace("\n      token(2,3,a)", "\n    token(2,3,a)"))
    right = ("x(0,3)\n  x(0,1)\n    token(0,1,a)\n  x(1,3)\n"
             "    x(1,2)\n      token(1,2,a)\n    x(2,3)\n"
             "      token(2,3,a)")
    assert got == {left, right}


def test_tree_leaves_are_tokens_in_order():
    (a,) = parse(AMBIG, ["a", "a", "a"])[0]
    for t in trees(a, "x"):
        assert [leaf.label for leaf in t.leaves()] == \
            ["token(0,1,a)", "token(1,2,a)", "token(2,3,a)"]


def test_count_trees_catalan():
    for n, want in [(1, 1), (2, 1), (3, 2), (4, 5), (5, 14)]:
        (a,) = parse(AMBIG, ["a"] * n)[0]
        assert count_trees(a, "x") == want


def test_count_matches_materialized_trees():
    (a,) = parse(AMBIG, ["a"] * 4)[0]
    assert count_trees(a, "x") == len(trees(a, "x"))


def test_maximal_unambiguous_sets_two_bracketings():
    (a,) = parse(AMBIG, ["a", "a", "a"])[0]
    groups = maximal_unambiguous_sets(a)
    spans = [sorted(s[2][:2] for s in grp) for grp in groups]
    assert spans == [
        [(0, 1), (0, 2), (0, 3), (1, 2), (2, 3)],
        [(0, 1), (0, 3), (1, 2), (1, 3), (2, 3)],
    ]


def test_maximal_unambiguous_sets_unambiguous_store():
    cg = compile_grammar("""handler t.
grammar_symbols np/0, verb/0, sentence/0.
np, verb, np ::> sentence.
[peter] ::> np.  [mary] ::> np.  [likes] ::> verb.
end_of_CHRG_source.
""")
    (a,) = parse(cg, ["peter", "likes", "mary"])[0]
    groups = maximal_unambiguous_sets(a)
    assert len(groups) == 1
    assert sorted((s[1],) + tuple(s[2][:2]) for s in groups[0]) == [
        ("np", 0, 1), ("np", 2, 3), ("sentence", 0, 3), ("verb", 1, 2)]


def test_maximal_unambiguous_sets_empty_store():
    (a,) = parse(AMBIG, [])[0]
    assert maximal_unambiguous_sets(a) == [[]]


def test_dump_store_text():
    (a,) = parse(AMBIG, ["a", "a"])[0]
    assert dump_store(a, ["a", "a"]) == (
        "<0> a <1> a <2>\nx(0,1)\nx(0,2)\nx(1,2)")
    with_tokens = dump_store(a, ["a", "a"], show_tokens=True)
    assert "token(0,1,a)" in with_tokens


def test_boundary_line():
    assert boundary_line([]) == "<0>"
    assert boundary_line(["a", "b"]) == "<0> a <1> b <2>"


def test_pre_goals_enter_before_first_word():
    cg = compile_grammar("""handler t.
grammar_symbols x/0.
constraints p/1.
[a] ::> x.
end_of_CHRG_source.
""")
    (a,) = parse(cg, ["a"], pre=[read_term("p(7)")])[0]
    assert store_set(a, (K_HOST,)) == {"p(7)"}
    assert store_set(a) == {"token(0,1,a)", "x(0,1)"}
