"""Execution core: left-to-right committed processing, set semantics,
application history, guards, suspension and reactivation, answer
enumeration, and the step limit."""

import pytest

from chrg import compile_grammar, parse
from chrg.kernel import K_GRAM, K_HOST

from conftest import store_set

WRAP = "handler t.\n%s\nend_of_CHRG_source.\n"


def run(src, words, **kw):
    answers, state = parse(compile_grammar(WRAP % src), words, **kw)
    return answers


def test_basic_parse_exact_store():
    (a,) = run("""
        grammar_symbols np/0, verb/0, sentence/0.
        np, verb, np ::> sentence.
        [peter] ::> np.  [mary] ::> np.  [likes] ::> verb.
    """, ["peter", "likes", "mary"])
    assert store_set(a) == {
        "token(0,1,peter)", "token(1,2,likes)", "token(2,3,mary)",
        "np(0,1)", "verb(1,2)", "np(2,3)", "sentence(0,3)"}


def test_simplification_consumes_matched_symbols():
    (a,) = run("""
        grammar_symbols np/0, verb/0, sentence/0.
        np, verb, np <:> sentence.
        [peter] <:> np.  [mary] <:> np.  [likes] <:> verb.
    """, ["peter", "likes", "mary"])
    assert store_set(a) == {"sentence(0,3)"}


def test_left_to_right_commitment():
    # each word is processed to quiescence before the next arrives, so
    # the first simplification wins and starves the second
    (a,) = run("""
        grammar_symbols x/0, y/0.
        [a], [b] <:> x.
        [b], [c] <:> y.
    """, ["a", "b", "c"])
    assert store_set(a) == {"x(0,2)", "token(2,3,c)"}


def test_set_semantics_one_copy_per_symbol():
    (a,) = run("""
        grammar_symbols s/0.
        [w] ::> s.
        [w] $ s ::> s.
    """, ["w"])
    assert store_set(a) == {"token(0,1,w)", "s(0,1)"}


def test_head_occurrences_need_distinct_constraints():
    # the two parallel occurrences require two different store entries,
    # and set semantics admits only one s(0,1)
    (a,) = run("""
        grammar_symbols a/0, b/0.
        [w] ::> a.
        a $ a ::> b.
    """, ["w"])
    assert store_set(a) == {"token(0,1,w)", "a(0,1)"}


def test_self_combining_symbol_reaches_fixpoint():
    (a,) = run("""
        grammar_symbols x/0.
        [w] ::> x.
        x, x ::> x.
    """, ["w", "w", "w"])
    assert store_set(a) == {
        "token(0,1,w)", "token(1,2,w)", "token(2,3,w)",
        "x(0,1)", "x(1,2)", "x(2,3)", "x(0,2)", "x(1,3)", "x(0,3)"}
    # three lexical applications plus four combinations (x(0,3) is
    # derived twice; the duplicate application is logged, not stored)
    assert a.n_applications == 7


def test_application_log_keeps_duplicate_derivations():
    (a,) = run("""
        grammar_symbols x/0.
        [w] ::> x.
        x, x ::> x.
    """, ["w", "w", "w"])
    produced = {}
    for (_rid, _children, prod) in a.applog:
        produced[prod] = produced.get(prod, 0) + 1
    by_cid = {c[0]: c for c in a.constraints}
    two_way = [cid for cid, n in produced.items() if n == 2]
    assert len(two_way) == 1
    assert by_cid[two_way[0]][1] == "x"
    assert by_cid[two_way[0]][2][:2] == (0, 3)


def test_guards_filter_matches():
    (a,) = run("""
        grammar_symbols num/1, big/1.
        [X] ::> integer(X) | num(X).
        num(X) ::> X > 5 | big(X).
    """, [3, 7, "w"])
    assert store_set(a) == {
        "token(0,1,3)", "token(1,2,7)", "token(2,3,w)",
        "num(0,1,3)", "num(1,2,7)", "big(1,2,7)"}


def test_bounded_gap_guard_blocks_far_pairs():
    src = """
        grammar_symbols a/0, b/0, c/0.
        [x] ::> a.
        [y] ::> b.
        a, 1...2, b ::> c.
    """
    (near,) = run(src, ["x", "w", "y"])          # distance 1
    assert "c(0,3)" in store_set(near)
    (adjacent,) = run(src, ["x", "y"])           # distance 0
    assert not any(s.startswith("c(") for s in store_set(adjacent))
    (far,) = run(src, ["x", "w", "w", "w", "y"])  # distance 3
    assert not any(s.startswith("c(") for s in store_set(far))


def test_suspended_guard_wakes_on_binding():
    # p(X) suspends on its guard; consuming the hypothesis binds X and
    # reactivates it
    (a,) = run("""
        grammar_symbols a/0.
        constraints p/1, q/0.
        p(X) ==> X==1 | q.
        [w] ::> {=+k(1)}, {p(X)}, {=-k(X)}, a.
    """, ["w"])
    assert store_set(a, (K_HOST,)) == {"p(1)", "q"}
    assert store_set(a, (K_GRAM,)) == {"token(0,1,w)", "a(0,1)"}


def test_empty_input_yields_one_empty_answer():
    answers = run("""
        grammar_symbols x/0.
        [w] ::> x.
    """, [])
    assert len(answers) == 1
    assert store_set(answers[0]) == set()


def test_integer_words_are_tokens():
    (a,) = run("""
        grammar_symbols n/1.
        [X] ::> integer(X) | n(X).
    """, [42])
    assert store_set(a) == {"token(0,1,42)", "n(0,1,42)"}


def test_answer_counts_and_input_length():
    (a,) = run("""
        grammar_symbols x/0.
        [w] ::> x.
    """, ["w", "w"])
    assert a.input_length == 2
    assert a.n_applications == 2
    assert a.n_created == 2   # phrases only; tokens are not counted


def test_step_limit_raises():
    cg = compile_grammar(WRAP % """
        grammar_symbols x/0.
        [w] ::> x.
        x, x ::> x.
    """)
    with pytest.raises(RuntimeError):
        parse(cg, ["w"] * 40, max_steps=50)


def test_all_answers_unique_when_deterministic():
    cg = compile_grammar(WRAP % """
        grammar_symbols x/0.
        [w] ::> x.
    """)
    answers, _ = parse(cg, ["w"], all_answers=True)
    assert len(answers) == 1
