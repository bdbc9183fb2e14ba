"""Hypothesis and expectation operators: linear and intuitionistic
assumptions, consumption bindings, time-ordered eligibility, and answer
enumeration over the open choices."""

from chrg import compile_grammar, parse
from chrg.reader import read_term
from chrg.source import comma_list
from chrg.kernel import K_EXP, K_HYP_INT, K_HYP_LIN, render_term

TRIVIAL = compile_grammar("""handler t.
grammar_symbols x/0.
[w] ::> x.
end_of_CHRG_source.
""")


def post_run(text):
    """Run the trivial grammar on no words, posting the comma-joined
    goals; returns all answers."""
    goals = list(comma_list(read_term(text)))
    answers, _ = parse(TRIVIAL, [], post=goals, all_answers=True)
    return answers


def consumed(a):
    return [(render_term(th), render_term(te))
            for (_h, _e, th, te) in a.resolutions]


def live_assumptions(a):
    return sorted("%s %s" % (c[1], render_term(c[2][0]))
                  for c in a.live((K_HYP_LIN, K_HYP_INT, K_EXP)))


def test_linear_assumption_consumed_once():
    answers = post_run("=+k(a), =-k(X)")
    assert len(answers) == 2
    first, second = answers
    assert consumed(first) == [("k(a)", "k(a)")]
    assert live_assumptions(first) == []
    # the expectation may also stay pending
    assert consumed(second) == []
    assert live_assumptions(second)[0] == "=+ k(a)"


def test_linear_assumption_cannot_serve_two_expectations():
    answers = post_run("=+k(a), =-k(X), =-k(Y)")
    for a in answers:
        assert len(consumed(a)) <= 1


def test_intuitionistic_assumption_serves_many():
    answers = post_run("=*k(a), =-k(X), =-k(Y)")
    both = [a for a in answers if len(consumed(a)) == 2]
    assert len(both) == 1
    assert consumed(both[0]) == [("k(a)", "k(a)"), ("k(a)", "k(a)")]
    # the assumption survives its consumptions
    assert "=* k(a)" in live_assumptions(both[0])
    # open choices: both consumed / first only / second only / neither
    assert len(answers) == 4


def test_expectation_may_precede_assumption_when_untimed():
    answers = post_run("=-k(X), =+k(a)")
    assert consumed(answers[0]) == [("k(a)", "k(a)")]


def test_consumption_unifies_both_ways():
    answers = post_run("=+k(f(Y)), =-k(f(b))")
    assert consumed(answers[0]) == [("k(f(b))", "k(f(b))")]


def test_latest_matching_assumption_tried_first():
    answers = post_run("=+k(a), =+k(b), =-k(X)")
    assert [consumed(a) for a in answers] == [
        [("k(b)", "k(b)")],
        [("k(a)", "k(a)")],
        [],
    ]


def test_mismatched_expectation_stays_pending():
    answers = post_run("=+k(a), =-m(X)")
    assert len(answers) == 1
    assert consumed(answers[0]) == []
    assert live_assumptions(answers[0]) == ["=+ k(a)", "=- m(_)"] or \
        live_assumptions(answers[0])[0] == "=+ k(a)"


TIMED = compile_grammar("""handler t.
grammar_symbols hyp/0, exp/1.
[h] ::> {+k(a)}, hyp.
[e] ::> {-k(X)}, exp(X).
end_of_CHRG_source.
""")


def grammar_syms(a, functor):
    return sorted("%s(%s)" % (c[1], ",".join(render_term(x) for x in c[2]))
                  for c in a.live((0,)) if c[1] == functor)


def test_timed_consumption_left_of_expectation():
    answers, _ = parse(TIMED, ["h", "e"], all_answers=True)
    assert len(answers) == 2
    assert grammar_syms(answers[0], "exp") == ["exp(1,2,a)"]
    assert consumed(answers[0]) == [("k(a)", "k(a)")]
    # pending alternative keeps the attribute open
    assert consumed(answers[1]) == []


def test_timed_assumption_after_expectation_is_ineligible():
    answers, _ = parse(TIMED, ["e", "h"], all_answers=True)
    assert len(answers) == 1
    assert consumed(answers[0]) == []
    (sym,) = grammar_syms(answers[0], "exp")
    assert sym.startswith("exp(0,1,_")


def test_untimed_assumption_serves_timed_expectation_anywhere():
    cg = compile_grammar("""handler t.
grammar_symbols hyp/0, exp/1.
[h] ::> {=+k(a)}, hyp.
[e] ::> {-k(X)}, exp(X).
end_of_CHRG_source.
""")
    answers, _ = parse(cg, ["e", "h"], all_answers=True)
    assert consumed(answers[0]) == [("k(a)", "k(a)")]


def test_timed_positions_recorded_on_snapshots():
    answers, _ = parse(TIMED, ["h", "e"], all_answers=True)
    snap_pos = {}
    for snaps in (answers[1].constraints, answers[1].hidden):
        for c in snaps:
            if c[1] in ("+", "-"):
                snap_pos[c[1]] = (c[4], c[5])
    # hypotheses carry their producing span's end, expectations its start
    assert snap_pos["+"] == (True, 1)
    assert snap_pos["-"] == (True, 1)
