"""Grammar-to-rule translation: boundary threading, contexts, gaps,
parallel match, disjunctive contexts, activation marking, abducible
support rules, compaction, indexing, and CHR rule passthrough."""

from chrg import compile_grammar

from conftest import assert_rule_alpha_eq


def dump_lines(src, **kw):
    cg = compile_grammar(src, **kw)
    return [ln for ln in cg.dump().splitlines() if ln.strip()], cg


WRAP = "handler t.\n%s\nend_of_CHRG_source.\n"


# ---------------------------------------------------------------------------
# boundary threading
# ---------------------------------------------------------------------------

def test_translate_contexts_terminal_and_host():
    lines, _ = dump_lines(WRAP % """
        grammar_symbols a/0, b/1, d/1, e/2.
        constraints h/1.
        a -\\ b(X), [c], {h(Y)} /- d(Y) ::> e(X,Y).
    """)
    assert len(lines) == 1
    # left context and right context thread the boundaries; the produced
    # symbol spans only the core; the host constraint takes no boundaries.
    assert_rule_alpha_eq(
        lines[0].split("%")[0],
        "a(N0,N1), b(N1,N2,X), token(N2,N3,c), h(Y), d(N3,N4,Y)"
        " ==> e(N1,N3,X,Y).")


def test_translate_gaps_and_simplification():
    lines, _ = dump_lines(WRAP % """
        grammar_symbols a/0, b/0, c/1, d/1.
        a, ..., b /- ..., c(X) <:> d(X).
    """)
    assert len(lines) == 1
    # gaps become boundary inequations; the right context is kept (left of
    # the backslash) while the core is removed; the trailing boundary of
    # the final right-context symbol is unconstrained.
    assert_rule_alpha_eq(
        lines[0],
        "c(N5,_,X) \\ a(N1,N2), b(N3,N4)"
        " <=> N2=<N3, N4=<N5 | d(N1,N4,X).")


def test_translate_parallel_match_shares_boundaries():
    lines, _ = dump_lines(WRAP % """
        grammar_symbols a/0, b/0, e/0.
        a $ b ::> e.
    """)
    assert len(lines) == 1
    assert_rule_alpha_eq(lines[0].split("%")[0],
                         "a(N0,N1), b(N0,N1) ==> e(N0,N1).")


def test_translate_disjunctive_contexts_expand_left_fastest():
    lines, _ = dump_lines(WRAP % """
        grammar_symbols a/0, b/0, c/0, d/0, e/0, f/0.
        (a ; b) -\\ c /- (d ; e) ::> f.
    """)
    bodies = [ln.split("%")[0] for ln in lines]
    assert len(bodies) == 4
    expect = [
        "a(N1,N2), c(N2,N3), d(N3,N4) ==> f(N2,N3).",
        "b(N1,N2), c(N2,N3), d(N3,N4) ==> f(N2,N3).",
        "a(N1,N2), c(N2,N3), e(N3,N4) ==> f(N2,N3).",
        "b(N1,N2), c(N2,N3), e(N3,N4) ==> f(N2,N3).",
    ]
    for got, want in zip(bodies, expect):
        assert_rule_alpha_eq(got, want)


def test_translate_bounded_gap_guards():
    lines, _ = dump_lines(WRAP % """
        grammar_symbols a/0, b/0, c/0.
        a, 2...4, b ::> c.
    """)
    assert_rule_alpha_eq(
        lines[0].split("%")[0],
        "a(N1,N2), b(N3,N4) ==> N2+2=<N3, N3=<N2+4 | c(N1,N4).")


def test_translate_whole_input_anchor():
    lines, _ = dump_lines(WRAP % """
        grammar_symbols a/0, s/0.
        (all $ a, ...) <:> s.
    """)
    assert_rule_alpha_eq(
        lines[0],
        "a(N1,N3) <=> N1=0, N2=input_length, N3=<N2 | s(N1,N2).")


def test_translate_grammar_simpagation_via_bang():
    lines, _ = dump_lines(WRAP % """
        grammar_symbols a/0, b/0, c/0.
        !a, b <:> c.
    """)
    assert_rule_alpha_eq(lines[0], "a(N1,N2) \\ b(N2,N3) <=> c(N1,N3).")


def test_rule_names_from_annotations():
    _, cg = dump_lines(WRAP % """
        grammar_symbols a/0, b/0, c/0.
        !a, b <:> c.
        mine @@ b, b ::> a.
    """)
    assert [r.name for r in cg.rules] == ["r1", "mine"]


def test_assumption_operators_pass_through_bodies():
    lines, _ = dump_lines(WRAP % """
        grammar_symbols n/1, s/1.
        n(A) ::> {=*actor(A)}, s(A).
        n(A) /- [x] <:> {=-actor(B)}, s(A+B).
    """)
    assert_rule_alpha_eq(lines[0].split("%")[0],
                         "n(N1,N2,A) ==> =*actor(A), s(N1,N2,A).")
    assert_rule_alpha_eq(
        lines[1],
        "token(N2,N3,x) \\ n(N1,N2,A) <=> =-actor(B), s(N1,N2,A+B).")


def test_chr_rule_passthrough():
    lines, _ = dump_lines(WRAP % """
        grammar_symbols a/0.
        constraints p/1, q/1.
        p(X) \\ q(X) <=> p(X).
    """)
    assert_rule_alpha_eq(lines[0], "p(X) \\ q(X) <=> p(X).")


# ---------------------------------------------------------------------------
# activation marking (the one-active-occurrence optimization)
# ---------------------------------------------------------------------------

def test_only_last_bounded_head_is_active():
    _, cg = dump_lines(WRAP % """
        grammar_symbols a/0, b/1, d/1, e/2.
        constraints h/1.
        a -\\ b(X), [c], {h(Y)} /- d(Y) ::> e(X,Y).
    """)
    (rule,) = cg.rules
    active = {h.functor for h in rule.heads if h.active}
    passive = {h.functor for h in rule.heads if not h.active}
    assert active == {"d", "h"}
    assert passive == {"a", "b", "token"}


def test_passive_marking_can_be_disabled():
    _, cg = dump_lines(WRAP % """
        grammar_symbols a/0, b/0, c/0.
        a, b ::> c.
    """, passive=False)
    (rule,) = cg.rules
    assert all(h.active for h in rule.heads)
    assert cg.passive is False


# ---------------------------------------------------------------------------
# abducible support rules
# ---------------------------------------------------------------------------

def test_abducible_negation_conflict_rule():
    lines, _ = dump_lines(WRAP % """
        grammar_symbols n/1, s/0.
        abducibles fact/1.
        n(X) ::> {fact_(X)}, s.
    """)
    assert_rule_alpha_eq(lines[0].split("%")[0],
                         "n(N1,N2,X) ==> fact_(X), s(N1,N2).")
    assert_rule_alpha_eq(lines[1], "fact(X), fact_(X) ==> fail.")


def test_assumption_on_abducible_warns():
    _, cg = dump_lines(WRAP % """
        grammar_symbols n/1, s/0.
        abducibles fact/1.
        n(X) ::> {-fact(X)}, s.
    """)
    assert any("write fact_(...)" in d.message for d in cg.diags)


def test_conflict_rule_emitted_once_per_abducible():
    lines, _ = dump_lines(WRAP % """
        grammar_symbols n/1, s/0.
        abducibles fact/1, other/2.
        n(X) ::> {fact(X)}, {other(X,X)}, s.
    """)
    conflicts = [ln for ln in lines if "fail" in ln]
    assert len(conflicts) == 2
    names = sorted(ln.split("@")[0].strip() for ln in conflicts)
    assert names == ["fact_conflict", "other_conflict"]


def test_compaction_rule_shape():
    lines, cg = dump_lines(WRAP % """
        grammar_symbols n/1, s/0.
        abducibles fact/1.
        n(X) ::> {fact(X)}, s.
    """, compaction=True)
    assert cg.compaction is True
    (comp,) = [ln for ln in lines if "compaction" in ln]
    # two copies of the abducible meet; the untried-pair guard keeps the
    # rule from looping; the body tries unification first, apartness on
    # backtracking.
    assert "untried_unifiable_pair" in comp
    assert "=" in comp and "dif(" in comp
    assert ";" in comp
    assert comp.rstrip().endswith("% passive: fact")


def test_compaction_off_by_default():
    lines, cg = dump_lines(WRAP % """
        grammar_symbols n/1, s/0.
        abducibles fact/1.
        n(X) ::> {fact(X)}, s.
    """)
    assert cg.compaction is False
    assert not [ln for ln in lines if "compaction" in ln]


# ---------------------------------------------------------------------------
# node indexing for parse-tree recovery
# ---------------------------------------------------------------------------

def test_indexing_adds_node_arguments():
    lines, cg = dump_lines(WRAP % """
        grammar_symbols a/0, b/0, c/0.
        a, b ::> c.
    """, indexed=True)
    assert cg.indexed is True
    assert_rule_alpha_eq(
        lines[0].split("%")[0],
        "a(N1,N2,I0), b(N2,N3,I1) ==> c(N1,N3,NewNode).")
