"""chrg — CHR grammars: bottom-up parsing with committed-choice rewrite rules.

Grammar source is compiled into constraint-rewrite rules over arcs
(word-boundary pairs); parsing runs the rules bottom-up, one token at a
time, with ambiguity handling, contexts, gaps, abduction and assumption
operators.  See README.md for the language and the CLI.
"""

from chrg.kernel import KERNEL_NAME, K_GRAM, K_HOST, K_ABD, K_NABD, render_term
from chrg.source import parse_source, SourceError
from chrg.compiler import compile_grammar, dump_rules, GrammarError
from chrg.driver import (
    parse, parse_text, tokenize_text, dump_store, boundary_line,
    roots, trees, count_trees, maximal_unambiguous_sets, Tree,
)
from chrg.abduction import (
    explanations, verification_grammar, admits, is_minimal,
    check_competence, CompetenceReport, Explanation,
)

__version__ = "0.1.0"

__all__ = [
    "KERNEL_NAME", "K_GRAM", "K_HOST", "K_ABD", "K_NABD", "render_term",
    "parse_source", "SourceError", "compile_grammar", "dump_rules",
    "parse", "parse_text", "tokenize_text", "dump_store", "boundary_line",
    "roots", "trees", "count_trees", "maximal_unambiguous_sets", "Tree",
    "explanations", "verification_grammar", "admits", "is_minimal",
    "check_competence", "CompetenceReport", "Explanation",
    "__version__",
]
