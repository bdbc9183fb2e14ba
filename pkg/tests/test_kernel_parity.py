"""The compiled kernel and the pure-Python kernel must be observationally
identical.  A process picks its kernel at import, so each side runs in a
subprocess and reports its answers as JSON."""

import json
import os
import subprocess
import sys

import pytest

PROBE = r"""
import json, sys
from chrg import KERNEL_NAME, compile_grammar, parse, tokenize_text
from chrg.kernel import render_term
from chrg.reader import read_term

spec = json.loads(sys.stdin.read())
cg = compile_grammar(spec["src"], **spec.get("kw", {}))
words = tokenize_text(spec["text"])
post = [read_term(t) for t in spec.get("post", [])]
answers, _ = parse(cg, words, post=post, all_answers=True)
out = []
for a in answers:
    store = sorted(
        "%s(%s)" % (c[1], ",".join(render_term(x) for x in c[2]))
        if c[2] else c[1]
        for c in a.constraints)
    out.append({"store": store,
                "applications": a.n_applications,
                "created": a.n_created,
                "resolutions": len(a.resolutions)})
print(json.dumps({"kernel": KERNEL_NAME, "answers": out}))
"""


def run_kernel(which, spec):
    env = dict(os.environ, CHRG_KERNEL=which)
    proc = subprocess.run([sys.executable, "-c", PROBE],
                          input=json.dumps(spec), capture_output=True,
                          text=True, env=env)
    assert proc.returncode == 0, proc.stderr
    return json.loads(proc.stdout)


def compiled_available():
    env = dict(os.environ, CHRG_KERNEL="compiled")
    probe = subprocess.run(
        [sys.executable, "-c", "import chrg.kernel"],
        capture_output=True, env=env)
    return probe.returncode == 0


needs_compiled = pytest.mark.skipif(
    not compiled_available(), reason="compiled kernel not built")

GDIR = __file__.rsplit("/", 2)[0] + "/src/chrg/grammars/"


def load_src(name):
    with open(GDIR + name + ".chrg") as fh:
        return fh.read()


CASES = [
    ("sentence", {"src": None, "text": "peter likes mary"}),
    ("ambiguous", {"src": None, "text": "a a a a a"}),
    ("counter", {"src": None, "text": "x x x x x x x x"}),
    ("coordination",
     {"src": None,
      "text": "peter and paul likes and mary hates martha and eve"}),
    ("diet",
     {"src": None,
      "text": "garfield eats mickey , tom eats jerry , jerry is mouse , "
              "tom is cat , mickey is mouse ."}),
    ("anaphora",
     {"src": None, "text": "martha likes paul , mary hates her"}),
    ("cleanup",
     {"src": None, "text": "the old grumpy man", "post": ["cleanup"]}),
    ("blowup", {"src": None, "text": "a a a a a", "kw": {"indexed": True}}),
]


@needs_compiled
@pytest.mark.parametrize("name,spec", CASES, ids=[c[0] for c in CASES])
def test_kernels_agree(name, spec):
    spec = dict(spec)
    spec["src"] = load_src(name)
    pure = run_kernel("pure", spec)
    compiled = run_kernel("compiled", spec)
    assert pure["kernel"] == "pure"
    assert compiled["kernel"] == "compiled"
    assert pure["answers"] == compiled["answers"]
