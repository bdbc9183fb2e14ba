"""Scaling measurements over three stress grammars.

counter    neighbouring equal counters merge; expected linear time, and
           at most 2n-1 phrases ever exist for n tokens.
ambiguous  every span becomes one phrase under set semantics; the store
           is quadratic and the work roughly cubic.
blowup     the attribute keeps the derivation shape, so phrase counts
           follow the bracketing numbers and explode combinatorially.

`python3 -m chrg.bench` runs a series and reports per-size timings,
application/creation counters, and the fitted log-log slope.  With
--compare-kernels the same series also runs in a subprocess under the
other kernel (compiled extension vs pure Python), since a process picks
its kernel once at import.
"""

from __future__ import annotations

import argparse
import json
import os
import statistics
import subprocess
import sys
import time

from chrg.compiler import compile_grammar
from chrg.driver import parse
from chrg import kernel

GRAMMAR_FILES = {
    "counter": "counter.chrg",
    "ambiguous": "ambiguous.chrg",
    "blowup": "blowup.chrg",
}

DEFAULT_SIZES = {
    "counter": (64, 128, 256, 512, 1024),
    "ambiguous": (8, 16, 32, 64),
    "blowup": (2, 3, 4, 5, 6, 7, 8),
}

TOKEN = {"counter": "x", "ambiguous": "a", "blowup": "a"}


def load(name):
    path = os.path.join(os.path.dirname(__file__), "grammars",
                        GRAMMAR_FILES[name])
    with open(path) as fh:
        return compile_grammar(fh.read())


def run_one(name, n, compiled=None, repeat=1):
    compiled = compiled or load(name)
    words = [TOKEN[name]] * n
    best = None
    ans = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        answers, _st = parse(compiled, words, max_steps=None)
        dt = time.perf_counter() - t0
        if best is None or dt < best:
            best = dt
        ans = answers[0]
    return {
        "grammar": name,
        "n": n,
        "seconds": best,
        "applications": ans.n_applications,
        "created": ans.n_created,
        "kernel": kernel.KERNEL_NAME,
    }


def series(name, sizes=None, repeat=1):
    compiled = load(name)
    sizes = sizes or DEFAULT_SIZES[name]
    return [run_one(name, n, compiled, repeat) for n in sizes]


def loglog_slope(runs, y="seconds"):
    """Least-squares slope of log(y) against log(n)."""
    import math
    xs = [math.log(r["n"]) for r in runs]
    ys = [math.log(max(r[y], 1e-9)) for r in runs]
    return statistics.linear_regression(xs, ys).slope


def other_kernel_series(name, sizes, repeat=1):
    """Run the same series in a subprocess under the other kernel."""
    want = "pure" if kernel.KERNEL_NAME == "compiled" else "compiled"
    env = dict(os.environ, CHRG_KERNEL=want)
    cmd = [sys.executable, "-m", "chrg.bench", "--grammar", name,
           "--sizes", ",".join(str(n) for n in sizes),
           "--repeat", str(repeat), "--json"]
    out = subprocess.run(cmd, env=env, capture_output=True, text=True,
                         check=True)
    return json.loads(out.stdout)["runs"]


def main(argv=None):
    ap = argparse.ArgumentParser(
        prog="chrg-bench", description="scaling measurements")
    ap.add_argument("--grammar", choices=sorted(GRAMMAR_FILES),
                    default="counter")
    ap.add_argument("--sizes", help="comma-separated input lengths")
    ap.add_argument("--repeat", type=int, default=1,
                    help="timing repetitions per size (best kept)")
    ap.add_argument("--json", action="store_true",
                    help="machine-readable output")
    ap.add_argument("--compare-kernels", action="store_true",
                    help="also run under the other kernel")
    args = ap.parse_args(argv)

    sizes = DEFAULT_SIZES[args.grammar]
    if args.sizes:
        sizes = tuple(int(s) for s in args.sizes.split(","))

    runs = series(args.grammar, sizes, args.repeat)
    slope = loglog_slope(runs) if len(runs) >= 2 else None
    report = {"runs": runs, "slope": slope, "kernel": kernel.KERNEL_NAME}

    if args.compare_kernels:
        try:
            other = other_kernel_series(args.grammar, sizes, args.repeat)
            report["other"] = other
        except (subprocess.CalledProcessError, json.JSONDecodeError):
            report["other"] = None

    if args.json:
        print(json.dumps(report, indent=2))
        return 0

    print("grammar %s, kernel %s" % (args.grammar, kernel.KERNEL_NAME))
    print("%8s %10s %14s %10s" % ("n", "seconds", "applications", "created"))
    for r in runs:
        print("%8d %10.4f %14d %10d"
              % (r["n"], r["seconds"], r["applications"], r["created"]))
    if slope is not None:
        print("log-log slope (seconds vs n): %.2f" % slope)
    other = report.get("other")
    if other:
        print("\nkernel %s" % other[0]["kernel"])
        for r in other:
            print("%8d %10.4f" % (r["n"], r["seconds"]))
        tot = sum(r["seconds"] for r in runs)
        tot_other = sum(r["seconds"] for r in other)
        if tot_other > 0:
            print("speed ratio (other/this): %.2fx" % (tot_other / tot))
    return 0


if __name__ == "__main__":
    sys.exit(main())
