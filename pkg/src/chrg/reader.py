"""Tokenizer and term reader for grammar source files.

The surface syntax is Prolog-flavored: clauses are terms ended by a dot,
built from atoms, integers, variables, compounds, lists, curly groups
and a fixed operator table.  The reader produces plain core terms; the
source module interprets them as declarations and rules.

Operator table (priority, type):

    1210 xfx  where                  rule-level let binding
    1205 xfx  @@                     rule name tag
    1200 xfx  ::> <:> ==> <=>        rules (grammar and plain)
    1170 xfx  -\\                     left context marker
    1160 xfx  /-                     right context marker
    1150 fx   handler grammar_symbols constraints abducibles gpragma
    1150 xfx  \\                      kept \\ removed divider
    1100 xfy  ; |                    disjunction; guard divider
    1050 xfx  $                     parallel match
    1000 xfy  ,
     900 fy   \\+
     700 xfx  = \\= == \\== =< < > >= ...
     500 yfx  + -
     400 yfx  * / mod
     200 xfy  ^
     200 fy   - + *                  negative numbers; timed assumptions
     700 fy   =+ =* =-               assumption operators
     100 fy   !                      kept marker

A token that happens to be an operator is read as a plain atom when no
operand can follow it (so `[-]`, `^` in guards, and bare `...` work).
"""

from __future__ import annotations

from dataclasses import dataclass

from chrg.kernel import Struct, Var, mkatom, mklist

SYMBOL_CHARS = set("+-*/\\^<>=~:.?@#&$")
SOLO_CHARS = {"(", ")", "[", "]", "{", "}", ",", "|", ";", "!"}

INFIX = {
    "where": (1210, "xfx"), "@@": (1205, "xfx"),
    "::>": (1200, "xfx"), "<:>": (1200, "xfx"),
    "==>": (1200, "xfx"), "<=>": (1200, "xfx"),
    "-\\": (1170, "xfx"), "/-": (1160, "xfx"),
    "\\": (1150, "xfx"),
    ";": (1100, "xfy"), "|": (1100, "xfy"),
    "$": (1050, "xfx"),
    ",": (1000, "xfy"),
    "=": (700, "xfx"), "\\=": (700, "xfx"), "==": (700, "xfx"),
    "\\==": (700, "xfx"), "=<": (700, "xfx"), "<": (700, "xfx"),
    ">": (700, "xfx"), ">=": (700, "xfx"), "...": (700, "xfx"),
    "+": (500, "yfx"), "-": (500, "yfx"),
    "*": (400, "yfx"), "/": (400, "yfx"), "mod": (400, "yfx"),
    "^": (200, "xfy"),
}

PREFIX = {
    "handler": (1150, "fx"), "grammar_symbols": (1150, "fx"),
    "constraints": (1150, "fx"), "abducibles": (1150, "fx"),
    "gpragma": (1150, "fx"),
    "\\+": (900, "fy"),
    "=+": (700, "fy"), "=*": (700, "fy"), "=-": (700, "fy"),
    "-": (200, "fy"), "+": (200, "fy"), "*": (200, "fy"),
    "!": (100, "fy"),
}


class ReaderError(Exception):
    def __init__(self, msg, line=None):
        self.line = line
        super().__init__(msg if line is None else "line %d: %s" % (line, msg))


@dataclass
class Token:
    kind: str          # name | var | int | punct | symbolic | quoted | end
    text: str
    line: int
    col: int
    adjacent: bool     # no layout between this token and the previous one


def tokenize(text):
    toks = []
    i = 0
    n = len(text)
    line = 1
    col = 1
    gap = True  # saw layout since last token

    def push(kind, s, ln, cl):
        nonlocal gap
        toks.append(Token(kind, s, ln, cl, adjacent=not gap))
        gap = False

    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            gap = True
            continue
        if c in " \t\r":
            i += 1
            col += 1
            gap = True
            continue
        if c == "%":
            while i < n and text[i] != "\n":
                i += 1
            gap = True
            continue
        if c == "/" and i + 1 < n and text[i + 1] == "*":
            j = text.find("*/", i + 2)
            if j < 0:
                raise ReaderError("unterminated block comment", line)
            seg = text[i:j + 2]
            line += seg.count("\n")
            i = j + 2
            gap = True
            continue
        ln, cl = line, col
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            if j < n and text[j] == "." and j + 1 < n and text[j + 1].isdigit():
                raise ReaderError("floating point numbers are not supported",
                                  line)
            push("int", text[i:j], ln, cl)
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = "var" if (c == "_" or c.isupper()) else "name"
            push(kind, word, ln, cl)
            col += j - i
            i = j
            continue
        if c == "'":
            j = i + 1
            buf = []
            while True:
                if j >= n:
                    raise ReaderError("unterminated quoted atom", ln)
                ch = text[j]
                if ch == "\\" and j + 1 < n:
                    esc = text[j + 1]
                    buf.append({"n": "\n", "t": "\t", "\\": "\\",
                                "'": "'"}.get(esc, esc))
                    j += 2
                    continue
                if ch == "'":
                    if j + 1 < n and text[j + 1] == "'":
                        buf.append("'")
                        j += 2
                        continue
                    break
                if ch == "\n":
                    line += 1
                buf.append(ch)
                j += 1
            push("quoted", "".join(buf), ln, cl)
            col += j + 1 - i
            i = j + 1
            continue
        if c in SOLO_CHARS:
            push("punct", c, ln, cl)
            i += 1
            col += 1
            continue
        if c in SYMBOL_CHARS:
            j = i
            while j < n and text[j] in SYMBOL_CHARS:
                j += 1
            run = text[i:j]
            if run == ".":
                push("end", ".", ln, cl)
            elif run.startswith(".") and run != "..." and set(run) == {"."}:
                raise ReaderError("unrecognized token %r" % run, ln)
            else:
                push("symbolic", run, ln, cl)
            col += j - i
            i = j
            continue
        raise ReaderError("unexpected character %r" % c, line)
    return toks


# ---------------------------------------------------------------------------
# term reader (operator precedence)
# ---------------------------------------------------------------------------

class _Reader:
    def __init__(self, tokens):
        self.toks = tokens
        self.pos = 0
        self.varmap = {}

    def peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def next(self):
        t = self.peek()
        if t is None:
            raise ReaderError("unexpected end of input",
                              self.toks[-1].line if self.toks else None)
        self.pos += 1
        return t

    def expect_punct(self, ch):
        t = self.next()
        if t.kind != "punct" or t.text != ch:
            raise ReaderError("expected %r, found %r" % (ch, t.text), t.line)

    # -- helpers -------------------------------------------------------------

    def _name_of(self, tok):
        if tok.kind in ("name", "quoted"):
            return tok.text
        if tok.kind == "symbolic":
            return tok.text
        if tok.kind == "punct" and tok.text in (";", "|", "!"):
            return tok.text
        return None

    def _can_start_term(self, tok):
        if tok is None:
            return False
        if tok.kind in ("name", "var", "int", "quoted"):
            return True
        if tok.kind == "punct" and tok.text in ("(", "[", "{", "!"):
            return True
        if tok.kind == "symbolic":
            return True
        return False

    def _var(self, name):
        if name == "_":
            return Var("_")
        v = self.varmap.get(name)
        if v is None:
            v = Var(name)
            self.varmap[name] = v
        return v

    # -- primary terms ---------------------------------------------------------

    def read_primary(self, maxprec):
        t = self.next()
        if t.kind == "int":
            return int(t.text), 0
        if t.kind == "var":
            return self._var(t.text), 0
        if t.kind == "punct":
            if t.text == "(":
                inner, _ = self.read_term(1200)
                self.expect_punct(")")
                return inner, 0
            if t.text == "[":
                return self.read_list(t), 0
            if t.text == "{":
                nxt = self.peek()
                if nxt and nxt.kind == "punct" and nxt.text == "}":
                    self.next()
                    return mkatom("{}"), 0
                inner, _ = self.read_term(1200)
                self.expect_punct("}")
                return Struct("{}", (inner,)), 0
            if t.text in (";", "|", "!"):
                return self._op_or_atom(t, maxprec)
            raise ReaderError("unexpected %r" % t.text, t.line)
        if t.kind == "quoted":
            return self._maybe_compound(t, quoted=True)
        if t.kind == "name":
            if t.text in PREFIX:
                return self._op_or_atom(t, maxprec)
            return self._maybe_compound(t)
        if t.kind == "symbolic":
            return self._op_or_atom(t, maxprec)
        raise ReaderError("unexpected token %r" % t.text, t.line)

    def _maybe_compound(self, tok, quoted=False):
        nxt = self.peek()
        if nxt and nxt.kind == "punct" and nxt.text == "(" and nxt.adjacent:
            self.next()
            args = [self.read_term(999)[0]]
            while True:
                t = self.next()
                if t.kind == "punct" and t.text == ")":
                    break
                if t.kind == "punct" and t.text == ",":
                    args.append(self.read_term(999)[0])
                    continue
                raise ReaderError("expected , or ) in arguments", t.line)
            return Struct(tok.text, tuple(args)), 0
        return mkatom(tok.text), 0

    def _op_or_atom(self, tok, maxprec):
        name = self._name_of(tok)
        pre = PREFIX.get(name)
        nxt = self.peek()
        # functor application binds tightest: f(...) even for operator names
        if nxt and nxt.kind == "punct" and nxt.text == "(" and nxt.adjacent:
            return self._maybe_compound(tok, quoted=tok.kind == "quoted")
        if pre and self._can_start_term(nxt) and pre[0] <= maxprec:
            # negative numeric literal folds
            if name == "-" and nxt.kind == "int" and nxt.adjacent:
                self.next()
                return -int(nxt.text), 0
            argmax = pre[0] if pre[1] == "fy" else pre[0] - 1
            # avoid swallowing an infix operand: `- )` etc already filtered
            arg, _ = self.read_term(argmax)
            return Struct(name, (arg,)), pre[0]
        return mkatom(name), 0

    def read_list(self, opener):
        nxt = self.peek()
        if nxt and nxt.kind == "punct" and nxt.text == "]":
            self.next()
            return mkatom("[]")
        items = [self.read_term(999)[0]]
        tail = mkatom("[]")
        while True:
            t = self.next()
            if t.kind == "punct" and t.text == "]":
                break
            if t.kind == "punct" and t.text == ",":
                items.append(self.read_term(999)[0])
                continue
            if t.kind == "punct" and t.text == "|":
                tail = self.read_term(999)[0]
                self.expect_punct("]")
                break
            raise ReaderError("expected , | or ] in list", t.line)
        return mklist(items, tail)

    # -- operator climbing -------------------------------------------------------

    def read_term(self, maxprec):
        left, lprec = self.read_primary(maxprec)
        while True:
            t = self.peek()
            if t is None or t.kind == "end":
                return left, lprec
            name = None
            if t.kind in ("name", "symbolic"):
                name = t.text
            elif t.kind == "punct" and t.text in (",", ";", "|"):
                name = t.text
            if name is None or name not in INFIX:
                return left, lprec
            prec, typ = INFIX[name]
            if prec > maxprec:
                return left, lprec
            lmax = prec if typ == "yfx" else prec - 1
            rmax = prec if typ == "xfy" else prec - 1
            if lprec > lmax:
                return left, lprec
            self.next()
            right, _ = self.read_term(rmax)
            left = Struct(name, (left, right))
            lprec = prec
        return left, lprec


def read_terms(text):
    """Read a whole source text; returns a list of (term, line, varnames)
    clauses.  varnames maps source variable names to their Var cells."""
    toks = tokenize(text)
    out = []
    pos = 0
    while pos < len(toks):
        rd = _Reader(toks)
        rd.pos = pos
        start = toks[pos]
        term, _ = rd.read_term(1210)
        t = rd.peek()
        if t is None or t.kind != "end":
            got = t.text if t else "end of input"
            raise ReaderError("operator or clause end expected, found %r"
                              % got, t.line if t else start.line)
        rd.next()
        out.append((term, start.line, dict(rd.varmap)))
        pos = rd.pos
    return out


def read_term(text):
    """Read a single term (adds the final dot if missing)."""
    stripped = text.rstrip()
    # a trailing dot glued to other symbol characters (as in a gap `...`)
    # is part of the last token, not a clause end
    if not stripped.endswith(".") or \
            (len(stripped) >= 2 and stripped[-2] in SYMBOL_CHARS):
        text = stripped + " ."
    clauses = read_terms(text)
    if len(clauses) != 1:
        raise ReaderError("expected exactly one term")
    return clauses[0][0]
