"""Textual formula syntax.

Grammar (loosest first)::

    formula := iff
    iff     := imp ("<=>" imp)*            right associated
    imp     := disj ("=>" imp)?            right associated
    disj    := conj ("|" conj)*
    conj    := unary ("&" unary)*
    unary   := "~" unary | quantifier | eqterm
    quant   := ("all" | "ex") name ":" type "." formula
    eqterm  := appterm ("=" appterm)?
    appterm := atom+                       juxtaposition, left associated
    atom    := name (":" type)? | "(" formula ")"

Names carry a type ascription on first use (``a:o``, ``p:(o>o)``); later
occurrences may be bare.  Free names denote constants, quantified names
variables.  A parser instance remembers ascriptions so that a session can
parse follow-up terms against the same signature.
"""

from __future__ import annotations

import re

from .errors import ParseError, TermTypeError
from .terms import (
    App,
    Conn,
    Const,
    Eq,
    Not,
    Position,
    Quant,
    SimpleType,
    Term,
    Var,
    parse_type,
)

_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")

_QUANT_WORDS = ("all", "ex")


def tokenize(text: str) -> list[tuple[str, str]]:
    tokens: list[tuple[str, str]] = []
    pos = 0
    n = len(text)
    while pos < n:
        ch = text[pos]
        if ch.isspace():
            pos += 1
            continue
        m = _NAME.match(text, pos)
        if m:
            tokens.append(("name", m.group()))
            pos = m.end()
            continue
        if ch == ":":
            # type ascription: either a single base type or balanced parens
            pos += 1
            if pos < n and text[pos] in "io":
                tokens.append(("type", text[pos]))
                pos += 1
                continue
            if pos < n and text[pos] == "(":
                depth = 0
                start = pos
                while pos < n:
                    if text[pos] == "(":
                        depth += 1
                    elif text[pos] == ")":
                        depth -= 1
                        if depth == 0:
                            pos += 1
                            break
                    pos += 1
                if depth != 0:
                    raise ParseError(f"unbalanced type ascription in {text!r}")
                tokens.append(("type", text[start:pos]))
                continue
            raise ParseError(f"expected a type after ':' near {text[pos:pos+8]!r}")
        if text.startswith("<=>", pos):
            tokens.append(("op", "<=>"))
            pos += 3
            continue
        if text.startswith("=>", pos):
            tokens.append(("op", "=>"))
            pos += 2
            continue
        if ch in "&|~=().":
            tokens.append(("op", ch))
            pos += 1
            continue
        raise ParseError(f"unexpected input at {text[pos:]!r}")
    return tokens


class Parser:
    """Formula parser with a persistent name-to-type signature."""

    def __init__(self, signature: dict[str, SimpleType] | None = None):
        self.signature: dict[str, SimpleType] = dict(signature or {})

    # -- public entry points ------------------------------------------------

    def parse(self, text: str) -> Term:
        self._tokens = tokenize(text)
        self._i = 0
        self._bound: list[Var] = []
        t = self._formula()
        if self._i != len(self._tokens):
            raise ParseError(f"trailing input near {self._tokens[self._i]!r}")
        return t

    # -- token helpers -------------------------------------------------------

    def _peek(self):
        if self._i < len(self._tokens):
            return self._tokens[self._i]
        return (None, None)

    def _next(self):
        tok = self._peek()
        self._i += 1
        return tok

    def _expect_op(self, op: str):
        kind, val = self._next()
        if kind != "op" or val != op:
            raise ParseError(f"expected {op!r}, found {val!r}")

    # -- grammar -------------------------------------------------------------

    def _formula(self) -> Term:
        left = self._imp()
        if self._peek() == ("op", "<=>"):
            self._next()
            right = self._formula()
            return Conn("<=>", left, right)
        return left

    def _imp(self) -> Term:
        left = self._disj()
        if self._peek() == ("op", "=>"):
            self._next()
            right = self._imp()
            return Conn("=>", left, right)
        return left

    def _disj(self) -> Term:
        left = self._conj()
        while self._peek() == ("op", "|"):
            self._next()
            left = Conn("|", left, self._conj())
        return left

    def _conj(self) -> Term:
        left = self._unary()
        while self._peek() == ("op", "&"):
            self._next()
            left = Conn("&", left, self._unary())
        return left

    def _unary(self) -> Term:
        kind, val = self._peek()
        if kind == "op" and val == "~":
            self._next()
            return Not(self._unary())
        if kind == "name" and val in _QUANT_WORDS:
            return self._quant()
        return self._eqterm()

    def _quant(self) -> Term:
        _, word = self._next()
        kind, name = self._next()
        if kind != "name":
            raise ParseError(f"expected bound variable after {word!r}")
        tkind, ttext = self._next()
        if tkind != "type":
            raise ParseError(f"bound variable {name!r} needs a type ascription")
        var = Var(name, parse_type(ttext))
        self._expect_op(".")
        self._bound.append(var)
        try:
            body = self._formula()
        finally:
            self._bound.pop()
        return Quant(word, var, body)

    def _eqterm(self) -> Term:
        left = self._appterm()
        if self._peek() == ("op", "="):
            self._next()
            right = self._appterm()
            try:
                return Eq(left, right)
            except TermTypeError as e:
                raise ParseError(str(e)) from e
        return left

    def _appterm(self) -> Term:
        parts = [self._atom()]
        while True:
            kind, val = self._peek()
            if kind == "op" and val == "(":
                parts.append(self._atom())
            elif kind == "name" and val not in _QUANT_WORDS:
                parts.append(self._atom())
            else:
                break
        out = parts[0]
        for arg in parts[1:]:
            try:
                out = App(out, arg)
            except TermTypeError as e:
                raise ParseError(str(e)) from e
        return out

    def _atom(self) -> Term:
        kind, val = self._next()
        if kind == "op" and val == "(":
            t = self._formula()
            self._expect_op(")")
            return t
        if kind != "name":
            raise ParseError(f"expected a name or '(' but found {val!r}")
        name = val
        ascribed = None
        if self._peek()[0] == "type":
            ascribed = parse_type(self._next()[1])
        for v in reversed(self._bound):
            if v.name == name:
                if ascribed is not None and ascribed != v.type:
                    raise ParseError(
                        f"bound variable {name} re-ascribed to {ascribed}"
                    )
                return v
        if ascribed is not None:
            known = self.signature.get(name)
            if known is not None and known != ascribed:
                raise ParseError(
                    f"{name} already declared with type {known}, not {ascribed}"
                )
            self.signature[name] = ascribed
        stype = self.signature.get(name)
        if stype is None:
            raise ParseError(f"unknown name {name!r}; ascribe a type like {name}:o")
        return Const(name, stype)


# ---------------------------------------------------------------------------
# Printing

_PREC = {"<=>": 1, "=>": 2, "|": 3, "&": 4}


def render_term(t: Term) -> str:
    """Canonical text for ``t``; parses back under the same signature."""
    return _render(t, 0)


def _render(t: Term, ctx: int) -> str:
    if isinstance(t, (Const, Var)):
        return t.name
    if isinstance(t, App):
        spine = []
        cur: Term = t
        while isinstance(cur, App):
            spine.append(cur.arg)
            cur = cur.fn
        spine.append(cur)
        return "(" + " ".join(_render(x, 7) for x in reversed(spine)) + ")"
    if isinstance(t, Not):
        return "~" + _render(t.body, 7)
    if isinstance(t, Eq):
        s = f"{_render(t.lhs, 6)} = {_render(t.rhs, 6)}"
        return f"({s})" if ctx >= 6 else s
    if isinstance(t, Quant):
        s = f"{t.kind} {t.var.name}:{t.var.type} . {_render(t.body, 0)}"
        return f"({s})" if ctx > 0 else s
    if isinstance(t, Conn):
        prec = _PREC[t.op]
        if t.op in ("=>", "<=>"):
            left = _render(t.left, prec + 1)
            right = _render(t.right, prec)
        else:
            left = _render(t.left, prec)
            right = _render(t.right, prec + 1)
        s = f"{left} {t.op} {right}"
        return f"({s})" if ctx >= prec else s
    raise TypeError(f"not a term: {t!r}")


def render_position(pos: Position) -> str:
    return "[" + ",".join(str(i) for i in pos) + "]"


def parse_position(text: str) -> Position:
    s = text.strip()
    if not (s.startswith("[") and s.endswith("]")):
        raise ParseError(f"positions look like [1,2]; got {text!r}")
    inner = s[1:-1].strip()
    if not inner:
        return ()
    try:
        return tuple(int(x) for x in inner.split(","))
    except ValueError as e:
        raise ParseError(f"bad position {text!r}") from e


def render_position_list(positions: tuple[Position, ...]) -> str:
    return "[" + ";".join(",".join(str(i) for i in p) for p in positions) + "]"


def parse_position_list(text: str) -> tuple[Position, ...]:
    s = text.strip()
    if not (s.startswith("[") and s.endswith("]")):
        raise ParseError(f"position lists look like [1;2,1]; got {text!r}")
    inner = s[1:-1].strip()
    if not inner:
        return ()
    out = []
    for chunk in inner.split(";"):
        chunk = chunk.strip()
        if not chunk:
            raise ParseError(f"empty position in {text!r}")
        try:
            out.append(tuple(int(x) for x in chunk.split(",")))
        except ValueError as e:
            raise ParseError(f"bad position list {text!r}") from e
    return tuple(out)
