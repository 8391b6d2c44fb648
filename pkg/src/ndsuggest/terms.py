"""Simply typed terms, term positions, and subterm surgery.

Terms are immutable and structurally hashable, so they can be shared
freely between concurrent agents.  A *formula* is a term of type ``o``.

Positions address subterms as sequences of child indices: index 0 is the
function side of an application, index ``i >= 1`` the i-th argument or
operand.  Connective, equality and quantifier operators themselves are not
addressable; a quantifier's body sits at index 1 (the bound variable is
part of the binder, not a child).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

from .errors import PositionError, TermTypeError

# ---------------------------------------------------------------------------
# Types

@dataclass(frozen=True)
class BaseType:
    name: str  # "i" (individuals) or "o" (truth values)

    def __repr__(self):
        return self.name


@dataclass(frozen=True)
class FuncType:
    dom: "SimpleType"
    cod: "SimpleType"

    def __repr__(self):
        return f"({self.dom}>{self.cod})"


SimpleType = Union[BaseType, FuncType]

IOTA = BaseType("i")
OMICRON = BaseType("o")


def parse_type(text: str) -> SimpleType:
    """Parse ``o``, ``i`` or right-associated function types like ``(o>o)``."""
    s = text.strip()
    pos = 0

    def parse() -> SimpleType:
        nonlocal pos
        if pos >= len(s):
            raise TermTypeError(f"truncated type: {text!r}")
        ch = s[pos]
        if ch == "(":
            pos += 1
            t = parse()
            parts = [t]
            while pos < len(s) and s[pos] == ">":
                pos += 1
                parts.append(parse())
            if pos >= len(s) or s[pos] != ")":
                raise TermTypeError(f"unbalanced type parentheses: {text!r}")
            pos += 1
            out = parts[-1]
            for p in reversed(parts[:-1]):
                out = FuncType(p, out)
            return out
        if ch == "i":
            pos += 1
            return IOTA
        if ch == "o":
            pos += 1
            return OMICRON
        raise TermTypeError(f"unknown type syntax at {s[pos:]!r}")

    t = parse()
    if pos != len(s):
        raise TermTypeError(f"trailing characters in type: {text!r}")
    return t


# ---------------------------------------------------------------------------
# Terms

CONNECTIVES = ("&", "|", "=>", "<=>")


@dataclass(frozen=True)
class Const:
    name: str
    type: SimpleType


@dataclass(frozen=True)
class Var:
    name: str
    type: SimpleType


@dataclass(frozen=True)
class App:
    fn: "Term"
    arg: "Term"
    type: SimpleType = field(init=False)

    def __post_init__(self):
        ft = self.fn.type
        if not isinstance(ft, FuncType):
            raise TermTypeError(f"cannot apply non-function of type {ft}")
        if ft.dom != self.arg.type:
            raise TermTypeError(
                f"argument type {self.arg.type} does not match domain {ft.dom}"
            )
        object.__setattr__(self, "type", ft.cod)


@dataclass(frozen=True)
class Conn:
    op: str  # one of & | => <=>
    left: "Term"
    right: "Term"

    def __post_init__(self):
        if self.op not in CONNECTIVES:
            raise TermTypeError(f"unknown connective {self.op!r}")
        if self.left.type != OMICRON or self.right.type != OMICRON:
            raise TermTypeError(f"connective {self.op} needs formulas on both sides")

    @property
    def type(self) -> SimpleType:
        return OMICRON


@dataclass(frozen=True)
class Not:
    body: "Term"

    def __post_init__(self):
        if self.body.type != OMICRON:
            raise TermTypeError("negation needs a formula")

    @property
    def type(self) -> SimpleType:
        return OMICRON


@dataclass(frozen=True)
class Eq:
    lhs: "Term"
    rhs: "Term"

    def __post_init__(self):
        if self.lhs.type != self.rhs.type:
            raise TermTypeError(
                f"equality between distinct types {self.lhs.type} and {self.rhs.type}"
            )

    @property
    def type(self) -> SimpleType:
        return OMICRON


@dataclass(frozen=True)
class Quant:
    kind: str  # "all" or "ex"
    var: Var
    body: "Term"

    def __post_init__(self):
        if self.kind not in ("all", "ex"):
            raise TermTypeError(f"unknown quantifier {self.kind!r}")
        if self.body.type != OMICRON:
            raise TermTypeError("quantifier body must be a formula")

    @property
    def type(self) -> SimpleType:
        return OMICRON


Term = Union[Const, Var, App, Conn, Not, Eq, Quant]

Position = tuple[int, ...]


def is_formula(t: Term) -> bool:
    return t.type == OMICRON


# ---------------------------------------------------------------------------
# Child access

def children(t: Term) -> tuple[tuple[int, Term], ...]:
    """Addressable children of ``t`` as (index, subterm) pairs."""
    if isinstance(t, App):
        return ((0, t.fn), (1, t.arg))
    if isinstance(t, Conn):
        return ((1, t.left), (2, t.right))
    if isinstance(t, Not):
        return ((1, t.body),)
    if isinstance(t, Eq):
        return ((1, t.lhs), (2, t.rhs))
    if isinstance(t, Quant):
        return ((1, t.body),)
    return ()


def _child(t: Term, i: int) -> Term:
    for j, c in children(t):
        if j == i:
            return c
    raise PositionError(f"no child {i} in {type(t).__name__} node")


def _with_child(t: Term, i: int, new: Term) -> Term:
    if isinstance(t, App):
        if i == 0:
            return App(new, t.arg)
        if i == 1:
            return App(t.fn, new)
    elif isinstance(t, Conn):
        if i == 1:
            return Conn(t.op, new, t.right)
        if i == 2:
            return Conn(t.op, t.left, new)
    elif isinstance(t, Not):
        if i == 1:
            return Not(new)
    elif isinstance(t, Eq):
        if i == 1:
            return Eq(new, t.rhs)
        if i == 2:
            return Eq(t.lhs, new)
    elif isinstance(t, Quant):
        if i == 1:
            return Quant(t.kind, t.var, new)
    raise PositionError(f"no child {i} in {type(t).__name__} node")


# ---------------------------------------------------------------------------
# Position operations

def subterm_at(t: Term, pos: Position) -> Term:
    """Return the subterm of ``t`` at ``pos`` (empty position is ``t`` itself)."""
    cur = t
    for i in pos:
        cur = _child(cur, i)
    return cur


def resolves(t: Term, pos: Position) -> bool:
    try:
        subterm_at(t, pos)
        return True
    except PositionError:
        return False


def replace_at(t: Term, positions: list[Position], s: Term) -> Term:
    """Replace the subterm at every listed position by ``s``.

    Positions are interpreted against the original ``t``; no listed position
    may be a proper prefix of another.  Each replaced subterm must have the
    same type as ``s``.
    """
    pset = set(tuple(p) for p in positions)
    for p in pset:
        for q in pset:
            if p != q and q[: len(p)] == p:
                raise PositionError(f"position {list(p)} overlaps {list(q)}")
        old = subterm_at(t, p)
        if old.type != s.type:
            raise TermTypeError(
                f"replacement type {s.type} does not match subterm type {old.type}"
            )
    if not pset:
        return t

    def go(node: Term, here: Position) -> Term:
        if here in pset:
            return s
        if not any(p[: len(here)] == here for p in pset):
            return node
        out = node
        for i, c in children(node):
            out = _with_child(out, i, go(c, here + (i,)))
        return out

    return go(t, ())


def iter_subterms(
    t: Term, *, under_quantifiers: bool = True
) -> Iterator[tuple[Position, Term]]:
    """Preorder traversal yielding (position, subterm) pairs."""
    stack: list[tuple[Position, Term]] = [((), t)]
    while stack:
        pos, node = stack.pop()
        yield pos, node
        if not under_quantifiers and isinstance(node, Quant):
            continue
        for i, c in reversed(children(node)):
            stack.append((pos + (i,), c))


def positions_of(t: Term, s: Term, *, under_quantifiers: bool = True) -> list[Position]:
    """All positions in ``t`` whose subterm equals ``s``, left to right."""
    return sorted(p for p, sub in iter_subterms(t, under_quantifiers=under_quantifiers) if sub == s)


def is_ground(t: Term) -> bool:
    """True if ``t`` contains no variable nodes."""
    return all(not isinstance(sub, Var) for _, sub in iter_subterms(t))


def subst_var(t: Term, var: Var, value: Term) -> Term:
    """Substitute ``value`` for free occurrences of ``var``.

    ``value`` is expected to be ground, so capture cannot occur; inner
    binders of the same name still shadow correctly.
    """
    if value.type != var.type:
        raise TermTypeError(f"substituting {value.type} for variable of type {var.type}")

    def go(node: Term) -> Term:
        if isinstance(node, Var):
            return value if node == var else node
        if isinstance(node, Quant) and node.var == var:
            return node  # shadowed
        out = node
        for i, c in children(node):
            out = _with_child(out, i, go(c))
        return out

    return go(t)


# ---------------------------------------------------------------------------
# Single-subterm difference

def _minimal_diff_positions(t1: Term, t2: Term) -> list[Position]:
    """Outermost positions at which t1 and t2 structurally disagree.

    Quantifier nodes are treated as atoms: differences below a binder are
    reported at the binder itself.
    """
    out: list[Position] = []

    def walk(a: Term, b: Term, pos: Position) -> None:
        if a == b:
            return
        if type(a) is not type(b) or isinstance(a, (Const, Var, Quant)):
            out.append(pos)
            return
        if isinstance(a, Conn) and a.op != b.op:
            out.append(pos)
            return
        for (i, ca), (_, cb) in zip(children(a), children(b)):
            walk(ca, cb, pos + (i,))

    walk(t1, t2, ())
    return sorted(out)


def diff_single_subterm(
    t1: Term, t2: Term
) -> Optional[tuple[Term, Term, list[Position]]]:
    """Explain ``t2`` as ``t1`` with one proper subterm replaced throughout.

    Returns ``(s1, s2, positions)`` such that replacing ``s1`` by ``s2`` at
    exactly ``positions`` turns ``t1`` into ``t2``, or ``None`` when no
    single pair of equally-typed proper subterms accounts for every
    difference.  Among nested explanations the outermost pair (shortest
    positions) wins.  Differences under quantifiers are not analysed.
    """
    if t1.type != t2.type:
        return None
    diffs = _minimal_diff_positions(t1, t2)
    if not diffs:
        return None

    candidates: dict[tuple[Term, Term], None] = {}
    for d in diffs:
        for k in range(1, len(d) + 1):
            a = d[:k]
            s1 = subterm_at(t1, a)
            s2 = subterm_at(t2, a)
            if s1 != s2 and s1.type == s2.type:
                candidates.setdefault((s1, s2))

    solutions = []
    for s1, s2 in candidates:
        occ1 = positions_of(t1, s1, under_quantifiers=False)
        pos = [p for p in occ1 if p and resolves(t2, p) and subterm_at(t2, p) == s2]
        if not pos:
            continue
        try:
            if replace_at(t1, pos, s2) == t2:
                solutions.append((s1, s2, pos))
        except (PositionError, TermTypeError):
            continue

    if not solutions:
        return None
    solutions.sort(
        key=lambda sol: (
            max(len(p) for p in sol[2]),
            sum(len(p) for p in sol[2]),
            len(sol[2]),
            repr(sol[0]),
        )
    )
    return solutions[0]
