"""Partial argument assignments for prover commands.

Every command declares a fixed tuple of formal argument slots.  An
``ArgMap`` assigns each slot either an actual value or nothing; agents
exchange these maps via the suggestion boards, extending each other's
until one is complete enough to execute.

Canonical text form (bit-exact in the wire protocol, logs and tests)::

    EqSubst{u:L1,eq:~,s:L2,pl:[1]}

with ``~`` for an unassigned slot, positions as ``[1;2,1]``, label lists
as ``(L1,L2)`` and term values in formula syntax.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Mapping, Optional, Union

from .errors import ComparisonError, ParseError
from .parser import (
    Parser,
    parse_position_list,
    render_position_list,
    render_term,
)
from .terms import Position, Term


class SlotKind(enum.Enum):
    PREMISE = "premise-line"
    CONCLUSION = "conclusion-line"
    PARAMETER = "parameter"


class ValueKind(enum.Enum):
    LINE = "line"
    TERM = "term"
    POSITIONS = "positions"
    LABELS = "labels"


@dataclass(frozen=True)
class SlotSpec:
    """One formal argument of a command."""

    name: str
    kind: SlotKind
    value: ValueKind
    mandatory: bool = False


@dataclass(frozen=True)
class LineRef:
    label: str


@dataclass(frozen=True)
class TermArg:
    term: Term


@dataclass(frozen=True)
class PositionsArg:
    positions: tuple[Position, ...]


@dataclass(frozen=True)
class LabelsArg:
    labels: tuple[str, ...]


Actual = Union[LineRef, TermArg, PositionsArg, LabelsArg]


def render_actual(value: Optional[Actual]) -> str:
    if value is None:
        return "~"
    if isinstance(value, LineRef):
        return value.label
    if isinstance(value, TermArg):
        return render_term(value.term)
    if isinstance(value, PositionsArg):
        return render_position_list(value.positions)
    if isinstance(value, LabelsArg):
        return "(" + ",".join(value.labels) + ")"
    raise TypeError(f"not an actual argument: {value!r}")


_LABEL = re.compile(r"[A-Za-z][A-Za-z0-9_]*$")


def parse_actual(text: str, slot: SlotSpec, parser: Parser | None = None) -> Optional[Actual]:
    s = text.strip()
    if s == "~":
        return None
    if slot.value == ValueKind.LINE:
        if not _LABEL.match(s):
            raise ParseError(f"slot {slot.name} expects a line label, got {s!r}")
        return LineRef(s)
    if slot.value == ValueKind.POSITIONS:
        return PositionsArg(parse_position_list(s))
    if slot.value == ValueKind.LABELS:
        if not (s.startswith("(") and s.endswith(")")):
            raise ParseError(f"slot {slot.name} expects a label list like (L1,L2)")
        inner = s[1:-1].strip()
        if not inner:
            return LabelsArg(())
        labels = tuple(x.strip() for x in inner.split(","))
        for lab in labels:
            if not _LABEL.match(lab):
                raise ParseError(f"bad label {lab!r} in slot {slot.name}")
        return LabelsArg(labels)
    if slot.value == ValueKind.TERM:
        if parser is None:
            raise ParseError(f"slot {slot.name} needs a formula parser for terms")
        return TermArg(parser.parse(s))
    raise ParseError(f"cannot parse value for slot {slot.name}")


@dataclass(frozen=True)
class ArgMap:
    """Total map from a command's formal arguments to optional actuals.

    ``agent`` and ``epoch`` identify provenance; they do not take part in
    equality so that two agents deriving the same assignment produce the
    same map.
    """

    command: str
    entries: tuple[tuple[str, Optional[Actual]], ...]
    agent: Optional[str] = field(default=None, compare=False)
    epoch: int = field(default=0, compare=False)

    @staticmethod
    def make(
        command: str,
        slot_names: tuple[str, ...],
        values: Mapping[str, Optional[Actual]] | None = None,
        agent: Optional[str] = None,
        epoch: int = 0,
    ) -> "ArgMap":
        values = values or {}
        unknown = set(values) - set(slot_names)
        if unknown:
            raise ParseError(f"{command} has no argument(s) {sorted(unknown)}")
        return ArgMap(
            command,
            tuple((n, values.get(n)) for n in slot_names),
            agent=agent,
            epoch=epoch,
        )

    # -- access ---------------------------------------------------------------

    @property
    def values(self) -> dict[str, Optional[Actual]]:
        return dict(self.entries)

    def get(self, name: str) -> Optional[Actual]:
        for n, v in self.entries:
            if n == name:
                return v
        raise KeyError(name)

    def filled_names(self) -> tuple[str, ...]:
        return tuple(n for n, v in self.entries if v is not None)

    def filled_count(self) -> int:
        """Number of slots carrying an actual value."""
        return sum(1 for _, v in self.entries if v is not None)

    def completeness(self) -> float:
        return self.filled_count() / len(self.entries) if self.entries else 1.0

    def is_complete(self) -> bool:
        return all(v is not None for _, v in self.entries)

    def assign(
        self, values: Mapping[str, Actual], agent: Optional[str] = None, epoch: int | None = None
    ) -> "ArgMap":
        """Copy with additional slots filled; refuses to overwrite."""
        for name in values:
            if self.get(name) is not None:
                raise ParseError(f"slot {name} already assigned in {self.render()}")
        return ArgMap(
            self.command,
            tuple((n, values.get(n, v)) for n, v in self.entries),
            agent=agent if agent is not None else self.agent,
            epoch=self.epoch if epoch is None else epoch,
        )

    # -- comparison -----------------------------------------------------------

    def extends(self, base: "ArgMap") -> bool:
        """True when every assigned slot of ``base`` appears here unchanged."""
        if base.command != self.command:
            raise ComparisonError(
                f"cannot compare {base.command} against {self.command}"
            )
        mine = self.values
        return all(v is None or mine.get(n) == v for n, v in base.entries)

    def render(self) -> str:
        inner = ",".join(f"{n}:{render_actual(v)}" for n, v in self.entries)
        return f"{self.command}{{{inner}}}"

    @staticmethod
    def parse(
        text: str,
        slots: tuple[SlotSpec, ...],
        command: str,
        parser: Parser | None = None,
        epoch: int = 0,
    ) -> "ArgMap":
        s = text.strip()
        m = re.match(r"([A-Za-z0-9_]+)\{(.*)\}$", s)
        if not m:
            raise ParseError(f"argument maps look like Cmd{{x:L1,...}}; got {text!r}")
        name, body = m.group(1), m.group(2)
        if name != command:
            raise ParseError(f"expected command {command}, got {name}")
        by_name = {sp.name: sp for sp in slots}
        values: dict[str, Optional[Actual]] = {}
        for chunk in _split_top_level(body):
            if not chunk:
                continue
            if ":" not in chunk:
                raise ParseError(f"malformed slot assignment {chunk!r}")
            slot_name, value_text = chunk.split(":", 1)
            slot_name = slot_name.strip()
            if slot_name not in by_name:
                raise ParseError(f"{command} has no slot {slot_name!r}")
            if slot_name in values:
                raise ParseError(f"slot {slot_name} assigned twice")
            values[slot_name] = parse_actual(value_text, by_name[slot_name], parser)
        return ArgMap.make(
            command, tuple(sp.name for sp in slots), values, epoch=epoch
        )


def _split_top_level(body: str) -> list[str]:
    """Split on commas that are not nested in (), [] or type ascriptions."""
    parts = []
    depth = 0
    cur = []
    for ch in body:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    last = "".join(cur).strip()
    if last:
        parts.append(last)
    return parts


def compare_completeness(a: ArgMap, b: ArgMap, line_slots: frozenset[str]) -> int:
    """Total completeness order used for election; returns -1, 0 or 1.

    Primary key: number of assigned slots.  Ties: more assigned line slots
    first, then a deterministic lexicographic comparison so that election
    never depends on arrival order.
    """
    if a.command != b.command:
        raise ComparisonError(f"cannot rank {a.command} against {b.command}")
    ka = _rank_key(a, line_slots)
    kb = _rank_key(b, line_slots)
    if ka > kb:
        return 1
    if ka < kb:
        return -1
    return 0


def _rank_key(m: ArgMap, line_slots: frozenset[str]):
    lines = sum(1 for n in m.filled_names() if n in line_slots)
    # lexicographic tie-breaks are inverted so that "greater" = "better"
    names = tuple(sorted(m.filled_names()))
    serial = m.render()
    return (
        m.filled_count(),
        lines,
        tuple(-ord(c) for c in ",".join(names)),
        tuple(-ord(c) for c in serial),
    )


def best_argmap(maps, line_slots: frozenset[str]) -> Optional[ArgMap]:
    """Maximum under :func:`compare_completeness`; None for empty input."""
    best = None
    for m in maps:
        if best is None or compare_completeness(m, best, line_slots) > 0:
            best = m
    return best
