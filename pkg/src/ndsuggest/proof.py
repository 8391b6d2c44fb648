"""Linearized natural-deduction partial proofs.

A proof is an append-only list of lines in creation order.  Executing a
tactic never renumbers or deletes lines: it justifies the goal line and
appends any generated hypotheses and subgoals.  Snapshots are immutable,
so agent societies can read them without coordination.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional

from .argmap import Actual, ArgMap, render_actual
from .errors import FocusError, TacticError
from .terms import OMICRON, Term

OPEN = "Open"
HYP = "Hyp"


@dataclass(frozen=True)
class Justification:
    rule: str
    params: tuple[Actual, ...] = ()
    premises: tuple[str, ...] = ()

    def render(self) -> str:
        if self.rule in (OPEN, HYP):
            return self.rule
        parts = [f"{self.rule}:"]
        if self.params:
            parts.append("(" + " ".join(render_actual(p) for p in self.params) + ")")
        parts.append("(" + " ".join(self.premises) + ")")
        return " ".join(parts)


@dataclass(frozen=True)
class ProofLine:
    label: str
    hyps: tuple[str, ...]
    formula: Term
    just: Justification

    def __post_init__(self):
        if self.formula.type != OMICRON:
            raise TacticError(f"line {self.label} must carry a formula")

    @property
    def is_open(self) -> bool:
        return self.just.rule == OPEN

    @property
    def is_hyp(self) -> bool:
        return self.just.rule == HYP

    def render(self) -> str:
        from .parser import render_term

        hyps = "(" + " ".join(self.hyps) + ")"
        return f"{self.label} {hyps} |- {render_term(self.formula)} {self.just.render()}"


@dataclass(frozen=True)
class PartialProof:
    lines: tuple[ProofLine, ...]
    counter: int = 1  # next fresh L-label index

    @staticmethod
    def initial(conjecture: Term, label: str = "C") -> "PartialProof":
        line = ProofLine(label, (), conjecture, Justification(OPEN))
        return PartialProof((line,), 1)

    # -- lookup ----------------------------------------------------------------

    def find(self, label: str) -> Optional[ProofLine]:
        for ln in self.lines:
            if ln.label == label:
                return ln
        return None

    def line(self, label: str) -> ProofLine:
        ln = self.find(label)
        if ln is None:
            raise TacticError(f"no such proof line {label}")
        return ln

    def open_lines(self) -> tuple[ProofLine, ...]:
        return tuple(ln for ln in self.lines if ln.is_open)

    def is_complete(self) -> bool:
        return not any(ln.is_open for ln in self.lines)

    def supports_for(self, goal_label: str) -> tuple[str, ...]:
        """Labels usable as premises for the goal, chronological order.

        A support must be justified, visible under the goal's hypotheses,
        and must not itself depend on the goal (no circular premises).
        """
        goal = self.line(goal_label)
        hypset = set(goal.hyps)
        return tuple(
            ln.label
            for ln in self.lines
            if ln.label != goal_label
            and not ln.is_open
            and set(ln.hyps) <= hypset
            and not self._depends_on(ln.label, goal_label)
        )

    def _depends_on(self, start: str, target: str) -> bool:
        seen = set()
        stack = [start]
        while stack:
            cur = stack.pop()
            if cur == target:
                return True
            if cur in seen:
                continue
            seen.add(cur)
            ln = self.find(cur)
            if ln is not None:
                stack.extend(ln.just.premises)
        return False

    # -- functional update -------------------------------------------------------

    def allocate(self, n: int) -> tuple[tuple[str, ...], "PartialProof"]:
        labels = tuple(f"L{self.counter + i}" for i in range(n))
        return labels, replace(self, counter=self.counter + n)

    def append(self, line: ProofLine) -> "PartialProof":
        if self.find(line.label) is not None:
            raise TacticError(f"duplicate line label {line.label}")
        for h in line.hyps:
            if h == line.label:
                if not line.is_hyp:
                    raise TacticError(f"line {line.label} cannot hypothesise itself")
                continue
            hl = self.find(h)
            if hl is None or not hl.is_hyp:
                raise TacticError(f"line {line.label} cites unknown hypothesis {h}")
        return replace(self, lines=self.lines + (line,))

    def justify(self, label: str, just: Justification) -> "PartialProof":
        target = self.line(label)
        if not target.is_open:
            raise TacticError(f"line {label} is already justified")
        for p in just.premises:
            if self.find(p) is None:
                raise TacticError(f"premise {p} does not exist")
        self._check_acyclic(label, just.premises)
        new_lines = tuple(
            replace(ln, just=just) if ln.label == label else ln for ln in self.lines
        )
        return replace(self, lines=new_lines)

    def _check_acyclic(self, label: str, premises: tuple[str, ...]) -> None:
        seen = set()
        stack = list(premises)
        while stack:
            cur = stack.pop()
            if cur == label:
                raise TacticError(f"justifying {label} from {premises} forms a cycle")
            if cur in seen:
                continue
            seen.add(cur)
            ln = self.find(cur)
            if ln is not None:
                stack.extend(ln.just.premises)

    def render(self) -> str:
        return "\n".join(ln.render() for ln in self.lines)


@dataclass(frozen=True)
class Focus:
    """One open subgoal plus the lines visible to it.

    ``supports`` is chronological (most recent last); agents scan it most
    recent first because fresh lines are the likeliest premises.
    """

    goal: str
    supports: tuple[str, ...]

    def supports_recent_first(self) -> tuple[str, ...]:
        return tuple(reversed(self.supports))


def current_focus(
    proof: PartialProof, selection: Optional[str] = None
) -> Optional[Focus]:
    """Focus on ``selection`` or the most recently created open line.

    Returns ``None`` when the proof is complete.
    """
    if selection is not None:
        ln = proof.find(selection)
        if ln is None or not ln.is_open:
            raise FocusError(f"{selection} is not an open line")
        goal = selection
    else:
        opens = proof.open_lines()
        if not opens:
            return None
        goal = opens[-1].label
    return Focus(goal, proof.supports_for(goal))


@dataclass(frozen=True)
class Outline:
    """Fixed slot structure and behaviour of one tactic.

    ``check`` validates an argument map (``partial=True`` validates only
    the assigned slots, as used during election; ``partial=False``
    additionally requires everything needed to execute).  ``apply``
    produces the successor proof.
    """

    name: str
    premises: tuple[str, ...]
    conclusions: tuple[str, ...]
    parameters: tuple[str, ...]
    check: Callable[[PartialProof, ArgMap, bool], None]
    apply: Callable[[PartialProof, ArgMap], PartialProof]


def apply_tactic(proof: PartialProof, outline: Outline, args: ArgMap) -> PartialProof:
    """Validate ``args`` against ``outline`` and produce the next proof."""
    outline.check(proof, args, False)
    return outline.apply(proof, args)
