"""Classifying goals as propositional, first-order or higher-order.

The class of the focused goal gates which agents are worth running: a
quantifier tactic is useless on a propositional goal.  Classification is
broadcast through the boards so agents can compare it against their own
requirement before doing any work.
"""

from __future__ import annotations

import enum
import functools

from .terms import (
    App,
    Eq,
    FuncType,
    OMICRON,
    Quant,
    Term,
    iter_subterms,
)


@functools.total_ordering
class LogicClass(enum.Enum):
    PROP = 0
    FO = 1
    HO = 2

    def __lt__(self, other):
        if not isinstance(other, LogicClass):
            return NotImplemented
        return self.value < other.value

    def __str__(self):
        return self.name

    @staticmethod
    def parse(text: str) -> "LogicClass":
        return LogicClass[text.strip().upper()]


def classify_formula(t: Term) -> LogicClass:
    """Smallest logic class that covers every construct in ``t``.

    Higher-order: an application whose argument is a formula, a quantifier
    over a functional type, or an equality at formula or functional type.
    First-order: any other quantifier or equality.  Everything else is
    propositional (applications at base types count as plain atoms).
    """
    cls = LogicClass.PROP
    for _, sub in iter_subterms(t):
        if isinstance(sub, App) and sub.arg.type == OMICRON:
            return LogicClass.HO
        if isinstance(sub, Quant):
            if isinstance(sub.var.type, FuncType):
                return LogicClass.HO
            cls = max(cls, LogicClass.FO)
        elif isinstance(sub, Eq):
            if sub.lhs.type == OMICRON or isinstance(sub.lhs.type, FuncType):
                return LogicClass.HO
            cls = max(cls, LogicClass.FO)
    return cls


def classify_goal(goal_formula: Term) -> LogicClass:
    """Class of the focused subgoal.

    Only the goal formula itself is inspected: a higher-order hypothesis
    in the context must not stop a purely propositional subgoal from
    being treated as such.
    """
    return classify_formula(goal_formula)
