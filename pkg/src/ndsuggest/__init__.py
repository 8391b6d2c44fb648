"""Interactive natural-deduction prover with a two-layer society of
suggestion agents, resource-adaptive scheduling and goal classification."""

from .argmap import ArgMap
from .classify import LogicClass, classify_formula, classify_goal
from .parser import Parser, render_term
from .proof import Focus, PartialProof, ProofLine, apply_tactic, current_focus
from .session import Session, SessionConfig, SessionEvent
from .tactics import catalog, prop_solve
from .terms import (
    Position,
    Term,
    diff_single_subterm,
    replace_at,
    subterm_at,
)

__version__ = "0.1.0"

__all__ = [
    "ArgMap",
    "Focus",
    "LogicClass",
    "Parser",
    "PartialProof",
    "Position",
    "ProofLine",
    "Session",
    "SessionConfig",
    "SessionEvent",
    "Term",
    "apply_tactic",
    "catalog",
    "classify_formula",
    "classify_goal",
    "current_focus",
    "diff_single_subterm",
    "prop_solve",
    "render_term",
    "replace_at",
    "subterm_at",
    "__version__",
]
