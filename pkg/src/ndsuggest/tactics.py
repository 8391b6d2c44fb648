"""The command catalog: concrete tactics and their argument surfaces.

Eight commands cover introduction/elimination for the connectives used in
practice plus equality substitution, boolean-extensionality bridging and
an internal propositional decision procedure standing in for an external
prover.  Goal-directed tactics apply backward (they justify the focused
open line and may create new subgoals); elimination tactics apply forward
(they derive new lines from premises, or close matching open lines).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Optional

from .argmap import (
    ArgMap,
    LabelsArg,
    LineRef,
    PositionsArg,
    SlotKind,
    SlotSpec,
    TermArg,
    ValueKind,
)
from .classify import LogicClass, classify_formula
from .errors import ClassError, ResourceLimitError, TacticError
from .proof import HYP, OPEN, Justification, Outline, PartialProof, ProofLine
from .terms import (
    Conn,
    Eq,
    Not,
    OMICRON,
    Position,
    Quant,
    Term,
    diff_single_subterm,
    replace_at,
    resolves,
    subterm_at,
    subst_var,
)

BACKWARD = "backward"
FORWARD = "forward"


@dataclass(frozen=True)
class CommandDescriptor:
    """A user command, its outline, and its exposed formal arguments."""

    name: str
    outline: Outline
    slots: tuple[SlotSpec, ...]
    logic_class: LogicClass
    goal_closing: bool
    direction: str

    @property
    def slot_names(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.slots)

    @property
    def line_slots(self) -> frozenset[str]:
        return frozenset(s.name for s in self.slots if s.value == ValueKind.LINE)

    def slot(self, name: str) -> SlotSpec:
        for s in self.slots:
            if s.name == name:
                return s
        raise KeyError(name)

    def empty_map(self, epoch: int = 0) -> ArgMap:
        return ArgMap.make(self.name, self.slot_names, {}, epoch=epoch)

    def missing_mandatory(self, args: ArgMap) -> tuple[str, ...]:
        """Mandatory slots still unassigned; empty means executable."""
        return tuple(
            s.name for s in self.slots if s.mandatory and args.get(s.name) is None
        )

    def check(self, proof: PartialProof, args: ArgMap, partial: bool) -> None:
        self.outline.check(proof, args, partial)

    def applicable(self, proof: PartialProof, args: ArgMap, partial: bool) -> bool:
        try:
            self.check(proof, args, partial)
            return True
        except (TacticError, ClassError, ResourceLimitError):
            return False


# ---------------------------------------------------------------------------
# Propositional decision procedure

def prop_atoms(t: Term) -> list[Term]:
    """Atoms of a propositional formula, in first-occurrence order."""
    atoms: dict[Term, None] = {}

    def walk(node: Term) -> None:
        if isinstance(node, Conn):
            walk(node.left)
            walk(node.right)
        elif isinstance(node, Not):
            walk(node.body)
        else:
            atoms.setdefault(node)

    walk(t)
    return list(atoms)


def _eval_prop(t: Term, env: dict[Term, bool]) -> bool:
    if isinstance(t, Conn):
        l = _eval_prop(t.left, env)
        r = _eval_prop(t.right, env)
        if t.op == "&":
            return l and r
        if t.op == "|":
            return l or r
        if t.op == "=>":
            return (not l) or r
        return l == r
    if isinstance(t, Not):
        return not _eval_prop(t.body, env)
    return env[t]


def prop_solve(goal: Term, supports: list[Term], atom_limit: int = 16) -> bool:
    """Truth-table validity of ``supports |- goal``.

    All formulas must classify as propositional; refuses formulas with
    more than ``atom_limit`` distinct atoms to bound the table.
    """
    for f in [goal, *supports]:
        if classify_formula(f) != LogicClass.PROP:
            raise ClassError("propositional decision procedure needs PROP input")
    atoms: dict[Term, None] = {}
    for f in [goal, *supports]:
        for a in prop_atoms(f):
            atoms.setdefault(a)
    atom_list = list(atoms)
    if len(atom_list) > atom_limit:
        raise ResourceLimitError(
            f"{len(atom_list)} atoms exceed the {atom_limit}-atom truth-table bound"
        )
    for bits in itertools.product((False, True), repeat=len(atom_list)):
        env = dict(zip(atom_list, bits))
        if all(_eval_prop(s, env) for s in supports) and not _eval_prop(goal, env):
            return False
    return True


# ---------------------------------------------------------------------------
# Shared slot validation helpers

def _get_line(proof: PartialProof, args: ArgMap, slot: str) -> Optional[ProofLine]:
    v = args.get(slot)
    if v is None:
        return None
    assert isinstance(v, LineRef)
    ln = proof.find(v.label)
    if ln is None:
        raise TacticError(f"slot {slot} references unknown line {v.label}", slot=slot)
    return ln


def _need(args: ArgMap, partial: bool, *slots: str) -> bool:
    """In a full check, every listed slot must be assigned."""
    missing = [s for s in slots if args.get(s) is None]
    if missing and not partial:
        raise TacticError(f"missing mandatory argument {missing[0]}", slot=missing[0])
    return not missing


def _require_goal(line: ProofLine, slot: str) -> None:
    if not line.is_open:
        raise TacticError(f"{line.label} is not an open goal", slot=slot)


def _require_support(line: ProofLine, goal: Optional[ProofLine], slot: str) -> None:
    if line.is_open:
        raise TacticError(f"{line.label} is open and cannot serve as a premise", slot=slot)
    if goal is not None:
        if line.label == goal.label:
            raise TacticError(f"{line.label} is the goal, not a support", slot=slot)
        if not set(line.hyps) <= set(goal.hyps):
            raise TacticError(
                f"{line.label} depends on hypotheses not available to {goal.label}",
                slot=slot,
            )


def _premise_labels(proof: PartialProof, args: ArgMap, slot: str,
                    goal: Optional[ProofLine]) -> tuple[str, ...]:
    v = args.get(slot)
    if v is None:
        return ()
    assert isinstance(v, LabelsArg)
    for lab in v.labels:
        ln = proof.find(lab)
        if ln is None:
            raise TacticError(f"slot {slot} references unknown line {lab}", slot=slot)
        _require_support(ln, goal, slot)
    return v.labels


# ---------------------------------------------------------------------------
# Implication introduction (backward)

def _impi_check(proof: PartialProof, args: ArgMap, partial: bool) -> None:
    if not _need(args, partial, "c"):
        return
    goal = _get_line(proof, args, "c")
    _require_goal(goal, "c")
    if not (isinstance(goal.formula, Conn) and goal.formula.op == "=>"):
        raise TacticError(f"{goal.label} is not an implication", slot="c")


def _impi_apply(proof: PartialProof, args: ArgMap) -> PartialProof:
    goal = _get_line(proof, args, "c")
    f = goal.formula
    (hyp_lab, sub_lab), proof = proof.allocate(2)
    hyps = goal.hyps + (hyp_lab,)
    proof = proof.append(ProofLine(hyp_lab, hyps, f.left, Justification(HYP)))
    proof = proof.append(ProofLine(sub_lab, hyps, f.right, Justification(OPEN)))
    return proof.justify(goal.label, Justification("ImpI", (), (sub_lab,)))


# ---------------------------------------------------------------------------
# Conjunction introduction (backward)

def _andi_check(proof: PartialProof, args: ArgMap, partial: bool) -> None:
    goal = None
    if _need(args, partial, "c"):
        goal = _get_line(proof, args, "c")
        _require_goal(goal, "c")
        if not (isinstance(goal.formula, Conn) and goal.formula.op == "&"):
            raise TacticError(f"{goal.label} is not a conjunction", slot="c")
    for slot, side in (("p1", "left"), ("p2", "right")):
        ln = _get_line(proof, args, slot)
        if ln is None:
            continue
        _require_support(ln, goal, slot)
        if goal is not None and ln.formula != getattr(goal.formula, side):
            raise TacticError(f"{ln.label} does not prove the {side} conjunct", slot=slot)


def _andi_apply(proof: PartialProof, args: ArgMap) -> PartialProof:
    goal = _get_line(proof, args, "c")
    premises = []
    for slot, sub in (("p1", goal.formula.left), ("p2", goal.formula.right)):
        ln = _get_line(proof, args, slot)
        if ln is not None:
            premises.append(ln.label)
            continue
        (lab,), proof = proof.allocate(1)
        proof = proof.append(ProofLine(lab, goal.hyps, sub, Justification(OPEN)))
        premises.append(lab)
    return proof.justify(goal.label, Justification("AndI", (), tuple(premises)))


# ---------------------------------------------------------------------------
# Conjunction elimination (forward)

def _ande_check(proof: PartialProof, args: ArgMap, partial: bool) -> None:
    prem = None
    if _need(args, partial, "p"):
        prem = _get_line(proof, args, "p")
        _require_support(prem, None, "p")
        if not (isinstance(prem.formula, Conn) and prem.formula.op == "&"):
            raise TacticError(f"{prem.label} is not a conjunction", slot="p")
    seen_targets = set()
    for slot, side in (("c1", "left"), ("c2", "right")):
        ln = _get_line(proof, args, slot)
        if ln is None:
            continue
        if ln.label in seen_targets:
            raise TacticError(f"{ln.label} cannot close both conjunct slots", slot=slot)
        seen_targets.add(ln.label)
        _require_goal(ln, slot)
        if prem is not None:
            if ln.formula != getattr(prem.formula, side):
                raise TacticError(f"{ln.label} is not the {side} conjunct", slot=slot)
            if not set(prem.hyps) <= set(ln.hyps):
                raise TacticError(f"{prem.label} is not visible to {ln.label}", slot=slot)


def _ande_apply(proof: PartialProof, args: ArgMap) -> PartialProof:
    prem = _get_line(proof, args, "p")
    targets = [(s, _get_line(proof, args, s)) for s in ("c1", "c2")]
    just = Justification("AndE", (), (prem.label,))
    if any(ln is not None for _, ln in targets):
        for _, ln in targets:
            if ln is not None:
                proof = proof.justify(ln.label, just)
        return proof
    for sub in (prem.formula.left, prem.formula.right):
        (lab,), proof = proof.allocate(1)
        proof = proof.append(ProofLine(lab, prem.hyps, sub, just))
    return proof


# ---------------------------------------------------------------------------
# Universal elimination (forward)

def _foralle_check(proof: PartialProof, args: ArgMap, partial: bool) -> None:
    prem = None
    if _need(args, partial, "p"):
        prem = _get_line(proof, args, "p")
        _require_support(prem, None, "p")
        if not (isinstance(prem.formula, Quant) and prem.formula.kind == "all"):
            raise TacticError(f"{prem.label} is not universally quantified", slot="p")
    inst = None
    tv = args.get("t")
    if _need(args, partial, "t") and prem is not None:
        assert isinstance(tv, TermArg)
        if tv.term.type != prem.formula.var.type:
            raise TacticError(
                f"instantiation term has type {tv.term.type}, "
                f"but the binder expects {prem.formula.var.type}",
                slot="t",
            )
        inst = subst_var(prem.formula.body, prem.formula.var, tv.term)
    target = _get_line(proof, args, "c")
    if target is not None:
        _require_goal(target, "c")
        if inst is not None and target.formula != inst:
            raise TacticError(f"{target.label} is not the instance at that term", slot="c")
        if prem is not None and not set(prem.hyps) <= set(target.hyps):
            raise TacticError(f"{prem.label} is not visible to {target.label}", slot="c")


def _foralle_apply(proof: PartialProof, args: ArgMap) -> PartialProof:
    prem = _get_line(proof, args, "p")
    tv = args.get("t")
    assert isinstance(tv, TermArg)
    inst = subst_var(prem.formula.body, prem.formula.var, tv.term)
    just = Justification("ForallE", (tv,), (prem.label,))
    target = _get_line(proof, args, "c")
    if target is not None:
        return proof.justify(target.label, just)
    (lab,), proof = proof.allocate(1)
    return proof.append(ProofLine(lab, prem.hyps, inst, just))


# ---------------------------------------------------------------------------
# Equality substitution (backward)

def _eqsubst_pair(goal: ProofLine, support: ProofLine) -> tuple[Term, Term, list[Position]]:
    d = diff_single_subterm(goal.formula, support.formula)
    if d is None:
        raise TacticError(
            f"{goal.label} and {support.label} do not differ in a single subterm",
            slot="u",
        )
    return d


def _eqsubst_positions(goal: ProofLine, support: ProofLine,
                       pl: tuple[Position, ...]) -> tuple[Term, Term]:
    """Validate that the two lines differ exactly at ``pl``; return the pair."""
    if not pl:
        raise TacticError("empty position list", slot="pl")
    goal_subs = set()
    supp_subs = set()
    for p in pl:
        if not resolves(goal.formula, p) or not resolves(support.formula, p):
            raise TacticError(f"position {list(p)} does not resolve", slot="pl")
        goal_subs.add(subterm_at(goal.formula, p))
        supp_subs.add(subterm_at(support.formula, p))
    if len(goal_subs) != 1 or len(supp_subs) != 1:
        raise TacticError("positions do not address a single subterm pair", slot="pl")
    gs, us = goal_subs.pop(), supp_subs.pop()
    if gs == us or gs.type != us.type:
        raise TacticError("subterms at the positions are not an eligible pair", slot="pl")
    if replace_at(goal.formula, list(pl), us) != support.formula:
        raise TacticError(
            f"replacing at {', '.join(str(list(p)) for p in pl)} does not "
            f"relate {goal.label} to {support.label}",
            slot="pl",
        )
    return gs, us


def _eqsubst_check(proof: PartialProof, args: ArgMap, partial: bool) -> None:
    goal = None
    if _need(args, partial, "s"):
        goal = _get_line(proof, args, "s")
        _require_goal(goal, "s")
    support = None
    if _need(args, partial, "u"):
        support = _get_line(proof, args, "u")
        _require_support(support, goal, "u")
    pair = None
    pl = args.get("pl")
    if _need(args, partial, "pl"):
        assert isinstance(pl, PositionsArg)
        if goal is not None and support is not None:
            pair = _eqsubst_positions(goal, support, pl.positions)
    elif goal is not None and support is not None:
        gs, us, _ = _eqsubst_pair(goal, support)
        pair = (gs, us)
    eq = _get_line(proof, args, "eq")
    if eq is not None:
        _require_support(eq, goal, "eq")
        if not isinstance(eq.formula, Eq):
            raise TacticError(f"{eq.label} is not an equality", slot="eq")
        if pair is not None:
            gs, us = pair
            if eq.formula not in (Eq(gs, us), Eq(us, gs)):
                raise TacticError(
                    f"{eq.label} does not equate the differing subterms", slot="eq"
                )


def _eqsubst_apply(proof: PartialProof, args: ArgMap) -> PartialProof:
    goal = _get_line(proof, args, "s")
    support = _get_line(proof, args, "u")
    pl = args.get("pl")
    assert isinstance(pl, PositionsArg)
    gs, us = _eqsubst_positions(goal, support, pl.positions)
    eq = _get_line(proof, args, "eq")
    if eq is None:
        (eq_lab,), proof = proof.allocate(1)
        # the new subgoal is oriented goal-subterm = support-subterm
        proof = proof.append(
            ProofLine(eq_lab, goal.hyps, Eq(gs, us), Justification(OPEN))
        )
    else:
        eq_lab = eq.label
    just = Justification("EqSubst", (pl,), (support.label, eq_lab))
    return proof.justify(goal.label, just)


# ---------------------------------------------------------------------------
# Boolean equality from equivalence (backward)

def _equiv2eq_check(proof: PartialProof, args: ArgMap, partial: bool) -> None:
    goal = None
    if _need(args, partial, "c"):
        goal = _get_line(proof, args, "c")
        _require_goal(goal, "c")
        if not (isinstance(goal.formula, Eq) and goal.formula.lhs.type == OMICRON):
            raise TacticError(f"{goal.label} is not an equality between formulas", slot="c")
    prem = _get_line(proof, args, "p")
    if prem is not None:
        _require_support(prem, goal, "p")
        if goal is not None:
            want = Conn("<=>", goal.formula.lhs, goal.formula.rhs)
            if prem.formula != want:
                raise TacticError(f"{prem.label} is not the matching equivalence", slot="p")


def _equiv2eq_apply(proof: PartialProof, args: ArgMap) -> PartialProof:
    goal = _get_line(proof, args, "c")
    prem = _get_line(proof, args, "p")
    if prem is None:
        (lab,), proof = proof.allocate(1)
        iff = Conn("<=>", goal.formula.lhs, goal.formula.rhs)
        proof = proof.append(ProofLine(lab, goal.hyps, iff, Justification(OPEN)))
    else:
        lab = prem.label
    return proof.justify(goal.label, Justification("Equiv2Eq", (), (lab,)))


# ---------------------------------------------------------------------------
# Internal propositional prover (backward, closes the goal)

def _propsolve_check(atom_limit: int):
    def check(proof: PartialProof, args: ArgMap, partial: bool) -> None:
        if not _need(args, partial, "conc"):
            return
        goal = _get_line(proof, args, "conc")
        _require_goal(goal, "conc")
        labels = _premise_labels(proof, args, "prems", goal)
        formulas = [proof.line(lab).formula for lab in labels]
        try:
            if not prop_solve(goal.formula, formulas, atom_limit):
                raise TacticError(
                    f"{goal.label} is not propositionally entailed", slot="conc"
                )
        except ClassError as e:
            raise TacticError(str(e), slot="conc") from e

    return check


def _propsolve_apply(label: str):
    def apply(proof: PartialProof, args: ArgMap) -> PartialProof:
        goal = _get_line(proof, args, "conc")
        prems = args.get("prems")
        labels = prems.labels if isinstance(prems, LabelsArg) else ()
        return proof.justify(goal.label, Justification(label, (), labels))

    return apply


# ---------------------------------------------------------------------------
# Closing a goal against an identical support line (backward)

def _axiom_check(proof: PartialProof, args: ArgMap, partial: bool) -> None:
    goal = None
    if _need(args, partial, "c"):
        goal = _get_line(proof, args, "c")
        _require_goal(goal, "c")
    if _need(args, partial, "p"):
        prem = _get_line(proof, args, "p")
        _require_support(prem, goal, "p")
        if goal is not None and prem.formula != goal.formula:
            raise TacticError(f"{prem.label} does not match the goal formula", slot="p")


def _axiom_apply(proof: PartialProof, args: ArgMap) -> PartialProof:
    goal = _get_line(proof, args, "c")
    prem = _get_line(proof, args, "p")
    return proof.justify(goal.label, Justification("Axiom", (), (prem.label,)))


# ---------------------------------------------------------------------------
# Catalog assembly

def _slots(*specs: tuple[str, SlotKind, ValueKind, bool]) -> tuple[SlotSpec, ...]:
    return tuple(SlotSpec(n, k, v, m) for n, k, v, m in specs)


def catalog(prover_label: str = "PropSolve", atom_limit: int = 16) -> tuple[CommandDescriptor, ...]:
    """The fixed command catalog.

    ``prover_label`` names the justification written by the internal
    propositional prover, so transcripts can mimic an external system.
    """
    P, C, Q = SlotKind.PREMISE, SlotKind.CONCLUSION, SlotKind.PARAMETER
    L, T, PS, LS = ValueKind.LINE, ValueKind.TERM, ValueKind.POSITIONS, ValueKind.LABELS

    def outline(name, prem, conc, par, check, apply):
        return Outline(name, prem, conc, par, check, apply)

    return (
        CommandDescriptor(
            "ImpI",
            outline("ImpI", ("p",), ("c",), (), _impi_check, _impi_apply),
            _slots(("c", C, L, True)),
            LogicClass.PROP,
            False,
            BACKWARD,
        ),
        CommandDescriptor(
            "AndI",
            outline("AndI", ("p1", "p2"), ("c",), (), _andi_check, _andi_apply),
            _slots(("p1", P, L, False), ("p2", P, L, False), ("c", C, L, True)),
            LogicClass.PROP,
            False,
            BACKWARD,
        ),
        CommandDescriptor(
            "AndE",
            outline("AndE", ("p",), ("c1", "c2"), (), _ande_check, _ande_apply),
            _slots(("p", P, L, True), ("c1", C, L, False), ("c2", C, L, False)),
            LogicClass.PROP,
            False,
            FORWARD,
        ),
        CommandDescriptor(
            "ForallE",
            outline("ForallE", ("p",), ("c",), ("t",), _foralle_check, _foralle_apply),
            _slots(("p", P, L, True), ("t", Q, T, True), ("c", C, L, False)),
            LogicClass.FO,
            False,
            FORWARD,
        ),
        CommandDescriptor(
            "EqSubst",
            outline(
                "EqSubst", ("u", "eq"), ("s",), ("pl",), _eqsubst_check, _eqsubst_apply
            ),
            _slots(
                ("u", P, L, True),
                ("eq", P, L, False),
                ("s", C, L, True),
                ("pl", Q, PS, True),
            ),
            LogicClass.HO,
            False,
            BACKWARD,
        ),
        CommandDescriptor(
            "Equiv2Eq",
            outline("Equiv2Eq", ("p",), ("c",), (), _equiv2eq_check, _equiv2eq_apply),
            _slots(("p", P, L, False), ("c", C, L, True)),
            LogicClass.HO,
            False,
            BACKWARD,
        ),
        CommandDescriptor(
            "PropSolve",
            outline(
                "PropSolve",
                (),
                ("conc",),
                ("prems",),
                _propsolve_check(atom_limit),
                _propsolve_apply(prover_label),
            ),
            _slots(("conc", C, L, True), ("prems", Q, LS, False)),
            LogicClass.PROP,
            True,
            BACKWARD,
        ),
        CommandDescriptor(
            "Axiom",
            outline("Axiom", ("p",), ("c",), (), _axiom_check, _axiom_apply),
            _slots(("c", C, L, True), ("p", P, L, True)),
            LogicClass.PROP,
            True,
            BACKWARD,
        ),
    )


def catalog_by_name(cat: Iterable[CommandDescriptor]) -> dict[str, CommandDescriptor]:
    return {c.name: c for c in cat}


# ---------------------------------------------------------------------------
# Local re-validation of justified lines

def validate_line(proof: PartialProof, line: ProofLine,
                  prover_label: str = "PropSolve", atom_limit: int = 16) -> bool:
    """Re-check that a line's recorded justification reproduces its formula."""
    just = line.just
    if just.rule in (OPEN, HYP):
        return True
    prems = [proof.find(p) for p in just.premises]
    if any(p is None for p in prems):
        return False
    try:
        if just.rule == "ImpI":
            (sub,) = prems
            f = line.formula
            return isinstance(f, Conn) and f.op == "=>" and sub.formula == f.right
        if just.rule == "AndI":
            p1, p2 = prems
            f = line.formula
            return (
                isinstance(f, Conn)
                and f.op == "&"
                and p1.formula == f.left
                and p2.formula == f.right
            )
        if just.rule == "AndE":
            (p,) = prems
            f = p.formula
            return isinstance(f, Conn) and f.op == "&" and line.formula in (f.left, f.right)
        if just.rule == "ForallE":
            (p,) = prems
            (tv,) = just.params
            f = p.formula
            return (
                isinstance(f, Quant)
                and f.kind == "all"
                and subst_var(f.body, f.var, tv.term) == line.formula
            )
        if just.rule == "EqSubst":
            u, eq = prems
            (pl,) = just.params
            gs = {subterm_at(line.formula, p) for p in pl.positions}
            us = {subterm_at(u.formula, p) for p in pl.positions}
            if len(gs) != 1 or len(us) != 1:
                return False
            g, s = gs.pop(), us.pop()
            if eq.formula not in (Eq(g, s), Eq(s, g)):
                return False
            return replace_at(line.formula, list(pl.positions), s) == u.formula
        if just.rule == "Equiv2Eq":
            (p,) = prems
            f = line.formula
            return isinstance(f, Eq) and p.formula == Conn("<=>", f.lhs, f.rhs)
        if just.rule == prover_label:
            return prop_solve(line.formula, [p.formula for p in prems], atom_limit)
        if just.rule == "Axiom":
            (p,) = prems
            return p.formula == line.formula
    except (TacticError, ClassError, ResourceLimitError):
        return False
    return False


def validate_proof(proof: PartialProof, prover_label: str = "PropSolve") -> bool:
    return all(validate_line(proof, ln, prover_label) for ln in proof.lines)
