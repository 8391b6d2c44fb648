"""Argument agents: the bottom layer of the suggestion mechanism.

Each agent belongs to one command's society.  It declares which formal
arguments it can compute and which must already be present in a board
entry before it has anything to work with.  Agents are restartable pure
functions over (trigger, proof snapshot, focus): all society state lives
on the boards, which makes the board fixpoint independent of scheduling.

Agents scan the focus supports most recent first and stop after a small
number of results per run; later triggers surface further results.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Optional

from .argmap import Actual, ArgMap, LabelsArg, LineRef, PositionsArg, TermArg
from .boards import BoardView
from .classify import LogicClass, classify_formula
from .errors import ProverError
from .proof import Focus, PartialProof, ProofLine
from .tactics import CommandDescriptor
from .terms import (
    Conn,
    Eq,
    OMICRON,
    Quant,
    Term,
    Var,
    children,
    diff_single_subterm,
    is_ground,
    iter_subterms,
    subst_var,
)

# marker used in processed bookkeeping for the virtual empty trigger
EMPTY_TRIGGER = "<empty>"

DEFAULT_MAX_RESULTS = 3


class AgentInterrupted(Exception):
    """Raised when a run notices the boards moved to a new epoch."""


@dataclass(frozen=True)
class AgentContext:
    proof: PartialProof
    focus: Focus
    trigger: ArgMap
    cancelled: Callable[[], bool]

    def goal(self) -> ProofLine:
        return self.proof.line(self.focus.goal)

    def support_lines(self) -> Iterator[ProofLine]:
        for label in self.focus.supports_recent_first():
            ln = self.proof.find(label)
            if ln is not None:
                yield ln

    def line(self, slot: str) -> Optional[ProofLine]:
        v = self.trigger.get(slot)
        if not isinstance(v, LineRef):
            return None
        return self.proof.find(v.label)


SearchFn = Callable[[AgentContext], Iterable[dict[str, Actual]]]


def _upward(cls: LogicClass) -> frozenset[LogicClass]:
    return frozenset(c for c in LogicClass if c >= cls)


@dataclass(frozen=True)
class AgentSpec:
    """Specification of one argument agent.

    ``computes`` are the slots this agent fills; ``requires`` the slots a
    board entry must already carry to trigger it.  ``goal_classes`` is the
    agent's own classification knowledge: the goal classes it can serve.
    Most tactics serve everything from their own class upward; a decision
    procedure serves exactly its class.
    """

    id: str
    command: str
    slot_names: tuple[str, ...]
    computes: frozenset[str]
    requires: frozenset[str]
    search: SearchFn
    logic_class: LogicClass
    baseline: float
    goal_classes: frozenset[LogicClass] = frozenset(LogicClass)

    def __post_init__(self):
        if self.computes & self.requires:
            raise ProverError(f"{self.id}: computed and required slots overlap")
        known = set(self.slot_names)
        if not (self.computes <= known and self.requires <= known):
            raise ProverError(f"{self.id}: slots outside the command surface")

    def empty_trigger(self, epoch: int) -> ArgMap:
        return ArgMap.make(self.command, self.slot_names, {}, epoch=epoch)


def trigger_set(spec: AgentSpec, view: BoardView) -> list[ArgMap]:
    """Board entries this agent should process now.

    An entry triggers when it carries everything the agent requires while
    the agent's own outputs are still unassigned.  Agents with no
    requirements run once per epoch from the virtual empty assignment.
    A broadcast goal classification outside the agent's serving range
    silences it entirely.
    """
    cls = view.classification()
    if cls is not None and cls not in spec.goal_classes:
        return []
    processed = view.processed_for(spec.id)
    if not spec.requires:
        if EMPTY_TRIGGER in processed:
            return []
        return [spec.empty_trigger(view.epoch)]
    out = []
    for entry in view.entries:
        if entry.render() in processed:
            continue
        filled = set(entry.filled_names())
        if spec.requires <= filled and not (spec.computes & filled):
            out.append(entry)
    return out


def run_agent(
    spec: AgentSpec,
    trigger: ArgMap,
    focus: Focus,
    proof: PartialProof,
    max_results: int = DEFAULT_MAX_RESULTS,
    cancelled: Callable[[], bool] = lambda: False,
) -> list[ArgMap]:
    """Execute one agent run; every result strictly extends the trigger."""
    ctx = AgentContext(proof, focus, trigger, cancelled)
    results: list[ArgMap] = []
    seen: set[str] = set()
    for values in spec.search(ctx):
        if cancelled():
            raise AgentInterrupted(spec.id)
        if set(values) != spec.computes:
            raise ProverError(
                f"{spec.id} must assign exactly {sorted(spec.computes)}, "
                f"got {sorted(values)}"
            )
        extended = trigger.assign(values, agent=spec.id, epoch=trigger.epoch)
        serial = extended.render()
        if serial in seen:
            continue
        seen.add(serial)
        results.append(extended)
        if len(results) >= max_results:
            break
    if cancelled():
        raise AgentInterrupted(spec.id)
    return results


# ---------------------------------------------------------------------------
# Term matching helpers

def match_instance(body: Term, var: Var, target: Term) -> Optional[Term]:
    """Find t with body[var := t] == target, if one exists."""
    found: list[Term] = []

    def walk(b: Term, g: Term, shadowed: bool) -> bool:
        if isinstance(b, Var) and b == var and not shadowed:
            found.append(g)
            return g.type == var.type
        if b == g:
            return True
        if type(b) is not type(g):
            return False
        if isinstance(b, Quant):
            if b.kind != g.kind or b.var != g.var:
                return False
            return walk(b.body, g.body, shadowed or b.var == var)
        if isinstance(b, Conn) and b.op != g.op:
            return False
        kids_b = children(b)
        kids_g = children(g)
        if not kids_b or len(kids_b) != len(kids_g):
            return False  # distinct leaves cannot match
        return all(walk(cb, cg, shadowed) for (_, cb), (_, cg) in zip(kids_b, kids_g))

    if not walk(body, target, False) or not found:
        return None
    first = found[0]
    if any(f != first for f in found):
        return None
    if subst_var(body, var, first) != target:
        return None
    return first


def _ground_subterms(ctx: AgentContext, wanted_type) -> Iterator[Term]:
    """Ground subterms of the focus, goal first then recent supports."""
    seen: set[Term] = set()
    lines = [ctx.goal(), *ctx.support_lines()]
    for ln in lines:
        for _, sub in iter_subterms(ln.formula):
            if sub.type == wanted_type and sub not in seen and is_ground(sub):
                seen.add(sub)
                yield sub


# ---------------------------------------------------------------------------
# Society definitions

def _eqsubst_find_pair(ctx: AgentContext):
    goal = ctx.goal()
    for supp in ctx.support_lines():
        if diff_single_subterm(goal.formula, supp.formula) is not None:
            yield {"u": LineRef(supp.label), "s": LineRef(goal.label)}


def _eqsubst_find_eq(ctx: AgentContext):
    for supp in ctx.support_lines():
        if isinstance(supp.formula, Eq):
            yield {"eq": LineRef(supp.label)}


def _eqsubst_match_eq(ctx: AgentContext):
    goal = ctx.line("s")
    support = ctx.line("u")
    if goal is None or support is None:
        return
    d = diff_single_subterm(goal.formula, support.formula)
    if d is None:
        return
    gs, us, _ = d
    for supp in ctx.support_lines():
        if isinstance(supp.formula, Eq) and supp.formula in (Eq(gs, us), Eq(us, gs)):
            yield {"eq": LineRef(supp.label)}


def _eqsubst_diff_positions(ctx: AgentContext):
    goal = ctx.line("s")
    support = ctx.line("u")
    if goal is None or support is None:
        return
    d = diff_single_subterm(goal.formula, support.formula)
    if d is not None:
        yield {"pl": PositionsArg(tuple(d[2]))}


def _foralle_find_forall(ctx: AgentContext):
    for supp in ctx.support_lines():
        if isinstance(supp.formula, Quant) and supp.formula.kind == "all":
            yield {"p": LineRef(supp.label)}


def _foralle_propose_goal(ctx: AgentContext):
    yield {"c": LineRef(ctx.goal().label)}


def _foralle_match_goal(ctx: AgentContext):
    prem = ctx.line("p")
    if prem is None or not isinstance(prem.formula, Quant):
        return
    goal = ctx.goal()
    if match_instance(prem.formula.body, prem.formula.var, goal.formula) is not None:
        yield {"c": LineRef(goal.label)}


def _foralle_instantiate(ctx: AgentContext):
    prem = ctx.line("p")
    target = ctx.line("c")
    if prem is None or target is None or not isinstance(prem.formula, Quant):
        return
    f = prem.formula
    for t in _ground_subterms(ctx, f.var.type):
        if subst_var(f.body, f.var, t) == target.formula:
            yield {"t": TermArg(t)}


def _propsolve_propose_goal(ctx: AgentContext):
    goal = ctx.goal()
    if classify_formula(goal.formula) == LogicClass.PROP:
        yield {"conc": LineRef(goal.label)}


def _propsolve_collect_premises(ctx: AgentContext):
    labels = tuple(
        ln.label
        for ln in _chronological_supports(ctx)
        if classify_formula(ln.formula) == LogicClass.PROP
    )
    yield {"prems": LabelsArg(labels)}


def _chronological_supports(ctx: AgentContext) -> list[ProofLine]:
    out = []
    for label in ctx.focus.supports:
        ln = ctx.proof.find(label)
        if ln is not None:
            out.append(ln)
    return out


def _impi_propose_goal(ctx: AgentContext):
    goal = ctx.goal()
    if isinstance(goal.formula, Conn) and goal.formula.op == "=>":
        yield {"c": LineRef(goal.label)}


def _andi_propose_goal(ctx: AgentContext):
    goal = ctx.goal()
    if isinstance(goal.formula, Conn) and goal.formula.op == "&":
        yield {"c": LineRef(goal.label)}


def _andi_find(side: str, slot: str):
    def search(ctx: AgentContext):
        goal = ctx.line("c")
        if goal is None or not isinstance(goal.formula, Conn):
            return
        wanted = getattr(goal.formula, side)
        for supp in ctx.support_lines():
            if supp.formula == wanted:
                yield {slot: LineRef(supp.label)}

    return search


def _ande_find_conj(ctx: AgentContext):
    for supp in ctx.support_lines():
        if isinstance(supp.formula, Conn) and supp.formula.op == "&":
            yield {"p": LineRef(supp.label)}


def _ande_match(side: str, slot: str):
    def search(ctx: AgentContext):
        prem = ctx.line("p")
        if prem is None or not isinstance(prem.formula, Conn):
            return
        goal = ctx.goal()
        if goal.formula == getattr(prem.formula, side):
            yield {slot: LineRef(goal.label)}

    return search


def _equiv2eq_propose_goal(ctx: AgentContext):
    goal = ctx.goal()
    if isinstance(goal.formula, Eq) and goal.formula.lhs.type == OMICRON:
        yield {"c": LineRef(goal.label)}


def _axiom_find_match(ctx: AgentContext):
    goal = ctx.goal()
    for supp in ctx.support_lines():
        if supp.formula == goal.formula:
            yield {"c": LineRef(goal.label), "p": LineRef(supp.label)}


# baselines: full-formula matching is costly, head-symbol scans are cheap,
# completion computations sit in between
_SCAN = 0.5
_COMPLETE = 1.0
_MATCH = 1.5


def build_societies(catalog: Iterable[CommandDescriptor]) -> tuple[AgentSpec, ...]:
    """All argument agents, sorted by identifier."""
    by_name = {c.name: c for c in catalog}
    specs: list[AgentSpec] = []

    def add(cmd: str, name: str, computes, requires, search, baseline,
            goal_classes=None):
        desc = by_name[cmd]
        specs.append(
            AgentSpec(
                id=f"{cmd}/{name}",
                command=cmd,
                slot_names=desc.slot_names,
                computes=frozenset(computes),
                requires=frozenset(requires),
                search=search,
                logic_class=desc.logic_class,
                baseline=baseline,
                goal_classes=goal_classes or _upward(desc.logic_class),
            )
        )

    add("EqSubst", "find-pair", {"u", "s"}, set(), _eqsubst_find_pair, _MATCH)
    add("EqSubst", "find-eq", {"eq"}, set(), _eqsubst_find_eq, _SCAN)
    add("EqSubst", "match-eq", {"eq"}, {"u", "s"}, _eqsubst_match_eq, _COMPLETE)
    add("EqSubst", "diff-positions", {"pl"}, {"u", "s"}, _eqsubst_diff_positions, _COMPLETE)

    add("ForallE", "find-forall", {"p"}, set(), _foralle_find_forall, _SCAN)
    add("ForallE", "propose-goal", {"c"}, set(), _foralle_propose_goal, _SCAN)
    add("ForallE", "match-goal", {"c"}, {"p"}, _foralle_match_goal, _MATCH)
    add("ForallE", "instantiate", {"t"}, {"p", "c"}, _foralle_instantiate, _COMPLETE)

    # the truth-table prover serves exactly propositional goals; staying
    # silent elsewhere keeps it from rating itself into retirement before
    # a propositional subgoal ever appears
    prop_only = frozenset({LogicClass.PROP})
    add("PropSolve", "propose-goal", {"conc"}, set(), _propsolve_propose_goal,
        _SCAN, prop_only)
    add("PropSolve", "collect-premises", {"prems"}, {"conc"},
        _propsolve_collect_premises, _COMPLETE, prop_only)

    add("ImpI", "propose-goal", {"c"}, set(), _impi_propose_goal, _SCAN)

    add("AndI", "propose-goal", {"c"}, set(), _andi_propose_goal, _SCAN)
    add("AndI", "find-left", {"p1"}, {"c"}, _andi_find("left", "p1"), _COMPLETE)
    add("AndI", "find-right", {"p2"}, {"c"}, _andi_find("right", "p2"), _COMPLETE)

    add("AndE", "find-conj", {"p"}, set(), _ande_find_conj, _SCAN)
    add("AndE", "match-left", {"c1"}, {"p"}, _ande_match("left", "c1"), _COMPLETE)
    add("AndE", "match-right", {"c2"}, {"p"}, _ande_match("right", "c2"), _COMPLETE)

    add("Equiv2Eq", "propose-goal", {"c"}, set(), _equiv2eq_propose_goal, _SCAN)

    add("Axiom", "find-match", {"c", "p"}, set(), _axiom_find_match, _MATCH)

    return tuple(sorted(specs, key=lambda s: s.id))
