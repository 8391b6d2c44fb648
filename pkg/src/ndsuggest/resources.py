"""Complexity ratings and resource-adaptive agent scheduling.

Each agent carries a rating combining a static baseline, the average of
its recent run times, and a penalty for every consecutive run that
contributed nothing (or was cut short by the user's next command).  An
agent whose rating exceeds the global threshold retires.  A global policy
pass reactivates retired agents when too few remain active, gives
hopeless societies a second chance, and excludes whole societies whose
logic class cannot help with the current goal.
"""

from __future__ import annotations

import enum
import math
import threading
from dataclasses import dataclass, replace
from typing import Optional

from .classify import LogicClass


class RunOutcome(enum.Enum):
    CONTRIBUTED = "contributed"
    NO_CONTRIBUTION = "no-contribution"
    INTERRUPTED = "interrupted-by-reinit"


@dataclass(frozen=True)
class AgentRunRecord:
    agent: str
    epoch: int
    elapsed_ms: float
    outcome: RunOutcome
    contributed: int = 0

    def __post_init__(self):
        if self.elapsed_ms < 0:
            raise ValueError("elapsed time must be non-negative")
        if self.outcome == RunOutcome.CONTRIBUTED and self.contributed < 1:
            raise ValueError("a contributing run must report at least one entry")


@dataclass(frozen=True)
class ResourceConfig:
    threshold: float = 3.0  # global complexity value; higher ratings retire
    window: int = 10
    penalty: float = 1.0
    min_active: int = 4
    second_chance: float = 0.5  # retired fraction that triggers a society reset
    excluded_commands: frozenset[str] = frozenset()

    def __post_init__(self):
        if self.threshold <= 0 or self.window < 1 or self.penalty <= 0:
            raise ValueError("threshold, window and penalty must be positive")
        if self.min_active < 1:
            raise ValueError("min_active must be at least 1")


@dataclass(frozen=True)
class RatingState:
    agent: str
    baseline: float
    window: tuple[float, ...] = ()
    failures: int = 0
    rating: float = 0.0
    retired: bool = False
    override: bool = False  # rating pinned by a directive until a contribution
    excluded: bool = False  # society-level exclusion directive

    @staticmethod
    def fresh(agent: str, baseline: float) -> "RatingState":
        return RatingState(agent, baseline, rating=baseline)

    def time_component(self) -> float:
        avg = sum(self.window) / len(self.window) if self.window else 0.0
        return self.baseline + math.log10(1.0 + avg)


def record_run(state: RatingState, record: AgentRunRecord, cfg: ResourceConfig) -> RatingState:
    """Fold one run record into the agent's rating.

    Non-contribution and interruption both count as failures; a
    contribution resets the failure count and releases any directive
    override.  Retirement is re-evaluated after every update.
    """
    if record.agent != state.agent:
        raise ValueError(f"record for {record.agent} applied to {state.agent}")
    window = (state.window + (record.elapsed_ms,))[-cfg.window:]
    contributed = record.outcome == RunOutcome.CONTRIBUTED
    failures = 0 if contributed else state.failures + 1
    out = replace(state, window=window, failures=failures)
    if contributed:
        out = replace(out, override=False, excluded=False)
    if out.override:
        rating = state.rating  # directives take precedence until a contribution
    else:
        rating = out.time_component() + cfg.penalty * failures
    return replace(out, rating=rating, retired=rating > cfg.threshold)


def is_active(
    state: RatingState,
    cfg: ResourceConfig,
    goal_class: LogicClass,
    agent_class: LogicClass,
    command: str,
) -> bool:
    """Whether the agent may run against the current goal."""
    return (
        not state.retired
        and not state.excluded
        and state.rating <= cfg.threshold
        and agent_class <= goal_class
        and command not in cfg.excluded_commands
    )


@dataclass(frozen=True)
class SocietyReport:
    command: str
    average_rating: float
    active: int
    retired: int

    def render(self) -> str:
        return (
            f"{self.command} avg={self.average_rating:.3f} "
            f"active={self.active} retired={self.retired}"
        )


class DirectiveKind(enum.Enum):
    REACTIVATE = "reactivate"
    EXCLUDE = "exclude"


@dataclass(frozen=True)
class Directive:
    kind: DirectiveKind
    agent: str
    rating: Optional[float] = None

    def render(self) -> str:
        if self.kind == DirectiveKind.REACTIVATE:
            return f"reactivate {self.agent} rating={self.rating:.3f}"
        return f"exclude {self.agent}"


def build_reports(
    states: dict[str, RatingState], membership: dict[str, str]
) -> list[SocietyReport]:
    """Per-society resource summaries (average of member ratings)."""
    by_cmd: dict[str, list[RatingState]] = {}
    for agent, st in states.items():
        by_cmd.setdefault(membership[agent], []).append(st)
    out = []
    for cmd in sorted(by_cmd):
        members = by_cmd[cmd]
        avg = sum(m.rating for m in members) / len(members)
        retired = sum(1 for m in members if m.retired)
        active = sum(1 for m in members if not m.retired and not m.excluded)
        out.append(SocietyReport(cmd, avg, active, retired))
    return out


def resource_step(
    reports: list[SocietyReport],
    states: dict[str, RatingState],
    cfg: ResourceConfig,
    membership: dict[str, str],
    society_classes: dict[str, LogicClass],
    goal_class: LogicClass,
) -> list[Directive]:
    """Global adjustment pass; returns directives in priority order.

    (a) restore the minimum number of active agents by reactivating the
    lowest-rated retired ones; (b) reset societies that rated themselves
    out of the game; (c) exclude societies above the goal's logic class.
    """
    directives: list[Directive] = []
    reactivated: set[str] = set()
    new_rating = cfg.threshold - cfg.penalty

    def active_count() -> int:
        return sum(
            1
            for a, st in states.items()
            if (not st.retired or a in reactivated) and not st.excluded
        )

    def eligible(agent: str) -> bool:
        # reactivating a class-excluded agent cannot make it active
        st = states[agent]
        return not st.excluded and society_classes[membership[agent]] <= goal_class

    # (a) keep a minimum number of agents active
    floor = min(cfg.min_active, len(states))
    candidates = sorted(
        ((st.rating, a) for a, st in states.items() if st.retired and eligible(a)),
        key=lambda pair: (pair[0], pair[1]),
    )
    for _, agent in candidates:
        if active_count() >= floor:
            break
        directives.append(Directive(DirectiveKind.REACTIVATE, agent, new_rating))
        reactivated.add(agent)

    # (b) second chance for societies with very high average ratings
    for report in reports:
        if society_classes.get(report.command, goal_class) > goal_class:
            continue
        members = [a for a, cmd in membership.items() if cmd == report.command]
        if not members:
            continue
        retired = [a for a in members if states[a].retired and a not in reactivated]
        fraction = sum(1 for a in members if states[a].retired) / len(members)
        if report.average_rating > cfg.threshold and fraction >= cfg.second_chance:
            for agent in sorted(retired):
                directives.append(Directive(DirectiveKind.REACTIVATE, agent, new_rating))
                reactivated.add(agent)

    # (c) exclude societies whose logic class exceeds the current goal
    for cmd in sorted(society_classes):
        if society_classes[cmd] <= goal_class:
            continue
        members = sorted(a for a, c in membership.items() if c == cmd)
        if members and all(states[a].excluded for a in members):
            continue  # already done; keeps the step idempotent
        for agent in members:
            if not states[agent].excluded:
                directives.append(Directive(DirectiveKind.EXCLUDE, agent))

    return directives


def apply_directive(state: RatingState, d: Directive, cfg: ResourceConfig) -> RatingState:
    if d.kind == DirectiveKind.REACTIVATE:
        return replace(
            state,
            rating=d.rating if d.rating is not None else cfg.threshold - cfg.penalty,
            retired=False,
            failures=0,  # reactivation wipes the failure history
            override=True,
        )
    return replace(state, excluded=True)


class ResourceManager:
    """Serialized owner of all rating state.

    Agents submit run records through :meth:`record`; readers may observe
    slightly stale ratings, which is acceptable under the anytime
    contract.
    """

    def __init__(self, cfg: ResourceConfig):
        self.cfg = cfg
        self._states: dict[str, RatingState] = {}
        self._membership: dict[str, str] = {}
        self._classes: dict[str, LogicClass] = {}
        self._lock = threading.Lock()

    def register(self, agent: str, command: str, baseline: float,
                 command_class: LogicClass) -> None:
        with self._lock:
            self._states[agent] = RatingState.fresh(agent, baseline)
            self._membership[agent] = command
            self._classes[command] = command_class

    def set_config(self, cfg: ResourceConfig) -> None:
        """Adopt a new global complexity value and re-evaluate retirement."""
        with self._lock:
            self.cfg = cfg
            for agent, st in self._states.items():
                self._states[agent] = replace(st, retired=st.rating > cfg.threshold)

    def record(self, rec: AgentRunRecord) -> RatingState:
        with self._lock:
            st = record_run(self._states[rec.agent], rec, self.cfg)
            self._states[rec.agent] = st
            return st

    def state(self, agent: str) -> RatingState:
        with self._lock:
            return self._states[agent]

    def states(self) -> dict[str, RatingState]:
        with self._lock:
            return dict(self._states)

    def active(self, agent: str, goal_class: LogicClass) -> bool:
        with self._lock:
            st = self._states[agent]
            cmd = self._membership[agent]
            return is_active(st, self.cfg, goal_class, self._classes[cmd], cmd)

    def reports(self) -> list[SocietyReport]:
        with self._lock:
            return build_reports(self._states, self._membership)

    def clear_stale_exclusions(self, goal_class: LogicClass) -> None:
        """Lift society exclusions that no longer apply to the goal class."""
        with self._lock:
            for agent, st in self._states.items():
                cmd = self._membership[agent]
                if st.excluded and self._classes[cmd] <= goal_class:
                    self._states[agent] = replace(st, excluded=False)

    def step(self, goal_class: LogicClass) -> list[Directive]:
        """Run the global policy pass and apply its directives."""
        self.clear_stale_exclusions(goal_class)
        with self._lock:
            reports = build_reports(self._states, self._membership)
            directives = resource_step(
                reports,
                dict(self._states),
                self.cfg,
                self._membership,
                self._classes,
                goal_class,
            )
            for d in directives:
                self._states[d.agent] = apply_directive(self._states[d.agent], d, self.cfg)
        return directives

    def csv_dump(self) -> str:
        with self._lock:
            lines = ["agent,rating,failures,retired"]
            for agent in sorted(self._states):
                st = self._states[agent]
                lines.append(
                    f"{agent},{st.rating:.3f},{st.failures},{str(st.retired).lower()}"
                )
            return "\n".join(lines)
