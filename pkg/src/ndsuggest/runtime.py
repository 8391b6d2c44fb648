"""Execution of the agent societies over the boards.

Two modes share all coordination primitives:

* deterministic: a single-threaded round-robin over the active agents in
  identifier order until no agent produces a new entry, then election.
  Classification is delivered before the first round.  Used by every
  reproducibility test; its fixpoint is independent of agent order
  because agents are pure functions of (trigger, snapshot).

* concurrent: one thread per active agent plus a coordinator playing the
  command-agent layer (election, classification propagation, society
  reports) and a classifier thread.  Agents abandon work when the boards
  move to a new epoch; stale posts are rejected by the boards themselves.

Rating-based activity is pinned per epoch so that mid-epoch penalties
only influence the next command; the classification gate stays dynamic.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

from .agents import (
    EMPTY_TRIGGER,
    AgentInterrupted,
    AgentSpec,
    run_agent,
    trigger_set,
)
from .argmap import ArgMap, best_argmap
from .boards import (
    BoardHub,
    BoardMessage,
    BoardView,
    MessageKind,
    PostResult,
    SuggestionBoard,
    SuggestionEntry,
)
from .classify import LogicClass, classify_goal
from .errors import ProverError
from .proof import Focus, PartialProof
from .resources import AgentRunRecord, ResourceManager, RunOutcome
from .tactics import CommandDescriptor


@dataclass(frozen=True)
class RuntimeConfig:
    mode: str = "deterministic"  # or "concurrent"
    max_results: int = 3
    enabled_agents: Optional[frozenset[str]] = None  # None = all
    clock: Optional[Callable[[], float]] = None  # seconds; None picks per mode
    debounce_ms: float = 50.0
    resource_interval_ms: float = 250.0
    idle_wait_s: float = 0.05
    # agents computing at once; every agent keeps its own thread, but
    # unbounded simultaneous computation would let the background work
    # starve suggestion readers past the anytime latency budget
    max_concurrent_runs: int = 4

    def timer(self) -> Callable[[], float]:
        if self.clock is not None:
            return self.clock
        if self.mode == "deterministic":
            return lambda: 0.0  # keeps replay logs bit-identical
        return time.perf_counter


@dataclass(frozen=True)
class EpochState:
    """Immutable context pinned for one epoch."""

    epoch: int
    proof: PartialProof
    focus: Optional[Focus]
    active: frozenset[str]

    def goal_formula(self):
        if self.focus is None:
            return None
        return self.proof.line(self.focus.goal).formula


def pinned_active_set(
    specs: Iterable[AgentSpec],
    manager: ResourceManager,
    goal_class: LogicClass,
    cfg: RuntimeConfig,
) -> frozenset[str]:
    """Rating/exclusion gate evaluated once per epoch for confluence."""
    out = set()
    for spec in specs:
        if cfg.enabled_agents is not None and spec.id not in cfg.enabled_agents:
            continue
        if manager.active(spec.id, goal_class):
            out.add(spec.id)
    return frozenset(out)


def broadcast_class(cls: LogicClass, hub: BoardHub, epoch: int) -> bool:
    """Post the classification on the command board and copy it down."""
    msg = BoardMessage(MessageKind.CLASSIFICATION, cls, epoch)
    if hub.command_board.post_message(msg) == PostResult.STALE:
        return False
    propagate_classification(hub)
    return True


def propagate_classification(hub: BoardHub) -> None:
    view = hub.command_board.snapshot()
    if view.classification is None:
        return
    msg = BoardMessage(MessageKind.CLASSIFICATION, view.classification, view.epoch)
    for board in hub.boards.values():
        board.post_message(msg)


def post_extension(board: SuggestionBoard, trigger: ArgMap, result: ArgMap) -> PostResult:
    """Post a computed entry, enforcing the strict-extension contract."""
    if result == trigger or not result.extends(trigger):
        raise ProverError(
            f"agent {result.agent} posted {result.render()} which does not "
            f"strictly extend its trigger {trigger.render()}"
        )
    return board.post(result)


def elect(
    view: BoardView,
    proof: PartialProof,
    descriptor: CommandDescriptor,
    excluded_commands: frozenset[str] = frozenset(),
) -> Optional[SuggestionEntry]:
    """Pick the board's best applicable entry for the command board.

    Entries must carry at least one actual argument and pass the tactic's
    applicability pre-check on their assigned slots.  A classification
    below the command's logic class excludes the whole society, as does a
    user exclusion.
    """
    if descriptor.name in excluded_commands:
        return None
    cls = view.classification()
    if cls is not None and descriptor.logic_class > cls:
        return None
    candidates = [
        e
        for e in view.entries
        if e.filled_count() >= 1 and descriptor.applicable(proof, e, partial=True)
    ]
    best = best_argmap(candidates, descriptor.line_slots)
    if best is None:
        return None
    return SuggestionEntry(
        descriptor.name,
        best,
        best.completeness(),
        best.is_complete(),
        descriptor.goal_closing,
        view.epoch,
    )


def sort_suggestions(entries: Iterable[SuggestionEntry]) -> list[SuggestionEntry]:
    """Heuristic presentation order.

    Fully instantiated suggestions first (they may finish the subproof),
    then by completeness, goal-closing commands before others, name as
    the final tie-break.
    """
    return sorted(
        entries,
        key=lambda e: (not e.complete, -e.completeness, not e.goal_closing, e.command),
    )


def run_elections(
    hub: BoardHub,
    proof: PartialProof,
    descriptors: Iterable[CommandDescriptor],
    excluded_commands: frozenset[str] = frozenset(),
) -> None:
    current = {e.command: e for e in hub.command_board.snapshot().entries}
    for desc in descriptors:
        entry = elect(hub.board(desc.name).snapshot(), proof, desc, excluded_commands)
        if entry is None:
            if desc.name in current:
                hub.command_board.withdraw_entry(desc.name)
        elif current.get(desc.name) != entry:
            hub.command_board.update_entry(entry)


def post_reports(hub: BoardHub, manager: ResourceManager) -> None:
    epoch = hub.command_board.epoch
    for report in manager.reports():
        hub.command_board.post_message(
            BoardMessage(MessageKind.RESOURCE_REPORT, report, epoch)
        )


# ---------------------------------------------------------------------------
# Deterministic engine

def _run_one_trigger(
    spec: AgentSpec,
    trigger: ArgMap,
    state: EpochState,
    board: SuggestionBoard,
    manager: ResourceManager,
    cfg: RuntimeConfig,
    cancelled: Callable[[], bool] = lambda: False,
) -> int:
    """Run an agent on one trigger; post results and record the run."""
    clock = cfg.timer()
    start = clock()
    try:
        results = run_agent(
            spec, trigger, state.focus, state.proof, cfg.max_results, cancelled
        )
    except AgentInterrupted:
        elapsed = (clock() - start) * 1000.0
        manager.record(
            AgentRunRecord(spec.id, state.epoch, elapsed, RunOutcome.INTERRUPTED)
        )
        raise
    elapsed = (clock() - start) * 1000.0
    serial = trigger.render() if spec.requires else EMPTY_TRIGGER
    board.mark_processed(spec.id, serial, state.epoch)
    accepted = 0
    for result in results:
        if post_extension(board, trigger, result) == PostResult.ACCEPTED:
            accepted += 1
    outcome = RunOutcome.CONTRIBUTED if accepted else RunOutcome.NO_CONTRIBUTION
    manager.record(AgentRunRecord(spec.id, state.epoch, elapsed, outcome, accepted))
    return accepted


def run_deterministic(
    state: EpochState,
    specs: Iterable[AgentSpec],
    descriptors: Iterable[CommandDescriptor],
    manager: ResourceManager,
    hub: BoardHub,
    cfg: RuntimeConfig,
) -> list[SuggestionEntry]:
    """Drive all societies to their board fixpoint, then elect.

    Returns the sorted suggestion list.  The fixpoint is confluent: the
    set of entries per board does not depend on the registration order of
    the agents.
    """
    descriptors = list(descriptors)
    if state.focus is not None:
        cls = classify_goal(state.goal_formula())
        broadcast_class(cls, hub, state.epoch)
        ordered = sorted(
            (s for s in specs if s.id in state.active), key=lambda s: s.id
        )
        progress = True
        while progress:
            progress = False
            for spec in ordered:
                board = hub.board(spec.command)
                for trigger in trigger_set(spec, board.snapshot()):
                    if _run_one_trigger(spec, trigger, state, board, manager, cfg):
                        progress = True
    excluded = manager.cfg.excluded_commands
    run_elections(hub, state.proof, descriptors, excluded)
    post_reports(hub, manager)
    return sort_suggestions(hub.command_board.snapshot().entries)


# ---------------------------------------------------------------------------
# Concurrent engine

# Suggestion reads must answer within a few milliseconds even while a
# dozen agent threads are compute-bound.  The default 5 ms interpreter
# switch interval lets one busy thread starve a reader for several
# slices, so engines tighten it while any of them is running.
_switch_lock = threading.Lock()
_engines_running = 0
_saved_interval: Optional[float] = None


def _tighten_thread_switching() -> None:
    global _engines_running, _saved_interval
    import sys

    with _switch_lock:
        if _engines_running == 0:
            _saved_interval = sys.getswitchinterval()
            sys.setswitchinterval(min(_saved_interval, 0.001))
        _engines_running += 1


def _restore_thread_switching() -> None:
    global _engines_running, _saved_interval
    import sys

    with _switch_lock:
        _engines_running -= 1
        if _engines_running == 0 and _saved_interval is not None:
            sys.setswitchinterval(_saved_interval)
            _saved_interval = None


class ConcurrentEngine:
    """Free-running agent threads coordinated only through the boards."""

    def __init__(
        self,
        specs: Iterable[AgentSpec],
        descriptors: Iterable[CommandDescriptor],
        manager: ResourceManager,
        hub: BoardHub,
        cfg: RuntimeConfig,
        on_suggestions: Optional[Callable[[list[SuggestionEntry]], None]] = None,
        on_classification: Optional[Callable[[LogicClass], None]] = None,
        on_reports: Optional[Callable[[], None]] = None,
    ):
        self.specs = {s.id: s for s in specs}
        self.descriptors = list(descriptors)
        self.manager = manager
        self.hub = hub
        self.cfg = cfg
        self.on_suggestions = on_suggestions
        self.on_classification = on_classification
        self.on_reports = on_reports
        self._state: Optional[EpochState] = None
        self._state_lock = threading.Lock()
        self._stop = threading.Event()
        self._run_gate = threading.BoundedSemaphore(max(1, cfg.max_concurrent_runs))
        self._busy: dict[str, bool] = {s: False for s in self.specs}
        self._busy_lock = threading.Lock()
        self._threads: list[threading.Thread] = []
        self._classified_epoch = 0
        self._elected_version = -1
        self._published: tuple[SuggestionEntry, ...] = ()

    # -- state handover --------------------------------------------------------

    @property
    def state(self) -> Optional[EpochState]:
        with self._state_lock:
            return self._state

    def set_state(self, state: EpochState) -> None:
        with self._state_lock:
            self._state = state
        self.hub.poke()

    def published_suggestions(self) -> tuple[SuggestionEntry, ...]:
        # plain attribute read: suggestion readers never block on agents
        return self._published

    # -- lifecycle ---------------------------------------------------------------

    def start(self) -> None:
        _tighten_thread_switching()
        for spec_id in sorted(self.specs):
            t = threading.Thread(
                target=self._agent_loop, args=(self.specs[spec_id],),
                name=f"agent:{spec_id}", daemon=True,
            )
            self._threads.append(t)
        self._threads.append(
            threading.Thread(target=self._classifier_loop, name="classifier", daemon=True)
        )
        self._threads.append(
            threading.Thread(target=self._coordinator_loop, name="coordinator", daemon=True)
        )
        for t in self._threads:
            t.start()

    def stop(self) -> None:
        if self._stop.is_set():
            return
        self._stop.set()
        with self.hub._cond:
            self.hub._cond.notify_all()
        for t in self._threads:
            t.join(timeout=2.0)
        _restore_thread_switching()

    # -- quiescence ----------------------------------------------------------------

    def _any_busy(self) -> bool:
        with self._busy_lock:
            return any(self._busy.values())

    def _has_pending_triggers(self) -> bool:
        state = self.state
        if state is None or state.focus is None:
            return False
        for spec_id in state.active:
            spec = self.specs[spec_id]
            view = self.hub.board(spec.command).snapshot()
            if view.epoch == state.epoch and trigger_set(spec, view):
                return True
        return False

    def quiesce(self, timeout: float = 10.0) -> bool:
        """Wait until agents are idle, elections are current and boards stable."""
        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            state = self.state
            classified = state is None or state.focus is None or \
                self._classified_epoch >= state.epoch
            v = self.hub.version
            settled = (
                classified
                and not self._any_busy()
                and (state is None or self._elected_version >= v)
                and not self._has_pending_triggers()
            )
            if settled:
                time.sleep(0.005)
                if self.hub.version == v and not self._any_busy():
                    return True
            time.sleep(0.002)
        return False

    # -- threads ---------------------------------------------------------------------

    def _agent_loop(self, spec: AgentSpec) -> None:
        seen_version = -1
        while not self._stop.is_set():
            state = self.state
            if state is None or state.focus is None or spec.id not in state.active:
                seen_version = self.hub.wait_change(self.hub.version, self.cfg.idle_wait_s)
                continue
            board = self.hub.board(spec.command)
            view = board.snapshot()
            if view.epoch != state.epoch:
                seen_version = self.hub.wait_change(self.hub.version, self.cfg.idle_wait_s)
                continue
            triggers = trigger_set(spec, view)
            if not triggers:
                seen_version = self.hub.wait_change(self.hub.version, self.cfg.idle_wait_s)
                continue
            with self._busy_lock:
                self._busy[spec.id] = True
            try:
                for trigger in triggers:
                    if self._stop.is_set():
                        break
                    cancelled = lambda: (
                        self._stop.is_set() or board.epoch != state.epoch
                    )
                    try:
                        with self._run_gate:
                            _run_one_trigger(
                                spec, trigger, state, board, self.manager, self.cfg,
                                cancelled,
                            )
                    except AgentInterrupted:
                        break  # boards moved on; the run was recorded as interrupted
            finally:
                with self._busy_lock:
                    self._busy[spec.id] = False

    def _classifier_loop(self) -> None:
        while not self._stop.is_set():
            state = self.state
            if state is None or state.focus is None or \
                    self._classified_epoch >= state.epoch:
                self.hub.wait_change(self.hub.version, self.cfg.idle_wait_s)
                continue
            cls = classify_goal(state.goal_formula())
            if broadcast_class(cls, self.hub, state.epoch):
                self._classified_epoch = state.epoch
                if self.on_classification is not None:
                    self.on_classification(cls)

    def _coordinator_loop(self) -> None:
        last_version = -1
        last_report = time.monotonic()
        last_publish = 0.0
        while not self._stop.is_set():
            version = self.hub.wait_change(last_version, self.cfg.idle_wait_s)
            state = self.state
            now = time.monotonic()
            if state is not None:
                if version != last_version:
                    last_version = version
                    propagate_classification(self.hub)
                    run_elections(
                        self.hub, state.proof, self.descriptors,
                        self.manager.cfg.excluded_commands,
                    )
                    self._elected_version = version
                entries = tuple(sort_suggestions(self.hub.command_board.snapshot().entries))
                if entries != self._published and \
                        (now - last_publish) * 1000.0 >= self.cfg.debounce_ms:
                    self._published = entries
                    last_publish = now
                    if self.on_suggestions is not None:
                        self.on_suggestions(list(entries))
            if (now - last_report) * 1000.0 >= self.cfg.resource_interval_ms:
                last_report = now
                goal_class = LogicClass.HO
                view = self.hub.command_board.snapshot()
                if view.classification is not None:
                    goal_class = view.classification
                self.manager.step(goal_class)
                post_reports(self.hub, self.manager)
                if self.on_reports is not None:
                    self.on_reports()
