"""Session lifecycle: the programmatic surface for the CLI, server and UI.

A session owns one partial proof, the boards, the agent societies and the
resource state.  Executing a command advances the epoch, reinitializes
every board and restarts the societies against the new proof snapshot.
Suggestion reads never block on running agents.
"""

from __future__ import annotations

import queue
import threading
from dataclasses import dataclass
from typing import Optional, Union

from .agents import AgentSpec, build_societies
from .argmap import ArgMap
from .boards import BoardHub, SuggestionEntry
from .classify import LogicClass, classify_goal
from .errors import FocusError, ParseError, TacticError
from .parser import Parser
from .proof import Focus, PartialProof, current_focus
from .resources import ResourceConfig, ResourceManager
from .runtime import (
    ConcurrentEngine,
    EpochState,
    RuntimeConfig,
    pinned_active_set,
    run_deterministic,
    sort_suggestions,
)
from .tactics import CommandDescriptor, catalog, catalog_by_name
from .terms import OMICRON, Term

DETERMINISTIC = "deterministic"
CONCURRENT = "concurrent"


@dataclass(frozen=True)
class SessionConfig:
    mode: str = DETERMINISTIC
    threshold: float = 3.0
    window: int = 10
    penalty: float = 1.0
    min_active: int = 4
    second_chance: float = 0.5
    excluded_commands: frozenset[str] = frozenset()
    enabled_agents: Optional[frozenset[str]] = None  # None = all agents
    max_results: int = 3
    prover_label: str = "PropSolve"
    atom_limit: int = 16
    debounce_ms: float = 50.0
    resource_interval_ms: float = 250.0

    def resource_config(self) -> ResourceConfig:
        return ResourceConfig(
            threshold=self.threshold,
            window=self.window,
            penalty=self.penalty,
            min_active=self.min_active,
            second_chance=self.second_chance,
            excluded_commands=self.excluded_commands,
        )

    def runtime_config(self) -> RuntimeConfig:
        return RuntimeConfig(
            mode=self.mode,
            max_results=self.max_results,
            enabled_agents=self.enabled_agents,
            debounce_ms=self.debounce_ms,
            resource_interval_ms=self.resource_interval_ms,
        )


@dataclass(frozen=True)
class SessionEvent:
    seq: int
    kind: str  # proof-updated | suggestions-updated | resource-report
    #          # | classification | proof-complete
    epoch: int
    payload: dict


def suggestion_payload(entry: SuggestionEntry, descriptor: CommandDescriptor) -> dict:
    slots = []
    for spec in descriptor.slots:
        value = entry.argmap.get(spec.name)
        from .argmap import render_actual

        slots.append(
            {
                "name": spec.name,
                "kind": spec.kind.value,
                "value": None if value is None else render_actual(value),
                "mandatory": spec.mandatory,
            }
        )
    return {
        "command": entry.command,
        "args": entry.argmap.render(),
        "completeness": entry.completeness,
        "complete": entry.complete,
        "goal_closing": entry.goal_closing,
        "slots": slots,
    }


class Session:
    """One interactive proving session."""

    def __init__(
        self,
        proof: PartialProof,
        config: SessionConfig | None = None,
        parser: Parser | None = None,
    ):
        self.config = config or SessionConfig()
        if self.config.mode not in (DETERMINISTIC, CONCURRENT):
            raise ParseError(f"unknown mode {self.config.mode!r}")
        self.parser = parser or Parser()
        self.catalog: tuple[CommandDescriptor, ...] = catalog(
            self.config.prover_label, self.config.atom_limit
        )
        self.commands = catalog_by_name(self.catalog)
        self.specs: tuple[AgentSpec, ...] = build_societies(self.catalog)
        self.manager = ResourceManager(self.config.resource_config())
        for spec in self.specs:
            self.manager.register(spec.id, spec.command, spec.baseline, spec.logic_class)
        self.hub = BoardHub([c.name for c in self.catalog], epoch=1)
        self.epoch = 1
        self.proof = proof
        self.selection: Optional[str] = None
        self._events: list[SessionEvent] = []
        self._event_cond = threading.Condition()
        self._subscribers: list[queue.Queue] = []
        self._lock = threading.RLock()
        self._runtime_cfg = self.config.runtime_config()
        self._engine: Optional[ConcurrentEngine] = None
        if self.config.mode == CONCURRENT:
            self._engine = ConcurrentEngine(
                self.specs,
                self.catalog,
                self.manager,
                self.hub,
                self._runtime_cfg,
                on_suggestions=self._on_suggestions,
                on_classification=self._on_classification,
                on_reports=self._on_reports,
            )
        self._start_epoch(initial=True)
        if self._engine is not None:
            self._engine.start()

    # -- constructors -----------------------------------------------------------

    @staticmethod
    def start(
        conjecture: Union[str, Term],
        config: SessionConfig | None = None,
        parser: Parser | None = None,
    ) -> "Session":
        parser = parser or Parser()
        if isinstance(conjecture, str):
            term = parser.parse(conjecture)
        else:
            term = conjecture
        if term.type != OMICRON:
            raise ParseError("the conjecture must be a formula")
        return Session(PartialProof.initial(term), config, parser)

    # -- events -------------------------------------------------------------------

    def _emit(self, kind: str, payload: dict) -> SessionEvent:
        with self._event_cond:
            event = SessionEvent(len(self._events), kind, self.epoch, payload)
            self._events.append(event)
            for q in self._subscribers:
                q.put(event)
            self._event_cond.notify_all()
        return event

    def events(self) -> list[SessionEvent]:
        with self._event_cond:
            return list(self._events)

    def subscribe(self) -> queue.Queue:
        q: queue.Queue = queue.Queue()
        with self._event_cond:
            for ev in self._events:
                q.put(ev)
            self._subscribers.append(q)
        return q

    def unsubscribe(self, q: queue.Queue) -> None:
        with self._event_cond:
            if q in self._subscribers:
                self._subscribers.remove(q)

    # -- engine callbacks (concurrent mode) ------------------------------------------

    def _on_suggestions(self, entries: list[SuggestionEntry]) -> None:
        self._emit(
            "suggestions-updated",
            {"suggestions": [self._entry_payload(e) for e in entries]},
        )

    def _on_classification(self, cls: LogicClass) -> None:
        self._emit("classification", {"class": str(cls)})

    def _on_reports(self) -> None:
        self._emit("resource-report", self.resource_payload())

    # -- payload helpers ---------------------------------------------------------------

    def _entry_payload(self, entry: SuggestionEntry) -> dict:
        return suggestion_payload(entry, self.commands[entry.command])

    def proof_payload(self, executed: Optional[str] = None) -> dict:
        payload = {
            "lines": [ln.render() for ln in self.proof.lines],
            "complete": self.proof.is_complete(),
        }
        if executed is not None:
            payload["executed"] = executed
        return payload

    def resource_payload(self) -> dict:
        states = self.manager.states()
        return {
            "threshold": self.manager.cfg.threshold,
            "reports": [
                {
                    "command": r.command,
                    "average": round(r.average_rating, 6),
                    "active": r.active,
                    "retired": r.retired,
                }
                for r in self.manager.reports()
            ],
            "agents": [
                {
                    "agent": a,
                    "rating": round(states[a].rating, 6),
                    "failures": states[a].failures,
                    "retired": states[a].retired,
                    "excluded": states[a].excluded,
                }
                for a in sorted(states)
            ],
        }

    # -- epoch machinery ------------------------------------------------------------------

    def _current_focus(self) -> Optional[Focus]:
        if self.selection is not None:
            line = self.proof.find(self.selection)
            if line is None or not line.is_open:
                self.selection = None
        return current_focus(self.proof, self.selection)

    def _start_epoch(self, initial: bool = False, executed: Optional[str] = None) -> None:
        focus = self._current_focus()
        cls = classify_goal(self.proof.line(focus.goal).formula) if focus else None
        # resource policy runs on every epoch boundary
        directives = self.manager.step(cls if cls is not None else LogicClass.HO)
        pin_class = cls if (self.config.mode == DETERMINISTIC and cls is not None) \
            else LogicClass.HO
        state = EpochState(
            epoch=self.epoch,
            proof=self.proof,
            focus=focus,
            active=pinned_active_set(self.specs, self.manager, pin_class, self._runtime_cfg),
        )
        self._state = state
        self._emit("proof-updated", self.proof_payload(executed))
        if self.proof.is_complete():
            self._emit("proof-complete", {"lines": len(self.proof.lines)})
        if self._engine is not None:
            self._engine.set_state(state)
            return
        entries = run_deterministic(
            state, self.specs, self.catalog, self.manager, self.hub, self._runtime_cfg
        )
        if cls is not None:
            self._emit("classification", {"class": str(cls)})
        self._emit(
            "suggestions-updated",
            {"suggestions": [self._entry_payload(e) for e in entries]},
        )
        self._emit("resource-report", self.resource_payload())

    # -- public operations ---------------------------------------------------------------------

    def execute(self, command: str, args: Union[str, ArgMap]) -> SessionEvent:
        """Apply a command and start the next epoch.

        Applicability failures raise without advancing the epoch.
        """
        with self._lock:
            desc = self.commands.get(command)
            if desc is None:
                raise TacticError(f"unknown command {command}")
            if isinstance(args, str):
                args = ArgMap.parse(args, desc.slots, desc.name, self.parser)
            desc.check(self.proof, args, False)
            self.proof = desc.outline.apply(self.proof, args)
            self.epoch += 1
            self.hub.reinitialize_all(self.epoch)
            self._start_epoch(executed=args.render())
            return next(
                ev for ev in reversed(self.events()) if ev.kind == "proof-updated"
            )

    def execute_entry(self, entry: SuggestionEntry) -> SessionEvent:
        return self.execute(entry.command, entry.argmap)

    def set_focus(self, label: str) -> None:
        """Switch the focused subgoal; restarts the societies."""
        with self._lock:
            line = self.proof.find(label)
            if line is None or not line.is_open:
                raise FocusError(f"{label} is not an open line")
            self.selection = label
            self.epoch += 1
            self.hub.reinitialize_all(self.epoch)
            self._start_epoch()

    def suggestions(self) -> list[SuggestionEntry]:
        """Current suggestion list; never blocks on running agents."""
        return sort_suggestions(self.hub.command_board.snapshot().entries)

    def suggestion_payloads(self) -> list[dict]:
        return [self._entry_payload(e) for e in self.suggestions()]

    def classification(self) -> Optional[LogicClass]:
        return self.hub.command_board.snapshot().classification

    def focus(self) -> Optional[Focus]:
        return self._current_focus()

    def resources_csv(self) -> str:
        return self.manager.csv_dump()

    def board_dump(self, command: str) -> str:
        return self.hub.board(command).dump()

    def set_config(self, config: SessionConfig) -> None:
        """Adopt the adjustable resource settings of ``config`` live.

        Mode and prover label are fixed per session; rating gates and
        command exclusions take effect immediately.
        """
        import dataclasses

        with self._lock:
            self.config = dataclasses.replace(
                config, mode=self.config.mode, prover_label=self.config.prover_label
            )
            self.manager.set_config(self.config.resource_config())
            self._emit("resource-report", self.resource_payload())

    def quiesce(self, timeout: float = 10.0) -> bool:
        """Wait for the societies to settle (concurrent mode only)."""
        if self._engine is None:
            return True
        return self._engine.quiesce(timeout)

    def close(self) -> None:
        if self._engine is not None:
            self._engine.stop()
            self._engine = None

    def __enter__(self) -> "Session":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
