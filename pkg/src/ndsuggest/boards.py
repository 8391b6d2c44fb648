"""Suggestion boards, the command board, and epoch bookkeeping.

Boards are the only shared mutable state in the system.  Every user
command execution advances the global epoch and reinitializes all boards;
entries posted against an older epoch are rejected with a stale marker,
which is also how running agents learn that their work is obsolete.

Within an epoch a suggestion board is append-only and duplicate-free, so
agents can extend each other's assignments without conflicts: an agent
never mutates an entry, it posts a more complete copy.
"""

from __future__ import annotations

import enum
import threading
from dataclasses import dataclass
from typing import Any, Iterable, Optional

from .argmap import ArgMap
from .classify import LogicClass
from .errors import ProverError


class PostResult(enum.Enum):
    ACCEPTED = "accepted"
    DUPLICATE = "duplicate"
    STALE = "stale"

    def __bool__(self) -> bool:
        return self is PostResult.ACCEPTED


class MessageKind(enum.Enum):
    CLASSIFICATION = "classification"
    RESOURCE_REPORT = "resource-report"
    RESOURCE_DIRECTIVE = "resource-directive"


@dataclass(frozen=True)
class BoardMessage:
    kind: MessageKind
    payload: Any
    epoch: int

    def render(self) -> str:
        if self.kind == MessageKind.CLASSIFICATION:
            return f"#class {self.payload} epoch={self.epoch}"
        return f"#{self.kind.value} {self.payload} epoch={self.epoch}"


@dataclass(frozen=True)
class BoardView:
    """Immutable point-in-time view of one suggestion board."""

    command: str
    epoch: int
    entries: tuple[ArgMap, ...]
    messages: tuple[BoardMessage, ...]
    version: int
    processed: tuple[tuple[str, frozenset[str]], ...] = ()

    def classification(self) -> Optional[LogicClass]:
        for msg in reversed(self.messages):
            if msg.kind == MessageKind.CLASSIFICATION and msg.epoch == self.epoch:
                return msg.payload
        return None

    def processed_for(self, agent_id: str) -> frozenset[str]:
        for aid, serials in self.processed:
            if aid == agent_id:
                return serials
        return frozenset()


class SuggestionBoard:
    """Append-only store of argument assignments for one command.

    Writers serialize on a mutex and publish a fresh immutable view after
    every mutation; readers take the current view with a bare attribute
    read, so they never block writers (or each other).
    """

    def __init__(self, command: str, epoch: int = 1, on_change=None):
        self.command = command
        self._epoch = epoch
        self._entries: list[ArgMap] = []
        self._serials: set[str] = set()
        self._messages: list[BoardMessage] = []
        self._processed: dict[str, set[str]] = {}
        self._version = 0
        self._lock = threading.Lock()
        self._on_change = on_change
        self._view = BoardView(command, epoch, (), (), 0, ())

    def _bump(self):
        self._version += 1
        self._view = BoardView(
            self.command,
            self._epoch,
            tuple(self._entries),
            tuple(self._messages),
            self._version,
            tuple((a, frozenset(s)) for a, s in self._processed.items()),
        )
        if self._on_change is not None:
            self._on_change()

    @property
    def epoch(self) -> int:
        return self._view.epoch

    def post(self, entry: ArgMap) -> PostResult:
        """Append ``entry`` unless stale or already present."""
        with self._lock:
            if entry.epoch != self._epoch:
                return PostResult.STALE
            serial = entry.render()
            if serial in self._serials:
                return PostResult.DUPLICATE
            self._serials.add(serial)
            self._entries.append(entry)
            self._bump()
            return PostResult.ACCEPTED

    def post_message(self, msg: BoardMessage) -> PostResult:
        with self._lock:
            if msg.epoch != self._epoch:
                return PostResult.STALE
            if msg in self._messages:
                return PostResult.DUPLICATE
            self._messages.append(msg)
            self._bump()
            return PostResult.ACCEPTED

    def snapshot(self) -> BoardView:
        return self._view

    def reinitialize(self, new_epoch: int) -> None:
        with self._lock:
            if new_epoch <= self._epoch:
                raise ProverError(
                    f"epoch must advance: {new_epoch} <= {self._epoch}"
                )
            self._epoch = new_epoch
            self._entries.clear()
            self._serials.clear()
            self._messages.clear()
            self._processed.clear()
            self._bump()

    # -- processed marks (which agent consumed which entry) --------------------

    def processed(self, agent_id: str) -> frozenset[str]:
        return self._view.processed_for(agent_id)

    def mark_processed(self, agent_id: str, serial: str, epoch: int) -> None:
        with self._lock:
            if epoch != self._epoch:
                return  # stale mark from an interrupted run
            self._processed.setdefault(agent_id, set()).add(serial)
            self._bump()

    def dump(self) -> str:
        view = self.snapshot()
        lines = [f"#board {view.command} epoch={view.epoch}"]
        lines.extend(m.render() for m in view.messages)
        lines.extend(e.render() for e in view.entries)
        return "\n".join(lines)


@dataclass(frozen=True)
class SuggestionEntry:
    """One elected suggestion: a command with its best argument assignment."""

    command: str
    argmap: ArgMap
    completeness: float
    complete: bool
    goal_closing: bool
    epoch: int

    def __post_init__(self):
        if not 0.0 <= self.completeness <= 1.0:
            raise ProverError(f"completeness {self.completeness} out of range")

    def render(self) -> str:
        marker = "!" if self.complete else ""
        return f"{self.argmap.render()} {self.argmap.filled_count()}/{len(self.argmap.entries)}{marker}"


@dataclass(frozen=True)
class CommandBoardView:
    epoch: int
    entries: tuple[SuggestionEntry, ...]
    classification: Optional[LogicClass]
    reports: tuple[BoardMessage, ...]
    version: int


class CommandBoard:
    """Stores the current best suggestion per command plus status messages.

    Resource reports survive reinitialization (ratings are long-lived
    state); classification entries do not (each subgoal is re-classified).
    Superseded suggestions are kept in a history log for inspection.
    """

    def __init__(self, epoch: int = 1, on_change=None):
        self._epoch = epoch
        self._entries: dict[str, SuggestionEntry] = {}
        self._classification: Optional[BoardMessage] = None
        self._reports: dict[str, BoardMessage] = {}  # latest report per society
        self._history: list[SuggestionEntry] = []
        self._version = 0
        self._lock = threading.Lock()
        self._on_change = on_change
        self._view = CommandBoardView(epoch, (), None, (), 0)

    def _bump(self):
        self._version += 1
        cls = self._classification.payload if self._classification else None
        self._view = CommandBoardView(
            self._epoch,
            tuple(self._entries.values()),
            cls,
            tuple(self._reports[k] for k in sorted(self._reports)),
            self._version,
        )
        if self._on_change is not None:
            self._on_change()

    @property
    def epoch(self) -> int:
        return self._view.epoch

    def update_entry(self, entry: SuggestionEntry) -> PostResult:
        with self._lock:
            if entry.epoch != self._epoch:
                return PostResult.STALE
            old = self._entries.get(entry.command)
            if old == entry:
                return PostResult.DUPLICATE
            if old is not None:
                self._history.append(old)
            self._entries[entry.command] = entry
            self._bump()
            return PostResult.ACCEPTED

    def withdraw_entry(self, command: str) -> None:
        with self._lock:
            old = self._entries.pop(command, None)
            if old is not None:
                self._history.append(old)
                self._bump()

    def post_message(self, msg: BoardMessage) -> PostResult:
        with self._lock:
            if msg.kind == MessageKind.CLASSIFICATION:
                if msg.epoch != self._epoch:
                    return PostResult.STALE
                if self._classification == msg:
                    return PostResult.DUPLICATE
                self._classification = msg
            else:
                key = getattr(msg.payload, "command", repr(msg.payload))
                self._reports[key] = msg
            self._bump()
            return PostResult.ACCEPTED

    def snapshot(self) -> CommandBoardView:
        return self._view

    def history(self) -> tuple[SuggestionEntry, ...]:
        with self._lock:
            return tuple(self._history)

    def reinitialize(self, new_epoch: int) -> None:
        with self._lock:
            if new_epoch <= self._epoch:
                raise ProverError(
                    f"epoch must advance: {new_epoch} <= {self._epoch}"
                )
            self._epoch = new_epoch
            self._history.extend(self._entries.values())
            self._entries.clear()
            self._classification = None
            # resource reports persist across epochs
            self._bump()


class BoardHub:
    """One suggestion board per command plus the shared command board."""

    def __init__(self, commands: Iterable[str], epoch: int = 1):
        self._cond = threading.Condition()
        self._change_count = 0
        self.epoch = epoch
        self.boards: dict[str, SuggestionBoard] = {
            name: SuggestionBoard(name, epoch, self._changed) for name in commands
        }
        self.command_board = CommandBoard(epoch, self._changed)

    def _changed(self):
        with self._cond:
            self._change_count += 1
            self._cond.notify_all()

    @property
    def version(self) -> int:
        with self._cond:
            return self._change_count

    def wait_change(self, seen_version: int, timeout: float) -> int:
        """Block until any board mutates past ``seen_version``."""
        with self._cond:
            if self._change_count == seen_version:
                self._cond.wait(timeout)
            return self._change_count

    def poke(self) -> None:
        """Wake waiters without a board mutation (e.g. on a state swap)."""
        self._changed()

    def board(self, command: str) -> SuggestionBoard:
        return self.boards[command]

    def reinitialize_all(self, new_epoch: int) -> None:
        if new_epoch <= self.epoch:
            raise ProverError(f"epoch must advance: {new_epoch} <= {self.epoch}")
        for board in self.boards.values():
            board.reinitialize(new_epoch)
        self.command_board.reinitialize(new_epoch)
        self.epoch = new_epoch
        self._changed()
