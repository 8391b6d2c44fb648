"""Command line front end: interactive REPL, script runner, serve modes."""

from __future__ import annotations

import argparse
import sys
from importlib import resources
from pathlib import Path
from typing import Optional

from .errors import ProverError, ScriptError
from .session import CONCURRENT, DETERMINISTIC, Session, SessionConfig


def build_config(args) -> SessionConfig:
    return SessionConfig(
        mode=CONCURRENT if args.concurrent else DETERMINISTIC,
        threshold=args.threshold,
        window=args.window,
        penalty=args.penalty,
        min_active=args.min_active,
        excluded_commands=frozenset(args.exclude or []),
        max_results=args.max_results,
        prover_label=args.prover_label,
    )


def display_state(session: Session) -> list[str]:
    cls = session.classification()
    out = [f"epoch {session.epoch}  class {cls if cls is not None else '-'}"]
    out.extend(ln.render() for ln in session.proof.lines)
    suggestions = session.suggestions()
    if suggestions:
        out.append("suggestions:")
        for i, entry in enumerate(suggestions, start=1):
            out.append(f"  {i}. {entry.render()}")
    else:
        out.append("suggestions: (none)")
    if session.proof.is_complete():
        out.append(f"proof complete, {len(session.proof.lines)} lines")
    return out


class CommandInterpreter:
    """Shared command handling for the REPL and the script runner."""

    def __init__(self, config: SessionConfig):
        self.config = config
        self.session: Optional[Session] = None

    def close(self) -> None:
        if self.session is not None:
            self.session.close()
            self.session = None

    def _require(self) -> Session:
        if self.session is None:
            raise ScriptError("no active proof; use: prove <formula>")
        return self.session

    def run_command(self, line: str) -> list[str]:
        """Execute one command line; returns display output."""
        word, _, rest = line.partition(" ")
        rest = rest.strip()
        if word == "prove":
            self.close()
            self.session = Session.start(rest, self.config)
            if self.config.mode == CONCURRENT:
                self.session.quiesce(5.0)
            return display_state(self.session)
        if word == "do":
            session = self._require()
            if rest.isdigit():
                index = int(rest)
                suggestions = session.suggestions()
                if not 1 <= index <= len(suggestions):
                    raise ScriptError(
                        f"no suggestion {index}; there are {len(suggestions)}"
                    )
                entry = suggestions[index - 1]
                session.execute(entry.command, entry.argmap)
            else:
                command = rest.split("{", 1)[0].strip()
                session.execute(command, rest)
            if self.config.mode == CONCURRENT:
                session.quiesce(5.0)
            return display_state(session)
        if word == "focus":
            session = self._require()
            session.set_focus(rest)
            if self.config.mode == CONCURRENT:
                session.quiesce(5.0)
            return display_state(session)
        if word == "agents":
            return self._require().resources_csv().splitlines()
        if word == "class":
            session = self._require()
            cls = session.classification()
            if cls is None:
                return ["no classification yet"]
            return [f"#class {cls} epoch={session.epoch}"]
        if word == "board":
            return self._require().board_dump(rest).splitlines()
        if word == "proof":
            return [ln.render() for ln in self._require().proof.lines]
        if word == "suggest":
            return display_state(self._require())
        raise ScriptError(f"unknown command {word!r}")


HELP = """commands:
  prove <formula>     start a proof of the formula
  do <n>              execute the n-th suggestion
  do <Cmd>{...}       execute a command with explicit arguments
  focus <label>       switch the focused open goal
  suggest             redisplay proof and suggestions
  proof               print the proof lines
  board <Cmd>         dump a suggestion board
  agents              resource report (CSV)
  class               current goal classification
  quit                leave"""


def _repl_loop(interp: CommandInterpreter, out, stream) -> int:
    while True:
        print("ndsuggest> ", end="", file=out, flush=True)
        line = stream.readline()
        if not line:
            return 0
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line in ("quit", "exit"):
            return 0
        if line == "help":
            print(HELP, file=out)
            continue
        try:
            for text in interp.run_command(line):
                print(text, file=out)
        except ProverError as e:
            print(f"error ({e.code}): {e}", file=out)


def repl(config: SessionConfig, stream=None) -> int:
    interp = CommandInterpreter(config)
    print("interactive prover; 'help' lists commands")
    try:
        return _repl_loop(interp, sys.stdout, stream if stream is not None else sys.stdin)
    finally:
        interp.close()


# ---------------------------------------------------------------------------
# Script runner

def _check_expectation(interp: CommandInterpreter, what: str, arg: str) -> None:
    session = interp._require()
    if what == "line":
        rendered = [ln.render() for ln in session.proof.lines]
        if arg not in rendered:
            raise ScriptError(f"expected proof line {arg!r}")
    elif what == "board":
        cmd, _, serial = arg.partition(" ")
        entries = [e.render() for e in session.hub.board(cmd).snapshot().entries]
        if serial not in entries:
            raise ScriptError(f"expected {serial!r} on the {cmd} board")
    elif what == "top":
        suggestions = session.suggestions()
        if not suggestions or suggestions[0].argmap.render() != arg:
            got = suggestions[0].argmap.render() if suggestions else "(none)"
            raise ScriptError(f"expected top suggestion {arg!r}, got {got!r}")
    elif what == "suggestion":
        if arg not in (e.argmap.render() for e in session.suggestions()):
            raise ScriptError(f"expected a suggestion {arg!r}")
    elif what == "class":
        cls = session.classification()
        if cls is None or str(cls) != arg:
            raise ScriptError(f"expected class {arg}, got {cls}")
    elif what == "complete":
        if not session.proof.is_complete():
            raise ScriptError("expected a complete proof")
        if int(arg) != len(session.proof.lines):
            raise ScriptError(
                f"expected {arg} lines, proof has {len(session.proof.lines)}"
            )
    else:
        raise ScriptError(f"unknown expectation {what!r}")


def run_script(path: str, config: SessionConfig, out=None) -> int:
    """Run a proof script; nonzero exit on any failure.

    Scripts run deterministically so transcripts are reproducible.
    """
    out = out or sys.stdout
    if path == "reference":
        text = (
            resources.files("ndsuggest").joinpath("data/reference.proof").read_text()
        )
    else:
        p = Path(path)
        if not p.is_file():
            print(f"script not found: {path}", file=out)
            return 2
        text = p.read_text()
    import dataclasses

    config = dataclasses.replace(config, mode=DETERMINISTIC)
    interp = CommandInterpreter(config)
    try:
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            print(f"> {line}", file=out)
            try:
                if line.startswith("expect "):
                    _, what, arg = line.split(" ", 2) if line.count(" ") >= 2 else (
                        "expect", line.split(" ", 1)[1], ""
                    )
                    _check_expectation(interp, what, arg)
                    print(f"ok: {what} {arg}".rstrip(), file=out)
                else:
                    for text_line in interp.run_command(line):
                        print(text_line, file=out)
            except ProverError as e:
                print(f"failed at line {lineno}: {e}", file=out)
                return 2 if e.code == "input-error" else 1
    finally:
        interp.close()
    return 0


# ---------------------------------------------------------------------------

def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="ndsuggest",
        description="Interactive natural-deduction prover with background "
        "command-suggestion agents.",
    )
    ap.add_argument("conjecture", nargs="?", help="formula to prove")
    mode = ap.add_mutually_exclusive_group()
    mode.add_argument("--deterministic", action="store_true",
                      help="single-threaded reproducible mode (default)")
    mode.add_argument("--concurrent", action="store_true",
                      help="free-running agent threads")
    ap.add_argument("--threshold", type=float, default=3.0,
                    help="global complexity value (agents above it retire)")
    ap.add_argument("--window", type=int, default=10, help="run-time averaging window")
    ap.add_argument("--penalty", type=float, default=1.0,
                    help="rating penalty per unproductive run")
    ap.add_argument("--min-active", type=int, default=4,
                    help="minimum number of active agents")
    ap.add_argument("--exclude", action="append", metavar="CMD",
                    help="exclude a command from suggestions (repeatable)")
    ap.add_argument("--max-results", type=int, default=3,
                    help="results per agent run")
    ap.add_argument("--prover-label", default="PropSolve",
                    help="justification label written by the internal prover")
    ap.add_argument("--script", metavar="FILE",
                    help="run a proof script ('reference' for the bundled one)")
    ap.add_argument("--serve", metavar="HOST:PORT", help="serve the JSON protocol over TCP")
    ap.add_argument("--serve-web", metavar="HOST:PORT",
                    help="serve the browser client and WebSocket endpoint")
    ap.add_argument("--pipe", action="store_true",
                    help="speak the JSON protocol over stdin/stdout")
    args = ap.parse_args(argv)

    config = build_config(args)
    try:
        if args.script:
            return run_script(args.script, config)
        if args.serve:
            from .server import serve_tcp

            serve_tcp(args.serve, config)
            return 0
        if args.serve_web:
            from .server import serve_web

            serve_web(args.serve_web, config)
            return 0
        if args.pipe:
            from .server import serve_pipe

            return serve_pipe(config)
        if args.conjecture:
            interp = CommandInterpreter(config)
            try:
                for text in interp.run_command(f"prove {args.conjecture}"):
                    print(text)
                return _repl_loop(interp, sys.stdout, sys.stdin)
            finally:
                interp.close()
        return repl(config)
    except ProverError as e:
        print(f"error ({e.code}): {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
