import asyncio
import html
import re
import sys
from dataclasses import dataclass, field

from prompt_toolkit import PromptSession, print_formatted_text
from prompt_toolkit.completion import Completer, WordCompleter
from prompt_toolkit.filters import completion_is_selected
from prompt_toolkit.formatted_text import HTML
from prompt_toolkit.key_binding import KeyBindings
from rich.console import Console

from convexa.config.loader import Settings
from convexa.errors import ConvexaError
from convexa.display.components.report_panel import render_curve_summary, status_spinner
from convexa.display.components.display_styles import DisplayStyles
from convexa.geometry.curves import FramedCurve
from convexa.harness.catalog import build_family, family_names, parse_params
from convexa.harness.checks import CheckResult
from convexa.harness.registry import get_registered_checks
from convexa.harness.suite import run_check
from convexa.utils.common import resolve_seed

COMMANDS = ['/help', '/status', '/checks', '/run', '/family', '/exit', '/quit']


class SlashCommandCompleter(Completer):
    """
    Only triggers completion if the input starts with a slash.
    """
    def __init__(self, completer):
        self.completer = completer

    def get_completions(self, document, complete_event):
        text = document.text_before_cursor.lstrip()
        # Only complete if we are starting a command
        if text.startswith('/'):
            yield from self.completer.get_completions(document, complete_event)


@dataclass
class ConsoleSession:
    """State shared by the console commands."""
    settings: Settings
    console: Console = field(default_factory=Console)
    last_curve: FramedCurve | None = None
    results: list[CheckResult] = field(default_factory=list)

    def get_status(self) -> dict:
        last = "-" if self.last_curve is None else str(self.last_curve.metadata.get("family", "curve"))
        return {
            "seed": resolve_seed(self.settings),
            "grid cells": self.settings.numerics.grid_cells,
            "checks run": len(self.results),
            "checks passed": sum(1 for r in self.results if r.passed),
            "last curve": last,
        }


def print_help():
    print_formatted_text(HTML(DisplayStyles.separator_line(60)))
    print("Available Commands:")
    print("  /help                      Show this help message")
    print("  /status                    Show session status (seed, checks run)")
    print("  /checks                    List the reproduction checks")
    print("  /run <check>               Run one check")
    print(f"  /family <name> [k=v ...]   Build a curve ({', '.join(family_names())})")
    print("  /exit, /quit               Exit the session")
    print("")


async def handle_command(command: str, session: ConsoleSession) -> bool:
    parts = command.strip().split()
    cmd = parts[0].lower()
    args = parts[1:]
    if cmd in ["/exit", "/quit"]:
        print("Goodbye!")
        return False  # Signal to stop loop
    elif cmd == "/help":
        print_help()
    elif cmd == "/status":
        print("\nSession Status:")
        for k, v in session.get_status().items():
            print(f"  {k.capitalize()}: {v}")
        print("")
    elif cmd == "/checks":
        print("\nChecks:")
        for name in get_registered_checks().names():
            print(f"  {name}")
        print("")
    elif cmd == "/run":
        if len(args) != 1:
            print("\nUsage: /run <check>\n")
        elif args[0] not in get_registered_checks():
            print(f"\nUnknown check: {args[0]}. Type /checks for the list.\n")
        else:
            print_formatted_text(HTML(DisplayStyles.RUNNING_STYLE.format(html.escape(args[0]))))
            with status_spinner(session.console, f"running {args[0]}"):
                result = await asyncio.to_thread(run_check, args[0], session.settings, resolve_seed(session.settings))
            session.results.append(result)
            session.console.print(f"{DisplayStyles.status_text(result.status)}  {result.name}: {result.summary}")
    elif cmd == "/family":
        if not args:
            print(f"\nUsage: /family <name> [k=v ...]; families: {', '.join(family_names())}\n")
        else:
            try:
                params = parse_params(args[1:])
                curve = await asyncio.to_thread(build_family, args[0], params, session.settings)
            except (ConvexaError, KeyError, ValueError) as e:
                print_formatted_text(HTML(DisplayStyles.ERROR_STYLE.format(html.escape(f"Error: {e}"))))
            else:
                session.last_curve = curve
                render_curve_summary(curve, session.console)
    else:
        print(f"\nUnknown command: {command}. Type /help for available commands.\n")
    return True  # Signal to continue loop


async def run_console_loop(session: ConsoleSession):
    """
    Runs an interactive console, or executes piped stdin as one command per line.
    """

    # Check if input is coming from a pipe
    if not sys.stdin.isatty():
        for line in sys.stdin.read().splitlines():
            line = line.strip()
            if not line:
                continue
            if not line.startswith("/"):
                print(f"\nIgnoring '{line}': commands start with '/'.\n")
                continue
            if not await handle_command(line, session):
                break
        return

    # Interactive mode
    print("\n--- convexa console ---")
    print("Type '/help' for a list of commands.")
    print("Type '/exit' or '/quit' to end the session.\n")

    # Custom pattern to include '/' as part of the word
    word_pattern = re.compile(r'^([a-zA-Z0-9_/-]+)$')
    base_completer = WordCompleter(COMMANDS, ignore_case=True, pattern=word_pattern)
    command_completer = SlashCommandCompleter(base_completer)

    kb = KeyBindings()

    @kb.add('enter', filter=completion_is_selected)
    def _(event):
        """
        Enter selects the completion but doesn't submit.
        """
        event.current_buffer.complete_state = None

    prompt = PromptSession(
        completer=command_completer,
        key_bindings=kb,
        complete_while_typing=True
    )

    while True:
        try:
            user_input = await prompt.prompt_async(HTML(DisplayStyles.PROMPT_STYLE))
        except (EOFError, KeyboardInterrupt):
            print("\nExiting...")
            break

        user_input = user_input.strip()
        if not user_input:
            continue

        if user_input.lower() in ["exit", "quit"]:
            print("Goodbye!")
            break

        if not user_input.startswith("/"):
            print("\nCommands start with '/'. Type /help for available commands.\n")
            continue

        if not await handle_command(user_input, session):
            break
