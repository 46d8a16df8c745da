"""
Tests for the console commands and the piped-input loop.
"""
import io
from unittest.mock import MagicMock, patch

import pytest
from rich.console import Console

from convexa.config.loader import Settings
from convexa.interface.cli import COMMANDS, ConsoleSession, SlashCommandCompleter, handle_command, run_console_loop
from convexa.utils.common import SEED_ENV_VAR


@pytest.fixture
def session(monkeypatch):
    monkeypatch.delenv(SEED_ENV_VAR, raising=False)
    settings = Settings().with_overrides("numerics", grid_cells=64).with_overrides("suite", seed=3)
    return ConsoleSession(settings, Console(record=True, width=120, color_system=None))


@pytest.fixture(autouse=True)
def formatted():
    with patch("convexa.interface.cli.print_formatted_text") as mock_print:
        yield mock_print


@pytest.mark.asyncio
@pytest.mark.parametrize("command", ["/exit", "/quit", "/EXIT"])
async def test_exit_commands_stop_the_loop(session, command, capsys):
    assert await handle_command(command, session) is False
    assert "Goodbye!" in capsys.readouterr().out


@pytest.mark.asyncio
async def test_help_and_checks(session, capsys, formatted):
    assert await handle_command("/help", session)
    assert await handle_command("/checks", session)
    out = capsys.readouterr().out
    assert "/family <name>" in out
    assert "h-hat" in out
    formatted.assert_called_once()


@pytest.mark.asyncio
async def test_status(session, capsys):
    assert await handle_command("/status", session)
    out = capsys.readouterr().out
    assert "Seed: 3" in out
    assert "Grid cells: 64" in out
    assert "Last curve: -" in out


@pytest.mark.asyncio
async def test_run_a_check(session, formatted):
    assert await handle_command("/run total-curvature", session)
    assert [result.name for result in session.results] == ["total-curvature"]
    assert session.results[0].passed
    assert session.get_status()["checks passed"] == 1
    assert "total-curvature" in session.console.export_text()
    formatted.assert_called_once()


@pytest.mark.asyncio
async def test_run_usage_and_unknown_check(session, capsys):
    assert await handle_command("/run", session)
    assert await handle_command("/run no-such-check", session)
    out = capsys.readouterr().out
    assert "Usage: /run <check>" in out
    assert "Unknown check: no-such-check" in out
    assert session.results == []


@pytest.mark.asyncio
async def test_build_a_family(session):
    assert await handle_command("/family nu s=2", session)
    assert session.last_curve.metadata["family"] == "nu"
    assert session.get_status()["last curve"] == "nu"
    assert "Pos" in session.console.export_text()


@pytest.mark.asyncio
async def test_family_errors_are_reported(session, formatted):
    assert await handle_command("/family spiral", session)
    assert await handle_command("/family nu s", session)
    assert formatted.call_count == 2
    assert session.last_curve is None


@pytest.mark.asyncio
async def test_unknown_command(session, capsys):
    assert await handle_command("/frobnicate", session)
    assert "Unknown command: /frobnicate" in capsys.readouterr().out


@pytest.mark.asyncio
async def test_piped_input_runs_until_exit(session, capsys):
    stdin = io.StringIO("/status\n\nhello\n/exit\n/run no-such-check\n")
    with patch("sys.stdin", stdin):
        await run_console_loop(session)
    out = capsys.readouterr().out
    assert "Session Status:" in out
    assert "Ignoring 'hello'" in out
    assert "Goodbye!" in out
    assert "Unknown check" not in out


def test_completer_only_completes_commands():
    inner = MagicMock()
    inner.get_completions.return_value = iter(["done"])
    completer = SlashCommandCompleter(inner)
    document = MagicMock(text_before_cursor="  /he")
    assert list(completer.get_completions(document, None)) == ["done"]
    document = MagicMock(text_before_cursor="he")
    assert list(completer.get_completions(document, None)) == []
    assert "/family" in COMMANDS
