"""
Display Styles - centralized styling for reports and the console.
"""


class DisplayStyles:
    """
    Centralized styling for the display elements.
    """
    # prompt_toolkit HTML snippets for the console
    PROMPT_STYLE = "<b><ansicyan>convexa&gt; </ansicyan></b>"
    RUNNING_STYLE = "<b><ansiyellow>Running check: {}</ansiyellow></b>"
    ERROR_STYLE = "<ansired>{}</ansired>"

    # rich styles for tables and panels
    STATUS_STYLES = {"pass": "bold green", "fail": "bold red", "error": "bold magenta"}
    STATUS_GLYPHS = {"pass": "✓", "fail": "✗", "error": "!"}
    TITLE_STYLE = "bold cyan"
    BORDER_PASS = "green"
    BORDER_FAIL = "red"

    @classmethod
    def status_text(cls, status: str) -> str:
        style = cls.STATUS_STYLES.get(status, "white")
        glyph = cls.STATUS_GLYPHS.get(status, "?")
        return f"[{style}]{glyph} {status}[/{style}]"

    @staticmethod
    def separator_line(width: int = 80, char: str = '─') -> str:
        """Generate a separator line of specified width and character."""
        return f"<ansigray>{char * width}</ansigray>"
