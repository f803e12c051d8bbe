"""
Console status output.

Status lines keep the emoji style of the application but go to stderr, so a
JSON report on stdout can be piped without filtering.
"""
import sys

_state = {'verbose': True}


def set_verbose(flag: bool) -> None:
    """Enable or disable info lines (warnings and errors are always printed)."""
    _state['verbose'] = bool(flag)


def info(message: str, icon: str = "🔍") -> None:
    if _state['verbose']:
        print(f"{icon} {message}", file=sys.stderr)


def success(message: str) -> None:
    info(message, icon="✅")


def warning(message: str) -> None:
    print(f"⚠️ {message}", file=sys.stderr)


def error(message: str) -> None:
    print(f"❌ {message}", file=sys.stderr)
