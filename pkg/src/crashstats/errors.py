"""Exception hierarchy shared by the library and the CLI."""


class CrashStatsError(Exception):
    """Base class for all errors raised by crashstats."""


class InputError(CrashStatsError, ValueError):
    """Bad or unreadable input data (CLI exit code 1)."""


class InfeasibleError(CrashStatsError):
    """Valid input on which the requested analysis cannot run (CLI exit code 2)."""


class NoShocksError(InfeasibleError):
    """The series contains no consecutive-decline runs."""
