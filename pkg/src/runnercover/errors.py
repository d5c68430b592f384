"""Exception hierarchy shared across the package."""


class RunnerCoverError(Exception):
    """Base class for all errors raised by this package."""


class UsageError(RunnerCoverError):
    """A caller violated a documented precondition (CLI exit code 3)."""


class ResourceLimitError(RunnerCoverError):
    """A memory or size budget would be exceeded; names the required amount."""


class UnsupportedConfigError(UsageError):
    """A requested configuration is outside what this tool supports."""


class InternalError(RunnerCoverError):
    """An internal self-check failed.  Always a bug, never a user error."""
