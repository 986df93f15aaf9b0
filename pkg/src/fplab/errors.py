"""Exception taxonomy shared across the package."""


class FplabError(Exception):
    """Base class for every error raised by this package."""


class InputError(FplabError):
    """Arguments violate an operation's stated preconditions."""


class ConfigurationError(FplabError):
    """A declared ingredient is missing, malformed or inconsistent."""


class RefusalError(FplabError):
    """A checker refuses to run: a declared regularity profile or claim
    it depends on was not met.  The message names the failing entry so the
    caller can fix the declaration rather than the data."""


class ExpressionError(ConfigurationError):
    """An expression does not conform to the supported grammar."""
