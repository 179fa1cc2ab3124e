"""Exception hierarchy.

Each class carries the CLI exit code used when it escapes a subcommand.
"""


class SalediError(Exception):
    exit_code = 1
    kind = "error"


class ConfigError(SalediError, ValueError):
    """Invalid configuration or parameter value."""

    exit_code = 2
    kind = "config"


class DataError(SalediError, ValueError):
    """Input records or samples that violate a precondition."""

    exit_code = 3
    kind = "data"


class NumericalError(SalediError, ArithmeticError):
    """An optimizer or closed-form evaluation could not produce a finite answer."""

    exit_code = 4
    kind = "numerical"
