"""Exception types shared across the package.

The CLI maps these onto distinct exit codes, so keep the hierarchy flat
and unambiguous: bad inputs vs. numerical breakdown vs. bad experiment
configuration.
"""


class ParameterError(ValueError):
    """An argument violates a documented precondition."""


class NumericError(RuntimeError):
    """A linear-algebra step failed (singular / non-finite operands)."""


class ConfigError(ValueError):
    """A scenario configuration file is malformed or inconsistent."""


class ExperimentError(RuntimeError):
    """A Monte Carlo experiment could not produce any usable trials."""
