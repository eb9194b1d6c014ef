"""Exception types shared across the package.

Two failure families matter to callers (and to the CLI exit-code mapping):
bad configuration/arguments versus numerical breakdown at run time.
"""

from __future__ import annotations


class ConfigError(ValueError):
    """Invalid parameters, configuration files, or CLI arguments."""


class NumericalError(RuntimeError):
    """Numerical failure: divergent iteration, singularity beyond rescue,
    or a residual/imaginary part outside its documented tolerance."""
