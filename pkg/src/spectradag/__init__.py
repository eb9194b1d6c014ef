"""spectradag: learn the DAG dependency structure of a linear dynamical
system from finite time-series samples via conditional power spectral
densities.

The package covers the full pipeline: random model generation, trajectory
simulation under two sampling strategies, spectral (PSDM) estimation,
conditional-PSD based topological ordering and parent identification, and
a seeded Monte Carlo harness with sample-complexity bound calculators.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import ConfigError, NumericalError  # noqa: F401
