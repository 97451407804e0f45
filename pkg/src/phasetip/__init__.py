"""Phase-sensitive tipping in seasonally forced predator-prey models.

Frozen-system analysis (equilibria, limit cycles, Allee basin
boundaries), basin-instability classification, and Monte Carlo tipping
experiments under piecewise-constant climate forcing, with a command
line front end producing CSV artifacts.
"""

__version__ = "0.1.0"

from .ode_core import backend_name  # noqa: F401
