"""Groundwater time-series toolkit: VAR models, diagnostics, copula dependence networks and shelf life."""

from ._gwts import *  # noqa: F401,F403
from ._gwts import __doc__  # noqa: F401

__version__ = "0.1.0"
