"""Kinetics of the TG -> DG -> MG hydrolysis chain with DG transacylation.

The compiled extension exposes simulation of the closed four-species
system, the quasi-steady DG analysis, the reduced slow models with their
expansions, kappa-sensitivity systems, timescale diagnostics and the
parametric sweep machinery.
"""

from ._lipokin import *  # noqa: F401,F403

__version__ = "0.1.0"
