"""Function-space statistics of wide random layered machines.

The package computes which Boolean functions deep networks and random
circuits realize at initialization: exact layer recursions for pattern
overlaps, Gaussian sampling of output function distributions, annealed and
quenched circuit dynamics, and finite-width ensemble simulation, plus a CLI
that writes the CSV/JSON artifacts consumed by the plotting frontend.
"""

__version__ = "0.1.0"

from . import (  # noqa: F401
    circuit_dynamics,
    cli,
    core,
    function_space,
    gaussian,
    meanfield,
    simulator,
)
