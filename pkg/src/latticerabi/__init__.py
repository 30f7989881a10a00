"""Simulation laboratory for the quantum Rabi model of cold atoms in a
shallow optical lattice plus harmonic trap.

Three propagators share one observable vocabulary:

* ``grid_dynamics`` — the full Hamiltonian on a position grid
  (split-operator spectral method),
* ``periodic`` — the two-band model on the periodic quasi-momentum zone,
* ``fock`` — the ideal quantum Rabi model in a truncated Fock space.

``scenarios`` packages the named figure experiments (band structure,
crossover dynamics, momentum distributions, collapse and revival) and
``cli`` exposes them as a command line tool.
"""

__version__ = "0.1.0"

from .params import RabiParams, SystemParams, from_ratios, to_rabi_params

__all__ = [
    "__version__",
    "SystemParams",
    "RabiParams",
    "to_rabi_params",
    "from_ratios",
]
