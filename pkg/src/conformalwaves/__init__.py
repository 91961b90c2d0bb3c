"""Pseudo-spectral 2D infinite-depth water waves in the conformal variable.

Library layout:

- ``spectral``: periodic fields, Hilbert transform, projections, norms
- ``kernels``: periodized singular kernels and the O(N^2) quadrature oracle
- ``calculus``: FFT-reduced commutators, brackets, cubic and quartic forms
- ``jets``: material-derivative jets and the base-field bootstrap
- ``evolution``: the interface system, RK4 stepping, initial data
- ``energy``: the corrected energy hierarchy and its closed-form j=0 rate
- ``verify``: seeded identity/inequality suite
- ``experiments`` / ``config`` / ``cli``: runs, sweeps, convergence studies
"""

from .spectral import Grid, SpectralField
from .evolution import WaveState, InitialProfile, make_initial_data
from .jets import MaterialJet, build_base_jets
from .energy import EnergyEngine

__all__ = [
    "Grid",
    "SpectralField",
    "WaveState",
    "InitialProfile",
    "make_initial_data",
    "MaterialJet",
    "build_base_jets",
    "EnergyEngine",
]

__version__ = "0.1.0"
