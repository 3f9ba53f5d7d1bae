"""reslab: numerical laboratory for slow passage through nonlinear resonance.

Direct integration of the driven amplitude equation, its asymptotic layers
(algebraic branch, Painleve-1 onset, separatrix bursts, Weierstrass cascade,
averaged two-phase solution), and a matching engine that measures overlap
errors and empirical scaling exponents.
"""

__version__ = "0.1.0"

from .equilibria import (  # noqa: F401
    E_STAR,
    T_STAR,
    U_STAR,
    X_PLUS_STAR,
    bifurcation_constants,
    equilibrium_branches,
    frozen_energy,
)
from .numkernel import ToleranceSpec, Trajectory, integrate_ivp  # noqa: F401
