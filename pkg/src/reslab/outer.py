"""Algebraic expansion on the middle branch for t above the bifurcation.

Terms through second order, with implicit-differentiation derivatives,
the validity window, and the blow-up exponents used to validate the
singular structure near t*.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .equilibria import T_STAR, equilibrium_branches
from .errors import TooCloseToBifurcation

BRANCH_FLOOR = 1.0e-9   # lower bound on 3*U0^2 - t before erroring out

# coefficient of (t - t*)^1 in the middle-branch expansion at t*;
# enters the inner-layer correction seed
U0_LINEAR_COEFF = 1.0 / (9.0 * np.sqrt(3.0) * (-(0.5 ** (1 / 3))))


@dataclass(frozen=True)
class OuterTerms:
    t: float
    U0: float
    U1: complex
    U2c: complex
    order: int


def middle_root(t: float) -> float:
    """Middle real root U2 of y^3 - t*y - 1 = 0 (requires t > t*)."""
    branches = {b.label: b.value for b in equilibrium_branches(t)}
    if "U2" not in branches:
        raise TooCloseToBifurcation(f"no three-root regime at t={t}")
    return branches["U2"]


def outer_terms(t: float, order: int = 2) -> OuterTerms:
    """Expansion terms at t: U0 (real), U1 (imaginary), U2c (real).

    U1 = -i*U0 / ((3 U0^2 - t)(U0^2 - t)); U2c from the second-order
    balance using the implicit derivative of U1.  Raises
    TooCloseToBifurcation when 3 U0^2 - t is below the floor.
    """
    if order not in (0, 1, 2):
        raise ValueError("order must be 0, 1 or 2")
    u0 = middle_root(t)
    d1 = 3 * u0 * u0 - t
    if abs(d1) < BRANCH_FLOOR:
        raise TooCloseToBifurcation(f"3*U0^2 - t = {d1:.3e} below floor")
    d2 = u0 * u0 - t
    u1 = -1j * u0 / (d1 * d2)
    u2c = 0j
    if order >= 2:
        v1 = -u0 / (d1 * d2)            # U1 = i*v1
        du0 = u0 / d1                   # implicit derivative of the branch
        dd1 = 6 * u0 * du0 - 1.0
        dd2 = 2 * u0 * du0 - 1.0
        dv1 = -(du0 * d1 * d2 - u0 * (dd1 * d2 + d1 * dd2)) / (d1 * d2) ** 2
        u2c = complex((dv1 - u0 * v1 * v1) / d1)
    return OuterTerms(t=t, U0=u0, U1=u1, U2c=u2c, order=order)


def outer_eval(t: float, eps: float, order: int = 2) -> complex:
    """Truncated expansion sum_{n<=order} eps^n * term_n(t)."""
    terms = outer_terms(t, order)
    val = complex(terms.U0)
    if order >= 1:
        val += eps * terms.U1
    if order >= 2:
        val += eps * eps * terms.U2c
    return val


def outer_validity(eps: float, safety: float = 1.0):
    """Validity window [t* + safety*eps^(4/5), inf)."""
    if not (0 < eps <= 0.1):
        raise ValueError("eps must be in (0, 0.1]")
    if safety < 1:
        raise ValueError("safety must be >= 1")
    return (T_STAR + safety * eps ** 0.8, np.inf)


def singular_exponents(n: int) -> float:
    """Leading blow-up exponent of term n in powers of (t - t*).

    n = 0, 1 follow -n/2; for n >= 2 the exponent is (1 - 5n)/2.  Used to
    validate fitted blow-up rates of outer_terms near t*.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n <= 1:
        return -n / 2.0
    return (1.0 - 5.0 * n) / 2.0
