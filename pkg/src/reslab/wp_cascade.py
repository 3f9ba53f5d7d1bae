"""Weierstrass machinery and the burst cascade bookkeeping.

Elliptic-function evaluation by Laurent-seeded ODE continuation, real
periods by quadrature (cross-checked against the ODE), the discrete
invariant progression g3(k), the lambda-modified layer, the jump ledger,
and the spike-time predictor.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .equilibria import T_STAR, U_STAR
from .errors import BeyondValidity, NearPole, NoRealRoot, OutOfWindow
from .numkernel import adaptive_quad, poly_roots
from .painleve import PoleFit

POLE_EXCLUSION = 1.0e-8
SERIES_RADIUS_FACTOR = 0.30      # fraction of the real period seeded by series
LAMBDA_REGIME_THRESHOLD = 0.1    # g2 switched on above this lambda_k


@dataclass(frozen=True)
class WpParams:
    g2: float
    g3: float
    Omega: float


@dataclass(frozen=True)
class CascadeState:
    k: int
    g3_k: float
    Omega_k: float
    P_k: float
    lambda_k: float
    t_spike: float
    lambda_flagged: bool = False


@dataclass
class JumpLedger:
    """Per-burst jump records at the tracked order."""

    records: list = field(default_factory=list)   # dicts: k, X_plus, Y_plus, Y_minus, x_plus

    def last_k(self) -> int:
        return self.records[-1]["k"] if self.records else 0


# ---------------------------------------------------------------------------
# Weierstrass evaluation

def _laurent_coeffs(g2: float, g3: float, depth: int = 20):
    """c_k of wp(z) = z^-2 + sum_{k>=2} c_k z^{2k-2}; standard recursion."""
    c = np.zeros(depth + 1)
    c[2] = g2 / 20.0
    c[3] = g3 / 28.0
    for k in range(4, depth + 1):
        c[k] = 3.0 / ((2 * k + 1) * (k - 3)) * sum(c[m] * c[k - m]
                                                   for m in range(2, k - 1))
    return c


def _series_eval(x: float, g2: float, g3: float, depth: int = 20):
    c = _laurent_coeffs(g2, g3, depth)
    p = 1.0 / x ** 2
    dp = -2.0 / x ** 3
    z = 1.0 / x
    for k in range(2, depth + 1):
        p += c[k] * x ** (2 * k - 2)
        dp += (2 * k - 2) * c[k] * x ** (2 * k - 3)
        z -= c[k] * x ** (2 * k - 1) / (2 * k - 1)
    return p, dp, z


@lru_cache(maxsize=256)
def _wp_cached(g2: float, g3: float):
    """Dense ODE solution on [series radius, Omega/2 + margin].

    The rest of the period is served by evenness about the half period:
    wp(Omega - x) = wp(x), wp'(Omega - x) = -wp'(x),
    zeta(Omega - x) = 2 eta - zeta(x) with eta = zeta(Omega/2).
    """
    Omega = wp_real_period(g2, g3, cross_check=False)
    x0 = SERIES_RADIUS_FACTOR * Omega

    def ode(x, y):
        p, dp, _ = y
        return [dp, 6.0 * p * p - 0.5 * g2, -p]

    y0 = _series_eval(x0, g2, g3)
    sol = solve_ivp(ode, (x0, 0.55 * Omega), y0, method="DOP853",
                    rtol=1e-13, atol=1e-14, dense_output=True)
    if sol.status != 0:
        raise RuntimeError(f"wp continuation failed: {sol.message}")
    eta = float(sol.sol(Omega / 2)[2])
    return Omega, x0, sol, eta


def wp_eval(x: float, g2: float, g3: float):
    """(wp, wp', zeta) for real argument and real invariants.

    Laurent series near the origin, continued by the defining ODEs along
    the real axis; lattice translations and the half-period reflection
    reduce the argument to [0, Omega/2].  zeta picks up 2*eta per period.
    Raises NearPole inside the exclusion radius of a lattice point.
    """
    if g2 == 0.0 and g3 == 0.0:
        if abs(x) < POLE_EXCLUSION:
            raise NearPole("argument at the degenerate pole")
        return 1.0 / x ** 2, -2.0 / x ** 3, 1.0 / x
    if g2 == 0.0 and g3 > 0.0 and g3 != 1.0:
        # homogeneity: one cached lattice serves every g3 > 0
        s = g3 ** (1.0 / 6.0)
        p, dp, z = wp_eval(x * s, 0.0, 1.0)
        return g3 ** (1.0 / 3.0) * p, np.sqrt(g3) * dp, s * z
    Omega, x0, sol, eta = _wp_cached(g2, g3)

    sign = 1.0 if x >= 0 else -1.0
    xa = abs(x)
    n_shift = np.floor(xa / Omega)
    xr = xa - n_shift * Omega                     # in [0, Omega)
    if min(xr, Omega - xr) < POLE_EXCLUSION:
        raise NearPole(f"argument within {POLE_EXCLUSION} of a lattice point")

    reflected = xr > Omega / 2
    xe = Omega - xr if reflected else xr
    if xe <= x0:
        p, dp, z = _series_eval(xe, g2, g3)
    else:
        p, dp, z = sol.sol(xe)
    if reflected:
        dp = -dp
        z = 2.0 * eta - z
    if n_shift:
        z = z + 2.0 * eta * n_shift
    # wp even, wp' odd, zeta odd
    return float(p), float(sign * dp), float(sign * z)


def wp_real_period(g2: float, g3: float, cross_check: bool = True,
                   tol: float = 1e-12) -> float:
    """Real period 2 * int_{e1}^inf dy / sqrt(4y^3 - g2 y - g3).

    e1 is the largest real root of the cubic.  Optionally cross-checked
    against the half-period located on the continued ODE solution (where
    wp' vanishes).
    """
    roots = poly_roots([4.0, 0.0, -g2, -g3], kind="real-only", real_tol=1e-7)
    if not roots:
        raise NoRealRoot("cubic 4y^3 - g2 y - g3 has no real root")
    e1 = max(r for r, _ in roots)
    c = e1 * e1 - g2 / 4.0

    def q_of_u(u):
        y = e1 + u * u
        return y * y + e1 * y + c

    if q_of_u(0.0) <= 0:
        raise NoRealRoot("largest real root is not simple")

    # y = e1 + u^2 removes the endpoint singularity; u = v/(1-v) maps to [0,1)
    def integrand(v):
        u = v / (1.0 - v)
        return 2.0 / np.sqrt(q_of_u(u)) / (1.0 - v) ** 2

    Omega = adaptive_quad(integrand, 0.0, 1.0, tol)
    if cross_check:
        Omega2 = _period_from_ode(g2, g3, e1, Omega)
        if abs(Omega - Omega2) > 1e-8 * max(1.0, Omega):
            raise RuntimeError(
                f"period cross-check failed: quad {Omega}, ode {Omega2}")
    return float(Omega)


def _period_from_ode(g2: float, g3: float, e1: float, Omega_guess: float) -> float:
    """Half period from the wp ODE: the zero of wp' away from the pole."""
    x0 = SERIES_RADIUS_FACTOR * Omega_guess

    def ode(x, y):
        p, dp, _ = y
        return [dp, 6.0 * p * p - 0.5 * g2, -p]

    y0 = _series_eval(x0, g2, g3)
    sol = solve_ivp(ode, (x0, 0.75 * Omega_guess), y0, method="DOP853",
                    rtol=1e-13, atol=1e-13, dense_output=True)
    f = lambda x: sol.sol(x)[1]
    half = brentq(f, x0, 0.75 * Omega_guess, xtol=1e-14, rtol=8.9e-16)
    return 2.0 * half


# ---------------------------------------------------------------------------
# discrete progression and ledger

def g3_sequence(a4: float, k: int) -> float:
    """Invariant progression g3(k) = (a4 + (pi/2)(k-1)) / 56 for k >= 1.

    The per-step increment is exactly pi/112.
    """
    if k < 1:
        raise ValueError("k starts at 1")
    return (a4 + 0.5 * np.pi * (k - 1)) / 56.0


def g3_sequence_measured(k: int, y_jump: float = None) -> float:
    """Leading progression with the measured per-burst jump constant.

    The far-side quartic content of burst k is k * y_jump and the layer
    leader -2*wp(T; 0, g3) carries quartic coefficient -g3/14, giving
    g3(k) = -14 * k * y_jump.  Default y_jump = -pi U*^2 / 7 (the measured
    value).  Diagnostic companion to g3_sequence, not used by the gates.
    """
    if k < 1:
        raise ValueError("k starts at 1")
    if y_jump is None:
        y_jump = -np.pi * U_STAR ** 2 / 7.0
    return -14.0 * k * y_jump


def lambda_k(eps: float, k: int, ledger: JumpLedger | None = None,
             a4: float | None = None, measured: bool = False) -> float:
    """Slow forcing level eps^{1/6} * (P_k + (1/4) sum x_j^+).

    P_k is the accumulated period sum (from the ledger's records when it
    carries them, else from the progression seeded by a4); the x_j^+
    correction is included when the ledger carries records through k.
    """
    if k < 1:
        raise ValueError("k starts at 1")
    if ledger is not None and ledger.last_k() >= k:
        P_k = sum(rec["Omega"] for rec in ledger.records[:k])
        corr = 0.25 * sum(rec["x_plus"] for rec in ledger.records[:k])
        return eps ** (1.0 / 6.0) * (P_k + corr)
    if a4 is None and not measured:
        raise ValueError("need a4 (or measured=True) without a filled ledger")
    P_k = 0.0
    for j in range(1, k + 1):
        g3 = (g3_sequence_measured(j) if measured else g3_sequence(a4, j))
        P_k += wp_real_period(0.0, g3, cross_check=False)
    return eps ** (1.0 / 6.0) * P_k


def intermediate_leader(T: float, k: int, eps: float, a4: float,
                        lambda_threshold: float = LAMBDA_REGIME_THRESHOLD,
                        measured: bool = False):
    """Leader pair (A, B) of the between-bursts layer at slow argument T.

    A = -2 wp(T; g2_eff, g3(k)) with g2_eff = 0 in the small-k regime and
    g2_eff = lambda_k above the threshold (A'' + 3A^2 = g2_eff identically).
    B = A' / (2 U*^2).  T must lie inside (-Omega_k, 0) away from the poles.
    """
    g3 = g3_sequence_measured(k) if measured else g3_sequence(a4, k)
    lam = lambda_k(eps, k, a4=a4, measured=measured)
    g2_eff = lam if lam >= lambda_threshold else 0.0
    Omega = wp_real_period(g2_eff, g3, cross_check=False)
    if not (-Omega < T < 0):
        raise OutOfWindow("T outside the inter-burst interval")
    if -T < eps ** (1.0 / 6.0) or (T + Omega) < eps ** (2.0 / 15.0):
        raise OutOfWindow("T inside a pole collar")
    p, dp, _ = wp_eval(T, g2_eff, g3)
    Aval = -2.0 * p
    Bval = -2.0 * dp / (2.0 * U_STAR ** 2)
    return Aval, Bval


def variational_pair(T: float, g3: float):
    """(A1, A2) = (wp'/4, (7/(3 g3)) (T wp' + 2 wp)); their Wronskian is -7/4."""
    p, dp, _ = wp_eval(T, 0.0, g3)
    A1 = 0.25 * dp
    A2 = (7.0 / (3.0 * g3)) * (T * dp + 2.0 * p)
    return A1, A2


def variational_pair_deriv(T: float, g3: float, h: float = 1e-6):
    a1m, a2m = variational_pair(T - h, g3)
    a1p, a2p = variational_pair(T + h, g3)
    return (a1p - a1m) / (2 * h), (a2p - a2m) / (2 * h)


def jump_ledger_step(ledger: JumpLedger, k: int, a4: float, tau0: float) -> JumpLedger:
    """Append record k: X_k^+ = 0, Y_k^+ = 56 g3(k), Y_k^- = Y_k^+ + pi/2,
    and the tracked-order shift x_k^+ = (28 tau0 / (3 g3)) zeta(Omega/2; 0, g3)."""
    if ledger.last_k() != k - 1:
        raise ValueError("ledger must be valid through k-1")
    g3 = g3_sequence(a4, k)
    Omega = wp_real_period(0.0, g3, cross_check=False)
    _, _, zeta_half = wp_eval(Omega / 2.0, 0.0, g3)
    rec = {
        "k": k,
        "g3": g3,
        "Omega": Omega,
        "X_plus": 0.0,
        "Y_plus": 56.0 * g3,
        "Y_minus": 56.0 * g3 + 0.5 * np.pi,
        "x_plus": (28.0 * tau0 / (3.0 * g3)) * zeta_half,
    }
    out = JumpLedger(records=list(ledger.records) + [rec])
    return out


def spike_schedule(eps: float, fit: PoleFit, K: int,
                   measured: bool = False,
                   enforce_validity: bool = True) -> list[CascadeState]:
    """Predicted spike times and per-interval cascade data for k = 1..K.

    t_spike(0) = t* + eps^{4/5} tau0; each interval advances toward
    decreasing t by eps^{5/6} Omega_k.  K must respect K <= eps^{-1/7}
    unless ``enforce_validity`` is off (diagnostic use past the formal
    bound); states whose lambda_k approaches eps^{-2/3} are flagged.
    """
    if enforce_validity and K > int(np.floor(eps ** (-1.0 / 7.0))):
        raise BeyondValidity("K exceeds the eps^(-1/7) validity bound")
    t0 = T_STAR + eps ** 0.8 * fit.tau0
    out = []
    t_prev = t0
    P = 0.0
    scale = eps ** (5.0 / 6.0)
    for k in range(1, K + 1):
        g3 = (g3_sequence_measured(k) if measured else g3_sequence(fit.a4, k))
        Omega = wp_real_period(0.0, g3, cross_check=False)
        P += Omega
        lam = eps ** (1.0 / 6.0) * P
        t_spike = t_prev - scale * Omega
        out.append(CascadeState(k=k, g3_k=g3, Omega_k=Omega, P_k=P,
                                lambda_k=lam, t_spike=t_spike,
                                lambda_flagged=lam >= 0.5 * eps ** (-2.0 / 3.0)))
        t_prev = t_spike
    return out
