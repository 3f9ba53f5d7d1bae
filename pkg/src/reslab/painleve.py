"""First inner layer: the special Painleve-1 solution and its pole data.

The layer ODE alpha'' + 3 alpha^2 - tau = 0 is integrated from its algebraic
far-field series down to the first real pole; the pole position tau0 and the
free quartic Laurent coefficient a4 seed the whole burst cascade.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .equilibria import T_STAR, U_STAR
from .errors import FitFailed, OutOfLayer, TauTooSmall
from .numkernel import ToleranceSpec, Trajectory, fit_laurent, integrate_ivp
from .outer import U0_LINEAR_COEFF

TAU_SEED_MIN = 10.0
FIT_WINDOW = (0.03, 0.35)       # distances from the pole used by the model fit
DIAG_WINDOW = (0.02, 0.25)      # window for the per-power diagnostic fit
LAURENT_DEPTH = 16


@dataclass(frozen=True)
class PoleFit:
    """Pole data of the layer solution: position, free quartic coefficient,
    fit quality, and the measured per-power coefficient map."""

    tau0: float
    a4: float
    fit_residual: float
    coefficients: dict = field(default_factory=dict)


def seed_coefficients(n_terms: int) -> np.ndarray:
    """Coefficients a_n of the far-field series sum a_n tau^{(1-5n)/2}.

    a_0 = 1/sqrt(3); the rest follow by substituting the series into the
    layer ODE and balancing orders.
    """
    a = np.zeros(n_terms)
    a[0] = 1.0 / np.sqrt(3.0)
    for k in range(1, n_terms):
        e = 0.5 - 2.5 * (k - 1)
        cross = sum(a[n] * a[k - n] for n in range(1, k))
        a[k] = (-e * (e - 1.0) * a[k - 1] - 3.0 * cross) / (6.0 * a[0])
    return a


def pi_seed(tau: float, n_terms: int = 4):
    """(alpha, alpha') of the truncated far-field series at tau >= 10."""
    if tau < TAU_SEED_MIN:
        raise TauTooSmall(f"seed series unreliable below tau={TAU_SEED_MIN}")
    if n_terms < 2:
        raise ValueError("n_terms must be >= 2")
    a = seed_coefficients(n_terms)
    exps = 0.5 - 2.5 * np.arange(n_terms)
    alpha = float(np.sum(a * tau ** exps))
    alpha_p = float(np.sum(a * exps * tau ** (exps - 1.0)))
    return alpha, alpha_p


def layer_ode(tau, y):
    """First-order system for (alpha, alpha')."""
    return np.array([y[1], tau - 3.0 * y[0] ** 2])


def pi_solve_special(tau_start: float = 30.0,
                     tol: ToleranceSpec = ToleranceSpec(1e-12, 1e-13),
                     n_terms: int = 6) -> Trajectory:
    """Integrate the special solution from the series seed down to blowup.

    The terminating blowup event brackets the first real pole.
    """
    if tau_start < TAU_SEED_MIN:
        raise TauTooSmall("tau_start must be >= 10")
    y0 = pi_seed(tau_start, n_terms)
    traj = integrate_ivp(layer_ode, tau_start, tau_start - 80.0, y0, tol)
    return traj


def pole_series_coefficients(tau0: float, a4: float, depth: int = LAURENT_DEPTH) -> dict:
    """Laurent coefficients at the pole, generated recursively from (tau0, a4).

    c_{-2} = -2 and, for k >= 2 with k != 4,
    c_k = (tau0*[k==2] + [k==3] - 3*sum_{m+n=k-2} c_m c_n) / (k(k-1) - 12);
    c_4 = a4 is the free parameter.
    """
    c = {-2: -2.0, -1: 0.0, 0: 0.0, 1: 0.0}
    for k in range(2, depth + 1):
        if k == 4:
            c[4] = a4
            continue
        rhs = (tau0 if k == 2 else 0.0) + (1.0 if k == 3 else 0.0)
        cross = sum(c[m] * c[k - 2 - m] for m in range(2, k - 3))
        c[k] = (rhs - 3.0 * cross) / (k * (k - 1) - 12.0)
    return c


def eval_pole_series(s, tau0: float, a4: float, depth: int = LAURENT_DEPTH):
    c = pole_series_coefficients(tau0, a4, depth)
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    for k, ck in c.items():
        out += ck * s ** k
    return out


def pi_locate_pole(traj: Trajectory, window=FIT_WINDOW, n_samples: int = 600) -> PoleFit:
    """Refine the first pole from the blowup bracket.

    Fits the two-parameter pole family (tau0, a4) to dense samples by least
    squares; the reported coefficient map combines the family values with
    the residual's projection on the generic power basis, so each per-power
    invariant is a measurement of how well the data follows the pole family.
    """
    blow = [e for e in traj.events if e[0] == "blowup"]
    if not blow:
        raise FitFailed("trajectory has no blowup event")
    t_bl = blow[0][1]
    alpha_bl = float(traj.interpolate(t_bl)[0])
    if alpha_bl >= 0:
        raise FitFailed("blowup has the wrong sign for a pole of this family")
    guess = t_bl - np.sqrt(-2.0 / alpha_bl)

    ss = np.geomspace(window[0], window[1], n_samples)

    def resid(p):
        tau0, a4 = p
        return traj.interpolate(tau0 + ss)[0] - eval_pole_series(ss, tau0, a4)

    fit = least_squares(resid, [guess, 0.05], xtol=3e-16, ftol=3e-16, gtol=3e-16)
    tau0, a4 = fit.x
    rms = float(np.sqrt(np.mean(fit.fun ** 2)))
    if not fit.success or rms > 1e-6:
        raise FitFailed(f"pole family fit residual {rms:.2e}")

    # measured per-power coefficients: family values plus the residual's
    # projection on the generic basis over a narrower window
    sd = np.geomspace(DIAG_WINDOW[0], DIAG_WINDOW[1], 400)
    data = traj.interpolate(tau0 + sd)[0]
    model = eval_pole_series(sd, tau0, a4)
    powers = list(range(-2, 5))
    dev, _ = fit_laurent(list(zip(sd, data - model)), 0.0, powers)
    family = pole_series_coefficients(tau0, a4, 8)
    coeffs = {p: family.get(p, 0.0) + dev[p] for p in powers}
    return PoleFit(tau0=float(tau0), a4=float(a4), fit_residual=rms,
                   coefficients=coeffs)


def correction_rhs(traj: Trajectory):
    """Forcing of the linear first-correction equation, from the leading layer.

    v'' + 6*alpha*v = -2*beta^2 - (alpha^3 - tau*alpha)/U* - 2*U**(alpha*beta)'
    with beta = alpha'/(2 U*^2).
    """
    twoU2 = 2.0 * U_STAR ** 2

    def rhs(tau):
        al, alp = traj.interpolate(tau)
        beta = alp / twoU2
        betap = (tau - 3.0 * al * al) / twoU2
        return (-2.0 * beta * beta
                - (al ** 3 - tau * al) / U_STAR
                - 2.0 * U_STAR * (alp * beta + al * betap))
    return rhs


def pi_correction_solve(traj: Trajectory, tau_match: float = 25.0,
                        fit: PoleFit | None = None,
                        tol: ToleranceSpec = ToleranceSpec(1e-11, 1e-12),
                        margin: float = 0.1):
    """Solve the first linear correction from its far-field data to the pole.

    Initial data at tau_match is the one-term asymptotic c*tau with c the
    middle-branch linear coefficient.  Returns (trajectory, content) where
    ``content`` maps pole powers of the correction (fit over powers -4..4).
    """
    if not traj.contains(tau_match):
        raise ValueError("tau_match outside the leading trajectory")
    forcing = correction_rhs(traj)

    def ode(tau, y):
        al = traj.interpolate(tau)[0]
        return np.array([y[1], forcing(tau) - 6.0 * al * y[0]])

    if fit is not None:
        tau0 = fit.tau0
    else:
        blow = [e for e in traj.events if e[0] == "blowup"]
        if not blow:
            raise FitFailed("no pole bracket available")
        t_bl = blow[0][1]
        tau0 = t_bl - np.sqrt(-2.0 / float(traj.interpolate(t_bl)[0]))
    t_stop = tau0 + margin
    y0 = np.array([U0_LINEAR_COEFF * tau_match, U0_LINEAR_COEFF])
    corr = integrate_ivp(ode, tau_match, t_stop, y0, tol,
                         blowup_ceiling=1e12)

    # pole-content fit of the correction over powers -4..4
    ss = np.geomspace(margin * 1.05, 0.6, 300)
    taus = tau0 + ss
    taus = taus[np.array([corr.contains(x) for x in taus])]
    vals = corr.interpolate(taus)[0]
    content, rms = fit_laurent(list(zip(taus - tau0, vals)), 0.0, range(-4, 5))
    return corr, {"content": content, "fit_rms": rms, "pole_used": tau0}


def layer1_eval(t, eps: float, traj: Trajectory, fit: PoleFit,
                safety: float = 1.0):
    """Layer value U* + eps^(2/5) alpha + i eps^(3/5) beta at model time t.

    Valid while tau is inside the trajectory range and
    (tau - tau0) * eps^(-1/5) >= safety.  beta = alpha'/(2 U*^2).
    """
    tau = (np.asarray(t, dtype=float) - T_STAR) * eps ** (-0.8)
    if np.any((tau - fit.tau0) * eps ** (-0.2) < safety):
        raise OutOfLayer("below the burst-side validity boundary")
    if not traj.contains(tau):
        raise OutOfLayer("tau outside the integrated range")
    al, alp = traj.interpolate(tau)
    beta = alp / (2.0 * U_STAR ** 2)
    return U_STAR + eps ** 0.4 * al + 1j * eps ** 0.6 * beta
