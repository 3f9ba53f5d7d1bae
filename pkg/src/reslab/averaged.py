"""Fast-oscillating two-phase solution below the bifurcation.

Closed orbit curves of the frozen first integral, the loop action (two
independent routes), the constant-action energy branch E(t), the period
constraint fixing S(t), the phase-shift law, the leading periodic orbit,
and the degeneration scalings at the approach to t*.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid, quad, solve_ivp
from scipy.optimize import brentq

from .equilibria import E_STAR, T_STAR, U_STAR, frozen_energy, frozen_rhs
from .errors import (
    BranchTrackingFailed,
    NeitherVariantConsistent,
    NoBracket,
    NoClosedComponent,
    WrongRootPattern,
)
from .numkernel import poly_roots

DEFAULT_T_PERIOD = 1.0
FD_STEP = 1.0e-6                 # central-difference step scale in E


@dataclass(frozen=True)
class OrbitCurve:
    t: float
    E: float
    points: np.ndarray           # closed complex loop, >= 512 samples


@dataclass(frozen=True)
class QuarticRoots:
    x_minus: float
    x_plus: float
    m: float
    n: float


@dataclass(frozen=True)
class AveragedState:
    t: float
    E: float
    S: float
    phi: float
    sigma: float
    T_period: float


@dataclass(frozen=True)
class DegenerationScales:
    mu: float
    delta: float
    K: complex
    S_prime: float


def center_value(t: float) -> float:
    """Real equilibrium the closed orbits encircle (largest real root)."""
    roots = poly_roots([1.0, 0.0, -t, -1.0], kind="real-only", real_tol=1e-7)
    return max(r for r, _ in roots)


def center_energy(t: float) -> float:
    c = center_value(t)
    return float(frozen_energy(c + 0j, t))


def gamma_curve(t: float, E: float, n: int = 512) -> OrbitCurve:
    """Closed level curve of the frozen energy at (t, E).

    Angular march around the enclosed center with radial root solves; the
    loops of interest are star-shaped about it.  Raises NoClosedComponent
    when the level has no bounded loop around the center.
    """
    c = center_value(t)
    E0 = center_energy(t)
    if E <= E0:
        raise NoClosedComponent(f"E={E} at or below the center energy {E0}")
    pts = np.empty(n + 1, dtype=complex)
    r_prev = None
    for i, phi in enumerate(np.linspace(0.0, 2 * np.pi, n, endpoint=False)):
        d = np.exp(1j * phi)

        def g(r):
            return float(frozen_energy(c + r * d, t) - E)

        # radii vary slowly with angle; reuse the neighbor as a bracket hint
        r_hi = 2.0 * r_prev if r_prev else 0.1
        while g(r_hi) < 0:
            r_hi *= 1.2
            if r_hi > 1e4:
                raise NoClosedComponent("no level crossing along a ray")
        r_prev = brentq(g, 0.0, r_hi, xtol=1e-14, rtol=8.9e-16)
        pts[i] = c + r_prev * d
    pts[n] = pts[0]
    return OrbitCurve(t=t, E=E, points=pts)


def quartic_roots(t: float, E: float) -> QuarticRoots:
    """Factorization data of x^4 - 2t x^2 - 4x - 2E (two real + one pair)."""
    rts = np.roots([1.0, 0.0, -2.0 * t, -4.0, -2.0 * E])
    real = np.sort(rts[np.abs(rts.imag) < 1e-7 * np.maximum(1.0, np.abs(rts))].real)
    cplx = rts[np.abs(rts.imag) >= 1e-7 * np.maximum(1.0, np.abs(rts))]
    if len(real) != 2 or len(cplx) != 2:
        raise WrongRootPattern(f"{len(real)} real roots at (t={t}, E={E})")
    m = float(np.mean(cplx.real))
    nn = float(abs(cplx[0].imag))
    return QuarticRoots(x_minus=float(real[0]), x_plus=float(real[1]), m=m, n=nn)


def vieta_residuals(t: float, E: float, q: QuarticRoots) -> np.ndarray:
    """Residuals of the four symmetric-function relations."""
    xm, xp, m, n = q.x_minus, q.x_plus, q.m, q.n
    mn = m * m + n * n
    return np.array([
        xm + xp + 2 * m,
        mn + xm * xp + 2 * m * (xm + xp) + 2 * t,
        -(xm + xp) * mn - 2 * m * xm * xp + 4.0,
        xm * xp * mn + 2 * E,
    ])


# ---------------------------------------------------------------------------
# action: contour route and radical-segment route

def action_contour(curve: OrbitCurve) -> float:
    """Loop action i * closed-integral of conj(u) du (orientation-normalized
    positive; equals the doubled enclosed area).

    For the equiangular samples produced by gamma_curve the doubled area is
    the periodic trapezoid of r^2 around the marching center, which
    converges spectrally for smooth loops.
    """
    c = center_value(curve.t)
    r2 = np.abs(curve.points[:-1] - c) ** 2
    return float(2.0 * np.pi * np.mean(r2))


def _segment_eta(t, E, s):
    def inner(x):
        return np.sqrt(max(t * t + 2 * E + 4 * x, 0.0))

    def eta(x):
        return np.sqrt(max(t - x * x + s * inner(x), 0.0))
    return eta


def action_segments(t: float, E: float, tol: float = 1e-12) -> float:
    """Radical-segment route to the same action.

    The loop area decomposes into two real integrals between the quartic
    turning points and the branch-join abscissa; the doubled area equals
    four times their difference.
    """
    q = quartic_roots(t, E)
    xl = -(t * t + 2 * E) / 4.0
    eta_p = _segment_eta(t, E, +1)
    eta_m = _segment_eta(t, E, -1)
    I1, _ = quad(eta_p, xl, q.x_plus, epsabs=tol, epsrel=tol, limit=400)
    I2, _ = quad(eta_m, xl, q.x_minus, epsabs=tol, epsrel=tol, limit=400)
    return float(4.0 * (I1 - I2))


def action_I(t: float, E: float, n: int = 2048, check_tol: float = 1e-6):
    """Loop action by both routes; they must agree within check_tol.

    Returns (value, contour_value, segment_value); ``value`` is the
    segment-route number (the better conditioned of the two).
    """
    seg = action_segments(t, E)
    con = action_contour(gamma_curve(t, E, n))
    if abs(seg - con) > check_tol * max(1.0, abs(seg)):
        raise BranchTrackingFailed(
            f"action routes disagree: contour {con}, segments {seg}")
    return seg, con, seg


def sigma_star(n: int = 4096) -> float:
    """Action of the corner loop (the confluent modulation constant)."""
    return action_segments(T_STAR, E_STAR)


def solve_E_of_t(t: float, sigma: float, tol: float = 1e-12) -> float:
    """E with action(t, E) = sigma by a bracketed root solve (t < t*)."""
    E_lo = center_energy(t) + 1e-12

    def f(E):
        return action_segments(t, E) - sigma

    f_lo = f(E_lo)
    if f_lo > 0:
        raise NoBracket("sigma below the attainable range")
    E_hi = E_lo + 0.5
    for _ in range(60):
        if f(E_hi) > 0:
            break
        E_hi += 0.5
    else:
        raise NoBracket("sigma above the attainable range")
    return float(brentq(f, E_lo, E_hi, xtol=tol, rtol=8.9e-16))


# ---------------------------------------------------------------------------
# period integral and the leading orbit

RADICAND_VARIANTS = (2.0, 3.0)


def _radicand_coeffs(t: float, E: float, lead: float):
    return np.array([lead, 2.0 * E + t * t, 2.0 * t, 1.0])


def period_integral_K(t: float, E: float, lead: float = 2.0, n: int = 4000) -> complex:
    """Loop integral of dy / sqrt(lead*y^3 + (2E+t^2) y^2 + 2t y + 1).

    The square-root branch is continued along the upper half of the orbit
    by cumulative phase unwrapping; the closed integral is then
    upper-half minus its conjugate (purely imaginary for this curve).
    """
    q = quartic_roots(t, E)
    xl = -(t * t + 2 * E) / 4.0
    eta_p = _segment_eta(t, E, +1)
    eta_m = _segment_eta(t, E, -1)

    def seg_pts(xa, xb, eta, m):
        u = np.linspace(0.0, 1.0, m)
        xs = xa + (xb - xa) * np.sin(u * np.pi / 2) ** 2
        return np.array([x + 1j * eta(x) for x in xs])

    pts = np.concatenate([seg_pts(q.x_minus, xl, eta_m, n),
                          seg_pts(xl, q.x_plus, eta_p, n)[1:]])
    P = np.polyval(_radicand_coeffs(t, E, lead), pts)
    if np.any(P == 0):
        raise BranchTrackingFailed("radicand vanishes on the sampled path")
    phase = np.unwrap(np.angle(P))
    root = np.sqrt(np.abs(P)) * np.exp(0.5j * phase)
    f = 1.0 / root
    K_half = np.sum(0.5 * (f[1:] + f[:-1]) * np.diff(pts))
    K = K_half - np.conj(K_half)
    if abs(K.real) > 1e-8 * abs(K):
        raise BranchTrackingFailed("closed period integral not imaginary")
    return complex(K)


def s_prime(t: float, E: float, T_period: float = DEFAULT_T_PERIOD,
            lead: float = 2.0) -> float:
    """Slow phase speed defined by i S' K = T (orientation with S' > 0)."""
    K = period_integral_K(t, E, lead)
    sp = (T_period / (1j * K)).real
    return float(abs(sp))


def leader_orbit(t: float, E: float, T_period: float = DEFAULT_T_PERIOD,
                 lead: float = 2.0, rtol: float = 1e-11):
    """Integrate the leading periodic orbit over one fast period.

    i S' dU/dt1 = +sqrt(radicand(U)) from the left real turning point; the
    square root rides along as a state variable so no branch choices are
    made mid-flight.  Returns (dense solution, S', closure error).
    """
    Sp = s_prime(t, E, T_period, lead)
    q = quartic_roots(t, E)
    coeffs = _radicand_coeffs(t, E, lead)
    dcoeffs = np.polyder(coeffs)
    s0 = np.sqrt(complex(np.polyval(coeffs, q.x_minus)))

    def rhs(t1, z):
        U = z[0] + 1j * z[1]
        s = z[2] + 1j * z[3]
        dU = s / (1j * Sp)
        ds = np.polyval(dcoeffs, U) * dU / (2.0 * s)
        return [dU.real, dU.imag, ds.real, ds.imag]

    sol = solve_ivp(rhs, (0.0, T_period), [q.x_minus, 0.0, s0.real, s0.imag],
                    method="DOP853", rtol=rtol, atol=1e-12, dense_output=True)
    if sol.status != 0:
        raise BranchTrackingFailed(f"orbit integration failed: {sol.message}")
    zT = sol.sol(T_period)
    closure = float(abs(zT[0] + 1j * zT[1] - q.x_minus))
    return sol, Sp, closure


def orbit_level_error(t: float, E: float, sol, n: int = 400,
                      T_period: float = DEFAULT_T_PERIOD) -> float:
    """Sup of the level-residual distance |F(U) - E| / |grad F| over the orbit."""
    t1s = np.linspace(0.0, 1.0, n) * T_period
    z = sol.sol(t1s)
    U = z[0] + 1j * z[1]
    F = frozen_energy(U, t)
    # grad of the level function in the plane
    x, y = U.real, U.imag
    r2 = x * x + y * y
    gx = 2.0 * r2 * x - 2.0 * t * x - 2.0
    gy = 2.0 * r2 * y - 2.0 * t * y
    grad = np.hypot(gx, gy)
    if not np.all(np.isfinite(F)):
        return np.inf
    return float(np.max(np.abs(F - E) / np.maximum(grad, 1e-9)))


def radicand_select(t: float, E: float, T_period: float = DEFAULT_T_PERIOD) -> dict:
    """Decide which cubic leading coefficient reproduces the frozen orbit.

    Both variants are integrated for one fast period; the accepted one must
    stay on the frozen level set within 1e-6 (level-residual distance) and
    the rejected one must exceed 1e-2.  The record keeps both residuals.
    """
    record = {}
    for lead in RADICAND_VARIANTS:
        try:
            sol, Sp, closure = leader_orbit(t, E, T_period, lead)
            err = orbit_level_error(t, E, sol, T_period=T_period)
            record[lead] = {"level_error": err, "closure": closure, "S_prime": Sp}
        except Exception as exc:  # noqa: BLE001 - divergence is an expected outcome
            record[lead] = {"level_error": np.inf, "closure": np.inf,
                            "failure": str(exc)}
    good = [v for v in RADICAND_VARIANTS if record[v]["level_error"] < 1e-6]
    bad = [v for v in RADICAND_VARIANTS if record[v]["level_error"] > 1e-2]
    if len(good) != 1 or len(bad) != 1:
        raise NeitherVariantConsistent(str(record))
    record["selected"] = good[0]
    return record


# ---------------------------------------------------------------------------
# modulation tables and evaluation

@dataclass
class ModulationTable:
    """Slow-state tables on a grid regularized by v = (t* - t)^(1/4).

    Built once per run; all columns are read-only after construction.
    """

    sigma: float
    T_period: float
    t: np.ndarray
    E: np.ndarray
    S_prime: np.ndarray
    S: np.ndarray
    K_abs: np.ndarray
    dE_I: np.ndarray
    dE_Sprime: np.ndarray
    dE_S: np.ndarray
    meta: dict = field(default_factory=dict)

    def state(self, t: float, phi: float = 0.0) -> AveragedState:
        E = float(np.interp(t, self.t, self.E))
        S = float(np.interp(t, self.t, self.S))
        return AveragedState(t=t, E=E, S=S, phi=phi, sigma=self.sigma,
                             T_period=self.T_period)


def build_modulation_table(eps_collar: float = 0.0, t_min: float = T_STAR - 0.5,
                           n: int = 120, sigma: float | None = None,
                           T_period: float = DEFAULT_T_PERIOD) -> ModulationTable:
    """Tabulate E, S', S, |K| and the E-derivatives on t in [t_min, t*).

    The grid is uniform in v = (t* - t)^(1/4), which regularizes every
    singular column; cumulative integrals (S and dE_S) are trapezoids in v.
    The collar [t* - eps_collar, t*) can be excluded.
    """
    if sigma is None:
        sigma = sigma_star()
    v_max = (T_STAR - t_min) ** 0.25
    v_min = max((max(eps_collar, 1e-7)) ** 0.25, 0.02)
    vg = np.linspace(v_min, v_max, n)
    tg = T_STAR - vg ** 4

    E = np.array([solve_E_of_t(t, sigma) for t in tg])
    Sp = np.empty(n)
    Ka = np.empty(n)
    dI = np.empty(n)
    dSp = np.empty(n)
    for i, (t, Ev) in enumerate(zip(tg, E)):
        K = period_integral_K(t, Ev)
        Ka[i] = abs(K.imag)
        Sp[i] = abs((T_period / (1j * K)).real)
        h = FD_STEP * max(1.0, abs(Ev))
        dI[i] = (action_segments(t, Ev + h) - action_segments(t, Ev - h)) / (2 * h)
        sp_p = abs((T_period / (1j * period_integral_K(t, Ev + h))).real)
        sp_m = abs((T_period / (1j * period_integral_K(t, Ev - h))).real)
        dSp[i] = (sp_p - sp_m) / (2 * h)

    # cumulative integrals from t* downward: dt = -4 v^3 dv; the [0, v_min]
    # tails use the limiting integrand values (both integrands stay finite)
    Sg = -(cumulative_trapezoid(Sp * 4 * vg ** 3, vg, initial=0.0)
           + Sp[0] * vg[0] ** 4)
    dES = -(cumulative_trapezoid(dSp * 4 * vg ** 3, vg, initial=0.0)
            + dSp[0] * 4 * vg[0] ** 4)

    # ascending-t order for interpolation
    o = np.argsort(tg)
    return ModulationTable(
        sigma=float(sigma), T_period=T_period,
        t=tg[o], E=E[o], S_prime=Sp[o], S=Sg[o], K_abs=Ka[o],
        dE_I=dI[o], dE_Sprime=dSp[o], dE_S=dES[o],
        meta={"v_grid": vg, "n": n},
    )


def phase_phi(t_grid, phi0: float, phi1: float, table: ModulationTable):
    """Integrate phi' = phi1 * dE_S / dE_I with phi(t*) = phi0.

    The grid must be ascending and inside the table's range.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    dES = np.interp(t_grid, table.t, table.dE_S)
    dEI = np.interp(t_grid, table.t, table.dE_I)
    rate = phi1 * dES / dEI
    # phi(t) = phi0 - int_t^{t_top} rate ds, accumulated from the t* end
    acc = cumulative_trapezoid(rate[::-1], -t_grid[::-1], initial=0.0)[::-1]
    return phi0 - acc


def averaged_eval(t: float, eps: float, phi0: float, phi1: float,
                  table: ModulationTable, safety: float = 1.0,
                  lead: float = 2.0) -> complex:
    """Two-phase value at model time t on the constant-action branch.

    The leading orbit at the slow state (E(t), S(t)) evaluated at fast
    phase t1 = S(t)/eps + phi(t), with t1 wrapped into one period.
    Requires (t* - t) * eps^{-2/3} >= safety.
    """
    from .errors import OutOfLayer
    if (T_STAR - t) * eps ** (-2.0 / 3.0) < safety:
        raise OutOfLayer("inside the collar around t*")
    st = table.state(t)
    phi = float(phase_phi(np.array([t]), phi0, phi1, table)[0])
    t1 = st.S / eps + phi
    t1_wrapped = t1 % table.T_period
    sol, _, _ = leader_orbit(t, st.E, table.T_period, lead)
    z = sol.sol(t1_wrapped)
    return complex(z[0] + 1j * z[1])


def degeneration_scales(mu: float, sigma: float | None = None,
                        T_period: float = DEFAULT_T_PERIOD) -> DegenerationScales:
    """Measured degeneration data at t = t* + mu (mu < 0)."""
    if mu >= 0:
        raise ValueError("mu must be negative")
    if sigma is None:
        sigma = sigma_star()
    t = T_STAR + mu
    E = solve_E_of_t(t, sigma)
    K = period_integral_K(t, E)
    return DegenerationScales(mu=mu, delta=E - E_STAR, K=K,
                              S_prime=abs((T_period / (1j * K)).real))
