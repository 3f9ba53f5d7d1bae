"""Burst layer: the explicit separatrix pulse, its variational pair, the
conservation law, and the regularized jump integrals.

The pulse w0(theta) = -2/(theta - i U*)^2 solves the frozen burst equation;
the linearized equation's decaying solution w1 is analytic, the growing one
w2 is continued numerically from a far-field series seed and canonicalized
by parity symmetrization.  Jump constants are finite parts of pairings of
the forcings with (w1, w2).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np
from scipy.integrate import quad, solve_ivp

from .equilibria import U_STAR
from .errors import OutOfLayer, RegularizationUnstable

A = U_STAR                       # shorthand used throughout this module
WRONSKIAN = -7j / U_STAR ** 2    # w1 conj(w2) - w2 conj(w1), constant

SERIES_SEED_THETA = 40.0
SERIES_LEN_HOMOG = 24
# particular-series depths: the symmetric class stays a clean power series
# to depth >= 16; the antisymmetric one develops log terms below 8 terms
SERIES_LEN_PART = {1: 12, 2: 6}


def sep_leader(theta):
    """Separatrix pulse -2/(theta - i U*)^2."""
    theta = np.asarray(theta, dtype=float)
    return -2.0 / (theta - 1j * A) ** 2


def sep_leader_deriv(theta):
    return 4.0 / (np.asarray(theta, dtype=float) - 1j * A) ** 3


def burst_residual(theta):
    """Residual of the pulse in its defining equation (analytic derivative)."""
    w = sep_leader(theta)
    wp = sep_leader_deriv(theta)
    return (1j * wp + A * (2 * np.abs(w) ** 2 + w * w)
            + A * A * (np.conj(w) - w) + np.abs(w) ** 2 * w)


def sep_conservation(w):
    """Conserved quantity of the burst equation; zero on the pulse."""
    w = np.asarray(w)
    return np.real(A * (np.abs(w) ** 2 * np.conj(w) + np.abs(w) ** 2 * w)
                   + A * A * (0.5 * np.conj(w) ** 2 + 0.5 * w * w - np.abs(w) ** 2)
                   + 0.5 * np.abs(w) ** 4)


def w1(theta):
    """Decaying variational solution (theta - i U*)^{-3} (analytic)."""
    return (np.asarray(theta, dtype=float) - 1j * A) ** (-3.0)


def _lin_B(theta):
    w = sep_leader(theta)
    return 2 * A * (w + np.conj(w)).real - A * A + 2 * np.abs(w) ** 2


def _lin_C(theta):
    return (A + sep_leader(theta)) ** 2


def linearized_residual(v_fn, dv_fn, theta):
    """Residual of v in the homogeneous linearized burst equation."""
    v = v_fn(theta)
    return 1j * dv_fn(theta) + _lin_B(theta) * v + _lin_C(theta) * np.conj(v)


# ---------------------------------------------------------------------------
# far-field series machinery (descending powers of theta, complex coeffs)

def _zinv_series(k: int, n: int) -> dict:
    """(theta - i U*)^{-k} as {power: coeff}."""
    return {-k - m: comb(m + k - 1, k - 1) * (1j * A) ** m for m in range(n)}


def _smul(s1: dict, s2: dict, pmin: int = -30) -> dict:
    out: dict = {}
    for p1, c1 in s1.items():
        for p2, c2 in s2.items():
            p = p1 + p2
            if p >= pmin:
                out[p] = out.get(p, 0.0) + c1 * c2
    return out


def _sadd(*series: dict) -> dict:
    out: dict = {}
    for s in series:
        for p, c in s.items():
            out[p] = out.get(p, 0.0) + c
    return out


def _sscale(s: dict, c) -> dict:
    return {p: v * c for p, v in s.items()}


def _sconj(s: dict) -> dict:
    return {p: np.conj(v) for p, v in s.items()}


def series_eval(series: dict, theta):
    return sum(c * np.asarray(theta, dtype=float) ** p for p, c in series.items())


@lru_cache(maxsize=1)
def _coefficient_series():
    n = 30
    w0s = _sscale(_zinv_series(2, n), -2.0)
    Bs = _sadd(_sscale(_sadd(w0s, _sconj(w0s)), 2 * A), {0: -A * A},
               _sscale(_smul(w0s, _sconj(w0s)), 2.0))
    Cs = _sadd({0: A * A}, _sscale(w0s, 2 * A), _smul(w0s, w0s))
    return w0s, Bs, Cs


def solve_far_series(top_power: int, forcing: dict, parity: str,
                     n_terms: int, pin: dict | None = None):
    """Asymptotic power-series solution of the linearized burst equation.

    parity '+' means the coefficient of theta^p is real for even p and
    imaginary for odd p (symmetric class); '-' swaps the roles.  ``pin``
    hard-constrains stated powers to given values.  Returns (coefficient
    dict, lstsq residual); a residual far above roundoff signals that the
    power ansatz breaks (log terms) at the requested depth.
    """
    _, Bs, Cs = _coefficient_series()
    pows = list(range(top_power, top_power - n_terms, -1))
    idx = {p: i for i, p in enumerate(pows)}

    def unit(p):
        if parity == "+":
            return 1.0 if p % 2 == 0 else 1j
        return 1j if p % 2 == 0 else 1.0

    ms = list(range(top_power, top_power - n_terms - 1, -1))
    n_cons = len(pin) if pin else 0
    M = np.zeros((2 * len(ms) + 2 * n_cons, len(pows)))
    b = np.zeros(M.shape[0])
    for r, m in enumerate(ms):
        row = np.zeros(len(pows), dtype=complex)
        if (m + 1) in idx:
            row[idx[m + 1]] += 1j * (m + 1) * unit(m + 1)
        for pw, Bk in Bs.items():
            q = m - pw
            if q in idx:
                row[idx[q]] += Bk * unit(q)
        for pw, Ck in Cs.items():
            q = m - pw
            if q in idx:
                row[idx[q]] += Ck * np.conj(unit(q))
        rhs = forcing.get(m, 0.0)
        M[2 * r], b[2 * r] = row.real, np.real(rhs)
        M[2 * r + 1], b[2 * r + 1] = row.imag, np.imag(rhs)
    if pin:
        for j, (p, val) in enumerate(pin.items()):
            rr = 2 * len(ms) + 2 * j
            M[rr, idx[p]] = np.real(unit(p))
            M[rr + 1, idx[p]] = np.imag(unit(p))
            b[rr], b[rr + 1] = np.real(val), np.imag(val)
    d, *_ = np.linalg.lstsq(M, b, rcond=None)
    resid = float(np.linalg.norm(M @ d - b))
    series = {p: d[idx[p]] * unit(p) for p in pows}
    return series, resid


@lru_cache(maxsize=4)
def w2_far_series(n_terms: int = SERIES_LEN_HOMOG) -> tuple:
    """Far-field series of the growing variational solution, leading theta^4."""
    series, resid = solve_far_series(4, {}, "+", n_terms, pin={4: 1.0 + 0j})
    if resid > 1e-8:
        raise RuntimeError(f"w2 far-field series inconsistent (resid {resid:.1e})")
    return tuple(sorted(series.items()))


def forcing_series(n: int, tau0: float) -> dict:
    """Far-field series of the n-th correction forcing (n = 1 or 2)."""
    w0s, _, _ = _coefficient_series()
    base = _sadd({0: A}, w0s)
    if n == 1:
        return _sscale(base, tau0)
    if n == 2:
        return _smul({1: 1.0}, base)
    raise ValueError("only forcings n=1 and n=2 are evaluated")


def forcing_fn(n: int, tau0: float):
    if n == 1:
        return lambda th: tau0 * (A + sep_leader(th))
    if n == 2:
        return lambda th: np.asarray(th, dtype=float) * (A + sep_leader(th))
    raise ValueError("only forcings n=1 and n=2 are evaluated")


def correction_far_series(n: int, tau0: float) -> dict:
    """Far-field series of the particular correction (no theta^4 content)."""
    top = 2 if n == 1 else 3
    parity = "+" if n == 1 else "-"
    series, resid = solve_far_series(top, forcing_series(n, tau0), parity,
                                     SERIES_LEN_PART[n])
    if resid > 1e-9 * max(1.0, abs(tau0)):
        raise RuntimeError(f"correction series inconsistent (resid {resid:.1e})")
    return series


# ---------------------------------------------------------------------------
# numeric continuation through the burst

def _continue(seed_series: dict, forcing, th_from: float, th_to: float,
              rtol: float = 1e-12):
    def rhs(th, z):
        v = z[0] + 1j * z[1]
        F = forcing(th) if forcing is not None else 0.0
        d = -1j * (F - _lin_B(th) * v - _lin_C(th) * np.conj(v))
        return [d.real, d.imag]

    v0 = complex(series_eval(seed_series, th_from))
    sol = solve_ivp(rhs, (th_from, th_to), [v0.real, v0.imag], method="DOP853",
                    rtol=rtol, atol=1e-13, dense_output=True)
    if sol.status != 0:
        raise RuntimeError(f"continuation failed: {sol.message}")
    return sol


@lru_cache(maxsize=2)
def _w2_solution(theta_max: float = 250.0, rtol: float = 1e-12):
    """Continue w2 from the far-field seed through the burst, both sides.

    The result is parity-symmetrized, which removes any decaying-solution
    admixture introduced by seed truncation.
    """
    seed = dict(w2_far_series())
    right = _continue(seed, None, SERIES_SEED_THETA, 0.0, rtol)
    left = _continue(seed, None, -SERIES_SEED_THETA, 0.0, rtol)
    # outward tails beyond the seed are served by the series itself
    sol_r = _continue(seed, None, SERIES_SEED_THETA, theta_max, rtol)
    sol_l = _continue(seed, None, -SERIES_SEED_THETA, -theta_max, rtol)

    def raw(th):
        th = float(th)
        if th > SERIES_SEED_THETA:
            z = sol_r.sol(th)
        elif th >= 0.0:
            z = right.sol(th)
        elif th >= -SERIES_SEED_THETA:
            z = left.sol(th)
        else:
            z = sol_l.sol(th)
        return z[0] + 1j * z[1]

    def value(th):
        # parity symmetrization: even class under v -> conj(v(-theta))
        return 0.5 * (raw(th) + np.conj(raw(-th)))
    return value


def w2(theta):
    """Growing variational solution, theta^4-normalized, both sides."""
    fn = _w2_solution()
    if np.isscalar(theta) or np.asarray(theta).ndim == 0:
        return fn(float(theta))
    return np.array([fn(float(t)) for t in np.asarray(theta)])


def sep_homogeneous(theta):
    """(w1, w2) at theta; their pairing w1 conj(w2) - w2 conj(w1) is constant."""
    return w1(theta), w2(theta)


def wronskian(theta):
    v1, v2 = sep_homogeneous(theta)
    return v1 * np.conj(v2) - v2 * np.conj(v1)


# ---------------------------------------------------------------------------
# jump integrals

@dataclass(frozen=True)
class JumpPair:
    n: int
    X: float
    Y: float
    X_finite_part: float = np.nan   # integral-prescription values (diagnostic)
    Y_finite_part: float = np.nan
    X_raw: float = np.nan           # pre-recentring fit value (diagnostic)
    fit_rms: float = np.nan


SUBTRACTION_SWITCH = 25.0   # |theta| beyond which the series serves the remainder


def _finite_part_integral(g, g_series: dict, r_values=(50.0, 100.0, 200.0),
                          tol: float = 1e-10):
    """Finite part of int_{-r}^{r} g dtheta via analytic tail subtraction.

    The divergent part (powers >= 0 of the far-field series of g) is removed
    inside the integrand.  Below the switch radius the remainder is
    numeric-minus-polynomial; beyond it the remainder is evaluated from the
    decaying series part directly, avoiding catastrophic cancellation against
    the theta^4-scale growth.  The constant is extracted by the
    {1, 1/r, 1/r^2} fit over the r cutoffs, which exposes residual drift.
    """
    grow = {p: c for p, c in g_series.items() if p >= 0}
    decay = {p: c for p, c in g_series.items() if p < 0}

    def tail(th):
        return np.real(sum(c * th ** p for p, c in grow.items())) if grow else 0.0

    def reg(th):
        if abs(th) >= SUBTRACTION_SWITCH:
            return np.real(series_eval(decay, th)) if decay else 0.0
        return np.real(g(th)) - tail(th)

    vals = []
    prev = 0.0
    for r in sorted(r_values):
        pieces = [(prev, min(r, SUBTRACTION_SWITCH)),
                  (max(prev, SUBTRACTION_SWITCH), r)]
        seg = 0.0
        for a, b in pieces:
            if b <= a:
                continue
            sp, _ = quad(lambda x: reg(x), a, b, epsabs=tol, epsrel=tol, limit=300)
            sm, _ = quad(lambda x: reg(-x), a, b, epsabs=tol, epsrel=tol, limit=300)
            seg += sp + sm
        vals.append(seg + (vals[-1] if vals else 0.0))
        prev = r
    rs = np.asarray(sorted(r_values), dtype=float)
    vals = np.asarray(vals)
    Mfit = np.vstack([np.ones_like(rs), 1.0 / rs, 1.0 / rs ** 2]).T
    co, *_ = np.linalg.lstsq(Mfit, vals, rcond=None)
    # two-point extraction from the largest cutoff pair, as a stability probe
    M2 = np.vstack([np.ones(2), 1.0 / rs[-2:]]).T
    co2, *_ = np.linalg.lstsq(M2, vals[-2:], rcond=None)
    return float(co[0]), float(abs(co[0] - co2[0]))


def jump_integrals(n: int, tau0: float,
                   r_values=(50.0, 100.0, 200.0)) -> JumpPair:
    """Jump constants (X, Y) generated across the burst by forcing n.

    The authoritative values are the measured far-side coefficients of
    (w1, w2) from continuing the forced correction through the burst.
    The regularized pairing integrals (forcing against w1 for Y, against
    w2 for X, finite parts by the cutoff fit) are evaluated alongside: the
    Y route reproduces the continuation to ~1e-7 and serves as the
    stability probe (RegularizationUnstable if its extracted constant
    moves more than 1e-4 between cutoff fits); the X route carries a
    documented O(1e-3) bias from couplings outside the (w1, w2) pair and
    is reported as a diagnostic only.
    """
    if n not in (1, 2):
        raise ValueError("forcings n=1 and n=2 only")
    F = forcing_fn(n, tau0)
    Fs = forcing_series(n, tau0)
    w2s = dict(w2_far_series())
    w1s = _zinv_series(3, 26)

    def integrand(weight_fn):
        def g(th):
            Fv = F(th)
            wv = weight_fn(th)
            return np.real(1j * (Fv * np.conj(wv) + np.conj(Fv) * wv) / WRONSKIAN)
        return g

    def pair_series(ws):
        both = _sadd(_smul(Fs, _sconj(ws)), _sconj(_smul(Fs, _sconj(ws))))
        return _sscale(both, 1j / WRONSKIAN)

    valY, sprY = _finite_part_integral(integrand(w1), pair_series(w1s), r_values)
    valX, sprX = _finite_part_integral(integrand(w2), pair_series(w2s), r_values)
    if sprY > 1e-4:
        raise RegularizationUnstable(
            f"finite part drifts across cutoffs: Y {sprY:.2e}")

    X_dir, Y_dir, rms = direct_jump_measurement(n, tau0)
    # In the antisymmetric class the decaying-solution content is exactly
    # the normalization recentring absorbs (a burst-center shift), so the
    # post-recentring X vanishes there by convention; elsewhere the measured
    # coefficient is normalization-free.
    if n == 2:
        X_val, X_raw = 0.0, X_dir
    else:
        X_val, X_raw = X_dir, X_dir
    return JumpPair(n=n, X=float(X_val), Y=float(Y_dir),
                    X_finite_part=float(valX), Y_finite_part=float(-valY),
                    X_raw=float(X_raw), fit_rms=rms)


def direct_jump_measurement(n: int, tau0: float, theta_s: float = SERIES_SEED_THETA,
                            fit_range=(-40.0, -26.0), rtol: float = 1e-12):
    """Convention-free oracle: continue the n-th correction through the burst
    and fit its (w1, w2) content on the far side.

    Returns (X, Y, fit_rms).  Independent of the finite-part prescription;
    used to pin the jump_integrals orientation and magnitude.
    """
    seed = correction_far_series(n, tau0)
    F = forcing_fn(n, tau0)
    sol = _continue(seed, F, theta_s, fit_range[0], rtol)
    ths = np.linspace(fit_range[0], fit_range[1], 141)
    vals = np.array([sol.sol(t)[0] + 1j * sol.sol(t)[1] for t in ths])
    pred = series_eval(seed, ths)
    w2s = dict(w2_far_series())
    Mc = np.array([[w1(t), series_eval(w2s, t)] for t in ths])
    M = np.concatenate([Mc.real, Mc.imag])
    rhs = np.concatenate([(vals - pred).real, (vals - pred).imag])
    co, *_ = np.linalg.lstsq(M, rhs, rcond=None)
    rms = float(np.sqrt(np.mean((M @ co - rhs) ** 2)))
    return float(co[0]), float(co[1]), rms


# ---------------------------------------------------------------------------
# layer evaluation

CORRECTION_FLOOR = 5.0   # |theta| below which the far-field segments are dropped


def layer2_eval(theta, eps: float, tau0: float, widen: float = 16.0):
    """Burst-layer value with first and second correction segments.

    U* + w0 + eps^{4/5} w1c + eps * (w2c + [theta<0] * Y2 * w2), where the
    trailing term is the homogeneous content generated by the passage
    (present only on the theta -> -inf side).  The correction segments are
    far-field truncations; below |theta| = CORRECTION_FLOOR they are dropped
    and only the pulse remains.  The strict scaling window is
    (-eps^{-1/5}, eps^{-1/10}); ``widen`` multiplies it, the default
    admitting the overlap region where this expansion reorganizes into the
    onset layer (at desk-scale eps the literal upper bound is smaller than
    the overlap abscissas).
    """
    theta = np.asarray(theta, dtype=float)
    lo = -(eps ** -0.2) * widen
    hi = (eps ** -0.1) * widen
    if np.any(theta <= lo) or np.any(theta >= hi):
        raise OutOfLayer("theta outside the burst window")
    val = U_STAR + sep_leader(theta)
    far = np.abs(theta) >= CORRECTION_FLOOR
    if np.any(far):
        thf = theta[far] if theta.ndim else theta
        w1c = series_eval(correction_far_series(1, tau0), thf)
        w2c = series_eval(correction_far_series(2, tau0), thf)
        _, y2, _ = _cached_jump2(tau0)
        hom = np.where(thf < 0, y2 * w2(thf), 0.0)
        add = eps ** 0.8 * w1c + eps * (w2c + hom)
        if theta.ndim:
            val = np.asarray(val, dtype=complex)
            val[far] += add
        else:
            val = val + add
    return val


@lru_cache(maxsize=4)
def _cached_jump2(tau0: float):
    return direct_jump_measurement(2, tau0)
