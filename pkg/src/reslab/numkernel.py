"""Shared numerical kernel.

Adaptive complex ODE integration with dense output and blowup detection,
adaptive quadrature (endpoint singularities and semi-infinite limits),
polynomial root finding with multiplicity clustering, and local
Laurent-coefficient least squares.  Every other module builds on these.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad, solve_ivp

from .errors import (
    DegenerateInput,
    IllConditioned,
    NoConvergence,
    NonFiniteField,
    StepUnderflow,
)

BLOWUP_CEILING = 1.0e6          # |y| ceiling that terminates integration
ROOT_CLUSTER_RTOL = 1.0e-8      # relative tolerance for multiple-root detection
CONDITION_BOUND = 1.0e12        # fit_laurent design-matrix condition bound


@dataclass(frozen=True)
class ToleranceSpec:
    """Integration tolerances and step bounds."""

    rel: float = 1.0e-10
    abs: float = 1.0e-12
    max_step: float = np.inf
    min_step: float = 0.0

    def __post_init__(self):
        if self.rel <= 0 or self.abs <= 0:
            raise ValueError("tolerances must be positive")
        if self.min_step > self.max_step:
            raise ValueError("min_step must not exceed max_step")

    def refined(self, factor: float) -> "ToleranceSpec":
        return ToleranceSpec(self.rel * factor, self.abs * factor,
                             self.max_step, self.min_step)


@dataclass
class Trajectory:
    """Densely sampled solution path with event records.

    ``ts`` is strictly monotone in the recorded ``direction`` (+1 forward,
    -1 backward); ``ys`` has one row per state component.  ``interpolate``
    evaluates the integrator's dense output inside the sample range.
    """

    ts: np.ndarray
    ys: np.ndarray
    direction: int
    meta: dict = field(default_factory=dict)
    events: list = field(default_factory=list)
    _dense: object = None

    @property
    def t_start(self) -> float:
        return float(self.ts[0])

    @property
    def t_end(self) -> float:
        return float(self.ts[-1])

    def contains(self, t) -> bool:
        lo, hi = sorted((self.t_start, self.t_end))
        return np.all((lo <= np.asarray(t)) & (np.asarray(t) <= hi))

    def interpolate(self, t):
        if self._dense is None:
            raise ValueError("trajectory has no dense output")
        return self._dense(t)

    def validate(self) -> None:
        dt = np.diff(self.ts) * self.direction
        if not np.all(dt > 0):
            raise ValueError("sample times not strictly monotone")
        for kind, t, _ in self.events:
            if not self.contains(t):
                raise ValueError(f"event {kind!r} at t={t} outside sample range")


def integrate_ivp(field_fn, t0: float, t1: float, y0, tol: ToleranceSpec = ToleranceSpec(),
                  blowup_ceiling: float = BLOWUP_CEILING, events=None,
                  first_step: float | None = None) -> Trajectory:
    """Integrate y' = field_fn(t, y) from t0 to t1 (either direction).

    Terminates early with a ``blowup`` event when max|y_i| crosses
    ``blowup_ceiling``.  Raises StepUnderflow if the solver stalls and
    NonFiniteField if the field returns non-finite values at a sane state
    (non-finite values at wildly overshooting trial states are handed back
    to the step controller, which rejects the step).
    """
    if t0 == t1:
        raise ValueError("t0 and t1 must differ")
    y0 = np.atleast_1d(np.asarray(y0))

    def wrapped(t, y):
        with np.errstate(over="ignore", invalid="ignore"):
            f = np.atleast_1d(np.asarray(field_fn(t, y)))
        if not np.all(np.isfinite(f)):
            if np.all(np.isfinite(y)) and np.max(np.abs(y)) <= 10 * blowup_ceiling:
                raise NonFiniteField(f"field non-finite at t={t}")
            return np.full_like(f, np.nan)
        return f

    f0 = wrapped(t0, y0)
    if f0.shape != y0.shape:
        raise ValueError("field shape does not match state shape")

    def blowup(t, y):
        return np.max(np.abs(y)) - blowup_ceiling
    blowup.terminal = True

    ev = [blowup] + (list(events) if events else [])
    sol = solve_ivp(wrapped, (t0, t1), y0, method="DOP853",
                    rtol=tol.rel, atol=tol.abs, max_step=tol.max_step,
                    first_step=first_step, dense_output=True, events=ev)
    if sol.status == -1:
        raise StepUnderflow(sol.message)

    traj = Trajectory(
        ts=sol.t, ys=sol.y, direction=1 if t1 > t0 else -1,
        meta={"nfev": sol.nfev, "status": sol.status, "message": sol.message,
              "n_steps": len(sol.t) - 1},
        _dense=sol.sol,
    )
    if sol.status == 1 and len(sol.t_events[0]):
        t_ev = float(sol.t_events[0][0])
        traj.events.append(("blowup", t_ev, {"ceiling": blowup_ceiling}))
    for k, t_arr in enumerate(sol.t_events[1:], start=1):
        for t_ev in t_arr:
            traj.events.append((f"event{k}", float(t_ev), {}))
    if tol.min_step > 0 and len(sol.t) > 1:
        if np.min(np.abs(np.diff(sol.t))) < tol.min_step:
            raise StepUnderflow(f"step below min_step={tol.min_step}")
    traj.validate()
    return traj


def adaptive_quad(f, a: float, b: float, tol: float = 1.0e-10):
    """Integrate f over (a, b); b may be +inf.

    Supports integrable endpoint singularities up to |x-a|^{-1/2}.  Complex
    integrands are split into real and imaginary parts.  The result satisfies
    |result - true| <= tol * (1 + |result|) barring a NoConvergence error.
    """
    probe = f(0.5 * (a + min(b, a + 1.0)))
    is_complex = np.iscomplexobj(probe)

    def _quad(g):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            try:
                val, err = quad(g, a, b, epsabs=tol, epsrel=tol, limit=400)
            except Warning as w:
                # retry once without warnings-as-errors to get the estimate
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    val, err = quad(g, a, b, epsabs=tol, epsrel=tol, limit=400)
                if err > 10 * tol * (1 + abs(val)):
                    raise NoConvergence(str(w)) from None
        if not np.isfinite(val):
            raise NoConvergence("quadrature returned non-finite value")
        return val

    if is_complex:
        return _quad(lambda x: np.real(f(x))) + 1j * _quad(lambda x: np.imag(f(x)))
    return _quad(f)


def poly_roots(coeffs, kind: str = "all", cluster_rtol: float = ROOT_CLUSTER_RTOL,
               real_tol: float = 1e-8):
    """Roots of a polynomial given by descending coefficients.

    Returns a list of (root, multiplicity).  Real roots sorted ascending,
    complex roots by real part.  Roots closer than ``cluster_rtol`` (relative
    to the cluster magnitude) are merged into one root with multiplicity.
    ``real_tol`` is the |imag| threshold below which a root counts as real;
    a multiple real root computed in doubles can split off-axis by
    ~eps^(1/multiplicity), so callers expecting clusters should widen it.
    """
    c = np.asarray(coeffs, dtype=float)
    if c.size == 0 or np.all(c == 0):
        raise DegenerateInput("all polynomial coefficients are zero")
    c = np.trim_zeros(c, "f")
    if c.size <= 1:
        raise DegenerateInput("polynomial has no roots")
    roots = np.roots(c)

    if kind == "real-only":
        # treat numerically-real roots as real
        roots = roots[np.abs(roots.imag) <= real_tol * np.maximum(1.0, np.abs(roots))]
        roots = roots.real

    order = np.argsort(roots.real, kind="stable")
    clusters = [[r] for r in roots[order]]

    def _gap_tol(m, scale):
        # a true m-fold root computed in double precision splits ~ eps^(1/m);
        # admit that spread (with margin) on top of the configured tolerance
        return scale * max(cluster_rtol, (1e4 * np.finfo(float).eps) ** (1.0 / m))

    merged = True
    while merged:
        merged = False
        for i in range(len(clusters) - 1):
            a, b = clusters[i], clusters[i + 1]
            ca, cb = np.mean(a), np.mean(b)
            scale = max(1.0, abs(ca), abs(cb))
            if abs(cb - ca) <= _gap_tol(len(a) + len(b), scale):
                clusters[i:i + 2] = [a + b]
                merged = True
                break
    out = [(np.mean(c), len(c)) for c in clusters]
    if kind == "real-only":
        return [(float(np.real(r)), m) for r, m in out]
    return [(complex(r), m) for r, m in out]


def fit_laurent(samples, center: float, powers, cond_bound: float = CONDITION_BOUND):
    """Least-squares coefficients of sum_k c_k (x - center)^k over the samples.

    samples: sequence of (x, y) pairs, x != center, len >= 2 * len(powers).
    Returns (coefficient dict, rms residual).  Columns are norm-scaled before
    solving; IllConditioned if the scaled design matrix is too ill-posed.
    """
    powers = list(powers)
    xs = np.asarray([s[0] for s in samples], dtype=float)
    ys = np.asarray([s[1] for s in samples])
    if xs.size < 2 * len(powers):
        raise ValueError("need at least 2*len(powers) samples")
    if np.any(xs == center):
        raise ValueError("samples must exclude the center")
    dx = xs - center
    A = np.column_stack([dx ** p for p in powers])
    scale = np.linalg.norm(A, axis=0)
    scale[scale == 0] = 1.0
    As = A / scale
    if np.linalg.cond(As) > cond_bound:
        raise IllConditioned("Laurent design matrix condition number above bound")
    coef, *_ = np.linalg.lstsq(As, ys, rcond=None)
    coef = coef / scale
    resid = A @ coef - ys
    rms = float(np.sqrt(np.mean(np.abs(resid) ** 2)))
    return dict(zip(powers, coef)), rms
