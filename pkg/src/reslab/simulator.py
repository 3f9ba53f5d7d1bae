"""Direct high-accuracy integration of the amplitude equation.

The ground truth every layer is matched against: integrates the stiffly
oscillatory complex ODE across the bifurcation window (decreasing t),
detects the burst spikes, measures post-collar oscillation periods and
per-cycle loop actions, and converts back to the fast-carrier signal.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .equilibria import T_STAR, U_STAR
from .errors import NoSpikes, TooFewCycles
from .numkernel import ToleranceSpec, Trajectory, integrate_ivp
from .outer import outer_eval

SPIKE_PROMINENCE = 1.0           # |U - U*| threshold marking a burst
SPIKE_MIN_HEIGHT = 2.0           # refinement bracket trigger


@dataclass
class SimRun:
    eps: float
    t_start: float
    t_end: float
    seed_order: int
    trajectory: Trajectory
    spikes: list = field(default_factory=list)     # (t_peak, amplitude)
    periods: list = field(default_factory=list)    # local oscillation periods
    meta: dict = field(default_factory=dict)

    def u(self, t):
        y = self.trajectory.interpolate(t)
        return y[0]


def amplitude_rhs(eps: float):
    """U' = -(i/eps)(1 + tU - |U|^2 U), complex scalar state."""
    def rhs(t, y):
        u = y[0]
        return np.array([-1j * (1.0 + t * u - np.abs(u) ** 2 * u) / eps])
    return rhs


def simulate(eps: float, C: float = 0.5, seed_order: int = 2,
             tol: ToleranceSpec = ToleranceSpec(1e-10, 1e-12),
             t_start: float | None = None, t_end: float | None = None) -> SimRun:
    """Integrate from t*+C (seeded on the middle branch) down to t*-C.

    ``t_start``/``t_end`` override the symmetric window.  Spikes are local
    maxima of |U - U*| above the prominence threshold, refined on the dense
    output; oscillation periods are measured afterwards by measure_periods.
    """
    if not (1e-5 <= eps <= 1e-1):
        raise ValueError("eps outside the supported range")
    if not (0 < C <= 1):
        raise ValueError("C must be in (0, 1]")
    t0 = T_STAR + C if t_start is None else t_start
    t1 = T_STAR - C if t_end is None else t_end
    u0 = outer_eval(t0, eps, seed_order)
    # fast rotation limits stable steps to O(eps); start well inside that
    traj = integrate_ivp(amplitude_rhs(eps), t0, t1, np.array([u0], dtype=complex),
                         tol, first_step=0.1 * eps)
    run = SimRun(eps=eps, t_start=t0, t_end=t1, seed_order=seed_order,
                 trajectory=traj, meta={"tol": (tol.rel, tol.abs)})
    run.spikes = detect_spikes(run)
    try:
        run.periods = measure_periods(run)
    except TooFewCycles:
        run.periods = []
    return run


def detect_spikes(run: SimRun) -> list:
    """Burst peaks: local maxima of |U - U*| above the prominence threshold.

    Peak times are refined with a golden-section polish on the dense output.
    Spikes are returned sorted by time (ascending).
    """
    ts = run.trajectory.ts
    dev = np.abs(run.trajectory.ys[0] - U_STAR)
    idx = np.where((dev[1:-1] >= dev[:-2]) & (dev[1:-1] >= dev[2:])
                   & (dev[1:-1] > SPIKE_MIN_HEIGHT))[0] + 1
    if idx.size == 0:
        return []
    # merge plateau-adjacent indices into one candidate per burst
    groups = [[idx[0]]]
    width = 6.0 * run.eps
    for i in idx[1:]:
        if abs(ts[i] - ts[groups[-1][-1]]) < width:
            groups[-1].append(i)
        else:
            groups.append([i])
    spikes = []
    for g in groups:
        i = max(g, key=lambda j: dev[j])
        t_peak, amp = _refine_peak(run, ts[i], width)
        if amp > SPIKE_PROMINENCE:
            spikes.append((t_peak, amp))
    spikes.sort(key=lambda s: s[0])
    return spikes


def _refine_peak(run: SimRun, t_guess: float, width: float):
    lo, hi = sorted((t_guess - width, t_guess + width))
    lo = max(lo, min(run.t_start, run.t_end))
    hi = min(hi, max(run.t_start, run.t_end))
    invphi = (np.sqrt(5.0) - 1) / 2

    def f(t):
        return -abs(run.u(t) - U_STAR)

    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(80):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
        if b - a < 1e-15 + 1e-12 * abs(a):
            break
    t_peak = 0.5 * (a + b)
    return float(t_peak), float(abs(run.u(t_peak) - U_STAR))


def psi_from_u(traj: Trajectory, eps: float) -> Trajectory:
    """Restore the fast-carrier signal psi = U * exp(i t^2 / (2 eps))."""
    phase = np.exp(1j * traj.ts ** 2 / (2.0 * eps))
    return Trajectory(ts=traj.ts.copy(), ys=traj.ys * phase,
                      direction=traj.direction,
                      meta=dict(traj.meta), events=list(traj.events))


def _cycle_boundaries(run: SimRun, t_lo: float, t_hi: float, n_scan: int = 200000):
    """Upward zero crossings of Im(U - local mean) inside [t_lo, t_hi]."""
    ts = np.linspace(t_lo, t_hi, n_scan)
    u = run.trajectory.interpolate(ts)[0]
    im = np.imag(u - np.mean(u))
    up = np.where((im[:-1] < 0) & (im[1:] >= 0))[0]
    if up.size < 2:
        raise TooFewCycles("fewer than one full oscillation in the window")
    dt = ts[1] - ts[0]
    return ts[up] + dt * (-im[up]) / (im[up + 1] - im[up])


def measure_periods(run: SimRun, collar_factor: float = 5.0,
                    window: float = 0.1) -> list:
    """Local oscillation periods below the collar, from phase crossings."""
    t_low = min(run.t_start, run.t_end)
    t_collar = T_STAR - collar_factor * run.eps ** (2.0 / 3.0)
    hi = min(t_collar, max(run.t_start, run.t_end))
    lo = max(t_low, hi - window)
    if hi - lo < 4 * run.eps:
        raise TooFewCycles("no post-collar stretch in this run")
    crossings = _cycle_boundaries(run, lo, hi)
    return list(np.diff(crossings))


def measure_action(run: SimRun, collar_factor: float = 5.0,
                   window: float = 0.1, n_per_cycle: int = 600,
                   t_window: tuple | None = None):
    """Per-cycle loop action i * closed-integral conj(U) dU (midpoint sum).

    Returns a list of (t_cycle, I_measured) for every complete post-collar
    cycle in the measurement window; raises TooFewCycles below 3 cycles.
    ``t_window`` fixes the window explicitly (for eps-independent sweeps).
    """
    if t_window is not None:
        lo, hi = t_window
    else:
        t_low = min(run.t_start, run.t_end)
        t_collar = T_STAR - collar_factor * run.eps ** (2.0 / 3.0)
        hi = min(t_collar, max(run.t_start, run.t_end))
        lo = max(t_low, hi - window)
    crossings = _cycle_boundaries(run, lo, hi)
    if crossings.size < 4:
        raise TooFewCycles("need at least 3 complete cycles")
    out = []
    for a, b in zip(crossings[:-1], crossings[1:]):
        tt = np.linspace(a, b, n_per_cycle)
        u = run.trajectory.interpolate(tt)[0]
        du = np.diff(u)
        um = 0.5 * (u[1:] + u[:-1])
        act = abs((1j * np.sum(np.conj(um) * du)).real)
        out.append((float(0.5 * (a + b)), float(act)))
    return out
