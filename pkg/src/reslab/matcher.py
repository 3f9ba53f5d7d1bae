"""Quantitative matched-asymptotics validation.

Overlap-window errors between adjacent layers and direct numerics,
empirical scaling-exponent fits, burst alignment against the cascade
predictor, and the composite piecewise evaluator with switch-point
diagnostics.  Matching is measured, never enforced: the reports carry
disagreement instead of re-tuned constants.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .equilibria import T_STAR
from .errors import EmptyOverlap, InsufficientPoints, NoSpikes, NoValidLayer
from .simulator import SimRun
from .wp_cascade import CascadeState

DEFAULT_BOUNDARY_SAFETY = 5.0


@dataclass(frozen=True)
class MatchReport:
    layer_pair: tuple
    window: tuple
    eps: float
    sup_error: float
    rms_error: float
    samples: int


@dataclass(frozen=True)
class ScalingFit:
    quantity: str
    exponent: float
    half_width: float
    eps_grid: tuple
    residual: float


def overlap_error(layer_a, layer_b, window, eps: float, n: int = 200,
                  pair=("A", "B")) -> MatchReport:
    """Sup and RMS of |A(t) - B(t)| over n uniform samples of the window."""
    lo, hi = window
    if not (hi > lo):
        raise EmptyOverlap(f"window {window} is empty")
    ts = np.linspace(lo, hi, n)
    va = np.asarray([layer_a(t) for t in ts])
    vb = np.asarray([layer_b(t) for t in ts])
    err = np.abs(va - vb)
    return MatchReport(layer_pair=tuple(pair), window=(float(lo), float(hi)),
                       eps=eps, sup_error=float(np.max(err)),
                       rms_error=float(np.sqrt(np.mean(err ** 2))), samples=n)


def order_fit(reports, quantity: str = "sup_error") -> ScalingFit:
    """Least-squares slope of log(error) against log(eps) over the reports."""
    if len(reports) < 3:
        raise InsufficientPoints("need at least 3 reports")
    pairs = {r.layer_pair for r in reports}
    windows = {r.window for r in reports}
    if len(pairs) != 1 or len(windows) != 1:
        raise ValueError("reports mix layer pairs or windows")
    eps = np.array([r.eps for r in reports])
    err = np.array([getattr(r, quantity) for r in reports])
    lx, ly = np.log(eps), np.log(err)
    A = np.vstack([lx, np.ones_like(lx)]).T
    coef, res, *_ = np.linalg.lstsq(A, ly, rcond=None)
    fit = A @ coef
    rms = float(np.sqrt(np.mean((fit - ly) ** 2)))
    # half width: standard error of the slope
    denom = np.sum((lx - lx.mean()) ** 2)
    hw = rms / np.sqrt(denom) if denom > 0 else np.inf
    return ScalingFit(quantity=f"{quantity}[{reports[0].layer_pair}]",
                      exponent=float(coef[0]), half_width=float(hw),
                      eps_grid=tuple(sorted(eps)), residual=rms)


def power_law_fit(x, y) -> ScalingFit:
    """Plain log-log slope fit of y against x (both positive)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 3:
        raise InsufficientPoints("need at least 3 points")
    lx, ly = np.log(x), np.log(np.abs(y))
    A = np.vstack([lx, np.ones_like(lx)]).T
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    rms = float(np.sqrt(np.mean((A @ coef - ly) ** 2)))
    denom = np.sum((lx - lx.mean()) ** 2)
    return ScalingFit(quantity="power-law", exponent=float(coef[0]),
                      half_width=float(rms / np.sqrt(denom)),
                      eps_grid=tuple(sorted(x)), residual=rms)


def power_law_intercept(x, y):
    """(slope, amplitude) of y ~ A x^p by log-log least squares."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    lx, ly = np.log(x), np.log(np.abs(y))
    A = np.vstack([lx, np.ones_like(lx)]).T
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    return float(coef[0]), float(np.exp(coef[1]))


def slope_extrapolation(x, y, corrections=(0.25,)) -> float:
    """Asymptotic exponent from local log-slopes with power-log corrections.

    Fits slope(x) = p + sum_q [a_q x^q + b_q x^q ln x] and reports p; used
    for quantities whose approach to their scaling law is slow.
    """
    x = np.asarray(x, dtype=float)
    y = np.abs(np.asarray(y, dtype=float))
    o = np.argsort(x)
    x, y = x[o], y[o]
    ls = np.diff(np.log(y)) / np.diff(np.log(x))
    xm = np.sqrt(x[1:] * x[:-1])
    cols = [np.ones_like(xm)]
    for q in corrections:
        cols.append(xm ** q)
        cols.append(xm ** q * np.log(xm))
    A = np.vstack(cols).T
    coef, *_ = np.linalg.lstsq(A, ls, rcond=None)
    return float(coef[0])


def constant_extrapolation(x, y, corrections=(0.25,)) -> float:
    """Limit of y(x) as x -> 0 with the same correction family."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    cols = [np.ones_like(x)]
    for q in corrections:
        cols.append(x ** q)
        cols.append(x ** q * np.log(x))
    A = np.vstack(cols).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return float(coef[0])


# ---------------------------------------------------------------------------
# spike alignment

def spike_alignment(run: SimRun, schedule: list[CascadeState]) -> dict:
    """Relative errors of measured against predicted burst spacings.

    Compares the gaps between consecutive measured spikes with
    eps^{5/6} Omega_k for k up to min(5, available), plus the first-spike
    offset from t*.  The report carries both; it does not gate.
    """
    if not run.spikes:
        raise NoSpikes("run has no detected spikes")
    t_peaks = sorted((t for t, _ in run.spikes), reverse=True)  # toward decreasing t
    gaps = [t_peaks[i] - t_peaks[i + 1] for i in range(len(t_peaks) - 1)]
    scale = run.eps ** (5.0 / 6.0)
    rows = []
    for k, state in enumerate(schedule, start=1):
        if k > min(5, len(gaps)):
            break
        pred = scale * state.Omega_k
        rows.append({"k": k, "measured_gap": gaps[k - 1], "predicted_gap": pred,
                     "rel_error": abs(gaps[k - 1] - pred) / pred})
    amps = [a for _, a in run.spikes]
    return {
        "eps": run.eps,
        "first_spike_offset": t_peaks[0] - T_STAR,
        "rows": rows,
        "amplitudes": amps[: len(rows) + 1],
    }


# ---------------------------------------------------------------------------
# composite evaluation

def composite_solution(eps: float, t_grid, evaluators: dict,
                       windows: dict, priority=None) -> dict:
    """Evaluate each grid point with the innermost valid layer.

    ``evaluators`` maps tag -> callable(t); ``windows`` maps tag ->
    (lo, hi) validity interval in t.  Points in no window raise nothing:
    they are tagged ``none`` and reported.  Switch-point jumps between
    consecutive differently-tagged points are recorded as diagnostics.
    """
    if priority is None:
        priority = ["separatrix", "intermediate", "painleve", "outer", "averaged"]
    t_grid = np.asarray(t_grid, dtype=float)
    values = np.full(t_grid.shape, np.nan + 0j, dtype=complex)
    tags = []
    for i, t in enumerate(t_grid):
        tag_used = "none"
        for tag in priority:
            if tag not in evaluators:
                continue
            lo, hi = windows[tag]
            if lo <= t <= hi:
                try:
                    values[i] = evaluators[tag](t)
                    tag_used = tag
                    break
                except Exception:  # noqa: BLE001 - fall through to outer layers
                    continue
        tags.append(tag_used)
    jumps = []
    for i in range(len(t_grid) - 1):
        if tags[i] != tags[i + 1] and tags[i] != "none" and tags[i + 1] != "none":
            jumps.append({"t": float(t_grid[i + 1]), "from": tags[i],
                          "to": tags[i + 1],
                          "jump": float(abs(values[i + 1] - values[i]))})
    if all(tag == "none" for tag in tags):
        raise NoValidLayer("no grid point fell in any layer window")
    return {"t": t_grid, "values": values, "tags": tags, "jumps": jumps}
