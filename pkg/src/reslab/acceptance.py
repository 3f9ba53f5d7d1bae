"""Acceptance criteria: one callable per criterion, shared by the test
suite and the match command.

Each criterion function takes the shared context (which lazily builds and
caches the expensive artifacts: pole data, simulation sweep, modulation
table) and returns a CriterionResult with the measured values and the
verdict at the stated tolerance.  Criteria report honestly; nothing is
re-tuned to force agreement.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import averaged as av
from . import matcher as mt
from . import painleve as p1
from . import separatrix as sx
from . import simulator as sim
from . import wp_cascade as wc
from .equilibria import (
    E_STAR,
    T_STAR,
    U_STAR,
    X_PLUS_STAR,
    bifurcation_constants,
    equilibrium_branches,
)
from .numkernel import ToleranceSpec, poly_roots

EPS_SWEEP = (1e-2, 3e-3, 1e-3, 3e-4, 1e-4)
ACTION_EPS = (1e-3, 5e-4)


@dataclass
class CriterionResult:
    cid: int
    title: str
    passed: bool
    informational: bool = False
    lines: list = field(default_factory=list)

    def line(self) -> str:
        tag = "PASS" if self.passed else ("INFO" if self.informational else "FAIL")
        return f"[{tag}] criterion {self.cid:2d}: {self.title}"


class AcceptanceContext:
    """Lazily-built shared artifacts for the acceptance run."""

    def __init__(self, quick: bool = False):
        self.quick = quick
        self._cache = {}

    def pole(self):
        if "pole" not in self._cache:
            traj = p1.pi_solve_special()
            fit = p1.pi_locate_pole(traj)
            self._cache["pole"] = (traj, fit)
        return self._cache["pole"]

    def pole_refined(self):
        if "pole_refined" not in self._cache:
            traj = p1.pi_solve_special(tol=ToleranceSpec(1e-13, 1e-14))
            fit = p1.pi_locate_pole(traj)
            self._cache["pole_refined"] = (traj, fit)
        return self._cache["pole_refined"]

    def sigma_star(self) -> float:
        if "sigma" not in self._cache:
            self._cache["sigma"] = av.sigma_star()
        return self._cache["sigma"]

    def spike_run(self, eps: float) -> sim.SimRun:
        key = ("spike_run", eps)
        if key not in self._cache:
            margin = 12.0 * eps ** (5.0 / 6.0) * 3.0
            self._cache[key] = sim.simulate(
                eps, t_start=T_STAR + 0.5, t_end=T_STAR - max(margin, 0.01))
        return self._cache[key]

    def action_run(self, eps: float) -> sim.SimRun:
        key = ("action_run", eps)
        if key not in self._cache:
            self._cache[key] = sim.simulate(
                eps, t_start=T_STAR + 0.1, t_end=T_STAR - 0.2)
        return self._cache[key]

    def modulation_table(self) -> av.ModulationTable:
        if "table" not in self._cache:
            n = 50 if self.quick else 90
            self._cache["table"] = av.build_modulation_table(
                t_min=T_STAR - 0.45, n=n, sigma=self.sigma_star())
        return self._cache["table"]


# ---------------------------------------------------------------------------

def criterion_1(ctx) -> CriterionResult:
    """Closed-form constants and the quartic coalescence cluster."""
    bc = bifurcation_constants()
    ok = True
    lines = []
    for name, val, ref in (("t*", bc.t_star, 3 * 0.5 ** (2 / 3)),
                           ("U*", bc.U_star, -(0.5 ** (1 / 3))),
                           ("E*", bc.E_star, 0.75 * 0.5 ** (1 / 3))):
        err = abs(val - ref)
        ok &= err <= 1e-12
        lines.append(f"{name} = {val!r}, |err| = {err:.2e}")
    # coalescence structure of the quartic at (t*, E*)
    roots = poly_roots([1.0, 0.0, -2 * T_STAR, -4.0, -2 * E_STAR],
                       kind="real-only", real_tol=1e-4)
    mults = sorted(m for _, m in roots)
    cluster_ok = (mults == [1, 3]
                  and min(abs(r - U_STAR) for r, m in roots if m == 3) < 1e-4
                  and min(abs(r - X_PLUS_STAR) for r, m in roots if m == 1) < 1e-9)
    ok &= cluster_ok
    lines.append(f"quartic cluster (x-U*)^3 (x-x+*): {roots} -> {cluster_ok}")
    cube = [(b.label, b.value, b.multiplicity) for b in equilibrium_branches(T_STAR)]
    ok &= any(m == 2 and abs(v - U_STAR) < 1e-7 for _, v, m in cube)
    lines.append(f"cubic coalescence at t*: {cube}")
    return CriterionResult(1, "bifurcation constants and coalescence cluster",
                           bool(ok), lines=lines)


def criterion_2(ctx) -> CriterionResult:
    """Cubic branch values at t = 2."""
    vals = sorted(b.value for b in equilibrium_branches(2.0))
    refs = sorted([-1.0, (1 - np.sqrt(5)) / 2, (1 + np.sqrt(5)) / 2])
    errs = [abs(v - r) for v, r in zip(vals, refs)]
    ok = max(errs) <= 1e-12
    return CriterionResult(2, "cubic branch example at t = 2", bool(ok),
                           lines=[f"roots {vals}, errors {errs}"])


def criterion_3(ctx) -> CriterionResult:
    """Painleve layer: ODE residual, pole Laurent structure, stability."""
    traj, fit = ctx.pole()
    lines = []
    # ODE residual at interior checkpoints: Richardson-extrapolated central
    # difference of the stored derivative channel
    taus = np.linspace(fit.tau0 + 1.0, 28.0, 41)
    h = 1e-3
    resid = []
    for tau in taus:
        def dd(step):
            return (traj.interpolate(tau + step)[1]
                    - traj.interpolate(tau - step)[1]) / (2 * step)
        a2 = (4 * dd(h) - dd(2 * h)) / 3.0
        a0 = traj.interpolate(tau)[0]
        resid.append(abs(a2 + 3 * a0 ** 2 - tau))
    ode_ok = max(resid) < 1e-7
    lines.append(f"layer ODE residual sup = {max(resid):.2e} (tol 1e-7)")

    c = fit.coefficients
    checks = [
        ("c[-2] = -2", -2, abs(c[-2] + 2.0) < 1e-6),
        ("c[-1] = 0", -1, abs(c[-1]) < 1e-6),
        ("c[0] = 0", 0, abs(c[0]) < 1e-6),
        ("c[1] = 0", 1, abs(c[1]) < 1e-6),
        ("c[2] = -tau0/10", 2,
         abs(c[2] + fit.tau0 / 10) / abs(fit.tau0 / 10) < 1e-6),
        # stated as vanishing; the layer ODE forces -1/6 (see ledger), so
        # this clause measures red honestly
        ("c[3] = 0 (as specified)", 3, abs(c[3]) < 1e-6),
    ]
    all_checks_ok = all(v for _, _, v in checks)
    for label, p, v in checks:
        lines.append(f"{label}: {'ok' if v else 'FAIL'}"
                     + ("" if v else f" (measured {c[p]:+.6f})"))
    lines.append(f"measured c[3] = {c[3]:+.8f} (equation forces -1/6 = {-1/6:+.8f})")

    traj2, fit2 = ctx.pole_refined()
    d_tau0 = abs(fit.tau0 - fit2.tau0)
    d_a4 = abs(fit.a4 - fit2.a4)
    stab_ok = d_tau0 < 1e-7 and d_a4 < 1e-7
    lines.append(f"tolerance refinement: d_tau0 = {d_tau0:.2e}, d_a4 = {d_a4:.2e}")
    lines.append(f"tau0 = {fit.tau0!r}, a4 = {fit.a4!r}")
    ok = ode_ok and stab_ok and all_checks_ok
    return CriterionResult(3, "Painleve layer pole structure", bool(ok), lines=lines)


def criterion_4(ctx) -> CriterionResult:
    """Weierstrass identity, period value, period scaling."""
    lines = []
    worst = 0.0
    for g3 in (0.05, 0.3, 1.0, 3.0):
        Om = wc.wp_real_period(0.0, g3, cross_check=False)
        for x in np.linspace(0.08 * Om, 0.92 * Om, 9):
            p, dp, _ = wc.wp_eval(x, 0.0, g3)
            worst = max(worst, abs(dp ** 2 - (4 * p ** 3 - g3)))
    id_ok = worst < 1e-10
    lines.append(f"identity residual sup = {worst:.2e} (tol 1e-10)")

    Om1 = wc.wp_real_period(0.0, 1.0, cross_check=True)
    ode_ok = True  # cross_check raises if the two routes disagree at 1e-8
    val_ok = abs(Om1 - 3.059908074114384) < 1e-6
    lines.append(f"Omega(0, 1) = {Om1!r} (ODE cross-check at 1e-8 passed)")

    base = Om1
    scal_ok = True
    for s in (2.0, 10.0):
        dev = abs(wc.wp_real_period(0.0, s, cross_check=False) * s ** (1 / 6) - base)
        scal_ok &= dev < 1e-9
        lines.append(f"scaling s = {s}: |Omega(0,s) s^(1/6) - Omega(0,1)| = {dev:.2e}")
    ok = id_ok and ode_ok and val_ok and scal_ok
    return CriterionResult(4, "Weierstrass identity, period, scaling", bool(ok),
                           lines=lines)


def criterion_5(ctx) -> CriterionResult:
    """Burst layer: pulse residual, conservation, Wronskian, jump values."""
    _, fit = ctx.pole()
    lines = []
    thetas = np.linspace(-100, 100, 41)
    res = max(abs(sx.burst_residual(t)) for t in thetas)
    H = max(abs(sx.sep_conservation(sx.sep_leader(t))) for t in thetas)
    pulse_ok = res < 1e-12 and H < 1e-12
    lines.append(f"pulse equation residual sup = {res:.2e}, |H| sup = {H:.2e}")

    Ws = np.array([sx.wronskian(t) for t in np.linspace(-40, 40, 17)])
    w_dev = np.max(np.abs(Ws - sx.WRONSKIAN))
    w_ok = w_dev < 1e-6
    lines.append(f"Wronskian dev from -7i/U*^2: {w_dev:.2e} "
                 f"(std {np.std(Ws.imag):.2e})")

    j1 = sx.jump_integrals(1, fit.tau0)
    j2 = sx.jump_integrals(2, fit.tau0)
    jump_ok = (abs(j1.X) < 1e-6 and abs(j1.Y) < 1e-6
               and abs(j2.X) < 1e-6 and abs(j2.Y - np.pi / 2) < 1e-6)
    lines.append(f"jumps n=1: ({j1.X:+.3e}, {j1.Y:+.3e}); "
                 f"n=2: ({j2.X:+.3e}, {j2.Y:+.8f})")
    lines.append(f"stated (0, pi/2) = (0, {np.pi/2:.8f}); measured Y2 matches "
                 f"-pi U*^2/7 = {-np.pi*U_STAR**2/7:+.8f} (see ledger)")
    ok = pulse_ok and w_ok and jump_ok
    return CriterionResult(5, "burst layer constants and jump integrals",
                           bool(ok), lines=lines)


def criterion_6(ctx) -> CriterionResult:
    """Invariant progression arithmetic and accumulated-period growth."""
    _, fit = ctx.pole()
    lines = []
    incs = [wc.g3_sequence(fit.a4, k + 1) - wc.g3_sequence(fit.a4, k)
            for k in range(1, 40)]
    inc_ok = max(abs(i - np.pi / 112) for i in incs) < 1e-15
    lines.append(f"g3 increment dev from pi/112: {max(abs(i - np.pi/112) for i in incs):.2e}")

    Oms = np.array([wc.wp_real_period(0.0, wc.g3_sequence(fit.a4, k),
                                      cross_check=False) for k in range(1, 201)])
    dec_ok = bool(np.all(np.diff(Oms) < 0))
    P = np.cumsum(Oms)
    ks = np.arange(10, 201)
    slope = mt.power_law_fit(ks, P[9:]).exponent
    p_ok = abs(slope - 5.0 / 6.0) < 0.1
    lines.append(f"Omega_k strictly decreasing: {dec_ok}; "
                 f"P_k exponent over k in [10,200]: {slope:.4f} (5/6 +/- 0.1)")
    ok = inc_ok and dec_ok and p_ok
    return CriterionResult(6, "discrete progression and period growth", bool(ok),
                           lines=lines)


def criterion_7(ctx) -> CriterionResult:
    """First-spike offset scaling across the eps sweep."""
    _, fit = ctx.pole()
    eps_grid = EPS_SWEEP if not ctx.quick else EPS_SWEEP[:3]
    offs = []
    for eps in eps_grid:
        run = ctx.spike_run(eps)
        if not run.spikes:
            raise RuntimeError(f"no spikes at eps={eps}")
        t_first = max(t for t, _ in run.spikes)
        offs.append(abs(t_first - T_STAR))
    slope, amp = mt.power_law_intercept(eps_grid, offs)
    slope_ok = abs(slope - 0.8) < 0.05
    coef_ok = abs(amp - abs(fit.tau0)) / abs(fit.tau0) < 0.15
    lines = [f"offsets {dict(zip(eps_grid, offs))}",
             f"fitted exponent {slope:.4f} (4/5 +/- 0.05); "
             f"coefficient {amp:.4f} vs |tau0| = {abs(fit.tau0):.4f} "
             f"({abs(amp - abs(fit.tau0))/abs(fit.tau0)*100:.1f}%, tol 15%)"]
    return CriterionResult(7, "first-spike location scaling",
                           bool(slope_ok and coef_ok), lines=lines)


def criterion_8(ctx) -> CriterionResult:
    """Spike peak amplitude at the finest eps."""
    eps = 1e-4 if not ctx.quick else 1e-3
    run = ctx.spike_run(eps)
    amp = run.spikes[-1][1] if run.spikes else np.nan
    ref = 2.0 ** (5.0 / 3.0)
    rel = abs(amp - ref) / ref
    return CriterionResult(8, "spike amplitude", bool(rel < 0.10),
                           lines=[f"peak |U - U*| = {amp:.4f} vs 2^(5/3) = {ref:.4f} "
                                  f"({rel*100:.2f}%, tol 10%)"])


def criterion_9(ctx) -> CriterionResult:
    """Spike spacing against the specified progression (k <= 5)."""
    _, fit = ctx.pole()
    eps = 1e-4 if not ctx.quick else 1e-3
    run = ctx.spike_run(eps)
    sched = wc.spike_schedule(eps, fit, 5, enforce_validity=False)
    rep = mt.spike_alignment(run, sched)
    worst = max(r["rel_error"] for r in rep["rows"])
    ok = worst <= 0.10
    lines = [f"k={r['k']}: measured {r['measured_gap']:.4e} vs "
             f"predicted {r['predicted_gap']:.4e} (rel {r['rel_error']*100:.1f}%)"
             for r in rep["rows"]]
    sched_m = wc.spike_schedule(eps, fit, 5, measured=True, enforce_validity=False)
    rep_m = mt.spike_alignment(run, sched_m)
    worst_m = max(r["rel_error"] for r in rep_m["rows"])
    lines.append(f"worst {worst*100:.1f}% (tol 10%); measured-constant "
                 f"progression worst {worst_m*100:.1f}% (diagnostic, see ledger)")
    return CriterionResult(9, "spike spacing vs specified progression", bool(ok),
                           lines=lines)


def criterion_10(ctx) -> CriterionResult:
    """Outer-matching error slopes over the eps sweep."""
    from .outer import outer_eval
    eps_grid = EPS_SWEEP if not ctx.quick else EPS_SWEEP[:3]
    window = (T_STAR + 0.3, T_STAR + 0.5)
    reports = {0: [], 1: []}
    for eps in eps_grid:
        run = ctx.spike_run(eps)
        for order in (0, 1):
            rep = mt.overlap_error(lambda t: run.u(t),
                                   lambda t, o=order: outer_eval(t, eps, o),
                                   window, eps, n=160,
                                   pair=("simulator", f"outer{order}"))
            reports[order].append(rep)
    fit1 = mt.order_fit(reports[1])
    fit0 = mt.order_fit(reports[0])
    ok = abs(fit1.exponent - 2.0) < 0.3 and abs(fit0.exponent - 1.0) < 0.3
    lines = [f"order-1 slope {fit1.exponent:.4f} (2 +/- 0.3); "
             f"order-0 slope {fit0.exponent:.4f} (1 +/- 0.3)"]
    return CriterionResult(10, "outer matching slopes", bool(ok), lines=lines)


def criterion_11(ctx) -> CriterionResult:
    """Adiabatic-invariant drift scaling and sigma* bracketing."""
    sigma = ctx.sigma_star()
    drifts = []
    brackets = []
    lines = []
    # fixed window for all eps so the drift comparison sees the same modulation
    t_window = (T_STAR - 0.15, T_STAR - 0.05)
    for eps in ACTION_EPS:
        run = ctx.action_run(eps)
        acts = sim.measure_action(run, t_window=t_window)
        vals = np.array([a for _, a in acts])
        drift = float(np.median(np.abs(np.diff(vals))))
        drifts.append(drift)
        envelope = drift * max(3, len(vals))
        lo, hi = vals.min() - envelope, vals.max() + envelope
        brackets.append(lo <= sigma <= hi)
        lines.append(f"eps={eps}: cycles {len(vals)}, action mean {vals.mean():.4f}, "
                     f"median drift {drift:.3e}, envelope [{lo:.4f}, {hi:.4f}]")
    slope = np.log(drifts[0] / drifts[1]) / np.log(ACTION_EPS[0] / ACTION_EPS[1])
    slope_ok = abs(slope - 1.0) < 0.3
    bracket_ok = all(brackets)
    lines.append(f"drift slope {slope:.3f} (1 +/- 0.3); sigma* = {sigma:.4f} "
                 f"bracketed: {brackets} (collar deficit is O(eps^(2/3)), see ledger)")
    return CriterionResult(11, "adiabatic invariant drift and bracketing",
                           bool(slope_ok and bracket_ok), lines=lines)


def criterion_12(ctx) -> CriterionResult:
    """Degeneration scalings of the averaged layer."""
    table = ctx.modulation_table()
    x = T_STAR - table.t
    win = (x >= 1e-4) & (x <= 1e-2)
    lines = []
    kfit = mt.power_law_fit(x[win], table.K_abs[win])
    sfit = mt.power_law_fit(x[win], table.S_prime[win])
    phi_rate = np.abs(table.dE_S / table.dE_I)
    pfit = mt.power_law_fit(x[win], phi_rate[win])
    k_ok = abs(kfit.exponent + 0.25) < 0.05
    s_ok = abs(sfit.exponent - 0.25) < 0.05
    p_ok = abs(pfit.exponent - 0.5) < 0.1
    lines.append(f"|K| exponent {kfit.exponent:+.4f} (-1/4 +/- 0.05)")
    lines.append(f"S' exponent {sfit.exponent:+.4f} (+1/4 +/- 0.05)")
    lines.append(f"phi' exponent {pfit.exponent:+.4f} (+1/2 +/- 0.1; "
                 "true asymptote is fifth-power family, see ledger)")

    sigma = ctx.sigma_star()
    mus = -np.geomspace(1e-7, 1e-3, 9)
    ratios = [(av.solve_E_of_t(T_STAR + m, sigma) - E_STAR) / m for m in mus]
    d1 = mt.constant_extrapolation(-mus, ratios, corrections=(0.25,))
    ref = -(0.5 ** (2.0 / 3.0))
    d_ok = abs(d1 - ref) / abs(ref) < 0.05
    lines.append(f"delta1 extrapolated {d1:.5f} vs -(1/2)^(2/3) = {ref:.5f} "
                 f"({abs(d1-ref)/abs(ref)*100:.2f}%, tol 5%); raw delta/mu at "
                 f"mu=-1e-3: {ratios[-1]:.4f}")
    ok = k_ok and s_ok and p_ok and d_ok
    return CriterionResult(12, "averaged-layer degeneration scalings", bool(ok),
                           lines=lines)


def criterion_13(ctx) -> CriterionResult:
    """sigma* against pi (informational: reports, does not gate)."""
    sigma = ctx.sigma_star()
    agree = abs(sigma - np.pi) < 1e-4
    lines = [f"sigma* = {sigma!r} vs pi = {np.pi!r}: "
             + ("agreement" if agree else "no agreement; downstream modulation "
                "uses the measured sigma*")]
    return CriterionResult(13, "sigma* vs pi (informational)", True,
                           informational=True, lines=lines)


def criterion_14(ctx) -> CriterionResult:
    """Radicand arbitration by the frozen-system oracle."""
    sigma = ctx.sigma_star()
    t = T_STAR - 0.2
    E = av.solve_E_of_t(t, sigma)
    rec = av.radicand_select(t, E)
    good = rec["selected"]
    other = 3.0 if good == 2.0 else 2.0
    ok = rec[good]["level_error"] < 1e-6 and rec[other]["level_error"] > 1e-2
    lines = [f"selected {good:g}y^3 (level error {rec[good]['level_error']:.2e}); "
             f"rejected {other:g}y^3 (level error {rec[other]['level_error']:.3g})"]
    return CriterionResult(14, "radicand arbitration", bool(ok), lines=lines)


CRITERIA = {i: fn for i, fn in enumerate(
    [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
     criterion_6, criterion_7, criterion_8, criterion_9, criterion_10,
     criterion_11, criterion_12, criterion_13, criterion_14], start=1)}

FAST_CRITERIA = (1, 2, 3, 4, 5, 6, 13, 14)


def run_acceptance(ctx: AcceptanceContext | None = None, ids=None,
                   verbose: bool = True) -> list[CriterionResult]:
    if ctx is None:
        ctx = AcceptanceContext()
    ids = sorted(ids) if ids else sorted(CRITERIA)
    results = []
    for i in ids:
        res = CRITERIA[i](ctx)
        results.append(res)
        if verbose:
            print(res.line())
            for ln in res.lines:
                print(f"         {ln}")
    return results
