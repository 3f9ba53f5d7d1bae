import numpy as np
import pytest

from reslab import wp_cascade as wc
from reslab.equilibria import U_STAR
from reslab.errors import BeyondValidity, NearPole, OutOfWindow
from reslab.painleve import PoleFit

A4 = 0.054092302  # measured quartic pole coefficient (regression value)
TAU0 = -2.73869074364


def test_degenerate_lattice():
    p, dp, z = wc.wp_eval(0.01, 0.0, 0.0)
    assert p == 1e4 and z == 100.0


def test_identity_on_grid():
    for g3 in (0.05, 1.0, 3.0):
        Om = wc.wp_real_period(0.0, g3, cross_check=False)
        for x in np.linspace(0.07 * Om, 0.93 * Om, 11):
            p, dp, _ = wc.wp_eval(x, 0.0, g3)
            assert abs(dp ** 2 - (4 * p ** 3 - g3)) < 1e-10


def test_identity_with_g2():
    for x in (0.4, 0.9, 1.6):
        p, dp, _ = wc.wp_eval(x, 0.5, 1.0)
        assert abs(dp ** 2 - (4 * p ** 3 - 0.5 * p - 1.0)) < 1e-10


def test_zeta_near_origin_and_derivative():
    for x in (1e-3, 0.05):
        _, _, z = wc.wp_eval(x, 0.0, 1.0)
        assert abs(z - 1.0 / x) < 1e-8
    h = 1e-6
    for x in (0.7, 1.9):
        zp = (wc.wp_eval(x + h, 0.0, 1.0)[2] - wc.wp_eval(x - h, 0.0, 1.0)[2]) / (2 * h)
        p = wc.wp_eval(x, 0.0, 1.0)[0]
        assert abs(zp + p) < 1e-8


def test_near_pole_exclusion():
    with pytest.raises(NearPole):
        wc.wp_eval(1e-10, 0.0, 1.0)


def test_period_value_and_scaling():
    Om = wc.wp_real_period(0.0, 1.0)  # internal ODE cross-check at 1e-8
    assert abs(Om - 3.059908) < 1e-6
    base = Om
    for s in (1.0, 2.0, 10.0):
        dev = abs(wc.wp_real_period(0.0, s, cross_check=False) * s ** (1 / 6) - base)
        assert dev < 1e-9
    ratio = wc.wp_real_period(0.0, 2.0, cross_check=False) / base
    assert abs(ratio - 2 ** (-1 / 6)) < 1e-12


def test_variational_pair():
    g3 = 0.9
    h = 1e-5
    for T in (0.5, 1.2):
        A1, A2 = wc.variational_pair(T, g3)
        dA1, dA2 = wc.variational_pair_deriv(T, g3, h)
        W = A1 * dA2 - A2 * dA1
        assert abs(W + 7.0 / 4.0) < 1e-6
        # A1 solves the variational equation A'' + 6 A0 A = 0 with A0 = -2 wp
        a1m, _ = wc.variational_pair(T - h, g3)
        a1p, _ = wc.variational_pair(T + h, g3)
        app = (a1p - 2 * A1 + a1m) / h ** 2
        p = wc.wp_eval(T, 0.0, g3)[0]
        assert abs(app + 6 * (-2 * p) * A1) < 1e-6


def test_g3_sequence_values():
    assert wc.g3_sequence(A4, 1) == A4 / 56.0
    incs = [wc.g3_sequence(A4, k + 1) - wc.g3_sequence(A4, k) for k in range(1, 30)]
    assert max(abs(i - np.pi / 112.0) for i in incs) < 1e-16
    assert abs(wc.g3_sequence(0.0, 57) - np.pi / 2.0) < 1e-14


def test_g3_measured_progression():
    assert abs(wc.g3_sequence_measured(1) - 2 * np.pi * U_STAR ** 2) < 1e-12
    assert abs(wc.g3_sequence_measured(5) / wc.g3_sequence_measured(1) - 5.0) < 1e-12


def test_lambda_k():
    lam = wc.lambda_k(1e-4, 1, a4=A4)
    Om1 = wc.wp_real_period(0.0, wc.g3_sequence(A4, 1), cross_check=False)
    assert abs(lam - 1e-4 ** (1 / 6) * Om1) < 1e-12
    lam2 = wc.lambda_k(0.5e-4, 1, a4=A4)
    assert abs(lam2 / lam - 2.0 ** (-1 / 6)) < 1e-12


def test_p_k_growth_exponent():
    Oms = [wc.wp_real_period(0.0, wc.g3_sequence(A4, k), cross_check=False)
           for k in range(1, 201)]
    P = np.cumsum(Oms)
    ks = np.arange(10, 201)
    slope = np.polyfit(np.log(ks), np.log(P[9:]), 1)[0]
    assert abs(slope - 5.0 / 6.0) < 0.1


def test_intermediate_leader_ode_residual():
    h = 1e-5
    for (T, k, eps) in ((-1.0, 1, 1e-4), (-0.5, 3, 1e-4)):
        g3 = wc.g3_sequence(A4, k)
        lam = wc.lambda_k(eps, k, a4=A4)
        g2_eff = lam if lam >= wc.LAMBDA_REGIME_THRESHOLD else 0.0
        Am, _ = wc.intermediate_leader(T - h, k, eps, A4)
        A0, B0 = wc.intermediate_leader(T, k, eps, A4)
        Ap, _ = wc.intermediate_leader(T + h, k, eps, A4)
        resid = (Ap - 2 * A0 + Am) / h ** 2 + 3 * A0 ** 2 - g2_eff
        assert abs(resid) < 1e-5
        # and exactly via the wp identity
        p, dp, _ = wc.wp_eval(T, g2_eff, g3)
        assert abs(A0 + 2 * p) < 1e-12
        assert abs(B0 + dp / U_STAR ** 2) < 1e-12


def test_intermediate_leader_near_pole_series():
    T = -0.05
    Aval, _ = wc.intermediate_leader(T, 1, 1e-6, A4)
    assert abs(Aval + 2.0 / T ** 2) < 0.05 * abs(2.0 / T ** 2)


def test_intermediate_leader_window():
    g3 = wc.g3_sequence(A4, 1)
    Om = wc.wp_real_period(0.0, g3, cross_check=False)
    with pytest.raises(OutOfWindow):
        wc.intermediate_leader(-Om + 1e-9, 1, 1e-4, A4)
    with pytest.raises(OutOfWindow):
        wc.intermediate_leader(-1e-9, 1, 1e-4, A4)


def test_jump_ledger():
    led = wc.JumpLedger()
    for k in (1, 2, 3, 4):
        led = wc.jump_ledger_step(led, k, A4, TAU0)
    for rec in led.records:
        assert rec["X_plus"] == 0.0
        assert abs(rec["Y_minus"] - rec["Y_plus"] - np.pi / 2) < 1e-14
        assert abs(rec["Y_plus"] - 56.0 * rec["g3"]) < 1e-12


def test_ledger_shift_scaling():
    # x+ = (28 tau0 / (3 g3)) zeta(Omega/2): homogeneity sends g3 -> 4 g3
    # to x+ * 4^(-5/6)
    led = wc.JumpLedger()
    led = wc.jump_ledger_step(led, 1, A4, TAU0)
    g3 = led.records[0]["g3"]
    Om4 = wc.wp_real_period(0.0, 4 * g3, cross_check=False)
    z4 = wc.wp_eval(Om4 / 2, 0.0, 4 * g3)[2]
    x4 = (28.0 * TAU0 / (3.0 * 4 * g3)) * z4
    ratio = x4 / led.records[0]["x_plus"]
    assert abs(ratio - 4.0 ** (-5 / 6)) < 1e-9


def test_spike_schedule_structure():
    fit = PoleFit(tau0=TAU0, a4=A4, fit_residual=0.0)
    eps = 1e-3
    sched = wc.spike_schedule(eps, fit, 2)
    assert abs(sched[0].t_spike - (1.8898815748 + eps ** 0.8 * TAU0
                                   - eps ** (5 / 6) * sched[0].Omega_k)) < 1e-9
    gaps = np.diff([s.t_spike for s in sched])
    assert np.all(gaps < 0)
    Oms = [s.Omega_k for s in sched]
    assert np.all(np.diff(Oms) < 0)
    for s1, s2 in zip(sched[:-1], sched[1:]):
        assert abs((s1.t_spike - s2.t_spike) - eps ** (5 / 6) * s2.Omega_k) < 1e-15


def test_spike_schedule_validity_bound():
    fit = PoleFit(tau0=TAU0, a4=A4, fit_residual=0.0)
    eps = 1e-3
    K_max = int(np.floor(eps ** (-1.0 / 7.0)))
    wc.spike_schedule(eps, fit, K_max)
    with pytest.raises(BeyondValidity):
        wc.spike_schedule(eps, fit, K_max + 1)
