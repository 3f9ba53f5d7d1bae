import numpy as np
import pytest

from reslab import separatrix as sx
from reslab.equilibria import U_STAR
from reslab.errors import OutOfLayer


def test_pulse_center_value():
    assert abs(sx.sep_leader(0.0) - 2.0 / U_STAR ** 2) < 1e-14
    assert abs(sx.sep_leader(0.0) - 2.0 ** (5 / 3)) < 1e-14


def test_pulse_far_field():
    for th in (100.0, -100.0):
        w = sx.sep_leader(th)
        assert abs(w + 2.0 / th ** 2) < 5.0 / abs(th) ** 3


def test_pulse_conjugate_symmetry():
    ths = np.linspace(-7, 7, 29)
    assert np.max(np.abs(sx.sep_leader(-ths) - np.conj(sx.sep_leader(ths)))) == 0.0


def test_pulse_equation_residual():
    ths = np.linspace(-100, 100, 81)
    assert max(abs(sx.burst_residual(t)) for t in ths) < 1e-12


def test_conservation_zero_on_pulse():
    for th in (-5.0, 0.0, 5.0):
        assert abs(sx.sep_conservation(sx.sep_leader(th))) < 1e-12


def test_conservation_brute_force_value():
    # w = 1: H = U*(1 + 1) + U*^2 (1/2 + 1/2 - 1) + 1/2
    assert abs(sx.sep_conservation(1.0 + 0j) - (2 * U_STAR + 0.5)) < 1e-14
    assert sx.sep_conservation(0j) == 0.0


def test_w1_modulus_and_residual():
    assert abs(abs(sx.w1(0.0)) - 2.0) < 1e-14  # 1/|U*|^3 = 2
    dw1 = lambda th: -3.0 * (th - 1j * U_STAR) ** -4
    for th in (-11.0, 0.0, 7.3):
        assert abs(sx.linearized_residual(sx.w1, dw1, th)) < 1e-10


def test_wronskian_value_and_constancy():
    ref = -7j / U_STAR ** 2
    assert abs(ref - (-7j * 2 ** (2 / 3))) < 1e-14
    for th in (-10.0, 0.0, 10.0):
        assert abs(sx.wronskian(th) - ref) < 1e-6
    Ws = np.array([sx.wronskian(t) for t in np.linspace(-50, 50, 41)])
    assert np.std(Ws.imag) < 1e-6


def test_w2_far_field_normalization():
    w2s = dict(sx.w2_far_series())
    assert abs(w2s[4] - 1.0) < 1e-12
    # derivative-forced cubic coefficient (paper's print is off by 4: ledger)
    assert abs(w2s[3] - 2j / U_STAR ** 2) < 1e-10
    v = sx.w2(200.0)
    assert abs(v / 200.0 ** 4 - 1.0) < 1e-3


def test_w2_solves_linearized_equation():
    h = 1e-5
    for th in (-13.0, -2.0, 3.0, 17.0):
        dv = (sx.w2(th + h) - sx.w2(th - h)) / (2 * h)
        r = 1j * dv + sx._lin_B(th) * sx.w2(th) + sx._lin_C(th) * np.conj(sx.w2(th))
        assert abs(r) < 1e-5 * max(1.0, abs(sx.w2(th)))


def test_correction_series_match_equation():
    # printed second-correction segment values (ODE-validated)
    tau0 = -2.7386907436
    c2 = sx.correction_far_series(2, tau0)
    assert abs(c2[3] + 1.0 / 6.0) < 1e-12
    assert abs(c2[2] - 0.5j * U_STAR) < 1e-12
    assert abs(c2[1] - 5.0 / (12.0 * U_STAR)) < 1e-12
    assert abs(c2[0] + 0.75j) < 1e-12
    c1 = sx.correction_far_series(1, tau0)
    assert abs(c1[2] - tau0 * U_STAR ** 3 / 5.0) < 1e-12
    assert abs(c1[1] - 1j * tau0 * U_STAR / 5.0) < 1e-12


def test_jump_integrals_values(pole):
    _, fit = pole
    j1 = sx.jump_integrals(1, fit.tau0)
    assert abs(j1.X) < 1e-6 and abs(j1.Y) < 1e-6
    j2 = sx.jump_integrals(2, fit.tau0)
    assert abs(j2.X) < 1e-6
    # measured connection constant (the stated pi/2 is asserted, and measured
    # red, in the acceptance module)
    assert abs(j2.Y + np.pi * U_STAR ** 2 / 7.0) < 1e-6
    # the finite-part route agrees with the continuation on the Y channel
    assert abs(j2.Y_finite_part - j2.Y) < 1e-5


def test_jump_finite_part_linearity(pole):
    # doubling the forcing doubles the regularized pairing integral
    _, fit = pole
    F = sx.forcing_fn(2, fit.tau0)
    Fs = sx.forcing_series(2, fit.tau0)
    w1s = sx._zinv_series(3, 26)

    def g(th, scale=1.0):
        Fv = scale * F(th)
        wv = sx.w1(th)
        return np.real(1j * (Fv * np.conj(wv) + np.conj(Fv) * wv) / sx.WRONSKIAN)

    s1 = sx._sscale(sx._sadd(sx._smul(Fs, sx._sconj(w1s)),
                             sx._sconj(sx._smul(Fs, sx._sconj(w1s)))),
                    1j / sx.WRONSKIAN)
    v1, _ = sx._finite_part_integral(lambda th: g(th, 1.0), s1)
    v2, _ = sx._finite_part_integral(lambda th: g(th, 2.0), sx._sscale(s1, 2.0))
    assert abs(v2 - 2 * v1) < 1e-8


def test_direct_measurement_consistency(pole):
    _, fit = pole
    x1, y1, rms1 = sx.direct_jump_measurement(1, fit.tau0)
    assert abs(x1) < 1e-6 and abs(y1) < 1e-9 and rms1 < 1e-9
    x2, y2, rms2 = sx.direct_jump_measurement(2, fit.tau0)
    assert abs(y2 + np.pi * U_STAR ** 2 / 7.0) < 1e-6


def test_layer2_leading_limit(pole):
    _, fit = pole
    th = 1.5
    val = sx.layer2_eval(th, 1e-12, fit.tau0)
    assert abs(val - (U_STAR + sx.sep_leader(th))) < 1e-8


def test_layer2_one_sided_homogeneous_term(pole):
    _, fit = pole
    eps = 1e-4
    th = 20.0
    plus = sx.layer2_eval(th, eps, fit.tau0)
    minus = sx.layer2_eval(-th, eps, fit.tau0)
    w1c = sx.series_eval(sx.correction_far_series(1, fit.tau0), -th)
    w2c = sx.series_eval(sx.correction_far_series(2, fit.tau0), -th)
    base_minus = U_STAR + sx.sep_leader(-th) + eps ** 0.8 * w1c + eps * w2c
    extra = minus - base_minus
    _, y2, _ = sx.direct_jump_measurement(2, fit.tau0)
    ref = eps * y2 * sx.w2(-th)
    assert abs(extra - ref) < 0.1 * abs(ref)
    # and no such content on the +infinity side
    w1p = sx.series_eval(sx.correction_far_series(1, fit.tau0), th)
    w2p = sx.series_eval(sx.correction_far_series(2, fit.tau0), th)
    base_plus = U_STAR + sx.sep_leader(th) + eps ** 0.8 * w1p + eps * w2p
    assert abs(plus - base_plus) < 1e-12


def test_layer2_window():
    with pytest.raises(OutOfLayer):
        sx.layer2_eval(1e6, 1e-4, -2.7)
    with pytest.raises(OutOfLayer):
        sx.layer2_eval(-1e6, 1e-4, -2.7)
