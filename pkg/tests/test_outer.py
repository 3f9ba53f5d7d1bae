import numpy as np
import pytest

from reslab import outer
from reslab.equilibria import T_STAR, U_STAR
from reslab.errors import TooCloseToBifurcation


def test_terms_at_two_exact():
    terms = outer.outer_terms(2.0)
    assert abs(terms.U0 - (1 - np.sqrt(5)) / 2) < 1e-12
    assert abs(terms.U1 - 1j / np.sqrt(5)) < 1e-12
    assert abs(terms.U1.real) < 1e-14 and abs(terms.U2c.imag) < 1e-14


def test_middle_branch_large_t():
    terms = outer.outer_terms(100.0)
    assert abs(terms.U0 + 1.0 / 100.0) < 1e-5


def test_too_close_to_bifurcation():
    with pytest.raises(TooCloseToBifurcation):
        outer.outer_terms(T_STAR + 1e-12)


def test_eval_orders():
    t = 2.0
    assert outer.outer_eval(t, 0.0, 2) == outer.outer_terms(t).U0
    v = outer.outer_eval(t, 1e-3, 1)
    ref = (1 - np.sqrt(5)) / 2 + 1e-3 * 1j / np.sqrt(5)
    assert abs(v - ref) < 1e-14


def test_validity_window():
    lo, hi = outer.outer_validity(1e-5, 10.0)
    assert abs(lo - (T_STAR + 10 * 1e-4)) < 1e-12 and hi == np.inf
    lo2, _ = outer.outer_validity(5e-6, 10.0)
    ratio = (lo - T_STAR) / (lo2 - T_STAR)
    assert abs(ratio - 2 ** 0.8) < 1e-12
    lo3, _ = outer.outer_validity(1e-3, 1.0)
    assert abs((lo3 - T_STAR) - 10 ** (-12 / 5)) < 1e-12


def test_singular_exponent_table():
    assert outer.singular_exponents(0) == 0.0
    assert outer.singular_exponents(1) == -0.5
    assert outer.singular_exponents(2) == -4.5


def test_fitted_blowup_exponents():
    # fitted blow-up rates near t* validate the table (and the leading
    # square-root approach of the branch itself)
    ss = np.geomspace(1e-7, 1e-4, 9)
    u0 = np.array([outer.outer_terms(T_STAR + s, 0).U0 for s in ss])
    u1 = np.array([abs(outer.outer_terms(T_STAR + s, 1).U1) for s in ss])
    u2 = np.array([abs(outer.outer_terms(T_STAR + s, 2).U2c) for s in ss])
    sl0 = np.polyfit(np.log(ss), np.log(u0 - U_STAR), 1)
    assert abs(sl0[0] - 0.5) < 1e-3
    assert abs(np.exp(sl0[1]) - 1 / np.sqrt(3)) < 1e-3
    sl1 = np.polyfit(np.log(ss), np.log(u1), 1)[0]
    assert abs(sl1 - outer.singular_exponents(1)) < 1e-3
    sl2 = np.polyfit(np.log(ss), np.log(u2), 1)[0]
    assert abs(sl2 - outer.singular_exponents(2)) < 1e-3


def test_first_term_identity_pointwise():
    for t in (1.95, 2.4, 3.7, 9.0):
        terms = outer.outer_terms(t)
        resid = terms.U1.imag * (3 * terms.U0 ** 2 - t) * (terms.U0 ** 2 - t) \
            + terms.U0
        assert abs(resid) < 1e-12


def _equation_residual(t, eps, order):
    h = 1e-5
    up = outer.outer_eval(t + h, eps, order)
    um = outer.outer_eval(t - h, eps, order)
    du = (up - um) / (2 * h)
    u = outer.outer_eval(t, eps, order)
    return abs(eps * 1j * du + abs(u) ** 2 * u - t * u - 1.0)


@pytest.mark.parametrize("order", [0, 1, 2])
def test_equation_residual_order(order):
    t = 2.2
    eps_grid = np.array([1e-2, 1e-3, 1e-4])
    res = np.array([_equation_residual(t, e, order) for e in eps_grid])
    slope = np.polyfit(np.log(eps_grid), np.log(res), 1)[0]
    assert abs(slope - (order + 1)) < 0.3
