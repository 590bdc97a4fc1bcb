import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import optimize

from oscfactor.errors import InadmissibleParameters
from oscfactor.factorization import (DeltaParam, TwoParams, admissible_oracle,
                                     admissible_oracle_row, admissible_paper, bernoulli_residual,
                                     coeffs_delta, coeffs_two_param, coupled_residuals,
                                     delta_embedding, require_admissible, riccati_residual)
from oscfactor.specfun import SQRT_PI_2, erf_integral

from conftest import admissible_params, richardson, sup, xs


def _g(g1, g2, x):
    return (g1 + erf_integral(x)) ** 2 - g2 * math.exp(-x * x)


# admissibility ------------------------------------------------------------

@pytest.mark.parametrize("g1, g2, expected", [
    (1.0, 0.0, True), (0.5, -1.0, False), (2.0, 3.5, False), (2.0, 2.9, True), (-2.0, -7.0, True),
])
def test_closed_form_inequality_examples(g1, g2, expected):
    assert admissible_paper(TwoParams(g1, g2)) is expected


def test_oracle_near_boundary_matches_scalar_minimizer():
    res = admissible_oracle(TwoParams(2.0, 2.9))
    assert res.admissible
    # independent bounded minimization of g around the hand-check point x = -0.5
    ref = optimize.minimize_scalar(lambda x: _g(2.0, 2.9, x), bounds=(-3, 2), method="bounded",
                                   options={"xatol": 1e-10}).fun
    assert res.min_g == pytest.approx(ref, rel=1e-9)
    assert _g(2.0, 2.9, -0.5) == pytest.approx(0.109, abs=5e-4)


def test_oracle_examples():
    sing = admissible_oracle(TwoParams(SQRT_PI_2, 0.0))
    assert not sing.admissible and sing.min_u < 1e-12
    far = admissible_oracle(TwoParams(10.0, -5.0))
    assert far.admissible and far.min_g >= (10.0 - SQRT_PI_2) ** 2 - 1e-9


def test_oracle_sees_sign_change_of_u():
    res = admissible_oracle(TwoParams(0.5, -3.0))
    assert not res.admissible and res.min_u == 0.0


def test_oracle_accepts_points_the_inequality_rejects():
    # the inequality is sufficient, not necessary
    p = TwoParams(1.5, 1.25)
    assert not admissible_paper(p)
    assert admissible_oracle(p).admissible


@settings(max_examples=40, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 8))
def test_closed_form_inequality_implies_oracle(g1, g2):
    p = TwoParams(g1, g2)
    if admissible_paper(p):
        assert admissible_oracle(p).admissible


def test_oracle_row_matches_scalar_calls():
    g2s = np.round(np.linspace(-3, 8, 23), 12)
    row = admissible_oracle_row(1.2, g2s)
    for g2, r in zip(g2s, row):
        assert r == admissible_oracle(TwoParams(1.2, float(g2)))


def test_require_admissible_raises():
    with pytest.raises(InadmissibleParameters):
        require_admissible(TwoParams(0.5, 0.0))
    with pytest.raises(InadmissibleParameters):
        coeffs_two_param(TwoParams(2.0, 3.5), 0.0)
    with pytest.raises(ValueError):
        TwoParams(math.nan, 0.0)


# coefficients -------------------------------------------------------------

def test_coefficients_at_origin():
    c = coeffs_two_param(TwoParams(1.5, 1.249), 0.0)
    assert c.alpha == pytest.approx(1.5 / math.sqrt(2.25 - 1.249), rel=1e-14)
    assert c.alpha == pytest.approx(1.499251, abs=1e-6)
    assert c.beta == pytest.approx(0.999500, abs=1e-6)
    m = coeffs_two_param(TwoParams(-1.5, 1.249), 0.0)
    assert m.alpha == pytest.approx(1.499251, abs=1e-6)
    assert m.beta == pytest.approx(-0.999500, abs=1e-6)


@given(st.floats(0.9, 50) , xs)
def test_mielnik_axis(g1, x):
    c = coeffs_two_param(TwoParams(g1, 0.0), x)
    assert c.alpha == 1.0
    assert c.beta == pytest.approx(x + math.exp(-x * x) / (g1 + erf_integral(x)), rel=1e-14, abs=1e-15)


@settings(max_examples=60)
@given(admissible_params(), xs)
def test_parity(p, x):
    a = coeffs_two_param(p, x)
    b = coeffs_two_param(p.mirrored(), -x)
    assert b.alpha == pytest.approx(a.alpha, rel=1e-12)
    assert b.beta == pytest.approx(-a.beta, rel=1e-12, abs=1e-15)


@settings(max_examples=40)
@given(admissible_params(), st.floats(-3, 3))
def test_closed_form_derivatives_match_finite_differences(p, x):
    c = coeffs_two_param(p, x)
    assert c.alpha_prime == pytest.approx(richardson(lambda t: coeffs_two_param(p, t).alpha, x, 1),
                                          rel=1e-6, abs=1e-8)
    assert c.beta_prime == pytest.approx(richardson(lambda t: coeffs_two_param(p, t).beta, x, 1),
                                         rel=1e-6, abs=1e-8)


@settings(max_examples=40)
@given(admissible_params(), st.floats(-4, 4))
def test_jets_agree_with_closed_form(p, x):
    alpha, beta = p.jets(np.asarray(x), 1)
    c = coeffs_two_param(p, x)
    assert alpha.derivative(1) == pytest.approx(c.alpha_prime, rel=1e-11, abs=1e-13)
    assert beta.derivative(1) == pytest.approx(c.beta_prime, rel=1e-11, abs=1e-13)


def test_delta_family_examples():
    c = coeffs_delta(DeltaParam(0.0), 1.3)
    assert (c.alpha, c.beta) == (1.0, 1.3)
    c = coeffs_delta(DeltaParam(3.0), 0.0)
    assert (c.alpha, c.beta) == (0.5, 0.0)
    assert coeffs_delta(DeltaParam(-1 + 1e-12), 0.0).alpha > 1e5
    with pytest.raises(InadmissibleParameters):
        DeltaParam(-1.0)


@given(st.floats(-0.99, 20), st.floats(-3, 3))
def test_delta_derivatives(delta, x):
    d = DeltaParam(delta)
    c = coeffs_delta(d, x)
    assert c.alpha_prime == pytest.approx(richardson(lambda t: coeffs_delta(d, t).alpha, x, 1),
                                          rel=1e-6, abs=1e-8)
    assert c.beta == pytest.approx(x * c.alpha)


def test_delta_embedding_examples():
    assert delta_embedding(DeltaParam(0.0), 1e3) == TwoParams(1e3, 0.0)
    assert delta_embedding(DeltaParam(0.5), 1e2) == TwoParams(100.0, -5000.0)
    p = delta_embedding(DeltaParam(-0.9), 1e3)
    assert p.gamma2 == pytest.approx(9e5) and admissible_paper(p)


def test_delta_embedding_converges():
    x = np.linspace(-5, 5, 1001)
    target = coeffs_delta(DeltaParam(0.5), x).alpha
    devs = [sup(coeffs_two_param(delta_embedding(DeltaParam(0.5), g), x).alpha - target)
            for g in (1e2, 1e3, 1e4)]
    assert devs[0] / devs[1] >= 8 and devs[1] / devs[2] >= 8


# residual identities ------------------------------------------------------

@pytest.mark.parametrize("g1", [2.0, -5.0, math.inf])
def test_riccati_examples(g1):
    assert sup(riccati_residual(g1, np.linspace(-6, 6, 601))) < 1e-11


def test_riccati_rejects_small_gamma1():
    with pytest.raises(InadmissibleParameters):
        riccati_residual(0.5, 0.0)


def test_bernoulli_examples():
    assert abs(bernoulli_residual(TwoParams(1.5, 1.249), 0.3)) < 1e-10
    assert abs(bernoulli_residual(TwoParams(1.5, -2.0), -1.1)) < 1e-10
    assert np.all(bernoulli_residual(TwoParams(2.0, 0.0), np.linspace(-5, 5, 11)) == 0.0)


def test_bernoulli_with_finite_difference_derivative():
    # alpha' from differences of alpha only, independent of the closed-form derivative
    p, x = TwoParams(1.5, -2.0), -1.1
    a = coeffs_two_param(p, x).alpha
    da = richardson(lambda t: coeffs_two_param(p, t).alpha, x, 1)
    y = x + math.exp(-x * x) / (p.gamma1 + erf_integral(x))
    assert abs(da + a * (a * a - 1) * y) < 1e-9


def test_coupled_examples():
    for p, x in ((TwoParams(1.5, 1.249), 0.0), (TwoParams(1.0, -0.5), 2.2), (TwoParams(3.0, 0.0), 0.7)):
        r1, r2 = coupled_residuals(p, x)
        assert abs(r1) < 1e-10 and abs(r2) < 1e-10


def test_coupled_with_finite_difference_derivatives():
    p, x = TwoParams(1.0, -0.5), 2.2
    c = coeffs_two_param(p, x)
    da = richardson(lambda t: coeffs_two_param(p, t).alpha, x, 1)
    db = richardson(lambda t: coeffs_two_param(p, t).beta, x, 1)
    assert abs(da + c.beta * c.alpha ** 2 - c.beta) < 1e-9
    assert abs(db + c.alpha * c.beta ** 2 - (1 + x * x) * c.alpha) < 1e-9


@settings(max_examples=40)
@given(admissible_params())
def test_residuals_vanish_on_grid(p):
    x = np.linspace(-6, 6, 601)
    assert sup(riccati_residual(p.gamma1, x)) < 1e-10
    assert sup(bernoulli_residual(p, x)) < 1e-10
    r1, r2 = coupled_residuals(p, x)
    assert max(sup(r1), sup(r2)) < 1e-10
