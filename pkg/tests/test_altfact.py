import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oscfactor import altfact as af
from oscfactor import operators as ops
from oscfactor.battery import function_battery
from oscfactor.eigenfunctions import normalized_offdiagonal
from oscfactor.errors import InadmissibleParameters, SingularityError
from oscfactor.specfun import Grid, exp_integral, gaussian_fn, psi, psi_fn

from conftest import richardson, sup

E_ONE = 1.4626517459071815
X4 = af.GAMMA3_GRID.points


# gamma3 family ------------------------------------------------------------

def test_gamma3_coeff_examples():
    c = af.gamma3_coeffs(af.Gamma3Param(1.0), 0.0)
    assert c.alpha == pytest.approx(math.sqrt(2), rel=1e-15) and c.beta == 0.0
    assert af.gamma3_coeffs(af.Gamma3Param(1.0), 1.0).alpha == pytest.approx(math.sqrt(1 + math.e), rel=1e-15)
    s = af.gamma3_coeffs(af.Gamma3Param(0.0), X4)
    assert np.all(s.alpha == 1.0) and np.all(s.beta == X4)
    with pytest.raises(InadmissibleParameters):
        af.Gamma3Param(-0.1)


@given(st.floats(0.0, 50.0), st.floats(-3, 3))
def test_gamma3_product_and_derivatives(g, x):
    p = af.Gamma3Param(g)
    c = af.gamma3_coeffs(p, x)
    assert c.alpha * c.beta == pytest.approx(x, rel=1e-13, abs=1e-15)
    assert c.alpha_prime == pytest.approx(richardson(lambda t: af.gamma3_coeffs(p, t).alpha, x, 1), rel=1e-6, abs=1e-8)
    assert c.beta_prime == pytest.approx(richardson(lambda t: af.gamma3_coeffs(p, t).beta, x, 1), rel=1e-6, abs=1e-8)


@given(st.floats(0.01, 100.0))
def test_gamma3_alpha_grows_with_abs_x(g):
    a = af.gamma3_coeffs(af.Gamma3Param(g), np.linspace(0, 4, 401)).alpha
    assert np.all(np.diff(a) > 0)


def test_hn_gamma3_examples():
    g = af.Gamma3Param(1.0)
    assert af.hn_gamma3(g, 0, 0.0) == pytest.approx(math.pi ** -0.25 / math.sqrt(2), rel=1e-14)
    for n in range(5):
        assert np.all(af.hn_gamma3(af.Gamma3Param(0.0), n, X4) == psi(n, X4))
    two_path = ops.b_minus(g, psi_fn(2))(0.5)
    assert two_path == pytest.approx(math.sqrt(2) * af.hn_gamma3(g, 1, 0.5), rel=1e-12)


@pytest.mark.parametrize("f", function_battery(), ids=lambda f: f.name)
@pytest.mark.parametrize("g", [0.1, 1.0, 10.0])
def test_reversed_factorization_battery(f, g):
    assert af.alt_factorization_residual(af.Gamma3Param(g), f).relative < 1e-9


def test_reversed_factorization_on_ground_state_is_absolute():
    # (H - 1/2) psi_0 vanishes, so the report falls back to the absolute residual
    rep = af.alt_factorization_residual(af.Gamma3Param(1.0), psi_fn(0))
    assert rep.normalizer == 0.0 and rep.relative < 1e-12


def test_l_tilde_gamma3_examples():
    g = af.Gamma3Param(1.0)
    assert af.apply_L_tilde_gamma3(g, af.hn_gamma3_fn(g, 1), 0.3) == pytest.approx(1.5 * af.hn_gamma3(g, 1, 0.3), rel=1e-12)
    f = gaussian_fn(0.2, 0.9)
    assert sup(af.l_tilde_gamma3(af.Gamma3Param(0.0), f)(X4) - ops.hamiltonian(f)(X4)) < 1e-13
    h = af.Gamma3Param(0.5)
    a = af.apply_L_tilde_gamma3(h, psi_fn(0), -0.7)
    b = af.l_tilde_gamma3_composed(h, psi_fn(0))(-0.7)
    assert a == pytest.approx(b, rel=1e-10)


@settings(max_examples=20)
@given(st.floats(0.0, 20.0))
def test_selfadjoint_gamma3_is_minus_weight_times_l_tilde(g):
    p = af.Gamma3Param(g)
    f = gaussian_fn(-0.3, 0.8, poly=(1.0, 1.0))
    lhs = af.l_gamma3(p, f)(X4)
    rhs = -af.weight_gamma3(p, X4) * af.l_tilde_gamma3(p, f)(X4)
    assert sup(lhs - rhs) <= 1e-10 * sup(rhs)


def test_weight_gamma3_examples():
    assert np.all(af.weight_gamma3(af.Gamma3Param(0.0), X4) == 2.0)
    assert af.weight_gamma3(af.Gamma3Param(1.0), 1.0) == pytest.approx(2 * (1 + math.e), rel=1e-15)


@pytest.mark.parametrize("g", [0.1, 1.0, 10.0])
def test_gamma3_eigen_residuals(g):
    for n in range(7):
        assert af.eigen_residual_gamma3(af.Gamma3Param(g), n).relative < 1e-8


@pytest.mark.parametrize("g", [0.1, 1.0, 10.0])
def test_gamma3_orthogonality(g):
    G = af.gram_matrix_gamma3(af.Gamma3Param(g), 6)
    assert normalized_offdiagonal(G) < 1e-8


def test_gamma3_gram_diagonal_is_twice_unit():
    # H_n^2 omega = 2 psi_n^2, so the diagonal is exactly 2
    G = af.gram_matrix_gamma3(af.Gamma3Param(3.0), 4)
    np.testing.assert_allclose(np.diag(G), 2.0, rtol=1e-10)


def test_gamma3_guard():
    with pytest.raises(OverflowError):
        af.gamma3_coeffs(af.Gamma3Param(1.0), 27.0)


# modified Hermite ---------------------------------------------------------

def test_modified_hermite_examples():
    assert abs(af.modified_hermite_residual(1, 1.0)) < 1e-11
    assert abs(af.modified_hermite_residual(0, 0.5)) < 1e-11
    g4 = af.modified_hermite_fn(4)(np.linspace(-3, 3, 601))
    assert abs(af.modified_hermite_residual(4, -2.0)) / sup(g4) < 1e-10


@given(st.integers(0, 8), st.floats(-3, 3))
def test_modified_hermite_identity(n, x):
    g = af.modified_hermite_fn(n)
    scale = sup(g(np.linspace(-3, 3, 601)))
    fd = richardson(g, x, 2) + 2 * x * richardson(g, x, 1) + 2 * (n + 1) * g(x)
    assert abs(fd) / scale < 1e-5
    assert abs(af.modified_hermite_residual(n, x)) / scale < 1e-10


def test_gamma3_limit_deviation_decreases():
    devs = [af.gamma3_limit_deviation(af.Gamma3Param(s), 1) for s in (1.0, 1e2, 1e4)]
    assert devs[0] > devs[1] > devs[2]
    assert devs[1] / devs[2] > 50


# kappa family -------------------------------------------------------------

def test_kappa_singularity_locator():
    assert af.locate_kappa_singularity(0.0) == 0.0
    assert af.locate_kappa_singularity(E_ONE) == pytest.approx(1.0, abs=1e-9)
    assert af.locate_kappa_singularity(-E_ONE) == pytest.approx(-1.0, abs=1e-9)
    assert af.locate_kappa_singularity(1e300) is None


@given(st.floats(-1e4, 1e4))
def test_kappa_singularity_invariant(k1):
    x = af.locate_kappa_singularity(k1)
    assert abs(k1 - exp_integral(x)) < 1e-9


@given(st.floats(1e4, 1e280))
def test_kappa_singularity_relative_for_large_kappa(k1):
    # one ulp in x moves the integral by ~2 x^2 eps relative, so absolute accuracy cannot hold here
    x = af.locate_kappa_singularity(k1)
    eps = np.finfo(float).eps
    assert abs(k1 - exp_integral(x)) < (4 * x * x + 16) * eps * k1


def test_kappa_examples():
    k = af.KappaParams(2.0, 0.0)
    c = af.kappa_coeffs(k, 0.5)
    assert c.alpha == pytest.approx(1.0, rel=1e-15)
    assert c.beta == pytest.approx(0.5 + math.exp(0.25) / (2.0 - exp_integral(0.5)), rel=1e-14)
    assert af.kappa_coeffs(af.KappaParams(5.0, 1.0), 0.0).alpha == pytest.approx(math.sqrt(1 + 1 / 25), rel=1e-15)
    with pytest.raises(SingularityError):
        af.kappa_coeffs(af.KappaParams(1.4626517, 1.0), 1.0)


def test_kappa_negative_radicand():
    with pytest.raises(InadmissibleParameters):
        af.kappa_coeffs(af.KappaParams(2.0, -100.0), 0.0)


def test_kappa_branch_rule():
    # sign(alpha) sign(beta) sign(w) = +1 is what makes B+ B- = H - 1/2 hold
    right = Grid(-2.0, 0.7, 271)
    k = af.KappaParams(2.0, 1.0)
    assert np.all(af.kappa_branch_consistent(k, right.points))
    assert af.kappa_factorization_residual(k, psi_fn(1), right).relative < 1e-9
    left = Grid(-1.2, 2.0, 321)
    k = af.KappaParams(-3.0, 1.0)
    assert not np.any(af.kappa_branch_consistent(k, left.points))
    assert af.kappa_factorization_residual(k, psi_fn(1), left).relative > 1e-3
    flipped = af.KappaParams(-3.0, 1.0, branch=(1, -1))
    assert af.kappa_factorization_residual(flipped, psi_fn(1), left).relative < 1e-9


def test_kappa_branch_validation():
    with pytest.raises(ValueError):
        af.KappaParams(1.0, 1.0, branch=(1, 0))
