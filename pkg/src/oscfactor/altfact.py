"""Reversed factorization B+ B- = H - 1/2.

Two coefficient families are provided. The general kappa family

    alpha = sqrt(1 + kappa2 e^{x^2} / w^2),  beta = (x w + e^{x^2}) / sqrt(w^2 + kappa2 e^{x^2}),
    w = kappa1 - int_0^x e^{t^2} dt,

is singular where w vanishes and is offered for evaluation and singularity
detection only. The particular family with alpha * beta = x,

    alpha = sqrt(1 + gamma3 e^{x^2}),  beta = x / alpha,  gamma3 >= 0,

carries the full machinery: operator, weight, eigenfunctions
``H_n = alpha^{-1} psi_n`` and the modified Hermite limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import InadmissibleParameters, SingularityError
from .factorization import CoeffBundle
from .jet import Jet
from .operators import (ResidualReport, b_minus, b_plus, hamiltonian, residual_report,
                        shifted)
from .specfun import (EXP_INTEGRAL_X_MAX, DifferentiableFn, Grid, _scalar_or_array,
                      exp_integral, exp_integral_jet, gauss_jet, hermite, hermite_jet,
                      psi_derivatives)
from .eigenfunctions import gram_from_members

KAPPA_EXCLUSION = 1e-6
GAMMA3_GRID = Grid(-4.0, 4.0, 401)
N_MAX = 32


def _guard(x):
    if np.any(np.abs(np.asarray(x)) > EXP_INTEGRAL_X_MAX):
        raise OverflowError(f"e^(x^2) overflows guard for |x| > {EXP_INTEGRAL_X_MAX}")


# gamma3 family ------------------------------------------------------------

@dataclass(frozen=True)
class Gamma3Param:
    gamma3: float

    def __post_init__(self):
        if not (math.isfinite(self.gamma3) and self.gamma3 >= 0.0):
            raise InadmissibleParameters(f"gamma3 must be >= 0, got {self.gamma3}")

    def jets(self, x, order: int) -> tuple[Jet, Jet]:
        _guard(x)
        t = Jet.variable(x, order)
        alpha = (1.0 + gauss_jet(x, order, sign=1.0) * self.gamma3).sqrt()
        return alpha, t / alpha


def _g3(g) -> Gamma3Param:
    return g if isinstance(g, Gamma3Param) else Gamma3Param(float(g))


def gamma3_coeffs(g: Gamma3Param, x) -> CoeffBundle:
    g = _g3(g)
    _guard(x)
    x = np.asarray(x, dtype=float)
    big = np.exp(x * x)
    alpha = np.sqrt(1.0 + g.gamma3 * big)
    alpha_prime = g.gamma3 * x * big / alpha
    beta = x / alpha
    beta_prime = 1.0 / alpha - x * alpha_prime / alpha ** 2
    return CoeffBundle(*(_scalar_or_array(v) for v in (alpha, beta, alpha_prime, beta_prime)))


def _check_n(n):
    if int(n) != n or not 0 <= n <= N_MAX:
        raise ValueError(f"n must be an integer in 0..{N_MAX}, got {n}")


def hn_gamma3_fn(g: Gamma3Param, n: int) -> DifferentiableFn:
    g = _g3(g)
    _check_n(n)

    def jet_fn(x, k):
        alpha, _ = g.jets(x, k)
        return Jet.from_derivatives(psi_derivatives(n, x, k)) / alpha

    return DifferentiableFn(jet_fn, name=f"H{n}^g3")


def hn_gamma3(g: Gamma3Param, n: int, x):
    """psi_n / sqrt(1 + gamma3 e^{x^2}); equals B- psi_{n+1} / sqrt(n + 1)."""
    return hn_gamma3_fn(g, n).eval(x)


def l_tilde_gamma3(g: Gamma3Param, f: DifferentiableFn) -> DifferentiableFn:
    """Explicit form of B- B+ - 1/2 for the gamma3 coefficients."""
    g = _g3(g)

    def jet_fn(x, k):
        _guard(x)
        t = Jet.variable(x, k)
        big = gauss_jet(x, k, sign=1.0) * g.gamma3
        a2 = 1.0 + big
        fj = f.jet(x, k + 2)
        f1 = fj.diff()
        drift = t * big / a2
        pot = (1.0 + t * t + big) / (a2 * a2 * 2.0) - 0.5
        return pot * fj - drift * f1 - f1.diff() * 0.5

    return DifferentiableFn(jet_fn, f.max_order - 2, f"Lt3[{f.name}]")


def l_tilde_gamma3_composed(g: Gamma3Param, f: DifferentiableFn) -> DifferentiableFn:
    g = _g3(g)
    return shifted(b_minus(g, b_plus(g, f)), f, -0.5)


def apply_L_tilde_gamma3(g: Gamma3Param, f: DifferentiableFn, x):
    return l_tilde_gamma3(g, f).eval(x)


def l_gamma3(g: Gamma3Param, f: DifferentiableFn) -> DifferentiableFn:
    """(1 + g3 e^{x^2}) f'' + 2 g3 x e^{x^2} f' + (g3 e^{x^2} + g3^2 e^{2x^2} - x^2)/(1 + g3 e^{x^2}) f."""
    g = _g3(g)

    def jet_fn(x, k):
        _guard(x)
        t = Jet.variable(x, k)
        big = gauss_jet(x, k, sign=1.0) * g.gamma3
        a2 = 1.0 + big
        fj = f.jet(x, k + 2)
        f1 = fj.diff()
        q = (big + big * big - t * t) / a2
        return a2 * f1.diff() + big * t * 2.0 * f1 + q * fj

    return DifferentiableFn(jet_fn, f.max_order - 2, f"L3[{f.name}]")


def apply_L_gamma3(g: Gamma3Param, f: DifferentiableFn, x):
    return l_gamma3(g, f).eval(x)


def weight_gamma3(g: Gamma3Param, x):
    g = _g3(g)
    _guard(x)
    x = np.asarray(x, dtype=float)
    return _scalar_or_array(2.0 * (1.0 + g.gamma3 * np.exp(x * x)))


def alt_factorization_residual(g: Gamma3Param, f: DifferentiableFn,
                               grid: Grid = GAMMA3_GRID) -> ResidualReport:
    """Residual of B+ B- f - (H - 1/2) f with gamma3 coefficients."""
    g = _g3(g)
    x = grid.points
    fx = f.eval(x)
    lhs = b_plus(g, b_minus(g, f)).eval(x)
    ref = hamiltonian(f).eval(x) - 0.5 * fx
    return residual_report(lhs - ref, ref, grid, scale=fx)


def eigen_residual_gamma3(g: Gamma3Param, n: int, grid: Grid = GAMMA3_GRID) -> ResidualReport:
    g = _g3(g)
    f = hn_gamma3_fn(g, n)
    x = grid.points
    source = (n + 0.5) * weight_gamma3(g, x) * f.eval(x)
    return residual_report(l_gamma3(g, f).eval(x) + source, source, grid)


def gram_matrix_gamma3(g: Gamma3Param, n_max: int, cutoff: float = 12.0) -> np.ndarray:
    g = _g3(g)
    members = [hn_gamma3_fn(g, n) for n in range(n_max + 1)]
    return gram_from_members(members, lambda x: weight_gamma3(g, x), cutoff=cutoff)


# modified Hermite limit ---------------------------------------------------

def modified_hermite_fn(n: int) -> DifferentiableFn:
    """G_n = e^{-x^2} H_n(x)."""
    _check_n(n)
    return DifferentiableFn(lambda x, k: gauss_jet(x, k) * hermite_jet(n, x, k), name=f"G_{n}")


def modified_hermite_residual(n: int, x):
    """G'' + 2x G' + 2(n+1) G for G_n = e^{-x^2} H_n; identically zero."""
    x = np.asarray(x, dtype=float)
    d = modified_hermite_fn(n).jet(x, 2).derivatives()
    return _scalar_or_array(d[2] + 2.0 * x * d[1] + 2.0 * (n + 1) * d[0])


def gamma3_limit_deviation(g: Gamma3Param, n: int, grid: Grid = GAMMA3_GRID) -> float:
    """sup |sqrt(g3) H_n^{g3} / c_n - G_n| / sup |G_n| with c_n the psi_n normalization."""
    g = _g3(g)
    x = grid.points
    c_n = (2.0 ** n * math.factorial(n) * math.sqrt(math.pi)) ** -0.5
    scaled = math.sqrt(g.gamma3) * np.asarray(hn_gamma3(g, n, x)) / c_n
    target = np.exp(-x * x) * np.asarray(hermite(n, x))
    return float(np.max(np.abs(scaled - target)) / np.max(np.abs(target)))


# kappa family -------------------------------------------------------------

def locate_kappa_singularity(kappa1: float) -> float | None:
    """Unique root of int_0^x e^{t^2} dt = kappa1, or None when out of representable range."""
    if not math.isfinite(kappa1) or abs(kappa1) > exp_integral(EXP_INTEGRAL_X_MAX):
        return None
    if kappa1 == 0.0:
        return 0.0
    # solve to float resolution in x: the residual in kappa1 scales with e^{x^2}
    lo, hi = (0.0, EXP_INTEGRAL_X_MAX) if kappa1 > 0 else (-EXP_INTEGRAL_X_MAX, 0.0)
    return float(optimize.brentq(lambda t: exp_integral(t) - kappa1, lo, hi,
                                 xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500))


@dataclass(frozen=True)
class KappaParams:
    kappa1: float
    kappa2: float
    branch: tuple[int, int] = (1, 1)
    singular_x: float | None = field(init=False, default=None)

    def __post_init__(self):
        if not (math.isfinite(self.kappa1) and math.isfinite(self.kappa2)):
            raise ValueError("kappa1 and kappa2 must be finite")
        if any(s not in (1, -1) for s in self.branch):
            raise ValueError(f"branch signs must be +-1, got {self.branch}")
        object.__setattr__(self, "singular_x", locate_kappa_singularity(self.kappa1))

    def check(self, x) -> None:
        _guard(x)
        if self.singular_x is not None and np.any(
                np.abs(np.asarray(x) - self.singular_x) <= KAPPA_EXCLUSION):
            raise SingularityError(
                f"kappa1 - int_0^x e^(t^2) dt vanishes at x = {self.singular_x:.12g}")

    def jets(self, x, order: int) -> tuple[Jet, Jet]:
        self.check(x)
        t = Jet.variable(x, order)
        big = gauss_jet(x, order, sign=1.0)
        w = self.kappa1 - exp_integral_jet(x, order)
        rad = w * w + big * self.kappa2
        if np.any(rad.value < 0.0):
            raise InadmissibleParameters("negative radicand in the kappa coefficients")
        alpha = (rad / (w * w)).sqrt() * self.branch[0]
        beta = (t * w + big) / rad.sqrt() * self.branch[1]
        return alpha, beta


def kappa_branch_consistent(k: KappaParams, x) -> np.ndarray:
    """Where the chosen sign pair makes B+ B- = H - 1/2 hold.

    The factorization needs sign(alpha) * sign(beta) * sign(w) = +1, so a
    fixed branch is valid only on one side of the singularity.
    """
    k.check(x)
    w = k.kappa1 - np.asarray(exp_integral(x))
    return k.branch[0] * k.branch[1] * np.sign(w) > 0


def kappa_factorization_residual(k: KappaParams, f: DifferentiableFn, grid: Grid) -> ResidualReport:
    """Residual of B+ B- f - (H - 1/2) f with kappa coefficients."""
    x = grid.points
    fx = f.eval(x)
    lhs = b_plus(k, b_minus(k, f)).eval(x)
    ref = hamiltonian(f).eval(x) - 0.5 * fx
    return residual_report(lhs - ref, ref, grid, scale=fx)


def kappa_coeffs(k: KappaParams, x) -> CoeffBundle:
    alpha, beta = k.jets(np.asarray(x, dtype=float), 1)
    return CoeffBundle(*(_scalar_or_array(v) for v in (
        alpha.value, beta.value, alpha.derivative(1), beta.derivative(1))))
