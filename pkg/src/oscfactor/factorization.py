"""Two-parameter factorization coefficients, admissibility and ODE residuals.

Notation used throughout: ``u = gamma1 + F(x)``, ``e = exp(-x^2)``,
``D = u^2 - gamma2 * e``. Then

    alpha = |u| / sqrt(D)        (plus-sign branch)
    beta  = alpha * beta_M,      beta_M = x + e / u

where ``beta_M`` solves the oscillator Riccati equation and alpha solves the
Bernoulli equation obtained by substituting it back.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .errors import InadmissibleParameters
from .jet import Jet
from .specfun import SQRT_PI_2, erf_integral, erf_integral_jet, gauss_jet

SINGULAR_MARGIN = 1e-12
ORACLE_HALF_WIDTH = 10.0
ORACLE_STEP = 1e-3


@dataclass(frozen=True)
class CoeffBundle:
    alpha: float
    beta: float
    alpha_prime: float
    beta_prime: float


@dataclass(frozen=True)
class Standard:
    """alpha = 1, beta = x: the usual a, a* factorization."""

    def jets(self, x, order: int) -> tuple[Jet, Jet]:
        t = Jet.variable(x, order)
        return Jet.constant(np.ones_like(t.value), order), t


STANDARD = Standard()


@dataclass(frozen=True)
class TwoParams:
    gamma1: float
    gamma2: float

    def __post_init__(self):
        if not (math.isfinite(self.gamma1) and math.isfinite(self.gamma2)):
            raise ValueError("gamma1 and gamma2 must be finite")

    def jets(self, x, order: int) -> tuple[Jet, Jet]:
        require_admissible(self)
        pieces = _two_param_jets(self, x, order)
        return pieces["alpha"], pieces["beta"]

    def mirrored(self) -> "TwoParams":
        return TwoParams(-self.gamma1, self.gamma2)


@dataclass(frozen=True)
class DeltaParam:
    delta: float

    def __post_init__(self):
        if not self.delta > -1.0 or not math.isfinite(self.delta):
            raise InadmissibleParameters(f"delta must satisfy -1 < delta < inf, got {self.delta}")

    def jets(self, x, order: int) -> tuple[Jet, Jet]:
        t = Jet.variable(x, order)
        alpha = 1.0 / (1.0 + gauss_jet(x, order) * self.delta).sqrt()
        return alpha, t * alpha


# admissibility ------------------------------------------------------------

def admissible_paper(p: TwoParams) -> bool:
    """Closed-form inequality: |gamma1| > sqrt(pi)/2 and (gamma2 <= 0 or gamma2 < gamma1^2 - 1)."""
    g1, g2 = p.gamma1, p.gamma2
    return bool(abs(g1) > SQRT_PI_2 and (g2 <= 0.0 or g2 < g1 * g1 - 1.0))


class OracleResult(NamedTuple):
    admissible: bool
    min_g: float
    min_u: float


@lru_cache(maxsize=1)
def _scan_tables():
    n = int(round(2 * ORACLE_HALF_WIDTH / ORACLE_STEP)) + 1
    x = np.linspace(-ORACLE_HALF_WIDTH, ORACLE_HALF_WIDTH, n)
    return x, np.asarray(erf_integral(x)), np.exp(-x * x)


def _golden_minimize(fun, a, b, iters: int = 48):
    """Vectorized golden-section search on the brackets [a, b]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = np.array(a, dtype=float), np.array(b, dtype=float)
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(iters):
        left = fc < fd
        # left: keep [a, d], old c becomes the new d; else keep [c, b], old d becomes c
        a, b = np.where(left, a, c), np.where(left, d, b)
        keep, fkeep = np.where(left, c, d), np.where(left, fc, fd)
        fresh = np.where(left, b - invphi * (b - a), a + invphi * (b - a))
        ffresh = fun(fresh)
        c, fc = np.where(left, fresh, keep), np.where(left, ffresh, fkeep)
        d, fd = np.where(left, keep, fresh), np.where(left, fkeep, ffresh)
    xm = 0.5 * (a + b)
    return xm, fun(xm)


def _g(p: TwoParams, x):
    u = p.gamma1 + np.asarray(erf_integral(x))
    return u * u - p.gamma2 * np.exp(-np.asarray(x) ** 2)


def admissible_oracle(p: TwoParams) -> OracleResult:
    """Numerical admissibility: infima of g = (gamma1+F)^2 - gamma2 e^{-x^2} and |gamma1+F|.

    Dense scan of [-10, 10] at step 1e-3, golden-section refinement of every
    interior local minimum, plus the asymptotic values at x = +-inf.
    """
    return _oracle_cached(float(p.gamma1), float(p.gamma2))


@lru_cache(maxsize=4096)
def _oracle_cached(g1: float, g2: float) -> OracleResult:
    return admissible_oracle_row(g1, [g2])[0]


def admissible_oracle_row(gamma1: float, gamma2s) -> list[OracleResult]:
    """Oracle for many gamma2 values at one gamma1, vectorized over the row."""
    g1 = float(gamma1)
    g2 = np.asarray(gamma2s, dtype=float).reshape(-1, 1)
    x, F, e = _scan_tables()
    u = g1 + F
    g = u * u - g2 * e
    min_g = np.minimum(g.min(axis=1), min((g1 - SQRT_PI_2) ** 2, (g1 + SQRT_PI_2) ** 2))
    # refine only minima that can undercut the scan by more than rounding:
    # within h^2/8 max|g''| of the row minimum, with curvature above noise
    mid = g[:, 1:-1]
    curv = g[:, :-2] + g[:, 2:] - 2.0 * mid
    slack = ORACLE_STEP ** 2 * (4.0 + 4.0 * abs(g1) + 2.0 * np.abs(g2))
    cand = (mid < g[:, :-2]) & (mid <= g[:, 2:]) & (curv > 1e-12 * np.abs(mid))
    rows, cols = np.nonzero(cand & (mid <= g.min(axis=1, keepdims=True) + slack))
    if rows.size:
        cols = cols + 1
        rg2 = g2[rows, 0]

        def fun(t):
            ut = g1 + np.asarray(erf_integral(t))
            return ut * ut - rg2 * np.exp(-t * t)

        _, vals = _golden_minimize(fun, x[cols - 1], x[cols + 1])
        np.minimum.at(min_g, rows, vals)
    if np.any(np.sign(u[:-1]) != np.sign(u[1:])) or np.any(u == 0.0):
        min_u = 0.0
    else:
        min_u = min(float(np.abs(u).min()), abs(g1 - SQRT_PI_2), abs(g1 + SQRT_PI_2))
    return [OracleResult(bool(m > SINGULAR_MARGIN and min_u > SINGULAR_MARGIN), float(m), min_u)
            for m in min_g]


def require_admissible(p: TwoParams) -> None:
    res = admissible_oracle(p)
    if not res.admissible:
        raise InadmissibleParameters(
            f"(gamma1, gamma2) = ({p.gamma1}, {p.gamma2}) is singular: "
            f"min g = {res.min_g:.3e}, min |gamma1+F| = {res.min_u:.3e}")


# coefficients -------------------------------------------------------------

def _two_param_jets(p: TwoParams, x, order: int) -> dict[str, Jet]:
    t = Jet.variable(x, order)
    e = gauss_jet(x, order)
    u = erf_integral_jet(x, order) + p.gamma1
    D = u * u - e * p.gamma2
    alpha = u.abs() / D.sqrt()
    beta_m = t + e / u
    return {"u": u, "e": e, "D": D, "alpha": alpha, "beta_M": beta_m, "beta": alpha * beta_m}


def _closed_form(p: TwoParams, x):
    x = np.asarray(x, dtype=float)
    e = np.exp(-x * x)
    u = p.gamma1 + np.asarray(erf_integral(x))
    alpha = np.abs(u) / np.sqrt(u * u - p.gamma2 * e)
    beta_m = x + e / u
    beta_m_prime = 1.0 - 2.0 * x * e / u - (e / u) ** 2
    alpha_prime = -p.gamma2 * e * alpha ** 3 * beta_m / (u * u)
    beta = alpha * beta_m
    beta_prime = alpha_prime * beta_m + alpha * beta_m_prime
    return alpha, beta, alpha_prime, beta_prime


def _bundle(*arrays) -> CoeffBundle:
    return CoeffBundle(*(float(a) if np.ndim(a) == 0 else np.asarray(a) for a in arrays))


def coeffs_two_param(p: TwoParams, x) -> CoeffBundle:
    """alpha, beta and their first derivatives for an admissible (gamma1, gamma2)."""
    require_admissible(p)
    return _bundle(*_closed_form(p, x))


def coeffs_delta(d: DeltaParam, x) -> CoeffBundle:
    """Coefficients of the beta/alpha = x family: alpha = (1 + delta e^{-x^2})^{-1/2}, beta = x alpha."""
    if not isinstance(d, DeltaParam):
        d = DeltaParam(float(d))
    x = np.asarray(x, dtype=float)
    e = np.exp(-x * x)
    alpha = 1.0 / np.sqrt(1.0 + d.delta * e)
    alpha_prime = d.delta * x * e * alpha ** 3
    return _bundle(alpha, x * alpha, alpha_prime, alpha + x * alpha_prime)


def delta_embedding(d: DeltaParam, gamma1_magnitude: float) -> TwoParams:
    """Point (gamma1, -delta gamma1^2) that tends to the delta family as |gamma1| grows."""
    if not isinstance(d, DeltaParam):
        d = DeltaParam(float(d))
    p = TwoParams(float(gamma1_magnitude), -d.delta * float(gamma1_magnitude) ** 2)
    require_admissible(p)
    return p


# residuals ----------------------------------------------------------------

def riccati_ratio(gamma1: float, x):
    """beta/alpha = x + e^{-x^2}/(gamma1 + F) and its derivative.

    ``gamma1 = +-inf`` gives the particular solution beta/alpha = x.
    """
    x = np.asarray(x, dtype=float)
    if math.isinf(gamma1):
        return x, np.ones_like(x)
    e = np.exp(-x * x)
    u = gamma1 + np.asarray(erf_integral(x))
    return x + e / u, 1.0 - 2.0 * x * e / u - (e / u) ** 2


def riccati_residual(gamma1: float, x):
    """d/dx(beta/alpha) + (beta/alpha)^2 - (1 + x^2)."""
    if not math.isinf(gamma1) and abs(gamma1) <= SQRT_PI_2:
        raise InadmissibleParameters(f"|gamma1| must exceed sqrt(pi)/2, got {gamma1}")
    x = np.asarray(x, dtype=float)
    y, y_prime = riccati_ratio(gamma1, x)
    r = y_prime + y * y - (1.0 + x * x)
    return float(r) if r.ndim == 0 else r


def bernoulli_residual(p: TwoParams, x):
    """alpha' + alpha (alpha^2 - 1)(x + e^{-x^2}/(gamma1 + F))."""
    require_admissible(p)
    alpha, _, alpha_prime, _ = _closed_form(p, x)
    y, _ = riccati_ratio(p.gamma1, x)
    r = alpha_prime + alpha * (alpha * alpha - 1.0) * y
    return float(r) if np.ndim(r) == 0 else r


def coupled_residuals(p: TwoParams, x):
    """(alpha' + beta alpha^2 - beta, beta' + alpha beta^2 - (1 + x^2) alpha)."""
    require_admissible(p)
    x = np.asarray(x, dtype=float)
    alpha, beta, alpha_prime, beta_prime = _closed_form(p, x)
    r1 = alpha_prime + beta * alpha ** 2 - beta
    r2 = beta_prime + alpha * beta ** 2 - (1.0 + x * x) * alpha
    if r1.ndim == 0:
        return float(r1), float(r2)
    return r1, r2
