"""Pointwise differential operators acting on :class:`DifferentiableFn` values.

Every operator returns a new DifferentiableFn whose derivative tower is
propagated exactly through the coefficient jets, so compositions such as
``B+ a* B-`` stay free of finite-difference error. A first-order operator
lowers the available derivative order by one, a second-order one by two.

The coefficient family ``p`` may be ``None`` (standard alpha = 1, beta = x),
a :class:`TwoParams`, a :class:`DeltaParam`, or any object exposing
``jets(x, order) -> (alpha, beta)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .factorization import STANDARD, TwoParams, _two_param_jets, require_admissible
from .jet import Jet
from .specfun import DEFAULT_GRID, DifferentiableFn, Grid

SQRT2 = math.sqrt(2.0)


class OperatorTag(str, Enum):
    B_MINUS = "B_minus"
    B_PLUS = "B_plus"
    A = "a"
    A_STAR = "a_star"
    H = "H"
    L_TILDE = "L_tilde"
    L_SELFADJOINT = "L_selfadjoint"
    A_PLUS = "A_plus"
    A_MINUS = "A_minus"

    @property
    def order(self) -> int:
        if self in (OperatorTag.A_PLUS, OperatorTag.A_MINUS):
            return 3
        if self in (OperatorTag.H, OperatorTag.L_TILDE, OperatorTag.L_SELFADJOINT):
            return 2
        return 1


def _family(p):
    return STANDARD if p is None else p


def _lowered(f: DifferentiableFn, by: int, jet_fn, name: str) -> DifferentiableFn:
    return DifferentiableFn(jet_fn, f.max_order - by, name)


# first-order operators ----------------------------------------------------

def b_minus(p, f: DifferentiableFn) -> DifferentiableFn:
    """B- f = (alpha^{-1} f' + beta f) / sqrt(2)."""
    fam = _family(p)

    def jet_fn(x, k):
        alpha, beta = fam.jets(x, k)
        fj = f.jet(x, k + 1)
        return (fj.diff() / alpha + beta * fj) / SQRT2

    return _lowered(f, 1, jet_fn, f"B-[{f.name}]")


def b_plus(p, f: DifferentiableFn) -> DifferentiableFn:
    """B+ f = (-alpha f' + beta f) / sqrt(2)."""
    fam = _family(p)

    def jet_fn(x, k):
        alpha, beta = fam.jets(x, k)
        fj = f.jet(x, k + 1)
        return (beta * fj - alpha * fj.diff()) / SQRT2

    return _lowered(f, 1, jet_fn, f"B+[{f.name}]")


def annihilation(f: DifferentiableFn) -> DifferentiableFn:
    """a f = (f' + x f) / sqrt(2)."""
    return b_minus(None, f)


def creation(f: DifferentiableFn) -> DifferentiableFn:
    """a* f = (-f' + x f) / sqrt(2)."""
    return b_plus(None, f)


_FIRST_ORDER = {
    OperatorTag.B_MINUS: b_minus,
    OperatorTag.B_PLUS: b_plus,
    OperatorTag.A: lambda p, f: annihilation(f),
    OperatorTag.A_STAR: lambda p, f: creation(f),
}


def apply_first_order(tag, p, f: DifferentiableFn, x):
    tag = OperatorTag(tag)
    if tag not in _FIRST_ORDER:
        raise ValueError(f"{tag.value} is not a first-order factor")
    if tag in (OperatorTag.B_MINUS, OperatorTag.B_PLUS) and isinstance(p, TwoParams):
        require_admissible(p)
    return _FIRST_ORDER[tag](p, f).eval(x)


# second-order operators ---------------------------------------------------

def hamiltonian(f: DifferentiableFn) -> DifferentiableFn:
    def jet_fn(x, k):
        t = Jet.variable(x, k)
        fj = f.jet(x, k + 2)
        return (t * t * fj - fj.diff().diff()) * 0.5

    return _lowered(f, 2, jet_fn, f"H[{f.name}]")


def apply_H(f: DifferentiableFn, x):
    return hamiltonian(f).eval(x)


def shifted(f: DifferentiableFn, g: DifferentiableFn, c: float) -> DifferentiableFn:
    """f + c g, with the smaller of the two derivative orders."""
    return DifferentiableFn(lambda x, k: f.jet(x, k) + g.jet(x, k) * c,
                            min(f.max_order, g.max_order), f"{f.name}+{c:g}*{g.name}")


def l_tilde_composed(p, f: DifferentiableFn) -> DifferentiableFn:
    """B+ B- f + f/2 built from the first-order factors."""
    return shifted(b_plus(p, b_minus(p, f)), f, 0.5)


def l_tilde_drift(p: TwoParams, x):
    """Coefficient of d/dx inside the bracket: -2 gamma2 alpha beta e^{-x^2} / (gamma1+F)^2."""
    require_admissible(p)
    c = _two_param_jets(p, np.asarray(x, dtype=float), 0)
    v = -2.0 * p.gamma2 * c["alpha"].value * c["beta"].value * c["e"].value / c["u"].value ** 2
    return float(v) if np.ndim(v) == 0 else v


def l_tilde(p: TwoParams, f: DifferentiableFn) -> DifferentiableFn:
    """Explicit second-order form of B+ B- + 1/2 for the two-parameter family."""
    require_admissible(p)

    def jet_fn(x, k):
        c = _two_param_jets(p, x, k)
        alpha, beta, e, u = c["alpha"], c["beta"], c["e"], c["u"]
        t = Jet.variable(x, k)
        fj = f.jet(x, k + 2)
        f1 = fj.diff()
        drift = alpha * beta * e / (u * u) * (-2.0 * p.gamma2)
        a2 = alpha * alpha
        pot = (1.0 + a2) * beta * beta - (1.0 + t * t) * a2 + 1.0
        return (drift * f1 + pot * fj - f1.diff()) * 0.5

    return _lowered(f, 2, jet_fn, f"Lt[{f.name}]")


def apply_L_tilde(p: TwoParams, f: DifferentiableFn, x):
    return l_tilde(p, f).eval(x)


def l_selfadjoint(p: TwoParams, f: DifferentiableFn) -> DifferentiableFn:
    """d/dx(P f') + q f with P = 1 - gamma2 e^{-x^2}/(gamma1+F)^2 = alpha^{-2}."""
    require_admissible(p)

    def jet_fn(x, k):
        c = _two_param_jets(p, x, k + 1)
        u, e, beta_m = c["u"], c["e"], c["beta_M"]
        s = e / (u * u) * p.gamma2
        P = 1.0 - s
        t = Jet.variable(x, k)
        fj = f.jet(x, k + 2)
        q = t * t - (1.0 / P.truncate(k) + 1.0) * beta_m * beta_m + s
        return (P * fj.diff()).diff() + q * fj

    return _lowered(f, 2, jet_fn, f"L[{f.name}]")


def apply_L_selfadjoint(p: TwoParams, f: DifferentiableFn, x):
    return l_selfadjoint(p, f).eval(x)


def weight(p: TwoParams, x):
    """Sturm-Liouville weight 2 alpha^{-2} = 2 (1 - gamma2 e^{-x^2}/(gamma1+F)^2)."""
    require_admissible(p)
    c = _two_param_jets(p, np.asarray(x, dtype=float), 0)
    w = 2.0 * c["D"].value / c["u"].value ** 2
    return float(w) if np.ndim(w) == 0 else w


# third-order ladder operators ---------------------------------------------

def raising(p, f: DifferentiableFn) -> DifferentiableFn:
    """A+ = B+ a* B-."""
    return b_plus(p, creation(b_minus(p, f)))


def lowering(p, f: DifferentiableFn) -> DifferentiableFn:
    """A = B+ a B-."""
    return b_plus(p, annihilation(b_minus(p, f)))


def apply_ladder(tag, p, f: DifferentiableFn, x):
    tag = OperatorTag(tag)
    if isinstance(p, TwoParams):
        require_admissible(p)
    if tag is OperatorTag.A_PLUS:
        return raising(p, f).eval(x)
    if tag is OperatorTag.A_MINUS:
        return lowering(p, f).eval(x)
    raise ValueError(f"{tag.value} is not a ladder operator")


# residual reports ---------------------------------------------------------

@dataclass(frozen=True)
class ResidualReport:
    sup_norm: float
    l2_norm: float
    grid: Grid
    normalizer: float

    @property
    def relative(self) -> float:
        # absolute fallback when the reference vanishes identically
        return self.sup_norm / self.normalizer if self.normalizer > 0 else self.sup_norm

    def as_dict(self) -> dict:
        return {"sup_norm": self.sup_norm, "l2_norm": self.l2_norm,
                "normalizer": self.normalizer, "relative": self.relative,
                "grid": self.grid.as_dict()}


ZERO_REFERENCE = 1e-12


def residual_report(residual, reference, grid: Grid, scale=None) -> ResidualReport:
    """Norms of ``residual`` normalized by sup |reference|.

    ``scale`` (typically sup |f|) decides when the reference counts as the
    zero function: below ``ZERO_REFERENCE * scale`` the normalizer is 0 and
    the relative residual falls back to the absolute one.
    """
    r = np.asarray(residual, dtype=float)
    normalizer = float(np.max(np.abs(np.asarray(reference, dtype=float))))
    if scale is not None and normalizer <= ZERO_REFERENCE * float(np.max(np.abs(scale))):
        normalizer = 0.0
    return ResidualReport(sup_norm=float(np.max(np.abs(r))),
                          l2_norm=float(np.sqrt(np.sum(r * r) * grid.spacing)),
                          grid=grid,
                          normalizer=normalizer)


def factorization_residual(p, f: DifferentiableFn, g: Grid = DEFAULT_GRID) -> ResidualReport:
    """Residual of B- B+ f - (H + 1/2) f on the grid."""
    if isinstance(p, TwoParams):
        require_admissible(p)
    x = g.points
    fx = f.eval(x)
    lhs = b_minus(p, b_plus(p, f)).eval(x)
    ref = apply_H(f, x) + 0.5 * fx
    return residual_report(lhs - ref, ref, g, scale=fx)
