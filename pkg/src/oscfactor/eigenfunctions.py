"""Eigenfunctions of the two-parameter self-adjoint oscillator operator.

``H_0`` is the zero mode of B-; for n >= 1, ``H_n = B+ psi_{n-1}``, which in
closed form reads

    H_n = alpha * (sqrt(n) psi_n + e^{-x^2} / (sqrt(2) (gamma1 + F)) psi_{n-1}).

All members share the oscillator spectrum n + 1/2 and are orthogonal under
the weight 2 alpha^{-2}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InadmissibleParameters, NonConvergenceError
from .factorization import TwoParams, _two_param_jets, require_admissible
from .jet import Jet
from .operators import ResidualReport, l_selfadjoint, residual_report, weight
from .specfun import (DEFAULT_GRID, DifferentiableFn, Grid, composite_gauss_legendre, hermite,
                      psi_derivatives)

SQRT2 = math.sqrt(2.0)
N_MAX = 32


def _check_n(n: int, lo: int = 0):
    if int(n) != n or not lo <= n <= N_MAX:
        raise ValueError(f"n must be an integer in {lo}..{N_MAX}, got {n}")


def h0_fn(p: TwoParams) -> DifferentiableFn:
    require_admissible(p)

    def jet_fn(x, k):
        c = _two_param_jets(p, x, k)
        return Jet.from_derivatives(psi_derivatives(0, x, k)) / c["D"].sqrt()

    return DifferentiableFn(jet_fn, name="H_0")


def h0(p: TwoParams, x):
    """Zero mode psi_0 / sqrt((gamma1+F)^2 - gamma2 e^{-x^2}) = alpha psi_0 / |gamma1+F|."""
    return h0_fn(p).eval(x)


def hn_fn(p: TwoParams, n: int) -> DifferentiableFn:
    _check_n(n, lo=1)
    require_admissible(p)

    def jet_fn(x, k):
        c = _two_param_jets(p, x, k)
        top = Jet.from_derivatives(psi_derivatives(n, x, k))
        low = Jet.from_derivatives(psi_derivatives(n - 1, x, k))
        modulation = c["e"] / (c["u"] * SQRT2)
        return c["alpha"] * (top * math.sqrt(n) + modulation * low)

    return DifferentiableFn(jet_fn, name=f"H_{n}")


def hn(p: TwoParams, n: int, x):
    return hn_fn(p, n).eval(x)


def eigenfunction(p: TwoParams, n: int) -> DifferentiableFn:
    return h0_fn(p) if n == 0 else hn_fn(p, n)


@dataclass(frozen=True)
class EigenFamily:
    params: TwoParams
    n_max: int
    normalized: bool = False
    _norms: tuple = field(default=(), init=False, repr=False, compare=False)

    def __post_init__(self):
        _check_n(self.n_max)
        require_admissible(self.params)
        if self.normalized:
            g = gram_matrix(EigenFamily(self.params, self.n_max))
            object.__setattr__(self, "_norms", tuple(np.sqrt(np.diag(g))))

    def __len__(self) -> int:
        return self.n_max + 1

    def __getitem__(self, n: int) -> DifferentiableFn:
        if not 0 <= n <= self.n_max:
            raise IndexError(n)
        f = eigenfunction(self.params, n)
        return f.scaled(1.0 / self._norms[n], f.name) if self.normalized else f

    def __iter__(self):
        return (self[n] for n in range(len(self)))

    def weight(self, x):
        return weight(self.params, x)


def gram_from_members(members, weight_fn, cutoff: float = 12.0, rtol: float = 1e-10,
                      start_panels: int = 4, max_panels: int = 512) -> np.ndarray:
    """Weighted Gram matrix by composite Gauss-Legendre, doubling panels to convergence."""

    def assemble(panels):
        xs, ws = composite_gauss_legendre(-cutoff, cutoff, panels)
        vals = np.stack([np.asarray(m(xs)) for m in members])
        wv = ws * np.asarray(weight_fn(xs))
        G = (vals * wv) @ vals.T
        scale = np.abs(vals) * np.sqrt(np.abs(wv))
        return G, scale @ scale.T

    panels = start_panels
    prev, _ = assemble(panels)
    while panels < max_panels:
        panels *= 2
        cur, scale = assemble(panels)
        change = np.abs(cur - prev)
        if np.all(change <= rtol * scale):
            return 0.5 * (cur + cur.T)
        prev = cur
    if np.all(change <= 1e-9 * scale):
        return 0.5 * (cur + cur.T)
    raise NonConvergenceError("Gram matrix quadrature did not converge")


def gram_matrix(fam: EigenFamily, g: Grid | None = None) -> np.ndarray:
    """G[m, n] = int H_m H_n omega dx for m, n = 0..n_max.

    When a grid is given its half-width sets the truncation window.
    """
    cutoff = 12.0 if g is None else max(g.half_width, 12.0)
    return gram_from_members(list(fam), fam.weight, cutoff=cutoff)


def normalized_offdiagonal(G: np.ndarray) -> float:
    d = np.sqrt(np.abs(np.diag(G)))
    C = G / np.outer(d, d)
    np.fill_diagonal(C, 0.0)
    return float(np.max(np.abs(C))) if len(G) > 1 else 0.0


def eigen_residual(p: TwoParams, n: int, g: Grid = DEFAULT_GRID) -> ResidualReport:
    """Residual of L H_n + (n + 1/2) omega H_n = 0, relative to sup |(n + 1/2) omega H_n|."""
    _check_n(n)
    f = eigenfunction(p, n)
    x = g.points
    source = (n + 0.5) * weight(p, x) * f.eval(x)
    return residual_report(l_selfadjoint(p, f).eval(x) + source, source, g)


HERMITE_REGIME = 10.0


def hermite_limit_profile(p: TwoParams, n: int, g: Grid, regime_only: bool = True) -> float:
    """Pearson correlation of H_n^{gamma1,2} with the Hermite polynomial H_n.

    With ``regime_only`` only grid points with delta e^{-x^2} > 10,
    delta = -gamma2/gamma1^2, enter; otherwise the whole grid does.
    """
    _check_n(n)
    if p.gamma2 >= 0:
        raise InadmissibleParameters("the Hermite limit needs gamma2 < 0")
    delta = -p.gamma2 / p.gamma1 ** 2
    x = g.points
    if regime_only:
        x = x[delta * np.exp(-x * x) > HERMITE_REGIME]
    if x.size < 2:
        raise ValueError("no grid point lies in the Hermite-limit regime")
    a = np.asarray(eigenfunction(p, n).eval(x))
    b = np.asarray(hermite(n, x))
    return float(np.corrcoef(a, b)[0, 1])


def hermite_limit_params(delta: float, gamma1: float = 1e3) -> TwoParams:
    return TwoParams(gamma1, -delta * gamma1 ** 2)

