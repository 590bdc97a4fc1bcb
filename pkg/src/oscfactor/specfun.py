"""Special functions, smooth-function carrier and line quadrature.

Units are hbar = m = omega = 1, so the oscillator Hamiltonian is
``H = (-d^2/dx^2 + x^2) / 2`` with eigenvalues ``n + 1/2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import special

from .errors import DerivativeOrderError, NonConvergenceError
from .jet import Jet

SQRT_PI_2 = math.sqrt(math.pi) / 2.0
HERMITE_N_MAX = 64
EXP_INTEGRAL_X_MAX = 26.0
MAX_ORDER = 3


@dataclass(frozen=True)
class Grid:
    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if not (math.isfinite(self.x_min) and math.isfinite(self.x_max)):
            raise ValueError("grid bounds must be finite")
        if not self.x_min < self.x_max:
            raise ValueError(f"need x_min < x_max, got {self.x_min}, {self.x_max}")
        if int(self.n_points) != self.n_points or self.n_points < 3:
            raise ValueError(f"need an integer n_points >= 3, got {self.n_points}")

    @property
    def spacing(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, int(self.n_points))

    @property
    def half_width(self) -> float:
        return max(abs(self.x_min), abs(self.x_max))

    def as_dict(self) -> dict:
        return {"x_min": self.x_min, "x_max": self.x_max, "n_points": int(self.n_points)}


DEFAULT_GRID = Grid(-6.0, 6.0, 601)


def _scalar_or_array(a):
    a = np.asarray(a, dtype=float)
    return float(a) if a.ndim == 0 else a


class DifferentiableFn:
    """Real function that reports exact derivatives up to ``max_order``.

    ``jet_fn(x, order)`` must return a :class:`Jet` of at least ``order``
    for the array of abscissae ``x``.
    """

    def __init__(self, jet_fn: Callable[[np.ndarray, int], Jet], max_order: int = MAX_ORDER,
                 name: str = "f"):
        if max_order < 0:
            raise DerivativeOrderError(f"{name} supports no derivative order")
        self._jet_fn = jet_fn
        self.max_order = max_order
        self.name = name

    def jet(self, x, order: int | None = None) -> Jet:
        order = self.max_order if order is None else order
        if not 0 <= order <= self.max_order:
            raise DerivativeOrderError(
                f"{self.name} supports derivative orders 0..{self.max_order}, asked for {order}")
        return self._jet_fn(np.asarray(x, dtype=float), order).truncate(order)

    def eval(self, x, order: int = 0):
        return _scalar_or_array(self.jet(x, order).derivative(order))

    def __call__(self, x):
        return self.eval(x, 0)

    def scaled(self, factor: float, name: str | None = None) -> "DifferentiableFn":
        return DifferentiableFn(lambda x, k: self._jet_fn(x, k) * factor, self.max_order,
                                name or f"{factor:g}*{self.name}")

    def __repr__(self) -> str:
        return f"DifferentiableFn({self.name}, max_order={self.max_order})"


# error-function and Dawson-type integrals ---------------------------------

def erf_integral(x):
    """F(x) = int_0^x exp(-t^2) dt = sqrt(pi)/2 * erf(x)."""
    return _scalar_or_array(SQRT_PI_2 * special.erf(x))


def exp_integral(x):
    """int_0^x exp(t^2) dt, evaluated as exp(x^2) * D(x) with D the Dawson integral.

    Raises OverflowError for |x| > 26 or when the result is not representable.
    """
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > EXP_INTEGRAL_X_MAX):
        raise OverflowError(f"exp_integral needs |x| <= {EXP_INTEGRAL_X_MAX}")
    d = special.dawsn(x)
    with np.errstate(divide="ignore", over="ignore"):
        out = np.sign(d) * np.exp(x * x + np.log(np.abs(d)))
    out = np.where(d == 0.0, 0.0, out)
    if not np.all(np.isfinite(out)):
        raise OverflowError("exp_integral overflowed")
    return _scalar_or_array(out)


def gauss_jet(x, order: int, sign: float = -1.0) -> Jet:
    """Jet of exp(sign * x^2)."""
    t = Jet.variable(x, order)
    return (t * t * sign).exp()


def erf_integral_jet(x, order: int) -> Jet:
    """Jet of F, built from F(x) and the jet of F' = exp(-x^2)."""
    if order == 0:
        return Jet.constant(erf_integral(x), 0)
    return gauss_jet(x, order - 1).integrate(erf_integral(x))


def exp_integral_jet(x, order: int) -> Jet:
    if order == 0:
        return Jet.constant(exp_integral(x), 0)
    return gauss_jet(x, order - 1, sign=1.0).integrate(exp_integral(x))


# Hermite polynomials and oscillator eigenfunctions ------------------------

def _check_index(n: int, n_max: int = HERMITE_N_MAX):
    if int(n) != n or not 0 <= n <= n_max:
        raise ValueError(f"index n must be an integer in 0..{n_max}, got {n}")


def hermite(n: int, x):
    """Physicists' Hermite polynomial H_n(x) by three-term recurrence."""
    _check_index(n)
    x = np.asarray(x, dtype=float)
    h_prev, h = np.zeros_like(x), np.ones_like(x)
    for k in range(n):
        h_prev, h = h, 2.0 * x * h - 2.0 * k * h_prev
    return _scalar_or_array(h)


def hermite_jet(n: int, x, order: int) -> Jet:
    # H_n^(k) = 2^k n!/(n-k)! H_{n-k}
    x = np.asarray(x, dtype=float)
    derivs = []
    for k in range(order + 1):
        if k > n:
            derivs.append(np.zeros_like(x))
        else:
            derivs.append(2.0 ** k * math.perm(n, k) * np.asarray(hermite(n - k, x)))
    return Jet.from_derivatives(derivs)


def _psi_table(n_top: int, x: np.ndarray) -> np.ndarray:
    """psi_0..psi_{n_top} at x via the normalized (overflow-free) recurrence."""
    out = np.zeros((n_top + 1,) + x.shape)
    out[0] = math.pi ** -0.25 * np.exp(-0.5 * x * x)
    if n_top >= 1:
        out[1] = math.sqrt(2.0) * x * out[0]
    for m in range(1, n_top):
        out[m + 1] = math.sqrt(2.0 / (m + 1)) * x * out[m] - math.sqrt(m / (m + 1)) * out[m - 1]
    return out


@lru_cache(maxsize=None)
def _ladder_expansion(n: int, k: int) -> tuple[float, ...]:
    """Coefficients of d^k psi_n in the basis psi_0..psi_{n+k}."""
    c = np.zeros(n + k + 1)
    c[n] = 1.0
    for _ in range(k):
        d = np.zeros_like(c)
        for m, cm in enumerate(c):
            if cm == 0.0:
                continue
            if m >= 1:
                d[m - 1] += math.sqrt(m / 2.0) * cm
            if m + 1 < len(d):
                d[m + 1] -= math.sqrt((m + 1) / 2.0) * cm
        c = d
    return tuple(c)


def psi_derivatives(n: int, x, order: int) -> np.ndarray:
    """Array of psi_n^(k)(x) for k = 0..order."""
    _check_index(n)
    if int(order) != order or order < 0:
        raise DerivativeOrderError(f"bad derivative order {order}")
    x = np.asarray(x, dtype=float)
    table = _psi_table(n + order, x)
    rows = []
    for k in range(order + 1):
        coeffs = np.asarray(_ladder_expansion(n, k))
        rows.append(np.tensordot(coeffs, table[: len(coeffs)], axes=1))
    return np.stack(rows)


def psi(n: int, x, order: int = 0):
    """Normalized oscillator eigenfunction psi_n or one of its first three derivatives."""
    if int(order) != order or not 0 <= order <= MAX_ORDER:
        raise DerivativeOrderError(f"psi supports derivative orders 0..{MAX_ORDER}, got {order}")
    return _scalar_or_array(psi_derivatives(n, x, order)[order])


def psi_fn(n: int) -> DifferentiableFn:
    _check_index(n)
    return DifferentiableFn(lambda x, k: Jet.from_derivatives(psi_derivatives(n, x, k)),
                            name=f"psi_{n}")


def zero_fn(max_order: int = MAX_ORDER) -> DifferentiableFn:
    return DifferentiableFn(lambda x, k: Jet.constant(np.zeros_like(x), k), max_order, "0")


def gaussian_fn(center: float = 0.0, width: float = 1.0, poly=(1.0,)) -> DifferentiableFn:
    """p(x) * exp(-(x - center)^2 / (2 width^2)) with p given by ascending coefficients."""

    def jet_fn(x, k):
        t = Jet.variable(x, k)
        s = (t - center) / width
        g = (s * s * -0.5).exp()
        p = Jet.constant(np.zeros_like(x), k)
        for power, coeff in enumerate(poly):
            p = p + (t ** power) * coeff
        return p * g

    return DifferentiableFn(jet_fn, name=f"gauss(c={center:g},w={width:g},p={tuple(poly)})")


# quadrature ---------------------------------------------------------------

GL_NODES = 20


@lru_cache(maxsize=None)
def _leggauss(m: int):
    return leggauss(m)


def composite_gauss_legendre(a: float, b: float, panels: int, nodes: int = GL_NODES):
    """Nodes and weights of the composite Gauss-Legendre rule on [a, b]."""
    t, w = _leggauss(nodes)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    xs = (mid[:, None] + half[:, None] * t[None, :]).ravel()
    ws = (half[:, None] * w[None, :]).ravel()
    return xs, ws


def _as_callable(f):
    return f.eval if isinstance(f, DifferentiableFn) else f


def integrate_line(f, g=None, cutoff: float = 12.0, rtol: float = 1e-10,
                   tail_tol: float = 1e-12, start_panels: int = 4, max_panels: int = 1024) -> float:
    """Integral of f*g over the real line for products with Gaussian-class decay.

    ``cutoff`` is the caller's decay hint: the product is assumed negligible
    beyond |x| = cutoff. Panels double until successive estimates agree to
    ``rtol`` relative to int |f g|; the window widens if the integrand at
    the cutoff is not below ``tail_tol`` of that scale.
    """
    f = _as_callable(f)
    g = _as_callable(g) if g is not None else None

    def h(x):
        v = np.asarray(f(x), dtype=float)
        return v * np.asarray(g(x), dtype=float) if g is not None else v

    for _ in range(6):
        panels = start_panels
        xs, ws = composite_gauss_legendre(-cutoff, cutoff, panels)
        vals = h(xs)
        prev = float(ws @ vals)
        converged = False
        while panels < max_panels:
            panels *= 2
            xs, ws = composite_gauss_legendre(-cutoff, cutoff, panels)
            vals = h(xs)
            cur = float(ws @ vals)
            scale = float(ws @ np.abs(vals))
            change = abs(cur - prev)
            if change <= rtol * scale or scale == 0.0:
                converged = True
                break
            prev = cur
        if not converged and change > 1e-9 * scale:
            raise NonConvergenceError(
                f"quadrature on [-{cutoff}, {cutoff}] stalled: change {change:.3e}")
        edge = float(np.sum(np.abs(h(np.array([-cutoff, cutoff])))))
        if edge <= tail_tol * scale or scale == 0.0:
            return cur
        cutoff *= 1.5
    raise NonConvergenceError("integrand does not decay inside the widened window")
