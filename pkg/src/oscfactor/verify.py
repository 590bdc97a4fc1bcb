"""Aggregated identity checks with their tolerances.

Each check reports a measured value against a fixed tolerance. The same
batteries back the ``residuals`` and ``alt`` commands and the acceptance
suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import altfact, eigenfunctions as eig, factorization as fz, operators as ops
from .battery import function_battery
from .specfun import DEFAULT_GRID, Grid, integrate_line, psi_fn

TOLERANCES = {
    "riccati": 1e-10,
    "bernoulli": 1e-10,
    "coupled": 1e-10,
    "factorization": 1e-9,
    "l_tilde_two_path": 1e-10,
    "zero_mode": 1e-10,
    "hn_two_path": 1e-12,
    "eigen": 1e-8,
    "gram_offdiag": 1e-8,
    "ladder": 1e-7,
    "ladder_zero": 1e-9,
    "selfadjoint": 1e-8,
    "alpha_beta_product": 1e-13,
    "modified_hermite": 1e-10,
}


@dataclass
class Check:
    name: str
    value: float
    tolerance: float
    grid: Grid | None = None
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.value) and self.value < self.tolerance)

    def as_dict(self) -> dict:
        out = {"name": self.name, "value": float(self.value), "tolerance": self.tolerance,
               "passed": self.passed}
        if self.grid is not None:
            out["grid"] = self.grid.as_dict()
        out.update(self.details)
        return out


def _sup(a) -> float:
    return float(np.max(np.abs(np.asarray(a))))


def selfadjoint_deviation(apply_op, fns, cutoff: float = 12.0) -> float:
    """max over pairs of |<Lf, g> - <f, Lg>| / max(|<Lf, g>|, |<f, Lg>|, scale)."""
    worst = 0.0
    for i, f in enumerate(fns):
        for g in fns[i + 1:]:
            lf_g = integrate_line(apply_op(f), g, cutoff=cutoff)
            f_lg = integrate_line(f, apply_op(g), cutoff=cutoff)
            scale = max(abs(lf_g), abs(f_lg), 1e-300)
            worst = max(worst, abs(lf_g - f_lg) / scale)
    return worst


def ladder_deviations(p, n_range=range(1, 6), grid: Grid = DEFAULT_GRID) -> dict[str, float]:
    """Relative deviations of A+ H_n from n sqrt(n) H_{n+1} and A H_n from n sqrt(n-1) H_{n-1}."""
    x = grid.points
    out = {}
    for n in n_range:
        h = eig.hn_fn(p, n)
        up_ref = n * np.sqrt(n) * np.asarray(eig.hn(p, n + 1, x))
        out[f"A_plus_n{n}"] = _sup(ops.raising(p, h).eval(x) - up_ref) / _sup(up_ref)
        down = ops.lowering(p, h).eval(x)
        if n == 1:
            out[f"A_minus_n{n}"] = _sup(down) / _sup(eig.hn(p, 1, x))
        else:
            down_ref = n * np.sqrt(n - 1) * np.asarray(eig.hn(p, n - 1, x))
            out[f"A_minus_n{n}"] = _sup(down - down_ref) / _sup(down_ref)
    return out


def two_param_checks(p: fz.TwoParams, n_max: int = 6, grid: Grid = DEFAULT_GRID,
                     selfadjoint: bool = True) -> list[Check]:
    fz.require_admissible(p)
    t = TOLERANCES
    x = grid.points
    checks = [
        Check("riccati", _sup(fz.riccati_residual(p.gamma1, x)), t["riccati"], grid),
        Check("bernoulli", _sup(fz.bernoulli_residual(p, x)), t["bernoulli"], grid),
    ]
    r1, r2 = fz.coupled_residuals(p, x)
    checks.append(Check("coupled", max(_sup(r1), _sup(r2)), t["coupled"], grid,
                        {"first": _sup(r1), "second": _sup(r2)}))

    battery = function_battery()
    fact = {f.name: ops.factorization_residual(p, f, grid).relative for f in battery}
    checks.append(Check("factorization", max(fact.values()), t["factorization"], grid,
                        {"per_function": fact}))

    two_path = max(_sup(ops.l_tilde(p, f).eval(x) - ops.l_tilde_composed(p, f).eval(x))
                   / max(_sup(ops.l_tilde_composed(p, f).eval(x)), 1e-300) for f in battery)
    checks.append(Check("l_tilde_two_path", two_path, t["l_tilde_two_path"], grid,
                        {"drift_sup": _sup(ops.l_tilde_drift(p, x))}))

    checks.append(Check("zero_mode", _sup(ops.b_minus(p, eig.h0_fn(p)).eval(x)), t["zero_mode"], grid))
    hn_dev = max(_sup(eig.hn(p, n, x) - ops.b_plus(p, psi_fn(n - 1)).eval(x)) / _sup(eig.hn(p, n, x))
                 for n in range(1, n_max + 1))
    checks.append(Check("hn_two_path", hn_dev, t["hn_two_path"], grid))

    for n in range(n_max + 1):
        rep = eig.eigen_residual(p, n, grid)
        checks.append(Check(f"eigen_n{n}", rep.relative, t["eigen"], grid, rep.as_dict()))

    G = eig.gram_matrix(eig.EigenFamily(p, n_max))
    checks.append(Check("gram_offdiag", eig.normalized_offdiagonal(G), t["gram_offdiag"], None,
                        {"diagonal": [float(v) for v in np.diag(G)]}))

    for name, dev in ladder_deviations(p, grid=grid).items():
        tol = t["ladder_zero"] if name == "A_minus_n1" else t["ladder"]
        checks.append(Check(f"ladder_{name}", dev, tol, grid))

    if selfadjoint:
        fns = battery[:4] + battery[6:]
        dev = selfadjoint_deviation(lambda f: ops.l_selfadjoint(p, f), fns)
        checks.append(Check("selfadjoint_symmetry", dev, t["selfadjoint"]))
    return checks


def gamma3_checks(g: altfact.Gamma3Param, n_max: int = 6,
                  grid: Grid = altfact.GAMMA3_GRID) -> list[Check]:
    t = TOLERANCES
    x = grid.points
    c = altfact.gamma3_coeffs(g, x)
    prod = _sup((np.asarray(c.alpha) * np.asarray(c.beta) - x) / np.maximum(np.abs(x), 1e-300))
    checks = [Check("alpha_beta_product", prod, t["alpha_beta_product"], grid)]
    fact = {f.name: altfact.alt_factorization_residual(g, f, grid).relative
            for f in function_battery()}
    checks.append(Check("factorization", max(fact.values()), t["factorization"], grid,
                        {"per_function": fact}))
    for n in range(n_max + 1):
        rep = altfact.eigen_residual_gamma3(g, n, grid)
        checks.append(Check(f"eigen_n{n}", rep.relative, t["eigen"], grid, rep.as_dict()))
    G = altfact.gram_matrix_gamma3(g, n_max)
    checks.append(Check("gram_offdiag", eig.normalized_offdiagonal(G), t["gram_offdiag"]))
    mh_grid = Grid(-3.0, 3.0, 601)
    xs = mh_grid.points
    mh = max(_sup(altfact.modified_hermite_residual(n, xs)) / _sup(altfact.modified_hermite_fn(n)(xs))
             for n in range(9))
    checks.append(Check("modified_hermite", mh, t["modified_hermite"], mh_grid))
    return checks
