"""Standard test functions and parameter sets for identity checks."""

from __future__ import annotations

import math

import numpy as np

from .factorization import TwoParams, admissible_oracle
from .specfun import DifferentiableFn, gaussian_fn, psi_fn

# includes the figure pairs (+-1.5, 1.249) and the near-standard (1e3, 990)
EIGEN_POINTS = (
    TwoParams(1.5, 1.249), TwoParams(-1.5, 1.249), TwoParams(1e3, 990.0),
    TwoParams(2.0, 0.0), TwoParams(2.0, -1.0), TwoParams(1.0, -0.5),
    TwoParams(-2.5, 4.0), TwoParams(0.95, -2.0), TwoParams(3.0, 7.5), TwoParams(2.0, 2.9),
)


def function_battery() -> list[DifferentiableFn]:
    """Ten decaying test functions: psi_0..psi_5, shifted Gaussians, polynomial times Gaussian."""
    return [psi_fn(n) for n in range(6)] + [
        gaussian_fn(1.0, 1.0 / math.sqrt(2.0)),
        gaussian_fn(-0.5, 1.0),
        gaussian_fn(0.0, 1.0, poly=(0.0, -1.0, 1.0)),
        gaussian_fn(0.3, 0.8, poly=(1.0, 0.0, 0.0, 1.0)),
    ]


def random_admissible_params(count: int, seed: int = 0, gamma1_max: float = 4.0) -> list[TwoParams]:
    """Deterministic sample of oracle-admissible points spread over both gamma2 signs."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        g1 = rng.choice((-1.0, 1.0)) * rng.uniform(0.9, gamma1_max)
        g2 = rng.uniform(-4.0, g1 * g1 - 1.0)
        p = TwoParams(float(g1), float(g2))
        if admissible_oracle(p).admissible:
            out.append(p)
    return out
