import sys

import numpy as np
from hypothesis import assume, strategies as st

from oscfactor.factorization import TwoParams, admissible_oracle

_STENCILS = {
    1: ((1, 0.5), (-1, -0.5)),
    2: ((1, 1.0), (0, -2.0), (-1, 1.0)),
    3: ((2, 0.5), (1, -1.0), (-1, 1.0), (-2, -0.5)),
}


def central_difference(f, x, k, h):
    x = np.asarray(x, dtype=float)
    return sum(c * np.asarray(f(x + s * h)) for s, c in _STENCILS[k]) / h ** k


def richardson(f, x, k, h=0.05):
    """k-th derivative by central differences with two Richardson sweeps (O(h^6))."""
    d = [central_difference(f, x, k, h / 2 ** i) for i in range(3)]
    r1 = [(4 * d[i + 1] - d[i]) / 3 for i in range(2)]
    return (16 * r1[1] - r1[0]) / 15


def sup(a):
    return float(np.max(np.abs(np.asarray(a))))


@st.composite
def admissible_params(draw, gamma1_max=4.0):
    """(gamma1, gamma2) with oracle margin, both gamma2 signs."""
    g1 = draw(st.floats(0.95, gamma1_max)) * draw(st.sampled_from((-1.0, 1.0)))
    g2 = draw(st.floats(-4.0, g1 * g1 - 1.05))
    p = TwoParams(g1, g2)
    res = admissible_oracle(p)
    assume(res.admissible and res.min_g > 1e-2)
    return p


xs = st.floats(-4.0, 4.0, allow_nan=False)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
