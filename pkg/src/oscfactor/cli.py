"""Command-line front end: sweeps, figure data and verification reports.

Every command writes CSV (header line, floats with 17 significant digits) or
JSON (no NaN/Inf). Exit codes: 0 success, 2 flag error, 3 inadmissible or
singular parameters, 4 numerical non-convergence, 5 I/O.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import altfact, eigenfunctions as eig, factorization as fz, operators as ops, verify
from .errors import InadmissibleParameters, NonConvergenceError, SingularityError
from .specfun import EXP_INTEGRAL_X_MAX, SQRT_PI_2, Grid, psi_fn

EXIT_OK, EXIT_FLAGS, EXIT_INADMISSIBLE, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4, 5
EIGEN_N_MAX = 16
GRID_ENV = "OSC_GRID_POINTS"

DEFAULT_X = {
    "coeffs": (-6.0, 6.0, 601),
    "eigen": (-6.0, 6.0, 601),
    "residuals": (-6.0, 6.0, 601),
    "alt": (-4.0, 4.0, 401),
    "limits:delta": (-5.0, 5.0, 1001),
    "limits:standard": (-6.0, 6.0, 601),
    "limits:hermite": (-2.0, 2.0, 401),
    "limits:modified_hermite": (-4.0, 4.0, 401),
}
DEFAULT_SCHEDULE = {
    "delta": [1e2, 1e3, 1e4],
    "standard": [1e2, 1e3, 1e4],
    "hermite": [1.0, 1e2, 1e4, 1e6],
    "modified_hermite": [1.0, 10.0, 100.0, 1e3, 1e4],
}


class FlagError(ValueError):
    pass


# formatting ---------------------------------------------------------------

def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        if not math.isfinite(v):
            raise NonConvergenceError(f"non-finite value {v} in output")
        return format(float(v), ".17g")
    return str(v)


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


def _plain(v):
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, np.ndarray):
        return [_plain(x) for x in v.tolist()]
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    return v


def to_json(obj) -> str:
    try:
        return json.dumps(_plain(obj), indent=2, allow_nan=False) + "\n"
    except ValueError as exc:
        raise NonConvergenceError(f"non-finite value in JSON output: {exc}") from exc


def write_text(text: str, out: str) -> None:
    if out == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _table(header, rows, fmt: str, meta: dict) -> str:
    if fmt == "csv":
        return to_csv(header, rows)
    return to_json({**meta, "columns": list(header),
                    "rows": [dict(zip(header, r)) for r in rows]})


# flag helpers -------------------------------------------------------------

def _grid(args, key: str) -> Grid:
    lo, hi, n = DEFAULT_X[key]
    env = os.environ.get(GRID_ENV)
    if env is not None:
        try:
            n = int(env)
        except ValueError:
            raise FlagError(f"{GRID_ENV} must be an integer, got {env!r}") from None
    lo = lo if args.x_min is None else args.x_min
    hi = hi if args.x_max is None else args.x_max
    n = n if args.x_points is None else args.x_points
    try:
        return Grid(lo, hi, n)
    except ValueError as exc:
        raise FlagError(str(exc)) from None


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise FlagError("missing " + ", ".join("--" + m.replace("_", "-") for m in missing))


def _finite(args, *names):
    for n in names:
        v = getattr(args, n, None)
        if v is not None and not math.isfinite(v):
            raise FlagError(f"--{n.replace('_', '-')} must be finite")


def _exp_guard(grid: Grid):
    if grid.half_width > EXP_INTEGRAL_X_MAX:
        raise FlagError(f"this family needs |x| <= {EXP_INTEGRAL_X_MAX}")


def _axis(lo, hi, n) -> np.ndarray:
    # rounded so that grid values print as their decimal intent
    return np.round(np.linspace(lo, hi, n), 12)


def _range(values, flag):
    lo, hi, n = values
    if not (math.isfinite(lo) and math.isfinite(hi)) or not lo < hi:
        raise FlagError(f"{flag} needs finite LO < HI")
    if int(n) != n or n < 2:
        raise FlagError(f"{flag} needs an integer N >= 2")
    return float(lo), float(hi), int(n)


def _two_params(args) -> fz.TwoParams:
    _need(args, "gamma1", "gamma2")
    return fz.TwoParams(args.gamma1, args.gamma2)


# commands -----------------------------------------------------------------

def run_region(args) -> int:
    g1s = _axis(*_range(args.gamma1_range, "--gamma1-range"))
    g2s = _axis(*_range(args.gamma2_range, "--gamma2-range"))
    header = ("gamma1", "inv_gamma1", "gamma2", "paper_ok", "oracle_ok", "min_g", "min_u")
    rows, disagreements, oracle_only = [], [], 0
    for g1 in g1s:
        g1 = float(g1)
        inv = None if g1 == 0.0 else 1.0 / g1
        for g2, res in zip(g2s, fz.admissible_oracle_row(g1, g2s)):
            g2 = float(g2)
            closed = fz.admissible_paper(fz.TwoParams(g1, g2))
            rows.append((g1, inv, g2, closed, res.admissible, res.min_g, res.min_u))
            if closed and not res.admissible:
                disagreements.append({"gamma1": g1, "gamma2": g2, "min_g": res.min_g,
                                      "min_u": res.min_u})
            oracle_only += int(res.admissible and not closed)
    boundary = [(float(g1), None if g1 == 0.0 else 1.0 / float(g1), float(g1) ** 2 - 1.0)
                for g1 in g1s if abs(g1) > SQRT_PI_2]
    b_header = ("gamma1", "inv_gamma1", "gamma2")
    summary = {
        "command": "region",
        "gamma1_range": list(args.gamma1_range),
        "gamma2_range": list(args.gamma2_range),
        "rows": len(rows),
        "paper_ok": sum(r[3] for r in rows),
        "oracle_ok": sum(r[4] for r in rows),
        "oracle_only": oracle_only,
        "disagreements": disagreements,
    }
    if args.format == "json":
        write_text(to_json({**summary,
                            "columns": list(header),
                            "points": [dict(zip(header, r)) for r in rows],
                            "boundary": [dict(zip(b_header, r)) for r in boundary]}), args.output)
        return len(rows)
    write_text(to_csv(header, rows), args.output)
    if args.output != "-":
        base = Path(args.output)
        write_text(to_csv(b_header, boundary), str(base.with_suffix(".boundary.csv")))
        write_text(to_json(summary), str(base.with_suffix(".summary.json")))
    return len(rows)


def _family_coeffs(args, x):
    fam = args.family
    if fam == "two_param":
        p = _two_params(args)
        return fz.coeffs_two_param(p, x), {"gamma1": p.gamma1, "gamma2": p.gamma2}
    if fam == "delta":
        _need(args, "delta")
        return fz.coeffs_delta(fz.DeltaParam(args.delta), x), {"delta": args.delta}
    if fam == "gamma3":
        _need(args, "gamma3")
        return altfact.gamma3_coeffs(altfact.Gamma3Param(args.gamma3), x), {"gamma3": args.gamma3}
    _need(args, "kappa1", "kappa2")
    k = altfact.KappaParams(args.kappa1, args.kappa2)
    return altfact.kappa_coeffs(k, x), {"kappa1": k.kappa1, "kappa2": k.kappa2,
                                        "singular_x": k.singular_x}


def run_coeffs(args) -> int:
    g = _grid(args, "coeffs")
    if args.family in ("gamma3", "kappa"):
        _exp_guard(g)
    x = g.points
    c, params = _family_coeffs(args, x)
    header = ("x", "alpha", "beta", "alpha_prime", "beta_prime")
    cols = [np.broadcast_to(np.asarray(v, dtype=float), x.shape) for v in
            (c.alpha, c.beta, c.alpha_prime, c.beta_prime)]
    rows = list(zip(x, *cols))
    meta = {"command": "coeffs", "family": args.family, "params": params, "grid": g.as_dict()}
    write_text(_table(header, rows, args.format, meta), args.output)
    return len(rows)


def run_eigen(args) -> int:
    g = _grid(args, "eigen")
    x = g.points
    n_max = args.n_max
    if args.family == "two_param":
        p = _two_params(args)
        fam = eig.EigenFamily(p, n_max, normalized=args.normalized)
        cols = [np.asarray(f(x)) for f in fam]
        params = {"gamma1": p.gamma1, "gamma2": p.gamma2}
    else:
        _need(args, "gamma3")
        _exp_guard(g)
        g3 = altfact.Gamma3Param(args.gamma3)
        cols = [np.asarray(altfact.hn_gamma3(g3, n, x)) for n in range(n_max + 1)]
        if args.normalized:
            norms = np.sqrt(np.diag(altfact.gram_matrix_gamma3(g3, n_max)))
            cols = [c / s for c, s in zip(cols, norms)]
        params = {"gamma3": g3.gamma3}
    header = ("x",) + tuple(f"H_{n}" for n in range(n_max + 1))
    rows = list(zip(x, *cols))
    meta = {"command": "eigen", "family": args.family, "params": params,
            "normalized": bool(args.normalized), "grid": g.as_dict()}
    write_text(_table(header, rows, args.format, meta), args.output)
    return len(rows)


def _report(checks) -> dict:
    return {"checks": [c.as_dict() for c in checks],
            "all_passed": all(c.passed for c in checks)}


def run_residuals(args) -> int:
    g = _grid(args, "residuals" if args.family == "two_param" else "alt")
    if args.family == "two_param":
        p = _two_params(args)
        fz.require_admissible(p)
        orc = fz.admissible_oracle(p)
        checks = verify.two_param_checks(p, args.n_max, g)
        out = {"command": "residuals", "family": "two_param",
               "params": {"gamma1": p.gamma1, "gamma2": p.gamma2},
               "condition": {"min_g": orc.min_g, "min_u": orc.min_u},
               "drift_sup": float(np.max(np.abs(ops.l_tilde_drift(p, g.points)))),
               **_report(checks)}
    else:
        _need(args, "gamma3")
        _exp_guard(g)
        g3 = altfact.Gamma3Param(args.gamma3)
        out = {"command": "residuals", "family": "gamma3", "params": {"gamma3": g3.gamma3},
               **_report(verify.gamma3_checks(g3, args.n_max, g))}
    out["tolerances"] = verify.TOLERANCES
    write_text(to_json(out), args.output)
    return len(out["checks"])


KAPPA_SIDE_GAP = 0.1


def kappa_report(k: altfact.KappaParams, grid: Grid) -> dict:
    """Singularity location and factorization residual on each side with the consistent branch."""
    xs = k.singular_x
    out = {"kappa1": k.kappa1, "kappa2": k.kappa2, "singular_x": xs, "sides": []}
    n = grid.n_points
    pieces = [(grid.x_min, grid.x_max)] if xs is None or not grid.x_min < xs < grid.x_max else [
        (grid.x_min, xs - KAPPA_SIDE_GAP), (xs + KAPPA_SIDE_GAP, grid.x_max)]
    battery = [psi_fn(0), psi_fn(1), psi_fn(2)]
    for lo, hi in pieces:
        if not lo < hi:
            continue
        sub = Grid(lo, hi, max(3, int(round(n * (hi - lo) / (grid.x_max - grid.x_min)))))
        w = k.kappa1 - altfact.exp_integral(0.5 * (lo + hi))
        branch = (1, 1) if w > 0 else (1, -1)
        kb = altfact.KappaParams(k.kappa1, k.kappa2, branch)
        worst = max(altfact.kappa_factorization_residual(kb, f, sub).relative for f in battery)
        check = verify.Check("kappa_factorization", worst, verify.TOLERANCES["factorization"], sub,
                             {"branch": list(branch)})
        out["sides"].append(check.as_dict())
    return out


def run_alt(args) -> int:
    g = _grid(args, "alt")
    _exp_guard(g)
    g3 = altfact.Gamma3Param(1.0 if args.gamma3 is None else args.gamma3)
    checks = verify.gamma3_checks(g3, args.n_max, g)
    limit = [{"gamma3": s, "deviation": altfact.gamma3_limit_deviation(altfact.Gamma3Param(s), n, g),
              "n": n} for n in (0, 1, 2) for s in (1.0, 100.0, 1e4)]
    out = {"command": "alt", "gamma3": g3.gamma3, **_report(checks), "gamma3_limit": limit}
    if args.kappa1 is not None:
        k = altfact.KappaParams(args.kappa1, 1.0 if args.kappa2 is None else args.kappa2)
        kr = kappa_report(k, g)
        out["kappa"] = kr
        out["all_passed"] = out["all_passed"] and all(s["passed"] for s in kr["sides"])
    out["tolerances"] = verify.TOLERANCES
    write_text(to_json(out), args.output)
    return len(checks)


def limit_rows(kind: str, schedule, grid: Grid, delta: float = 0.5, n: int = 1):
    """(parameter, deviation, identity_residual) for each schedule entry."""
    x = grid.points
    rows = []
    for s in schedule:
        ident = None
        if kind == "delta":
            p = fz.delta_embedding(fz.DeltaParam(delta), s)
            dev = np.max(np.abs(np.asarray(fz.coeffs_two_param(p, x).alpha)
                                - np.asarray(fz.coeffs_delta(fz.DeltaParam(delta), x).alpha)))
        elif kind == "standard":
            c = fz.coeffs_two_param(fz.TwoParams(s, 0.0), x)
            dev = np.max(np.abs(np.asarray(c.beta) - x))
        elif kind == "hermite":
            dev = 1.0 - eig.hermite_limit_profile(eig.hermite_limit_params(s), n, grid,
                                                  regime_only=False)
        else:
            dev = altfact.gamma3_limit_deviation(altfact.Gamma3Param(s), n, grid)
            G = np.asarray(altfact.modified_hermite_fn(n)(x))
            ident = float(np.max(np.abs(altfact.modified_hermite_residual(n, x))) / np.max(np.abs(G)))
        rows.append((float(s), float(dev), ident))
    return rows


def run_limits(args) -> int:
    g = _grid(args, f"limits:{args.kind}")
    schedule = args.schedule or DEFAULT_SCHEDULE[args.kind]
    if any(not math.isfinite(s) or s <= 0 for s in schedule):
        raise FlagError("--schedule values must be finite and positive")
    if args.kind == "modified_hermite":
        _exp_guard(g)
    raw = limit_rows(args.kind, schedule, g, args.delta, args.n)
    rows = []
    for i, (s, dev, ident) in enumerate(raw):
        ratio = raw[i - 1][1] / dev if i and dev > 0 else None
        rows.append((s, dev, ratio, ident))
    header = ("parameter", "deviation", "ratio", "identity_residual")
    meta = {"command": "limits", "kind": args.kind, "delta": args.delta, "n": args.n,
            "grid": g.as_dict()}
    write_text(_table(header, rows, args.format, meta), args.output)
    return len(rows)


# parser -------------------------------------------------------------------

def _common(sp, fmt: str, params=(), grid=True):
    sp.add_argument("-o", "--output", default="-", help="output path ('-' for stdout)")
    sp.add_argument("--format", choices=("csv", "json"), default=fmt)
    for name in params:
        sp.add_argument(f"--{name.replace('_', '-')}", type=float, default=None, dest=name)
    if grid:
        sp.add_argument("--x-min", type=float, default=None)
        sp.add_argument("--x-max", type=float, default=None)
        sp.add_argument("--x-points", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="oscfactor", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("region", help="admissible region of (gamma1, gamma2)")
    _common(sp, "csv", grid=False)
    sp.add_argument("--gamma1-range", nargs=3, type=float, metavar=("LO", "HI", "N"),
                    default=(-3.0, 3.0, 121))
    sp.add_argument("--gamma2-range", nargs=3, type=float, metavar=("LO", "HI", "N"),
                    default=(-3.0, 8.0, 221))
    sp.set_defaults(run=run_region)

    sp = sub.add_parser("coeffs", help="alpha, beta and derivatives on a grid")
    sp.add_argument("--family", choices=("two_param", "delta", "gamma3", "kappa"), default="two_param")
    _common(sp, "csv", ("gamma1", "gamma2", "delta", "gamma3", "kappa1", "kappa2"))
    sp.set_defaults(run=run_coeffs)

    sp = sub.add_parser("eigen", help="eigenfunctions H_0..H_n_max on a grid")
    sp.add_argument("--family", choices=("two_param", "gamma3"), default="two_param")
    sp.add_argument("--n-max", type=int, default=4)
    sp.add_argument("--normalized", action="store_true", help="unit norm under the weight")
    _common(sp, "csv", ("gamma1", "gamma2", "gamma3"))
    sp.set_defaults(run=run_eigen)

    sp = sub.add_parser("residuals", help="identity residual report")
    sp.add_argument("--family", choices=("two_param", "gamma3"), default="two_param")
    sp.add_argument("--n-max", type=int, default=6)
    _common(sp, "json", ("gamma1", "gamma2", "gamma3"))
    sp.set_defaults(run=run_residuals)

    sp = sub.add_parser("alt", help="reversed factorization report (gamma3 and kappa families)")
    sp.add_argument("--n-max", type=int, default=6)
    _common(sp, "json", ("gamma3", "kappa1", "kappa2"))
    sp.set_defaults(run=run_alt)

    sp = sub.add_parser("limits", help="convergence tables for the limit reductions")
    sp.add_argument("--kind", choices=tuple(DEFAULT_SCHEDULE), default="delta")
    sp.add_argument("--schedule", nargs="+", type=float, default=None)
    sp.add_argument("--n", type=int, default=1, help="eigenfunction index for hermite kinds")
    _common(sp, "csv", ("delta",))
    sp.set_defaults(run=run_limits, delta=0.5)
    return ap


def _validate(args):
    _finite(args, "gamma1", "gamma2", "delta", "gamma3", "kappa1", "kappa2")
    n_max = getattr(args, "n_max", None)
    if n_max is not None:
        cap = EIGEN_N_MAX if args.command == "eigen" else 8
        if not 0 <= n_max <= cap:
            raise FlagError(f"--n-max must be in 0..{cap}")
    if getattr(args, "n", None) is not None and not 0 <= args.n <= 8:
        raise FlagError("--n must be in 0..8")
    if args.command == "limits" and args.kind == "hermite" and args.n < 1:
        raise FlagError("the Hermite limit is defined for n >= 1")
    if args.command == "limits" and (not math.isfinite(args.delta) or args.delta <= 0):
        raise FlagError("--delta must be positive for the limit study")
    if args.output != "-":
        parent = Path(args.output).resolve().parent
        if not parent.is_dir() or not os.access(parent, os.W_OK):
            raise OSError(f"output directory {parent} is not writable")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _validate(args)
        if args.command == "region":
            _range(args.gamma1_range, "--gamma1-range")
            _range(args.gamma2_range, "--gamma2-range")
        args.run(args)
    except FlagError as exc:
        parser.error(str(exc))
    except (InadmissibleParameters, SingularityError) as exc:
        print(f"oscfactor: {exc}", file=sys.stderr)
        return EXIT_INADMISSIBLE
    except (NonConvergenceError, OverflowError, FloatingPointError) as exc:
        print(f"oscfactor: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"oscfactor: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
