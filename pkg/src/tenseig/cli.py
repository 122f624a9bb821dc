"""Command-line interface: ``tenseig <subcommand> ...``.

Exit status is 0 on success, 1 on a usage or input error and 2 when the
numerics fail (a solve that does not converge, an invalid eigenpair, an
oracle-driven enumeration that runs out of budget).
"""
from __future__ import annotations

import argparse
import csv
import io as _stdio
import json
import sys

import numpy as np

from . import models
from .enumeration import enumerate_pairs, enumerate_until_oracle, sample_unit_sphere, start_stream
from .errors import NonFinite, NotEigenpair, SingularMatrix, StepFailure, TensorEigError, ZeroIterate
from .io import basin_csv, basin_map, basin_pairs_csv, read_result, read_tensor, result_csv, write_result, write_tensor
from .newton import NEWTON_METHODS, POWER_METHODS, SolverConfig, solve
from .spectral import classify, validate_eigenpair

METHODS = tuple(NEWTON_METHODS) + POWER_METHODS
FAMILIES = ("t-omega", "random", "identity", "motzkin", "pairwise-quartic")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _g(v):
    return "%.17g" % v


def _emit(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _solver_config(args) -> SolverConfig:
    return SolverConfig(
        method=args.method, delta=args.delta, kmax=args.kmax, tau=args.tau, alpha=args.alpha,
        direction=args.direction,
    )


def _add_solver_flags(p, default_method="oncm"):
    p.add_argument("--method", choices=METHODS, default=default_method)
    p.add_argument("--delta", type=float, default=1e-10, help="step-change tolerance")
    p.add_argument("--kmax", type=int, default=200, help="iteration cap")
    p.add_argument("--tau", type=float, default=1e-6, help="definiteness margin of the adaptive shift")
    p.add_argument("--alpha", type=float, default=0.0, help="fixed shift for shopm")
    p.add_argument("--direction", choices=("max", "min"), default="max", help="ashopm direction")


# ---------------------------------------------------------------- subcommands


def cmd_model(args):
    fam = args.family
    if fam == "t-omega":
        T = models.t_omega(args.n, args.omega)
    elif fam == "random":
        T = models.random_gaussian_symmetric(args.m, args.n, args.seed)
    elif fam == "identity":
        T = models.identity_tensor(args.m, args.n)
    elif fam == "motzkin":
        T = models.degenerate_example("motzkin")
    else:
        T = models.degenerate_example("pairwise-quartic")
    write_tensor(T, args.output, args.format)
    return 0


def cmd_oracle(args):
    entries, pairs = models.omega_eigenpair_oracle(args.n, args.omega)
    T = models.t_omega(args.n, args.omega)
    census = models.count_real_eigenpairs(args.n, args.omega)
    out = [f"N={census.total}"]
    out.append(f"thresholds={','.join(_g(w) for w in models.omega_thresholds(args.n))}")
    deficient = 0
    rows = []
    for k, p in enumerate(pairs):
        rep = classify(T, p.x)
        deficient += rep.rank_deficient
        rows.append((k, p, rep))
    out.append(f"rank_deficient={deficient}")
    out.append("pair,size,eigenvalue,rank,rank_deficient,power_class,x")
    for k, p, rep in rows:
        out.append(
            f"{k},{p.size},{_g(p.eigenvalue)},{rep.rank},{int(rep.rank_deficient)},{rep.power_class},"
            + " ".join(_g(v) for v in p.x)
        )
    sys.stdout.write("\n".join(out) + "\n")
    if args.output:
        doc = {"kind": "pairs", "pairs": [
            {"x": [float(v) for v in p.x], "eigenvalue": float(p.eigenvalue), "residual": 0.0, "source": "oracle"}
            for p in pairs
        ]}
        _emit(json.dumps(doc, indent=1) + "\n", args.output)
    return 0


def _parse_x0(text, n):
    try:
        x = np.array([float(v) for v in text.split(",")])
    except ValueError as exc:
        raise UsageError(f"--x0: {exc}") from exc
    if x.size != n:
        raise UsageError(f"--x0 has {x.size} entries, tensor dim is {n}")
    nrm = np.linalg.norm(x)
    if not nrm > 0:
        raise UsageError("--x0 must be nonzero")
    return x / nrm


def cmd_solve(args):
    T = read_tensor(args.tensor)
    x0 = _parse_x0(args.x0, T.dim) if args.x0 else sample_unit_sphere(T.dim, start_stream(args.seed, 0))
    out = solve(T, x0, _solver_config(args))
    text = (
        f"status={out.status}\niterations={out.iterations}\neigenvalue={_g(out.eigenvalue)}\n"
        f"residual={_g(out.residual)}\nx={' '.join(_g(v) for v in out.x)}\n"
    )
    sys.stdout.write(text)
    if args.output:
        write_result(out, args.output, "json")
    return 0 if out.converged else 2


def cmd_enumerate(args):
    T = read_tensor(args.tensor)
    cfg = _solver_config(args)
    if args.stop_at_oracle:
        oracle = read_result(args.stop_at_oracle)
        oracle = getattr(oracle, "pairs", oracle)
        res = enumerate_until_oracle(T, oracle, cfg, budget=args.starts, seed=args.seed, workers=args.jobs)
    else:
        res = enumerate_pairs(T, cfg, starts=args.starts, seed=args.seed, workers=args.jobs)
    if args.output:
        write_result(res, args.output, args.format)
    else:
        sys.stdout.write(result_csv(res))
    sys.stderr.write(
        f"pairs={len(res.pairs)} starts={res.starts} failures={res.failures} "
        f"({', '.join(f'{k}={v}' for k, v in res.failure_kinds.items())}) status={res.status} "
        f"saturated={res.saturated} seconds={res.duration:.3f}\n"
    )
    return 2 if res.status == "budget-exhausted" else 0


def cmd_classify(args):
    T = read_tensor(args.tensor)
    pairs = read_result(args.pairs)
    pairs = getattr(pairs, "pairs", pairs)
    if not isinstance(pairs, list):
        pairs = [pairs]
    buf = _stdio.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["pair", "valid", "eigenvalue", "residual", "gamma", "rank", "power_class", "newton_stable",
                "hp_spectrum"])
    bad = 0
    for k, p in enumerate(pairs):
        if len(p.x) != T.dim:
            raise UsageError(f"pair {k} has length {len(p.x)}, tensor dim is {T.dim}")
        lam, res, ok = validate_eigenpair(T, p.x)
        if not ok:
            bad += 1
            w.writerow([k, 0, _g(lam), _g(res), "", "", "", "", ""])
            continue
        rep = classify(T, p.x)
        w.writerow([k, 1, _g(lam), _g(res), _g(rep.gamma), rep.rank, rep.power_class, int(rep.newton_stable),
                    " ".join(_g(v) for v in rep.hp_spectrum)])
    _emit(buf.getvalue(), args.output)
    return 2 if bad else 0


def cmd_basin(args):
    T = read_tensor(args.tensor)
    grid = basin_map(T, _solver_config(args), args.grid)
    _emit(basin_csv(grid), args.output)
    if args.pairs_output:
        _emit(basin_pairs_csv(grid), args.pairs_output)
    return 0


def cmd_sweep(args):
    if args.steps < 1:
        raise UsageError("--steps must be at least 1")
    if args.omega_min < 0 or args.omega_max < args.omega_min:
        raise UsageError("need 0 <= omega-min <= omega-max")
    omegas = np.linspace(args.omega_min, args.omega_max, args.steps) if args.steps > 1 else np.array([args.omega_min])
    buf = _stdio.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["omega", "count", "eigenvalues"])
    for om in omegas:
        _, pairs = models.omega_eigenpair_oracle(args.n, float(om))
        lams = sorted(p.eigenvalue for p in pairs)
        w.writerow([_g(om), len(pairs), ";".join(_g(v) for v in lams)])
    _emit(buf.getvalue(), args.output)
    return 0


def build_parser():
    top = _Parser(prog="tenseig", description="Real eigenpairs of symmetric tensors.")
    sub = top.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("model", help="write a model tensor to a file")
    p.add_argument("--family", choices=FAMILIES, required=True)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--omega", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("dense", "coordinate", "text"), default="dense")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_model)

    p = sub.add_parser("oracle", help="closed-form census of T_omega = identity + omega * ones")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--omega", type=float, required=True)
    p.add_argument("-o", "--output", help="also write the pairs as JSON")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("solve", help="one run from one start")
    p.add_argument("--tensor", required=True)
    _add_solver_flags(p)
    p.add_argument("--seed", type=int, default=0, help="draws the start when --x0 is absent")
    p.add_argument("--x0", help="comma-separated start (normalized)")
    p.add_argument("-o", "--output", help="JSON outcome file")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser(
        "enumerate", help="multi-start enumeration",
        description="CSV columns: pair, eigenvalue, abs_eigenvalue, hits, residual, gamma, rank, "
        "power_class, newton_stable, x0..x{n-1}.",
    )
    p.add_argument("--tensor", required=True)
    _add_solver_flags(p)
    p.add_argument("--starts", type=int, default=1000, help="number of starts (the budget with --stop-at-oracle)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stop-at-oracle", metavar="PAIRS", help="stop once every pair in this result file is found")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser(
        "classify", help="validate and classify eigenpairs from a result file",
        description="CSV columns: pair, valid, eigenvalue, residual, gamma, rank, power_class, newton_stable, "
        "hp_spectrum (space separated).",
    )
    p.add_argument("--tensor", required=True)
    p.add_argument("--pairs", required=True)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser(
        "basin", help="basin map over an R x 2R grid (dim 3 only)",
        description="CSV columns: theta_index, phi_index, theta, phi, pair (-1 on failure), iterations.",
    )
    p.add_argument("--tensor", required=True)
    _add_solver_flags(p)
    p.add_argument("--grid", type=int, default=60)
    p.add_argument("-o", "--output")
    p.add_argument("--pairs-output", help="CSV of the limit vectors indexed by pair id")
    p.set_defaults(func=cmd_basin)

    p = sub.add_parser(
        "sweep-omega", help="real eigenpair count of T_omega over a range of omega",
        description="CSV columns: omega, count, eigenvalues (semicolon separated, ascending).",
    )
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--omega-min", type=float, default=0.0)
    p.add_argument("--omega-max", type=float, default=0.1)
    p.add_argument("--steps", type=int, default=101)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_sweep)
    return top


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"tenseig {args.command}: {exc}", file=sys.stderr)
        return 1
    except (NotEigenpair, NonFinite, SingularMatrix, StepFailure, ZeroIterate) as exc:
        print(f"tenseig {args.command}: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        # includes ParseError and the other input-validation errors
        print(f"tenseig {args.command}: {exc}", file=sys.stderr)
        return 1
    except TensorEigError as exc:
        print(f"tenseig {args.command}: {exc}", file=sys.stderr)
        return 2
