"""Command-line front end: ``sal classify|adjoint|conserve|table|simulate|oracle``.

Exit status 0 means success, 1 a mathematical rejection (for example a spec
that is not strictly self-adjoint where a local conservation law is needed,
or a simulation that blows up), 2 a usage or input error.
"""

import argparse
import sys
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import params as P
from .adjoint import adjoint, strict_self_adjointness
from .currents import TABLE_ROWS, ibragimov_vector, strip_trivial, table_row
from .equations import riemann
from .errors import ParseError, SalError, SolverError, SpecError
from .grammar import format_expr, format_param, parse_spec
from .jet import match_multiple, substitute_dependent
from .solver import (
    Scheme,
    SolverConfig,
    breaking_time,
    initial_data,
    make_grid,
    profile,
    relative_drift,
    riemann_oracle,
    simulate,
    write_log_csv,
    write_profile_csv,
)
from .symmetry import invariance_residual, scaling, scaling_exponent, translation

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2


@dataclass
class Report:
    command: str
    inputs: list = field(default_factory=list)  # [(key, value)]
    results: list = field(default_factory=list)  # [(key, value)]
    status: int = EXIT_OK

    def add(self, key, value):
        self.results.append((key, value))


def _text_value(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "%.17g" % value
    if isinstance(value, (list, tuple)):
        return "; ".join(_text_value(v) for v in value)
    if isinstance(value, str):
        return value
    if isinstance(value, P.ParamExpr):
        return format_param(value)
    return format_expr(value)


def emit_report(report, fmt="text"):
    """Render a report; machine output is a flat ``key: value`` document."""
    if fmt == "machine":
        lines = [f"command: {report.command}"]
        lines += [f"input.{k}: {_text_value(v)}".rstrip() for k, v in report.inputs]
        lines += [f"{k}: {_text_value(v)}".rstrip() for k, v in report.results]
        lines.append(f"exit_status: {report.status}")
        return ("\n".join(lines) + "\n").encode()
    width = max((len(k) for k, _ in report.inputs + report.results), default=0)
    lines = [f"sal {report.command}"]
    if report.inputs:
        lines.append("inputs:")
        lines += [f"  {k.replace('_', ' '):<{width}}  {_text_value(v)}".rstrip() for k, v in report.inputs]
    if report.results:
        lines.append("results:")
        lines += [f"  {k.replace('_', ' '):<{width}}  {_text_value(v)}".rstrip() for k, v in report.results]
    return ("\n".join(lines) + "\n").encode()


def _load_spec(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_spec(fh.read())
    except OSError as exc:
        raise _UsageError(f"cannot read spec file {path!r}: {exc.strerror}") from None


class _UsageError(Exception):
    pass


def _grid_and_config(args, scheme=Scheme.SPECTRAL_U_FORM):
    try:
        return make_grid(args.L, args.n), SolverConfig(args.dt, scheme, dealias=args.dealias)
    except SolverError as exc:
        raise _UsageError(str(exc)) from None


def _spec_inputs(spec):
    out = [("epsilon", spec.epsilon), ("f", spec.f), ("g", spec.g), ("h", spec.h)]
    return ([("name", spec.name)] if spec.name else []) + out


# commands --------------------------------------------------------------------


def cmd_classify(args):
    spec = _load_spec(args.spec)
    r = Report("classify", _spec_inputs(spec))
    verdict = strict_self_adjointness(spec)
    r.add("is_ssa", verdict.is_ssa)
    r.add("lambda", verdict.multiplier)
    r.add("c", verdict.c_value if verdict.c_value is not None else "none")
    r.add("conditions", [format_expr(c) for c in verdict.conditions])
    if verdict.required_g is not None:
        r.add("required_g", verdict.required_g)
    b = None if spec.is_formal else scaling_exponent(spec)
    if b is None:
        r.add("scaling_symmetry", "none")
    else:
        res = invariance_residual(scaling(b), spec)
        r.add("scaling_symmetry", f"X_b with b = {format_param(b)}")
        r.add("scaling_b", b)
        r.add("scaling_lambda", res.multiplier)
    return r


def cmd_adjoint(args):
    spec = _load_spec(args.spec)
    r = Report("adjoint", _spec_inputs(spec))
    fstar = adjoint(spec)
    on_u = substitute_dependent(fstar)
    r.add("adjoint", fstar)
    r.add("adjoint_at_v_eq_u", on_u)
    m = match_multiple(on_u, spec.equation())
    if m is None:
        r.add("lambda", "none")
        r.add("conditions", "inconsistent")
    else:
        r.add("lambda", m.multiplier)
        r.add("conditions", [format_expr(c) for c in m.conditions])
    return r


def _generator(spec, name):
    if name == "x":
        return translation("x")
    if name == "t":
        return translation("t")
    b = scaling_exponent(spec)
    if b is None:
        return None
    return scaling(b)


def cmd_conserve(args):
    spec = _load_spec(args.spec)
    r = Report("conserve", _spec_inputs(spec) + [("generator", args.generator), ("raw", args.raw)])
    X = _generator(spec, args.generator)
    if X is None:
        r.add("error", "the spec admits no scaling symmetry X_b")
        r.status = EXIT_DOMAIN
        return r
    C = ibragimov_vector(X, spec)
    if not C.local:
        r.add("local", False)
        r.add("error", "the spec is not strictly self-adjoint, so the conserved vector depends on v")
        r.add("density", C.c0)
        r.add("flux", C.c1)
        r.status = EXIT_DOMAIN
        return r
    if not args.raw:
        C = strip_trivial(C)
    r.add("local", True)
    r.add("density", C.c0)
    r.add("flux", C.c1)
    r.add("characteristic", C.characteristic)
    return r


def cmd_table(args):
    r = Report("table")
    for i, row in enumerate(TABLE_ROWS, 1):
        density, flux = table_row(row.spec)
        r.add(f"row{i}.equation", row.label)
        r.add(f"row{i}.epsilon", row.spec.epsilon)
        r.add(f"row{i}.b", row.spec.power.b)
        r.add(f"row{i}.gamma", row.spec.power.gamma)
        r.add(f"row{i}.beta", row.spec.power.beta)
        r.add(f"row{i}.density", density)
        r.add(f"row{i}.flux", flux)
    return r


def _init_params(pairs):
    out = {}
    for item in pairs or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise _UsageError(f"--param expects key=value, got {item!r}")
        try:
            out[key.strip()] = float(value)
        except ValueError:
            raise _UsageError(f"--param {key}: {value!r} is not a number") from None
    return out


def cmd_simulate(args):
    spec = _load_spec(args.spec)
    grid, config = _grid_and_config(args, Scheme(args.scheme))
    params = _init_params(args.param)
    r = Report(
        "simulate",
        _spec_inputs(spec)
        + [("init", args.init), ("L", args.L), ("n", args.n), ("dt", args.dt), ("t_end", args.t_end), ("scheme", args.scheme)]
        + [(f"param.{k}", v) for k, v in sorted(params.items())],
    )
    state = initial_data(args.init, grid, spec, **params)
    state, rows = simulate(state, config, args.t_end, stride=args.stride)
    if args.out:
        write_log_csv(args.out, rows)
    if args.profile_out:
        write_profile_csv(args.profile_out, state)
    r.add("t", state.t)
    r.add("q_initial", state.q_log[0][1])
    r.add("q_final", state.q_log[-1][1])
    r.add("relative_drift", relative_drift(state))
    return r


def cmd_oracle(args):
    spec = riemann(P.to_param(_fraction(args.b)), P.to_param(_fraction(args.gamma)))
    grid, config = _grid_and_config(args)
    params = _init_params(args.param)
    prof = profile(args.init, grid.length, **params)
    r = Report(
        "oracle",
        [("init", args.init), ("gamma", args.gamma), ("b", args.b), ("L", args.L), ("n", args.n), ("t", args.t), ("dt", args.dt)],
    )
    t_star = breaking_time(prof, args.gamma, args.b, grid.length)
    r.add("breaking_time", t_star)
    exact = riemann_oracle(prof, args.gamma, args.b, grid, args.t)
    state = initial_data(args.init, grid, spec, **params)
    state, _ = simulate(state, config, args.t)
    r.add("max_abs_error", float(np.max(np.abs(state.u - exact))))
    return r


def _fraction(value):
    return Fraction(value).limit_denominator(10**6)


# argument parsing --------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(prog="sal", description=__doc__.splitlines()[0])
    parser.add_argument("--format", choices=("text", "machine"), default="text", help="report format")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="strict self-adjointness and scaling symmetry")
    p.add_argument("--spec", required=True, help="spec file")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("adjoint", help="adjoint equation and its value at v = u")
    p.add_argument("--spec", required=True)
    p.set_defaults(func=cmd_adjoint)

    p = sub.add_parser("conserve", help="conserved vector from a symmetry")
    p.add_argument("--spec", required=True)
    p.add_argument("--raw", action="store_true", help="skip removal of trivial parts")
    p.add_argument("--generator", choices=("scaling", "x", "t"), default="scaling")
    p.set_defaults(func=cmd_conserve)

    p = sub.add_parser("table", help="the six reference conservation laws")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("simulate", help="integrate a numeric spec and monitor Q")
    p.add_argument("--spec", required=True)
    p.add_argument("--init", required=True, choices=("gaussian", "smoothed_peakon", "sine", "constant"))
    p.add_argument("--param", action="append", metavar="KEY=VALUE", help="initial-data parameter, repeatable")
    p.add_argument("--L", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--dt", type=float, required=True)
    p.add_argument("--t-end", type=float, required=True)
    p.add_argument("--scheme", choices=[s.value for s in Scheme], default=Scheme.SPECTRAL_U_FORM.value)
    p.add_argument("--dealias", action="store_true")
    p.add_argument("--stride", type=int, default=1, help="log every STRIDE steps")
    p.add_argument("--out", help="CSV of t, Q, drift, mass, max|u|")
    p.add_argument("--profile-out", help="CSV of the final profile")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("oracle", help="compare the spectral scheme with the Riemann characteristics solution")
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--init", choices=("gaussian", "sine", "constant"), default="sine")
    p.add_argument("--param", action="append", metavar="KEY=VALUE")
    p.add_argument("--L", type=float, default=2 * np.pi)
    p.add_argument("--n", type=int, default=256)
    p.add_argument("--t", type=float, default=0.5)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--dealias", action="store_true")
    p.set_defaults(func=cmd_oracle)
    return parser


def run(argv=None, stdout=None, stderr=None):
    """Execute one command; returns the exit status."""
    stdout = stdout or sys.stdout.buffer
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        report = args.func(args)
    except (_UsageError, ParseError, SpecError) as exc:
        print(f"sal {args.command}: {exc}", file=stderr)
        return EXIT_USAGE
    except SalError as exc:
        report = Report(args.command)
        report.add("error", str(exc))
        report.status = EXIT_DOMAIN
    stdout.write(emit_report(report, args.format))
    stdout.flush()
    return report.status


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
