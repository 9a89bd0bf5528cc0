"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 invalid scenario, 3 failed numerical check.
"""

from __future__ import annotations

import argparse
import sys
import time
import warnings
from importlib import resources
from pathlib import Path

import numpy as np

from . import gadgets, oracle, reproduce
from .attribution import AttributionRule, attribute_joint, attribute_local, curious_report
from .collapse import MissingOutcomeError, Prescription, prescription_order, surface_state, worldline_trace
from .hilbert import hermitian
from .scenario import (
    Query,
    ScenarioError,
    ScenarioValidationError,
    format_number,
    format_point,
    format_surface,
    load,
    parse_outcome_assignment,
    parse_points,
    parse_surface,
)

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_CHECK = 0, 1, 2, 3
COMPARE_TOL = 1e-9
SHOW_TOL = 1e-12


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _g(x) -> str:
    return f"{float(x) + 0.0:.6g}"


def _complex(z) -> str:
    re, im = float(z.real) + 0.0, float(z.imag) + 0.0
    if abs(im) < SHOW_TOL:
        return _g(re)
    if abs(re) < SHOW_TOL:
        return f"{_g(im)}i"
    return f"{_g(re)}{'+' if im >= 0 else '-'}{_g(abs(im))}i"


def scenario_path(arg: str) -> Path:
    """A path on disk, or the name of a scenario shipped with the package."""
    p = Path(arg)
    if p.is_file():
        return p
    shipped = resources.files("relcollapse") / "scenarios"
    for name in (arg, f"{arg}.scn"):
        candidate = shipped / name
        if candidate.is_file():
            return Path(str(candidate))
    raise UsageError(f"no such scenario file: {arg}")


def _load(arg: str):
    return load(scenario_path(arg))


def _queries(s, kind: str) -> list:
    return [q for q in s.queries if q.kind == kind]


def _basis_label(space, index: int) -> str:
    digits = np.unravel_index(index, space.dims)
    return "|" + ",".join(str(int(d)) for d in digits) + ">"


def _state_lines(st) -> list:
    out = [
        f"surface: {format_surface(st.surface)}",
        f"outcomes: {_fmt_outcomes(st.outcomes)}",
        f"applied: {' '.join(st.applied) or '-'}",
        f"weight: {_g(st.weight)}",
    ]
    if st.impossible:
        out.append("state: none (outcomes impossible)")
        return out
    amps = st.state.amplitudes
    out.append(f"amplitudes (basis {','.join(st.state.space.names)}, nonzero only):")
    for k in np.flatnonzero(np.abs(amps) > SHOW_TOL):
        out.append(f"  {_basis_label(st.state.space, int(k))} {_complex(amps[k])}")
    return out


def _fmt_outcomes(outcomes: dict) -> str:
    return ",".join(f"{k}:{v}" for k, v in outcomes.items()) or "-"


# --- subcommands ---------------------------------------------------------------------


def cmd_validate(args) -> int:
    path = scenario_path(args.file)
    try:
        load(path)
    except ScenarioValidationError as exc:
        for v in exc.violations:
            print(f"violation: {v}")
        return EXIT_INVALID
    print(f"{path.name}: valid")
    return EXIT_OK


def cmd_simulate(args) -> int:
    s = _load(args.file)
    lin = None
    if args.prescription:
        presc, _, wl = args.prescription.partition("@")
        lin = prescription_order(s, Prescription.parse(presc), s.worldline(wl) if wl else None)
    csv = oracle.enumerate_outcomes(s, lin, keep_states=False).to_csv()
    if args.out:
        Path(args.out).write_text(csv, encoding="utf-8")
    else:
        sys.stdout.write(csv)
    return EXIT_OK


def cmd_compare(args) -> int:
    s = _load(args.file)
    orders = oracle.compare_orders(s, cap=args.cap, seed=args.seed)
    how = "exhaustive" if orders.exhaustive else f"sampled, seed {args.seed}"
    print(f"linearizations: {orders.n_orders} ({how}), max discrepancy {_g(orders.max_discrepancy)}")
    presc = oracle.compare_prescriptions(s)
    for key, value in presc.items():
        print(f"{key}: max discrepancy {_g(value)}")
    worst = max([orders.max_discrepancy] + list(presc.values()))
    ok = worst < args.tol
    print(f"max discrepancy: {_g(worst)} ({'PASS' if ok else 'FAIL'} at {args.tol:g})")
    return EXIT_OK if ok else EXIT_CHECK


def cmd_state(args) -> int:
    s = _load(args.file)
    if args.surface:
        requests = [(parse_surface(args.surface), parse_outcome_assignment(args.outcomes))]
    else:
        requests = [
            (parse_surface(q.get("surface")), parse_outcome_assignment(q.get("outcomes")))
            for q in _queries(s, "surface-state")
        ]
        if not requests:
            raise UsageError("no --surface given and the scenario has no surface-state queries")
    blocks = ["\n".join(_state_lines(surface_state(s, surf, out))) for surf, out in requests]
    print("\n\n".join(blocks))
    return EXIT_OK


def _trace_lines(s, wl_name, presc_text, outcomes) -> list:
    wl = s.worldline(wl_name)
    presc = Prescription.parse(presc_text)
    axis = s.space.index(wl_name)
    out = [f"worldline {wl_name}, prescription {presc}, outcomes {_fmt_outcomes(outcomes)}"]
    for seg in worldline_trace(s, wl, presc, outcomes):
        lo = "[" if seg.closed_start else "("
        hi = "]" if seg.closed_end else ")"
        st = seg.state
        line = f"  t in {lo}{format_number(seg.t_start)}, {format_number(seg.t_end)}{hi}"
        line += f"  entered: {' '.join(seg.entered) or '-'}  weight: {_g(st.weight)}"
        if not st.impossible:
            probs = np.moveaxis(np.abs(st.state.tensor()) ** 2, axis, 0)
            pops = probs.reshape(probs.shape[0], -1).sum(axis=1)
            line += f"  populations {wl_name}: " + " ".join(_g(p if p > SHOW_TOL else 0.0) for p in pops)
        out.append(line)
    return out


def cmd_trace(args) -> int:
    s = _load(args.file)
    if args.worldline:
        requests = [(args.worldline, args.prescription or "hk", parse_outcome_assignment(args.outcomes))]
    else:
        requests = [
            (q.get("worldline"), q.get("prescription", "hk"), parse_outcome_assignment(q.get("outcomes")))
            for q in _queries(s, "trace")
        ]
        if not requests:
            raise UsageError("no --worldline given and the scenario has no trace queries")
    print("\n\n".join("\n".join(_trace_lines(s, *r)) for r in requests))
    return EXIT_OK


def _attribute(s, q: Query):
    rule = AttributionRule.parse(q.get("rule", "ghirardi"))
    points = parse_points(q.get("points"))
    targets = tuple(t.strip() for t in q.get("targets").split(","))
    dims = tuple(s.space.dim_of(t) for t in targets)
    op = gadgets.resolve_operator(q.get("observable"), targets, dims)
    op = hermitian(op.targets, op.matrix, op.dims)
    outcomes = parse_outcome_assignment(q.get("outcomes"))
    if len(points) == 1:
        verdict = attribute_local(s, points[0], op, outcomes, rule)
    elif len(points) == 2:
        verdict = attribute_joint(s, points[0], points[1], op, outcomes, rule)
    else:
        raise UsageError("attribute needs one point or two points")
    where = ";".join(format_point(p) for p in points)
    return rule, where, q.get("observable"), targets, verdict


def cmd_attribute(args) -> int:
    s = _load(args.file)
    if args.points:
        if not args.observable or not args.targets:
            raise UsageError("attribute with --points also needs --observable and --targets")
        params = [("rule", args.rule), ("points", args.points), ("observable", args.observable),
                  ("targets", args.targets)]
        if args.outcomes:
            params.append(("outcomes", args.outcomes))
        queries = [Query("attribute", tuple(params))]
    else:
        queries = _queries(s, "attribute")
        if args.rule_given:
            queries = [Query("attribute", tuple((k, args.rule if k == "rule" else v) for k, v in q.params))
                       for q in queries]
        if not queries:
            raise UsageError("no --points given and the scenario has no attribute queries")
    for q in queries:
        rule, where, obs, targets, v = _attribute(s, q)
        if args.format == "kv":
            value = "" if v.eigenvalue is None else f"{v.eigenvalue:.17g}"
            print(
                f"rule={rule.value} points={where} observable={obs} targets={','.join(targets)} "
                f"definite={str(v.definite).lower()} eigenvalue={value} residual={v.residual:.6g} "
                f"weight={v.weight:.17g}"
            )
        else:
            print(f"{rule.value} {obs} on {','.join(targets)} at {where}: {v.describe()} "
                  f"(residual {_g(v.residual)}, weight {_g(v.weight)})")
    return EXIT_OK


def cmd_curious(args) -> int:
    s = _load(args.file) if args.file else gadgets.fig3()
    if args.points:
        points = parse_points(args.points)
        if len(points) != 2:
            raise UsageError("--points needs exactly two points")
    else:
        points = (gadgets.FIG3_P, gadgets.FIG3_P_PRIME)
    outcomes = parse_outcome_assignment(args.outcomes)
    rep = curious_report(s, points[0], points[1], outcomes)
    lines = rep.records() if args.format == "kv" else rep.lines()
    print("\n".join(lines))
    return EXIT_OK


def cmd_demo(args) -> int:
    if args.what != "figs":
        raise UsageError(f"unknown demo {args.what!r}; available: figs")
    for name, s in gadgets.builtin_scenarios().items():
        d = oracle.enumerate_outcomes(s, keep_states=False)
        print(f"{name}: {len(s.events)} events, {len(d)} outcome branches, total probability {_g(d.total())}")
    ok = True
    for check in reproduce.all_checks():
        print(check.line())
        ok &= check.passed
    return EXIT_OK if ok else EXIT_CHECK


# --- parser --------------------------------------------------------------------------


class _StoreRule(argparse.Action):
    def __call__(self, parser, namespace, values, option_string=None):
        setattr(namespace, self.dest, values)
        namespace.rule_given = True


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="relcollapse", description="Measurement events in 1+1 Minkowski spacetime.")
    p.add_argument("--verbose", action="store_true", help="report timing on stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("validate", help="check a scenario file")
    c.add_argument("file")
    c.set_defaults(func=cmd_validate)

    c = sub.add_parser("simulate", help="joint outcome distribution as CSV")
    c.add_argument("file")
    c.add_argument("--out", help="write CSV here instead of stdout")
    c.add_argument("--prescription", help="apply events in this prescription's order, e.g. hk@A or flat:1")
    c.set_defaults(func=cmd_simulate)

    c = sub.add_parser("compare", help="check that orders and prescriptions agree")
    c.add_argument("file")
    c.add_argument("--cap", type=int, default=oracle.DEFAULT_ORDER_CAP)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--tol", type=float, default=COMPARE_TOL)
    c.set_defaults(func=cmd_compare)

    c = sub.add_parser("state", help="state on a surface")
    c.add_argument("file")
    c.add_argument("--surface", help="flat(t0[,rapidity]), sigma(t,x), eta(t,x) or union(t,x;t,x)")
    c.add_argument("--outcomes", help="e.g. M:pi,mzL1:0")
    c.set_defaults(func=cmd_state)

    c = sub.add_parser("trace", help="states along a world-line")
    c.add_argument("file")
    c.add_argument("--worldline")
    c.add_argument("--prescription", help="hk, forward, flat or flat:<rapidity>")
    c.add_argument("--outcomes")
    c.set_defaults(func=cmd_trace)

    c = sub.add_parser("attribute", help="definiteness of an observable")
    c.add_argument("file")
    c.add_argument("--rule", choices=[r.value for r in AttributionRule], default="ghirardi", action=_StoreRule)
    c.add_argument("--points", help="one point, or two points separated by ';'")
    c.add_argument("--observable", help="builtin operator, e.g. builtin.meson_isospin_sq")
    c.add_argument("--targets", help="comma-separated subsystems")
    c.add_argument("--outcomes")
    c.add_argument("--format", choices=["text", "kv"], default="text")
    c.set_defaults(func=cmd_attribute, rule_given=False)

    c = sub.add_parser("curious", help="joint versus local attribution for the meson pair")
    c.add_argument("file", nargs="?")
    c.add_argument("--points")
    c.add_argument("--outcomes", default="M:pi")
    c.add_argument("--format", choices=["text", "kv"], default="text")
    c.set_defaults(func=cmd_curious)

    c = sub.add_parser("demo", help="reproduce the built-in figure scenarios")
    c.add_argument("what", choices=["figs"])
    c.set_defaults(func=cmd_demo)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    started = time.perf_counter()
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            code = args.func(args)
    except UsageError as exc:
        print(f"relcollapse: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MissingOutcomeError as exc:
        print(f"relcollapse: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ScenarioError, KeyError, ValueError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"relcollapse: {msg}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"relcollapse: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.verbose:
        print(f"elapsed {time.perf_counter() - started:.3f} s", file=sys.stderr)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
