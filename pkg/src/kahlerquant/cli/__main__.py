"""``kahlerquant`` command line.

Exit codes: 0 all checks pass, 1 a check failed, 2 usage or config error.
"""
from __future__ import annotations

import argparse
import json
import sys

from ..fedosov import classical_flat_section, phi_sections, quantum_flat_section, star_product
from ..fock import module_action
from ..toeplitz import evaluate_at_basepoint, toeplitz_apply
from ..weyl import format_weyl
from .config import Caps, Config, ConfigError, connection_for
from .parser import ExpressionError, format_expression, parse_expression, truncate_hbar
from .suite import dump_report, run_suite

DEFAULT_REPORT = "kahlerquant-report.json"


class UsageError(Exception):
    pass


def _add_model_args(p):
    p.add_argument("--geometry", default="flat", choices=["flat", "fs", "hyp"])
    p.add_argument("--n", type=int, default=1, help="complex dimension")
    p.add_argument("--alpha", default="zero", choices=["zero", "minus-hbar-ricci"])
    p.add_argument("--weight", type=int, default=8, help="weight cap")
    p.add_argument("--jet", type=int, default=8, help="jet order")
    p.add_argument("--hbar", type=int, default=3, help="hbar order to print")


def _model(args):
    try:
        caps = Caps(args.weight, args.jet, args.hbar)
    except ConfigError as e:
        raise UsageError(str(e)) from None
    geo = {"name": args.geometry, "n": args.n}
    return caps, connection_for(geo, args.alpha, caps.working)


def _parse(text, n, N):
    try:
        return parse_expression(text, n).with_cap(N)
    except ExpressionError as e:
        raise UsageError(f"{e}\n  {text}\n  {' ' * e.offset}^") from None
    except ValueError as e:
        raise UsageError(str(e)) from None


def cmd_verify(args) -> int:
    try:
        config = Config.load(args.config)
    except ConfigError as e:
        raise UsageError(str(e)) from None
    report = run_suite(config, args.jobs)
    for r in report["checks"]:
        status = "PASS" if r["pass"] else "FAIL"
        extra = f"  ({r['error']})" if r["error"] else ""
        print(f"{status}  {r['id']:<30} residual={r['residual_max_abs']}  {r['wall_time']}s{extra}")
    with open(args.report, "w") as fh:
        fh.write(dump_report(report))
    print(f"report written to {args.report}")
    return 0 if report["all_pass"] else 1


def cmd_star(args) -> int:
    caps, c = _model(args)
    f = _parse(args.f, args.n, caps.working)
    g = _parse(args.g, args.n, caps.working)
    print(format_expression(truncate_hbar(star_product(f, g, c), caps.hbar_order)))
    return 0


def cmd_flat_section(args) -> int:
    caps, c = _model(args)
    f = _parse(args.f, args.n, caps.working)
    sec = classical_flat_section(f, c) if args.classical else quantum_flat_section(f, c)
    sec = sec.truncate(caps.working)
    if args.basepoint:
        sec = sec.at_basepoint()
    print(format_weyl(sec.filter(lambda k: k[0] <= 2 * caps.hbar_order)))
    return 0


def cmd_toeplitz(args) -> int:
    caps, c = _model(args)
    N = caps.working
    f = _parse(args.f, args.n, N)
    s = _parse(args.s, args.n, N)
    try:
        s_prime, residual = module_action(f, s, c)
    except ArithmeticError as e:
        raise UsageError(f"module action failed: {e}") from None
    print(format_expression(truncate_hbar(s_prime.truncate(N), caps.hbar_order)))
    if args.cross_check:
        from ..fedosov import holomorphic_flat_section
        Phi0 = evaluate_at_basepoint(phi_sections(c)[2])
        Jf = evaluate_at_basepoint(classical_flat_section(f, c))
        Js = holomorphic_flat_section(s, c)
        T = toeplitz_apply(Jf, Js.at_basepoint(), Phi0, N)
        from ..fedosov import quantum_flat_section as qfs
        from ..fock import bf_action, vacuum
        A = bf_action(qfs(f, c), vacuum(c, Js), c.geo).amplitude.at_basepoint()
        same = (A - T).is_zero()
        print(f"toeplitz cross-check: {'agree' if same else 'DIFFER'}")
        return 0 if same else 1
    return 0 if residual.amplitude.is_zero() else 1


def cmd_report(args) -> int:
    try:
        with open(args.report) as fh:
            report = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise UsageError(f"cannot read report {args.report}: {e}") from None
    for r in report.get("checks", []):
        if r["id"] == args.check:
            print(f"{r['id']}: {r['anchor']}")
            print(f"caps: {json.dumps(r['caps'], sort_keys=True)}")
            print(f"residual max-abs: {r['residual_max_abs']}  pass: {r['pass']}")
            if r.get("error"):
                print(f"error: {r['error']}")
            return 0 if r["pass"] else 1
    raise UsageError(f"check {args.check!r} not in {args.report}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kahlerquant", description="Exact Fedosov/Wick star products and Toeplitz checks")
    sub = p.add_subparsers(dest="cmd", required=True)

    v = sub.add_parser("verify", help="run the identity checks listed in a JSON config")
    v.add_argument("--config", required=True)
    v.add_argument("--jobs", type=int, default=None, help=f"parallel workers (env KAHLERQUANT_JOBS overrides)")
    v.add_argument("--report", default=DEFAULT_REPORT)
    v.set_defaults(fn=cmd_verify)

    s = sub.add_parser("star", help="print the hbar-expansion of f * g")
    s.add_argument("-f", required=True)
    s.add_argument("-g", required=True)
    _add_model_args(s)
    s.set_defaults(fn=cmd_star)

    fs = sub.add_parser("flat-section", help="print the quantum (or classical) flat section of f")
    fs.add_argument("-f", required=True)
    fs.add_argument("--classical", action="store_true")
    fs.add_argument("--basepoint", action="store_true", help="evaluate the jet coefficients at z = 0")
    _add_model_args(fs)
    fs.set_defaults(fn=cmd_flat_section)

    t = sub.add_parser("toeplitz", help="print s' for O_f acting on the flat module section of s")
    t.add_argument("-f", required=True)
    t.add_argument("-s", required=True)
    t.add_argument("--cross-check", action="store_true", help="compare with the Toeplitz operator at the basepoint")
    _add_model_args(t)
    t.set_defaults(fn=cmd_toeplitz, alpha="minus-hbar-ricci")

    r = sub.add_parser("report", help="show the anchor and last residual of a check")
    r.add_argument("--check", required=True)
    r.add_argument("--report", default=DEFAULT_REPORT)
    r.set_defaults(fn=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    try:
        return args.fn(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
