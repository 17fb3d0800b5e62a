"""Command line interface.

``check`` loads and checks a declaration file; ``eval`` and ``type``
normalize or type a term against a checked file; ``genrec`` prints the
canonical recursor of an inductive type; ``pos`` prints the signed
position sets of a term.  Every command takes ``--json`` for machine
output and ``--fuel N`` to bound reduction; the CAC_FUEL environment
variable overrides the default bound.

Exit codes: 0 success, 1 check failure, 2 parse or I/O failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from .checker import CheckResult, check_file
from .inductive import pos_sets
from .recursor import generate_canonical_recursor, validate_extended_recursor
from .reduction import Fuel, normalize
from .signature import RewriteRule
from .surface import ParseError, parse_term_text, resolve
from .terms import EMPTY_ENV, KernelError, Term, format_position, show
from .typecheck import infer_type


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="cac", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("file", help="declaration file to load")
        p.add_argument("--fuel", type=int, default=None, help="max reduction steps")
        p.add_argument("--json", action="store_true", help="machine-readable output")

    p_check = sub.add_parser("check", help="check a declaration file")
    common(p_check)
    p_check.add_argument("--fail-fast", action="store_true", help="stop at the first error")

    p_eval = sub.add_parser("eval", help="normalize a term")
    common(p_eval)
    p_eval.add_argument("-e", "--expr", required=True, help="term to normalize")

    p_type = sub.add_parser("type", help="infer the type of a term")
    common(p_type)
    p_type.add_argument("-e", "--expr", required=True, help="term to type")

    p_genrec = sub.add_parser("genrec", help="generate the canonical recursor of a type")
    common(p_genrec)
    p_genrec.add_argument("-t", "--type", required=True, dest="target", help="inductive type")

    p_pos = sub.add_parser("pos", help="print positive/negative positions of a term")
    common(p_pos)
    p_pos.add_argument("-e", "--expr", required=True, help="term to analyse")

    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except ParseError as exc:
        _fail(args, exc, exit_code=2)
        return 2
    except OSError as exc:
        print(f"error[IO] {exc}", file=sys.stderr)
        return 2
    except KernelError as exc:
        _fail(args, exc, exit_code=1)
        return 1


def _fail(args: argparse.Namespace, exc: KernelError, exit_code: int) -> None:
    if getattr(args, "json", False):
        print(json.dumps({"ok": False, "error": {"code": exc.code, "message": exc.message}}))
    else:
        print(f"error[{exc.code}] {exc.message}", file=sys.stderr)


def _load(args: argparse.Namespace, fail_fast: bool = False) -> CheckResult:
    fuel = Fuel(args.fuel) if args.fuel else None
    return check_file(args.file, fuel=fuel, fail_fast=fail_fast)


def _parse_expr(result: CheckResult, text: str) -> Term:
    return resolve(parse_term_text(text), result.signature.symbols)


def _print_diagnostics(result: CheckResult) -> None:
    out = result.format_diagnostics()
    if out:
        print(out)


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == "check":
        result = _load(args, fail_fast=args.fail_fast)
        if args.json:
            print(
                json.dumps(
                    {"ok": result.ok, "diagnostics": [d.to_json() for d in result.diagnostics]},
                    indent=2,
                )
            )
        else:
            _print_diagnostics(result)
            print(f"{args.file}: {'ok' if result.ok else 'failed'}")
        return 0 if result.ok else 1

    result = _load(args)
    if not result.ok:
        if args.json:
            print(
                json.dumps(
                    {"ok": False, "diagnostics": [d.to_json() for d in result.diagnostics]},
                    indent=2,
                )
            )
        else:
            _print_diagnostics(result)
        return 1

    if args.command == "eval":
        term = _parse_expr(result, args.expr)
        normal = normalize(result.signature, term, result.fuel)
        print(json.dumps({"normal_form": show(normal)}) if args.json else show(normal))
        return 0

    if args.command == "type":
        term = _parse_expr(result, args.expr)
        ty = infer_type(result.signature, EMPTY_ENV, term, result.fuel)
        print(json.dumps({"type": show(ty)}) if args.json else show(ty))
        return 0

    if args.command == "pos":
        term = _parse_expr(result, args.expr)
        sets = pos_sets(result.signature, term)
        plus = sorted((format_position(p) for p in sets.positive), key=_pos_key)
        minus = sorted((format_position(p) for p in sets.negative), key=_pos_key)
        if args.json:
            print(json.dumps({"pos_plus": plus, "pos_minus": minus}))
        else:
            print("Pos+: " + (", ".join(plus) if plus else "(empty)"))
            print("Pos-: " + (", ".join(minus) if minus else "(empty)"))
        return 0

    if args.command == "genrec":
        record = result.inductives.get(args.target)
        if record is None:
            raise KernelError(f"no inductive declaration for {args.target!r} in {args.file}")
        generated = generate_canonical_recursor(result.signature, record.decl, fuel=result.fuel)
        validation = validate_extended_recursor(result.signature, generated.decl, result.fuel)
        if args.json:
            print(
                json.dumps(
                    {
                        "name": generated.decl.name,
                        "type": show(generated.type),
                        "parameters": generated.parameters,
                        "rules": [_rule_json(r) for r in generated.rules],
                        "validation_passed": validation.passed,
                    },
                    indent=2,
                )
            )
        else:
            print(f"symbol {generated.decl.name} : {show(generated.type)}.")
            for rule in generated.rules:
                env = ", ".join(f"{x}:{show(t)}" for x, t in rule.env)
                rho = ", ".join(f"{x}={show(t)}" for x, t in rule.rho)
                line = f"rule {show(rule.lhs)} --> {show(rule.rhs)}"
                if env:
                    line += f" in {env}"
                if rho:
                    line += f" with {rho}"
                print(line + ".")
            print(f"// validation: {'all clauses passed' if validation.passed else validation.issues()}")
        return 0

    raise KernelError(f"unknown command {args.command!r}")


def _rule_json(rule: RewriteRule) -> dict:
    return {
        "lhs": show(rule.lhs),
        "rhs": show(rule.rhs),
        "env": [[x, show(t)] for x, t in rule.env],
        "rho": [[x, show(t)] for x, t in rule.rho],
    }


def _pos_key(path: str) -> tuple[int, str]:
    return (0 if path == "ε" else len(path), path)


if __name__ == "__main__":
    sys.exit(main())
