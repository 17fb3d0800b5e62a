"""Whole-file checking: runs every declaration through admission, typing
and the inductive/recursor analyses, producing a deterministic diagnostic
stream.

Mode-dependent obligations are settled in a final pass, once the file's
recursor declarations are known: a type with a nonempty recursor set is
checked elimination-based (its verbatim-argument and safety obligations
become notes), everything else introduction-based (they stay errors).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

from .inductive import (
    InductiveDecl,
    PositivityVerdict,
    check_defined_predicate_rule,
    check_I6,
    check_positivity,
    compute_accessibility,
    infer_parameters,
)
from .recursor import (
    AdmissibilityReport,
    RecursorDecl,
    admissibility_report,
    validate_extended_recursor,
)
from .reduction import Fuel
from .signature import (
    RewriteRule,
    RuleRejected,
    Signature,
    add_rule,
    check_safe_rule,
)
from .surface import (
    Declaration,
    EquivSrc,
    FuelSrc,
    InductiveSrc,
    ParseError,
    RecursorSrc,
    RuleSrc,
    SourceFile,
    SrcSpan,
    SymbolSrc,
    parse_source,
    resolve,
)
from .terms import (
    Environment,
    EMPTY_ENV,
    KernelError,
    Sym,
    Term,
    Var,
    alpha_equal,
    format_position,
    free_vars,
    show,
    spine,
    substitute,
)
from .typecheck import (
    check_rule_subject_reduction,
    infer_rule_env,
    validate_symbol_type,
)

DEFAULT_FUEL_STEPS = 10_000


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning" | "note"
    code: str
    message: str
    span: SrcSpan
    position: str | None = None
    condition: str | None = None

    def format(self, path: str) -> str:
        out = f"{self.severity}[{self.code}] {path}:{self.span.line}:{self.span.col}: {self.message}"
        if self.position is not None:
            out += f" (position {self.position})"
        if self.condition is not None:
            out += f" [{self.condition}]"
        return out

    def to_json(self) -> dict:
        out: dict = {
            "severity": self.severity,
            "code": self.code,
            "message": self.message,
            "span": {"line": self.span.line, "col": self.span.col, "len": self.span.length},
        }
        if self.position is not None:
            out["position"] = self.position
        if self.condition is not None:
            out["condition"] = self.condition
        return out


@dataclass
class InductiveRecord:
    decl: InductiveDecl
    span: SrcSpan
    parameters: int = 0
    positivity: PositivityVerdict | None = None
    accessibility: dict[str, frozenset[int]] = field(default_factory=dict)


@dataclass
class RuleRecord:
    rule: RewriteRule
    span: SrcSpan


@dataclass
class RecursorRecord:
    decl: RecursorDecl
    span: SrcSpan


@dataclass
class CheckResult:
    path: str
    signature: Signature
    diagnostics: list[Diagnostic] = field(default_factory=list)
    inductives: dict[str, InductiveRecord] = field(default_factory=dict)
    rules: list[RuleRecord] = field(default_factory=list)
    recursors: list[RecursorRecord] = field(default_factory=list)
    reports: dict[str, AdmissibilityReport] = field(default_factory=dict)
    fuel: Fuel = field(default_factory=Fuel)

    @property
    def ok(self) -> bool:
        return all(d.severity != "error" for d in self.diagnostics)

    def recursors_for(self, target: str) -> list[RecursorDecl]:
        return [r.decl for r in self.recursors if r.decl.target == target]

    def format_diagnostics(self) -> str:
        return "\n".join(d.format(self.path) for d in self.diagnostics)


def default_fuel() -> Fuel:
    env = os.environ.get("CAC_FUEL")
    if env and env.isdigit() and int(env) > 0:
        return Fuel(int(env))
    return Fuel(DEFAULT_FUEL_STEPS)


class _Checker:
    def __init__(self, path: str, fuel: Fuel | None, fail_fast: bool):
        self.sig = Signature()
        self.result = CheckResult(path=path, signature=self.sig)
        self.fuel_fixed = fuel is not None
        self.result.fuel = fuel or default_fuel()
        self.fail_fast = fail_fast

    # -- diagnostics ----------------------------------------------------

    def emit(
        self,
        severity: str,
        code: str,
        message: str,
        span: SrcSpan,
        position: str | None = None,
        condition: str | None = None,
    ) -> None:
        self.result.diagnostics.append(Diagnostic(severity, code, message, span, position, condition))

    def error_from(self, exc: KernelError, span: SrcSpan, condition: str | None = None) -> None:
        self.emit("error", exc.code, exc.message, span, condition=condition)

    @property
    def stop(self) -> bool:
        return self.fail_fast and not self.result.ok

    # -- driver -----------------------------------------------------------

    def run(self, source: SourceFile) -> CheckResult:
        for decl in source.declarations:
            if self.stop:
                return self.result
            self.dispatch(decl)
        if not self.stop:
            self.final_pass(source)
        return self.result

    def dispatch(self, decl: Declaration) -> None:
        match decl:
            case SymbolSrc():
                self.do_symbol(decl)
            case InductiveSrc():
                self.do_inductive(decl)
            case RuleSrc():
                self.do_rule(decl)
            case RecursorSrc():
                self.do_recursor(decl)
            case FuelSrc(steps, span):
                if not self.fuel_fixed:
                    try:
                        self.result.fuel = Fuel(steps)
                    except KernelError as exc:
                        self.error_from(exc, span)
            case EquivSrc(names, span):
                try:
                    self.sig.set_equivalent(names[0], *names[1:])
                except KernelError as exc:
                    self.error_from(exc, span)

    # -- declarations -----------------------------------------------------

    def declare_symbol(
        self,
        name: str,
        raw_type: Term,
        span: SrcSpan,
        mon_plus: tuple[int, ...] = (),
        mon_minus: tuple[int, ...] = (),
    ) -> bool:
        ty = resolve(raw_type, self.sig.symbols)
        try:
            self.sig.declare(name, ty, mon_plus=mon_plus, mon_minus=mon_minus)
        except KernelError as exc:
            self.error_from(exc, span)
            return False
        both = set(mon_plus) & set(mon_minus)
        if both:
            self.emit(
                "note",
                "MON-BOTH",
                f"argument(s) {', '.join(map(str, sorted(both)))} of {name} are declared both "
                "monotone and anti-monotone; occurrences must carry both signs",
                span,
                condition="MON",
            )
        try:
            validate_symbol_type(self.sig, name, self.result.fuel)
        except KernelError as exc:
            self.error_from(exc, span)
            return False
        return True

    def do_symbol(self, decl: SymbolSrc) -> None:
        self.declare_symbol(decl.name, decl.type, decl.span, decl.mon_plus, decl.mon_minus)

    def do_inductive(self, decl: InductiveSrc) -> None:
        if decl.type is not None:
            if not self.declare_symbol(decl.name, decl.type, decl.span, decl.mon_plus, decl.mon_minus):
                return
        elif decl.name not in self.sig:
            self.emit(
                "error",
                "BAD-INDUCTIVE",
                f"inductive {decl.name} attaches constructors to an undeclared symbol",
                decl.span,
            )
            return
        if decl.name in self.result.inductives:
            self.emit(
                "error", "BAD-INDUCTIVE", f"{decl.name} already has an inductive declaration", decl.span
            )
            return
        if not self.sig.is_predicate(decl.name):
            self.emit(
                "error",
                "BAD-INDUCTIVE",
                f"inductive symbol {decl.name} must be a predicate (its type must be a kind)",
                decl.span,
            )
            return
        ctors: list[str] = []
        for cname, cty in decl.constructors:
            if not self.declare_symbol(cname, cty, decl.span):
                continue
            if self.sig.output_head(cname) != decl.name:
                self.emit(
                    "error",
                    "BAD-CONSTRUCTOR",
                    f"constructor {cname} must produce {decl.name}, "
                    f"but its output head is {self.sig.output_head(cname) or 'not a symbol'}",
                    decl.span,
                )
                continue
            ctors.append(cname)
        record = InductiveRecord(InductiveDecl(decl.name, tuple(ctors)), decl.span)
        self.result.inductives[decl.name] = record
        record.parameters = infer_parameters(self.sig, record.decl)
        record.accessibility = compute_accessibility(self.sig, record.decl)
        record.positivity = check_positivity(self.sig, record.decl)
        if record.positivity.level == "negative":
            self.emit(
                "error",
                "NEGATIVE-POSITIVITY",
                f"{decl.name} is not positive: {record.positivity.describe()}",
                decl.span,
                position=format_position(record.positivity.position or ()),
                condition="POS",
            )

    def do_rule(self, decl: RuleSrc) -> None:
        bound = frozenset(x for x, _ in decl.env) if decl.env is not None else frozenset()
        lhs = resolve(decl.lhs, self.sig.symbols, bound)
        rhs = resolve(decl.rhs, self.sig.symbols, bound)
        rho = {x: resolve(t, self.sig.symbols, bound) for x, t in decl.rho}
        env: Environment | None = None
        if decl.env is not None:
            env = EMPTY_ENV
            try:
                for x, t in decl.env:
                    env = env.extend(x, resolve(t, self.sig.symbols, bound))
            except KernelError as exc:
                self.error_from(exc, decl.span)
                return
        inferred: Environment | None = None
        inference_error: KernelError | None = None
        try:
            inferred = infer_rule_env(self.sig, lhs, rho)
        except KernelError as exc:
            inference_error = exc
        if env is None:
            if inferred is None:
                assert inference_error is not None
                self.error_from(inference_error, decl.span)
                return
            env = inferred
        elif inferred is not None and not _same_env(env, inferred):
            self.emit(
                "note",
                "ENV-MISMATCH",
                f"declared rule environment [{env}] differs from the inferred one [{inferred}]",
                decl.span,
            )
        try:
            rule = add_rule(self.sig, lhs, rhs, env, rho)
        except RuleRejected as exc:
            self.error_from(exc, decl.span)
            return
        except KernelError as exc:
            self.error_from(exc, decl.span)
            return
        self.result.rules.append(RuleRecord(rule, decl.span))
        report = check_rule_subject_reduction(self.sig, rule, self.result.fuel)
        if not report.ok:
            self.emit(
                "error",
                "SUBJECT-REDUCTION",
                f"rule {rule}: {report.describe()}",
                decl.span,
                condition="SR",
            )
        if self.sig.is_predicate(rule.head):
            verdict = check_defined_predicate_rule(self.sig, rule)
            if not verdict.ok:
                self.emit(
                    "error",
                    "MON-VIOLATION",
                    f"rule {rule}: {verdict.describe()}",
                    decl.span,
                    condition="MON",
                )

    def do_recursor(self, decl: RecursorSrc) -> None:
        for name in (decl.name, decl.target):
            if name not in self.sig:
                self.emit("error", "UNKNOWN-SYMBOL", f"undeclared symbol {name!r}", decl.span)
                return
        if decl.target not in self.result.inductives:
            self.emit(
                "error",
                "RECURSOR-TARGET",
                f"recursor target {decl.target} has no inductive declaration",
                decl.span,
            )
            return
        rdecl = RecursorDecl(name=decl.name, target=decl.target, origin="user")
        self.result.recursors.append(RecursorRecord(rdecl, decl.span))

    # -- final pass --------------------------------------------------------

    def final_pass(self, source: SourceFile) -> None:
        CLAUSE_CODES = {
            "shape": ("PRE-RECURSOR", "PRE-REC"),
            "escape": ("PRE-RECURSOR", "PRE-REC"),
            "guard": ("PRE-RECURSOR", "PRE-REC"),
            "positivity": ("RECURSOR-POSITIVITY", "POS"),
            "precedence": ("RECURSOR-PRECEDENCE", None),
            "monotonicity": ("RECURSOR-MON", "MON"),
        }
        for record in self.result.recursors:
            validation = validate_extended_recursor(self.sig, record.decl, self.result.fuel)
            for key, message in validation.issues():
                code, condition = CLAUSE_CODES[key]
                self.emit("error", code, message, record.span, condition=condition)
            if validation.passed:
                if record.decl.kind == "strong":
                    self.emit(
                        "note",
                        "ASSUMED",
                        f"{record.decl.name} is a strong recursor; the additional strong-recursor "
                        "conditions are recorded as assumptions",
                        record.span,
                    )
                self.emit(
                    "note",
                    "ASSUMED",
                    f"head-computability of user recursor {record.decl.name} is assumed",
                    record.span,
                )

        for name, record in self.result.inductives.items():
            if self.sig.is_defined(name):
                self.emit(
                    "error",
                    "BAD-INDUCTIVE",
                    f"inductive symbol {name} must stay constant but has rewrite rules",
                    record.span,
                )
            recursors = self.result.recursors_for(name)
            elimination = bool(recursors)
            if elimination:
                self.emit(
                    "note",
                    "ELIMINATION-MODE",
                    f"inductive {name}: elimination-based mode (obligations waived: I6, SAFE)",
                    record.span,
                )
            verdict = check_I6(self.sig, record.decl, record.accessibility)
            if not verdict.ok:
                if elimination:
                    self.emit(
                        "note",
                        "I6-VIOLATION",
                        f"{verdict.describe()} (waived in elimination-based mode)",
                        record.span,
                        condition="I6",
                    )
                else:
                    self.emit(
                        "error", "I6-VIOLATION", verdict.describe(), record.span, condition="I6"
                    )
            report = admissibility_report(self.sig, record.decl, recursors)
            self.result.reports[name] = report
            if report.completeness == "ASSUMED":
                self.emit(
                    "warning",
                    "ASSUMED",
                    f"recursor set of {name} is not the canonical one; completeness "
                    "w.r.t. accessibility is assumed",
                    record.span,
                )

        for rule_record in self.result.rules:
            verdict = check_safe_rule(self.sig, rule_record.rule)
            if verdict.safe:
                continue
            related = _matched_inductives(self.sig, rule_record.rule, self.result.inductives)
            waived = bool(related) and all(self.result.recursors_for(c) for c in related)
            severity = "note" if waived else "error"
            suffix = " (waived in elimination-based mode)" if waived else ""
            self.emit(
                severity,
                "SAFETY",
                f"rule {rule_record.rule} is unsafe: {verdict.describe()}{suffix}",
                rule_record.span,
                condition="SAFE",
            )


def _same_env(a: Environment, b: Environment) -> bool:
    if set(a.names()) != set(b.names()):
        return False
    return all(alpha_equal(ty, b.lookup(x)) for x, ty in a)


def _matched_inductives(
    sig: Signature, rule: RewriteRule, inductives: dict[str, InductiveRecord]
) -> set[str]:
    """Inductive types whose constructors are pattern-matched by the rule."""
    related: set[str] = set()

    def scan(pat: Term) -> None:
        head, args = spine(pat)
        if isinstance(head, Sym):
            out = sig.output_head(head.name)
            if out in inductives:
                related.add(out)
        for a in args:
            scan(a)

    for arg in rule.lhs_args:
        scan(arg)
    return related


def check_source(
    text: str,
    path: str = "<input>",
    fuel: Fuel | None = None,
    fail_fast: bool = False,
) -> CheckResult:
    """Parse and fully check a declaration file."""
    checker = _Checker(path, fuel, fail_fast)
    try:
        source = parse_source(text)
    except ParseError as exc:
        checker.emit(
            "error", exc.code, exc.message, SrcSpan(exc.line, exc.col, 1)
        )
        return checker.result
    return checker.run(source)


def check_file(path: str, fuel: Fuel | None = None, fail_fast: bool = False) -> CheckResult:
    with open(path, encoding="utf-8") as handle:
        text = handle.read()
    return check_source(text, path, fuel, fail_fast)
