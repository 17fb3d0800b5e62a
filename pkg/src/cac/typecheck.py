"""CC typing extended with symbol typing and beta+rewrite conversion,
plus the per-rule subject-reduction check.

The presentation is algorithmic: types are inferred for variables,
symbols, applications, products and sorts; abstractions can also be
checked against an expected product.  Conversion compares normal forms,
and the converted-to type is required to be well-sorted before the
conversion rule is used.
"""

from __future__ import annotations

from dataclasses import dataclass

from .reduction import DEFAULT_FUEL, Fuel, convertible, normalize, whnf
from .signature import RewriteRule, Signature
from .terms import (
    BOX,
    Abs,
    App,
    Environment,
    EMPTY_ENV,
    KernelError,
    Prod,
    STAR,
    Sort,
    Sym,
    Term,
    Var,
    alpha_equal,
    fresh_name,
    show,
    spine,
    strip_prods,
    substitute,
)


class TypeError_(KernelError):
    code = "TYPE-ERROR"


class UnboundVariable(TypeError_):
    code = "UNBOUND-VARIABLE"


class NotAProduct(TypeError_):
    code = "NOT-A-PRODUCT"


class SortMismatch(TypeError_):
    code = "SORT-MISMATCH"


class ConversionFailure(TypeError_):
    code = "CONVERSION-FAILURE"


class IllTypedSymbolType(TypeError_):
    code = "ILL-TYPED-SYMBOL"


def infer_type(sig: Signature, env: Environment, t: Term, fuel: Fuel = DEFAULT_FUEL) -> Term:
    match t:
        case Sort() if t == STAR:
            return BOX
        case Sort():
            raise SortMismatch("the sort [] has no type")
        case Var(name):
            ty = env.lookup(name)
            if ty is None:
                raise UnboundVariable(f"unbound variable {name!r}")
            return ty
        case Sym(name):
            return sig.decl(name).type
        case App(fn, arg):
            fn_ty = whnf(sig, infer_type(sig, env, fn, fuel), fuel)
            if not isinstance(fn_ty, Prod):
                raise NotAProduct(
                    f"cannot apply {show(fn)} : {show(fn_ty)} (not a product) to {show(arg)}"
                )
            check_type(sig, env, arg, fn_ty.domain, fuel)
            return substitute(fn_ty.codomain, {fn_ty.binder: arg})
        case Prod(_, domain, _):
            sort_of(sig, env, domain, fuel)
            binder, body, inner = _enter_binder(env, t)
            return sort_of(sig, inner, body, fuel)
        case Abs(_, annot, _):
            sort_of(sig, env, annot, fuel)
            binder, body, inner = _enter_binder(env, t)
            body_ty = infer_type(sig, inner, body, fuel)
            sort_of(sig, inner, body_ty, fuel)  # product formation premise
            return Prod(binder, annot, body_ty)
    raise TypeError(f"not a term: {t!r}")


def _enter_binder(env: Environment, t: Abs | Prod) -> tuple[str, Term, Environment]:
    """Extend ``env`` with the binder, renaming it if the name is taken."""
    binder = t.binder
    annot = t.annot if isinstance(t, Abs) else t.domain
    body = t.body if isinstance(t, Abs) else t.codomain
    if binder in env:
        renamed = fresh_name(binder, set(env.names()))
        body = substitute(body, {binder: Var(renamed)})
        binder = renamed
    return binder, body, env.extend(binder, annot)


def sort_of(sig: Signature, env: Environment, t: Term, fuel: Fuel = DEFAULT_FUEL) -> Sort:
    """The type of ``t`` must reduce to a sort; return it."""
    ty = normalize(sig, infer_type(sig, env, t, fuel), fuel)
    if isinstance(ty, Sort):
        return ty
    raise SortMismatch(f"{show(t)} has type {show(ty)}, which is not a sort")


def check_type(sig: Signature, env: Environment, t: Term, expected: Term, fuel: Fuel = DEFAULT_FUEL) -> None:
    """Check ``t`` against ``expected``, using conversion where needed."""
    if isinstance(t, Abs):
        expected_w = whnf(sig, expected, fuel)
        if isinstance(expected_w, Prod):
            sort_of(sig, env, expected, fuel)
            if not convertible(sig, t.annot, expected_w.domain, fuel):
                raise ConversionFailure(
                    f"abstraction domain {show(t.annot)} does not convert to {show(expected_w.domain)}"
                )
            binder, body, inner = _enter_binder(env, t)
            codomain = substitute(expected_w.codomain, {expected_w.binder: Var(binder)})
            check_type(sig, inner, body, codomain, fuel)
            return
    actual = infer_type(sig, env, t, fuel)
    if alpha_equal(actual, expected):
        return
    if expected != BOX:
        sort_of(sig, env, expected, fuel)  # (conv) requires the target to be sorted
    if not convertible(sig, actual, expected, fuel):
        raise ConversionFailure(
            f"{show(t)} has type {show(actual)}, which does not convert to {show(expected)}"
        )


def check_environment(sig: Signature, env: Environment, fuel: Fuel = DEFAULT_FUEL) -> None:
    """Each binding's type must be well-sorted under the preceding prefix."""
    prefix = EMPTY_ENV
    for name, ty in env:
        sort_of(sig, prefix, ty, fuel)
        prefix = prefix.extend(name, ty)


def validate_symbol_type(sig: Signature, name: str, fuel: Fuel = DEFAULT_FUEL) -> Sort:
    """The symbol typing premise: the declared type must have the declared sort."""
    decl = sig.decl(name)
    try:
        sort = sort_of(sig, EMPTY_ENV, decl.type, fuel)
    except TypeError_ as exc:
        raise IllTypedSymbolType(f"type of {name!r} is ill-formed: {exc.message}") from exc
    if sort != decl.sort:
        raise IllTypedSymbolType(
            f"type of {name!r} has sort {sort}, expected {decl.sort}"
        )
    return sort


# ---------------------------------------------------------------------------
# rules


@dataclass(frozen=True)
class SubjectReductionReport:
    ok: bool
    side: str | None = None  # "env", "lhs" or "rhs"
    error: KernelError | None = None
    expected_type: Term | None = None

    def describe(self) -> str:
        if self.ok:
            return "ok"
        return f"{self.side}: {self.error.message if self.error else 'failed'}"


def check_rule_subject_reduction(sig: Signature, rule: RewriteRule, fuel: Fuel = DEFAULT_FUEL) -> SubjectReductionReport:
    """Both rule sides must have the head's instantiated output type.

    With the head's type split as a telescope over its arity, the expected
    type is the codomain under the pattern instantiation followed by the
    rule's repair substitution; the (repaired) left-hand side and the
    right-hand side are both checked against it in the rule's environment.
    """
    try:
        check_environment(sig, rule.env, fuel)
    except KernelError as exc:
        return SubjectReductionReport(False, "env", exc)
    decl = sig.decl(rule.head)
    tele, codomain = strip_prods(decl.type, decl.arity)
    gamma = {x: pat for (x, _), pat in zip(tele, rule.lhs_args)}
    rho = rule.rho_map()
    expected = substitute(substitute(codomain, gamma), rho)
    lhs_repaired = substitute(rule.lhs, rho)
    try:
        check_type(sig, rule.env, lhs_repaired, expected, fuel)
    except KernelError as exc:
        return SubjectReductionReport(False, "lhs", exc, expected)
    try:
        check_type(sig, rule.env, rule.rhs, expected, fuel)
    except KernelError as exc:
        return SubjectReductionReport(False, "rhs", exc, expected)
    return SubjectReductionReport(True, expected_type=expected)


def infer_rule_env(sig: Signature, lhs: Term, rho: dict[str, Term] | None = None) -> Environment:
    """Collect pattern-variable types by walking the left-hand side.

    Each variable gets the (instantiated) argument type of its first
    occurrence; the repair substitution is applied to every collected type,
    and variables it eliminates are dropped, mirroring how rule
    environments are presented alongside their repair substitutions.
    """
    rho = rho or {}
    head, args = spine(lhs)
    if not isinstance(head, Sym):
        raise TypeError_(f"rule left-hand side {show(lhs)} is not headed by a symbol")
    bindings: dict[str, Term] = {}
    order: list[str] = []

    def expect(sym_name: str, actuals: tuple[Term, ...]) -> None:
        decl = sig.decl(sym_name)
        tele, _ = strip_prods(decl.type, decl.arity)
        gamma: dict[str, Term] = {}
        for (x, ty), pat in zip(tele, actuals):
            visit(pat, substitute(ty, gamma))
            gamma[x] = pat

    def visit(pat: Term, expected: Term) -> None:
        if isinstance(pat, Var):
            if pat.name not in bindings:
                bindings[pat.name] = expected
                order.append(pat.name)
            return
        h, sub_args = spine(pat)
        if isinstance(h, Sym):
            expect(h.name, sub_args)

    expect(head.name, args)
    env = EMPTY_ENV
    for name in order:
        if name in rho:
            continue
        env = env.extend(name, substitute(bindings[name], rho))
    return env
