"""Inductive declarations and the analyses attached to them: the signed
position calculus, parameter inference, positivity, accessibility, the
verbatim-predicate-argument condition, primitive classification, and the
monotonicity conditions on rules defining predicate symbols.

Positions are signed by the usual rule of signs: product domains flip the
sign, abstraction bodies and product codomains keep it, and arguments of
an applied symbol are reachable only through its declared monotone or
anti-monotone argument positions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .signature import RewriteRule, Signature, UnknownSymbol
from .terms import (
    Abs,
    App,
    Position,
    Prod,
    STAR,
    Sort,
    Sym,
    Term,
    Var,
    alpha_equal,
    format_position,
    free_vars,
    is_kind,
    spine,
    strip_prods,
    substitute,
    sym_positions,
    symbols_of,
    var_positions,
)


@dataclass(frozen=True)
class InductiveDecl:
    """A constant predicate symbol together with its declared constructors."""

    name: str
    constructors: tuple[str, ...]


@dataclass(frozen=True)
class PosSets:
    """Signed occurrence positions; the two sets need not be disjoint."""

    positive: frozenset[Position]
    negative: frozenset[Position]

    def of_sign(self, delta: str) -> frozenset[Position]:
        return self.positive if delta == "+" else self.negative


def _shift(prefix: Position, positions: Iterable[Position]) -> set[Position]:
    return {prefix + p for p in positions}


def pos_sets(sig: Signature, t: Term) -> PosSets:
    """Positive and negative positions of ``t`` under the Mon annotations."""
    match t:
        case Sort() | Var():
            return PosSets(frozenset(((),)), frozenset())
        case Prod(_, domain, codomain):
            d = pos_sets(sig, domain)
            c = pos_sets(sig, codomain)
            return PosSets(
                frozenset(_shift((1,), d.negative) | _shift((2,), c.positive)),
                frozenset(_shift((1,), d.positive) | _shift((2,), c.negative)),
            )
        case Abs(_, _, body):
            b = pos_sets(sig, body)
            return PosSets(
                frozenset(_shift((2,), b.positive)),
                frozenset(_shift((2,), b.negative)),
            )
    head, args = spine(t)
    if isinstance(head, Sym):
        if head.name not in sig:
            raise UnknownSymbol(f"undeclared symbol {head.name!r}")
        decl = sig.decl(head.name)
        n = len(args)
        plus: set[Position] = {(1,) * n}
        minus: set[Position] = set()
        for eps, indices in (("+", decl.mon_plus), ("-", decl.mon_minus)):
            for i in indices:
                if i > n:
                    continue
                arg_sets = pos_sets(sig, args[i - 1])
                prefix = (1,) * (n - i) + (2,)
                if eps == "+":
                    plus |= _shift(prefix, arg_sets.positive)
                    minus |= _shift(prefix, arg_sets.negative)
                else:
                    plus |= _shift(prefix, arg_sets.negative)
                    minus |= _shift(prefix, arg_sets.positive)
        return PosSets(frozenset(plus), frozenset(minus))
    # application whose head is not a symbol: only the function child is signed
    assert isinstance(t, App)
    f = pos_sets(sig, t.fn)
    return PosSets(frozenset(_shift((1,), f.positive)), frozenset(_shift((1,), f.negative)))


# ---------------------------------------------------------------------------
# occurrence sets relative to a type's precedence class


def equivalence_class(sig: Signature, type_name: str, constant_only: bool = False) -> tuple[str, ...]:
    """Predicate symbols sharing ``type_name``'s rank."""
    return tuple(
        n
        for n in sig.class_of(type_name)
        if sig.is_predicate(n) and (sig.is_constant(n) or not constant_only)
    )


def class_occurrences(sig: Signature, type_name: str, t: Term, constant_only: bool = False) -> frozenset[Position]:
    return sym_positions(equivalence_class(sig, type_name, constant_only), t)


# ---------------------------------------------------------------------------
# parameters


def infer_parameters(sig: Signature, decl: InductiveDecl) -> int:
    """Length of the longest shared parameter prefix.

    A prefix of the type's telescope is parametric when every constructor
    starts with a matching telescope, passes those binders through
    verbatim as the type's first output arguments, and does the same in
    every recursive (type-headed) argument occurrence.
    """
    c_tele, _ = strip_prods(sig.decl(decl.name).type)
    limit = len(c_tele)
    for ctor in decl.constructors:
        limit = min(limit, _parameter_prefix(sig, decl.name, c_tele, ctor, limit))
    return limit


def _parameter_prefix(
    sig: Signature,
    type_name: str,
    type_tele: list[tuple[str, Term]],
    ctor: str,
    limit: int,
) -> int:
    ctor_decl = sig.decl(ctor)
    tele, out = strip_prods(ctor_decl.type, ctor_decl.arity)
    _, out_args = spine(out)
    best = 0
    for k in range(1, min(limit, len(tele), len(out_args), ctor_decl.arity) + 1):
        if _prefix_ok(sig, type_name, type_tele, tele, out_args, k):
            best = k
        else:
            break
    return best


def _prefix_ok(
    sig: Signature,
    type_name: str,
    type_tele: list[tuple[str, Term]],
    tele: list[tuple[str, Term]],
    out_args: tuple[Term, ...],
    k: int,
) -> bool:
    # constructor telescope prefix must alpha-match the type's
    renaming: dict[str, Term] = {}
    for (cx, cty), (tx, tty) in zip(tele[:k], type_tele[:k]):
        if not alpha_equal(substitute(cty, renaming), tty):
            return False
        renaming[cx] = Var(tx)
    # the prefix variables are passed through verbatim to the output
    names = [x for x, _ in tele[:k]]
    if list(out_args[:k]) != [Var(x) for x in names]:
        return False
    # and to every recursive occurrence inside the argument types
    return all(_passes_params(ty, type_name, names) for _, ty in tele[k:])


def _passes_params(t: Term, type_name: str, names: list[str]) -> bool:
    """Every application spine headed by ``type_name`` starts with ``names``."""
    head, args = spine(t)
    if isinstance(head, Sym) and head.name == type_name:
        if list(args[: len(names)]) != [Var(x) for x in names]:
            return False
    ok = all(_passes_params(a, type_name, names) for a in args)
    match head:
        case Abs(_, annot, body) | Prod(_, annot, body):
            return ok and _passes_params(annot, type_name, names) and _passes_params(body, type_name, names)
    return ok


# ---------------------------------------------------------------------------
# positivity and accessibility


@dataclass(frozen=True)
class PositivityVerdict:
    level: str  # "strictly_positive" | "positive" | "negative"
    constructor: str | None = None
    argument: int | None = None
    position: Position | None = None

    def describe(self) -> str:
        if self.level != "negative":
            return self.level.replace("_", " ")
        return (
            f"negative occurrence in constructor {self.constructor}, "
            f"argument {self.argument}, position {format_position(self.position or ())}"
        )


def check_positivity(sig: Signature, decl: InductiveDecl) -> PositivityVerdict:
    """Classify the declaration as strictly positive, positive, or negative.

    Negative means some occurrence of a type in the declaration's class
    sits at a negative position of a constructor argument type.  Strict
    positivity follows the telescope shape: each argument type either
    avoids the class entirely (constant members only) or is a product
    chain ending in the type itself applied to class-free argument types.
    """
    neg = _find_negative_occurrence(sig, decl)
    if neg is not None:
        ctor, arg_idx, pos = neg
        return PositivityVerdict("negative", ctor, arg_idx, pos)
    if _is_strictly_positive(sig, decl):
        return PositivityVerdict("strictly_positive")
    return PositivityVerdict("positive")


def _find_negative_occurrence(sig: Signature, decl: InductiveDecl) -> tuple[str, int, Position] | None:
    for ctor in decl.constructors:
        cdecl = sig.decl(ctor)
        tele, _ = strip_prods(cdecl.type, cdecl.arity)
        for j, (_, ty) in enumerate(tele, start=1):
            sets = pos_sets(sig, ty)
            for pos in sorted(class_occurrences(sig, decl.name, ty)):
                if pos in sets.negative:
                    return ctor, j, pos
    return None


def _is_strictly_positive(sig: Signature, decl: InductiveDecl) -> bool:
    for ctor in decl.constructors:
        cdecl = sig.decl(ctor)
        tele, _ = strip_prods(cdecl.type, cdecl.arity)
        for _, ty in tele:
            if not class_occurrences(sig, decl.name, ty, constant_only=True):
                continue
            inner, body = strip_prods(ty)
            head, args = spine(body)
            if not (isinstance(head, Sym) and head.name == decl.name):
                return False
            for _, w in inner:
                if class_occurrences(sig, decl.name, w, constant_only=True):
                    return False
            for a in args:
                if class_occurrences(sig, decl.name, a, constant_only=True):
                    return False
    return True


def accessible_args(sig: Signature, ctor: str) -> frozenset[int]:
    """Argument positions whose types mention the output class only positively."""
    target = sig.output_head(ctor)
    if target is None:
        return frozenset()
    cdecl = sig.decl(ctor)
    tele, _ = strip_prods(cdecl.type, cdecl.arity)
    acc: set[int] = set()
    for j, (_, ty) in enumerate(tele, start=1):
        occurrences = class_occurrences(sig, target, ty)
        if occurrences <= pos_sets(sig, ty).positive:
            acc.add(j)
    return frozenset(acc)


def compute_accessibility(sig: Signature, decl: InductiveDecl) -> dict[str, frozenset[int]]:
    return {ctor: accessible_args(sig, ctor) for ctor in decl.constructors}


# ---------------------------------------------------------------------------
# the verbatim-predicate-argument condition on constructors


@dataclass(frozen=True)
class I6Verdict:
    ok: bool
    violations: tuple[tuple[str, str], ...] = ()  # (constructor, predicate variable)

    def describe(self) -> str:
        if self.ok:
            return "satisfied"
        return "; ".join(
            f"constructor {c}: predicate variable {x} is not passed verbatim to the output type"
            for c, x in self.violations
        )


def check_I6(sig: Signature, decl: InductiveDecl, acc: dict[str, frozenset[int]] | None = None) -> I6Verdict:
    """Predicate variables used in accessible argument types must reappear
    verbatim among the constructor's output-type arguments."""
    acc = acc if acc is not None else compute_accessibility(sig, decl)
    violations: list[tuple[str, str]] = []
    for ctor in decl.constructors:
        cdecl = sig.decl(ctor)
        tele, out = strip_prods(cdecl.type, cdecl.arity)
        _, out_args = spine(out)
        names = [x for x, _ in tele]
        for i, (x, ty) in enumerate(tele, start=1):
            if not is_kind(ty):
                continue
            used = any(
                x in free_vars(tele[j - 1][1])
                for j in acc.get(ctor, frozenset())
                if j != i
            )
            if used and not any(arg == Var(x) for arg in out_args):
                violations.append((ctor, x))
    return I6Verdict(ok=not violations, violations=tuple(violations))


# ---------------------------------------------------------------------------
# primitive classification


@dataclass(frozen=True)
class PrimitiveVerdict:
    primitive: bool
    reason: str | None = None


def classify_primitive(sig: Signature, type_name: str) -> PrimitiveVerdict:
    """First-order types whose constructors only take accessible arguments
    of primitive types below them.

    Mutual classes are resolved by a shrinking fixpoint: start from every
    class whose members are all constant symbols of type ``*`` and remove
    classes with a violating constructor until stable.
    """
    sig.decl(type_name)
    members: dict[int, list[str]] = {}
    for name, d in sig.symbols.items():
        members.setdefault(d.rank, []).append(name)

    def base_ok(rank: int) -> bool:
        return all(sig.is_constant(n) and sig.decl(n).type == STAR for n in members[rank])

    primitive = {rank for rank in members if base_ok(rank)}
    reasons: dict[int, str] = {
        rank: "some class member is defined or is not a bare type of sort *"
        for rank in members
        if rank not in primitive
    }

    changed = True
    while changed:
        changed = False
        for rank in sorted(primitive):
            reason = _primitive_violation(sig, members[rank], rank, primitive)
            if reason is not None:
                primitive.discard(rank)
                reasons[rank] = reason
                changed = True
                break

    rank = sig.rank(type_name)
    if rank in primitive:
        return PrimitiveVerdict(True)
    return PrimitiveVerdict(False, reasons.get(rank, "not primitive"))


def _primitive_violation(sig: Signature, names: list[str], rank: int, primitive: set[int]) -> str | None:
    for type_name in names:
        for ctor in sig.constructors_of(type_name):
            cdecl = sig.decl(ctor)
            if accessible_args(sig, ctor) != frozenset(range(1, cdecl.arity + 1)):
                return f"constructor {ctor} has inaccessible arguments"
            tele, _ = strip_prods(cdecl.type, cdecl.arity)
            for j, (_, ty) in enumerate(tele, start=1):
                if not isinstance(ty, Sym):
                    return f"argument {j} of {ctor} is not a first-order type"
                if sig.rank(ty.name) > rank or sig.rank(ty.name) not in primitive:
                    return f"argument {j} of {ctor} is not a primitive type below {type_name}"
    return None


# ---------------------------------------------------------------------------
# rules defining predicate symbols


@dataclass(frozen=True)
class DefinedPredicateVerdict:
    ok: bool
    issues: tuple[str, ...] = ()

    def describe(self) -> str:
        return "ok" if self.ok else "; ".join(self.issues)


def check_defined_predicate_rule(sig: Signature, rule: RewriteRule) -> DefinedPredicateVerdict:
    """Monotonicity conditions on a rule whose head is a defined predicate.

    No symbol above the head may occur in the right-hand side, and each
    declared (anti-)monotone argument must be matched by a variable whose
    right-hand-side occurrences all carry the declared sign.
    """
    decl = sig.decl(rule.head)
    issues: list[str] = []
    for s in sorted(symbols_of(rule.rhs)):
        if sig.rank(s) > decl.rank:
            issues.append(f"symbol {s} above the head {rule.head} occurs in the right-hand side")
    rhs_sets = pos_sets(sig, rule.rhs)
    for delta, indices in (("+", decl.mon_plus), ("-", decl.mon_minus)):
        for i in sorted(indices):
            if i > len(rule.lhs_args):
                continue
            pat = rule.lhs_args[i - 1]
            if not isinstance(pat, Var):
                issues.append(f"monotone argument {i} is matched by a non-variable pattern")
                continue
            occurrences = var_positions(pat.name, rule.rhs)
            stray = occurrences - rhs_sets.of_sign(delta)
            if stray:
                where = ", ".join(format_position(p) for p in sorted(stray))
                issues.append(
                    f"argument {i} ({pat.name}) declared mon{delta} occurs at "
                    f"non-{'positive' if delta == '+' else 'negative'} position(s) {where} "
                    f"of the right-hand side"
                )
    return DefinedPredicateVerdict(ok=not issues, issues=tuple(issues))
