"""Symbol declarations, precedence, rewrite-rule admission, rule safety
and the neutrality classification.

A symbol carries a sort (``*`` for objects, ``[]`` for predicates), an
arity, and a closed type whose product prefix covers that arity.  The
precedence is a total quasi-order given by natural ranks: declaration
order by default, with explicitly equivalenced symbols sharing a rank.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .terms import (
    BOX,
    Abs,
    Environment,
    EMPTY_ENV,
    KernelError,
    STAR,
    Sort,
    Sym,
    Term,
    Var,
    alpha_equal,
    app,
    free_vars,
    is_kind,
    show,
    spine,
    strip_prods,
    symbols_of,
)


class SignatureError(KernelError):
    code = "SIGNATURE"


class UnknownSymbol(SignatureError):
    code = "UNKNOWN-SYMBOL"


class DuplicateSymbol(SignatureError):
    code = "DUPLICATE-SYMBOL"


class BadDeclaration(SignatureError):
    code = "BAD-DECLARATION"


class MonAnnotationError(SignatureError):
    code = "MON-ANNOTATION"


class RuleRejected(SignatureError):
    """Raised by add_rule; subclasses carry the failing admission clause."""


class NotAlgebraic(RuleRejected):
    code = "NOT-ALGEBRAIC"


class LhsIsVariable(RuleRejected):
    code = "LHS-IS-VARIABLE"


class EscapingVariable(RuleRejected):
    code = "ESCAPING-VARIABLE"


class PrecedenceViolation(RuleRejected):
    code = "PRECEDENCE-VIOLATION"


@dataclass
class SymbolDecl:
    name: str
    type: Term
    sort: Sort
    arity: int
    rank: int
    mon_plus: frozenset[int] = frozenset()
    mon_minus: frozenset[int] = frozenset()


@dataclass(frozen=True)
class RewriteRule:
    """An admitted rule ``head lhs_args -> rhs`` with its typing data.

    ``env`` types the rule's pattern variables; ``rho`` repairs typing-only
    non-linearities in the left-hand side (it is never applied when the
    rule fires).
    """

    head: str
    lhs_args: tuple[Term, ...]
    rhs: Term
    env: Environment = EMPTY_ENV
    rho: tuple[tuple[str, Term], ...] = ()
    index: int = -1

    @property
    def lhs(self) -> Term:
        return app(Sym(self.head), *self.lhs_args)

    def rho_map(self) -> dict[str, Term]:
        return dict(self.rho)

    def __str__(self) -> str:
        return f"{show(self.lhs)} --> {show(self.rhs)}"


class Signature:
    """The ambient set of symbols and admitted rules.

    Built incrementally while a file is loaded, then treated as frozen;
    nothing mutates an existing declaration except precedence grouping.
    """

    def __init__(self) -> None:
        self.symbols: dict[str, SymbolDecl] = {}
        self.rules: list[RewriteRule] = []
        self._rules_by_head: dict[str, list[RewriteRule]] = {}

    # -- declarations -------------------------------------------------

    def declare(
        self,
        name: str,
        type_: Term,
        arity: int | None = None,
        mon_plus: tuple[int, ...] = (),
        mon_minus: tuple[int, ...] = (),
    ) -> SymbolDecl:
        if name in self.symbols:
            raise DuplicateSymbol(f"symbol {name!r} is already declared")
        fv = free_vars(type_)
        if fv:
            raise BadDeclaration(
                f"type of {name!r} must be closed; unknown identifiers: {', '.join(sorted(fv))}"
            )
        unknown = [s for s in sorted(symbols_of(type_)) if s not in self.symbols]
        if unknown:
            raise UnknownSymbol(f"type of {name!r} uses undeclared symbols: {', '.join(unknown)}")
        prefix, _ = strip_prods(type_)
        if arity is None:
            arity = len(prefix)
        elif arity > len(prefix):
            raise BadDeclaration(
                f"arity {arity} of {name!r} exceeds its {len(prefix)} product binders"
            )
        sort = BOX if is_kind(type_) else STAR
        decl = SymbolDecl(
            name=name,
            type=type_,
            sort=sort,
            arity=arity,
            rank=len(self.symbols),
            mon_plus=frozenset(mon_plus),
            mon_minus=frozenset(mon_minus),
        )
        for delta, indices in (("+", decl.mon_plus), ("-", decl.mon_minus)):
            for i in indices:
                if not 1 <= i <= arity:
                    raise MonAnnotationError(f"mon{delta} index {i} of {name!r} is out of range")
                if not is_kind(prefix[i - 1][1]):
                    raise MonAnnotationError(
                        f"mon{delta} index {i} of {name!r} must point at a kind-typed argument"
                    )
        self.symbols[name] = decl
        return decl

    def decl(self, name: str) -> SymbolDecl:
        try:
            return self.symbols[name]
        except KeyError:
            raise UnknownSymbol(f"undeclared symbol {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self.symbols

    # -- precedence ---------------------------------------------------

    def rank(self, name: str) -> int:
        return self.decl(name).rank

    def set_equivalent(self, name: str, *others: str) -> None:
        """Put ``others`` in the same precedence class as ``name``."""
        base = self.rank(name)
        for other in others:
            self.decl(other).rank = base

    def class_of(self, name: str) -> tuple[str, ...]:
        r = self.rank(name)
        return tuple(n for n, d in self.symbols.items() if d.rank == r)

    # -- derived classification ----------------------------------------

    def is_defined(self, name: str) -> bool:
        self.decl(name)
        return name in self._rules_by_head

    def is_constant(self, name: str) -> bool:
        return not self.is_defined(name)

    def is_predicate(self, name: str) -> bool:
        return self.decl(name).sort == BOX

    def is_constant_predicate(self, name: str) -> bool:
        return self.is_predicate(name) and self.is_constant(name)

    def output_head(self, name: str) -> str | None:
        """Head symbol of the codomain past the arity prefix, if any."""
        decl = self.decl(name)
        _, out = strip_prods(decl.type, decl.arity)
        head, _ = spine(out)
        return head.name if isinstance(head, Sym) else None

    def is_constructor_symbol(self, name: str) -> bool:
        """Extended constructors: output type headed by a constant predicate."""
        out = self.output_head(name)
        return out is not None and self.is_constant_predicate(out)

    def constructors_of(self, type_name: str) -> tuple[str, ...]:
        """All extended constructors whose output head is ``type_name``."""
        return tuple(n for n in self.symbols if self.output_head(n) == type_name)

    def predicate_args(self, name: str) -> tuple[int, ...]:
        """1-based argument positions of ``name`` whose declared type is a kind."""
        decl = self.decl(name)
        prefix, _ = strip_prods(decl.type, decl.arity)
        return tuple(i for i, (_, ty) in enumerate(prefix, start=1) if is_kind(ty))

    # -- rules ----------------------------------------------------------

    def rules_for(self, name: str) -> tuple[RewriteRule, ...]:
        return tuple(self._rules_by_head.get(name, ()))

    def is_algebraic(self, t: Term) -> bool:
        """Only variables and fully applied symbol spines."""
        if isinstance(t, Var):
            return True
        head, args = spine(t)
        if isinstance(head, Var):
            return not args
        if not isinstance(head, Sym):
            return False
        if head.name not in self.symbols:
            raise UnknownSymbol(f"undeclared symbol {head.name!r} in pattern")
        if len(args) != self.decl(head.name).arity:
            return False
        return all(self.is_algebraic(a) for a in args)


def add_rule(
    sig: Signature,
    lhs: Term,
    rhs: Term,
    env: Environment = EMPTY_ENV,
    rho: dict[str, Term] | None = None,
) -> RewriteRule:
    """Admit ``lhs --> rhs``, or raise the first failing admission clause.

    Checks, in order: the left-hand side is not a variable, it is algebraic
    (a fully applied declared symbol over algebraic arguments), the
    right-hand side introduces no new variables, and every symbol in the
    right-hand side is at most the head in the precedence.
    """
    if isinstance(lhs, Var):
        raise LhsIsVariable(f"left-hand side {show(lhs)} is a bare variable")
    head, args = spine(lhs)
    if not isinstance(head, Sym):
        raise NotAlgebraic(f"left-hand side {show(lhs)} is not headed by a symbol")
    head_decl = sig.decl(head.name)
    if len(args) != head_decl.arity or not sig.is_algebraic(lhs):
        raise NotAlgebraic(
            f"left-hand side {show(lhs)} is not algebraic "
            f"(symbols must be fully applied; {head.name} has arity {head_decl.arity})"
        )
    escaping = free_vars(rhs) - free_vars(lhs)
    if escaping:
        raise EscapingVariable(
            f"right-hand side uses variables not bound by the pattern: {', '.join(sorted(escaping))}"
        )
    for s in sorted(symbols_of(rhs)):
        if sig.rank(s) > head_decl.rank:
            raise PrecedenceViolation(
                f"symbol {s!r} in the right-hand side is greater than the head {head.name!r} "
                f"in the precedence"
            )
    rule = RewriteRule(
        head=head.name,
        lhs_args=tuple(args),
        rhs=rhs,
        env=env,
        rho=tuple((rho or {}).items()),
        index=len(sig.rules),
    )
    sig.rules.append(rule)
    sig._rules_by_head.setdefault(head.name, []).append(rule)
    return rule


# ---------------------------------------------------------------------------
# rule safety


@dataclass(frozen=True)
class SafetyVerdict:
    """Result of the predicate-argument linearity check on a rule.

    ``non_variable`` lists predicate positions whose pattern is not a bare
    variable; ``duplicated`` lists pairs of predicate positions matched by
    equal patterns.
    """

    safe: bool
    non_variable: tuple[int, ...] = ()
    duplicated: tuple[tuple[int, int], ...] = ()

    def describe(self) -> str:
        if self.safe:
            return "safe"
        parts = []
        if self.non_variable:
            parts.append(
                "predicate argument(s) "
                + ", ".join(str(i) for i in self.non_variable)
                + " matched by non-variable patterns"
            )
        for i, j in self.duplicated:
            parts.append(f"predicate arguments {i} and {j} matched by the same pattern")
        return "; ".join(parts)


def check_safe_rule(sig: Signature, rule: RewriteRule) -> SafetyVerdict:
    """Predicate arguments must be matched by pairwise-distinct variables."""
    preds = [i for i in sig.predicate_args(rule.head) if i <= len(rule.lhs_args)]
    non_var = tuple(i for i in preds if not isinstance(rule.lhs_args[i - 1], Var))
    dups = tuple(
        (i, j)
        for k, i in enumerate(preds)
        for j in preds[k + 1 :]
        if alpha_equal(rule.lhs_args[i - 1], rule.lhs_args[j - 1])
    )
    return SafetyVerdict(safe=not non_var and not dups, non_variable=non_var, duplicated=dups)


# ---------------------------------------------------------------------------
# neutrality


@dataclass(frozen=True)
class NeutralityVerdict:
    neutral: bool
    reason: str | None = None


def classify_neutral(sig: Signature, t: Term) -> NeutralityVerdict:
    """Neutral terms: not an abstraction, not constructor-headed, and not a
    partially applied defined symbol."""
    if isinstance(t, Abs):
        return NeutralityVerdict(False, "abstraction")
    head, args = spine(t)
    if isinstance(head, Sym):
        decl = sig.decl(head.name)
        out = sig.output_head(head.name)
        if out is not None and sig.is_constant_predicate(out):
            return NeutralityVerdict(
                False, f"constructor-headed: output type of {head.name} is the constant predicate {out}"
            )
        if sig.is_defined(head.name) and len(args) < decl.arity:
            return NeutralityVerdict(
                False,
                f"partially applied defined symbol {head.name} ({len(args)} of {decl.arity} arguments)",
            )
    return NeutralityVerdict(True)
