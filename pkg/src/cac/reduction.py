"""Beta steps, first-order matching against rule patterns, combined
beta+rewrite reduction, and fuel-bounded normalization and conversion.

The deterministic strategy is leftmost-outermost; under the standing
confluence assumption the choice only affects which normal form is
reported first, and :func:`normalize_random` exists to test exactly that.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .signature import RewriteRule, Signature
from .terms import (
    Abs,
    App,
    KernelError,
    Position,
    Prod,
    Sym,
    Term,
    Var,
    alpha_equal,
    children,
    format_position,
    replace_at,
    show,
    spine,
    substitute,
    subterm_at,
)


@dataclass(frozen=True)
class Fuel:
    """Upper bound on reduction steps; exhaustion is an explicit error."""

    max_steps: int = 10_000

    def __post_init__(self) -> None:
        if self.max_steps <= 0:
            raise KernelError("fuel must be positive")


DEFAULT_FUEL = Fuel()


class FuelExhausted(KernelError):
    code = "FUEL-EXHAUSTED"


# ---------------------------------------------------------------------------
# matching


def first_order_match(pattern: Term, t: Term, binding: dict[str, Term] | None = None) -> dict[str, Term] | None:
    """Match an algebraic pattern against ``t``.

    Repeated pattern variables must match structurally equal subterms.
    Returns the binding substitution, or None.
    """
    if binding is None:
        binding = {}
    match pattern:
        case Var(x):
            if x in binding:
                return binding if binding[x] == t else None
            binding[x] = t
            return binding
        case Sym():
            return binding if t == pattern else None
        case App(pf, pa):
            if not isinstance(t, App):
                return None
            binding = first_order_match(pf, t.fn, binding)
            if binding is None:
                return None
            return first_order_match(pa, t.arg, binding)
    return None


def match_lhs(rule: RewriteRule, t: Term) -> dict[str, Term] | None:
    """Match the rule's full left-hand side against ``t``."""
    head, args = spine(t)
    if not (isinstance(head, Sym) and head.name == rule.head and len(args) == len(rule.lhs_args)):
        return None
    return _match_args(rule, args)


def _match_args(rule: RewriteRule, args: tuple[Term, ...]) -> dict[str, Term] | None:
    binding: dict[str, Term] | None = {}
    for pat, arg in zip(rule.lhs_args, args):
        binding = first_order_match(pat, arg, binding)
        if binding is None:
            return None
    return binding


# ---------------------------------------------------------------------------
# single steps


def beta_step(t: Term) -> Term | None:
    """Contract the leftmost-outermost beta redex, if any."""
    if isinstance(t, App) and isinstance(t.fn, Abs):
        return substitute(t.fn.body, {t.fn.binder: t.arg})
    for d, child in children(t):
        r = beta_step(child)
        if r is not None:
            return replace_at(t, (d,), r)
    return None


def _rule_step_here(sig: Signature, t: Term) -> Term | None:
    head, args = spine(t)
    if not isinstance(head, Sym) or head.name not in sig:
        return None
    if len(args) != sig.decl(head.name).arity:
        return None
    for rule in sig.rules_for(head.name):
        binding = _match_args(rule, args)
        if binding is not None:
            return substitute(rule.rhs, binding)
    return None


def rewrite_step(sig: Signature, t: Term) -> Term | None:
    """Apply the first admitted rule at the leftmost-outermost redex."""
    r = _rule_step_here(sig, t)
    if r is not None:
        return r
    for d, child in children(t):
        r = rewrite_step(sig, child)
        if r is not None:
            return replace_at(t, (d,), r)
    return None


def _step_here(sig: Signature, t: Term) -> Term | None:
    if isinstance(t, App) and isinstance(t.fn, Abs):
        return substitute(t.fn.body, {t.fn.binder: t.arg})
    return _rule_step_here(sig, t)


def reduce_step(sig: Signature, t: Term) -> Term | None:
    """One combined beta/rewrite step at the leftmost-outermost redex."""
    r = _step_here(sig, t)
    if r is not None:
        return r
    for d, child in children(t):
        r = reduce_step(sig, child)
        if r is not None:
            return replace_at(t, (d,), r)
    return None


# ---------------------------------------------------------------------------
# normalization and conversion


def normalize(sig: Signature, t: Term, fuel: Fuel = DEFAULT_FUEL) -> Term:
    """Reduce to beta+rewrite normal form, leftmost-outermost."""
    for _ in range(fuel.max_steps):
        r = reduce_step(sig, t)
        if r is None:
            return t
        t = r
    if reduce_step(sig, t) is None:
        return t
    raise FuelExhausted(f"no normal form within {fuel.max_steps} steps; stopped at {show(t)}")


def whnf(sig: Signature, t: Term, fuel: Fuel = DEFAULT_FUEL) -> Term:
    """Reduce head redexes only, until the head constructor is stable."""
    for _ in range(fuel.max_steps):
        r = _head_step(sig, t)
        if r is None:
            return t
        t = r
    raise FuelExhausted(f"no weak head normal form within {fuel.max_steps} steps")


def _head_step(sig: Signature, t: Term) -> Term | None:
    r = _step_here(sig, t)
    if r is not None:
        return r
    if isinstance(t, App):
        r = _head_step(sig, t.fn)
        if r is not None:
            return App(r, t.arg)
    return None


def convertible(sig: Signature, t: Term, u: Term, fuel: Fuel = DEFAULT_FUEL) -> bool:
    """Joinability check: normal forms are alpha-equal.

    Valid as a decision procedure under the confluence assumption the
    whole calculus rests on.
    """
    if alpha_equal(t, u):
        return True
    return alpha_equal(normalize(sig, t, fuel), normalize(sig, u, fuel))


# ---------------------------------------------------------------------------
# exhaustive redex enumeration (property tests, randomized strategy)


def step_options(sig: Signature, t: Term) -> list[tuple[Position, Term]]:
    """Every one-step reduct, as (redex position, reduct) pairs.

    Unlike the deterministic strategy this enumerates every admitted rule
    at every position, including redexes inside binder annotations.
    """
    out: list[tuple[Position, Term]] = []

    def local_results(sub: Term) -> list[Term]:
        results: list[Term] = []
        if isinstance(sub, App) and isinstance(sub.fn, Abs):
            results.append(substitute(sub.fn.body, {sub.fn.binder: sub.arg}))
        head, args = spine(sub)
        if isinstance(head, Sym) and head.name in sig and len(args) == sig.decl(head.name).arity:
            for rule in sig.rules_for(head.name):
                binding = _match_args(rule, args)
                if binding is not None:
                    results.append(substitute(rule.rhs, binding))
        return results

    def go(sub: Term, pos: Position) -> None:
        for r in local_results(sub):
            out.append((pos, replace_at(t, pos, r)))
        for d, child in children(sub):
            go(child, pos + (d,))

    go(t, ())
    return out


def redexes(sig: Signature, t: Term) -> list[Position]:
    seen: list[Position] = []
    for pos, _ in step_options(sig, t):
        if pos not in seen:
            seen.append(pos)
    return seen


def one_step_reducts(sig: Signature, t: Term) -> list[Term]:
    return [r for _, r in step_options(sig, t)]


def step_at(sig: Signature, t: Term, pos: Position) -> Term:
    sub = subterm_at(t, pos)
    r = _step_here(sig, sub)
    if r is None:
        raise KernelError(f"no redex at position {format_position(pos)}")
    return replace_at(t, pos, r)


def normalize_random(sig: Signature, t: Term, fuel: Fuel = DEFAULT_FUEL, rng: random.Random | None = None) -> Term:
    """Normalize picking a uniformly random redex (and rule) at each step."""
    rng = rng or random.Random()
    for _ in range(fuel.max_steps):
        options = step_options(sig, t)
        if not options:
            return t
        _, t = rng.choice(options)
    if not step_options(sig, t):
        return t
    raise FuelExhausted(f"no normal form within {fuel.max_steps} randomized steps")
