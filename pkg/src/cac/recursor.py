"""Canonical weak recursor generation and validation of declared recursors.

A recursor for a constant predicate ``C`` has (up to permutation of
independent bindings) the type ``(z..:V..)(z:C z..)W``; its rules fire only
on constructor-headed scrutinees, never leak the type's argument variables
into a right-hand side, and keep every type of ``C``'s precedence class
out of negative positions of ``W``.

The canonical recursor of a strictly positive declaration packages one
step argument per constructor, threading recursive calls through the
constructor's recursive argument positions, and is the one recursor set
for which completeness and head-computability hold by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .inductive import (
    InductiveDecl,
    check_positivity,
    class_occurrences,
    classify_primitive,
    equivalence_class,
    infer_parameters,
    pos_sets,
    PrimitiveVerdict,
)
from .reduction import DEFAULT_FUEL, Fuel
from .signature import RewriteRule, Signature, add_rule
from .terms import (
    BOX,
    Environment,
    EMPTY_ENV,
    KernelError,
    Prod,
    STAR,
    Sym,
    Term,
    Var,
    app,
    arrow,
    format_position,
    free_vars,
    fresh_name,
    lams,
    open_telescope,
    prods,
    show,
    spine,
    substitute,
    symbols_of,
    var_positions,
)
from .typecheck import check_rule_subject_reduction, sort_of, validate_symbol_type


class NotStrictlyPositive(KernelError):
    code = "NOT-STRICTLY-POSITIVE"


class GenerationError(KernelError):
    code = "GENERATION"


class RecursorTargetError(KernelError):
    code = "RECURSOR-TARGET"


@dataclass
class RecursorDecl:
    """A recursor symbol for a target type, canonical or user-declared."""

    name: str
    target: str
    origin: str  # "canonical" | "user"
    kind: str | None = None  # "weak" | "strong", known after validation
    constructors: tuple[str, ...] | None = None  # canonical only
    head_computability: str = "assumed"  # "proven_by_template" | "assumed"


@dataclass(frozen=True)
class ShapeInfo:
    """The recursor type brought to scrutinee-first form."""

    scrutinee_index: int  # 1-based position of z among the original binders
    arg_positions: tuple[int, ...]  # original positions of the type's arguments
    z_names: tuple[str, ...]
    W: Term
    kind: str


@dataclass(frozen=True)
class ClauseResult:
    ok: bool
    issues: tuple[str, ...] = ()


@dataclass(frozen=True)
class RecursorValidation:
    decl: RecursorDecl
    shape: ShapeInfo | None
    shape_error: str | None
    clauses: dict[str, ClauseResult] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.shape is not None and all(c.ok for c in self.clauses.values())

    def issues(self) -> list[tuple[str, str]]:
        out: list[tuple[str, str]] = []
        if self.shape_error:
            out.append(("shape", self.shape_error))
        for key, clause in self.clauses.items():
            out.extend((key, issue) for issue in clause.issues)
        return out


# ---------------------------------------------------------------------------
# shape analysis


def analyze_shape(sig: Signature, fname: str, target: str, fuel: Fuel = DEFAULT_FUEL) -> tuple[ShapeInfo | None, str | None]:
    fdecl = sig.decl(fname)
    target_decl = sig.decl(target)
    tele, body = open_telescope(fdecl.type)
    names = [x for x, _ in tele]

    out_head = sig.output_head(fname)
    if out_head is not None and out_head in equivalence_class(sig, target):
        return None, f"{fname} is itself a constructor of {target}"

    scrutinee = None
    for i, (x, ty) in enumerate(tele, start=1):
        head, args = spine(ty)
        if not (isinstance(head, Sym) and head.name == target):
            continue
        if len(args) != target_decl.arity:
            continue
        arg_names = [a.name for a in args if isinstance(a, Var)]
        if len(arg_names) != len(args) or len(set(arg_names)) != len(args):
            continue
        if all(n in names[: i - 1] for n in arg_names):
            scrutinee = (i, x, tuple(arg_names))
            break
    if scrutinee is None:
        return None, f"no argument of the form ({target} z..) with distinct bound variables"
    idx, z_name, z_names = scrutinee

    arg_positions = tuple(names.index(n) + 1 for n in z_names)
    front = list(z_names) + [z_name]
    rest = [(x, ty) for x, ty in tele if x not in front]

    # the permuted telescope must still be well-scoped
    available: set[str] = set()
    by_name = dict(tele)
    for x in front:
        if free_vars(by_name[x]) - available:
            missing = ", ".join(sorted(free_vars(by_name[x]) - available))
            return None, f"cannot permute {x} before the other bindings (its type needs {missing})"
        available.add(x)
    for x, ty in rest:
        if free_vars(ty) - available:
            missing = ", ".join(sorted(free_vars(ty) - available))
            return None, f"binding {x} is not well-scoped after permutation (needs {missing})"
        available.add(x)

    W = prods(rest, body)
    env = EMPTY_ENV
    for x, ty in tele:
        env = env.extend(x, ty)
    try:
        body_sort = sort_of(sig, env, body, fuel)
    except KernelError as exc:
        return None, f"cannot sort the recursor codomain: {exc.message}"
    kind = "weak" if body_sort == STAR else "strong"
    return ShapeInfo(idx, arg_positions, z_names, W, kind), None


# ---------------------------------------------------------------------------
# validation


def validate_extended_recursor(
    sig: Signature,
    rdecl: RecursorDecl,
    fuel: Fuel = DEFAULT_FUEL,
    strict_predicates: bool = False,
) -> RecursorValidation:
    """Check the pre-recursor and positivity clauses for ``rdecl``.

    ``strict_predicates`` switches the stronger regime that bans every
    defined predicate from the codomain; the default only bans predicates
    above the target in the precedence, which is what the generalized
    conditions require.
    """
    shape, err = analyze_shape(sig, rdecl.name, rdecl.target, fuel)
    if shape is None:
        return RecursorValidation(rdecl, None, err)
    rdecl.kind = shape.kind

    clauses: dict[str, ClauseResult] = {}
    rules = sig.rules_for(rdecl.name)
    target_rank = sig.rank(rdecl.target)
    cls = equivalence_class(sig, rdecl.target)

    # (b) rules never leak the type's argument variables
    escape_issues: list[str] = []
    for rule in rules:
        exempt: set[str] = set()
        for _, image in rule.rho:
            exempt |= free_vars(image)
        pattern_vars: set[str] = set()
        for pos in shape.arg_positions:
            if pos > len(rule.lhs_args):
                continue
            pat = rule.lhs_args[pos - 1]
            if isinstance(pat, Var):
                pattern_vars.add(pat.name)
            else:
                escape_issues.append(
                    f"rule {rule}: argument {pos} of the target type is matched by a non-variable pattern"
                )
        leaked = sorted((pattern_vars - exempt) & free_vars(rule.rhs))
        if leaked:
            escape_issues.append(
                f"rule {rule}: right-hand side uses the type argument variable(s) {', '.join(leaked)}"
            )
    clauses["escape"] = ClauseResult(not escape_issues, tuple(escape_issues))

    # (c) head reduction only on constructor-headed scrutinees, approximated
    # by requiring every rule to pattern the scrutinee with a constructor
    guard_issues: list[str] = []
    for rule in rules:
        if shape.scrutinee_index > len(rule.lhs_args):
            guard_issues.append(f"rule {rule}: does not reach the scrutinee position")
            continue
        pat = rule.lhs_args[shape.scrutinee_index - 1]
        head, _ = spine(pat)
        if not (isinstance(head, Sym) and sig.output_head(head.name) in cls):
            guard_issues.append(
                f"rule {rule}: scrutinee pattern {show(pat)} is not headed by a constructor of {rdecl.target}"
            )
    clauses["guard"] = ClauseResult(not guard_issues, tuple(guard_issues))

    # (d) the target's class occurs only positively in W
    pos_issues: list[str] = []
    w_sets = pos_sets(sig, shape.W)
    for pos in sorted(class_occurrences(sig, rdecl.target, shape.W)):
        if pos in w_sets.negative:
            pos_issues.append(
                f"a type equivalent to {rdecl.target} occurs negatively in the codomain "
                f"at position {format_position(pos)}"
            )
    clauses["positivity"] = ClauseResult(not pos_issues, tuple(pos_issues))

    # (e) no bigger predicate in W (strict mode: no defined predicate at all)
    prec_issues: list[str] = []
    for s in sorted(symbols_of(shape.W)):
        if not sig.is_predicate(s):
            continue
        if sig.rank(s) > target_rank:
            prec_issues.append(f"predicate {s} above {rdecl.target} occurs in the codomain")
        elif strict_predicates and sig.is_defined(s):
            prec_issues.append(f"defined predicate {s} occurs in the codomain (strict regime)")
    clauses["precedence"] = ClauseResult(not prec_issues, tuple(prec_issues))

    # (f) declared monotonicity of the target's arguments carries to W
    mon_issues: list[str] = []
    tdecl = sig.decl(rdecl.target)
    for delta, indices in (("+", tdecl.mon_plus), ("-", tdecl.mon_minus)):
        for i in sorted(indices):
            if i > len(shape.z_names):
                continue
            z_i = shape.z_names[i - 1]
            stray = var_positions(z_i, shape.W) - w_sets.of_sign(delta)
            if stray:
                where = ", ".join(format_position(p) for p in sorted(stray))
                mon_issues.append(
                    f"argument {i} ({z_i}) of {rdecl.target} is declared mon{delta} but occurs "
                    f"at non-{'positive' if delta == '+' else 'negative'} codomain position(s) {where}"
                )
    clauses["monotonicity"] = ClauseResult(not mon_issues, tuple(mon_issues))

    return RecursorValidation(rdecl, shape, None, clauses)


# ---------------------------------------------------------------------------
# canonical generation


@dataclass
class GeneratedRecursor:
    decl: RecursorDecl
    type: Term
    rules: tuple[RewriteRule, ...]
    parameters: int


def generate_canonical_recursor(
    sig: Signature,
    decl: InductiveDecl,
    name: str | None = None,
    fuel: Fuel = DEFAULT_FUEL,
) -> GeneratedRecursor:
    """Declare and define the canonical weak recursor of ``decl``.

    Requires a strictly positive declaration with inferred parameters; the
    new symbol and one rule per constructor are admitted into ``sig``, and
    every rule is put through the subject-reduction check before the
    result is returned.
    """
    verdict = check_positivity(sig, decl)
    if verdict.level != "strictly_positive":
        raise NotStrictlyPositive(
            f"{decl.name} is not strictly positive ({verdict.describe()}); no canonical recursor"
        )
    cdecl = sig.decl(decl.name)
    if not sig.is_constant_predicate(decl.name):
        raise RecursorTargetError(f"{decl.name} is not a constant predicate symbol")

    params = infer_parameters(sig, decl)
    rec_name = name or fresh_name(f"{decl.name}_rec", set(sig.symbols))
    if rec_name in sig:
        raise GenerationError(f"symbol {rec_name!r} already declared")

    avoid = set(sig.symbols) | {rec_name}
    type_tele, _ = open_telescope(cdecl.type, avoid)
    type_tele, _ = _readable_telescope(type_tele, [], "A", avoid)
    q_tele = type_tele[:params]
    z_tele = type_tele[params:]
    avoid |= {x for x, _ in type_tele}
    q_vars = [Var(x) for x, _ in q_tele]
    z_vars = [Var(x) for x, _ in z_tele]

    z_name = fresh_name("z", avoid)
    avoid.add(z_name)
    p_name = fresh_name("P", avoid)
    avoid.add(p_name)

    # motive: (z'..:V..) C q.. z'.. => *
    zp_tele: list[tuple[str, Term]] = []
    zp_ren: dict[str, Term] = {}
    for x, ty in z_tele:
        xp = fresh_name(x + "'", avoid)
        avoid.add(xp)
        zp_tele.append((xp, substitute(ty, zp_ren)))
        zp_ren[x] = Var(xp)
    motive_type = prods(
        zp_tele,
        arrow(app(Sym(decl.name), *q_vars, *[Var(x) for x, _ in zp_tele]), STAR),
    )

    # one step argument per constructor
    y_names: list[str] = []
    y_types: list[Term] = []
    ctor_data: list[dict] = []
    for i, ctor in enumerate(decl.constructors, start=1):
        data = _open_constructor(sig, decl.name, ctor, params, q_tele, avoid)
        avoid |= data["taken"]
        x_tele = data["x_tele"]
        v_args = data["v_args"]
        xp_tele: list[tuple[str, Term]] = []
        for j, (x_j, _) in enumerate(x_tele):
            rec_info = data["recursive"][j]
            if rec_info is None:
                continue
            alpha_tele, w_args = rec_info
            xp = fresh_name(x_j + "'", avoid)
            avoid.add(xp)
            xp_tele.append(
                (
                    xp,
                    prods(
                        alpha_tele,
                        app(
                            Var(p_name),
                            *w_args,
                            app(Var(x_j), *[Var(a) for a, _ in alpha_tele]),
                        ),
                    ),
                )
            )
        y_type = prods(
            list(x_tele) + xp_tele,
            app(
                Var(p_name),
                *v_args,
                app(Sym(ctor), *q_vars, *[Var(x) for x, _ in x_tele]),
            ),
        )
        y_name = fresh_name(f"y{i}", avoid)
        avoid.add(y_name)
        y_names.append(y_name)
        y_types.append(y_type)
        ctor_data.append(data)

    rec_type = prods(
        list(q_tele)
        + list(z_tele)
        + [(z_name, app(Sym(decl.name), *q_vars, *z_vars)), (p_name, motive_type)]
        + list(zip(y_names, y_types)),
        app(Var(p_name), *z_vars, Var(z_name)),
    )

    sig.declare(rec_name, rec_type)
    try:
        validate_symbol_type(sig, rec_name, fuel)
    except KernelError as exc:
        raise GenerationError(f"generated recursor type is ill-formed: {exc.message}") from exc

    y_vars = [Var(y) for y in y_names]
    rules: list[RewriteRule] = []
    for y_name, data, ctor in zip(y_names, ctor_data, decl.constructors):
        x_tele = data["x_tele"]
        x_vars = [Var(x) for x, _ in x_tele]
        qp_names = data["qp_names"]
        scrutinee = app(Sym(ctor), *[Var(q) for q in qp_names], *x_vars)
        lhs = app(
            Sym(rec_name),
            *q_vars,
            *z_vars,
            scrutinee,
            Var(p_name),
            *y_vars,
        )
        rec_calls: list[Term] = []
        for j, (x_j, _) in enumerate(x_tele):
            rec_info = data["recursive"][j]
            if rec_info is None:
                continue
            alpha_tele, w_args = rec_info
            call = app(
                Sym(rec_name),
                *q_vars,
                *w_args,
                app(Var(x_j), *[Var(a) for a, _ in alpha_tele]),
                Var(p_name),
                *y_vars,
            )
            rec_calls.append(lams(alpha_tele, call))
        rhs = app(Var(y_name), *x_vars, *rec_calls)
        env = EMPTY_ENV
        for x, ty in list(q_tele) + list(x_tele) + [(p_name, motive_type)] + list(zip(y_names, y_types)):
            env = env.extend(x, ty)
        rho: dict[str, Term] = {qp: Var(q) for qp, (q, _) in zip(qp_names, q_tele)}
        for (zx, _), v in zip(z_tele, data["v_args"]):
            rho[zx] = v
        rule = add_rule(sig, lhs, rhs, env, rho)
        report = check_rule_subject_reduction(sig, rule, fuel)
        if not report.ok:
            raise GenerationError(
                f"generated rule {rule} fails subject reduction ({report.describe()})"
            )
        rules.append(rule)

    rdecl = RecursorDecl(
        name=rec_name,
        target=decl.name,
        origin="canonical",
        kind="weak",
        constructors=decl.constructors,
        head_computability="proven_by_template",
    )
    return GeneratedRecursor(rdecl, rec_type, tuple(rules), params)


def _readable_telescope(
    tele: list[tuple[str, Term]],
    rest: list[Term],
    base: str,
    avoid: set[str],
) -> tuple[list[tuple[str, Term]], list[Term]]:
    """Rename placeholder binders (from arrow sugar) to fresh readable names.

    ``rest`` is a list of later terms renamed consistently (a no-op in
    practice, since placeholder binders are never referenced).
    """
    ren: dict[str, Term] = {}
    out: list[tuple[str, Term]] = []
    for x, ty in tele:
        ty = substitute(ty, ren)
        if x.startswith("_"):
            new = fresh_name(base, avoid)
            ren[x] = Var(new)
            x = new
        avoid.add(x)
        out.append((x, ty))
    return out, [substitute(t, ren) for t in rest]


def _open_constructor(
    sig: Signature,
    type_name: str,
    ctor: str,
    params: int,
    q_tele: list[tuple[str, Term]],
    avoid: set[str],
) -> dict:
    """Open a constructor's telescope, renaming its parameter prefix to the
    shared parameter names and freshening the remaining binders."""
    cdecl = sig.decl(ctor)
    tele, out = open_telescope(cdecl.type, avoid | {x for x, _ in q_tele})
    if len(tele) < params:
        raise GenerationError(f"constructor {ctor} has fewer binders than the inferred parameters")
    ren: dict[str, Term] = {x: Var(q) for (x, _), (q, _) in zip(tele[:params], q_tele)}
    taken: set[str] = set()
    x_tele: list[tuple[str, Term]] = []
    for x, ty in tele[params:]:
        ty = substitute(ty, ren)
        blocked = avoid | taken | {q for q, _ in q_tele}
        if x.startswith("_"):
            x_new = fresh_name("x", blocked)
            ren[x] = Var(x_new)
            x = x_new
        elif x in blocked:
            x_new = fresh_name(x, blocked)
            ren[x] = Var(x_new)
            x = x_new
        taken.add(x)
        x_tele.append((x, ty))
    _, out_args = spine(out)
    v_args = [substitute(a, ren) for a in out_args[params:]]

    recursive: list[tuple[list[tuple[str, Term]], list[Term]] | None] = []
    for x, ty in x_tele:
        alpha_tele, body = open_telescope(ty, avoid | taken | {x for x, _ in x_tele})
        head, args = spine(body)
        if isinstance(head, Sym) and head.name == type_name:
            local = set(avoid) | taken
            alpha_tele, rest = _readable_telescope(alpha_tele, list(args[params:]), "a", local)
            taken |= {a for a, _ in alpha_tele}
            recursive.append((alpha_tele, rest))
        else:
            recursive.append(None)

    qp_names: list[str] = []
    for q, _ in q_tele:
        qp = fresh_name(q + "'", avoid | taken)
        taken.add(qp)
        qp_names.append(qp)

    return {
        "x_tele": x_tele,
        "v_args": v_args,
        "recursive": recursive,
        "qp_names": qp_names,
        "taken": taken,
    }


# ---------------------------------------------------------------------------
# admissibility


@dataclass(frozen=True)
class AdmissibilityReport:
    target: str
    mode: str  # "elimination-based" | "introduction-based"
    completeness: str | None  # "PROVEN" | "ASSUMED" | None when no recursors
    head_computability: str | None
    per_recursor: tuple[tuple[str, str, str], ...]  # (name, origin, head-computability)
    waived: tuple[str, ...]
    primitive: PrimitiveVerdict
    notes: tuple[str, ...] = ()


def admissibility_report(
    sig: Signature,
    decl: InductiveDecl,
    recursors: list[RecursorDecl],
) -> AdmissibilityReport:
    """Summarize what the recursor set of ``decl`` buys and what it assumes.

    Completeness w.r.t. accessibility is proven exactly when the set
    contains the canonical recursor generated from the full constructor
    list; head-computability is proven for canonical-template recursors
    and recorded as an assumption for user-declared ones.
    """
    mode = "elimination-based" if recursors else "introduction-based"
    per: list[tuple[str, str, str]] = []
    notes: list[str] = []
    for r in recursors:
        hc = "PROVEN" if r.head_computability == "proven_by_template" else "ASSUMED"
        per.append((r.name, r.origin, hc))
        if r.kind == "strong":
            notes.append(
                f"{r.name} is a strong recursor; the extra strong-recursor conditions are assumed"
            )
    if recursors:
        complete = any(
            r.origin == "canonical" and r.constructors == decl.constructors for r in recursors
        )
        completeness = "PROVEN" if complete else "ASSUMED"
        head = "PROVEN" if all(hc == "PROVEN" for _, _, hc in per) else "ASSUMED"
    else:
        completeness = None
        head = None
    waived = ("I6", "SAFE") if recursors else ()
    return AdmissibilityReport(
        target=decl.name,
        mode=mode,
        completeness=completeness,
        head_computability=head,
        per_recursor=tuple(per),
        waived=waived,
        primitive=classify_primitive(sig, decl.name),
        notes=tuple(notes),
    )
