"""Term syntax and the operations everything else is built on.

A term is a sort (``*`` or ``[]``), a variable, a symbol from the ambient
signature, an abstraction ``[x:T]u``, an application ``t u``, or a dependent
product ``(x:T)U`` (written ``T => U`` when ``x`` is not free in ``U``).
Terms are immutable values; all operations return fresh terms.

Subterms are addressed by Dewey paths over {1, 2}: for an application,
1 is the function and 2 the argument (so the i-th argument of an n-ary
applied symbol sits at 1^(n-i).2); for a product, 1 is the domain and 2
the codomain; for an abstraction, 1 is the annotation and 2 the body.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Union


class KernelError(Exception):
    """Base class for every error the kernel reports.

    ``code`` is a stable machine-readable identifier; the checker maps it
    onto diagnostics unchanged.
    """

    code = "ERROR"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


@dataclass(frozen=True)
class Sort:
    name: str  # "*" (types and propositions) or "[]" (kinds)

    def __str__(self) -> str:
        return self.name


STAR = Sort("*")
BOX = Sort("[]")


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Sym:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Abs:
    binder: str
    annot: "Term"
    body: "Term"

    def __str__(self) -> str:
        return show(self)


@dataclass(frozen=True)
class App:
    fn: "Term"
    arg: "Term"

    def __str__(self) -> str:
        return show(self)


@dataclass(frozen=True)
class Prod:
    binder: str
    domain: "Term"
    codomain: "Term"

    def __str__(self) -> str:
        return show(self)


Term = Union[Sort, Var, Sym, Abs, App, Prod]

Position = tuple[int, ...]

#: A substitution is a finite map from variable names to terms; it is the
#: identity outside its domain and is applied capture-avoidingly.
TermSubstitution = Mapping[str, Term]


class PositionError(KernelError):
    code = "BAD-POSITION"


# ---------------------------------------------------------------------------
# construction helpers


def app(fn: Term, *args: Term) -> Term:
    """Apply ``fn`` to ``args`` as a curried spine."""
    t = fn
    for a in args:
        t = App(t, a)
    return t


def spine(t: Term) -> tuple[Term, tuple[Term, ...]]:
    """Unwind a curried application into (head, arguments)."""
    args: list[Term] = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fn
    args.reverse()
    return t, tuple(args)


def arrow(domain: Term, codomain: Term) -> Prod:
    """Non-dependent product ``domain => codomain``."""
    binder = "_"
    if binder in free_vars(codomain):
        binder = fresh_name("_", free_vars(codomain))
    return Prod(binder, domain, codomain)


def prods(bindings: Iterable[tuple[str, Term]], body: Term) -> Term:
    """Fold a telescope of (name, type) pairs into nested products."""
    t = body
    for name, ty in reversed(list(bindings)):
        t = Prod(name, ty, t)
    return t


def lams(bindings: Iterable[tuple[str, Term]], body: Term) -> Term:
    t = body
    for name, ty in reversed(list(bindings)):
        t = Abs(name, ty, t)
    return t


def strip_prods(t: Term, n: int | None = None) -> tuple[list[tuple[str, Term]], Term]:
    """Split off the first ``n`` product binders (all of them if ``n`` is None).

    Raises PositionError when fewer than ``n`` binders are available.  Binder
    names are returned as written; callers that need a well-scoped telescope
    should use :func:`open_telescope` instead.
    """
    tele: list[tuple[str, Term]] = []
    while (n is None or len(tele) < n) and isinstance(t, Prod):
        tele.append((t.binder, t.domain))
        t = t.codomain
    if n is not None and len(tele) < n:
        raise PositionError(f"expected at least {n} product binders, found {len(tele)}")
    return tele, t


def open_telescope(t: Term, avoid: Iterable[str] = ()) -> tuple[list[tuple[str, Term]], Term]:
    """Like strip_prods(t) but freshens shadowed binder names.

    The returned telescope has pairwise-distinct names, none of which is in
    ``avoid``, so it can be loaded into an Environment directly.
    """
    taken = set(avoid)
    tele: list[tuple[str, Term]] = []
    while isinstance(t, Prod):
        name, dom, body = t.binder, t.domain, t.codomain
        if name in taken:
            fresh = fresh_name(name, taken | free_vars(body))
            body = substitute(body, {name: Var(fresh)})
            name = fresh
        taken.add(name)
        tele.append((name, dom))
        t = body
    return tele, t


def is_kind(t: Term) -> bool:
    """True for ``*`` and products ending in ``*`` — the kinds of CC.

    Well-formed terms of type ``[]`` have exactly this shape, so symbols
    whose type is a kind are the predicate symbols.
    """
    while isinstance(t, Prod):
        t = t.codomain
    return t == STAR


# ---------------------------------------------------------------------------
# free variables, substitution, alpha-equivalence


def free_vars(t: Term) -> frozenset[str]:
    match t:
        case Sort() | Sym():
            return frozenset()
        case Var(name):
            return frozenset((name,))
        case App(fn, arg):
            return free_vars(fn) | free_vars(arg)
        case Abs(binder, annot, body) | Prod(binder, annot, body):
            return free_vars(annot) | (free_vars(body) - {binder})
    raise TypeError(f"not a term: {t!r}")


def symbols_of(t: Term) -> frozenset[str]:
    """Names of all signature symbols occurring in ``t``."""
    match t:
        case Sort() | Var():
            return frozenset()
        case Sym(name):
            return frozenset((name,))
        case App(fn, arg):
            return symbols_of(fn) | symbols_of(arg)
        case Abs(_, annot, body) | Prod(_, annot, body):
            return symbols_of(annot) | symbols_of(body)
    raise TypeError(f"not a term: {t!r}")


def fresh_name(base: str, avoid: Iterable[str]) -> str:
    taken = set(avoid)
    candidate = base
    while candidate in taken:
        candidate += "'"
    return candidate


def substitute(t: Term, theta: TermSubstitution) -> Term:
    """Simultaneous capture-avoiding substitution of free variables."""
    if not theta:
        return t
    match t:
        case Sort() | Sym():
            return t
        case Var(name):
            return theta.get(name, t)
        case App(fn, arg):
            return App(substitute(fn, theta), substitute(arg, theta))
        case Abs(binder, annot, body):
            binder, body = _subst_under_binder(binder, body, theta)
            return Abs(binder, substitute(annot, theta), body)
        case Prod(binder, annot, body):
            binder, body = _subst_under_binder(binder, body, theta)
            return Prod(binder, substitute(annot, theta), body)
    raise TypeError(f"not a term: {t!r}")


def _subst_under_binder(binder: str, body: Term, theta: TermSubstitution) -> tuple[str, Term]:
    body_free = free_vars(body)
    inner = {k: v for k, v in theta.items() if k != binder and k in body_free}
    if not inner:
        return binder, body
    captured: set[str] = set()
    for v in inner.values():
        captured |= free_vars(v)
    if binder in captured:
        renamed = fresh_name(binder, captured | body_free | set(inner))
        body = substitute(body, {binder: Var(renamed)})
        binder = renamed
    return binder, substitute(body, inner)


def alpha_equal(t: Term, u: Term) -> bool:
    """Equality up to renaming of bound variables."""
    return _alpha(t, u, (), ())


def _alpha(t: Term, u: Term, lb: tuple[str, ...], rb: tuple[str, ...]) -> bool:
    match t, u:
        case (Sort(a), Sort(b)) | (Sym(a), Sym(b)):
            return a == b
        case (Var(a), Var(b)):
            for i in range(len(lb) - 1, -1, -1):
                hit_l, hit_r = lb[i] == a, rb[i] == b
                if hit_l or hit_r:
                    return hit_l and hit_r
            return a == b
        case (App(f1, a1), App(f2, a2)):
            return _alpha(f1, f2, lb, rb) and _alpha(a1, a2, lb, rb)
        case (Abs(x1, t1, b1), Abs(x2, t2, b2)) | (Prod(x1, t1, b1), Prod(x2, t2, b2)):
            if type(t) is not type(u):
                return False
            return _alpha(t1, t2, lb, rb) and _alpha(b1, b2, lb + (x1,), rb + (x2,))
    return False


# ---------------------------------------------------------------------------
# positions


def format_position(p: Position) -> str:
    return ".".join(str(d) for d in p) if p else "ε"


def children(t: Term) -> tuple[tuple[int, Term], ...]:
    match t:
        case App(fn, arg):
            return ((1, fn), (2, arg))
        case Abs(_, annot, body) | Prod(_, annot, body):
            return ((1, annot), (2, body))
        case _:
            return ()


def subterm_at(t: Term, pos: Position) -> Term:
    for i, d in enumerate(pos):
        for idx, child in children(t):
            if idx == d:
                t = child
                break
        else:
            raise PositionError(f"no subterm at {format_position(pos)} (stuck after {i} steps)")
    return t


def replace_at(t: Term, pos: Position, new: Term) -> Term:
    if not pos:
        return new
    d, rest = pos[0], pos[1:]
    match t, d:
        case (App(fn, arg), 1):
            return App(replace_at(fn, rest, new), arg)
        case (App(fn, arg), 2):
            return App(fn, replace_at(arg, rest, new))
        case (Abs(x, annot, body), 1):
            return Abs(x, replace_at(annot, rest, new), body)
        case (Abs(x, annot, body), 2):
            return Abs(x, annot, replace_at(body, rest, new))
        case (Prod(x, annot, body), 1):
            return Prod(x, replace_at(annot, rest, new), body)
        case (Prod(x, annot, body), 2):
            return Prod(x, annot, replace_at(body, rest, new))
    raise PositionError(f"no subterm at {format_position(pos)}")


def all_positions(t: Term) -> Iterator[Position]:
    """Preorder enumeration of every position in ``t``."""
    stack: list[tuple[Position, Term]] = [((), t)]
    while stack:
        pos, sub = stack.pop()
        yield pos
        for d, child in reversed(children(sub)):
            stack.append((pos + (d,), child))


def var_positions(name: str, t: Term) -> frozenset[Position]:
    """Positions of the free occurrences of variable ``name`` in ``t``."""
    out: set[Position] = set()

    def go(sub: Term, pos: Position, shadowed: frozenset[str]) -> None:
        match sub:
            case Var(v):
                if v == name and v not in shadowed:
                    out.add(pos)
            case App(fn, arg):
                go(fn, pos + (1,), shadowed)
                go(arg, pos + (2,), shadowed)
            case Abs(x, annot, body) | Prod(x, annot, body):
                go(annot, pos + (1,), shadowed)
                go(body, pos + (2,), shadowed | {x})

    go(t, (), frozenset())
    return frozenset(out)


def sym_positions(names: str | Iterable[str], t: Term) -> frozenset[Position]:
    """Positions of occurrences of the given symbol name(s) in ``t``."""
    wanted = {names} if isinstance(names, str) else set(names)
    out: set[Position] = set()

    def go(sub: Term, pos: Position) -> None:
        match sub:
            case Sym(v):
                if v in wanted:
                    out.add(pos)
            case App() | Abs() | Prod():
                for d, child in children(sub):
                    go(child, pos + (d,))

    go(t, ())
    return frozenset(out)


# ---------------------------------------------------------------------------
# environments


@dataclass(frozen=True)
class Environment:
    """Ordered typing context; names are unique."""

    bindings: tuple[tuple[str, Term], ...] = ()

    @staticmethod
    def of(*pairs: tuple[str, Term]) -> "Environment":
        env = Environment()
        for name, ty in pairs:
            env = env.extend(name, ty)
        return env

    def extend(self, name: str, ty: Term) -> "Environment":
        if any(name == n for n, _ in self.bindings):
            raise KernelError(f"duplicate variable {name!r} in environment")
        return Environment(self.bindings + ((name, ty),))

    def lookup(self, name: str) -> Term | None:
        for n, ty in self.bindings:
            if n == name:
                return ty
        return None

    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.bindings)

    def __iter__(self) -> Iterator[tuple[str, Term]]:
        return iter(self.bindings)

    def __len__(self) -> int:
        return len(self.bindings)

    def __contains__(self, name: str) -> bool:
        return any(name == n for n, _ in self.bindings)

    def __str__(self) -> str:
        return ", ".join(f"{n}:{show(ty)}" for n, ty in self.bindings)


EMPTY_ENV = Environment()


# ---------------------------------------------------------------------------
# printing


def show(t: Term) -> str:
    """Render a term in the surface syntax accepted by the parser."""
    match t:
        case Sort(name) | Var(name) | Sym(name):
            return name
        case Abs(binder, annot, body):
            return f"[{binder}:{show(annot)}]{show(body)}"
        case Prod(binder, domain, codomain):
            if binder == "_" and binder not in free_vars(codomain):
                return f"{_show_arrow_lhs(domain)} => {show(codomain)}"
            return f"({binder}:{show(domain)}){show(codomain)}"
        case App():
            head, args = spine(t)
            return " ".join(_show_atom(s) for s in (head, *args))
    raise TypeError(f"not a term: {t!r}")


def _show_arrow_lhs(t: Term) -> str:
    if isinstance(t, (Prod, Abs)):
        return f"({show(t)})"
    return show(t)


def _show_atom(t: Term) -> str:
    if isinstance(t, (Sort, Var, Sym)):
        return show(t)
    return f"({show(t)})"
