"""A kernel for the calculus of constructions extended with user rewrite
rules, inductive types with non-free constructors, and recursors.

The package splits along the checker's phases: ``terms`` (syntax and
substitution), ``signature`` (declarations, precedence, rule admission),
``reduction`` (beta+rewrite normalization), ``typecheck`` (CC typing with
conversion), ``inductive`` (positivity, accessibility and friends),
``recursor`` (canonical generation and validation), ``surface`` (parser
and printer), ``checker`` (file-level orchestration) and ``cli``.
"""

from .terms import (
    Abs,
    App,
    BOX,
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
    app,
    arrow,
    free_vars,
    show,
    spine,
    substitute,
)
from .signature import RewriteRule, Signature, add_rule, check_safe_rule, classify_neutral
from .reduction import Fuel, FuelExhausted, beta_step, convertible, normalize, rewrite_step
from .typecheck import check_rule_subject_reduction, check_type, infer_rule_env, infer_type
from .inductive import (
    InductiveDecl,
    check_defined_predicate_rule,
    check_I6,
    check_positivity,
    classify_primitive,
    compute_accessibility,
    infer_parameters,
    pos_sets,
)
from .recursor import (
    RecursorDecl,
    admissibility_report,
    generate_canonical_recursor,
    validate_extended_recursor,
)
from .checker import CheckResult, check_file, check_source

__all__ = [name for name in dir() if not name.startswith("_")]
