"""Know-how knowledge-base engine.

Layered domain models with finite scales, a quantifier-free higher-order
formula language, strong-Kleene evaluation, forward chaining with
explanations, and a brute-force oracle for ground-truth solution sets.
"""

from .errors import EngineError
from .scales import DecimalRange, EnumValues, IntRange, Scale, ScaleSystem, define_scale
from .model import (
    DomainModel,
    FactAlgebra,
    Interpretation,
    ScaleRef,
    SignatureLayer,
    SymbolDecl,
    SymbolShape,
    SymbolsOfLayer,
    VariableDecl,
    assemble_model,
    carrier_of,
    declare_symbol,
)
from .formulas import SymbolTable, parse_formula, parse_term, render_formula, render_term
from .typecheck import check_formula, check_term
from .semantics import (
    Candidate,
    Criterion,
    SolutionSet,
    TaskSpec,
    TruthValue,
    apply_criterion,
    check_solution,
    compare_solution_sets,
    enumerate_assignments,
    eval_formula,
    eval_term,
    oracle_solutions,
)
from .solver import SolveResult, Solution, compile_rules, explain, forward_chain, solve

__all__ = [
    "EngineError",
    "DecimalRange", "EnumValues", "IntRange", "Scale", "ScaleSystem", "define_scale",
    "DomainModel", "FactAlgebra", "Interpretation", "ScaleRef", "SignatureLayer",
    "SymbolDecl", "SymbolShape", "SymbolsOfLayer", "VariableDecl",
    "assemble_model", "carrier_of", "declare_symbol",
    "SymbolTable", "parse_formula", "parse_term", "render_formula", "render_term",
    "check_formula", "check_term",
    "Candidate", "Criterion", "SolutionSet", "TaskSpec", "TruthValue",
    "apply_criterion", "check_solution", "compare_solution_sets",
    "enumerate_assignments", "eval_formula", "eval_term", "oracle_solutions",
    "SolveResult", "Solution", "compile_rules", "explain", "forward_chain", "solve",
]
