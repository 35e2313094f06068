"""Evaluation semantics and the brute-force solution oracle.

Terms evaluate to carrier values or UNDEF (partial-mapping misses, division
by zero, unbound constants). Formulas evaluate in strong-Kleene three-valued
logic; a candidate interpretation is a solution exactly when every stored
formula is True under every assignment of the declared variables.

Predicate atoms over fact tables are closed-world: with defined arguments
they are True iff the tuple is stored, else False. Undefined arguments make
the atom Undefined.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Optional, Sequence

from .errors import (
    IncompleteCandidate,
    ObjectiveUndefined,
    OracleBudgetExceeded,
    PertinencyFailed,
    SchemaMismatch,
    TypecheckFailed,
    UnsupportedOutputKind,
)
from .formulas import (
    And,
    Arith,
    Atom,
    Compare,
    Implies,
    Lit,
    Not,
    Or,
    SymApp,
    SymbolRef,
    VarApp,
    referenced_symbols,
)
from .model import (
    KIND_CONST,
    KIND_FUNC,
    KIND_PRED,
    DomainModel,
    VariableDecl,
    carrier_of,
)
from .scales import Scale
from .typecheck import TypedFormula, TypedTerm, check_term
from .values import UNDEF, SymRef, Value, as_fraction, is_numeric_value, render_value

DEFAULT_ORACLE_BUDGET = 10**6


# --- three-valued truth -------------------------------------------------------

class TruthValue:
    """Strong-Kleene truth value; instances are the three singletons below."""

    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name

    def __repr__(self) -> str:
        return self.name

    def is_true(self) -> bool:
        return self is TRUE

    def is_false(self) -> bool:
        return self is FALSE

    def is_undefined(self) -> bool:
        return self is UNDEFINED


TRUE = TruthValue("True")
FALSE = TruthValue("False")
UNDEFINED = TruthValue("Undefined")


def tv_from_bool(b: bool) -> TruthValue:
    return TRUE if b else FALSE


def tv_not(a: TruthValue) -> TruthValue:
    if a is TRUE:
        return FALSE
    if a is FALSE:
        return TRUE
    return UNDEFINED


def tv_and(a: TruthValue, b: TruthValue) -> TruthValue:
    if a is FALSE or b is FALSE:
        return FALSE
    if a is UNDEFINED or b is UNDEFINED:
        return UNDEFINED
    return TRUE


def tv_or(a: TruthValue, b: TruthValue) -> TruthValue:
    if a is TRUE or b is TRUE:
        return TRUE
    if a is UNDEFINED or b is UNDEFINED:
        return UNDEFINED
    return FALSE


def tv_implies(a: TruthValue, b: TruthValue) -> TruthValue:
    return tv_or(tv_not(a), b)


# --- candidates ----------------------------------------------------------------

@dataclass(frozen=True)
class Candidate:
    """An interpretation of the task-relevant level-0/1 symbols.

    `constants` binds object constants (task inputs and solved outputs);
    `functions`/`predicates` hold level-1 tables supplied as task givens.
    """

    constants: Mapping[str, Value] = field(default_factory=dict)
    functions: Mapping[str, Mapping[tuple, Value]] = field(default_factory=dict)
    predicates: Mapping[str, frozenset] = field(default_factory=dict)

    def with_constants(self, more: Mapping[str, Value]) -> "Candidate":
        merged = dict(self.constants)
        merged.update(more)
        return Candidate(merged, self.functions, self.predicates)

    def project(self, names: Sequence[str]) -> tuple:
        return tuple(self.constants.get(n, UNDEF) for n in names)


# --- evaluation ------------------------------------------------------------------

class Trace:
    """Collects the ground premises an evaluation actually touched."""

    def __init__(self):
        self.constants: list[tuple[str, Value]] = []
        self.facts: list[tuple[str, tuple, Optional[Value]]] = []

    def record_constant(self, sym: str, value: Value) -> None:
        self.constants.append((sym, value))

    def record_fact(self, sym: str, args: tuple, result: Optional[Value]) -> None:
        self.facts.append((sym, args, result))


class Evaluator:
    """Evaluates checked nodes under one candidate and one assignment."""

    def __init__(
        self,
        model: DomainModel,
        sorts: Mapping[int, tuple],
        candidate: Candidate,
        assignment: Mapping[str, Value],
        trace: Optional[Trace] = None,
    ):
        self.model = model
        self.sorts = sorts
        self.candidate = candidate
        self.assignment = assignment
        self.trace = trace

    # terms ------------------------------------------------------------------

    def term(self, node):
        if isinstance(node, Lit):
            return node.value
        if isinstance(node, SymbolRef):
            return SymRef(node.symbol)
        if isinstance(node, SymApp):
            return self._symapp(node)
        if isinstance(node, VarApp):
            return self._varapp(node)
        if isinstance(node, Arith):
            left = self.term(node.left)
            if left is UNDEF:
                return UNDEF
            right = self.term(node.right)
            if right is UNDEF:
                return UNDEF
            lf, rf = as_fraction(left), as_fraction(right)
            if node.op == "+":
                return lf + rf
            if node.op == "-":
                return lf - rf
            if node.op == "*":
                return lf * rf
            if rf == 0:
                return UNDEF
            return lf / rf
        raise TypeError(f"cannot evaluate {node!r}")

    def _symapp(self, node: SymApp):
        decl = self.model.symbol(node.symbol)
        if decl.kind == KIND_CONST:
            if decl.layer <= 1:
                if node.symbol in self.candidate.constants:
                    v = self.candidate.constants[node.symbol]
                    if self.trace:
                        self.trace.record_constant(node.symbol, v)
                    return v
                return UNDEF
            interp = self.model.interpretation(node.symbol)
            if interp is None or interp.constant is None:
                return UNDEF
            if self.trace:
                self.trace.record_fact(node.symbol, (), interp.constant)
            return interp.constant
        args = self._args(node.args)
        if args is UNDEF:
            return UNDEF
        return self._apply_function(node.symbol, decl.layer, args)

    def _varapp(self, node: VarApp):
        var = self.model.variables[node.var]
        bound = self.assignment.get(node.var, UNDEF)
        if bound is UNDEF:
            return UNDEF
        if var.order == 1:
            return bound
        sort = self.sorts.get(id(node))
        if not node.args:
            if sort is not None and sort[0] == "symbols":
                return bound  # reified use
            # constant-shaped variable used as a value
            decl = self.model.symbol(bound.name)
            interp = self.model.interpretation(bound.name)
            if interp is None or interp.constant is None:
                return UNDEF
            if self.trace:
                self.trace.record_fact(bound.name, (), interp.constant)
            return interp.constant
        args = self._args(node.args)
        if args is UNDEF:
            return UNDEF
        decl = self.model.symbol(bound.name)
        return self._apply_function(bound.name, decl.layer, args)

    def _args(self, nodes: tuple):
        out = []
        for n in nodes:
            v = self.term(n)
            if v is UNDEF:
                return UNDEF
            out.append(self._canon(v))
        return tuple(out)

    @staticmethod
    def _canon(v):
        # exact rationals from arithmetic hash like the grid values they equal
        if isinstance(v, Fraction) and v.denominator == 1:
            return int(v)
        return v

    def _apply_function(self, name: str, layer: int, args: tuple):
        if layer == 1:
            table = self.candidate.functions.get(name)
        else:
            interp = self.model.interpretation(name)
            table = interp.table if interp else None
        if table is None:
            return UNDEF
        v = table.get(args, UNDEF)
        if v is UNDEF:
            return UNDEF
        if self.trace:
            self.trace.record_fact(name, args, v)
        return v

    # formulas ------------------------------------------------------------------

    def formula(self, node) -> TruthValue:
        if isinstance(node, Atom):
            return self._atom(node)
        if isinstance(node, Compare):
            return self._compare(node)
        if isinstance(node, Not):
            return tv_not(self.formula(node.sub))
        if isinstance(node, And):
            left = self.formula(node.left)
            if left is FALSE:
                return FALSE
            return tv_and(left, self.formula(node.right))
        if isinstance(node, Or):
            left = self.formula(node.left)
            if left is TRUE:
                return TRUE
            return tv_or(left, self.formula(node.right))
        if isinstance(node, Implies):
            left = self.formula(node.left)
            if left is FALSE:
                return TRUE
            return tv_implies(left, self.formula(node.right))
        raise TypeError(f"cannot evaluate {node!r}")

    def _atom(self, node: Atom) -> TruthValue:
        app = node.app
        args = self._args(app.args)
        if args is UNDEF:
            return UNDEFINED
        if isinstance(app, SymApp):
            name = app.symbol
            layer = self.model.symbol(name).layer
        else:
            bound = self.assignment.get(app.var, UNDEF)
            if bound is UNDEF:
                return UNDEFINED
            name = bound.name
            layer = self.model.symbol(name).layer
        if layer == 1:
            tuples = self.candidate.predicates.get(name)
            if tuples is None:
                return UNDEFINED  # level-1 predicate with no given table
        else:
            interp = self.model.interpretation(name)
            tuples = interp.tuples if interp else frozenset()
        if args in tuples:
            if self.trace:
                self.trace.record_fact(name, args, None)
            return TRUE
        return FALSE

    def _compare(self, node: Compare) -> TruthValue:
        left = self.term(node.left)
        if left is UNDEF:
            return UNDEFINED
        right = self.term(node.right)
        if right is UNDEF:
            return UNDEFINED
        op = node.relop
        if op in ("=", "~="):
            eq = self._values_eq(left, right)
            return tv_from_bool(eq if op == "=" else not eq)
        lf, rf = as_fraction(left), as_fraction(right)
        if op == "<":
            return tv_from_bool(lf < rf)
        if op == "<=":
            return tv_from_bool(lf <= rf)
        if op == ">":
            return tv_from_bool(lf > rf)
        return tv_from_bool(lf >= rf)

    @staticmethod
    def _values_eq(a, b) -> bool:
        if is_numeric_value(a) and is_numeric_value(b):
            return as_fraction(a) == as_fraction(b)
        if isinstance(a, SymRef) and isinstance(b, SymRef):
            return a.name == b.name
        return a == b


def eval_term(t, model: DomainModel, candidate: Candidate, assignment: Mapping[str, Value],
              typed: Optional[TypedTerm] = None):
    """Evaluate one term; Undefined propagates, never raises."""
    if typed is None:
        typed = check_term(t, model)
    return Evaluator(model, typed.sorts, candidate, assignment).term(t)


def eval_formula(f: TypedFormula, model: DomainModel, candidate: Candidate,
                 assignment: Mapping[str, Value]) -> TruthValue:
    """Evaluate one checked formula under a single assignment."""
    return Evaluator(model, f.sorts, candidate, assignment).formula(f.formula)


# --- assignments -----------------------------------------------------------------

def enumerate_assignments(
    variables: Sequence[VariableDecl], model: DomainModel
) -> Iterator[dict[str, Value]]:
    """Exhaustive Cartesian product over the variables' finite ranges.

    Deterministic: variables are taken name-sorted, each range in canonical
    order. Zero variables yield exactly one empty assignment.
    """
    from .typecheck import variable_range

    decls = sorted(variables, key=lambda v: v.name)
    names = [v.name for v in decls]
    ranges = [variable_range(model, v) for v in decls]
    for combo in itertools.product(*ranges):
        yield dict(zip(names, combo))


def _formula_assignments(model: DomainModel, typed: TypedFormula) -> list[dict]:
    return list(enumerate_assignments(typed.free, model))


def carrier_size(model: DomainModel) -> int:
    """Size of the top-level carrier (used for defensive iteration caps)."""
    return len(carrier_of(model, model.order).values)


# --- Def-5 checking ----------------------------------------------------------------

def _completeness_gaps(model: DomainModel, candidate: Candidate) -> list[str]:
    gaps = []
    for typed in model.typed_formulas:
        for name in referenced_symbols(typed.formula):
            decl = model.symbol(name)
            if decl is None or decl.layer != 1:
                continue
            if decl.kind == KIND_CONST and name not in candidate.constants:
                gaps.append(name)
            elif decl.kind == KIND_FUNC and name not in candidate.functions:
                gaps.append(name)
            elif decl.kind == KIND_PRED and name not in candidate.predicates:
                gaps.append(name)
    return sorted(set(gaps))


def check_solution(model: DomainModel, candidate: Candidate,
                   _assignments_cache: Optional[dict] = None) -> bool:
    """Def-5: True iff every formula is True under every assignment."""
    gaps = _completeness_gaps(model, candidate)
    if gaps:
        raise IncompleteCandidate(f"unbound level-1 symbol(s): {', '.join(gaps)}")
    return _passes_def5(model, candidate, _assignments_cache)


def _passes_def5(model: DomainModel, candidate: Candidate,
                 cache: Optional[dict] = None) -> bool:
    return _first_failure(model, candidate, cache) is None


def _first_failure(model: DomainModel, candidate: Candidate,
                   cache: Optional[dict] = None):
    """(formula_index, assignment, truth) of the first non-True evaluation."""
    for i, typed in enumerate(model.typed_formulas):
        if cache is not None:
            assignments = cache.get(i)
            if assignments is None:
                assignments = cache[i] = _formula_assignments(model, typed)
        else:
            assignments = _formula_assignments(model, typed)
        ev = Evaluator(model, typed.sorts, candidate, {})
        for a in assignments:
            ev.assignment = a
            tv = ev.formula(typed.formula)
            if tv is not TRUE:
                return (i, a, tv)
    return None


# --- tasks and criteria --------------------------------------------------------------

@dataclass(frozen=True)
class Criterion:
    """Task criterion: none, a predicate filter, or extremize an objective."""

    kind: str  # "none" | "predicate" | "maximize" | "minimize"
    predicate: Optional[TypedFormula] = None
    objective: Optional[TypedTerm] = None

    @staticmethod
    def none() -> "Criterion":
        return Criterion("none")

    @staticmethod
    def maximize(objective: TypedTerm) -> "Criterion":
        return Criterion("maximize", objective=objective)

    @staticmethod
    def minimize(objective: TypedTerm) -> "Criterion":
        return Criterion("minimize", objective=objective)

    @staticmethod
    def predicate_of(pred: TypedFormula) -> "Criterion":
        return Criterion("predicate", predicate=pred)


@dataclass(frozen=True)
class TaskSpec:
    """Professional-task statement: inputs, wanted outputs, criterion."""

    name: str
    inputs: Mapping[str, object]  # constant value, function table, or tuple set
    outputs: tuple[str, ...]
    criterion: Criterion = field(default_factory=Criterion.none)

    def validate(self, model: DomainModel) -> None:
        if not self.outputs:
            raise TypecheckFailed(f"task {self.name}: no outputs")
        sigma1 = False
        for name in self.inputs:
            decl = model.symbol(name)
            if decl is None or decl.layer > 1:
                raise TypecheckFailed(
                    f"task {self.name}: input {name} is not a level-0/1 symbol"
                )
            sigma1 = sigma1 or decl.layer == 1
            binding = self.inputs[name]
            if decl.kind == KIND_CONST:
                if not model.value_in_carrier(binding, decl.result):
                    raise PertinencyFailed(
                        f"task {self.name}: input {name} = {binding!r} off its carrier"
                    )
            elif decl.layer != 1:
                raise TypecheckFailed(
                    f"task {self.name}: table input {name} must be a level-1 symbol"
                )
        for name in self.outputs:
            decl = model.symbol(name)
            if decl is None or decl.layer != 1:
                raise TypecheckFailed(f"task {self.name}: output {name} is not in level 1")
            sigma1 = True
            if name in self.inputs:
                raise TypecheckFailed(f"task {self.name}: {name} is both input and output")
        if not sigma1:
            raise TypecheckFailed(f"task {self.name}: no level-1 symbol among inputs/outputs")
        if self.criterion.kind in ("maximize", "minimize") and self.criterion.objective.free:
            raise TypecheckFailed(f"task {self.name}: objective must be variable-free")

    def base_candidate(self, model: DomainModel) -> Candidate:
        constants: dict[str, Value] = {}
        functions: dict[str, Mapping] = {}
        predicates: dict[str, frozenset] = {}
        for name, binding in self.inputs.items():
            decl = model.symbol(name)
            if decl.kind == KIND_CONST:
                constants[name] = binding
            elif decl.kind == KIND_FUNC:
                functions[name] = dict(binding)
            else:
                predicates[name] = frozenset(binding)
        return Candidate(constants, functions, predicates)


# --- solution sets -------------------------------------------------------------------

@dataclass(frozen=True)
class SolutionSet:
    """Candidates that passed Def-5 and the criterion, canonically ordered."""

    outputs: tuple[str, ...]
    candidates: tuple[Candidate, ...]

    def values(self) -> tuple[tuple[Value, ...], ...]:
        return tuple(c.project(self.outputs) for c in self.candidates)

    def __len__(self) -> int:
        return len(self.candidates)


def sort_candidates(model: DomainModel, outputs: Sequence[str],
                    candidates: Iterable[Candidate]) -> tuple[Candidate, ...]:
    names = sorted(outputs)

    def key(c: Candidate):
        out = []
        for n in names:
            decl = model.symbol(n)
            scale = model.scale_of_ref(decl.result)
            v = c.constants.get(n)
            out.append(scale.index_of(v) if scale and v in scale else -1)
        return tuple(out)

    return tuple(sorted(candidates, key=key))


def make_solution_set(model: DomainModel, outputs: Sequence[str],
                      candidates: Iterable[Candidate]) -> SolutionSet:
    names = tuple(sorted(outputs))
    return SolutionSet(names, sort_candidates(model, names, candidates))


@dataclass(frozen=True)
class SolutionDiff:
    """Symmetric difference between two solution sets over equal schemas."""

    outputs: tuple[str, ...]
    missing_in_left: tuple[tuple, ...]
    missing_in_right: tuple[tuple, ...]

    @property
    def empty(self) -> bool:
        return not self.missing_in_left and not self.missing_in_right

    def render(self) -> str:
        if self.empty:
            return ""
        lines = []
        for row in self.missing_in_left:
            lines.append("missing-in-left " + _row_text(self.outputs, row))
        for row in self.missing_in_right:
            lines.append("missing-in-right " + _row_text(self.outputs, row))
        return "\n".join(lines)


def _row_text(outputs: tuple[str, ...], row: tuple) -> str:
    return "{" + ", ".join(f"{n}={render_value(v)}" for n, v in zip(outputs, row)) + "}"


def compare_solution_sets(s1: SolutionSet, s2: SolutionSet) -> SolutionDiff:
    if s1.outputs != s2.outputs:
        raise SchemaMismatch(f"outputs {s1.outputs} vs {s2.outputs}")
    left = set(s1.values())
    right = set(s2.values())
    return SolutionDiff(
        s1.outputs,
        missing_in_left=tuple(sorted(right - left, key=repr)),
        missing_in_right=tuple(sorted(left - right, key=repr)),
    )


# --- criterion application --------------------------------------------------------------

def apply_criterion(candidates: Sequence[Candidate], criterion: Criterion,
                    model: DomainModel) -> list[Candidate]:
    """Filter candidates by the task criterion; optima keep all ties."""
    if criterion.kind == "none":
        return list(candidates)
    if criterion.kind == "predicate":
        typed = criterion.predicate
        assignments = _formula_assignments(model, typed)
        kept = []
        for c in candidates:
            ev = Evaluator(model, typed.sorts, c, {})
            ok = True
            for a in assignments:
                ev.assignment = a
                if ev.formula(typed.formula) is not TRUE:
                    ok = False
                    break
            if ok:
                kept.append(c)
        return kept
    typed = criterion.objective
    scored: list[tuple[Fraction, Candidate]] = []
    for c in candidates:
        v = Evaluator(model, typed.sorts, c, {}).term(typed.term)
        if v is UNDEF or not is_numeric_value(v):
            raise ObjectiveUndefined(
                f"objective {typed.text} undefined for candidate "
                f"{_row_text(tuple(sorted(c.constants)), tuple(c.constants[k] for k in sorted(c.constants)))}"
            )
        scored.append((as_fraction(v), c))
    if not scored:
        return []
    best = max(s for s, _ in scored) if criterion.kind == "maximize" else min(
        s for s, _ in scored
    )
    return [c for s, c in scored if s == best]


# --- the oracle ------------------------------------------------------------------------

def oracle_solutions(model: DomainModel, task: TaskSpec,
                     budget: int = DEFAULT_ORACLE_BUDGET) -> SolutionSet:
    """Ground truth by exhaustive enumeration of all output-value combinations."""
    task.validate(model)
    out_names = sorted(task.outputs)
    scales: list[Scale] = []
    for name in out_names:
        decl = model.symbol(name)
        if decl.kind != KIND_CONST:
            raise UnsupportedOutputKind(
                f"output {name} is a {decl.kind}; the oracle enumerates object constants only"
            )
        scale = model.scale_of_ref(decl.result)
        if scale is None:
            raise UnsupportedOutputKind(f"output {name} ranges over reified symbols")
        scales.append(scale)
    space = 1
    for s in scales:
        space *= len(s)
    if space > budget:
        raise OracleBudgetExceeded(budget, space)

    base = task.base_candidate(model)
    gaps = _completeness_gaps(model, base.with_constants(dict.fromkeys(out_names, 0)))
    gaps = [g for g in gaps if g not in out_names]
    if gaps:
        raise IncompleteCandidate(
            f"task {task.name}: formulas reference unbound level-1 symbol(s): {', '.join(gaps)}"
        )

    cache: dict = {}
    kept: list[Candidate] = []
    for combo in itertools.product(*(s.values for s in scales)):
        candidate = base.with_constants(dict(zip(out_names, combo)))
        if _passes_def5(model, candidate, cache):
            kept.append(candidate)
    chosen = apply_criterion(kept, task.criterion, model)
    return make_solution_set(model, task.outputs, chosen)
