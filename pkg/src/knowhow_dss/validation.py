"""Pertinency, completeness, and consistency diagnostics.

Errors block fact-base updates and model replacement; warnings are
informational. Diagnostics are deterministic, ordered by (code, location),
and serialize to one CODE<tab>location<tab>message line each.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import OracleBudgetExceeded
from .formulas import referenced_symbols, render_formula
from .model import (
    KIND_CONST,
    KIND_FUNC,
    KIND_PRED,
    DomainModel,
    ScaleRef,
    SymbolsOfLayer,
)
from .semantics import (
    DEFAULT_ORACLE_BUDGET,
    TRUE,
    Candidate,
    Evaluator,
    TaskSpec,
    _first_failure,
    _formula_assignments,
    enumerate_assignments,
)
from .values import SymRef, render_value

ERROR = "error"
WARNING = "warning"


@dataclass(frozen=True)
class Diagnostic:
    code: str       # E-SCALE | E-UNDECL | E-INCONS | E-NOSOL | W-UNUSED | W-UNCONVERTIBLE
    severity: str   # error | warning
    location: str
    message: str
    witness: Optional[str] = None

    def render(self) -> str:
        return f"{self.code}\t{self.location}\t{self.message}"

    def to_dict(self) -> dict:
        return {
            "code": self.code,
            "severity": self.severity,
            "location": self.location,
            "message": self.message,
            "witness": self.witness,
        }


def _sorted(diags: list[Diagnostic]) -> list[Diagnostic]:
    return sorted(diags, key=lambda d: (d.code, d.location, d.message))


def render_report(diags: Sequence[Diagnostic]) -> str:
    return "\n".join(d.render() for d in diags)


def has_errors(diags: Sequence[Diagnostic]) -> bool:
    return any(d.severity == ERROR for d in diags)


# --- pertinency -----------------------------------------------------------------

def validate_pertinency(model: DomainModel) -> list[Diagnostic]:
    """E-SCALE for every fact tuple holding an off-carrier value."""
    out: list[Diagnostic] = []

    def check_value(sym: str, ref, value, where: str) -> Optional[Diagnostic]:
        if isinstance(ref, ScaleRef):
            if ref.scale not in model.scale_system:
                return Diagnostic(
                    "E-SCALE", ERROR, sym,
                    f"fact cites scale {ref.scale}, which is not declared",
                    witness=where,
                )
            if isinstance(value, SymRef) or value not in model.scale_system[ref.scale]:
                return Diagnostic(
                    "E-SCALE", ERROR, sym,
                    f"value {render_value(value)} not on scale {ref.scale}",
                    witness=where,
                )
            return None
        if not isinstance(value, SymRef) or (
            (decl := model.symbol(value.name)) is None or decl.layer != ref.layer
        ):
            return Diagnostic(
                "E-SCALE", ERROR, sym,
                f"value {render_value(value)} is not a layer-{ref.layer} symbol",
                witness=where,
            )
        return None

    for level, fa in model.facts.items():
        for interp in fa.interpretations.values():
            decl = model.symbol(interp.symbol)
            if decl is None:
                continue  # completeness reports E-UNDECL
            rows: list[tuple[tuple, Optional[object]]] = []
            if decl.kind == KIND_FUNC:
                rows = [(args, value) for args, value in interp.table.items()]
            elif decl.kind == KIND_PRED:
                rows = [(args, None) for args in interp.tuples]
            elif interp.constant is not None:
                rows = [((), interp.constant)]
            for args, value in sorted(rows, key=repr):
                where = f"{interp.symbol}({', '.join(render_value(a) for a in args)})"
                if len(args) != len(decl.args):
                    out.append(Diagnostic(
                        "E-SCALE", ERROR, interp.symbol,
                        f"tuple arity {len(args)}, declared {len(decl.args)}",
                        witness=where,
                    ))
                    continue
                for a, ref in zip(args, decl.args):
                    d = check_value(interp.symbol, ref, a, where)
                    if d:
                        out.append(d)
                if value is not None and decl.result is not None:
                    d = check_value(interp.symbol, decl.result, value, where)
                    if d:
                        out.append(d)
    return _sorted(out)


# --- completeness ----------------------------------------------------------------

def validate_completeness(model: DomainModel) -> list[Diagnostic]:
    """E-UNDECL for dangling references, W-UNUSED / W-UNCONVERTIBLE advisories."""
    from .solver import _strip_implications

    out: list[Diagnostic] = []
    declared = {d.name for d in model.symbols()}

    for f in model.formulas:
        text = render_formula(f)
        for name in referenced_symbols(f):
            if name not in declared:
                out.append(Diagnostic(
                    "E-UNDECL", ERROR, text, f"formula names undeclared symbol {name}"
                ))
        from .formulas import free_variables

        for var in free_variables(f):
            if var not in model.variables:
                out.append(Diagnostic(
                    "E-UNDECL", ERROR, text, f"formula names undeclared variable {var}"
                ))

    for level, fa in model.facts.items():
        for name in fa.interpretations:
            if name not in declared:
                out.append(Diagnostic(
                    "E-UNDECL", ERROR, name, f"facts at level {level} for undeclared symbol"
                ))

    for decl in model.symbols():
        for ref in decl.args + ((decl.result,) if decl.result else ()):
            if isinstance(ref, ScaleRef) and ref.scale not in model.scale_system:
                out.append(Diagnostic(
                    "E-UNDECL", ERROR, decl.name, f"declaration cites missing scale {ref.scale}"
                ))

    mentioned: set[str] = set()
    for f in model.formulas:
        mentioned.update(referenced_symbols(f))
    for decl in model.layer(1).symbols:
        if decl.name not in mentioned:
            out.append(Diagnostic(
                "W-UNUSED", WARNING, decl.name, "level-1 symbol appears in no formula"
            ))

    # a formula is convertible if SOME task (binding the rest as inputs) lets
    # the solver orient its consequent into a rule
    sigma1 = {d.name for d in model.sigma1_constants()}
    for typed in model.typed_formulas:
        _, consequent = _strip_implications(typed.formula)
        reason = _unconvertible_reason(model, consequent, sigma1)
        if reason:
            out.append(Diagnostic(
                "W-UNCONVERTIBLE", WARNING, typed.text,
                f"usable only as a check constraint: {reason}",
            ))
    return _sorted(out)


def _unconvertible_reason(model: DomainModel, consequent, sigma1: set[str]) -> Optional[str]:
    from .formulas import Atom, Compare, SymApp
    from .solver import _bare_constant, _mentions

    if isinstance(consequent, Compare) and consequent.relop == "=":
        left = _bare_constant(consequent.left, sigma1)
        right = _bare_constant(consequent.right, sigma1)
        if (left and not _mentions(consequent.right, left)) or (
            right and not _mentions(consequent.left, right)
        ):
            return None
        return "equation isolates no level-1 constant"
    if isinstance(consequent, Atom):
        app = consequent.app
        if isinstance(app, SymApp):
            decl = model.symbol(app.symbol)
            if decl is not None and decl.layer == 1:
                return "level-1 predicate consequents are not derivable"
            if decl is not None and decl.layer == 0:
                return "level-0 predicate consequents carry no stored facts"
        if any(_bare_constant(a, sigma1) for a in app.args):
            return None
        return "predicate consequent mentions no level-1 constant"
    return "no implication head (check-only constraint)"


# --- consistency -------------------------------------------------------------------

def validate_consistency(
    model: DomainModel,
    probe: TaskSpec,
    budget: int = DEFAULT_ORACLE_BUDGET,
) -> list[Diagnostic]:
    """Oracle-backed satisfiability check for one probe task.

    E-INCONS: a formula false (never true) under every assignment regardless
    of any candidate. E-NOSOL: the probe's definitional solution set is
    empty; one diagnostic per first-falsified formula with a witness.
    """
    out: list[Diagnostic] = []

    empty = Candidate()
    for typed in model.typed_formulas:
        refs = [model.symbol(n) for n in referenced_symbols(typed.formula)]
        if any(d is not None and d.layer <= 1 for d in refs):
            continue
        assignments = _formula_assignments(model, typed)
        ev = Evaluator(model, typed.sorts, empty, {})
        satisfiable = False
        first_witness = None
        for a in assignments:
            ev.assignment = a
            tv = ev.formula(typed.formula)
            if tv is TRUE:
                satisfiable = True
                break
            if first_witness is None:
                first_witness = _render_assignment(a)
        if not satisfiable:
            out.append(Diagnostic(
                "E-INCONS", ERROR, typed.text,
                "false under every assignment, independent of any candidate",
                witness=first_witness or "(no variables)",
            ))

    probe.validate(model)
    out_names = sorted(probe.outputs)
    scales = []
    space = 1
    for name in out_names:
        scale = model.scale_of_ref(model.symbol(name).result)
        if scale is None:
            space = 0
            break
        scales.append(scale)
        space *= len(scale)
    if space > budget:
        raise OracleBudgetExceeded(budget, space)

    base = probe.base_candidate(model)
    cache: dict = {}
    any_solution = False
    rejections: dict[int, tuple[str, str]] = {}
    if space:
        for combo in itertools.product(*(s.values for s in scales)):
            candidate = base.with_constants(dict(zip(out_names, combo)))
            failure = _first_failure(model, candidate, cache)
            if failure is None:
                any_solution = True
                break
            index, assignment, _ = failure
            if index not in rejections:
                cand_text = ", ".join(
                    f"{n}={render_value(v)}" for n, v in zip(out_names, combo)
                )
                rejections[index] = (_render_assignment(assignment), cand_text)
    if not any_solution:
        for index in sorted(rejections):
            typed = model.typed_formulas[index]
            assignment_text, cand_text = rejections[index]
            out.append(Diagnostic(
                "E-NOSOL", ERROR, typed.text,
                f"probe {probe.name}: no candidate satisfies the formula set",
                witness=f"candidate {{{cand_text}}} under {assignment_text}",
            ))
        if not rejections:
            out.append(Diagnostic(
                "E-NOSOL", ERROR, probe.name,
                "probe has an empty candidate space",
                witness="(no enumerable outputs)",
            ))
    return _sorted(out)


def _render_assignment(a: dict) -> str:
    if not a:
        return "(no variables)"
    return ", ".join(f"{k} := {render_value(v)}" for k, v in sorted(a.items()))


def validate_model(model: DomainModel, probe: Optional[TaskSpec] = None,
                   budget: int = DEFAULT_ORACLE_BUDGET) -> list[Diagnostic]:
    """The full triad; consistency runs only when a probe task is given."""
    out = validate_pertinency(model) + validate_completeness(model)
    if probe is not None:
        out += validate_consistency(model, probe, budget)
    return _sorted(out)
