"""Sort and order checking for parsed formulas.

Annotation sorts:
    ("scale", name)    value on a named scale
    ("numeric", None)  scale-polymorphic exact number (literals, arithmetic)
    ("symbols", j)     reified layer-j symbol

Scale-typed operands compare only within their own scale; plain numerics
compare against any numeric scale. Higher-order variable applications are
annotated with their finite ranges so assignment enumeration is direct.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

from .errors import (
    NonNumericComparison,
    OrderExceedsModel,
    SortMismatch,
    TypecheckFailed,
)
from .formulas import (
    And,
    Arith,
    Atom,
    Compare,
    Formula,
    Implies,
    Lit,
    Not,
    Or,
    SymApp,
    SymbolRef,
    Term,
    VarApp,
    free_variables,
    render_formula,
    render_term,
)
from .model import (
    KIND_CONST,
    KIND_FUNC,
    KIND_PRED,
    DomainModel,
    ScaleRef,
    SymbolsOfLayer,
    VariableDecl,
)
from .values import SymRef, Value

Sort = tuple[str, object]


@dataclass(frozen=True)
class TypedFormula:
    """A checked formula plus node annotations and variable ranges."""

    formula: Formula
    free: tuple[VariableDecl, ...]
    sorts: Mapping[int, Sort] = field(compare=False, repr=False)
    ranges: Mapping[str, tuple[Value, ...]] = field(compare=False, repr=False)

    @property
    def text(self) -> str:
        return render_formula(self.formula)


@dataclass(frozen=True)
class TypedTerm:
    """A checked bare term (optimization objectives)."""

    term: Term
    free: tuple[VariableDecl, ...]
    sorts: Mapping[int, Sort] = field(compare=False, repr=False)
    ranges: Mapping[str, tuple[Value, ...]] = field(compare=False, repr=False)

    @property
    def text(self) -> str:
        return render_term(self.term)


class _Checker:
    def __init__(self, model: DomainModel):
        self.model = model
        self.sorts: dict[int, Sort] = {}

    # --- terms -----------------------------------------------------------------

    def term(self, node: Term, expected: Optional[Sort]) -> Sort:
        sort = self._term(node, expected)
        self.sorts[id(node)] = sort
        if expected is not None and not self._fits(sort, expected):
            raise SortMismatch(
                f"{render_term(node)}: expected {self._show(expected)}, found {self._show(sort)}"
            )
        return sort

    def _term(self, node: Term, expected: Optional[Sort]) -> Sort:
        if isinstance(node, Lit):
            if isinstance(node.value, str):
                return self._enum_literal(node, expected)
            return ("numeric", None)
        if isinstance(node, SymbolRef):
            decl = self.model.symbol(node.symbol)
            if decl is None:
                raise TypecheckFailed(f"undeclared symbol {node.symbol}")
            return ("symbols", decl.layer)
        if isinstance(node, SymApp):
            return self._symapp(node)
        if isinstance(node, VarApp):
            return self._varapp(node, expected)
        if isinstance(node, Arith):
            for child in (node.left, node.right):
                s = self.term(child, None)
                if s[0] == "scale" and not self.model.scale_system[s[1]].is_numeric:
                    raise SortMismatch(
                        f"arithmetic on non-numeric scale {s[1]} in {render_term(node)}"
                    )
                if s[0] == "symbols":
                    raise SortMismatch(f"arithmetic on reified symbols in {render_term(node)}")
            return ("numeric", None)
        raise TypecheckFailed(f"not a term: {node!r}")

    def _enum_literal(self, node: Lit, expected: Optional[Sort]) -> Sort:
        if expected is not None and expected[0] == "scale":
            scale = self.model.scale_system[expected[1]]
            if node.value not in scale:
                raise SortMismatch(f"value {node.value} not on scale {scale.name}")
            return ("scale", scale.name)
        candidates = self.model.scale_system.enum_value_scales(node.value)
        if len(candidates) == 1:
            return ("scale", candidates[0].name)
        if not candidates:
            raise SortMismatch(f"value {node.value} on no declared scale")
        raise SortMismatch(
            f"value {node.value} is ambiguous across scales "
            f"{[s.name for s in candidates]}; no context fixes it"
        )

    def _symapp(self, node: SymApp) -> Sort:
        decl = self.model.symbol(node.symbol)
        if decl is None:
            raise TypecheckFailed(f"undeclared symbol {node.symbol}")
        if decl.kind == KIND_PRED:
            raise SortMismatch(f"predicate {node.symbol} used as a term")
        if decl.kind == KIND_FUNC and len(node.args) != decl.arity():
            raise TypecheckFailed(
                f"{node.symbol} expects {decl.arity()} argument(s), got {len(node.args)}"
            )
        for arg, ref in zip(node.args, decl.args):
            self.term(arg, self._ref_sort(ref))
        return self._ref_sort(decl.result)

    def _varapp(self, node: VarApp, expected: Optional[Sort]) -> Sort:
        var = self.model.variables.get(node.var)
        if var is None:
            raise TypecheckFailed(f"undeclared variable {node.var}")
        if var.order > self.model.order:
            raise OrderExceedsModel(
                f"variable {var.name} has order {var.order}, model order is {self.model.order}"
            )
        if var.order == 1:
            return ("scale", var.scale)
        shape = var.shape
        if node.args:
            if shape.kind == KIND_PRED:
                raise SortMismatch(
                    f"predicate-shaped variable {var.name} applied in term position"
                )
            if shape.kind == KIND_CONST:
                raise SortMismatch(f"constant-shaped variable {var.name} takes no arguments")
            for arg, scale in zip(node.args, shape.args):
                self.term(arg, ("scale", scale))
            return ("scale", shape.result)
        # bare mention: reified in symbol-domain context, value otherwise
        if expected is not None and expected[0] == "symbols":
            return ("symbols", var.order)
        if shape.kind == KIND_CONST:
            return ("scale", shape.result)
        return ("symbols", var.order)

    def _ref_sort(self, ref) -> Sort:
        if isinstance(ref, ScaleRef):
            return ("scale", ref.scale)
        if isinstance(ref, SymbolsOfLayer):
            return ("symbols", ref.layer)
        raise TypecheckFailed(f"bad carrier reference {ref!r}")

    @staticmethod
    def _fits(sort: Sort, expected: Sort) -> bool:
        if sort == expected:
            return True
        # numbers flow onto numeric scales; checked against the grid at runtime
        if sort[0] == "numeric" and expected[0] == "scale":
            return True
        return False

    def _show(self, sort: Sort) -> str:
        return sort[1] if sort[0] == "scale" else (
            f"symbols({sort[1]})" if sort[0] == "symbols" else "a number"
        )

    # --- formulas ----------------------------------------------------------------

    def formula(self, node: Formula) -> None:
        if isinstance(node, Atom):
            self._atom(node)
        elif isinstance(node, Compare):
            self._compare(node)
        elif isinstance(node, Not):
            self.formula(node.sub)
        elif isinstance(node, (And, Or, Implies)):
            self.formula(node.left)
            self.formula(node.right)
        else:
            raise TypecheckFailed(f"not a formula: {node!r}")

    def _atom(self, node: Atom) -> None:
        app = node.app
        if isinstance(app, SymApp):
            decl = self.model.symbol(app.symbol)
            if decl is None:
                raise TypecheckFailed(f"undeclared symbol {app.symbol}")
            if decl.kind != KIND_PRED:
                raise SortMismatch(f"{app.symbol} is not a predicate")
            if len(app.args) != decl.arity():
                raise TypecheckFailed(
                    f"{app.symbol} expects {decl.arity()} argument(s), got {len(app.args)}"
                )
            for arg, ref in zip(app.args, decl.args):
                self.term(arg, self._ref_sort(ref))
            return
        if isinstance(app, VarApp):
            var = self.model.variables.get(app.var)
            if var is None:
                raise TypecheckFailed(f"undeclared variable {app.var}")
            if var.order > self.model.order:
                raise OrderExceedsModel(
                    f"variable {var.name} has order {var.order}, "
                    f"model order is {self.model.order}"
                )
            if var.order == 1 or var.shape.kind != KIND_PRED:
                raise SortMismatch(f"variable {app.var} is not predicate-shaped")
            if len(app.args) != len(var.shape.args):
                raise TypecheckFailed(
                    f"variable {app.var} expects {len(var.shape.args)} argument(s), "
                    f"got {len(app.args)}"
                )
            for arg, scale in zip(app.args, var.shape.args):
                self.term(arg, ("scale", scale))
            return
        raise TypecheckFailed(f"atom over a non-application: {app!r}")

    def _compare(self, node: Compare) -> None:
        left, right = node.left, node.right
        # resolve the side with intrinsic sort first so literals get context
        if isinstance(left, Lit) and not isinstance(right, Lit):
            rs = self.term(right, None)
            ls = self.term(left, rs if rs[0] == "scale" else None)
        else:
            ls = self.term(left, None)
            rs = self.term(right, ls if ls[0] == "scale" else None)
        self._compatible(node, ls, rs)
        if node.relop in ("<", "<=", ">", ">="):
            for s in (ls, rs):
                if s[0] == "symbols":
                    raise NonNumericComparison(
                        f"{render_formula(node)}: ordered comparison over reified symbols"
                    )
                if s[0] == "scale" and not self.model.scale_system[s[1]].is_numeric:
                    raise NonNumericComparison(
                        f"{render_formula(node)}: scale {s[1]} is not numeric"
                    )

    def _compatible(self, node: Compare, ls: Sort, rs: Sort) -> None:
        if ls[0] == "symbols" or rs[0] == "symbols":
            if ls != rs:
                raise SortMismatch(
                    f"{render_formula(node)}: {self._show(ls)} vs {self._show(rs)}"
                )
            return
        if ls[0] == "scale" and rs[0] == "scale" and ls[1] != rs[1]:
            raise SortMismatch(f"{render_formula(node)}: {ls[1]} vs {rs[1]}")
        if ls[0] == "numeric" and rs[0] == "scale":
            if not self.model.scale_system[rs[1]].is_numeric:
                raise SortMismatch(f"{render_formula(node)}: number vs {rs[1]}")
        if rs[0] == "numeric" and ls[0] == "scale":
            if not self.model.scale_system[ls[1]].is_numeric:
                raise SortMismatch(f"{render_formula(node)}: {ls[1]} vs number")


def variable_range(model: DomainModel, var: VariableDecl) -> tuple[Value, ...]:
    """The finite range a variable quantifies over, in canonical order."""
    if var.order == 1:
        return tuple(model.scale_system[var.scale].values)
    if var.order > model.order:
        raise OrderExceedsModel(
            f"variable {var.name} has order {var.order}, model order is {model.order}"
        )
    return tuple(SymRef(d.name) for d in model.shape_matches(var.shape, var.order))


def _collect(model: DomainModel, node, checker: _Checker):
    names = free_variables(node)
    decls = []
    ranges: dict[str, tuple[Value, ...]] = {}
    for name in names:
        var = model.variables.get(name)
        if var is None:
            raise TypecheckFailed(f"undeclared variable {name}")
        decls.append(var)
        ranges[name] = variable_range(model, var)
    return tuple(decls), ranges


def check_formula(f: Formula, model: DomainModel) -> TypedFormula:
    """Check sorts and orders; annotate nodes and variable ranges."""
    checker = _Checker(model)
    checker.formula(f)
    decls, ranges = _collect(model, f, checker)
    return TypedFormula(f, decls, checker.sorts, ranges)


def check_term(t: Term, model: DomainModel) -> TypedTerm:
    checker = _Checker(model)
    checker.term(t, None)
    decls, ranges = _collect(model, t, checker)
    return TypedTerm(t, decls, checker.sorts, ranges)
