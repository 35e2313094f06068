"""Experimental know-how tables and their compilation into the model.

A table with result columns compiles to one level-2 function symbol per
result column (`kh_<id>_<col>`), one fact per row per column, a class
membership fact, and (once per class/target) a bridge formula with an
order-2 variable:

    <class>(v^2) -> v^2(<condition constants...>) = <target constant>

A table with no result columns is relational know-how (admissible
combinations): it compiles to a single level-2 predicate `kh_<id>` holding
the rows as tuples, with the membership-gated bridge

    <class>(p^2) -> p^2(<condition constants...>)

Rows are keyed uniquely: by the condition values when result columns exist,
by the whole row otherwise.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, replace
from decimal import Decimal, InvalidOperation
from typing import Mapping, Optional, Sequence

from .errors import (
    AmbiguousColumnBinding,
    ClassShapeConflict,
    DuplicateTableId,
    NameClash,
    ParseError,
    PertinencyFailed,
    ScaleMismatch,
    UnboundResultColumn,
)
from .formulas import Atom, Compare, Formula, Implies, SymApp, VarApp, render_formula
from .model import (
    KIND_CONST,
    KIND_FUNC,
    KIND_PRED,
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
)
from .scales import EnumValues, Scale, ScaleSystem, define_scale
from .values import SymRef, Value, render_value


# --- tables ---------------------------------------------------------------------

@dataclass(frozen=True)
class KnowHowTable:
    """One know-how table: condition columns, result columns, typed rows."""

    id: str
    title: str
    conditions: tuple[tuple[str, str], ...]  # (column name, scale name)
    results: tuple[tuple[str, str], ...]
    rows: tuple[tuple[Value, ...], ...]      # condition values then result values
    usage_note: str = ""
    provenance: str = ""

    @property
    def relational(self) -> bool:
        return not self.results

    def key_width(self) -> int:
        return len(self.conditions) if self.results else len(self.conditions)

    def condition_values(self, row: tuple) -> tuple:
        return row[: len(self.conditions)]


def make_table(
    table_id: str,
    title: str,
    conditions: Sequence[tuple[str, str]],
    results: Sequence[tuple[str, str]],
    rows: Sequence[Sequence[Value]],
    scales: ScaleSystem,
    usage_note: str = "",
    provenance: str = "",
) -> KnowHowTable:
    """Validate values against their column scales and key uniqueness."""
    conditions = tuple(conditions)
    results = tuple(results)
    width = len(conditions) + len(results)
    typed_rows: list[tuple[Value, ...]] = []
    seen_keys: set[tuple] = set()
    for row in rows:
        if len(row) != width:
            raise ScaleMismatch(
                f"table {table_id}: row {tuple(row)!r} has {len(row)} values, "
                f"columns declare {width}"
            )
        typed: list[Value] = []
        for value, (col, scale_name) in zip(row, conditions + results):
            scale = scales[scale_name]
            if value not in scale:
                raise ScaleMismatch(
                    f"table {table_id}: {col} value {value!r} not on scale {scale_name}"
                )
            typed.append(scale.values[scale.index_of(value)])
        key = tuple(typed[: len(conditions)]) if results else tuple(typed)
        if key in seen_keys:
            raise ScaleMismatch(f"table {table_id}: duplicate row key {key!r}")
        seen_keys.add(key)
        typed_rows.append(tuple(typed))
    return KnowHowTable(
        table_id, title, conditions, results, tuple(typed_rows), usage_note, provenance
    )


# --- table file format (.kht) ------------------------------------------------------

_HEADER_RE = re.compile(r"^table\s+(\w+)\s*\{$")
_QUOTED_RE = re.compile(r"^(title|usage|provenance)\s+\"(.*)\"$")
_COLUMN_RE = re.compile(r"^(condition|result)\s+(\w+)\s*:\s*(\w+)$")


def parse_knowhow_table(text: str, scales: ScaleSystem) -> KnowHowTable:
    """Parse one `.kht` document; round-trips with serialize_knowhow_table."""
    table_id = None
    title = usage = provenance = ""
    conditions: list[tuple[str, str]] = []
    results: list[tuple[str, str]] = []
    raw_rows: list[tuple[int, list[str]]] = []
    closed = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip() if '"' not in raw else raw.rstrip()
        line = line.strip()
        if not line:
            continue
        if table_id is None:
            m = _HEADER_RE.match(line)
            if not m:
                raise ParseError(lineno, f"expected 'table <id> {{', got {line!r}")
            table_id = m.group(1)
            continue
        if line == "}":
            closed = True
            continue
        if closed:
            raise ParseError(lineno, f"content after closing brace: {line!r}")
        m = _QUOTED_RE.match(line)
        if m:
            key, value = m.groups()
            if key == "title":
                title = value
            elif key == "usage":
                usage = value
            else:
                provenance = value
            continue
        m = _COLUMN_RE.match(line)
        if m:
            role, col, scale = m.groups()
            (conditions if role == "condition" else results).append((col, scale))
            continue
        if line.startswith("row "):
            raw_rows.append((lineno, [v.strip() for v in line[4:].split(",")]))
            continue
        raise ParseError(lineno, f"unexpected line in table: {line!r}")
    if table_id is None:
        raise ParseError(0, "empty table document")
    if not closed:
        raise ParseError(len(text.splitlines()), "missing closing '}'")

    columns = conditions + results
    rows: list[list[Value]] = []
    for lineno, tokens in raw_rows:
        if len(tokens) != len(columns):
            raise ParseError(
                lineno, f"row has {len(tokens)} values, columns declare {len(columns)}"
            )
        row: list[Value] = []
        for token, (col, scale_name) in zip(tokens, columns):
            scale = scales[scale_name]
            try:
                if scale.kind == "enum":
                    row.append(token)
                elif scale.kind == "int":
                    row.append(int(token))
                else:
                    row.append(Decimal(token).normalize())
            except (ValueError, InvalidOperation) as err:
                raise ParseError(lineno, f"column {col}: bad value {token!r}") from err
        rows.append(row)
    return make_table(table_id, title, conditions, results, rows, scales, usage, provenance)


def serialize_knowhow_table(table: KnowHowTable) -> str:
    out = [f"table {table.id} {{"]
    out.append(f'  title "{table.title}"')
    if table.usage_note:
        out.append(f'  usage "{table.usage_note}"')
    if table.provenance:
        out.append(f'  provenance "{table.provenance}"')
    for col, scale in table.conditions:
        out.append(f"  condition {col} : {scale}")
    for col, scale in table.results:
        out.append(f"  result {col} : {scale}")
    for row in table.rows:
        out.append("  row " + ", ".join(render_value(v) for v in row))
    out.append("}")
    return "\n".join(out) + "\n"


# --- model deltas ---------------------------------------------------------------------

@dataclass(frozen=True)
class ModelDelta:
    """Additions produced by know-how compilation or feedback ingestion.

    Applying a delta either yields a fully valid model or fails atomically.
    """

    new_scales: tuple[Scale, ...] = ()
    new_symbols: tuple[SymbolDecl, ...] = ()
    new_variables: tuple[VariableDecl, ...] = ()
    new_facts: tuple[Interpretation, ...] = ()   # all at level 2
    new_formulas: tuple[Formula, ...] = ()

    def summary(self) -> dict:
        fact_rows = 0
        for interp in self.new_facts:
            fact_rows += (
                len(interp.table) + len(interp.tuples) + (1 if interp.constant is not None else 0)
            )
        return {
            "scales": len(self.new_scales),
            "symbols": len(self.new_symbols),
            "variables": len(self.new_variables),
            "facts": fact_rows,
            "formulas": [render_formula(f) for f in self.new_formulas],
        }


def _bridge_var_name(classname: str, target: Optional[str]) -> str:
    return f"kh_var_{classname}_{target}" if target else f"kh_var_{classname}"


def _resolve_condition_constants(
    model: DomainModel,
    table: KnowHowTable,
    binding: Mapping[str, str],
) -> list[str]:
    """Map each condition column to a level-1 constant of the same scale."""
    out: list[str] = []
    sigma1 = model.sigma1_constants()
    for col, scale_name in table.conditions:
        if col in binding:
            decl = model.symbol(binding[col])
            if decl is None or decl.layer != 1 or decl.kind != KIND_CONST:
                raise AmbiguousColumnBinding(
                    f"condition column {col}: {binding[col]!r} is not a level-1 constant"
                )
            if not (isinstance(decl.result, ScaleRef) and decl.result.scale == scale_name):
                raise ScaleMismatch(
                    f"condition column {col} is on {scale_name}, "
                    f"but {decl.name} is on {decl.result}"
                )
            out.append(decl.name)
            continue
        matches = [
            d.name for d in sigma1
            if isinstance(d.result, ScaleRef) and d.result.scale == scale_name
        ]
        if len(matches) != 1:
            raise AmbiguousColumnBinding(
                f"condition column {col} (scale {scale_name}): "
                f"{'no' if not matches else 'several'} level-1 constants match; "
                f"bind it explicitly"
            )
        out.append(matches[0])
    return out


def compile_knowhow(
    model: DomainModel,
    table: KnowHowTable,
    binding: Mapping[str, str],
    classname: str,
) -> ModelDelta:
    """Compile one table into level-2 symbols, facts, and bridge formulas."""
    cond_scales = tuple(ScaleRef(s) for _, s in table.conditions)
    symbol_names = (
        [f"kh_{table.id}_{col}" for col, _ in table.results]
        if table.results
        else [f"kh_{table.id}"]
    )
    for name in symbol_names:
        if model.symbol(name) is not None:
            raise DuplicateTableId(f"symbol {name} already declared (table id {table.id})")

    new_symbols: list[SymbolDecl] = []
    new_facts: list[Interpretation] = []
    new_formulas: list[Formula] = []
    new_variables: list[VariableDecl] = []

    class_decl = model.symbol(classname)
    if class_decl is None:
        new_symbols.append(
            SymbolDecl(classname, 2, KIND_PRED, (SymbolsOfLayer(2),))
        )
    elif not (
        class_decl.layer == 2
        and class_decl.kind == KIND_PRED
        and class_decl.args == (SymbolsOfLayer(2),)
    ):
        raise NameClash(f"{classname} exists and is not a level-2 class over symbols(2)")

    cond_constants = _resolve_condition_constants(model, table, binding)
    class_tuples: set[tuple] = set()
    existing_formula_texts = {render_formula(f) for f in model.formulas}

    if table.relational:
        sym = symbol_names[0]
        new_symbols.append(SymbolDecl(sym, 2, KIND_PRED, cond_scales))
        new_facts.append(Interpretation(sym, KIND_PRED, tuples=frozenset(table.rows)))
        class_tuples.add((SymRef(sym),))
        shape = SymbolShape(KIND_PRED, tuple(s for _, s in table.conditions))
        var_name = _bridge_var_name(classname, None)
        _check_class_shape(model, new_variables, classname, shape, None)
        bridge = Implies(
            Atom(SymApp(classname, (VarApp(var_name, 2),))),
            Atom(VarApp(var_name, 2, tuple(SymApp(c) for c in cond_constants))),
        )
        _add_bridge(model, bridge, var_name, 2, shape, new_formulas, new_variables,
                    existing_formula_texts)
    else:
        for col_index, (col, result_scale) in enumerate(table.results):
            if col not in binding:
                raise UnboundResultColumn(f"result column {col} has no target binding")
            target = binding[col]
            target_decl = model.symbol(target)
            if target_decl is None or target_decl.layer != 1 or target_decl.kind != KIND_CONST:
                raise UnboundResultColumn(
                    f"result column {col}: target {target!r} is not a level-1 constant"
                )
            if not (
                isinstance(target_decl.result, ScaleRef)
                and target_decl.result.scale == result_scale
            ):
                raise ScaleMismatch(
                    f"result column {col} is on {result_scale}, "
                    f"target {target} is on {target_decl.result}"
                )
            sym = f"kh_{table.id}_{col}"
            new_symbols.append(
                SymbolDecl(sym, 2, KIND_FUNC, cond_scales, ScaleRef(result_scale))
            )
            rows = {
                table.condition_values(row): row[len(table.conditions) + col_index]
                for row in table.rows
            }
            new_facts.append(Interpretation(sym, KIND_FUNC, table=rows))
            class_tuples.add((SymRef(sym),))
            shape = SymbolShape(KIND_FUNC, tuple(s for _, s in table.conditions), result_scale)
            var_name = _bridge_var_name(classname, target)
            _check_class_shape(model, new_variables, classname, shape, target)
            bridge = Implies(
                Atom(SymApp(classname, (VarApp(var_name, 2),))),
                Compare(
                    "=",
                    VarApp(var_name, 2, tuple(SymApp(c) for c in cond_constants)),
                    SymApp(target),
                ),
            )
            _add_bridge(model, bridge, var_name, 2, shape, new_formulas, new_variables,
                        existing_formula_texts)

    new_facts.append(Interpretation(classname, KIND_PRED, tuples=frozenset(class_tuples)))
    return ModelDelta(
        new_symbols=tuple(new_symbols),
        new_variables=tuple(new_variables),
        new_facts=tuple(new_facts),
        new_formulas=tuple(new_formulas),
    )


def _check_class_shape(model: DomainModel, pending: list[VariableDecl],
                       classname: str, shape: SymbolShape, target: Optional[str]) -> None:
    """One class + one member shape must bridge to at most one target."""
    prefix = f"kh_var_{classname}"
    candidates = [
        v for v in list(model.variables.values()) + pending
        if (v.name == prefix or v.name.startswith(prefix + "_")) and v.shape == shape
    ]
    expected = _bridge_var_name(classname, target)
    for v in candidates:
        if v.name != expected:
            raise ClassShapeConflict(
                f"class {classname} already bridges shape {shape} via {v.name}; "
                f"a second target would force contradictory recommendations"
            )


def _add_bridge(model, bridge, var_name, order, shape, new_formulas, new_variables,
                existing_texts) -> None:
    text = render_formula(bridge)
    if text in existing_texts or any(render_formula(f) == text for f in new_formulas):
        return
    new_formulas.append(bridge)
    if var_name not in model.variables and all(v.name != var_name for v in new_variables):
        new_variables.append(VariableDecl(var_name, order, shape=shape))


# --- applying deltas ----------------------------------------------------------------

def add_facts(model: DomainModel, delta: ModelDelta) -> DomainModel:
    """Return a new model with the delta applied; the old model is untouched."""
    scales = dict(model.scale_system.scales)
    for s in delta.new_scales:
        existing = scales.get(s.name)
        if existing is not None:
            if existing != s:
                raise NameClash(f"scale {s.name} already exists with a different definition")
            continue
        scales[s.name] = s

    layer_symbols: dict[int, list[SymbolDecl]] = {
        layer.level: list(layer.symbols) for layer in model.layers
    }
    for decl in delta.new_symbols:
        if model.symbol(decl.name) is not None:
            raise NameClash(f"symbol {decl.name} already declared")
        if decl.layer not in layer_symbols:
            raise PertinencyFailed(
                f"symbol {decl.name} targets layer {decl.layer}, model order is {model.order}"
            )
        layer_symbols[decl.layer].append(decl)
    layers = [SignatureLayer(level, layer_symbols[level]) for level in sorted(layer_symbols)]

    merged: dict[int, dict[str, Interpretation]] = {
        level: dict(fa.interpretations) for level, fa in model.facts.items()
    }
    merged.setdefault(2, {})
    decl_lookup = {d.name: d for syms in layer_symbols.values() for d in syms}
    for interp in delta.new_facts:
        decl = decl_lookup.get(interp.symbol)
        if decl is None:
            raise PertinencyFailed(f"facts for undeclared symbol {interp.symbol}")
        bucket = merged.setdefault(decl.layer, {})
        current = bucket.get(interp.symbol)
        if current is None:
            bucket[interp.symbol] = interp
            continue
        if decl.kind == KIND_FUNC:
            table = dict(current.table)
            for args, value in interp.table.items():
                if args in table and table[args] != value:
                    raise PertinencyFailed(
                        f"{interp.symbol}{args}: stored {table[args]!r}, delta {value!r}"
                    )
                table[args] = value
            bucket[interp.symbol] = replace(current, table=table)
        elif decl.kind == KIND_PRED:
            bucket[interp.symbol] = replace(
                current, tuples=current.tuples | interp.tuples
            )
        else:
            if current.constant != interp.constant:
                raise PertinencyFailed(
                    f"constant {interp.symbol}: stored {current.constant!r}, "
                    f"delta {interp.constant!r}"
                )

    variables = dict(model.variables)
    for v in delta.new_variables:
        existing = variables.get(v.name)
        if existing is not None:
            if existing != v:
                raise NameClash(f"variable {v.name} already declared differently")
            continue
        variables[v.name] = v

    texts = {render_formula(f) for f in model.formulas}
    formulas = list(model.formulas)
    for f in delta.new_formulas:
        if render_formula(f) not in texts:
            formulas.append(f)
            texts.add(render_formula(f))

    return assemble_model(
        ScaleSystem(scales.values()),
        layers,
        [FactAlgebra(level, interps.values()) for level, interps in merged.items() if interps],
        formulas,
        variables.values(),
        order=model.order,
    )


# --- decision feedback ----------------------------------------------------------------

ACCEPTED_SCALE = "Accepted"
PRECEDENT_RELATION = "precedent"


@dataclass(frozen=True)
class DecisionRecord:
    """One practical instance of taking (or rejecting) a recommended decision."""

    inputs: Mapping[str, Value]
    outputs: Mapping[str, Value]
    accepted: bool
    timestamp: str = ""
    comment: str = ""


def ingest_feedback(model: DomainModel, record: DecisionRecord) -> ModelDelta:
    """Decompose a decision instance into declarative precedent facts.

    The precedent relation's schema (input scales, output scales, accepted
    flag) is fixed when first created; timestamp and comment stay in the
    workspace feedback store, not in the model.
    """
    columns: list[tuple[str, Value]] = []
    arg_refs: list[ScaleRef] = []
    for name in sorted(record.inputs) + sorted(record.outputs):
        source = record.inputs if name in record.inputs else record.outputs
        decl = model.symbol(name)
        if decl is None or decl.kind != KIND_CONST or decl.layer > 1:
            raise PertinencyFailed(f"feedback names {name!r}, not a level-0/1 constant")
        if not model.value_in_carrier(source[name], decl.result):
            raise PertinencyFailed(
                f"feedback value {name} = {source[name]!r} off scale {decl.result}"
            )
        columns.append((name, source[name]))
        arg_refs.append(decl.result)

    new_scales: list[Scale] = []
    if ACCEPTED_SCALE not in model.scale_system:
        new_scales.append(define_scale(ACCEPTED_SCALE, EnumValues(["yes", "no"])))
    arg_refs.append(ScaleRef(ACCEPTED_SCALE))

    new_symbols: list[SymbolDecl] = []
    existing = model.symbol(PRECEDENT_RELATION)
    if existing is None:
        new_symbols.append(
            SymbolDecl(PRECEDENT_RELATION, 2, KIND_PRED, tuple(arg_refs))
        )
    else:
        if existing.kind != KIND_PRED or existing.layer != 2 or existing.args != tuple(arg_refs):
            raise PertinencyFailed(
                f"feedback schema {tuple(str(r) for r in arg_refs)} does not match the "
                f"declared {PRECEDENT_RELATION} relation"
            )
    tup = tuple(v for _, v in columns) + ("yes" if record.accepted else "no",)
    return ModelDelta(
        new_scales=tuple(new_scales),
        new_symbols=tuple(new_symbols),
        new_facts=(Interpretation(PRECEDENT_RELATION, KIND_PRED, tuples=frozenset({tup})),),
    )
