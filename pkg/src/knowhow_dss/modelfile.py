"""Line-oriented ASCII model documents.

Section order is fixed: scales, vars, layer blocks (ascending), facts blocks
(ascending, levels >= 2), formulas, then named tasks. `#` starts a comment.
Serialization is deterministic (name-sorted everywhere), so saving the same
model twice yields identical bytes.

    scales {
      AngleDeg : int 0..45 step 1 unit "deg"
      Material : enum { alloy_steel, carbon_steel }
    }
    vars {
      f : order 2 : func(Material) -> AngleDeg
    }
    layer 1 {
      const edge_angle : AngleDeg
    }
    facts 2 {
      rec_angle(carbon_steel) = 12
      AngleKnowHow(rec_angle)
    }
    formulas {
      AngleKnowHow(f^2) -> f^2(workpiece_material) = edge_angle
    }
    task demo {
      input workpiece_material = carbon_steel
      output edge_angle
      criterion maximize tool_life
    }
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from typing import Mapping, Optional

from .errors import EngineError, FactAtLevelOne, ParseError
from .formulas import SymbolTable, parse_formula, parse_term, render_formula
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
    render_symbol_decl,
)
from .scales import DecimalRange, EnumValues, IntRange, Scale, ScaleSystem, define_scale, render_scale_decl
from .semantics import Criterion, TaskSpec
from .typecheck import check_formula, check_term
from .values import SymRef, Value, render_value


@dataclass(frozen=True)
class ModelDocument:
    """A model plus its stored named tasks."""

    model: DomainModel
    tasks: Mapping[str, TaskSpec] = field(default_factory=dict)


# --- helpers -------------------------------------------------------------------

def _strip_comment(line: str) -> str:
    out = []
    quoted = False
    for c in line:
        if c == '"':
            quoted = not quoted
        if c == "#" and not quoted:
            break
        out.append(c)
    return "".join(out).rstrip()


@dataclass
class _Section:
    header: str
    args: list[str]
    lines: list[tuple[int, str]]


def _split_sections(text: str) -> list[_Section]:
    sections: list[_Section] = []
    current: Optional[_Section] = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        if current is None:
            if not line.endswith("{"):
                raise ParseError(lineno, f"expected a section header, got {line!r}")
            parts = line[:-1].split()
            if not parts:
                raise ParseError(lineno, "empty section header")
            sections.append(_Section(parts[0], parts[1:], []))
            current = sections[-1]
            continue
        if line == "}":
            current = None
            continue
        current.lines.append((lineno, line))
    if current is not None:
        raise ParseError(len(text.splitlines()), f"unterminated section {current.header!r}")
    return sections


_SCALE_RE = re.compile(
    r"^(?P<name>\w+)\s*:\s*(?P<body>.*?)(?:\s+unit\s+\"(?P<unit>[^\"]*)\")?$"
)
_RANGE_RE = re.compile(r"^(int|dec)\s+(-?[\d.]+)\.\.(-?[\d.]+)\s+step\s+([\d.]+)$")
_ENUM_RE = re.compile(r"^enum\s*\{(.*)\}$")


def parse_scale_decl(lineno: int, line: str) -> Scale:
    m = _SCALE_RE.match(line)
    if not m:
        raise ParseError(lineno, f"bad scale declaration: {line!r}")
    name, body, unit = m.group("name"), m.group("body").strip(), m.group("unit")
    em = _ENUM_RE.match(body)
    try:
        if em:
            values = [v.strip() for v in em.group(1).split(",") if v.strip()]
            return define_scale(name, EnumValues(values), unit)
        rm = _RANGE_RE.match(body)
        if not rm:
            raise ParseError(lineno, f"bad scale body: {body!r}")
        kind, lo, hi, step = rm.groups()
        if kind == "int":
            return define_scale(name, IntRange(int(lo), int(hi), int(step)), unit)
        return define_scale(name, DecimalRange(lo, hi, step), unit)
    except EngineError as err:
        raise ParseError(lineno, str(err)) from err
    except (ValueError, InvalidOperation) as err:
        raise ParseError(lineno, f"bad scale declaration: {err}") from err


_CARRIER_RE = re.compile(r"^symbols\((\d+)\)$")


def _parse_carrier(token: str):
    token = token.strip()
    m = _CARRIER_RE.match(token)
    if m:
        return SymbolsOfLayer(int(m.group(1)))
    return ScaleRef(token)


_SYM_HEAD_RE = re.compile(r"^(?P<kind>const|func|pred)\s+(?P<name>\w+)\s*(?P<rest>.*)$")


def _take_parenthesized(text: str, lineno: int) -> tuple[Optional[str], str]:
    """Split '(...)' off the front of `text`, honoring nested parentheses."""
    if not text.startswith("("):
        return None, text
    depth = 0
    for i, c in enumerate(text):
        if c == "(":
            depth += 1
        elif c == ")":
            depth -= 1
            if depth == 0:
                return text[1:i], text[i + 1:].strip()
    raise ParseError(lineno, f"unbalanced parentheses in {text!r}")


def parse_symbol_decl(lineno: int, line: str, level: int) -> SymbolDecl:
    m = _SYM_HEAD_RE.match(line)
    if not m:
        raise ParseError(lineno, f"bad symbol declaration: {line!r}")
    kind = m.group("kind")
    arg_text, rest = _take_parenthesized(m.group("rest").strip(), lineno)
    args = tuple(
        _parse_carrier(a) for a in (arg_text or "").split(",") if a.strip()
    )
    result = None
    if rest.startswith(":"):
        result = _parse_carrier(rest[1:].strip())
        rest = ""
    if rest:
        raise ParseError(lineno, f"bad symbol declaration: {line!r}")
    try:
        return SymbolDecl(m.group("name"), level, kind, args, result)
    except (EngineError, ValueError) as err:
        raise ParseError(lineno, str(err)) from err


_VAR_RE = re.compile(
    r"^(?P<name>\w+)\s*:\s*order\s+(?P<order>\d+)\s*:\s*(?P<shape>.+)$"
)
_SHAPE_RE = re.compile(
    r"^(?P<kind>const|func|pred)\s*(?:\((?P<args>[^)]*)\))?\s*(?:->\s*(?P<result>\w+))?$"
)


def parse_var_decl(lineno: int, line: str) -> VariableDecl:
    m = _VAR_RE.match(line)
    if not m:
        raise ParseError(lineno, f"bad variable declaration: {line!r}")
    name, order, shape_text = m.group("name"), int(m.group("order")), m.group("shape").strip()
    try:
        if order == 1:
            return VariableDecl(name, 1, scale=shape_text)
        sm = _SHAPE_RE.match(shape_text)
        if not sm:
            raise ParseError(lineno, f"bad variable shape: {shape_text!r}")
        args = tuple(a.strip() for a in (sm.group("args") or "").split(",") if a.strip())
        shape = SymbolShape(sm.group("kind"), args, sm.group("result"))
        return VariableDecl(name, order, shape=shape)
    except (EngineError, ValueError) as err:
        raise ParseError(lineno, str(err)) from err


def parse_scalar(token: str, scale: Scale) -> Value:
    """A literal on a known scale, as written in fact rows and task inputs."""
    token = token.strip()
    if scale.kind == "enum":
        return token
    if scale.kind == "int":
        return int(token)
    return Decimal(token).normalize()


def _parse_value(token: str, carrier, scales: ScaleSystem) -> Value:
    token = token.strip()
    if isinstance(carrier, SymbolsOfLayer):
        return SymRef(token)
    return parse_scalar(token, scales[carrier.scale])


_FACT_RE = re.compile(r"^(?P<name>\w+)\s*(?:\((?P<args>[^)]*)\))?\s*(?:=\s*(?P<value>\S+))?$")


def parse_fact_line(
    lineno: int,
    line: str,
    decls: Mapping[str, SymbolDecl],
    scales: ScaleSystem,
):
    """-> (symbol, args tuple, result value or None)."""
    m = _FACT_RE.match(line)
    if not m:
        raise ParseError(lineno, f"bad fact: {line!r}")
    name = m.group("name")
    decl = decls.get(name)
    if decl is None:
        raise ParseError(lineno, f"fact for undeclared symbol {name!r}")
    raw_args = [a for a in (m.group("args") or "").split(",") if a.strip()]
    if len(raw_args) != len(decl.args):
        raise ParseError(
            lineno, f"{name} expects {len(decl.args)} argument(s), got {len(raw_args)}"
        )
    try:
        args = tuple(
            _parse_value(tok, ref, scales) for tok, ref in zip(raw_args, decl.args)
        )
        value = None
        if m.group("value") is not None:
            if decl.kind == KIND_PRED:
                raise ParseError(lineno, f"predicate fact {name} cannot carry '= value'")
            value = _parse_value(m.group("value"), decl.result, scales)
        elif decl.kind != KIND_PRED:
            raise ParseError(lineno, f"{decl.kind} fact {name} needs '= value'")
        return name, args, value
    except ParseError:
        raise
    except (EngineError, ValueError, InvalidOperation, KeyError) as err:
        raise ParseError(lineno, f"bad fact {line!r}: {err}") from err


# --- load ------------------------------------------------------------------------

def load_model(text: str) -> ModelDocument:
    """Parse and assemble a model document; the result is fully validated."""
    sections = _split_sections(text)
    idx = 0

    def take(header: str, required: bool = True) -> Optional[_Section]:
        nonlocal idx
        if idx < len(sections) and sections[idx].header == header:
            s = sections[idx]
            idx += 1
            return s
        if required:
            at = sections[idx].header if idx < len(sections) else "end of file"
            lineno = sections[idx].lines[0][0] - 1 if idx < len(sections) and sections[idx].lines else 0
            raise ParseError(lineno, f"expected section '{header}', found {at!r}")
        return None

    scales_sec = take("scales")
    scale_list = [parse_scale_decl(n, l) for n, l in scales_sec.lines]
    try:
        scales = ScaleSystem(scale_list)
    except EngineError as err:
        raise ParseError(scales_sec.lines[0][0] if scales_sec.lines else 0, str(err)) from err

    variables: list[VariableDecl] = []
    vars_sec = take("vars", required=False)
    if vars_sec:
        variables = [parse_var_decl(n, l) for n, l in vars_sec.lines]

    layers: list[SignatureLayer] = []
    while idx < len(sections) and sections[idx].header == "layer":
        sec = sections[idx]
        idx += 1
        if len(sec.args) != 1 or not sec.args[0].isdigit():
            raise ParseError(sec.lines[0][0] - 1 if sec.lines else 0, "layer needs a level")
        level = int(sec.args[0])
        if level != len(layers):
            raise ParseError(
                sec.lines[0][0] - 1 if sec.lines else 0,
                f"layer blocks must ascend from 0; found {level} after {len(layers) - 1}",
            )
        decls = [parse_symbol_decl(n, l, level) for n, l in sec.lines]
        layers.append(SignatureLayer(level, decls))
    if len(layers) < 2:
        raise ParseError(0, "a model needs layer blocks 0..n with n >= 1")

    all_decls = {d.name: d for layer in layers for d in layer.symbols}

    fact_algebras: list[FactAlgebra] = []
    while idx < len(sections) and sections[idx].header == "facts":
        sec = sections[idx]
        idx += 1
        if len(sec.args) != 1 or not sec.args[0].isdigit():
            raise ParseError(sec.lines[0][0] - 1 if sec.lines else 0, "facts needs a level")
        level = int(sec.args[0])
        if level == 1:
            raise FactAtLevelOne("facts block at level 1: level-1 symbols are task unknowns")
        tables: dict[str, dict] = {}
        tuple_sets: dict[str, set] = {}
        constants: dict[str, Value] = {}
        for n, l in sec.lines:
            name, args, value = parse_fact_line(n, l, all_decls, scales)
            decl = all_decls[name]
            if decl.kind == KIND_PRED:
                tuple_sets.setdefault(name, set()).add(args)
            elif decl.kind == KIND_FUNC:
                table = tables.setdefault(name, {})
                if args in table and table[args] != value:
                    raise ParseError(
                        n, f"{name}{args} maps to both {table[args]!r} and {value!r}"
                    )
                table[args] = value
            else:
                if name in constants and constants[name] != value:
                    raise ParseError(n, f"constant {name} given two values")
                constants[name] = value
        interps = (
            [Interpretation(k, KIND_FUNC, table=v) for k, v in tables.items()]
            + [Interpretation(k, KIND_PRED, tuples=frozenset(v)) for k, v in tuple_sets.items()]
            + [Interpretation(k, KIND_CONST, constant=v) for k, v in constants.items()]
        )
        fact_algebras.append(FactAlgebra(level, interps))

    formulas = []
    table = SymbolTable(
        all_decls,
        {v.name: v for v in variables},
        [v for s in scale_list if s.kind == "enum" for v in s.values],
    )
    formulas_sec = take("formulas", required=False)
    if formulas_sec:
        for n, l in formulas_sec.lines:
            try:
                formulas.append(parse_formula(l, table))
            except EngineError as err:
                raise ParseError(n, str(err)) from err

    model = assemble_model(
        scales, layers, fact_algebras, formulas, variables, order=len(layers) - 1
    )

    tasks: dict[str, TaskSpec] = {}
    while idx < len(sections) and sections[idx].header == "task":
        sec = sections[idx]
        idx += 1
        if len(sec.args) != 1:
            raise ParseError(sec.lines[0][0] - 1 if sec.lines else 0, "task needs a name")
        task = _parse_task(sec, model, table)
        tasks[task.name] = task

    if idx != len(sections):
        stray = sections[idx]
        raise ParseError(
            stray.lines[0][0] - 1 if stray.lines else 0,
            f"unexpected section {stray.header!r}",
        )
    return ModelDocument(model, dict(sorted(tasks.items())))


def _parse_task(sec: _Section, model: DomainModel, table: SymbolTable) -> TaskSpec:
    name = sec.args[0]
    inputs: dict[str, object] = {}
    func_rows: dict[str, dict] = {}
    pred_rows: dict[str, set] = {}
    outputs: list[str] = []
    criterion = Criterion.none()
    for lineno, line in sec.lines:
        if line.startswith("input "):
            body = line[len("input "):].strip()
            sym_name = re.match(r"^(\w+)", body).group(1) if re.match(r"^(\w+)", body) else ""
            decl = model.symbol(sym_name)
            if decl is None:
                raise ParseError(lineno, f"task {name}: unknown input symbol {sym_name!r}")
            fname, args, value = parse_fact_line(
                lineno, body, {sym_name: decl}, model.scale_system
            )
            if decl.kind == KIND_CONST:
                inputs[fname] = value
            elif decl.kind == KIND_FUNC:
                func_rows.setdefault(fname, {})[args] = value
            else:
                pred_rows.setdefault(fname, set()).add(args)
        elif line.startswith("output "):
            outputs.append(line[len("output "):].strip())
        elif line.startswith("criterion "):
            criterion = _parse_criterion(lineno, line[len("criterion "):].strip(), model, table)
        else:
            raise ParseError(lineno, f"task {name}: unexpected line {line!r}")
    inputs.update(func_rows)
    inputs.update({k: frozenset(v) for k, v in pred_rows.items()})
    task = TaskSpec(name, inputs, tuple(sorted(outputs)), criterion)
    try:
        task.validate(model)
    except EngineError as err:
        raise ParseError(sec.lines[0][0] if sec.lines else 0, f"task {name}: {err}") from err
    return task


def _parse_criterion(lineno: int, text: str, model: DomainModel,
                     table: SymbolTable) -> Criterion:
    if text == "none":
        return Criterion.none()
    try:
        if text.startswith("maximize "):
            term = parse_term(text[len("maximize "):], table)
            return Criterion.maximize(check_term(term, model))
        if text.startswith("minimize "):
            term = parse_term(text[len("minimize "):], table)
            return Criterion.minimize(check_term(term, model))
        if text.startswith("predicate "):
            f = parse_formula(text[len("predicate "):], table)
            return Criterion.predicate_of(check_formula(f, model))
    except EngineError as err:
        raise ParseError(lineno, str(err)) from err
    raise ParseError(lineno, f"bad criterion: {text!r}")


# --- save ------------------------------------------------------------------------

def _render_fact_rows(model: DomainModel, interp: Interpretation) -> list[str]:
    decl = model.symbol(interp.symbol)
    rows: list[str] = []
    if interp.kind == KIND_CONST:
        if interp.constant is not None:
            rows.append(f"{interp.symbol} = {render_value(interp.constant)}")
        return rows

    def arg_key(args: tuple):
        key = []
        for v, ref in zip(args, decl.args):
            scale = model.scale_of_ref(ref)
            key.append(scale.index_of(v) if scale and v in scale else str(v))
        return tuple(str(k).rjust(12) for k in key)

    if interp.kind == KIND_FUNC:
        for args in sorted(interp.table, key=arg_key):
            rendered = ", ".join(render_value(a) for a in args)
            rows.append(f"{interp.symbol}({rendered}) = {render_value(interp.table[args])}")
    else:
        for args in sorted(interp.tuples, key=arg_key):
            rendered = ", ".join(render_value(a) for a in args)
            rows.append(f"{interp.symbol}({rendered})")
    return rows


def _render_criterion(criterion: Criterion) -> str:
    if criterion.kind == "none":
        return "criterion none"
    if criterion.kind == "predicate":
        return f"criterion predicate {criterion.predicate.text}"
    return f"criterion {criterion.kind} {criterion.objective.text}"


def _render_var(v: VariableDecl) -> str:
    shape = v.scale if v.order == 1 else str(v.shape)
    return f"{v.name} : order {v.order} : {shape}"


def save_model(doc: ModelDocument) -> str:
    """Serialize deterministically; load(save(doc)) is semantically identical."""
    model, tasks = doc.model, doc.tasks
    out: list[str] = ["scales {"]
    for s in model.scale_system.scales.values():
        out.append(f"  {render_scale_decl(s)}")
    out.append("}")
    if model.variables:
        out.append("vars {")
        for v in model.variables.values():
            out.append(f"  {_render_var(v)}")
        out.append("}")
    for layer in model.layers:
        out.append(f"layer {layer.level} {{")
        for decl in layer.symbols:
            out.append(f"  {render_symbol_decl(decl)}")
        out.append("}")
    for level, fa in model.facts.items():
        out.append(f"facts {level} {{")
        for interp in fa.interpretations.values():
            for row in _render_fact_rows(model, interp):
                out.append(f"  {row}")
        out.append("}")
    if model.formulas:
        out.append("formulas {")
        for f in model.formulas:
            out.append(f"  {render_formula(f)}")
        out.append("}")
    for tname in sorted(tasks):
        task = tasks[tname]
        out.append(f"task {tname} {{")
        for sym in sorted(task.inputs):
            binding = task.inputs[sym]
            decl = model.symbol(sym)
            if decl.kind == KIND_CONST:
                out.append(f"  input {sym} = {render_value(binding)}")
            elif decl.kind == KIND_FUNC:
                for args in sorted(binding, key=repr):
                    rendered = ", ".join(render_value(a) for a in args)
                    out.append(f"  input {sym}({rendered}) = {render_value(binding[args])}")
            else:
                for args in sorted(binding, key=repr):
                    rendered = ", ".join(render_value(a) for a in args)
                    out.append(f"  input {sym}({rendered})")
        for o in sorted(task.outputs):
            out.append(f"  output {o}")
        out.append(f"  {_render_criterion(task.criterion)}")
        out.append("}")
    return "\n".join(out) + "\n"
