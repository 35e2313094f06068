"""Command-line surface over a workspace directory.

Errors exit nonzero and print one CODE<tab>location<tab>message line in the
validation module's report format.
"""
from __future__ import annotations

import sys
from pathlib import Path

import click

from .errors import EngineError, ScaleMismatch
from .knowhow import parse_knowhow_table
from .model import declare_symbol
from .modelfile import (
    ModelDocument,
    load_model,
    parse_symbol_decl,
    save_model,
)
from .scales import DecimalRange, EnumValues, IntRange, define_scale, render_scale_decl, ScaleSystem
from .semantics import oracle_solutions, compare_solution_sets
from .model import assemble_model
from .solver import explain
from .validation import render_report, validate_model, has_errors
from .workspace import Workspace

_ERROR_CODES = {"ScaleMismatch": "E-SCALE", "PertinencyFailed": "E-SCALE"}


def _fail(err: EngineError) -> None:
    code = _ERROR_CODES.get(type(err).__name__, f"E-{type(err).__name__}")
    click.echo(f"{code}\t-\t{err}", err=True)
    sys.exit(1)


def _workspace(ctx) -> Workspace:
    return Workspace(Path(ctx.obj["root"]))


@click.group()
@click.option("--workspace", "root", default=".", show_default=True,
              help="Workspace directory (holds model.kh, knowhow/, logs).")
@click.pass_context
def main(ctx, root):
    """Know-how decision-support engine."""
    ctx.ensure_object(dict)
    ctx.obj["root"] = root


@main.group()
def scales():
    """List or add domain scales."""


@scales.command("list")
@click.pass_context
def scales_list(ctx):
    ws = _workspace(ctx)
    try:
        for s in ws.model.scale_system.scales.values():
            click.echo(render_scale_decl(s))
    except EngineError as err:
        _fail(err)


@scales.command("add")
@click.argument("name")
@click.option("--enum", "enum_values", default=None, help="Comma-separated values.")
@click.option("--int", "int_range", nargs=2, type=int, default=None, help="lo hi")
@click.option("--dec", "dec_range", nargs=2, default=None, help="lo hi (decimals)")
@click.option("--step", default="1", show_default=True)
@click.option("--unit", default=None)
@click.pass_context
def scales_add(ctx, name, enum_values, int_range, dec_range, step, unit):
    ws = _workspace(ctx)
    try:
        if enum_values:
            scale = define_scale(name, EnumValues(v.strip() for v in enum_values.split(",")), unit)
        elif int_range:
            scale = define_scale(name, IntRange(int_range[0], int_range[1], int(step)), unit)
        elif dec_range:
            scale = define_scale(name, DecimalRange(dec_range[0], dec_range[1], step), unit)
        else:
            raise ScaleMismatch("give one of --enum, --int, --dec")
        model = ws.model
        new_model = assemble_model(
            ScaleSystem(list(model.scale_system.scales.values()) + [scale]),
            model.layers, model.facts.values(), model.formulas,
            model.variables.values(), order=model.order,
        )
        diags = ws.replace_model(ModelDocument(new_model, ws.tasks))
        if has_errors(diags):
            click.echo(render_report(diags), err=True)
            sys.exit(1)
        click.echo(f"added scale {name} ({len(scale)} values)")
    except EngineError as err:
        _fail(err)


@main.group()
def ontology():
    """List or declare level-0..n symbols."""


@ontology.command("list")
@click.pass_context
def ontology_list(ctx):
    from .model import render_symbol_decl

    ws = _workspace(ctx)
    try:
        for layer in ws.model.layers:
            click.echo(f"layer {layer.level}:")
            for decl in layer.symbols:
                click.echo(f"  {render_symbol_decl(decl)}")
    except EngineError as err:
        _fail(err)


@ontology.command("declare")
@click.argument("level", type=int)
@click.argument("decl_text")
@click.pass_context
def ontology_declare(ctx, level, decl_text):
    """DECL_TEXT like 'func rec_angle(Material) : AngleDeg'."""
    ws = _workspace(ctx)
    try:
        model = ws.model
        decl = parse_symbol_decl(0, decl_text, level)
        taken = [d.name for d in model.symbols()]
        layers = list(model.layers)
        layers[level] = declare_symbol(layers[level], decl, model.scale_system, taken)
        new_model = assemble_model(
            model.scale_system, layers, model.facts.values(), model.formulas,
            model.variables.values(), order=model.order,
        )
        diags = ws.replace_model(ModelDocument(new_model, ws.tasks))
        if has_errors(diags):
            click.echo(render_report(diags), err=True)
            sys.exit(1)
        click.echo(f"declared {decl.name} at layer {level}")
    except IndexError:
        click.echo(f"E-LevelOutOfRange\t-\tlayer {level} not in model", err=True)
        sys.exit(1)
    except EngineError as err:
        _fail(err)


@main.group()
def knowhow():
    """Ingest know-how tables."""


@knowhow.command("add")
@click.argument("file", type=click.Path(exists=True, path_type=Path))
@click.option("--bind", "bindings", multiple=True, help="column=target, repeatable.")
@click.option("--classname", required=True, help="Know-how class symbol.")
@click.pass_context
def knowhow_add(ctx, file, bindings, classname):
    ws = _workspace(ctx)
    try:
        binding = {}
        for b in bindings:
            col, _, target = b.partition("=")
            if not target:
                raise ScaleMismatch(f"--bind needs column=target, got {b!r}")
            binding[col] = target
        table = parse_knowhow_table(file.read_text(), ws.model.scale_system)
        delta = ws.add_knowhow(table, binding, classname)
        summary = delta.summary()
        click.echo(
            f"added table {table.id}: {summary['symbols']} symbol(s), "
            f"{summary['facts']} fact(s), {len(summary['formulas'])} formula(s)"
        )
        for text in summary["formulas"]:
            click.echo(f"  formula {text}")
    except EngineError as err:
        _fail(err)


@main.command("facts")
@click.argument("action", type=click.Choice(["list"]))
@click.pass_context
def facts_cmd(ctx, action):
    """List stored facts per level."""
    from .modelfile import _render_fact_rows

    ws = _workspace(ctx)
    try:
        model = ws.model
        for level, fa in model.facts.items():
            click.echo(f"facts {level}:")
            for interp in fa.interpretations.values():
                for row in _render_fact_rows(model, interp):
                    click.echo(f"  {row}")
    except EngineError as err:
        _fail(err)


@main.command("validate")
@click.option("--probe", default=None, help="Task name for the consistency check.")
@click.pass_context
def validate_cmd(ctx, probe):
    ws = _workspace(ctx)
    try:
        probe_task = ws.get_task(probe) if probe else None
        diags = validate_model(ws.model, probe_task)
        if diags:
            click.echo(render_report(diags))
        sys.exit(1 if has_errors(diags) else 0)
    except EngineError as err:
        _fail(err)


@main.command("solve")
@click.option("--task", "task_name", required=True)
@click.option("--criterion", "criterion_text", default=None,
              help="Override: 'maximize <term>' | 'minimize <term>' | 'predicate <f>' | 'none'.")
@click.option("--oracle", is_flag=True, help="Also run the brute-force oracle and diff.")
@click.pass_context
def solve_cmd(ctx, task_name, criterion_text, oracle):
    from .formulas import SymbolTable
    from .modelfile import _parse_criterion
    from .semantics import TaskSpec

    ws = _workspace(ctx)
    try:
        task = ws.get_task(task_name)
        if criterion_text:
            table = SymbolTable.of_model(ws.model)
            criterion = _parse_criterion(0, criterion_text, ws.model, table)
            task = TaskSpec(task.name, task.inputs, task.outputs, criterion)
        result, entry = ws.run_task(task)
        click.echo(f"solutionSet {entry.solution_set_id} ({len(entry.solutions)} solution(s))")
        for sol in entry.solutions:
            values = ", ".join(f"{k}={v}" for k, v in sol["values"].items())
            click.echo(f"  {sol['id']}  {values}")
        if oracle:
            oset = oracle_solutions(ws.model, task)
            diff = compare_solution_sets(result.solution_set, oset)
            if diff.empty:
                click.echo("oracle: identical")
            else:
                click.echo("oracle: DIFFERS")
                click.echo(diff.render())
                sys.exit(1)
    except EngineError as err:
        _fail(err)


@main.command("explain")
@click.argument("solution_id")
@click.option("--format", "fmt", type=click.Choice(["text", "structured"]), default="text",
              show_default=True)
@click.pass_context
def explain_cmd(ctx, solution_id, fmt):
    import json

    ws = _workspace(ctx)
    try:
        found = ws.find_solution(solution_id)
        if found is None:
            click.echo(f"E-TraceMissing\t{solution_id}\tno such solution in this workspace",
                       err=True)
            sys.exit(1)
        task, payload = found
        if task is None:  # persisted structured trace
            if fmt == "structured":
                click.echo(json.dumps(payload, indent=2, sort_keys=True))
            else:
                click.echo(_text_from_structured(payload))
            return
        if fmt == "structured":
            click.echo(json.dumps(explain(payload, "structured"), indent=2, sort_keys=True))
        else:
            click.echo(explain(payload, "text", provenance=ws.provenance))
    except EngineError as err:
        _fail(err)


def _text_from_structured(payload: dict) -> str:
    lines = []

    def walk(node_id: str, depth: int) -> None:
        node = payload["nodes"][node_id]
        pad = "  " * depth
        lines.append(f"{pad}{node['symbol']} = {node['value']}")
        if not node["justifications"]:
            return
        just = node["justifications"][0]
        pad2 = "  " * (depth + 1)
        lines.append(f"{pad2}by rule: {just['rule']}")
        for p in just["premises"]:
            if p["kind"] == "derived":
                walk(p["node"], depth + 1)
            elif p["kind"] == "input":
                lines.append(f"{pad2}input {p['symbol']} = {p['value']}")
            else:
                args = ", ".join(p["args"])
                head = f"{p['symbol']}({args})" if args else p["symbol"]
                tail = "" if p["value"] is None else f" = {p['value']}"
                lines.append(f"{pad2}fact {head}{tail}")

    for root in sorted(payload["roots"]):
        walk(payload["roots"][root], 0)
    return "\n".join(lines)


@main.command("serve")
@click.option("--port", default=8750, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.pass_context
def serve_cmd(ctx, port, host):
    import uvicorn

    from .service import create_app

    ws = _workspace(ctx)
    try:
        ws.model  # fail fast when the slot is empty or invalid
    except (EngineError, FileNotFoundError) as err:
        click.echo(f"E-Workspace\t-\t{err}", err=True)
        sys.exit(1)
    uvicorn.run(create_app(ws), host=host, port=port, log_level="warning")


@main.command("export")
@click.argument("file", required=False, type=click.Path(path_type=Path))
@click.pass_context
def export_cmd(ctx, file):
    ws = _workspace(ctx)
    try:
        text = save_model(ws.document)
        if file:
            file.write_text(text)
            click.echo(f"exported to {file}")
        else:
            click.echo(text, nl=False)
    except EngineError as err:
        _fail(err)


@main.command("import")
@click.argument("file", type=click.Path(exists=True, path_type=Path))
@click.pass_context
def import_cmd(ctx, file):
    ws = _workspace(ctx)
    try:
        doc = load_model(file.read_text())
        ws.root.mkdir(parents=True, exist_ok=True)
        ws.knowhow_dir.mkdir(exist_ok=True)
        diags = ws.replace_model(doc)
        if has_errors(diags):
            click.echo(render_report(diags), err=True)
            sys.exit(1)
        click.echo(f"imported model ({ws.current_hash})")
    except EngineError as err:
        _fail(err)


if __name__ == "__main__":
    main()
