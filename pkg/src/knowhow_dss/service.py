"""Local JSON service over a workspace, consumed by the companion UI.

Solves run against an immutable snapshot of the current model; know-how
ingestion validates and swaps the model slot atomically. Every response
carries `schemaVersion` and the serving `modelHash` so clients can detect
stale snapshots after a swap.
"""
from __future__ import annotations

from decimal import Decimal, InvalidOperation
from typing import Any, Optional

from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .errors import (
    EngineError,
    NoSolution,
    ParseError,
    ScaleMismatch,
    SwapInProgress,
    UnknownTask,
)
from .formulas import SymbolTable, parse_formula, parse_term
from .knowhow import parse_knowhow_table
from .model import KIND_CONST, ScaleRef
from .scales import Scale
from .semantics import Criterion, TaskSpec
from .typecheck import check_formula, check_term
from .validation import validate_model
from .values import render_value
from .workspace import SCHEMA_VERSION, Workspace

MUTATING_ERRORS = (ScaleMismatch,)


class CriterionSpec(BaseModel):
    kind: str = "none"  # none | maximize | minimize | predicate
    objective: Optional[str] = None
    predicate: Optional[str] = None


class SolveRequest(BaseModel):
    task: Optional[str] = None
    inputs: dict[str, Any] = Field(default_factory=dict)
    outputs: list[str] = Field(default_factory=list)
    criterion: Optional[CriterionSpec] = None


class KnowHowRequest(BaseModel):
    document: str
    binding: dict[str, str] = Field(default_factory=dict)
    classname: str


class ValidateRequest(BaseModel):
    probe: Optional[str] = None


def _parse_input_value(scale: Scale, raw: Any):
    if scale.kind == "enum":
        return str(raw)
    if scale.kind == "int":
        return int(raw)
    try:
        return Decimal(str(raw)).normalize()
    except InvalidOperation as err:
        raise ScaleMismatch(f"bad decimal value {raw!r}") from err


def _error_body(err: EngineError) -> dict:
    code = "E-SCALE" if isinstance(err, MUTATING_ERRORS) else f"E-{type(err).__name__}"
    return {
        "schemaVersion": SCHEMA_VERSION,
        "diagnostics": [{
            "code": code,
            "severity": "error",
            "location": "-",
            "message": str(err),
            "witness": None,
        }],
    }


def create_app(workspace: Workspace) -> FastAPI:
    app = FastAPI(title="knowhow-dss", version="0.1.0")
    # the companion UI is served separately during development
    from fastapi.middleware.cors import CORSMiddleware

    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(EngineError)
    async def engine_error(_, err: EngineError):
        if isinstance(err, SwapInProgress):
            return JSONResponse(_error_body(err), status_code=409)
        if isinstance(err, (ParseError, UnknownTask)):
            return JSONResponse(_error_body(err), status_code=400)
        return JSONResponse(_error_body(err), status_code=422)

    @app.get("/model")
    def model_summary() -> dict:
        model = workspace.model
        scales = [
            {
                "name": s.name,
                "kind": s.kind,
                "unit": s.unit,
                "values": [render_value(v) for v in s.values],
            }
            for s in model.scale_system.scales.values()
        ]
        symbols = []
        for decl in model.layer(1).symbols:
            symbols.append({
                "name": decl.name,
                "kind": decl.kind,
                "scale": decl.result.scale if isinstance(decl.result, ScaleRef) else None,
            })
        tasks = []
        for name, task in workspace.tasks.items():
            tasks.append({
                "name": name,
                "inputs": {k: render_value(v) for k, v in task.inputs.items()
                           if not isinstance(v, (dict, frozenset))},
                "outputs": sorted(task.outputs),
                "criterion": _criterion_json(task.criterion),
            })
        return {
            "schemaVersion": SCHEMA_VERSION,
            "modelHash": workspace.current_hash,
            "scales": scales,
            "symbols": symbols,
            "tasks": tasks,
            "criteria": ["none", "maximize", "minimize", "predicate"],
        }

    @app.post("/solve")
    def run_solve(req: SolveRequest) -> dict:
        model = workspace.model
        if req.task:
            task = workspace.get_task(req.task)
            if req.inputs or req.outputs or req.criterion:
                task = _build_task(workspace, req, base=task)
        else:
            task = _build_task(workspace, req, base=None)
        try:
            result, entry = workspace.run_task(task)
        except NoSolution as err:
            return {
                "schemaVersion": SCHEMA_VERSION,
                "modelHash": workspace.current_hash,
                "solutionSetId": None,
                "solutions": [],
                "diagnostics": [{
                    "code": "E-NOSOL",
                    "severity": "error",
                    "location": err.stage,
                    "message": str(err),
                    "witness": None,
                }],
            }
        return {
            "schemaVersion": SCHEMA_VERSION,
            "modelHash": entry.model_hash,
            "solutionSetId": entry.solution_set_id,
            "solutions": [
                {"id": s["id"], "values": s["values"]} for s in entry.solutions
            ],
            "diagnostics": [],
        }

    @app.get("/explanations/{solution_id}")
    def get_explanation(solution_id: str) -> dict:
        found = workspace.find_solution(solution_id)
        if found is None:
            raise HTTPException(status_code=404, detail="unknown solution id")
        task, payload = found
        if task is not None:
            from .solver import explain

            payload = explain(payload, "structured", provenance=workspace.provenance)
        return {
            "schemaVersion": SCHEMA_VERSION,
            "modelHash": workspace.current_hash,
            "solutionId": solution_id,
            "explanation": payload,
        }

    @app.post("/knowhow")
    def post_knowhow(req: KnowHowRequest) -> dict:
        table = parse_knowhow_table(req.document, workspace.model.scale_system)
        delta = workspace.add_knowhow(table, req.binding, req.classname)
        return {
            "schemaVersion": SCHEMA_VERSION,
            "modelHash": workspace.current_hash,
            "tableId": table.id,
            "delta": delta.summary(),
        }

    @app.post("/validate")
    def post_validate(req: ValidateRequest) -> dict:
        probe = workspace.get_task(req.probe) if req.probe else None
        diags = validate_model(workspace.model, probe)
        return {
            "schemaVersion": SCHEMA_VERSION,
            "modelHash": workspace.current_hash,
            "diagnostics": [d.to_dict() for d in diags],
        }

    @app.get("/session")
    def get_session() -> dict:
        return {
            "schemaVersion": SCHEMA_VERSION,
            "modelHash": workspace.current_hash,
            "entries": [
                {k: v for k, v in entry.items() if k != "solutions"}
                | {"solutions": [
                    {"id": s["id"], "values": s["values"]} for s in entry["solutions"]
                ]}
                for entry in workspace.session()
            ],
        }

    return app


def _criterion_json(criterion: Criterion) -> dict:
    out = {"kind": criterion.kind}
    if criterion.objective is not None:
        out["objective"] = criterion.objective.text
    if criterion.predicate is not None:
        out["predicate"] = criterion.predicate.text
    return out


def _build_task(workspace: Workspace, req: SolveRequest,
                base: Optional[TaskSpec]) -> TaskSpec:
    model = workspace.model
    inputs: dict[str, Any] = dict(base.inputs) if base else {}
    for name, raw in req.inputs.items():
        decl = model.symbol(name)
        if decl is None or decl.kind != KIND_CONST or decl.layer > 1:
            raise ScaleMismatch(f"input {name!r} is not a level-0/1 constant")
        scale = model.scale_of_ref(decl.result)
        if scale is None:
            raise ScaleMismatch(f"input {name!r} has no scale")
        inputs[name] = _parse_input_value(scale, raw)
    outputs = tuple(sorted(req.outputs)) if req.outputs else (base.outputs if base else ())
    criterion = base.criterion if base else Criterion.none()
    if req.criterion is not None:
        criterion = _parse_criterion_spec(model, req.criterion)
    name = req.task or (base.name if base else "adhoc")
    task = TaskSpec(name, inputs, tuple(outputs), criterion)
    task.validate(model)
    return task


def _parse_criterion_spec(model, spec: CriterionSpec) -> Criterion:
    table = SymbolTable.of_model(model)
    if spec.kind == "none":
        return Criterion.none()
    if spec.kind in ("maximize", "minimize"):
        if not spec.objective:
            raise ScaleMismatch("criterion needs an objective term")
        typed = check_term(parse_term(spec.objective, table), model)
        return Criterion.maximize(typed) if spec.kind == "maximize" else Criterion.minimize(typed)
    if spec.kind == "predicate":
        if not spec.predicate:
            raise ScaleMismatch("criterion needs a predicate formula")
        return Criterion.predicate_of(check_formula(parse_formula(spec.predicate, table), model))
    raise ScaleMismatch(f"unknown criterion kind {spec.kind!r}")
