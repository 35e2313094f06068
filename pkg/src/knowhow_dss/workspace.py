"""Directory-backed workspace: current model, know-how store, session log.

Layout:
    <root>/model.kh        current model document (model + named tasks)
    <root>/knowhow/*.kht   ingested know-how tables
    <root>/session.jsonl   solve history with structured explanations
    <root>/feedback.jsonl  decision records (timestamps and comments live here)

The current-model slot only ever holds validated models; replacement is
atomic (write-then-rename) and serialized through a non-blocking lock so a
racing swap is reported rather than interleaved.
"""
from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Mapping, Optional

from .errors import (
    DanglingDependency,
    DuplicateTableId,
    EngineError,
    PertinencyFailed,
    SwapInProgress,
    TypecheckFailed,
    UnknownTask,
)
from .formulas import free_variables, referenced_symbols
from .knowhow import (
    DecisionRecord,
    KnowHowTable,
    ModelDelta,
    add_facts,
    compile_knowhow,
    ingest_feedback,
    parse_knowhow_table,
    serialize_knowhow_table,
)
from .model import (
    DomainModel,
    FactAlgebra,
    Interpretation,
    ScaleRef,
    SignatureLayer,
    SymbolsOfLayer,
    assemble_model,
)
from .modelfile import ModelDocument, load_model, save_model
from .scales import ScaleSystem
from .semantics import TaskSpec
from .solver import Solution, SolveResult, explain, solve
from .validation import Diagnostic, has_errors, validate_model
from .values import SymRef, render_value

SCHEMA_VERSION = 1


def model_hash(doc: ModelDocument) -> str:
    return hashlib.sha256(save_model(doc).encode()).hexdigest()[:16]


def _canonical_task(task: TaskSpec) -> str:
    parts = [task.name]
    for k in sorted(task.inputs):
        v = task.inputs[k]
        if isinstance(v, (dict, frozenset)):
            parts.append(f"{k}=<table:{len(v)}>")
        else:
            parts.append(f"{k}={render_value(v)}")
    parts.append("outputs:" + ",".join(sorted(task.outputs)))
    parts.append("criterion:" + task.criterion.kind)
    if task.criterion.objective is not None:
        parts.append(task.criterion.objective.text)
    if task.criterion.predicate is not None:
        parts.append(task.criterion.predicate.text)
    return "|".join(parts)


def solution_id(mhash: str, task: TaskSpec, solution: Solution) -> str:
    values = ",".join(
        f"{n}={render_value(v)}" for n, v in sorted(solution.output_values().items())
    )
    blob = f"{mhash}|{_canonical_task(task)}|{values}"
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def solution_set_id(mhash: str, task: TaskSpec) -> str:
    return hashlib.sha256(f"{mhash}|{_canonical_task(task)}".encode()).hexdigest()[:16]


# --- sub-model extraction ---------------------------------------------------------

def extract_submodel(
    model: DomainModel,
    keep: Iterable[str],
    keep_symbols: Optional[Iterable[str]] = None,
) -> DomainModel:
    """Project the model onto a subset of its level-1 symbols.

    Retains every formula whose level-1 references all lie in `keep`,
    together with the scales, higher-level symbols, facts, and variables
    those formulas need. When `keep_symbols` is given it overrides the
    computed level->=2 retention set; a retained formula that then cites a
    dropped symbol raises DanglingDependency.
    """
    keep = set(keep)
    sigma1 = {d.name for d in model.layer(1).symbols}
    unknown = keep - sigma1
    if unknown:
        raise TypecheckFailed(f"keep set names non-level-1 symbols: {sorted(unknown)}")

    retained_formulas = []
    for f, typed in zip(model.formulas, model.typed_formulas):
        refs = referenced_symbols(f)
        sigma1_refs = {n for n in refs if n in sigma1}
        if sigma1_refs <= keep:
            retained_formulas.append((f, typed))

    needed_high: set[str] = set()
    needed_vars: set[str] = set()
    for f, typed in retained_formulas:
        for name in referenced_symbols(f):
            decl = model.symbol(name)
            if decl is not None and decl.layer >= 2:
                needed_high.add(name)
        for var in free_variables(f):
            needed_vars.add(var)
            decl = model.variables[var]
            if decl.order >= 2:
                needed_high.update(
                    d.name for d in model.shape_matches(decl.shape, decl.order)
                )

    if keep_symbols is not None:
        allowed = set(keep_symbols)
        missing = needed_high - allowed
        if missing:
            raise DanglingDependency(
                f"retained formulas need dropped symbol(s): {sorted(missing)}"
            )
        needed_high = allowed & {d.name for d in model.symbols() if d.layer >= 2}

    keep_layer0 = {
        n for f, _ in retained_formulas for n in referenced_symbols(f)
        if (d := model.symbol(n)) is not None and d.layer == 0
    }

    layers = []
    for layer in model.layers:
        if layer.level == 0:
            symbols = [d for d in layer.symbols if d.name in keep_layer0]
        elif layer.level == 1:
            symbols = [d for d in layer.symbols if d.name in keep]
        else:
            symbols = [d for d in layer.symbols if d.name in needed_high]
        layers.append(SignatureLayer(layer.level, symbols))

    retained_names = {d.name for layer in layers for d in layer.symbols}

    def tuple_ok(args: tuple) -> bool:
        return all(
            (not isinstance(a, SymRef)) or a.name in retained_names for a in args
        )

    fact_algebras = []
    for level, fa in model.facts.items():
        interps = []
        for interp in fa.interpretations.values():
            if interp.symbol not in retained_names:
                continue
            if interp.kind == "func":
                table = {args: v for args, v in interp.table.items() if tuple_ok(args)}
                interps.append(replace(interp, table=table))
            elif interp.kind == "pred":
                tuples = frozenset(t for t in interp.tuples if tuple_ok(t))
                interps.append(replace(interp, tuples=tuples))
            else:
                interps.append(interp)
        if interps:
            fact_algebras.append(FactAlgebra(level, interps))

    needed_scales: set[str] = set()
    for layer in layers:
        for decl in layer.symbols:
            for ref in decl.args + ((decl.result,) if decl.result else ()):
                if isinstance(ref, ScaleRef):
                    needed_scales.add(ref.scale)
    variables = []
    for name in sorted(needed_vars):
        var = model.variables[name]
        variables.append(var)
        if var.order == 1:
            needed_scales.add(var.scale)
        else:
            needed_scales.update(var.shape.args)
            if var.shape.result:
                needed_scales.add(var.shape.result)
    for _, typed in retained_formulas:
        for sort in typed.sorts.values():
            if sort[0] == "scale":
                needed_scales.add(sort[1])

    scales = ScaleSystem(
        s for s in model.scale_system.scales.values() if s.name in needed_scales
    )
    try:
        return assemble_model(
            scales,
            layers,
            fact_algebras,
            [f for f, _ in retained_formulas],
            variables,
            order=model.order,
        )
    except EngineError as err:
        raise DanglingDependency(f"projection is not self-contained: {err}") from err


# --- the workspace ------------------------------------------------------------------

@dataclass
class SessionEntry:
    solution_set_id: str
    task_name: str
    model_hash: str
    timestamp: str
    solutions: list[dict]  # {id, values, explanation(structured)}


class Workspace:
    """Single-user store shared by the CLI and the local service."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self.model_path = self.root / "model.kh"
        self.knowhow_dir = self.root / "knowhow"
        self.session_path = self.root / "session.jsonl"
        self.feedback_path = self.root / "feedback.jsonl"
        self._doc: Optional[ModelDocument] = None
        self._hash: Optional[str] = None
        self._swap_lock = threading.Lock()
        self._live: dict[str, tuple[TaskSpec, Solution]] = {}

    # --- model slot ------------------------------------------------------------

    @classmethod
    def init(cls, root: Path, document_text: str) -> "Workspace":
        ws = cls(root)
        ws.root.mkdir(parents=True, exist_ok=True)
        ws.knowhow_dir.mkdir(exist_ok=True)
        doc = load_model(document_text)
        diags = validate_model(doc.model)
        if has_errors(diags):
            raise PertinencyFailed(
                "refusing to initialize with an invalid model:\n"
                + "\n".join(d.render() for d in diags)
            )
        ws._write_model_text(save_model(doc))
        return ws

    def _write_model_text(self, text: str) -> None:
        tmp = self.model_path.with_suffix(".tmp")
        tmp.write_text(text)
        tmp.replace(self.model_path)
        self._doc = None
        self._hash = None

    @property
    def document(self) -> ModelDocument:
        if self._doc is None:
            self._doc = load_model(self.model_path.read_text())
            self._hash = model_hash(self._doc)
        return self._doc

    @property
    def model(self) -> DomainModel:
        return self.document.model

    @property
    def tasks(self) -> Mapping[str, TaskSpec]:
        return self.document.tasks

    @property
    def current_hash(self) -> str:
        self.document
        return self._hash

    def replace_model(self, doc: ModelDocument) -> list[Diagnostic]:
        """Validate then atomically swap the current-model slot."""
        diags = validate_model(doc.model)
        if has_errors(diags):
            return diags
        if not self._swap_lock.acquire(blocking=False):
            raise SwapInProgress("a model swap is already in progress")
        try:
            self._write_model_text(save_model(doc))
        finally:
            self._swap_lock.release()
        return diags

    # --- know-how -----------------------------------------------------------------

    def table_path(self, table_id: str) -> Path:
        return self.knowhow_dir / f"{table_id}.kht"

    def stored_tables(self) -> dict[str, KnowHowTable]:
        out = {}
        if self.knowhow_dir.exists():
            for path in sorted(self.knowhow_dir.glob("*.kht")):
                table = parse_knowhow_table(path.read_text(), self.model.scale_system)
                out[table.id] = table
        return out

    def add_knowhow(self, table: KnowHowTable, binding: Mapping[str, str],
                    classname: str) -> ModelDelta:
        """Compile, validate, swap the model, and store the table file."""
        if self.table_path(table.id).exists():
            raise DuplicateTableId(table.id)
        delta = compile_knowhow(self.model, table, binding, classname)
        new_model = add_facts(self.model, delta)
        diags = validate_model(new_model)
        if has_errors(diags):
            raise PertinencyFailed(
                "delta produced an invalid model:\n" + "\n".join(d.render() for d in diags)
            )
        doc = ModelDocument(new_model, self.tasks)
        failed = self.replace_model(doc)
        if has_errors(failed):
            raise PertinencyFailed("\n".join(d.render() for d in failed))
        self.knowhow_dir.mkdir(exist_ok=True)
        self.table_path(table.id).write_text(serialize_knowhow_table(table))
        return delta

    def provenance(self, symbol: str, args: tuple) -> Optional[str]:
        """Know-how citation for a fact symbol, when its table is stored."""
        if not symbol.startswith("kh_"):
            return None
        for table_id, table in self.stored_tables().items():
            prefix = f"kh_{table_id}"
            if symbol != prefix and not symbol.startswith(prefix + "_"):
                continue
            for row_index, row in enumerate(table.rows, start=1):
                if table.condition_values(row) == args or row == args:
                    note = f"; {table.usage_note}" if table.usage_note else ""
                    return f"know-how {table_id} '{table.title}' row {row_index}{note}"
        return None

    # --- feedback -------------------------------------------------------------------

    def record_feedback(self, record: DecisionRecord) -> ModelDelta:
        delta = ingest_feedback(self.model, record)
        new_model = add_facts(self.model, delta)
        doc = ModelDocument(new_model, self.tasks)
        failed = self.replace_model(doc)
        if has_errors(failed):
            raise PertinencyFailed("\n".join(d.render() for d in failed))
        with self.feedback_path.open("a") as fh:
            fh.write(json.dumps({
                "inputs": {k: render_value(v) for k, v in record.inputs.items()},
                "outputs": {k: render_value(v) for k, v in record.outputs.items()},
                "accepted": record.accepted,
                "timestamp": record.timestamp,
                "comment": record.comment,
            }, sort_keys=True) + "\n")
        return delta

    # --- solving ---------------------------------------------------------------------

    def get_task(self, name: str) -> TaskSpec:
        task = self.tasks.get(name)
        if task is None:
            raise UnknownTask(name)
        return task

    def run_task(self, task: TaskSpec) -> tuple[SolveResult, SessionEntry]:
        result = solve(self.model, task)
        mhash = self.current_hash
        entry = SessionEntry(
            solution_set_id=solution_set_id(mhash, task),
            task_name=task.name,
            model_hash=mhash,
            timestamp=datetime.now(timezone.utc).isoformat(),
            solutions=[],
        )
        for sol in result.solutions:
            sid = solution_id(mhash, task, sol)
            self._live[sid] = (task, sol)
            entry.solutions.append({
                "id": sid,
                "values": {
                    k: render_value(v) for k, v in sorted(sol.output_values().items())
                },
                "explanation": explain(sol, "structured", provenance=self.provenance),
            })
        with self.session_path.open("a") as fh:
            fh.write(json.dumps({
                "solutionSetId": entry.solution_set_id,
                "task": entry.task_name,
                "modelHash": entry.model_hash,
                "timestamp": entry.timestamp,
                "solutions": entry.solutions,
            }, sort_keys=True) + "\n")
        return result, entry

    def session(self) -> list[dict]:
        if not self.session_path.exists():
            return []
        return [json.loads(line) for line in self.session_path.read_text().splitlines() if line]

    def find_solution(self, sid: str) -> Optional[tuple[Optional[TaskSpec], object]]:
        """Live Solution when available, else the latest persisted trace."""
        if sid in self._live:
            return self._live[sid]
        for entry in reversed(self.session()):
            for sol in entry.get("solutions", []):
                if sol["id"] == sid:
                    return None, sol["explanation"]
        return None
