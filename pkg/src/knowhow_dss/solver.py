"""Forward-chaining reasoning over a domain model.

Formulas are partitioned into chaining rules and check-only constraints.
A rule is an implication chain whose final consequent either equates a bare
task-output constant with an evaluable term, or is a positive fact-backed
predicate atom mentioning exactly one task-output constant (the relational
know-how case, solved against the stored tuples).

Chaining is round-based to a fixpoint. Within a branch, every applicable
rule instantiation votes values for still-unbound outputs; distinct votes
branch the candidate set (Cartesian across outputs). Every candidate is then
re-verified against the full formula set (Def-5) before the criterion picks
the survivors, so branching never compromises soundness.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Union

from .errors import (
    DerivationConflict,
    IterationCapExceeded,
    NoDerivation,
    NoSolution,
    TraceMissing,
)
from .formulas import (
    And,
    Atom,
    Compare,
    Implies,
    SymApp,
    VarApp,
    render_formula,
)
from .model import DomainModel
from .semantics import (
    TRUE,
    FALSE,
    UNDEFINED,
    Candidate,
    Evaluator,
    SolutionSet,
    TaskSpec,
    Trace,
    _first_failure,
    _formula_assignments,
    apply_criterion,
    carrier_size,
    make_solution_set,
)
from .typecheck import TypedFormula
from .values import UNDEF, SymRef, Value, render_value


# --- rule extraction -----------------------------------------------------------

@dataclass(frozen=True)
class EquationHead:
    output: str
    term: object  # term AST evaluated at fire time


@dataclass(frozen=True)
class RelationalHead:
    app: Union[SymApp, VarApp]
    output: str
    out_index: int


@dataclass(frozen=True)
class Rule:
    index: int                      # position in model.typed_formulas
    typed: TypedFormula
    antecedents: tuple
    head: Union[EquationHead, RelationalHead]

    @property
    def text(self) -> str:
        return self.typed.text

    @property
    def output(self) -> str:
        return self.head.output


@dataclass(frozen=True)
class RuleSet:
    rules: tuple[Rule, ...]
    checks: tuple[int, ...]               # indices of check-only formulas
    diagnostics: tuple[tuple[str, str], ...]  # (formula text, reason)


def _flatten_conj(node) -> list:
    if isinstance(node, And):
        return _flatten_conj(node.left) + _flatten_conj(node.right)
    return [node]


def _strip_implications(formula):
    antecedents: list = []
    cur = formula
    while isinstance(cur, Implies):
        antecedents.extend(_flatten_conj(cur.left))
        cur = cur.right
    return antecedents, cur


def _bare_constant(node, names: set[str]) -> Optional[str]:
    if isinstance(node, SymApp) and not node.args and node.symbol in names:
        return node.symbol
    return None


def _mentions(node, name: str) -> bool:
    from .formulas import referenced_symbols

    return name in referenced_symbols(node)


def compile_rules(model: DomainModel, task: TaskSpec) -> RuleSet:
    """Partition the formula set into rules for the task outputs and checks."""
    outputs = set(task.outputs)
    rules: list[Rule] = []
    checks: list[int] = []
    diagnostics: list[tuple[str, str]] = []

    for i, typed in enumerate(model.typed_formulas):
        antecedents, consequent = _strip_implications(typed.formula)
        heads = _consequent_heads(model, consequent, outputs)
        if isinstance(heads, str):
            checks.append(i)
            diagnostics.append((typed.text, heads))
            continue
        for head in heads:
            rules.append(Rule(i, typed, tuple(antecedents), head))
    return RuleSet(tuple(rules), tuple(checks), tuple(diagnostics))


def _consequent_heads(model: DomainModel, consequent, outputs: set[str]):
    """Rule heads for a consequent, or a reason string if check-only."""
    if isinstance(consequent, Compare) and consequent.relop == "=":
        left_out = _bare_constant(consequent.left, outputs)
        right_out = _bare_constant(consequent.right, outputs)
        heads = []
        if left_out and not _mentions(consequent.right, left_out):
            heads.append(EquationHead(left_out, consequent.right))
        if right_out and not _mentions(consequent.left, right_out):
            heads.append(EquationHead(right_out, consequent.left))
        if heads:
            return heads
        return "equation does not isolate a task output"
    if isinstance(consequent, Atom):
        app = consequent.app
        if isinstance(app, SymApp):
            decl = model.symbol(app.symbol)
            if decl.layer == 1:
                return "level-1 predicate consequents are not derivable (table-valued unknown)"
            if decl.layer == 0:
                return "level-0 predicate consequents carry no stored facts"
        out_positions = [
            (idx, name)
            for idx, arg in enumerate(app.args)
            if (name := _bare_constant(arg, outputs)) is not None
        ]
        if len(out_positions) == 1:
            idx, name = out_positions[0]
            return [RelationalHead(app, name, idx)]
        if not out_positions:
            return "predicate consequent mentions no task output"
        return "predicate consequent mentions several task outputs"
    return "no implication head (check-only constraint)"


# --- derivation records -----------------------------------------------------------

@dataclass(frozen=True)
class Premise:
    """Leaf or link used by a rule instantiation."""

    kind: str  # "input" | "fact" | "derived"
    symbol: str
    args: tuple = ()
    value: object = None


@dataclass(frozen=True)
class Justification:
    rule_index: int
    rule_text: str
    assignment: tuple  # sorted (name, value) pairs
    premises: tuple[Premise, ...]


@dataclass
class DerivedFact:
    symbol: str
    value: Value
    justifications: list[Justification] = field(default_factory=list)


@dataclass
class _Branch:
    bindings: dict[str, Value]
    derived: dict[str, DerivedFact]
    applied: set

    def clone(self) -> "_Branch":
        return _Branch(dict(self.bindings), dict(self.derived), set(self.applied))


@dataclass(frozen=True)
class Solution:
    """One Def-5-verified candidate with its derivation trace."""

    candidate: Candidate
    outputs: tuple[str, ...]
    explanation: Mapping[str, DerivedFact]

    def output_values(self) -> dict[str, Value]:
        return {n: self.candidate.constants[n] for n in self.outputs}


@dataclass(frozen=True)
class SolveResult:
    task: TaskSpec
    solution_set: SolutionSet
    solutions: tuple[Solution, ...]
    fired_rules: frozenset  # (formula_index) of rules that produced a vote


# --- forward chaining ---------------------------------------------------------------

def _classify_premises(trace: Trace, input_names: set) -> list[Premise]:
    premises: list[Premise] = []
    seen = set()
    for sym, value in trace.constants:
        kind = "input" if sym in input_names else "derived"
        key = (kind, sym, value)
        if key not in seen:
            seen.add(key)
            premises.append(Premise(kind, sym, (), value))
    for sym, args, result in trace.facts:
        key = ("fact", sym, args, result)
        if key not in seen:
            seen.add(key)
            premises.append(Premise("fact", sym, args, result))
    return premises


def forward_chain(
    model: DomainModel,
    task: TaskSpec,
    ruleset: Optional[RuleSet] = None,
    on_conflict: str = "branch",
) -> tuple[list[tuple[Candidate, dict[str, DerivedFact]]], frozenset]:
    """Derive candidate interpretations for the task outputs.

    Returns (candidates with their derivation graphs, indices of formulas
    whose rules fired). Raises NoDerivation when some output is never
    derived on any branch.
    """
    if ruleset is None:
        ruleset = compile_rules(model, task)
    base = task.base_candidate(model)
    outputs = sorted(task.outputs)
    rule_assignments = [
        _formula_assignments(model, rule.typed) for rule in ruleset.rules
    ]
    fired: set[int] = set()

    cap = max(carrier_size(model) ** 2, 16)
    branches = [_Branch(dict(), dict(), set())]
    for _round in range(cap + 1):
        if _round == cap:
            raise IterationCapExceeded(f"forward chaining exceeded {cap} rounds")
        progress = False
        next_branches: list[_Branch] = []
        for branch in branches:
            votes = _collect_votes(
                model, task, ruleset, rule_assignments, base, branch, fired, on_conflict
            )
            new_outputs = sorted(n for n in votes if n not in branch.bindings)
            if not new_outputs:
                next_branches.append(branch)
                continue
            progress = True
            choices = []
            for name in new_outputs:
                scale = model.scale_of_ref(model.symbol(name).result)
                ordered = sorted(
                    votes[name].items(),
                    key=lambda kv: scale.index_of(kv[0]) if scale and kv[0] in scale else -1,
                )
                if on_conflict == "error" and len(ordered) > 1:
                    raise DerivationConflict(
                        f"{name} derived as "
                        + " and ".join(render_value(v) for v, _ in ordered)
                    )
                choices.append([(name, v, justs) for v, justs in ordered])
            next_branches.extend(_split(branch, choices))
        branches = next_branches
        if not progress:
            break

    complete = [b for b in branches if all(o in b.bindings for o in outputs)]
    if not complete:
        derived_somewhere = set()
        for b in branches:
            derived_somewhere.update(b.bindings)
        for name in outputs:
            if name not in derived_somewhere:
                raise NoDerivation(name)
        raise NoDerivation(next(n for n in outputs
                                 if any(n not in b.bindings for b in branches)))

    results = []
    seen_projections = set()
    for b in complete:
        candidate = base.with_constants(b.bindings)
        proj = tuple(b.bindings[o] for o in outputs)
        if proj in seen_projections:
            continue
        seen_projections.add(proj)
        results.append((candidate, b.derived))
    return results, frozenset(fired)


def _split(branch: _Branch, choices: list) -> list[_Branch]:
    out = [branch.clone()]
    for options in choices:
        nxt = []
        for b in out:
            for name, value, justs in options:
                child = b.clone()
                child.bindings[name] = value
                child.derived[name] = DerivedFact(name, value, list(justs))
                nxt.append(child)
        out = nxt
    return out


def _collect_votes(model, task, ruleset, rule_assignments, base, branch, fired,
                   on_conflict) -> dict[str, dict[Value, list[Justification]]]:
    candidate = base.with_constants(branch.bindings)
    input_names = set(base.constants)
    votes: dict[str, dict[Value, list[Justification]]] = {}
    for ri, (rule, assignments) in enumerate(zip(ruleset.rules, rule_assignments)):
        for a in assignments:
            akey = (ri, tuple(sorted(
                (k, v.name if isinstance(v, SymRef) else v) for k, v in a.items()
            )))
            if akey in branch.applied:
                continue
            trace = Trace()
            ev = Evaluator(model, rule.typed.sorts, candidate, a, trace)
            status = TRUE
            for lit in rule.antecedents:
                tv = ev.formula(lit)
                if tv is not TRUE:
                    status = tv
                    break
            if status is FALSE:
                branch.applied.add(akey)  # stable under monotone bindings
                continue
            if status is UNDEFINED:
                continue  # retry once more outputs are bound
            derivations = _fire(model, rule, ev, trace, input_names)
            if derivations is None:
                continue
            branch.applied.add(akey)
            if not derivations:
                continue
            fired.add(rule.index)
            for value, premises in derivations:
                just = Justification(
                    rule.index,
                    rule.text,
                    tuple(sorted((k, render_value(v)) for k, v in a.items())),
                    tuple(premises),
                )
                name = rule.output
                bound = branch.bindings.get(name, UNDEF)
                if bound is not UNDEF:
                    if not _same_value(bound, value):
                        if on_conflict == "error":
                            raise DerivationConflict(
                                f"{name} already {render_value(bound)}, "
                                f"re-derived as {render_value(value)}"
                            )
                        continue  # Def-5 will judge this branch
                    branch.derived[name].justifications.append(just)
                    continue
                votes.setdefault(name, {})
                found = next(
                    (v for v in votes[name] if _same_value(v, value)), None
                )
                if found is None:
                    votes[name][value] = [just]
                else:
                    votes[name][found].append(just)
    return votes


def _same_value(a, b) -> bool:
    from .values import values_equal

    return values_equal(a, b)


def _fire(model, rule: Rule, ev: Evaluator, trace: Trace, input_names: set):
    """Evaluate a rule head; None = not yet evaluable, else list of votes."""
    head = rule.head
    if isinstance(head, EquationHead):
        value = ev.term(head.term)
        if value is UNDEF:
            return None
        scale = model.scale_of_ref(model.symbol(head.output).result)
        if scale is None:
            return []
        snapped = _snap(value, scale)
        if snapped is None:
            return []  # off the output grid: discard, never clamp
        premises = _classify_premises(trace, input_names)
        return [(snapped, premises)]

    app = head.app
    if isinstance(app, SymApp):
        pred_name = app.symbol
    else:
        bound = ev.assignment.get(app.var, UNDEF)
        if bound is UNDEF:
            return None
        pred_name = bound.name
    interp = model.interpretation(pred_name)
    tuples = interp.tuples if interp else frozenset()
    fixed: list[tuple[int, Value]] = []
    for idx, arg in enumerate(app.args):
        if idx == head.out_index:
            continue
        v = ev.term(arg)
        if v is UNDEF:
            return None
        fixed.append((idx, Evaluator._canon(v)))
    base_premises = _classify_premises(trace, input_names)
    scale = model.scale_of_ref(model.symbol(head.output).result)
    out: list[tuple[Value, list[Premise]]] = []
    for tup in sorted(tuples, key=repr):
        if all(_same_value(tup[i], v) for i, v in fixed):
            value = tup[head.out_index]
            snapped = _snap(value, scale) if scale else None
            if snapped is None:
                continue
            premises = base_premises + [Premise("fact", pred_name, tup, None)]
            out.append((snapped, premises))
    return out


def _snap(value, scale):
    try:
        idx = scale.index_of(value)
    except (KeyError, TypeError):
        return None
    return scale.values[idx]


# --- the solve pipeline -----------------------------------------------------------------

def solve(
    model: DomainModel,
    task: TaskSpec,
    on_conflict: str = "branch",
) -> SolveResult:
    """forward_chain -> Def-5 filter -> criterion; explanations attached."""
    task.validate(model)
    ruleset = compile_rules(model, task)
    try:
        chained, fired = forward_chain(model, task, ruleset, on_conflict)
    except NoDerivation as err:
        raise NoSolution("forward_chain", f"NoDerivation({err.symbol})") from err
    if not chained:
        raise NoSolution("forward_chain", "no complete candidate")

    cache: dict = {}
    surviving: list[tuple[Candidate, dict]] = []
    for candidate, derived in chained:
        if _first_failure(model, candidate, cache) is None:
            surviving.append((candidate, derived))
    if not surviving:
        raise NoSolution("def5_filter", "every derived candidate falsifies a formula")

    kept = apply_criterion([c for c, _ in surviving], task.criterion, model)
    if not kept:
        raise NoSolution("criterion", "criterion rejected every candidate")
    kept_ids = {id(c) for c in kept}
    outputs = tuple(sorted(task.outputs))
    solutions = [
        Solution(c, outputs, {o: derived[o] for o in outputs})
        for c, derived in surviving
        if id(c) in kept_ids
    ]
    solution_set = make_solution_set(model, task.outputs, [s.candidate for s in solutions])
    ordered = sorted(
        solutions,
        key=lambda s: solution_set.values().index(s.candidate.project(solution_set.outputs)),
    )
    return SolveResult(task, solution_set, tuple(ordered), fired)


# --- explanations -----------------------------------------------------------------------

ProvenanceFn = Callable[[str, tuple], Optional[str]]


def explain(solution: Solution, fmt: str = "text",
            provenance: Optional[ProvenanceFn] = None) -> Union[str, dict]:
    """Render a solution's derivation as an indented proof tree or a graph."""
    if not isinstance(solution, Solution) or not solution.explanation:
        raise TraceMissing("solution carries no derivation trace")
    if fmt == "structured":
        return _structured(solution, provenance)
    if fmt != "text":
        raise ValueError(f"unknown format {fmt!r}")
    lines: list[str] = []
    for name in solution.outputs:
        _render_node(solution.explanation[name], solution, lines, 0, provenance)
    return "\n".join(lines)


def _render_node(node: DerivedFact, solution: Solution, lines: list[str],
                 depth: int, provenance: Optional[ProvenanceFn]) -> None:
    pad = "  " * depth
    lines.append(f"{pad}{node.symbol} = {render_value(node.value)}")
    just = _primary_justification(node)
    if just is None:
        return
    pad2 = "  " * (depth + 1)
    lines.append(f"{pad2}by rule: {just.rule_text}")
    if just.assignment:
        bound = ", ".join(f"{k} := {v}" for k, v in just.assignment)
        lines.append(f"{pad2}with {bound}")
    for premise in just.premises:
        if premise.kind == "input":
            lines.append(f"{pad2}input {premise.symbol} = {render_value(premise.value)}")
        elif premise.kind == "fact":
            args = ", ".join(render_value(a) for a in premise.args)
            head = f"{premise.symbol}({args})" if premise.args else premise.symbol
            text = head if premise.value is None else f"{head} = {render_value(premise.value)}"
            note = provenance(premise.symbol, premise.args) if provenance else None
            lines.append(f"{pad2}fact {text}" + (f"  [{note}]" if note else ""))
        else:
            sub = solution.explanation.get(premise.symbol)
            if sub is not None:
                _render_node(sub, solution, lines, depth + 1, provenance)
            else:
                lines.append(
                    f"{pad2}derived {premise.symbol} = {render_value(premise.value)}"
                )
    extra = node.justifications[1:]
    if extra:
        others = sorted({j.rule_text for j in extra} - {just.rule_text})
        for text in others:
            lines.append(f"{pad2}also supported by: {text}")


def _primary_justification(node: DerivedFact) -> Optional[Justification]:
    if not node.justifications:
        return None
    # prefer an equation-style rule citation over a relational window
    for j in node.justifications:
        if "=" in j.rule_text.split("->")[-1]:
            return j
    return node.justifications[0]


def _structured(solution: Solution, provenance: Optional[ProvenanceFn] = None) -> dict:
    nodes: dict[str, dict] = {}

    def emit(fact: DerivedFact) -> str:
        nid = fact.symbol
        if nid in nodes:
            return nid
        justs = []
        nodes[nid] = {
            "symbol": fact.symbol,
            "value": render_value(fact.value),
            "justifications": justs,
        }
        primary = _primary_justification(fact)
        ordered = [primary] + [j for j in fact.justifications if j is not primary] \
            if primary else list(fact.justifications)
        for j in ordered:
            premises = []
            for p in j.premises:
                if p.kind == "derived" and p.symbol in solution.explanation:
                    premises.append({"kind": "derived", "node": emit(
                        solution.explanation[p.symbol])})
                else:
                    note = provenance(p.symbol, p.args) if (
                        provenance and p.kind == "fact"
                    ) else None
                    premises.append({
                        "kind": p.kind,
                        "symbol": p.symbol,
                        "args": [render_value(a) for a in p.args],
                        "value": None if p.value is None else render_value(p.value),
                        "note": note,
                    })
            justs.append({
                "rule": j.rule_text,
                "assignment": [list(kv) for kv in j.assignment],
                "premises": premises,
            })
        return nid

    roots = {name: emit(solution.explanation[name]) for name in solution.outputs}
    return {"roots": roots, "nodes": nodes}
