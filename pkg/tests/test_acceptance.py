"""Acceptance gate: one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines as they complete.
"""
import itertools
import json
import time

import pytest

from knowhow_dss.errors import NoSolution
from knowhow_dss.modelfile import ModelDocument, load_model, save_model
from knowhow_dss.semantics import (
    FALSE,
    TRUE,
    UNDEFINED,
    Criterion,
    TaskSpec,
    apply_criterion,
    check_solution,
    compare_solution_sets,
    make_solution_set,
    oracle_solutions,
    tv_and,
    tv_implies,
    tv_not,
    tv_or,
)
from knowhow_dss.solver import explain, solve
from knowhow_dss.validation import (
    validate_completeness,
    validate_consistency,
    validate_model,
    validate_pertinency,
)
from knowhow_dss.demo import input_sweep, make_task

from genmodels import random_case

RANDOM_SWEEP = 100


def _ok(name):
    print(f"\nACCEPTANCE {name}: PASS")


def _solve_set(model, task):
    try:
        return solve(model, task).solution_set
    except NoSolution:
        return make_solution_set(model, task.outputs, [])


# 1 ------------------------------------------------------------------------------

def test_solver_oracle_equivalence_sweep():
    started = time.monotonic()
    for seed in range(RANDOM_SWEEP):
        case = random_case(seed)
        solved = _solve_set(case.model, case.task)
        oracled = oracle_solutions(case.model, case.task, budget=10**6)
        diff = compare_solution_sets(solved, oracled)
        assert diff.empty, f"seed {seed}:\n{diff.render()}"
    elapsed = time.monotonic() - started
    assert elapsed < 60.0, f"sweep took {elapsed:.1f}s"
    _ok(f"solver/oracle equivalence ({RANDOM_SWEEP} random models, {elapsed:.1f}s)")


# 2 ------------------------------------------------------------------------------

def test_def5_soundness_across_corpora(em_micro, demo_ws):
    checked = 0
    result = solve(em_micro.model, em_micro.tasks["demo"])
    for sol in result.solutions:
        assert check_solution(em_micro.model, sol.candidate) is True
        checked += 1
    model = demo_ws.model
    for inputs in input_sweep():
        for kind in ("life", "time"):
            for sol in solve(model, make_task("p", inputs, kind, model)).solutions:
                assert check_solution(model, sol.candidate) is True
                checked += 1
    for seed in range(25):
        case = random_case(seed)
        try:
            sols = solve(case.model, case.task).solutions
        except NoSolution:
            continue
        for sol in sols:
            assert check_solution(case.model, sol.candidate) is True
            checked += 1
    assert checked > 50
    _ok(f"Def-5 soundness ({checked} solutions re-verified, zero exceptions)")


# 3 ------------------------------------------------------------------------------

def test_higher_order_reproduction(demo_ws):
    from knowhow_dss.formulas import SymbolTable, parse_formula

    model = demo_ws.model
    order2 = [
        (i, f) for i, f in enumerate(model.typed_formulas)
        if any(v.order == 2 for v in f.free)
    ]
    assert len(order2) >= 10
    table = SymbolTable.of_model(model)
    for _, typed in order2:
        assert parse_formula(typed.text, table) == typed.formula  # parses back
    fired = set()
    for inputs in input_sweep():
        for kind in ("life", "time"):
            fired |= solve(model, make_task("p", inputs, kind, model)).fired_rules
    missing = [typed.text for i, typed in order2 if i not in fired]
    assert not missing, f"never fired: {missing}"
    _ok(f"higher-order reproduction ({len(order2)} order-2 formulas, all fired)")


# 4 ------------------------------------------------------------------------------

def test_section7_behavior_reproduction(demo_ws):
    model = demo_ws.model
    assert len(demo_ws.stored_tables()) >= 10
    differing = 0
    combos = 0
    for inputs in input_sweep():
        combos += 1
        life = solve(model, make_task("life_p", inputs, "life", model))
        timed = solve(model, make_task("time_p", inputs, "time", model))
        if life.solution_set.values() != timed.solution_set.values():
            differing += 1
        for result in (life, timed):
            for sol in result.solutions:
                payload = explain(sol, "structured")
                for node in payload["nodes"].values():
                    for j in node["justifications"]:
                        for p in j["premises"]:
                            assert p["kind"] in ("input", "fact", "derived")
                            if p["kind"] == "derived":
                                assert p["node"] in payload["nodes"]
    assert differing >= 1
    _ok(
        "section-7 behavior (both tasks solved on all "
        f"{combos} input combinations; criteria differ on {differing}; "
        "explanation leaves are inputs or know-how facts)"
    )


# 5 ------------------------------------------------------------------------------

def test_three_valued_logic_laws():
    tv = (TRUE, FALSE, UNDEFINED)
    as_bool = {TRUE: True, FALSE: False}

    def strong_and(a, b):
        if a is FALSE or b is FALSE:
            return FALSE
        if a is UNDEFINED or b is UNDEFINED:
            return UNDEFINED
        return TRUE if (as_bool[a] and as_bool[b]) else FALSE

    def strong_or(a, b):
        if a is TRUE or b is TRUE:
            return TRUE
        if a is UNDEFINED or b is UNDEFINED:
            return UNDEFINED
        return TRUE if (as_bool[a] or as_bool[b]) else FALSE

    checks = 0
    for a, b in itertools.product(tv, repeat=2):
        assert tv_and(a, b) is strong_and(a, b)
        assert tv_or(a, b) is strong_or(a, b)
        assert tv_implies(a, b) is tv_or(tv_not(a), b)
        assert tv_not(tv_and(a, b)) is tv_or(tv_not(a), tv_not(b))
        assert tv_not(tv_or(a, b)) is tv_and(tv_not(a), tv_not(b))
        checks += 5
    for a in tv:
        assert tv_not(tv_not(a)) is a
        checks += 1
    _ok(f"three-valued logic laws ({checks} exhaustive table checks)")


# 6 ------------------------------------------------------------------------------

def test_round_trip_and_determinism(em_micro, demo_ws):
    corpus = [
        ("em-micro", em_micro),
        ("demo-pack", demo_ws.document),
    ]
    for seed in range(10):
        case = random_case(seed)
        corpus.append((f"random-{seed}", ModelDocument(
            case.model, {case.task.name: case.task}
        )))
    for name, doc in corpus:
        text = save_model(doc)
        assert save_model(load_model(text)) == text, name  # byte-identical double save
        again = load_model(text)
        for task_name, task in doc.tasks.items():
            before = _solve_set(doc.model, task)
            after = _solve_set(again.model, again.tasks[task_name])
            assert compare_solution_sets(before, after).empty, (name, task_name)
    # byte-identical repeated solve output
    task = em_micro.tasks["demo"]
    a = solve(em_micro.model, task)
    b = solve(em_micro.model, task)
    render = lambda r: json.dumps({
        "values": [list(map(str, v)) for v in r.solution_set.values()],
        "explanations": [explain(s, "structured") for s in r.solutions],
    }, sort_keys=True)
    assert render(a) == render(b)
    _ok(f"round-trip and determinism ({len(corpus)} corpus models)")


# 7 ------------------------------------------------------------------------------

def test_validation_triad(em_micro):
    from dataclasses import replace
    from knowhow_dss.model import FactAlgebra, Interpretation, assemble_model
    from knowhow_dss.formulas import SymbolTable, parse_formula

    model = em_micro.model
    table = SymbolTable.of_model(model)

    def rebuild(facts=None, formulas=None, validate=True):
        return assemble_model(
            model.scale_system, model.layers,
            facts if facts is not None else model.facts.values(),
            formulas if formulas is not None else model.formulas,
            model.variables.values(), order=model.order, validate=validate,
        )

    # clean fixture: zero errors
    assert not any(d.severity == "error" for d in validate_model(model))

    # seeded off-scale fact -> exactly one E-SCALE with the tuple as witness
    algebras = []
    for level, fa in model.facts.items():
        interps = []
        for interp in fa.interpretations.values():
            if interp.symbol == "rec_angle":
                interp = replace(interp, table={**interp.table, ("carbon_steel",): 77})
            interps.append(interp)
        algebras.append(FactAlgebra(level, interps))
    off_scale = rebuild(facts=algebras, validate=False)
    diags = [d for d in validate_pertinency(off_scale) if d.code == "E-SCALE"]
    assert len(diags) == 1 and diags[0].witness and "carbon_steel" in diags[0].witness

    # seeded undeclared symbol -> E-UNDECL
    broken_facts = [
        FactAlgebra(2, list(model.facts[2].interpretations.values()) + [
            Interpretation("spindle_speed", "func", table={("carbon_steel",): 5})
        ])
    ]
    undecl = rebuild(facts=broken_facts, validate=False)
    codes = [d for d in validate_completeness(undecl) if d.code == "E-UNDECL"]
    assert len(codes) == 1 and codes[0].location == "spindle_speed"

    # seeded unsatisfiable formula set -> E-NOSOL with witness, plus E-INCONS
    probe = TaskSpec("probe", {"workpiece_material": "carbon_steel"},
                     ("edge_angle", "tool_life"), Criterion.none())
    tight = rebuild(formulas=list(model.formulas) + [parse_formula("edge_angle > 40", table)])
    nosol = [d for d in validate_consistency(tight, probe) if d.code == "E-NOSOL"]
    assert nosol and all(d.witness for d in nosol)
    ground_false = rebuild(formulas=list(model.formulas) + [parse_formula("12 > 13", table)])
    incons = [d for d in validate_consistency(ground_false, probe) if d.code == "E-INCONS"]
    assert len(incons) == 1 and incons[0].location == "12 > 13" and incons[0].witness
    _ok("validation triad (E-SCALE, E-UNDECL, E-NOSOL/E-INCONS with witnesses; clean fixture zero errors)")


# 8 ------------------------------------------------------------------------------

def test_submodel_projection(demo_ws):
    from knowhow_dss.workspace import extract_submodel

    model = demo_ws.model
    keep = {"workpiece_material", "hardness_band", "flute_count", "edge_angle"}
    sub = extract_submodel(model, keep)
    assert sub.symbol("tool_life") is None
    probes = list(itertools.islice(input_sweep(), 0, None, 5))
    for inputs in probes:
        sub_task = TaskSpec("p", dict(inputs), ("edge_angle",), Criterion.none())
        sub_oracle = oracle_solutions(sub, sub_task)
        assert compare_solution_sets(
            _solve_set(sub, sub_task), sub_oracle
        ).empty
        full_task = make_task("p", inputs, "none", model)
        projected = {
            (c.constants["edge_angle"],)
            for c in oracle_solutions(model, full_task).candidates
        }
        assert set(sub_oracle.values()) == projected, inputs
    _ok(f"sub-model projection (oracle-checked on {len(probes)} input combinations)")
