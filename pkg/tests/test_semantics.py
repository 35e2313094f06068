import itertools

import pytest

from knowhow_dss.errors import (
    IncompleteCandidate,
    OracleBudgetExceeded,
    SchemaMismatch,
    UnsupportedOutputKind,
)
from knowhow_dss.formulas import SymbolTable, parse_formula, parse_term
from knowhow_dss.semantics import (
    FALSE,
    TRUE,
    UNDEFINED,
    Candidate,
    Criterion,
    TaskSpec,
    check_solution,
    compare_solution_sets,
    enumerate_assignments,
    eval_formula,
    eval_term,
    make_solution_set,
    oracle_solutions,
    tv_and,
    tv_implies,
    tv_not,
    tv_or,
)
from knowhow_dss.typecheck import check_formula, check_term
from knowhow_dss.values import UNDEF, SymRef

TV = (TRUE, FALSE, UNDEFINED)


# --- strong Kleene tables --------------------------------------------------------

def test_negation_table():
    assert tv_not(TRUE) is FALSE
    assert tv_not(FALSE) is TRUE
    assert tv_not(UNDEFINED) is UNDEFINED


def test_conjunction_table():
    expected = {
        (TRUE, TRUE): TRUE, (TRUE, FALSE): FALSE, (TRUE, UNDEFINED): UNDEFINED,
        (FALSE, TRUE): FALSE, (FALSE, FALSE): FALSE, (FALSE, UNDEFINED): FALSE,
        (UNDEFINED, TRUE): UNDEFINED, (UNDEFINED, FALSE): FALSE,
        (UNDEFINED, UNDEFINED): UNDEFINED,
    }
    for (a, b), want in expected.items():
        assert tv_and(a, b) is want


def test_disjunction_table():
    expected = {
        (TRUE, TRUE): TRUE, (TRUE, FALSE): TRUE, (TRUE, UNDEFINED): TRUE,
        (FALSE, TRUE): TRUE, (FALSE, FALSE): FALSE, (FALSE, UNDEFINED): UNDEFINED,
        (UNDEFINED, TRUE): TRUE, (UNDEFINED, FALSE): UNDEFINED,
        (UNDEFINED, UNDEFINED): UNDEFINED,
    }
    for (a, b), want in expected.items():
        assert tv_or(a, b) is want


def test_implication_table():
    # material implication: U -> T = T, F -> U = T, T -> U = U
    assert tv_implies(UNDEFINED, TRUE) is TRUE
    assert tv_implies(FALSE, UNDEFINED) is TRUE
    assert tv_implies(TRUE, UNDEFINED) is UNDEFINED
    assert tv_implies(UNDEFINED, UNDEFINED) is UNDEFINED
    assert tv_implies(UNDEFINED, FALSE) is UNDEFINED
    for a, b in itertools.product(TV, repeat=2):
        assert tv_implies(a, b) is tv_or(tv_not(a), b)


def test_kleene_laws_exhaustively():
    for a in TV:
        assert tv_not(tv_not(a)) is a
    for a, b in itertools.product(TV, repeat=2):
        assert tv_and(a, b) is tv_and(b, a)
        assert tv_or(a, b) is tv_or(b, a)
        assert tv_not(tv_and(a, b)) is tv_or(tv_not(a), tv_not(b))
        assert tv_not(tv_or(a, b)) is tv_and(tv_not(a), tv_not(b))


# --- term evaluation ----------------------------------------------------------------

@pytest.fixture(scope="module")
def table(em_micro):
    return SymbolTable.of_model(em_micro.model)


def cand(**constants):
    return Candidate(constants)


def test_partial_function_hit_and_miss(em_micro, table):
    model = em_micro.model
    hit = parse_term("rec_angle(workpiece_material)", table)
    assert eval_term(hit, model, cand(workpiece_material="carbon_steel"), {}) == 12
    assert eval_term(hit, model, cand(workpiece_material="alloy_steel"), {}) == 8
    miss = parse_term("life_at(workpiece_material, edge_angle)", table)
    assert eval_term(
        miss, model, cand(workpiece_material="carbon_steel", edge_angle=30), {}
    ) is UNDEF


def test_higher_order_application_resolves_reified_symbol(em_micro, table):
    model = em_micro.model
    t = parse_term("f^2(workpiece_material)", table)
    v = eval_term(t, model, cand(workpiece_material="carbon_steel"), {"f": SymRef("rec_angle")})
    assert v == 12
    # cross-check by direct lookup
    direct = parse_term("rec_angle(workpiece_material)", table)
    assert v == eval_term(direct, model, cand(workpiece_material="carbon_steel"), {})


def test_undefined_propagates_through_arithmetic(em_micro, table):
    model = em_micro.model
    t = parse_term("life_at(workpiece_material, edge_angle) + 1", table)
    assert eval_term(t, model, cand(workpiece_material="carbon_steel", edge_angle=30), {}) is UNDEF
    div = parse_term("edge_angle / 0", table)
    assert eval_term(div, model, cand(edge_angle=10), {}) is UNDEF


def test_exact_rational_arithmetic(em_micro, table):
    model = em_micro.model
    t = parse_term("edge_angle / 8", table)
    f = parse_formula("edge_angle / 8 = 1 + 1 / 2", table)
    typed = check_formula(f, model)
    assert eval_formula(typed, model, cand(edge_angle=12), {}) is TRUE


def test_formula_examples_from_fixture(em_micro, table):
    model = em_micro.model
    typed = check_formula(
        parse_formula("tool_life = life_at(workpiece_material, edge_angle)", table), model
    )
    good = cand(workpiece_material="carbon_steel", edge_angle=12, tool_life=90)
    assert eval_formula(typed, model, good, {}) is TRUE
    bad = cand(workpiece_material="carbon_steel", edge_angle=12, tool_life=80)
    assert eval_formula(typed, model, bad, {}) is FALSE
    undef = cand(workpiece_material="carbon_steel", edge_angle=30, tool_life=90)
    assert eval_formula(typed, model, undef, {}) is UNDEFINED


def test_predicate_atoms_are_closed_world(em_micro, table):
    model = em_micro.model
    member = check_formula(parse_formula("AngleKnowHow(rec_angle)", table), model)
    assert eval_formula(member, model, cand(), {}) is TRUE
    non_member = check_formula(parse_formula("AngleKnowHow(life_at)", table), model)
    assert eval_formula(non_member, model, cand(), {}) is FALSE


# --- assignments ----------------------------------------------------------------------

def test_enumerate_assignments_counts(em_micro):
    from knowhow_dss.model import VariableDecl

    model = em_micro.model
    m = VariableDecl("m", 1, scale="Material")
    assert list(enumerate_assignments([m], model)) == [
        {"m": "carbon_steel"}, {"m": "alloy_steel"}
    ]
    f = model.variables["f"]
    assert list(enumerate_assignments([f], model)) == [{"f": SymRef("rec_angle")}]
    assert list(enumerate_assignments([], model)) == [{}]
    combined = list(enumerate_assignments([f, m], model))
    assert len(combined) == 2  # product of range sizes 1 x 2


# --- Def-5 checking ---------------------------------------------------------------------

def full(model, **outputs):
    base = {"workpiece_material": "carbon_steel"}
    base.update(outputs)
    return Candidate(base)


def test_check_solution_fixture_examples(em_micro):
    model = em_micro.model
    assert check_solution(model, full(model, edge_angle=12, tool_life=90)) is True
    assert check_solution(model, full(model, edge_angle=10, tool_life=90)) is False


def test_check_solution_requires_complete_candidates(em_micro):
    with pytest.raises(IncompleteCandidate):
        check_solution(em_micro.model, Candidate({"workpiece_material": "carbon_steel"}))


def test_empty_formula_set_accepts_every_complete_candidate(em_micro):
    from knowhow_dss.model import assemble_model

    m = em_micro.model
    empty = assemble_model(
        m.scale_system, m.layers, m.facts.values(), [], m.variables.values(), order=m.order
    )
    assert check_solution(empty, full(empty, edge_angle=3, tool_life=7)) is True


# --- the oracle -----------------------------------------------------------------------

def demo_task(em_micro, criterion_kind="maximize"):
    model = em_micro.model
    table = SymbolTable.of_model(model)
    crit = Criterion.none()
    if criterion_kind == "maximize":
        crit = Criterion.maximize(check_term(parse_term("tool_life", table), model))
    return TaskSpec(
        "demo", {"workpiece_material": "carbon_steel"},
        ("edge_angle", "tool_life"), crit,
    )


def test_oracle_finds_the_unique_solution(em_micro):
    sols = oracle_solutions(em_micro.model, demo_task(em_micro))
    assert sols.values() == ((12, 90),)


def test_oracle_without_criterion_returns_all_def5_candidates(em_micro):
    sols = oracle_solutions(em_micro.model, demo_task(em_micro, "none"))
    assert sols.values() == ((12, 90),)  # the fixture pins everything else down


def test_oracle_budget(em_micro):
    with pytest.raises(OracleBudgetExceeded) as err:
        oracle_solutions(em_micro.model, demo_task(em_micro), budget=10)
    assert err.value.required == 46 * 601


def test_oracle_rejects_non_constant_outputs(em_micro):
    model = em_micro.model
    task = TaskSpec(
        "bad", {"workpiece_material": "carbon_steel"}, ("edge_angle", "tool_life"),
        Criterion.none(),
    )
    object.__setattr__(task, "outputs", ("life_at",))
    with pytest.raises((UnsupportedOutputKind, Exception)):
        oracle_solutions(model, task)


def test_adding_a_formula_never_enlarges_the_solution_set(em_micro):
    from knowhow_dss.model import assemble_model

    m = em_micro.model
    table = SymbolTable.of_model(m)
    extra = parse_formula("edge_angle > 11", table)
    stronger = assemble_model(
        m.scale_system, m.layers, m.facts.values(),
        list(m.formulas) + [extra], m.variables.values(), order=m.order,
    )
    base = set(oracle_solutions(m, demo_task(em_micro, "none")).values())
    strong = set(oracle_solutions(stronger, demo_task(em_micro, "none")).values())
    assert strong <= base


def test_unconstrained_constant_yields_scale_sized_solution_set(em_micro):
    from knowhow_dss.model import assemble_model

    m = em_micro.model
    free = assemble_model(
        m.scale_system, m.layers, m.facts.values(), [], m.variables.values(), order=m.order
    )
    task = TaskSpec("free", {"workpiece_material": "carbon_steel"},
                    ("edge_angle",), Criterion.none())
    sols = oracle_solutions(free, task)
    assert len(sols) == 46


# --- solution set comparison --------------------------------------------------------------

def test_compare_identical_sets_is_empty(em_micro):
    s = oracle_solutions(em_micro.model, demo_task(em_micro))
    d = compare_solution_sets(s, s)
    assert d.empty and d.render() == ""


def test_compare_reports_missing_candidates(em_micro):
    model = em_micro.model
    a = make_solution_set(model, ("edge_angle",), [full(model, edge_angle=1)])
    b = make_solution_set(
        model, ("edge_angle",), [full(model, edge_angle=1), full(model, edge_angle=2)]
    )
    d = compare_solution_sets(a, b)
    assert not d.empty
    assert d.missing_in_left == ((2,),)
    assert "missing-in-left {edge_angle=2}" in d.render()


def test_compare_requires_equal_schemas(em_micro):
    model = em_micro.model
    a = make_solution_set(model, ("edge_angle",), [])
    b = make_solution_set(model, ("tool_life",), [])
    with pytest.raises(SchemaMismatch):
        compare_solution_sets(a, b)
