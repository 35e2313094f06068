import pytest

from knowhow_dss.errors import (
    NonNumericComparison,
    OrderExceedsModel,
    SortMismatch,
)
from knowhow_dss.formulas import SymbolTable, parse_formula, parse_term
from knowhow_dss.model import SymbolShape, VariableDecl
from knowhow_dss.typecheck import check_formula, check_term, variable_range
from knowhow_dss.values import SymRef


@pytest.fixture(scope="module")
def table(em_micro):
    return SymbolTable.of_model(em_micro.model)


def test_bridge_formula_typechecks_with_range(em_micro, table):
    f = parse_formula("AngleKnowHow(f^2) -> f^2(workpiece_material) = edge_angle", table)
    typed = check_formula(f, em_micro.model)
    assert [v.name for v in typed.free] == ["f"]
    assert typed.ranges["f"] == (SymRef("rec_angle"),)


def test_cross_scale_equality_is_a_sort_mismatch(em_micro, table):
    f = parse_formula("edge_angle = carbon_steel", table)
    with pytest.raises(SortMismatch):
        check_formula(f, em_micro.model)


def test_distinct_numeric_scales_do_not_compare_directly(em_micro, table):
    f = parse_formula("edge_angle = tool_life", table)
    with pytest.raises(SortMismatch):
        check_formula(f, em_micro.model)


def test_numbers_and_arithmetic_are_scale_polymorphic(em_micro, table):
    for text in ("edge_angle > 40", "tool_life = edge_angle * 5 + 30", "12 > 13"):
        check_formula(parse_formula(text, table), em_micro.model)


def test_ordered_comparison_on_enum_scale_rejected(em_micro, table):
    f = parse_formula("workpiece_material < carbon_steel", table)
    with pytest.raises(NonNumericComparison):
        check_formula(f, em_micro.model)


def test_order_exceeds_model(em_micro):
    from knowhow_dss.model import assemble_model

    model = em_micro.model
    g = VariableDecl("g", 3, shape=SymbolShape("func", ("Material",), "AngleDeg"))
    with pytest.raises(OrderExceedsModel):
        assemble_model(
            model.scale_system, model.layers, model.facts.values(),
            model.formulas, list(model.variables.values()) + [g], order=model.order,
        )


def test_variable_ranges(em_micro):
    model = em_micro.model
    assert variable_range(model, model.variables["f"]) == (SymRef("rec_angle"),)
    order1 = VariableDecl("m", 1, scale="Material")
    assert variable_range(model, order1) == ("carbon_steel", "alloy_steel")


def test_objective_terms_typecheck(em_micro, table):
    t = check_term(parse_term("tool_life", table), em_micro.model)
    assert t.free == ()
    t2 = check_term(parse_term("tool_life + edge_angle", table), em_micro.model)
    assert t2.text == "tool_life + edge_angle"


def test_enum_literal_needs_unambiguous_context(em_micro, table):
    f = parse_formula("workpiece_material = carbon_steel", table)
    typed = check_formula(f, em_micro.model)
    assert typed.sorts[id(f.right)] == ("scale", "Material")
