from dataclasses import replace

import pytest

from knowhow_dss.errors import OracleBudgetExceeded
from knowhow_dss.formulas import SymbolTable, parse_formula
from knowhow_dss.model import (
    FactAlgebra,
    Interpretation,
    assemble_model,
)
from knowhow_dss.semantics import Criterion, TaskSpec
from knowhow_dss.validation import (
    has_errors,
    render_report,
    validate_completeness,
    validate_consistency,
    validate_model,
    validate_pertinency,
)


def probe(model):
    return TaskSpec("probe", {"workpiece_material": "carbon_steel"},
                    ("edge_angle", "tool_life"), Criterion.none())


def rebuild(model, facts=None, formulas=None, validate=True):
    return assemble_model(
        model.scale_system, model.layers,
        facts if facts is not None else model.facts.values(),
        formulas if formulas is not None else model.formulas,
        model.variables.values(), order=model.order, validate=validate,
    )


def inject_fact(model, symbol, key, value):
    algebras = []
    for level, fa in model.facts.items():
        interps = []
        for interp in fa.interpretations.values():
            if interp.symbol == symbol:
                table = dict(interp.table)
                table[key] = value
                interp = replace(interp, table=table)
            interps.append(interp)
        algebras.append(FactAlgebra(level, interps))
    return rebuild(model, facts=algebras, validate=False)


# --- pertinency -------------------------------------------------------------------

def test_clean_fixture_has_no_pertinency_errors(em_micro):
    assert validate_pertinency(em_micro.model) == []


def test_off_scale_fact_yields_one_escale_with_witness(em_micro):
    # AngleDeg tops out at 45
    broken = inject_fact(em_micro.model, "rec_angle", ("carbon_steel",), 77)
    diags = [d for d in validate_pertinency(broken) if d.code == "E-SCALE"]
    assert len(diags) == 1
    assert diags[0].witness is not None and "carbon_steel" in diags[0].witness
    assert "77" in diags[0].message


def test_off_carrier_tuple_component(em_micro):
    broken = inject_fact(em_micro.model, "rec_angle", ("titanium",), 12)
    diags = validate_pertinency(broken)
    assert any(d.code == "E-SCALE" and "titanium" in d.message for d in diags)


def test_assembly_and_validation_agree(em_micro):
    from knowhow_dss.errors import PertinencyFailed

    broken = inject_fact(em_micro.model, "rec_angle", ("carbon_steel",), 77)
    assert has_errors(validate_pertinency(broken))
    with pytest.raises(PertinencyFailed):
        rebuild(broken, validate=True)
    # and the clean fixture assembles with zero diagnostics
    assert not has_errors(validate_model(em_micro.model))
    rebuild(em_micro.model, validate=True)


# --- completeness -----------------------------------------------------------------

def test_clean_fixture_has_zero_errors_and_zero_unused(em_micro):
    diags = validate_completeness(em_micro.model)
    assert not any(d.code == "E-UNDECL" for d in diags)
    assert not any(d.code == "W-UNUSED" for d in diags)
    # the negated angle bound is check-only and flagged as such
    assert any(d.code == "W-UNCONVERTIBLE" for d in diags)


def test_unused_sigma1_symbol_warns(em_micro):
    model = em_micro.model
    table = SymbolTable.of_model(model)
    # drop the tool-life equation: tool_life is no longer mentioned
    formulas = [f for f in model.formulas
                if "life_at" not in parse_render(f)]
    slim = rebuild(model, formulas=formulas)
    diags = validate_completeness(slim)
    assert any(d.code == "W-UNUSED" and d.location == "tool_life" for d in diags)


def parse_render(f):
    from knowhow_dss.formulas import render_formula

    return render_formula(f)


def test_undeclared_symbol_in_facts(em_micro):
    model = em_micro.model
    algebras = list(model.facts.values())
    extra = FactAlgebra(2, list(algebras[0].interpretations.values()) + [
        Interpretation("spindle_speed", "func", table={("carbon_steel",): 12})
    ])
    broken = rebuild(model, facts=[extra], validate=False)
    diags = validate_completeness(broken)
    assert any(d.code == "E-UNDECL" and d.location == "spindle_speed" for d in diags)


# --- consistency -------------------------------------------------------------------

def test_clean_fixture_probe_is_consistent(em_micro):
    assert validate_consistency(em_micro.model, probe(em_micro.model)) == []


def test_unsatisfiable_bound_yields_enosol_with_witness(em_micro):
    model = em_micro.model
    table = SymbolTable.of_model(model)
    tight = rebuild(model, formulas=list(model.formulas) + [
        parse_formula("edge_angle > 40", table)
    ])
    diags = validate_consistency(tight, probe(tight))
    nosol = [d for d in diags if d.code == "E-NOSOL"]
    assert nosol and all(d.witness for d in nosol)
    # the bridge is among the first-falsified formulas for rejected candidates
    assert any("40" in d.location or "AngleKnowHow" in d.location for d in nosol)


def test_ground_false_literal_is_e_incons(em_micro):
    model = em_micro.model
    table = SymbolTable.of_model(model)
    broken = rebuild(model, formulas=list(model.formulas) + [
        parse_formula("12 > 13", table)
    ])
    diags = validate_consistency(broken, probe(broken))
    assert any(d.code == "E-INCONS" and d.location == "12 > 13" for d in diags)


def test_consistency_propagates_budget(em_micro):
    with pytest.raises(OracleBudgetExceeded):
        validate_consistency(em_micro.model, probe(em_micro.model), budget=10)


def test_report_format_is_tab_separated(em_micro):
    broken = inject_fact(em_micro.model, "rec_angle", ("carbon_steel",), 77)
    report = render_report(validate_pertinency(broken))
    line = report.splitlines()[0]
    code, location, message = line.split("\t")
    assert code == "E-SCALE" and location == "rec_angle" and message


def test_diagnostics_are_deterministically_ordered(em_micro):
    broken = inject_fact(
        inject_fact(em_micro.model, "rec_angle", ("carbon_steel",), 77),
        "life_at", ("carbon_steel", 1), 601,
    )
    a = validate_model(broken)
    b = validate_model(broken)
    assert [d.render() for d in a] == [d.render() for d in b]
    codes_locs = [(d.code, d.location) for d in a]
    assert codes_locs == sorted(codes_locs)
