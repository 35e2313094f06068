import pytest

from knowhow_dss.errors import (
    FactAtLevelOne,
    ForwardLayerRef,
    LevelOutOfRange,
    NameClash,
    PertinencyFailed,
    TypecheckFailed,
    UnknownScale,
)
from knowhow_dss.model import (
    FactAlgebra,
    Interpretation,
    ScaleRef,
    SignatureLayer,
    SymbolDecl,
    SymbolShape,
    SymbolsOfLayer,
    assemble_model,
    carrier_of,
    declare_symbol,
)
from knowhow_dss.scales import EnumValues, IntRange, ScaleSystem, define_scale
from knowhow_dss.values import SymRef


@pytest.fixture()
def scales():
    return ScaleSystem([
        define_scale("Material", EnumValues(["carbon_steel", "alloy_steel"])),
        define_scale("AngleDeg", IntRange(0, 45, 1), unit="deg"),
    ])


def test_declare_symbol_extends_a_layer(scales):
    layer = SignatureLayer(1)
    layer = declare_symbol(
        layer, SymbolDecl("edge_angle", 1, "const", result=ScaleRef("AngleDeg")), scales
    )
    assert layer.names() == ("edge_angle",)


def test_declare_symbol_rejects_unknown_scale_and_clash(scales):
    layer = SignatureLayer(1)
    with pytest.raises(UnknownScale):
        declare_symbol(
            layer, SymbolDecl("x", 1, "const", result=ScaleRef("Nope")), scales
        )
    layer = declare_symbol(
        layer, SymbolDecl("x", 1, "const", result=ScaleRef("AngleDeg")), scales
    )
    with pytest.raises(NameClash):
        declare_symbol(
            layer, SymbolDecl("x", 1, "const", result=ScaleRef("AngleDeg")), scales
        )


def test_functions_may_not_cite_their_own_layer():
    with pytest.raises(ForwardLayerRef):
        SymbolDecl("f", 1, "func", (SymbolsOfLayer(1),), ScaleRef("AngleDeg"))


def test_class_predicates_may_cite_their_own_layer():
    decl = SymbolDecl("Cls", 2, "pred", (SymbolsOfLayer(2),))
    assert decl.args[0].layer == 2
    with pytest.raises(ForwardLayerRef):
        SymbolDecl("Cls", 2, "pred", (SymbolsOfLayer(3),))


def test_carriers_nest_and_enumerate_deterministically(em_micro):
    model = em_micro.model
    c0 = carrier_of(model, 0)
    c1 = carrier_of(model, 1)
    c2 = carrier_of(model, 2)
    assert set(c0.values) <= set(c1.values) <= set(c2.values)
    # level 0 is exactly the scale values
    assert c0.values == model.scale_system.all_values()
    # level 2 additionally reifies the three level-1 unknowns
    assert set(c2.values) - set(c1.values) == {
        SymRef("edge_angle"), SymRef("tool_life"), SymRef("workpiece_material")
    }
    assert carrier_of(model, 2).values == c2.values  # stable order


def test_carrier_level_out_of_range(em_micro):
    with pytest.raises(LevelOutOfRange):
        carrier_of(em_micro.model, 7)


def test_reified_elements_resolve_to_unique_lower_layer_symbols(em_micro):
    model = em_micro.model
    for level in range(model.order + 1):
        for v in carrier_of(model, level).values:
            if isinstance(v, SymRef):
                decl = model.symbol(v.name)
                assert decl is not None and decl.layer <= level - 1


def test_fact_at_level_one_is_rejected(scales):
    layers = [
        SignatureLayer(0),
        SignatureLayer(1, [SymbolDecl("edge_angle", 1, "const", result=ScaleRef("AngleDeg"))]),
        SignatureLayer(2),
    ]
    with pytest.raises(FactAtLevelOne):
        assemble_model(
            scales, layers,
            [FactAlgebra(2, [Interpretation("edge_angle", "const", constant=12)])],
            order=2,
        )


def test_pertinency_rejects_off_scale_fact(scales):
    layers = [
        SignatureLayer(0),
        SignatureLayer(1),
        SignatureLayer(2, [
            SymbolDecl("rec_angle", 2, "func", (ScaleRef("Material"),), ScaleRef("AngleDeg"))
        ]),
    ]
    with pytest.raises(PertinencyFailed):
        assemble_model(
            scales, layers,
            [FactAlgebra(2, [Interpretation("rec_angle", "func", table={("titanium",): 9})])],
            order=2,
        )


def test_name_partition_is_enforced(scales):
    layers = [
        SignatureLayer(0),
        SignatureLayer(1, [SymbolDecl("Material", 1, "const", result=ScaleRef("AngleDeg"))]),
    ]
    with pytest.raises(NameClash):
        assemble_model(scales, layers, order=1)


def test_typecheck_failure_surfaces_at_assembly(scales):
    from knowhow_dss.formulas import SymbolTable, parse_formula

    edge = SymbolDecl("edge_angle", 1, "const", result=ScaleRef("AngleDeg"))
    mat = SymbolDecl("workpiece_material", 1, "const", result=ScaleRef("Material"))
    table = SymbolTable(
        {d.name: d for d in (edge, mat)}, {}, ["carbon_steel", "alloy_steel"]
    )
    bad = parse_formula("edge_angle = carbon_steel", table)
    with pytest.raises(TypecheckFailed):
        assemble_model(
            scales,
            [SignatureLayer(0), SignatureLayer(1, [edge, mat])],
            formulas=[bad],
            order=1,
        )


def test_shape_matching_filters_layer_symbols(em_micro):
    model = em_micro.model
    shape = SymbolShape("func", ("Material",), "AngleDeg")
    assert [d.name for d in model.shape_matches(shape, 2)] == ["rec_angle"]
    wide = SymbolShape("func", ("Material", "AngleDeg"), "Minutes")
    assert [d.name for d in model.shape_matches(wide, 2)] == ["life_at"]


def test_models_are_value_like(em_micro):
    model = em_micro.model
    before = carrier_of(model, 2).values
    _ = model.sigma1_constants()
    assert carrier_of(model, 2).values == before
