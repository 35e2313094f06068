from knowhow_dss.demo import build_demo, input_sweep, make_task
from knowhow_dss.modelfile import save_model
from knowhow_dss.semantics import apply_criterion, compare_solution_sets, make_solution_set, oracle_solutions
from knowhow_dss.solver import explain, solve
from knowhow_dss.validation import validate_model


def test_build_is_byte_identical(tmp_path):
    a = build_demo(tmp_path / "a")
    b = build_demo(tmp_path / "b")
    assert a.model_path.read_text() == b.model_path.read_text()
    tables_a = sorted(p.name for p in a.knowhow_dir.glob("*.kht"))
    tables_b = sorted(p.name for p in b.knowhow_dir.glob("*.kht"))
    assert tables_a == tables_b
    for name in tables_a:
        assert (a.knowhow_dir / name).read_text() == (b.knowhow_dir / name).read_text()


def test_pack_validates_without_errors(demo_ws):
    diags = validate_model(demo_ws.model)
    assert not any(d.severity == "error" for d in diags)


def test_pack_ships_at_least_ten_tables_and_bridges(demo_ws):
    tables = demo_ws.stored_tables()
    assert len(tables) >= 10
    order2 = [f for f in demo_ws.model.typed_formulas if any(v.order == 2 for v in f.free)]
    assert len(order2) >= 10


def test_named_tasks_designed_tradeoff(demo_ws):
    model = demo_ws.model
    life = solve(model, demo_ws.get_task("life")).solution_set
    time = solve(model, demo_ws.get_task("time")).solution_set
    assert life.values() != time.values()
    by_name = dict(zip(life.outputs, life.values()[0]))
    assert by_name["tool_life"] == 180 and by_name["cutting_speed"] == 120
    by_name_t = dict(zip(time.outputs, time.values()[0]))
    assert by_name_t["machining_time"] == 60 and by_name_t["cutting_speed"] == 240


def test_every_input_combination_solves_and_oracle_agrees(demo_ws):
    """Pack-wide solver/oracle agreement on both named criteria."""
    model = demo_ws.model
    for inputs in input_sweep():
        life = make_task("life_probe", inputs, "life", model)
        time = make_task("time_probe", inputs, "time", model)
        rl, rt = solve(model, life), solve(model, time)
        plain = make_task("probe", inputs, "none", model)
        candidates = list(oracle_solutions(model, plain).candidates)
        for task, solved in ((life, rl), (time, rt)):
            expected = make_solution_set(
                model, task.outputs, apply_criterion(candidates, task.criterion, model)
            )
            assert compare_solution_sets(solved.solution_set, expected).empty, inputs


def test_every_table_is_cited_in_some_explanation(demo_ws):
    model = demo_ws.model
    cited_symbols = set()
    for inputs in input_sweep():
        for kind in ("life", "time"):
            result = solve(model, make_task("probe", inputs, kind, model))
            for sol in result.solutions:
                payload = explain(sol, "structured")
                for node in payload["nodes"].values():
                    for j in node["justifications"]:
                        for p in j["premises"]:
                            if p["kind"] == "fact":
                                cited_symbols.add(p["symbol"])
    for table_id in demo_ws.stored_tables():
        prefix = f"kh_{table_id}"
        assert any(
            s == prefix or s.startswith(prefix + "_") for s in cited_symbols
        ), f"table {table_id} never cited"


def test_pack_document_round_trips(demo_ws):
    from knowhow_dss.modelfile import load_model

    text = save_model(demo_ws.document)
    assert save_model(load_model(text)) == text
