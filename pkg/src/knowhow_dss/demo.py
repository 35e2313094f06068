"""Desk-scale end-milling knowledge pack.

Eleven know-how tables compiled into one model: five functional
recommendation tables (edge angle, feed, tool life, machining time, and the
relational speed options) and six admissibility windows. Every table gets
its own class and higher-order bridge formula, so the pack carries eleven
formulas with order-2 variables.

Two named tasks share the same inputs and differ only in the optimization
criterion ("life" maximizes tool life, "time" minimizes machining time);
the admissible-speed options make the two criteria pick different cutting
speeds on most inputs. Numbers are synthetic fixture data, deliberately
monotone (tool life falls with cutting speed, machining time falls with
speed and feed), not machining advice.
"""
from __future__ import annotations

import itertools
from decimal import Decimal
from pathlib import Path
from typing import Iterable

from .knowhow import KnowHowTable, make_table
from .modelfile import ModelDocument
from .semantics import Criterion, TaskSpec
from .typecheck import check_term
from .formulas import SymbolTable, parse_term
from .workspace import Workspace

BASE_MODEL = """\
scales {
  AngleDeg : int 6..16 step 2 unit "deg"
  Feed : dec 0.1..0.4 step 0.1 unit "mm/tooth"
  Flutes : int 2..4 step 2
  Hardness : enum { soft, medium, hard }
  Life : int 20..240 step 20 unit "min"
  Material : enum { carbon_steel, alloy_steel, stainless_steel, aluminum }
  OpTime : int 10..120 step 10 unit "min"
  Speed : int 60..300 step 60 unit "m/min"
}
layer 0 {
}
layer 1 {
  const cutting_speed : Speed
  const edge_angle : AngleDeg
  const feed_rate : Feed
  const flute_count : Flutes
  const hardness_band : Hardness
  const machining_time : OpTime
  const tool_life : Life
  const workpiece_material : Material
}
layer 2 {
}
formulas {
  ~(machining_time > 120)
  tool_life >= 20
}
"""

MATERIALS = ("carbon_steel", "alloy_steel", "stainless_steel", "aluminum")
HARDNESS = ("soft", "medium", "hard")
FLUTES = (2, 4)

_ANGLE = {
    ("carbon_steel", "soft"): 14, ("carbon_steel", "medium"): 12, ("carbon_steel", "hard"): 10,
    ("alloy_steel", "soft"): 12, ("alloy_steel", "medium"): 10, ("alloy_steel", "hard"): 8,
    ("stainless_steel", "soft"): 10, ("stainless_steel", "medium"): 8,
    ("stainless_steel", "hard"): 6,
    ("aluminum", "soft"): 16, ("aluminum", "medium"): 14, ("aluminum", "hard"): 12,
}

_SPEED_OPTIONS = {
    ("carbon_steel", "soft"): (180, 240), ("carbon_steel", "medium"): (120, 240),
    ("carbon_steel", "hard"): (120, 180),
    ("alloy_steel", "soft"): (120, 240), ("alloy_steel", "medium"): (120, 180),
    ("alloy_steel", "hard"): (60, 120),
    ("stainless_steel", "soft"): (120, 180), ("stainless_steel", "medium"): (60, 120),
    ("stainless_steel", "hard"): (60, 120),
    ("aluminum", "soft"): (240, 300), ("aluminum", "medium"): (180, 300),
    ("aluminum", "hard"): (180, 240),
}

_FEED = {
    ("carbon_steel", 2): "0.2", ("carbon_steel", 4): "0.1",
    ("alloy_steel", 2): "0.2", ("alloy_steel", 4): "0.1",
    ("stainless_steel", 2): "0.1", ("stainless_steel", 4): "0.1",
    ("aluminum", 2): "0.4", ("aluminum", 4): "0.2",
}

_LIFE = {
    "carbon_steel": {60: 220, 120: 180, 180: 140, 240: 100, 300: 60},
    "alloy_steel": {60: 200, 120: 160, 180: 120, 240: 80, 300: 40},
    "stainless_steel": {60: 160, 120: 120, 180: 80, 240: 60, 300: 40},
    "aluminum": {60: 240, 120: 220, 180: 180, 240: 140, 300: 100},
}

_TIME = {
    60: {"0.1": 120, "0.2": 110, "0.3": 100, "0.4": 90},
    120: {"0.1": 100, "0.2": 90, "0.3": 80, "0.4": 70},
    180: {"0.1": 80, "0.2": 70, "0.3": 60, "0.4": 50},
    240: {"0.1": 60, "0.2": 50, "0.3": 40, "0.4": 30},
    300: {"0.1": 40, "0.2": 30, "0.3": 20, "0.4": 10},
}

_FEED_WINDOW = {
    "carbon_steel": ("0.1", "0.2", "0.3"),
    "alloy_steel": ("0.1", "0.2"),
    "stainless_steel": ("0.1", "0.2"),
    "aluminum": ("0.2", "0.3", "0.4"),
}

_HARD_SPEED = {
    "soft": (120, 180, 240, 300),
    "medium": (60, 120, 180, 240, 300),
    "hard": (60, 120, 180, 240),
}

_ANGLE_WINDOW = {
    "carbon_steel": (10, 12, 14),
    "alloy_steel": (8, 10, 12),
    "stainless_steel": (6, 8, 10),
    "aluminum": (12, 14, 16),
}

_CHIP_LOAD = {2: ("0.1", "0.2", "0.3", "0.4"), 4: ("0.1", "0.2", "0.3")}

_FLUTE_SPEED = {2: (60, 120, 180, 240, 300), 4: (120, 180, 240, 300)}

_ANGLE_HARD = {
    "soft": (10, 12, 14, 16),
    "medium": (8, 10, 12, 14),
    "hard": (6, 8, 10, 12),
}

DEFAULT_INPUTS = {
    "workpiece_material": "carbon_steel",
    "hardness_band": "medium",
    "flute_count": 4,
}
OUTPUTS = ("cutting_speed", "edge_angle", "feed_rate", "machining_time", "tool_life")


def _tables(scales) -> list[tuple[KnowHowTable, dict, str]]:
    """(table, binding, classname) triples in deterministic compile order."""
    dec = Decimal
    out: list[tuple[KnowHowTable, dict, str]] = []
    out.append((
        make_table(
            "t01_angle", "End mill edge angles recommended to prolong tool life",
            [("material", "Material"), ("hardness", "Hardness")],
            [("angle", "AngleDeg")],
            [(m, h, _ANGLE[(m, h)]) for m in MATERIALS for h in HARDNESS],
            scales,
            usage_note="Grind to the listed rake edge angle before roughing passes",
            provenance="synthetic fixture data, manufacturer survey style",
        ),
        {"angle": "edge_angle", "material": "workpiece_material", "hardness": "hardness_band"},
        "AngleKH",
    ))
    out.append((
        make_table(
            "t02_speeds", "Cutting speeds admissible per material and hardness band",
            [("material", "Material"), ("hardness", "Hardness"), ("speed", "Speed")],
            [],
            [(m, h, s) for (m, h), speeds in sorted(_SPEED_OPTIONS.items())
             for s in speeds],
            scales,
            usage_note="Lower listed speed favors tool life, higher favors cycle time",
            provenance="synthetic fixture data",
        ),
        {"material": "workpiece_material", "hardness": "hardness_band",
         "speed": "cutting_speed"},
        "SpeedOptionsKH",
    ))
    out.append((
        make_table(
            "t03_feed", "Feed per tooth recommended by material and flute count",
            [("material", "Material"), ("flutes", "Flutes")],
            [("feed", "Feed")],
            [(m, fl, dec(_FEED[(m, fl)])) for m in MATERIALS for fl in FLUTES],
            scales,
            usage_note="Reduce one step when cutting is unstable",
            provenance="synthetic fixture data",
        ),
        {"feed": "feed_rate", "material": "workpiece_material", "flutes": "flute_count"},
        "FeedKH",
    ))
    out.append((
        make_table(
            "t04_life", "Observed tool life by material and cutting speed",
            [("material", "Material"), ("speed", "Speed")],
            [("life", "Life")],
            [(m, s, _LIFE[m][s]) for m in MATERIALS for s in sorted(_LIFE[m])],
            scales,
            usage_note="Flank wear criterion VB 0.3",
            provenance="synthetic fixture data",
        ),
        {"life": "tool_life", "material": "workpiece_material", "speed": "cutting_speed"},
        "LifeKH",
    ))
    out.append((
        make_table(
            "t05_time", "Machining operation time by cutting speed and feed",
            [("speed", "Speed"), ("feed", "Feed")],
            [("optime", "OpTime")],
            [(s, dec(f), _TIME[s][f]) for s in sorted(_TIME) for f in sorted(_TIME[s])],
            scales,
            usage_note="Reference pocket, includes tool change allowance",
            provenance="synthetic fixture data",
        ),
        {"optime": "machining_time", "speed": "cutting_speed", "feed": "feed_rate"},
        "TimeKH",
    ))
    out.append((
        make_table(
            "t06_feedwindow", "Feed bands admissible per material",
            [("material", "Material"), ("feed", "Feed")],
            [],
            [(m, dec(f)) for m in MATERIALS for f in _FEED_WINDOW[m]],
            scales,
            provenance="synthetic fixture data",
        ),
        {"material": "workpiece_material", "feed": "feed_rate"},
        "FeedWindowKH",
    ))
    out.append((
        make_table(
            "t07_hardspeed", "Speed bands admissible per hardness band",
            [("hardness", "Hardness"), ("speed", "Speed")],
            [],
            [(h, s) for h in HARDNESS for s in _HARD_SPEED[h]],
            scales,
            provenance="synthetic fixture data",
        ),
        {"hardness": "hardness_band", "speed": "cutting_speed"},
        "HardSpeedKH",
    ))
    out.append((
        make_table(
            "t08_anglewindow", "Edge angle windows per material",
            [("material", "Material"), ("angle", "AngleDeg")],
            [],
            [(m, a) for m in MATERIALS for a in _ANGLE_WINDOW[m]],
            scales,
            provenance="synthetic fixture data",
        ),
        {"material": "workpiece_material", "angle": "edge_angle"},
        "AngleWindowKH",
    ))
    out.append((
        make_table(
            "t09_chipload", "Chip load limits per flute count",
            [("flutes", "Flutes"), ("feed", "Feed")],
            [],
            [(fl, dec(f)) for fl in FLUTES for f in _CHIP_LOAD[fl]],
            scales,
            usage_note="Stay low on slender tools",
            provenance="synthetic fixture data",
        ),
        {"flutes": "flute_count", "feed": "feed_rate"},
        "ChipLoadKH",
    ))
    out.append((
        make_table(
            "t10_flutespeed", "Speeds admissible per flute count",
            [("flutes", "Flutes"), ("speed", "Speed")],
            [],
            [(fl, s) for fl in FLUTES for s in _FLUTE_SPEED[fl]],
            scales,
            usage_note="Four-flute mills chatter below 120",
            provenance="synthetic fixture data",
        ),
        {"flutes": "flute_count", "speed": "cutting_speed"},
        "FluteSpeedKH",
    ))
    out.append((
        make_table(
            "t11_anglehard", "Edge angle windows per hardness band",
            [("hardness", "Hardness"), ("angle", "AngleDeg")],
            [],
            [(h, a) for h in HARDNESS for a in _ANGLE_HARD[h]],
            scales,
            provenance="synthetic fixture data",
        ),
        {"hardness": "hardness_band", "angle": "edge_angle"},
        "AngleHardKH",
    ))
    return out


def make_task(name: str, inputs: dict, criterion_kind: str, model) -> TaskSpec:
    """A pack task: fixed inputs, all five parameters as outputs."""
    table = SymbolTable.of_model(model)
    if criterion_kind == "life":
        crit = Criterion.maximize(check_term(parse_term("tool_life", table), model))
    elif criterion_kind == "time":
        crit = Criterion.minimize(check_term(parse_term("machining_time", table), model))
    else:
        crit = Criterion.none()
    return TaskSpec(name, dict(inputs), OUTPUTS, crit)


def input_sweep() -> Iterable[dict]:
    for m, h, fl in itertools.product(MATERIALS, HARDNESS, FLUTES):
        yield {"workpiece_material": m, "hardness_band": h, "flute_count": fl}


def build_demo(root: Path) -> Workspace:
    """Materialize the pack into a workspace; byte-identical on every build."""
    ws = Workspace.init(Path(root), BASE_MODEL)
    for table, binding, classname in _tables(ws.model.scale_system):
        ws.add_knowhow(table, binding, classname)
    model = ws.model
    tasks = {
        "life": make_task("life", DEFAULT_INPUTS, "life", model),
        "time": make_task("time", DEFAULT_INPUTS, "time", model),
    }
    diags = ws.replace_model(ModelDocument(model, tasks))
    if diags and any(d.severity == "error" for d in diags):
        raise RuntimeError("demo pack failed validation:\n"
                           + "\n".join(d.render() for d in diags))
    return ws
