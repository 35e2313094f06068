"""Domain scales: finite, explicitly enumerable value sets with units.

A scale is either an enumerated list of named values or a stepped numeric
range (integer or decimal). The scale system is the level-0 algebra: every
piece of data the engine touches is a value on one of these scales.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal
from typing import Iterable, Mapping, Optional, Sequence, Union

from .errors import BadBounds, DuplicateScale, EmptyScale, UnknownScale
from .values import Value, render_value

_IDENT_OK = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_"


def check_identifier(name: str, what: str = "identifier") -> str:
    if not name or name[0].isdigit() or any(c not in _IDENT_OK for c in name):
        raise ValueError(f"bad {what}: {name!r} (letters, digits, underscore; no leading digit)")
    return name


@dataclass(frozen=True)
class EnumValues:
    """Scale spec: explicit list of named values, in presentation order."""

    values: tuple[str, ...]

    def __init__(self, values: Iterable[str]):
        object.__setattr__(self, "values", tuple(values))


@dataclass(frozen=True)
class IntRange:
    """Scale spec: {lo, lo+step, ...} ∩ [lo, hi] over the integers."""

    lo: int
    hi: int
    step: int = 1


@dataclass(frozen=True)
class DecimalRange:
    """Scale spec: stepped decimal grid; bounds/step given as Decimal or str."""

    lo: Decimal
    hi: Decimal
    step: Decimal

    def __init__(self, lo, hi, step):
        object.__setattr__(self, "lo", Decimal(str(lo)))
        object.__setattr__(self, "hi", Decimal(str(hi)))
        object.__setattr__(self, "step", Decimal(str(step)))


ScaleSpec = Union[EnumValues, IntRange, DecimalRange]


@dataclass(frozen=True)
class Scale:
    """A named finite value set. `values` is the full set in canonical order."""

    name: str
    kind: str  # "enum" | "int" | "decimal"
    values: tuple[Value, ...]
    unit: Optional[str] = None
    _index: Mapping[Value, int] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {v: i for i, v in enumerate(self.values)})

    @property
    def is_numeric(self) -> bool:
        return self.kind in ("int", "decimal")

    def __contains__(self, value: object) -> bool:
        return value in self._index

    def index_of(self, value: Value) -> int:
        return self._index[value]

    def __len__(self) -> int:
        return len(self.values)


def define_scale(name: str, spec: ScaleSpec, unit: Optional[str] = None) -> Scale:
    """Build a scale from a spec, materializing its finite value set.

    Raises EmptyScale when no values result, BadBounds for a hollow range.
    """
    check_identifier(name, "scale name")
    if isinstance(spec, EnumValues):
        vals = tuple(spec.values)
        if not vals:
            raise EmptyScale(f"scale {name}: no values")
        if len(set(vals)) != len(vals):
            raise EmptyScale(f"scale {name}: duplicate values")
        for v in vals:
            check_identifier(v, f"value of scale {name}")
        return Scale(name, "enum", vals, unit)
    if isinstance(spec, IntRange):
        if spec.step <= 0 or spec.lo > spec.hi:
            raise BadBounds(f"scale {name}: range {spec.lo}..{spec.hi} step {spec.step}")
        vals = tuple(range(spec.lo, spec.hi + 1, spec.step))
        return Scale(name, "int", vals, unit)
    if isinstance(spec, DecimalRange):
        if spec.step <= 0 or spec.lo > spec.hi:
            raise BadBounds(f"scale {name}: range {spec.lo}..{spec.hi} step {spec.step}")
        out = []
        v = spec.lo
        while v <= spec.hi:
            out.append(v.normalize())
            v += spec.step
        return Scale(name, "decimal", tuple(out), unit)
    raise TypeError(f"unknown scale spec: {spec!r}")


@dataclass(frozen=True)
class ScaleSystem:
    """All scales of a model, keyed by name; iteration is name-sorted."""

    scales: Mapping[str, Scale]

    def __init__(self, scales: Iterable[Scale]):
        by_name: dict[str, Scale] = {}
        for s in scales:
            if s.name in by_name:
                raise DuplicateScale(s.name)
            by_name[s.name] = s
        object.__setattr__(self, "scales", dict(sorted(by_name.items())))

    def __contains__(self, name: str) -> bool:
        return name in self.scales

    def __getitem__(self, name: str) -> Scale:
        try:
            return self.scales[name]
        except KeyError:
            raise UnknownScale(name) from None

    def names(self) -> Sequence[str]:
        return tuple(self.scales)

    def all_values(self) -> tuple[Value, ...]:
        """Every scale value, ordered by scale name then value order."""
        out: list[Value] = []
        for s in self.scales.values():
            out.extend(s.values)
        return tuple(out)

    def enum_value_scales(self, value: str) -> tuple[Scale, ...]:
        """Scales whose enumerated values include `value` (literal resolution)."""
        return tuple(s for s in self.scales.values() if s.kind == "enum" and value in s)


def render_scale_decl(scale: Scale) -> str:
    """One-line declaration used by the model file format."""
    unit = f' unit "{scale.unit}"' if scale.unit else ""
    if scale.kind == "enum":
        return f"{scale.name} : enum {{ {', '.join(scale.values)} }}{unit}"
    lo, hi = scale.values[0], scale.values[-1]
    if scale.kind == "int":
        step = scale.values[1] - scale.values[0] if len(scale.values) > 1 else 1
        return f"{scale.name} : int {lo}..{hi} step {step}{unit}"
    step = scale.values[1] - scale.values[0] if len(scale.values) > 1 else Decimal(1)
    return (
        f"{scale.name} : dec {render_value(lo)}..{render_value(hi)}"
        f" step {render_value(step.normalize())}{unit}"
    )
