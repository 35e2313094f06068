"""Layered domain model: signatures, interpretations, carriers.

Symbols live in disjoint layers 0..n. Level-1 symbols are the task unknowns
and never carry stored interpretations; levels >= 2 hold the fact algebras
(know-how and precedents). Carriers nest: level i contains every scale value
plus the reified symbols of layers below i (level 1 admits only the
object-sort layer-0 symbols).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence, Union

from .errors import (
    EngineError,
    FactAtLevelOne,
    ForwardLayerRef,
    LevelOutOfRange,
    NameClash,
    OrderExceedsModel,
    PertinencyFailed,
    TypecheckFailed,
    UnknownScale,
)
from .scales import Scale, ScaleSystem, check_identifier
from .values import SymRef, Value

MAX_ORDER = 3

KIND_CONST = "const"
KIND_FUNC = "func"
KIND_PRED = "pred"
_KINDS = (KIND_CONST, KIND_FUNC, KIND_PRED)


@dataclass(frozen=True)
class ScaleRef:
    """Carrier reference naming a scale."""

    scale: str

    def __str__(self) -> str:
        return self.scale


@dataclass(frozen=True)
class SymbolsOfLayer:
    """Carrier reference admitting the reified symbols of one layer."""

    layer: int

    def __str__(self) -> str:
        return f"symbols({self.layer})"


CarrierRef = Union[ScaleRef, SymbolsOfLayer]


@dataclass(frozen=True)
class SymbolDecl:
    """One signature entry: object constant, function, or predicate."""

    name: str
    layer: int
    kind: str
    args: tuple[CarrierRef, ...] = ()
    result: Optional[CarrierRef] = None

    def __post_init__(self):
        check_identifier(self.name, "symbol name")
        if self.kind not in _KINDS:
            raise ValueError(f"symbol {self.name}: kind must be one of {_KINDS}")
        if self.kind == KIND_CONST and self.args:
            raise ValueError(f"object constant {self.name} cannot take arguments")
        if self.kind == KIND_PRED and self.result is not None:
            raise ValueError(f"predicate {self.name} cannot declare a result")
        if self.kind in (KIND_CONST, KIND_FUNC) and self.result is None:
            raise ValueError(f"{self.kind} {self.name} needs a result carrier")
        for ref in self.args + ((self.result,) if self.result else ()):
            if isinstance(ref, SymbolsOfLayer):
                # predicates may class their own layer's symbols; everything
                # else speaks strictly about lower layers
                limit = self.layer if self.kind == KIND_PRED else self.layer - 1
                if ref.layer > limit or ref.layer < 0:
                    raise ForwardLayerRef(
                        f"symbol {self.name} (layer {self.layer}) cites symbols({ref.layer})"
                    )

    def arity(self) -> int:
        return len(self.args)


def render_symbol_decl(decl: SymbolDecl) -> str:
    args = f"({', '.join(str(a) for a in decl.args)})" if decl.args else ""
    if decl.kind == KIND_PRED:
        return f"pred {decl.name}{args}"
    if decl.kind == KIND_CONST:
        return f"const {decl.name} : {decl.result}"
    return f"func {decl.name}{args} : {decl.result}"


@dataclass(frozen=True)
class SignatureLayer:
    """All symbols declared at one level, name-sorted."""

    level: int
    symbols: tuple[SymbolDecl, ...]

    def __init__(self, level: int, symbols: Iterable[SymbolDecl] = ()):
        object.__setattr__(self, "level", level)
        syms = tuple(sorted(symbols, key=lambda s: s.name))
        for s in syms:
            if s.layer != level:
                raise ValueError(f"symbol {s.name} declared for layer {s.layer}, not {level}")
        object.__setattr__(self, "symbols", syms)

    def names(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.symbols)

    def with_symbol(self, decl: SymbolDecl) -> "SignatureLayer":
        return SignatureLayer(self.level, self.symbols + (decl,))


@dataclass(frozen=True)
class Interpretation:
    """Stored meaning of one symbol: a value, a finite table, or a tuple set."""

    symbol: str
    kind: str
    constant: Optional[Value] = None
    table: Mapping[tuple, Value] = field(default_factory=dict)
    tuples: frozenset = frozenset()


@dataclass(frozen=True)
class FactAlgebra:
    """Interpretations for all layer-`level` symbols (levels >= 2)."""

    level: int
    interpretations: Mapping[str, Interpretation]

    def __init__(self, level: int, interpretations: Iterable[Interpretation] = ()):
        if level < 2:
            raise FactAtLevelOne(f"fact algebras start at level 2, got {level}")
        object.__setattr__(self, "level", level)
        by_name: dict[str, Interpretation] = {}
        for it in interpretations:
            if it.symbol in by_name:
                raise NameClash(f"duplicate interpretation for {it.symbol}")
            by_name[it.symbol] = it
        object.__setattr__(self, "interpretations", dict(sorted(by_name.items())))


@dataclass(frozen=True)
class SymbolShape:
    """Shape constraint for a higher-order variable: kind + argument scales + result."""

    kind: str
    args: tuple[str, ...] = ()
    result: Optional[str] = None

    def matches(self, decl: SymbolDecl) -> bool:
        if decl.kind != self.kind or len(decl.args) != len(self.args):
            return False
        for ref, scale in zip(decl.args, self.args):
            if not isinstance(ref, ScaleRef) or ref.scale != scale:
                return False
        if self.kind == KIND_PRED:
            return True
        return isinstance(decl.result, ScaleRef) and decl.result.scale == self.result

    def __str__(self) -> str:
        args = f"({', '.join(self.args)})" if self.args else ""
        if self.kind == KIND_PRED:
            return f"pred{args}"
        return f"{self.kind}{args} -> {self.result}"


@dataclass(frozen=True)
class VariableDecl:
    """Declared formula variable: order 1 ranges over a scale, order k >= 2
    over the reified layer-k symbols matching `shape`."""

    name: str
    order: int
    scale: Optional[str] = None          # order 1
    shape: Optional[SymbolShape] = None  # order >= 2

    def __post_init__(self):
        check_identifier(self.name, "variable name")
        if self.order < 1 or self.order > MAX_ORDER:
            raise ValueError(f"variable {self.name}: order {self.order} outside 1..{MAX_ORDER}")
        if self.order == 1 and (self.scale is None or self.shape is not None):
            raise ValueError(f"order-1 variable {self.name} needs a scale reference")
        if self.order > 1 and (self.shape is None or self.scale is not None):
            raise ValueError(f"order-{self.order} variable {self.name} needs a symbol shape")


@dataclass(frozen=True)
class CarrierSet:
    """The nested carrier at one level, in deterministic enumeration order."""

    level: int
    values: tuple[Value, ...]


@dataclass(frozen=True)
class DomainModel:
    """An assembled, immutable model of order n.

    `formulas` keeps the constraint set Φ in canonical (rendered-text) order;
    `typed_formulas` are their checked counterparts, computed at assembly.
    """

    order: int
    scale_system: ScaleSystem
    layers: tuple[SignatureLayer, ...]
    facts: Mapping[int, FactAlgebra]
    formulas: tuple = ()
    variables: Mapping[str, VariableDecl] = field(default_factory=dict)
    typed_formulas: tuple = field(default=(), compare=False)
    _symbols: Mapping[str, SymbolDecl] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        by_name: dict[str, SymbolDecl] = {}
        for layer in self.layers:
            for s in layer.symbols:
                by_name[s.name] = s
        object.__setattr__(self, "_symbols", by_name)

    # --- lookups -------------------------------------------------------------

    def symbol(self, name: str) -> Optional[SymbolDecl]:
        return self._symbols.get(name)

    def symbols(self) -> Sequence[SymbolDecl]:
        return tuple(self._symbols.values())

    def layer(self, level: int) -> SignatureLayer:
        if level < 0 or level > self.order:
            raise LevelOutOfRange(f"layer {level} outside 0..{self.order}")
        return self.layers[level]

    def sigma1_constants(self) -> tuple[SymbolDecl, ...]:
        return tuple(s for s in self.layer(1).symbols if s.kind == KIND_CONST)

    def interpretation(self, name: str) -> Optional[Interpretation]:
        decl = self.symbol(name)
        if decl is None or decl.layer < 2:
            return None
        algebra = self.facts.get(decl.layer)
        return algebra.interpretations.get(name) if algebra else None

    def shape_matches(self, shape: SymbolShape, level: int) -> tuple[SymbolDecl, ...]:
        """Layer-`level` symbols matching a variable shape, name-sorted."""
        if level > self.order:
            return ()
        return tuple(s for s in self.layer(level).symbols if shape.matches(s))

    def scale_of_ref(self, ref: CarrierRef) -> Optional[Scale]:
        if isinstance(ref, ScaleRef):
            return self.scale_system[ref.scale]
        return None

    def value_in_carrier(self, value: Value, ref: CarrierRef) -> bool:
        if isinstance(ref, ScaleRef):
            return not isinstance(value, SymRef) and value in self.scale_system[ref.scale]
        if not isinstance(value, SymRef):
            return False
        decl = self.symbol(value.name)
        return decl is not None and decl.layer == ref.layer


def carrier_of(model: DomainModel, level: int) -> CarrierSet:
    """The level-`level` carrier: scale values by scale name then value order,
    followed by the reified symbols (name-sorted) the level admits."""
    if level < 0 or level > model.order:
        raise LevelOutOfRange(f"carrier level {level} outside 0..{model.order}")
    values: list[Value] = list(model.scale_system.all_values())
    reified: list[str] = []
    if level >= 1:
        reified.extend(s.name for s in model.layer(0).symbols if s.kind == KIND_CONST)
    for j in range(1, level):
        reified.extend(model.layer(j).names())
    values.extend(SymRef(n) for n in sorted(reified))
    return CarrierSet(level, tuple(values))


# --- assembly ----------------------------------------------------------------

def declare_symbol(layer: SignatureLayer, decl: SymbolDecl,
                   scale_system: ScaleSystem,
                   taken_names: Iterable[str] = ()) -> SignatureLayer:
    """Extend a layer with one declaration, checking carrier refs and freshness."""
    if decl.layer != layer.level:
        raise ValueError(f"declaration targets layer {decl.layer}, not {layer.level}")
    known = set(taken_names) | set(layer.names()) | set(scale_system.names())
    if decl.name in known:
        raise NameClash(decl.name)
    for ref in decl.args + ((decl.result,) if decl.result else ()):
        if isinstance(ref, ScaleRef) and ref.scale not in scale_system:
            raise UnknownScale(f"symbol {decl.name}: scale {ref.scale}")
    return layer.with_symbol(decl)


def _check_interpretation(model: DomainModel, level: int, interp: Interpretation) -> None:
    decl = model.symbol(interp.symbol)
    if decl is None:
        raise PertinencyFailed(f"fact for undeclared symbol {interp.symbol}")
    if decl.layer == 1:
        raise FactAtLevelOne(interp.symbol)
    if decl.layer != level:
        raise PertinencyFailed(
            f"fact for {interp.symbol} stored at level {level}, declared at {decl.layer}"
        )

    def check_tuple(tup: tuple, what: str) -> None:
        if len(tup) != len(decl.args):
            raise PertinencyFailed(f"{what}: arity {len(tup)} != {decl.arity()}")
        for v, ref in zip(tup, decl.args):
            if not model.value_in_carrier(v, ref):
                raise PertinencyFailed(f"{what}: value {v!r} not in carrier {ref}")

    if decl.kind == KIND_CONST:
        if interp.constant is None:
            raise PertinencyFailed(f"constant {decl.name}: no value")
        if not model.value_in_carrier(interp.constant, decl.result):
            raise PertinencyFailed(
                f"constant {decl.name}: value {interp.constant!r} not in carrier {decl.result}"
            )
    elif decl.kind == KIND_FUNC:
        for tup, res in interp.table.items():
            check_tuple(tup, f"{decl.name}{tup}")
            if not model.value_in_carrier(res, decl.result):
                raise PertinencyFailed(
                    f"{decl.name}{tup}: result {res!r} not in carrier {decl.result}"
                )
    else:
        for tup in interp.tuples:
            check_tuple(tup, f"{decl.name}{tup}")


def assemble_model(
    scale_system: ScaleSystem,
    layers: Sequence[SignatureLayer],
    facts: Sequence[FactAlgebra] = (),
    formulas: Sequence = (),
    variables: Sequence[VariableDecl] = (),
    order: int = None,
    validate: bool = True,
) -> DomainModel:
    """Assemble and fully validate a domain model.

    Formulas are accepted as parsed `Formula` ASTs; they are typechecked here
    and stored in canonical rendered-text order so every construction path
    yields the same rule ordering.
    """
    from .formulas import render_formula  # local import: formulas depends on model
    from .typecheck import check_formula

    if order is None:
        order = len(layers) - 1
    if order < 1 or order > MAX_ORDER:
        raise ValueError(f"model order {order} outside 1..{MAX_ORDER}")
    if len(layers) != order + 1:
        raise ValueError(f"need layers 0..{order}, got {len(layers)}")
    for i, layer in enumerate(layers):
        if layer.level != i:
            raise ValueError(f"layer at position {i} has level {layer.level}")

    # global name uniqueness across layers, scales, variables, enum values
    seen: dict[str, str] = {}
    for s in scale_system.scales.values():
        seen[s.name] = "scale"
        if s.kind == "enum":
            for v in s.values:
                seen.setdefault(v, "enum value")
    for layer in layers:
        for decl in layer.symbols:
            if decl.name in seen:
                raise NameClash(f"symbol {decl.name} collides with a {seen[decl.name]}")
            seen[decl.name] = "symbol"
    var_map: dict[str, VariableDecl] = {}
    for v in variables:
        if v.name in seen:
            raise NameClash(f"variable {v.name} collides with a {seen[v.name]}")
        seen[v.name] = "variable"
        var_map[v.name] = v

    for layer in layers:
        for decl in layer.symbols:
            for ref in decl.args + ((decl.result,) if decl.result else ()):
                if isinstance(ref, ScaleRef) and ref.scale not in scale_system:
                    raise UnknownScale(f"symbol {decl.name}: scale {ref.scale}")
    for v in var_map.values():
        if v.order == 1:
            if v.scale not in scale_system:
                raise UnknownScale(f"variable {v.name}: scale {v.scale}")
        else:
            if v.order > order:
                raise OrderExceedsModel(
                    f"variable {v.name}: order {v.order} exceeds model order {order}"
                )
            for sc in v.shape.args + ((v.shape.result,) if v.shape.result else ()):
                if sc not in scale_system:
                    raise UnknownScale(f"variable {v.name}: scale {sc}")

    fact_map: dict[int, FactAlgebra] = {}
    for fa in facts:
        if fa.level in fact_map:
            raise ValueError(f"two fact algebras at level {fa.level}")
        if fa.level > order:
            raise LevelOutOfRange(f"facts at level {fa.level} in an order-{order} model")
        fact_map[fa.level] = fa
    fact_map = dict(sorted(fact_map.items()))

    sorted_formulas = tuple(sorted(formulas, key=render_formula))
    model = DomainModel(
        order=order,
        scale_system=scale_system,
        layers=tuple(layers),
        facts=fact_map,
        formulas=sorted_formulas,
        variables=dict(sorted(var_map.items())),
    )

    if validate:
        for level, fa in fact_map.items():
            for interp in fa.interpretations.values():
                _check_interpretation(model, level, interp)
        typed = []
        for f in sorted_formulas:
            try:
                typed.append(check_formula(f, model))
            except EngineError as err:
                raise TypecheckFailed(f"{render_formula(f)}: {err}") from err
        object.__setattr__(model, "typed_formulas", tuple(typed))
    return model
