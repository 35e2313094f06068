"""Exception hierarchy shared by every engine module."""


class EngineError(Exception):
    """Base class for all errors raised by this package."""


# --- scales and model assembly ---------------------------------------------

class DuplicateScale(EngineError):
    pass


class EmptyScale(EngineError):
    pass


class BadBounds(EngineError):
    pass


class UnknownScale(EngineError):
    pass


class NameClash(EngineError):
    pass


class ForwardLayerRef(EngineError):
    pass


class FactAtLevelOne(EngineError):
    pass


class TypecheckFailed(EngineError):
    pass


class PertinencyFailed(EngineError):
    pass


class LevelOutOfRange(EngineError):
    pass


# --- formula language -------------------------------------------------------

class FormulaSyntaxError(EngineError):
    """Syntax error with source position; `expected` names what would have parsed."""

    def __init__(self, line: int, col: int, expected: str):
        super().__init__(f"line {line}, col {col}: expected {expected}")
        self.line = line
        self.col = col
        self.expected = expected


class UnknownIdentifier(EngineError):
    pass


class ArityMismatch(EngineError):
    pass


class SortMismatch(EngineError):
    pass


class OrderExceedsModel(EngineError):
    pass


class NonNumericComparison(EngineError):
    pass


# --- semantics and solving ---------------------------------------------------

class IncompleteCandidate(EngineError):
    pass


class OracleBudgetExceeded(EngineError):
    def __init__(self, limit: int, required: int):
        super().__init__(f"candidate space {required} exceeds enumeration budget {limit}")
        self.limit = limit
        self.required = required


class UnsupportedOutputKind(EngineError):
    pass


class SchemaMismatch(EngineError):
    pass


class NoDerivation(EngineError):
    def __init__(self, symbol: str):
        super().__init__(f"no rule derives a value for '{symbol}' on any branch")
        self.symbol = symbol


class NoSolution(EngineError):
    def __init__(self, stage: str, detail: str = ""):
        msg = f"no solution ({stage})" + (f": {detail}" if detail else "")
        super().__init__(msg)
        self.stage = stage
        self.detail = detail


class ObjectiveUndefined(EngineError):
    pass


class IterationCapExceeded(EngineError):
    pass


class DerivationConflict(EngineError):
    pass


class TraceMissing(EngineError):
    pass


class UnknownTask(EngineError):
    pass


# --- know-how ingestion ------------------------------------------------------

class ScaleMismatch(EngineError):
    pass


class DuplicateTableId(EngineError):
    pass


class UnboundResultColumn(EngineError):
    pass


class AmbiguousColumnBinding(EngineError):
    pass


class ClassShapeConflict(EngineError):
    pass


# --- workspace and persistence ----------------------------------------------

class ParseError(EngineError):
    """Model/table document parse failure with a line position."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.detail = message


class DanglingDependency(EngineError):
    pass


class SwapInProgress(EngineError):
    pass
