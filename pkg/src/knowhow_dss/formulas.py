"""Concrete syntax for the quantifier-free formula language.

Grammar (whitespace-separated tokens; `#` starts nothing here, comments are
a file-format concern):

    formula := disj [ "->" formula ]              # right-associative
    disj    := conj { "|" conj }
    conj    := lit { "&" lit }
    lit     := "~" lit | "(" formula ")" | atom
    atom    := applic | term relop term
    relop   := "=" | "~=" | "<" | "<=" | ">" | ">="
    term    := term ("+"|"-") term | term ("*"|"/") term | primary
    primary := number | "-" number | applic | "(" term ")"
    applic  := ident [ "^" int ] [ "(" term { "," term } ")" ]

Identifier resolution happens at parse time against the supplied symbol and
variable tables, so `f^2(x)` builds a higher-order variable application and
`carbon_steel` an enumerated literal. Parentheses are parsed uniformly and
the formula/term distinction is enforced structurally, which keeps
`(a + b) > c` and `(A & B) -> C` both unambiguous.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal
from typing import Iterable, Mapping, Optional, Union

from .errors import ArityMismatch, FormulaSyntaxError, UnknownIdentifier
from .model import DomainModel, SymbolDecl, VariableDecl, KIND_CONST, KIND_PRED
from .values import render_value

# --- AST ----------------------------------------------------------------------

Loc = tuple[int, int]


@dataclass(frozen=True)
class Lit:
    """Number or enumerated-value literal; scale resolved by the checker."""

    value: Union[int, Decimal, str]
    loc: Loc = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class SymApp:
    """Application (or plain mention) of a declared symbol."""

    symbol: str
    args: tuple = ()
    loc: Loc = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class SymbolRef:
    """A bare function/predicate symbol used as a reified carrier element."""

    symbol: str
    loc: Loc = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class VarApp:
    """Application of a declared variable of the given order (possibly 0-ary)."""

    var: str
    order: int
    args: tuple = ()
    loc: Loc = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Arith:
    op: str  # + - * /
    left: "Term"
    right: "Term"
    loc: Loc = field(default=(0, 0), compare=False)


Term = Union[Lit, SymApp, SymbolRef, VarApp, Arith]


@dataclass(frozen=True)
class Atom:
    """Predicate application used as a formula."""

    app: Union[SymApp, VarApp]
    loc: Loc = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Compare:
    relop: str  # = ~= < <= > >=
    left: Term
    right: Term
    loc: Loc = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Not:
    sub: "Formula"
    loc: Loc = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"
    loc: Loc = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"
    loc: Loc = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"
    loc: Loc = field(default=(0, 0), compare=False)


Formula = Union[Atom, Compare, Not, And, Or, Implies]

RELOPS = ("=", "~=", "<", "<=", ">", ">=")


# --- symbol table protocol ------------------------------------------------------

class SymbolTable:
    """Resolution context for the parser, derived from a model or built ad hoc."""

    def __init__(
        self,
        symbols: Mapping[str, SymbolDecl],
        variables: Mapping[str, VariableDecl],
        enum_values: Iterable[str] = (),
    ):
        self.symbols = dict(symbols)
        self.variables = dict(variables)
        self.enum_values = set(enum_values)

    @classmethod
    def of_model(cls, model: DomainModel) -> "SymbolTable":
        enum_vals = [
            v for s in model.scale_system.scales.values() if s.kind == "enum" for v in s.values
        ]
        return cls({d.name: d for d in model.symbols()}, dict(model.variables), enum_vals)


# --- lexer ----------------------------------------------------------------------

_PUNCT = ("->", "~=", "<=", ">=", "(", ")", ",", "^", "~", "&", "|",
          "=", "<", ">", "+", "-", "*", "/")


@dataclass(frozen=True)
class _Tok:
    kind: str  # ident | number | punct | end
    text: str
    line: int
    col: int


def _lex(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c.isspace():
            i += 1
            col += 1
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(_Tok("ident", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            if j < n and text[j] == "." and j + 1 < n and text[j + 1].isdigit():
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
            toks.append(_Tok("number", text[i:j], line, col))
            col += j - i
            i = j
            continue
        for p in _PUNCT:
            if text.startswith(p, i):
                toks.append(_Tok("punct", p, line, col))
                i += len(p)
                col += len(p)
                break
        else:
            raise FormulaSyntaxError(line, col, f"a token (got {c!r})")
    toks.append(_Tok("end", "", line, col))
    return toks


# --- parser ----------------------------------------------------------------------

class _Parser:
    def __init__(self, toks: list[_Tok], table: SymbolTable):
        self.toks = toks
        self.pos = 0
        self.table = table

    def peek(self) -> _Tok:
        return self.toks[self.pos]

    def take(self) -> _Tok:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expect(self, text: str) -> _Tok:
        t = self.peek()
        if t.kind == "punct" and t.text == text:
            return self.take()
        raise FormulaSyntaxError(t.line, t.col, f"'{text}'")

    def at_punct(self, *texts: str) -> bool:
        t = self.peek()
        return t.kind == "punct" and t.text in texts

    # formula := disj [ "->" formula ]
    def formula(self) -> Formula:
        left = self.disj()
        if self.at_punct("->"):
            t = self.take()
            right = self.formula()
            return Implies(self._as_formula(left), self._as_formula(right), (t.line, t.col))
        return left

    def disj(self) -> Formula:
        left = self.conj()
        while self.at_punct("|"):
            t = self.take()
            right = self.conj()
            left = Or(self._as_formula(left), self._as_formula(right), (t.line, t.col))
        return left

    def conj(self) -> Formula:
        left = self.lit()
        while self.at_punct("&"):
            t = self.take()
            right = self.lit()
            left = And(self._as_formula(left), self._as_formula(right), (t.line, t.col))
        return left

    def lit(self) -> Formula:
        if self.at_punct("~"):
            t = self.take()
            return Not(self._as_formula(self.lit()), (t.line, t.col))
        return self.atom()

    # atom := term [relop term]; a lone term must be a predicate application
    def atom(self):
        left = self.term()
        if self.at_punct(*RELOPS):
            t = self.take()
            right = self.term()
            return Compare(t.text, self._as_term(left), self._as_term(right), (t.line, t.col))
        return left

    def _as_formula(self, node) -> Formula:
        if isinstance(node, (Atom, Compare, Not, And, Or, Implies)):
            return node
        if isinstance(node, (SymApp, VarApp)) and self._is_predicate(node):
            return Atom(node, node.loc)
        loc = getattr(node, "loc", (0, 0))
        raise FormulaSyntaxError(loc[0], loc[1], "a formula (found a term)")

    def _is_predicate(self, node) -> bool:
        if isinstance(node, SymApp):
            decl = self.table.symbols.get(node.symbol)
            return decl is not None and decl.kind == KIND_PRED
        if isinstance(node, VarApp):
            var = self.table.variables.get(node.var)
            return var is not None and var.shape is not None and var.shape.kind == KIND_PRED
        return False

    # term := addsub with * / binding tighter
    def term(self) -> Term:
        left = self.mul()
        while self.at_punct("+", "-"):
            t = self.take()
            right = self.mul()
            left = Arith(t.text, self._as_term(left), self._as_term(right), (t.line, t.col))
        return left

    def mul(self) -> Term:
        left = self.primary()
        while self.at_punct("*", "/"):
            t = self.take()
            right = self.primary()
            left = Arith(t.text, self._as_term(left), self._as_term(right), (t.line, t.col))
        return left

    def _as_term(self, node) -> Term:
        if isinstance(node, (Lit, SymApp, SymbolRef, VarApp, Arith)):
            return node
        loc = getattr(node, "loc", (0, 0))
        raise FormulaSyntaxError(loc[0], loc[1], "a term (found a formula)")

    def primary(self):
        t = self.peek()
        if t.kind == "number":
            self.take()
            return Lit(self._number(t.text), (t.line, t.col))
        if t.kind == "punct" and t.text == "-":
            self.take()
            num = self.peek()
            if num.kind != "number":
                raise FormulaSyntaxError(num.line, num.col, "a number after unary '-'")
            self.take()
            v = self._number(num.text)
            return Lit(-v, (t.line, t.col))
        if t.kind == "punct" and t.text == "(":
            self.take()
            inner = self.formula()
            self.expect(")")
            return inner
        if t.kind == "ident":
            return self.applic()
        raise FormulaSyntaxError(t.line, t.col, "a term or formula")

    @staticmethod
    def _number(text: str):
        return Decimal(text).normalize() if "." in text else int(text)

    def applic(self):
        ident = self.take()
        loc = (ident.line, ident.col)
        order: Optional[int] = None
        if self.at_punct("^"):
            self.take()
            num = self.peek()
            if num.kind != "number" or "." in num.text:
                raise FormulaSyntaxError(num.line, num.col, "an integer order after '^'")
            self.take()
            order = int(num.text)
        args: tuple = ()
        if self.at_punct("("):
            self.take()
            collected = [self._as_term(self.term())]
            while self.at_punct(","):
                self.take()
                collected.append(self._as_term(self.term()))
            self.expect(")")
            args = tuple(collected)
        return self._resolve(ident.text, order, args, loc)

    def _resolve(self, name: str, order: Optional[int], args: tuple, loc: Loc):
        var = self.table.variables.get(name)
        if order is not None:
            if var is None:
                raise UnknownIdentifier(
                    f"line {loc[0]}, col {loc[1]}: no variable named {name!r}"
                )
            if order != var.order:
                raise ArityMismatch(
                    f"variable {name} has order {var.order}, written as ^{order}"
                )
        if var is not None:
            self._check_var_arity(var, args, loc)
            return VarApp(name, var.order, args, loc)
        decl = self.table.symbols.get(name)
        if decl is not None:
            if decl.kind == KIND_CONST:
                if args:
                    raise ArityMismatch(f"object constant {name} takes no arguments")
                return SymApp(name, (), loc)
            if not args:
                # bare function/predicate mention denotes the reified symbol
                return SymbolRef(name, loc)
            if len(args) != decl.arity():
                raise ArityMismatch(
                    f"{name} expects {decl.arity()} argument(s), got {len(args)}"
                )
            return SymApp(name, args, loc)
        if name in self.table.enum_values:
            if args:
                raise ArityMismatch(f"enumerated value {name} takes no arguments")
            return Lit(name, loc)
        raise UnknownIdentifier(f"line {loc[0]}, col {loc[1]}: unknown identifier {name!r}")

    @staticmethod
    def _check_var_arity(var: VariableDecl, args: tuple, loc: Loc) -> None:
        if var.order == 1 or var.shape is None:
            if args:
                raise ArityMismatch(f"order-1 variable {var.name} takes no arguments")
            return
        if not args:
            # bare mention: reified use or constant-shape value; checked in context
            return
        expected = len(var.shape.args)
        if len(args) != expected:
            raise ArityMismatch(
                f"variable {var.name} expects {expected} argument(s), got {len(args)}"
            )


def parse_formula(text: str, symbols: SymbolTable) -> Formula:
    """Parse source text into a Formula AST, resolving identifiers eagerly."""
    parser = _Parser(_lex(text), symbols)
    node = parser.formula()
    end = parser.peek()
    if end.kind != "end":
        raise FormulaSyntaxError(end.line, end.col, "end of formula")
    return parser._as_formula(node)


def parse_term(text: str, symbols: SymbolTable) -> Term:
    """Parse a bare term (used for optimization objectives)."""
    parser = _Parser(_lex(text), symbols)
    node = parser._as_term(parser.term())
    end = parser.peek()
    if end.kind != "end":
        raise FormulaSyntaxError(end.line, end.col, "end of term")
    return node


# --- renderer ----------------------------------------------------------------------

_F_PREC = {Implies: 1, Or: 2, And: 3, Not: 4}
_T_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def render_formula(f: Formula) -> str:
    """Minimal-parentheses source text; parse(render(f)) == f structurally."""
    return _render_f(f, 0)


def render_term(t: Term) -> str:
    return _render_t(t, 0)


def _render_f(f: Formula, outer: int) -> str:
    if isinstance(f, Atom):
        return _render_t(f.app, 0)
    if isinstance(f, Compare):
        return f"{_render_t(f.left, 0)} {f.relop} {_render_t(f.right, 0)}"
    if isinstance(f, Not):
        inner = _render_f(f.sub, _F_PREC[Not])
        return f"~{inner}"
    if isinstance(f, (And, Or, Implies)):
        prec = _F_PREC[type(f)]
        op = {And: "&", Or: "|", Implies: "->"}[type(f)]
        if isinstance(f, Implies):  # right-associative
            left = _render_f(f.left, prec + 1)
            right = _render_f(f.right, prec)
        else:  # & and | chain to the left
            left = _render_f(f.left, prec)
            right = _render_f(f.right, prec + 1)
        text = f"{left} {op} {right}"
        return f"({text})" if prec < outer else text
    raise TypeError(f"not a formula: {f!r}")


def _render_t(t: Term, outer: int) -> str:
    if isinstance(t, Lit):
        return render_value(t.value)
    if isinstance(t, SymbolRef):
        return t.symbol
    if isinstance(t, SymApp):
        if not t.args:
            return t.symbol
        return f"{t.symbol}({', '.join(_render_t(a, 0) for a in t.args)})"
    if isinstance(t, VarApp):
        head = t.var if t.order == 1 else f"{t.var}^{t.order}"
        if not t.args:
            return head
        return f"{head}({', '.join(_render_t(a, 0) for a in t.args)})"
    if isinstance(t, Arith):
        prec = _T_PREC[t.op]
        left = _render_t(t.left, prec)
        # left-associative: the right operand needs parens at equal precedence
        right = _render_t(t.right, prec + 1)
        text = f"{left} {t.op} {right}"
        return f"({text})" if prec < outer else text
    raise TypeError(f"not a term: {t!r}")


def free_variables(f) -> tuple[str, ...]:
    """Names of variables occurring in a formula or term, sorted."""
    out: set[str] = set()

    def walk(node) -> None:
        if isinstance(node, VarApp):
            out.add(node.var)
            for a in node.args:
                walk(a)
        elif isinstance(node, (SymApp,)):
            for a in node.args:
                walk(a)
        elif isinstance(node, Arith):
            walk(node.left)
            walk(node.right)
        elif isinstance(node, Atom):
            walk(node.app)
        elif isinstance(node, Compare):
            walk(node.left)
            walk(node.right)
        elif isinstance(node, Not):
            walk(node.sub)
        elif isinstance(node, (And, Or, Implies)):
            walk(node.left)
            walk(node.right)

    walk(f)
    return tuple(sorted(out))


def referenced_symbols(f) -> tuple[str, ...]:
    """Names of declared symbols mentioned anywhere in a formula/term, sorted."""
    out: set[str] = set()

    def walk(node) -> None:
        if isinstance(node, (SymApp, SymbolRef)):
            out.add(node.symbol)
            for a in getattr(node, "args", ()):
                walk(a)
        elif isinstance(node, VarApp):
            for a in node.args:
                walk(a)
        elif isinstance(node, Arith):
            walk(node.left)
            walk(node.right)
        elif isinstance(node, Atom):
            walk(node.app)
        elif isinstance(node, Compare):
            walk(node.left)
            walk(node.right)
        elif isinstance(node, Not):
            walk(node.sub)
        elif isinstance(node, (And, Or, Implies)):
            walk(node.left)
            walk(node.right)

    walk(f)
    return tuple(sorted(out))
