"""Reader for the SMT-LIB-flavored input format.

Supported commands: declare-fun (zero-arity Real or Bool), assert,
minimize (exactly one, naming a declared Real), set-info with :lb / :ub
range hints, and the no-ops set-logic / set-option / check-sat / exit.
Boolean structure may use and, or, not, =>, = (on Bools) and the
comparisons =, <=, <, >=, > on linear terms built from +, -, * and
constant division.  Errors carry line:column positions.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .arith import parse_rat
from .formula import (
    BAnd,
    BAtom,
    BConst,
    BIff,
    BImplies,
    BNot,
    BOr,
    BProp,
    BoolExpr,
    CnfFormula,
    LinTerm,
    OmtProblem,
    cnfize,
    conj,
)

COMPARISONS = ("<=", "<", ">=", ">")
BOOL_HEADS = ("and", "or", "not", "=>")


class ParseError(ValueError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {msg}")
        self.line = line
        self.col = col


@dataclass
class SExpr:
    items: Optional[list]  # None for atoms
    text: Optional[str]
    line: int
    col: int

    @property
    def is_atom(self) -> bool:
        return self.items is None

    def head(self) -> Optional[str]:
        if self.items and self.items[0].is_atom:
            return self.items[0].text
        return None


def _tokens(text: str):
    line, col, i, n = 1, 1, 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
        elif ch in " \t\r":
            col += 1
            i += 1
        elif ch == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif ch in "()":
            yield (ch, ch, line, col)
            col += 1
            i += 1
        else:
            j = i
            while j < n and text[j] not in " \t\r\n();":
                j += 1
            yield ("atom", text[i:j], line, col)
            col += j - i
            i = j


def parse_sexprs(text: str) -> list[SExpr]:
    stack: list[SExpr] = []
    top: list[SExpr] = []
    for kind, tok, line, col in _tokens(text):
        if kind == "(":
            stack.append(SExpr([], None, line, col))
        elif kind == ")":
            if not stack:
                raise ParseError("unbalanced ')'", line, col)
            node = stack.pop()
            (stack[-1].items if stack else top).append(node)
        else:
            node = SExpr(None, tok, line, col)
            (stack[-1].items if stack else top).append(node)
    if stack:
        raise ParseError("unclosed '('", stack[-1].line, stack[-1].col)
    return top


def _try_rat(text: str) -> Optional[Fraction]:
    try:
        return parse_rat(text)
    except ValueError:
        return None


class _ProblemBuilder:
    def __init__(self):
        self.formula = CnfFormula()
        self.asserts: list[BoolExpr] = []
        self.cost: Optional[int] = None
        self.lb: Optional[Fraction] = None
        self.ub: Optional[Fraction] = None

    # -- terms

    def term(self, node: SExpr) -> LinTerm:
        if node.is_atom:
            q = _try_rat(node.text)
            if q is not None:
                return LinTerm(const=q)
            rid = self.formula.rat_var(node.text)
            if rid is not None:
                return LinTerm({rid: 1})
            if self.formula.prop(node.text) is not None:
                raise ParseError(f"Bool variable {node.text!r} used in a term", node.line, node.col)
            raise ParseError(f"unknown identifier {node.text!r}", node.line, node.col)
        head = node.head()
        args = node.items[1:]
        if head == "+":
            if not args:
                raise ParseError("'+' needs arguments", node.line, node.col)
            acc = LinTerm()
            for a in args:
                acc.add(self.term(a))
            return acc
        if head == "-":
            if not args:
                raise ParseError("'-' needs arguments", node.line, node.col)
            acc = self.term(args[0])
            if len(args) == 1:
                return acc.scale(-1)
            for a in args[1:]:
                acc.add(self.term(a).scale(-1))
            return acc
        if head == "*":
            if len(args) < 2:
                raise ParseError("'*' needs two arguments", node.line, node.col)
            parts = [self.term(a) for a in args]
            nonground = [p for p in parts if not p.is_ground()]
            if len(nonground) > 1:
                raise ParseError("nonlinear product", node.line, node.col)
            factor = Fraction(1)
            for p in parts:
                if p.is_ground():
                    factor *= p.const
            if not nonground:
                return LinTerm(const=factor)
            return nonground[0].scale(factor)
        if head == "/":
            if len(args) != 2:
                raise ParseError("'/' needs two arguments", node.line, node.col)
            num = self.term(args[0])
            den = self.term(args[1])
            if not den.is_ground():
                raise ParseError("division by a non-constant", args[1].line, args[1].col)
            if den.const == 0:
                raise ParseError("division by zero", args[1].line, args[1].col)
            return num.scale(Fraction(1) / den.const)
        raise ParseError(f"unknown arithmetic operator {head!r}", node.line, node.col)

    # -- sort dispatch for '='

    def _looks_boolean(self, node: SExpr) -> bool:
        if node.is_atom:
            if node.text in ("true", "false"):
                return True
            return self.formula.prop(node.text) is not None
        head = node.head()
        if head in BOOL_HEADS or head in COMPARISONS:
            return True
        if head == "=":
            return self._looks_boolean(node.items[1]) if len(node.items) > 1 else False
        return False

    # -- boolean expressions

    def bool_expr(self, node: SExpr) -> BoolExpr:
        if node.is_atom:
            if node.text == "true":
                return BConst(True)
            if node.text == "false":
                return BConst(False)
            pv = self.formula.prop(node.text)
            if pv is not None:
                return BProp(pv)
            if self.formula.rat_var(node.text) is not None:
                raise ParseError(
                    f"Real variable {node.text!r} used as a Bool", node.line, node.col
                )
            raise ParseError(f"unknown identifier {node.text!r}", node.line, node.col)
        head = node.head()
        if head is None:
            raise ParseError("expected an operator application", node.line, node.col)
        args = node.items[1:]
        if head == "and":
            if not args:
                raise ParseError("'and' needs arguments", node.line, node.col)
            return BAnd([self.bool_expr(a) for a in args])
        if head == "or":
            if not args:
                raise ParseError("'or' needs arguments", node.line, node.col)
            return BOr([self.bool_expr(a) for a in args])
        if head == "not":
            if len(args) != 1:
                raise ParseError("'not' needs one argument", node.line, node.col)
            return BNot(self.bool_expr(args[0]))
        if head == "=>":
            if len(args) < 2:
                raise ParseError("'=>' needs two arguments", node.line, node.col)
            expr = self.bool_expr(args[-1])
            for a in reversed(args[:-1]):
                expr = BImplies(self.bool_expr(a), expr)
            return expr
        if head in COMPARISONS or head == "=":
            if len(args) != 2:
                raise ParseError(f"{head!r} compares exactly two operands", node.line, node.col)
            if head == "=" and (self._looks_boolean(args[0]) or self._looks_boolean(args[1])):
                return BIff(self.bool_expr(args[0]), self.bool_expr(args[1]))
            diff = self.term(args[0]).add(self.term(args[1]).scale(-1))
            return BAtom(diff.coeffs, diff.const, head)
        raise ParseError(f"unknown operator {head!r}", node.line, node.col)

    # -- commands

    def command(self, node: SExpr):
        if node.is_atom:
            raise ParseError(f"expected a command, got {node.text!r}", node.line, node.col)
        head = node.head()
        args = node.items[1:]
        if head == "declare-fun":
            if (
                len(args) != 3
                or not args[0].is_atom
                or args[1].is_atom
                or not args[2].is_atom
            ):
                raise ParseError("expected (declare-fun name () Sort)", node.line, node.col)
            name, params, sort = args[0].text, args[1].items, args[2].text
            if params:
                raise ParseError("only zero-arity declarations are supported", args[1].line, args[1].col)
            if self.formula.rat_var(name) is not None or self.formula.prop(name) is not None:
                raise ParseError(f"redeclaration of {name!r}", args[0].line, args[0].col)
            if sort == "Real":
                self.formula.new_rat_var(name)
            elif sort == "Bool":
                self.formula.new_prop(name)
            else:
                raise ParseError(f"unsupported sort {sort!r}", args[2].line, args[2].col)
        elif head == "assert":
            if len(args) != 1:
                raise ParseError("'assert' takes one expression", node.line, node.col)
            self.asserts.append(self.bool_expr(args[0]))
        elif head == "minimize":
            if len(args) != 1 or not args[0].is_atom:
                raise ParseError("'minimize' takes one declared Real variable", node.line, node.col)
            if self.cost is not None:
                raise ParseError("duplicate 'minimize'", node.line, node.col)
            rid = self.formula.rat_var(args[0].text)
            if rid is None:
                raise ParseError(
                    f"minimize target {args[0].text!r} is not a declared Real",
                    args[0].line,
                    args[0].col,
                )
            self.cost = rid
        elif head == "set-info":
            if len(args) >= 2 and args[0].is_atom and args[0].text in (":lb", ":ub"):
                value = self.term(args[1])
                if not value.is_ground():
                    raise ParseError("range bound must be a constant", args[1].line, args[1].col)
                if args[0].text == ":lb":
                    self.lb = value.const
                else:
                    self.ub = value.const
            # other annotations are ignored
        elif head in ("check-sat", "exit", "set-logic", "set-option", "get-objectives", "get-model"):
            pass
        else:
            raise ParseError(f"unknown command {head!r}", node.line, node.col)

    def finish(self) -> OmtProblem:
        if self.cost is None:
            raise ParseError("input contains no 'minimize' command", 1, 1)
        cnfize(conj(self.asserts), self.formula)
        try:
            return OmtProblem(self.formula, self.cost, self.lb, self.ub)
        except ValueError as exc:
            raise ParseError(str(exc), 1, 1) from exc


def parse_problem(text: str) -> OmtProblem:
    builder = _ProblemBuilder()
    for node in parse_sexprs(text):
        builder.command(node)
    return builder.finish()
