"""Linear terms, canonical atoms, CNF formulas and problem instances.

Atoms are kept in the canonical shape (term rel 0) with rel in {<=, <, =}
so that syntactically different spellings of the same constraint share
one propositional variable.  CNF conversion is the polarity-based
Tseitin variant (Plaisted-Greenbaum): definitional clauses are emitted
only for the polarities that actually occur, which keeps the result
equisatisfiable, linear in size, and lets models of the output project
onto models of the input.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Union

from .arith import EQ, LE, LT, DeltaRational

# ---------------------------------------------------------------------------
# terms and atoms


class LinTerm:
    """Mutable builder for sum(coeff_i * var_i) + const over variable ids."""

    __slots__ = ("coeffs", "const")

    def __init__(self, coeffs=None, const=0):
        self.coeffs: dict[int, Fraction] = {}
        if coeffs:
            for v, c in coeffs.items():
                c = Fraction(c)
                if c:
                    self.coeffs[v] = c
        self.const = Fraction(const)

    def copy(self) -> "LinTerm":
        t = LinTerm()
        t.coeffs = dict(self.coeffs)
        t.const = self.const
        return t

    def add_var(self, var: int, coeff) -> "LinTerm":
        c = self.coeffs.get(var, Fraction(0)) + Fraction(coeff)
        if c:
            self.coeffs[var] = c
        else:
            self.coeffs.pop(var, None)
        return self

    def add(self, other: "LinTerm") -> "LinTerm":
        for v, c in other.coeffs.items():
            self.add_var(v, c)
        self.const += other.const
        return self

    def scale(self, k) -> "LinTerm":
        k = Fraction(k)
        if k == 0:
            self.coeffs = {}
            self.const = Fraction(0)
            return self
        self.coeffs = {v: c * k for v, c in self.coeffs.items()}
        self.const *= k
        return self

    def is_ground(self) -> bool:
        return not self.coeffs


@dataclass(frozen=True)
class Atom:
    """Canonical atom: coeffs (sorted var/coeff pairs) rel-compared to 0.

    The lowest-id variable's coefficient has absolute value 1; equalities
    additionally fix its sign to +1 so both orientations hash equally.
    """

    coeffs: tuple  # ((var, Fraction), ...) sorted by var, no zeros
    const: Fraction
    rel: str  # LE, LT or EQ

    def variables(self):
        return [v for v, _ in self.coeffs]

    def single_var(self):
        """(var, coeff) when the atom mentions exactly one variable."""
        if len(self.coeffs) == 1:
            return self.coeffs[0]
        return None

    def delta_value(self, valuation) -> DeltaRational:
        acc = DeltaRational(self.const)
        for v, c in self.coeffs:
            acc = acc + valuation[v].scaled(c)
        return acc

    def eval_concrete(self, valuation) -> bool:
        """Truth under a map var -> Fraction."""
        total = self.const + sum((Fraction(valuation[v]) * c for v, c in self.coeffs), Fraction(0))
        if self.rel == LE:
            return total <= 0
        if self.rel == LT:
            return total < 0
        return total == 0

    def __repr__(self):
        parts = " + ".join(f"{c}*x{v}" for v, c in self.coeffs)
        return f"({parts} + {self.const} {self.rel} 0)"


def normalize_atom(coeffs: dict, const, op: str) -> tuple[Atom, bool]:
    """Canonicalize a raw comparison into (atom, polarity).

    ``op`` is one of <=, <, =, !=, >=, >; the raw constraint is
    (sum coeffs + const) op 0.  The term must mention at least one
    variable (callers fold ground comparisons first).
    """
    term = {v: Fraction(c) for v, c in coeffs.items() if Fraction(c) != 0}
    const = Fraction(const)
    if not term:
        raise ValueError("ground comparison reached normalize_atom")

    polarity = True
    if op == ">=":
        op = LE
        term = {v: -c for v, c in term.items()}
        const = -const
    elif op == ">":
        op = LT
        term = {v: -c for v, c in term.items()}
        const = -const
    elif op == "!=":
        op = EQ
        polarity = False

    first = min(term)
    lead = term[first]
    if op == EQ:
        scale = 1 / lead  # may be negative: equalities are symmetric
    else:
        scale = 1 / abs(lead)
    if scale != 1:
        term = {v: c * scale for v, c in term.items()}
        const = const * scale

    pairs = tuple(sorted(term.items()))
    return Atom(pairs, const, op), polarity


def negate_rel(rel: str) -> str:
    """Relation for the negation after moving the sign into the term."""
    if rel == LE:
        return LT
    if rel == LT:
        return LE
    raise ValueError("negated equality has no single-atom form")


# ---------------------------------------------------------------------------
# boolean expression AST (input to cnfize)


class BoolExpr:
    __slots__ = ()


@dataclass(frozen=True)
class BConst(BoolExpr):
    value: bool


@dataclass(frozen=True)
class BProp(BoolExpr):
    var: int  # propositional solver variable


class BAtom(BoolExpr):
    """Raw comparison leaf; canonicalized during CNF conversion."""

    __slots__ = ("coeffs", "const", "op")

    def __init__(self, coeffs, const, op):
        self.coeffs = dict(coeffs)
        self.const = Fraction(const)
        self.op = op


class BNot(BoolExpr):
    __slots__ = ("arg",)

    def __init__(self, arg):
        self.arg = arg


class BAnd(BoolExpr):
    __slots__ = ("args",)

    def __init__(self, args):
        self.args = list(args)


class BOr(BoolExpr):
    __slots__ = ("args",)

    def __init__(self, args):
        self.args = list(args)


class BImplies(BoolExpr):
    __slots__ = ("lhs", "rhs")

    def __init__(self, lhs, rhs):
        self.lhs = lhs
        self.rhs = rhs


class BIff(BoolExpr):
    __slots__ = ("lhs", "rhs")

    def __init__(self, lhs, rhs):
        self.lhs = lhs
        self.rhs = rhs


TRUE = BConst(True)
FALSE = BConst(False)


def conj(args) -> BoolExpr:
    args = list(args)
    if not args:
        return TRUE
    if len(args) == 1:
        return args[0]
    return BAnd(args)


def disj(args) -> BoolExpr:
    args = list(args)
    if not args:
        return FALSE
    if len(args) == 1:
        return args[0]
    return BOr(args)


# ---------------------------------------------------------------------------
# CNF container


PROP = "prop"
ATOM = "atom"
LABEL = "label"


class CnfFormula:
    """Clause set over solver variables 1..n plus the meaning of each var.

    Solver literals are signed ints.  A variable is either a named
    proposition, a theory atom, or a fresh CNF label.  Rational
    (theory) variables live in a separate table indexed from 0.
    """

    def __init__(self):
        self.clauses: list[list[int]] = []
        self.kind: list[str] = []  # kind[v-1]
        self.payload: list = []  # name / Atom / None
        self.rat_names: list[str] = []
        self._rat_ids: dict[str, int] = {}
        self._prop_ids: dict[str, int] = {}
        self._atom_ids: dict[Atom, int] = {}

    # -- variables

    def new_rat_var(self, name: str) -> int:
        if name in self._rat_ids:
            raise ValueError(f"duplicate rational variable {name!r}")
        vid = len(self.rat_names)
        self.rat_names.append(name)
        self._rat_ids[name] = vid
        return vid

    def rat_var(self, name: str) -> Optional[int]:
        return self._rat_ids.get(name)

    def _new_solver_var(self, kind: str, payload) -> int:
        self.kind.append(kind)
        self.payload.append(payload)
        return len(self.kind)

    def new_prop(self, name: str) -> int:
        if name in self._prop_ids:
            raise ValueError(f"duplicate Bool variable {name!r}")
        v = self._new_solver_var(PROP, name)
        self._prop_ids[name] = v
        return v

    def prop(self, name: str) -> Optional[int]:
        return self._prop_ids.get(name)

    def new_label(self) -> int:
        return self._new_solver_var(LABEL, None)

    def lit_for_atom(self, atom: Atom, polarity: bool = True) -> int:
        v = self._atom_ids.get(atom)
        if v is None:
            v = self._new_solver_var(ATOM, atom)
            self._atom_ids[atom] = v
        return v if polarity else -v

    def atom_of(self, var: int) -> Optional[Atom]:
        if self.kind[var - 1] == ATOM:
            return self.payload[var - 1]
        return None

    @property
    def num_solver_vars(self) -> int:
        return len(self.kind)

    def add_clause(self, lits: Iterable[int]):
        self.clauses.append(list(lits))

    def theory_atoms(self):
        """(solver var, Atom) pairs in registration order."""
        for i, k in enumerate(self.kind):
            if k == ATOM:
                yield i + 1, self.payload[i]

    def copy(self) -> "CnfFormula":
        """Independent clone; the search engines register new atoms and
        clauses on their copy so the input formula stays reusable."""
        f = CnfFormula()
        f.clauses = [list(c) for c in self.clauses]
        f.kind = list(self.kind)
        f.payload = list(self.payload)
        f.rat_names = list(self.rat_names)
        f._rat_ids = dict(self._rat_ids)
        f._prop_ids = dict(self._prop_ids)
        f._atom_ids = dict(self._atom_ids)
        return f


# ---------------------------------------------------------------------------
# CNF conversion


def _fold_ground(coeffs, const, op) -> Optional[bool]:
    """Truth value when the comparison has no variables, else None."""
    if any(Fraction(c) != 0 for c in coeffs.values()):
        return None
    c = Fraction(const)
    if op in (LE, ">="):
        return c <= 0 if op == LE else -c <= 0
    if op in (LT, ">"):
        return c < 0 if op == LT else -c < 0
    if op == EQ:
        return c == 0
    if op == "!=":
        return c != 0
    raise ValueError(f"bad op {op!r}")


def _split_equalities(expr: BoolExpr, positive_only: bool) -> BoolExpr:
    """Rewrite equality leaves that occur under negation (or both
    polarities) into conjunctions of two weak inequalities, so negated
    equalities turn into (< or >) disjunctions during clausification and
    the theory solver never sees a negated equality."""
    if isinstance(expr, (BConst, BProp)):
        return expr
    if isinstance(expr, BAtom):
        op = expr.op
        if op == "!=":
            expr = BNot(BAtom(expr.coeffs, expr.const, EQ))
            return _split_equalities(expr, positive_only)
        if op == EQ and not positive_only:
            neg = {v: -c for v, c in expr.coeffs.items()}
            return BAnd([
                BAtom(expr.coeffs, expr.const, LE),
                BAtom(neg, -expr.const, LE),
            ])
        return expr
    if isinstance(expr, BNot):
        return BNot(_split_equalities(expr.arg, not positive_only))
    if isinstance(expr, BAnd):
        return BAnd([_split_equalities(a, positive_only) for a in expr.args])
    if isinstance(expr, BOr):
        return BOr([_split_equalities(a, positive_only) for a in expr.args])
    if isinstance(expr, BImplies):
        return BImplies(
            _split_equalities(expr.lhs, not positive_only),
            _split_equalities(expr.rhs, positive_only),
        )
    if isinstance(expr, BIff):
        return BIff(
            _split_equalities(expr.lhs, False),
            _split_equalities(expr.rhs, False),
        )
    raise TypeError(f"not a BoolExpr: {expr!r}")


class _Cnfizer:
    def __init__(self, formula: CnfFormula):
        self.f = formula
        self.labels: dict[int, int] = {}  # id(node) -> label var
        self.defined: set[tuple[int, bool]] = set()

    def literal_of_leaf(self, node, sign: bool) -> Optional[int]:
        if isinstance(node, BProp):
            return node.var if sign else -node.var
        if isinstance(node, BAtom):
            folded = _fold_ground(node.coeffs, node.const, node.op)
            if folded is not None:
                # caller deals with constants; encode as the trivial label
                return None
            atom, pol = normalize_atom(node.coeffs, node.const, node.op)
            return self.f.lit_for_atom(atom, pol == sign)
        return None

    def pos_lit(self, part: BoolExpr) -> Union[int, bool]:
        """Literal standing for ``part`` in a positive clause position.

        Returns True/False when the part folds to a constant.
        """
        sign = True
        while isinstance(part, BNot):
            sign = not sign
            part = part.arg
        if isinstance(part, BConst):
            return part.value == sign
        if isinstance(part, BAtom):
            folded = _fold_ground(part.coeffs, part.const, part.op)
            if folded is not None:
                return folded == sign
            lit = self.literal_of_leaf(part, sign)
            return lit
        if isinstance(part, BProp):
            return part.var if sign else -part.var
        q = self.labels.get(id(part))
        if q is None:
            q = self.f.new_label()
            self.labels[id(part)] = q
        key = (q, sign)
        if key not in self.defined:
            self.defined.add(key)
            guard = -q if sign else q
            for cl in self.clauses(part, sign):
                if cl is True:
                    continue
                if cl is False:
                    self.f.add_clause([guard])
                    break
                self.f.add_clause([guard] + cl)
        return q if sign else -q

    def _clause(self, parts) -> Union[bool, list[int]]:
        out = []
        for p in parts:
            lit = self.pos_lit(p)
            if lit is True:
                return True
            if lit is False:
                continue
            out.append(lit)
        if not out:
            return False
        return out

    def clauses(self, expr: BoolExpr, polarity: bool):
        """Yield clauses (lists of lits), True (tautology) or False (empty)."""
        if isinstance(expr, BConst):
            yield True if expr.value == polarity else False
            return
        if isinstance(expr, (BProp, BAtom)):
            lit = self.pos_lit(expr if polarity else BNot(expr))
            yield lit if isinstance(lit, bool) else [lit]
            return
        if isinstance(expr, BNot):
            yield from self.clauses(expr.arg, not polarity)
            return
        if isinstance(expr, BAnd):
            if polarity:
                for a in expr.args:
                    yield from self.clauses(a, True)
            else:
                yield self._clause([BNot(a) for a in expr.args])
            return
        if isinstance(expr, BOr):
            if polarity:
                yield self._clause(list(expr.args))
            else:
                for a in expr.args:
                    yield from self.clauses(a, False)
            return
        if isinstance(expr, BImplies):
            if polarity:
                yield self._clause([BNot(expr.lhs), expr.rhs])
            else:
                yield from self.clauses(expr.lhs, True)
                yield from self.clauses(expr.rhs, False)
            return
        if isinstance(expr, BIff):
            a, b = expr.lhs, expr.rhs
            if polarity:
                yield self._clause([BNot(a), b])
                yield self._clause([a, BNot(b)])
            else:
                yield self._clause([a, b])
                yield self._clause([BNot(a), BNot(b)])
            return
        raise TypeError(f"not a BoolExpr: {expr!r}")


def cnfize(expr: BoolExpr, into: Optional[CnfFormula] = None) -> CnfFormula:
    """Clausify ``expr`` and append the result to ``into`` (or a fresh
    formula).  Raises ValueError when the expression folds to false at
    the top level with no variables involved; an unconditionally false
    input still produces the empty clause rather than raising, as long
    as it mentions structure."""
    f = into if into is not None else CnfFormula()
    expr = _split_equalities(expr, True)
    conv = _Cnfizer(f)
    for cl in conv.clauses(expr, True):
        if cl is True:
            continue
        if cl is False:
            f.add_clause([])
        else:
            f.add_clause(cl)
    return f


# ---------------------------------------------------------------------------
# optimization problem


@dataclass
class OmtProblem:
    """CNF formula plus the cost variable to minimize and optional range.

    The range convention is [lb, ub[: the lower bound is admissible, the
    upper is not.  Bounds are enforced as unit constraints by the search
    engines, not stored inside the clause set.
    """

    formula: CnfFormula
    cost: int
    lb: Optional[Fraction] = None
    ub: Optional[Fraction] = None

    def __post_init__(self):
        if not (0 <= self.cost < len(self.formula.rat_names)):
            raise ValueError("cost variable not in the problem's variable table")
        if self.lb is not None and self.ub is not None and not (self.lb < self.ub):
            raise ValueError("empty cost range: require lb < ub")
        for cl in self.formula.clauses:
            for lit in cl:
                if lit < 0 and self.formula.atom_of(-lit) is not None:
                    if self.formula.atom_of(-lit).rel == EQ:
                        raise ValueError(
                            "negated equality literal in clause set; "
                            "split it into strict inequalities first"
                        )

    @property
    def cost_name(self) -> str:
        return self.formula.rat_names[self.cost]
