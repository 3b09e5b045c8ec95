"""Elimination-based reference solver used to validate the engine."""

from fractions import Fraction

import pytest

from omtq.formula import CnfFormula, OmtProblem, normalize_atom
from omtq.oracle import fm_minimize, oracle_solve


def _lits(*specs):
    return [normalize_atom(c, k, op) for (c, k, op) in specs]


# -- conjunction minimization ------------------------------------------------


def test_attained_minimum():
    res = fm_minimize(_lits(({0: 1}, -3, ">=")), 0)
    assert res.status == "optimum"
    assert res.value == 3 and res.attained


def test_strict_minimum_is_unattained():
    res = fm_minimize(_lits(({0: 1}, -3, ">")), 0)
    assert res.status == "optimum"
    assert res.value == 3 and not res.attained


def test_elimination_through_intermediate_variables():
    # cost >= x + y, x >= 1, y >= 2
    res = fm_minimize(
        _lits(
            ({0: 1, 1: -1, 2: -1}, 0, ">="),
            ({1: 1}, -1, ">="),
            ({2: 1}, -2, ">="),
        ),
        0,
    )
    assert res.status == "optimum"
    assert res.value == 3 and res.attained


def test_infeasible_window():
    res = fm_minimize(_lits(({0: 1}, -3, ">="), ({0: 1}, 0, "<=")), 0)
    assert res.status == "infeasible"


def test_infeasible_through_elimination():
    # x + y <= 0 against x >= 1, y >= 1 needs one elimination step
    res = fm_minimize(
        _lits(({1: 1, 2: 1}, 0, "<="), ({1: 1}, -1, ">="), ({2: 1}, -1, ">=")),
        0,
    )
    assert res.status == "infeasible"


def test_unbounded_objective():
    res = fm_minimize(_lits(({0: 1}, -3, "<=")), 0)
    assert res.status == "unbounded"


def test_equalities_and_negations():
    # x = 4 entails cost = 4 through cost = x
    res = fm_minimize(
        _lits(({0: 1, 1: -1}, 0, "="), ({1: 1}, -4, "=")),
        0,
    )
    assert res.status == "optimum"
    assert res.value == 4 and res.attained
    # not (x <= 2) means x > 2
    atom, _ = normalize_atom({0: 1}, -2, "<=")
    res = fm_minimize([(atom, False)], 0)
    assert res.value == 2 and not res.attained


def test_extra_rows_participate():
    res = fm_minimize(
        _lits(({0: 1, 1: -1}, 0, ">=")),
        0,
        extra_rows=[({1: Fraction(-1)}, Fraction(5), "<=")],  # -y + 5 <= 0
    )
    assert res.status == "optimum"
    assert res.value == 5


def test_size_guard():
    lits = _lits(*[({i: 1}, -1, ">=") for i in range(9)])
    with pytest.raises(ValueError):
        fm_minimize(lits, 0)


# -- full problems -----------------------------------------------------------


def _problem(text_clauses, lb=None, ub=None, nvars=1):
    f = CnfFormula()
    f.new_rat_var("cost")
    for i in range(1, nvars):
        f.new_rat_var(f"x{i}")
    for clause in text_clauses:
        lits = []
        for coeffs, const, op, pol in clause:
            atom, p = normalize_atom(coeffs, const, op)
            lits.append(f.lit_for_atom(atom, p == pol))
        f.add_clause(lits)
    return OmtProblem(f, 0, lb, ub)


def test_oracle_point_instance():
    prob = _problem([[({0: 1}, -3, "=", True)]])
    out = oracle_solve(prob)
    assert out.status == "optimum"
    assert out.value == 3 and out.attained


def test_oracle_picks_the_cheaper_disjunct():
    prob = _problem(
        [[({0: 1}, -7, ">=", True), ({0: 1}, -2, ">=", True)]],
        lb=0,
        ub=100,
    )
    out = oracle_solve(prob)
    assert out.status == "optimum"
    assert out.value == 2 and out.attained


def test_oracle_respects_the_range():
    prob = _problem([[({0: 1}, -3, "=", True)]], lb=0, ub=3)
    out = oracle_solve(prob)
    assert out.status == "unsat"
    assert out.value == 3  # unsat reports the given ub


def test_oracle_unsat_without_ub():
    prob = _problem([[({0: 1}, -3, ">=", True)], [({0: 1}, 0, "<=", True)]])
    out = oracle_solve(prob)
    assert out.status == "unsat"
    assert out.value is None


def test_oracle_unbounded():
    prob = _problem([[({0: 1}, 0, "<=", True)]])
    out = oracle_solve(prob)
    assert out.status == "unbounded"


def test_oracle_strict_infimum():
    prob = _problem([[({0: 1}, 0, ">", True)]])
    out = oracle_solve(prob)
    assert out.status == "optimum"
    assert out.value == 0 and not out.attained


def test_oracle_boolean_branching():
    # p selects between cost >= 5 and cost >= 1
    f = CnfFormula()
    f.new_rat_var("cost")
    p = f.new_prop("p")
    hi, hp = normalize_atom({0: 1}, -5, ">=")
    lo, lp = normalize_atom({0: 1}, -1, ">=")
    f.add_clause([-p, f.lit_for_atom(hi, hp)])
    f.add_clause([p, f.lit_for_atom(lo, lp)])
    out = oracle_solve(OmtProblem(f, 0, Fraction(0), Fraction(50)))
    assert out.status == "optimum"
    assert out.value == 1 and out.attained


def test_oracle_false_equality_labels_are_unconstraining():
    # clause (cost = 5 or cost >= 2): falsifying the equality label must
    # not inject a disequality into the arithmetic
    prob = _problem(
        [[({0: 1}, -5, "=", True), ({0: 1}, -2, ">=", True)]],
        lb=0,
        ub=100,
    )
    out = oracle_solve(prob)
    assert out.status == "optimum"
    assert out.value == 2 and out.attained
