"""Atoms, CNF conversion and problem construction."""

from fractions import Fraction

import pytest

from omtq.arith import EQ, LE, LT
from omtq.formula import (
    Atom,
    BAtom,
    BConst,
    BIff,
    BImplies,
    BNot,
    BOr,
    BProp,
    CnfFormula,
    LinTerm,
    OmtProblem,
    cnfize,
    conj,
    disj,
    normalize_atom,
)


def test_linterm_builder():
    t = LinTerm({0: 2}, 1)
    t.add_var(1, 3).add_var(0, -2)
    # the x0 coefficient cancelled away entirely
    assert t.coeffs == {1: Fraction(3)}
    t.scale(2)
    assert t.coeffs == {1: Fraction(6)}
    assert t.const == Fraction(2)
    assert not t.is_ground()
    assert LinTerm(const=5).is_ground()


def test_normalize_atom_scales_the_leading_coefficient():
    atom, pol = normalize_atom({0: 2, 1: 4}, 6, "<=")
    assert atom == Atom(((0, Fraction(1)), (1, Fraction(2))), Fraction(3), LE)
    assert pol


def test_normalize_atom_flips_ge_into_le():
    a1, p1 = normalize_atom({0: 1}, -3, ">=")
    a2, p2 = normalize_atom({0: -1}, 3, "<=")
    assert p1 and p2
    assert a1 == a2
    assert a1.rel == LE


def test_normalize_atom_equality_orientation():
    # x - y = 1 and y - x = -1 are the same atom
    a1, _ = normalize_atom({0: 1, 1: -1}, -1, "=")
    a2, _ = normalize_atom({0: -1, 1: 1}, 1, "=")
    assert a1 == a2


def test_normalize_atom_disequality_is_negated_equality():
    atom, pol = normalize_atom({0: 1}, -2, "!=")
    assert atom.rel == EQ
    assert not pol


def test_normalize_atom_rejects_ground_input():
    with pytest.raises(ValueError):
        normalize_atom({0: 0}, 1, "<=")


def test_atom_eval_concrete():
    atom, _ = normalize_atom({0: 1, 1: 1}, -4, LE)  # x + y <= 4
    assert atom.eval_concrete({0: 2, 1: 2})
    assert not atom.eval_concrete({0: 3, 1: Fraction(3, 2)})
    assert atom.single_var() is None
    single, _ = normalize_atom({0: 3}, -6, LT)
    assert single.single_var() == (0, Fraction(1))


def test_atom_interning_shares_solver_vars():
    f = CnfFormula()
    f.new_rat_var("x")
    a1, _ = normalize_atom({0: 2}, -6, "<=")
    a2, _ = normalize_atom({0: 1}, -3, "<=")
    assert a1 == a2
    l1 = f.lit_for_atom(a1)
    l2 = f.lit_for_atom(a2)
    assert l1 == l2
    assert f.lit_for_atom(a1, False) == -l1
    assert f.atom_of(l1) == a1
    assert list(f.theory_atoms()) == [(l1, a1)]


def test_duplicate_names_rejected():
    f = CnfFormula()
    f.new_rat_var("x")
    f.new_prop("p")
    with pytest.raises(ValueError):
        f.new_rat_var("x")
    with pytest.raises(ValueError):
        f.new_prop("p")
    assert f.rat_var("x") == 0
    assert f.rat_var("missing") is None
    assert f.prop("p") == 1


def test_formula_copy_is_independent():
    f = CnfFormula()
    f.new_rat_var("x")
    p = f.new_prop("p")
    f.add_clause([p])
    g = f.copy()
    g.add_clause([-p])
    g.new_rat_var("y")
    assert len(f.clauses) == 1
    assert f.rat_var("y") is None
    assert g.rat_var("y") == 1


def _clause_sets(f: CnfFormula):
    return {frozenset(c) for c in f.clauses}


def test_cnfize_clause_shaped_input_stays_flat():
    f = CnfFormula()
    f.new_rat_var("x")
    x_ge_1 = BAtom({0: 1}, -1, ">=")
    x_le_0 = BAtom({0: 1}, 0, "<=")
    cnfize(disj([x_ge_1, x_le_0]), f)
    # one clause, two atom literals, no labels
    assert len(f.clauses) == 1
    assert len(f.clauses[0]) == 2
    assert all(f.atom_of(abs(l)) is not None for l in f.clauses[0])


def test_cnfize_nested_structure_introduces_labels():
    f = CnfFormula()
    f.new_rat_var("x")
    p = f.new_prop("p")
    q = f.new_prop("q")
    inner = conj([BProp(p), BAtom({0: 1}, -1, ">=")])
    cnfize(disj([BProp(q), inner]), f)
    kinds = set(f.kind)
    assert "label" in kinds
    # top clause mentions q and the label for the conjunction
    assert any(q in c for c in f.clauses)


def test_cnfize_polarity_skips_unused_direction():
    # (p or (q and r)): only label => args clauses are needed
    f = CnfFormula()
    p, q, r = f.new_prop("p"), f.new_prop("q"), f.new_prop("r")
    cnfize(BOr([BProp(p), conj([BProp(q), BProp(r)])]), f)
    label = next(v + 1 for v, k in enumerate(f.kind) if k == "label")
    sets = _clause_sets(f)
    assert frozenset([p, label]) in sets
    assert frozenset([-label, q]) in sets
    assert frozenset([-label, r]) in sets
    # the reverse implication (q and r) => label is never emitted
    assert frozenset([label, -q, -r]) not in sets


def test_cnfize_constants_fold():
    f = CnfFormula()
    p = f.new_prop("p")
    cnfize(conj([BConst(True), disj([BProp(p), BConst(False)])]), f)
    assert _clause_sets(f) == {frozenset([p])}


def test_cnfize_ground_comparisons_fold():
    f = CnfFormula()
    p = f.new_prop("p")
    # 3 <= 0 is false, so the disjunction reduces to p
    cnfize(disj([BAtom({}, 3, LE), BProp(p)]), f)
    assert _clause_sets(f) == {frozenset([p])}


def test_cnfize_false_formula_emits_the_empty_clause():
    f = CnfFormula()
    p = f.new_prop("p")
    cnfize(conj([BProp(p), BNot(BProp(p)), BConst(False)]), f)
    assert [] in f.clauses


def test_cnfize_implication_and_iff():
    f = CnfFormula()
    p, q = f.new_prop("p"), f.new_prop("q")
    cnfize(BImplies(BProp(p), BProp(q)), f)
    assert _clause_sets(f) == {frozenset([-p, q])}
    g = CnfFormula()
    p, q = g.new_prop("p"), g.new_prop("q")
    cnfize(BIff(BProp(p), BProp(q)), g)
    assert _clause_sets(g) == {frozenset([-p, q]), frozenset([p, -q])}


def test_negated_equality_splits_into_strict_disjuncts():
    f = CnfFormula()
    f.new_rat_var("x")
    cnfize(BNot(BAtom({0: 1}, -2, EQ)), f)
    # x != 2 must become strict inequalities; no negated equality literal
    for cl in f.clauses:
        for lit in cl:
            if lit < 0:
                atom = f.atom_of(-lit)
                assert atom is None or atom.rel != EQ
    prob = OmtProblem(f, 0)  # validation performs the same scan
    assert prob.cost_name == "x"


def test_problem_validation():
    f = CnfFormula()
    f.new_rat_var("cost")
    with pytest.raises(ValueError):
        OmtProblem(f, 3)
    with pytest.raises(ValueError):
        OmtProblem(f, 0, Fraction(2), Fraction(2))
    ok = OmtProblem(f, 0, Fraction(0), Fraction(1))
    assert (ok.lb, ok.ub) == (0, 1)


def test_problem_rejects_negated_equality_clauses():
    f = CnfFormula()
    f.new_rat_var("x")
    atom, _ = normalize_atom({0: 1}, -1, EQ)
    f.add_clause([f.lit_for_atom(atom, False)])
    with pytest.raises(ValueError):
        OmtProblem(f, 0)
