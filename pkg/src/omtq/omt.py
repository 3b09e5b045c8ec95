"""Cost-minimizing search over the CDCL and simplex cores.

Two engines find the minimum of a designated rational variable subject
to a CNF formula, both maintaining a shrinking candidate range [l, u[:

* solve_offline: repeated full solver calls.  Linear steps ask for any
  model and learn a unit bound just below its minimized cost; binary
  steps solve under an assumed pivot bound cost < (l+u)/2 and use the
  unsat core to decide which half survives.
* solve_inline: a single solver run.  The range is re-derived at every
  return to decision level 0 from the unit-implied bounds on the cost
  variable, pivot bounds are injected as decision suggestions, and each
  complete model triggers minimize / learn-a-tighter-bound / restart
  inside the run.  Theory conflicts that involve the pivot are
  generalized by maximizing the bound they refute, which turns one
  conflict into a jump of the whole lower end of the range.

Values are exact; strict minima are reported as unattained infima with
a model materialized at a safely small epsilon.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .arith import EQ, LE, LT, DeltaRational, materialize_epsilon
from .formula import CnfFormula, OmtProblem, normalize_atom
from .lra import LraSolver, dedupe_lits
from .optimize import MINIMUM, UNBOUNDED as MIN_UNBOUNDED, conjunction_min, minimize_var
from .sat import SatSolver, TheoryClient

OPTIMUM = "optimum"
UNSAT = "unsat"
UNBOUNDED = "unbounded"
INTERRUPTED = "interrupted"

OFFLINE = "offline"
INLINE = "inline"
LINEAR = "linear"
BINARY = "binary"


@dataclass
class OmtConfig:
    schema: str = INLINE
    search: str = BINARY  # binary alternates with linear steps unless always_binary
    always_binary: bool = False
    early_pruning: bool = True
    pure_literal: bool = True
    conflict_generalization: bool = True
    timeout: Optional[float] = None  # seconds
    max_loops: Optional[int] = None  # bound on range-update iterations

    def __post_init__(self):
        if self.schema not in (OFFLINE, INLINE):
            raise ValueError(f"unknown schema {self.schema!r}")
        if self.search not in (LINEAR, BINARY):
            raise ValueError(f"unknown search mode {self.search!r}")


@dataclass
class SearchStats:
    decisions: int = 0
    conflicts: int = 0
    restarts: int = 0
    theory_checks: int = 0
    minimize_calls: int = 0
    pivots: int = 0  # pivot bounds actually tried
    loops: int = 0  # range-update iterations
    simplex_pivots: int = 0


@dataclass
class OmtOutcome:
    status: str
    value: Optional[Fraction] = None
    attained: bool = False
    model: Optional[dict] = None  # var name -> Fraction
    epsilon: Optional[Fraction] = None  # substituted for delta in the model
    lower_trace: list = field(default_factory=list)
    stats: SearchStats = field(default_factory=SearchStats)


# ---------------------------------------------------------------------------
# shared plumbing


def _cost_bound_lit(formula: CnfFormula, sat: SatSolver, cost: int, value: Fraction, rel: str) -> int:
    """Solver literal for (cost rel value), registering the atom if new."""
    atom, pol = normalize_atom({cost: Fraction(1)}, -Fraction(value), rel)
    lit = formula.lit_for_atom(atom, pol)
    sat.ensure_vars(formula.num_solver_vars)
    return lit


def _add_range_units(formula: CnfFormula, sat: SatSolver, problem: OmtProblem):
    """Unit clauses pinning the cost into [lb, ub[."""
    if problem.lb is not None:
        lit = _cost_bound_lit(formula, sat, problem.cost, problem.lb, LT)
        sat.add_clause([-lit])
    if problem.ub is not None:
        lit = _cost_bound_lit(formula, sat, problem.cost, problem.ub, LT)
        sat.add_clause([lit])


class TheoryBridge(TheoryClient):
    """Feeds the trail's arithmetic literals into the simplex solver.

    Asserted atoms are tracked per trail position so backjumps rewind the
    arithmetic state to exactly the surviving prefix.  Literals whose
    polarity occurs in no input clause are not asserted (they cannot be
    needed to satisfy anything and relaxing them only improves minima);
    assumption literals are exempted via ``forced_lits``.
    """

    def __init__(self, formula: CnfFormula, problem: OmtProblem, config: OmtConfig, stats: SearchStats):
        self.formula = formula
        self.problem = problem
        self.cfg = config
        self.stats = stats
        self.lra = LraSolver()
        for i in range(len(formula.rat_names)):
            self.lra.new_var(i)
        self.cost_id = self.lra.var(problem.cost)
        self.ptr = 0
        self.marks: list[tuple] = []  # (trail_pos, lra_mark, atom, polarity)
        self.forced_lits: set[int] = set()
        self.deadline = None

    # -- timeout

    def set_timeout(self, seconds):
        if seconds is not None:
            self.deadline = time.monotonic() + seconds

    def timed_out(self) -> bool:
        return self.deadline is not None and time.monotonic() > self.deadline

    def tick(self, solver):
        if self.timed_out():
            return ("halt", "timeout")
        return None

    # -- trail -> simplex

    def _should_skip(self, solver, lit: int, atom, polarity: bool) -> bool:
        if not polarity and atom.rel == EQ:
            return True  # disequalities are split before they reach the core
        if not self.cfg.pure_literal or lit in self.forced_lits:
            return False
        v = abs(lit)
        occ = solver.occ_pos[v] if polarity else solver.occ_neg[v]
        return occ == 0

    def _assert_up_to(self, solver, upto: int):
        while self.ptr < upto:
            lit = solver.trail[self.ptr]
            self.ptr += 1
            v = abs(lit)
            atom = self.formula.atom_of(v)
            if atom is None:
                continue
            polarity = lit > 0
            if self._should_skip(solver, lit, atom, polarity):
                continue
            self.marks.append((self.ptr - 1, self.lra.mark(), atom, polarity))
            confl = self.lra.assert_atom(atom, polarity, lit)
            if confl is not None:
                return confl
        return None

    def on_backjump(self, solver, trail_len: int):
        target = None
        while self.marks and self.marks[-1][0] >= trail_len:
            target = self.marks.pop()[1]
        if target is not None:
            self.lra.backtrack_to(target)
        if self.ptr > trail_len:
            self.ptr = trail_len

    def after_bcp(self, solver, complete: bool):
        if self.timed_out():
            return ("halt", "timeout")
        if not (self.cfg.early_pruning or complete):
            return None
        confl = self._assert_up_to(solver, len(solver.trail))
        if confl is not None:
            return ("conflict", self.transform_conflict(solver, confl))
        status, clause = self.lra.check()
        self.stats.theory_checks += 1
        if status == "unsat":
            return ("conflict", self.transform_conflict(solver, clause))
        if complete:
            return self.on_theory_sat(solver)
        if self.cfg.early_pruning:
            props = self._entailed_props(solver)
            if props:
                return ("propagate", props)
        return None

    def _entailed_props(self, solver):
        out = []
        for v, atom in self.formula.theory_atoms():
            if v > solver.nvars or solver.assign[v] != 0:
                continue
            ent = self.lra.entailed(atom)
            if ent is None:
                continue
            value, reasons = ent
            lit = v if value else -v
            out.append((lit, [lit] + [-r for r in reasons]))
        return out

    # -- hooks for the engines

    def transform_conflict(self, solver, clause):
        return clause

    def on_theory_sat(self, solver):
        return None  # plain decision procedure: accept the model

    # -- model extraction

    def current_literals(self):
        return [(atom, pol) for (_, _, atom, pol) in self.marks]

    def snapshot_model(self):
        """(epsilon, concrete model) at the current simplex assignment."""
        names = self.formula.rat_names
        valuation = {i: self.lra.beta[i] for i in range(len(names))}
        eps0 = materialize_epsilon(valuation, self.current_literals())
        eps = eps0 / 2
        model = {name: valuation[i].substitute(eps) for i, name in enumerate(names)}
        return eps, model


def compute_pivot(l, u) -> Fraction:
    """Exact midpoint of a finite cost range.

    Raises ValueError when either bound is missing (infinite range).
    """
    if l is None or u is None:
        raise ValueError("compute_pivot needs two finite bounds")
    return (Fraction(l) + Fraction(u)) / 2


def _use_binary(config: OmtConfig, l, u, counter: int):
    """Whether this iteration runs in binary mode, plus the new counter."""
    if config.search != BINARY or l is None or u is None:
        return False, counter
    if config.always_binary:
        return True, counter
    if l == u:
        # degenerate range: only an attainment probe is left, and a pivot
        # at the midpoint would contradict the learned bounds outright
        return False, counter
    return counter % 2 == 0, counter + 1


def _finish_stats(stats: SearchStats, sat: SatSolver, bridge: TheoryBridge):
    stats.decisions = sat.stats.decisions
    stats.conflicts = sat.stats.conflicts
    stats.restarts = sat.stats.restarts
    stats.simplex_pivots = bridge.lra.pivot_count


def _range_is_empty(l, l_strict, u, u_strict) -> bool:
    if l is None or u is None:
        return False
    return u < l or (u == l and (u_strict or l_strict))


# ---------------------------------------------------------------------------
# offline engine


def solve_offline(problem: OmtProblem, config: Optional[OmtConfig] = None) -> OmtOutcome:
    config = config if config is not None else OmtConfig(schema=OFFLINE)
    stats = SearchStats()
    formula = problem.formula.copy()
    sat = SatSolver()
    sat.ensure_vars(formula.num_solver_vars)
    for cl in formula.clauses:
        sat.add_clause(cl)
    bridge = TheoryBridge(formula, problem, config, stats)
    bridge.set_timeout(config.timeout)
    _add_range_units(formula, sat, problem)

    l, l_strict = problem.lb, False
    u, u_strict = problem.ub, True
    trace = [l] if l is not None else []
    best: Optional[tuple] = None  # (DeltaRational, model, eps)
    counter = 0
    interrupted = None

    while not _range_is_empty(l, l_strict, u, u_strict):
        if config.max_loops is not None and stats.loops >= config.max_loops:
            interrupted = "loop budget exhausted"
            break
        if bridge.timed_out():
            interrupted = "timeout"
            break
        stats.loops += 1
        binary, counter = _use_binary(config, l, u, counter)

        if binary:
            pivot = compute_pivot(l, u)
            plit = _cost_bound_lit(formula, sat, problem.cost, pivot, LT)
            bridge.forced_lits = {plit}
            stats.pivots += 1
            res = sat.solve([plit], bridge)
            bridge.forced_lits = set()
        else:
            plit = None
            res = sat.solve((), bridge)

        if res.status == "halted":
            interrupted = str(res.halt)
            break
        if res.status == "sat":
            stats.minimize_calls += 1
            mres = minimize_var(bridge.lra, bridge.cost_id)
            if mres.status == MIN_UNBOUNDED:
                _finish_stats(stats, sat, bridge)
                return OmtOutcome(UNBOUNDED, lower_trace=trace, stats=stats)
            m = mres.value
            if best is None or m < best[0]:
                eps, model = bridge.snapshot_model()
                best = (m, model, eps)
            u, u_strict = m.real, m.eps == 0
            rel = LT if m.eps == 0 else LE
            ulit = _cost_bound_lit(formula, sat, problem.cost, m.real, rel)
            sat.add_clause([ulit])
        else:  # unsat
            if plit is not None and res.core and plit in res.core:
                l = pivot
                trace.append(l)
                sat.add_clause([-plit])
            else:
                break  # unsat independently of the pivot: range exhausted

    _finish_stats(stats, sat, bridge)
    if interrupted is not None:
        out = OmtOutcome(INTERRUPTED, lower_trace=trace, stats=stats)
        if best is not None:
            out.value, out.attained = best[0].real, best[0].eps == 0
            out.model, out.epsilon = best[1], best[2]
        return out
    if best is None:
        return OmtOutcome(UNSAT, value=problem.ub, attained=False, lower_trace=trace, stats=stats)
    m, model, eps = best
    return OmtOutcome(
        OPTIMUM,
        value=m.real,
        attained=m.eps == 0,
        model=model,
        epsilon=eps,
        lower_trace=trace,
        stats=stats,
    )


# ---------------------------------------------------------------------------
# inline engine


class InlineBridge(TheoryBridge):
    """Runs the whole optimization inside one solver call."""

    def __init__(self, formula, problem, config, stats, sat):
        super().__init__(formula, problem, config, stats)
        self.sat = sat
        self.l = problem.lb
        self.l_strict = False
        self.u = problem.ub
        self.u_strict = True
        self.u_lit: Optional[int] = None
        self.trace: list = [self.l] if self.l is not None else []
        self.best: Optional[tuple] = None  # (DeltaRational, model, eps)
        self.counter = 0
        self.suggest: Optional[int] = None
        self.pivot_lit: Optional[int] = None
        self.pivot_val: Optional[Fraction] = None

    # -- range maintenance at level 0

    def _scan_root_bounds(self, solver):
        """Derive (l, u) from the unit-implied bounds on the cost variable."""
        best_lo: Optional[DeltaRational] = None
        best_up: Optional[tuple] = None  # (DeltaRational, lit)
        if self.problem.lb is not None:
            best_lo = DeltaRational(self.problem.lb)
        for lit in solver.trail:
            v = abs(lit)
            atom = self.formula.atom_of(v)
            if atom is None:
                continue
            sv = atom.single_var()
            if sv is None or sv[0] != self.problem.cost:
                continue
            polarity = lit > 0
            if not polarity and atom.rel == EQ:
                continue
            for is_lower, val in LraSolver._atom_bounds(atom, polarity):
                if sv[1] == -1:
                    is_lower, val = not is_lower, val.scaled(Fraction(-1))
                if is_lower:
                    if best_lo is None or val > best_lo:
                        best_lo = val
                else:
                    if best_up is None or val < best_up[0]:
                        best_up = (val, lit)
        if best_lo is not None:
            self.l, self.l_strict = best_lo.real, best_lo.eps > 0
        if best_up is not None:
            self.u, self.u_strict = best_up[0].real, best_up[0].eps < 0
            self.u_lit = best_up[1]

    def on_level_zero(self, solver):
        if self.timed_out():
            return ("halt", "timeout")
        old = (self.l, self.l_strict, self.u, self.u_strict)
        self._scan_root_bounds(solver)
        if (self.l, self.l_strict, self.u, self.u_strict) != old:
            self.stats.loops += 1
            if self.l is not None and (not self.trace or self.trace[-1] != self.l):
                self.trace.append(self.l)
        if self.cfg.max_loops is not None and self.stats.loops > self.cfg.max_loops:
            return ("halt", "loop budget exhausted")
        if _range_is_empty(self.l, self.l_strict, self.u, self.u_strict):
            return ("halt", "range-empty")
        use, self.counter = _use_binary(self.cfg, self.l, self.u, self.counter)
        if use:
            pivot = compute_pivot(self.l, self.u)
            lit = _cost_bound_lit(self.formula, self.sat, self.problem.cost, pivot, LT)
            if solver.value(lit) == 0:
                self.suggest = lit
                self.pivot_lit = lit
                self.pivot_val = pivot
            else:
                self.suggest = None
        else:
            self.suggest = None
            self.pivot_lit = None
            self.pivot_val = None
        return None

    def suggest_decision(self, solver):
        if self.suggest is not None and solver.value(self.suggest) == 0:
            return self.suggest
        return None

    def note_suggested_taken(self, solver, lit):
        self.stats.pivots += 1
        self.suggest = None

    # -- model handling

    def on_theory_sat(self, solver):
        if self.timed_out():
            return ("halt", "timeout")
        self.stats.minimize_calls += 1
        mres = minimize_var(self.lra, self.cost_id)
        if mres.status == MIN_UNBOUNDED:
            return ("halt", "unbounded")
        m = mres.value
        if self.best is None or m < self.best[0]:
            eps, model = self.snapshot_model()
            self.best = (m, model, eps)
        rel = LT if m.eps == 0 else LE
        atom_u, pol = normalize_atom({self.problem.cost: Fraction(1)}, -m.real, rel)
        ulit = self.formula.lit_for_atom(atom_u, pol)
        self.sat.ensure_vars(self.formula.num_solver_vars)
        directives = [([ulit], False)]
        if self.pivot_lit is not None and solver.value(self.pivot_lit) == 1:
            # the pivot unit is only a consequence when the fresh upper
            # bound sits below the pivot; the minimum can land on or
            # above it because pivot atoms are pure-literal invisible
            implied = m.real <= self.pivot_val if m.eps == 0 else m.real < self.pivot_val
            if implied:
                directives.append(([self.pivot_lit], True))
        blocking = self._blocking_clause(atom_u, ulit)
        if blocking is not None:
            directives.append((blocking, True))
        return ("learn", directives)

    def _blocking_clause(self, atom_u, ulit: int):
        """Clause forbidding the current theory assignment together with
        the not-yet-improved bound; valid because the assignment's
        minimum was just computed."""
        mark = self.lra.mark()
        confl = self.lra.assert_atom(atom_u, True, ulit)
        if confl is None:
            status, clause = self.lra.check()
            confl = clause if status == "unsat" else None
        self.lra.backtrack_to(mark)
        return confl

    # -- conflict generalization

    def transform_conflict(self, solver, clause):
        if not self.cfg.conflict_generalization:
            return clause
        p = self.pivot_lit
        if p is None or -p not in clause or solver.value(p) != 1:
            return clause
        eta_lits = [l for l in clause if l != -p]
        if not eta_lits:
            return clause
        eta = []
        for l in eta_lits:
            atom = self.formula.atom_of(abs(l))
            if atom is None:
                return clause
            eta.append((atom, l < 0))
        status, val = conjunction_min(eta, self.problem.cost)
        if status != MINIMUM:
            return clause
        r, k = val.real, val.eps
        if self.u is not None and self.u_lit is not None:
            refutes_upper = r > self.u or (r == self.u and (self.u_strict or k > 0))
            if refutes_upper:
                return dedupe_lits(eta_lits + [-self.u_lit])
        if r > self.pivot_val:
            litr = _cost_bound_lit(self.formula, self.sat, self.problem.cost, r, LT)
            c1 = self.sat.add_clause(dedupe_lits(eta_lits + [-litr]), learnt=True, dep=0)
            c2 = self.sat.add_clause([-p, litr], learnt=True, dep=0)
            for c in (c1, c2):
                if c is not None and len(c.lits) > 1:
                    self.sat.queue_unit_check(c)
        return clause


def solve_inline(problem: OmtProblem, config: Optional[OmtConfig] = None) -> OmtOutcome:
    config = config if config is not None else OmtConfig(schema=INLINE)
    stats = SearchStats()
    formula = problem.formula.copy()
    sat = SatSolver()
    sat.ensure_vars(formula.num_solver_vars)
    for cl in formula.clauses:
        sat.add_clause(cl)
    bridge = InlineBridge(formula, problem, config, stats, sat)
    bridge.set_timeout(config.timeout)
    _add_range_units(formula, sat, problem)

    res = sat.solve((), bridge)
    _finish_stats(stats, sat, bridge)

    def with_best(status: str) -> OmtOutcome:
        out = OmtOutcome(status, lower_trace=bridge.trace, stats=stats)
        if bridge.best is not None:
            m, model, eps = bridge.best
            out.value, out.attained = m.real, m.eps == 0
            out.model, out.epsilon = model, eps
        return out

    if res.status == "halted":
        tag = res.halt
        if tag == "unbounded":
            return OmtOutcome(UNBOUNDED, lower_trace=bridge.trace, stats=stats)
        if tag == "range-empty":
            if bridge.best is not None:
                return with_best(OPTIMUM)
            return OmtOutcome(
                UNSAT, value=problem.ub, attained=False, lower_trace=bridge.trace, stats=stats
            )
        return with_best(INTERRUPTED)
    if res.status == "unsat":
        if bridge.best is not None:
            return with_best(OPTIMUM)
        return OmtOutcome(
            UNSAT, value=problem.ub, attained=False, lower_trace=bridge.trace, stats=stats
        )
    raise RuntimeError("inline search ended in a plain sat state")


# ---------------------------------------------------------------------------
# entry points


def solve(problem: OmtProblem, config: Optional[OmtConfig] = None) -> OmtOutcome:
    config = config if config is not None else OmtConfig()
    if config.schema == OFFLINE:
        return solve_offline(problem, config)
    return solve_inline(problem, config)


def smt_decide(problem: OmtProblem, extra_literals=(), config: Optional[OmtConfig] = None) -> str:
    """Plain satisfiability of the problem's formula, range units included,
    plus optional extra (atom, polarity) unit literals.  Returns 'sat' or
    'unsat'."""
    cfg = config if config is not None else OmtConfig()
    stats = SearchStats()
    formula = problem.formula.copy()
    sat = SatSolver()
    sat.ensure_vars(formula.num_solver_vars)
    for cl in formula.clauses:
        sat.add_clause(cl)
    bridge = TheoryBridge(formula, problem, cfg, stats)
    bridge.set_timeout(cfg.timeout)
    _add_range_units(formula, sat, problem)
    for atom, pol in extra_literals:
        lit = formula.lit_for_atom(atom, pol)
        sat.ensure_vars(formula.num_solver_vars)
        sat.add_clause([lit])
    res = sat.solve((), bridge)
    if res.status == "halted":
        raise TimeoutError("decision query interrupted")
    return res.status


def _cost_atom(problem: OmtProblem, value: Fraction, rel: str):
    return normalize_atom({problem.cost: Fraction(1)}, -Fraction(value), rel)


def crosscheck(problem: OmtProblem, outcome: OmtOutcome) -> tuple[bool, str]:
    """Validate an outcome with independent decision queries."""
    if outcome.status == UNSAT:
        st = smt_decide(problem)
        if st != "unsat":
            return False, "reported unsat but the formula is satisfiable in range"
        return True, "unsat confirmed"
    if outcome.status == UNBOUNDED:
        st = smt_decide(problem)
        if st != "sat":
            return False, "reported unbounded but the formula is unsatisfiable"
        return True, "unbounded: satisfiability confirmed"
    if outcome.status != OPTIMUM:
        return True, f"nothing to check for status {outcome.status}"
    v = outcome.value
    if outcome.attained:
        if smt_decide(problem, [_cost_atom(problem, v, LT)]) != "unsat":
            return False, "a model strictly below the reported optimum exists"
        if smt_decide(problem, [_cost_atom(problem, v, EQ)]) != "sat":
            return False, "the reported optimum value is not realizable"
        return True, "optimum confirmed"
    if smt_decide(problem, [_cost_atom(problem, v, LE)]) != "unsat":
        return False, "a model at or below the reported infimum exists"
    gaps = [Fraction(1, 2 ** 32)]
    if outcome.epsilon is not None:
        gaps.append(outcome.epsilon)
    if problem.ub is not None:
        gaps.append((problem.ub - v) / 2)
    eps = min(g for g in gaps if g > 0)
    if smt_decide(problem, [_cost_atom(problem, v + eps, EQ)]) != "sat":
        return False, "no model exists just above the reported infimum"
    return True, "infimum confirmed"
