"""Conflict-driven clause learning SAT core with theory hooks.

Classic two-watched-literal CDCL: first-UIP learning, activity-based
decisions with phase saving, Luby restarts, activity-driven deletion of
learned clauses.  Three extras matter for the optimization layer built
on top:

* assumption literals with unsat-core extraction (final conflict
  analysis down to the assumptions),
* a frame stack: push_frame/pop_frame scope added clauses, and popping
  also removes learned clauses whose derivation used a removed clause
  (tracked as a max-frame tag per clause and per trail entry),
* a client object consulted at propagation fixpoints, on backjumps and
  at decision level zero, through which the theory solver and the
  optimization schemas plug in.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional


class Clause:
    __slots__ = ("lits", "learnt", "dep", "activity")

    def __init__(self, lits, learnt=False, dep=0):
        self.lits = list(lits)
        self.learnt = learnt
        self.dep = dep  # highest frame index this clause depends on
        self.activity = 0.0

    def __repr__(self):
        return f"Clause({self.lits}{' L' if self.learnt else ''})"


class TheoryClient:
    """No-op client; the optimization engines subclass this."""

    def after_bcp(self, solver, complete: bool):
        """Called at every propagation fixpoint.  May return None,
        ('conflict', lits), ('propagate', [(lit, reason_lits), ...]),
        ('learn', [(lits, learnt_flag), ...]) or ('halt', payload)."""
        return None

    def on_backjump(self, solver, trail_len: int):
        pass

    def on_level_zero(self, solver):
        """Called once per return to decision level 0 (propagation done).
        May return ('halt', payload)."""
        return None

    def suggest_decision(self, solver) -> Optional[int]:
        return None

    def note_suggested_taken(self, solver, lit: int):
        pass

    def tick(self, solver):
        """Called once per conflict; may return ('halt', payload)."""
        return None


@dataclass
class SolveResult:
    status: str  # sat / unsat / halted
    model: Optional[list] = None  # assignment array indexed by var, values +-1
    core: Optional[list] = None  # subset of the assumption literals
    halt: object = None


@dataclass
class SatStats:
    decisions: int = 0
    conflicts: int = 0
    propagations: int = 0
    restarts: int = 0


def luby(i: int) -> int:
    """i-th element (0-based) of the Luby restart sequence 1,1,2,1,1,2,4,..."""
    sz, seq = 1, 0
    while sz < i + 1:
        seq += 1
        sz = 2 * sz + 1
    while sz - 1 != i:
        sz = (sz - 1) >> 1
        seq -= 1
        i = i % sz
    return 2 ** seq


RESTART_UNIT = 100
VAR_DECAY = 0.95
CLA_DECAY = 0.999


class SatSolver:
    def __init__(self):
        self.nvars = 0
        self.assign = [0]  # index 0 unused
        self.level = [0]
        self.reason_: list[Optional[Clause]] = [None]
        self.dep = [0]  # frame dependency of each var's current assignment
        self.activity = [0.0]
        self.phase = [False]
        self.occ_pos = [0]
        self.occ_neg = [0]

        self.clauses: list[Clause] = []
        self.learnts: list[Clause] = []
        self.unit_clauses: list[Clause] = []
        self._pending_units: list[Clause] = []
        self.watches: dict[int, list[Clause]] = {}

        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0

        self.frame = 0
        self.unsat_dep: Optional[int] = None

        self.var_inc = 1.0
        self.cla_inc = 1.0
        self.max_learnts = 300.0

        self.stats = SatStats()
        self.client: Optional[TheoryClient] = None
        self._lz_pending = True
        self._learn_log = None  # optional callback: (lits, level) at learn time

    # -- variables ---------------------------------------------------------

    def new_var(self) -> int:
        self.nvars += 1
        self.assign.append(0)
        self.level.append(0)
        self.reason_.append(None)
        self.dep.append(0)
        self.activity.append(0.0)
        self.phase.append(False)
        self.occ_pos.append(0)
        self.occ_neg.append(0)
        return self.nvars

    def ensure_vars(self, n: int):
        while self.nvars < n:
            self.new_var()

    def value(self, lit: int) -> int:
        v = self.assign[abs(lit)]
        return v if lit > 0 else -v

    @property
    def decision_level(self) -> int:
        return len(self.trail_lim)

    # -- clauses -----------------------------------------------------------

    def _count_occs(self, lits, delta: int):
        for l in lits:
            if l > 0:
                self.occ_pos[l] += delta
            else:
                self.occ_neg[-l] += delta

    def _attach(self, c: Clause):
        self.watches.setdefault(c.lits[0], []).append(c)
        self.watches.setdefault(c.lits[1], []).append(c)

    def _detach(self, c: Clause):
        for l in c.lits[:2]:
            w = self.watches.get(l)
            if w and c in w:
                w.remove(c)

    def add_clause(self, lits, learnt: bool = False, dep: Optional[int] = None) -> Optional[Clause]:
        """Add a clause; duplicates inside the clause are removed and
        tautologies dropped.  Must be called at decision level 0."""
        seen = {}
        out = []
        for l in lits:
            if -l in seen:
                return None  # tautology
            if l not in seen:
                seen[l] = True
                out.append(l)
        if dep is None:
            dep = 0 if learnt else self.frame
        c = Clause(out, learnt, dep)
        if not learnt:
            self._count_occs(out, +1)
        if not out:
            if self.unsat_dep is None or dep < self.unsat_dep:
                self.unsat_dep = dep
            return c
        if len(out) == 1:
            self.unit_clauses.append(c)
            self._pending_units.append(c)
            return c
        # watch the two highest-level literals so no propagation is missed
        # when the clause arrives already (partly) assigned
        def rank(l):
            return (1 << 30) if self.value(l) == 0 else self.level[abs(l)]
        a = max(range(len(out)), key=lambda i: rank(out[i]))
        out[0], out[a] = out[a], out[0]
        s = max(range(1, len(out)), key=lambda i: rank(out[i]))
        out[1], out[s] = out[s], out[1]
        c.lits = out
        (self.learnts if learnt else self.clauses).append(c)
        self._attach(c)
        return c

    def remove_clause(self, c: Clause):
        if len(c.lits) >= 2:
            self._detach(c)
            target = self.learnts if c.learnt else self.clauses
            if c in target:
                target.remove(c)
        else:
            if c in self.unit_clauses:
                self.unit_clauses.remove(c)
        if not c.learnt:
            self._count_occs(c.lits, -1)

    # -- frames ------------------------------------------------------------

    def push_frame(self) -> int:
        self.frame += 1
        return self.frame

    def pop_frame(self):
        if self.frame == 0:
            raise ValueError("cannot pop the base frame")
        k = self.frame
        self.frame -= 1
        # full reset: level-0 propagations may rely on removed clauses
        self._cancel_everything()
        for group in (self.clauses, self.learnts):
            for c in [c for c in group if c.dep >= k]:
                self._detach(c)
                group.remove(c)
                if not c.learnt:
                    self._count_occs(c.lits, -1)
        dropped = [c for c in self.unit_clauses if c.dep >= k]
        for c in dropped:
            self.unit_clauses.remove(c)
            if not c.learnt:
                self._count_occs(c.lits, -1)
        self._pending_units = list(self.unit_clauses)
        if self.unsat_dep is not None and self.unsat_dep >= k:
            self.unsat_dep = None

    def _cancel_everything(self):
        for lit in reversed(self.trail):
            v = abs(lit)
            self.assign[v] = 0
            self.reason_[v] = None
        self.trail.clear()
        self.trail_lim.clear()
        self.qhead = 0
        self._pending_units = list(self.unit_clauses)
        self._lz_pending = True

    # -- trail -------------------------------------------------------------

    def enqueue(self, lit: int, reason: Optional[Clause] = None):
        v = abs(lit)
        self.assign[v] = 1 if lit > 0 else -1
        self.level[v] = self.decision_level
        self.reason_[v] = reason
        d = 0
        if reason is not None:
            d = reason.dep
            for l in reason.lits:
                if abs(l) != v and self.dep[abs(l)] > d:
                    d = self.dep[abs(l)]
        self.dep[v] = d
        self.trail.append(lit)
        self.stats.propagations += 1

    def cancel_until(self, lvl: int):
        if self.decision_level <= lvl:
            return
        bound = self.trail_lim[lvl]
        for i in range(len(self.trail) - 1, bound - 1, -1):
            lit = self.trail[i]
            v = abs(lit)
            self.phase[v] = lit > 0
            self.assign[v] = 0
            self.reason_[v] = None
        del self.trail[bound:]
        del self.trail_lim[lvl:]
        self.qhead = bound
        if self.client is not None:
            self.client.on_backjump(self, bound)
        if lvl == 0:
            self._lz_pending = True

    # -- propagation -------------------------------------------------------

    def queue_unit_check(self, c: Clause):
        """Ask the next level-0 propagation pass to examine this clause;
        used for lemmas that arrive already unit under the root trail."""
        self._pending_units.append(c)

    def _bcp(self) -> Optional[Clause]:
        if self.decision_level == 0 and self._pending_units:
            pending, self._pending_units = self._pending_units, []
            for c in pending:
                unassigned = None
                satisfied = False
                nfree = 0
                for l in c.lits:
                    v = self.value(l)
                    if v == 1:
                        satisfied = True
                        break
                    if v == 0:
                        nfree += 1
                        unassigned = l
                if satisfied or nfree > 1:
                    continue
                if nfree == 0:
                    return c
                self.enqueue(unassigned, c)
        while self.qhead < len(self.trail):
            p = self.trail[self.qhead]
            self.qhead += 1
            falsified = -p
            ws = self.watches.get(falsified)
            if not ws:
                continue
            keep = []
            i = 0
            confl = None
            while i < len(ws):
                c = ws[i]
                i += 1
                lits = c.lits
                if lits[0] == falsified:
                    lits[0], lits[1] = lits[1], lits[0]
                first = lits[0]
                if self.value(first) == 1:
                    keep.append(c)
                    continue
                moved = False
                for j in range(2, len(lits)):
                    if self.value(lits[j]) != -1:
                        lits[1], lits[j] = lits[j], lits[1]
                        self.watches.setdefault(lits[1], []).append(c)
                        moved = True
                        break
                if moved:
                    continue
                keep.append(c)
                if self.value(first) == -1:
                    keep.extend(ws[i:])
                    confl = c
                    break
                self.enqueue(first, c)
            self.watches[falsified] = keep
            if confl is not None:
                self.qhead = len(self.trail)
                return confl
        return None

    def propagate(self):
        """BCP plus theory fixpoint.  Returns None, a conflicting Clause,
        or ('halt', payload) / ('relearned',) style directives raised by
        the client (returned verbatim)."""
        while True:
            confl = self._bcp()
            if confl is not None:
                return confl
            if self.client is None:
                return None
            complete = len(self.trail) == self.nvars
            resp = self.client.after_bcp(self, complete)
            if resp is None:
                return None
            tag = resp[0]
            if tag == "conflict":
                return self._theory_clause(resp[1])
            if tag == "propagate":
                progressed = False
                for lit, reason_lits in resp[1]:
                    if self.value(lit) == 1:
                        continue
                    rc = self._theory_clause(reason_lits, prop_lit=lit)
                    if self.value(lit) == -1:
                        return rc
                    self.enqueue(lit, rc)
                    progressed = True
                if not progressed:
                    return None
                continue
            if tag in ("learn", "halt"):
                return resp
            raise ValueError(f"bad client response {tag!r}")

    def _theory_clause(self, lits, prop_lit: Optional[int] = None) -> Clause:
        """Record a theory lemma (valid clause, frame-independent)."""
        lits = list(lits)
        if prop_lit is not None and lits and lits[0] != prop_lit:
            lits.remove(prop_lit)
            lits.insert(0, prop_lit)
        if len(lits) >= 2:
            c = self.add_clause(lits, learnt=True, dep=0)
            if c is None:  # tautological lemma: harmless, fabricate detached
                c = Clause(lits, True, 0)
            return c
        c = Clause(lits, True, 0)
        if len(lits) == 1:
            self.unit_clauses.append(c)
            self._pending_units.append(c)
        return c

    # -- conflict analysis -------------------------------------------------

    def bump_var(self, v: int):
        self.activity[v] += self.var_inc
        if self.activity[v] > 1e100:
            for i in range(1, self.nvars + 1):
                self.activity[i] *= 1e-100
            self.var_inc *= 1e-100

    def bump_clause(self, c: Clause):
        c.activity += self.cla_inc
        if c.activity > 1e20:
            for cl in self.learnts:
                cl.activity *= 1e-20
            self.cla_inc *= 1e-20

    def analyze(self, confl: Clause):
        """First-UIP learning.  Returns (learnt_lits, backjump_level, dep)."""
        learnt = [0]
        seen = [False] * (self.nvars + 1)
        counter = 0
        p = None
        dep = confl.dep
        index = len(self.trail)
        c = confl
        while True:
            if c.learnt:
                self.bump_clause(c)
            for q in c.lits:
                v = abs(q)
                if p is not None and q == p:
                    # the literal this reason clause implied; already resolved
                    continue
                if self.level[v] == 0:
                    if self.dep[v] > dep:
                        dep = self.dep[v]
                    continue
                if not seen[v]:
                    seen[v] = True
                    self.bump_var(v)
                    if self.level[v] >= self.decision_level:
                        counter += 1
                    else:
                        learnt.append(q)
            while True:
                index -= 1
                if seen[abs(self.trail[index])]:
                    break
            p = self.trail[index]
            v = abs(p)
            counter -= 1
            if counter == 0:
                break
            c = self.reason_[v]
            seen[v] = False
            if c.dep > dep:
                dep = c.dep
        learnt[0] = -p
        if len(learnt) == 1:
            bt = 0
        else:
            # put the highest-level of the remaining literals second
            m = max(range(1, len(learnt)), key=lambda i: self.level[abs(learnt[i])])
            learnt[1], learnt[m] = learnt[m], learnt[1]
            bt = self.level[abs(learnt[1])]
        if self._learn_log is not None:
            self._learn_log(list(learnt), self.decision_level)
        return learnt, bt, dep

    def analyze_final(self, p: int) -> list[int]:
        """Core of assumptions implying the failure of assumption ``p``."""
        core = [p]
        if self.decision_level == 0:
            return core
        seen = {abs(p)}
        for i in range(len(self.trail) - 1, self.trail_lim[0] - 1, -1):
            lit = self.trail[i]
            v = abs(lit)
            if v not in seen:
                continue
            r = self.reason_[v]
            if r is None:
                if lit != p:
                    core.append(lit)
            else:
                for l in r.lits:
                    if abs(l) != v and self.level[abs(l)] > 0:
                        seen.add(abs(l))
        return core

    def _conflict_core(self, confl: Clause) -> list[int]:
        """Assumptions reachable from a conflict inside the assumption
        prefix of the trail."""
        core = []
        seen = set()
        for l in confl.lits:
            if self.level[abs(l)] > 0:
                seen.add(abs(l))
        for i in range(len(self.trail) - 1, self.trail_lim[0] - 1, -1):
            lit = self.trail[i]
            v = abs(lit)
            if v not in seen:
                continue
            r = self.reason_[v]
            if r is None:
                core.append(lit)
            else:
                for l in r.lits:
                    if abs(l) != v and self.level[abs(l)] > 0:
                        seen.add(abs(l))
        return core

    # -- clause db ---------------------------------------------------------

    def reduce_db(self):
        locked = {id(self.reason_[abs(l)]) for l in self.trail if self.reason_[abs(l)] is not None}
        removable = [c for c in self.learnts if len(c.lits) > 2 and id(c) not in locked]
        removable.sort(key=lambda c: c.activity)
        for c in removable[: len(removable) // 2]:
            self._detach(c)
            self.learnts.remove(c)

    # -- search ------------------------------------------------------------

    def _pick_branch_var(self) -> int:
        best, best_act = 0, -1.0
        for v in range(1, self.nvars + 1):
            if self.assign[v] == 0 and self.activity[v] > best_act:
                best, best_act = v, self.activity[v]
        return best

    def solve(self, assumptions=(), client: Optional[TheoryClient] = None) -> SolveResult:
        self.client = client
        assumptions = list(assumptions)
        self.cancel_until(0)
        self._lz_pending = True
        if self.unsat_dep is not None:
            return SolveResult("unsat", core=[])
        restart_num = 0
        conflicts_since = 0
        use_restarts = not assumptions

        while True:
            confl = self.propagate()
            if isinstance(confl, tuple):
                tag = confl[0]
                if tag == "halt":
                    return SolveResult("halted", halt=confl[1])
                if tag == "learn":
                    for lits, learnt_flag in confl[1]:
                        c = self.add_clause(lits, learnt=learnt_flag)
                        if c is not None and len(c.lits) > 1:
                            self.queue_unit_check(c)
                    self.cancel_until(0)
                    self._lz_pending = True
                    continue
            if confl is not None:
                self.stats.conflicts += 1
                conflicts_since += 1
                if self.client is not None:
                    t = self.client.tick(self)
                    if t is not None and t[0] == "halt":
                        return SolveResult("halted", halt=t[1])
                # make sure the conflict clause has a literal at the
                # current level (theory lemmas may lag behind)
                levels = [self.level[abs(l)] for l in confl.lits]
                top = max(levels, default=0)
                if top < self.decision_level:
                    self.cancel_until(top)
                if self.decision_level == 0:
                    d = confl.dep
                    for l in confl.lits:
                        if self.dep[abs(l)] > d:
                            d = self.dep[abs(l)]
                    if self.unsat_dep is None or d < self.unsat_dep:
                        self.unsat_dep = d
                    return SolveResult("unsat", core=[])
                if assumptions and self.decision_level <= len(assumptions):
                    core = self._conflict_core(confl)
                    return SolveResult("unsat", core=core)
                learnt, bt, dep = self.analyze(confl)
                self.cancel_until(bt)
                c = self.add_clause(learnt, learnt=True, dep=dep)
                if c is not None:
                    if self.value(learnt[0]) == 0:
                        if len(learnt) > 1:
                            self.enqueue(learnt[0], c)
                        # unit learnt clauses propagate via pending queue
                self.var_inc /= VAR_DECAY
                self.cla_inc /= CLA_DECAY
                if len(self.learnts) > self.max_learnts + len(self.trail):
                    self.reduce_db()
                    self.max_learnts *= 1.05
                continue

            if self._lz_pending and self.decision_level == 0 and self.client is not None:
                self._lz_pending = False
                resp = self.client.on_level_zero(self)
                if resp is not None and resp[0] == "halt":
                    return SolveResult("halted", halt=resp[1])
                continue  # the visit may have queued suggestions or units

            if len(self.trail) == self.nvars:
                # propagation can fill the trail before the decision loop
                # has placed every assumption; a falsified one still means
                # unsat under these assumptions
                for p in assumptions:
                    if self.value(p) == -1:
                        return SolveResult("unsat", core=self.analyze_final(p))
                return SolveResult("sat", model=list(self.assign))

            if use_restarts and conflicts_since >= luby(restart_num) * RESTART_UNIT:
                restart_num += 1
                conflicts_since = 0
                self.stats.restarts += 1
                self.cancel_until(0)
                continue

            # assumptions first, then suggestions, then activity
            if self.decision_level < len(assumptions):
                p = assumptions[self.decision_level]
                val = self.value(p)
                if val == 1:
                    self.trail_lim.append(len(self.trail))
                    continue
                if val == -1:
                    core = self.analyze_final(p)
                    return SolveResult("unsat", core=core)
                self.trail_lim.append(len(self.trail))
                self.stats.decisions += 1
                self.enqueue(p, None)
                continue

            lit = None
            if self.client is not None:
                lit = self.client.suggest_decision(self)
                if lit is not None and self.value(lit) != 0:
                    lit = None
            if lit is not None:
                self.trail_lim.append(len(self.trail))
                self.stats.decisions += 1
                self.enqueue(lit, None)
                self.client.note_suggested_taken(self, lit)
                continue

            v = self._pick_branch_var()
            if v == 0:
                return SolveResult("sat", model=list(self.assign))
            self.trail_lim.append(len(self.trail))
            self.stats.decisions += 1
            self.enqueue(v if self.phase[v] else -v, None)

    # -- convenience -------------------------------------------------------

    def solve_simple(self, assumptions=()) -> SolveResult:
        return self.solve(assumptions, None)


def read_dimacs(text: str):
    """Parse DIMACS CNF; returns (num_vars, clauses)."""
    nvars = 0
    clauses = []
    current = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"bad DIMACS header: {line!r}")
            nvars = int(parts[2])
            continue
        for tok in line.split():
            lit = int(tok)
            if lit == 0:
                clauses.append(current)
                current = []
            else:
                current.append(lit)
    if current:
        raise ValueError("unterminated clause at end of DIMACS input")
    return nvars, clauses
