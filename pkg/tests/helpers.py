"""Shared generators and reference checkers for the test suite.

Nothing in here consults the search engines: reference answers come from
numpy enumeration (Boolean), Fourier-Motzkin (conjunctions), and exact
longest-path reasoning over difference constraints (packing/scheduling).
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from omtq import SplitMix64
from omtq.arith import EQ, LE, LT
from omtq.formula import CnfFormula, OmtProblem, normalize_atom

# ---------------------------------------------------------------------------
# random CNF + brute force (numpy)


def random_cnf(seed: int, max_vars: int = 16):
    """Random 3-CNF: (nvars, clauses) with signed 1-based literals."""
    rng = SplitMix64(seed)
    nvars = 3 + rng.randint(0, max_vars - 3)
    nclauses = 1 + rng.randint(0, 3 * nvars)
    clauses = []
    for _ in range(nclauses):
        width = 1 + rng.randint(0, 2)
        lits = []
        seen = set()
        while len(lits) < width:
            v = 1 + rng.randint(0, nvars - 1)
            if v in seen:
                continue
            seen.add(v)
            lits.append(v if rng.randint(0, 1) else -v)
        clauses.append(lits)
    return nvars, clauses


def truth_table(nvars: int):
    """Bool matrix of shape (2**nvars, nvars): row r = assignment r."""
    rows = np.arange(1 << nvars, dtype=np.uint32)
    return (rows[:, None] >> np.arange(nvars, dtype=np.uint32)[None, :]) & 1


def cnf_rows(nvars: int, clauses) -> np.ndarray:
    """Boolean vector over all 2**nvars assignments: formula satisfied?"""
    table = truth_table(nvars).astype(bool)
    ok = np.ones(1 << nvars, dtype=bool)
    for cl in clauses:
        cl_ok = np.zeros(1 << nvars, dtype=bool)
        for lit in cl:
            col = table[:, abs(lit) - 1]
            cl_ok |= col if lit > 0 else ~col
        ok &= cl_ok
    return ok


def brute_sat(nvars: int, clauses, fixed=()) -> bool:
    """Exhaustive satisfiability, optionally under fixed literals."""
    ok = cnf_rows(nvars, clauses)
    table = truth_table(nvars).astype(bool)
    for lit in fixed:
        col = table[:, abs(lit) - 1]
        ok &= col if lit > 0 else ~col
    return bool(ok.any())


# ---------------------------------------------------------------------------
# random arithmetic material


def _random_row(rng: SplitMix64, nvars: int, max_width: int = 3):
    width = 1 + rng.randint(0, min(max_width, nvars) - 1)
    chosen = []
    while len(chosen) < width:
        v = rng.randint(0, nvars - 1)
        if v not in chosen:
            chosen.append(v)
    coeffs = {}
    for v in chosen:
        c = 0
        while c == 0:
            c = rng.randint(-4, 4)
        coeffs[v] = Fraction(c)
    return coeffs, Fraction(rng.randint(-8, 8))


def random_literals(seed: int, nvars: int = 3, allow_eq: bool = True):
    """Conjunction of (Atom, polarity) literals over vars 0..nvars-1."""
    rng = SplitMix64(seed)
    n = 1 + rng.randint(0, 5)
    lits = []
    for _ in range(n):
        coeffs, const = _random_row(rng, nvars)
        roll = rng.randint(0, 9)
        if roll < 4:
            op = "<="
        elif roll < 7:
            op = "<"
        elif roll < 9 or not allow_eq:
            op = ">="
        else:
            op = "="
        atom, pol = normalize_atom(coeffs, const, op)
        if rng.randint(0, 1) and atom.rel != EQ:
            pol = not pol
        lits.append((atom, pol))
    return lits


def bounded_literals(seed: int, nvars: int = 3):
    """Like random_literals but var 0 always gets a finite lower bound,
    so minimization along it cannot be unbounded."""
    lits = random_literals(seed, nvars, allow_eq=True)
    rng = SplitMix64(seed ^ 0xB0D1)
    atom, pol = normalize_atom({0: Fraction(1)}, Fraction(rng.randint(-8, 0)), ">=")
    lits.append((atom, pol))
    return lits


# ---------------------------------------------------------------------------
# random whole problems (the oracle-agreement corpus)


def corpus_problem(seed: int) -> OmtProblem:
    """Small random optimization instance; var 0 is the cost."""
    rng = SplitMix64(seed)
    f = CnfFormula()
    nrat = 1 + rng.randint(0, 3)
    names = ["cost"] + [f"x{i}" for i in range(1, nrat)]
    for name in names:
        f.new_rat_var(name)
    nprop = rng.randint(0, 4)
    props = [f.new_prop(f"p{i}") for i in range(nprop)]

    pool = []
    natoms = 2 + rng.randint(0, 6)
    for k in range(natoms):
        if k == 0:
            # keep the cost mentioned somewhere
            coeffs = {0: Fraction(rng.randint(1, 4))}
            const = Fraction(rng.randint(-8, 8))
        else:
            coeffs, const = _random_row(rng, nrat)
        roll = rng.randint(0, 9)
        if roll < 4:
            op = "<="
        elif roll < 6:
            op = "<"
        elif roll < 9:
            op = ">="
        else:
            op = "="
        pool.append(normalize_atom(coeffs, const, op))

    nclauses = 2 + rng.randint(0, 4)
    for _ in range(nclauses):
        width = 1 + rng.randint(0, 2)
        lits = []
        for _ in range(width):
            if props and rng.randint(0, 9) < 3:
                p = props[rng.randint(0, len(props) - 1)]
                lits.append(p if rng.randint(0, 1) else -p)
            else:
                atom, pol = pool[rng.randint(0, len(pool) - 1)]
                if rng.randint(0, 1) and atom.rel != EQ:
                    pol = not pol
                lits.append(f.lit_for_atom(atom, pol))
        f.add_clause(lits)
    # anchor clause: some finite lower bound on cost in half the cases,
    # leaving the rest free to be unbounded or range-cut
    if rng.randint(0, 1):
        atom, pol = normalize_atom({0: Fraction(1)}, Fraction(rng.randint(-8, 0)), ">=")
        f.add_clause([f.lit_for_atom(atom, pol)])

    lb = ub = None
    if rng.randint(0, 1):
        lb = Fraction(rng.randint(-8, 4))
        ub = lb + 1 + rng.randint(0, 12)
    return OmtProblem(f, cost=0, lb=lb, ub=ub)


# ---------------------------------------------------------------------------
# difference-constraint reasoning (exact, Fractions)


def least_solution(n: int, edges, floor):
    """Least x with x[v] >= x[u]+w for (u,v,w) in edges and x[i] >= floor[i].

    Returns the vector or None when no solution exists (positive cycle).
    """
    x = list(floor)
    for _ in range(n):
        changed = False
        for u, v, w in edges:
            cand = x[u] + w
            if cand > x[v]:
                x[v] = cand
                changed = True
        if not changed:
            return x
    return None  # still relaxing after n rounds: positive cycle


def strip_oracle(meta) -> Fraction:
    """Minimal strip length by enumerating one disjunct per piece pair."""
    pieces = meta["pieces"]
    width = meta["width"]
    cap = meta["ub"]
    n = meta["n"]
    pairs = [(i, k) for i in range(n) for k in range(i + 1, n)]
    best = [None]

    def descend(idx, x_edges, y_edges):
        xs = least_solution(n, x_edges, [Fraction(0)] * n)
        if xs is None:
            return
        used = max(xs[i] + pieces[i][0] for i in range(n))
        if used > cap or (best[0] is not None and used >= best[0]):
            return
        ys = least_solution(n, y_edges, [pieces[i][1] for i in range(n)])
        if ys is None or any(y > width for y in ys):
            return
        if idx == len(pairs):
            best[0] = used
            return
        i, k = pairs[idx]
        li, hi = pieces[i]
        lk, hk = pieces[k]
        descend(idx + 1, x_edges + [(i, k, li)], y_edges)  # i left of k
        descend(idx + 1, x_edges + [(k, i, lk)], y_edges)  # k left of i
        descend(idx + 1, x_edges, y_edges + [(k, i, hi)])  # k below i
        descend(idx + 1, x_edges, y_edges + [(i, k, hk)])  # i below k

    descend(0, [], [])
    assert best[0] is not None, "strip instance must be feasible"
    return best[0]


def jobshop_oracle(meta) -> Fraction:
    """Minimal makespan by enumerating stage precedences per job pair."""
    jobs = meta["jobs"]
    machines = meta["machines"]
    prefix = meta["prefix"]
    total = [prefix[i][machines] for i in range(jobs)]
    slots = [(i, k, j) for i in range(jobs) for k in range(i + 1, jobs)
             for j in range(machines)]
    best = [None]

    def descend(idx, edges):
        starts = least_solution(jobs, edges, [Fraction(0)] * jobs)
        if starts is None:
            return
        span = max(starts[i] + total[i] for i in range(jobs))
        if best[0] is not None and span >= best[0]:
            return
        if idx == len(slots):
            best[0] = span
            return
        i, k, j = slots[idx]
        descend(idx + 1, edges + [(i, k, prefix[i][j + 1] - prefix[k][j])])
        descend(idx + 1, edges + [(k, i, prefix[k][j + 1] - prefix[i][j])])

    descend(0, [])
    assert best[0] is not None, "jobshop instance must be feasible"
    return best[0]


def strip_layout_ok(meta, model) -> bool:
    """No two decoded rectangles overlap and all sit inside the strip."""
    n = meta["n"]
    width = meta["width"]
    rects = []
    for i in range(n):
        li, hi = meta["pieces"][i]
        x = model[f"x{i}"]
        y = model[f"y{i}"]
        if x < 0 or y - hi < 0 or y > width:
            return False
        if x + li > model["length"]:
            return False
        rects.append((x, x + li, y - hi, y))
    for i in range(n):
        for k in range(i + 1, n):
            ax0, ax1, ay0, ay1 = rects[i]
            bx0, bx1, by0, by1 = rects[k]
            if ax0 < bx1 and bx0 < ax1 and ay0 < by1 and by0 < ay1:
                return False
    return True


# ---------------------------------------------------------------------------
# witness checking


def model_satisfies(problem: OmtProblem, model: dict) -> bool:
    """Does a rational valuation extend to a full model of the clauses?

    Atom literals are evaluated under the valuation; what remains is a
    plain Boolean CNF over propositions and definition labels, decided
    exhaustively.
    """
    f = problem.formula
    valuation = {i: model[name] for i, name in enumerate(f.rat_names)}

    residual = []
    for clause in f.clauses:
        lits = []
        satisfied = False
        for lit in clause:
            atom = f.atom_of(abs(lit))
            if atom is None:
                lits.append(lit)
                continue
            if atom.eval_concrete(valuation) == (lit > 0):
                satisfied = True
                break
        if satisfied:
            continue
        if not lits:
            return False
        residual.append(lits)
    if not residual:
        return True

    vars_left = sorted({abs(l) for cl in residual for l in cl})
    remap = {v: i + 1 for i, v in enumerate(vars_left)}
    mapped = [[(1 if l > 0 else -1) * remap[abs(l)] for l in cl] for cl in residual]
    return brute_sat(len(vars_left), mapped)
