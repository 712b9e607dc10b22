"""A compact CDCL SAT solver.

Two watched literals, first-UIP clause learning with non-chronological
backjumping, VSIDS-style activities with phase saving, and Luby restarts.
Clauses may be added between ``solve`` calls, which is all the blocking-clause
counter needs.

Literals use the DIMACS convention at the interface (``v`` / ``-v``) and
``2*v`` / ``2*v+1`` internally.
"""

from __future__ import annotations

import heapq
from typing import Iterable

from ..errors import SolverBudgetExceeded

_UNASSIGNED = -1


def _luby(i: int) -> int:
    # i-th element (1-based) of 1,1,2,1,1,2,4,1,...
    k = 1
    while (1 << k) - 1 < i:
        k += 1
    while True:
        if i == (1 << k) - 1:
            return 1 << (k - 1)
        i -= (1 << (k - 1)) - 1
        k = 1
        while (1 << k) - 1 < i:
            k += 1


class Solver:
    def __init__(self, num_vars: int = 0, clauses: Iterable[Iterable[int]] = (),
                 conflict_budget: int | None = None, restart_base: int = 64):
        self.num_vars = 0
        self.value: list[int] = [_UNASSIGNED]        # per var: -1, 0 (false), 1 (true)
        self.level: list[int] = [0]
        self.reason: list[list[int] | None] = [None]
        self.activity: list[float] = [0.0]
        self.phase: list[int] = [0]
        self.watches: list[list[list[int]]] = [[], []]
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.heap: list[tuple[float, int]] = []
        self.var_inc = 1.0
        self.ok = True
        self.clauses: list[list[int]] = []
        self.learnts: list[list[int]] = []
        self.conflict_budget = conflict_budget
        self.restart_base = restart_base
        self.stats = {"conflicts": 0, "decisions": 0, "propagations": 0, "solves": 0}
        self.model: list[bool] | None = None
        for _ in range(num_vars):
            self.new_var()
        for clause in clauses:
            self.add_clause(clause)

    # -- variables and literals ------------------------------------------------

    def new_var(self) -> int:
        self.num_vars += 1
        self.value.append(_UNASSIGNED)
        self.level.append(0)
        self.reason.append(None)
        self.activity.append(0.0)
        self.phase.append(0)
        self.watches += [[], []]
        heapq.heappush(self.heap, (0.0, self.num_vars))
        return self.num_vars

    def _lit_value(self, lit: int) -> int:
        v = self.value[lit >> 1]
        if v == _UNASSIGNED:
            return _UNASSIGNED
        return v ^ (lit & 1)

    @staticmethod
    def _internal(dimacs_lit: int) -> int:
        return 2 * dimacs_lit if dimacs_lit > 0 else 2 * -dimacs_lit + 1

    # -- clauses ------------------------------------------------------------------

    def add_clause(self, clause: Iterable[int]) -> bool:
        """Add a clause at decision level 0. Returns False once the formula is UNSAT."""
        if not self.ok:
            return False
        self._cancel_until(0)
        lits = []
        for d in clause:
            var = abs(d)
            while var > self.num_vars:
                self.new_var()
            lits.append(self._internal(d))
        lits = sorted(set(lits))
        for i in range(len(lits) - 1):
            if lits[i] ^ 1 == lits[i + 1]:
                return True  # tautology
        kept = []
        for lit in lits:
            val = self._lit_value(lit)
            if val == 1:
                return True
            if val == _UNASSIGNED:
                kept.append(lit)
        if not kept:
            self.ok = False
            return False
        if len(kept) == 1:
            self._enqueue(kept[0], None)
            if self._propagate() is not None:
                self.ok = False
            return self.ok
        self.clauses.append(kept)
        self._attach(kept)
        return True

    def _attach(self, clause: list[int]) -> None:
        self.watches[clause[0]].append(clause)
        self.watches[clause[1]].append(clause)

    # -- assignment trail -------------------------------------------------------------

    def _decision_level(self) -> int:
        return len(self.trail_lim)

    def _enqueue(self, lit: int, reason: list[int] | None) -> None:
        var = lit >> 1
        self.value[var] = 1 ^ (lit & 1)
        self.level[var] = self._decision_level()
        self.reason[var] = reason
        self.trail.append(lit)

    def _cancel_until(self, level: int) -> None:
        if self._decision_level() <= level:
            return
        start = self.trail_lim[level]
        for lit in reversed(self.trail[start:]):
            var = lit >> 1
            self.phase[var] = self.value[var]
            self.value[var] = _UNASSIGNED
            self.reason[var] = None
            heapq.heappush(self.heap, (-self.activity[var], var))
        del self.trail[start:]
        del self.trail_lim[level:]
        self.qhead = min(self.qhead, len(self.trail))

    def _propagate(self) -> list[int] | None:
        """Unit propagation; returns a conflicting clause or None."""
        value = self.value
        watches = self.watches
        while self.qhead < len(self.trail):
            p = self.trail[self.qhead]
            self.qhead += 1
            self.stats["propagations"] += 1
            false_lit = p ^ 1
            ws = watches[false_lit]
            watches[false_lit] = kept = []
            i = 0
            n = len(ws)
            while i < n:
                clause = ws[i]
                i += 1
                if clause[0] == false_lit:
                    clause[0], clause[1] = clause[1], false_lit
                first = clause[0]
                fv = value[first >> 1]
                if fv != _UNASSIGNED and fv ^ (first & 1) == 1:
                    kept.append(clause)
                    continue
                for k in range(2, len(clause)):
                    lit = clause[k]
                    lv = value[lit >> 1]
                    if lv == _UNASSIGNED or lv ^ (lit & 1) == 1:
                        clause[1], clause[k] = lit, false_lit
                        watches[lit].append(clause)
                        break
                else:
                    kept.append(clause)
                    if fv != _UNASSIGNED:  # first literal is false: conflict
                        kept.extend(ws[i:])
                        self.qhead = len(self.trail)
                        return clause
                    self._enqueue(first, clause)
        return None

    # -- conflict analysis ----------------------------------------------------------

    def _bump(self, var: int) -> None:
        self.activity[var] += self.var_inc
        if self.activity[var] > 1e100:
            for v in range(1, self.num_vars + 1):
                self.activity[v] *= 1e-100
            self.var_inc *= 1e-100
            self.heap = [(-self.activity[v], v) for v in range(1, self.num_vars + 1)
                         if self.value[v] == _UNASSIGNED]
            heapq.heapify(self.heap)
        elif self.value[var] == _UNASSIGNED:
            heapq.heappush(self.heap, (-self.activity[var], var))

    def _analyze(self, conflict: list[int]) -> tuple[list[int], int]:
        seen = set()
        learnt = [0]
        counter = 0
        p = None
        clause = conflict
        idx = len(self.trail) - 1
        current = self._decision_level()
        while True:
            for lit in (clause if p is None else clause[1:]):
                var = lit >> 1
                if var in seen or self.level[var] == 0:
                    continue
                seen.add(var)
                self._bump(var)
                if self.level[var] == current:
                    counter += 1
                else:
                    learnt.append(lit)
            while (self.trail[idx] >> 1) not in seen:
                idx -= 1
            p = self.trail[idx]
            idx -= 1
            counter -= 1
            if counter == 0:
                break
            clause = self.reason[p >> 1]
        learnt[0] = p ^ 1
        if len(learnt) == 1:
            return learnt, 0
        best = max(range(1, len(learnt)), key=lambda i: self.level[learnt[i] >> 1])
        learnt[1], learnt[best] = learnt[best], learnt[1]
        return learnt, self.level[learnt[1] >> 1]

    def _pick_branch(self) -> int | None:
        heap = self.heap
        while heap:
            act, var = heapq.heappop(heap)
            if self.value[var] == _UNASSIGNED and -act == self.activity[var]:
                return 2 * var + (0 if self.phase[var] == 1 else 1)
        for var in range(1, self.num_vars + 1):
            if self.value[var] == _UNASSIGNED:
                return 2 * var + (0 if self.phase[var] == 1 else 1)
        return None

    # -- search --------------------------------------------------------------------

    def solve(self) -> bool:
        """Decide satisfiability; on SAT the model is left in ``self.model``."""
        self.stats["solves"] += 1
        self.model = None
        if not self.ok:
            return False
        self._cancel_until(0)
        if self._propagate() is not None:
            self.ok = False
            return False
        conflicts_here = 0
        restart_no = 1
        restart_limit = self.restart_base * _luby(restart_no)
        since_restart = 0
        while True:
            conflict = self._propagate()
            if conflict is not None:
                self.stats["conflicts"] += 1
                conflicts_here += 1
                since_restart += 1
                if self.conflict_budget is not None and conflicts_here > self.conflict_budget:
                    self._cancel_until(0)
                    raise SolverBudgetExceeded(
                        f"conflict budget of {self.conflict_budget} exhausted")
                if self._decision_level() == 0:
                    self.ok = False
                    return False
                learnt, back_level = self._analyze(conflict)
                self._cancel_until(back_level)
                if len(learnt) == 1:
                    self._enqueue(learnt[0], None)
                else:
                    self.learnts.append(learnt)
                    self._attach(learnt)
                    self._enqueue(learnt[0], learnt)
                self.var_inc *= 1.05
                continue
            if since_restart >= restart_limit:
                restart_no += 1
                restart_limit = self.restart_base * _luby(restart_no)
                since_restart = 0
                self._cancel_until(0)
                continue
            lit = self._pick_branch()
            if lit is None:
                self.model = [False] + [self.value[v] == 1 for v in range(1, self.num_vars + 1)]
                self._cancel_until(0)
                return True
            self.stats["decisions"] += 1
            self.trail_lim.append(len(self.trail))
            self._enqueue(lit, None)


def solve_cnf(num_vars: int, clauses: Iterable[Iterable[int]]) -> list[bool] | None:
    """One-shot helper: a model (indexed by variable) or None if UNSAT."""
    solver = Solver(num_vars, clauses)
    return solver.model if solver.solve() else None
