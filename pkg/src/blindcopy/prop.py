"""Propositional reasoning with atoms treated as opaque propositions.

Atoms are compared literally: ``P(x1)`` and ``P(a)`` are unrelated
propositions, and so are ``P(x1)`` and ``P(x2)``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Dict, Hashable, Iterable, List, Optional, Sequence

from .terms import Clause, Literal

SAT = "Sat"
UNSAT = "Unsat"


@dataclass
class PropInstance:
    """Clauses as lists of non-zero ints; ``+i``/``-i`` for proposition ``i`` (1-based)."""

    atoms: List[Hashable] = field(default_factory=list)
    index: Dict[Hashable, int] = field(default_factory=dict)
    clauses: List[List[int]] = field(default_factory=list)

    def intern(self, atom: Hashable) -> int:
        i = self.index.get(atom)
        if i is None:
            self.atoms.append(atom)
            i = len(self.atoms)
            self.index[atom] = i
        return i

    def lit(self, l: Literal) -> int:
        i = self.intern(l.atom)
        return i if l.positive else -i

    def add_clause(self, c: Iterable[Literal]) -> None:
        self.clauses.append(sorted(set(self.lit(l) for l in c), key=abs))

    def add_ints(self, c: Iterable[int]) -> None:
        self.clauses.append(sorted(set(c), key=abs))

    @classmethod
    def of(cls, clauses: Iterable[Clause]) -> "PropInstance":
        inst = cls()
        for c in clauses:
            inst.add_clause(c)
        return inst

    @property
    def n(self) -> int:
        return len(self.atoms)

    def is_horn(self) -> bool:
        return all(sum(1 for l in c if l > 0) <= 1 for c in self.clauses)


def horn_sat(inst: PropInstance, model: Optional[set] = None) -> str:
    """Counter-based unit propagation from the positive facts, linear in the input.

    When ``model`` is given it receives the least model (positive propositions).
    """
    if not inst.is_horn():
        raise ValueError("horn_sat needs clauses with at most one positive literal")
    waiting: Dict[int, List[int]] = {}
    remaining: List[int] = []
    heads: List[int] = []
    queue: deque = deque()
    true = set()
    for k, c in enumerate(inst.clauses):
        body = {-l for l in c if l < 0}
        head = next((l for l in c if l > 0), 0)
        if head and head in body:
            # tautology
            remaining.append(-1)
            heads.append(0)
            continue
        remaining.append(len(body))
        heads.append(head)
        for b in body:
            waiting.setdefault(b, []).append(k)
        if not body:
            if not head:
                return UNSAT
            queue.append(head)
    while queue:
        p = queue.popleft()
        if p in true:
            continue
        true.add(p)
        for k in waiting.get(p, ()):
            remaining[k] -= 1
            if remaining[k] == 0:
                if not heads[k]:
                    return UNSAT
                queue.append(heads[k])
    if model is not None:
        model.clear()
        model.update(true)
    return SAT


def sat(inst: PropInstance, model: Optional[Dict[int, bool]] = None) -> str:
    """DPLL with unit propagation; branches on the lowest unassigned index, true first."""
    clauses = [c for c in inst.clauses]
    for c in clauses:
        if not c:
            return UNSAT
    occurs: Dict[int, List[int]] = {}
    for k, c in enumerate(clauses):
        for l in c:
            occurs.setdefault(-l, []).append(k)
    n = max((abs(l) for c in clauses for l in c), default=0)
    assign: Dict[int, bool] = {}
    trail: List[int] = []

    def value(l: int) -> Optional[bool]:
        v = assign.get(abs(l))
        if v is None:
            return None
        return v if l > 0 else not v

    def propagate(lits: Sequence[int]) -> bool:
        queue = list(lits)
        while queue:
            l = queue.pop()
            v = value(l)
            if v is True:
                continue
            if v is False:
                return False
            assign[abs(l)] = l > 0
            trail.append(abs(l))
            # clauses containing the now-false literal -l
            for k in occurs.get(l, ()):
                unassigned = None
                count = 0
                satisfied = False
                for m in clauses[k]:
                    mv = value(m)
                    if mv is True:
                        satisfied = True
                        break
                    if mv is None:
                        count += 1
                        unassigned = m
                        if count > 1:
                            break
                if satisfied or count > 1:
                    continue
                if count == 0:
                    return False
                queue.append(unassigned)
        return True

    def undo(mark: int) -> None:
        while len(trail) > mark:
            del assign[trail.pop()]

    units = [c[0] for c in clauses if len(c) == 1]
    if not propagate(units):
        return UNSAT

    # explicit stack of (variable, trail mark, next choice) decisions
    stack: List[List[int]] = []
    v = 1
    ok = False
    while True:
        while v <= n and v in assign:
            v += 1
        if v > n:
            ok = True
            break
        mark = len(trail)
        stack.append([v, mark, 0])
        while stack:
            top = stack[-1]
            dv, mark, tried = top
            undo(mark)
            if tried == 2:
                stack.pop()
                continue
            top[2] += 1
            if propagate([dv if tried == 0 else -dv]):
                v = dv + 1
                break
        else:
            break

    if ok and model is not None:
        model.clear()
        model.update({i: assign.get(i, False) for i in range(1, n + 1)})
    return SAT if ok else UNSAT


def solve(inst: PropInstance) -> str:
    return horn_sat(inst) if inst.is_horn() else sat(inst)


def entails_p(S: Iterable[Clause], C: Clause) -> bool:
    """``S`` propositionally entails ``C`` iff ``S`` plus the negated literals of ``C`` is unsat."""
    inst = PropInstance.of(S)
    for l in C:
        inst.add_clause([-l])
    return solve(inst) == UNSAT
