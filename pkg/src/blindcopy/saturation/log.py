"""Derivation log, verdicts and budgets shared by the procedures."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from ..terms import Clause

SAT = "Sat"
UNSAT = "Unsat"
UNKNOWN = "Unknown"


class BudgetExceeded(RuntimeError):
    pass


class ClosureViolation(AssertionError):
    """A derived clause fell outside the set the procedure guarantees."""


@dataclass
class Budget:
    seconds: Optional[float] = None
    max_clauses: Optional[int] = None
    start: float = field(default_factory=time.monotonic)

    def check(self, n_clauses: int = 0) -> None:
        if self.seconds is not None and time.monotonic() - self.start > self.seconds:
            raise BudgetExceeded(f"time budget of {self.seconds}s exhausted")
        if self.max_clauses is not None and n_clauses > self.max_clauses:
            raise BudgetExceeded(f"clause budget of {self.max_clauses} exhausted")


@dataclass
class Step:
    id: int
    clause: Clause
    rule: str
    premises: Tuple[int, ...] = ()


class DerivationLog:
    def __init__(self) -> None:
        self.steps: List[Step] = []
        self._ids: Dict[Clause, int] = {}

    def add(self, c: Clause, rule: str, premises: Sequence[int] = ()) -> int:
        hit = self._ids.get(c)
        if hit is not None:
            return hit
        s = Step(len(self.steps) + 1, c, rule, tuple(premises))
        self.steps.append(s)
        self._ids[c] = s.id
        return s.id

    def id_of(self, c: Clause) -> Optional[int]:
        return self._ids.get(c)

    def __len__(self) -> int:
        return len(self.steps)

    def provenance(self, target: int) -> List[Step]:
        """Steps needed to derive ``target``, in derivation order."""
        need = set()
        stack = [target]
        while stack:
            i = stack.pop()
            if i in need:
                continue
            need.add(i)
            stack.extend(self.steps[i - 1].premises)
        return [s for s in self.steps if s.id in need]

    @staticmethod
    def format(steps: Sequence[Step]) -> List[str]:
        out = []
        for s in steps:
            prem = ", ".join(f"#{p}" for p in s.premises)
            line = f"#{s.id} [{s.rule}] {s.clause}"
            out.append(line + (f" <= {prem}" if prem else ""))
        return out

    def lines(self) -> List[str]:
        return self.format(self.steps)

    def refutation(self) -> List[str]:
        i = self._ids.get(Clause())
        return [] if i is None else self.format(self.provenance(i))


@dataclass
class Result:
    verdict: str
    log: Optional[DerivationLog] = None
    stats: Dict[str, int] = field(default_factory=dict)
    note: str = ""

    @property
    def unsat(self) -> bool:
        return self.verdict == UNSAT

    @property
    def sat(self) -> bool:
        return self.verdict == SAT

    def trace(self) -> List[str]:
        if self.log is None:
            return []
        if self.verdict == UNSAT:
            ref = self.log.refutation()
            if ref:
                return ref
        return self.log.lines()
