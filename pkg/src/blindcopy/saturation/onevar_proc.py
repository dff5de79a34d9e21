"""Ordered resolution for one-variable clauses in reduced form.

Input clauses are either ground or contain exactly one variable with every
literal argument non-ground and reduced.  Every derived clause is checked
to stay inside the finite set of such clauses whose arguments lie in
``Ng`` or ``Ng[Ngs[G]]``, which is what makes saturation terminate.
"""

from __future__ import annotations

from collections import deque
from typing import Dict, Iterable, List, Optional, Tuple

from ..classify import preprocess_onevar, unarize
from ..onevar import InstantiationContext, build_context, is_reduced
from ..terms import Clause, Literal, canonical_term, max_var, subst_clause, subst_literal, var
from .log import UNSAT, SAT, Budget, ClosureViolation, DerivationLog, Result
from .ordering import factor_ordered, negative_candidates, positive_candidates, resolve_on


def in_closure(c: Clause, ctx: InstantiationContext) -> Optional[str]:
    """``None`` when ``c`` is a permitted clause, else the reason it is not."""
    if c.ground:
        for l in c:
            t = l.atom.arg
            if not ctx.in_Ng_Ngs_G(t):
                return f"ground argument {t} not in Ng[Ngs[G]]"
        return None
    if len(c.vars) != 1:
        return "more than one variable"
    for l in c:
        t = l.atom.arg
        if t.ground:
            return f"ground literal {l} in a non-ground clause"
        if not is_reduced(t):
            return f"argument {t} is not reduced"
        if canonical_term(t, ctx.x.index) not in ctx.Ng:
            return f"argument {t} not in Ng"
    return None


class _Index:
    """Active clauses indexed by the predicate and sign of their eligible literals."""

    def __init__(self, select: bool = False) -> None:
        self.select = select
        self.pos: Dict[str, List[Tuple[Clause, Literal]]] = {}
        self.neg: Dict[str, List[Tuple[Clause, Literal]]] = {}

    def add(self, c: Clause) -> None:
        for l in positive_candidates(c, self.select):
            self.pos.setdefault(l.atom.pred, []).append((c, l))
        for l in negative_candidates(c, self.select):
            self.neg.setdefault(l.atom.pred, []).append((c, l))

    def partners(self, c: Clause):
        """Yield (positive premise, literal, negative premise, literal) with ``c`` as one side."""
        for l in positive_candidates(c, self.select):
            for d, m in list(self.neg.get(l.atom.pred, ())):
                yield c, l, d, m
        for l in negative_candidates(c, self.select):
            for d, m in list(self.pos.get(l.atom.pred, ())):
                yield d, m, c, l


def resolve_pair(p: Clause, a: Literal, n: Clause, b: Literal) -> Optional[Clause]:
    """Resolve after shifting ``n``'s variables past those of ``p``."""
    if p.vars & n.vars:
        k = max_var(p)
        ren = {v: var(v.index + k) for v in n.vars}
        n, b = subst_clause(n, ren), subst_literal(b, ren)
    return resolve_on(p, a, n, b)


def saturate(clauses: Iterable[Clause], check=None, budget: Optional[Budget] = None,
             log: Optional[DerivationLog] = None, rule: str = "input") -> Tuple[str, List[Clause]]:
    """Given-clause loop over resolution and factoring; ``check`` vets each new clause."""
    budget = budget or Budget()
    seen: Dict[Clause, int] = {}
    passive: deque = deque()

    def push(c: Clause, how: str, prem: Tuple[int, ...]) -> bool:
        if c.is_tautology():
            return False
        k = c.canonical()
        if k in seen:
            return False
        if check is not None:
            why = check(k)
            if why:
                raise ClosureViolation(f"{k}: {why}")
        seen[k] = log.add(k, how, prem) if log is not None else len(seen) + 1
        passive.append(k)
        return k.is_empty()

    for c in clauses:
        if push(c, rule, ()):
            return UNSAT, list(seen)
    index = _Index()
    while passive:
        budget.check(len(seen))
        g = passive.popleft()
        gid = seen[g]
        index.add(g)
        for f in factor_ordered(g):
            if push(f, "factor", (gid,)):
                return UNSAT, list(seen)
        for p, a, n, b in index.partners(g):
            r = resolve_pair(p, a, n, b)
            if r is not None and push(r, "resolve", (seen[p], seen[n])):
                return UNSAT, list(seen)
    return SAT, list(seen)


def decide_onevar(S: Iterable[Clause], ctx: Optional[InstantiationContext] = None,
                  budget: Optional[Budget] = None, trace: bool = False,
                  check_closure: bool = True) -> Result:
    """Decide one preprocessed branch of ground and reduced one-variable clauses."""
    S = list(S)
    ctx = ctx or build_context(S)
    log = DerivationLog() if trace else None
    check = (lambda c: in_closure(c, ctx)) if check_closure else None
    verdict, kept = saturate(S, check, budget, log)
    return Result(verdict, log, {"clauses": len(kept)})


def decide_onevar_all(S: Iterable[Clause], budget: Optional[Budget] = None, trace: bool = False,
                      check_closure: bool = True) -> Result:
    """Preprocess an arbitrary one-variable set and decide every branch."""
    S = list(S)
    if any(len(l.atom.args) != 1 for c in S for l in c if not l.atom.is_split()):
        S = unarize(S)
    branches = preprocess_onevar(S)
    total = 0
    last = None
    for br in branches:
        res = decide_onevar(br, budget=budget, trace=trace, check_closure=check_closure)
        total += res.stats.get("clauses", 0)
        last = res
        if res.verdict == SAT:
            res.stats.update(branches=len(branches), clauses=total)
            return res
    assert last is not None
    last.stats.update(branches=len(branches), clauses=total)
    return last
