"""Normalization of definite Horn clauses into generalized tree automata.

A clause is normal when its body has no function symbols, no repeated
variables and no variables missing from the head.  Predicates of the result
are states: sets of input predicates standing for the intersection of their
languages, written ``{P,Q}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple, Union

from .classify import ClassError, c_to_flat_onevar, in_class, unarize
from .prop import PropInstance, horn_sat
from .saturation.log import UNSAT, Budget, BudgetExceeded
from .terms import Atom, Clause, Literal, Term, Var, max_var, mgu, shift_vars, subst_clause, subterms, match

State = FrozenSet[str]
DEFAULT_STATE_CAP = 1 << 12


class StateCapExceeded(BudgetExceeded):
    pass


def state_name(p: Iterable[str]) -> str:
    return "{" + ",".join(sorted(p)) + "}"


def is_normal(c: Clause) -> bool:
    heads = [l for l in c if l.positive]
    if len(heads) != 1:
        return False
    hv = heads[0].vars
    seen: Set[Var] = set()
    for l in c:
        if l.positive:
            continue
        t = l.atom.arg
        if not isinstance(t, Var) or t in seen or t not in hv:
            return False
        seen.add(t)
    return True


def _head(c: Clause) -> Literal:
    return next(l for l in c if l.positive)


def _body(c: Clause) -> List[Literal]:
    return sorted((l for l in c if not l.positive), key=str)


@dataclass
class NormalSet:
    clauses: List[Clause] = field(default_factory=list)
    states: Dict[str, State] = field(default_factory=dict)
    predicates: Set[str] = field(default_factory=set)
    stats: Dict[str, int] = field(default_factory=dict)

    def state(self, p: Union[str, Iterable[str]]) -> str:
        """Name of a state given as a name or as a set of predicates."""
        if isinstance(p, str):
            if p in self.states:
                return p
            p = [p] if p in self.predicates else None
            if p is None:
                raise KeyError("unknown state")
        name = state_name(p)
        if name not in self.states and not set(p) <= self.predicates:
            raise KeyError(f"unknown state {name}")
        return name

    def format(self) -> str:
        return "".join(f"{c}.\n" for c in self.clauses)


# --------------------------------------------------------------------------
# Emptiness and membership


def _nonempty_states(clauses: Iterable[Clause]) -> Set[str]:
    inst = PropInstance()
    for c in clauses:
        inst.add_clause([Literal(l.positive, Atom(l.atom.pred)) for l in c])
    model: Set[int] = set()
    horn_sat(inst, model)
    return {inst.atoms[i - 1].pred for i in model}


def _accepted(clauses: Iterable[Clause], state: str, t: Term) -> bool:
    T = subterms(t)
    inst = PropInstance()
    for c in clauses:
        h = _head(c).atom
        for u in T:
            s = match(h.arg, u)
            if s is None:
                continue
            inst.add_clause([Literal(True, Atom(h.pred, (u,)))] +
                            [Literal(False, Atom(l.atom.pred, (s[l.atom.arg],))) for l in c if not l.positive])
    inst.add_clause([Literal(False, Atom(state, (t,)))])
    return horn_sat(inst) == UNSAT


def nonempty(n: NormalSet, state: Union[str, Iterable[str]]) -> bool:
    """Does some ground term reach ``state``?"""
    name = n.state(state)
    return name in _nonempty_states(n.clauses)


def accepts(n: NormalSet, state: Union[str, Iterable[str]], t: Term) -> bool:
    """Is ``t`` accepted at ``state``?"""
    if not t.ground:
        raise ValueError(f"{t} is not ground")
    return _accepted(n.clauses, n.state(state), t)


def run_states(n: NormalSet, terms: Iterable[Term]) -> Dict[Term, Set[str]]:
    """States accepting each ground term; ``terms`` must be closed under subterms."""
    index: Dict[Optional[str], List[Clause]] = {}
    for c in n.clauses:
        h = _head(c).atom.arg
        index.setdefault(None if isinstance(h, Var) else h.sym, []).append(c)
    out: Dict[Term, Set[str]] = {}
    for t in sorted(terms, key=lambda u: u.depth):
        got: Set[str] = set()
        out[t] = got
        cands = index.get(t.sym, []) + index.get(None, [])
        changed = True
        while changed:
            changed = False
            for c in cands:
                h = _head(c).atom
                if h.pred in got:
                    continue
                s = match(h.arg, t)
                if s is None:
                    continue
                if all(l.atom.pred in out[s[l.atom.arg]] for l in c if not l.positive):
                    got.add(h.pred)
                    changed = True
    return out


# --------------------------------------------------------------------------
# The fixpoint


class _Normalizer:
    def __init__(self, preds: Set[str], budget: Budget, state_cap: int):
        self.budget = budget
        self.state_cap = state_cap
        self.states: Dict[str, State] = {}
        self.preds = preds
        self.normal: Dict[Clause, None] = {}
        self.by_head: Dict[str, List[Clause]] = {}
        self.eps: Dict[str, List[Clause]] = {}  # body state -> p(x) | -q(x)
        self.waiting: Dict[str, List[Tuple[Clause, Literal]]] = {}
        self.seen: Set[Clause] = set()
        self.parked: Dict[Clause, None] = {}
        self.work: List[Clause] = []
        self.version = 0
        self._ne: Tuple[int, Set[str]] = (-1, set())
        self._acc: Set[Tuple[str, Term]] = set()
        self.stats = {"derived": 0, "combined": 0, "resolved": 0, "parked": 0}

    def state(self, preds: Iterable[str]) -> str:
        s = frozenset(preds)
        name = state_name(s)
        if name not in self.states:
            if len(self.states) >= self.state_cap:
                raise StateCapExceeded(f"more than {self.state_cap} states")
            self.states[name] = s
        return name

    def nonempty(self, name: str) -> bool:
        if self._ne[0] != self.version:
            self._ne = (self.version, _nonempty_states(self.normal))
        return name in self._ne[1]

    def accepted(self, name: str, t: Term) -> bool:
        if (name, t) in self._acc:
            return True
        if _accepted(self.normal, name, t):
            self._acc.add((name, t))
            return True
        return False

    def push(self, c: Clause) -> None:
        if c.is_tautology():
            return
        c = c.canonical()
        if c not in self.seen:
            self.seen.add(c)
            self.stats["derived"] += 1
            self.work.append(c)

    def run(self, clauses: Iterable[Clause]) -> None:
        for c in clauses:
            self.push(c)
        while True:
            while self.work:
                self.budget.check(len(self.seen))
                self.process(self.work.pop())
            mark = self.version
            for c in list(self.parked):
                del self.parked[c]
                self.process(c)
            if self.version == mark and not self.work:
                return

    def process(self, c: Clause) -> None:
        h = _head(c)
        body = _body(c)
        # ground body atoms: accepted ones go, otherwise wait
        ground = [l for l in body if l.atom.arg.ground]
        if ground:
            if all(self.accepted(l.atom.pred, l.atom.arg) for l in ground):
                self.push(Clause([l for l in c if l not in ground]))
            else:
                self.park(c)
            return
        deep = [l for l in body if not isinstance(l.atom.arg, Var)]
        if deep:
            lit = deep[0]
            self.waiting.setdefault(lit.atom.pred, []).append((c, lit))
            for d in list(self.by_head.get(lit.atom.pred, ())):
                self.resolve(c, lit, d)
            return
        merged: Dict[Var, Set[str]] = {}
        for l in body:
            merged.setdefault(l.atom.arg, set()).update(self.states[l.atom.pred])
        if len(merged) < len(body):
            lits = [h] + [Literal(False, Atom(self.state(ps), (v,))) for v, ps in merged.items()]
            self.push(Clause(lits))
            return
        extra = [l for l in body if l.atom.arg not in h.vars]
        if extra:
            if all(self.nonempty(l.atom.pred) for l in extra):
                self.push(Clause([l for l in c if l not in extra]))
            else:
                self.park(c)
            return
        self.add_normal(c)

    def park(self, c: Clause) -> None:
        if c not in self.parked:
            self.stats["parked"] += 1
        self.parked[c] = None

    def resolve(self, c: Clause, lit: Literal, d: Clause) -> None:
        d = shift_vars(d, max_var(c))
        hd = _head(d)
        sigma = mgu(lit.atom.arg, hd.atom.arg)
        if sigma is None:
            return
        self.stats["resolved"] += 1
        self.push(subst_clause(Clause([l for l in c if l != lit] + [l for l in d if l != hd]), sigma))

    def add_normal(self, c: Clause) -> None:
        if c in self.normal:
            return
        self.normal[c] = None
        self.version += 1
        h = _head(c)
        p = h.atom.pred
        for e in list(self.normal):
            if e is not c:
                self.combine(c, e)
        self.by_head.setdefault(p, []).append(c)
        for w, lit in list(self.waiting.get(p, ())):
            self.resolve(w, lit, c)
        body = _body(c)
        if isinstance(h.atom.arg, Var) and len(body) == 1:
            q = body[0].atom.pred
            self.eps.setdefault(q, []).append(c)
            for d in list(self.by_head.get(q, ())):
                self.push(Clause([Literal(True, Atom(p, (_head(d).atom.arg,)))] + _body(d)))
        for e in list(self.eps.get(p, ())):
            self.push(Clause([Literal(True, Atom(_head(e).atom.pred, (h.atom.arg,)))] + body))

    def combine(self, c: Clause, e: Clause) -> None:
        p, q = self.states[_head(c).atom.pred], self.states[_head(e).atom.pred]
        if p <= q or q <= p:
            return
        e = shift_vars(e, max_var(c))
        hc, he = _head(c), _head(e)
        sigma = mgu(hc.atom.arg, he.atom.arg)
        if sigma is None:
            return
        self.stats["combined"] += 1
        head = Literal(True, Atom(self.state(p | q), (hc.atom.arg,)))
        self.push(subst_clause(Clause([head] + _body(c) + _body(e)), sigma))


def _prepare(S: Iterable[Clause]) -> Tuple[List[Clause], Set[str]]:
    S = list(S)
    for c in S:
        if sum(1 for l in c if l.positive) > 1:
            raise ClassError(f"{c} is not Horn")
        if not in_class(c):
            raise ClassError(f"{c} is outside the class")
    if any(len(l.atom.args) != 1 for c in S for l in c):
        S = unarize(S)
    S = c_to_flat_onevar(S)
    preds = {l.atom.pred for c in S for l in c}
    return [c for c in S if any(l.positive for l in c)], preds


def normalize(S: Iterable[Clause], budget: Optional[Budget] = None,
              state_cap: int = DEFAULT_STATE_CAP) -> NormalSet:
    """Saturate definite clauses and keep the normal ones.

    Clauses without a positive literal do not affect the accepted languages
    and are left out.
    """
    definite, preds = _prepare(S)
    norm = _Normalizer(preds, budget or Budget(), state_cap)
    start = []
    for c in definite:
        start.append(Clause(Literal(l.positive, Atom(norm.state([l.atom.pred]), l.atom.args)) for l in c))
    norm.run(start)
    out = sorted(norm.normal, key=lambda c: (len(c), str(c)))
    stats = dict(norm.stats)
    stats.update({"states": len(norm.states), "normal": len(out), "pending": len(norm.parked)})
    return NormalSet(out, dict(norm.states), preds, stats)
