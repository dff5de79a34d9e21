"""Alternating pushdown systems: clause shapes, bounded reachability, encodings.

The three admitted shapes are ``P(a)``, ``P(s[x]) | -Q(t[x])`` with ``s``
and ``t`` built from unary symbols, and ``P(x) | -P1(x) | -P2(x)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Set, Tuple

from .protocol import ProtocolRule, ProtocolSpec
from .terms import App, Atom, Clause, Literal, Term, Var, app, subst_term, var

REACHABLE = "Reachable"
UNREACHABLE = "Unreachable"
UNKNOWN = "Unknown"


class ApdsError(ValueError):
    pass


def _unary_word(t: Term) -> bool:
    """``t`` is a variable under a chain of unary symbols."""
    while isinstance(t, App):
        if len(t.args) != 1:
            return False
        t = t.args[0]
    return True


def shape(c: Clause) -> str:
    """``"i"``, ``"ii"`` or ``"iii"``; raises ``ApdsError`` otherwise."""
    lits = list(c)
    pos = [l for l in lits if l.positive]
    neg = [l for l in lits if not l.positive]
    if any(len(l.atom.args) != 1 for l in lits) or len(pos) != 1:
        raise ApdsError(f"{c} is not an alternating pushdown clause")
    head = pos[0].atom.arg
    if not neg and isinstance(head, App) and not head.args:
        return "i"
    if len(neg) == 1:
        body = neg[0].atom.arg
        if len(head.vars) == 1 and head.vars == body.vars and _unary_word(head) and _unary_word(body):
            return "ii"
    if len(neg) in (1, 2) and isinstance(head, Var) and all(l.atom.arg == head for l in neg):
        # a repeated body atom collapses to a single literal
        return "iii"
    raise ApdsError(f"{c} is not an alternating pushdown clause")


@dataclass
class Apds:
    clauses: List[Clause]

    def __post_init__(self) -> None:
        for c in self.clauses:
            shape(c)

    @property
    def predicates(self) -> List[str]:
        return sorted({l.atom.pred for c in self.clauses for l in c})


def _single_var(c: Clause) -> Var:
    (v,) = c.vars
    return v


def apds_reach_fixpoint(a: Apds, goal: Atom, depth: int) -> str:
    """Least fixpoint over ground atoms of term depth at most ``depth``.

    ``Reachable`` and ``Unreachable`` are definite; the latter only when no
    derivable atom was cut off by the depth bound.  Otherwise ``Unknown``.
    """
    if not goal.ground:
        raise ApdsError(f"goal {goal} is not ground")
    facts: Set[Atom] = set()
    by_pred: Dict[str, List[Term]] = {}
    pushes: Dict[str, List[Tuple[Term, Term, str, Var]]] = {}
    joins: Dict[str, List[Tuple[str, str]]] = {}
    agenda: List[Atom] = []
    for c in a.clauses:
        k = shape(c)
        (h,) = [l.atom for l in c if l.positive]
        body = [l.atom for l in c.sorted_literals() if not l.positive]
        if k == "i":
            agenda.append(h)
        elif k == "ii":
            pushes.setdefault(body[0].pred, []).append((body[0].arg, h.arg, h.pred, _single_var(c)))
        else:
            p1, p2 = body[0].pred, body[-1].pred
            joins.setdefault(p1, []).append((p2, h.pred))
            joins.setdefault(p2, []).append((p1, h.pred))
    cut = False
    while agenda:
        f = agenda.pop()
        if f in facts:
            continue
        if f.arg.depth > depth:
            cut = True
            continue
        facts.add(f)
        if f == goal:
            return REACHABLE
        by_pred.setdefault(f.pred, []).append(f.arg)
        for t, s, p, x in pushes.get(f.pred, ()):
            m = _match_word(t, f.arg, x)
            if m is not None:
                agenda.append(Atom(p, (subst_term(s, {x: m}),)))
        for other, p in joins.get(f.pred, ()):
            if Atom(other, (f.arg,)) in facts:
                agenda.append(Atom(p, (f.arg,)))
    return UNKNOWN if cut else UNREACHABLE


def _match_word(pattern: Term, t: Term, x: Var) -> Optional[Term]:
    while isinstance(pattern, App):
        if not isinstance(t, App) or t.sym != pattern.sym:
            return None
        pattern, t = pattern.args[0], t.args[0]
    return t


def apds_to_horn(a: Apds, goal: Atom) -> List[Clause]:
    return list(a.clauses) + [Clause([Literal(False, goal)])]


def _fresh(base: str, taken: Set[str]) -> str:
    name = base
    k = 0
    while name in taken:
        k += 1
        name = f"{base}{k}"
    taken.add(name)
    return name


def apds_to_protocol(a: Apds, goal: Atom) -> Tuple[ProtocolSpec, Term]:
    """Two control points, one rule per clause, atoms ``P(t)`` as ``enc(pair(P, t), K)``."""
    taken: Set[str] = set(a.predicates) | {goal.pred}
    for c in a.clauses + [Clause([Literal(True, goal)])]:
        for l in c:
            _symbols(l.atom.arg, taken)
    key = _fresh("k", taken)
    s1, s2 = app(_fresh("S1", taken)), app(_fresh("S2", taken))
    names: Dict[str, Term] = {}
    for p in sorted(set(a.predicates) | {goal.pred}):
        names[p] = app(_fresh("p" + p, taken))
    x = var(1)

    def msg(p: str, t: Term) -> Term:
        return app("enc", app("pair", names[p], t), app(key))

    spec = ProtocolSpec()
    spec.private.add(key)
    spec.inits = [s1, s2]
    for c in a.clauses:
        k = shape(c)
        (h,) = [l.atom for l in c if l.positive]
        body = [l.atom for l in c.sorted_literals() if not l.positive]
        if k == "i":
            spec.rules.append(ProtocolRule(s1, None, s2, msg(h.pred, h.arg)))
            continue
        ren = {_single_var(c): x}
        hs = subst_term(h.arg, ren)
        if k == "ii":
            recv = msg(body[0].pred, subst_term(body[0].arg, ren))
        else:
            recv = app("pair", msg(body[0].pred, x), msg(body[-1].pred, x))
        spec.rules.append(ProtocolRule(s1, recv, s2, msg(h.pred, hs)))
    spec.validate()
    return spec, msg(goal.pred, goal.arg)


def _symbols(t: Term, out: Set[str]) -> None:
    if isinstance(t, App):
        out.add(t.sym)
        for u in t.args:
            _symbols(u, out)


def read_apds(clauses: Iterable[Clause]) -> Apds:
    return Apds(list(clauses))
