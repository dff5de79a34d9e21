"""Syntactic clause classes and the satisfiability-preserving rewritings.

The class of interest admits one-variable clauses and clauses whose
non-trivial literals all have the shape ``P(u[f(x1,...,xn)])`` where
``{x1..xn}`` is the clause's variable set.  After :func:`c_to_flat_onevar`
only flat and one-variable clauses remain.
"""

from __future__ import annotations

from itertools import product
from typing import Dict, Iterable, List, Optional, Set, Tuple

from .onevar import decompose, named_pred
from .terms import (
    App,
    Atom,
    Clause,
    Literal,
    Term,
    Var,
    app,
    subst_term,
    subterms,
    var,
)

ONE_VARIABLE = "OneVariable"
EPSILON_BLOCK = "EpsilonBlock"
EPSILON_CLAUSE = "EpsilonClause"
COMPLEX = "Complex"
FLAT = "Flat"
C_SECOND_FORM = "CSecondForm"
GROUND = "Ground"
OTHER = "Other"

PRECEDENCE = (GROUND, EPSILON_BLOCK, EPSILON_CLAUSE, COMPLEX, ONE_VARIABLE, C_SECOND_FORM, OTHER)

DEFAULT_BRANCH_CAP = 1 << 16


class ClassError(ValueError):
    pass


def is_flat_term(t: Term) -> bool:
    """``f(x1,...,xn)`` with variable (possibly repeated) arguments, or a constant."""
    return isinstance(t, App) and all(isinstance(a, Var) for a in t.args)


def _user_lits(c: Clause) -> List[Literal]:
    return [l for l in c if not l.atom.is_split()]


def is_flat(c: Clause) -> bool:
    fv = c.vars
    for l in _user_lits(c):
        for t in l.atom.args:
            if isinstance(t, Var):
                continue
            if not is_flat_term(t) or t.vars != fv:
                return False
    return True


def is_epsilon_block(c: Clause) -> bool:
    lits = _user_lits(c)
    return len(c.vars) <= 1 and all(l.is_trivial() for l in lits)


def is_epsilon_clause(c: Clause) -> bool:
    return all(isinstance(t, Var) for l in _user_lits(c) for t in l.atom.args)


def is_complex(c: Clause) -> bool:
    return is_flat(c) and any(not l.is_trivial() for l in _user_lits(c))


def _second_form_context(t: Term, fv: frozenset) -> Optional[Tuple[Term, App]]:
    """Split ``t`` as ``u[s]`` with ``s = f(x...)`` over exactly ``fv`` and ``u`` one-variable."""
    if not fv:
        return None
    for s in subterms(t):
        if isinstance(s, App) and s.args and is_flat_term(s) and s.vars == fv:
            y = var(max(v.index for v in fv) + 1)
            u = _replace_all(t, s, y)
            if u.vars <= {y}:
                return u, s
    return None


def _replace_all(t: Term, old: Term, new: Term) -> Term:
    if t is old:
        return new
    if not t.args:
        return t
    return app(t.sym, *(_replace_all(a, old, new) for a in t.args))


def is_second_form(c: Clause) -> bool:
    fv = c.vars
    for l in _user_lits(c):
        for t in l.atom.args:
            if isinstance(t, Var):
                continue
            if _second_form_context(t, fv) is None:
                return False
    return True


def tags(c: Clause) -> Set[str]:
    out: Set[str] = set()
    if c.ground:
        out.add(GROUND)
    if len(c.vars) <= 1:
        out.add(ONE_VARIABLE)
    if is_epsilon_block(c):
        out.add(EPSILON_BLOCK)
    if is_epsilon_clause(c):
        out.add(EPSILON_CLAUSE)
    if is_flat(c):
        out.add(FLAT)
        if is_complex(c):
            out.add(COMPLEX)
    if is_second_form(c):
        out.add(C_SECOND_FORM)
    if not out:
        out.add(OTHER)
    return out


def classify(c: Clause) -> str:
    t = tags(c)
    for tag in PRECEDENCE:
        if tag in t:
            return tag
    return OTHER


def in_class(c: Clause) -> bool:
    return bool(tags(c) & {ONE_VARIABLE, FLAT, C_SECOND_FORM})


# --------------------------------------------------------------------------
# Rewritings


def bridge_clauses(pred: str, u: Term, x: Optional[Var] = None) -> List[Clause]:
    """``-Pu(x) | P(u[x])`` and ``Pu(x) | -P(u[x])``."""
    x = x or var(1)
    (y,) = u.vars
    ux = subst_term(u, {y: x})
    pu = named_pred(pred, u)
    a = Atom(pu, (x,))
    b = Atom(pred, (ux,))
    return [Clause([Literal(False, a), Literal(True, b)]), Clause([Literal(True, a), Literal(False, b)])]


def c_to_flat_onevar(S: Iterable[Clause]) -> List[Clause]:
    out: List[Clause] = []
    extra: Dict[Clause, None] = {}
    for c in S:
        if len(c.vars) <= 1 or is_flat(c):
            out.append(c)
            continue
        fv = c.vars
        lits = []
        for l in c:
            a = l.atom
            if a.is_split() or len(a.args) != 1 or isinstance(a.arg, Var):
                if not a.is_split() and len(a.args) != 1:
                    raise ClassError(f"literal {l} in {c} is not unary")
                lits.append(l)
                continue
            hit = _second_form_context(a.arg, fv)
            if hit is None:
                raise ClassError(f"literal {l} of clause {c} is outside the class")
            u, s = hit
            if u.is_trivial():
                lits.append(l)
                continue
            lits.append(Literal(l.positive, Atom(named_pred(a.pred, u), (s,))))
            for b in bridge_clauses(a.pred, u):
                extra.setdefault(b)
        out.append(Clause(lits))
    for b in extra:
        if b not in out:
            out.append(b)
    return out


def unarize(S: Iterable[Clause]) -> List[Clause]:
    """Replace ``P(t1..tn)`` (n != 1) by ``P'(tup_n(t1..tn))``."""

    def conv(l: Literal) -> Literal:
        a = l.atom
        if a.is_split() or len(a.args) == 1:
            return l
        return Literal(l.positive, Atom(f"{a.pred}'", (app(f"tup{len(a.args)}", *a.args),)))

    return [Clause(conv(l) for l in c) for c in S]


def _reduce_literal(l: Literal, extra: Dict[Clause, None]) -> Literal:
    a = l.atom
    t = a.arg
    if t.ground or isinstance(t, Var):
        return l
    parts = decompose(t)
    if len(parts) < 2:
        return l
    (x,) = t.vars
    pred = a.pred
    for i in range(len(parts) - 1):
        # bridges between P t1..ti and P t1..t(i+1)
        nxt = named_pred(pred, parts[i])
        lo = Atom(pred, (parts[i],))
        hi = Atom(nxt, (x,))
        extra.setdefault(Clause([Literal(True, lo), Literal(False, hi)]).canonical())
        extra.setdefault(Clause([Literal(False, lo), Literal(True, hi)]).canonical())
        pred = nxt
    return Literal(l.positive, Atom(pred, (parts[-1],)))


def preprocess_onevar(S: Iterable[Clause], branch_cap: int = DEFAULT_BRANCH_CAP) -> List[List[Clause]]:
    """Reduce all non-ground arguments, then split ground/non-ground mixtures."""
    extra: Dict[Clause, None] = {}
    reduced: List[Clause] = []
    for c in S:
        if len(c.vars) > 1:
            raise ClassError(f"clause {c} has more than one variable")
        for l in c:
            if not l.atom.is_split() and len(l.atom.args) != 1:
                raise ClassError(f"literal {l} is not unary")
        reduced.append(Clause(_reduce_literal(l, extra) for l in c))
    base: List[Clause] = []
    mixed: List[Tuple[Clause, Clause]] = []
    for c in list(dict.fromkeys(reduced)) + [b for b in extra if b not in reduced]:
        g = [l for l in c if l.atom.ground]
        if g and len(g) < len(c):
            mixed.append((Clause(g), Clause(l for l in c if not l.atom.ground)))
        else:
            base.append(c)
    if (1 << len(mixed)) > branch_cap:
        raise ClassError(f"{len(mixed)} mixed clauses exceed the branch cap {branch_cap}")
    branches = []
    for choice in product((0, 1), repeat=len(mixed)):
        br = list(base)
        for (g, ng), k in zip(mixed, choice):
            c = g if k == 0 else ng
            if c not in br:
                br.append(c)
        branches.append(br)
    return branches
