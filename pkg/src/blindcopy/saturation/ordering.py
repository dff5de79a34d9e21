"""The subterm ordering on atoms and the ordered inference rules.

``P(s) < Q(t)`` iff ``s`` is a strict subterm of ``t``.  Splitting atoms
(zero-ary, name starting with ``<``) sit below every other atom.  A
clause with a negative splitting literal may only be resolved on one of
those literals.  With ``select`` on, a clause with a maximal negative
literal is resolved only on one such literal (ordered resolution with
selection); every such inference is also an ordered one.
"""

from __future__ import annotations

from typing import List, Optional, Set

from ..terms import Atom, Clause, Literal, is_strict_subterm, mgu, rename_apart, subst_clause


def atom_lt(a: Atom, b: Atom) -> bool:
    """The extended ordering: splitting atoms first, then strict subterms."""
    if a.is_split():
        return not b.is_split()
    if b.is_split():
        return False
    if len(a.args) != 1 or len(b.args) != 1:
        return False
    return is_strict_subterm(a.args[0], b.args[0])


def maximal_literals(c: Clause) -> List[Literal]:
    lits = list(c)
    return [l for l in lits if not any(atom_lt(l.atom, m.atom) for m in lits)]


def has_negative_split(c: Clause) -> bool:
    return any(not l.positive and l.atom.is_split() for l in c)


def selected_literal(c: Clause) -> Optional[Literal]:
    """The maximal negative literal chosen for selection, if any."""
    negs = [l for l in maximal_literals(c) if not l.positive]
    return min(negs, key=lambda l: (l.atom.pred, str(l.atom))) if negs else None


def positive_candidates(c: Clause, select: bool = False) -> List[Literal]:
    """Literals ``A`` usable from the positive premise ``C | A``."""
    if has_negative_split(c):
        return []
    mx = maximal_literals(c)
    if select and any(not l.positive for l in mx):
        return []
    return [l for l in mx if l.positive]


def negative_candidates(c: Clause, select: bool = False) -> List[Literal]:
    """Literals ``-B`` usable from the negative premise ``-B | C``."""
    splits = [l for l in c if not l.positive and l.atom.is_split()]
    if splits:
        return splits
    if select:
        l = selected_literal(c)
        return [l] if l is not None else []
    return [l for l in maximal_literals(c) if not l.positive]


def resolve_on(c1: Clause, a: Literal, c2: Clause, b: Literal) -> Optional[Clause]:
    """Resolvent of ``c1`` on positive ``a`` and ``c2`` on negative ``b``; variables disjoint."""
    sigma = mgu(a.atom, b.atom)
    if sigma is None:
        return None
    rest = (c1.lits - {a}) | (c2.lits - {b})
    return subst_clause(Clause(rest), sigma)


def resolve_ordered(c1: Clause, c2: Clause) -> Set[Clause]:
    """All ordered resolvents between ``c1`` and ``c2`` in both directions."""
    out: Set[Clause] = set()
    for p, n in ((c1, c2), (c2, c1)):
        pos = positive_candidates(p)
        if not pos:
            continue
        _, n2 = rename_apart(p, n)
        negs = negative_candidates(n2)
        for a in pos:
            for b in negs:
                if a.atom.pred != b.atom.pred or len(a.atom.args) != len(b.atom.args):
                    continue
                r = resolve_on(p, a, n2, b)
                if r is not None:
                    out.add(r)
    return out


def factor_ordered(c: Clause) -> Set[Clause]:
    """One factor per unifiable pair of maximal same-sign literals."""
    out: Set[Clause] = set()
    mx = maximal_literals(c)
    for i, a in enumerate(mx):
        for b in mx[i + 1:]:
            if a.positive != b.positive or a.atom.pred != b.atom.pred:
                continue
            sigma = mgu(a.atom, b.atom)
            if sigma is None:
                continue
            f = subst_clause(c, sigma)
            if len(f) < len(c):
                out.add(f)
    return out
