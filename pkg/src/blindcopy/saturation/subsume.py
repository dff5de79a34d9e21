"""Clause subsumption: ``C`` subsumes ``D`` when ``C sigma`` is a subset of ``D``."""

from __future__ import annotations

from typing import Dict, Iterable, List, Optional, Set, Tuple

from ..terms import Clause, Literal, Substitution, match

Key = Tuple[bool, str]


def _key(l: Literal) -> Key:
    return (l.positive, l.atom.pred)


def _match_lit(p: Literal, t: Literal, sigma: Substitution) -> Optional[Substitution]:
    if p.positive != t.positive or p.atom.pred != t.atom.pred or len(p.atom.args) != len(t.atom.args):
        return None
    for a, b in zip(p.atom.args, t.atom.args):
        sigma = match(a, b, sigma)
        if sigma is None:
            return None
    return sigma


def subsumes(c: Clause, d: Clause) -> bool:
    if len(c) > len(d):
        return False
    if c.ground:
        return c.lits <= d.lits
    dk: Dict[Key, List[Literal]] = {}
    for l in d:
        dk.setdefault(_key(l), []).append(l)
    # most constrained literals first
    lits = sorted(c, key=lambda l: (len(dk.get(_key(l), ())), -l.atom.arg.depth if l.atom.args else 0))
    if any(_key(l) not in dk for l in lits):
        return False

    def search(i: int, sigma: Substitution) -> bool:
        if i == len(lits):
            return True
        for t in dk[_key(lits[i])]:
            s = _match_lit(lits[i], t, sigma)
            if s is not None and search(i + 1, s):
                return True
        return False

    return search(0, {})


class SubsumptionIndex:
    """Kept clauses filed under their literal keys, for forward and backward checks."""

    def __init__(self) -> None:
        self.by_key: Dict[Key, Set[Clause]] = {}
        # each clause once, under its least key, for forward checks
        self.by_least: Dict[Key, Set[Clause]] = {}
        self.keys: Dict[Clause, frozenset] = {}

    def copy(self) -> "SubsumptionIndex":
        out = SubsumptionIndex()
        out.by_key = {k: set(v) for k, v in self.by_key.items()}
        out.by_least = {k: set(v) for k, v in self.by_least.items()}
        out.keys = dict(self.keys)
        return out

    def add(self, c: Clause) -> None:
        ks = frozenset(_key(l) for l in c)
        self.keys[c] = ks
        for k in ks:
            self.by_key.setdefault(k, set()).add(c)
        if ks:
            self.by_least.setdefault(min(ks), set()).add(c)

    def remove(self, c: Clause) -> None:
        ks = self.keys.pop(c, None)
        if ks is None:
            return
        for k in ks:
            self.by_key[k].discard(c)
        if ks:
            self.by_least[min(ks)].discard(c)

    def forward(self, d: Clause) -> bool:
        """Is ``d`` subsumed by a kept clause?"""
        keys = {_key(l) for l in d}
        n = len(d)
        for k in keys:
            for c in self.by_least.get(k, ()):
                if len(c) <= n and self.keys[c] <= keys and subsumes(c, d):
                    return True
        return False

    def backward(self, c: Clause) -> List[Clause]:
        """Kept clauses strictly subsumed by ``c``."""
        if not c.lits:
            return []
        buckets = [self.by_key.get(_key(l), set()) for l in c]
        smallest = min(buckets, key=len)
        return [d for d in smallest if d != c and len(d) >= len(c) and subsumes(c, d)]
