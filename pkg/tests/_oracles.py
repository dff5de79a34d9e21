"""Independent reference implementations used only by the tests."""

from __future__ import annotations

import itertools
from typing import Dict, List, Optional, Tuple

from blindcopy.terms import App, Term, Var, app

# Terms as nested tuples: ("v", i) or (sym, arg, ...).
T = tuple


def to_tuple(t: Term) -> T:
    if isinstance(t, Var):
        return ("v", t.index)
    return (t.sym,) + tuple(to_tuple(a) for a in t.args)


def _occurs(i: int, t: T) -> bool:
    if t[0] == "v":
        return t[1] == i
    return any(_occurs(i, a) for a in t[1:])


def _sub(t: T, i: int, s: T) -> T:
    if t[0] == "v":
        return s if t[1] == i else t
    return (t[0],) + tuple(_sub(a, i, s) for a in t[1:])


def rewrite_unify(s: T, t: T) -> Optional[Dict[int, T]]:
    """Solved form by Delete, Decompose, Bind, clash and occurs-check failure."""
    eqs: List[Tuple[T, T]] = [(s, t)]
    solved: Dict[int, T] = {}
    while eqs:
        a, b = eqs.pop()
        if a == b:
            continue
        if a[0] != "v" and b[0] == "v":
            a, b = b, a
        if a[0] == "v":
            if _occurs(a[1], b):
                return None
            i = a[1]
            eqs = [(_sub(l, i, b), _sub(r, i, b)) for l, r in eqs]
            solved = {k: _sub(v, i, b) for k, v in solved.items()}
            solved[i] = b
            continue
        if a[0] != b[0] or len(a) != len(b):
            return None
        eqs.extend(zip(a[1:], b[1:]))
    return solved


def apply_tuple(t: T, sigma: Dict[int, T]) -> T:
    if t[0] == "v":
        return sigma.get(t[1], t)
    return (t[0],) + tuple(apply_tuple(a, sigma) for a in t[1:])


def all_terms(depth: int, funcs=(("f", 2), ("g", 1)), leaves: Tuple[Term, ...] = ()) -> List[Term]:
    """Every term of height at most ``depth`` over ``funcs`` and ``leaves``."""
    level = list(leaves)
    for _ in range(depth):
        nxt = list(leaves)
        for f, n in funcs:
            nxt += [app(f, *args) for args in itertools.product(level, repeat=n)]
        level = list(dict.fromkeys(nxt))
    return level


def truth_table(n_atoms: int, clauses: List[List[int]]) -> bool:
    """Satisfiable by enumerating all assignments, as bitmasks over the 2^n rows."""
    rows = 1 << n_atoms
    full = (1 << rows) - 1
    masks = []
    for i in range(n_atoms):
        half = 1 << i
        m, width = ((1 << half) - 1) << half, 2 * half
        while width < rows:
            m |= m << width
            width *= 2
        masks.append(m)
    acc = full
    for c in clauses:
        cm = 0
        for l in c:
            m = masks[abs(l) - 1]
            cm |= m if l > 0 else full ^ m
        acc &= cm
        if not acc:
            return False
    return True


def plug_ground(ctx: Term, g: Term) -> Term:
    """Replace the single variable of ``ctx`` by ``g``."""
    if isinstance(ctx, Var):
        return g
    if ctx.ground:
        return ctx
    assert isinstance(ctx, App)
    return app(ctx.sym, *(plug_ground(a, g) for a in ctx.args))


# --------------------------------------------------------------------------
# Ground Dolev-Yao search for protocol secrets


def dolev_yao_knowledge(spec, max_depth: int = 4, var_depth: int = 1, rounds: int = 20):
    """Adversary knowledge from forward execution of ground rule instances.

    Knowledge is kept analysed (pairs split, decryptable ciphertexts opened);
    composite messages are checked by synthesis.  Rule variables range over
    subterms of what is known or reached, up to ``var_depth``; messages deeper
    than ``max_depth`` are dropped.  Sound, incomplete.
    """
    from blindcopy.terms import match, subst_term, subterms

    keys = {pub: priv for pub, priv, _ in spec.keypairs}
    ctors = {"enc": 2, "pair": 2, **spec.advfuns}
    known = {app(c) for c in ["none"] + spec.known_constants()}
    reached = set(spec.inits)

    def derivable(t):
        if t in known:
            return True
        if isinstance(t, Var) or not t.args or ctors.get(t.sym) != len(t.args):
            return False
        return all(derivable(a) for a in t.args)

    def analyse():
        changed = True
        while changed:
            changed = False
            for m in list(known):
                new = []
                if m.sym == "pair" and len(m.args) == 2:
                    new = list(m.args)
                elif m.sym == "enc" and len(m.args) == 2:
                    k = m.args[1]
                    dk = app(keys[k.sym]) if not k.args and k.sym in keys else k
                    if derivable(dk):
                        new = [m.args[0]]
                for n in new:
                    if n not in known:
                        known.add(n)
                        changed = True

    def none(t):
        return app("none") if t is None else t

    for _ in range(rounds):
        analyse()
        before = (len(known), len(reached))
        pool = set()
        for t in list(known) + list(reached):
            pool |= {s for s in subterms(t) if s.ground and s.depth <= var_depth}
        for r in spec.rules:
            (x,) = r.vars or (None,)
            for st in list(reached):
                sigma = match(r.source, st)
                if sigma is None:
                    continue
                cands = [sigma] if x is None or x in sigma else [{x: p} for p in pool]
                for s in cands:
                    out = subst_term(none(r.send), s)
                    if out.depth <= max_depth and derivable(subst_term(none(r.recv), s)):
                        known.add(out)
                        reached.add(subst_term(r.target, s))
        if (len(known), len(reached)) == before:
            break
    analyse()
    return known, derivable


# --------------------------------------------------------------------------
# Non-ground least model of definite clauses


def _depth(t: T) -> int:
    return 0 if t[0] == "v" or len(t) == 1 else 1 + max(_depth(a) for a in t[1:])


def _shift(t: T, k: int) -> T:
    if t[0] == "v":
        return ("v", t[1] + k)
    return (t[0],) + tuple(_shift(a, k) for a in t[1:])


def _walk(t: T, s: Dict[int, T]) -> T:
    while t[0] == "v" and t[1] in s:
        t = s[t[1]]
    return t


def _unify(a: T, b: T, s: Dict[int, T]) -> Optional[Dict[int, T]]:
    a, b = _walk(a, s), _walk(b, s)
    if a == b:
        return s
    if a[0] == "v":
        if _occurs_in(a[1], b, s):
            return None
        return {**s, a[1]: b}
    if b[0] == "v":
        return _unify(b, a, s)
    if a[0] != b[0] or len(a) != len(b):
        return None
    for x, y in zip(a[1:], b[1:]):
        s = _unify(x, y, s)
        if s is None:
            return None
    return s


def _occurs_in(i: int, t: T, s: Dict[int, T]) -> bool:
    t = _walk(t, s)
    if t[0] == "v":
        return t[1] == i
    return any(_occurs_in(i, a, s) for a in t[1:])


def _resolve(t: T, s: Dict[int, T]) -> T:
    t = _walk(t, s)
    if t[0] == "v":
        return t
    return (t[0],) + tuple(_resolve(a, s) for a in t[1:])


def _normal_vars(t: T) -> T:
    ren: Dict[int, int] = {}

    def go(u: T) -> T:
        if u[0] == "v":
            return ("v", ren.setdefault(u[1], len(ren) + 1))
        return (u[0],) + tuple(go(a) for a in u[1:])

    return go(t)


def _matches(p: T, t: T, s: Dict[int, T]) -> Optional[Dict[int, T]]:
    if p[0] == "v":
        if p[1] in s:
            return s if s[p[1]] == t else None
        return {**s, p[1]: t}
    if t[0] == "v" or p[0] != t[0] or len(p) != len(t):
        return None
    for x, y in zip(p[1:], t[1:]):
        s = _matches(x, y, s)
        if s is None:
            return None
    return s


class NonGroundModel:
    """Derivable facts ``P(t)`` with variables, kept modulo subsumption.

    Every fact is a consequence of the clauses, so membership of a ground
    atom is sound.  Facts deeper than ``depth`` are dropped.
    """

    def __init__(self, clauses, depth: int = 7, max_facts: int = 5000, rounds: int = 40):
        rules = []
        for c in clauses:
            heads = [l for l in c if l.positive]
            if len(heads) != 1:
                continue
            h = heads[0].atom
            body = [(l.atom.pred, to_tuple(l.atom.args[0])) for l in c if not l.positive]
            rules.append(((h.pred, to_tuple(h.args[0])), body))
        self.facts: Dict[str, List[T]] = {}
        for _ in range(rounds):
            new = []
            for (hp, ht), body in rules:
                for s in self._join(body, 0, {}):
                    f = _normal_vars(_resolve(ht, s))
                    if _depth(f) <= depth:
                        new.append((hp, f))
            added = sum(self._add(p, f) for p, f in new)
            if not added:
                return
            if sum(len(v) for v in self.facts.values()) > max_facts:
                return

    def _join(self, body, i, s):
        if i == len(body):
            yield s
            return
        p, t = body[i]
        for f in list(self.facts.get(p, ())):
            s2 = _unify(t, _shift(f, 1000 * (i + 1)), s)
            if s2 is not None:
                yield from self._join(body, i + 1, s2)

    def _add(self, p: str, f: T) -> bool:
        have = self.facts.setdefault(p, [])
        if any(_matches(g, f, {}) is not None for g in have):
            return False
        have[:] = [g for g in have if _matches(f, g, {}) is None]
        have.append(f)
        return True

    def holds(self, p: str, t: Term) -> bool:
        g = to_tuple(t)
        return any(_matches(f, g, {}) is not None for f in self.facts.get(p, ()))
