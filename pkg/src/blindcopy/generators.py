"""Seeded random instances for the test-suite and the agreement checks."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .terms import Atom, Clause, Literal, Term, Var, app, var

FUNCS: Tuple[Tuple[str, int], ...] = (("f", 2), ("g", 1), ("a", 0))
PREDS: Tuple[str, ...] = ("P", "Q", "R")


@dataclass
class GenConfig:
    funcs: Tuple[Tuple[str, int], ...] = FUNCS
    preds: Tuple[str, ...] = PREDS
    max_clauses: int = 6
    max_lits: int = 3
    term_depth: int = 3
    horn: bool = False


def random_term(rng: random.Random, funcs: Sequence[Tuple[str, int]], depth: int,
                x: Optional[Var] = None, ground_p: float = 0.2) -> Term:
    """A term over at most the single variable ``x``."""
    consts = [f for f, n in funcs if n == 0]
    if depth <= 0 or rng.random() < 0.3:
        if x is not None and rng.random() > ground_p:
            return x
        return app(rng.choice(consts))
    f, n = rng.choice([fn for fn in funcs if fn[1] > 0] or list(funcs))
    return app(f, *(random_term(rng, funcs, depth - 1, x, ground_p) for _ in range(n)))


def random_onevar_term(rng: random.Random, funcs: Sequence[Tuple[str, int]], depth: int,
                       x: Optional[Var] = None) -> Term:
    """A non-ground one-variable term."""
    x = x or var(1)
    for _ in range(100):
        t = random_term(rng, funcs, depth, x)
        if not t.ground:
            return t
    return x


def _signs(rng: random.Random, n: int, horn: bool) -> List[bool]:
    if not horn:
        return [rng.random() < 0.5 for _ in range(n)]
    signs = [False] * n
    if rng.random() < 0.7:
        signs[rng.randrange(n)] = True
    return signs


def random_onevar_clause(rng: random.Random, cfg: GenConfig) -> Clause:
    n = rng.randint(1, cfg.max_lits)
    x = var(1)
    lits = []
    for sign in _signs(rng, n, cfg.horn):
        t = random_term(rng, cfg.funcs, cfg.term_depth, x, ground_p=0.3)
        lits.append(Literal(sign, Atom(rng.choice(cfg.preds), (t,))))
    return Clause(lits)


def random_flat_clause(rng: random.Random, cfg: GenConfig) -> Clause:
    """A complex clause or an epsilon-clause over up to r variables."""
    multi = [(f, n) for f, n in cfg.funcs if n > 0]
    r = max(n for _, n in cfg.funcs)
    n = rng.randint(1, cfg.max_lits)
    signs = _signs(rng, n, cfg.horn)
    if rng.random() < 0.25 or not multi:
        xs = [var(i) for i in range(1, rng.randint(1, r + 1) + 1)]
        return Clause(Literal(s, Atom(rng.choice(cfg.preds), (rng.choice(xs),))) for s in signs)
    k = rng.randint(1, r)
    xs = [var(i) for i in range(1, k + 1)]
    cands = [(f, m) for f, m in multi if m >= k]
    lits = []
    nontrivial = rng.randrange(n)
    for i, s in enumerate(signs):
        if i == nontrivial or (rng.random() < 0.4 and cands):
            f, m = rng.choice(cands)
            args = list(xs) + [rng.choice(xs) for _ in range(m - k)]
            rng.shuffle(args)
            t: Term = app(f, *args)
        else:
            t = rng.choice(xs)
        lits.append(Literal(s, Atom(rng.choice(cfg.preds), (t,))))
    return Clause(lits)


def random_instance(rng: random.Random, cfg: Optional[GenConfig] = None, kind: str = "mixed") -> List[Clause]:
    """``kind`` is ``mixed``, ``flat`` or ``onevar``."""
    cfg = cfg or GenConfig()
    n = rng.randint(1, cfg.max_clauses)
    out = []
    for _ in range(n):
        use_flat = kind == "flat" or (kind == "mixed" and rng.random() < 0.5)
        c = random_flat_clause(rng, cfg) if use_flat else random_onevar_clause(rng, cfg)
        out.append(c)
    return out


# --------------------------------------------------------------------------
# Alternating pushdown systems


def random_apds(rng: random.Random, n_clauses: Optional[int] = None, n_preds: int = 3,
                n_syms: int = 2, depth: int = 3) -> List[Clause]:
    """Facts ``P(a)``, push/pop rules ``P(s[x]) | -Q(t[x])`` and joins ``P(x) | -P1(x) | -P2(x)``."""
    preds = [f"P{i}" for i in range(n_preds)]
    syms = [f"s{i}" for i in range(n_syms)]
    x = var(1)

    def word(k: int) -> Term:
        t: Term = x
        for _ in range(k):
            t = app(rng.choice(syms), t)
        return t

    n = n_clauses if n_clauses is not None else rng.randint(1, 10)
    out = [Clause([Literal(True, Atom(rng.choice(preds), (app("a"),)))])]
    while len(out) < n:
        kind = rng.random()
        if kind < 0.15:
            c = Clause([Literal(True, Atom(rng.choice(preds), (app("a"),)))])
        elif kind < 0.8:
            s, t = word(rng.randint(0, depth)), word(rng.randint(0, depth))
            c = Clause([Literal(True, Atom(rng.choice(preds), (s,))),
                        Literal(False, Atom(rng.choice(preds), (t,)))])
        else:
            p, q1, q2 = (rng.choice(preds) for _ in range(3))
            c = Clause([Literal(True, Atom(p, (x,))), Literal(False, Atom(q1, (x,))),
                        Literal(False, Atom(q2, (x,)))])
        if not c.is_tautology() and len(c) >= 1:
            out.append(c)
    return out


def random_apds_goal(rng: random.Random, a: List[Clause], depth: int = 2) -> Atom:
    syms = sorted({t.sym for c in a for l in c for t in _subterms(l.atom.arg) if t.args})
    preds = sorted({l.atom.pred for c in a for l in c})
    t: Term = app("a")
    for _ in range(rng.randint(0, depth)):
        if syms:
            t = app(rng.choice(syms), t)
    return Atom(rng.choice(preds), (t,))


def _subterms(t: Term):
    yield t
    for a in t.args:
        yield from _subterms(a)
