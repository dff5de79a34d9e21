"""Independent bounded check by ground instantiation and finite models.

Unsat answers come from a propositionally unsatisfiable set of ground
instances and are always correct.  Sat answers come from an explicit
finite structure that satisfies every clause, so they are correct too.
Anything else is Unknown.
"""

from __future__ import annotations

from itertools import product
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Set, Tuple

from ..prop import PropInstance, solve
from ..terms import Clause, Signature, Term, Var, app
from .log import SAT, UNKNOWN, UNSAT

DEFAULT_CAP = 200_000


class OracleOverflow(RuntimeError):
    pass


def ground_terms(sig: Signature, depth: int, cap: int = DEFAULT_CAP) -> List[Term]:
    """All ground terms of depth at most ``depth`` (constants have depth 0)."""
    levels: List[Term] = [app(c) for c in sig.constants()]
    out = list(levels)
    funcs = sorted((f, n) for f, n in sig.functions.items() if n > 0)
    for _ in range(depth):
        new = []
        have = set(out)
        for f, n in funcs:
            for args in product(out, repeat=n):
                t = app(f, *args)
                if t not in have:
                    have.add(t)
                    new.append(t)
                    if len(out) + len(new) > cap:
                        raise OracleOverflow(f"more than {cap} ground terms")
        if not new:
            break
        out.extend(new)
    return out


def _instances(S: Sequence[Clause], domain: Sequence, evaluate: Callable, cap: int) -> PropInstance:
    inst = PropInstance()
    count = 0
    for c in S:
        vs = sorted(c.vars, key=lambda v: v.sym)
        lits = list(c)
        for vals in product(domain, repeat=len(vs)):
            count += 1
            if count > cap:
                raise OracleOverflow(f"more than {cap} ground instances")
            env = dict(zip(vs, vals))
            inst.add_ints([
                inst.intern((l.atom.pred, tuple(evaluate(t, env) for t in l.atom.args)))
                * (1 if l.positive else -1)
                for l in lits
            ])
    return inst


def _herbrand_eval(t: Term, env: Dict[Var, Term]) -> Term:
    if isinstance(t, Var):
        return env[t]
    if t.ground:
        return t
    return app(t.sym, *(_herbrand_eval(a, env) for a in t.args))


def herbrand_unsat(S: Sequence[Clause], depth: int, sig: Optional[Signature] = None,
                   cap: int = DEFAULT_CAP) -> bool:
    """Are the ground instances over terms of depth at most ``depth`` contradictory?"""
    sig = sig or Signature.of_clauses(S)
    terms = ground_terms(sig, depth, cap)
    return solve(_instances(S, terms, _herbrand_eval, cap)) == UNSAT


def _policies(n_dom: int, arity: int, k: int) -> List[Tuple[str, int]]:
    out = [("arg", i) for i in range(arity)]
    out += [("elem", j) for j in range(min(k, n_dom))]
    return out


def finite_model(S: Sequence[Clause], depth: int, sig: Optional[Signature] = None,
                 cap: int = DEFAULT_CAP, k: int = 3) -> bool:
    """Search for a model whose domain is the terms up to ``depth``.

    Function symbols are interpreted as term construction while the result
    stays within the depth bound; larger results are sent to one of the
    arguments or to one of the first ``k`` domain elements, one policy for
    all symbols at a time.
    """
    sig = sig or Signature.of_clauses(S)
    dom = ground_terms(sig, depth, cap)
    index = {t: i for i, t in enumerate(dom)}
    arity = sig.max_arity
    for kind, j in _policies(len(dom), arity, k):
        def evaluate(t: Term, env: Dict[Var, Term], kind=kind, j=j) -> Term:
            if isinstance(t, Var):
                return env[t]
            if t.ground and t in index:
                return t
            args = [evaluate(a, env) for a in t.args]
            u = app(t.sym, *args)
            if u in index:
                return u
            if kind == "arg":
                return args[min(j, len(args) - 1)] if args else dom[0]
            return dom[j]

        if solve(_instances(S, dom, evaluate, cap)) != UNSAT:
            return True
    return False


def ground_saturation_oracle(S: Iterable[Clause], depth: int, cap: int = DEFAULT_CAP,
                             model_depth: Optional[int] = None) -> str:
    """``Unsat``, ``Sat`` or ``Unknown`` from bounded instantiation and model search."""
    if depth < 0:
        raise ValueError("depth must be non-negative")
    S = [c for c in S]
    sig = Signature.of_clauses(S)
    try:
        if herbrand_unsat(S, depth, sig, cap):
            return UNSAT
    except OracleOverflow:
        pass
    for d in range(0, (depth if model_depth is None else model_depth) + 1):
        try:
            if finite_model(S, d, sig, cap):
                return SAT
        except OracleOverflow:
            break
    return UNKNOWN


def _head_depths(t: Term, d: int, out: Dict[Var, int]) -> None:
    if isinstance(t, Var):
        out[t] = max(out.get(t, 0), d)
        return
    for a in t.args:
        _head_depths(a, d + 1, out)


def least_model(S: Iterable[Clause], depth: int, sig: Optional[Signature] = None,
                cap: int = DEFAULT_CAP) -> Dict[str, set]:
    """Ground atoms of the least Herbrand model whose terms have depth at most ``depth``.

    Only unary predicates; clauses without a positive literal are ignored.
    Derivations through deeper terms are not followed, so the result is an
    under-approximation of the true model restricted to the bound.
    """
    S = [c for c in S if any(l.positive for l in c)]
    sig = sig or Signature.of_clauses(S)
    pools_by_bound: Dict[int, List[Term]] = {}

    def pool(bound: int) -> List[Term]:
        if bound not in pools_by_bound:
            pools_by_bound[bound] = ground_terms(sig, max(bound, 0), cap) if bound >= 0 else []
        return pools_by_bound[bound]

    facts: Dict[str, set] = {}
    rules = []
    for c in S:
        (h,) = [l.atom for l in c if l.positive]
        body = sorted((l.atom for l in c if not l.positive), key=lambda a: (not a.ground, -a.arg.depth))
        need: Dict[Var, int] = {}
        _head_depths(h.arg, 0, need)
        rules.append((h, body, need))

    def bind(body, need, i: int, sigma: Dict[Var, Term], delta_at: int, delta):
        if i == len(body):
            yield sigma
            return
        a = body[i]
        pattern = _herbrand_partial(a.arg, sigma)
        have = delta.get(a.pred, ()) if i == delta_at else facts.get(a.pred, ())
        if pattern.ground:
            if pattern in have:
                yield from bind(body, need, i + 1, sigma, delta_at, delta)
            return
        for t in list(have):
            m = _match_into(pattern, t, dict(sigma))
            if m is None or any(m[v].depth + need[v] > depth for v in pattern.vars if v in need):
                continue
            yield from bind(body, need, i + 1, m, delta_at, delta)

    fired: Set[Tuple[int, tuple]] = set()

    def fire(h, need, sigma, out, rule: int = -1) -> None:
        # body bindings that agree on the head variables give the same heads
        hv = sorted(h.arg.vars & set(sigma), key=lambda v: v.sym)
        key = (rule, tuple(sigma[v] for v in hv))
        if key in fired:
            return
        fired.add(key)
        free = sorted(h.arg.vars - set(sigma), key=lambda v: v.sym)
        pools = [pool(depth - need[v]) for v in free]
        for vals in product(*pools):
            env = dict(sigma)
            env.update(zip(free, vals))
            t = _herbrand_eval(h.arg, env)
            if t.depth <= depth and t not in facts.get(h.pred, ()):
                out.setdefault(h.pred, set()).add(t)

    # semi-naive: every firing uses at least one fact from the last round
    delta: Dict[str, set] = {}
    for r, (h, body, need) in enumerate(rules):
        if not body:
            fire(h, need, {}, delta, r)
    for p, ts in delta.items():
        facts.setdefault(p, set()).update(ts)
    while delta:
        new: Dict[str, set] = {}
        for r, (h, body, need) in enumerate(rules):
            for k in range(len(body)):
                if body[k].pred not in delta:
                    continue
                for sigma in list(bind(body, need, 0, {}, k, delta)):
                    fire(h, need, sigma, new, r)
        for p, ts in new.items():
            facts.setdefault(p, set()).update(ts)
        delta = new
    return facts


def _herbrand_partial(t: Term, sigma: Dict[Var, Term]) -> Term:
    if isinstance(t, Var):
        return sigma.get(t, t)
    if t.ground:
        return t
    return app(t.sym, *(_herbrand_partial(a, sigma) for a in t.args))


def _match_into(p: Term, t: Term, sigma: Dict[Var, Term]) -> Optional[Dict[Var, Term]]:
    if isinstance(p, Var):
        b = sigma.get(p)
        if b is None:
            sigma[p] = t
            return sigma
        return sigma if b == t else None
    if isinstance(t, Var) or p.sym != t.sym or len(p.args) != len(t.args):
        return None
    for a, b in zip(p.args, t.args):
        if _match_into(a, b, sigma) is None:
            return None
    return sigma
