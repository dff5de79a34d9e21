"""Reduced one-variable terms and the instantiation sets built from them.

A one-variable term ``t[x]`` is reduced when it cannot be written as
``u[v[x]]`` with both ``u`` and ``v`` non-trivial and non-ground.  Every
non-ground one-variable term has a unique decomposition into reduced parts,
found here from the dominators of ``x`` in the shared term DAG.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Callable, Dict, FrozenSet, Iterable, Iterator, List, Optional, Set, Tuple

from .terms import (
    App,
    Atom,
    Clause,
    Signature,
    Substitution,
    Term,
    Var,
    app,
    canonical_term,
    is_strict_subterm,
    match,
    mgu,
    nonground_subterms,
    ground_subterms,
    plug,
    strict_subterms,
    subst_term,
    var,
)


def _the_var(t: Term) -> Var:
    if t.ground:
        raise ValueError(f"{t} is ground")
    if len(t.vars) != 1:
        raise ValueError(f"{t} has more than one variable")
    (x,) = t.vars
    return x


def _replace(t: Term, old: Term, new: Term) -> Term:
    if t is old:
        return new
    if t.ground or isinstance(t, Var):
        return t
    return app(t.sym, *(_replace(a, old, new) for a in t.args))


def _dominators(t: Term, x: Var) -> List[Term]:
    """Nodes lying on every root-to-``x`` path of the DAG of ``t``, root first.

    A node ``m`` is such a node iff paths(root, m) * paths(m, x) equals
    paths(root, x); path counts are exact integers.
    """
    down: Dict[Term, int] = {}

    def to_x(s: Term) -> int:
        if s is x:
            return 1
        if s.ground or isinstance(s, Var):
            return 0
        c = down.get(s)
        if c is None:
            c = sum(to_x(a) for a in s.args)
            down[s] = c
        return c

    total = to_x(t)
    # paths from the root to each node, in topological order (larger depth first)
    nodes = sorted((s for s in down if down[s] > 0), key=lambda s: -s.depth)
    up: Dict[Term, int] = {t: 1}
    for s in nodes:
        k = up.get(s, 0)
        for a in s.args:
            if a is x or (not a.ground and a in down and down[a] > 0):
                up[a] = up.get(a, 0) + k
    doms = [s for s in nodes if up.get(s, 0) * down[s] == total]
    doms.append(x)
    return doms


def is_reduced(t: Term) -> bool:
    """True iff ``t`` has no factorisation into two non-trivial non-ground parts."""
    x = _the_var(t)
    return len(_dominators(t, x)) <= 2


def decompose(t: Term) -> List[Term]:
    """Parts ``[t1, ..., tn]`` with ``t = t1[...tn[x]...]``; each part uses ``t``'s variable."""
    x = _the_var(t)
    doms = _dominators(t, x)
    return [_replace(doms[i], doms[i + 1], x) for i in range(len(doms) - 1)]


def compose(parts: Iterable[Term], x: Optional[Var] = None) -> Term:
    """Inverse of :func:`decompose`: plug each part into the previous one."""
    parts = list(parts)
    if not parts:
        if x is None:
            raise ValueError("composing no parts needs an explicit variable")
        return x
    out = parts[-1]
    if x is not None:
        out = canonical_term(out, x.index)
    for p in reversed(parts[:-1]):
        out = plug(p, out)
    return out


# --------------------------------------------------------------------------
# Shape-classified unification


@dataclass(frozen=True)
class UnifierShape:
    """``tag`` is one of XtoU, YtoU, BothGround, Identical, Fail."""

    tag: str
    sigma: Optional[Substitution] = None
    u: Optional[Term] = None
    v: Optional[Term] = None

    def __bool__(self) -> bool:
        return self.tag != "Fail"


def unify_one_var(s: Term, t: Term) -> UnifierShape:
    x, y = _the_var(s), _the_var(t)
    if x is y:
        raise ValueError("terms must use distinct variables")
    if s.is_trivial() or t.is_trivial():
        raise ValueError("terms must be non-trivial")
    sigma = mgu(s, t)
    if sigma is None:
        return UnifierShape("Fail")
    xs, ys = sigma.get(x, x), sigma.get(y, y)
    if xs.ground and ys.ground:
        return UnifierShape("BothGround", sigma, xs, ys)
    if canonical_term(s, 1) is canonical_term(t, 1):
        return UnifierShape("Identical", sigma)
    if x in sigma:
        return UnifierShape("XtoU", sigma, xs)
    return UnifierShape("YtoU", sigma, ys)


def unify_same_var(s: Term, t: Term):
    """Returns ``"Identical"``, ``None`` on failure, or the unifier."""
    x = _the_var(s)
    if _the_var(t) is not x:
        raise ValueError("terms must share their variable")
    if s is t:
        return "Identical"
    sigma = mgu(s, t)
    if sigma is None:
        return None
    b = sigma[x]
    if not (b.ground and (is_strict_subterm(b, s) or is_strict_subterm(b, t))):
        raise AssertionError(f"binding {b} of {s} = {t} is not a ground strict subterm")
    return sigma


# --------------------------------------------------------------------------
# Fresh predicates standing for P(u[x])

_NAMES: Dict[str, Tuple[str, Term]] = {}


def named_pred(pred: str, u: Term) -> str:
    """Name of the predicate ``Pu`` with ``Pu(x)`` equivalent to ``P(u[x])``."""
    if u.is_trivial():
        return pred
    u = canonical_term(u, 1)
    base, inner = split_pred(pred)
    if inner is not None:
        u = plug(inner, u)
    name = f'{base}@"{u}"'
    _NAMES.setdefault(name, (base, u))
    return name


def split_pred(pred: str) -> Tuple[str, Optional[Term]]:
    """Inverse of :func:`named_pred`; ``(P, None)`` for an ordinary predicate."""
    hit = _NAMES.get(pred)
    if hit is not None:
        return hit
    if "@" not in pred:
        return pred, None
    from .syntax import parse_term

    base, _, quoted = pred.partition("@")
    u = parse_term(quoted.strip('"'))
    _NAMES[pred] = (base, u)
    return base, u


# --------------------------------------------------------------------------
# Instantiation context


def _instances(outer: Iterable[Term], inner: Callable[[Term], bool], w: Term) -> bool:
    """Is ground ``w`` of the form ``s[g]`` with ``s`` in ``outer`` and ``inner(g)``?"""
    for s in outer:
        if isinstance(s, Var):
            if inner(w):
                return True
            continue
        m = match(s, w)
        if m is not None and inner(m[_the_var(s)]):
            return True
    return False


@dataclass
class InstantiationContext:
    x: Var
    r: int
    predicates: FrozenSet[str]
    Ng: FrozenSet[Term]
    Ngs: FrozenSet[Term]
    Ngr: FrozenSet[Term]
    Ngrr: FrozenSet[Term]
    G: FrozenSet[Term]
    signature: Signature
    _memo: Dict[tuple, bool] = field(default_factory=dict, repr=False)

    # ---- intensional sets --------------------------------------------------

    def in_Ngr1(self, t: Term) -> bool:
        """Membership of a one-variable term (any variable) in Ngr1."""
        if isinstance(t, Var):
            return True
        if t.ground or len(t.vars) != 1:
            return False
        t = canonical_term(t, self.x.index)
        key = ("ngr1", t)
        hit = self._memo.get(key)
        if hit is None:
            args = frozenset(t.args)
            hit = any(isinstance(n, App) and frozenset(n.args) == args for n in self.Ngr)
            self._memo[key] = hit
        return hit

    def in_G1(self, g: Term) -> bool:
        """Ground ``f(s1..sn)`` whose argument set equals that of some G member."""
        if not g.ground:
            return False
        key = ("g1", g)
        hit = self._memo.get(key)
        if hit is None:
            args = frozenset(g.args)
            hit = any(frozenset(h.args) == args for h in self.G)
            self._memo[key] = hit
        return hit

    def in_Ngrr_G1(self, w: Term) -> bool:
        return self._cached("rg1", w, lambda: _instances(self.Ngrr, self.in_G1, w))

    def in_Ngrr_Ngrr_G1(self, w: Term) -> bool:
        return self._cached("rrg1", w, lambda: _instances(self.Ngrr, self.in_Ngrr_G1, w))

    def in_Ngr1_Ngrr_G1(self, w: Term) -> bool:
        return self._cached("r1rg1", w, lambda: self._ngr1_inst(w))

    def in_Ng_Ngs_G(self, w: Term) -> bool:
        """Ground ``w`` in Ng[Ngs[G]]."""
        inner = lambda g: _instances(self.Ngs, lambda h: h in self.G, g)
        return self._cached("ngsg", w, lambda: _instances(self.Ng, inner, w))

    def _cached(self, tag: str, w: Term, fn: Callable[[], bool]) -> bool:
        if not w.ground:
            return False
        key = (tag, w)
        hit = self._memo.get(key)
        if hit is None:
            hit = fn()
            self._memo[key] = hit
        return hit

    def _ngr1_inst(self, w: Term) -> bool:
        if self.in_Ngrr_G1(w):
            return True
        if not w.args:
            return False
        wargs = w.args
        for n in self.Ngr:
            if isinstance(n, Var):
                continue
            T = list(dict.fromkeys(n.args))
            cands: Set[Term] = set()
            for s in T:
                if s.ground:
                    continue
                for wi in wargs:
                    m = match(s, wi)
                    if m is not None:
                        cands.add(m[self.x])
            for g in cands:
                if not self.in_Ngrr_G1(g):
                    continue
                inst = {s: subst_term(s, {self.x: g}) for s in T}
                options = [[s for s in T if inst[s] is wi] for wi in wargs]
                if any(not o for o in options):
                    continue
                need = set(T)
                if _covers(options, need):
                    return True
        return False

    # ---- predicates --------------------------------------------------------

    def in_Q(self, pred: str) -> bool:
        """``pred`` is an input predicate ``p`` or a name ``p s`` with ``s`` in Ngrr."""
        if pred in self.predicates:
            return True
        key = ("q", pred)
        hit = self._memo.get(key)
        if hit is None:
            hit = self._in_Q(pred)
            self._memo[key] = hit
        return hit

    def _in_Q(self, pred: str) -> bool:
        base, w = split_pred(pred)
        if w is None:
            return False
        w = canonical_term(w, self.x.index)
        if base in self.predicates and w in self.Ngrr:
            return True
        y = var(self.x.index + 1)
        for p in self.predicates:
            b, u0 = split_pred(p)
            if b != base or u0 is None:
                continue
            m = match(canonical_term(u0, y.index), w)
            if m is None:
                continue
            s = m[y]
            if not s.ground and canonical_term(s, self.x.index) in self.Ngrr:
                return True
        return False

    def U(self) -> Iterator[Term]:
        """Terms ``f(x_{i1},...,x_{in})`` over x1..xr, constants included."""
        xs = [var(i) for i in range(1, self.r + 1)]
        for f, n in sorted(self.signature.functions.items()):
            for combo in product(xs, repeat=n):
                yield app(f, *combo)


def _covers(options: List[List[Term]], need: Set[Term]) -> bool:
    if len(options) < len(need):
        return False
    for choice in product(*options):
        if set(choice) >= need:
            return True
    return False


def _canonical_onevar(t: Term, x: Var) -> Term:
    return canonical_term(t, x.index)


def prefix_compositions(parts: List[Term], x: Var) -> List[Term]:
    """``s1[...[sm]...]`` for m = 0..n."""
    out = [x]
    for m in range(1, len(parts) + 1):
        out.append(compose(parts[:m], x))
    return out


def build_context(S: Iterable[Clause], signature: Optional[Signature] = None,
                  x: Optional[Var] = None) -> InstantiationContext:
    S = list(S)
    sig = signature or Signature.of_clauses(S)
    r = sig.max_arity
    x = x or var(r + 1)
    preds = set()
    Ng: Set[Term] = {x}
    G: Set[Term] = set()
    for c in S:
        onevar = len(c.vars) <= 1
        for lit in c:
            a = lit.atom
            if a.is_split():
                continue
            preds.add(a.pred)
            for t in a.args:
                G |= ground_subterms(t)
                if onevar and not t.ground:
                    Ng.add(_canonical_onevar(t, x))
    Ngs: Set[Term] = {x}
    for t in Ng:
        Ngs |= nonground_subterms(t)
    Ngr: Set[Term] = {x}
    Ngrr: Set[Term] = {x}
    for t in Ngs:
        if isinstance(t, Var):
            continue
        parts = decompose(t)
        Ngr.update(parts)
        Ngrr.update(prefix_compositions(parts, x))
    return InstantiationContext(
        x=x, r=r, predicates=frozenset(preds), Ng=frozenset(Ng), Ngs=frozenset(Ngs),
        Ngr=frozenset(Ngr), Ngrr=frozenset(Ngrr), G=frozenset(G), signature=sig,
    )
