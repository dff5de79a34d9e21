"""Terms, atoms, literals, clauses and syntactic unification.

Terms are hash-consed: structurally equal terms are the same Python object,
so equality and hashing are identity based and subterm sets are cheap.
Variables are identified by a positive index (``x1``, ``x2``, ...).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations
from typing import Dict, Iterable, Iterator, Mapping, Optional, Tuple, Union


class Term:
    __slots__ = ("sym", "args", "ground", "vars", "depth", "__weakref__")

    sym: object
    args: Tuple["Term", ...]
    ground: bool
    vars: frozenset
    depth: int

    def is_var(self) -> bool:
        return isinstance(self, Var)

    def is_trivial(self) -> bool:
        """A term is trivial when it contains no function symbol."""
        return isinstance(self, Var)

    def __repr__(self) -> str:
        return str(self)

    def __lt__(self, other: "Term") -> bool:
        return term_key(self) < term_key(other)


class Var(Term):
    __slots__ = ()

    @property
    def index(self) -> int:
        return self.sym  # type: ignore[return-value]

    def __str__(self) -> str:
        return f"x{self.sym}"


class App(Term):
    __slots__ = ()

    def __str__(self) -> str:
        if not self.args:
            return str(self.sym)
        return f"{self.sym}({','.join(str(a) for a in self.args)})"


_VARS: Dict[int, Var] = {}
_APPS: Dict[Tuple[str, Tuple[Term, ...]], App] = {}


def var(index: int) -> Var:
    v = _VARS.get(index)
    if v is None:
        if index < 1:
            raise ValueError(f"variable index must be positive, got {index}")
        v = Var()
        v.sym = index
        v.args = ()
        v.ground = False
        v.vars = frozenset((v,))
        v.depth = 0
        _VARS[index] = v
    return v


def app(sym: str, *args: Term) -> App:
    key = (sym, args)
    t = _APPS.get(key)
    if t is None:
        t = App()
        t.sym = sym
        t.args = args
        t.ground = all(a.ground for a in args)
        if t.ground:
            t.vars = frozenset()
        elif len(args) == 1:
            t.vars = args[0].vars
        else:
            t.vars = frozenset().union(*(a.vars for a in args))
        t.depth = 1 + max((a.depth for a in args), default=-1)
        _APPS[key] = t
    return t


def const(sym: str) -> App:
    return app(sym)


def term_key(t: Term) -> str:
    return str(t)


def subterms(t: Term) -> set:
    """All subterms of ``t`` including ``t`` itself."""
    out = set()
    stack = [t]
    while stack:
        s = stack.pop()
        if s in out:
            continue
        out.add(s)
        stack.extend(s.args)
    return out


def strict_subterms(t: Term) -> set:
    out = set()
    for a in t.args:
        out |= subterms(a)
    return out


def ground_subterms(t: Term) -> set:
    return {s for s in subterms(t) if s.ground}


def nonground_subterms(t: Term) -> set:
    return {s for s in subterms(t) if not s.ground}


def fv(t: Term) -> frozenset:
    return t.vars


def is_trivial(t: Term) -> bool:
    return isinstance(t, Var)


def is_ground(t: Term) -> bool:
    return t.ground


def occurs(x: Var, t: Term) -> bool:
    return x in t.vars


def is_strict_subterm(s: Term, t: Term) -> bool:
    if s is t or s.depth >= t.depth:
        return False
    if not s.ground and not (s.vars <= t.vars):
        return False
    stack = list(t.args)
    while stack:
        u = stack.pop()
        if u is s:
            return True
        if u.depth > s.depth:
            stack.extend(u.args)
    return False


# --------------------------------------------------------------------------
# Signatures


@dataclass
class Signature:
    functions: Dict[str, int] = field(default_factory=dict)
    predicates: Dict[str, int] = field(default_factory=dict)

    @property
    def max_arity(self) -> int:
        return max(self.functions.values(), default=0)

    r = max_arity

    def constants(self) -> list:
        return sorted(f for f, n in self.functions.items() if n == 0)

    def validate(self) -> None:
        if not self.constants():
            raise ValueError("signature needs at least one zero-ary function symbol")

    def check_term(self, t: Term) -> None:
        if isinstance(t, Var):
            return
        n = self.functions.get(t.sym)
        if n is None:
            raise ValueError(f"undeclared function symbol {t.sym}")
        if n != len(t.args):
            raise ValueError(f"{t.sym} has arity {n}, used with {len(t.args)} arguments")
        for a in t.args:
            self.check_term(a)

    def copy(self) -> "Signature":
        return Signature(dict(self.functions), dict(self.predicates))

    @classmethod
    def of_clauses(cls, clauses: Iterable["Clause"], ensure_constant: bool = True) -> "Signature":
        sig = cls()
        for c in clauses:
            for lit in c:
                a = lit.atom
                if a.is_split():
                    continue
                sig.predicates.setdefault(a.pred, len(a.args))
                for t in a.args:
                    for s in subterms(t):
                        if isinstance(s, App):
                            sig.functions.setdefault(s.sym, len(s.args))
        if ensure_constant and not sig.constants():
            sig.functions[DEFAULT_CONSTANT] = 0
        return sig


DEFAULT_CONSTANT = "o"


# --------------------------------------------------------------------------
# Atoms, literals, clauses


@dataclass(frozen=True)
class Atom:
    pred: str
    args: Tuple[Term, ...] = ()

    def is_split(self) -> bool:
        return self.pred.startswith("<")

    @property
    def arg(self) -> Term:
        """The argument of a unary atom."""
        return self.args[0]

    @property
    def vars(self) -> frozenset:
        if not self.args:
            return frozenset()
        if len(self.args) == 1:
            return self.args[0].vars
        return frozenset().union(*(t.vars for t in self.args))

    @property
    def ground(self) -> bool:
        return all(t.ground for t in self.args)

    def __str__(self) -> str:
        if not self.args:
            return self.pred
        return f"{self.pred}({','.join(str(t) for t in self.args)})"


@dataclass(frozen=True)
class Literal:
    positive: bool
    atom: Atom

    def __neg__(self) -> "Literal":
        return Literal(not self.positive, self.atom)

    @property
    def vars(self) -> frozenset:
        return self.atom.vars

    @property
    def ground(self) -> bool:
        return self.atom.ground

    def is_trivial(self) -> bool:
        return all(isinstance(t, Var) for t in self.atom.args)

    def __str__(self) -> str:
        return ("" if self.positive else "-") + str(self.atom)


def pos(pred: str, *args: Term) -> Literal:
    return Literal(True, Atom(pred, tuple(args)))


def neg(pred: str, *args: Term) -> Literal:
    return Literal(False, Atom(pred, tuple(args)))


class Clause:
    """A finite set of literals; the empty clause is the contradiction."""

    __slots__ = ("lits", "_hash", "_canon", "_vars")

    def __init__(self, lits: Iterable[Literal] = ()):
        self.lits = frozenset(lits)
        self._hash = hash(self.lits)
        self._canon = None
        self._vars = None

    def __iter__(self) -> Iterator[Literal]:
        return iter(self.lits)

    def __len__(self) -> int:
        return len(self.lits)

    def __contains__(self, lit: object) -> bool:
        return lit in self.lits

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Clause) and self.lits == other.lits

    def __hash__(self) -> int:
        return self._hash

    def __or__(self, other: Union["Clause", Iterable[Literal]]) -> "Clause":
        return Clause(self.lits | frozenset(other))

    def __sub__(self, other: Iterable[Literal]) -> "Clause":
        return Clause(self.lits - frozenset(other))

    def is_empty(self) -> bool:
        return not self.lits

    @property
    def vars(self) -> frozenset:
        if self._vars is None:
            vs = frozenset()
            for lit in self.lits:
                vs = vs | lit.vars
            self._vars = vs
        return self._vars

    @property
    def ground(self) -> bool:
        return not self.vars

    def is_horn(self) -> bool:
        return sum(1 for l in self.lits if l.positive) <= 1

    def is_tautology(self) -> bool:
        return any(Literal(not l.positive, l.atom) in self.lits for l in self.lits if l.positive)

    def sorted_literals(self) -> list:
        return sorted(self.lits, key=_lit_sort_key)

    def __str__(self) -> str:
        if not self.lits:
            return "false"
        return " | ".join(str(l) for l in self.sorted_literals())

    def __repr__(self) -> str:
        return f"Clause({self})"

    def canonical(self) -> "Clause":
        if self._canon is None:
            self._canon = _canonicalize(self)
        return self._canon


def _lit_sort_key(l: Literal) -> tuple:
    return (not l.positive, str(l.atom))


def clause(*lits: Literal) -> Clause:
    return Clause(lits)


EMPTY = Clause()


# --------------------------------------------------------------------------
# Substitutions

Substitution = Dict[Var, Term]
Subject = Union[Term, Atom, Literal, Clause]


def subst_term(t: Term, sigma: Mapping[Var, Term], _memo: Optional[dict] = None) -> Term:
    if t.ground or not sigma:
        return t
    if isinstance(t, Var):
        return sigma.get(t, t)
    if _memo is None:
        _memo = {}
    r = _memo.get(t)
    if r is None:
        r = app(t.sym, *(subst_term(a, sigma, _memo) for a in t.args))
        _memo[t] = r
    return r


def subst_atom(a: Atom, sigma: Mapping[Var, Term], memo: Optional[dict] = None) -> Atom:
    if not a.args or not sigma:
        return a
    if memo is None:
        memo = {}
    return Atom(a.pred, tuple(subst_term(t, sigma, memo) for t in a.args))


def subst_literal(l: Literal, sigma: Mapping[Var, Term], memo: Optional[dict] = None) -> Literal:
    if not sigma:
        return l
    return Literal(l.positive, subst_atom(l.atom, sigma, memo))


def subst_clause(c: Clause, sigma: Mapping[Var, Term]) -> Clause:
    if not sigma:
        return c
    memo: dict = {}
    return Clause(subst_literal(l, sigma, memo) for l in c.lits)


def apply_subst(m: Subject, sigma: Mapping[Var, Term]):
    """Simultaneously replace variables of ``m`` according to ``sigma``."""
    if isinstance(m, Term):
        return subst_term(m, sigma)
    if isinstance(m, Atom):
        return subst_atom(m, sigma)
    if isinstance(m, Literal):
        return subst_literal(m, sigma)
    if isinstance(m, Clause):
        return subst_clause(m, sigma)
    raise TypeError(f"cannot apply a substitution to {type(m).__name__}")


def compose(s1: Mapping[Var, Term], s2: Mapping[Var, Term]) -> Substitution:
    """Return the substitution applying ``s1`` then ``s2``."""
    out: Substitution = {}
    for x, t in s1.items():
        u = subst_term(t, s2)
        if u is not x:
            out[x] = u
    for x, t in s2.items():
        if x not in s1 and t is not x:
            out[x] = t
    return out


# --------------------------------------------------------------------------
# Unification


def _walk(t: Term, b: Dict[Var, Term]) -> Term:
    while isinstance(t, Var) and t in b:
        t = b[t]
    return t


def _occurs_walk(x: Var, t: Term, b: Dict[Var, Term]) -> bool:
    stack = [t]
    seen = set()
    while stack:
        u = _walk(stack.pop(), b)
        if u is x:
            return True
        if u.ground or u in seen:
            continue
        seen.add(u)
        if isinstance(u, App):
            stack.extend(u.args)
    return False


def _resolve(t: Term, b: Dict[Var, Term], memo: dict) -> Term:
    if t.ground:
        return t
    r = memo.get(t)
    if r is not None:
        return r
    if isinstance(t, Var):
        u = b.get(t)
        r = t if u is None else _resolve(u, b, memo)
    else:
        r = app(t.sym, *(_resolve(a, b, memo) for a in t.args))
    memo[t] = r
    return r


def unify_pairs(pairs: Iterable[Tuple[Term, Term]]) -> Optional[Substitution]:
    """Most general simultaneous unifier of term pairs, or None."""
    b: Dict[Var, Term] = {}
    stack = list(pairs)
    while stack:
        s, t = stack.pop()
        s = _walk(s, b)
        t = _walk(t, b)
        if s is t:
            continue
        if isinstance(s, Var) and isinstance(t, Var):
            # bind the larger index to the smaller one
            if s.sym < t.sym:
                s, t = t, s
            b[s] = t
        elif isinstance(s, Var):
            if _occurs_walk(s, t, b):
                return None
            b[s] = t
        elif isinstance(t, Var):
            if _occurs_walk(t, s, b):
                return None
            b[t] = s
        else:
            if s.sym != t.sym or len(s.args) != len(t.args):
                return None
            stack.extend(zip(s.args, t.args))
    memo: dict = {}
    return {x: _resolve(x, b, memo) for x in b}


def mgu(s: Union[Term, Atom], t: Union[Term, Atom]) -> Optional[Substitution]:
    """Idempotent most general unifier of two terms or atoms; None if none exists."""
    if isinstance(s, Atom) or isinstance(t, Atom):
        if not (isinstance(s, Atom) and isinstance(t, Atom)):
            raise TypeError("cannot unify an atom with a term")
        if s.pred != t.pred or len(s.args) != len(t.args):
            return None
        return unify_pairs(zip(s.args, t.args))
    return unify_pairs([(s, t)])


def match(pattern: Term, target: Term, sigma: Optional[Substitution] = None) -> Optional[Substitution]:
    """One-way matching: find sigma with pattern*sigma == target (target unchanged)."""
    sigma = dict(sigma) if sigma else {}
    stack = [(pattern, target)]
    while stack:
        p, t = stack.pop()
        if p.ground:
            if p is not t:
                return None
            continue
        if isinstance(p, Var):
            bound = sigma.get(p)
            if bound is None:
                sigma[p] = t
            elif bound is not t:
                return None
            continue
        if not isinstance(t, App) or p.sym != t.sym or len(p.args) != len(t.args):
            return None
        stack.extend(zip(p.args, t.args))
    return sigma


# --------------------------------------------------------------------------
# Renaming


def max_var(c: Union[Clause, Iterable[Clause]]) -> int:
    if isinstance(c, Clause):
        return max((v.sym for v in c.vars), default=0)
    return max((max_var(d) for d in c), default=0)


def shift_vars(c: Clause, offset: int) -> Clause:
    if offset == 0 or c.ground:
        return c
    return subst_clause(c, {v: var(v.sym + offset) for v in c.vars})


def rename_apart(c1: Clause, c2: Clause) -> Tuple[Clause, Clause]:
    """Rename ``c2`` so that it shares no variable with ``c1``."""
    if c2.ground or not (c1.vars & c2.vars):
        return c1, c2
    base = max_var(c1)
    ordered = sorted(c2.vars, key=lambda v: v.sym)
    ren = {v: var(base + i + 1) for i, v in enumerate(ordered)}
    return c1, subst_clause(c2, ren)


def _render(lit: Literal, ren: Mapping[Var, int]) -> str:
    def tm(t: Term) -> str:
        if isinstance(t, Var):
            return f"x{ren[t]}"
        if not t.args:
            return str(t.sym)
        return f"{t.sym}({','.join(tm(a) for a in t.args)})"

    a = lit.atom
    body = a.pred if not a.args else f"{a.pred}({','.join(tm(t) for t in a.args)})"
    return ("" if lit.positive else "-") + body


def _first_occurrence(lits: Iterable[Literal]) -> list:
    order: list = []
    seen = set()

    def visit(t: Term) -> None:
        if t.ground:
            return
        if isinstance(t, Var):
            if t not in seen:
                seen.add(t)
                order.append(t)
            return
        for a in t.args:
            visit(a)

    for l in lits:
        for t in l.atom.args:
            visit(t)
    return order


_PERM_LIMIT = 6


def _canonicalize(c: Clause) -> Clause:
    vs = c.vars
    if not vs:
        return c
    if len(vs) == 1:
        (v,) = vs
        if v.sym == 1:
            return c
        return subst_clause(c, {v: var(1)})
    if len(vs) <= _PERM_LIMIT:
        best = None
        best_ren = None
        ordered = sorted(vs, key=lambda v: v.sym)
        for perm in permutations(range(1, len(ordered) + 1)):
            ren = dict(zip(ordered, perm))
            key = tuple(sorted(_render(l, ren) for l in c.lits))
            if best is None or key < best:
                best, best_ren = key, ren
        assert best_ren is not None
        return subst_clause(c, {v: var(i) for v, i in best_ren.items()})
    # too many variables: depth-first first-occurrence over a name-blind literal order
    blind = sorted(c.lits, key=lambda l: _render(l, {v: 0 for v in vs}))
    order = _first_occurrence(blind)
    return subst_clause(c, {v: var(i + 1) for i, v in enumerate(order)})


def canonical(c: Clause) -> Clause:
    """Representative of ``c`` modulo variable renaming."""
    return c.canonical()


def variant(c1: Clause, c2: Clause) -> bool:
    return c1.canonical() == c2.canonical()


def canonical_term(t: Term, v: int = 1) -> Term:
    """Rename a one-variable term to use variable ``x_v``."""
    if t.ground:
        return t
    if len(t.vars) != 1:
        raise ValueError(f"{t} is not a one-variable term")
    (x,) = t.vars
    if x.sym == v:
        return t
    return subst_term(t, {x: var(v)})


def plug(context: Term, t: Term) -> Term:
    """For a one-variable context u[x], return u[t]."""
    if context.ground:
        return context
    (x,) = context.vars
    return subst_term(context, {x: t})
