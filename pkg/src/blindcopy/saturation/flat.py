"""Flat clause sets decided by resolution modulo propositional reasoning.

A branch holds the complex clauses and a set of epsilon-blocks.  Its
instance set ``I`` contains every projection of the complex clauses onto
``x1..xr`` and every block placed at ``x(r+1)`` and at each shallow term
``f(x_i, ..)``.  The branch is saturated when no disjunction of blocks on
distinct variables is propositionally implied by ``I`` unless one of those
blocks already contains a block of the branch.  Otherwise a minimal such
disjunction is found and the search branches on its blocks.

Candidate disjunctions are found by a counterexample-guided loop: models of
``I`` found so far rule out candidates, and a SAT call either confirms a
candidate or yields a new model.
"""

from __future__ import annotations

from itertools import product
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from ..classify import ClassError, is_flat, unarize
from ..prop import PropInstance, sat
from ..terms import Atom, Clause, Literal, Signature, Term, Var, app, subst_clause, var
from .log import SAT, UNSAT, Budget, DerivationLog, Result

SignedPred = Tuple[bool, str]
Block = FrozenSet[SignedPred]
# predicates fixed true and fixed false at one variable; the rest are free
Cube = Tuple[FrozenSet[str], FrozenSet[str]]


def _is_eps_clause(c: Clause) -> bool:
    return all(isinstance(l.atom.arg, Var) for l in c)


def _blocks_of(c: Clause) -> List[Block]:
    out: Dict[Var, Set[SignedPred]] = {}
    for l in c:
        out.setdefault(l.atom.arg, set()).add((l.positive, l.atom.pred))
    return [frozenset(b) for _, b in sorted(out.items(), key=lambda kv: kv[0].sym)]


def _tautological(b: Block) -> bool:
    return any((not s, p) in b for s, p in b)


def block_clause(b: Block, t: Term) -> Clause:
    return Clause(Literal(s, Atom(p, (t,))) for s, p in b)


def show_block(b: Block) -> str:
    return str(block_clause(b, var(1))) if b else "false"


class _Problem:
    def __init__(self, comp: List[Clause], preds: Sequence[str], sig: Signature):
        self.r = max(sig.max_arity, 1)
        self.xs = [var(i) for i in range(1, self.r + 2)]
        self.preds = sorted(preds)
        self.U: List[Term] = []
        for f, n in sorted(sig.functions.items()):
            for args in product(self.xs[:-1], repeat=n):
                self.U.append(app(f, *args))
        self.base = PropInstance()
        seen: Set[Clause] = set()
        for c in comp:
            for p in self._projections(c):
                if p not in seen and not p.is_tautology():
                    seen.add(p)
                    self.base.add_clause(p)
        for x in self.xs:
            for p in self.preds:
                self.base.intern(Atom(p, (x,)))

    def _projections(self, c: Clause) -> Iterable[Clause]:
        vs = sorted(c.vars, key=lambda v: v.sym)
        if not vs:
            yield c
            return
        for img in product(self.xs[:-1], repeat=len(vs)):
            yield subst_clause(c, dict(zip(vs, img)))

    def instance(self, blocks: Iterable[Block]) -> PropInstance:
        inst = PropInstance(list(self.base.atoms), dict(self.base.index), list(self.base.clauses))
        for b in blocks:
            for t in [self.xs[-1]] + self.U:
                inst.add_clause(block_clause(b, t))
        return inst


def _covered(b: Block, blocks: Iterable[Block]) -> bool:
    return _tautological(b) or any(e <= b for e in blocks)


def maximal_uncovered(preds: Sequence[str], blocks: Sequence[Block]) -> List[Block]:
    """Non-tautological blocks containing no branch block, maximal under inclusion."""
    out = []
    for signs in product((None, True, False), repeat=len(preds)):
        b = frozenset((s, p) for s, p in zip(signs, preds) if s is not None)
        if _covered(b, blocks):
            continue
        maximal = all(
            _covered(b | {(s, p)}, blocks)
            for s0, p in zip(signs, preds) if s0 is None for s in (True, False)
        )
        if maximal:
            out.append(b)
    return out


class _Search:
    """Pick one candidate block per variable so that every known model satisfies one of them."""

    def __init__(self, cands: List[Block], n_vars: int, models: List[List[Cube]]):
        self.cands = cands
        self.n = n_vars
        self.models = models
        self.failed: Set[Tuple[int, FrozenSet[int]]] = set()

    @staticmethod
    def holds(b: Block, part: Tuple[FrozenSet[str], FrozenSet[str]]) -> bool:
        true, false = part
        return any((p in true) if s else (p in false) for s, p in b)

    def run(self) -> Optional[List[Optional[Block]]]:
        return self._go(0, frozenset(range(len(self.models))), [])

    def _go(self, i: int, open_: FrozenSet[int], chosen: List[Optional[Block]]):
        if not open_:
            return chosen + [None] * (self.n - i)
        if i == self.n:
            return None
        key = (i, open_)
        if key in self.failed:
            return None
        scored = []
        for b in self.cands:
            rest = frozenset(m for m in open_ if not self.holds(b, self.models[m][i]))
            scored.append((len(rest), rest, b))
        scored.sort(key=lambda t: (t[0], sorted(t[2])))
        for _, rest, b in scored:
            got = self._go(i + 1, rest, chosen + [b])
            if got is not None:
                return got
        self.failed.add(key)
        return None


def _disjunction(chosen: Sequence[Optional[Block]], xs: Sequence[Var]) -> Clause:
    lits: List[Literal] = []
    for b, x in zip(chosen, xs):
        if b is not None:
            lits.extend(block_clause(b, x))
    return Clause(lits)


class FlatDecider:
    def __init__(self, S: Iterable[Clause], budget: Optional[Budget] = None, trace: bool = False):
        S = list(S)
        if any(len(l.atom.args) != 1 for c in S for l in c):
            S = unarize(S)
        for c in S:
            if not is_flat(c):
                raise ClassError(f"clause {c} is not flat")
        self.sig = Signature.of_clauses(S)
        self.comp = [c for c in S if not _is_eps_clause(c)]
        self.blocks0: Set[Block] = set()
        self.pending0: List[List[Block]] = []
        for c in S:
            if not _is_eps_clause(c):
                continue
            bs = _blocks_of(c)
            if len(bs) <= 1:
                self.blocks0.add(bs[0] if bs else frozenset())
            else:
                self.pending0.append(bs)
        preds = sorted({l.atom.pred for c in S for l in c})
        self.problem = _Problem(self.comp, preds, self.sig)
        self.budget = budget or Budget()
        self.log = DerivationLog() if trace else None
        self.memo: Set[FrozenSet[Block]] = set()
        self.stats = {"branches": 0, "sat_calls": 0}

    def _note(self, b: Block, why: str) -> None:
        if self.log is not None:
            self.log.add(block_clause(b, var(1)), why)

    def run(self) -> Result:
        for c in self.comp:
            if self.log is not None:
                self.log.add(c.canonical(), "input")
        ok = self._branch(frozenset(self.blocks0), tuple(self.pending0))
        return Result(SAT if ok else UNSAT, self.log, dict(self.stats))

    def _branch(self, blocks: FrozenSet[Block], pending: Tuple[List[Block], ...]) -> bool:
        """True iff a saturated extension without the empty block exists."""
        stack = [(blocks, pending)]
        while stack:
            blocks, pending = stack.pop()
            key = blocks
            if not pending and key in self.memo:
                continue
            self.stats["branches"] += 1
            self.budget.check(len(blocks))
            if frozenset() in blocks:
                continue
            open_pending = [p for p in pending if not any(_covered(b, blocks) for b in p)]
            if open_pending:
                first, rest = open_pending[0], tuple(open_pending[1:])
                for b in reversed(first):
                    stack.append((blocks | {b}, rest))
                continue
            witness = self._witness(blocks)
            if witness is None:
                return True
            self.memo.add(key)
            for b in reversed(witness):
                self._note(b, "split")
                stack.append((blocks | {b}, ()))
        return False

    def _witness(self, blocks: FrozenSet[Block]) -> Optional[List[Block]]:
        """Blocks of an implied disjunction none of which is covered; ``None`` when saturated."""
        prob = self.problem
        inst = prob.instance(blocks)
        model: Dict[int, bool] = {}
        self.stats["sat_calls"] += 1
        if sat(inst, model) != SAT:
            return [frozenset()]
        cands = maximal_uncovered(prob.preds, sorted(blocks, key=sorted))
        if not cands:
            return None
        models = [self._project(inst, model)]
        while True:
            self.budget.check(len(blocks))
            chosen = _Search(cands, len(prob.xs), models).run()
            if chosen is None:
                return None
            c = _disjunction(chosen, prob.xs)
            m = self._countermodel(inst, c)
            if m is None:
                return self._minimise(inst, chosen)
            models.append(m)

    def _project(self, inst: PropInstance, model: Dict[int, bool]) -> List[Cube]:
        """The model restricted to ``P(x_i)`` atoms, with atoms that can flip freely left open."""
        occurs: Dict[int, List[List[int]]] = {}
        for c in inst.clauses:
            for l in c:
                occurs.setdefault(abs(l), []).append(c)
        free: Set[int] = set()

        def fixed_true(l: int) -> bool:
            return abs(l) not in free and model.get(abs(l), False) == (l > 0)

        out = []
        for x in self.problem.xs:
            true, false = set(), set()
            for p in self.problem.preds:
                a = inst.index.get(Atom(p, (x,)))
                if a is None:
                    continue
                free.add(a)
                if all(any(fixed_true(l) for l in c) for c in occurs.get(a, ())):
                    continue
                free.discard(a)
                (true if model.get(a, False) else false).add(p)
            out.append((frozenset(true), frozenset(false)))
        return out

    def _countermodel(self, inst: PropInstance, c: Clause) -> Optional[List[Cube]]:
        q = PropInstance(list(inst.atoms), dict(inst.index), list(inst.clauses))
        for l in c:
            q.add_clause([-l])
        model: Dict[int, bool] = {}
        self.stats["sat_calls"] += 1
        if sat(q, model) != SAT:
            return None
        return self._project(q, model)

    def _minimise(self, inst: PropInstance, chosen: List[Optional[Block]]) -> List[Block]:
        cur = [set(b) if b is not None else set() for b in chosen]
        xs = self.problem.xs
        for i in range(len(cur)):
            for lit in sorted(cur[i]):
                cur[i].discard(lit)
                if self._countermodel(inst, _disjunction([frozenset(b) for b in cur], xs)) is not None:
                    cur[i].add(lit)
        out = [frozenset(b) for b in cur if b]
        return out or [frozenset()]


def decide_flat(S: Iterable[Clause], budget: Optional[Budget] = None, trace: bool = False) -> Result:
    """Satisfiability of a set of flat clauses."""
    return FlatDecider(S, budget, trace).run()
