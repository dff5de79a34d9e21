"""Decision procedures for flat plus one-variable clause sets.

Ordered resolution in which negative splitting literals are selected first,
interleaved with a fixed normalisation of every new clause:

* epsilon-splitting: a clause made of trivial literals over several
  variables is split into one branch per variable block (in the Horn
  procedure the negative blocks are named instead, so a single branch
  suffices);
* ground literals inside non-ground clauses are named by zero-ary atoms;
* literals over non-reduced terms are replaced by literals over fresh
  predicates standing for the outer context.

Every clause kept is checked to be of one of four shapes over the
precomputed instantiation sets; together with a bounded number of
variables in flat clauses this keeps the clause space finite.
"""

from __future__ import annotations

import heapq
from typing import Dict, Iterable, List, Optional, Set, Tuple

from ..classify import ClassError, c_to_flat_onevar, is_flat, unarize
from ..onevar import InstantiationContext, build_context, compose, decompose, named_pred
from ..terms import Atom, Clause, Literal, Term, Var, canonical_term, match, var
from .log import SAT, UNSAT, Budget, ClosureViolation, DerivationLog, Result
from .onevar_proc import _Index, resolve_pair
from .ordering import factor_ordered
from .subsume import SubsumptionIndex


# --------------------------------------------------------------------------
# Input preparation


def prepare(S: Iterable[Clause]) -> List[Clause]:
    """Unary predicates, then flat and one-variable clauses only."""
    S = list(S)
    if any(len(l.atom.args) != 1 for c in S for l in c if not l.atom.is_split()):
        S = unarize(S)
    S = c_to_flat_onevar(S)
    for c in S:
        if len(c.vars) > 1 and not is_flat(c):
            raise ClassError(f"clause {c} is neither flat nor one-variable")
    return S


def replacement_rules(ctx: InstantiationContext) -> List[Tuple[Atom, Atom]]:
    """``P s1..s(m-1) (sm[x]) -> P s1..sm (x)`` for every P and non-trivial s in Ngrr."""
    x = ctx.x
    rules = []
    for p in sorted(ctx.predicates):
        for s in sorted(ctx.Ngrr, key=str):
            if isinstance(s, Var):
                continue
            parts = decompose(s)
            lhs_pred = named_pred(p, compose(parts[:-1], x)) if len(parts) > 1 else p
            rules.append((Atom(lhs_pred, (parts[-1],)), Atom(named_pred(p, s), (x,))))
    return rules


def rule_clauses(rules: Iterable[Tuple[Atom, Atom]]) -> List[Clause]:
    out: Dict[Clause, None] = {}
    for a1, a2 in rules:
        out.setdefault(Clause([Literal(True, a1), Literal(False, a2)]).canonical())
        out.setdefault(Clause([Literal(False, a1), Literal(True, a2)]).canonical())
    return list(out)


# --------------------------------------------------------------------------
# Splitting atoms


class SplitNames:
    """Zero-ary naming atoms: ``<L>`` for a ground literal, ``<B>`` for a negative block."""

    def __init__(self) -> None:
        self.ground: Dict[str, Literal] = {}
        self.blocks: Dict[str, Clause] = {}

    def name_literal(self, l: Literal) -> Atom:
        name = f"<{l}>"
        self.ground[name] = l
        return Atom(name)

    def name_block(self, b: Clause) -> Atom:
        b = b.canonical()
        name = f"<{b}>"
        self.blocks[name] = b
        return Atom(name)

    def meaning(self, l: Literal) -> Literal:
        """Ground-literal names stand for the complement of what they name."""
        hit = self.ground.get(l.atom.pred)
        if hit is None:
            return l
        return -hit if l.positive else hit


# --------------------------------------------------------------------------
# Clause shapes


def _split(c: Clause) -> Tuple[List[Literal], List[Literal]]:
    core, d = [], []
    for l in c:
        (d if l.atom.is_split() else core).append(l)
    return core, d


def _blocks(core: Iterable[Literal]) -> Dict[Var, List[Literal]]:
    out: Dict[Var, List[Literal]] = {}
    for l in core:
        (v,) = l.atom.arg.vars
        out.setdefault(v, []).append(l)
    return out


def clause_type(c: Clause, ctx: InstantiationContext, names: SplitNames,
                horn: bool = False, block_limit: Optional[int] = None) -> Optional[str]:
    """``"C1"``..``"C4"`` (primed in the Horn case), or ``None``.

    In the Horn case at most ``block_limit`` (default: the maximal function
    arity) negated block names may occur.
    """
    core, d = _split(c)
    for l in d:
        g = names.ground.get(l.atom.pred)
        if g is not None:
            if g.atom.pred not in ctx.predicates or g.atom.arg not in ctx.G:
                return None
            continue
        b = names.blocks.get(l.atom.pred)
        if b is None or not horn or any(m.atom.pred not in ctx.predicates for m in b):
            return None
    tag = _core_type(core, ctx)
    if tag is None:
        return None
    if horn:
        meaning = [names.meaning(l) for l in c]
        if sum(1 for l in meaning if l.positive) > 1:
            return None
        limit = ctx.r if block_limit is None else block_limit
        if sum(1 for l in d if not l.positive and l.atom.pred in names.blocks) > limit:
            return None
        return tag + "'"
    return tag


def _core_type(core: List[Literal], ctx: InstantiationContext) -> Optional[str]:
    vs: Set[Var] = set()
    for l in core:
        vs |= l.vars
    if all(l.is_trivial() for l in core) and len(vs) <= 1:
        return "C1" if all(ctx.in_Q(l.atom.pred) for l in core) else None
    if not vs:
        ok = all(ctx.in_Q(l.atom.pred) and ctx.in_Ngr1_Ngrr_G1(l.atom.arg) for l in core)
        return "C3" if ok else None
    if len(vs) == 1 and all(not l.ground and ctx.in_Q(l.atom.pred) and ctx.in_Ngr1(l.atom.arg)
                            for l in core):
        return "C2"
    for l in core:
        t = l.atom.arg
        if isinstance(t, Var):
            if l.atom.pred not in ctx.predicates:
                return None
        elif not (t.vars == vs and len(t.args) >= 2 and all(isinstance(a, Var) for a in t.args)
                  and ctx.in_Q(l.atom.pred)):
            return None
    return "C4"


# --------------------------------------------------------------------------
# Normalisation of new clauses


class _Normalizer:
    def __init__(self, ctx: InstantiationContext, names: SplitNames, horn: bool):
        self.ctx = ctx
        self.names = names
        self.horn = horn

    def run(self, c: Clause) -> Tuple[List[Tuple[Clause, str]], Optional[List[Clause]]]:
        """Normal forms of ``c`` with the rule that produced them, plus an optional split."""
        out: List[Tuple[Clause, str]] = []
        work = [(c, "")]
        split: Optional[List[Clause]] = None
        steps = ("replace", "name-ground", "name-blocks") if self.horn else \
            ("eps-split", "name-ground", "replace")
        while work:
            d, how = work.pop()
            if d.is_tautology():
                continue
            for step in steps:
                res = getattr(self, "_" + step.replace("-", "_"))(d)
                if res is None:
                    continue
                if step == "eps-split":
                    split = res
                    d = None
                else:
                    main, extra = res
                    for e in extra:
                        work.append((e, step))
                    work.append((main, step if not how else how))
                    d = None
                break
            if d is not None:
                out.append((d, how))
        return out, split

    # epsilon-splitting into branches
    def _eps_split(self, d: Clause):
        core, dd = _split(d)
        if not core or not all(l.is_trivial() for l in core):
            return None
        blocks = _blocks(core)
        if len(blocks) < 2:
            return None
        parts = [Clause(b) for _, b in sorted(blocks.items(), key=lambda kv: kv[0].sym)]
        parts[0] = parts[0] | dd
        return parts

    # naming negative blocks (single branch)
    def _name_blocks(self, d: Clause):
        core, dd = _split(d)
        if not core or not all(l.is_trivial() for l in core):
            return None
        blocks = _blocks(core)
        if len(blocks) < 2:
            return None
        ordered = [b for _, b in sorted(blocks.items(), key=lambda kv: kv[0].sym)]
        first = next((b for b in ordered if any(l.positive for l in b)), ordered[0])
        main = list(first) + dd
        extra = []
        for b in ordered:
            if b is first:
                continue
            q = self.names.name_block(Clause(b))
            main.append(Literal(False, q))
            extra.append(Clause([Literal(True, q)] + b))
        return Clause(main), extra

    def _name_ground(self, d: Clause):
        if d.ground:
            return None
        g = [l for l in d if l.ground and not l.atom.is_split()]
        if not g:
            return None
        rest = [l for l in d if l not in g]
        extra = []
        for l in g:
            q = self.names.name_literal(l)
            rest.append(Literal(False, q))
            extra.append(Clause([Literal(True, q), l]))
        return Clause(rest), extra

    def _replace(self, d: Clause):
        if d.ground:
            return self._replace_ground(d)
        if len(d.vars) != 1:
            return None
        changed = False
        lits = []
        for l in d:
            nl = self._replace_onevar(l)
            changed |= nl is not l
            lits.append(nl)
        return (Clause(lits), []) if changed else None

    def _replace_onevar(self, l: Literal) -> Literal:
        a = l.atom
        if a.is_split() or a.arg.ground or isinstance(a.arg, Var):
            return l
        parts = decompose(a.arg)
        if len(parts) < 2:
            return l
        (x,) = a.arg.vars
        p = named_pred(a.pred, compose(parts[:-1], x))
        if not self.ctx.in_Q(p):
            return l
        return Literal(l.positive, Atom(p, (parts[-1],)))

    def _replace_ground(self, d: Clause):
        ctx = self.ctx
        changed = False
        lits = []
        for l in d:
            a = l.atom
            w = a.arg if not a.is_split() else None
            if w is None or not ctx.in_Ngrr_Ngrr_G1(w) or ctx.in_Ngr1_Ngrr_G1(w):
                lits.append(l)
                continue
            best = None
            for s in ctx.Ngrr:
                if isinstance(s, Var) or (best is not None and s.depth <= best[0].depth):
                    continue
                m = match(s, w)
                if m is None:
                    continue
                g = m[ctx.x]
                p = named_pred(a.pred, s)
                if ctx.in_Ngrr_G1(g) and ctx.in_Q(p):
                    best = (s, g, p)
            if best is None:
                lits.append(l)
                continue
            changed = True
            lits.append(Literal(l.positive, Atom(best[2], (best[1],))))
        return (Clause(lits), []) if changed else None


# --------------------------------------------------------------------------
# Saturation with branches


class _Passive:
    """Given-clause queue: mostly lightest first, every ``ratio``-th pick oldest first."""

    def __init__(self, ratio: int = 5) -> None:
        self.ratio = ratio
        self.by_weight: List[Tuple[int, int, Clause]] = []
        self.by_age: List[Tuple[int, Clause]] = []
        self.taken: Set[int] = set()
        self.count = 0
        self.picks = 0

    def copy(self) -> "_Passive":
        q = _Passive(self.ratio)
        q.by_weight = list(self.by_weight)
        q.by_age = list(self.by_age)
        q.taken = set(self.taken)
        q.count, q.picks = self.count, self.picks
        return q

    def append(self, c: Clause) -> None:
        self.count += 1
        heapq.heappush(self.by_weight, (_weight(c), self.count, c))
        heapq.heappush(self.by_age, (self.count, c))

    def __bool__(self) -> bool:
        self._drop()
        return bool(self.by_age)

    def _drop(self) -> None:
        while self.by_age and self.by_age[0][0] in self.taken:
            heapq.heappop(self.by_age)
        while self.by_weight and self.by_weight[0][1] in self.taken:
            heapq.heappop(self.by_weight)

    def popleft(self) -> Clause:
        self._drop()
        self.picks += 1
        if self.picks % self.ratio == 0:
            n, c = heapq.heappop(self.by_age)
        else:
            _, n, c = heapq.heappop(self.by_weight)
        self.taken.add(n)
        return c


def _weight(c: Clause) -> int:
    return sum(1 + sum(t.depth for t in l.atom.args) for l in c)


class _State:
    def __init__(self, select: bool = False) -> None:
        self.seen: Dict[Clause, int] = {}
        self.passive = _Passive()
        self.index = _Index(select)
        self.sub = SubsumptionIndex()
        self.dead: Set[Clause] = set()

    def clone(self) -> "_State":
        s = _State(self.index.select)
        s.seen = dict(self.seen)
        s.sub = self.sub.copy()
        s.dead = set(self.dead)
        s.passive = self.passive.copy()
        s.index.pos = {k: list(v) for k, v in self.index.pos.items()}
        s.index.neg = {k: list(v) for k, v in self.index.neg.items()}
        return s


class _Engine:
    def __init__(self, ctx: InstantiationContext, horn: bool, budget: Budget,
                 log: Optional[DerivationLog], check: bool, subsumption: bool = True):
        self.ctx = ctx
        self.horn = horn
        self.budget = budget
        self.log = log
        self.check = check
        self.subsumption = subsumption
        self.block_limit = ctx.r
        self.names = SplitNames()
        self.norm = _Normalizer(ctx, self.names, horn)
        self.types: Dict[str, int] = {}
        self.total = 0
        self.branches = 1

    def _id(self, st: _State, c: Clause, rule: str, prem: Tuple[int, ...]) -> int:
        if self.log is not None:
            return self.log.add(c, rule, prem)
        self.total += 1
        return self.total

    def add(self, st: _State, c: Clause, rule: str, prem: Tuple[int, ...]):
        """Normalise and store ``c``; returns ``"closed"``, a split, or ``None``."""
        forms, split = self.norm.run(c)
        for d, how in forms:
            k = d.canonical()
            if k in st.seen or (self.subsumption and st.sub.forward(k)):
                continue
            if self.check:
                tag = clause_type(k, self.ctx, self.names, self.horn, self.block_limit)
                if tag is None:
                    raise ClosureViolation(f"{k} (from {c}) has none of the permitted shapes")
                self.types[tag] = self.types.get(tag, 0) + 1
            st.seen[k] = self._id(st, k, how or rule, prem)
            st.passive.append(k)
            if k.is_empty():
                return "closed"
            if self.subsumption:
                for old in st.sub.backward(k):
                    st.dead.add(old)
                    st.sub.remove(old)
                st.sub.add(k)
        return split

    def _saturate(self, st: _State, pending):
        """``"open"`` at a fixpoint, ``"closed"`` on the empty clause, else a split request."""
        for k, (c, rule, prem) in enumerate(pending):
            r = self.add(st, c, rule, prem)
            if r == "closed":
                return "closed"
            if r is not None:
                # remaining inputs go into every branch
                return r, pending[k + 1:], prem
        while st.passive:
            self.budget.check(len(st.seen))
            g = st.passive.popleft()
            if g in st.dead:
                continue
            gid = st.seen[g]
            st.index.add(g)
            new = [(f, "factor", (gid,)) for f in factor_ordered(g)]
            for p, a, n, b in st.index.partners(g):
                if p in st.dead or n in st.dead:
                    continue
                r = resolve_pair(p, a, n, b)
                if r is not None:
                    new.append((r, "resolve", (st.seen[p], st.seen[n])))
            for c, rule, prem in new:
                r = self.add(st, c, rule, prem)
                if r == "closed":
                    return "closed"
                if r is not None:
                    return r, [], prem
        return "open"


def _run(S: Iterable[Clause], horn: bool, budget: Optional[Budget], trace: bool,
         check_types: bool) -> Result:
    S = prepare(S)
    if horn and not all(c.is_horn() for c in S):
        raise ClassError("the Horn procedure needs Horn clauses")
    ctx = build_context(S)
    rules = rule_clauses(replacement_rules(ctx))
    log = DerivationLog() if trace else None
    eng = _Engine(ctx, horn, budget or Budget(), log, check_types)
    # input clauses may carry more variables than the maximal arity
    eng.block_limit = max([ctx.r] + [len(c.vars) for c in S])
    start = [(c, "input", ()) for c in S] + [(c, "rule", ()) for c in rules]
    verdict = _run_engine(eng, start)
    stats = {"clauses": len(log) if log is not None else eng.total, "branches": eng.branches,
             "rules": len(rules) // 2}
    stats.update({f"type {k}": v for k, v in sorted(eng.types.items())})
    return Result(verdict, log, stats)


def _run_engine(eng: _Engine, start) -> str:
    # the Horn procedure selects a maximal negative literal
    stack = [(_State(eng.horn), start)]
    while stack:
        st, pending = stack.pop()
        outcome = eng._saturate(st, pending)
        if outcome == "open":
            return SAT
        if outcome == "closed":
            continue
        parts, rest, prem = outcome
        eng.branches += len(parts) - 1
        for p in reversed(parts):
            stack.append((st.clone(), [(p, "split", prem)] + list(rest)))
    return UNSAT


def decide_c(S: Iterable[Clause], budget: Optional[Budget] = None, trace: bool = False,
             check_types: bool = True) -> Result:
    """Satisfiability of a set of flat and one-variable clauses."""
    return _run(S, False, budget, trace, check_types)


def decide_c_horn(S: Iterable[Clause], budget: Optional[Budget] = None, trace: bool = False,
                  check_types: bool = True) -> Result:
    """Single-branch variant for Horn input; negative blocks are named rather than split."""
    return _run(S, True, budget, trace, check_types)
