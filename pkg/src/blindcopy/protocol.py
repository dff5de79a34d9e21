"""Protocols whose rules copy at most one uninspected message part, their Horn model and secrecy.

File format, one statement per ``.``::

    agent a.  agent i public.          # public agent = dishonest
    const k.  public c.
    keypair ka / kainv of a.           # public key / private key [of owner]
    init Init0(a, n1ab).
    rule Resp0(b, n2ab) : recv(enc(pair(a,x1), kb))
      -> Resp1(b, x1, n2ab) : send(enc(pair(x1, n2ab), ka)).
    advfun h/1.
    secret n2ab.

``none`` stands for the empty message in ``recv``/``send``.  Undeclared
constants (nonces) are private.  Agent names and the public half of every
key pair are known to the adversary; so is the private half of a key pair
owned by a dishonest agent.  ``enc(M, K)`` with ``K`` the public half of a
key pair is asymmetric encryption and can be opened only with the private
half.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple

from .syntax import ParseError, Token, _Parser
from .terms import App, Atom, Clause, Literal, Signature, Term, Var, app, var
from .saturation.log import UNSAT, Budget, Result

ENC, PAIR, AENC = "enc", "pair", "aenc"
NONE = "none"
REACH, KNOWN = "reach", "known"
SECRET, LEAK = "Secret", "Leak"
_BUILTIN = {ENC: 2, PAIR: 2}
_KEYWORDS = {"agent", "const", "public", "keypair", "init", "rule", "advfun", "secret"}


class ProtocolError(ValueError):
    pass


@dataclass(frozen=True)
class ProtocolRule:
    source: App
    recv: Optional[Term]
    target: App
    send: Optional[Term]
    line: int = 0

    @property
    def vars(self) -> frozenset:
        out = self.source.vars | self.target.vars
        for m in (self.recv, self.send):
            if m is not None:
                out |= m.vars
        return out

    def __str__(self) -> str:
        r = NONE if self.recv is None else str(self.recv)
        s = NONE if self.send is None else str(self.send)
        return f"{self.source} : recv({r}) -> {self.target} : send({s})"


@dataclass
class ProtocolSpec:
    agents: Dict[str, bool] = field(default_factory=dict)  # name -> dishonest
    private: Set[str] = field(default_factory=set)
    public: Set[str] = field(default_factory=set)
    keypairs: List[Tuple[str, str, Optional[str]]] = field(default_factory=list)
    inits: List[App] = field(default_factory=list)
    rules: List[ProtocolRule] = field(default_factory=list)
    advfuns: Dict[str, int] = field(default_factory=dict)
    secrets: List[Term] = field(default_factory=list)

    @property
    def control_points(self) -> Dict[str, int]:
        out: Dict[str, int] = {}
        for s in self.inits:
            out[s.sym] = len(s.args)
        for r in self.rules:
            out[r.source.sym] = len(r.source.args)
            out[r.target.sym] = len(r.target.args)
        return out

    def public_keys(self) -> Dict[str, str]:
        return {pub: priv for pub, priv, _ in self.keypairs}

    def known_constants(self) -> List[str]:
        out = set(self.public) | set(self.agents)
        for pub, priv, owner in self.keypairs:
            out.add(pub)
            if owner is not None and self.agents.get(owner):
                out.add(priv)
        return sorted(out)

    def validate(self) -> None:
        cps = {}
        for s in self.inits:
            if not s.ground:
                raise ProtocolError(f"initialization state {s} contains a variable")
        for s in list(self.inits) + [t for r in self.rules for t in (r.source, r.target)]:
            n = cps.setdefault(s.sym, len(s.args))
            if n != len(s.args):
                raise ProtocolError(f"control point {s.sym} used with arities {n} and {len(s.args)}")
        for r in self.rules:
            if len(r.vars) > 1:
                names = ", ".join(sorted(str(v) for v in r.vars))
                raise ProtocolError(f"line {r.line}: rule has more than one variable ({names})")
        succ: Dict[str, Set[str]] = {}
        for r in self.rules:
            if r.source.sym == r.target.sym:
                raise ProtocolError(f"line {r.line}: control point {r.source.sym} follows itself")
            succ.setdefault(r.source.sym, set()).add(r.target.sym)
        _check_acyclic(succ)
        data = self._data_symbols()
        for f in data:
            if f in cps:
                raise ProtocolError(f"{f} is used both as a control point and inside messages")

    def _data_symbols(self) -> Dict[str, int]:
        out: Dict[str, int] = {}
        msgs: List[Term] = list(self.secrets)
        for s in self.inits:
            msgs.extend(s.args)
        for r in self.rules:
            msgs.extend(r.source.args)
            msgs.extend(r.target.args)
            msgs.extend(m for m in (r.recv, r.send) if m is not None)
        for m in msgs:
            _collect(m, out)
        return out


def _collect(t: Term, out: Dict[str, int]) -> None:
    if isinstance(t, Var):
        return
    out[t.sym] = len(t.args)
    for a in t.args:
        _collect(a, out)


def _check_acyclic(succ: Dict[str, Set[str]]) -> None:
    state: Dict[str, int] = {}

    def visit(n: str, path: List[str]) -> None:
        st = state.get(n, 0)
        if st == 1:
            cyc = path[path.index(n):] + [n]
            raise ProtocolError("control point order is cyclic: " + " < ".join(cyc))
        if st == 2:
            return
        state[n] = 1
        for m in sorted(succ.get(n, ())):
            visit(m, path + [n])
        state[n] = 2

    for n in sorted(succ):
        visit(n, [])


class _ProtocolParser(_Parser):
    def __init__(self, text: str):
        super().__init__(text, Signature(dict(_BUILTIN)))
        self.spec = ProtocolSpec()

    def name(self) -> Token:
        t = self.tok
        if t.kind != "ident" or "@" in t.text:
            raise self.error("expected a name")
        self.i += 1
        return t

    def message(self) -> Optional[Term]:
        if self.tok.text == NONE and self.toks[self.i + 1].text != "(":
            self.i += 1
            return None
        return self.term()

    def state(self) -> App:
        t = self.tok
        s = self.term()
        if not isinstance(s, App):
            raise self.error("expected a control point", t)
        return s

    def file(self) -> ProtocolSpec:
        sp = self.spec
        while self.tok.kind != "eof":
            kw = self.name()
            if kw.text not in _KEYWORDS:
                raise self.error(f"unknown statement {kw.text!r}", kw)
            if kw.text == "agent":
                n = self.name().text
                sp.agents[n] = self.accept("public")
            elif kw.text in ("const", "public"):
                names = [self.name().text]
                while self.accept(","):
                    names.append(self.name().text)
                (sp.private if kw.text == "const" else sp.public).update(names)
            elif kw.text == "keypair":
                pub = self.name().text
                self.expect("/")
                priv = self.name().text
                owner = self.name().text if self.accept("of") else None
                sp.keypairs.append((pub, priv, owner))
            elif kw.text == "init":
                sp.inits.append(self.state())
            elif kw.text == "rule":
                src = self.state()
                self.expect(":")
                self._word("recv")
                self.expect("(")
                recv = self.message()
                self.expect(")")
                self.expect("->")
                dst = self.state()
                self.expect(":")
                self._word("send")
                self.expect("(")
                send = self.message()
                self.expect(")")
                sp.rules.append(ProtocolRule(src, recv, dst, send, kw.line))
            elif kw.text == "advfun":
                f = self.name().text
                self.expect("/")
                if self.tok.kind != "num":
                    raise self.error("expected an arity")
                sp.advfuns[f] = int(self.tok.text)
                self.i += 1
            elif kw.text == "secret":
                sp.secrets.append(self.term())
            self.expect(".")
        for f, n in sp.advfuns.items():
            m = self.sig.functions.setdefault(f, n)
            if m != n:
                raise ProtocolError(f"adversary function {f}/{n} is used with arity {m}")
        return sp

    def _word(self, w: str) -> None:
        if self.tok.text != w:
            raise self.error(f"expected {w!r}")
        self.i += 1


def parse_protocol(text: str) -> ProtocolSpec:
    spec = _ProtocolParser(text).file()
    spec.validate()
    return spec


def read_protocol(path: str) -> ProtocolSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_protocol(fh.read())


# --------------------------------------------------------------------------
# Horn clause model


def _asym(t: Term, keys: Dict[str, str]) -> Term:
    """Rewrite ``enc(M, K)`` to ``aenc(M, K)`` for declared public keys ``K``."""
    if isinstance(t, Var) or not t.args:
        return t
    args = tuple(_asym(a, keys) for a in t.args)
    if t.sym == ENC and isinstance(args[1], App) and not args[1].args and args[1].sym in keys:
        return app(AENC, *args)
    return app(t.sym, *args)


def _msg(t: Optional[Term], keys: Dict[str, str]) -> Term:
    return app(NONE) if t is None else _asym(t, keys)


def _known(t: Term, positive: bool = True) -> Literal:
    return Literal(positive, Atom(KNOWN, (t,)))


def _reach(t: Term, positive: bool = True) -> Literal:
    return Literal(positive, Atom(REACH, (t,)))


def adversary_clauses(spec: ProtocolSpec) -> List[Clause]:
    x1, x2 = var(1), var(2)
    out = [
        Clause([_known(app(ENC, x1, x2)), _known(x1, False), _known(x2, False)]),
        Clause([_known(x1), _known(app(ENC, x1, x2), False), _known(x2, False)]),
        Clause([_known(app(PAIR, x1, x2)), _known(x1, False), _known(x2, False)]),
        Clause([_known(x1), _known(app(PAIR, x1, x2), False)]),
        Clause([_known(x2), _known(app(PAIR, x1, x2), False)]),
    ]
    if spec.keypairs:
        out.append(Clause([_known(app(AENC, x1, x2)), _known(x1, False), _known(x2, False)]))
    for pub, priv, _ in spec.keypairs:
        out.append(Clause([_known(x1), _known(app(AENC, x1, app(pub)), False), _known(app(priv), False)]))
    for f, n in sorted(spec.advfuns.items()):
        xs = [var(i) for i in range(1, n + 1)]
        out.append(Clause([_known(app(f, *xs))] + [_known(x, False) for x in xs]))
    for c in [NONE] + spec.known_constants():
        out.append(Clause([_known(app(c))]))
    return out


def protocol_clauses(spec: ProtocolSpec) -> List[Clause]:
    """Initial states, rules and adversary theory, without a secrecy goal."""
    keys = spec.public_keys()
    out = [Clause([_reach(_asym(s, keys))]) for s in spec.inits]
    for r in spec.rules:
        pre = [_reach(_asym(r.source, keys), False), _known(_msg(r.recv, keys), False)]
        out.append(Clause([_known(_msg(r.send, keys))] + pre))
        out.append(Clause([_reach(_asym(r.target, keys))] + pre))
    out.extend(adversary_clauses(spec))
    return [c for c in out if not c.is_tautology()]


def compile_to_horn(spec: ProtocolSpec, secret: Term) -> List[Clause]:
    if not secret.ground:
        raise ProtocolError(f"secret {secret} is not ground")
    return protocol_clauses(spec) + [Clause([_known(_asym(secret, spec.public_keys()), False)])]


@dataclass
class SecrecyResult:
    verdict: str
    secret: Term
    result: Optional[Result] = None

    @property
    def leaked(self) -> bool:
        return self.verdict == LEAK


def check_secrecy(spec: ProtocolSpec, secret: Term, budget: Optional[Budget] = None,
                  trace: bool = False, procedure: str = "c-horn") -> SecrecyResult:
    """``Leak`` when the adversary can learn ``secret``, else ``Secret``.

    ``procedure`` is ``c-horn`` (the saturation procedure) or ``normalize``
    (membership in the normalized automaton for ``known``).
    """
    if procedure == "normalize":
        from .normalizer import accepts, normalize

        n = normalize(protocol_clauses(spec), budget=budget)
        hit = accepts(n, frozenset([KNOWN]), _asym(secret, spec.public_keys()))
        return SecrecyResult(LEAK if hit else SECRET, secret)
    if procedure != "c-horn":
        raise ValueError(f"unknown procedure {procedure!r}")
    from .saturation.combined import decide_c_horn

    res = decide_c_horn(compile_to_horn(spec, secret), budget=budget, trace=trace)
    return SecrecyResult(LEAK if res.verdict == UNSAT else SECRET, secret, res)


__all__ = [
    "ProtocolError", "ProtocolRule", "ProtocolSpec", "ParseError", "SecrecyResult",
    "parse_protocol", "read_protocol", "compile_to_horn", "protocol_clauses",
    "adversary_clauses", "check_secrecy", "SECRET", "LEAK",
]
