from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blindcopy.generators import random_onevar_term
from blindcopy.onevar import build_context, compose, decompose, is_reduced, unify_one_var, unify_same_var
from blindcopy.syntax import parse_clause, parse_term
from blindcopy.terms import Signature, canonical_term, subst_term, var

FUNCS = (("f", 2), ("g", 1), ("h", 1), ("a", 0), ("b", 0))


def T(s):
    return parse_term(s)


@pytest.mark.parametrize("t,expected", [
    ("f(g(h(x1)),x1)", True),
    ("g(h(x1))", False),
    ("x1", True),
    ("f(x1,h(x1))", True),
    ("g(x1)", True),
])
def test_is_reduced(t, expected):
    assert is_reduced(T(t)) is expected


def test_is_reduced_rejects_bad_input():
    with pytest.raises(ValueError):
        is_reduced(T("a"))
    with pytest.raises(ValueError):
        is_reduced(T("f(x1,x2)"))


@pytest.mark.parametrize("t,parts", [
    ("f(g(x1),h(g(x1)))", ["f(x1,h(x1))", "g(x1)"]),
    ("x1", []),
    ("f(g(h(x1)),x1)", ["f(g(h(x1)),x1)"]),
    ("g(h(x1))", ["g(x1)", "h(x1)"]),
])
def test_decompose_examples(t, parts):
    assert [str(p) for p in decompose(T(t))] == parts


@settings(max_examples=500, deadline=None)
@given(st.integers(0, 10**9), st.integers(1, 6))
def test_decompose_round_trip_and_uniqueness(seed, depth):
    rng = random.Random(seed)
    t = random_onevar_term(rng, FUNCS, depth)
    parts = decompose(t)
    assert compose(parts, var(1)) is t
    for p in parts:
        assert not p.ground and not p.is_trivial() and is_reduced(p)
    # recomposing any split point gives the same flat part list
    for k in range(1, len(parts)):
        outer, inner = compose(parts[:k], var(1)), compose(parts[k:], var(1))
        assert decompose(outer) + decompose(inner) == parts


def test_unify_one_var_examples():
    r = unify_one_var(T("k(x1,g(x1),a)"), T("k(h(x2),g(h(a)),x2)"))
    assert r.tag == "BothGround" and r.u is T("h(a)") and r.v is T("a")
    r = unify_one_var(T("f(x1,a)"), T("f(b,x2)"))
    assert r.tag == "BothGround" and r.u is T("b") and r.v is T("a")
    assert unify_one_var(T("f(x1,g(x1))"), T("f(x2,g(x2))")).tag == "Identical"
    assert unify_one_var(T("f(x1,a)"), T("g(x2)")).tag == "Fail"


def test_unify_one_var_non_reduced_shapes():
    assert unify_one_var(T("g(h(x1))"), T("g(x2)")).tag == "YtoU"
    assert unify_one_var(T("g(x1)"), T("g(h(x2))")).tag == "XtoU"


def test_unify_same_var_examples():
    assert unify_same_var(T("f(x1,a)"), T("f(b,x1)")) is None
    assert unify_same_var(T("f(x1,x1)"), T("f(x1,x1)")) == "Identical"
    assert unify_same_var(T("f(x1,a)"), T("f(a,x1)")) == {var(1): T("a")}


def test_build_context_example():
    S = [parse_clause("P(f(g(x1),a)) | -P(x1)")]
    ctx = build_context(S)
    x = ctx.x
    c = lambda s: canonical_term(T(s), x.index)
    assert ctx.Ng == {x, c("f(g(x1),a)")}
    assert T("a") in ctx.G
    # Ngr holds the reduced parts f(x,a) and g(x), never the composite
    assert {x, c("f(x1,a)"), c("g(x1)")} <= ctx.Ngr
    assert all(is_reduced(t) for t in ctx.Ngr)


def test_build_context_ground_only():
    ctx = build_context([parse_clause("P(a)"), parse_clause("-Q(f(a,a))")])
    assert ctx.Ng == {ctx.x} and ctx.Ngs == {ctx.x}


def test_u_enumeration():
    sig = Signature()
    sig.functions["f"] = 2
    ctx = build_context([parse_clause("P(f(x1,x2))")], sig)
    assert ctx.r == 2
    assert sorted(str(u) for u in ctx.U()) == ["f(x1,x1)", "f(x1,x2)", "f(x2,x1)", "f(x2,x2)"]
