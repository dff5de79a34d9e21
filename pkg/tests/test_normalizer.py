from __future__ import annotations

import random
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blindcopy.classify import ClassError
from blindcopy.generators import GenConfig, random_instance
from blindcopy.normalizer import StateCapExceeded, accepts, is_normal, nonempty, normalize, run_states
from blindcopy.saturation.log import BudgetExceeded
from blindcopy.saturation.oracle import ground_terms
from blindcopy.syntax import parse_clause, parse_term, read_clause_file
from blindcopy.terms import Signature, variant

SAMPLES = Path(__file__).resolve().parent.parent / "samples"
C = parse_clause
T = parse_term

GOLDEN = [
    "{P}(a)",
    "{Q}(a)",
    "{P}(f(g(x1,a),g(a,x1),a)) | -{P}(x1)",
    "{P}(f(g(x1,a),g(a,x1),b)) | -{P}(x1)",
    "{R}(g(a,a))",
    "{P,Q}(a)",
]


def example():
    return normalize(read_clause_file(str(SAMPLES / "normalize_example.cls")).clauses)


def test_golden_set():
    n = example()
    assert len(n.clauses) == len(GOLDEN)
    for g in GOLDEN:
        assert any(variant(c, C(g)) for c in n.clauses), g


def test_example_queries():
    n = example()
    assert nonempty(n, {"P", "Q"})
    assert accepts(n, "R", T("g(a,a)"))
    assert not accepts(n, "P", T("b"))
    assert not accepts(n, {"Q"}, T("b"))
    assert accepts(n, {"P"}, T("f(g(a,a),g(a,a),b)"))


def test_unknown_state_and_non_ground():
    n = example()
    with pytest.raises(KeyError):
        nonempty(n, "Z")
    with pytest.raises(ValueError):
        accepts(n, "P", T("x1"))


def test_already_normal_set():
    S = [C("P(a)"), C("P(f(x1,x2)) | -P(x1) | -Q(x2)"), C("Q(b)")]
    n = normalize(S)
    assert {str(c) for c in n.clauses} == {"{P}(a)", "{Q}(b)", "{P}(f(x1,x2)) | -{P}(x1) | -{Q}(x2)"}


def test_single_fact():
    n = normalize([C("P(a)")])
    assert [str(c) for c in n.clauses] == ["{P}(a)"]
    assert accepts(n, "P", T("a")) and nonempty(n, "P")
    assert n.stats["states"] == 1


def test_emptiness_of_unheaded_state():
    n = normalize([C("P(a)"), C("Q(f(x1)) | -Q(x1)")])
    assert nonempty(n, "P") and not nonempty(n, "Q")


def test_rejects_non_horn():
    with pytest.raises(ClassError):
        normalize([C("P(a) | Q(a)")])


def test_state_cap():
    S = [C(f"P{i}(a)") for i in range(6)] + [C(f"P{i}(f(x1)) | -P{i}(x1)") for i in range(6)]
    with pytest.raises(StateCapExceeded):
        normalize(S, state_cap=4)
    assert issubclass(StateCapExceeded, BudgetExceeded)


def _normal(S):
    n = normalize(S)
    for c in n.clauses:
        assert is_normal(c)
    return n


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**9))
def test_output_normal_and_intersection_semantics(seed):
    rng = random.Random(seed)
    S = random_instance(rng, GenConfig(horn=True, max_clauses=5), "mixed")
    n = _normal(S)
    terms = ground_terms(Signature.of_clauses(S), 2)
    st_ = run_states(n, terms)
    preds = sorted(n.predicates)
    for t in terms:
        for name, members in n.states.items():
            if len(members) < 2:
                continue
            inter = all(f"{{{p}}}" in st_[t] for p in members)
            assert (name in st_[t]) == inter
        for p in preds:
            assert (f"{{{p}}}" in st_[t]) == accepts(n, p, t)
