import random

import pytest

from gen import random_formula, random_segment_set
from hnamc.core import UnzippedSegment, VarMismatchError, stutter_reduce
from hnamc.logic import (And, Atom, Exists, Forall, Not, OpenFormulaError, Or, evaluate, expand, free_trace_vars,
                         is_universal, observational_determinism, quantified_vars, rectify)

S = UnzippedSegment


def test_free_trace_vars():
    assert free_trace_vars(Exists("p", Atom("x", "p", "x", "p"))) == set()
    assert free_trace_vars(Atom("x", "p", "y", "q")) == {"p", "q"}
    assert free_trace_vars(Forall("p", Atom("x", "p", "y", "q"))) == {"q"}


def test_rectify_separates_reused_names():
    a = Atom("x", "p", "x", "p")
    f = And(Exists("p", a), Exists("p", Atom("y", "p", "y", "p")))
    r = rectify(f)
    assert quantified_vars(r) == ["p1", "p2"]
    assert r.right.body == Atom("y", "p2", "y", "p2")


def test_rectify_inner_binder_shadows():
    f = Forall("p", Forall("p", Atom("x", "p", "x", "p")))
    assert rectify(f) == Forall("p1", Forall("p2", Atom("x", "p2", "x", "p2")))


def test_rectify_keeps_rectified_formula():
    f = observational_determinism(["y", "z"])
    assert rectify(f) == f


def test_rectify_rejects_open_formula():
    with pytest.raises(OpenFormulaError):
        rectify(Forall("p", Atom("x", "p", "y", "q")))


def test_evaluate_examples():
    tau = S({"x": "01", "y": "01"})
    assert evaluate({tau}, Forall("p", Forall("q", Atom("x", "p", "y", "q"))))
    dark = {S({"x": "0", "y": "0", "z": "0"}), S({"x": "1", "y": "1", "z": "1"})}
    assert not evaluate(dark, observational_determinism(["z"]))
    trivial = Atom("x", "p", "x", "p")
    assert evaluate(set(), Exists("p", trivial)) is False
    assert evaluate(set(), Forall("p", trivial)) is True


def test_evaluate_errors():
    with pytest.raises(OpenFormulaError):
        evaluate({S({"x": "0"})}, Atom("x", "p", "x", "p"))
    with pytest.raises(VarMismatchError):
        evaluate({S({"x": "0"})}, Exists("p", Atom("w", "p", "w", "p")))
    with pytest.raises(VarMismatchError):
        evaluate({S({"x": "0"}), S({"y": "0"})}, Exists("p", Atom("x", "p", "x", "p")))


def test_forall_is_abbreviation():
    rng = random.Random(3)
    for _ in range(200):
        T = random_segment_set(rng)
        phi = random_formula(rng, ("x", "y"))
        assert evaluate(T, phi) == evaluate(T, expand(phi))


def test_polarity_monotonicity():
    rng = random.Random(4)
    checked = 0
    for _ in range(300):
        T = random_segment_set(rng, max_size=4)
        sub = set(list(T)[: len(T) // 2 + 1])
        phi = random_formula(rng, ("x", "y"))
        if is_universal(phi):
            checked += 1
            assert not evaluate(T, phi) or evaluate(sub, phi)
        if is_universal(Not(phi)):
            assert not evaluate(sub, phi) or evaluate(T, phi)
    assert checked > 30


def test_is_universal():
    a = Atom("x", "p", "x", "q")
    assert is_universal(Forall("p", Forall("q", a)))
    assert not is_universal(Exists("p", Exists("q", a)))
    assert is_universal(Not(Exists("p", Exists("q", Not(a)))))
    assert not is_universal(Forall("p", Not(Forall("q", a))))


def test_prop_reduction_invariance_small():
    rng = random.Random(5)
    for _ in range(100):
        T = random_segment_set(rng)
        phi = random_formula(rng, ("x", "y"))
        assert evaluate(T, phi) == evaluate({stutter_reduce(t) for t in T}, phi)


def test_str_round_trip_shapes():
    f = Forall("p", Forall("q", Or(Atom("y", "p", "y", "q"), Atom("y", "q", "y", "p"))))
    assert str(f) == "forall p. forall q. y(p) <~ y(q) | y(q) <~ y(p)"
    assert str(Not(And(Atom("x", "p", "x", "p"), Atom("x", "p", "x", "p")))) == "!(x(p) <~ x(p) & x(p) <~ x(p))"
