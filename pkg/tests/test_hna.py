import pytest

from hnamc.core import EPS, UnknownActionError, Valuation
from hnamc.hna import (Hna, HnaError, cut, errors, matching_traces, oracle_accepts, project_actions, run,
                       slice_trace_set, validate)
from hnamc.logic import Atom, Exists, observational_determinism
from hnamc.parsers import parse_formula

OD = observational_determinism(["y"])
TOP = parse_formula("forall p. x(p) <~ x(p)")


def V(x, y):
    return Valuation({"x": x, "y": y})


def two_node():
    return Hna(("n0", "n1"), "n0", {"n0": TOP, "n1": OD},
               {("n0", "a"): "n1", ("n0", "b"): "n0", ("n1", "a"): "n1", ("n1", "b"): "n0"}, ("a", "b"))


RHO1 = ((V("0", "0"), EPS), (V("0", "1"), "a"), (V("1", "1"), "a"), (V("1", "1"), EPS))
RHO2 = ((V("1", "0"), "a"), (V("1", "0"), "a"), (V("0", "0"), EPS))


def test_project_and_cut():
    assert project_actions(RHO1) == ("a", "a")
    assert cut(RHO1, 1) == [(V("0", "0"), V("0", "1"))]
    assert cut(RHO1, 2) == [(V("0", "0"), V("0", "1")), (V("1", "1"),)]
    # the trailing eps step is never part of a slice
    assert cut(RHO1, 3) == cut(RHO1, 2)


def test_matching_and_slicing():
    assert matching_traces([RHO1, RHO2], ("a", "a")) == [RHO1, RHO2]
    assert matching_traces([RHO1, RHO2], ("b",)) == []
    assert slice_trace_set([RHO1, RHO2], ("b",)) is None
    s = slice_trace_set([RHO1, RHO2], ("a", "a"))
    assert s[1] == {(V("1", "1"),), (V("1", "0"),)}


def test_oracle_acceptance_finds_offending_slice():
    verdict = oracle_accepts([RHO1, RHO2], two_node(), 2)
    # second slices carry y = 1 and y = 0: not prefix related, violating the label of n1
    assert not verdict
    assert (verdict.p, verdict.slice_index, verdict.node) == (("a", "a"), 1, "n1")
    assert verdict.formula == OD


def test_oracle_acceptance_single_trace_holds():
    assert oracle_accepts([RHO1], two_node(), 3).accepted


def test_run_and_step():
    H = two_node()
    assert run(H, ["a", "b", "a"]) == ["n0", "n1", "n0", "n1"]
    with pytest.raises(UnknownActionError):
        H.step("n0", "c")


def test_validate_reports_problems():
    H = Hna(("n0", "n1", "n2"), "n0", {"n0": TOP, "n1": Exists("p", Atom("x", "q", "x", "p"))},
            {("n0", "a"): "n0", ("n0", "b"): "n1", ("n1", "a"): "n9"}, ("a", "b"))
    kinds = sorted((i.kind, i.node) for i in validate(H))
    assert ("closedness", "n1") in kinds
    assert ("label", "n2") in kinds
    assert ("totality", "n1") in kinds
    assert ("unknown", "n1") in kinds
    assert ("reachability", "n2") in kinds
    assert all(i.severity == "error" for i in errors(validate(H)))


def test_validate_checks_program_variables():
    H = Hna(("n",), "n", {"n": parse_formula("exists p. w(p) <~ w(p)")}, {("n", "a"): "n"}, ("a",))
    assert [i.kind for i in validate(H, ["x"])] == ["label"]
    assert validate(H) == []


def test_constructor_errors():
    with pytest.raises(HnaError):
        Hna(("n", "n"), "n", {}, {}, ())
    with pytest.raises(HnaError):
        Hna(("n",), "m", {}, {}, ())
