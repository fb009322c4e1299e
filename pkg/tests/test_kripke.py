import random
import warnings

import pytest

from gen import BIN, random_open_kripke
from hnamc import sfa
from hnamc.core import EPS, UnknownActionError, UnzippedSegment, VarMismatchError
from hnamc.kripke import (ActionLabeling, EpsilonCycleWarning, Kripke, KripkeError, OpenKripke,
                          PointedLabeledKripke, block_automaton, generated_segments, paths, to_sfa)
from hnamc.oracle import product_segments

S = UnzippedSegment


def diamond():
    val = {"a": {"x": "0", "y": "0"}, "b": {"x": "1", "y": "0"}, "c": {"x": "0", "y": "1"}, "d": {"x": "1", "y": "1"}}
    k = Kripke("abcd", ("x", "y"), BIN, {("a", "b"), ("a", "c"), ("b", "d"), ("c", "d")}, val)
    return OpenKripke(k, ["a"], ["d"])


def test_paths_and_segments():
    OK = diamond()
    assert paths(OK, 3) == {("a", "b", "d"), ("a", "c", "d")}
    assert paths(OK, 2) == set()
    with pytest.raises(ValueError):
        paths(OK, 0)


def test_joint_and_product_segments_of_diamond():
    OK = diamond()
    joint = generated_segments(OK, 3, "joint")
    # a-b-d: x 0,1,1  y 0,0,1     a-c-d: x 0,0,1  y 0,1,1
    assert joint == {S({"x": "01", "y": "01"})}
    assert generated_segments(OK, 3, "product") == joint


def test_product_mixes_strings_of_different_paths():
    val = {"s": {"x": "0", "y": "0"}, "u": {"x": "1", "y": "0"}, "v": {"x": "0", "y": "1"}}
    k = Kripke(("s", "u", "v"), ("x", "y"), BIN, {("s", "u"), ("s", "v")}, val)
    OK = OpenKripke(k, ["s"], ["u", "v"])
    assert generated_segments(OK, 2, "joint") == {S({"x": "01", "y": "0"}), S({"x": "0", "y": "01"})}
    assert generated_segments(OK, 2, "product") == {S({"x": x, "y": y}) for x in ("0", "01") for y in ("0", "01")}
    assert sfa.enumerate_language(to_sfa(OK), 3) == generated_segments(OK, 2, "product")
    with pytest.raises(ValueError):
        generated_segments(OK, 2, "mixed")


def test_block_automaton_collapses_repeats():
    OK = diamond()
    B = block_automaton(OK, "x")
    assert sfa.is_valid(B)
    assert sfa.enumerate_language(B, 4) == {S({"x": "01"})}


def test_single_world_structure():
    k = Kripke(("w",), ("x",), BIN, set(), {"w": {"x": "1"}})
    OK = OpenKripke(k, ["w"], ["w"])
    assert sfa.enumerate_language(to_sfa(OK), 3) == {S({"x": "1"})}


def test_structure_errors():
    with pytest.raises(KripkeError):
        Kripke(("a",), ("x",), BIN, {("a", "b")}, {"a": {"x": "0"}})
    with pytest.raises(VarMismatchError):
        Kripke(("a",), ("x", "y"), BIN, set(), {"a": {"x": "0"}})
    with pytest.raises(KripkeError):
        Kripke(("a",), ("x",), BIN, set(), {"a": {"x": "2"}})
    k = Kripke(("a",), ("x",), BIN, set(), {"a": {"x": "0"}})
    with pytest.raises(KripkeError):
        OpenKripke(k, [], ["a"])
    with pytest.raises(KripkeError):
        OpenKripke(k, ["a"], ["z"])


def test_labeling_errors():
    with pytest.raises(KripkeError):
        ActionLabeling((EPS,), {})
    with pytest.raises(UnknownActionError):
        ActionLabeling(("a",), {("u", "v"): {"b"}})
    k = Kripke(("u", "v"), ("x",), BIN, {("u", "v")}, {"u": {"x": "0"}, "v": {"x": "1"}})
    with pytest.raises(KripkeError):
        PointedLabeledKripke(k, ActionLabeling(("a",), {}), "u")
    with pytest.raises(KripkeError):
        PointedLabeledKripke(k, ActionLabeling(("a",), {("u", "v"): {"a"}}), "q")


def test_epsilon_cycle_warning():
    k = Kripke(("u", "v"), ("x",), BIN, {("u", "v"), ("v", "u")}, {"u": {"x": "0"}, "v": {"x": "1"}})
    K = PointedLabeledKripke(k, ActionLabeling(("a",), {("u", "v"): {EPS}, ("v", "u"): {EPS}}), "u")
    with pytest.warns(EpsilonCycleWarning):
        assert K.check_progress() == ["u", "v", "u"]
    K2 = PointedLabeledKripke(k, ActionLabeling(("a",), {("u", "v"): {EPS}, ("v", "u"): {"a"}}), "u")
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert K2.check_progress() is None


@pytest.mark.parametrize("seed", range(30))
def test_to_sfa_language_on_acyclic_structures(seed):
    OK = random_open_kripke(random.Random(seed))
    A = to_sfa(OK)
    assert sfa.is_valid(A)
    n = len(OK.k.worlds)
    assert sfa.enumerate_language(A, n) == generated_segments(OK, n, "product")


@pytest.mark.parametrize("seed", range(10))
def test_to_sfa_on_cyclic_structures(seed):
    OK = random_open_kripke(random.Random(seed), acyclic=False, density=0.4)
    A = to_sfa(OK)
    assert sfa.is_valid(A)
    assert sfa.enumerate_language(A, 4) == product_segments(OK, 4)
