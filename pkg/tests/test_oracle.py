import random

import pytest

from gen import random_open_kripke
from hnamc import oracle
from hnamc.core import EPS, UnzippedSegment, Valuation
from hnamc.kripke import ActionLabeling, Kripke, OpenKripke, PointedLabeledKripke, generated_segments
from hnamc.logic import And, Atom, Exists, Forall, observational_determinism
from hnamc.hna import Hna
from gen import BIN

S = UnzippedSegment


def chain():
    val = {"u": {"x": "0"}, "v": {"x": "1"}, "w": {"x": "1"}}
    k = Kripke(("u", "v", "w"), ("x",), BIN, {("u", "v"), ("v", "w")}, val)
    return PointedLabeledKripke(k, ActionLabeling(("a",), {("u", "v"): {"a", EPS}, ("v", "w"): {"a"}}), "u")


def test_enumerate_labeled_traces():
    traces = oracle.enumerate_labeled_traces(chain(), 3)
    V0, V1 = Valuation({"x": "0"}), Valuation({"x": "1"})
    assert traces == {
        ((V0, EPS),),
        ((V0, "a"), (V1, EPS)), ((V0, EPS), (V1, EPS)),
        ((V0, "a"), (V1, "a"), (V1, EPS)), ((V0, EPS), (V1, "a"), (V1, EPS)),
    }
    with pytest.raises(ValueError):
        oracle.enumerate_labeled_traces(chain(), 0)


def test_bf_check_hna_exactness_flag():
    K = chain()
    H = Hna(("n",), "n", {"n": observational_determinism(["x"])}, {("n", "a"): "n"}, ("a",))
    res = oracle.bf_check_hna(K, H, 3, 2)
    assert res.holds and res.exact
    assert not oracle.bf_check_hna(K, H, 2, 2).exact


def test_bf_check_hna_finds_slices():
    K = chain()
    # first slices after a: "0" and "01"; second slice only in the second trace
    H = Hna(("n",), "n", {"n": Forall("p", Forall("q", Atom("x", "p", "x", "q")))}, {("n", "a"): "n"}, ("a",))
    res = oracle.bf_check_hna(K, H, 3, 2)
    assert not res.holds
    assert (res.detail.p, res.detail.slice_index) == (("a",), 0)


def test_bf_check_formula_modes():
    val = {"s": {"x": "0", "y": "0"}, "u": {"x": "1", "y": "0"}, "v": {"x": "0", "y": "1"}}
    k = Kripke(("s", "u", "v"), ("x", "y"), BIN, {("s", "u"), ("s", "v")}, val)
    OK = OpenKripke(k, ["s"], ["u", "v"])
    # the paths give (x, y) = (01, 0) and (0, 01); only mixing them yields equal strings
    phi = Exists("p", And(Atom("x", "p", "y", "p"), Atom("y", "p", "x", "p")))
    assert oracle.bf_check_formula(OK, phi, 3, "product").holds
    assert not oracle.bf_check_formula(OK, phi, 3, "joint").holds
    assert oracle.bf_check_formula(OK, phi, 3).exact


def test_cyclic_results_are_bounded():
    k = Kripke(("u", "v"), ("x",), BIN, {("u", "v"), ("v", "u")}, {"u": {"x": "0"}, "v": {"x": "1"}})
    OK = OpenKripke(k, ["u"], ["u"])
    res = oracle.bf_check_formula(OK, Exists("p", Atom("x", "p", "x", "p")), 4)
    assert res.holds and not res.exact
    assert oracle.reduced_strings(OK, "x", 5) == {("0",), ("0", "1", "0"), ("0", "1", "0", "1", "0")}


@pytest.mark.parametrize("seed", range(20))
def test_product_segments_agree_with_path_enumeration(seed):
    OK = random_open_kripke(random.Random(seed))
    n = len(OK.k.worlds)
    assert oracle.product_segments(OK, n) == generated_segments(OK, n, "product")
