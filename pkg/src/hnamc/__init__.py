"""Model checking hypernode automata over action-labeled Kripke structures."""

from importlib import resources

from .core import (EPS, TERM, Domain, HnamcError, UnknownActionError, UnzippedSegment, Valuation,
                   VarMismatchError, parse_segment, sr_prefix, stutter_reduce, stutter_reduce_string, unzip)
from .filtration import check_formula_against_open_kripke, check_formula_against_sfa
from .hna import Hna, oracle_accepts
from .kripke import ActionLabeling, Kripke, OpenKripke, PointedLabeledKripke, to_sfa
from .logic import evaluate, observational_determinism
from .parsers import ParseError, parse_formula, parse_hna, parse_kripke, parse_sfa, serialize_sfa
from .sfa import Sfa
from .slicing import model_check

__version__ = "0.1.0"

__all__ = [
    "EPS", "TERM", "Domain", "HnamcError", "UnknownActionError", "UnzippedSegment", "Valuation",
    "VarMismatchError", "parse_segment", "sr_prefix", "stutter_reduce", "stutter_reduce_string", "unzip",
    "check_formula_against_open_kripke", "check_formula_against_sfa", "Hna", "oracle_accepts",
    "ActionLabeling", "Kripke", "OpenKripke", "PointedLabeledKripke", "to_sfa", "evaluate",
    "observational_determinism", "ParseError", "parse_formula", "parse_hna", "parse_kripke", "parse_sfa",
    "serialize_sfa", "Sfa", "model_check", "fixture_path",
]


def fixture_path(name: str) -> str:
    """Filesystem path of a bundled example model."""
    return str(resources.files(__package__) / "fixtures" / name)
