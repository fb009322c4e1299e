"""``hnamc`` command-line front end.

Exit codes: 0 positive verdict, 1 negative verdict, 2 usage or input error,
3 exploration cap reached without a verdict.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings

from . import filtration, hna, oracle, parsers, sfa, slicing
from .core import HnamcError, parse_segment
from .kripke import EpsilonCycleWarning, OpenKripke
from .logic import rectify

EXIT_OK, EXIT_NEG, EXIT_ERR, EXIT_UNKNOWN = 0, 1, 2, 3


class CliError(Exception):
    pass


def _color(stream) -> bool:
    mode = os.environ.get("HNAMC_COLOR", "auto")
    return mode != "never" and hasattr(stream, "isatty") and stream.isatty()


def diag(msg: str, level="error"):
    prefix = f"{level}:"
    if _color(sys.stderr):
        code = "31" if level == "error" else "33"
        prefix = f"\033[{code}m{prefix}\033[0m"
    print(f"{prefix} {msg}", file=sys.stderr)


def _read(path):
    try:
        return parsers.read_text(path)
    except OSError as e:
        raise CliError(f"cannot read {path}: {e.strerror}") from None


def _load_kripke(path):
    return parsers.parse_kripke(_read(path), path)


def _load_hna(path):
    return parsers.parse_hna(_read(path), path)


def _load_sfa(path):
    return parsers.parse_sfa(_read(path), path)


def _emit_json(obj):
    print(json.dumps(obj, indent=2, sort_keys=True))


def kripke_json(OK: OpenKripke | None):
    if OK is None:
        return None
    k = OK.k
    return {
        "worlds": [{"name": w, "valuation": k.valuation[w].as_dict()} for w in k.worlds],
        "edges": [[w, r] for w in k.worlds for r in k.successors(w)],
        "entries": [w for w in k.worlds if w in OK.entries],
        "exits": [w for w in k.worlds if w in OK.exits],
    }


def _assignment_json(witness):
    if witness is None:
        return None
    return {p: {x: "".join(s) if all(len(t) == 1 for t in s) else ",".join(s) for x, s in seg.items}
            for p, seg in witness.items()}


def _warn_progress(K):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        K.check_progress()
    for w in caught:
        if issubclass(w.category, EpsilonCycleWarning):
            diag(str(w.message), "warning")


def _checked_hna(args, kf):
    H = _load_hna(args.hna)
    issues = hna.validate(H, kf.kripke.vars)
    for i in issues:
        if i.severity == "warning":
            diag(str(i), "warning")
    errs = hna.errors(issues)
    if errs:
        raise CliError("; ".join(str(i) for i in errs))
    return H


# --- commands -----------------------------------------------------------------

def cmd_check(args) -> int:
    kf = _load_kripke(args.kripke)
    K = kf.pointed()
    H = _checked_hna(args, kf)
    _warn_progress(K)
    v = slicing.model_check(H, K, max_depth=args.max_depth)
    if args.json:
        _emit_json({
            "command": "check",
            "verdict": v.status,
            "witness": list(v.witness) if v.witness else None,
            "slice_index": v.slice_index,
            "node": v.node,
            "formula": str(v.formula) if v.formula is not None else None,
            "substructure": kripke_json(v.substructure),
            "explored": v.explored,
        })
    elif v.status == "violated":
        print("VIOLATED")
        print(f"witness: {' '.join(v.witness)}")
        print(f"slice: {v.slice_index}")
        print(f"node: {v.node}")
        print(f"formula: {v.formula}")
        print("substructure:")
        for line in parsers.format_open_kripke(v.substructure).splitlines():
            print(f"  {line}")
    elif v.status == "holds":
        print("HOLDS")
    else:
        print(f"UNKNOWN (stopped at depth {args.max_depth})")
    return {"holds": EXIT_OK, "violated": EXIT_NEG}.get(v.status, EXIT_UNKNOWN)


def _formula_arg(args):
    if args.formula is not None:
        return parsers.parse_formula(args.formula)
    return parsers.parse_formula(_read(args.formula_file))


def cmd_check_formula(args) -> int:
    OK = _load_kripke(args.kripke).open()
    phi = rectify(_formula_arg(args))
    verdict = filtration.check_formula_against_open_kripke(OK, phi)
    if args.json:
        _emit_json({
            "command": "check-formula",
            "verdict": "holds" if verdict.holds else "fails",
            "formula": str(phi),
            "witness": _assignment_json(verdict.witness),
        })
    else:
        print("HOLDS" if verdict.holds else "FAILS")
        print(f"formula: {phi}")
        if verdict.witness:
            label = "example" if verdict.holds else "counterexample"
            for p, seg in verdict.witness.items():
                print(f"{label} {p}: {seg.format()}")
    return EXIT_OK if verdict.holds else EXIT_NEG


def _print_sfa(A):
    sys.stdout.write(parsers.serialize_sfa(A))
    return EXIT_OK


def cmd_sfa(args) -> int:
    op = args.op
    A = _load_sfa(args.file)
    if op == "validate":
        problems = sfa.validate(A)
        for p in problems:
            print(p)
        if not problems:
            print("ok")
        return EXIT_NEG if problems else EXIT_OK
    if op in ("product", "union", "difference"):
        B = _load_sfa(args.other)
        if op == "union":
            return _print_sfa(sfa.union(A, B))
        if op == "difference":
            return _print_sfa(sfa.difference(A, B))
        if args.async_:
            return _print_sfa(sfa.async_product([A, B]))
        return _print_sfa(sfa.intersection(A, B))
    if op == "determinize":
        return _print_sfa(sfa.determinize(A))
    if op == "complete":
        if not sfa.is_deterministic(A):
            raise CliError("input is not deterministic; run `hnamc sfa determinize` first")
        return _print_sfa(sfa.complete(A))
    if op == "complement":
        if not sfa.is_complete(A):
            raise CliError("input is not deterministic and complete; run `hnamc sfa complete` first")
        return _print_sfa(sfa.complement(A))
    if op == "empty":
        w = sfa.witness(A)
        if w is None:
            print("empty")
            return EXIT_OK
        print("non-empty")
        print(f"witness: {w.format()}")
        return EXIT_NEG
    if op == "member":
        try:
            tau = parse_segment(args.segment)
        except ValueError as e:
            raise CliError(str(e)) from None
        ok = sfa.member(A, tau)
        print("accepted" if ok else "rejected")
        return EXIT_OK if ok else EXIT_NEG
    if op == "enumerate":
        if args.max_len < 0:
            raise CliError("--max-len must be non-negative")
        for seg in sorted(sfa.enumerate_language(A, args.max_len), key=lambda s: (s.max_len, s.items)):
            print(seg.format())
        return EXIT_OK
    raise CliError(f"unknown sfa operation {op}")


def cmd_oracle(args) -> int:
    if args.max_len < 1:
        raise CliError("--max-len must be at least 1")
    if args.op == "check-formula":
        OK = _load_kripke(args.kripke).open()
        phi = rectify(_formula_arg(args))
        res = oracle.bf_check_formula(OK, phi, args.max_len, args.mode)
        tag = "exact" if res.exact else "bounded"
        if args.json:
            _emit_json({"command": "oracle check-formula", "verdict": "holds" if res.holds else "fails",
                        "formula": str(phi), "precision": tag, "mode": args.mode})
        else:
            print("HOLDS" if res.holds else "FAILS")
            print(tag)
        return EXIT_OK if res.holds else EXIT_NEG
    kf = _load_kripke(args.kripke)
    K = kf.pointed()
    H = _checked_hna(args, kf)
    max_p = args.max_actions if args.max_actions is not None else args.max_len
    if max_p < 1:
        raise CliError("--max-actions must be at least 1")
    res = oracle.bf_check_hna(K, H, args.max_len, max_p)
    tag = "exact" if res.exact else "bounded"
    d = res.detail
    if args.json:
        _emit_json({"command": "oracle check-hna", "verdict": "holds" if res.holds else "violated",
                    "precision": tag, "witness": list(d.p) if d.p else None, "slice_index": d.slice_index,
                    "node": d.node, "formula": str(d.formula) if d.formula is not None else None})
    else:
        print("HOLDS" if res.holds else "VIOLATED")
        if not res.holds:
            print(f"witness: {' '.join(d.p)}")
            print(f"slice: {d.slice_index}")
            print(f"node: {d.node}")
            print(f"formula: {d.formula}")
        print(tag)
    return EXIT_OK if res.holds else EXIT_NEG


# --- argument parsing -----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hnamc", description="Model checker for hypernode automata.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="check a pointed labeled Kripke structure against a hypernode automaton")
    p.add_argument("--kripke", required=True)
    p.add_argument("--hna", required=True)
    p.add_argument("--max-depth", type=int, default=None)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_check)

    def formula_source(p):
        g = p.add_mutually_exclusive_group(required=True)
        g.add_argument("--formula")
        g.add_argument("--formula-file")

    p = sub.add_parser("check-formula", help="check an open Kripke structure against a formula")
    p.add_argument("--kripke", required=True)
    formula_source(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_check_formula)

    p = sub.add_parser("sfa", help="operations on stutter-free automata")
    ops = p.add_subparsers(dest="op", required=True)
    for name in ("validate", "determinize", "complete", "complement", "empty"):
        q = ops.add_parser(name)
        q.add_argument("file")
    for name in ("product", "union", "difference"):
        q = ops.add_parser(name)
        q.add_argument("file")
        q.add_argument("other")
        if name == "product":
            q.add_argument("--async", dest="async_", action="store_true",
                           help="asynchronous product of automata over disjoint variables")
    q = ops.add_parser("member")
    q.add_argument("file")
    q.add_argument("--segment", required=True)
    q = ops.add_parser("enumerate")
    q.add_argument("file")
    q.add_argument("--max-len", type=int, required=True)
    p.set_defaults(func=cmd_sfa)

    p = sub.add_parser("oracle", help="brute-force reference checks")
    ops = p.add_subparsers(dest="op", required=True)
    q = ops.add_parser("check-formula")
    q.add_argument("--kripke", required=True)
    formula_source(q)
    q.add_argument("--max-len", type=int, required=True, help="maximum number of worlds per path")
    q.add_argument("--mode", choices=("product", "joint"), default="product")
    q.add_argument("--json", action="store_true")
    q = ops.add_parser("check-hna")
    q.add_argument("--kripke", required=True)
    q.add_argument("--hna", required=True)
    q.add_argument("--max-len", type=int, required=True, help="maximum number of worlds per trace")
    q.add_argument("--max-actions", type=int, default=None, help="maximum length of action sequences")
    q.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_oracle)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, HnamcError) as e:
        diag(str(e))
        return EXIT_ERR


if __name__ == "__main__":
    sys.exit(main())
