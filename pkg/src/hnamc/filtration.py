"""Deciding hypernode formulas over the language of a stutter-free automaton.

Every subformula is filtered into an automaton over the coordinates ``x_pi``
of its *free* trace variables only.  Quantifiers project their variable's
coordinates away and conjunctions re-introduce missing coordinates by pairing
with fresh copies of the base automaton.  A closed formula ends up as an
automaton over no coordinates at all, which accepts the empty word iff the
formula holds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from . import sfa
from .core import TERM, Domain, HnamcError, UnzippedSegment, VarMismatchError
from .logic import And, Atom, Exists, Forall, Formula, Not, Or, evaluate, free_trace_vars, \
    program_vars, quantified_vars, rectify
from .sfa import Sfa


class CoordinateMissingError(HnamcError, KeyError):
    pass


def atomic_sfa(x: str, pi: str, y: str, pi2: str, vars: Sequence[str], domain: Domain) -> Sfa:
    """Universal automaton over ``vars`` cut down to letters where ``x_pi`` copies ``y_pi2`` or has ended.

    Accepts exactly the stutter-free segments with ``x(pi) <~ y(pi2)``.
    """
    vars = tuple(vars)
    xi, yi = (sfa.trace_var_name(x, pi), sfa.trace_var_name(y, pi2))
    for c in (xi, yi):
        if c not in vars:
            raise CoordinateMissingError(f"coordinate {c} is not among {vars}")
    i, j = vars.index(xi), vars.index(yi)
    U = sfa.universal(vars, domain)
    kept = {q for q in U.states if q == sfa.START or q[i] == q[j] or q[i] == TERM}
    transitions = [(q, v, r) for q, v, r in U.transitions() if q in kept and r in kept]
    return Sfa.build(vars, domain, transitions, initials=[sfa.START], finals=kept, states=kept)


def _atom_condition(A: Sfa, f: Atom):
    xi, yi = sfa.trace_var_name(f.x, f.pi), sfa.trace_var_name(f.y, f.pi2)
    for c in (xi, yi):
        if c not in A.vars:
            raise CoordinateMissingError(f"coordinate {c} is not among {A.vars}")
    i, j = A.vars.index(xi), A.vars.index(yi)
    return lambda v: v[i] == v[j] or v[i] == TERM


def atom_positive(A: Sfa, f: Atom) -> Sfa:
    """Language-equal to ``intersection(A, atomic_sfa(...))``.

    Along any run of a valid automaton consecutive letters already obey the
    universal automaton's step rule, so intersecting only removes the letters
    that break the atom's condition.
    """
    ok = _atom_condition(A, f)
    delta = {}
    for q, m in A.delta.items():
        kept = {v: ts for v, ts in m.items() if ok(v)}
        if kept:
            delta[q] = kept
    return Sfa(A.vars, A.domain, A.states, A.initials, A.finals, delta)


def atom_negative(A: Sfa, f: Atom) -> Sfa:
    """Runs of ``A`` reading at least one letter that breaks the atom's condition.

    Language-equal to ``difference(A, atomic_sfa(...))``.
    """
    ok = _atom_condition(A, f)

    def succ(state):
        q, broken = state
        for v, ts in A.out(q).items():
            flag = broken or not ok(v)
            for r in ts:
                yield v, (r, flag)

    return sfa.explore(A.vars, A.domain, [(q, False) for q in sorted(A.initials, key=repr)], succ,
                       lambda s: s[1] and s[0] in A.finals)


class Filtration:
    """Filters subformulas against a fixed base automaton.

    ``order`` fixes the coordinate layout: an automaton over the trace
    variables ``F`` has coordinates ``x_pi`` for ``pi`` in ``F`` (in ``order``)
    and ``x`` in the base variables.
    """

    def __init__(self, A: Sfa, order: Sequence[str]):
        self.A = A
        self.order = tuple(order)
        self._powers: dict = {}
        self._memo: dict = {}

    def canon(self, names) -> tuple:
        names = set(names)
        unknown = names - set(self.order)
        if unknown:
            raise CoordinateMissingError(f"trace variables {sorted(unknown)} have no coordinates")
        return tuple(p for p in self.order if p in names)

    def coords(self, F: tuple) -> tuple:
        return tuple(sfa.trace_var_name(x, p) for p in F for x in self.A.vars)

    def power(self, F: tuple) -> Sfa:
        if F not in self._powers:
            if F:
                self._powers[F] = sfa.self_compose(self.A, F)
            else:
                self._powers[F] = Sfa.build((), self.A.domain, [], initials=[0], finals=[0])
        return self._powers[F]

    def extend(self, B: Sfa, F_from: tuple, F_to: tuple) -> Sfa:
        missing = tuple(p for p in F_to if p not in F_from)
        if missing:
            B = sfa.async_product([B, self.power(missing)])
        return sfa.reorder_vars(B, self.coords(F_to))

    def run(self, phi: Formula, positive: bool) -> tuple[Sfa, tuple]:
        """``(automaton, free trace variables)`` for the given polarity."""
        key = (phi, positive)
        if key not in self._memo:
            B, F = self._run(phi, positive)
            self._memo[key] = (sfa.trim(B), F)
        return self._memo[key]

    def _run(self, f, positive):
        if isinstance(f, Atom):
            F = self.canon({f.pi, f.pi2})
            base = self.power(F)
            return (atom_positive(base, f) if positive else atom_negative(base, f)), F
        if isinstance(f, Not):
            return self.run(f.body, not positive)
        if isinstance(f, Or):
            return self.run(Not(And(Not(f.left), Not(f.right))), positive)
        if isinstance(f, Forall):
            return self.run(Not(Exists(f.var, Not(f.body))), positive)
        if isinstance(f, And):
            L, FL = self.run(f.left, positive)
            R, FR = self.run(f.right, positive)
            F = self.canon(set(FL) | set(FR))
            L, R = self.extend(L, FL, F), self.extend(R, FR, F)
            return (sfa.intersection(L, R) if positive else sfa.union(L, R)), F
        if isinstance(f, Exists):
            body, Fb = self.run(f.body, True)
            F = tuple(p for p in Fb if p != f.var)
            pos = sfa.reorder_vars(sfa.project(body, self.coords(F)), self.coords(F))
            if positive:
                return pos, F
            return sfa.difference(self.power(F), pos), F
        raise TypeError(f"not a formula: {f!r}")


def _polarity(p) -> bool:
    if p in ("+", True, 1):
        return True
    if p in ("-", False, 0):
        return False
    raise ValueError(f"polarity must be '+' or '-', got {p!r}")


def filter(phi: Formula, polarity, A: Sfa, order: Sequence[str] | None = None) -> Sfa:
    """Positive (``'+'``) or negative (``'-'``) filtration of ``A`` by ``phi``.

    The result reads the coordinates ``x_pi`` of the free trace variables of
    ``phi`` and accepts exactly the assignments, drawn from the language of
    ``A``, that satisfy (``+``) or falsify (``-``) ``phi``.
    """
    if order is None:
        order = sorted(free_trace_vars(phi)) + [v for v in quantified_vars(phi) if v not in free_trace_vars(phi)]
    order = list(dict.fromkeys(order))
    B, F = Filtration(A, order).run(phi, _polarity(polarity))
    return B


@dataclass(frozen=True)
class FormulaVerdict:
    holds: bool
    formula: Formula
    # counterexample assignment when the formula fails under a universal prefix,
    # example assignment when it holds under an existential prefix
    witness: dict | None = field(default=None, compare=False)

    def __bool__(self):
        return self.holds


def _quantifier_prefix(f, universal: bool):
    """Strip a leading block of universal (or existential) quantifiers."""
    names = []
    while True:
        if isinstance(f, Not) and isinstance(f.body, Not):
            f = f.body.body
        elif isinstance(f, Forall if universal else Exists):
            names.append(f.var)
            f = f.body
        elif isinstance(f, Not) and isinstance(f.body, Exists if universal else Forall):
            names.append(f.body.var)
            f = Not(f.body.body)
        else:
            return names, f


def _assignment(seg: UnzippedSegment, F: tuple, X: tuple) -> dict:
    return {p: UnzippedSegment({x: seg[sfa.trace_var_name(x, p)] for x in X}) for p in F}


def check_formula_against_sfa(A: Sfa, phi: Formula) -> FormulaVerdict:
    """Does the language of ``A`` (with ``#`` stripped) satisfy the closed formula ``phi``?"""
    phi = rectify(phi)
    missing = program_vars(phi) - set(A.vars)
    if missing:
        raise VarMismatchError(f"formula mentions variables {sorted(missing)} not in {A.vars}")
    if sfa.is_empty(A):
        # no assignment exists at all; only the vacuous reading can decide
        return FormulaVerdict(evaluate(set(), phi), phi)
    filt = Filtration(A, quantified_vars(phi))
    top, _ = filt.run(phi, True)
    holds = not sfa.is_empty(top)
    names, body = _quantifier_prefix(phi, universal=not holds)
    witness = None
    if names:
        B, F = filt.run(body, holds)
        seg = sfa.witness(B)
        if seg is not None:
            witness = _assignment(seg, F, A.vars)
    return FormulaVerdict(holds, phi, witness)


def check_formula_against_open_kripke(OK, phi: Formula) -> FormulaVerdict:
    from .kripke import to_sfa

    return check_formula_against_sfa(to_sfa(OK), phi)
