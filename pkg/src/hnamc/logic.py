"""Hypernode logic: formula AST and direct satisfaction over finite segment sets."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Union

from .core import HnamcError, UnzippedSegment, VarMismatchError, sr_prefix


class OpenFormulaError(HnamcError, ValueError):
    pass


@dataclass(frozen=True)
class Atom:
    """``x(pi) <~ y(pi2)``"""

    x: str
    pi: str
    y: str
    pi2: str

    def __str__(self):
        return f"{self.x}({self.pi}) <~ {self.y}({self.pi2})"


@dataclass(frozen=True)
class Not:
    body: "Formula"

    def __str__(self):
        return f"!{_paren(self.body)}"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"

    def __str__(self):
        return f"{_paren(self.left, And)} & {_paren(self.right)}"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"

    def __str__(self):
        return f"{_paren(self.left, Or)} | {_paren(self.right)}"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"

    def __str__(self):
        return f"exists {self.var}. {self.body}"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"

    def __str__(self):
        return f"forall {self.var}. {self.body}"


Formula = Union[Atom, Not, And, Or, Exists, Forall]
QUANTIFIERS = (Exists, Forall)


def _paren(f, same=None):
    # binary connectives parse left-associatively, so only a left operand may drop its parentheses
    if isinstance(f, Atom) or (same is not None and isinstance(f, same)):
        return str(f)
    if isinstance(f, Not):
        return str(f)
    return f"({f})"


def big_and(parts: Iterable[Formula]) -> Formula:
    parts = list(parts)
    if not parts:
        raise ValueError("empty conjunction")
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def observational_determinism(public: Iterable[str], p="p", q="q") -> Formula:
    """Both-direction stutter-reduced prefixing of every public variable across two traces."""
    body = big_and(Or(Atom(l, p, l, q), Atom(l, q, l, p)) for l in public)
    return Forall(p, Forall(q, body))


def free_trace_vars(phi: Formula) -> set[str]:
    if isinstance(phi, Atom):
        return {phi.pi, phi.pi2}
    if isinstance(phi, Not):
        return free_trace_vars(phi.body)
    if isinstance(phi, (And, Or)):
        return free_trace_vars(phi.left) | free_trace_vars(phi.right)
    if isinstance(phi, QUANTIFIERS):
        return free_trace_vars(phi.body) - {phi.var}
    raise TypeError(f"not a formula: {phi!r}")


def program_vars(phi: Formula) -> set[str]:
    if isinstance(phi, Atom):
        return {phi.x, phi.y}
    if isinstance(phi, Not):
        return program_vars(phi.body)
    if isinstance(phi, (And, Or)):
        return program_vars(phi.left) | program_vars(phi.right)
    return program_vars(phi.body)


def quantified_vars(phi: Formula) -> list[str]:
    """Bound trace variables in pre-order; after :func:`rectify` they are distinct."""
    if isinstance(phi, Atom):
        return []
    if isinstance(phi, Not):
        return quantified_vars(phi.body)
    if isinstance(phi, (And, Or)):
        return quantified_vars(phi.left) + quantified_vars(phi.right)
    return [phi.var] + quantified_vars(phi.body)


def is_closed(phi: Formula) -> bool:
    return not free_trace_vars(phi)


def rectify(phi: Formula) -> Formula:
    """Alpha-rename so that every quantifier binds a distinct trace variable.

    Names bound exactly once are kept; names bound repeatedly become
    ``name1``, ``name2``, ... in pre-order.
    """
    free = free_trace_vars(phi)
    if free:
        raise OpenFormulaError(f"formula has free trace variables: {', '.join(sorted(free))}")
    bound = quantified_vars(phi)
    counts = {v: bound.count(v) for v in bound}
    used = set(bound)
    fresh = {}
    for v in bound:
        if counts[v] > 1 and v not in fresh:
            names, k = [], 1
            while len(names) < counts[v]:
                cand = f"{v}{k}"
                if cand not in used:
                    names.append(cand)
                    used.add(cand)
                k += 1
            fresh[v] = iter(names)

    def go(f, env):
        if isinstance(f, Atom):
            return Atom(f.x, env[f.pi], f.y, env[f.pi2])
        if isinstance(f, Not):
            return Not(go(f.body, env))
        if isinstance(f, (And, Or)):
            return type(f)(go(f.left, env), go(f.right, env))
        name = next(fresh[f.var]) if f.var in fresh else f.var
        return type(f)(name, go(f.body, {**env, f.var: name}))

    return go(phi, {})


def expand(phi: Formula) -> Formula:
    """Rewrite ``Forall`` and ``Or`` through their abbreviations."""
    if isinstance(phi, Atom):
        return phi
    if isinstance(phi, Not):
        return Not(expand(phi.body))
    if isinstance(phi, And):
        return And(expand(phi.left), expand(phi.right))
    if isinstance(phi, Or):
        return Not(And(Not(expand(phi.left)), Not(expand(phi.right))))
    if isinstance(phi, Exists):
        return Exists(phi.var, expand(phi.body))
    return Not(Exists(phi.var, Not(expand(phi.body))))


def is_universal(phi: Formula) -> bool:
    """True when every quantifier is universal once negations are pushed inward.

    Such formulas are antitone: removing segments never breaks satisfaction.
    """

    def go(f, positive):
        if isinstance(f, Atom):
            return True
        if isinstance(f, Not):
            return go(f.body, not positive)
        if isinstance(f, (And, Or)):
            return go(f.left, positive) and go(f.right, positive)
        universal = isinstance(f, Forall) == positive
        return universal and go(f.body, positive)

    return go(phi, True)


def evaluate(segments: Iterable[UnzippedSegment], phi: Formula, env: Mapping[str, UnzippedSegment] | None = None) -> bool:
    """Decide ``T |= phi`` by enumerating trace assignments over the set ``T``."""
    T = sorted(set(segments))
    if env is None:
        free = free_trace_vars(phi)
        if free:
            raise OpenFormulaError(f"formula has free trace variables: {', '.join(sorted(free))}")
        env = {}
    if T:
        known = set(T[0].vars)
        if any(set(t.vars) != known for t in T):
            raise VarMismatchError("segments do not share a variable set")
        missing = program_vars(phi) - known
        if missing:
            raise VarMismatchError(f"formula mentions unknown variables: {', '.join(sorted(missing))}")
    return _eval(T, phi, dict(env))


def _eval(T, f, env):
    if isinstance(f, Atom):
        return sr_prefix(env[f.pi][f.x], env[f.pi2][f.y])
    if isinstance(f, Not):
        return not _eval(T, f.body, env)
    if isinstance(f, And):
        return _eval(T, f.left, env) and _eval(T, f.right, env)
    if isinstance(f, Or):
        return _eval(T, f.left, env) or _eval(T, f.right, env)
    if isinstance(f, Exists):
        return any(_eval(T, f.body, {**env, f.var: t}) for t in T)
    return all(_eval(T, f.body, {**env, f.var: t}) for t in T)

