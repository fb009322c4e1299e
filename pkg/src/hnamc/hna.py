"""Hypernode automata and their acceptance over explicit finite trace sets."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .core import EPS, HnamcError, UnknownActionError, stutter_reduce, unzip
from .logic import Formula, evaluate, free_trace_vars, program_vars


class HnaError(HnamcError, ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Hna:
    nodes: tuple
    initial: str
    labels: Mapping = field(repr=False)  # node -> Formula
    trans: Mapping = field(repr=False)  # (node, action) -> node
    actions: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "actions", tuple(self.actions))
        object.__setattr__(self, "labels", dict(self.labels))
        object.__setattr__(self, "trans", dict(self.trans))
        if len(set(self.nodes)) != len(self.nodes):
            raise HnaError("duplicate node")
        if self.initial not in self.nodes:
            raise HnaError(f"initial node {self.initial} is not a node")

    def label(self, node) -> Formula:
        return self.labels[node]

    def step(self, node, action):
        if action not in self.actions:
            raise UnknownActionError(f"unknown action {action!r}")
        try:
            return self.trans[(node, action)]
        except KeyError:
            raise HnaError(f"node {node} has no transition on {action}") from None


@dataclass(frozen=True)
class HnaIssue:
    severity: str  # "error" | "warning"
    kind: str  # "totality" | "unknown" | "closedness" | "reachability" | "label"
    node: str | None
    detail: str

    def __str__(self):
        where = f" at node {self.node}" if self.node is not None else ""
        return f"{self.severity}: {self.kind}{where}: {self.detail}"


def validate(H: Hna, vars: Iterable[str] | None = None) -> list[HnaIssue]:
    """Totality, closedness and reachability problems (reachability is only a warning)."""
    issues = []
    nodes = set(H.nodes)
    for q in H.nodes:
        if q not in H.labels:
            issues.append(HnaIssue("error", "label", q, "node has no formula"))
            continue
        free = free_trace_vars(H.labels[q])
        if free:
            issues.append(HnaIssue("error", "closedness", q,
                                   f"formula has free trace variables {', '.join(sorted(free))}"))
        if vars is not None:
            unknown = program_vars(H.labels[q]) - set(vars)
            if unknown:
                issues.append(HnaIssue("error", "label", q, f"formula mentions unknown variables {sorted(unknown)}"))
        for a in H.actions:
            if (q, a) not in H.trans:
                issues.append(HnaIssue("error", "totality", q, f"no transition on action {a}"))
    for (q, a), r in H.trans.items():
        if q not in nodes or r not in nodes:
            issues.append(HnaIssue("error", "unknown", q, f"transition on {a} involves an unknown node"))
        if a not in H.actions:
            issues.append(HnaIssue("error", "unknown", q, f"transition on undeclared action {a}"))
    reach = {H.initial}
    frontier = [H.initial]
    while frontier:
        q = frontier.pop()
        for a in H.actions:
            r = H.trans.get((q, a))
            if r is not None and r not in reach:
                reach.add(r)
                frontier.append(r)
    for q in H.nodes:
        if q not in reach:
            issues.append(HnaIssue("warning", "reachability", q, "node is unreachable"))
    return issues


def errors(issues: Iterable[HnaIssue]) -> list[HnaIssue]:
    return [i for i in issues if i.severity == "error"]


def run(H: Hna, p: Sequence[str]) -> list:
    nodes = [H.initial]
    for a in p:
        nodes.append(H.step(nodes[-1], a))
    return nodes


# An action-labeled trace is a tuple of (Valuation, action-or-eps) steps.
ActionLabeledTrace = tuple


def project_actions(rho: ActionLabeledTrace) -> tuple:
    return tuple(a for _, a in rho if a != EPS)


def matching_traces(R: Iterable[ActionLabeledTrace], p: Sequence[str]) -> list:
    p = tuple(p)
    return [rho for rho in R if project_actions(rho)[: len(p)] == p]


def cut(rho: ActionLabeledTrace, n: int) -> list[tuple]:
    """The first ``n`` slices of ``rho``; slice ``i`` ends with the step carrying action ``i``."""
    slices = []
    current = []
    for v, a in rho:
        if len(slices) == n:
            break
        current.append(v)
        if a != EPS:
            slices.append(tuple(current))
            current = []
    return slices


def slice_trace_set(R: Iterable[ActionLabeledTrace], p: Sequence[str]) -> list[set] | None:
    """Slices of the traces whose action projection extends ``p``, or ``None`` if there are none."""
    p = tuple(p)
    matching = matching_traces(R, p)
    if not matching:
        return None
    out = [set() for _ in p]
    for rho in matching:
        for i, seg in enumerate(cut(rho, len(p))):
            out[i].add(seg)
    return out


@dataclass(frozen=True)
class Acceptance:
    accepted: bool
    p: tuple | None = None
    slice_index: int | None = None
    node: str | None = None
    formula: Formula | None = None

    def __bool__(self):
        return self.accepted


def _vars_of(R) -> tuple:
    for rho in R:
        for v, _ in rho:
            return v.vars
    return ()


def oracle_accepts(R: Iterable[ActionLabeledTrace], H: Hna, max_p: int) -> Acceptance:
    """Check every action sequence of length at most ``max_p`` against ``H`` on the trace set ``R``.

    Sequences are visited by length, then in the order of ``H.actions``.
    """
    R = list(R)
    X = _vars_of(R)
    for n in range(1, max_p + 1):
        for p in itertools.product(H.actions, repeat=n):
            slices = slice_trace_set(R, p)
            if slices is None:
                continue
            nodes = run(H, p)
            for i, segs in enumerate(slices):
                T = {stutter_reduce(unzip(list(s), X)) for s in segs}
                phi = H.label(nodes[i])
                if not evaluate(T, phi):
                    return Acceptance(False, p, i, nodes[i], phi)
    return Acceptance(True)
