"""Brute-force reference semantics.

Nothing here touches automata: formulas are evaluated on enumerated segment
sets and hypernode automata on enumerated trace sets.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass

from .core import EPS, UnzippedSegment
from .hna import Acceptance, Hna, oracle_accepts
from .kripke import OpenKripke, PointedLabeledKripke, generated_segments
from .logic import Formula, evaluate


@dataclass(frozen=True)
class OracleResult:
    holds: bool
    exact: bool
    detail: Acceptance | None = None

    def __bool__(self):
        return self.holds


def _reachable(start, succ):
    seen = set(start)
    queue = deque(start)
    while queue:
        w = queue.popleft()
        for r in succ(w):
            if r not in seen:
                seen.add(r)
                queue.append(r)
    return seen


def enumerate_labeled_traces(K: PointedLabeledKripke, max_steps: int) -> set[tuple]:
    """Action-labeled traces of every path from the initial world with at most ``max_steps`` worlds.

    A path contributes one trace per choice of label on each edge; its last
    valuation carries ``eps``.
    """
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")
    k = K.k
    out = set()
    stack = [(K.initial,)]
    while stack:
        path = stack.pop()
        choices = [sorted(K.labels(a, b)) for a, b in zip(path, path[1:])] + [[EPS]]
        vals = [k.valuation[w] for w in path]
        for labels in itertools.product(*choices):
            out.add(tuple(zip(vals, labels)))
        if len(path) < max_steps:
            stack.extend(path + (r,) for r in k.successors(path[-1]))
    return out


def _open_is_acyclic(OK: OpenKripke) -> bool:
    reach = _reachable(OK.entries, OK.k.successors)
    return OK.k.is_acyclic(reach)


def bf_check_formula(OK: OpenKripke, phi: Formula, max_len: int, mode: str = "product") -> OracleResult:
    """Evaluate ``phi`` on the segments of paths with at most ``max_len`` worlds."""
    if max_len < 1:
        raise ValueError("max_len must be at least 1")
    T = generated_segments(OK, max_len, mode)
    exact = _open_is_acyclic(OK) and max_len >= len(OK.k.worlds)
    return OracleResult(evaluate(T, phi), exact)


def bf_check_hna(K: PointedLabeledKripke, H: Hna, max_steps: int, max_p: int) -> OracleResult:
    """Acceptance checked slice by slice on the enumerated trace set."""
    if max_steps < 1 or max_p < 1:
        raise ValueError("bounds must be at least 1")
    R = enumerate_labeled_traces(K, max_steps)
    verdict = oracle_accepts(R, H, max_p)
    n = len(K.k.worlds)
    reach = _reachable([K.initial], K.k.successors)
    exact = K.k.is_acyclic(reach) and max_steps >= n and max_p >= n - 1
    return OracleResult(verdict.accepted, exact, verdict)


def reduced_strings(OK: OpenKripke, x: str, max_len: int) -> set[tuple]:
    """Every reduced ``x``-string of an entry-to-exit path, up to ``max_len`` values.

    Explores (world, reduced prefix) pairs, so cycles are handled exactly.
    """
    k = OK.k
    start = [(w, (k.value(w, x),)) for w in OK.entries]
    seen = set(start)
    queue = deque(start)
    out = set()
    while queue:
        w, s = queue.popleft()
        if w in OK.exits:
            out.add(s)
        for r in k.successors(w):
            v = k.value(r, x)
            t = s if v == s[-1] else s + (v,)
            if len(t) <= max_len and (r, t) not in seen:
                seen.add((r, t))
                queue.append((r, t))
    return out


def product_segments(OK: OpenKripke, max_len: int) -> set[UnzippedSegment]:
    """Product-mode segments whose reduced strings have at most ``max_len`` values."""
    per_var = [sorted(reduced_strings(OK, x, max_len)) for x in OK.k.vars]
    return {UnzippedSegment(dict(zip(OK.k.vars, combo))) for combo in itertools.product(*per_var)}


def last_slices(K: PointedLabeledKripke, p, max_steps: int) -> set[tuple] | None:
    """The last slice of ``p`` over the enumerated traces, as tuples of valuations."""
    from .hna import slice_trace_set

    slices = slice_trace_set(enumerate_labeled_traces(K, max_steps), p)
    return None if slices is None else slices[-1]
