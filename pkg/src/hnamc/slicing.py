"""Slicing a pointed action-labeled Kripke structure and model checking hypernode automata.

A slice is identified by the set of worlds where it may start and the action
that ends it.  Its open substructure holds the worlds on ε-paths from those
entries to the sources of the action's edges.

Acceptance checks slice ``i`` of ``p`` only on traces that go on to
perform all of ``p``.  When slice ``i`` is not the last one, this removes
exits whose action edge cannot be followed by the rest of ``p``.  For each
slice we therefore also check the variants whose exits are restricted to the
possible continuations.  Universal formulas cannot be broken by dropping
segments, so for them the unrestricted slice is enough.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .core import EPS, HnamcError, UnknownActionError
from .filtration import check_formula_against_open_kripke
from .hna import Hna
from .kripke import Kripke, OpenKripke, PointedLabeledKripke
from .logic import Formula, is_universal


class JoinError(HnamcError, ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SliceState:
    entry_worlds: frozenset
    inducing_action: str
    substructure: OpenKripke
    next_entries: frozenset

    @property
    def fingerprint(self):
        return _fingerprint(self.substructure)

    def __repr__(self):
        return (f"SliceState(entries={sorted(self.entry_worlds)}, action={self.inducing_action}, "
                f"worlds={list(self.substructure.k.worlds)}, exits={sorted(self.substructure.exits)})")


def _fingerprint(OK: OpenKripke):
    return (OK.k.worlds, OK.k.delta, OK.entries, OK.exits)


def eps_successors(K: PointedLabeledKripke, w) -> list:
    return [r for r in K.k.successors(w) if EPS in K.labels(w, r)]


def action_successors(K: PointedLabeledKripke, w, a) -> list:
    return [r for r in K.k.successors(w) if a in K.labels(w, r)]


def eps_closure(K: PointedLabeledKripke, start) -> set:
    seen = set(start)
    queue = deque(start)
    while queue:
        w = queue.popleft()
        for r in eps_successors(K, w):
            if r not in seen:
                seen.add(r)
                queue.append(r)
    return seen


def _eps_coreach(K: PointedLabeledKripke, targets, within) -> set:
    back = {}
    for w in within:
        for r in eps_successors(K, w):
            if r in within:
                back.setdefault(r, []).append(w)
    seen = set(targets)
    queue = deque(targets)
    while queue:
        r = queue.popleft()
        for w in back.get(r, ()):
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return seen


def substructure(K: PointedLabeledKripke, entries, exits) -> OpenKripke:
    """ε-subgraph on the worlds lying on ε-paths from ``entries`` to ``exits``."""
    reach = eps_closure(K, entries)
    region = _eps_coreach(K, set(exits) & reach, reach)
    worlds = tuple(w for w in K.k.worlds if w in region)
    edges = {(w, r) for w in worlds for r in eps_successors(K, w) if r in region}
    k = Kripke(worlds, K.k.vars, K.k.domain, edges, {w: K.k.valuation[w] for w in worlds})
    return OpenKripke(k, frozenset(entries) & region, frozenset(exits) & region)


def slice_step(K: PointedLabeledKripke, entry_worlds, a: str) -> SliceState | None:
    if a not in K.actions:
        raise UnknownActionError(f"unknown action {a!r}")
    entry_worlds = frozenset(entry_worlds)
    reach = eps_closure(K, entry_worlds)
    exits = {w for w in reach if action_successors(K, w, a)}
    if not exits:
        return None
    nxt = frozenset(r for w in exits for r in action_successors(K, w, a))
    return SliceState(entry_worlds, a, substructure(K, entry_worlds, exits), nxt)


def continuations(K: PointedLabeledKripke) -> list[tuple[frozenset, tuple]]:
    """Distinct sets of worlds from which some path performs a given action sequence next.

    Each set comes with a shortest such sequence; the first entry is all worlds
    with the empty sequence.
    """
    everything = frozenset(K.k.worlds)
    found = {everything: ()}
    queue = deque([everything])
    while queue:
        C = queue.popleft()
        for b in K.actions:
            sources = {w for w in K.k.worlds if any(r in C for r in action_successors(K, w, b))}
            pre = frozenset(_eps_coreach(K, sources, set(K.k.worlds)))
            if pre and pre not in found:
                found[pre] = (b,) + found[C]
                queue.append(pre)
    return list(found.items())


class SliceAutomaton:
    """Deterministic automaton over actions whose states are entry sets, explored lazily."""

    def __init__(self, K: PointedLabeledKripke):
        self.K = K
        self.start = frozenset([K.initial])
        self._cache: dict = {}

    def slice(self, entries, a) -> SliceState | None:
        key = (frozenset(entries), a)
        if key not in self._cache:
            self._cache[key] = slice_step(self.K, *key)
        return self._cache[key]

    def run(self, p) -> list[SliceState] | None:
        """Slices along ``p``, or ``None`` if no trace performs ``p``."""
        entries = self.start
        out = []
        for a in p:
            s = self.slice(entries, a)
            if s is None:
                return None
            out.append(s)
            entries = s.next_entries
        return out

    def explore(self) -> dict:
        """All reachable entry sets with their per-action slices."""
        seen = {self.start: {}}
        queue = deque([self.start])
        while queue:
            E = queue.popleft()
            for a in self.K.actions:
                s = self.slice(E, a)
                if s is None:
                    continue
                seen[E][a] = s
                if s.next_entries not in seen:
                    seen[s.next_entries] = {}
                    queue.append(s.next_entries)
        return seen


def build_slice_automaton(K: PointedLabeledKripke) -> SliceAutomaton:
    return SliceAutomaton(K)


@dataclass(frozen=True, eq=False)
class JoinState:
    slice: SliceState
    node: str
    ok: bool
    # when not ok: the continuation that exposes the violation and the offending substructure
    suffix: tuple = ()
    offending: OpenKripke | None = field(default=None, repr=False)

    @property
    def final(self) -> bool:
        return not self.ok


class _Checker:
    def __init__(self, K: PointedLabeledKripke, restrict_continuations: bool):
        self.K = K
        self.restrict = restrict_continuations
        self._conts = None
        self._memo: dict = {}

    @property
    def conts(self):
        if self._conts is None:
            self._conts = continuations(self.K)
        return self._conts

    def holds(self, OK: OpenKripke, phi: Formula) -> bool:
        key = (_fingerprint(OK), phi)
        if key not in self._memo:
            self._memo[key] = check_formula_against_open_kripke(OK, phi).holds
        return self._memo[key]

    def judge(self, s: SliceState, node, phi: Formula) -> JoinState:
        if self.holds(s.substructure, phi):
            if not self.restrict or is_universal(phi):
                return JoinState(s, node, True)
        else:
            return JoinState(s, node, False, (), s.substructure)
        a = s.inducing_action
        tried = {s.substructure.exits}
        for C, suffix in self.conts:
            exits = frozenset(w for w in s.substructure.exits
                              if any(r in C for r in action_successors(self.K, w, a)))
            if not exits or exits in tried:
                continue
            tried.add(exits)
            OK = substructure(self.K, s.entry_worlds, exits)
            if not self.holds(OK, phi):
                return JoinState(s, node, False, suffix, OK)
        return JoinState(s, node, True)


class Join:
    """Product of the slice automaton with a hypernode automaton.

    States are keyed by ``(entries, node)``; each action from a key yields a
    :class:`JoinState` whose slice ends with that action.
    """

    def __init__(self, H: Hna, K: PointedLabeledKripke, restrict_continuations: bool = True):
        missing = set(K.actions) - set(H.actions)
        if missing:
            raise JoinError(f"actions {sorted(missing)} of the structure are unknown to the automaton")
        self.H = H
        self.K = K
        self.slices = SliceAutomaton(K)
        self.checker = _Checker(K, restrict_continuations)
        self.start = (self.slices.start, H.initial)

    def state(self, key, a) -> JoinState | None:
        entries, node = key
        s = self.slices.slice(entries, a)
        if s is None:
            return None
        return self.checker.judge(s, node, self.H.label(node))

    def successor(self, js: JoinState):
        return (js.slice.next_entries, self.H.step(js.node, js.slice.inducing_action))

    def explore(self, max_depth: int | None = None):
        """Breadth-first ``(depth, prefix, key, action, JoinState)`` over reachable states.

        ``prefix`` is a shortest action sequence leading to ``key``.
        """
        seen = {self.start}
        queue = deque([(self.start, ())])
        while queue:
            key, prefix = queue.popleft()
            for a in self.H.actions:
                if a not in self.K.actions:
                    continue
                if max_depth is not None and len(prefix) + 1 > max_depth:
                    yield None
                    break
                js = self.state(key, a)
                if js is None:
                    continue
                yield len(prefix) + 1, prefix, key, a, js
                nxt = self.successor(js)
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append((nxt, prefix + (a,)))


@dataclass(frozen=True)
class JoinAutomaton:
    initial: tuple
    states: dict  # (entries, node) -> {action: JoinState}
    transitions: dict  # ((entries, node), action) -> (entries, node)

    @property
    def finals(self) -> list[JoinState]:
        return [js for m in self.states.values() for js in m.values() if js.final]


def build_join(H: Hna, K: PointedLabeledKripke, restrict_continuations: bool = True) -> JoinAutomaton:
    join = Join(H, K, restrict_continuations)
    states = {join.start: {}}
    transitions = {}
    for item in join.explore():
        _, _, key, a, js = item
        states.setdefault(key, {})[a] = js
        nxt = join.successor(js)
        transitions[(key, a)] = nxt
        states.setdefault(nxt, {})
    return JoinAutomaton(join.start, states, transitions)


@dataclass(frozen=True)
class Verdict:
    status: str  # "holds" | "violated" | "unknown"
    witness: tuple | None = None
    slice_index: int | None = None
    node: str | None = None
    formula: Formula | None = None
    substructure: OpenKripke | None = field(default=None, compare=False, repr=False)
    explored: int = field(default=0, compare=False)

    @property
    def holds(self) -> bool:
        return self.status == "holds"


def model_check(H: Hna, K: PointedLabeledKripke, max_depth: int | None = None,
                restrict_continuations: bool = True) -> Verdict:
    """Does every trace of ``K`` satisfy ``H``?

    Returns a shortest violating action sequence (ties broken by the action
    order of ``H``), the index of the violated slice and its node.
    """
    join = Join(H, K, restrict_continuations)
    order = {a: i for i, a in enumerate(H.actions)}
    best = None
    capped = False
    explored = 0
    for item in join.explore(max_depth):
        if item is None:
            capped = True
            break
        depth, prefix, key, a, js = item
        explored += 1
        if best is not None and depth > len(best[0][0]):
            break
        if js.ok:
            continue
        p = prefix + (a,) + js.suffix
        rank = (len(p), tuple(order[b] for b in p))
        if best is None or rank < best[1]:
            best = ((p, len(prefix), js), rank)
    if best is not None:
        (p, idx, js), _ = best
        return Verdict("violated", p, idx, js.node, H.label(js.node), js.offending, explored)
    return Verdict("unknown" if capped else "holds", explored=explored)
