"""Kripke structures, action labelings and their translation to stutter-free automata."""

from __future__ import annotations

import itertools
import warnings
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from . import sfa
from .core import EPS, Domain, HnamcError, UnknownActionError, UnzippedSegment, Valuation, VarMismatchError, \
    stutter_reduce, unzip
from .sfa import Sfa


class KripkeError(HnamcError, ValueError):
    pass


class EpsilonCycleWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class Kripke:
    worlds: tuple
    vars: tuple
    domain: Domain
    delta: frozenset  # of (w, w') pairs
    valuation: Mapping = field(repr=False)  # world -> Valuation

    def __post_init__(self):
        object.__setattr__(self, "worlds", tuple(self.worlds))
        object.__setattr__(self, "vars", tuple(self.vars))
        object.__setattr__(self, "delta", frozenset(self.delta))
        val = {}
        known = set(self.worlds)
        if len(known) != len(self.worlds):
            raise KripkeError("duplicate world")
        for w in self.worlds:
            if w not in self.valuation:
                raise KripkeError(f"world {w} has no valuation")
            v = self.valuation[w]
            v = v if isinstance(v, Valuation) else Valuation(v)
            if set(v.vars) != set(self.vars):
                raise VarMismatchError(f"valuation of {w} covers {v.vars}, expected {self.vars}")
            bad = [x for x in self.vars if v[x] not in self.domain]
            if bad:
                raise KripkeError(f"world {w}: value of {bad[0]} not in the domain")
            val[w] = v
        object.__setattr__(self, "valuation", val)
        for a, b in self.delta:
            if a not in known or b not in known:
                raise KripkeError(f"edge {a} -> {b} mentions an unknown world")
        succ = {w: [] for w in self.worlds}
        for a, b in sorted(self.delta, key=lambda e: (self.worlds.index(e[0]), self.worlds.index(e[1]))):
            succ[a].append(b)
        object.__setattr__(self, "_succ", {w: tuple(s) for w, s in succ.items()})

    def value(self, w, x) -> str:
        return self.valuation[w][x]

    def successors(self, w) -> tuple:
        return self._succ[w]

    def is_acyclic(self, worlds: Iterable | None = None) -> bool:
        return _acyclic(self.worlds if worlds is None else worlds, self.successors)


def _acyclic(worlds, succ) -> bool:
    nodes = set(worlds)
    state = {}

    for root in nodes:
        if root in state:
            continue
        state[root] = 1
        stack = [(root, iter(succ(root)))]
        while stack:
            w, it = stack[-1]
            for r in it:
                if r not in nodes:
                    continue
                if state.get(r) == 1:
                    return False
                if r not in state:
                    state[r] = 1
                    stack.append((r, iter(succ(r))))
                    break
            else:
                state[w] = 2
                stack.pop()
    return True


@dataclass(frozen=True, eq=False)
class ActionLabeling:
    actions: tuple
    labels: Mapping  # (w, w') -> frozenset of actions and EPS

    def __post_init__(self):
        object.__setattr__(self, "actions", tuple(self.actions))
        if EPS in self.actions:
            raise KripkeError(f"{EPS!r} is reserved and cannot be an action")
        labels = {}
        allowed = set(self.actions) | {EPS}
        for e, ls in self.labels.items():
            ls = frozenset(ls)
            if not ls:
                raise KripkeError(f"edge {e[0]} -> {e[1]} has no label")
            unknown = ls - allowed
            if unknown:
                raise UnknownActionError(f"edge {e[0]} -> {e[1]}: unknown action(s) {sorted(unknown)}")
            labels[tuple(e)] = ls
        object.__setattr__(self, "labels", labels)

    def __getitem__(self, edge) -> frozenset:
        return self.labels[edge]


@dataclass(frozen=True, eq=False)
class OpenKripke:
    k: Kripke
    entries: frozenset
    exits: frozenset

    def __post_init__(self):
        object.__setattr__(self, "entries", frozenset(self.entries))
        object.__setattr__(self, "exits", frozenset(self.exits))
        for name, ws in (("entry", self.entries), ("exit", self.exits)):
            if not ws:
                raise KripkeError(f"an open structure needs at least one {name} world")
            unknown = ws - set(self.k.worlds)
            if unknown:
                raise KripkeError(f"unknown {name} world(s) {sorted(unknown)}")

    @property
    def vars(self):
        return self.k.vars

    @property
    def domain(self):
        return self.k.domain


@dataclass(frozen=True, eq=False)
class PointedLabeledKripke:
    k: Kripke
    labeling: ActionLabeling
    initial: str

    def __post_init__(self):
        if self.initial not in self.k.worlds:
            raise KripkeError(f"initial world {self.initial} is not a world")
        if set(self.labeling.labels) != set(self.k.delta):
            raise KripkeError("the action labeling must label exactly the edges of the structure")

    @property
    def actions(self):
        return self.labeling.actions

    def labels(self, w, r) -> frozenset:
        return self.labeling.labels[(w, r)]

    def epsilon_cycle(self) -> list | None:
        """A reachable cycle using only ε-labeled edges, if any."""
        reach = _reachable([self.initial], self.k.successors)
        eps_succ = lambda w: [r for r in self.k.successors(w) if EPS in self.labels(w, r)]
        if _acyclic(reach, eps_succ):
            return None
        # recover one cycle for the message
        for w in self.k.worlds:
            if w not in reach:
                continue
            parent = {w: None}
            queue = deque([w])
            while queue:
                u = queue.popleft()
                for r in eps_succ(u):
                    if r == w:
                        cycle = [u]
                        while parent[cycle[-1]] is not None:
                            cycle.append(parent[cycle[-1]])
                        return cycle[::-1] + [w]
                    if r not in parent:
                        parent[r] = u
                        queue.append(r)
        return None

    def check_progress(self):
        """Warn when some reachable cycle carries no action at all."""
        cycle = self.epsilon_cycle()
        if cycle:
            warnings.warn(f"reachable cycle through {' -> '.join(cycle)} carries only {EPS} labels; "
                          "traces looping there never reach another action", EpsilonCycleWarning, stacklevel=2)
        return cycle


def _reachable(start, succ) -> set:
    seen = set(start)
    queue = deque(start)
    while queue:
        w = queue.popleft()
        for r in succ(w):
            if r not in seen:
                seen.add(r)
                queue.append(r)
    return seen


def paths(OK: OpenKripke, max_len: int) -> set[tuple]:
    """World sequences from an entry to an exit with at most ``max_len`` worlds."""
    if max_len < 1:
        raise ValueError("max_len counts worlds and must be at least 1")
    k = OK.k
    result = set()
    stack = [(w,) for w in OK.entries]
    while stack:
        p = stack.pop()
        if p[-1] in OK.exits:
            result.add(p)
        if len(p) < max_len:
            stack.extend(p + (r,) for r in k.successors(p[-1]))
    return result


def path_segment(k: Kripke, path: Sequence) -> UnzippedSegment:
    return unzip([k.valuation[w] for w in path], k.vars)


def generated_segments(OK: OpenKripke, max_len: int, mode: str = "product") -> set[UnzippedSegment]:
    """Stutter-reduced segments along entry-to-exit paths of at most ``max_len`` worlds.

    ``joint`` keeps each path's strings together; ``product`` combines per-variable
    strings of possibly different paths.
    """
    ps = paths(OK, max_len)
    joint = {stutter_reduce(path_segment(OK.k, p)) for p in ps}
    if mode == "joint":
        return joint
    if mode != "product":
        raise ValueError(f"mode must be 'joint' or 'product', got {mode!r}")
    per_var = [sorted({t[x] for t in joint}) for x in OK.vars]
    return {UnzippedSegment(dict(zip(OK.vars, combo))) for combo in itertools.product(*per_var)}


def block_automaton(OK: OpenKripke, x: str) -> Sfa:
    """Per-variable automaton reading the reduced ``x``-strings of entry-to-exit paths.

    Its states are worlds plus a start state; reading a value moves to the
    first world of a block carrying that value.
    """
    k = OK.k
    blocks = {}

    def block(w):
        if w not in blocks:
            val = k.value(w, x)
            blocks[w] = _reachable([w], lambda u: [r for r in k.successors(u) if k.value(r, x) == val])
        return blocks[w]

    transitions = [(sfa.START, (k.value(e, x),), e) for e in sorted(OK.entries)]
    finals = []
    seen = set(OK.entries)
    queue = deque(sorted(OK.entries))
    while queue:
        w = queue.popleft()
        val = k.value(w, x)
        b = block(w)
        if b & OK.exits:
            finals.append(w)
        for u in sorted(b):
            for r in k.successors(u):
                if k.value(r, x) != val:
                    transitions.append((w, (k.value(r, x),), r))
                    if r not in seen:
                        seen.add(r)
                        queue.append(r)
    return Sfa.build((x,), k.domain, transitions, initials=[sfa.START], finals=finals,
                     states=[sfa.START] + sorted(seen))


def to_sfa(OK: OpenKripke) -> Sfa:
    """Stutter-free automaton whose language is the product-mode segment set of ``OK``."""
    return sfa.async_product([block_automaton(OK, x) for x in OK.vars])
