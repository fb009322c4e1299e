"""Stutter-free automata over variable valuations with a termination token.

A letter is a tuple of tokens aligned with ``Sfa.vars``; each coordinate is a
domain value or ``#`` (the variable's string has ended).  The all-``#`` letter
is never a letter.  Segments are read by padding every variable string with
``#`` up to the longest one.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .core import TERM, Domain, HnamcError, UnzippedSegment, VarMismatchError

Letter = tuple  # tuple[str, ...]
START = "start"


class NotDeterministicError(HnamcError, ValueError):
    pass


class NotCompleteError(HnamcError, ValueError):
    pass


class NonInjectiveError(HnamcError, ValueError):
    pass


class VarOverlapError(HnamcError, ValueError):
    pass


class _Terminated:
    """Sentinel coordinate of a product state whose component has finished reading."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "⊤"

    def __reduce__(self):
        return (_Terminated, ())


TERMINATED = _Terminated()


def _key(state) -> str:
    return repr(state)


@dataclass(frozen=True, eq=False)
class Sfa:
    vars: tuple
    domain: Domain
    states: frozenset
    initials: frozenset
    finals: frozenset
    delta: Mapping = field(repr=False)  # state -> {letter: frozenset(states)}

    @classmethod
    def build(cls, vars: Sequence[str], domain: Domain, transitions: Iterable, initials: Iterable,
              finals: Iterable, states: Iterable = ()) -> "Sfa":
        """Assemble an automaton from ``(source, letter, target)`` triples.

        Letters may be tuples aligned with ``vars`` or mappings from variable to token.
        """
        vars = tuple(vars)
        delta: dict = {}
        all_states = dict.fromkeys(states)
        for q in initials:
            all_states.setdefault(q)
        for q in finals:
            all_states.setdefault(q)
        for q, letter, r in transitions:
            letter = to_letter(letter, vars)
            delta.setdefault(q, {}).setdefault(letter, set()).add(r)
            all_states.setdefault(q)
            all_states.setdefault(r)
        frozen = {q: {v: frozenset(ts) for v, ts in sorted(m.items())} for q, m in delta.items()}
        return cls(vars, domain, frozenset(all_states), frozenset(initials), frozenset(finals), frozen)

    def successors(self, q, letter) -> frozenset:
        return self.delta.get(q, {}).get(letter, frozenset())

    def out(self, q) -> Mapping:
        return self.delta.get(q, {})

    def transitions(self):
        for q, m in self.delta.items():
            for v, targets in m.items():
                for r in targets:
                    yield q, v, r

    @property
    def num_transitions(self) -> int:
        return sum(len(ts) for m in self.delta.values() for ts in m.values())

    def __len__(self):
        return len(self.states)

    def __repr__(self):
        return (f"Sfa(vars={self.vars}, states={len(self.states)}, initials={len(self.initials)}, "
                f"finals={len(self.finals)}, transitions={self.num_transitions})")


def to_letter(letter, vars: Sequence[str]) -> Letter:
    if isinstance(letter, Mapping):
        missing = [x for x in vars if x not in letter]
        if missing:
            raise VarMismatchError(f"letter lacks coordinates for {', '.join(missing)}")
        return tuple(str(letter[x]) for x in vars)
    letter = tuple(letter)
    if len(letter) != len(vars):
        raise VarMismatchError(f"letter {letter} has {len(letter)} coordinates, expected {len(vars)}")
    return letter


def is_all_term(letter: Letter) -> bool:
    return all(t == TERM for t in letter)


def step_ok(prev: Letter | None, letter: Letter) -> bool:
    """May ``letter`` follow ``prev`` in a stutter-free word?  ``prev=None`` means word start."""
    if prev is None:
        return True
    for a, b in zip(prev, letter):
        if a == TERM:
            if b != TERM:
                return False
        elif a == b:
            return False
    return True


def all_letters(n: int, domain: Domain) -> list[Letter]:
    choices = list(domain.values) + [TERM]
    return sorted(v for v in itertools.product(choices, repeat=n) if not is_all_term(v))


def next_letters(prev: Letter | None, n: int, domain: Domain) -> list[Letter]:
    """Every letter allowed after ``prev`` (sorted)."""
    if prev is None:
        return all_letters(n, domain)
    choices = []
    for a in prev:
        if a == TERM:
            choices.append((TERM,))
        else:
            choices.append(tuple(v for v in domain.values if v != a) + (TERM,))
    return sorted(v for v in itertools.product(*choices) if not is_all_term(v))


# --- words and segments -----------------------------------------------------

def word_of(tau: UnzippedSegment, vars: Sequence[str]) -> list[Letter]:
    strings = [tau[x] for x in vars]
    length = max((len(s) for s in strings), default=0)
    return [tuple(s[i] if i < len(s) else TERM for s in strings) for i in range(length)]


def segment_of(word: Sequence[Letter], vars: Sequence[str]) -> UnzippedSegment:
    return UnzippedSegment({x: tuple(v[i] for v in word if v[i] != TERM) for i, x in enumerate(vars)})


def _check_vars(A: Sfa, tau: UnzippedSegment):
    if set(tau.vars) != set(A.vars):
        raise VarMismatchError(f"segment variables {tau.vars} do not match automaton variables {A.vars}")


def run_word(A: Sfa, word: Iterable[Letter]) -> frozenset:
    current = set(A.initials)
    for v in word:
        current = {r for q in current for r in A.successors(q, v)}
        if not current:
            break
    return frozenset(current)


def member(A: Sfa, tau: UnzippedSegment) -> bool:
    """Is ``tau`` (stutter-free) in the language of ``A`` with ``#`` stripped?"""
    _check_vars(A, tau)
    return bool(run_word(A, word_of(tau, A.vars)) & A.finals)


def enumerate_language(A: Sfa, max_len: int) -> set[UnzippedSegment]:
    """All accepted segments whose strings are no longer than ``max_len``."""
    if max_len < 0:
        raise ValueError("max_len must be non-negative")
    result = set()
    frontier = {(): frozenset(A.initials)}
    for depth in range(max_len + 1):
        nxt = {}
        for word, qs in frontier.items():
            if qs & A.finals:
                result.add(segment_of(word, A.vars))
            if depth == max_len:
                continue
            by_letter: dict = {}
            for q in qs:
                for v, targets in A.out(q).items():
                    by_letter.setdefault(v, set()).update(targets)
            for v, targets in by_letter.items():
                nxt[word + (v,)] = frozenset(targets)
        frontier = nxt
    return result


# --- structural checks ------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    kind: str  # "stutter" | "termination" | "letter" | "structure"
    state: object
    var: str | None
    detail: str

    def __str__(self):
        where = f"state {self.state!r}" + (f", variable {self.var}" if self.var else "")
        return f"{self.kind} violation at {where}: {self.detail}"


def in_out_sets(A: Sfa):
    """``(In, Out)`` maps from ``(state, variable)`` to the set of tokens seen."""
    ins: dict = {}
    outs: dict = {}
    for q, v, r in A.transitions():
        for x, tok in zip(A.vars, v):
            outs.setdefault((q, x), set()).add(tok)
            ins.setdefault((r, x), set()).add(tok)
    return ins, outs


def validate(A: Sfa) -> list[Violation]:
    """Every breach of stutter-freedom, termination or letter well-formedness."""
    problems = []
    allowed = set(A.domain.values) | {TERM}
    for q in sorted(A.initials - A.states, key=_key):
        problems.append(Violation("structure", q, None, "initial state is not a state"))
    for q in sorted(A.finals - A.states, key=_key):
        problems.append(Violation("structure", q, None, "final state is not a state"))
    for q, v, r in A.transitions():
        if len(v) != len(A.vars) or any(t not in allowed for t in v):
            problems.append(Violation("letter", q, None, f"malformed letter {v}"))
        elif is_all_term(v):
            problems.append(Violation("letter", q, None, "transition labeled with the all-# letter"))
        if r not in A.states or q not in A.states:
            problems.append(Violation("structure", q, None, f"transition to unknown state {r!r}"))
    ins, outs = in_out_sets(A)
    for q in sorted(A.states, key=_key):
        for x in A.vars:
            i = ins.get((q, x), set())
            o = outs.get((q, x), set())
            both = (i & o) - {TERM}
            if both:
                problems.append(Violation("stutter", q, x, f"value(s) {sorted(both)} both enter and leave"))
            # a finished variable must stay finished; a dead end is fine
            if TERM in i and o - {TERM}:
                problems.append(Violation("termination", q, x,
                                          f"# enters but {sorted(o - {TERM})} leave"))
    return problems


def is_valid(A: Sfa) -> bool:
    return not validate(A)


def is_deterministic(A: Sfa) -> bool:
    return len(A.initials) <= 1 and all(len(ts) <= 1 for m in A.delta.values() for ts in m.values())


def is_complete(A: Sfa) -> bool:
    """Deterministic, and every stutter-free word has a run."""
    if not is_deterministic(A) or len(A.initials) != 1:
        return False
    (q0,) = A.initials
    seen = {(q0, None)}
    queue = deque(seen)
    n = len(A.vars)
    while queue:
        q, last = queue.popleft()
        for v in next_letters(last, n, A.domain):
            targets = A.successors(q, v)
            if not targets:
                return False
            (r,) = targets
            if (r, v) not in seen:
                seen.add((r, v))
                queue.append((r, v))
    return True


# --- generic exploration ----------------------------------------------------

def explore(vars, domain, initials: Iterable, succ: Callable, is_final: Callable) -> Sfa:
    """Build the reachable part of an implicitly given automaton.

    ``succ(state)`` yields ``(letter, target)`` pairs.
    """
    initials = list(dict.fromkeys(initials))
    seen = dict.fromkeys(initials)
    queue = deque(initials)
    delta: dict = {}
    while queue:
        q = queue.popleft()
        for v, r in succ(q):
            delta.setdefault(q, {}).setdefault(v, set()).add(r)
            if r not in seen:
                seen[r] = None
                queue.append(r)
    frozen = {q: {v: frozenset(ts) for v, ts in sorted(m.items())} for q, m in delta.items()}
    finals = frozenset(q for q in seen if is_final(q))
    return Sfa(tuple(vars), domain, frozenset(seen), frozenset(initials), finals, frozen)


def trim(A: Sfa) -> Sfa:
    """Drop states that are unreachable or cannot reach a final state."""
    reach = set(A.initials)
    queue = deque(A.initials)
    while queue:
        q = queue.popleft()
        for ts in A.out(q).values():
            for r in ts:
                if r not in reach:
                    reach.add(r)
                    queue.append(r)
    back: dict = {}
    for q, _, r in A.transitions():
        back.setdefault(r, set()).add(q)
    useful = set(A.finals & reach)
    queue = deque(useful)
    while queue:
        r = queue.popleft()
        for q in back.get(r, ()):
            if q in reach and q not in useful:
                useful.add(q)
                queue.append(q)
    delta = {}
    for q in useful:
        m = {}
        for v, ts in A.out(q).items():
            keep = ts & useful
            if keep:
                m[v] = frozenset(keep)
        if m:
            delta[q] = m
    return Sfa(A.vars, A.domain, frozenset(useful), A.initials & useful, A.finals & useful, delta)


def _same_alphabet(A: Sfa, B: Sfa):
    if A.vars != B.vars or A.domain != B.domain:
        raise VarMismatchError(f"automata over different alphabets: {A.vars} vs {B.vars}")


# --- closure operations -----------------------------------------------------

def union(A: Sfa, B: Sfa) -> Sfa:
    _same_alphabet(A, B)
    transitions = [((0, q), v, (0, r)) for q, v, r in A.transitions()]
    transitions += [((1, q), v, (1, r)) for q, v, r in B.transitions()]
    return Sfa.build(
        A.vars, A.domain, transitions,
        initials=[(0, q) for q in A.initials] + [(1, q) for q in B.initials],
        finals=[(0, q) for q in A.finals] + [(1, q) for q in B.finals],
        states=[(0, q) for q in A.states] + [(1, q) for q in B.states],
    )


def intersection(A: Sfa, B: Sfa) -> Sfa:
    """Synchronous product on identical letters, reachable part only."""
    _same_alphabet(A, B)

    def succ(state):
        p, q = state
        bout = B.out(q)
        for v, ps in A.out(p).items():
            qs = bout.get(v)
            if qs:
                for p2 in ps:
                    for q2 in qs:
                        yield v, (p2, q2)

    initials = [(p, q) for p in sorted(A.initials, key=_key) for q in sorted(B.initials, key=_key)]
    return explore(A.vars, A.domain, initials, succ,
                   lambda s: s[0] in A.finals and s[1] in B.finals)


def determinize(A: Sfa) -> Sfa:
    """Subset construction over reachable subsets."""

    def succ(S):
        by_letter: dict = {}
        for q in S:
            for v, ts in A.out(q).items():
                by_letter.setdefault(v, set()).update(ts)
        for v in sorted(by_letter):
            yield v, frozenset(by_letter[v])

    return explore(A.vars, A.domain, [frozenset(A.initials)], succ, lambda S: bool(S & A.finals))


def complete(A: Sfa) -> Sfa:
    """Give every stutter-free word exactly one run without changing the language.

    States pair an original state with the last letter read.  When the original
    automaton has no move, the run drops into a non-accepting copy of the
    universal automaton, tracked by the last letter alone.
    """
    if not is_deterministic(A):
        raise NotDeterministicError("complete() needs a deterministic automaton; determinize first")
    n = len(A.vars)

    def succ(state):
        tag = state[0]
        last = state[-1]
        for v in next_letters(last, n, A.domain):
            if tag == "q":
                targets = A.successors(state[1], v)
                if targets:
                    (r,) = targets
                    yield v, ("q", r, v)
                    continue
            yield v, ("sink", v)

    if A.initials:
        (q0,) = A.initials
        start = ("q", q0, None)
    else:
        start = ("sink", None)
    return explore(A.vars, A.domain, [start], succ, lambda s: s[0] == "q" and s[1] in A.finals)


def complement(A: Sfa) -> Sfa:
    """Swap final and non-final states of a deterministic complete automaton."""
    if not is_complete(A):
        raise NotCompleteError("complement() needs a deterministic, complete automaton; run complete() first")
    return Sfa(A.vars, A.domain, A.states, A.initials, A.states - A.finals, A.delta)


def difference(A: Sfa, B: Sfa) -> Sfa:
    """Words of ``A`` not accepted by ``B``.

    Equivalent to ``intersection(A, complement(complete(determinize(B))))``;
    the determinized ``B`` is built on the fly next to ``A``.
    """
    _same_alphabet(A, B)

    def succ(state):
        p, S = state
        for v, ps in A.out(p).items():
            S2 = frozenset(r for q in S for r in B.successors(q, v))
            for p2 in ps:
                yield v, (p2, S2)

    start = frozenset(B.initials)
    return explore(A.vars, A.domain, [(p, start) for p in sorted(A.initials, key=_key)], succ,
                   lambda s: s[0] in A.finals and not (s[1] & B.finals))


def witness(A: Sfa) -> UnzippedSegment | None:
    """A shortest accepted segment, or ``None`` when the language is empty.

    Breadth-first over states; letters are tried in lexicographic order.
    """
    parent: dict = {}
    queue = deque()
    for q in sorted(A.initials, key=_key):
        if q not in parent:
            parent[q] = None
            queue.append(q)
    while queue:
        q = queue.popleft()
        if q in A.finals:
            word = []
            while parent[q] is not None:
                q, v = parent[q]
                word.append(v)
            return segment_of(word[::-1], A.vars)
        for v, ts in A.out(q).items():
            for r in sorted(ts, key=_key):
                if r not in parent:
                    parent[r] = (q, v)
                    queue.append(r)
    return None


def is_empty(A: Sfa) -> bool:
    return witness(A) is None


# --- renaming and products --------------------------------------------------

def rename_vars(A: Sfa, mapping: Mapping[str, str]) -> Sfa:
    new = tuple(mapping.get(x, x) for x in A.vars)
    if len(set(new)) != len(new):
        raise NonInjectiveError(f"renaming {dict(mapping)} merges variables")
    return Sfa(new, A.domain, A.states, A.initials, A.finals, A.delta)


def async_product(components: Sequence[Sfa]) -> Sfa:
    """Run components with disjoint variables side by side.

    A component whose strings have all ended reads all-``#`` restrictions,
    which it may only do from a final state, and moves to a terminated
    sentinel.  A segment is accepted iff each component accepts its restriction.
    """
    components = list(components)
    if not components:
        raise ValueError("async_product needs at least one component")
    seen_vars = set()
    for C in components:
        if seen_vars & set(C.vars):
            raise VarOverlapError(f"components share variables {sorted(seen_vars & set(C.vars))}")
        if C.domain != components[0].domain:
            raise VarMismatchError("components use different domains")
        seen_vars |= set(C.vars)
    vars = tuple(x for C in components for x in C.vars)
    pads = [(TERM,) * len(C.vars) for C in components]

    def moves(i, q):
        C = components[i]
        opts = []
        if q is not TERMINATED:
            for v, ts in C.out(q).items():
                for r in sorted(ts, key=_key):
                    opts.append((v, r))
        if q is TERMINATED or q in C.finals:
            opts.append((pads[i], TERMINATED))
        return opts

    def succ(state):
        options = [moves(i, q) for i, q in enumerate(state)]
        for combo in itertools.product(*options):
            letter = tuple(t for v, _ in combo for t in v)
            if is_all_term(letter):
                continue
            yield letter, tuple(r for _, r in combo)

    initials = itertools.product(*[sorted(C.initials, key=_key) for C in components])

    def final(state):
        return all(q is TERMINATED or q in C.finals for q, C in zip(state, components))

    return explore(vars, components[0].domain, list(initials), succ, final)


def trace_var_name(x: str, pi: str) -> str:
    return f"{x}_{pi}"


def self_compose(A: Sfa, trace_vars: Sequence[str]) -> Sfa:
    """Product of one renamed copy of ``A`` per trace variable (``x`` becomes ``x_pi``)."""
    trace_vars = list(trace_vars)
    if not trace_vars:
        raise ValueError("self_compose needs at least one trace variable")
    copies = [rename_vars(A, {x: trace_var_name(x, pi) for x in A.vars}) for pi in trace_vars]
    return async_product(copies)


# --- canonical automata -----------------------------------------------------

def universal(vars: Sequence[str], domain: Domain) -> Sfa:
    """Accepts every stutter-free segment.  States are letters plus a start state."""
    vars = tuple(vars)
    letters = all_letters(len(vars), domain)
    transitions = [(START, v, v) for v in letters]
    for q in letters:
        transitions += [(q, v, v) for v in next_letters(q, len(vars), domain)]
    states = [START] + letters
    return Sfa.build(vars, domain, transitions, initials=[START], finals=states, states=states)


def empty_automaton(vars: Sequence[str], domain: Domain) -> Sfa:
    return Sfa.build(vars, domain, [], initials=[START], finals=[], states=[START])


def reorder_vars(A: Sfa, order: Sequence[str]) -> Sfa:
    """Same automaton with letter coordinates permuted to ``order``."""
    order = tuple(order)
    if sorted(order) != sorted(A.vars):
        raise VarMismatchError(f"{order} is not a permutation of {A.vars}")
    if order == A.vars:
        return A
    perm = [A.vars.index(x) for x in order]
    delta = {q: {tuple(v[i] for i in perm): ts for v, ts in m.items()} for q, m in A.delta.items()}
    delta = {q: dict(sorted(m.items())) for q, m in delta.items()}
    return Sfa(order, A.domain, A.states, A.initials, A.finals, delta)


def project(A: Sfa, keep: Iterable[str]) -> Sfa:
    """Existentially hide every variable outside ``keep``.

    Letters whose kept part is all ``#`` become silent moves.  In a valid
    automaton these only occur once every kept string has ended, so they are
    folded into the final states.
    """
    keep = set(keep)
    idx = [i for i, x in enumerate(A.vars) if x in keep]
    vars = tuple(A.vars[i] for i in idx)
    silent: dict = {}
    loud: dict = {}
    for q, v, r in A.transitions():
        w = tuple(v[i] for i in idx)
        if is_all_term(w):
            silent.setdefault(q, set()).add(r)
        else:
            loud.setdefault(q, {}).setdefault(w, set()).add(r)

    closures = {}

    def closure(q):
        if q not in closures:
            seen = {q}
            stack = [q]
            while stack:
                p = stack.pop()
                for r in silent.get(p, ()):
                    if r not in seen:
                        seen.add(r)
                        stack.append(r)
            closures[q] = seen
        return closures[q]

    transitions = []
    finals = []
    for q in A.states:
        reach = closure(q)
        if reach & A.finals:
            finals.append(q)
        for p in reach:
            for w, ts in loud.get(p, {}).items():
                transitions += [(q, w, r) for r in ts]
    return Sfa.build(vars, A.domain, transitions, A.initials, finals, A.states)
