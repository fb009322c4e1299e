"""Value types for finite trace segments.

Value strings are tuples of opaque value tokens.  Plain ``str`` inputs are
accepted everywhere a string is expected and are split into one token per
character, so ``"0110"`` and ``("0", "1", "1", "0")`` denote the same string.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

TERM = "#"
EPS = "eps"

Token = str
ValueString = tuple  # tuple[Token, ...]


class HnamcError(Exception):
    """Base class for all errors raised by this package."""


class VarMismatchError(HnamcError, ValueError):
    pass


class UnknownActionError(HnamcError, ValueError):
    pass


@dataclass(frozen=True)
class Domain:
    """Finite value domain; the termination token is never a member."""

    values: tuple[Token, ...]
    term: Token = TERM

    def __post_init__(self):
        values = tuple(sorted(set(self.values)))
        if len(values) != len(self.values):
            raise ValueError("duplicate value tokens in domain")
        if not values:
            raise ValueError("domain must contain at least one value")
        if self.term in values:
            raise ValueError(f"termination token {self.term!r} cannot be a domain value")
        object.__setattr__(self, "values", values)

    def __contains__(self, token) -> bool:
        return token in self.values

    def __iter__(self) -> Iterator[Token]:
        return iter(self.values)

    def __len__(self) -> int:
        return len(self.values)


def as_string(s) -> ValueString:
    if isinstance(s, str):
        return tuple(s)
    return tuple(s)


def stutter_reduce_string(s):
    """Collapse runs of repeated tokens: ``"0011022"`` becomes ``"0102"``.

    Returns the same kind of sequence it was given (``str`` or ``tuple``).
    """
    out = []
    for tok in s:
        if not out or out[-1] != tok:
            out.append(tok)
    return "".join(out) if isinstance(s, str) else tuple(out)


def is_stutter_free(s) -> bool:
    return all(a != b for a, b in zip(s, s[1:]))


def sr_prefix(s, t) -> bool:
    """Stutter-reduced prefixing: is the reduction of ``s`` a prefix of that of ``t``?

    The empty string relates to everything; nothing non-empty relates to the
    empty string.
    """
    rs = as_string(stutter_reduce_string(s))
    rt = as_string(stutter_reduce_string(t))
    return rt[: len(rs)] == rs


@dataclass(frozen=True)
class UnzippedSegment:
    """One finite value string per variable; lengths may differ."""

    items: tuple  # tuple[tuple[str, ValueString], ...] sorted by variable

    def __init__(self, strings: Mapping[str, object] | Iterable = ()):
        if isinstance(strings, Mapping):
            pairs = strings.items()
        else:
            pairs = strings
        norm = tuple(sorted((str(k), as_string(v)) for k, v in pairs))
        if len({k for k, _ in norm}) != len(norm):
            raise ValueError("duplicate variable in segment")
        object.__setattr__(self, "items", norm)

    @property
    def vars(self) -> tuple[str, ...]:
        return tuple(k for k, _ in self.items)

    def __getitem__(self, var: str) -> ValueString:
        for k, v in self.items:
            if k == var:
                return v
        raise KeyError(var)

    def get(self, var, default=None):
        try:
            return self[var]
        except KeyError:
            return default

    def as_dict(self) -> dict[str, ValueString]:
        return dict(self.items)

    @property
    def max_len(self) -> int:
        return max((len(v) for _, v in self.items), default=0)

    def is_stutter_free(self) -> bool:
        return all(is_stutter_free(v) for _, v in self.items)

    def restrict(self, names: Iterable[str]) -> "UnzippedSegment":
        keep = set(names)
        return UnzippedSegment({k: v for k, v in self.items if k in keep})

    def rename(self, mapping: Mapping[str, str]) -> "UnzippedSegment":
        return UnzippedSegment({mapping.get(k, k): v for k, v in self.items})

    def format(self) -> str:
        """Render as ``x=010 y=01``; multi-character tokens are comma-joined."""
        parts = []
        for k, v in self.items:
            if all(len(t) == 1 for t in v):
                parts.append(f"{k}={''.join(v)}")
            else:
                parts.append(f"{k}={','.join(v)}")
        return " ".join(parts)

    def __repr__(self):
        return f"UnzippedSegment({self.format()!r})"

    def __lt__(self, other):
        return self.items < other.items


def parse_segment(text: str) -> UnzippedSegment:
    """Inverse of :meth:`UnzippedSegment.format`.  ``x=`` denotes the empty string."""
    strings = {}
    for part in text.split():
        if "=" not in part:
            raise ValueError(f"expected VAR=VALUES, got {part!r}")
        name, _, value = part.partition("=")
        strings[name] = tuple(value.split(",")) if "," in value else tuple(value)
    return UnzippedSegment(strings)


def stutter_reduce(tau: UnzippedSegment) -> UnzippedSegment:
    return UnzippedSegment({k: stutter_reduce_string(v) for k, v in tau.items})


# A valuation maps every variable to a domain value; kept as a plain dict-like
# frozen mapping so that zipped segments and traces are hashable.
@dataclass(frozen=True)
class Valuation:
    items: tuple

    def __init__(self, assignment: Mapping[str, Token] | Iterable = ()):
        pairs = assignment.items() if isinstance(assignment, Mapping) else assignment
        object.__setattr__(self, "items", tuple(sorted((str(k), str(v)) for k, v in pairs)))

    def __getitem__(self, var):
        for k, v in self.items:
            if k == var:
                return v
        raise KeyError(var)

    @property
    def vars(self):
        return tuple(k for k, _ in self.items)

    def as_dict(self):
        return dict(self.items)

    def __repr__(self):
        return "(" + ",".join(f"{k}={v}" for k, v in self.items) + ")"

    def __lt__(self, other):
        return self.items < other.items


ZippedSegment = tuple  # tuple[Valuation, ...]


def unzip(tau: Sequence[Valuation], variables: Sequence[str] | None = None) -> UnzippedSegment:
    """Turn a sequence of valuations into one value string per variable.

    ``variables`` is needed to give the empty segment its variable set.
    """
    if variables is None:
        if not tau:
            raise ValueError("cannot infer variables of an empty segment")
        variables = tau[0].vars
    return UnzippedSegment({x: tuple(v[x] for v in tau) for x in variables})


def stutter_free_strings(domain: Iterable[Token], max_len: int) -> list[ValueString]:
    """All stutter-free strings over ``domain`` of length at most ``max_len``."""
    values = sorted(domain)
    out = [()]
    frontier = [()]
    for _ in range(max_len):
        nxt = []
        for s in frontier:
            for v in values:
                if not s or s[-1] != v:
                    nxt.append(s + (v,))
        out.extend(nxt)
        frontier = nxt
    return out


def stutter_free_universe(variables: Sequence[str], domain: Iterable[Token], max_len: int) -> set[UnzippedSegment]:
    """Every stutter-free segment over ``variables`` with strings of length <= ``max_len``."""
    strings = stutter_free_strings(domain, max_len)
    result = [{}]
    for x in variables:
        result = [dict(d, **{x: s}) for d in result for s in strings]
    return {UnzippedSegment(d) for d in result}
