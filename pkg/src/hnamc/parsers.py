"""Text formats for formulas, Kripke structures, hypernode automata and stutter-free automata.

All line formats share the same lexical rules: one declaration per line,
``#`` at the start of a token opens a comment, names are
``[A-Za-z_][A-Za-z0-9_]*``.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field

from . import sfa as sfa_mod
from .core import EPS, TERM, Domain, HnamcError
from .hna import Hna
from .kripke import ActionLabeling, Kripke, KripkeError, OpenKripke, PointedLabeledKripke
from .logic import And, Atom, Exists, Forall, Formula, Not, Or
from .sfa import Sfa

IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
VALUE = re.compile(r"[A-Za-z0-9_]+\Z")
KEYWORDS = {"forall", "exists"}


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    start: int  # byte offsets into the source, end exclusive
    end: int

    def __str__(self):
        return f"{self.line}:{self.column}"


class ParseError(HnamcError, ValueError):
    def __init__(self, message: str, span: SourceSpan | None = None, source: str | None = None):
        self.message = message
        self.span = span
        self.source = source
        where = ""
        if span is not None:
            where = f"{source + ':' if source else ''}{span.line}:{span.column}: "
        super().__init__(where + message)


def _line_starts(text: str) -> list[int]:
    starts = [0]
    for m in re.finditer(r"\n", text):
        starts.append(m.end())
    return starts


class _Source:
    """Maps (line, character column) pairs back to byte offsets."""

    def __init__(self, text: str, name: str | None = None):
        self.text = text
        self.name = name
        self.lines = text.split("\n")
        self.starts = _line_starts(text)

    def span(self, lineno: int, col: int, length: int) -> SourceSpan:
        base = self.starts[lineno - 1]
        begin = len(self.text[:base + col].encode())
        end = len(self.text[:base + col + max(length, 1)].encode())
        return SourceSpan(lineno, col + 1, begin, end)

    def error(self, msg, lineno, col, length=1):
        return ParseError(msg, self.span(lineno, col, length), self.name)


@dataclass
class _Tok:
    text: str
    col: int  # 0-based column in the line


_COMMENT = re.compile(r"(^|\s)#.*$")
_TOKEN = re.compile(r'"[^"]*"|:|[^\s:"]+|"')


def _lines(src: _Source):
    """Yield ``(lineno, tokens)`` for non-empty lines with comments removed."""
    for i, raw in enumerate(src.lines, start=1):
        line = raw.rstrip("\r")
        m = _COMMENT.search(line)
        if m:
            line = line[: m.start()]
        toks = [_Tok(m.group(), m.start()) for m in _TOKEN.finditer(line)]
        if toks:
            yield i, toks


def _name(src, lineno, tok, what="name"):
    if not IDENT.match(tok.text) or tok.text in KEYWORDS:
        raise src.error(f"invalid {what} {tok.text!r}", lineno, tok.col, len(tok.text))
    return tok.text


def _split_colon(src, lineno, toks, min_before):
    idx = next((i for i, t in enumerate(toks) if t.text == ":"), None)
    if idx is None:
        return toks, None
    if idx < min_before:
        raise src.error("unexpected ':'", lineno, toks[idx].col)
    return toks[:idx], toks[idx + 1:]


# --- formulas ----------------------------------------------------------------

_FTOKEN = re.compile(r"\s*(?:(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<op><~|[()!&|.]))")


class _FormulaParser:
    def __init__(self, text, src: _Source | None = None, lineno=1, col0=0):
        self.text = text
        self.src = src or _Source(text)
        self.lineno = lineno
        self.col0 = col0
        self.toks = []
        pos = 0
        while True:
            m = _FTOKEN.match(text, pos)
            if not m or m.end() == pos:
                rest = text[pos:]
                if rest.strip():
                    col = pos + len(rest) - len(rest.lstrip())
                    raise self.err(f"unexpected character {text[col]!r}", col)
                break
            kind = "ident" if m.group("ident") else "op"
            val = m.group(kind)
            start = m.start(kind)
            if kind == "ident" and val in KEYWORDS:
                kind = "kw"
            self.toks.append((kind, val, start))
            pos = m.end()
        self.i = 0

    def err(self, msg, col, length=1):
        return self.src.error(msg, self.lineno, self.col0 + col, length)

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else ("eof", "", len(self.text))

    def take(self, kind=None, value=None, what=None):
        tok = self.peek()
        if (kind and tok[0] != kind) or (value and tok[1] != value):
            found = "end of input" if tok[0] == "eof" else repr(tok[1])
            raise self.err(f"expected {what or value or kind}, found {found}", tok[2], max(len(tok[1]), 1))
        self.i += 1
        return tok

    def parse(self) -> Formula:
        f = self.formula()
        tok = self.peek()
        if tok[0] != "eof":
            raise self.err(f"unexpected {tok[1]!r}", tok[2], len(tok[1]))
        return f

    def formula(self):
        if self.peek()[0] == "kw":
            return self.quantifier(self.formula)
        return self.disj()

    def quantifier(self, body):
        kw = self.take("kw")[1]
        var = self.take("ident", what="trace variable")[1]
        self.take("op", ".")
        inner = body()
        return Exists(var, inner) if kw == "exists" else Forall(var, inner)

    def disj(self):
        f = self.conj()
        while self.peek()[1] == "|":
            self.i += 1
            f = Or(f, self.conj())
        return f

    def conj(self):
        f = self.unary()
        while self.peek()[1] == "&":
            self.i += 1
            f = And(f, self.unary())
        return f

    def unary(self):
        kind, val, pos = self.peek()
        if val == "!" and kind == "op":
            self.i += 1
            return Not(self.unary())
        if val == "(" and kind == "op":
            self.i += 1
            f = self.formula()
            self.take("op", ")")
            return f
        if kind == "kw":
            # a quantifier inside a connective still extends as far right as possible
            return self.quantifier(self.formula)
        if kind == "ident":
            return self.atom()
        found = "end of input" if kind == "eof" else repr(val)
        raise self.err(f"expected a formula, found {found}", pos, max(len(val), 1))

    def atom(self):
        x = self.take("ident")[1]
        self.take("op", "(")
        p = self.take("ident", what="trace variable")[1]
        self.take("op", ")")
        self.take("op", "<~")
        y = self.take("ident", what="variable")[1]
        self.take("op", "(")
        q = self.take("ident", what="trace variable")[1]
        self.take("op", ")")
        return Atom(x, p, y, q)


def parse_formula(text: str) -> Formula:
    """Parse ``forall p. forall q. (y(p) <~ y(q) | y(q) <~ y(p))`` style formulas."""
    return _FormulaParser(text.replace("\r\n", "\n")).parse()


def _formula_in_line(src, lineno, tok) -> Formula:
    return _FormulaParser(tok.text[1:-1], src, lineno, tok.col + 1).parse()


def format_formula(phi: Formula) -> str:
    return str(phi)


# --- Kripke structures ----------------------------------------------------------

@dataclass(eq=False)
class KripkeFile:
    """Everything a ``.kripke`` file declares; optional parts may be missing."""

    kripke: Kripke
    labeling: ActionLabeling
    has_actions: bool = False
    initial: str | None = None
    entries: frozenset = frozenset()
    exits: frozenset = frozenset()
    edge_order: list = field(default_factory=list)

    def open(self) -> OpenKripke:
        if not self.entries or not self.exits:
            raise KripkeError("the structure needs `in` and `out` declarations")
        return OpenKripke(self.kripke, self.entries, self.exits)

    def pointed(self) -> PointedLabeledKripke:
        if self.initial is None:
            raise KripkeError("the structure needs an `init` declaration")
        if not self.has_actions:
            raise KripkeError("the structure needs an `actions` declaration")
        return PointedLabeledKripke(self.kripke, self.labeling, self.initial)


def parse_kripke(text: str, name: str | None = None) -> KripkeFile:
    src = _Source(text, name)
    domain = vars = None
    actions = None
    worlds: dict = {}
    world_tok: dict = {}
    edges: dict = {}
    edge_order = []
    initial = None
    entries, exits = [], []
    pending = []  # world references checked once all worlds are known

    for lineno, toks in _lines(src):
        head = toks[0]
        args = toks[1:]
        kw = head.text
        if kw == "domain":
            if domain is not None:
                raise src.error("duplicate domain declaration", lineno, head.col, len(kw))
            for t in args:
                if not VALUE.match(t.text):
                    raise src.error(f"invalid value token {t.text!r}", lineno, t.col, len(t.text))
            try:
                domain = Domain(tuple(t.text for t in args))
            except ValueError as e:
                raise src.error(str(e), lineno, head.col, len(kw)) from None
        elif kw == "vars":
            if vars is not None:
                raise src.error("duplicate vars declaration", lineno, head.col, len(kw))
            vars = [_name(src, lineno, t, "variable") for t in args]
            if not vars or len(set(vars)) != len(vars):
                raise src.error("vars must list distinct variables", lineno, head.col, len(kw))
        elif kw == "actions":
            if actions is not None:
                raise src.error("duplicate actions declaration", lineno, head.col, len(kw))
            actions = []
            for t in args:
                a = _name(src, lineno, t, "action")
                if a == EPS:
                    raise src.error(f"{EPS} is reserved", lineno, t.col, len(a))
                if a in actions:
                    raise src.error(f"duplicate action {a}", lineno, t.col, len(a))
                actions.append(a)
        elif kw == "world":
            if domain is None or vars is None:
                raise src.error("declare domain and vars before worlds", lineno, head.col, len(kw))
            if not args:
                raise src.error("world needs a name", lineno, head.col, len(kw))
            w = _name(src, lineno, args[0], "world name")
            if w in worlds:
                raise src.error(f"duplicate world {w}", lineno, args[0].col, len(w))
            val = {}
            for t in args[1:]:
                var, eq, value = t.text.partition("=")
                if not eq or var not in vars:
                    raise src.error(f"expected VAR=VALUE with a declared variable, got {t.text!r}",
                                    lineno, t.col, len(t.text))
                if var in val:
                    raise src.error(f"variable {var} assigned twice", lineno, t.col, len(t.text))
                if value not in domain:
                    raise src.error(f"value {value!r} is not in the domain", lineno,
                                    t.col + len(var) + 1, len(value))
                val[var] = value
            missing = [x for x in vars if x not in val]
            if missing:
                raise src.error(f"world {w} lacks a value for {', '.join(missing)}", lineno,
                                args[0].col, len(w))
            worlds[w] = val
            world_tok[w] = (lineno, args[0])
        elif kw == "edge":
            before, labels = _split_colon(src, lineno, args, 2)
            if len(before) != 2:
                raise src.error("edge needs exactly two worlds", lineno, head.col, len(kw))
            a, b = before[0].text, before[1].text
            pending += [(lineno, before[0]), (lineno, before[1])]
            if labels is None:
                ls = [EPS]
            else:
                if not labels:
                    raise src.error("empty label list", lineno, head.col, len(kw))
                ls = []
                for t in labels:
                    lab = t.text
                    if lab != EPS and (actions is None or lab not in actions):
                        raise src.error(f"unknown action {lab!r}", lineno, t.col, len(lab))
                    ls.append(lab)
            if (a, b) not in edges:
                edges[(a, b)] = set()
                edge_order.append((a, b))
            edges[(a, b)].update(ls)
        elif kw == "init":
            if len(args) != 1:
                raise src.error("init takes one world", lineno, head.col, len(kw))
            if initial is not None:
                raise src.error("duplicate init declaration", lineno, args[0].col, len(args[0].text))
            initial = args[0].text
            pending.append((lineno, args[0]))
        elif kw in ("in", "out"):
            if not args:
                raise src.error(f"{kw} needs at least one world", lineno, head.col, len(kw))
            (entries if kw == "in" else exits).extend(t.text for t in args)
            pending += [(lineno, t) for t in args]
        else:
            raise src.error(f"unknown declaration {kw!r}", lineno, head.col, len(kw))

    if domain is None or vars is None:
        raise ParseError("missing domain or vars declaration", None, name)
    if not worlds:
        raise ParseError("no worlds declared", None, name)
    for lineno, t in pending:
        if t.text not in worlds:
            raise src.error(f"unknown world {t.text!r}", lineno, t.col, len(t.text))
    k = Kripke(tuple(worlds), tuple(vars), domain, set(edges), worlds)
    labeling = ActionLabeling(tuple(actions or ()), {e: frozenset(ls) for e, ls in edges.items()})
    return KripkeFile(k, labeling, actions is not None, initial, frozenset(entries), frozenset(exits), edge_order)


def _label_order(actions):
    order = {a: i for i, a in enumerate(actions)}
    return lambda lab: (lab != EPS, order.get(lab, len(order)), lab)


def serialize_kripke(kf: KripkeFile) -> str:
    k = kf.kripke
    lines = [f"domain {' '.join(k.domain.values)}", f"vars {' '.join(k.vars)}"]
    if kf.has_actions:
        lines.append(f"actions {' '.join(kf.labeling.actions)}".rstrip())
    for w in k.worlds:
        lines.append(f"world {w} " + " ".join(f"{x}={k.value(w, x)}" for x in k.vars))
    key = _label_order(kf.labeling.actions)
    for w in k.worlds:
        for r in k.successors(w):
            ls = sorted(kf.labeling[(w, r)], key=key)
            if ls == [EPS]:
                lines.append(f"edge {w} {r}")
            else:
                lines.append(f"edge {w} {r} : {' '.join(ls)}")
    if kf.initial is not None:
        lines.append(f"init {kf.initial}")
    order = {w: i for i, w in enumerate(k.worlds)}
    if kf.entries:
        lines.append("in " + " ".join(sorted(kf.entries, key=order.get)))
    if kf.exits:
        lines.append("out " + " ".join(sorted(kf.exits, key=order.get)))
    return "\n".join(lines) + "\n"


def format_open_kripke(OK: OpenKripke) -> str:
    kf = KripkeFile(OK.k, ActionLabeling((), {e: {EPS} for e in OK.k.delta}), False, None, OK.entries, OK.exits)
    return serialize_kripke(kf)


# --- hypernode automata -------------------------------------------------------

def parse_hna(text: str, name: str | None = None) -> Hna:
    src = _Source(text, name)
    actions = None
    nodes, labels = [], {}
    initial = None
    trans = {}
    seen_actions = []
    pending = []
    for lineno, toks in _lines(src):
        head, args = toks[0], toks[1:]
        kw = head.text
        if kw == "actions":
            if actions is not None:
                raise src.error("duplicate actions declaration", lineno, head.col, len(kw))
            actions = [_name(src, lineno, t, "action") for t in args]
        elif kw == "node":
            if len(args) < 2 or not args[-1].text.startswith('"') or len(args[-1].text) < 2 \
                    or not args[-1].text.endswith('"'):
                raise src.error('expected: node NAME [init] "FORMULA"', lineno, head.col, len(kw))
            q = _name(src, lineno, args[0], "node name")
            if q in labels:
                raise src.error(f"duplicate node {q}", lineno, args[0].col, len(q))
            for t in args[1:-1]:
                if t.text != "init":
                    raise src.error(f"unexpected {t.text!r}", lineno, t.col, len(t.text))
                if initial is not None:
                    raise src.error(f"second init node {q} (first was {initial})", lineno, t.col, len(t.text))
                initial = q
            nodes.append(q)
            labels[q] = _formula_in_line(src, lineno, args[-1])
        elif kw == "edge":
            before, acts = _split_colon(src, lineno, args, 2)
            if len(before) != 2 or not acts:
                raise src.error("expected: edge N1 N2 : ACTION ...", lineno, head.col, len(kw))
            q, r = before[0].text, before[1].text
            pending += [(lineno, before[0]), (lineno, before[1])]
            for t in acts:
                a = _name(src, lineno, t, "action")
                if a == EPS:
                    raise src.error(f"{EPS} cannot label an automaton edge", lineno, t.col, len(a))
                if actions is not None and a not in actions:
                    raise src.error(f"unknown action {a!r}", lineno, t.col, len(a))
                if (q, a) in trans and trans[(q, a)] != r:
                    raise src.error(f"node {q} already has a transition on {a}", lineno, t.col, len(a))
                trans[(q, a)] = r
                if a not in seen_actions:
                    seen_actions.append(a)
        else:
            raise src.error(f"unknown declaration {kw!r}", lineno, head.col, len(kw))
    for lineno, t in pending:
        if t.text not in labels:
            raise src.error(f"unknown node {t.text!r}", lineno, t.col, len(t.text))
    if not nodes:
        raise ParseError("no nodes declared", None, name)
    if initial is None:
        raise ParseError("no init node declared", None, name)
    return Hna(tuple(nodes), initial, labels, trans, tuple(actions if actions is not None else seen_actions))


def serialize_hna(H: Hna) -> str:
    lines = [f"actions {' '.join(H.actions)}".rstrip()]
    for q in H.nodes:
        init = " init" if q == H.initial else ""
        lines.append(f'node {q}{init} "{H.label(q)}"')
    for q in H.nodes:
        targets: dict = {}
        for a in H.actions:
            if (q, a) in H.trans:
                targets.setdefault(H.trans[(q, a)], []).append(a)
        for r, acts in targets.items():
            lines.append(f"edge {q} {r} : {' '.join(acts)}")
    return "\n".join(lines) + "\n"


# --- stutter-free automata ------------------------------------------------------

def parse_sfa(text: str, name: str | None = None) -> Sfa:
    src = _Source(text, name)
    domain = vars = None
    states, initials, finals = [], [], []
    transitions = []
    pending = []
    for lineno, toks in _lines(src):
        head, args = toks[0], toks[1:]
        kw = head.text
        if kw == "domain":
            if domain is not None:
                raise src.error("duplicate domain declaration", lineno, head.col, len(kw))
            for t in args:
                if not VALUE.match(t.text):
                    raise src.error(f"invalid value token {t.text!r}", lineno, t.col, len(t.text))
            try:
                domain = Domain(tuple(t.text for t in args))
            except ValueError as e:
                raise src.error(str(e), lineno, head.col, len(kw)) from None
        elif kw == "vars":
            if vars is not None:
                raise src.error("duplicate vars declaration", lineno, head.col, len(kw))
            vars = [_name(src, lineno, t, "variable") for t in args]
            if len(set(vars)) != len(vars):
                raise src.error("vars must be distinct", lineno, head.col, len(kw))
        elif kw == "state":
            if not args:
                raise src.error("state needs a name", lineno, head.col, len(kw))
            q = _name(src, lineno, args[0], "state name")
            if q in states:
                raise src.error(f"duplicate state {q}", lineno, args[0].col, len(q))
            states.append(q)
            for t in args[1:]:
                if t.text == "init":
                    initials.append(q)
                elif t.text == "final":
                    finals.append(q)
                else:
                    raise src.error(f"unexpected {t.text!r}; expected init or final", lineno, t.col, len(t.text))
        elif kw == "trans":
            if domain is None or vars is None:
                raise src.error("declare domain and vars before transitions", lineno, head.col, len(kw))
            before, coords = _split_colon(src, lineno, args, 2)
            if len(before) != 2 or coords is None:
                raise src.error("expected: trans Q1 Q2 : VAR=VALUE ...", lineno, head.col, len(kw))
            pending += [(lineno, before[0]), (lineno, before[1])]
            letter = {}
            for t in coords:
                var, eq, value = t.text.partition("=")
                if not eq or var not in vars:
                    raise src.error(f"expected VAR=VALUE with a declared variable, got {t.text!r}",
                                    lineno, t.col, len(t.text))
                if var in letter:
                    raise src.error(f"variable {var} given twice", lineno, t.col, len(t.text))
                if value != TERM and value not in domain:
                    raise src.error(f"value {value!r} is neither in the domain nor {TERM}", lineno,
                                    t.col + len(var) + 1, len(value))
                letter[var] = value
            missing = [x for x in vars if x not in letter]
            if missing:
                raise src.error(f"transition lacks coordinate(s) {', '.join(missing)}", lineno, head.col, len(kw))
            v = tuple(letter[x] for x in vars)
            if sfa_mod.is_all_term(v):
                raise src.error(f"the all-{TERM} letter cannot label a transition", lineno, coords[0].col,
                                coords[-1].col + len(coords[-1].text) - coords[0].col)
            transitions.append((before[0].text, v, before[1].text))
        else:
            raise src.error(f"unknown declaration {kw!r}", lineno, head.col, len(kw))
    if domain is None or vars is None:
        raise ParseError("missing domain or vars declaration", None, name)
    for lineno, t in pending:
        if t.text not in states:
            raise src.error(f"unknown state {t.text!r}", lineno, t.col, len(t.text))
    return Sfa.build(vars, domain, transitions, initials, finals, states)


def canonical_names(A: Sfa) -> dict:
    """``q0, q1, ...`` in breadth-first order (letters sorted); unreachable states last."""
    names: dict = {}
    queue = deque()
    for q in sorted(A.initials, key=repr):
        if q not in names:
            names[q] = f"q{len(names)}"
            queue.append(q)
    while queue:
        q = queue.popleft()
        for v, ts in A.out(q).items():
            for r in sorted(ts, key=repr):
                if r not in names:
                    names[r] = f"q{len(names)}"
                    queue.append(r)
    for q in sorted(A.states - set(names), key=repr):
        names[q] = f"q{len(names)}"
    return names


def serialize_sfa(A: Sfa, keep_names: bool = False) -> str:
    """``.sfa`` text.  States are renamed canonically unless ``keep_names`` is set
    and every state is already a valid name."""
    if keep_names and all(isinstance(q, str) and IDENT.match(q) for q in A.states):
        order = canonical_names(A)
        names = {q: q for q in order}
    else:
        names = canonical_names(A)
    lines = [f"domain {' '.join(A.domain.values)}", f"vars {' '.join(A.vars)}"]
    for q in names:
        flags = (" init" if q in A.initials else "") + (" final" if q in A.finals else "")
        lines.append(f"state {names[q]}{flags}")
    for q in names:
        for v, ts in A.out(q).items():
            letter = " ".join(f"{x}={t}" for x, t in zip(A.vars, v))
            for r in sorted(ts, key=lambda s: list(names).index(s)):
                lines.append(f"trans {names[q]} {names[r]} : {letter}")
    return "\n".join(lines) + "\n"


def read_text(path) -> str:
    with open(path, encoding="utf-8", newline="") as fh:
        return fh.read()
