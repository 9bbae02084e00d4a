"""Tensed propositions: AST, DSL parser, and normalization to disjunctions of histories.

Grammar (whitespace insignificant)::

    prop    = term { "|" term }
    term    = factor { "&" factor }
    factor  = "~" factor | atom | "(" prop ")"
    atom    = "F" "[" number "]" "(" evexpr ")" | "N" "(" evexpr ")"
    evexpr  = evterm { "|" evterm }
    evterm  = evfac { "&" evfac }
    evfac   = "~" evfac | IDENT | "(" evexpr ")"

Normalization pushes negations to atoms (an atom's negation is the complement
event), merges same-time conjunctions by intersection and same-time one-step
disjunctions by union, distributes conjunction over disjunction, and returns
the canonically ordered, deduplicated list of histories.
"""

from __future__ import annotations

import itertools
import logging
import math
import re
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterator, List, Optional, Tuple, Union

from tense_logic.errors import (
    DslSyntaxError,
    InputError,
    NormalizationBlowUp,
    StrictModeViolation,
    UnknownEvent,
)
from tense_logic.model import Event, QuantumModel

logger = logging.getLogger(__name__)

MAX_DISJUNCTS = 4096

Position = Optional[Tuple[int, int]]


# Event expressions

@dataclass(frozen=True)
class EventExpr:
    def __str__(self) -> str:
        return format_event(self)


@dataclass(frozen=True)
class EventName(EventExpr):
    name: str
    pos: Position = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class EventSet(EventExpr):
    """Literal index set; built programmatically, never parsed."""

    indices: FrozenSet[int]


@dataclass(frozen=True)
class EventNot(EventExpr):
    operand: EventExpr


@dataclass(frozen=True)
class EventAnd(EventExpr):
    operands: Tuple[EventExpr, ...]


@dataclass(frozen=True)
class EventOr(EventExpr):
    operands: Tuple[EventExpr, ...]


# Propositions

@dataclass(frozen=True)
class TimeVar:
    """Free time symbol of a sweep template."""

    name: str = "t"

    def __str__(self) -> str:
        return self.name


Time = Union[float, TimeVar]


@dataclass(frozen=True)
class Proposition:
    def __str__(self) -> str:
        return format_proposition(self)


@dataclass(frozen=True)
class FutureAtom(Proposition):
    time: Time
    event: EventExpr
    pos: Position = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class NowAtom(Proposition):
    event: EventExpr
    pos: Position = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class And(Proposition):
    children: Tuple[Proposition, ...]


@dataclass(frozen=True)
class Or(Proposition):
    children: Tuple[Proposition, ...]


@dataclass(frozen=True)
class Not(Proposition):
    child: Proposition


def conj(*children: Proposition) -> Proposition:
    return children[0] if len(children) == 1 else And(tuple(children))


def disj(*children: Proposition) -> Proposition:
    return children[0] if len(children) == 1 else Or(tuple(children))


# Histories and normal forms

Step = Tuple[float, Event]


@dataclass(frozen=True)
class History:
    """Time-ordered conjunction of one-time atoms; time 0 is the present (N) step."""

    steps: Tuple[Step, ...] = ()

    def __post_init__(self) -> None:
        steps = tuple((float(t), frozenset(ev)) for t, ev in self.steps)
        for (t0, _), (t1, _) in zip(steps, steps[1:]):
            if not t1 > t0:
                raise InputError(f"History times must be strictly increasing: {t0} then {t1}")
        if steps and steps[0][0] < 0:
            raise InputError(f"History times must be non-negative, got {steps[0][0]}")
        object.__setattr__(self, "steps", steps)

    @classmethod
    def from_map(cls, steps: Dict[float, Event]) -> "History":
        return cls(tuple(sorted(steps.items())))

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def has_empty_event(self) -> bool:
        return any(not ev for _, ev in self.steps)

    def key(self) -> Tuple[Tuple[float, Tuple[int, ...]], ...]:
        return tuple((t, tuple(sorted(ev))) for t, ev in self.steps)

    def as_map(self) -> Dict[float, Event]:
        return dict(self.steps)

    def __str__(self) -> str:
        if not self.steps:
            return "TRUE"
        return " & ".join(
            f"N({_format_indices(ev)})" if t == 0 else f"F[{t!r}]({_format_indices(ev)})"
            for t, ev in self.steps
        )


@dataclass(frozen=True)
class NormalForm:
    """Disjunction of histories; empty means the contradiction."""

    disjuncts: Tuple[History, ...]

    def __len__(self) -> int:
        return len(self.disjuncts)

    @property
    def is_false(self) -> bool:
        return not self.disjuncts

    def canonical(self) -> "NormalForm":
        return NormalForm(tuple(sorted(set(self.disjuncts), key=History.key)))

    def to_proposition(self) -> Proposition:
        """AST over index-set literals that normalizes back to this form."""
        histories = []
        for history in self.disjuncts:
            atoms = [
                NowAtom(EventSet(ev)) if t == 0 else FutureAtom(t, EventSet(ev))
                for t, ev in history.steps
            ]
            histories.append(conj(*atoms) if atoms else And(()))
        if not histories:
            return Or(())
        return disj(*histories)

    def __str__(self) -> str:
        if not self.disjuncts:
            return "FALSE"
        return " | ".join(f"({h})" for h in self.disjuncts)


def conjoin(h1: History, h2: History) -> History:
    """h1 AND h2: same-time events intersect, steps sorted by time."""
    merged = h1.as_map()
    for t, ev in h2.steps:
        merged[t] = merged[t] & ev if t in merged else ev
    return History.from_map(merged)


def subset_conjunctions(nf: NormalForm) -> Iterator[Tuple[Tuple[int, ...], History]]:
    """Every non-empty subset of disjuncts with its merged conjunction, in canonical order.

    Subsets are enumerated by size, then lexicographically; this is the
    summation order of the inclusion-exclusion valuation.
    """
    disjuncts = nf.disjuncts
    previous: Dict[Tuple[int, ...], History] = {}
    for r in range(1, len(disjuncts) + 1):
        level = {}
        for subset in itertools.combinations(range(len(disjuncts)), r):
            if r == 1:
                history = disjuncts[subset[0]]
            else:
                history = conjoin(previous[subset[:-1]], disjuncts[subset[-1]])
            level[subset] = history
            yield subset, history
        previous = level


def complement_event(ev: Event, model: QuantumModel) -> Event:
    return model.complement(model.check_event(ev))


# Tokenizer and parser

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
    | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
    | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
    | (?P<punct>[\[\]()&|~])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # number, ident, punct, eof
    value: str
    line: int
    column: int


def _tokenize(text: str) -> List[_Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            raise DslSyntaxError(f"Unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = match.lastgroup
        value = match.group()
        if kind == "ws":
            newlines = value.count("\n")
            if newlines:
                line += newlines
                line_start = pos + value.rindex("\n") + 1
        else:
            tokens.append(_Token(kind, value, line, pos - line_start + 1))
        pos = match.end()
    tokens.append(_Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str, allow_time_symbol: bool) -> None:
        self.tokens = _tokenize(text)
        self.index = 0
        self.allow_time_symbol = allow_time_symbol
        self.used_time_symbol = False

    @property
    def current(self) -> _Token:
        return self.tokens[self.index]

    def _error(self, message: str, expected: FrozenSet[str], token: Optional[_Token] = None) -> DslSyntaxError:
        token = token or self.current
        return DslSyntaxError(message, token.line, token.column, expected)

    def _describe(self, token: _Token) -> str:
        return "end of input" if token.kind == "eof" else repr(token.value)

    def _accept(self, value: str) -> bool:
        if self.current.kind == "punct" and self.current.value == value:
            self.index += 1
            return True
        return False

    def _expect(self, value: str) -> _Token:
        token = self.current
        if not self._accept(value):
            raise self._error(f"Unexpected {self._describe(token)}", frozenset({value}))
        return token

    def parse(self) -> Proposition:
        prop = self._prop()
        if self.current.kind != "eof":
            raise self._error(f"Unexpected {self._describe(self.current)}", frozenset({"|", "&", "end of input"}))
        return prop

    def _prop(self) -> Proposition:
        children = [self._term()]
        while self._accept("|"):
            children.append(self._term())
        return disj(*children)

    def _term(self) -> Proposition:
        children = [self._factor()]
        while self._accept("&"):
            children.append(self._factor())
        return conj(*children)

    def _factor(self) -> Proposition:
        token = self.current
        if self._accept("~"):
            return Not(self._factor())
        if self._accept("("):
            prop = self._prop()
            self._expect(")")
            return prop
        if token.kind == "ident" and token.value == "F":
            self.index += 1
            self._expect("[")
            time = self._time()
            self._expect("]")
            self._expect("(")
            event = self._evexpr()
            self._expect(")")
            return FutureAtom(time, event, pos=(token.line, token.column))
        if token.kind == "ident" and token.value == "N":
            self.index += 1
            self._expect("(")
            event = self._evexpr()
            self._expect(")")
            return NowAtom(event, pos=(token.line, token.column))
        raise self._error(f"Unexpected {self._describe(token)}", frozenset({"F", "N", "~", "("}))

    def _time(self) -> Time:
        token = self.current
        if token.kind == "number":
            self.index += 1
            value = float(token.value)
            if not value > 0:
                raise self._error("F requires t > 0", frozenset({"positive number"}), token)
            if not math.isfinite(value):
                raise self._error("F requires a finite time", frozenset({"finite number"}), token)
            return value
        if token.kind == "ident" and self.allow_time_symbol and token.value == "t":
            self.index += 1
            self.used_time_symbol = True
            return TimeVar("t")
        expected = {"number", "t"} if self.allow_time_symbol else {"number"}
        raise self._error(f"Unexpected {self._describe(token)} in tense time", frozenset(expected))

    def _evexpr(self) -> EventExpr:
        operands = [self._evterm()]
        while self._accept("|"):
            operands.append(self._evterm())
        return operands[0] if len(operands) == 1 else EventOr(tuple(operands))

    def _evterm(self) -> EventExpr:
        operands = [self._evfac()]
        while self._accept("&"):
            operands.append(self._evfac())
        return operands[0] if len(operands) == 1 else EventAnd(tuple(operands))

    def _evfac(self) -> EventExpr:
        token = self.current
        if self._accept("~"):
            return EventNot(self._evfac())
        if self._accept("("):
            expr = self._evexpr()
            self._expect(")")
            return expr
        if token.kind == "ident":
            self.index += 1
            return EventName(token.value, pos=(token.line, token.column))
        raise self._error(f"Unexpected {self._describe(token)} in event expression",
                          frozenset({"event name", "~", "("}))


def parse(text: str) -> Proposition:
    """Parse DSL text into a Proposition.

    Raises:
        DslSyntaxError: With line, column and the set of expected tokens.
    """
    return _Parser(text, allow_time_symbol=False).parse()


def parse_template(text: str) -> Proposition:
    """Parse a sweep template; ``t`` may appear as the time of any F atom."""
    parser = _Parser(text, allow_time_symbol=True)
    prop = parser.parse()
    if not parser.used_time_symbol:
        raise DslSyntaxError("Template has no free time symbol 't'", 1, 1, frozenset({"F[t]"}))
    return prop


def instantiate(template: Proposition, t: float) -> Proposition:
    """Substitute ``t`` for the free time symbol."""
    if isinstance(template, FutureAtom):
        if isinstance(template.time, TimeVar):
            if not t > 0:
                raise InputError(f"F requires t > 0, got {t}")
            return FutureAtom(float(t), template.event, pos=template.pos)
        return template
    if isinstance(template, NowAtom):
        return template
    if isinstance(template, Not):
        return Not(instantiate(template.child, t))
    if isinstance(template, And):
        return And(tuple(instantiate(c, t) for c in template.children))
    if isinstance(template, Or):
        return Or(tuple(instantiate(c, t) for c in template.children))
    raise TypeError(f"Not a proposition: {template!r}")


# Formatting

def _format_indices(ev: Event) -> str:
    return "{" + ",".join(str(i) for i in sorted(ev)) + "}"


def format_event(expr: EventExpr, parent: int = 0) -> str:
    if isinstance(expr, EventName):
        return expr.name
    if isinstance(expr, EventSet):
        return _format_indices(expr.indices)
    if isinstance(expr, EventNot):
        return "~" + format_event(expr.operand, 3)
    if isinstance(expr, EventAnd):
        text = " & ".join(format_event(o, 2) for o in expr.operands)
        return f"({text})" if parent > 2 else text
    if isinstance(expr, EventOr):
        text = " | ".join(format_event(o, 1) for o in expr.operands)
        return f"({text})" if parent > 1 else text
    raise TypeError(f"Not an event expression: {expr!r}")


def format_proposition(prop: Proposition, parent: int = 0) -> str:
    """Render DSL text; parse(format_proposition(p)) == p for named-event propositions."""
    if isinstance(prop, FutureAtom):
        time = str(prop.time) if isinstance(prop.time, TimeVar) else repr(float(prop.time))
        return f"F[{time}]({format_event(prop.event)})"
    if isinstance(prop, NowAtom):
        return f"N({format_event(prop.event)})"
    if isinstance(prop, Not):
        return "~" + format_proposition(prop.child, 3)
    if isinstance(prop, And):
        if not prop.children:
            return "TRUE"
        text = " & ".join(format_proposition(c, 2) for c in prop.children)
        return f"({text})" if parent > 2 else text
    if isinstance(prop, Or):
        if not prop.children:
            return "FALSE"
        text = " | ".join(format_proposition(c, 1) for c in prop.children)
        return f"({text})" if parent > 1 else text
    raise TypeError(f"Not a proposition: {prop!r}")


# Resolution and normalization

def resolve_event(expr: EventExpr, model: QuantumModel) -> Event:
    """Evaluate a Boolean event expression to an index subset of the experience basis."""
    if isinstance(expr, EventName):
        if expr.name not in model.events:
            where = f" at line {expr.pos[0]}, column {expr.pos[1]}" if expr.pos else ""
            raise UnknownEvent(f"Unknown event {expr.name!r}{where}; model defines {sorted(model.events)}")
        return model.events[expr.name]
    if isinstance(expr, EventSet):
        return model.check_event(expr.indices)
    if isinstance(expr, EventNot):
        return model.complement(resolve_event(expr.operand, model))
    if isinstance(expr, EventAnd):
        return frozenset.intersection(*(resolve_event(o, model) for o in expr.operands))
    if isinstance(expr, EventOr):
        return frozenset.union(*(resolve_event(o, model) for o in expr.operands))
    raise TypeError(f"Not an event expression: {expr!r}")


def _guard(conjuncts: List[Dict[float, Event]]) -> List[Dict[float, Event]]:
    if len(conjuncts) > MAX_DISJUNCTS:
        raise NormalizationBlowUp(
            f"Normal form exceeds {MAX_DISJUNCTS} disjuncts; simplify the proposition"
        )
    return conjuncts


def _dnf(prop: Proposition, model: QuantumModel, negate: bool) -> List[Dict[float, Event]]:
    if isinstance(prop, (FutureAtom, NowAtom)):
        if isinstance(prop, FutureAtom):
            if isinstance(prop.time, TimeVar):
                raise InputError("Template time symbol 't' must be instantiated before evaluation")
            time = float(prop.time)
        else:
            time = 0.0
        ev = resolve_event(prop.event, model)
        return [{time: model.complement(ev) if negate else ev}]
    if isinstance(prop, Not):
        return _dnf(prop.child, model, not negate)
    if isinstance(prop, (And, Or)):
        conjunctive = isinstance(prop, And) != negate
        parts = [_dnf(child, model, negate) for child in prop.children]
        if not conjunctive:
            return _guard([c for part in parts for c in part])
        result: List[Dict[float, Event]] = [{}]
        for part in parts:
            product = []
            for left in result:
                for right in part:
                    merged = dict(left)
                    for t, ev in right.items():
                        merged[t] = merged[t] & ev if t in merged else ev
                    product.append(merged)
            result = _guard(product)
        return result
    raise TypeError(f"Not a proposition: {prop!r}")


def _merge_one_step(histories: List[History]) -> List[History]:
    """F_t(a) | F_t(b) -> F_t(a | b): one-step disjuncts at a shared time are unioned."""
    by_time: Dict[float, Event] = {}
    rest = []
    for h in histories:
        if len(h) == 1:
            t, ev = h.steps[0]
            by_time[t] = by_time.get(t, frozenset()) | ev
        else:
            rest.append(h)
    return rest + [History(((t, ev),)) for t, ev in by_time.items()]


def normalize(prop: Proposition, model: QuantumModel) -> NormalForm:
    """Disjunction-of-histories normal form of ``prop`` against ``model``'s events.

    Histories containing an empty event are dropped (their truth value is 0).

    Raises:
        UnknownEvent: An event name is not defined by the model.
        NormalizationBlowUp: More than MAX_DISJUNCTS disjuncts.
    """
    conjuncts = _dnf(prop, model, negate=False)
    histories = [History.from_map(c) for c in conjuncts]
    histories = [h for h in histories if not h.has_empty_event]
    nf = NormalForm(tuple(_merge_one_step(histories))).canonical()
    logger.debug(f"Normalized {len(conjuncts)} conjuncts to {len(nf)} histories")
    return nf


def check_strict(prop: Proposition) -> None:
    """Reject connectives that join atoms of different tense sublattices.

    Every atom must belong to the same N(E) or the same F_t(E); Boolean
    structure among such atoms stays inside one sublattice.
    """
    tenses = set(_tenses(prop))
    if len(tenses) > 1:
        raise StrictModeViolation("cross-tense connective rejected in strict mode")


def _tenses(prop: Proposition) -> Iterator[Tuple[str, Time]]:
    if isinstance(prop, FutureAtom):
        yield ("F", prop.time)
    elif isinstance(prop, NowAtom):
        yield ("N", 0.0)
    elif isinstance(prop, Not):
        yield from _tenses(prop.child)
    elif isinstance(prop, (And, Or)):
        for child in prop.children:
            yield from _tenses(child)


def tense_of(prop: Proposition) -> Optional[Tuple[str, Time]]:
    """The single tense of a one-sublattice proposition, else None."""
    tenses = set(_tenses(prop))
    return tenses.pop() if len(tenses) == 1 else None
