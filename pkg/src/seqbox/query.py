"""Structured selection queries: parse, evaluate, format.

Grammar (case-insensitive keywords, NOT binds tighter than AND than OR):

    expr       := or
    or         := and ("OR" and)*
    and        := unary ("AND" unary)*
    unary      := "NOT" unary | "(" expr ")" | comparison
    comparison := identifier op literal
                | "Cluster ID" "=" label
                | "HAS" event_type
    op         := "=" | "!=" | "<" | "<=" | ">" | ">="

Identifiers may be double-quoted to include spaces; string literals are
quoted with either quote character. ``Cluster ID`` is a reserved two-word
identifier resolved through the active clustering.

Evaluation is at sequence granularity: a comparison on a sequence-level
attribute tests that attribute, a comparison on an event-level attribute
holds if ANY event of the sequence satisfies it, and selected sequences
contribute all their occurrences. Missing values never satisfy any
comparison, including ``!=``; NOT is ordinary logical negation of the
sequence predicate.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import ParseError, QueryTypeError, StateError, UnknownAttributeError
from .grouping import ClusterAssignment
from .model import (
    CLUSTER_ATTR,
    AttributeSchema,
    Dataset,
    KIND_CATEGORICAL,
    LEVEL_SEQUENCE,
    SelectionSet,
    resolve_on,
)

COMPARISON_OPS = ("=", "!=", "<", "<=", ">", ">=")


# ---------------------------------------------------------------------------
# AST

@dataclass(frozen=True)
class Comparison:
    attribute: str
    op: str
    literal: float | str


@dataclass(frozen=True)
class ClusterIs:
    label: str


@dataclass(frozen=True)
class EventContains:
    event_type: str


@dataclass(frozen=True)
class Not:
    item: "QueryAst"


@dataclass(frozen=True)
class And:
    items: tuple["QueryAst", ...]


@dataclass(frozen=True)
class Or:
    items: tuple["QueryAst", ...]


QueryAst = Comparison | ClusterIs | EventContains | Not | And | Or


# ---------------------------------------------------------------------------
# Lexer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<cluster>[Cc][Ll][Uu][Ss][Tt][Ee][Rr]\s+[Ii][Dd](?![A-Za-z0-9_]))
  | (?P<number>-?\d+(?:\.\d+)?)
  | (?P<word>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<dquote>"[^"]*")
  | (?P<squote>'[^']*')
  | (?P<op>!=|<=|>=|=|<|>)
  | (?P<lparen>\()
  | (?P<rparen>\))
    """,
    re.VERBOSE,
)

_KEYWORDS = {"and": "AND", "or": "OR", "not": "NOT", "has": "HAS"}


@dataclass(frozen=True)
class _Token:
    kind: str  # AND OR NOT HAS CLUSTER_ID NUMBER WORD STRING OP LPAREN RPAREN EOF
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        value = m.group()
        if kind == "ws":
            pos = m.end()
            continue
        if kind == "cluster":
            tokens.append(_Token("CLUSTER_ID", CLUSTER_ATTR, pos))
        elif kind == "word":
            lowered = value.lower()
            if lowered in _KEYWORDS:
                tokens.append(_Token(_KEYWORDS[lowered], value, pos))
            else:
                tokens.append(_Token("WORD", value, pos))
        elif kind == "number":
            tokens.append(_Token("NUMBER", value, pos))
        elif kind in ("dquote", "squote"):
            tokens.append(_Token("STRING", value[1:-1], pos))
        elif kind == "op":
            tokens.append(_Token("OP", value, pos))
        elif kind == "lparen":
            tokens.append(_Token("LPAREN", value, pos))
        elif kind == "rparen":
            tokens.append(_Token("RPAREN", value, pos))
        pos = m.end()
    tokens.append(_Token("EOF", "", len(text)))
    return tokens


# ---------------------------------------------------------------------------
# Parser

class _Parser:
    def __init__(self, tokens: list[_Token], schema: AttributeSchema):
        self.tokens = tokens
        self.i = 0
        self.schema = schema

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def next(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str, what: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ParseError(f"got {tok.text or 'end of input'!r}", tok.pos, (what,))
        return self.next()

    def parse(self) -> QueryAst:
        node = self.parse_or()
        tok = self.peek()
        if tok.kind != "EOF":
            raise ParseError(f"unexpected {tok.text!r}", tok.pos, ("AND", "OR", "end of input"))
        return node

    def parse_or(self) -> QueryAst:
        items = [self.parse_and()]
        while self.peek().kind == "OR":
            self.next()
            items.append(self.parse_and())
        return items[0] if len(items) == 1 else Or(tuple(items))

    def parse_and(self) -> QueryAst:
        items = [self.parse_unary()]
        while self.peek().kind == "AND":
            self.next()
            items.append(self.parse_unary())
        return items[0] if len(items) == 1 else And(tuple(items))

    def parse_unary(self) -> QueryAst:
        tok = self.peek()
        if tok.kind == "NOT":
            self.next()
            return Not(self.parse_unary())
        if tok.kind == "LPAREN":
            self.next()
            node = self.parse_or()
            self.expect("RPAREN", ")")
            return node
        return self.parse_comparison()

    def parse_comparison(self) -> QueryAst:
        tok = self.peek()
        if tok.kind == "CLUSTER_ID":
            self.next()
            op = self.expect("OP", "=")
            if op.text != "=":
                raise ParseError(f"got {op.text!r}", op.pos, ("=",))
            label = self.peek()
            if label.kind not in ("WORD", "STRING"):
                raise ParseError(
                    f"got {label.text or 'end of input'!r}", label.pos, ("cluster label",)
                )
            self.next()
            return ClusterIs(label.text)
        if tok.kind == "HAS":
            self.next()
            etype = self.peek()
            if etype.kind not in ("WORD", "STRING"):
                raise ParseError(
                    f"got {etype.text or 'end of input'!r}", etype.pos, ("event type",)
                )
            self.next()
            return EventContains(etype.text)
        if tok.kind in ("WORD", "STRING"):
            self.next()
            name = tok.text
            if not self.schema.knows(name) or name == CLUSTER_ATTR:
                raise UnknownAttributeError(f"unknown attribute {name!r}")
            op = self.expect("OP", "comparison operator")
            lit = self.peek()
            if lit.kind == "NUMBER":
                self.next()
                literal: float | str = float(lit.text)
            elif lit.kind == "STRING":
                self.next()
                literal = lit.text
            else:
                raise ParseError(
                    f"got {lit.text or 'end of input'!r}", lit.pos, ("literal",)
                )
            return self._typed_comparison(name, op.text, literal, lit.pos)
        raise ParseError(
            f"got {tok.text or 'end of input'!r}",
            tok.pos,
            ("attribute", "NOT", "(", "HAS", "Cluster ID"),
        )

    def _typed_comparison(self, name: str, op: str, literal, pos: int) -> Comparison:
        kind = self.schema.kind_of(name)
        if kind == KIND_CATEGORICAL:
            if not isinstance(literal, str):
                raise QueryTypeError(
                    f"attribute {name!r} is categorical; quote the value"
                )
            if op not in ("=", "!="):
                raise QueryTypeError(f"operator {op!r} not valid for categorical {name!r}")
        else:
            # numerical and temporal compare against numbers
            if isinstance(literal, str):
                raise QueryTypeError(f"attribute {name!r} is {kind}; use a numeric literal")
        return Comparison(name, op, literal)


def parse_query(text: str, schema: AttributeSchema) -> QueryAst:
    """Parse query text against a schema; literals are type-checked."""
    return _Parser(_tokenize(text), schema).parse()


# ---------------------------------------------------------------------------
# Evaluation

def evaluate_query(
    ast: QueryAst, dataset: Dataset, clusters: ClusterAssignment | None = None
) -> SelectionSet:
    """Sequences satisfying the query, with all their occurrences selected."""
    selected = []
    for seq in dataset.sequences:
        if _eval_sequence(ast, dataset, seq, clusters):
            selected.append(seq)
    occ_ids = frozenset(ev.id for seq in selected for ev in seq.events)
    return SelectionSet(
        sequence_ids=frozenset(seq.id for seq in selected),
        occurrence_ids=occ_ids,
        origin=f"query: {format_query(ast)}",
        dataset_version=dataset.version,
    )


def _eval_sequence(ast, dataset, seq, clusters) -> bool:
    if isinstance(ast, And):
        return all(_eval_sequence(item, dataset, seq, clusters) for item in ast.items)
    if isinstance(ast, Or):
        return any(_eval_sequence(item, dataset, seq, clusters) for item in ast.items)
    if isinstance(ast, Not):
        return not _eval_sequence(ast.item, dataset, seq, clusters)
    if isinstance(ast, ClusterIs):
        if clusters is None:
            raise StateError("query uses Cluster ID but no clustering is active")
        return clusters.labels.get(seq.id) == ast.label
    if isinstance(ast, EventContains):
        return any(ev.event_type == ast.event_type for ev in seq.events)
    if isinstance(ast, Comparison):
        if dataset.schema.level_of(ast.attribute) == LEVEL_SEQUENCE:
            value = seq.attrs.get(ast.attribute)
            return _compare(value, ast.op, ast.literal)
        return any(
            _compare(resolve_on(dataset, ev, seq, ast.attribute), ast.op, ast.literal)
            for ev in seq.events
        )
    raise TypeError(f"not a query node: {ast!r}")


def _compare(value, op: str, literal) -> bool:
    if value is None:
        return False  # missing never matches
    if isinstance(literal, str):
        value = str(value)
    else:
        value = float(value)
    if op == "=":
        return value == literal
    if op == "!=":
        return value != literal
    if op == "<":
        return value < literal
    if op == "<=":
        return value <= literal
    if op == ">":
        return value > literal
    if op == ">=":
        return value >= literal
    raise ValueError(f"unknown operator {op!r}")


# ---------------------------------------------------------------------------
# JSON serialization (for the guided query builder)

def ast_to_obj(ast: QueryAst) -> dict:
    if isinstance(ast, Comparison):
        return {"node": "comparison", "attribute": ast.attribute, "op": ast.op, "literal": ast.literal}
    if isinstance(ast, ClusterIs):
        return {"node": "cluster_is", "label": ast.label}
    if isinstance(ast, EventContains):
        return {"node": "has", "event_type": ast.event_type}
    if isinstance(ast, Not):
        return {"node": "not", "item": ast_to_obj(ast.item)}
    if isinstance(ast, (And, Or)):
        return {
            "node": "and" if isinstance(ast, And) else "or",
            "items": [ast_to_obj(item) for item in ast.items],
        }
    raise TypeError(f"not a query node: {ast!r}")


def ast_from_obj(obj: dict) -> QueryAst:
    node = obj.get("node")
    if node == "comparison":
        literal = obj["literal"]
        if not isinstance(literal, str):
            literal = float(literal)
        return Comparison(obj["attribute"], obj["op"], literal)
    if node == "cluster_is":
        return ClusterIs(obj["label"])
    if node == "has":
        return EventContains(obj["event_type"])
    if node == "not":
        return Not(ast_from_obj(obj["item"]))
    if node in ("and", "or"):
        items = tuple(ast_from_obj(i) for i in obj["items"])
        return And(items) if node == "and" else Or(items)
    raise ParseError(f"unknown query node {node!r}", 0)


# ---------------------------------------------------------------------------
# Formatting

def format_query(ast: QueryAst) -> str:
    """Canonical rendering; ``parse_query(format_query(a))`` equals ``a``."""
    if isinstance(ast, And):
        return " AND ".join(f"({format_query(item)})" for item in ast.items)
    if isinstance(ast, Or):
        return " OR ".join(f"({format_query(item)})" for item in ast.items)
    if isinstance(ast, Not):
        return f"NOT ({format_query(ast.item)})"
    if isinstance(ast, ClusterIs):
        return f"{CLUSTER_ATTR} = {_atom(ast.label)}"
    if isinstance(ast, EventContains):
        return f"HAS {_atom(ast.event_type)}"
    if isinstance(ast, Comparison):
        return f"{_ident(ast.attribute)} {ast.op} {_literal(ast.literal)}"
    raise TypeError(f"not a query node: {ast!r}")


_BARE_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")


def _is_bare(text: str) -> bool:
    return bool(_BARE_RE.match(text)) and text.lower() not in _KEYWORDS


def _ident(name: str) -> str:
    return name if _is_bare(name) else f'"{name}"'


def _atom(text: str) -> str:
    return text if _is_bare(text) else f'"{text}"'


def _literal(literal) -> str:
    if isinstance(literal, str):
        return f"'{literal}'"
    if float(literal).is_integer():
        return str(int(literal))
    return repr(float(literal))
