"""Boolean search over the catalog metadata.

Queries are And/Or/Not trees over field predicates, supplied either as
structured payloads or as text parsed by a small grammar in which "and"
binds tighter than "or" and "not" prefixes a term.  Results are always
intersected with the caller's visibility and ordered by primary key.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field as dc_field

from . import errors
from .accounts import affln_in_scope, scope_afflns, visible_items
from .auth import Session
from .models import TABLES
from .permissions import FULL_MASK, Permission, mask_grants
from .store import Store

MAX_QUERY_DEPTH = 8
MAX_QUERY_LENGTH = 1024
DEFAULT_PAGE_SIZE = 50

OPERATORS = ("eq", "contains", "lt", "gt")


@dataclass(frozen=True)
class FieldMeta:
    table_code: str
    field_code: str
    min_mask: int = 0
    text: bool = True       # included in simple-search scans
    exportable: bool = True


# Searchable surface: every field here belongs to a registered table.
FIELD_REGISTRY: dict[tuple[str, str], FieldMeta] = {
    (m.table_code, m.field_code): m
    for m in [
        FieldMeta("item", "item_id", text=False),
        FieldMeta("item", "item_description"),
        FieldMeta("item", "code"),
        FieldMeta("item", "serial_number"),
        FieldMeta("item", "cat_id", text=False),
        FieldMeta("item", "owner_id", text=False),
        FieldMeta("item", "loc_id", text=False),
        FieldMeta("item", "status"),
        FieldMeta("item", "group_id", text=False),
        FieldMeta("loc", "loc_id", text=False),
        FieldMeta("loc", "loc_code"),
        FieldMeta("loc", "loc_name"),
        FieldMeta("loc", "status"),
        FieldMeta("loc", "affln_id", text=False),
        FieldMeta("user", "user_id", text=False,
                  min_mask=Permission.MANAGE_USERS.bit),
        FieldMeta("user", "user_code", min_mask=Permission.MANAGE_USERS.bit),
        FieldMeta("user", "last_name", min_mask=Permission.MANAGE_USERS.bit),
        FieldMeta("user", "first_name", min_mask=Permission.MANAGE_USERS.bit),
        FieldMeta("user", "password_digest", min_mask=FULL_MASK, text=False,
                  exportable=False),
        FieldMeta("req", "req_id", text=False),
        FieldMeta("req", "description"),
        FieldMeta("req", "status"),
        FieldMeta("req", "requester", text=False),
    ]
}

DEFAULT_TABLE = "item"


@dataclass(frozen=True)
class Predicate:
    table: str
    field: str
    op: str
    literal: str

    def depth(self) -> int:
        return 1


@dataclass(frozen=True)
class And:
    children: tuple = dc_field(default_factory=tuple)

    def depth(self) -> int:
        return 1 + max(c.depth() for c in self.children)


@dataclass(frozen=True)
class Or:
    children: tuple = dc_field(default_factory=tuple)

    def depth(self) -> int:
        return 1 + max(c.depth() for c in self.children)


@dataclass(frozen=True)
class Not:
    child: object = None

    def depth(self) -> int:
        return 1 + self.child.depth()


def eval_predicate(pred: Predicate, row) -> bool:
    value = getattr(row, pred.field, None)
    value = "" if value is None else str(value)
    if pred.op == "eq":
        return value == pred.literal
    if pred.op == "contains":
        return pred.literal.lower() in value.lower()
    if pred.op in ("lt", "gt"):
        try:
            left, right = float(value), float(pred.literal)
        except ValueError:
            left, right = value, pred.literal
        return left < right if pred.op == "lt" else left > right
    raise errors.ValidationError(f"unknown operator {pred.op}")


def eval_query(query, row) -> bool:
    if isinstance(query, Predicate):
        return eval_predicate(query, row)
    if isinstance(query, And):
        return all(eval_query(c, row) for c in query.children)
    if isinstance(query, Or):
        return any(eval_query(c, row) for c in query.children)
    if isinstance(query, Not):
        return not eval_query(query.child, row)
    raise errors.ValidationError(f"not a query node: {query!r}")


def query_predicates(query) -> list[Predicate]:
    if isinstance(query, Predicate):
        return [query]
    if isinstance(query, (And, Or)):
        return [p for c in query.children for p in query_predicates(c)]
    if isinstance(query, Not):
        return query_predicates(query.child)
    raise errors.ValidationError(f"not a query node: {query!r}")


# -- text grammar --

_TOKEN_RE = re.compile(r'\(|\)|"[^"]*"|[^\s()]+')


def _tokenize(text: str) -> list[tuple[str, int]]:
    return [(m.group(0), m.start()) for m in _TOKEN_RE.finditer(text)]


class _Parser:
    def __init__(self, text: str, default_table: str):
        self._tokens = _tokenize(text)
        self._pos = 0
        self._default_table = default_table

    def _peek(self):
        return self._tokens[self._pos] if self._pos < len(self._tokens) else (None, -1)

    def _next(self):
        tok = self._peek()
        self._pos += 1
        return tok

    def parse(self):
        node = self._or_expr()
        tok, at = self._peek()
        if tok is not None:
            raise errors.QuerySyntaxError(f"unexpected token {tok!r}", at)
        return node

    def _or_expr(self):
        children = [self._and_expr()]
        while self._peek()[0] and self._peek()[0].lower() == "or":
            self._next()
            children.append(self._and_expr())
        return children[0] if len(children) == 1 else Or(tuple(children))

    def _and_expr(self):
        children = [self._unary()]
        while self._peek()[0] and self._peek()[0].lower() == "and":
            self._next()
            children.append(self._unary())
        return children[0] if len(children) == 1 else And(tuple(children))

    def _unary(self):
        tok, at = self._peek()
        if tok is None:
            raise errors.QuerySyntaxError("unexpected end of query", at)
        if tok.lower() == "not":
            self._next()
            return Not(self._unary())
        if tok == "(":
            self._next()
            node = self._or_expr()
            close, at2 = self._next()
            if close != ")":
                raise errors.QuerySyntaxError("expected ')'", at2)
            return node
        return self._predicate()

    def _predicate(self):
        name, at = self._next()
        if name in (None, ")", "(") or name.lower() in ("and", "or", "not"):
            raise errors.QuerySyntaxError(f"expected a field name, got {name!r}", at)
        op, at_op = self._next()
        if op is None or op.lower() not in OPERATORS:
            raise errors.QuerySyntaxError(f"expected an operator, got {op!r}", at_op)
        literal, at_lit = self._next()
        if literal is None or literal in ("(", ")"):
            raise errors.QuerySyntaxError("expected a value", at_lit)
        if literal.startswith('"') and literal.endswith('"'):
            literal = literal[1:-1]
        if "." in name:
            table, fname = name.split(".", 1)
        else:
            table, fname = self._default_table, name
        return Predicate(table, fname, op.lower(), literal)


def parse_query(text: str, default_table: str = DEFAULT_TABLE):
    if len(text) > MAX_QUERY_LENGTH:
        raise errors.ValidationError("query longer than 1024 characters")
    if not text.strip():
        raise errors.QuerySyntaxError("empty query", 0)
    return _Parser(text, default_table).parse()


def render_query(query) -> str:
    if isinstance(query, Predicate):
        lit = f'"{query.literal}"' if " " in query.literal else query.literal
        return f"{query.table}.{query.field} {query.op} {lit}"
    if isinstance(query, And):
        return " and ".join(_render_child(c, And) for c in query.children)
    if isinstance(query, Or):
        return " or ".join(_render_child(c, Or) for c in query.children)
    if isinstance(query, Not):
        return f"not {_render_child(query.child, Not)}"
    raise errors.ValidationError(f"not a query node: {query!r}")


def _render_child(child, parent_kind) -> str:
    text = render_query(child)
    needs_parens = (
        isinstance(child, Or) and parent_kind in (And, Not)
    ) or (isinstance(child, And) and parent_kind is Not)
    return f"({text})" if needs_parens else text


class SearchService:
    def __init__(self, store: Store):
        self._store = store

    def _visible_rows(self, snap, session: Session, table: str) -> list:
        if table == "item":
            return visible_items(snap, session.user_id, session.effective_mask)
        if table == "loc":
            locs = snap.all("loc")
            if session.level >= 3:
                return locs
            scope = scope_afflns(snap, session.user_id)
            return [l for l in locs if affln_in_scope(l.affln_id, scope)]
        if table == "user":
            if not mask_grants(session.effective_mask, Permission.MANAGE_USERS):
                return []
            return snap.all("user")
        if table == "req":
            if session.level >= 1:
                return snap.all("req")
            return snap.find("req", lambda r: r.requester == session.user_id)
        raise errors.UnknownField(f"table {table} is not searchable")

    def _check_predicates(self, session: Session, query) -> str:
        preds = query_predicates(query)
        if not preds:
            raise errors.ValidationError("query has no predicates")
        tables = {p.table for p in preds}
        if len(tables) != 1:
            raise errors.ValidationError("query must target a single table")
        for pred in preds:
            meta = FIELD_REGISTRY.get((pred.table, pred.field))
            if meta is None:
                raise errors.UnknownField(f"{pred.table}.{pred.field}")
            if not meta.exportable or \
                    (session.effective_mask & meta.min_mask) != meta.min_mask:
                raise errors.PermissionDenied(
                    f"field {pred.table}.{pred.field} not searchable with your grants")
            if pred.op not in OPERATORS:
                raise errors.ValidationError(f"unknown operator {pred.op}")
        return tables.pop()

    def _rows_out(self, table: str, rows: list) -> list[dict]:
        tdef = TABLES[table]
        out = []
        for rec in sorted(rows, key=lambda r: getattr(r, tdef.pk)):
            row = {}
            for fname in tdef.field_names:
                meta = FIELD_REGISTRY.get((table, fname))
                if meta is not None and not meta.exportable:
                    continue
                value = getattr(rec, fname)
                row[fname] = "" if value is None else value
            out.append(row)
        return out

    def simple_search(self, session: Session, text: str,
                      table: str = DEFAULT_TABLE) -> list[dict]:
        if not text.strip():
            raise errors.ValidationError("search text is required")
        fields = [
            m for (t, f), m in FIELD_REGISTRY.items()
            if t == table and m.text and m.exportable
            and (session.effective_mask & m.min_mask) == m.min_mask
        ]
        query = Or(tuple(Predicate(table, m.field_code, "contains", text.strip())
                         for m in fields))
        if not query.children:
            return []
        snap = self._store.snapshot()
        rows = [r for r in self._visible_rows(snap, session, table)
                if eval_query(query, r)]
        return self._rows_out(table, rows)

    def advanced_search(self, session: Session, query,
                        page: int = 1, page_size: int = DEFAULT_PAGE_SIZE) -> list[dict]:
        if query.depth() > MAX_QUERY_DEPTH:
            raise errors.ValidationError(f"query deeper than {MAX_QUERY_DEPTH}")
        table = self._check_predicates(session, query)
        snap = self._store.snapshot()
        rows = [r for r in self._visible_rows(snap, session, table)
                if eval_query(query, r)]
        out = self._rows_out(table, rows)
        if page_size:
            start = (page - 1) * page_size
            out = out[start:start + page_size]
        return out

    def advanced_search_text(self, session: Session, text: str,
                             table: str = DEFAULT_TABLE, **kwargs) -> list[dict]:
        return self.advanced_search(session, parse_query(text, table), **kwargs)
