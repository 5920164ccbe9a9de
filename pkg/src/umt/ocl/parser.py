"""Recursive-descent parser for the expression grammar.

Precedence, tightest first: postfix navigation and ``->`` calls, ``-``,
``\\/``, comparisons (``=``, ``/=``, ``:``, ``<:``), ``&``, ``or``, ``=>``.
``and`` and ``implies`` are accepted as spellings of ``&`` and ``=>``.
"""

from ..errors import ParseError
from ..lexer import IDENT, INT, STRING, TokenStream, tokenize
from .ast import (AtPre, Binary, EmptySet, Exists, Exists1, IntLit, IsDeleted,
                  KeyLookup, Name, Nav, Select, SizeOf, StrLit)

_BINARY_LEVELS = [
    ("=>",),
    ("or",),
    ("&",),
    ("=", "/=", ":", "<:"),
    ("\\/",),
    ("-",),
]
_WORD_OPS = {"or": "or", "and": "&", "implies": "=>"}


def parse_expr(text):
    ts = TokenStream(tokenize(text))
    expr = parse_expression(ts)
    if not ts.at_end():
        raise ts.error("unexpected token after expression")
    return expr


def parse_expression(ts):
    """Parse one expression from an open token stream, leaving the rest."""
    return _Parser(ts).binary(0)


class _Parser:
    def __init__(self, ts):
        self.ts = ts

    def _binary_op(self, level):
        tok = self.ts.current
        ops = _BINARY_LEVELS[level]
        if tok.kind == IDENT and _WORD_OPS.get(tok.text) in ops:
            return _WORD_OPS[tok.text]
        if tok.kind == "op" and tok.text in ops:
            return tok.text
        return None

    def binary(self, level):
        if level == len(_BINARY_LEVELS):
            return self.postfix()
        start = self.ts.current
        lhs = self.binary(level + 1)
        while True:
            op = self._binary_op(level)
            if op is None:
                return lhs
            self.ts.advance()
            if op == "=>":
                rhs = self.binary(level)  # right associative
                return Binary(op, lhs, rhs, pos=(start.line, start.column))
            rhs = self.binary(level + 1)
            lhs = Binary(op, lhs, rhs, pos=(start.line, start.column))

    def postfix(self):
        ts = self.ts
        expr = self.primary()
        while True:
            tok = ts.current
            pos = (tok.line, tok.column)
            if ts.accept_op("."):
                feature = ts.expect_ident("feature name").text
                expr = Nav(expr, feature, pos=pos)
            elif ts.accept_op("@"):
                ts.expect_word("pre")
                expr = AtPre(expr, pos=pos)
            elif ts.accept_op("->"):
                expr = self.call(expr, pos)
            else:
                return expr

    def call(self, receiver, pos):
        ts = self.ts
        name = ts.expect_ident("collection operation").text
        ts.expect_op("(")
        if name == "size":
            ts.expect_op(")")
            return SizeOf(receiver, pos=pos)
        if name == "isDeleted":
            ts.expect_op(")")
            return IsDeleted(receiver, pos=pos)
        if name in ("select", "exists", "exists1"):
            var = None
            if ts.current.kind == IDENT and ts.peek().is_op("|"):
                var = ts.advance().text
                ts.advance()
            elif name != "select":
                raise ts.error(f"{name} needs a binder 'v | ...'")
            body = self.binary(0)
            ts.expect_op(")")
            if name == "select":
                return Select(receiver, var, body, var is None, pos=pos)
            cls = Exists if name == "exists" else Exists1
            return cls(receiver, var, body, pos=pos)
        raise ParseError(f"unsupported collection operation {name!r}", *pos)

    def primary(self):
        ts = self.ts
        tok = ts.current
        pos = (tok.line, tok.column)
        if tok.kind == INT:
            ts.advance()
            return IntLit(int(tok.text), pos=pos)
        if tok.kind == STRING:
            ts.advance()
            return StrLit(tok.text, pos=pos)
        if ts.accept_op("{"):
            ts.expect_op("}")
            return EmptySet(pos=pos)
        if ts.accept_op("("):
            inner = self.binary(0)
            ts.expect_op(")")
            return inner
        if tok.kind == IDENT and tok.text not in _WORD_OPS:
            ts.advance()
            if ts.accept_op("["):
                index = self.binary(0)
                ts.expect_op("]")
                return KeyLookup(tok.text, index, pos=pos)
            return Name(tok.text, pos=pos)
        raise ts.error("expected an expression")
