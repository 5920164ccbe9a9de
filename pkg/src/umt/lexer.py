"""Tokenizer shared by all textual front ends."""

from dataclasses import dataclass

from .errors import ParseError

IDENT = "ident"
INT = "int"
STRING = "string"
OP = "op"
EOF = "eof"

# longest first
_OPERATORS = ("->", "/=", "<:", "\\/", "=>", "@", "(", ")", "{", "}", "[", "]",
              ".", ",", ":", ";", "=", "-", "&", "|")


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int

    def is_op(self, text):
        return self.kind == OP and self.text == text

    def is_word(self, text):
        return self.kind == IDENT and self.text == text


def tokenize(text):
    """Split ``text`` into tokens; ``--`` starts a comment running to end of line."""
    tokens = []
    line, col, i, n = 1, 1, 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line, col, i = line + 1, 1, i + 1
            continue
        if ch in " \t\r":
            i, col = i + 1, col + 1
            continue
        if text.startswith("--", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        start_col = col
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(Token(IDENT, text[i:j], line, start_col))
        elif ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(Token(INT, text[i:j], line, start_col))
        elif ch == '"':
            j = text.find('"', i + 1)
            nl = text.find("\n", i + 1)
            if j < 0 or (0 <= nl < j):
                raise ParseError("unterminated string literal", line, start_col)
            j += 1
            tokens.append(Token(STRING, text[i + 1:j - 1], line, start_col))
        else:
            for op in _OPERATORS:
                if text.startswith(op, i):
                    j = i + len(op)
                    tokens.append(Token(OP, op, line, start_col))
                    break
            else:
                raise ParseError(f"unexpected character {ch!r}", line, start_col)
        col += j - i
        i = j
    tokens.append(Token(EOF, "", line, col))
    return tokens


class TokenStream:
    """Cursor over a token list with the usual expect/accept helpers."""

    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    @property
    def current(self):
        return self.tokens[self.pos]

    def peek(self, offset=1):
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def advance(self):
        tok = self.tokens[self.pos]
        if tok.kind != EOF:
            self.pos += 1
        return tok

    def at_end(self):
        return self.current.kind == EOF

    def error(self, message, tok=None):
        tok = tok or self.current
        found = tok.text if tok.kind != EOF else "end of input"
        return ParseError(f"{message} (found {found!r})", tok.line, tok.column)

    def accept_op(self, text):
        if self.current.is_op(text):
            return self.advance()
        return None

    def accept_word(self, text):
        if self.current.is_word(text):
            return self.advance()
        return None

    def expect_op(self, text):
        tok = self.accept_op(text)
        if tok is None:
            raise self.error(f"expected {text!r}")
        return tok

    def expect_word(self, text):
        tok = self.accept_word(text)
        if tok is None:
            raise self.error(f"expected {text!r}")
        return tok

    def expect_ident(self, what="identifier"):
        if self.current.kind != IDENT:
            raise self.error(f"expected {what}")
        return self.advance()
