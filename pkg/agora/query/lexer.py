"""
Tokenizer for the extended-SQL dialect
Positions are 1-based (line, column) of the token's first character.
"""

from dataclasses import dataclass
from enum import Enum
from typing import List

from agora.errors import QuerySyntaxError

RESERVED = frozenset(
    {
        "AGGREGATED", "ALLOW", "AND", "ANY", "AT", "BY", "CARD", "COLS", "CONSTRAINT",
        "DENY", "DISTINCT", "FALSE", "FROM", "GROUP", "ONLY", "REGISTER", "ROWBYTES",
        "SELECT", "SHIP", "TABLE", "TO", "TRUE", "WHERE",
    }
)

SYMBOLS = ("<=", ">=", "<>", "!=", "(", ")", ",", ";", ".", "*", "=", "<", ">", "-")


class TokenKind(str, Enum):
    WORD = "word"
    INT = "int"
    FLOAT = "float"
    STRING = "string"
    SYMBOL = "symbol"
    EOF = "eof"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    line: int
    column: int

    @property
    def upper(self) -> str:
        return self.text.upper()

    @property
    def keyword(self) -> bool:
        return self.kind == TokenKind.WORD and self.upper in RESERVED

    def __str__(self) -> str:
        return "end of input" if self.kind == TokenKind.EOF else self.text


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    i, line, line_start = 0, 1, 0
    n = len(text)
    while i < n:
        ch = text[i]
        column = i - line_start + 1
        if ch == "\n":
            i += 1
            line += 1
            line_start = i
        elif ch.isspace():
            i += 1
        elif text.startswith("--", i):
            while i < n and text[i] != "\n":
                i += 1
        elif ch.isalpha() or ch == "_":
            start = i
            while i < n and (text[i].isalnum() or text[i] == "_"):
                i += 1
            tokens.append(Token(TokenKind.WORD, text[start:i], line, column))
        elif ch.isdigit():
            start = i
            while i < n and text[i].isdigit():
                i += 1
            kind = TokenKind.INT
            if i + 1 < n and text[i] == "." and text[i + 1].isdigit():
                i += 1
                while i < n and text[i].isdigit():
                    i += 1
                kind = TokenKind.FLOAT
            tokens.append(Token(kind, text[start:i], line, column))
        elif ch == "'":
            i += 1
            chars: List[str] = []
            while True:
                if i >= n or text[i] == "\n":
                    raise QuerySyntaxError(line, column, {"closing quote"}, "end of line")
                if text[i] == "'":
                    if i + 1 < n and text[i + 1] == "'":
                        chars.append("'")
                        i += 2
                        continue
                    i += 1
                    break
                chars.append(text[i])
                i += 1
            tokens.append(Token(TokenKind.STRING, "".join(chars), line, column))
        else:
            symbol = next((s for s in SYMBOLS if text.startswith(s, i)), None)
            if symbol is None:
                raise QuerySyntaxError(line, column, {"token"}, ch)
            tokens.append(Token(TokenKind.SYMBOL, symbol, line, column))
            i += len(symbol)
    tokens.append(Token(TokenKind.EOF, "", line, i - line_start + 1))
    return tokens
