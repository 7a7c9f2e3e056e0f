"""
Recursive-descent parser for the extended-SQL dialect

    program  := { stmt }
    stmt     := register | policy | select
    register := REGISTER TABLE ident AT region CARD int ROWBYTES int
                COLS "(" col { "," col } ")" ";"
    col      := ident type [ DISTINCT int ]
    policy   := CONSTRAINT ( DENY SHIP FROM region TO ( region | ANY )
                           | ALLOW ONLY AGGREGATED FROM region ) ";"
    select   := SELECT items FROM ident { "," ident } [ WHERE pred { AND pred } ]
                [ GROUP BY colref { "," colref } ] [ AT region ] ";"

Keywords are case-insensitive; identifiers keep their spelling.
"""

from typing import Iterable, List, Optional, Set, Tuple, cast

from agora.errors import QuerySyntaxError
from agora.models.assets import ColumnType
from agora.models.constraints import AggregatedOnly, DenyShip
from agora.models.regions import ANY_REGION, Region

from .ast import (
    AGGREGATE_FUNCTIONS,
    COMPARATORS,
    AggregateCall,
    ColumnDef,
    ColumnRef,
    FilterPredicate,
    JoinPredicate,
    Literal,
    PolicyStatement,
    Predicate,
    Query,
    RegisterTable,
    SelectItem,
    SelectSpec,
    Statement,
)
from .lexer import Token, TokenKind, tokenize

TYPE_NAMES = {
    "INT": ColumnType.INT64,
    "FLOAT": ColumnType.FLOAT64,
    "TEXT": ColumnType.TEXT,
    "BOOL": ColumnType.BOOL,
    "DATE": ColumnType.DATE,
}
REGION_NAMES = {r.value: r for r in Region}
STATEMENT_STARTS = {"REGISTER", "CONSTRAINT", "SELECT"}


class Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0

    # -- token helpers ------------------------------------------------------

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def fail(self, expected: Iterable[str], token: Optional[Token] = None) -> QuerySyntaxError:
        token = token or self.current
        return QuerySyntaxError(token.line, token.column, expected, str(token))

    def advance(self) -> Token:
        token = self.current
        if token.kind != TokenKind.EOF:
            self.pos += 1
        return token

    def at_keyword(self, word: str) -> bool:
        return self.current.kind == TokenKind.WORD and self.current.upper == word

    def at_symbol(self, symbol: str) -> bool:
        return self.current.kind == TokenKind.SYMBOL and self.current.text == symbol

    def keyword(self, word: str) -> Token:
        if not self.at_keyword(word):
            raise self.fail({word})
        return self.advance()

    def symbol(self, symbol: str) -> Token:
        if not self.at_symbol(symbol):
            raise self.fail({symbol})
        return self.advance()

    def identifier(self) -> str:
        token = self.current
        if token.kind != TokenKind.WORD or token.keyword:
            raise self.fail({"identifier"})
        return self.advance().text

    def integer(self) -> int:
        if self.current.kind != TokenKind.INT:
            raise self.fail({"integer"})
        return int(self.advance().text)

    def region(self, allow_any: bool = False) -> Region | str:
        token = self.current
        expected: Set[str] = set(REGION_NAMES)
        if allow_any:
            expected.add(ANY_REGION)
        if token.kind == TokenKind.WORD:
            if token.upper in REGION_NAMES:
                self.advance()
                return REGION_NAMES[token.upper]
            if allow_any and token.upper == ANY_REGION:
                self.advance()
                return ANY_REGION
        raise self.fail(expected)

    def home_region(self) -> Region:
        return cast(Region, self.region())

    # -- statements ---------------------------------------------------------

    def program(self) -> List[Statement]:
        statements: List[Statement] = []
        while self.current.kind != TokenKind.EOF:
            statements.append(self.statement())
        return statements

    def statement(self) -> Statement:
        if self.at_keyword("REGISTER"):
            return self.register()
        if self.at_keyword("CONSTRAINT"):
            return self.policy()
        if self.at_keyword("SELECT"):
            return Query(self.select())
        raise self.fail(STATEMENT_STARTS)

    def register(self) -> RegisterTable:
        self.keyword("REGISTER")
        self.keyword("TABLE")
        name = self.identifier()
        self.keyword("AT")
        region = self.home_region()
        self.keyword("CARD")
        row_count = self.integer()
        self.keyword("ROWBYTES")
        bytes_token = self.current
        row_bytes = self.integer()
        if row_bytes <= 0:
            raise self.fail({"positive row width"}, bytes_token)
        self.keyword("COLS")
        self.symbol("(")
        columns = [self.column_def(row_count)]
        while self.at_symbol(","):
            self.advance()
            columns.append(self.column_def(row_count))
        self.symbol(")")
        self.symbol(";")
        names = [c.name for c in columns]
        if len(set(names)) != len(names):
            raise self.fail({"distinct column names"}, self.tokens[self.pos - 2])
        return RegisterTable(name, region, row_count, row_bytes, tuple(columns))

    def column_def(self, row_count: int) -> ColumnDef:
        name = self.identifier()
        token = self.current
        if token.kind != TokenKind.WORD or token.upper not in TYPE_NAMES:
            raise self.fail(set(TYPE_NAMES))
        column_type = TYPE_NAMES[self.advance().upper]
        distinct = None
        if self.at_keyword("DISTINCT"):
            self.advance()
            count_token = self.current
            distinct = self.integer()
            if row_count > 0 and not 1 <= distinct <= row_count:
                raise self.fail({f"distinct count in [1, {row_count}]"}, count_token)
        return ColumnDef(name, column_type, distinct)

    def policy(self) -> PolicyStatement:
        self.keyword("CONSTRAINT")
        if self.at_keyword("DENY"):
            self.advance()
            self.keyword("SHIP")
            self.keyword("FROM")
            origin = self.home_region()
            self.keyword("TO")
            target_token = self.current
            destination = self.region(allow_any=True)
            if destination == origin:
                raise self.fail({f"region other than {origin}"}, target_token)
            self.symbol(";")
            return PolicyStatement(DenyShip(origin=origin, destination=destination))
        if self.at_keyword("ALLOW"):
            self.advance()
            self.keyword("ONLY")
            self.keyword("AGGREGATED")
            self.keyword("FROM")
            origin = self.home_region()
            self.symbol(";")
            return PolicyStatement(AggregatedOnly(origin=origin))
        raise self.fail({"DENY", "ALLOW"})

    def select(self) -> SelectSpec:
        self.keyword("SELECT")
        projections: Tuple[SelectItem, ...] = ()
        if self.at_symbol("*"):
            self.advance()
        else:
            items = [self.select_item()]
            while self.at_symbol(","):
                self.advance()
                items.append(self.select_item())
            projections = tuple(items)
        self.keyword("FROM")
        tables = [self.identifier()]
        while self.at_symbol(","):
            self.advance()
            tables.append(self.identifier())

        predicates: List[Predicate] = []
        if self.at_keyword("WHERE"):
            self.advance()
            predicates.append(self.predicate())
            while self.at_keyword("AND"):
                self.advance()
                predicates.append(self.predicate())

        group_by: List[ColumnRef] = []
        if self.at_keyword("GROUP"):
            self.advance()
            self.keyword("BY")
            group_by.append(self.column_ref())
            while self.at_symbol(","):
                self.advance()
                group_by.append(self.column_ref())

        target = None
        if self.at_keyword("AT"):
            self.advance()
            target = self.home_region()
        if not self.at_symbol(";"):
            raise self.fail({";", ",", "AND", "WHERE", "GROUP", "AT"})
        self.advance()
        return SelectSpec(
            projections=projections,
            tables=tuple(tables),
            predicates=tuple(predicates),
            group_by=tuple(group_by),
            target_region=target,  # type: ignore[arg-type]
        )

    def select_item(self) -> SelectItem:
        token = self.current
        if (
            token.kind == TokenKind.WORD
            and token.upper in AGGREGATE_FUNCTIONS
            and self.peek().kind == TokenKind.SYMBOL
            and self.peek().text == "("
        ):
            self.advance()
            self.symbol("(")
            argument: Optional[ColumnRef] = None
            if self.at_symbol("*"):
                if token.upper != "COUNT":
                    raise self.fail({"column reference"})
                self.advance()
            else:
                argument = self.column_ref()
            self.symbol(")")
            return AggregateCall(token.upper, argument)
        if token.kind != TokenKind.WORD or token.keyword:
            raise self.fail({"*", "column reference", "aggregate call"})
        return self.column_ref()

    def column_ref(self) -> ColumnRef:
        first = self.identifier()
        if self.at_symbol("."):
            self.advance()
            return ColumnRef(first, self.identifier())
        return ColumnRef(None, first)

    def predicate(self) -> Predicate:
        left = self.column_ref()
        token = self.current
        if token.kind != TokenKind.SYMBOL or token.text not in COMPARATORS:
            raise self.fail(set(COMPARATORS))
        op = self.advance().text
        if self.current.kind == TokenKind.WORD and not self.current.keyword:
            right_token = self.current
            right = self.column_ref()
            if op != "=":
                raise self.fail({"literal"}, right_token)
            return JoinPredicate(left, right)
        return FilterPredicate(left, op, self.literal())

    def literal(self) -> Literal:
        token = self.current
        negative = False
        if self.at_symbol("-"):
            negative = True
            self.advance()
            token = self.current
            if token.kind not in (TokenKind.INT, TokenKind.FLOAT):
                raise self.fail({"number"})
        if token.kind == TokenKind.INT:
            self.advance()
            return -int(token.text) if negative else int(token.text)
        if token.kind == TokenKind.FLOAT:
            self.advance()
            return -float(token.text) if negative else float(token.text)
        if token.kind == TokenKind.STRING:
            self.advance()
            return token.text
        if self.at_keyword("TRUE") or self.at_keyword("FALSE"):
            self.advance()
            return token.upper == "TRUE"
        raise self.fail({"literal", "column reference"})


def parse_program(text: str) -> List[Statement]:
    """Statements in source order; raises QuerySyntaxError at the offending token."""
    return Parser(text).program()
