"""
表达式解析与打印 - 微分多项式的文本形式

语法:

    poly   := ['-'|'+'] term (('+'|'-') term)*
    term   := factor ('*' factor)*
    factor := (indet | '(' poly ')' | rational) ['^' nat]
    indet  := deriv* 'x' '[' (element ',')? nat ']'
    deriv  := 'd' nat ['^' nat]
    rational := int ['/' nat]

元素名省略时取单位元所在的块. 打印结果总能被解析回同一个多项式.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional, Union

from .diffpoly import Ambient, DerivOp, DiffPoly, Indeterminate
from .errors import ParseError, UnknownGroupElementError

TOKEN_RE = re.compile(
    r"(?P<num>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^()\[\],])|(?P<space>\s+)"
)
DERIV_RE = re.compile(r"d(\d+)\Z")


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    column: int


def tokenize(text: str, line: int = 1, source: str = "") -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        match = TOKEN_RE.match(text, pos)
        if match is None:
            raise ParseError(f"无法识别的字符 {text[pos]!r}", line, pos + 1, source)
        kind = match.lastgroup
        if kind != "space":
            tokens.append(Token(kind, match.group(), pos + 1))
        pos = match.end()
    tokens.append(Token("eof", "", len(text) + 1))
    return tokens


class _Parser:
    def __init__(self, text: str, ambient: Ambient, line: int = 1, source: str = ""):
        self.ambient = ambient
        self.line = line
        self.source = source
        self.tokens = tokenize(text, line, source)
        self.pos = 0

    def error(self, message: str, token: Optional[Token] = None) -> ParseError:
        token = token or self.peek()
        return ParseError(message, self.line, token.column, self.source)

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def take(self) -> Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def at(self, text: str) -> bool:
        token = self.peek()
        return token.kind == "op" and token.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.peek().text or "输入结尾"
            raise self.error(f"期望 {text!r}, 实际为 {found!r}")
        return self.take()

    def nat(self) -> int:
        token = self.peek()
        if token.kind != "num":
            raise self.error(f"期望自然数, 实际为 {token.text or '输入结尾'!r}")
        self.take()
        return int(token.text)

    # ---- 语法规则 ----

    def parse(self) -> DiffPoly:
        result = self.poly()
        if self.peek().kind != "eof":
            raise self.error(f"多余的输入 {self.peek().text!r}")
        return result

    def poly(self) -> DiffPoly:
        negate = False
        if self.at("-") or self.at("+"):
            negate = self.take().text == "-"
        result = self.term()
        if negate:
            result = -result
        while self.at("+") or self.at("-"):
            op = self.take().text
            rhs = self.term()
            result = result + rhs if op == "+" else result - rhs
        return result

    def term(self) -> DiffPoly:
        result = self.factor()
        while self.at("*"):
            self.take()
            result = result * self.factor()
        return result

    def factor(self) -> DiffPoly:
        token = self.peek()
        if self.at("("):
            self.take()
            base = self.poly()
            self.expect(")")
        elif token.kind == "num":
            base = DiffPoly.constant(self.ambient, self.rational())
        elif token.kind == "ident":
            base = DiffPoly.from_indeterminate(self.ambient, self.indet())
        else:
            raise self.error(f"期望因子, 实际为 {token.text or '输入结尾'!r}")
        if self.at("^"):
            self.take()
            base = base ** self.nat()
        return base

    def rational(self) -> Fraction:
        numerator = self.nat()
        if not self.at("/"):
            return Fraction(numerator)
        self.take()
        token = self.peek()
        denominator = self.nat()
        if denominator == 0:
            raise self.error("分母为 0", token)
        return Fraction(numerator, denominator)

    def indet(self) -> Indeterminate:
        m, n = self.ambient.m, self.ambient.n
        exps = [0] * m
        while self.peek().kind == "ident" and (match := DERIV_RE.match(self.peek().text)):
            token = self.take()
            j = int(match.group(1))
            if j == 0:
                raise self.error("微分下标从 1 开始", token)
            if j > m:
                raise self.error(f"未知微分下标 d{j} (m={m})", token)
            times = 1
            if self.at("^"):
                self.take()
                times = self.nat()
            exps[j - 1] += times

        token = self.peek()
        if token.kind != "ident" or token.text != "x":
            raise self.error(f"期望 x[...], 实际为 {token.text or '输入结尾'!r}")
        self.take()
        self.expect("[")
        block = 0
        token = self.peek()
        if token.kind == "ident":
            self.take()
            try:
                block = self.ambient.block_of(token.text)
            except UnknownGroupElementError as e:
                raise self.error(str(e), token) from None
            self.expect(",")
        token = self.peek()
        index = self.nat()
        if not 1 <= index <= n:
            raise self.error(f"变量下标 {index} 超出范围 1..{n}", token)
        self.expect("]")
        return Indeterminate(block, index, DerivOp(tuple(exps)))


def parse_poly(text: str, ambient: Ambient, line: int = 1, source: str = "") -> DiffPoly:
    return _Parser(text, ambient, line, source).parse()


def parse_poly_lines(text: str, ambient: Ambient, source: str = "") -> list[DiffPoly]:
    """每行一个多项式, `#` 之后为注释, 空行忽略"""
    polys = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if line.strip():
            polys.append(parse_poly(line, ambient, lineno, source))
    return polys


def parse_poly_file(path: Union[str, Path], ambient: Ambient) -> list[DiffPoly]:
    path = Path(path)
    return parse_poly_lines(path.read_text(encoding="utf-8"), ambient, str(path))


def print_poly(f: DiffPoly) -> str:
    if f.is_zero:
        return "0"
    ambient = f.ambient
    parts = []
    for k, (mono, c) in enumerate(f.terms):
        factors = [
            ambient.indet_name(v) + (f"^{e}" if e > 1 else "") for v, e in mono.factors
        ]
        magnitude = abs(c)
        if not factors:
            body = str(magnitude)
        elif magnitude == 1:
            body = " * ".join(factors)
        else:
            body = " * ".join([str(magnitude), *factors])
        if k == 0:
            parts.append(f"-{body}" if c < 0 else body)
        else:
            parts.append(f" - {body}" if c < 0 else f" + {body}")
    return "".join(parts)
