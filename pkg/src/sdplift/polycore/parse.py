"""Parse and print polynomial expressions.

Grammar (whitespace insignificant, no implicit multiplication)::

    expr   := ["+"|"-"] term (("+"|"-") term)*
    term   := factor ("*" factor)*
    factor := coef | var ["^" uint]
    coef   := int | int "/" uint | decimal
"""

from __future__ import annotations

import re
from fractions import Fraction

from .polynomial import Polynomial, grlex_key

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<num>\d+\.\d*|\.\d+|\d+)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^])"
    r")"
)
_CANONICAL = re.compile(r"x(\d+)$")


class PolynomialParseError(ValueError):
    pass


class PolynomialSyntaxError(PolynomialParseError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnknownIdentifierError(PolynomialParseError):
    def __init__(self, name: str, position: int):
        super().__init__(f"unknown identifier {name!r} at position {position}")
        self.name = name
        self.position = position


class NegativeExponentError(PolynomialParseError):
    def __init__(self, position: int):
        super().__init__(f"negative exponent at position {position}")
        self.position = position


def check_names(names) -> list[str]:
    """Validate a variable-name list; canonical names ``xk`` must sit at slot k."""
    names = list(names)
    if not names:
        raise ValueError("at least one variable is required")
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate variable names in {names}")
    for pos, name in enumerate(names):
        if not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", name):
            raise ValueError(f"invalid variable name {name!r}")
        m = _CANONICAL.match(name)
        if m and int(m.group(1)) != pos + 1:
            raise ValueError(f"{name!r} shadows the canonical name of variable {pos + 1}")
    return names


def canonical_names(n: int) -> list[str]:
    return [f"x{i + 1}" for i in range(n)]


def _tokenize(text: str):
    pos = 0
    tokens = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            start = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise PolynomialSyntaxError(f"unexpected character {text[start]!r}", start)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, names: list[str]):
        self.tokens = _tokenize(text)
        self.i = 0
        self.index = {name: k for k, name in enumerate(names)}
        self.n = len(names)

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op):
        kind, value, pos = self.take()
        if kind != "op" or value != op:
            raise PolynomialSyntaxError(f"expected {op!r}", pos)

    def expr(self) -> Polynomial:
        total = Polynomial(self.n)
        sign = 1
        kind, value, _ = self.peek()
        if kind == "op" and value in "+-":
            self.take()
            sign = -1 if value == "-" else 1
        total = total + self.term() * sign
        while True:
            kind, value, pos = self.peek()
            if kind == "op" and value in "+-":
                self.take()
                t = self.term()
                total = total + t if value == "+" else total - t
            elif kind == "end":
                return total
            else:
                raise PolynomialSyntaxError(f"unexpected {value!r}", pos)

    def term(self) -> Polynomial:
        result = self.factor()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value == "*":
                self.take()
                result = result * self.factor()
            else:
                return result

    def factor(self) -> Polynomial:
        kind, value, pos = self.take()
        if kind == "num":
            if "." in value:
                return Polynomial.constant(self.n, Fraction(value))
            num = int(value)
            k2, v2, _ = self.peek()
            if k2 == "op" and v2 == "/":
                self.take()
                k3, v3, p3 = self.take()
                if k3 != "num" or "." in v3:
                    raise PolynomialSyntaxError("expected an unsigned integer denominator", p3)
                if int(v3) == 0:
                    raise PolynomialSyntaxError("zero denominator", p3)
                return Polynomial.constant(self.n, Fraction(num, int(v3)))
            return Polynomial.constant(self.n, num)
        if kind == "name":
            if value not in self.index:
                raise UnknownIdentifierError(value, pos)
            var = Polynomial.variable(self.n, self.index[value])
            k2, v2, _ = self.peek()
            if k2 == "op" and v2 == "^":
                self.take()
                k3, v3, p3 = self.take()
                if k3 == "op" and v3 == "-":
                    raise NegativeExponentError(p3)
                if k3 != "num" or "." in v3:
                    raise PolynomialSyntaxError("expected an unsigned integer exponent", p3)
                return var ** int(v3)
            return var
        if kind == "end":
            raise PolynomialSyntaxError("unexpected end of input", pos)
        raise PolynomialSyntaxError(f"unexpected {value!r}", pos)


def parse_polynomial(text: str, names) -> Polynomial:
    names = check_names(names)
    return _Parser(text, names).expr()


def _format_coef(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_polynomial(p: Polynomial, names=None) -> str:
    """Print in the parser's grammar, highest degree first."""
    names = names or canonical_names(p.nvars)
    if p.is_zero():
        return "0"
    parts = []
    for alpha, c in sorted(p.items(), key=lambda kv: (-sum(kv[0]), grlex_key(kv[0])[1])):
        factors = []
        for k, e in enumerate(alpha):
            if e == 1:
                factors.append(names[k])
            elif e > 1:
                factors.append(f"{names[k]}^{e}")
        mag = abs(c)
        if not factors:
            body = _format_coef(mag)
        elif mag == 1:
            body = "*".join(factors)
        else:
            body = "*".join([_format_coef(mag)] + factors)
        if not parts:
            parts.append(("-" if c < 0 else "") + body)
        else:
            parts.append(("- " if c < 0 else "+ ") + body)
    return " ".join(parts)


def parse_constraint(text: str, names) -> Polynomial:
    """Parse ``lhs >= rhs`` (or ``lhs <= rhs``) into ``g`` with meaning ``g >= 0``."""
    for op, sign in ((">=", 1), ("<=", -1)):
        if op in text:
            lhs, _, rhs = text.partition(op)
            if op in rhs or (">=" if op == "<=" else "<=") in rhs:
                raise PolynomialSyntaxError("more than one comparison", len(lhs) + 2 + rhs.find("="))
            g = parse_polynomial(lhs, names) - _shifted(rhs, names, len(lhs) + 2)
            return g if sign > 0 else -g
    raise PolynomialSyntaxError("constraint needs '>=' or '<='", len(text))


def _shifted(text, names, offset):
    try:
        return parse_polynomial(text, names)
    except PolynomialSyntaxError as exc:
        raise PolynomialSyntaxError(str(exc).rsplit(" at position", 1)[0], exc.position + offset) from None
    except UnknownIdentifierError as exc:
        raise UnknownIdentifierError(exc.name, exc.position + offset) from None
