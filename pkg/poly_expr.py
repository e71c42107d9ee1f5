"""
Polynomial Expressions in zeta derivatives
Parses F(s) = sum_j c_j z0^d0j z1^d1j ... zk^dkj, where zl stands for zeta^(l)(s),
and computes its degrees deg1, deg2, the index set J and sum_{j in J} c_j.

Grammar:
    expression := term (('+'|'-') term)*
    term       := coeff? ('*'? factor)*
    factor     := 'z' INT ('^' INT)?
    coeff      := decimal | '(' re ',' im ')'
"""

import cmath
import math
import re
from collections import OrderedDict
from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple

from settings import get_setting
from zplab_errors import ConstantExpression, ExpressionSyntaxError, RangeExceeded

TOKEN_PATTERNS = [
    ('NUMBER', r'(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?'),
    ('VAR', r'z\d+'),
    ('POW', r'\^'),
    ('MUL', r'\*'),
    ('PLUS', r'\+'),
    ('MINUS', r'-|−'),
    ('LPAREN', r'\('),
    ('RPAREN', r'\)'),
    ('COMMA', r','),
    ('SPACE', r'\s+'),
]
TOKEN_RE = re.compile('|'.join(f'(?P<{name}>{pattern})' for name, pattern in TOKEN_PATTERNS))


@dataclass(frozen=True)
class Monomial:
    coeff: complex
    exponents: Tuple[int, ...]

    @property
    def deg1(self):
        return sum(self.exponents)

    @property
    def deg2(self):
        return sum(l * d for l, d in enumerate(self.exponents))

    @property
    def is_constant(self):
        return self.deg1 == 0


@dataclass(frozen=True)
class FExpression:
    monomials: Tuple[Monomial, ...]
    k: int

    def __str__(self):
        return format_expression(self)

    @property
    def has_real_coefficients(self):
        return all(complex(m.coeff).imag == 0 for m in self.monomials)

    def scaled(self, factor):
        """c*F with the same monomial order"""
        factor = complex(factor)
        return FExpression(tuple(Monomial(m.coeff * factor, m.exponents) for m in self.monomials), self.k)


@dataclass(frozen=True)
class DegreeReport:
    deg1: int
    deg2: int
    J: Tuple[int, ...]
    sumJ: complex
    condition_holds: bool

    def to_dict(self):
        return {
            'deg1': self.deg1,
            'deg2': self.deg2,
            'J': list(self.J),
            'sumJ': [self.sumJ.real, self.sumJ.imag],
            'condition': self.condition_holds,
        }


# =============================================================================
# CONSTRUCTION
# =============================================================================

def _trim(exponents):
    exponents = list(exponents)
    while exponents and exponents[-1] == 0:
        exponents.pop()
    return tuple(exponents)


def _canonical_key(mono):
    return (mono.deg1, mono.deg2, mono.exponents)


def build_expression(monomials, merge=True):
    """FExpression from Monomials or (coeff, exponents) pairs

    merge=True merges like monomials, drops zero coefficients and sorts into
    canonical order; merge=False keeps the monomials exactly as given.
    """
    items = []
    for mono in monomials:
        if not isinstance(mono, Monomial):
            coeff, exponents = mono
            mono = Monomial(complex(coeff), _trim(exponents))
        else:
            mono = Monomial(complex(mono.coeff), _trim(mono.exponents))
        items.append(mono)

    if merge:
        merged = OrderedDict()
        for mono in items:
            merged[mono.exponents] = merged.get(mono.exponents, 0j) + mono.coeff
        items = [Monomial(c, e) for e, c in merged.items() if c != 0]
        items.sort(key=_canonical_key, reverse=True)

    for mono in items:
        if not cmath.isfinite(mono.coeff):
            raise RangeExceeded(f"coefficient of {_format_factors(mono.exponents) or '1'} is not finite")

    if not items or all(m.is_constant for m in items):
        raise ConstantExpression("F must contain at least one non-constant monomial")

    k = max(len(m.exponents) for m in items) - 1
    return FExpression(tuple(items), max(k, 0))


# =============================================================================
# PARSER
# =============================================================================

class _Parser:
    """Recursive descent parser over the token list"""

    def __init__(self, text):
        self.text = text
        self.tokens = self._tokenize(text)
        self.pos = 0
        self.max_k = get_setting('engine.maxDerivative')

    @staticmethod
    def _tokenize(text):
        tokens = []
        index = 0
        while index < len(text):
            match = TOKEN_RE.match(text, index)
            if not match:
                raise ExpressionSyntaxError(f"unexpected character {text[index]!r}", index)
            if match.lastgroup != 'SPACE':
                tokens.append((match.lastgroup, match.group(), index))
            index = match.end()
        tokens.append(('EOF', '', len(text)))
        return tokens

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def expect(self, kind, what):
        token = self.advance()
        if token[0] != kind:
            raise ExpressionSyntaxError(f"expected {what}, found {token[1] or 'end of input'!r}", token[2])
        return token

    def parse(self):
        terms = []
        sign = 1
        if self.peek()[0] in ('PLUS', 'MINUS'):
            sign = -1 if self.advance()[0] == 'MINUS' else 1
        terms.append(self.term(sign))
        while self.peek()[0] in ('PLUS', 'MINUS'):
            sign = -1 if self.advance()[0] == 'MINUS' else 1
            terms.append(self.term(sign))
        token = self.peek()
        if token[0] != 'EOF':
            raise ExpressionSyntaxError(f"unexpected {token[1]!r}", token[2])
        return terms

    def number(self):
        token = self.expect('NUMBER', 'a number')
        value = float(token[1])
        if not math.isfinite(value):
            raise ExpressionSyntaxError(f"coefficient {token[1]!r} is not finite", token[2])
        return value

    def signed_number(self):
        sign = 1
        if self.peek()[0] in ('PLUS', 'MINUS'):
            sign = -1 if self.advance()[0] == 'MINUS' else 1
        return sign * self.number()

    def coeff(self):
        token = self.peek()
        if token[0] == 'NUMBER':
            return complex(self.number())
        if token[0] == 'LPAREN':
            self.advance()
            re_part = self.signed_number()
            self.expect('COMMA', "','")
            im_part = self.signed_number()
            self.expect('RPAREN', "')'")
            return complex(re_part, im_part)
        return None

    def factor(self, exponents):
        token = self.expect('VAR', "a factor z<k>")
        order = int(token[1][1:])
        if order > self.max_k:
            raise ExpressionSyntaxError(f"derivative order {order} exceeds the ceiling {self.max_k}", token[2])
        power = 1
        if self.peek()[0] == 'POW':
            self.advance()
            token = self.peek()
            if token[0] != 'NUMBER' or not token[1].isdigit():
                raise ExpressionSyntaxError("exponent must be a non-negative integer", token[2])
            power = int(self.advance()[1])
        while len(exponents) <= order:
            exponents.append(0)
        exponents[order] += power

    def term(self, sign):
        start = self.peek()
        coeff = self.coeff()
        exponents = []
        seen_factor = False
        while True:
            token = self.peek()
            if token[0] == 'MUL':
                self.advance()
                self.factor(exponents)
                seen_factor = True
            elif token[0] == 'VAR':
                self.factor(exponents)
                seen_factor = True
            else:
                break
        if coeff is None and not seen_factor:
            raise ExpressionSyntaxError(f"expected a term, found {start[1] or 'end of input'!r}", start[2])
        if coeff is None:
            coeff = 1 + 0j
        return sign * coeff, tuple(exponents)


def parse_expression(text):
    """Parse text into a canonical FExpression"""
    if not text or not text.strip():
        raise ExpressionSyntaxError("empty expression", 0)
    max_len = get_setting('expression.maxLength')
    if len(text.encode('utf-8')) > max_len:
        raise ExpressionSyntaxError(f"expression longer than {max_len} bytes", max_len)
    return build_expression(_Parser(text).parse())


# =============================================================================
# PRINTER
# =============================================================================

def _format_real(x):
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


def _format_factors(exponents):
    parts = []
    for l, d in enumerate(exponents):
        if d == 1:
            parts.append(f"z{l}")
        elif d > 1:
            parts.append(f"z{l}^{d}")
    return '*'.join(parts)


def format_expression(expr):
    """Canonical text such that parse_expression(format_expression(F)) == F"""
    out = []
    for i, mono in enumerate(expr.monomials):
        c = complex(mono.coeff)
        factors = _format_factors(mono.exponents)
        if c.imag != 0:
            sign = '' if i == 0 else ' + '
            coeff = f"({_format_real(c.real)},{_format_real(c.imag)})"
        else:
            negative = c.real < 0
            sign = ('-' if negative else '') if i == 0 else (' - ' if negative else ' + ')
            magnitude = abs(c.real)
            coeff = '' if magnitude == 1 and factors else _format_real(magnitude)
        if coeff and factors:
            out.append(f"{sign}{coeff}*{factors}")
        else:
            out.append(f"{sign}{coeff}{factors}")
    return ''.join(out)


# =============================================================================
# DEGREES AND DERIVATIVE
# =============================================================================

def degrees(expr):
    """deg1, deg2, J and the hypothesis sum_{j in J} c_j != 0"""
    deg1 = max(m.deg1 for m in expr.monomials)
    deg2 = max(m.deg2 for m in expr.monomials if m.deg1 == deg1)
    J = tuple(j for j, m in enumerate(expr.monomials) if m.deg1 == deg1 and m.deg2 == deg2)
    sumJ = sum((complex(expr.monomials[j].coeff) for j in J), 0j)
    tolerance = get_setting('expression.conditionTolerance') * max(abs(m.coeff) for m in expr.monomials)
    return DegreeReport(deg1, deg2, J, sumJ, abs(sumJ) > tolerance)


@lru_cache(maxsize=256)
def differentiate(expr):
    """F' by the product rule: d/ds z_l = z_{l+1}"""
    terms = []
    for mono in expr.monomials:
        for l, d in enumerate(mono.exponents):
            if d == 0:
                continue
            exponents = list(mono.exponents) + [0]
            exponents[l] -= 1
            exponents[l + 1] += 1
            terms.append((mono.coeff * d, exponents))
    return build_expression(terms)


if __name__ == '__main__':
    for text in ["z1^2 + z0^3", "2*z0*z1 + 5*z0^2", "z0*z2 - z1^2"]:
        expr = parse_expression(text)
        print(f"{text:20s} -> {format_expression(expr):25s} {degrees(expr).to_dict()}")
