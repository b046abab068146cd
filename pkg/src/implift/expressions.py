"""Tiny arithmetic expression language for user-defined residuals.

Grammar (precedence climbing, ^ is right-associative and binds tighter than
unary minus):

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | VARIABLE | FUNCTION '(' expr ')' | '(' expr ')'

Functions: exp, log, sin, cos. Variables: x1..xm, y1..yn. The unicode
glyphs for minus, times and divide are accepted as aliases.
"""

from __future__ import annotations

import math
import re

from .errors import ExpressionError

FUNCTIONS = {"exp": math.exp, "log": math.log, "sin": math.sin, "cos": math.cos}

_TOKEN = re.compile(r"""
    \s*(?:
      (?P<number>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)
    | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
    | (?P<op>[-+*/^()])
    )""", re.VERBOSE)

_ALIASES = str.maketrans({"−": "-", "×": "*", "÷": "/"})


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        if match is None:
            tail = text[pos:].lstrip()
            if not tail:
                break
            raise ExpressionError(f"unexpected character {tail[0]!r} at position {pos}")
        if match.lastgroup == "number":
            tokens.append(("number", float(match.group("number"))))
        elif match.lastgroup == "ident":
            tokens.append(("ident", match.group("ident")))
        else:
            tokens.append(("op", match.group("op")))
        pos = match.end()
    tokens.append(("end", None))
    return tokens


class Expression:
    """Parsed expression; evaluate with a variable environment."""

    def __init__(self, root, variables, text):
        self._root = root
        self.variables = variables
        self.text = text

    def evaluate(self, env):
        try:
            return _eval(self._root, env)
        except (ValueError, OverflowError) as exc:
            raise ExpressionError(f"evaluation of {self.text!r} failed: {exc}") from exc

    def __repr__(self):
        return f"Expression({self.text!r})"


def _eval(node, env):
    kind = node[0]
    if kind == "num":
        return node[1]
    if kind == "var":
        return env[node[1]]
    if kind == "neg":
        return -_eval(node[1], env)
    if kind == "call":
        return FUNCTIONS[node[1]](_eval(node[2], env))
    op, a, b = node[1], _eval(node[2], env), _eval(node[3], env)
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        return a / b
    return a ** b  # "^"


class _Parser:
    def __init__(self, tokens, text):
        self.tokens = tokens
        self.pos = 0
        self.text = text
        self.variables = set()

    def peek(self):
        return self.tokens[self.pos]

    def take(self):
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def expect_op(self, op):
        kind, value = self.take()
        if kind != "op" or value != op:
            raise ExpressionError(f"expected {op!r} in {self.text!r}")

    def parse(self):
        root = self.expr()
        kind, value = self.take()
        if kind != "end":
            raise ExpressionError(f"trailing input {value!r} in {self.text!r}")
        return root

    def expr(self):
        node = self.term()
        while self.peek() == ("op", "+") or self.peek() == ("op", "-"):
            _, op = self.take()
            node = ("bin", op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek() == ("op", "*") or self.peek() == ("op", "/"):
            _, op = self.take()
            node = ("bin", op, node, self.unary())
        return node

    def unary(self):
        if self.peek() == ("op", "-"):
            self.take()
            return ("neg", self.unary())
        return self.power()

    def power(self):
        node = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            node = ("bin", "^", node, self.unary())
        return node

    def atom(self):
        kind, value = self.take()
        if kind == "number":
            return ("num", value)
        if kind == "ident":
            if self.peek() == ("op", "("):
                if value not in FUNCTIONS:
                    raise ExpressionError(f"unknown function {value!r} in {self.text!r}")
                self.take()
                arg = self.expr()
                self.expect_op(")")
                return ("call", value, arg)
            self.variables.add(value)
            return ("var", value)
        if kind == "op" and value == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise ExpressionError(f"unexpected token {value!r} in {self.text!r}")


def parse_expression(text):
    cleaned = text.translate(_ALIASES)
    parser = _Parser(_tokenize(cleaned), text)
    root = parser.parse()
    return Expression(root, frozenset(parser.variables), text)


def compile_residual(expressions, m, n):
    """Build a residual callable from expression strings over x1..xm, y1..yn."""
    allowed = {f"x{i + 1}" for i in range(m)} | {f"y{j + 1}" for j in range(n)}
    parsed = []
    for text in expressions:
        expr = parse_expression(text)
        stray = expr.variables - allowed
        if stray:
            raise ExpressionError(
                f"unknown variables {sorted(stray)} in {text!r}; "
                f"allowed: x1..x{m}, y1..y{n}")
        parsed.append(expr)

    def residual(x, y):
        env = {f"x{i + 1}": float(x[i]) for i in range(m)}
        env.update({f"y{j + 1}": float(y[j]) for j in range(n)})
        return [expr.evaluate(env) for expr in parsed]

    return residual
