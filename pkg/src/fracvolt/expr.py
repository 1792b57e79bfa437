"""Recursive-descent parser/evaluator for custom radial weight formulas.

Grammar (one variable, ``r``):

    expr   := ('+'|'-')? term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := base ('^' factor)?
    base   := NUMBER | 'r' | FUNC '(' expr ')' | '(' expr ')'
    FUNC   in {exp, log, sqrt}

'^' associates to the right.  A leading sign is accepted so that formulas
like ``exp(-1/(1-r))`` parse.  Evaluation is numpy-vectorised, and the AST
supports symbolic differentiation so that a weight can be specified by its
tail function, with the density recovered as -d/dr of the tail.
"""

from __future__ import annotations

import re
from typing import Union

import numpy as np

Node = tuple


class ExprError(ValueError):
    """Malformed formula or evaluation outside the weight's domain."""


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))")

_FUNCS = ("exp", "log", "sqrt")


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ExprError(f"unexpected character at position {pos}: {text[pos:]!r}")
        if m.group("num") is not None:
            tokens.append(("num", float(m.group("num"))))
        elif m.group("name") is not None:
            tokens.append(("name", m.group("name")))
        else:
            tokens.append(("op", m.group("op")))
        pos = m.end()
    tokens.append(("end", None))
    return tokens


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op):
        kind, val = self.next()
        if kind != "op" or val != op:
            raise ExprError(f"expected {op!r}, got {val!r}")

    def parse(self) -> Node:
        node = self.expr()
        if self.peek()[0] != "end":
            raise ExprError(f"trailing input: {self.peek()[1]!r}")
        return node

    def expr(self) -> Node:
        kind, val = self.peek()
        if kind == "op" and val in "+-":
            self.next()
            node = self.term()
            if val == "-":
                node = ("neg", node)
        else:
            node = self.term()
        while self.peek() == ("op", "+") or self.peek() == ("op", "-"):
            _, op = self.next()
            rhs = self.term()
            node = ("add" if op == "+" else "sub", node, rhs)
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.peek() == ("op", "*") or self.peek() == ("op", "/"):
            _, op = self.next()
            rhs = self.factor()
            node = ("mul" if op == "*" else "div", node, rhs)
        return node

    def factor(self) -> Node:
        node = self.base()
        if self.peek() == ("op", "^"):
            self.next()
            exponent = self.factor()
            node = ("pow", node, exponent)
        return node

    def base(self) -> Node:
        kind, val = self.next()
        if kind == "num":
            return ("num", val)
        if kind == "name":
            if val == "r":
                return ("var",)
            if val in _FUNCS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return ("call", val, arg)
            raise ExprError(f"unknown identifier {val!r}")
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise ExprError(f"unexpected token {val!r}")


def parse(formula: str) -> Node:
    return _Parser(_tokenize(formula)).parse()


def evaluate(node: Node, r: Union[float, np.ndarray]):
    kind = node[0]
    if kind == "num":
        return np.full_like(np.asarray(r, dtype=float), node[1]) \
            if np.ndim(r) else node[1]
    if kind == "var":
        return np.asarray(r, dtype=float) if np.ndim(r) else float(r)
    if kind == "neg":
        return -evaluate(node[1], r)
    if kind == "add":
        return evaluate(node[1], r) + evaluate(node[2], r)
    if kind == "sub":
        return evaluate(node[1], r) - evaluate(node[2], r)
    if kind == "mul":
        return evaluate(node[1], r) * evaluate(node[2], r)
    if kind == "div":
        return evaluate(node[1], r) / evaluate(node[2], r)
    if kind == "pow":
        with np.errstate(invalid="ignore"):
            return evaluate(node[1], r) ** evaluate(node[2], r)
    if kind == "call":
        arg = evaluate(node[2], r)
        fn = {"exp": np.exp, "log": np.log, "sqrt": np.sqrt}[node[1]]
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return fn(arg)
    raise ExprError(f"bad node {node!r}")


def _is_const(node: Node) -> bool:
    if node[0] == "num":
        return True
    if node[0] == "var":
        return False
    if node[0] in ("neg",):
        return _is_const(node[1])
    if node[0] in ("add", "sub", "mul", "div", "pow"):
        return _is_const(node[1]) and _is_const(node[2])
    if node[0] == "call":
        return _is_const(node[2])
    return False


def derivative(node: Node) -> Node:
    """Symbolic d/dr of an AST, used to turn tail formulas into densities."""
    kind = node[0]
    if kind == "num":
        return ("num", 0.0)
    if kind == "var":
        return ("num", 1.0)
    if kind == "neg":
        return ("neg", derivative(node[1]))
    if kind == "add":
        return ("add", derivative(node[1]), derivative(node[2]))
    if kind == "sub":
        return ("sub", derivative(node[1]), derivative(node[2]))
    if kind == "mul":
        f, g = node[1], node[2]
        return ("add", ("mul", derivative(f), g), ("mul", f, derivative(g)))
    if kind == "div":
        f, g = node[1], node[2]
        num = ("sub", ("mul", derivative(f), g), ("mul", f, derivative(g)))
        return ("div", num, ("mul", g, g))
    if kind == "pow":
        f, g = node[1], node[2]
        if _is_const(g):
            # d f^c = c f^(c-1) f'
            return ("mul", ("mul", g, ("pow", f, ("sub", g, ("num", 1.0)))),
                    derivative(f))
        # general: f^g (g' ln f + g f'/f)
        inner = ("add",
                 ("mul", derivative(g), ("call", "log", f)),
                 ("div", ("mul", g, derivative(f)), f))
        return ("mul", node, inner)
    if kind == "call":
        name, arg = node[1], node[2]
        darg = derivative(arg)
        if name == "exp":
            return ("mul", node, darg)
        if name == "log":
            return ("div", darg, arg)
        if name == "sqrt":
            return ("div", darg, ("mul", ("num", 2.0), node))
    raise ExprError(f"bad node {node!r}")


class Expression:
    """A parsed one-variable formula with evaluation and differentiation."""

    def __init__(self, formula: str, ast: Node = None):
        self.formula = formula
        self.ast = parse(formula) if ast is None else ast

    def __call__(self, r):
        return evaluate(self.ast, r)

    def derivative(self) -> "Expression":
        expr = Expression.__new__(Expression)
        expr.formula = f"d/dr({self.formula})"
        expr.ast = derivative(self.ast)
        return expr
