"""A small arithmetic grammar for inline sequence rules.

Grammar, loosest to tightest binding:

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | power
    power  := atom ('^' factor)?
    atom   := NUMBER | NAME | '(' expr ')'

Names are the index variables k and l plus the band constants r, s, t, u.
Exponentiation is right-associative and the exponent must evaluate to an
integer (so (-1)^(k+l) is legal and (-1)^0.5 is rejected).  Evaluation is
a single numpy code path: scalars and grids go through the same operations
in the same order, so the two agree bit for bit.
"""

from __future__ import annotations

import numpy as np

__all__ = ["ExprError", "parse_expr", "expr_names", "eval_expr", "expr_sequence"]

_NAMES = ("k", "l", "r", "s", "t", "u")
_INDEX_NAMES = ("k", "l")


class ExprError(ValueError):
    """Parse or evaluation failure, with a character position when parsing."""

    def __init__(self, message: str, pos: int = None):
        self.pos = pos
        if pos is not None:
            message = f"{message} (at column {pos + 1})"
        super().__init__(message)


def _tokenize(text: str):
    tokens = []
    i = 0
    while i < len(text):
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c in "+-*/^()":
            tokens.append((c, c, i))
            i += 1
            continue
        if c.isdigit() or c == ".":
            j = i
            seen_dot = False
            while j < len(text) and (text[j].isdigit() or (text[j] == "." and not seen_dot)):
                if text[j] == ".":
                    seen_dot = True
                j += 1
            # exponent suffix like 1e-3
            if j < len(text) and text[j] in "eE":
                k = j + 1
                if k < len(text) and text[k] in "+-":
                    k += 1
                if k < len(text) and text[k].isdigit():
                    while k < len(text) and text[k].isdigit():
                        k += 1
                    j = k
            lit = text[i:j]
            try:
                value = float(lit)
            except ValueError:
                raise ExprError(f"bad number literal {lit!r}", i)
            tokens.append(("num", value, i))
            i = j
            continue
        if c.isalpha():
            j = i
            while j < len(text) and text[j].isalnum():
                j += 1
            name = text[i:j]
            if name not in _NAMES:
                raise ExprError(
                    f"unknown name {name!r}; allowed: {', '.join(_NAMES)}", i
                )
            tokens.append(("name", name, i))
            i = j
            continue
        raise ExprError(f"unexpected character {c!r}", i)
    tokens.append(("end", None, len(text)))
    return tokens


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind):
        tok = self.take()
        if tok[0] != kind:
            raise ExprError(f"expected {kind!r}, found {tok[0]!r}", tok[2])
        return tok

    def expr(self):
        node = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.take()[0]
            rhs = self.term()
            node = ("add" if op == "+" else "sub", node, rhs)
        return node

    def term(self):
        node = self.factor()
        while self.peek()[0] in ("*", "/"):
            op = self.take()[0]
            rhs = self.factor()
            node = ("mul" if op == "*" else "div", node, rhs)
        return node

    def factor(self):
        if self.peek()[0] == "-":
            self.take()
            return ("neg", self.factor())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "^":
            self.take()
            return ("pow", base, self.factor())
        return base

    def atom(self):
        tok = self.take()
        kind, value, pos = tok
        if kind == "num":
            return ("num", value)
        if kind == "name":
            return ("var", value)
        if kind == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise ExprError(f"unexpected token {kind!r}", pos)


def parse_expr(text: str):
    """Parse to a nested-tuple tree; raises ExprError with a column on failure."""
    if not text or not text.strip():
        raise ExprError("empty expression")
    parser = _Parser(_tokenize(text))
    node = parser.expr()
    end = parser.peek()
    if end[0] != "end":
        raise ExprError(f"trailing input starting with {end[0]!r}", end[2])
    return node


def expr_names(node) -> frozenset:
    """All names referenced by the tree."""
    kind = node[0]
    if kind == "num":
        return frozenset()
    if kind == "var":
        return frozenset((node[1],))
    return frozenset().union(*(expr_names(child) for child in node[1:]))


def eval_expr(node, env: dict):
    """Evaluate against an environment of numpy scalars or broadcastable arrays."""
    kind = node[0]
    if kind == "num":
        return np.float64(node[1])
    if kind == "var":
        return env[node[1]]
    if kind == "neg":
        return -eval_expr(node[1], env)
    a = eval_expr(node[1], env)
    b = eval_expr(node[2], env)
    if kind == "add":
        return a + b
    if kind == "sub":
        return a - b
    if kind == "mul":
        return a * b
    if kind == "div":
        with np.errstate(divide="ignore", invalid="ignore"):
            return a / b
    if kind == "pow":
        if not np.all(np.equal(np.mod(b, 1.0), 0.0)):
            raise ExprError("exponent must be integer-valued")
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.power(a, b)
    raise ExprError(f"unknown node kind {kind!r}")


def expr_sequence(text: str, params=None):
    """Compile an expression into a DoubleSequence.

    `params` supplies the band constants r, s, t, u when the expression
    mentions them; it may be anything exposing those four attributes.
    """
    from .seqcore import DoubleSequence

    node = parse_expr(text)
    names = expr_names(node)
    consts = {}
    needed = names - frozenset(_INDEX_NAMES)
    if needed:
        if params is None:
            raise ExprError(
                f"expression uses {', '.join(sorted(needed))} but no band parameters were given"
            )
        for name in needed:
            consts[name] = np.float64(getattr(params, name))

    def rule(k, l):
        env = dict(consts)
        env["k"] = np.float64(k)
        env["l"] = np.float64(l)
        return float(eval_expr(node, env))

    def grid_rule(M, N):
        kk, ll = np.meshgrid(
            np.arange(M + 1, dtype=float), np.arange(N + 1, dtype=float), indexing="ij"
        )
        env = dict(consts)
        env["k"] = kk
        env["l"] = ll
        out = eval_expr(node, env)
        return np.broadcast_to(np.asarray(out, dtype=float), (M + 1, N + 1)).copy()

    return DoubleSequence(rule=rule, name=text, description="inline expression", grid_rule=grid_rule)
