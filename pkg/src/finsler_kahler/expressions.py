"""Safe arithmetic expressions over ``x1..xn, y1..yn`` for config files.

Only numeric literals, the coordinate names, ``pi``, ``e``, the operators
``+ - * / **`` and a fixed set of jet-aware functions are accepted; the
expression is parsed with :mod:`ast` and compiled to a closure, never
passed to ``eval``.

>>> f = compile_field("x1 * y1**2", 1)
>>> f([2.0], [3.0])
18.0
"""

import ast
import math
import operator
import re

from . import jetcalc as jc
from .errors import ConfigError

__all__ = ["compile_field", "FUNCTIONS"]

FUNCTIONS = {
    "sqrt": jc.sqrt,
    "exp": jc.exp,
    "log": jc.log,
    "sin": jc.sin,
    "cos": jc.cos,
    "tan": jc.tan,
    "tanh": jc.tanh,
    "abs": jc.fabs,
}
CONSTANTS = {"pi": math.pi, "e": math.e}
_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: jc.power,
}
_NAME = re.compile(r"^([xy])([1-9][0-9]*)$")


def compile_field(text, n, allow=("x", "y"), where="expression"):
    """Compile ``text`` into ``f(x, y)``; ``allow`` restricts the variable families."""
    if not isinstance(text, str):
        raise ConfigError(f"{where}: expected a string expression, got {type(text).__name__}")
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ConfigError(f"{where}: cannot parse {text!r}: {exc.msg}") from None
    body = _build(tree.body, n, allow, where, text)

    def field(x, y):
        out = body(x, y)
        return out if isinstance(out, jc.Jet) else float(out)

    field.__doc__ = text
    return field


def _build(node, n, allow, where, text):
    def fail(msg):
        raise ConfigError(f"{where}: {msg} in {text!r}")

    if isinstance(node, ast.Constant):
        if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
            fail(f"unsupported literal {node.value!r}")
        v = float(node.value)
        return lambda x, y: v
    if isinstance(node, ast.Name):
        if node.id in CONSTANTS:
            v = CONSTANTS[node.id]
            return lambda x, y: v
        m = _NAME.match(node.id)
        if not m:
            fail(f"unknown name {node.id!r}")
        family, k = m.group(1), int(m.group(2)) - 1
        if family not in allow:
            fail(f"{node.id!r} is not allowed here")
        if k >= n:
            fail(f"{node.id!r} exceeds dimension {n}")
        if family == "x":
            return lambda x, y: x[k]
        return lambda x, y: y[k]
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        inner = _build(node.operand, n, allow, where, text)
        if isinstance(node.op, ast.USub):
            return lambda x, y: -inner(x, y)
        return inner
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        op = _BINOPS[type(node.op)]
        left = _build(node.left, n, allow, where, text)
        right = _build(node.right, n, allow, where, text)
        return lambda x, y: op(left(x, y), right(x, y))
    if isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in FUNCTIONS:
            fail("only " + ", ".join(sorted(FUNCTIONS)) + " may be called")
        if node.keywords or len(node.args) != 1:
            fail(f"{node.func.id} takes exactly one positional argument")
        fn = FUNCTIONS[node.func.id]
        arg = _build(node.args[0], n, allow, where, text)
        return lambda x, y: fn(arg(x, y))
    fail(f"unsupported syntax {type(node).__name__}")
