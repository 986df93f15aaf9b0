"""Small arithmetic expression grammar for user-declared evaluables.

Maps, custom premetrics and gauges may be given as text expressions using
+, -, *, /, abs, min, max, numeric constants and coordinate references
like ``x[0]`` or ``y[1]``.  Parsing is done with the stdlib ``ast`` module
and a strict node whitelist, so nothing outside the grammar can run.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import ExpressionError

_ALLOWED_BINOPS = (ast.Add, ast.Sub, ast.Mult, ast.Div)
_ALLOWED_UNARY = (ast.USub, ast.UAdd)


def _reduce_min(*args: Any) -> Any:
    out = args[0]
    for a in args[1:]:
        out = np.minimum(out, a)
    return out


def _reduce_max(*args: Any) -> Any:
    out = args[0]
    for a in args[1:]:
        out = np.maximum(out, a)
    return out


_FUNCTIONS: dict[str, Any] = {"abs": abs, "min": _reduce_min, "max": _reduce_max}


def _validate(node: ast.AST, variables: tuple[str, ...], source: str) -> None:
    if isinstance(node, ast.Expression):
        _validate(node.body, variables, source)
    elif isinstance(node, ast.BinOp):
        if not isinstance(node.op, _ALLOWED_BINOPS):
            raise ExpressionError(f"operator not in grammar: {ast.dump(node.op)} in {source!r}")
        _validate(node.left, variables, source)
        _validate(node.right, variables, source)
    elif isinstance(node, ast.UnaryOp):
        if not isinstance(node.op, _ALLOWED_UNARY):
            raise ExpressionError(f"unary operator not in grammar in {source!r}")
        _validate(node.operand, variables, source)
    elif isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCTIONS:
            raise ExpressionError(f"only abs/min/max calls are allowed in {source!r}")
        if node.keywords:
            raise ExpressionError(f"keyword arguments are not in the grammar in {source!r}")
        if not node.args:
            raise ExpressionError(f"{node.func.id}() needs at least one argument in {source!r}")
        if node.func.id == "abs" and len(node.args) != 1:
            raise ExpressionError(f"abs() takes exactly one argument in {source!r}")
        for arg in node.args:
            _validate(arg, variables, source)
    elif isinstance(node, ast.Constant):
        if not isinstance(node.value, (int, float)) or isinstance(node.value, bool):
            raise ExpressionError(f"only numeric constants are allowed in {source!r}")
    elif isinstance(node, ast.Name):
        if node.id not in variables:
            raise ExpressionError(f"unknown name {node.id!r} in {source!r} (declared: {variables})")
    elif isinstance(node, ast.Subscript):
        if not isinstance(node.value, ast.Name) or node.value.id not in variables:
            raise ExpressionError(f"subscript base must be a declared variable in {source!r}")
        idx = node.slice
        if not (isinstance(idx, ast.Constant) and isinstance(idx.value, int) and idx.value >= 0):
            raise ExpressionError(f"subscripts must be literal non-negative ints in {source!r}")
    else:
        raise ExpressionError(f"syntax not in grammar: {type(node).__name__} in {source!r}")


@dataclass(frozen=True)
class Expression:
    """A compiled expression over the declared variable names.

    Calling the expression with keyword arguments bound to floats gives a
    float; binding numpy arrays broadcasts, which the batch evaluation
    paths rely on.  Division by zero yields NaN rather than raising so the
    checkers can record it as a witness.
    """

    source: str
    variables: tuple[str, ...]
    _code: Any = field(repr=False, compare=False, default=None)

    def __call__(self, **env: Any) -> Any:
        scope = dict(_FUNCTIONS)
        scope.update(env)
        try:
            with np.errstate(all="ignore"):
                return eval(self._code, {"__builtins__": {}}, scope)  # noqa: S307 - AST whitelisted
        except ZeroDivisionError:
            return float("nan")


def compile_expression(source: str, variables: tuple[str, ...]) -> Expression:
    """Parse ``source`` against the grammar and return a callable Expression.

    Raises:
        ExpressionError: if the text does not parse or uses anything
            outside the grammar.
    """
    if not isinstance(source, str) or not source.strip():
        raise ExpressionError("expression source must be a non-empty string")
    try:
        tree = ast.parse(source, mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse {source!r}: {exc.msg}") from exc
    _validate(tree, variables, source)
    code = compile(tree, f"<expr {source!r}>", "eval")
    return Expression(source=source, variables=variables, _code=code)
