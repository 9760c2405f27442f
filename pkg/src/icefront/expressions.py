"""Safe evaluation of closed-form boundary-forcing expressions.

Configs may give the incoming heat influx as an expression in the transverse
coordinate ``y``, the time ``tau``, and named random parameters, e.g.
``"2 + cos(3*pi*y)"`` or ``"1 + zeta*(1 + cos(3*pi*y))"``.  Expressions are
parsed with :mod:`ast` against a whitelist (arithmetic, ``sin``/``cos``,
``pi``), so arbitrary code in a config file is rejected at parse time.
Evaluation is vectorized through numpy broadcasting.
"""

from __future__ import annotations

import ast
import math
from typing import Any

import numpy as np

from .errors import ConfigError

_FUNCTIONS = {"sin": np.sin, "cos": np.cos}
_CONSTANTS = {"pi": math.pi}

_BINOPS = {
    ast.Add: lambda a, b: a + b,
    ast.Sub: lambda a, b: a - b,
    ast.Mult: lambda a, b: a * b,
    ast.Div: lambda a, b: a / b,
    ast.Pow: lambda a, b: a**b,
}
_UNARYOPS = {
    ast.UAdd: lambda a: +a,
    ast.USub: lambda a: -a,
}


class Expression:
    """A parsed closed-form expression in named variables.

    Parameters
    ----------
    text : str
        Source text using names, numbers, ``+ - * / **``, parentheses and the
        whitelisted functions/constants.
    bound : dict, optional
        Fixed name -> value substitutions applied before any call.

    Call with keyword arguments for the remaining free variables; scalars and
    numpy arrays both work.  ``bind`` returns a new expression with some
    variables fixed (used to substitute sampled random parameters).
    """

    def __init__(self, text: str, bound: dict[str, float] | None = None):
        self.text = text
        self._bound = dict(bound or {})
        try:
            tree = ast.parse(text, mode="eval")
        except SyntaxError as exc:
            raise ConfigError(f"cannot parse expression {text!r}: {exc.msg}") from exc
        _validate(tree.body, text)
        self._tree = tree.body
        reserved = _CONSTANTS.keys() | _FUNCTIONS.keys()
        names = {n for n in _names(self._tree) if n not in reserved}
        self.variables = frozenset(names - self._bound.keys())

    def __call__(self, **values: Any):
        missing = self.variables - values.keys()
        if missing:
            raise ConfigError(
                f"expression {self.text!r} needs values for {sorted(missing)}"
            )
        env = dict(_CONSTANTS)
        env.update(self._bound)
        env.update({k: v for k, v in values.items() if k in self.variables})
        return _eval(self._tree, env)

    def bind(self, **values: float) -> "Expression":
        unknown = values.keys() - self.variables
        if unknown:
            raise ConfigError(
                f"expression {self.text!r} has no variables {sorted(unknown)}"
            )
        merged = dict(self._bound)
        merged.update(values)
        return Expression(self.text, merged)

    def __repr__(self) -> str:  # pragma: no cover
        if self._bound:
            return f"Expression({self.text!r}, bound={self._bound!r})"
        return f"Expression({self.text!r})"


def _validate(node: ast.AST, text: str) -> None:
    if isinstance(node, ast.Constant):
        if not isinstance(node.value, (int, float)):
            raise ConfigError(f"non-numeric constant in expression {text!r}")
    elif isinstance(node, ast.Name):
        pass
    elif isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        _validate(node.left, text)
        _validate(node.right, text)
    elif isinstance(node, ast.UnaryOp) and type(node.op) in _UNARYOPS:
        _validate(node.operand, text)
    elif isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCTIONS:
            raise ConfigError(
                f"expression {text!r} may only call {sorted(_FUNCTIONS)}"
            )
        if node.keywords or len(node.args) != 1:
            raise ConfigError(f"bad call arity in expression {text!r}")
        _validate(node.args[0], text)
    else:
        raise ConfigError(
            f"unsupported syntax {type(node).__name__!r} in expression {text!r}"
        )


def _names(node: ast.AST) -> set[str]:
    out: set[str] = set()
    for sub in ast.walk(node):
        if isinstance(sub, ast.Name):
            out.add(sub.id)
    return out


def _eval(node: ast.AST, env: dict[str, Any]):
    if isinstance(node, ast.Constant):
        return node.value
    if isinstance(node, ast.Name):
        if node.id in _FUNCTIONS:
            raise ConfigError(f"{node.id!r} is a function, not a value")
        try:
            return env[node.id]
        except KeyError as exc:
            raise ConfigError(f"unknown name {node.id!r} in expression") from exc
    if isinstance(node, ast.BinOp):
        return _BINOPS[type(node.op)](_eval(node.left, env), _eval(node.right, env))
    if isinstance(node, ast.UnaryOp):
        return _UNARYOPS[type(node.op)](_eval(node.operand, env))
    if isinstance(node, ast.Call):
        return _FUNCTIONS[node.func.id](_eval(node.args[0], env))
    raise ConfigError(f"unsupported node {type(node).__name__!r}")  # pragma: no cover


def as_expression(value: Any) -> "Expression | float":
    """Normalize a config value: numbers pass through, strings are parsed."""
    if isinstance(value, Expression):
        return value
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if isinstance(value, str):
        return Expression(value)
    raise ConfigError(f"expected number or expression string, got {value!r}")
