"""Self-maps of a space: named builtins and expression-defined maps."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigurationError, InputError
from .expressions import compile_expression
from .spaces import Point, Space


@dataclass(frozen=True)
class NamedMap:
    """A map on a space.  Every application validates the output point, so
    escaping or non-finite images surface immediately at the call site."""

    name: str
    space: Space
    fn: Callable[[tuple[float, ...]], tuple[float, ...]]

    def __call__(self, x: Point) -> Point:
        if x.space_id != self.space.id:
            raise InputError(
                f"map {self.name!r} on space {self.space.id!r} applied to a point "
                f"from {x.space_id!r}"
            )
        out = self.fn(x.coords)
        return self.space.point(out)

    def describe(self) -> str:
        return f"{self.name} on {self.space.id}"


def _scalar(fn: Callable[[float], float]) -> Callable[[tuple[float, ...]], tuple[float, ...]]:
    def apply(coords: tuple[float, ...]) -> tuple[float, ...]:
        return tuple(fn(c) for c in coords)

    return apply


_BUILTINS: dict[str, Callable[[float], float]] = {
    "half": lambda c: 0.5 * c,
    "mk": lambda c: c / (1.0 + c),
    "translation": lambda c: c + 1.0,
    "flip": lambda c: 1.0 - c,
    "quarter": lambda c: 0.25 * c,
    "fifth": lambda c: 0.2 * c,
    "neg": lambda c: -c,
    "cyclic_reflect": lambda c: -0.5 * (abs(c) + 1.0) * float(np.sign(c) if c != 0 else 1.0),
}


def builtin_map(name: str, space: Space) -> NamedMap:
    if name not in _BUILTINS:
        raise ConfigurationError(f"unknown builtin map {name!r}; have {sorted(_BUILTINS)}")
    return NamedMap(name=name, space=space, fn=_scalar(_BUILTINS[name]))


def expression_map(space: Space, sources: list[str] | str, name: str | None = None) -> NamedMap:
    """Coordinate-wise expressions in x (the input coordinate vector).

    A single source is broadcast across all coordinates with x bound to the
    scalar coordinate; a list gives one expression per output coordinate with
    x subscriptable.
    """
    if isinstance(sources, str):
        expr = compile_expression(sources, variables=("x",))

        def apply_scalar(coords: tuple[float, ...]) -> tuple[float, ...]:
            return tuple(float(expr(x=c)) for c in coords)

        return NamedMap(name=name or sources, space=space, fn=apply_scalar)

    if len(sources) != space.dimension:
        raise ConfigurationError(
            f"need {space.dimension} coordinate expressions, got {len(sources)}"
        )
    exprs = [compile_expression(src, variables=("x",)) for src in sources]

    def apply_vector(coords: tuple[float, ...]) -> tuple[float, ...]:
        arr = np.asarray(coords, dtype=float)
        return tuple(float(e(x=arr)) for e in exprs)

    return NamedMap(name=name or "; ".join(sources), space=space, fn=apply_vector)
