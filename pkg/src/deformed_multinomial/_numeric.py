"""Scalar arithmetic for the two precision modes.

Standard mode works on binary64 floats; extended mode uses a private mpmath
context so that changing the global ``mpmath.mp`` precision elsewhere cannot
leak into results.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Any, Iterable

import mpmath

from .exceptions import NumericalError, ParameterError

PRECISION_ENV_VAR = "DEFORMED_MULTINOMIAL_PRECISION"
EXTENDED_DIGITS = 50

_ALIASES = {
    "standard": "standard",
    "binary64": "standard",
    "float": "standard",
    "extended": "extended",
    "mp": "extended",
}


@dataclass(frozen=True)
class Arithmetic:
    """Conversion, summation and finiteness checks for one precision mode."""

    name: str
    ctx: Any = None

    @property
    def extended(self) -> bool:
        return self.ctx is not None

    @property
    def eps(self):
        if self.ctx is None:
            return 2.0**-52
        return self.ctx.mpf(10) ** (-self.ctx.dps)

    def convert(self, value):
        if self.ctx is None:
            return float(value)
        if isinstance(value, float):
            # repr gives the shortest decimal, so 0.3 becomes 0.3 and not 0.2999...
            return self.ctx.mpf(repr(value))
        return self.ctx.mpf(value)

    def fsum(self, values: Iterable):
        values = list(values)
        if self.ctx is None:
            return math.fsum(values)
        return self.ctx.fsum(values)

    def isfinite(self, value) -> bool:
        if self.ctx is None:
            return math.isfinite(value)
        return bool(self.ctx.isfinite(value))

    def check(self, value, what: str = "value"):
        if not self.isfinite(value):
            raise NumericalError(f"{what} is not finite ({value!r})")
        return value

    def power(self, base, exponent):
        try:
            result = base**exponent
        except OverflowError as exc:
            raise NumericalError(f"overflow in {base!r}**{exponent!r}") from exc
        except ZeroDivisionError as exc:
            raise NumericalError(f"division by zero in {base!r}**{exponent!r}") from exc
        return self.check(result, "power")

    def log(self, value):
        return math.log(value) if self.ctx is None else self.ctx.log(value)

    def exp(self, value):
        try:
            result = math.exp(value) if self.ctx is None else self.ctx.exp(value)
        except OverflowError as exc:
            raise NumericalError(f"overflow in exp({value!r})") from exc
        return self.check(result, "exp")

    def to_float(self, value) -> float:
        return float(value)

    def format(self, value, digits: int = 17) -> str:
        if self.ctx is None:
            return format(float(value), f".{digits}g")
        return self.ctx.nstr(value, digits)


def _make_extended() -> Arithmetic:
    ctx = mpmath.MPContext()
    ctx.dps = EXTENDED_DIGITS
    return Arithmetic("extended", ctx)


STANDARD = Arithmetic("standard")
EXTENDED = _make_extended()


def get_arithmetic(precision: str | Arithmetic | None = None) -> Arithmetic:
    """Resolve a precision name; ``None`` falls back to the environment default."""
    if isinstance(precision, Arithmetic):
        return precision
    if precision is None:
        precision = os.environ.get(PRECISION_ENV_VAR, "standard")
    key = _ALIASES.get(str(precision).strip().lower())
    if key is None:
        raise ParameterError(f"unknown precision mode {precision!r}")
    return STANDARD if key == "standard" else EXTENDED


def binom2(n: int) -> int:
    """n choose 2 extended to all integers as n(n-1)/2."""
    return n * (n - 1) // 2
