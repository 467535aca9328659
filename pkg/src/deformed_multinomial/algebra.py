"""Deformation algebras and their scalar building blocks.

An algebra bundles a structure function ``R`` with the parameters ``p, q`` and
the two structure constants ``tau1, tau2``.  Deformed numbers are
``[n] = R(p**n, q**n)`` and every valid algebra satisfies the splitting law

    [x] = tau1**s * [x - s] + tau2**(x - s) * [s].
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Callable

from ._numeric import Arithmetic, binom2, get_arithmetic
from .exceptions import ConvergenceError, NumericalError, ParameterError

PRESETS = (
    "q-standard",
    "biedenharn-macfarlane",
    "jagannathan-srinivasa",
    "chakrabarty-jagannathan",
    "quesne",
)

# presets whose structure function does not depend on p
_P_FREE = frozenset({"q-standard", "biedenharn-macfarlane"})

SPLITTING_CHECK_MAX = 20
SPLITTING_RTOL = 1e-12
CUSTOM_POSITIVITY_MAX = 10
CUSTOM_ZERO_ATOL = 1e-12
EXP_TERM_CAP = 10_000


@dataclass(frozen=True, eq=False)
class DeformationAlgebra:
    """One deformation: structure function, parameters and structure constants.

    Instances are immutable apart from append-only memo tables guarded by a
    lock, so they may be shared between threads.
    """

    name: str
    p: object
    q: object
    tau1: object
    tau2: object
    R: Callable = field(repr=False)
    arithmetic: Arithmetic = field(repr=False)
    preset: str | None = None
    _numbers: dict = field(default_factory=dict, repr=False)
    _factorials: list = field(default_factory=list, repr=False)
    _log_factorials: list = field(default_factory=list, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @property
    def precision(self) -> str:
        return self.arithmetic.name

    @property
    def tau_ratio(self):
        """tau2 / tau1; the odds of a trial shrink by this factor per step."""
        return self.tau2 / self.tau1

    def convert(self, value):
        return self.arithmetic.convert(value)

    # -- deformed numbers ----------------------------------------------------

    def number(self, n: int):
        """Deformed number ``[n] = R(p**n, q**n)``; ``[0]`` is exactly zero."""
        n = _as_int(n, "n")
        if n == 0:
            return self.arithmetic.convert(0)
        cached = self._numbers.get(n)
        if cached is not None:
            return cached
        ar = self.arithmetic
        u = ar.power(self.p, n)
        v = ar.power(self.q, n)
        try:
            value = self.R(u, v)
        except (ZeroDivisionError, OverflowError) as exc:
            raise NumericalError(f"{self.name}: R is singular at n={n}") from exc
        value = ar.check(ar.convert(value), f"{self.name} number({n})")
        if n > 0 and value <= 0:
            raise ParameterError(f"{self.name}: deformed number [{n}] = {value!r} is not positive")
        self._numbers[n] = value
        return value

    def factorial(self, n: int):
        """``[n]! = [1][2]...[n]`` with ``[0]! = 1``; memoized per algebra."""
        n = _as_int(n, "n")
        if n < 0:
            raise ParameterError(f"factorial needs n >= 0, got {n}")
        table = self._factorials
        if n < len(table):
            return table[n]
        with self._lock:
            if not table:
                table.append(self.arithmetic.convert(1))
            while len(table) <= n:
                i = len(table)
                value = self.arithmetic.check(table[-1] * self.number(i), f"factorial({i})")
                table.append(value)
        return table[n]

    def log_factorial(self, n: int):
        """``log([n]!)``, for magnitudes beyond the floating-point range."""
        n = _as_int(n, "n")
        if n < 0:
            raise ParameterError(f"factorial needs n >= 0, got {n}")
        table = self._log_factorials
        if n < len(table):
            return table[n]
        ar = self.arithmetic
        with self._lock:
            if not table:
                table.append(ar.convert(0))
            while len(table) <= n:
                i = len(table)
                table.append(table[-1] + ar.log(self.number(i)))
        return table[n]

    def ordered_factorial(self, a: int, r: int):
        """``[a][a-1]...[a-r+1]``; zero when ``0 <= a < r``."""
        a = _as_int(a, "a")
        r = _as_int(r, "r")
        if r < 0:
            raise ParameterError(f"ordered factorial needs r >= 0, got {r}")
        one = self.arithmetic.convert(1)
        if r == 0:
            return one
        if 0 <= a < r:
            return self.arithmetic.convert(0)
        if a >= r and r > 8:
            try:
                top = self.factorial(a)
                bottom = self.factorial(a - r)
            except NumericalError:
                top = bottom = None
            if top is not None and bottom != 0 and top != 0:
                return self.arithmetic.check(top / bottom, "ordered factorial")
        value = one
        for i in range(r):
            value *= self.number(a - i)
        return self.arithmetic.check(value, "ordered factorial")

    # -- exponentials --------------------------------------------------------

    def exp_small(self, z, eps=None, cap: int = EXP_TERM_CAP):
        """Sum of ``tau1**C(n,2) z**n / [n]!`` over n >= 0."""
        return self._exp_series(z, self.tau1, eps, cap)

    def exp_big(self, z, eps=None, cap: int = EXP_TERM_CAP):
        """Sum of ``tau2**C(n,2) z**n / [n]!`` over n >= 0."""
        return self._exp_series(z, self.tau2, eps, cap)

    def _exp_series(self, z, weight, eps, cap):
        ar = self.arithmetic
        z = ar.convert(z)
        eps = ar.eps if eps is None else ar.convert(eps)
        terms = [ar.convert(1)]
        if z == 0:
            return terms[0]
        term = terms[0]
        partial = term
        quiet = 0
        step_weight = ar.convert(1)
        for n in range(1, cap + 1):
            try:
                term = term * z * step_weight / self.number(n)
            except OverflowError as exc:
                raise ConvergenceError(f"exponential series overflowed at term {n}") from exc
            if not ar.isfinite(term):
                raise ConvergenceError(f"exponential series diverged at term {n} (z={z!r})")
            step_weight *= weight
            terms.append(term)
            partial += term
            if term == 0 or abs(term) < eps * abs(partial):
                quiet += 1
                if quiet == 3:
                    return ar.check(ar.fsum(terms), "exponential")
            else:
                quiet = 0
        raise ConvergenceError(f"exponential series did not converge in {cap} terms (z={z!r})")

    # -- diagnostics ---------------------------------------------------------

    def splitting_residual(self, n_max: int = SPLITTING_CHECK_MAX):
        """Largest relative defect of the splitting law over 0 <= s <= x <= n_max."""
        ar = self.arithmetic
        worst = ar.convert(0)
        for x in range(1, n_max + 1):
            lhs = self.number(x)
            for s in range(x + 1):
                rhs = ar.power(self.tau1, s) * self.number(x - s) + ar.power(self.tau2, x - s) * self.number(s)
                worst = max(worst, abs(lhs - rhs) / abs(lhs))
        return worst

    def inverted(self) -> "DeformationAlgebra":
        return invert_parameters(self)


def _as_int(value, what: str) -> int:
    if isinstance(value, bool) or int(value) != value:
        raise ParameterError(f"{what} must be an integer, got {value!r}")
    return int(value)


def _preset_parts(name: str, p, q):
    """Structure function and (tau1, tau2) for a named preset."""
    if name == "q-standard":
        return (lambda u, v: (1 - v) / (1 - q)), 1 + 0 * q, q
    if name == "biedenharn-macfarlane":
        return (lambda u, v: (v - 1 / v) / (q - 1 / q)), q, 1 / q
    if name == "jagannathan-srinivasa":
        return (lambda u, v: (u - v) / (p - q)), p, q
    if name == "chakrabarty-jagannathan":
        return (lambda u, v: (1 - u * v) / ((1 / p - q) * u)), 1 / p, q
    if name == "quesne":
        return (lambda u, v: (u * v - 1) / ((q - 1 / p) * v)), p, 1 / q
    raise ParameterError(f"unknown preset {name!r}; expected one of {', '.join(PRESETS)}")


def make_preset_algebra(name: str, p=None, q=None, precision=None) -> DeformationAlgebra:
    """Build one of the named algebras.

    ``q-standard`` and ``biedenharn-macfarlane`` ignore ``p`` and need
    ``0 < q < 1``; the others need ``0 < q < p < 1``.
    """
    if name not in PRESETS:
        raise ParameterError(f"unknown preset {name!r}; expected one of {', '.join(PRESETS)}")
    ar = get_arithmetic(precision)
    if q is None:
        raise ParameterError(f"{name} needs q")
    q = ar.convert(q)
    if not 0 < q < 1:
        raise ParameterError(f"{name} needs 0 < q < 1, got q={q}")
    if name in _P_FREE:
        p = ar.convert(1)
    else:
        if p is None:
            raise ParameterError(f"{name} needs p")
        p = ar.convert(p)
        if not q < p < 1:
            raise ParameterError(f"{name} needs 0 < q < p < 1, got p={p}, q={q}")
    R, tau1, tau2 = _preset_parts(name, p, q)
    alg = DeformationAlgebra(name, p, q, ar.convert(tau1), ar.convert(tau2), R, ar, preset=name)
    residual = alg.splitting_residual()
    if residual > SPLITTING_RTOL:
        raise NumericalError(f"{name}: splitting law fails self-check (relative defect {residual})")
    return alg


def make_custom_algebra(R: Callable, tau1, tau2, p, q, precision=None, name: str = "custom") -> DeformationAlgebra:
    """Wrap a user structure function.

    Only ``R(1, 1) = 0`` and positivity of ``[1]..[10]`` are checked here; the
    splitting law is left to the verification suite.
    """
    if not callable(R):
        raise ParameterError("R must be callable")
    ar = get_arithmetic(precision)
    tau1, tau2, p, q = (ar.convert(v) for v in (tau1, tau2, p, q))
    if not (tau1 > 0 and tau2 > 0):
        raise ParameterError("tau1 and tau2 must be positive")
    try:
        at_one = ar.convert(R(ar.convert(1), ar.convert(1)))
    except (ZeroDivisionError, OverflowError) as exc:
        raise ParameterError("R is singular at (1, 1)") from exc
    if not ar.isfinite(at_one) or abs(at_one) > CUSTOM_ZERO_ATOL:
        raise ParameterError(f"R(1, 1) must vanish, got {at_one!r}")
    alg = DeformationAlgebra(name, p, q, tau1, tau2, R, ar)
    for n in range(1, CUSTOM_POSITIVITY_MAX + 1):
        alg.number(n)
    return alg


def invert_parameters(alg: DeformationAlgebra) -> DeformationAlgebra:
    """Algebra at ``(1/p, 1/q)`` with both structure constants inverted.

    The structure function is rescaled so that ``[1]`` is kept; with that
    normalization the inverted numbers obey
    ``[n]' = (tau1*tau2)**(1-n) [n]`` for every preset, including those
    whose ``[1]`` differs from 1.
    """
    ar = alg.arithmetic
    inv_p, inv_q = 1 / alg.p, 1 / alg.q
    base_R = alg.R
    unit = alg.number(1)
    try:
        denom = ar.convert(base_R(inv_p, inv_q))
    except (ZeroDivisionError, OverflowError) as exc:
        raise NumericalError(f"{alg.name}: R is singular at (1/p, 1/q)") from exc
    if denom == 0 or not ar.isfinite(denom):
        raise NumericalError(f"{alg.name}: R(1/p, 1/q) = {denom!r} cannot be normalized")

    def R_inverted(u, v):
        return unit * base_R(u, v) / denom

    return DeformationAlgebra(
        f"inverted({alg.name})", inv_p, inv_q, 1 / alg.tau1, 1 / alg.tau2, R_inverted, ar
    )


def tau_power(alg: DeformationAlgebra, which: int, exponent: int):
    """``tau1**exponent`` or ``tau2**exponent`` in the algebra's precision."""
    base = alg.tau1 if which == 1 else alg.tau2
    return alg.arithmetic.power(base, exponent)


__all__ = [
    "PRESETS",
    "DeformationAlgebra",
    "binom2",
    "invert_parameters",
    "make_custom_algebra",
    "make_preset_algebra",
    "tau_power",
]
