"""Deformed coefficients, recurrences and multinomial expansions.

Every expansion comes in two modes.  ``corrected`` carries the structure
constant weights that make the identity hold for any algebra; ``paper-literal``
evaluates the expression exactly as stated in the source, which agrees with
``corrected`` only when ``tau1 == 1``.  Keeping both lets the verification
suite tell a wrong statement apart from a wrong implementation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Iterable, Iterator, Sequence

from ._numeric import binom2
from .algebra import DeformationAlgebra, invert_parameters
from .exceptions import ConvergenceError, NumericalError, ParameterError

CORRECTED = "corrected"
PAPER_LITERAL = "paper-literal"
MODES = (CORRECTED, PAPER_LITERAL)
RECURRENCE_VARIANTS = ("2.3", "2.4", "2.5", "2.5a")
INVERSE_CONVENTIONS = ("m-form", "s-form")


class Sign(str, Enum):
    """Sign of a shifted factorial: ``(a + b)`` or ``(a - b)`` per factor."""

    PLUS = "+"
    MINUS = "-"

    @classmethod
    def parse(cls, value) -> "Sign":
        if isinstance(value, Sign):
            return value
        aliases = {"+": cls.PLUS, "plus": cls.PLUS, "-": cls.MINUS, "minus": cls.MINUS}
        try:
            return aliases[str(value).lower()]
        except KeyError:
            raise ParameterError(f"unknown sign {value!r}") from None


@dataclass(frozen=True)
class MultiIndex:
    """Non-negative integer vector ``(r_1, ..., r_k)`` with its partial sums."""

    r: tuple

    def __post_init__(self):
        values = tuple(self.r)
        if not values:
            raise ParameterError("a multi-index needs at least one entry")
        for v in values:
            if isinstance(v, bool) or int(v) != v:
                raise ParameterError(f"multi-index entries must be integers, got {v!r}")
            if v < 0:
                raise ParameterError(f"multi-index entries must be non-negative, got {values}")
        object.__setattr__(self, "r", tuple(int(v) for v in values))

    def __len__(self) -> int:
        return len(self.r)

    def __iter__(self):
        return iter(self.r)

    def __getitem__(self, j):
        return self.r[j]

    @property
    def k(self) -> int:
        return len(self.r)

    @property
    def total(self) -> int:
        return sum(self.r)

    @cached_property
    def partial_sums(self) -> tuple:
        """``(s_0, s_1, ..., s_k)`` with ``s_0 = 0``."""
        return (0, *itertools.accumulate(self.r))

    @cached_property
    def tail_sums(self) -> tuple:
        """``(m_1, ..., m_k, m_{k+1})`` with ``m_{k+1} = 0``."""
        tails = [0]
        for v in reversed(self.r):
            tails.append(tails[-1] + v)
        return tuple(reversed(tails))

    def s(self, j: int) -> int:
        return self.partial_sums[j]

    def m(self, j: int) -> int:
        return self.tail_sums[j - 1]


def as_index(r) -> MultiIndex:
    if isinstance(r, MultiIndex):
        return r
    if isinstance(r, int):
        return MultiIndex((r,))
    return MultiIndex(tuple(r))


def iter_indices(k: int, n: int) -> Iterator[tuple]:
    """All length-k non-negative tuples with sum <= n, lexicographically."""
    if k < 1:
        raise ParameterError("k must be at least 1")
    if n < 0:
        return
    yield from _bounded(k, n)


def _bounded(k: int, budget: int):
    if k == 1:
        for v in range(budget + 1):
            yield (v,)
        return
    for v in range(budget + 1):
        for rest in _bounded(k - 1, budget - v):
            yield (v, *rest)


@dataclass(frozen=True)
class IdentityEvaluation:
    """Both sides of one identity at one parameter point."""

    name: str
    lhs: object
    rhs: object
    scale: object = None  # sum of |terms| on the left; measures cancellation

    @property
    def abs_residual(self) -> float:
        return float(abs(self.lhs - self.rhs))

    @property
    def rel_residual(self) -> float:
        scale = max(abs(float(self.lhs)), abs(float(self.rhs)))
        if scale == 0:
            return 0.0
        return self.abs_residual / scale


def _mode(mode: str) -> str:
    if mode not in MODES:
        raise ParameterError(f"unknown mode {mode!r}; expected one of {MODES}")
    return mode


def _values(alg: DeformationAlgebra, xs: Iterable) -> list:
    out = [alg.convert(x) for x in xs]
    if not out:
        raise ParameterError("need at least one variable")
    return out


# -- basic coefficients -------------------------------------------------------


def shifted_factorial(alg: DeformationAlgebra, a, b, n: int, sign=Sign.PLUS):
    """``prod_{i=1..n} (a*tau1**(i-1) +/- b*tau2**(i-1))``."""
    if n < 0:
        raise ParameterError(f"shifted factorial needs n >= 0, got {n}")
    sign = Sign.parse(sign)
    a, b = alg.convert(a), alg.convert(b)
    if sign is Sign.MINUS:
        b = -b
    value = alg.convert(1)
    w1 = w2 = alg.convert(1)
    for _ in range(n):
        value *= a * w1 + b * w2
        w1 *= alg.tau1
        w2 *= alg.tau2
    return alg.arithmetic.check(value, "shifted factorial")


def binomial(alg: DeformationAlgebra, m: int, n: int):
    """Symmetric deformed binomial ``[m]! / ([n]! [m-n]!)``."""
    if not 0 <= n <= m:
        raise ParameterError(f"binomial needs 0 <= n <= m, got m={m}, n={n}")
    return alg.ordered_factorial(m, n) / alg.factorial(n)


def multinomial(alg: DeformationAlgebra, x: int, r) -> object:
    """``[x]_{s_k} / prod_j [r_j]!``; zero when ``x < s_k``."""
    r = as_index(r)
    if x < 0:
        raise ParameterError(f"multinomial needs x >= 0, got {x}")
    value = alg.ordered_factorial(x, r.total)
    if value == 0:
        return value
    for rj in r:
        value /= alg.factorial(rj)
    return alg.arithmetic.check(value, "multinomial")


def _multinomial_or_zero(alg: DeformationAlgebra, x: int, r: Sequence[int]):
    """Coefficient with the convention that a negative lower index gives 0."""
    if any(v < 0 for v in r):
        return alg.convert(0)
    return multinomial(alg, x, r)


def multinomial_product_form(alg: DeformationAlgebra, n: int, r):
    """``prod_j binomial(n - s_{j-1}, r_j)``, a chain of conditional binomials."""
    r = as_index(r)
    if r.total > n:
        raise ParameterError(f"product form needs s_k <= n, got s_k={r.total}, n={n}")
    value = alg.convert(1)
    for j, rj in enumerate(r, start=1):
        value *= binomial(alg, n - r.s(j - 1), rj)
    return value


def multinomial_inverse_params(alg: DeformationAlgebra, x: int, r, convention: str = "m-form"):
    """Coefficient of the inverted algebra via a power of ``tau1*tau2``.

    Both conventions agree: the m-form and s-form exponents are equal as
    integers for every index.
    """
    r = as_index(r)
    if r.total > x:
        raise ParameterError(f"needs s_k <= x, got s_k={r.total}, x={x}")
    if convention == "m-form":
        exponent = sum(rj * (x - r.m(j)) for j, rj in enumerate(r, start=1))
    elif convention == "s-form":
        exponent = sum(rj * (x - r.s(j)) for j, rj in enumerate(r, start=1))
    else:
        raise ParameterError(f"unknown convention {convention!r}; expected one of {INVERSE_CONVENTIONS}")
    scale = alg.arithmetic.power(alg.tau1 * alg.tau2, -exponent)
    return scale * multinomial(alg, x, r)


# -- recurrences --------------------------------------------------------------


def recurrence_rhs(alg: DeformationAlgebra, x: int, r, variant: str, mode: str = CORRECTED):
    """Right-hand side of a one-step recurrence in the upper index.

    Each variant peels ``[x]`` off the ordered factorial with a different
    split of the deformed number.  In ``paper-literal`` mode the weights are
    the printed ones, with the last term of 2.3 read as
    ``[x-1; r - e_k]``.
    """
    r = as_index(r)
    mode = _mode(mode)
    if variant not in RECURRENCE_VARIANTS:
        raise ParameterError(f"unknown variant {variant!r}; expected one of {RECURRENCE_VARIANTS}")
    if x < 1:
        raise ParameterError(f"recurrence needs x >= 1, got {x}")
    ar = alg.arithmetic
    t1 = lambda e: ar.power(alg.tau1, e)  # noqa: E731
    t2 = lambda e: ar.power(alg.tau2, e)  # noqa: E731
    k, sk = r.k, r.total
    s, m = r.s, r.m
    literal = mode == PAPER_LITERAL

    if variant == "2.3":
        lead = t1(sk)
        weight = lambda j: t2(x - m(j)) * (1 if literal else t1(m(j + 1)))  # noqa: E731
    elif variant == "2.4":
        lead = t2(sk)
        if literal:
            weight = lambda j: t1(x - m(j)) * t2(s(j - 1))  # noqa: E731
        else:
            weight = lambda j: t1(x - s(j)) * t2(s(j - 1))  # noqa: E731
    elif variant == "2.5":
        lead = t2(m(1))
        if literal:
            weight = lambda j: t1(x) if j == k else t2(m(j + 1))  # noqa: E731
        else:
            weight = lambda j: t1(x - m(j)) * t2(m(j + 1))  # noqa: E731
    else:
        if literal:
            lead = t1(x)
            weight = lambda j: t2(x - s(j))  # noqa: E731
        else:
            lead = t1(sk)
            weight = lambda j: t2(x - s(j)) * t1(s(j - 1))  # noqa: E731

    terms = [lead * _multinomial_or_zero(alg, x - 1, r.r)]
    for j in range(1, k + 1):
        lowered = tuple(v - (1 if i == j else 0) for i, v in enumerate(r.r, start=1))
        terms.append(weight(j) * _multinomial_or_zero(alg, x - 1, lowered))
    return ar.fsum(terms)


# -- multinomial expansions ---------------------------------------------------


def _total(ar, terms, with_scale: bool):
    total = ar.fsum(terms)
    if with_scale:
        return total, ar.fsum(abs(t) for t in terms)
    return total


def multinomial_theorem_sum(alg: DeformationAlgebra, xs, n: int, mode: str = CORRECTED, with_scale: bool = False):
    """Expansion whose closed form is ``prod_j (1 (+) x_j)^n``.

    The corrected weight on coordinate j is ``tau1**C(n - s_j, 2)``; the
    printed ``tau1**C(n - r_j, 2)`` only agrees with it for k = 1.
    """
    mode = _mode(mode)
    xs = _values(alg, xs)
    if n < 0:
        raise ParameterError(f"n must be >= 0, got {n}")
    ar = alg.arithmetic
    k = len(xs)
    terms = []
    for idx in iter_indices(k, n):
        r = MultiIndex(idx)
        term = multinomial(alg, n, r)
        for j, (x, rj) in enumerate(zip(xs, idx), start=1):
            first = n - (rj if mode == PAPER_LITERAL else r.s(j))
            shift = n - r.s(j - 1)
            term *= (
                ar.power(x, rj)
                * ar.power(alg.tau1, binom2(first))
                * ar.power(alg.tau2, binom2(rj))
                * shifted_factorial(alg, ar.power(alg.tau1, shift), x * ar.power(alg.tau2, shift), r.s(j - 1))
            )
        terms.append(term)
    ar.check(ar.fsum(terms), "multinomial expansion")
    return _total(ar, terms, with_scale)


def product_side(alg: DeformationAlgebra, xs, n: int, sign=Sign.PLUS):
    """``prod_j (1 (+/-) x_j)^n``."""
    value = alg.convert(1)
    for x in _values(alg, xs):
        value *= shifted_factorial(alg, 1, x, n, sign)
    return value


def negative_multinomial_theorem_sum(
    alg: DeformationAlgebra, xs, n: int, trunc: int = 60, mode: str = CORRECTED, eps: float = 1e-13
):
    """Truncated negative expansion whose closed form is ``prod_j (1 (+) x_j)^n``.

    Each ``r_j`` runs over ``0..trunc``.  Raises :class:`ConvergenceError`
    when terms on the truncation boundary are not negligible or the terms
    overflow, which happens when ``tau2 > tau1``.
    """
    mode = _mode(mode)
    xs = _values(alg, xs)
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    if trunc < 0:
        raise ParameterError("trunc must be >= 0")
    ar = alg.arithmetic
    k = len(xs)
    if any(x < 0 for x in xs):
        raise ParameterError("negative expansion needs x_j >= 0")
    if not alg.tau2 < alg.tau1:
        raise ConvergenceError(
            f"{alg.name}: the negative expansion needs tau2 < tau1 (got tau2/tau1 = {float(alg.tau_ratio):.6g})"
        )
    t = alg.tau_ratio
    # (tau1^n (+) x tau2^n)^m = tau1^(n m + C(m,2)) * prod_{i<m} (1 + x t^(n+i)).
    # Every factor is positive, so each term is assembled as one exponential
    # of a sum of logarithms; the pieces overflow separately long before
    # their product does.
    log_denominators = []
    for x in xs:
        row = [ar.convert(0)]
        step = x * ar.power(t, n)
        for _ in range(k * trunc):
            row.append(row[-1] + ar.log(1 + step))
            step *= t
        log_denominators.append(row)
    log_xs = [ar.log(x) if x > 0 else None for x in xs]
    log_tau1, log_tau2 = ar.log(alg.tau1), ar.log(alg.tau2)

    terms = []
    edge = alg.convert(0)
    try:
        for idx in itertools.product(range(trunc + 1), repeat=k):
            if any(rj and lx is None for rj, lx in zip(idx, log_xs)):
                continue
            r = MultiIndex(idx)
            sk = r.total
            log_term = alg.log_factorial(n + sk - 1) - alg.log_factorial(n - 1)
            e1 = e2 = 0
            for j, rj in enumerate(idx, start=1):
                width = sk - r.s(j - 1)
                if mode == PAPER_LITERAL:
                    e1 += binom2(n - rj)
                else:
                    e1 += binom2(n + sk - r.s(j)) + rj
                e1 -= n * width + binom2(width)
                e2 += binom2(rj)
                log_term -= alg.log_factorial(rj) + log_denominators[j - 1][width]
                if rj:
                    log_term += rj * log_xs[j - 1]
            term = ar.exp(log_term + e1 * log_tau1 + e2 * log_tau2)
            terms.append(term)
            if trunc in idx:
                edge = max(edge, term)
    except (NumericalError, OverflowError, ZeroDivisionError) as exc:
        raise ConvergenceError(f"negative expansion terms overflow: {exc}") from exc
    total = ar.fsum(terms)
    if edge > eps * max(abs(total), 1):
        raise ConvergenceError(f"negative expansion not converged at trunc={trunc}: boundary term {float(edge):.3e}")
    return total


def alternative_multinomial_sum(alg: DeformationAlgebra, xs, n: int, with_scale: bool = False):
    """Expansion whose closed form is ``(1 (-) x_1 x_2 ... x_{k+1})^n``.

    ``xs`` has k + 1 entries; the last one only enters through the factor
    ``(1 (-) x_{k+1})^{n - s_k}``.
    """
    xs = _values(alg, xs)
    if len(xs) < 2:
        raise ParameterError("need k + 1 >= 2 variables")
    if n < 0:
        raise ParameterError(f"n must be >= 0, got {n}")
    ar = alg.arithmetic
    *head, last = xs
    terms = []
    for idx in iter_indices(len(head), n):
        r = MultiIndex(idx)
        term = multinomial(alg, n, r)
        for j, (x, rj) in enumerate(zip(head, idx), start=1):
            term *= ar.power(x, n - r.s(j)) * shifted_factorial(alg, 1, x, rj, Sign.MINUS)
        term *= shifted_factorial(alg, 1, last, n - r.total, Sign.MINUS)
        terms.append(term)
    return _total(ar, terms, with_scale)


def alternative_product_side(alg: DeformationAlgebra, xs, n: int):
    xs = _values(alg, xs)
    lam = alg.convert(1)
    for x in xs:
        lam *= x
    return shifted_factorial(alg, 1, lam, n, Sign.MINUS)


def corollary_sum(alg: DeformationAlgebra, xs, n: int, mode: str = CORRECTED, form: int = 1) -> IdentityEvaluation:
    """Both sides of the ``x_{k+1} = 0`` specialization of the alternative expansion.

    ``form=1`` uses ``x_j**(n-s_j) (1 (-) x_j)^{r_j}``; ``form=2`` swaps the
    roles, ``x_j**r_j (1 (-) x_j)^{n-s_j}``.  Corrected sums carry per-term
    powers of tau1 and equal ``tau1**C(n,2)`` and 1 respectively.  The
    literal mode drops those powers and compares with ``tau1**(-C(n,2))``,
    the printed right-hand side at ``s_k = n``.
    """
    mode = _mode(mode)
    if form not in (1, 2):
        raise ParameterError("form must be 1 or 2")
    xs = _values(alg, xs)
    if n < 0:
        raise ParameterError(f"n must be >= 0, got {n}")
    ar = alg.arithmetic
    literal = mode == PAPER_LITERAL
    terms = []
    for idx in iter_indices(len(xs), n):
        r = MultiIndex(idx)
        term = multinomial(alg, n, r)
        for j, (x, rj) in enumerate(zip(xs, idx), start=1):
            if form == 1:
                term *= ar.power(x, n - r.s(j)) * shifted_factorial(alg, 1, x, rj, Sign.MINUS)
            else:
                term *= ar.power(x, rj) * shifted_factorial(alg, 1, x, n - r.s(j), Sign.MINUS)
                if not literal:
                    term *= ar.power(alg.tau1, binom2(rj) - binom2(n - r.s(j - 1)))
        if form == 1 and not literal:
            term *= ar.power(alg.tau1, binom2(n - r.total))
        terms.append(term)
    lhs = ar.fsum(terms)
    if literal:
        rhs = ar.power(alg.tau1, -binom2(n))
    else:
        rhs = ar.power(alg.tau1, binom2(n)) if form == 1 else alg.convert(1)
    return IdentityEvaluation(f"corollary-form{form}-{mode}", lhs, rhs, ar.fsum(abs(t) for t in terms))


def gasper_rahman_sum(alg: DeformationAlgebra, xs, n: int, x0) -> IdentityEvaluation:
    """Evaluate the printed generalization with a caller-supplied ``x_0``.

    Experimental: the residual is reported, never asserted.
    """
    xs = _values(alg, xs)
    if n < 0:
        raise ParameterError(f"n must be >= 0, got {n}")
    ar = alg.arithmetic
    previous = [alg.convert(x0), *xs[:-1]]
    terms = []
    for idx in iter_indices(len(xs), n):
        r = MultiIndex(idx)
        term = multinomial(alg, n, r)
        for j, x in enumerate(xs, start=1):
            term *= ar.power(x, r.s(j)) * shifted_factorial(alg, 1, previous[j - 1], n, Sign.MINUS)
        term *= shifted_factorial(alg, 1, xs[-1], n - r.total, Sign.MINUS)
        terms.append(term)
    lhs = ar.fsum(terms)
    rhs = alternative_product_side(alg, xs, n)
    return IdentityEvaluation("gasper-rahman", lhs, rhs, ar.fsum(abs(t) for t in terms))


def inverted_multinomial(alg: DeformationAlgebra, x: int, r):
    """Direct coefficient on the inverted algebra, for comparison."""
    return multinomial(invert_parameters(alg), x, r)


__all__ = [
    "CORRECTED",
    "INVERSE_CONVENTIONS",
    "MODES",
    "PAPER_LITERAL",
    "RECURRENCE_VARIANTS",
    "IdentityEvaluation",
    "MultiIndex",
    "Sign",
    "alternative_multinomial_sum",
    "alternative_product_side",
    "as_index",
    "binomial",
    "corollary_sum",
    "gasper_rahman_sum",
    "inverted_multinomial",
    "iter_indices",
    "multinomial",
    "multinomial_inverse_params",
    "multinomial_product_form",
    "multinomial_theorem_sum",
    "negative_multinomial_theorem_sum",
    "product_side",
    "recurrence_rhs",
    "shifted_factorial",
]
