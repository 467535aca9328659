"""Deformed multinomial distributions: exact pmfs, tables, recursions, samplers.

Finite families are built from chains of conditional univariate laws.  The
first-kind trial model has success odds ``theta * t**(i-1)`` at trial ``i``
with ``t = tau2 / tau1``; the second-kind model fails with probability
``theta * t**c`` after ``c`` earlier successes.  Absorption families are the
second-kind model on the inverted algebra, which fails with probability
``t**(m - c)`` and so stops succeeding once ``c`` reaches ``m``.

Negative families run their chain backwards: coordinate k sees ``n`` trials
and coordinate j sees ``n + s_k - s_j``.  Limit families are products of
independent univariate laws with ``mu = theta / (tau1 - tau2)``.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ._numeric import binom2
from .algebra import DeformationAlgebra, invert_parameters
from .combinatorics import MultiIndex, as_index, binomial, iter_indices, multinomial, shifted_factorial
from .exceptions import NumericalError, ParameterError, TruncationWarning

FIRST_KIND = "first-kind"
NEGATIVE_FIRST_KIND = "negative-first-kind"
NEGATIVE_FIRST_KIND_FAILURES = "negative-first-kind-failures"
SECOND_KIND = "second-kind"
SECOND_KIND_SUCCESSES = "second-kind-successes"
NEGATIVE_SECOND_KIND = "negative-second-kind"
MULTIPLE_HEINE = "multiple-heine"
MULTIPLE_EULER = "multiple-euler"
ABSORPTION_SECOND_KIND = "absorption-second-kind"
ABSORPTION_SUCCESSES = "absorption-successes"

KINDS = (
    FIRST_KIND,
    NEGATIVE_FIRST_KIND,
    NEGATIVE_FIRST_KIND_FAILURES,
    SECOND_KIND,
    SECOND_KIND_SUCCESSES,
    NEGATIVE_SECOND_KIND,
    MULTIPLE_HEINE,
    MULTIPLE_EULER,
    ABSORPTION_SECOND_KIND,
    ABSORPTION_SUCCESSES,
)
FINITE_KINDS = frozenset(
    {FIRST_KIND, SECOND_KIND, SECOND_KIND_SUCCESSES, ABSORPTION_SECOND_KIND, ABSORPTION_SUCCESSES}
)
NEGATIVE_KINDS = frozenset({NEGATIVE_FIRST_KIND, NEGATIVE_FIRST_KIND_FAILURES, NEGATIVE_SECOND_KIND})
LIMIT_KINDS = frozenset({MULTIPLE_HEINE, MULTIPLE_EULER})
ABSORPTION_KINDS = frozenset({ABSORPTION_SECOND_KIND, ABSORPTION_SUCCESSES})
# families whose trials fail with probability theta * t**c after c successes
SECOND_FAMILY = frozenset(
    {SECOND_KIND, SECOND_KIND_SUCCESSES, NEGATIVE_SECOND_KIND, ABSORPTION_SECOND_KIND, ABSORPTION_SUCCESSES}
)
# kinds with a stated all-coordinate recursion
LITERAL_RECURSION_KINDS = frozenset({FIRST_KIND, NEGATIVE_FIRST_KIND, SECOND_KIND, NEGATIVE_SECOND_KIND})

DERIVED_RATIO = "derived-ratio"
PAPER_LITERAL = "paper-literal"

DEFAULT_EPS_TAIL = 1e-12
DEFAULT_MAX_INDEX = 500
_STALL_SHELLS = 3
_PROBABILITY_SLACK = 1e-15


@dataclass(frozen=True)
class Truncation:
    """Stopping rule for infinite-support tables."""

    eps_tail: float = DEFAULT_EPS_TAIL
    max_index: int = DEFAULT_MAX_INDEX

    def __post_init__(self):
        if not 0 < self.eps_tail < 1:
            raise ParameterError(f"eps_tail must lie in (0, 1), got {self.eps_tail}")
        if self.max_index < 1:
            raise ParameterError(f"max_index must be >= 1, got {self.max_index}")


@dataclass(frozen=True, eq=False)
class DistributionSpec:
    """One distribution: kind, trial count, odds vector and algebra.

    For absorption kinds pass ``absorption=(m_1, ..., m_k)`` instead of
    ``theta``; the odds become ``t**m_j`` with ``t = tau2 / tau1``.
    ``strict_theta`` enforces ``0 < theta_j < 1``; turning it off keeps
    only the constraints the trial model itself needs.
    """

    kind: str
    n: int
    theta: tuple
    algebra: DeformationAlgebra
    truncation: Truncation = field(default_factory=Truncation)
    absorption: tuple | None = None
    strict_theta: bool = True

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        if isinstance(self.n, bool) or int(self.n) != self.n:
            raise ParameterError(f"n must be an integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        alg = self.algebra
        if self.kind in ABSORPTION_KINDS:
            if self.absorption is None:
                raise ParameterError(f"{self.kind} needs absorption levels m_j")
            levels = tuple(alg.convert(m) for m in self.absorption)
            if not levels or any(m <= 0 for m in levels):
                raise ParameterError("absorption levels must be positive")
            object.__setattr__(self, "absorption", levels)
            object.__setattr__(self, "theta", tuple(alg.arithmetic.power(alg.tau_ratio, m) for m in levels))
        else:
            if self.absorption is not None:
                raise ParameterError(f"{self.kind} does not take absorption levels")
            if self.theta is None:
                raise ParameterError(f"{self.kind} needs theta")
            object.__setattr__(self, "theta", tuple(alg.convert(v) for v in self.theta))
        if not self.theta:
            raise ParameterError("theta needs at least one entry (k >= 1)")
        if any(not alg.arithmetic.isfinite(v) or v <= 0 for v in self.theta):
            raise ParameterError(f"theta entries must be positive and finite, got {self.theta}")
        if self.strict_theta and any(v >= 1 for v in self.theta):
            raise ParameterError(f"theta entries must be < 1 (pass strict_theta=False to relax), got {self.theta}")
        if self.kind in NEGATIVE_KINDS and self.n < 1:
            raise ParameterError(f"{self.kind} needs n >= 1")
        if self.kind not in LIMIT_KINDS and self.n < 0:
            raise ParameterError("n must be >= 0")
        if self.kind in LIMIT_KINDS and not alg.tau1 > alg.tau2:
            raise ParameterError("limit families need tau1 > tau2 so that mu = theta / (tau1 - tau2) is positive")
        if self.kind in SECOND_FAMILY:
            self._validate_second_family()

    # -- derived quantities ----------------------------------------------------

    @property
    def k(self) -> int:
        return len(self.theta)

    @property
    def finite(self) -> bool:
        return self.kind in FINITE_KINDS

    @cached_property
    def working_algebra(self) -> DeformationAlgebra:
        """Algebra in which the pmf formulas are evaluated."""
        if self.kind in ABSORPTION_KINDS:
            return invert_parameters(self.algebra)
        return self.algebra

    @cached_property
    def mu(self) -> tuple:
        alg = self.algebra
        return tuple(th / (alg.tau1 - alg.tau2) for th in self.theta)

    @cached_property
    def limit_weights(self) -> tuple:
        """Normalizing factors of the limit families, one per coordinate."""
        alg = self.algebra
        if self.kind == MULTIPLE_HEINE:
            return tuple(alg.exp_small(-m) for m in self.mu)
        if self.kind == MULTIPLE_EULER:
            return tuple(alg.exp_big(-m) for m in self.mu)
        raise ParameterError("only limit families have limit weights")

    def failure_odds(self, j: int, c: int):
        """Failure probability of coordinate j (1-based) after c successes."""
        ar = self.algebra.arithmetic
        if self.kind in ABSORPTION_KINDS:
            return ar.power(self.algebra.tau_ratio, self.absorption[j - 1] - c)
        return self.theta[j - 1] * ar.power(self.working_algebra.tau_ratio, c)

    def _validate_second_family(self):
        # the largest success count a coordinate can reach before the last trial
        horizon = self.n
        if self.kind == NEGATIVE_SECOND_KIND:
            horizon = self.n
        for j in range(1, self.k + 1):
            for c in range(horizon):
                w = self.failure_odds(j, c)
                if w == 1:
                    break  # absorbing: later success counts are unreachable
                if w < 0 or w > 1 + _PROBABILITY_SLACK:
                    raise ParameterError(
                        f"{self.kind}: success probability 1 - {float(w):.6g} leaves [0, 1] "
                        f"at coordinate j={j}, trial i={c + 1}"
                    )

    def in_support(self, index) -> bool:
        idx = as_index(index)
        if idx.k != self.k:
            return False
        return not self.finite or idx.total <= self.n

    def zero_index(self) -> MultiIndex:
        return MultiIndex((0,) * self.k)


def make_spec(
    kind: str,
    algebra: DeformationAlgebra,
    n: int,
    theta=None,
    *,
    absorption=None,
    eps_tail: float = DEFAULT_EPS_TAIL,
    max_index: int = DEFAULT_MAX_INDEX,
    strict_theta: bool = True,
) -> DistributionSpec:
    if theta is not None and not isinstance(theta, (list, tuple)):
        theta = (theta,)
    if absorption is not None and not isinstance(absorption, (list, tuple)):
        absorption = (absorption,)
    return DistributionSpec(
        kind,
        n,
        None if theta is None else tuple(theta),
        algebra,
        Truncation(eps_tail, max_index),
        None if absorption is None else tuple(absorption),
        strict_theta,
    )


# -- trial model ----------------------------------------------------------------


def trial_probabilities(alg: DeformationAlgebra, theta_j, i: int):
    """Success and failure probability of the first-kind model at trial i."""
    if i < 1:
        raise ParameterError(f"trial index must be >= 1, got {i}")
    theta_j = alg.convert(theta_j)
    if theta_j <= 0:
        raise ParameterError("theta must be positive")
    ar = alg.arithmetic
    a = ar.power(alg.tau1, i - 1)
    b = theta_j * ar.power(alg.tau2, i - 1)
    success = b / (a + b)
    return success, 1 - success


# -- building blocks ----------------------------------------------------------------


def _plus(alg: DeformationAlgebra, theta, n: int):
    return shifted_factorial(alg, 1, theta, n, "+")


def _minus(spec: DistributionSpec, j: int, count: int):
    """``(1 (-) theta_j)^count`` in the working algebra.

    Written as ``tau1**C(count,2) * prod (1 - w_c)`` with the failure
    probabilities ``w_c`` so that absorbing states give an exact zero.
    """
    alg = spec.working_algebra
    value = alg.arithmetic.power(alg.tau1, binom2(count))
    for c in range(count):
        w = spec.failure_odds(j, c)
        if w == 1:
            return alg.arithmetic.convert(0)
        value *= 1 - w
    return value


def _components(spec: DistributionSpec, idx: MultiIndex) -> list:
    """Factors whose product is the pmf at an in-support index."""
    alg = spec.working_algebra
    ar = alg.arithmetic
    t1 = lambda e: ar.power(alg.tau1, e)  # noqa: E731
    t2 = lambda e: ar.power(alg.tau2, e)  # noqa: E731
    kind, n, s = spec.kind, spec.n, idx.s
    sk = idx.total
    factors = []

    if kind in LIMIT_KINDS:
        for j, (y, mu, weight) in enumerate(zip(idx, spec.mu, spec.limit_weights), start=1):
            tau = alg.tau2 if kind == MULTIPLE_HEINE else alg.tau1
            factors.append(weight * ar.power(mu, y) * ar.power(tau, binom2(y)) / alg.factorial(y))
        return factors

    if kind in NEGATIVE_KINDS:
        factors.append(multinomial(alg, n + sk - 1, idx))
    else:
        factors.append(multinomial(alg, n, idx))

    for j, (y, th) in enumerate(zip(idx, spec.theta), start=1):
        if kind == FIRST_KIND:
            f = ar.power(th, y) * t1(binom2(n - s(j))) * t2(binom2(y)) / _plus(alg, th, n - s(j - 1))
        elif kind in (SECOND_KIND, ABSORPTION_SECOND_KIND):
            f = ar.power(th, y) * _minus(spec, j, n - s(j)) * t1(binom2(y) - binom2(n - s(j - 1)))
        elif kind in (SECOND_KIND_SUCCESSES, ABSORPTION_SUCCESSES):
            f = ar.power(th, n - s(j)) * _minus(spec, j, y) * t1(binom2(n - s(j)) - binom2(n - s(j - 1)))
        elif kind == NEGATIVE_FIRST_KIND:
            width = n + sk - s(j)
            f = ar.power(th, y) * t2(binom2(y)) * t1(binom2(width) + y) / _plus(alg, th, width + y)
        elif kind == NEGATIVE_FIRST_KIND_FAILURES:
            width = n + sk - s(j)
            f = ar.power(th, width) * t1(binom2(y)) * t2(binom2(width) + y) / _plus(alg, th, width + y)
        else:  # negative second kind
            width = n + sk - s(j)
            f = ar.power(th, y) * _minus(spec, j, width) * t1(-y * (width - 1) - binom2(width))
        factors.append(f)
    return factors


def _product(ar, factors):
    value = ar.convert(1)
    for f in factors:
        value *= f
    return ar.check(value, "probability")


def pmf(spec: DistributionSpec, index):
    """Probability of ``index``; zero outside the support."""
    idx = as_index(index)
    if idx.k != spec.k:
        raise ParameterError(f"index has {idx.k} entries, distribution has k={spec.k}")
    ar = spec.algebra.arithmetic
    if not spec.in_support(idx):
        return ar.convert(0)
    factors = _components(spec, idx)
    value = _product(ar, factors)
    if value == 0 and ar.extended and all(f != 0 for f in factors):
        raise NumericalError(f"probability underflowed at {idx.r}")
    return value


def conditional_pmf(spec: DistributionSpec, j: int, trials: int, y: int):
    """Univariate law of coordinate j given the ``trials`` it sees.

    This is the building block of the chain; it is written from the k = 1
    formulas and does not reuse :func:`pmf`.
    """
    alg = spec.working_algebra
    ar = alg.arithmetic
    th = spec.theta[j - 1]
    t1 = lambda e: ar.power(alg.tau1, e)  # noqa: E731
    t2 = lambda e: ar.power(alg.tau2, e)  # noqa: E731
    kind = spec.kind
    if y < 0:
        return ar.convert(0)
    if kind in LIMIT_KINDS:
        mu, weight = spec.mu[j - 1], spec.limit_weights[j - 1]
        tau = alg.tau2 if kind == MULTIPLE_HEINE else alg.tau1
        return weight * ar.power(mu, y) * ar.power(tau, binom2(y)) / alg.factorial(y)
    if kind in NEGATIVE_KINDS:
        coef = binomial(alg, trials + y - 1, y)
        if kind == NEGATIVE_FIRST_KIND:
            return coef * ar.power(th, y) * t2(binom2(y)) * t1(binom2(trials) + y) / _plus(alg, th, trials + y)
        if kind == NEGATIVE_FIRST_KIND_FAILURES:
            return coef * ar.power(th, trials) * t1(binom2(y)) * t2(binom2(trials) + y) / _plus(alg, th, trials + y)
        return coef * ar.power(th, y) * _minus(spec, j, trials) * t1(-y * (trials - 1) - binom2(trials))
    if y > trials:
        return ar.convert(0)
    coef = binomial(alg, trials, y)
    if kind == FIRST_KIND:
        return coef * ar.power(th, y) * t1(binom2(trials - y)) * t2(binom2(y)) / _plus(alg, th, trials)
    if kind in (SECOND_KIND, ABSORPTION_SECOND_KIND):
        return coef * ar.power(th, y) * _minus(spec, j, trials - y) * t1(binom2(y) - binom2(trials))
    return coef * ar.power(th, trials - y) * _minus(spec, j, y) * t1(binom2(trials - y) - binom2(trials))


def chain_trials(spec: DistributionSpec, idx: MultiIndex, j: int) -> int:
    """Trials seen by coordinate j given the rest of the index."""
    if spec.kind in FINITE_KINDS:
        return spec.n - idx.s(j - 1)
    if spec.kind in NEGATIVE_KINDS:
        return spec.n + idx.total - idx.s(j)
    return 0


def p_zero(spec: DistributionSpec):
    """Probability of the all-zero index from its own closed form."""
    alg = spec.working_algebra
    ar = alg.arithmetic
    n, kind = spec.n, spec.kind
    value = ar.convert(1)
    for j, th in enumerate(spec.theta, start=1):
        if kind in (FIRST_KIND, NEGATIVE_FIRST_KIND):
            factor = 1
            for c in range(n):
                factor /= 1 + th * ar.power(alg.tau_ratio, c)
        elif kind == NEGATIVE_FIRST_KIND_FAILURES:
            factor = ar.power(th, n) * ar.power(alg.tau2, binom2(n)) / _plus(alg, th, n)
        elif kind in (SECOND_KIND, NEGATIVE_SECOND_KIND, ABSORPTION_SECOND_KIND):
            factor = 1
            for c in range(n):
                factor *= 1 - spec.failure_odds(j, c)
        elif kind in (SECOND_KIND_SUCCESSES, ABSORPTION_SUCCESSES):
            factor = ar.power(th, n)
        else:
            factor = spec.limit_weights[j - 1]
        value *= factor
    return value


# -- recursions -----------------------------------------------------------------


def recursion_next(spec: DistributionSpec, index, p_current, mode: str = DERIVED_RATIO, step: int | None = None):
    """Probability at the next index from the probability at ``index``.

    ``step=None`` increments every coordinate; ``step=j`` increments only
    coordinate j (1-based).  ``derived-ratio`` multiplies by the quotient of
    the formula factors at the two indices; ``paper-literal`` applies the
    printed ratio, which only exists for the all-coordinate step.
    """
    idx = as_index(index)
    if idx.k != spec.k:
        raise ParameterError(f"index has {idx.k} entries, distribution has k={spec.k}")
    if step is None:
        target = MultiIndex(tuple(v + 1 for v in idx))
    else:
        if not 1 <= step <= spec.k:
            raise ParameterError(f"step must be in 1..{spec.k}")
        target = MultiIndex(tuple(v + (1 if i == step else 0) for i, v in enumerate(idx, start=1)))
    if not (spec.in_support(idx) and spec.in_support(target)):
        raise ParameterError(f"{idx.r} -> {target.r} leaves the support")
    ar = spec.algebra.arithmetic
    p_current = ar.convert(p_current)

    if mode == DERIVED_RATIO:
        before = _components(spec, idx)
        after = _components(spec, target)
        if any(f == 0 for f in before):
            if any(f == 0 for f in after):
                return ar.convert(0)
            raise ParameterError(f"probability at {idx.r} is zero; the ratio to {target.r} is undefined")
        ratio = ar.convert(1)
        for a, b in zip(after, before):
            ratio *= a / b
    elif mode == PAPER_LITERAL:
        if step is not None:
            raise ParameterError("the printed recursions only increment all coordinates")
        ratio = _literal_ratio(spec, idx)
    else:
        raise ParameterError(f"unknown recursion mode {mode!r}")
    if p_current == 0 and ratio != 0:
        raise ParameterError("current probability is zero; cannot propagate a nonzero target")
    return p_current * ratio


def _literal_ratio(spec: DistributionSpec, idx: MultiIndex):
    if spec.kind not in LITERAL_RECURSION_KINDS:
        raise ParameterError(f"no printed recursion exists for {spec.kind}")
    alg = spec.working_algebra
    ar = alg.arithmetic
    ratio = alg.ordered_factorial(spec.n - idx.total, spec.k)
    for y, th in zip(idx, spec.theta):
        if spec.kind in (FIRST_KIND, NEGATIVE_FIRST_KIND):
            shift = 1 + th if spec.kind == FIRST_KIND else 1 - th
            ratio *= th * ar.power(alg.tau1, spec.n - y) * ar.power(alg.tau2, y) / (alg.number(y + 1) * shift)
        else:
            ratio *= th * (1 - th) / alg.number(y + 1)
    return ratio


def q_standard_literal_ratio(q, n: int, theta, index):
    """Printed recursion ratio of the q-standard second kind, from q directly."""
    idx = as_index(index)
    q = float(q)
    qnum = lambda v: (1 - q**v) / (1 - q)  # noqa: E731
    ratio = 1.0
    for i in range(idx.k):
        ratio *= qnum(n - idx.total - i)
    for y, th in zip(idx, theta):
        ratio *= th * (1 - th) * (1 - q) / (1 - q ** (y + 1))
    return ratio


# -- printed forms, kept for the audit trail ---------------------------------------


def pmf_paper_literal(spec: DistributionSpec, index):
    """The printed pmf formula for each kind, evaluated verbatim.

    Differs from :func:`pmf` whenever ``tau1 != 1``; the printed Euler form
    also lacks the ``tau1**C(x,2)`` weight (its missing factorial sign is
    restored, since ``[0]`` would otherwise divide by zero).
    """
    idx = as_index(index)
    alg = spec.working_algebra
    ar = alg.arithmetic
    if not spec.in_support(idx):
        return ar.convert(0)
    t1 = lambda e: ar.power(alg.tau1, e)  # noqa: E731
    t2 = lambda e: ar.power(alg.tau2, e)  # noqa: E731
    kind, n, s, sk = spec.kind, spec.n, idx.s, idx.total
    if kind in LIMIT_KINDS:
        value = ar.convert(1)
        for y, mu, weight in zip(idx, spec.mu, spec.limit_weights):
            tau_term = ar.power(alg.tau2, binom2(y)) if kind == MULTIPLE_HEINE else 1
            value *= weight * ar.power(mu, y) * tau_term / alg.factorial(y)
        return value
    top = n + sk - 1 if kind in NEGATIVE_KINDS else n
    value = multinomial(alg, top, idx)
    for j, (y, th) in enumerate(zip(idx, spec.theta), start=1):
        if kind == FIRST_KIND:
            value *= ar.power(th, y) * t1(binom2(n - y)) * t2(binom2(y)) / _plus(alg, th, n - s(j - 1))
        elif kind == NEGATIVE_FIRST_KIND:
            value *= ar.power(th, y) * t1(binom2(n - y)) * t2(binom2(y)) / _plus(alg, th, n + sk - s(j - 1))
        elif kind == NEGATIVE_FIRST_KIND_FAILURES:
            width = n + sk - s(j - 1)
            value *= ar.power(th, width) * t1(binom2(y)) * t2(binom2(width) + y) / _plus(alg, th, width)
        elif kind in (SECOND_KIND, ABSORPTION_SECOND_KIND):
            value *= ar.power(th, y) * _minus(spec, j, n - s(j)) / t1(binom2(n - s(j)))
        elif kind in (SECOND_KIND_SUCCESSES, ABSORPTION_SUCCESSES):
            value *= ar.power(th, n - s(j)) * _minus(spec, j, y) / t1(binom2(y))
        else:
            width = n + sk - s(j)
            value *= ar.power(th, y) * _minus(spec, j, width) / t1(binom2(width))
    return value


def absorption_closed_form(spec: DistributionSpec, index):
    """Printed closed form of the absorption failures law (integer levels only)."""
    if spec.kind != ABSORPTION_SECOND_KIND:
        raise ParameterError("closed form only stated for the absorption failures law")
    idx = as_index(index)
    alg = spec.algebra
    ar = alg.arithmetic
    levels = [int(m) for m in spec.absorption]
    if any(m != lvl for m, lvl in zip(levels, spec.absorption)):
        raise ParameterError("closed form needs integer absorption levels")
    if not spec.in_support(idx):
        return ar.convert(0)
    n = spec.n
    exponent = -sum(x * (m - n + idx.s(j)) for j, (x, m) in enumerate(zip(idx, levels), start=1))
    value = multinomial(alg, n, idx) * ar.power(alg.tau1 * alg.tau2, exponent)
    for j, m in enumerate(levels, start=1):
        width = n - idx.s(j)
        value *= ar.power(alg.tau1 - alg.tau2, width) * alg.ordered_factorial(m, width)
    return value


# -- tables -----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PmfTable:
    """Enumerated support with probabilities in lexicographic index order."""

    spec: DistributionSpec | None
    entries: dict
    normalization_defect: float
    truncated: bool
    underflow: bool = False
    meta: dict = field(default_factory=dict)

    @property
    def total(self):
        return sum(self.entries.values())

    def probabilities(self) -> list:
        return list(self.entries.values())

    def __eq__(self, other):
        if not isinstance(other, PmfTable):
            return NotImplemented
        return (
            list(self.entries.items()) == list(other.entries.items())
            and self.normalization_defect == other.normalization_defect
            and self.truncated == other.truncated
        )

    __hash__ = None


def _compositions(total: int, k: int, cap: int):
    """Length-k tuples with entries in 0..cap summing to ``total``, lexicographic."""
    if k == 1:
        if total <= cap:
            yield (total,)
        return
    for v in range(min(total, cap) + 1):
        for rest in _compositions(total - v, k - 1, cap):
            yield (v, *rest)


def pmf_table(spec: DistributionSpec) -> PmfTable:
    """Full table for finite kinds; shell-by-shell enumeration otherwise.

    Infinite kinds stop once the mass reaches ``1 - eps_tail`` and the last
    shell holds less than ``eps_tail / 10``.  They are marked truncated
    when the index cap is hit or when the shells die out first, which is
    what a defective law looks like.
    """
    ar = spec.algebra.arithmetic
    entries = {}
    truncated = False
    if spec.finite:
        for idx in iter_indices(spec.k, spec.n):
            entries[idx] = pmf(spec, MultiIndex(idx))
    else:
        eps = spec.truncation.eps_tail
        cap = spec.truncation.max_index
        shell_masses = []
        peak = 0.0
        peak_at = 0
        quiet = 0
        shell = 0
        while True:
            try:
                shell_entries = {idx: pmf(spec, MultiIndex(idx)) for idx in _compositions(shell, spec.k, cap)}
            except NumericalError:
                # coefficients left the floating-point range; keep the complete shells
                truncated = True
                break
            entries.update(shell_entries)
            mass = float(ar.fsum(shell_entries.values()))
            shell_masses.append(mass)
            if mass > peak:
                peak, peak_at = mass, shell
            cumulative = float(ar.fsum(shell_masses))
            if cumulative >= 1 - eps and mass < eps / 10:
                break
            if shell > peak_at and mass <= peak * 1e-18:
                quiet += 1
                if quiet >= _STALL_SHELLS:
                    truncated = True
                    break
            else:
                quiet = 0
            if shell >= spec.k * cap:
                truncated = True
                break
            shell += 1
        if shell > cap:
            truncated = True
        entries = dict(sorted(entries.items()))
    total = ar.fsum(entries.values())
    defect = float(abs(total - 1))
    nonzero_expected = spec.kind not in ABSORPTION_KINDS
    underflow = nonzero_expected and any(v == 0 for v in entries.values())
    if truncated:
        warnings.warn(
            f"{spec.kind} table truncated with normalization defect {defect:.3e}",
            TruncationWarning,
            stacklevel=2,
        )
    return PmfTable(spec, entries, defect, truncated, underflow)


# -- sampling -----------------------------------------------------------------------


class _ConditionalCdfs:
    """Cached inverse-CDF tables for each (coordinate, trials) pair."""

    def __init__(self, spec: DistributionSpec):
        self.spec = spec
        self._cache = {}

    def get(self, j: int, trials: int) -> np.ndarray:
        key = (j, trials)
        cdf = self._cache.get(key)
        if cdf is None:
            cdf = self._build(j, trials)
            self._cache[key] = cdf
        return cdf

    def _build(self, j: int, trials: int) -> np.ndarray:
        spec = self.spec
        if spec.finite:
            probs = [float(conditional_pmf(spec, j, trials, y)) for y in range(trials + 1)]
        else:
            eps = spec.truncation.eps_tail
            probs = []
            for y in range(spec.truncation.max_index + 1):
                value = float(conditional_pmf(spec, j, trials, y))
                probs.append(value)
                mass = sum(probs)
                if mass >= 1 - eps and value < eps / 10:
                    break
            else:
                raise ParameterError(
                    f"{spec.kind}: conditional law of coordinate {j} keeps {1 - sum(probs):.3e} of its mass "
                    f"beyond max_index={spec.truncation.max_index}; cannot sample"
                )
        cdf = np.cumsum(probs)
        # the remaining tail (at most eps_tail) is folded into the last cell
        cdf[-1] = 1.0
        return cdf


def sample(spec: DistributionSpec, seed: int, m: int) -> np.ndarray:
    """Draw ``m`` indices as an ``(m, k)`` integer array.

    Coordinates are drawn one at a time from their conditional laws by
    inverse CDF.  Finite kinds go forward from coordinate 1, negative kinds
    backward from coordinate k, and limit kinds draw each coordinate
    independently.  The same seed always gives the same draws.
    """
    if m < 1:
        raise ParameterError("m must be >= 1")
    rng = np.random.default_rng(seed)
    k = spec.k
    uniforms = rng.random((m, k))
    draws = np.zeros((m, k), dtype=np.int64)
    tables = _ConditionalCdfs(spec)
    order = range(k, 0, -1) if spec.kind in NEGATIVE_KINDS else range(1, k + 1)
    for j in order:
        if spec.finite:
            trials = spec.n - draws[:, : j - 1].sum(axis=1)
        elif spec.kind in NEGATIVE_KINDS:
            trials = spec.n + draws[:, j:].sum(axis=1)
        else:
            trials = np.zeros(m, dtype=np.int64)
        column = uniforms[:, j - 1]
        for value in np.unique(trials):
            rows = trials == value
            cdf = tables.get(j, int(value))
            draws[rows, j - 1] = np.searchsorted(cdf, column[rows], side="right")
    return draws


# -- limits -----------------------------------------------------------------------


def limit_distance(alg: DeformationAlgebra, theta, n: int, family: str = "heine", eps_tail: float = 1e-15) -> float:
    """Sup distance between a finite family and its limit law.

    ``heine`` compares the first kind, ``euler`` the second kind.  The
    comparison covers the finite support together with the limit table.
    """
    if family == "heine":
        finite_kind, limit_kind = FIRST_KIND, MULTIPLE_HEINE
    elif family == "euler":
        finite_kind, limit_kind = SECOND_KIND, MULTIPLE_EULER
    else:
        raise ParameterError(f"unknown limit family {family!r}; expected heine or euler")
    if not isinstance(theta, (list, tuple)):
        theta = (theta,)
    if alg.tau1 == alg.tau2:
        raise ParameterError("limit laws need tau1 != tau2")
    finite = pmf_table(make_spec(finite_kind, alg, n, theta))
    limit_spec = make_spec(limit_kind, alg, 0, theta, eps_tail=eps_tail)
    limit = pmf_table(limit_spec)
    support = set(finite.entries) | set(limit.entries)
    worst = 0.0
    for idx in support:
        a = finite.entries.get(idx)
        if a is None:
            a = pmf(make_spec(finite_kind, alg, n, theta), MultiIndex(idx))
        b = limit.entries.get(idx)
        if b is None:
            b = pmf(limit_spec, MultiIndex(idx))
        worst = max(worst, float(abs(a - b)))
    return worst


__all__ = [
    "ABSORPTION_KINDS",
    "DERIVED_RATIO",
    "FINITE_KINDS",
    "KINDS",
    "LIMIT_KINDS",
    "NEGATIVE_KINDS",
    "PAPER_LITERAL",
    "DistributionSpec",
    "PmfTable",
    "Truncation",
    "absorption_closed_form",
    "chain_trials",
    "conditional_pmf",
    "limit_distance",
    "make_spec",
    "p_zero",
    "pmf",
    "pmf_paper_literal",
    "pmf_table",
    "q_standard_literal_ratio",
    "recursion_next",
    "sample",
    "trial_probabilities",
]
