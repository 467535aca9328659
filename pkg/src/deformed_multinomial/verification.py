"""Independent oracles and the identity suite.

The oracles here never call the distribution formulas: the first-kind one
walks all 2**n outcome sequences, the second-kind one runs a dynamic program
over the success count, and the Gaussian multinomial is built from
``(q; q)_n`` products (optionally by counting inversions).

A suite is a JSON document naming presets and checks.  Each registered check
returns the worst residual over its grid; the registry fixes its tolerance
and whether a failure counts against the run or is only reported.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable

from . import combinatorics as cb
from . import distributions as ds
from .algebra import DeformationAlgebra, invert_parameters, make_preset_algebra
from .exceptions import DeformationError, ParameterError

PASS = "pass"
FAIL = "fail"
REPORT_ONLY = "report-only"

FIRST_KIND_ENUMERATION_MAX = 14
SECOND_KIND_DP_MAX = 2000
# frozen after calibration at p0=0.999, q0=0.998 (observed distances below 2e-3)
CLASSICAL_LIMIT_TOLERANCE = 5e-2
_TINY = 1e-300


# -- reports ----------------------------------------------------------------------


@dataclass(frozen=True)
class VerificationReport:
    """Worst residual of one identity over one grid."""

    identity: str
    preset: str
    params: dict
    max_abs_residual: float
    max_rel_residual: float
    worst_point: tuple | None
    verdict: str
    tolerance: float | None = None
    message: str = ""

    def to_json(self) -> str:
        record = asdict(self)
        record["worst_point"] = None if self.worst_point is None else list(self.worst_point)
        return json.dumps(record, sort_keys=True)

    @property
    def counts(self) -> bool:
        """True when this report can fail the run."""
        return self.verdict != REPORT_ONLY


class _Worst:
    """Running maximum of residuals with the point that produced it.

    Sums pass ``scale``, the total of their absolute terms; the relative
    residual is then taken against ``max(|rhs|, scale)`` so that cancellation
    among large terms is not charged to the identity.  The plain relative
    residual is kept alongside for the report message.
    """

    def __init__(self, metric: str = "rel"):
        self.metric = metric
        self.abs = 0.0
        self.rel = 0.0
        self.plain_rel = 0.0
        self.point = None
        self.notes = []

    def add(self, point, lhs, rhs, scale=None):
        lhs, rhs = float(lhs), float(rhs)
        diff = abs(lhs - rhs)
        plain = diff / max(abs(rhs), _TINY) if diff else 0.0
        rel = diff / max(abs(rhs), float(scale or 0), _TINY) if diff else 0.0
        if not math.isfinite(diff):
            diff = rel = plain = math.inf
        self.plain_rel = max(self.plain_rel, plain)
        key = rel if self.metric == "rel" else diff
        current = self.rel if self.metric == "rel" else self.abs
        if self.point is None or key > current:
            self.point = point
        self.abs = max(self.abs, diff)
        self.rel = max(self.rel, rel)

    def residual(self) -> float:
        return self.rel if self.metric == "rel" else self.abs


# -- oracles ------------------------------------------------------------------------


def enumerate_first_kind_exact(alg: DeformationAlgebra, theta, n: int) -> dict:
    """Success-count law from all 2**n outcome sequences."""
    if n < 0 or n > FIRST_KIND_ENUMERATION_MAX:
        raise ParameterError(f"enumeration needs 0 <= n <= {FIRST_KIND_ENUMERATION_MAX}, got {n}")
    theta = float(theta)
    tau1, tau2 = float(alg.tau1), float(alg.tau2)
    success = []
    for i in range(1, n + 1):
        odds = theta * tau2 ** (i - 1)
        success.append(odds / (tau1 ** (i - 1) + odds))
    buckets = {y: [] for y in range(n + 1)}
    for outcome in itertools.product((0, 1), repeat=n):
        weight = 1.0
        for hit, ps in zip(outcome, success):
            weight *= ps if hit else 1.0 - ps
        buckets[sum(outcome)].append(weight)
    return {y: math.fsum(values) for y, values in buckets.items()}


def enumerate_second_kind_exact(alg: DeformationAlgebra, theta, n: int, *, return_rows: bool = False):
    """Failure-count law from a dynamic program over the success count.

    The state after each trial is the number of successes so far; a trial
    from state c fails with probability ``theta * (tau2/tau1)**c``.
    """
    if n < 0 or n > SECOND_KIND_DP_MAX:
        raise ParameterError(f"dynamic program needs 0 <= n <= {SECOND_KIND_DP_MAX}, got {n}")
    theta = float(theta)
    ratio = float(alg.tau2) / float(alg.tau1)
    row = [1.0]
    rows = [row]
    for i in range(n):
        nxt = [0.0] * (len(row) + 1)
        for c, mass in enumerate(row):
            if mass == 0:
                continue
            fail = theta * ratio**c
            if not 0 <= fail <= 1:
                raise ParameterError(f"failure probability {fail:.6g} outside [0, 1] at trial {i + 1} after {c} successes")
            nxt[c] += mass * fail
            nxt[c + 1] += mass * (1 - fail)
        row = nxt
        rows.append(row)
    law = {n - c: mass for c, mass in enumerate(row)}
    law = dict(sorted(law.items()))
    return (law, rows) if return_rows else law


def _q_pochhammer(q: float, n: int) -> float:
    value = 1.0
    for i in range(1, n + 1):
        value *= 1.0 - q**i
    return value


def gaussian_multinomial(q: float, x: int, r) -> float:
    """Gaussian multinomial ``(q;q)_x / ((q;q)_{x-s} prod (q;q)_{r_j})``."""
    r = tuple(int(v) for v in r)
    rest = x - sum(r)
    if rest < 0:
        return 0.0
    denominator = _q_pochhammer(q, rest)
    for v in r:
        denominator *= _q_pochhammer(q, v)
    return _q_pochhammer(q, x) / denominator


def gaussian_multinomial_by_inversions(q: float, x: int, r) -> float:
    """Same coefficient as a sum of ``q**inv`` over words with the given content."""
    r = tuple(int(v) for v in r)
    rest = x - sum(r)
    if rest < 0:
        return 0.0
    if x > 8:
        raise ParameterError("inversion counting is limited to x <= 8")
    letters = [letter for letter, count in enumerate((*r, rest)) for _ in range(count)]
    total = []
    for word in set(itertools.permutations(letters)):
        inversions = sum(1 for a, b in itertools.combinations(word, 2) if a > b)
        total.append(q**inversions)
    return math.fsum(total)


def _classical_chain(n: int, idx: tuple, probs: tuple) -> float:
    value = 1.0
    remaining = n
    for v, prob in zip(idx, probs):
        if v > remaining:
            return 0.0
        value *= math.comb(remaining, v) * prob**v * (1 - prob) ** (remaining - v)
        remaining -= v
    return value


def conditional_decomposition_check(spec: ds.DistributionSpec, total_max: int | None = None) -> VerificationReport:
    """Joint pmf against the product of conditional univariate laws."""
    worst = _Worst("rel")
    bound = spec.n if spec.finite else (total_max if total_max is not None else spec.n + 4)
    for idx in cb.iter_indices(spec.k, bound):
        mi = cb.MultiIndex(idx)
        joint = ds.pmf(spec, mi)
        chain = 1.0
        for j in range(1, spec.k + 1):
            chain *= ds.conditional_pmf(spec, j, ds.chain_trials(spec, mi, j), idx[j - 1])
        worst.add(idx, joint, chain)
    return _report(
        "conditional-decomposition",
        spec.algebra,
        {"kind": spec.kind, "n": spec.n, "theta": [float(t) for t in spec.theta]},
        worst,
        1e-11,
        PASS,
    )


def classical_limit_check(kind: str, n: int, k: int, theta, p0: float, q0: float) -> VerificationReport:
    """Deformed pmf near ``p = q = 1`` against the classical chain of binomials."""
    theta = tuple(float(t) for t in (theta if isinstance(theta, (list, tuple)) else [theta] * k))
    if len(theta) != k:
        raise ParameterError(f"theta has {len(theta)} entries, expected k={k}")
    alg = make_preset_algebra("jagannathan-srinivasa", p0, q0)
    spec = ds.make_spec(kind, alg, n, theta)
    if kind == ds.FIRST_KIND:
        probs = tuple(t / (1 + t) for t in theta)
    elif kind == ds.SECOND_KIND:
        probs = theta
    else:
        raise ParameterError("classical limit check covers first-kind and second-kind")
    worst = _Worst("abs")
    for idx in cb.iter_indices(k, n):
        worst.add(idx, ds.pmf(spec, idx), _classical_chain(n, idx, probs))
    return _report(
        "classical-limit",
        alg,
        {"kind": kind, "n": n, "theta": list(theta)},
        worst,
        CLASSICAL_LIMIT_TOLERANCE,
        PASS,
    )


# -- suite plumbing ---------------------------------------------------------------


def _preset_label(alg: DeformationAlgebra) -> str:
    if alg.preset in ("q-standard", "biedenharn-macfarlane"):
        return f"{alg.name}(q={float(alg.q)!r})"
    return f"{alg.name}(p={float(alg.p)!r},q={float(alg.q)!r})"


def _report(identity, alg, params, worst: _Worst, tolerance, klass, message="") -> VerificationReport:
    if worst.metric == "rel" and worst.plain_rel > worst.rel:
        message = "; ".join(filter(None, [message, f"unscaled rel={worst.plain_rel:.3e}"]))
    if klass == REPORT_ONLY:
        verdict = REPORT_ONLY
    else:
        verdict = PASS if worst.residual() <= tolerance else FAIL
    label = alg if isinstance(alg, str) else _preset_label(alg)
    return VerificationReport(
        identity, label, params, worst.abs, worst.rel, worst.point, verdict, tolerance, message
    )


@dataclass(frozen=True)
class Check:
    """A registered identity: its evaluator, tolerance and residual metric."""

    identity: str
    run: Callable
    tolerance: float
    klass: str = PASS
    metric: str = "rel"
    defaults: dict = field(default_factory=dict)
    applies: Callable | None = None


REGISTRY: dict[str, Check] = {}


def register(identity, tolerance, klass=PASS, metric="rel", applies=None, **defaults):
    def decorate(fn):
        REGISTRY[identity] = Check(identity, fn, tolerance, klass, metric, defaults, applies)
        return fn

    return decorate


def _decreasing_ratio(alg):
    return alg.tau2 < alg.tau1


# algebra ------------------------------------------------------------------------


@register("splitting-law", 1e-12, n_max=20)
def _splitting(alg, params, worst):
    for x in range(1, params["n_max"] + 1):
        for s in range(x + 1):
            rhs = alg.tau1**s * alg.number(x - s) + alg.tau2 ** (x - s) * alg.number(s)
            worst.add((x, s), alg.number(x), rhs)


@register("inverted-numbers", 1e-12, n_max=12)
def _inverted_numbers(alg, params, worst):
    inv = invert_parameters(alg)
    for x in range(1, params["n_max"] + 1):
        worst.add((x,), inv.number(x), (alg.tau1 * alg.tau2) ** (1 - x) * alg.number(x))


@register("exponential-duality", 1e-9, metric="abs", z_values=[-0.8, -0.5, -0.2, 0.0, 0.3, 0.6, 0.8])
def _duality(alg, params, worst):
    for z in params["z_values"]:
        worst.add((z,), alg.exp_small(z) * alg.exp_big(-z), 1.0)


# coefficients -------------------------------------------------------------------


@register("multinomial-product-form", 1e-11, n_max=10, k_max=3)
def _product_form(alg, params, worst):
    for k in range(1, params["k_max"] + 1):
        for n in range(params["n_max"] + 1):
            for idx in cb.iter_indices(k, n):
                worst.add((n, *idx), cb.multinomial(alg, n, idx), cb.multinomial_product_form(alg, n, idx))


def _recurrence(variant, mode):
    def run(alg, params, worst):
        for k in range(1, params["k_max"] + 1):
            for x in range(1, params["n_max"] + 1):
                for idx in cb.iter_indices(k, x):
                    worst.add((x, *idx), cb.recurrence_rhs(alg, x, idx, variant, mode), cb.multinomial(alg, x, idx))

    return run


for _variant in cb.RECURRENCE_VARIANTS:
    register(f"recurrence-{_variant}", 1e-11, n_max=10, k_max=3)(_recurrence(_variant, cb.CORRECTED))
    register(f"recurrence-{_variant}-literal", 1e-11, REPORT_ONLY, n_max=10, k_max=3)(
        _recurrence(_variant, cb.PAPER_LITERAL)
    )


def _inverse(convention):
    def run(alg, params, worst):
        inv = invert_parameters(alg)
        for k in range(1, params["k_max"] + 1):
            for x in range(params["n_max"] + 1):
                for idx in cb.iter_indices(k, x):
                    worst.add(
                        (x, *idx), cb.multinomial_inverse_params(alg, x, idx, convention), cb.multinomial(inv, x, idx)
                    )

    return run


for _convention in cb.INVERSE_CONVENTIONS:
    register(f"inverse-parameters-{_convention}", 1e-11, n_max=10, k_max=3)(_inverse(_convention))


def _gaussian_applies(alg):
    return alg.preset == "q-standard"


@register("gaussian-multinomial", 1e-13, applies=_gaussian_applies, n_max=10, k_max=3, inversion_max=6)
def _gaussian(alg, params, worst):
    q = float(alg.q)
    for k in range(1, params["k_max"] + 1):
        for n in range(params["n_max"] + 1):
            for idx in cb.iter_indices(k, n):
                reference = gaussian_multinomial(q, n, idx)
                worst.add((n, *idx), cb.multinomial(alg, n, idx), reference)
                if n <= params["inversion_max"]:
                    worst.add(("inversions", n, *idx), gaussian_multinomial_by_inversions(q, n, idx), reference)


# expansions ---------------------------------------------------------------------

_X_GRID = [0.2, 0.45, 0.7]


def _x_vectors(k):
    return list(itertools.product(_X_GRID, repeat=k))


def _expansion(mode):
    def run(alg, params, worst):
        for k in range(1, params["k_max"] + 1):
            for xs in _x_vectors(k):
                for n in range(params["n_max"] + 1):
                    lhs, scale = cb.multinomial_theorem_sum(alg, xs, n, mode, with_scale=True)
                    worst.add((n, *xs), lhs, cb.product_side(alg, xs, n), scale)

    return run


register("multinomial-theorem", 1e-10, n_max=6, k_max=3)(_expansion(cb.CORRECTED))
register("multinomial-theorem-literal", 1e-10, REPORT_ONLY, n_max=6, k_max=3)(_expansion(cb.PAPER_LITERAL))


@register("negative-multinomial-theorem", 1e-8, applies=_decreasing_ratio, n_max=4, k_max=2, trunc=60)
def _negative_expansion(alg, params, worst):
    for k in range(1, params["k_max"] + 1):
        for xs in _x_vectors(k):
            for n in range(1, params["n_max"] + 1):
                lhs = cb.negative_multinomial_theorem_sum(alg, xs, n, params["trunc"])
                rhs = cb.product_side(alg, xs, n)
                worst.add((n, *xs), lhs, rhs)


@register("alternative-multinomial-theorem", 1e-10, n_max=6, k_max=3)
def _alternative(alg, params, worst):
    for k in range(1, params["k_max"] + 1):
        for xs in _x_vectors(k + 1):
            for n in range(params["n_max"] + 1):
                lhs, scale = cb.alternative_multinomial_sum(alg, xs, n, with_scale=True)
                worst.add((n, *xs), lhs, cb.alternative_product_side(alg, xs, n), scale)


def _corollary(form, mode):
    def run(alg, params, worst):
        for k in range(1, params["k_max"] + 1):
            for xs in _x_vectors(k):
                for n in range(params["n_max"] + 1):
                    ev = cb.corollary_sum(alg, xs, n, mode, form)
                    worst.add((n, *xs), ev.lhs, ev.rhs, ev.scale)

    return run


for _form in (1, 2):
    register(f"corollary-form{_form}", 1e-11, n_max=6, k_max=3)(_corollary(_form, cb.CORRECTED))
    register(f"corollary-form{_form}-literal", 1e-11, REPORT_ONLY, n_max=6, k_max=3)(
        _corollary(_form, cb.PAPER_LITERAL)
    )


@register("gasper-rahman", 1e-10, REPORT_ONLY, n_max=5, k_max=2, x0=0.5)
def _gasper_rahman(alg, params, worst):
    for k in range(1, params["k_max"] + 1):
        for xs in _x_vectors(k):
            for n in range(params["n_max"] + 1):
                ev = cb.gasper_rahman_sum(alg, xs, n, params["x0"])
                worst.add((n, *xs), ev.lhs, ev.rhs, ev.scale)


# distributions ------------------------------------------------------------------

_FINITE_GRID = {"n_max": 8, "k_max": 3, "theta": [0.2, 0.3, 0.4]}


def _specs(alg, kind, params, n_values=None):
    """Specs over the theta grid; absorption kinds take their levels from ``levels``."""
    for k in range(1, params["k_max"] + 1):
        first = 1 if kind in ds.NEGATIVE_KINDS else 0
        for n in n_values if n_values is not None else range(first, params["n_max"] + 1):
            if kind in ds.ABSORPTION_KINDS:
                for levels in itertools.product(params.get("levels", [2, 3]), repeat=k):
                    yield ds.make_spec(kind, alg, n, absorption=levels, strict_theta=False)
            else:
                for theta in itertools.product(params["theta"], repeat=k):
                    yield ds.make_spec(kind, alg, n, theta)


def _spec_point(spec):
    if spec.absorption is not None:
        return (spec.n, *[float(m) for m in spec.absorption])
    return (spec.n, *[float(t) for t in spec.theta])


def _normalization(alg, params, worst):
    for spec in _specs(alg, params["kind"], params):
        table = ds.pmf_table(spec)
        worst.add(_spec_point(spec), 1.0 + table.normalization_defect, 1.0)


register("normalization", 1e-10, metric="abs", kind=ds.FIRST_KIND, **_FINITE_GRID)(_normalization)
register("normalization-infinite", 1e-9, metric="abs", kind=ds.NEGATIVE_FIRST_KIND, n_max=3, k_max=2, theta=[0.2, 0.4])(
    _normalization
)
register(
    "normalization-defective", 1e-9, REPORT_ONLY, metric="abs",
    kind=ds.NEGATIVE_FIRST_KIND_FAILURES, n_max=3, k_max=1, theta=[0.2, 0.4],
)(_normalization)


@register("oracle-first-kind-enumeration", 1e-12, metric="abs", n_max=12, theta=[0.2, 0.4, 0.9])
def _oracle_first(alg, params, worst):
    for theta in params["theta"]:
        for n in range(params["n_max"] + 1):
            spec = ds.make_spec(ds.FIRST_KIND, alg, n, [theta])
            for y, prob in enumerate_first_kind_exact(alg, theta, n).items():
                worst.add((n, theta, y), ds.pmf(spec, (y,)), prob)


@register("oracle-second-kind-dp", 1e-12, metric="abs", applies=_decreasing_ratio, n_max=12, theta=[0.2, 0.4, 0.9])
def _oracle_second(alg, params, worst):
    for theta in params["theta"]:
        for n in range(params["n_max"] + 1):
            spec = ds.make_spec(ds.SECOND_KIND, alg, n, [theta])
            for x, prob in enumerate_second_kind_exact(alg, theta, n).items():
                worst.add((n, theta, x), ds.pmf(spec, (x,)), prob)


@register("conditional-decomposition", 1e-11, kind=ds.FIRST_KIND, n_max=6, k_max=3, theta=[0.2, 0.4])
def _decomposition(alg, params, worst):
    for spec in _specs(alg, params["kind"], params, [params["n_max"]]):
        report = conditional_decomposition_check(spec)
        worst.add(_spec_point(spec), 1.0 + report.max_rel_residual, 1.0)


@register("p-zero", 1e-12, kind=ds.FIRST_KIND, n_max=6, k_max=2, theta=[0.2, 0.4])
def _p_zero(alg, params, worst):
    for spec in _specs(alg, params["kind"], params):
        worst.add(_spec_point(spec), ds.pmf(spec, spec.zero_index()), ds.p_zero(spec))


def _path(k, n):
    """A monotone walk from the origin: single steps then one diagonal step."""
    steps = [j for _ in range(max(n // (k + 1), 1)) for j in range(1, k + 1)]
    return steps + [None]


@register("recursion-derived", 1e-10, kind=ds.FIRST_KIND, n_max=8, k_max=3, theta=[0.2, 0.4])
def _recursion(alg, params, worst):
    for spec in _specs(alg, params["kind"], params, [params["n_max"]]):
        idx = spec.zero_index()
        prob = ds.pmf(spec, idx)
        for step in _path(spec.k, spec.n):
            nxt = tuple(v + (1 if step in (None, j) else 0) for j, v in enumerate(idx, start=1))
            if not spec.in_support(nxt):
                break
            prob = ds.recursion_next(spec, idx, prob, ds.DERIVED_RATIO, step)
            idx = cb.MultiIndex(nxt)
            worst.add((*_spec_point(spec), *nxt), prob, ds.pmf(spec, idx))


@register("recursion-literal", 1e-10, REPORT_ONLY, kind=ds.FIRST_KIND, n_max=6, k_max=2, theta=[0.2, 0.4])
def _recursion_literal(alg, params, worst):
    for spec in _specs(alg, params["kind"], params, [params["n_max"]]):
        if spec.k < 1:
            continue
        idx = spec.zero_index()
        prob = ds.pmf(spec, idx)
        while spec.in_support(tuple(v + 1 for v in idx)):
            prob = ds.recursion_next(spec, idx, prob, ds.PAPER_LITERAL)
            idx = cb.MultiIndex(tuple(v + 1 for v in idx))
            worst.add((*_spec_point(spec), *idx), prob, ds.pmf(spec, idx))


@register("q-recursion-literal", 1e-10, REPORT_ONLY, applies=_gaussian_applies, n_max=6, k_max=2, theta=[0.2, 0.4])
def _q_recursion(alg, params, worst):
    for spec in _specs(alg, ds.SECOND_KIND, params, [params["n_max"]]):
        idx = spec.zero_index()
        prob = ds.pmf(spec, idx)
        while spec.in_support(tuple(v + 1 for v in idx)):
            prob = prob * ds.q_standard_literal_ratio(alg.q, spec.n, spec.theta, idx)
            idx = cb.MultiIndex(tuple(v + 1 for v in idx))
            worst.add((*_spec_point(spec), *idx), prob, ds.pmf(spec, idx))


@register("pmf-literal", 1e-12, REPORT_ONLY, kind=ds.FIRST_KIND, n_max=5, k_max=2, theta=[0.2, 0.4])
def _pmf_literal(alg, params, worst):
    for spec in _specs(alg, params["kind"], params, [params["n_max"]]):
        for idx in cb.iter_indices(spec.k, spec.n):
            worst.add((*_spec_point(spec), *idx), ds.pmf_paper_literal(spec, idx), ds.pmf(spec, idx))


@register("absorption-closed-form", 1e-12, REPORT_ONLY, n_max=5, k_max=2, levels=[2, 3])
def _absorption_closed(alg, params, worst):
    for spec in _specs(alg, ds.ABSORPTION_SECOND_KIND, params, [params["n_max"]]):
        for idx in cb.iter_indices(spec.k, spec.n):
            worst.add((*_spec_point(spec), *idx), ds.absorption_closed_form(spec, idx), ds.pmf(spec, idx))


def _limit(family):
    def run(alg, params, worst):
        distances = [ds.limit_distance(alg, params["theta"], n, family) for n in params["n_values"]]
        worst.add(tuple(params["n_values"]), distances[-1], 0.0)
        worst.notes.append("distances=" + ",".join(repr(d) for d in distances))
        if any(b >= a for a, b in zip(distances, distances[1:])):
            worst.notes.append("not strictly decreasing")
            worst.abs = math.inf

    return run


for _family in ("heine", "euler"):
    register(f"limit-{_family}", 1e-3, metric="abs", n_values=[5, 10, 20, 40], theta=0.3)(_limit(_family))


@register("classical-limit", CLASSICAL_LIMIT_TOLERANCE, metric="abs", kind=ds.SECOND_KIND, n=4, k=2, theta=[0.3, 0.2])
def _classical(alg, params, worst):
    report = classical_limit_check(params["kind"], params["n"], params["k"], params["theta"], alg.p, alg.q)
    worst.add(report.worst_point, report.max_abs_residual, 0.0)


# -- running ----------------------------------------------------------------------


def _build_preset(entry: dict, precision) -> DeformationAlgebra:
    if not isinstance(entry, dict) or "algebra" not in entry:
        raise ParameterError(f"preset entries need an 'algebra' key, got {entry!r}")
    return make_preset_algebra(entry["algebra"], entry.get("p"), entry.get("q"), precision=precision)


def _preset_text(entry: dict) -> str:
    parts = [f"{key}={entry[key]!r}" for key in ("p", "q") if key in entry]
    return f"{entry.get('algebra')}({','.join(parts)})"


def run_check(identity: str, entry: dict, overrides: dict | None = None, precision=None) -> VerificationReport | None:
    """One registered check on one preset; construction errors become failures."""
    check = REGISTRY.get(identity)
    if check is None:
        raise ParameterError(f"unknown identity {identity!r}")
    params = {**check.defaults, **(overrides or {})}
    tolerance = params.pop("tolerance", check.tolerance)
    worst = _Worst(check.metric)
    try:
        alg = _build_preset(entry, precision)
        if check.applies is not None and not check.applies(alg):
            return None
        check.run(alg, params, worst)
    except DeformationError as exc:
        return VerificationReport(
            identity, _preset_text(entry), params, math.inf, math.inf, worst.point,
            REPORT_ONLY if check.klass == REPORT_ONLY else FAIL, tolerance,
            f"{type(exc).__name__}: {exc}",
        )
    return _report(identity, alg, params, worst, tolerance, check.klass, "; ".join(worst.notes))


def load_suite(name_or_path: str) -> dict:
    """A bundled suite by name, or a JSON file path."""
    path = Path(name_or_path)
    try:
        if path.suffix == ".json" or path.exists():
            text = path.read_text()
        else:
            text = (resources.files(__package__) / "suites" / f"{name_or_path}.json").read_text()
    except (FileNotFoundError, OSError) as exc:
        raise ParameterError(f"cannot read suite {name_or_path!r}: {exc}") from None
    try:
        config = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParameterError(f"suite {name_or_path!r} is not valid JSON: {exc}") from None
    return config


def _validate(config) -> list:
    if not isinstance(config, dict):
        raise ParameterError("suite config must be a JSON object")
    checks = config.get("checks", [])
    if not isinstance(checks, list):
        raise ParameterError("'checks' must be a list")
    presets = config.get("presets", [])
    jobs = []
    for check in checks:
        if not isinstance(check, dict) or "identity" not in check:
            raise ParameterError(f"check entries need an 'identity' key, got {check!r}")
        if check["identity"] not in REGISTRY:
            raise ParameterError(f"unknown identity {check['identity']!r}")
        targets = check.get("presets", presets)
        overrides = check.get("params", {})
        if not isinstance(overrides, dict):
            raise ParameterError(f"params of {check['identity']} must be an object")
        label = check.get("label", check["identity"])
        for entry in targets:
            jobs.append((label, check["identity"], entry, overrides))
    return jobs


def run_suite(config, precision=None) -> list:
    """Run every check on every preset it targets; reports sorted by identity."""
    if isinstance(config, (str, Path)):
        config = load_suite(str(config))
    jobs = _validate(config)
    precision = precision or config.get("precision")
    reports = []
    for label, identity, entry, overrides in jobs:
        report = run_check(identity, entry, overrides, precision)
        if report is None:
            continue
        if label != identity:
            report = VerificationReport(**{**asdict(report), "identity": label})
        reports.append(report)
    reports.sort(key=lambda r: (r.identity, r.preset, json.dumps(r.params, sort_keys=True)))
    return reports


def suite_passed(reports) -> bool:
    return all(r.verdict != FAIL for r in reports)


def reports_to_jsonl(reports) -> str:
    return "".join(r.to_json() + "\n" for r in reports)


__all__ = [
    "CLASSICAL_LIMIT_TOLERANCE",
    "REGISTRY",
    "VerificationReport",
    "classical_limit_check",
    "conditional_decomposition_check",
    "enumerate_first_kind_exact",
    "enumerate_second_kind_exact",
    "gaussian_multinomial",
    "gaussian_multinomial_by_inversions",
    "load_suite",
    "reports_to_jsonl",
    "run_check",
    "run_suite",
    "suite_passed",
]
