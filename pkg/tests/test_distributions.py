import itertools
import math
import warnings

import numpy as np
import pytest

from deformed_multinomial import distributions as ds
from deformed_multinomial.algebra import make_preset_algebra
from deformed_multinomial.combinatorics import MultiIndex, iter_indices
from deformed_multinomial.exceptions import ParameterError, TruncationWarning

from conftest import DECREASING, PRESET_PARAMS, preset


def spec(kind, alg, n, theta=None, **kw):
    return ds.make_spec(kind, alg, n, theta, **kw)


def test_trial_probabilities(qstd, any_algebra):
    s, f = ds.trial_probabilities(qstd, 0.3, 1)
    assert s == pytest.approx(0.3 / 1.3) and f == pytest.approx(1 / 1.3)
    s, f = ds.trial_probabilities(qstd, 0.3, 2)
    assert s == pytest.approx(0.15 / 1.15) and f == pytest.approx(1 / 1.15)
    for i in range(1, 12):
        s, f = ds.trial_probabilities(any_algebra, 0.7, i)
        assert s + f == 1
    with pytest.raises(ParameterError):
        ds.trial_probabilities(qstd, 0.3, 0)


def test_success_decreases_when_ratio_below_one(decreasing_algebra):
    successes = [ds.trial_probabilities(decreasing_algebra, 0.4, i)[0] for i in range(1, 15)]
    assert all(a > b for a, b in zip(successes, successes[1:]))


def test_pmf_examples(qstd):
    assert ds.pmf(spec("first-kind", qstd, 2, [0.3]), (1,)) == pytest.approx(0.45 / 1.495, rel=1e-14)
    assert ds.pmf(spec("second-kind", qstd, 2, [0.4]), (1,)) == pytest.approx(0.36, rel=1e-14)
    assert ds.pmf(spec("first-kind", qstd, 2, [0.3, 0.2]), (2, 1)) == 0
    heine = spec("multiple-heine", qstd, 0, [0.3])
    assert ds.pmf(heine, (0,)) == pytest.approx(qstd.exp_small(-0.6), rel=1e-14)


def test_table_examples(qstd):
    table = ds.pmf_table(spec("first-kind", qstd, 2, [0.3]))
    expected = [1 / 1.495, 0.45 / 1.495, 0.045 / 1.495]
    assert table.probabilities() == pytest.approx(expected, rel=1e-14)
    assert table.normalization_defect <= 1e-15
    table = ds.pmf_table(spec("second-kind", qstd, 2, [0.4]))
    assert table.probabilities() == pytest.approx([0.48, 0.36, 0.16], rel=1e-14)
    zero = ds.pmf_table(spec("second-kind", qstd, 0, [0.4, 0.2]))
    assert zero.entries == {(0, 0): 1.0}


@pytest.mark.parametrize("kind", sorted(ds.FINITE_KINDS - ds.ABSORPTION_KINDS))
def test_finite_normalization(kind, any_algebra):
    thetas = [0.2, 0.4]
    for k in (1, 2, 3):
        for theta in itertools.product(thetas, repeat=k):
            for n in (0, 1, 5, 8):
                try:
                    s = spec(kind, any_algebra, n, theta)
                except ParameterError:
                    assert kind != "first-kind" and any_algebra.tau2 > any_algebra.tau1
                    continue
                assert ds.pmf_table(s).normalization_defect <= 1e-10


@pytest.mark.parametrize("kind", sorted(ds.ABSORPTION_KINDS))
@pytest.mark.parametrize("name", DECREASING)
def test_absorption_normalization(kind, name):
    alg = preset(name)
    for levels in ([1], [2, 3], [3, 1, 2]):
        for n in (0, 2, 6):
            table = ds.pmf_table(spec(kind, alg, n, absorption=levels, strict_theta=False))
            assert table.normalization_defect <= 1e-12
            assert not table.underflow


def test_absorbing_state_gives_exact_zero(qstd):
    s = spec("absorption-second-kind", qstd, 4, absorption=[2], strict_theta=False)
    # two successes exhaust the level, so at least two failures are certain
    assert ds.pmf(s, (0,)) == 0 and ds.pmf(s, (1,)) == 0
    assert math.copysign(1, ds.pmf(s, (0,))) == 1


def test_absorption_fractional_level_domain(qstd):
    spec("absorption-second-kind", qstd, 2, absorption=[1.5], strict_theta=False)
    with pytest.raises(ParameterError, match="j=1, trial i=3"):
        spec("absorption-second-kind", qstd, 3, absorption=[1.5], strict_theta=False)


def test_second_kind_domain_error_names_trial():
    bm = preset("biedenharn-macfarlane")
    with pytest.raises(ParameterError, match="coordinate j=2, trial i="):
        spec("second-kind", bm, 4, [0.1, 0.4])


def test_theta_validation(qstd):
    with pytest.raises(ParameterError):
        spec("first-kind", qstd, 3, [1.5])
    relaxed = spec("first-kind", qstd, 3, [1.5], strict_theta=False)
    assert ds.pmf_table(relaxed).normalization_defect <= 1e-14
    with pytest.raises(ParameterError):
        spec("first-kind", qstd, 3, [0.0])
    with pytest.raises(ParameterError):
        spec("first-kind", qstd, 3, [])
    with pytest.raises(ParameterError):
        spec("bogus-kind", qstd, 3, [0.2])
    with pytest.raises(ParameterError):
        spec("negative-first-kind", qstd, 0, [0.2])
    with pytest.raises(ParameterError):
        spec("first-kind", qstd, 3, [0.2], absorption=[2])


def test_limit_kinds_need_tau1_above_tau2():
    with pytest.raises(ParameterError):
        spec("multiple-heine", preset("biedenharn-macfarlane"), 0, [0.3])


@pytest.mark.parametrize("kind", ["negative-first-kind", "negative-second-kind", "multiple-heine", "multiple-euler"])
def test_infinite_normalization(kind, decreasing_algebra):
    for theta in ([0.3], [0.2, 0.4]):
        table = ds.pmf_table(spec(kind, decreasing_algebra, 2, theta))
        assert not table.truncated
        assert float(table.total) >= 1 - 1e-12
        assert table.normalization_defect <= 1e-10


def test_failures_kind_is_defective_when_ratio_below_one(qstd):
    with pytest.warns(TruncationWarning):
        table = ds.pmf_table(spec("negative-first-kind-failures", qstd, 3, [0.3]))
    assert table.truncated
    assert table.normalization_defect > 1e-3


@pytest.mark.parametrize("name", ["biedenharn-macfarlane", "quesne"])
def test_failures_kind_normalizes_when_ratio_above_one(name):
    table = ds.pmf_table(spec("negative-first-kind-failures", preset(name), 3, [0.3, 0.2]))
    assert not table.truncated and table.normalization_defect <= 1e-10


def test_cap_marks_truncation(qstd):
    with pytest.warns(TruncationWarning):
        table = ds.pmf_table(spec("negative-second-kind", qstd, 3, [0.6], max_index=4))
    assert table.truncated
    assert max(idx[0] for idx in table.entries) <= 4


def test_overflowing_shells_truncate_instead_of_crashing():
    with pytest.warns(TruncationWarning):
        table = ds.pmf_table(spec("negative-first-kind", preset("quesne"), 3, [0.3, 0.2]))
    assert table.truncated


@pytest.mark.parametrize("kind", ds.KINDS)
def test_p_zero_matches_pmf(kind, decreasing_algebra):
    kw = {"absorption": [2, 3], "strict_theta": False} if kind in ds.ABSORPTION_KINDS else {}
    theta = None if kw else [0.3, 0.2]
    s = spec(kind, decreasing_algebra, 4, theta, **kw)
    assert ds.p_zero(s) == pytest.approx(ds.pmf(s, (0, 0)), rel=1e-13, abs=1e-300)


def test_p_zero_examples(qstd):
    assert ds.p_zero(spec("first-kind", qstd, 2, [0.3])) == pytest.approx(1 / 1.495, rel=1e-15)
    assert ds.p_zero(spec("second-kind", qstd, 2, [0.4])) == pytest.approx(0.48, rel=1e-15)
    assert ds.p_zero(spec("second-kind", qstd, 0, [0.4])) == 1


@pytest.mark.parametrize("kind", ds.KINDS)
def test_conditional_chain(kind, any_algebra):
    kw = {"absorption": [2, 1], "strict_theta": False} if kind in ds.ABSORPTION_KINDS else {}
    theta = None if kw else [0.3, 0.2, 0.25]
    try:
        s = spec(kind, any_algebra, 5, theta, **kw)
    except ParameterError:
        pytest.skip("parameters outside this algebra's domain")
    for idx in iter_indices(s.k, 5):
        mi = MultiIndex(idx)
        chain = math.prod(ds.conditional_pmf(s, j, ds.chain_trials(s, mi, j), idx[j - 1]) for j in range(1, s.k + 1))
        assert ds.pmf(s, mi) == pytest.approx(chain, rel=1e-11, abs=1e-300)


def test_recursion_examples(qstd):
    s = spec("second-kind", qstd, 2, [0.4])
    assert ds.recursion_next(s, (0,), 0.48) == pytest.approx(0.36, rel=1e-14)
    f = spec("first-kind", qstd, 2, [0.3])
    p0 = ds.pmf(f, (0,))
    assert ds.recursion_next(f, (0,), p0) == pytest.approx(0.45 / 1.495, rel=1e-14)
    literal = ds.recursion_next(f, (0,), p0, ds.PAPER_LITERAL)
    assert literal > 0
    with pytest.raises(ParameterError):
        ds.recursion_next(s, (2,), 0.16)


@pytest.mark.parametrize("kind", sorted(ds.FINITE_KINDS | ds.NEGATIVE_KINDS | ds.LIMIT_KINDS))
def test_derived_recursion_follows_pmf(kind, decreasing_algebra):
    kw = {"absorption": [3, 4], "strict_theta": False} if kind in ds.ABSORPTION_KINDS else {}
    theta = None if kw else [0.3, 0.2]
    s = spec(kind, decreasing_algebra, 6, theta, **kw)
    # absorption failures start at x_1 >= n - m_1, where the support begins
    idx, steps = ((3, 0), (2, 1, 2)) if kind == "absorption-second-kind" else ((0, 0), (1, 2, None, 2, 1))
    prob = ds.pmf(s, idx)
    assert prob > 0
    for step in steps:
        nxt = tuple(v + (1 if step in (None, j) else 0) for j, v in enumerate(idx, start=1))
        prob = ds.recursion_next(s, idx, prob, step=step)
        idx = nxt
        assert prob == pytest.approx(ds.pmf(s, idx), rel=1e-10)


def test_recursion_zero_probability_error(qstd):
    s = spec("absorption-second-kind", qstd, 4, absorption=[2], strict_theta=False)
    with pytest.raises(ParameterError):
        ds.recursion_next(s, (1,), 0.0)


def test_literal_recursion_undefined_kinds(qstd):
    s = spec("second-kind-successes", qstd, 3, [0.3])
    with pytest.raises(ParameterError):
        ds.recursion_next(s, (0,), ds.pmf(s, (0,)), ds.PAPER_LITERAL)
    with pytest.raises(ParameterError):
        ds.recursion_next(spec("first-kind", qstd, 3, [0.3, 0.2]), (0, 0), 0.5, ds.PAPER_LITERAL, step=1)


def test_q_literal_ratio_agrees_with_generic_literal(qstd):
    s = spec("second-kind", qstd, 6, [0.3, 0.2])
    p0 = ds.pmf(s, (0, 0))
    generic = ds.recursion_next(s, (0, 0), p0, ds.PAPER_LITERAL)
    assert generic == pytest.approx(p0 * ds.q_standard_literal_ratio(0.5, 6, [0.3, 0.2], (0, 0)), rel=1e-13)


@pytest.mark.parametrize("kind", ds.KINDS)
def test_printed_pmf_equals_corrected_when_tau1_is_one(kind, qstd):
    if kind == "negative-first-kind-failures":
        pytest.skip("printed multivariate form differs from its own univariate case")
    kw = {"absorption": [2, 3], "strict_theta": False} if kind in ds.ABSORPTION_KINDS else {}
    s = spec(kind, qstd, 4, None if kw else [0.3, 0.2], **kw)
    for idx in itertools.product(range(4), repeat=2):
        assert ds.pmf_paper_literal(s, idx) == pytest.approx(ds.pmf(s, idx), rel=1e-12, abs=1e-300)


def test_printed_pmf_differs_on_js(js):
    s = spec("first-kind", js, 4, [0.3, 0.2])
    assert abs(ds.pmf_paper_literal(s, (1, 1)) - ds.pmf(s, (1, 1))) > 1e-3


def test_absorption_closed_form_is_reported_not_equal(js):
    s = spec("absorption-second-kind", js, 4, absorption=[2, 3], strict_theta=False)
    assert ds.absorption_closed_form(s, (2, 1)) != pytest.approx(ds.pmf(s, (2, 1)), rel=1e-6)
    with pytest.raises(ParameterError):
        ds.absorption_closed_form(spec("second-kind", js, 3, [0.3]), (1,))


def test_limit_examples(qstd):
    d5 = ds.limit_distance(qstd, [0.3], 5, "heine")
    d40 = ds.limit_distance(qstd, [0.3], 40, "heine")
    assert d40 <= 1e-3 and d5 > d40
    with pytest.raises(ParameterError):
        ds.limit_distance(qstd, [0.3], 5, "poisson")
    flat = make_preset_algebra("jagannathan-srinivasa", 0.9, 0.5)
    object.__setattr__(flat, "tau2", flat.tau1)
    with pytest.raises(ParameterError):
        ds.limit_distance(flat, [0.3], 5)


def _frequency_check(s, draws):
    table = ds.pmf_table(s)
    m = len(draws)
    counts = {}
    for row in map(tuple, draws):
        counts[row] = counts.get(row, 0) + 1
    assert set(counts) <= set(table.entries)
    for idx, prob in table.entries.items():
        prob = float(prob)
        sigma = math.sqrt(m * prob * (1 - prob))
        assert abs(counts.get(idx, 0) - m * prob) <= 3 * sigma + 1e-9, idx


def test_sampler_first_kind_example(qstd):
    s = spec("first-kind", qstd, 2, [0.3])
    draws = ds.sample(s, 2024, 200_000)
    assert draws.shape == (200_000, 1)
    _frequency_check(s, draws)
    assert np.array_equal(draws, ds.sample(s, 2024, 200_000))


def test_sampler_second_kind_joint(qstd):
    s = spec("second-kind", qstd, 2, [0.4, 0.3])
    _frequency_check(s, ds.sample(s, 7, 200_000))


def test_sampler_negative_kind_runs_backward(js):
    s = spec("negative-second-kind", js, 2, [0.3, 0.2])
    draws = ds.sample(s, 3, 50_000)
    for idx in [(0, 0), (1, 0), (0, 1), (1, 1)]:
        freq = np.mean(np.all(draws == idx, axis=1))
        assert freq == pytest.approx(float(ds.pmf(s, idx)), abs=5 * math.sqrt(0.25 / 50_000))


def test_sampler_refuses_defective_law(qstd):
    s = spec("negative-first-kind-failures", qstd, 3, [0.3])
    with pytest.raises(ParameterError):
        ds.sample(s, 1, 10)
    with pytest.raises(ParameterError):
        ds.sample(spec("first-kind", qstd, 3, [0.3]), 1, 0)


def test_extended_precision_table():
    alg = make_preset_algebra("jagannathan-srinivasa", 0.9, 0.5, precision="extended")
    table = ds.pmf_table(spec("second-kind", alg, 6, [0.3, 0.2]))
    assert table.normalization_defect <= 1e-45


def test_pmf_index_width_checked(qstd):
    with pytest.raises(ParameterError):
        ds.pmf(spec("first-kind", qstd, 3, [0.3]), (1, 1))


def test_tables_are_deterministic(js):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        a = ds.pmf_table(spec("multiple-euler", js, 0, [0.3, 0.2]))
        b = ds.pmf_table(spec("multiple-euler", js, 0, [0.3, 0.2]))
    assert a == b and list(a.entries) == sorted(a.entries)


def test_all_presets_listed():
    assert set(PRESET_PARAMS) == set(make_preset_algebra.__globals__["PRESETS"])
