"""Acceptance criteria, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v`` or directly as a script.
Tolerances are pinned here rather than read from the check registry so that a
change to a registry default cannot silently loosen acceptance.
"""

import itertools
import json
import math
import sys
import time
import warnings
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from deformed_multinomial import cli
from deformed_multinomial import combinatorics as cb
from deformed_multinomial import distributions as ds
from deformed_multinomial import verification as vf
from deformed_multinomial.algebra import invert_parameters, make_preset_algebra
from deformed_multinomial.exceptions import ParameterError, TruncationWarning

P_GRID = (0.9,)
Q_GRID = (0.3, 0.5, 0.7)
THETA_GRID = (0.2, 0.3, 0.4)
LEVEL_GRID = (2, 3)


def grid_algebras(precision=None):
    """Every preset on the parameter grid; presets without p ignore it."""
    for name in ("q-standard", "biedenharn-macfarlane"):
        for q in Q_GRID:
            yield make_preset_algebra(name, q=q, precision=precision)
    for name in ("jagannathan-srinivasa", "chakrabarty-jagannathan", "quesne"):
        for p, q in itertools.product(P_GRID, Q_GRID):
            if name != "quesne" or p != q:
                yield make_preset_algebra(name, p, q, precision=precision)


def rel(a, b, scale=None):
    a, b = float(a), float(b)
    denom = max(abs(b), abs(float(scale)) if scale is not None else 0.0, 1e-300)
    return abs(a - b) / denom


def tag(alg):
    return f"{alg.name}(p={float(alg.p)},q={float(alg.q)})"


# -- criteria ------------------------------------------------------------------------


def criterion_1():
    worst, where, tables, skipped = 0.0, None, 0, 0
    for alg in grid_algebras():
        for kind in sorted(ds.FINITE_KINDS):
            for k in (1, 2, 3):
                params = itertools.product(LEVEL_GRID if kind in ds.ABSORPTION_KINDS else THETA_GRID, repeat=k)
                for values, n in itertools.product(list(params), range(9)):
                    try:
                        if kind in ds.ABSORPTION_KINDS:
                            spec = ds.make_spec(kind, alg, n, absorption=values, strict_theta=False)
                        else:
                            spec = ds.make_spec(kind, alg, n, values)
                    except ParameterError:
                        skipped += 1
                        continue
                    defect = abs(math.fsum(float(v) for v in ds.pmf_table(spec).entries.values()) - 1)
                    tables += 1
                    if defect > worst:
                        worst, where = defect, (kind, tag(alg), n, values)
    return worst <= 1e-10, f"max |sum-1|={worst:.2e} over {tables} tables ({skipped} outside domain) at {where}"


def criterion_2():
    worst = {"product": 0.0, "recurrence": 0.0, "inversion": 0.0}
    for alg in grid_algebras():
        inv = invert_parameters(alg)
        for k in (1, 2, 3):
            for x in range(11):
                for idx in cb.iter_indices(k, x):
                    direct = cb.multinomial(alg, x, idx)
                    worst["product"] = max(worst["product"], rel(cb.multinomial_product_form(alg, x, idx), direct))
                    if x >= 1:
                        for v in cb.RECURRENCE_VARIANTS:
                            worst["recurrence"] = max(worst["recurrence"], rel(cb.recurrence_rhs(alg, x, idx, v), direct))
                    target = cb.multinomial(inv, x, idx)
                    for conv in cb.INVERSE_CONVENTIONS:
                        got = cb.multinomial_inverse_params(alg, x, idx, conv)
                        worst["inversion"] = max(worst["inversion"], rel(got, target))
    ok = all(v <= 1e-11 for v in worst.values())
    return ok, "max rel " + ", ".join(f"{k}={v:.2e}" for k, v in worst.items())


def criterion_3():
    xs_grid = (0.2, 0.45, 0.7)
    worst = {"expansion": 0.0, "alternative": 0.0, "negative": 0.0, "corollary": 0.0}
    for alg in grid_algebras():
        for k in (1, 2, 3):
            for xs in itertools.product(xs_grid, repeat=k):
                for n in range(7):
                    lhs, scale = cb.multinomial_theorem_sum(alg, xs, n, with_scale=True)
                    worst["expansion"] = max(worst["expansion"], rel(lhs, cb.product_side(alg, xs, n), scale))
                    for form in (1, 2):
                        ev = cb.corollary_sum(alg, xs, n, form=form)
                        worst["corollary"] = max(worst["corollary"], rel(ev.lhs, ev.rhs, ev.scale))
            for xs in itertools.product(xs_grid, repeat=k + 1):
                for n in range(7):
                    lhs, scale = cb.alternative_multinomial_sum(alg, xs, n, with_scale=True)
                    worst["alternative"] = max(worst["alternative"], rel(lhs, cb.alternative_product_side(alg, xs, n), scale))
        if alg.tau2 < alg.tau1:
            for k in (1, 2):
                for xs in itertools.product(xs_grid, repeat=k):
                    for n in range(1, 5):
                        lhs = cb.negative_multinomial_theorem_sum(alg, xs, n, 60)
                        worst["negative"] = max(worst["negative"], rel(lhs, cb.product_side(alg, xs, n)))
    limits = {"expansion": 1e-10, "alternative": 1e-10, "negative": 1e-8, "corollary": 1e-11}
    ok = all(worst[key] <= limits[key] for key in worst)
    return ok, "scaled rel " + ", ".join(f"{k}={v:.2e}" for k, v in worst.items())


def criterion_4():
    enum = dp = chain = 0.0
    for alg in grid_algebras():
        for theta in THETA_GRID:
            for n in range(13):
                spec = ds.make_spec("first-kind", alg, n, [theta])
                for y, prob in vf.enumerate_first_kind_exact(alg, theta, n).items():
                    enum = max(enum, abs(float(ds.pmf(spec, (y,))) - prob))
                if alg.tau2 < alg.tau1:
                    spec = ds.make_spec("second-kind", alg, n, [theta])
                    for x, prob in vf.enumerate_second_kind_exact(alg, theta, n).items():
                        dp = max(dp, abs(float(ds.pmf(spec, (x,))) - prob))
        kinds = ["first-kind"] + (["second-kind"] if alg.tau2 < alg.tau1 else [])
        for kind in kinds:
            for k in (2, 3):
                for theta in itertools.product((0.2, 0.4), repeat=k):
                    report = vf.conditional_decomposition_check(ds.make_spec(kind, alg, 6, theta))
                    chain = max(chain, report.max_rel_residual)
    ok = enum <= 1e-12 and dp <= 1e-12 and chain <= 1e-11
    return ok, f"enumeration={enum:.2e}, dp={dp:.2e}, chain rel={chain:.2e}"


def criterion_5():
    alg = make_preset_algebra("q-standard", q=0.5)
    ns = (5, 10, 20, 40)
    parts, ok = [], True
    for family in ("heine", "euler"):
        d = [ds.limit_distance(alg, 0.3, n, family) for n in ns]
        decreasing = all(b < a for a, b in zip(d, d[1:]))
        ok &= d[-1] <= 1e-3 and decreasing
        parts.append(f"{family} " + "/".join(f"{v:.1e}" for v in d))
    duality = 0.0
    for alg in grid_algebras():
        for z in np.linspace(-0.8, 0.8, 33):
            duality = max(duality, abs(float(alg.exp_small(z) * alg.exp_big(-z)) - 1))
    ok &= duality <= 1e-9
    return ok, "; ".join(parts) + f"; duality={duality:.2e}"


def criterion_6():
    worst = 0.0
    for q in Q_GRID:
        alg = make_preset_algebra("q-standard", q=q)
        for k in (1, 2, 3):
            for n in range(11):
                for idx in cb.iter_indices(k, n):
                    worst = max(worst, rel(cb.multinomial(alg, n, idx), vf.gaussian_multinomial(q, n, idx)))
    classical = max(
        vf.classical_limit_check(kind, 4, 2, [0.3, 0.2], 0.999, 0.998).max_abs_residual
        for kind in ("first-kind", "second-kind")
    )
    ok = worst <= 1e-13 and classical <= vf.CLASSICAL_LIMIT_TOLERANCE
    return ok, f"gaussian rel={worst:.2e}, classical={classical:.2e} (frozen tol {vf.CLASSICAL_LIMIT_TOLERANCE})"


def criterion_7():
    m = 200_000
    worst_sigma, notes = 0.0, []
    cases = [
        ds.make_spec("first-kind", make_preset_algebra("jagannathan-srinivasa", 0.9, 0.5), 5, [0.3, 0.2]),
        ds.make_spec("second-kind", make_preset_algebra("q-standard", q=0.5), 6, [0.4, 0.3]),
        ds.make_spec("negative-first-kind", make_preset_algebra("q-standard", q=0.5), 2, [0.3]),
    ]
    ok = True
    for spec in cases:
        table = ds.pmf_table(spec)
        draws = ds.sample(spec, 20261017, m)
        again = ds.sample(spec, 20261017, m)
        ok &= np.array_equal(draws, again)
        counts = {}
        for row in map(tuple, draws.tolist()):
            counts[row] = counts.get(row, 0) + 1
        for idx, prob in table.entries.items():
            prob = float(prob)
            sigma = math.sqrt(m * prob * (1 - prob))
            if sigma == 0:
                continue
            z = abs(counts.get(idx, 0) - m * prob) / sigma
            worst_sigma = max(worst_sigma, z)
        outside = sum(c for idx, c in counts.items() if idx not in table.entries)
        ok &= outside <= 3 * math.sqrt(m * max(table.normalization_defect, 1e-300)) + 3
        notes.append(spec.kind)
    ok &= worst_sigma <= 3
    return ok, f"max |count-mp|/sigma={worst_sigma:.2f} over {', '.join(notes)}; reseeded draws identical"


def criterion_8(tmp_dir):
    start = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        first = vf.reports_to_jsonl(vf.run_suite("default"))
        second = vf.reports_to_jsonl(vf.run_suite("default"))
    suite_seconds = time.perf_counter() - start
    identical = first == second
    passed = all(json.loads(line)["verdict"] != vf.FAIL for line in first.splitlines())
    path = Path(tmp_dir) / "table.json"
    alg = make_preset_algebra("jagannathan-srinivasa", 0.9, 0.5)
    spec = ds.make_spec("second-kind", alg, 6, [0.3, 0.2, 0.1])
    path.write_text(cli.table_to_json(ds.pmf_table(spec)))
    round_trip = cli.read_table_json(path) == ds.pmf_table(spec)
    ok = identical and passed and round_trip
    return ok, (f"suite bit-identical={identical}, all pass-class checks pass={passed}, "
                f"json round-trip exact={round_trip}, two suite runs {suite_seconds:.1f}s")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7]
_START = time.perf_counter()


def _line(number, ok, detail):
    return f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"


@pytest.mark.parametrize("number", range(1, 8))
def test_criterion(number, capsys):
    ok, detail = CRITERIA[number - 1]()
    with capsys.disabled():
        print("\n" + _line(number, ok, detail))
    assert ok, detail


def test_criterion_8(capsys, tmp_path):
    ok, detail = criterion_8(tmp_path)
    elapsed = time.perf_counter() - _START
    ok = ok and elapsed <= 300
    detail += f", acceptance elapsed {elapsed:.0f}s (limit 300s)"
    with capsys.disabled():
        print("\n" + _line(8, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    import tempfile

    results = []
    for number, fn in enumerate(CRITERIA, start=1):
        ok, detail = fn()
        results.append(ok)
        print(_line(number, ok, detail), flush=True)
    with tempfile.TemporaryDirectory() as tmp:
        ok, detail = criterion_8(tmp)
    ok = ok and time.perf_counter() - _START <= 300
    results.append(ok)
    print(_line(8, ok, detail + f", total {time.perf_counter() - _START:.0f}s"))
    sys.exit(0 if all(results) else 1)
