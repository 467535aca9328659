"""Command-line front end.

Exit codes: 0 on success, 1 when a verification suite has a failing
pass-class check, 2 on invalid input or a domain error.
"""

from __future__ import annotations

import argparse
import contextlib
import io
import json
import sys
import warnings
from pathlib import Path

from . import distributions as ds
from . import verification as vf
from ._numeric import PRECISION_ENV_VAR, get_arithmetic
from .algebra import PRESETS, make_preset_algebra
from .combinatorics import CORRECTED, MODES, RECURRENCE_VARIANTS, as_index, multinomial, recurrence_rhs
from .exceptions import DeformationError, ParameterError, TruncationWarning

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_INVALID = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Raise instead of exiting so that ``main`` owns the exit code."""

    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}")


# -- formatting ----------------------------------------------------------------------


def format_probability(value, arithmetic) -> str:
    """Shortest decimal that reads back to the same binary64 value.

    Extended-precision values keep all their digits.
    """
    if arithmetic.extended:
        return arithmetic.format(value, arithmetic.ctx.dps)
    return repr(float(value))


def table_to_csv(table: ds.PmfTable) -> str:
    spec = table.spec
    ar = spec.algebra.arithmetic
    out = io.StringIO()
    out.write(",".join([*(f"r_{j}" for j in range(1, spec.k + 1)), "probability"]) + "\n")
    for idx, prob in table.entries.items():
        out.write(",".join([*(str(v) for v in idx), format_probability(prob, ar)]) + "\n")
    out.write(f"# normalization_defect={table.normalization_defect!r} truncated={str(table.truncated).lower()}\n")
    return out.getvalue()


def table_meta(table: ds.PmfTable) -> dict:
    spec = table.spec
    alg = spec.algebra
    return {
        "algebra": alg.name,
        "p": float(alg.p),
        "q": float(alg.q),
        "theta": [float(t) for t in spec.theta],
        "absorption": None if spec.absorption is None else [float(m) for m in spec.absorption],
        "n": spec.n,
        "k": spec.k,
        "kind": spec.kind,
        "precision": alg.precision,
        "eps_tail": spec.truncation.eps_tail,
        "max_index": spec.truncation.max_index,
        "normalization_defect": table.normalization_defect,
        "truncated": table.truncated,
        "underflow": table.underflow,
    }


def table_to_json(table: ds.PmfTable) -> str:
    ar = table.spec.algebra.arithmetic
    if ar.extended:
        entries = [[list(idx), format_probability(p, ar)] for idx, p in table.entries.items()]
    else:
        entries = [[list(idx), float(p)] for idx, p in table.entries.items()]
    return json.dumps({"meta": table_meta(table), "entries": entries}, indent=1) + "\n"


def read_table_json(source) -> ds.PmfTable:
    """Rebuild a table written by :func:`table_to_json` from text or a path."""
    if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith("{")):
        source = Path(source).read_text()
    try:
        data = json.loads(source)
        meta = data["meta"]
        extended = meta.get("precision") == "extended"
        ar = get_arithmetic("extended" if extended else "standard")
        entries = {tuple(idx): (ar.convert(p) if extended else float(p)) for idx, p in data["entries"]}
    except (KeyError, TypeError, ValueError) as exc:
        raise ParameterError(f"not a table document: {exc}") from None
    return ds.PmfTable(None, entries, meta["normalization_defect"], meta["truncated"], meta.get("underflow", False), meta)


def samples_to_csv(draws) -> str:
    k = draws.shape[1]
    lines = [",".join(f"r_{j}" for j in range(1, k + 1))]
    lines.extend(",".join(str(int(v)) for v in row) for row in draws)
    return "\n".join(lines) + "\n"


def samples_to_json(draws, meta: dict) -> str:
    return json.dumps({"meta": meta, "draws": draws.tolist()}) + "\n"


# -- argument handling ---------------------------------------------------------------


def _floats(text: str, what: str) -> list:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ParameterError(f"--{what} must be a comma-separated list of numbers, got {text!r}") from None
    if not values:
        raise ParameterError(f"--{what} is empty")
    return values


def _ints(text: str, what: str) -> list:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ParameterError(f"--{what} must be a comma-separated list of integers, got {text!r}") from None
    if not values:
        raise ParameterError(f"--{what} is empty")
    return values


def _algebra(args):
    return make_preset_algebra(args.algebra, args.p, args.q, precision=args.precision)


def _spec(args) -> ds.DistributionSpec:
    alg = _algebra(args)
    theta = absorption = None
    if args.kind in ds.ABSORPTION_KINDS:
        if args.absorption is None:
            raise ParameterError(f"--absorption is required for {args.kind}")
        absorption = _floats(args.absorption, "absorption")
        width = len(absorption)
    else:
        if args.theta is None:
            raise ParameterError(f"--theta is required for {args.kind}")
        theta = _floats(args.theta, "theta")
        width = len(theta)
    k = args.k if args.k is not None else width
    if width == 1 and k > 1:
        theta = None if theta is None else theta * k
        absorption = None if absorption is None else absorption * k
    elif width != k:
        raise ParameterError(f"--k={k} but {width} parameter values were given")
    return ds.make_spec(
        args.kind, alg, args.n, theta, absorption=absorption,
        eps_tail=args.eps_tail, max_index=args.max_index, strict_theta=not args.relax_theta,
    )


def _write(text: str, out):
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text)
    except OSError as exc:
        raise ParameterError(f"cannot write {out}: {exc}") from None


def _add_algebra(parser):
    parser.add_argument("--algebra", required=True, choices=PRESETS)
    parser.add_argument("--p", type=float)
    parser.add_argument("--q", type=float)
    parser.add_argument("--precision", choices=("standard", "extended"), help=f"default from ${PRECISION_ENV_VAR}")


def _add_distribution(parser):
    _add_algebra(parser)
    parser.add_argument("--kind", required=True, choices=ds.KINDS)
    parser.add_argument("--n", type=int, required=True)
    parser.add_argument("--k", type=int)
    parser.add_argument("--theta", help="comma list; one value is repeated k times")
    parser.add_argument("--absorption", help="absorption levels m_j for the absorption kinds")
    parser.add_argument("--relax-theta", action="store_true", help="allow theta >= 1 where the trials stay valid")
    parser.add_argument("--eps-tail", type=float, default=ds.DEFAULT_EPS_TAIL)
    parser.add_argument("--max-index", type=int, default=ds.DEFAULT_MAX_INDEX)
    parser.add_argument("--out")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="deformed-multinomial", description="Deformed multinomial coefficients and distributions.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    coeff = sub.add_parser("coeff", help="multinomial coefficient [x; r]")
    _add_algebra(coeff)
    coeff.add_argument("--x", type=int, required=True)
    coeff.add_argument("--r", required=True, help="comma list r_1,...,r_k")
    coeff.add_argument("--variant", choices=RECURRENCE_VARIANTS, help="evaluate through one recurrence step instead")
    coeff.add_argument("--mode", choices=MODES, default=CORRECTED)

    table = sub.add_parser("table", help="probability table")
    _add_distribution(table)
    table.add_argument("--format", choices=("csv", "json"), default="csv")

    sample = sub.add_parser("sample", help="seeded draws")
    _add_distribution(sample)
    sample.add_argument("--seed", type=int, required=True)
    sample.add_argument("--m", type=int, default=1000, help="number of draws")
    sample.add_argument("--format", choices=("csv", "json"), default="csv")

    verify = sub.add_parser("verify", help="run an identity suite")
    verify.add_argument("--suite", default="default", help="bundled suite name or JSON path")
    verify.add_argument("--precision", choices=("standard", "extended"))
    verify.add_argument("--out")

    limits = sub.add_parser("limits", help="distance to the Heine or Euler limit")
    _add_algebra(limits)
    limits.add_argument("--theta", required=True)
    limits.add_argument("--family", choices=("heine", "euler"), default="heine")
    limits.add_argument("--n", default="5,10,20,40", help="comma list of trial counts")
    limits.add_argument("--out")
    return parser


# -- commands ------------------------------------------------------------------------


def _cmd_coeff(args) -> int:
    alg = _algebra(args)
    r = as_index(_ints(args.r, "r"))
    if args.variant:
        value = recurrence_rhs(alg, args.x, r, args.variant, args.mode)
    else:
        value = multinomial(alg, args.x, r)
    print(format_probability(value, alg.arithmetic))
    return EXIT_OK


def _cmd_table(args) -> int:
    spec = _spec(args)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", TruncationWarning)
        table = ds.pmf_table(spec)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    _write(table_to_csv(table) if args.format == "csv" else table_to_json(table), args.out)
    return EXIT_OK


def _cmd_sample(args) -> int:
    spec = _spec(args)
    draws = ds.sample(spec, args.seed, args.m)
    if args.format == "csv":
        text = samples_to_csv(draws)
    else:
        meta = {"kind": spec.kind, "algebra": spec.algebra.name, "p": float(spec.algebra.p),
                "q": float(spec.algebra.q), "n": spec.n, "seed": args.seed, "m": args.m}
        text = samples_to_json(draws, meta)
    _write(text, args.out)
    return EXIT_OK


def _cmd_verify(args) -> int:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        reports = vf.run_suite(args.suite, precision=args.precision)
    _write(vf.reports_to_jsonl(reports), args.out)
    failed = [r for r in reports if r.verdict == vf.FAIL]
    for r in failed:
        print(f"FAIL {r.identity} {r.preset}: rel={r.max_rel_residual:.3e} {r.message}", file=sys.stderr)
    return EXIT_OK if not failed else EXIT_VERIFY_FAILED


def _cmd_limits(args) -> int:
    alg = _algebra(args)
    theta = _floats(args.theta, "theta")
    lines = ["n,distance"]
    for n in _ints(args.n, "n"):
        lines.append(f"{n},{ds.limit_distance(alg, theta, n, args.family)!r}")
    _write("\n".join(lines) + "\n", args.out)
    return EXIT_OK


_COMMANDS = {
    "coeff": _cmd_coeff,
    "table": _cmd_table,
    "sample": _cmd_sample,
    "verify": _cmd_verify,
    "limits": _cmd_limits,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        with contextlib.redirect_stdout(sys.stderr):
            args = parser.parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except DeformationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
