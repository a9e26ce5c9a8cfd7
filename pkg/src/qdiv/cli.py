"""Command-line interface: ``qdiv {verify,limits,cumulants,simulate,tables}``.

Exit codes: 0 success, 1 a verification failed, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from typing import Sequence

from qdiv.combinatorics import bernoulli, eulerian_poly
from qdiv.dag_model import limit_cumulants, pmf_exact
from qdiv.errors import ConfigError, QDivError
from qdiv.identities import K, RecurrenceSpec, default_jobs, limit_series, run_suite
from qdiv.series import Polynomial, qs_to_json, rational_str
from qdiv.simulation import METHODS, SimConfig, simulate

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _nonneg_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {value}")
    return value


def _pos_int(text: str) -> int:
    value = _nonneg_int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return value


def _csv_text(rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def _emit(text: str) -> None:
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def parse_f(text: str) -> RecurrenceSpec:
    """``const1``, ``fk:<k>``, ``dilcher:<k>`` or a list ``c0,c1,...`` of rationals."""
    text = text.strip()
    if text == "const1":
        return RecurrenceSpec.constant_one()
    if text.startswith("fk:"):
        return RecurrenceSpec.power_difference(int(text[3:]))
    if text.startswith("dilcher:"):
        return RecurrenceSpec.dilcher(int(text[8:]))
    coeffs = [Fraction(part.strip()) for part in text.split(",")]
    return RecurrenceSpec(Polynomial(coeffs), f"f(n) = {Polynomial(coeffs)}".replace("x", "n"))


def parse_params(text: str | None) -> dict[str, int]:
    out: dict[str, int] = {}
    if not text:
        return out
    for item in text.split(","):
        key, sep, value = item.partition("=")
        if not sep:
            raise ValueError(f"parameter {item!r} is not key=value")
        out[key.strip()] = int(value)
    return out


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def cmd_verify(args: argparse.Namespace) -> int:
    reports = run_suite(args.order, args.kmax, args.mmax, args.tmax, jobs=args.jobs)
    ok = all(r.passed for r in reports)
    if args.format == "json":
        _emit(_dump({"order": args.order, "verdict": "pass" if ok else "fail",
                     "reports": [r.to_json() for r in reports]}))
    elif args.format == "csv":
        rows = [["identity_id", "params", "order", "verdict", "exponent", "lhs", "rhs"]]
        for r in reports:
            mm = r.first_mismatch.to_json() if r.first_mismatch else None
            rows.append([r.identity_id, json.dumps(r.params, sort_keys=True), r.order, r.verdict,
                         "" if mm is None else json.dumps(mm["exponent"]),
                         "" if mm is None else mm["lhs"], "" if mm is None else mm["rhs"]])
        _emit(_csv_text(rows))
    else:
        lines = []
        for r in reports:
            line = f"{r.verdict.upper():4s}  {r.key}  order={r.order}"
            if r.first_mismatch:
                mm = r.first_mismatch.to_json()
                line += f"  first mismatch at {mm['exponent']}: {mm['lhs']} != {mm['rhs']}"
            lines.append(line)
        passed = sum(r.passed for r in reports)
        lines.append(f"{passed}/{len(reports)} checks passed")
        _emit("\n".join(lines))
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# limits
# ---------------------------------------------------------------------------


def cmd_limits(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    try:
        spec = parse_f(args.f)
    except (ValueError, ZeroDivisionError, QDivError) as exc:
        parser.error(f"malformed --f {args.f!r}: {exc}")
    series = limit_series(spec, args.order)
    if args.format == "json":
        _emit(_dump({"f": spec.description, "f_coeffs": spec.f.to_json(), "limit": qs_to_json(series)}))
    elif args.format == "csv":
        _emit(_csv_text([["exponent", "coefficient"]] + [[m, rational_str(c)] for m, c in enumerate(series)]))
    else:
        _emit(f"{spec.description}\nlimit = {series}\ncoefficients: "
              + ", ".join(rational_str(c) for c in series.coeffs[1:]))
    return EXIT_OK


# ---------------------------------------------------------------------------
# cumulants
# ---------------------------------------------------------------------------


def cmd_cumulants(args: argparse.Namespace) -> int:
    limits = limit_cumulants(args.tmax, args.order)
    rows = []
    for t, lim in enumerate(limits, start=1):
        k = K(t, args.order)
        rows.append({
            "t": t,
            "limit_kappa_Z": qs_to_json(lim),
            "K": qs_to_json(k),
            "verdict": "pass" if lim == k else "fail",
            # kappa_t(X_n) -> (-1)^t K_t for t >= 2; kappa_1(X_n) ~ n - K_1
            "sign_X": (-1) ** t if t >= 2 else None,
        })
    ok = all(r["verdict"] == "pass" for r in rows)
    if args.format == "json":
        _emit(_dump({"order": args.order, "tmax": args.tmax, "verdict": "pass" if ok else "fail", "rows": rows}))
    elif args.format == "csv":
        out = [["t", "exponent", "limit_kappa_Z", "K", "verdict", "sign_X"]]
        for r in rows:
            for m, (a, b) in enumerate(zip(r["limit_kappa_Z"]["coeffs"], r["K"]["coeffs"])):
                out.append([r["t"], m, a, b, r["verdict"], "" if r["sign_X"] is None else r["sign_X"]])
        _emit(_csv_text(out))
    else:
        lines = []
        for r, lim in zip(rows, limits):
            t = r["t"]
            mapping = "n - kappa_1(X_n)" if t == 1 else f"{'+' if t % 2 == 0 else '-'}kappa_{t}(X_n)"
            lines.append(f"t={t} {r['verdict'].upper()}  lim {mapping} = {lim}")
        _emit("\n".join(lines))
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def cmd_simulate(args: argparse.Namespace) -> int:
    try:
        config = SimConfig(n=args.n, p=args.p, samples=args.samples, seed=args.seed,
                           method=args.method, bootstrap=args.bootstrap, ci_level=args.ci_level,
                           limit_order=args.limit_order)
    except ConfigError as exc:
        sys.stderr.write(f"qdiv simulate: {exc}\n")
        return EXIT_USAGE
    report = simulate(config, workers=args.jobs)
    if args.format == "json":
        _emit(report.to_json())
    elif args.format == "csv":
        _emit(report.to_csv())
    else:
        d = report.to_dict()
        lines = [f"n={config.n} p={config.p} samples={config.samples} seed={config.seed} method={config.method}"]
        c = d["cumulants"]
        for t in range(len(c["estimate"])):
            lines.append(
                f"kappa_{t + 1}: {c['estimate'][t]:.12g}  CI [{c['ci_low'][t]:.12g}, {c['ci_high'][t]:.12g}]"
                f"  exact {c['exact'][t]:.12g}  limit {c['limit'][t]:.12g}"
            )
        _emit("\n".join(lines))
    return EXIT_OK


# ---------------------------------------------------------------------------
# tables
# ---------------------------------------------------------------------------


def cmd_tables(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    try:
        params = parse_params(args.params)
    except ValueError as exc:
        parser.error(str(exc))
    what = args.what
    if what == "bernoulli":
        jmax = params.get("jmax", 10)
        rows = [[j, rational_str(bernoulli(j))] for j in range(jmax + 1)]
        header = ["j", "B_j"]
        payload = {"bernoulli": [r[1] for r in rows]}
    elif what == "eulerian":
        kmax = params.get("kmax", 5)
        polys = [eulerian_poly(k).to_json() for k in range(kmax + 1)]
        rows = [[k, " ".join(c)] for k, c in enumerate(polys)]
        header = ["k", "coefficients"]
        payload = {"eulerian": polys}
    elif what == "K":
        m, order = params.get("m", 1), params.get("order", 10)
        if m < 1:
            parser.error("K needs m >= 1")
        series = K(m, order)
        rows = [[e, rational_str(c)] for e, c in enumerate(series)]
        header = ["exponent", "coefficient"]
        payload = {"m": m, "K": qs_to_json(series)}
    else:  # pmf
        n = params.get("n", 3)
        if n < 1:
            parser.error("pmf needs n >= 1")
        polys = [p.to_json() for p in pmf_exact(n).probs]
        rows = [[h, " ".join(c)] for h, c in enumerate(polys, start=1)]
        header = ["h", "coefficients"]
        payload = {"n": n, "pmf": polys}
    if args.format == "json":
        _emit(_dump(payload))
    elif args.format == "csv":
        _emit(_csv_text([header] + rows))
    else:
        _emit("\n".join(f"{a}: {b}" for a, b in rows))
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qdiv", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    fmt = dict(choices=("json", "csv", "text"), default="text")

    p = sub.add_parser("verify", help="run the identity verification suite")
    p.add_argument("--order", type=_nonneg_int, default=50)
    p.add_argument("--kmax", type=_nonneg_int, default=4)
    p.add_argument("--mmax", type=_nonneg_int, default=4)
    p.add_argument("--tmax", type=_nonneg_int, default=4)
    p.add_argument("--jobs", type=_pos_int, default=None)
    p.add_argument("--format", **fmt)

    p = sub.add_parser("limits", help="limit of sum f(i) - a_n(q)")
    p.add_argument("--f", required=True, help="const1 | fk:<k> | dilcher:<k> | c0,c1,...")
    p.add_argument("--order", type=_nonneg_int, default=20)
    p.add_argument("--format", **fmt)

    p = sub.add_parser("cumulants", help="limiting cumulants against K_t")
    p.add_argument("--tmax", type=_pos_int, default=5)
    p.add_argument("--order", type=_nonneg_int, default=30)
    p.add_argument("--format", **fmt)

    p = sub.add_parser("simulate", help="Monte Carlo for the reachable-set size")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--samples", type=int, default=100000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--method", choices=METHODS, default="pure-birth")
    p.add_argument("--bootstrap", type=int, default=1000)
    p.add_argument("--ci-level", type=float, default=0.99)
    p.add_argument("--limit-order", type=int, default=60)
    p.add_argument("--jobs", type=_pos_int, default=None)
    p.add_argument("--format", **fmt)

    p = sub.add_parser("tables", help="dump exact tables")
    p.add_argument("--what", choices=("K", "eulerian", "bernoulli", "pmf"), required=True)
    p.add_argument("--params", default=None, help="comma-separated key=value, e.g. jmax=6")
    p.add_argument("--format", **fmt)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "jobs", "absent") is None:
        args.jobs = default_jobs()
    if args.command == "verify":
        return cmd_verify(args)
    if args.command == "limits":
        return cmd_limits(args, parser)
    if args.command == "cumulants":
        return cmd_cumulants(args)
    if args.command == "simulate":
        return cmd_simulate(args)
    return cmd_tables(args, parser)


if __name__ == "__main__":
    sys.exit(main())
