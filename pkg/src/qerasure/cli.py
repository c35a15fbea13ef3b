"""Command-line front end.

Exit codes: 0 success, 2 invalid or conflicting flags, 3 size guard
violated, 4 Monte Carlo disagrees with the exact mean (|z| > 3), 5 output
path not writable.  Data goes to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from datetime import datetime, timezone

from . import __version__, analytics, experiments
from .errors import GuardError

SCHEMA_VERSION = "1"
DEFAULT_SEED = 20151
EXIT_USAGE = 2
EXIT_GUARD = 3
EXIT_MISMATCH = 4
EXIT_UNWRITABLE = 5


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _nonneg_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return value


def _seed(text: str) -> int:
    value = _nonneg_int(text)
    if value >= 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return value


def _coverages(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad coverage list {text!r}") from None
    if not values or any(not 0.0 < v < 100.0 for v in values):
        raise argparse.ArgumentTypeError("coverages must lie strictly between 0 and 100")
    return values


def _json_value(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def make_record(command: str, inputs: dict, rows: list[dict], seed: int | None = None) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "inputs": inputs,
        "rows": [{k: _json_value(v) for k, v in row.items()} for row in rows],
        "metadata": {
            "seed": seed,
            "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
            "version": __version__,
        },
    }


def rows_to_csv(rows: list[dict]) -> str:
    """RFC 4180 style table: header row, quoted strings, bare numbers, ``\\n`` line ends."""
    columns: list[str] = []
    for row in rows:
        columns.extend(k for k in row if k not in columns)
    buf = io.StringIO()
    writer = csv.writer(buf, quoting=csv.QUOTE_NONNUMERIC, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_csv_value(row.get(c)) for c in columns])
    return buf.getvalue()


def _csv_value(v):
    if isinstance(v, bool):
        return str(v).lower()
    return v


def _parse_field(text: str):
    if text == "":
        return None
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return {"true": True, "false": False}.get(text, text)


def parse_csv(text: str) -> list[dict]:
    """Inverse of :func:`rows_to_csv` (missing values come back as ``None``)."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    return [dict(zip(header, map(_parse_field, fields))) for fields in reader]


def _emit(record: dict, fmt: str, out=None) -> None:
    out = out or sys.stdout
    if fmt == "csv":
        out.write(rows_to_csv(record["rows"]))
    else:
        json.dump(record, out, sort_keys=False)
        out.write("\n")


def cmd_mean(args, parser) -> int:
    by_dims = args.A is not None or args.K is not None
    by_qubits = args.qubits is not None or args.accessible is not None
    if by_dims and by_qubits:
        parser.error("use either --A/--K or --qubits/--accessible, not both")
    if by_dims:
        if args.A is None or args.K is None:
            parser.error("--A and --K must be given together")
        A, K = args.A, args.K
        result = analytics.mean_coherence(A, K)
        inputs = {"A": A, "K": K}
        row = {"A": A, "K": K}
    elif by_qubits:
        if args.qubits is None or args.accessible is None:
            parser.error("--qubits and --accessible must be given together")
        n, a = args.qubits, args.accessible
        if a > n:
            parser.error(f"--accessible ({a}) cannot exceed --qubits ({n})")
        A, K = 2**a, 2 ** (n - a)
        result = analytics.qubit_partition_mean(n, a)
        inputs = {"qubits": n, "accessible": a}
        row = {"n": n, "a": a, "A": A, "K": K}
    else:
        parser.error("give --A/--K or --qubits/--accessible")
    row.update(value=result.value, method=result.method, terms_summed=result.terms_summed)
    if A in analytics.HIGH_K_COEFFICIENTS:
        row["asymptote"] = analytics.high_K_asymptote(A, K)
    if result.note:
        row["note"] = result.note
    _emit(make_record("mean", inputs, [row]), args.format)
    return 0


def cmd_sample(args, parser) -> int:
    config = experiments.ExperimentConfig(args.A, args.K, args.samples, args.seed, args.percentiles)
    stats = experiments.run_monte_carlo(config)
    row = {"A": args.A, "K": args.K, **stats.as_row()}
    inputs = {"A": args.A, "K": args.K, "samples": args.samples, "seed": args.seed, "percentiles": list(config.percentile_bands)}
    _emit(make_record("sample", inputs, [row], args.seed), args.format)
    z = stats.z_score
    if z is not None and abs(z) > 3.0:
        print(f"sample mean {stats.mean:.6f} is {z:+.2f} standard errors from the exact mean", file=sys.stderr)
        return EXIT_MISMATCH
    return 0


def cmd_check(args, parser) -> int:
    report = experiments.cross_validate(args.A, args.K, args.samples, args.seed)
    inputs = {"A": args.A, "K": args.K, "samples": args.samples, "seed": args.seed}
    _emit(make_record("check", inputs, [report.as_row()], args.seed), args.format)
    if not report.passed:
        print(f"z-score check failed: {', '.join(report.flagged)}", file=sys.stderr)
        return EXIT_MISMATCH
    return 0


def cmd_figure(args, parser) -> int:
    if args.which == "fig3":
        params = {"A": args.A or 100, "Kmin": args.Kmin, "Kmax": args.Kmax}
        seed = None
    elif args.which == "fig4":
        params = {"nmin": args.nmin, "nmax": args.nmax, "samples": args.samples, "seed": args.seed, "bands": args.percentiles}
        seed = args.seed
    else:
        params = {"n": args.n}
        seed = None
    try:
        rows = experiments.figure_data(args.which, **params)
    except ValueError as exc:
        parser.error(str(exc))
    record = make_record("figure", {"which": args.which, **params}, rows, seed)
    if args.out is None:
        _emit(record, args.format)
        return 0
    try:
        with open(args.out, "w", newline="") as fh:
            _emit(record, args.format, fh)
    except OSError as exc:
        print(f"cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_UNWRITABLE
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qerasure", description="Recoverable qubit coherence under partial environment access.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def fmt(p, default="json"):
        p.add_argument("--format", choices=("json", "csv"), default=default)

    p = sub.add_parser("mean", help="exact or asymptotic ensemble-average coherence")
    p.add_argument("--A", type=_positive_int, help="accessible dimension")
    p.add_argument("--K", type=_positive_int, help="inaccessible dimension")
    p.add_argument("--qubits", type=_nonneg_int, help="environment qubits n")
    p.add_argument("--accessible", type=_nonneg_int, help="accessible qubits a")
    fmt(p)
    p.set_defaults(func=cmd_mean)

    for name, func, helptext in (
        ("sample", cmd_sample, "Monte Carlo statistics of recoverable coherence"),
        ("check", cmd_check, "cross-validate both sampling routes against the exact mean"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--A", type=_positive_int, required=True)
        p.add_argument("--K", type=_positive_int, required=True)
        p.add_argument("--samples", type=_positive_int, default=experiments.DEFAULT_SAMPLES)
        p.add_argument("--seed", type=_seed, default=DEFAULT_SEED)
        if name == "sample":
            p.add_argument("--percentiles", type=_coverages, default=experiments.DEFAULT_BANDS)
        fmt(p)
        p.set_defaults(func=func)

    p = sub.add_parser("figure", help="emit the data table behind a figure")
    p.add_argument("--which", choices=("fig3", "fig4", "fig5"), required=True)
    p.add_argument("--A", type=_positive_int, default=None, help="fig3: accessible dimension (default 100)")
    p.add_argument("--Kmin", type=_positive_int, default=1, help="fig3")
    p.add_argument("--Kmax", type=_positive_int, default=1000, help="fig3")
    p.add_argument("--nmin", type=_nonneg_int, default=3, help="fig4")
    p.add_argument("--nmax", type=_nonneg_int, default=11, help="fig4")
    p.add_argument("--samples", type=_positive_int, default=experiments.DEFAULT_SAMPLES, help="fig4")
    p.add_argument("--seed", type=_seed, default=DEFAULT_SEED, help="fig4")
    p.add_argument("--percentiles", type=_coverages, default=experiments.DEFAULT_BANDS, help="fig4")
    p.add_argument("--n", type=_nonneg_int, default=200, help="fig5: environment qubits")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    fmt(p, default="csv")
    p.set_defaults(func=cmd_figure)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args, parser)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except GuardError as exc:
        print(f"guard violation: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
