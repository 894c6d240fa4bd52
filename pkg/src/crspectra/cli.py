"""Command-line interface: ``crspectra <subcommand> ...``.

Exit codes: 0 ok, 1 a verified property failed, 2 usage or input error,
3 compute failure, 4 hearing estimate did not stabilize.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction

from .groups import GroupError, IntegralityError, dims_invariant, make_group, printed_cyclic_formula
from .harmonics import OracleError
from .hearing import HearingError, HearingReport, hear_order, standard_window
from .matrices import build_W_matrix, gershgorin_intervals, gershgorin_lower_bound_holds, symmetrize
from .scalars import PerturbationParam
from .spectrum import SchemaError, SpectrumTable, classify_embeddability, rossi_spectrum, standard_spectrum
from .verify import PROPERTIES, run_properties

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_COMPUTE, EXIT_UNSTABLE = 0, 1, 2, 3, 4
JOBS_ENV = "CRSPECTRA_JOBS"


class UsageError(Exception):
    pass


def _param(text: str) -> PerturbationParam:
    try:
        return PerturbationParam.parse(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _default_jobs() -> int:
    try:
        return max(1, int(os.environ.get(JOBS_ENV, "1")))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv", "table"), default="json")
    common.add_argument("--output", "-o", help="write here instead of stdout")
    common.add_argument("--jobs", type=int, default=None, help=f"worker processes (default ${JOBS_ENV} or 1)")
    common.add_argument("--config", help="JSON file whose keys provide defaults for the flags")

    p = argparse.ArgumentParser(prog="crspectra", description="Kohn Laplacian spectra on quotients of S^3.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("spectrum", parents=[common], help="spectrum table of a quotient")
    s.add_argument("--structure", choices=("standard", "rossi"), default="standard")
    s.add_argument("--group", required=True)
    s.add_argument("--t", type=_param, default=None, help="perturbation 're,im' (rossi only)")
    s.add_argument("--max-degree", type=_nonneg, required=True)
    s.add_argument("--max-eigenvalue", type=_nonneg, default=None, help="standard only: cap listed eigenvalues")
    s.add_argument("--tol", type=_positive_float, default=1e-12)

    h = sub.add_parser("hear", parents=[common], help="recover |G| from a standard spectrum")
    h.add_argument("--input", help="standard SpectrumTable JSON file")
    h.add_argument("--group", help="build the window from this group instead of --input")
    h.add_argument("--window", type=_nonneg, default=20011, help="largest prime for --group windows")

    v = sub.add_parser("verify", parents=[common], help="run property checks")
    v.add_argument("--only", action="append", default=None, help="property name (repeatable or comma list)")
    v.add_argument("--k-max", type=_nonneg, default=None, help="override the size of each check")
    v.add_argument("--full", action="store_true", help="acceptance-scale sizes")
    v.add_argument("--list", action="store_true", help="list property names and exit")

    d = sub.add_parser("dims", parents=[common], help="invariant dimensions of H_{0,k}")
    d.add_argument("--group", required=True)
    d.add_argument("--max-degree", type=_nonneg, required=True)
    d.add_argument(
        "--paper-formula",
        action="store_true",
        help="cyclic groups only: add the published closed form and flag where it misses the count",
    )

    e = sub.add_parser("embeddable", parents=[common], help="embeddability verdict with evidence")
    e.add_argument("--group", required=True)
    e.add_argument("--t", type=_param, required=True)
    e.add_argument("--max-degree", type=_nonneg, required=True)
    e.add_argument("--windows", default=None, help="comma list of window sizes for running minima")
    e.add_argument("--tol", type=_positive_float, default=1e-12)

    g = sub.add_parser("gershgorin", parents=[common], help="Gershgorin intervals of the halved W matrix")
    g.add_argument("--degree", type=_nonneg, required=True, help="even degree 2k")
    g.add_argument("--t", type=_param, required=True)
    g.add_argument("--bound", default="1")
    return p


def _expand_config(argv: list[str]) -> list[str]:
    """Splice the flags from a --config JSON object in right after the subcommand.

    Explicit command-line flags come later and therefore win.
    """
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    ns, _ = pre.parse_known_args(argv)
    if not ns.config:
        return argv
    try:
        with open(ns.config) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {ns.config}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    tokens: list[str] = []
    for key, value in cfg.items():
        flag = "--" + key.replace("_", "-")
        if value is True:
            tokens.append(flag)
        elif value is False or value is None:
            continue
        elif isinstance(value, list):
            for item in value:
                tokens += [flag, str(item)]
        else:
            tokens += [flag, str(value)]
    return argv[:1] + tokens + argv[1:]


# formatting -----------------------------------------------------------------


def _table(rows: list[list], header: list[str]) -> str:
    cells = [header] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    return "\n".join(lines) + "\n"


def _csv(rows: list[list], header: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _render(fmt: str, obj: dict, rows: list[list], header: list[str], preface: str = "") -> str:
    if fmt == "json":
        return json.dumps(obj, indent=1) + "\n"
    if fmt == "csv":
        return _csv(rows, header)
    return preface + _table(rows, header)


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# subcommands ----------------------------------------------------------------


def cmd_spectrum(args) -> int:
    G = make_group(args.group)
    if args.structure == "standard":
        if args.t is not None:
            raise UsageError("--t applies to rossi spectra only")
        S = standard_spectrum(G, args.max_degree, args.max_eigenvalue)
    else:
        if args.t is None:
            raise UsageError("rossi spectra need --t")
        if args.max_eigenvalue is not None:
            raise UsageError("--max-eigenvalue applies to standard spectra only")
        S = rossi_spectrum(G, args.t, args.max_degree, args.tol, args.jobs)
    if args.format == "json":
        text = S.dumps()
    elif args.format == "csv":
        text = S.to_csv()
    else:
        rows = []
        for e in S.entries:
            ev = e.eigenvalue if S.structure == "standard" else f"{e.eigenvalue.mid:.12g}"
            rows.append([ev, e.multiplicity, len(e.sources)])
        text = _table(rows, ["eigenvalue", "multiplicity", "sources"])
    _emit(text, args.output)
    return EXIT_OK


def _hearing_output(rep: HearingReport, fmt: str) -> str:
    rows = [[e.alpha, e.multiplicity, f"{e.raw:.9g}", e.rounded] for e in rep.estimates]
    preface = (
        f"group {rep.group}: parity {rep.parity} (probe prime {rep.probe_prime}), "
        f"order {rep.final_order}, {rep.agreeing} trailing primes agree\n"
    )
    return _render(fmt, rep.to_json(), rows, ["alpha", "multiplicity", "raw", "rounded"], preface)


def cmd_hear(args) -> int:
    if bool(args.input) == bool(args.group):
        raise UsageError("give exactly one of --input or --group")
    if args.input:
        try:
            with open(args.input) as fh:
                S = SpectrumTable.loads(fh.read())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read {args.input}: {exc}") from exc
    else:
        S = standard_window(make_group(args.group), args.window)
    if S.structure != "standard":
        raise UsageError("hearing needs a standard spectrum")
    try:
        rep = hear_order(S)
    except HearingError as exc:
        sys.stderr.write(f"crspectra hear: {exc}\n")
        if exc.report is not None:
            sys.stderr.write(_hearing_output(exc.report, "table") if exc.report.estimates else "no usable primes\n")
        return EXIT_UNSTABLE
    _emit(_hearing_output(rep, args.format), args.output)
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.list:
        _emit("".join(f"{n}: {p.anchor}\n" for n, p in PROPERTIES.items()), args.output)
        return EXIT_OK
    names = None
    if args.only:
        names = [n.strip() for item in args.only for n in item.split(",") if n.strip()]
        unknown = [n for n in names if n not in PROPERTIES]
        if unknown:
            raise UsageError(f"unknown properties: {', '.join(unknown)}")
    results = run_properties(names, full=args.full, k_max=args.k_max)
    if args.format == "json":
        obj = [
            {"name": r.name, "anchor": r.anchor, "passed": r.passed, "details": r.details} for r in results
        ]
        text = json.dumps(obj, indent=1) + "\n"
    elif args.format == "csv":
        text = _csv([[r.name, r.passed, r.anchor] for r in results], ["name", "passed", "anchor"])
    else:
        text = "".join(r.line() + "\n" + "".join(f"    {d}\n" for d in r.details) for r in results)
    _emit(text, args.output)
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


def cmd_dims(args) -> int:
    G = make_group(args.group)
    dims = dims_invariant(G, args.max_degree)
    obj = {"group": G.label, "order": G.order, "max_degree": args.max_degree, "dims": dims}
    rows = [[k, d] for k, d in enumerate(dims)]
    header = ["k", "dim"]
    if args.paper_formula:
        if G.spec.kind != "C":
            raise UsageError("--paper-formula applies to cyclic groups C:n only")
        printed = [printed_cyclic_formula(G.order, k) for k in range(args.max_degree + 1)]
        obj["printed_formula"] = printed
        obj["mismatches"] = [k for k, (a, b) in enumerate(zip(dims, printed)) if a != b]
        rows = [r + [p, r[1] == p] for r, p in zip(rows, printed)]
        header += ["printed", "agrees"]
    _emit(_render(args.format, obj, rows, header), args.output)
    return EXIT_OK


def cmd_embeddable(args) -> int:
    G = make_group(args.group)
    windows = None
    if args.windows:
        try:
            windows = [int(w) for w in args.windows.split(",")]
        except ValueError as exc:
            raise UsageError("--windows must be a comma list of integers") from exc
    rep = classify_embeddability(G, args.t, args.max_degree, windows, tol=args.tol, jobs=args.jobs)
    gap = "n/a" if rep.gap_min is None else f"{rep.gap_min:.9g}"
    preface = (
        f"{rep.verdict} (|G| = {rep.order}, {rep.parity})\n"
        f"min nonzero eigenvalue from degrees >= {rep.gap_min_degree}: {gap} vs 2h(t) = {rep.gap_bound:.9g}\n"
        f"window minima {'strictly decreasing' if rep.minima_decreasing else 'not strictly decreasing'}\n"
    )
    rows = [[w, f"{m:.9e}"] for w, m in rep.window_minima]
    _emit(_render(args.format, rep.to_json(), rows, ["window", "min_nonzero"], preface), args.output)
    return EXIT_OK


def cmd_gershgorin(args) -> int:
    if args.degree % 2:
        raise UsageError("--degree must be even (the W chain of H_{0,2k})")
    k = args.degree // 2
    try:
        bound = Fraction(args.bound)
    except ValueError as exc:
        raise UsageError(f"bad --bound {args.bound!r}") from exc
    m = symmetrize(build_W_matrix(k, args.t), halved=True)
    intervals = gershgorin_intervals(m)
    holds = gershgorin_lower_bound_holds(m, bound)
    rows = [[i + 1, f"{lo:.12g}", f"{hi:.12g}", ok] for i, ((lo, hi), ok) in enumerate(zip(intervals, holds))]
    obj = {
        "degree": args.degree,
        "t": args.t.to_json(),
        "bound": str(bound),
        "rows": [{"row": r[0], "lo": lo, "hi": hi, "lo_ge_bound": ok} for r, (lo, hi), ok in zip(rows, intervals, holds)],
    }
    _emit(_render(args.format, obj, rows, ["row", "lo", "hi", f"lo>={bound}"]), args.output)
    return EXIT_OK


COMMANDS = {
    "spectrum": cmd_spectrum,
    "hear": cmd_hear,
    "verify": cmd_verify,
    "dims": cmd_dims,
    "embeddable": cmd_embeddable,
    "gershgorin": cmd_gershgorin,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(_expand_config(argv))
        if getattr(args, "jobs", None) is None:
            args.jobs = _default_jobs()
        return COMMANDS[args.command](args)
    except BrokenPipeError:
        # downstream reader closed early (e.g. piped into head)
        sys.stdout = open(os.devnull, "w")
        return EXIT_OK
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    except (UsageError, GroupError, SchemaError, argparse.ArgumentTypeError) as exc:
        sys.stderr.write(f"crspectra: {exc}\n")
        return EXIT_USAGE
    except (OracleError, IntegralityError, ArithmeticError, MemoryError) as exc:
        sys.stderr.write(f"crspectra: computation failed: {exc}\n")
        return EXIT_COMPUTE
    except ValueError as exc:
        sys.stderr.write(f"crspectra: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
