"""Command-line front end: configuration, validation and report emission.

Every subcommand reads flags (optionally on top of a ``--config`` file),
validates all parameters before any computation, runs one experiment and
writes a JSON report, plus an optional CSV and plot script.

Exit codes: 0 success, 2 usage, 3 capacity, 4 I/O.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import logging
import math
import os
import sys
import time
from dataclasses import dataclass
from importlib import metadata

import numpy as np

from .errors import CapacityError, DomainError, EmptyRangeError
from .experiments import (
    charsum_verify,
    distribution_counts,
    evaluate_range,
    extreme_scan,
    ratio_experiment,
)
from .lfun import TruncationPolicy
from .resonator import (
    FixedSigma,
    NearOne,
    Unit,
    build_spec,
    closed_form_constants,
    log_resonator_values,
    main_term,
    predicted_main_term,
)

log = logging.getLogger("res_scope")

EXIT_OK, EXIT_USAGE, EXIT_CAPACITY, EXIT_IO = 0, 2, 3, 4

COMMANDS = ("scan", "ratio", "dist", "charsum", "constants", "near-one", "sigma")
RANGE_COMMANDS = ("scan", "ratio", "dist", "near-one", "sigma")
PER_D_CSV_HEADER = ("d", "value", "log_resonator")
SIG_DIGITS = 12


class UsageError(Exception):
    """Invalid flag or parameter; maps to exit code 2."""


@dataclass(frozen=True)
class RunConfig:
    """A fully specified run. ``None`` means "use the documented default"."""

    command: str
    lo: int | None = None
    hi: int | None = None
    Y: int | None = None
    Y_audit: int | None = None
    sigma: float | None = None
    X: float | None = None
    delta: float = 0.01
    A: float = 1.0
    kappa: float = 0.1
    eta: float = 1.0
    xs: tuple[float, ...] = (0.0, 0.5, 1.0, 2.0, 4.0)
    constant: str = "paper"
    k: int = 10
    n: tuple[int, ...] = (1, 2, 3, 4, 5, 6, 7, 9, 10, 16, 36)
    N: int | None = None
    prime_cutoff: int = 10**5
    workers: int = 1
    out_json: str | None = None
    out_csv: str | None = None
    plot: str | None = None

    def parameters(self) -> dict:
        """Everything except ``workers``, which only affects wall time."""
        out = dataclasses.asdict(self)
        del out["workers"]
        out["xs"] = list(self.xs)
        out["n"] = list(self.n)
        return out


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}
_INT_KEYS = {"lo", "hi", "Y", "Y_audit", "k", "N", "prime_cutoff", "workers"}
_FLOAT_KEYS = {"sigma", "X", "delta", "A", "kappa", "eta"}


def _parse_int(key: str, raw) -> int:
    if isinstance(raw, int) and not isinstance(raw, bool):
        return raw
    try:
        text = str(raw).strip().replace("_", "")
        if "e" in text.lower():
            value = float(text)
            if not value.is_integer():
                raise ValueError
            return int(value)
        return int(text)
    except ValueError:
        raise UsageError(f"--{_flag(key)}: expected an integer, got {raw!r}") from None


def _parse_float(key: str, raw) -> float:
    try:
        value = float(raw)
    except (TypeError, ValueError):
        raise UsageError(f"--{_flag(key)}: expected a number, got {raw!r}") from None
    if not math.isfinite(value):
        raise UsageError(f"--{_flag(key)}: must be finite, got {raw!r}")
    return value


def _parse_list(key: str, raw, item) -> tuple:
    if isinstance(raw, (list, tuple)):
        parts = list(raw)
    else:
        parts = [p for p in str(raw).split(",") if p.strip()]
    return tuple(item(key, p) for p in parts)


def _flag(key: str) -> str:
    return key.replace("_", "-")


def _coerce(key: str, raw):
    if raw is None or (isinstance(raw, str) and raw.strip().lower() in ("", "none", "null")):
        if key == "command":
            raise UsageError("missing command")
        return None
    if key in _INT_KEYS:
        return _parse_int(key, raw)
    if key in _FLOAT_KEYS:
        return _parse_float(key, raw)
    if key == "xs":
        return _parse_list(key, raw, _parse_float)
    if key == "n":
        return _parse_list(key, raw, _parse_int)
    return str(raw)


def read_config_file(path: str) -> dict:
    """Load a flat ``key = value`` file, or the parameters echoed in a JSON report."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
        values = dict(doc.get("parameters", {}))
        if "command" in doc:
            values["command"] = doc["command"]
        if "workers" in doc.get("run", {}):
            values["workers"] = doc["run"]["workers"]
        return values
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value, got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def format_config(config: RunConfig) -> str:
    """Render ``config`` in the ``key = value`` format read by ``--config``."""
    lines = []
    for key, value in dataclasses.asdict(config).items():
        if value is None:
            continue
        if isinstance(value, (list, tuple)):
            value = ",".join(repr(v) if isinstance(v, float) else str(v) for v in value)
        elif isinstance(value, float):
            value = repr(value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("range and truncation")
    g.add_argument("--config", metavar="FILE", help="key = value file (or a JSON report) with defaults")
    g.add_argument("--lo", help="range is lo < |d| <= hi; N = lo")
    g.add_argument("--hi")
    g.add_argument("--Y", help="truncation cutoff (default max(10^4, ceil(log(lo)^3)))")
    g.add_argument("--Y-audit", dest="Y_audit", help="audit cutoff (default 2Y)")
    g.add_argument("--sigma", help="evaluation point; the exponent for the sigma family")
    g = common.add_argument_group("resonator")
    g.add_argument("--delta", help="Unit family, B = 1/4 - delta (default 0.01)")
    g.add_argument("--A", dest="A", help="near-one family, sigma_A = 1 - A/log log N")
    g.add_argument("--kappa", help="near-one family cutoff scale")
    g.add_argument("--eta", help="sigma family cutoff scale")
    g.add_argument("--X", dest="X", help="explicit resonator cutoff, overriding the N-based one")
    g = common.add_argument_group("experiment")
    g.add_argument("--xs", help="comma list of x values for dist")
    g.add_argument("--constant", choices=("paper", "alt"), help="closed-form constant used by dist thresholds")
    g.add_argument("--k", help="number of top discriminants kept by scan")
    g.add_argument("--n", help="comma list of n for charsum")
    g.add_argument("--N", dest="N", help="bound |d| <= N for charsum; fitted-constant N for constants")
    g.add_argument("--prime-cutoff", dest="prime_cutoff", help="prime sums run to this cutoff")
    g = common.add_argument_group("output")
    g.add_argument("--workers", help="worker processes (results do not depend on it)")
    g.add_argument("--out-json", dest="out_json", metavar="PATH")
    g.add_argument("--out-csv", dest="out_csv", metavar="PATH")
    g.add_argument("--plot", metavar="PATH", help="write a matplotlib script plotting the CSV")
    g.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="res-scope",
        description="Resonance experiments for -L'/L(sigma, chi_d) over fundamental discriminants.",
    )
    sub = parser.add_subparsers(dest="command", metavar="command")
    helps = {
        "scan": "largest truncated sums over a range",
        "ratio": "resonator-weighted average S2/S1 (Unit family)",
        "dist": "counts of discriminants above the threshold J~(N, x)",
        "charsum": "character sums over discriminants against their main term",
        "constants": "closed-form constants C_paper and C_alt",
        "near-one": "resonance ratio with the near-one family at sigma_A",
        "sigma": "resonance ratio with the fixed-sigma family",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def parse_config(argv: list[str]) -> RunConfig:
    """Parse and fully validate ``argv``.

    Raises :class:`UsageError` naming the offending flag. ``argparse``
    errors exit with status 2 on their own.
    """
    parser = build_parser()
    if not argv:
        parser.print_usage(sys.stderr)
        raise SystemExit(EXIT_USAGE)
    ns = parser.parse_args(argv)
    values: dict = {}
    if ns.config:
        values.update(read_config_file(ns.config))
    for key in _FIELDS:
        raw = getattr(ns, key, None)
        if raw is not None:
            values[key] = raw
    values["command"] = ns.command
    unknown = sorted(set(values) - set(_FIELDS))
    if unknown:
        raise UsageError(f"unknown setting(s) in config: {', '.join(unknown)}")
    config = RunConfig(**{k: _coerce(k, v) for k, v in values.items()})
    validate(config)
    return config


def _policy(config: RunConfig, sigma: float) -> TruncationPolicy:
    N = max(config.lo or 0, 2)
    try:
        return TruncationPolicy.for_N(N, sigma, config.Y, config.Y_audit)
    except DomainError as exc:
        flag = "sigma" if "sigma" in str(exc) else "Y-audit" if "Y_audit" in str(exc) else "Y"
        raise UsageError(f"--{flag}: {exc}") from None


def _spec(config: RunConfig):
    """Resonator spec for the command, with N = lo (or the explicit --X)."""
    try:
        if config.command == "near-one":
            variant = NearOne(config.A, config.kappa)
        elif config.command == "sigma":
            variant = FixedSigma(config.sigma if config.sigma is not None else 0.75, config.eta)
        else:
            variant = Unit(config.delta)
    except DomainError as exc:
        raise UsageError(f"--{_offending(str(exc))}: {exc}") from None
    N = config.lo if config.lo and config.lo >= 16 else None
    if N is None and (config.X is None or config.command == "near-one"):
        raise UsageError("--lo: must be >= 16 to derive the resonator cutoff (or pass --X)")
    try:
        return build_spec(variant, N=N, X=config.X)
    except DomainError as exc:
        raise UsageError(f"--{_offending(str(exc))}: {exc}") from None


def _offending(message: str) -> str:
    for name in ("delta", "kappa", "eta", "sigma_A", "sigma", "A", "X", "N"):
        if message.startswith(name):
            return {"sigma_A": "A", "N": "lo"}.get(name, name)
    return "lo"


def validate(config: RunConfig) -> None:
    """Re-check every downstream constraint before any computation starts."""
    c = config
    if c.command not in COMMANDS:
        raise UsageError(f"unknown command {c.command!r}")
    if c.workers < 1:
        raise UsageError(f"--workers: must be >= 1, got {c.workers}")
    if c.constant not in ("paper", "alt"):
        raise UsageError(f"--constant: must be 'paper' or 'alt', got {c.constant!r}")
    if c.plot and not c.out_csv:
        raise UsageError("--plot: needs --out-csv, since the script plots the CSV")
    if c.command in RANGE_COMMANDS:
        if c.lo is None or c.hi is None:
            raise UsageError(f"{c.command}: missing range, --lo and --hi are required")
        if c.lo < 0:
            raise UsageError(f"--lo: must be >= 0, got {c.lo}")
        if c.hi <= c.lo:
            raise UsageError(f"--hi: must exceed --lo, got lo={c.lo}, hi={c.hi}")
        if c.k < 1:
            raise UsageError(f"--k: must be >= 1, got {c.k}")
        if c.command == "near-one" and c.sigma is not None:
            raise UsageError("--sigma: near-one evaluates at sigma_A = 1 - A/log log N; drop --sigma")
        if c.X is not None and c.X <= 0:
            raise UsageError(f"--X: must be positive, got {c.X}")
        spec = _spec(c)
        _policy(c, spec.sigma_eff if c.command in ("near-one", "sigma") else _sigma(c))
    if c.command == "dist":
        if not c.xs:
            raise UsageError("--xs: needs at least one value")
        if any(x < 0 for x in c.xs):
            raise UsageError(f"--xs: values must be >= 0, got {list(c.xs)}")
        if c.lo < 16:
            raise UsageError(f"--lo: thresholds need N = lo >= 16, got {c.lo}")
    if c.command == "charsum":
        if c.N is None:
            raise UsageError("charsum: missing --N")
        if c.N < 3:
            raise UsageError(f"--N: must be >= 3, got {c.N}")
        if not c.n or any(m < 1 for m in c.n):
            raise UsageError(f"--n: values must be >= 1, got {list(c.n)}")
    if c.command == "constants":
        if not (0.0 < c.delta < 0.25):
            raise UsageError(f"--delta: delta must lie in (0, 1/4), got {c.delta}")
        if c.prime_cutoff < 1000:
            raise UsageError(f"--prime-cutoff: must be >= 1000, got {c.prime_cutoff}")
        if c.N is not None and c.N < 16:
            raise UsageError(f"--N: must be >= 16, got {c.N}")
        if c.out_csv:
            raise UsageError("--out-csv: constants has no per-row output")
    for key in ("out_json", "out_csv", "plot"):
        path = getattr(c, key)
        if path:
            parent = os.path.dirname(os.path.abspath(path))
            if not os.path.isdir(parent):
                raise OSError(f"--{_flag(key)}: directory does not exist: {parent}")


def _sigma(config: RunConfig) -> float:
    return 1.0 if config.sigma is None else config.sigma


# -- running ---------------------------------------------------------------


@dataclass
class Outcome:
    results: dict
    bounds: dict
    rows: list | None = None
    header: tuple | None = None
    plot_kind: str | None = None


def _per_d_rows(spec, rv) -> list:
    log_r = log_resonator_values(spec, rv.ds)
    return list(zip(rv.ds.tolist(), rv.values.tolist(), log_r.tolist()))


def run(config: RunConfig) -> Outcome:
    c = config
    if c.command == "constants":
        rep = closed_form_constants(c.delta, c.prime_cutoff)
        results = rep.as_dict()
        if c.N is not None:
            spec = build_spec(Unit(c.delta), N=c.N)
            A = main_term(spec)
            results["fitted"] = {
                "N": c.N,
                "X": spec.X,
                "main_term": A,
                "main_term_minus_log_X": A - math.log(spec.X),
                "C_paper_minus_log_B": rep.C_paper - math.log(0.25 - c.delta),
                "C_alt_minus_log_B": rep.C_alt - math.log(0.25 - c.delta),
            }
        return Outcome(results, {"tail_bound": results["tail_bound"]})

    if c.command == "charsum":
        reports = [charsum_verify(m, c.N) for m in c.n]
        rows = [
            (r.n, r.n0, r.n1, r.N, r.empirical, r.main, r.ratio, r.f_n0, r.g_n1, r.normalized_error)
            for r in reports
        ]
        header = ("n", "n0", "n1", "N", "empirical", "main", "ratio", "f_n0", "g_n1",
                  "normalized_error")
        results = {"N": c.N, "eps": reports[0].eps, "rows": [r.as_dict() for r in reports]}
        return Outcome(results, {}, rows, header, "charsum")

    spec = _spec(c)
    sigma = spec.sigma_eff if c.command in ("near-one", "sigma") else _sigma(c)
    policy = _policy(c, sigma)
    log.info("evaluating %s over %d < |d| <= %d with %s", c.command, c.lo, c.hi, policy)
    rv = evaluate_range(c.lo, c.hi, policy, workers=c.workers)
    if len(rv) == 0:
        raise EmptyRangeError(f"no fundamental discriminants with {c.lo} < |d| <= {c.hi}")
    bounds = {"max_audit": float(rv.audits.max()), "Y": policy.Y, "Y_audit": policy.Y_audit}
    rows = _per_d_rows(spec, rv)

    if c.command == "scan":
        rep = extreme_scan(c.lo, c.hi, policy, k=c.k, values=rv)
        results = rep.as_dict()
        results["resonator"] = spec.as_dict()
    elif c.command == "dist":
        rep = distribution_counts(c.lo, c.hi, policy, c.delta, list(c.xs), values=rv,
                                  constant=c.constant)
        results = rep.as_dict()
        rows = list(zip(rep.xs, rep.thresholds, rep.counts, rep.measured_exponent,
                        rep.predicted_exponent, rep.fitted_C_prime))
        bounds["trunc_err"] = rep.trunc_err
        return Outcome(results, bounds, rows,
                       ("x", "threshold", "count", "measured_exponent", "predicted_exponent",
                        "fitted_C_prime"), "dist")
    else:
        rep = ratio_experiment(c.lo, c.hi, spec, policy, values=rv)
        results = rep.as_dict()
        if c.command in ("near-one", "sigma"):
            A = rep.main_term
            predicted = predicted_main_term(spec)
            results["predicted_main_term"] = predicted
            results["main_term_over_predicted"] = A / predicted
            if c.command == "near-one":
                lln = math.log(math.log(spec.N))
                results["main_term_over_loglog_N"] = A / lln
                results["expm1_A_over_A"] = math.expm1(c.A) / c.A
    return Outcome(results, bounds, rows, PER_D_CSV_HEADER, "per_d")


# -- emission --------------------------------------------------------------


def _clean(value):
    """JSON-ready copy with reals rounded to 12 significant digits."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return _real(float(value))
    if dataclasses.is_dataclass(value):
        return _clean(dataclasses.asdict(value))
    if hasattr(value, "value") and hasattr(value, "name"):  # enums
        return value.value
    return value


def _real(x: float):
    if not math.isfinite(x):
        return None
    return float(f"{x:.{SIG_DIGITS}g}")


def tool_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        from . import __version__

        return __version__


def report_document(config: RunConfig, outcome: Outcome, wall_time: float) -> dict:
    return {
        "command": config.command,
        "tool_version": tool_version(),
        "parameters": _clean(config.parameters()),
        "results": _clean(outcome.results),
        "bounds": _clean(outcome.bounds),
        # the only fields allowed to differ between otherwise identical runs
        "run": {"wall_time_s": round(wall_time, 3), "workers": config.workers},
    }


def render_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def render_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if v is None else _csv_value(v) for v in row])
    return buf.getvalue()


def _csv_value(v):
    if isinstance(v, float):
        r = _real(v)
        return "" if r is None else repr(r)
    return v


_PLOT_TEMPLATES = {
    "per_d": '''
values = [float(r["value"]) for r in rows]
plt.hist(values, bins=120, range=(-3, 3))
plt.xlabel("truncated -L'/L(sigma, chi_d)")
plt.ylabel("discriminants")
''',
    "dist": '''
xs = [float(r["x"]) for r in rows]
plt.plot(xs, [int(r["count"]) for r in rows], marker="o")
plt.yscale("log")
plt.xlabel("x")
plt.ylabel("count above threshold")
''',
    "charsum": '''
ns = [r["n"] for r in rows]
plt.bar(ns, [float(r["normalized_error"]) for r in rows])
plt.xlabel("n")
plt.ylabel("|empirical - main| / N^0.6")
''',
}


def render_plot_script(csv_path: str, kind: str) -> str:
    return (
        '"""Plot generated by res-scope; reads the CSV written alongside it."""\n'
        "import csv\n\n"
        "import matplotlib.pyplot as plt\n\n"
        f"with open({os.path.abspath(csv_path)!r}, newline='') as fh:\n"
        "    rows = list(csv.DictReader(fh))\n"
        + _PLOT_TEMPLATES[kind]
        + "plt.tight_layout()\nplt.show()\n"
    )


def _write(path: str, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def emit_report(config: RunConfig, outcome: Outcome, wall_time: float) -> dict:
    """Write the configured outputs; returns the JSON document."""
    doc = report_document(config, outcome, wall_time)
    text = render_json(doc)
    if config.out_json:
        _write(config.out_json, text)
    else:
        sys.stdout.write(text)
    if config.out_csv and outcome.rows is not None:
        _write(config.out_csv, render_csv(outcome.header, outcome.rows))
        if config.plot:
            _write(config.plot, render_plot_script(config.out_csv, outcome.plot_kind))
    return doc


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    logging.basicConfig(
        level=logging.INFO if ("-v" in argv or "--verbose" in argv) else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        config = parse_config(argv)
        start = time.perf_counter()
        outcome = run(config)
        emit_report(config, outcome, time.perf_counter() - start)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (UsageError, DomainError, EmptyRangeError, json.JSONDecodeError) as exc:
        print(f"res-scope: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapacityError as exc:
        print(f"res-scope: capacity: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except OSError as exc:
        print(f"res-scope: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
