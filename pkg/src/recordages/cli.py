"""Command-line front end.

Every command writes a table as CSV (header row, LF line endings, manifest
in leading ``#`` comment lines) or as JSON ``{"manifest": ..., "columns":
..., "rows": ...}``.  Logs go to stderr only.

Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 resource
ceiling refused.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from typing import Any, Callable, Sequence

import numpy as np

from . import __version__
from .errors import DivergenceError, QuadratureError, ResourceLimitError

log = logging.getLogger("recordages")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_RESOURCE = 0, 1, 2, 3
THREADS_ENV = "RECORDAGES_THREADS"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits with 2 by default; usage errors are 1 here
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ------------------------------------------------------------------ output

@dataclass
class RunManifest:
    command: str
    params: dict[str, Any]
    seed: int | None = None
    version: str = __version__
    timestamp: str = field(default_factory=lambda: _timestamp())

    def as_dict(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "params": self.params,
            "seed": self.seed,
            "version": self.version,
            "timestamp": self.timestamp,
        }


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    moment = datetime.fromtimestamp(int(epoch), timezone.utc) if epoch else datetime.now(timezone.utc)
    return moment.isoformat(timespec="seconds")


def _cell(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _json_value(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else str(value)
    return value


def render(manifest: RunManifest, columns: Sequence[str], rows: Sequence[Sequence], fmt: str) -> str:
    if fmt == "json":
        doc = {
            "manifest": manifest.as_dict(),
            "columns": list(columns),
            "rows": [{c: _json_value(v) for c, v in zip(columns, row)} for row in rows],
        }
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"
    buf = io.StringIO()
    buf.write("# manifest " + json.dumps(manifest.as_dict(), sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def data_section(text: str) -> str:
    """The CSV text without manifest comment lines."""
    return "".join(line for line in text.splitlines(keepends=True) if not line.startswith("#"))


def _emit(args, manifest: RunManifest, columns, rows) -> None:
    text = render(manifest, columns, rows, args.format)
    if args.out == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        log.info("wrote %d rows to %s", len(rows), args.out)


def _params(args, *names) -> dict[str, Any]:
    return {name: getattr(args, name) for name in names}


# ------------------------------------------------------------------ commands

_TABLE1_COLUMNS = (("p", 1), ("p", 2), ("C", 2), ("C", 3))


def cmd_constants(args) -> int:
    from .gamma_quad import ConstantSpec, constant

    if args.k_max < 1:
        raise UsageError("--k-max must be >= 1")
    if not args.tol > 0:
        raise UsageError("--tol must be positive")
    pairs = [
        (fam, beta)
        for fam, beta in _TABLE1_COLUMNS
        if (args.family is None or fam == args.family) and (args.beta is None or beta == args.beta)
    ]
    if not pairs:
        if args.family == "C" and args.beta == 1:
            pairs = [("C", 1)]  # equal to p^(1), listed on request
        else:
            raise UsageError(f"no limit constant for family={args.family} beta={args.beta}")
    rows = []
    for fam, beta in pairs:
        for k in range(1, args.k_max + 1):
            spec = ConstantSpec(fam, beta, k, args.tol)
            if spec.divergent:
                rows.append((fam, beta, k, "divergent", ""))
                continue
            val = constant(spec)
            rows.append((fam, beta, k, val.value, val.abs_err))
    manifest = RunManifest("constants", _params(args, "family", "beta", "k_max", "tol"))
    _emit(args, manifest, ("family", "beta", "k", "value", "abs_err_bound"), rows)
    return EXIT_OK


def cmd_exact(args) -> int:
    from .exact import EL_exact, p_exact

    fn = p_exact if args.quantity == "p" else EL_exact
    table = fn(args.beta, args.k, args.n_max, max_n=args.ceiling)
    if not np.all(np.isfinite(table.values)):
        raise ArithmeticError("non-finite value in exact table")
    rows = [(n, float(v)) for n, v in enumerate(table.values)]
    manifest = RunManifest("exact", _params(args, "beta", "k", "n_max", "quantity", "ceiling"))
    _emit(args, manifest, ("n", "value"), rows)
    return EXIT_OK


def cmd_simulate(args) -> int:
    import warnings

    from .montecarlo import WalkConfig, estimate, run_simulation

    cfg = WalkConfig(args.dist, args.n, args.replicas, args.seed, args.k_max)
    start = time.perf_counter()
    result = run_simulation(cfg, threads=args.threads)
    log.info("simulated %d replicas in %.2fs", cfg.replicas, time.perf_counter() - start)
    rows = []
    stats = [("p", b, k) for b in (1, 2, 3) for k in range(1, cfg.k_max + 1)]
    if cfg.n >= 1:
        stats += [("EL", b, k) for b in (1, 2, 3) for k in range(1, cfg.k_max + 1)]
    for quantity, beta, k in stats:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            est = estimate(result, quantity, beta, k)
        name = "p" if quantity == "p" else ("median_L/n" if est.statistic == "median" else "EL/n")
        rows.append((name, k, beta, est.mean, est.std_error, est.count))
    rows.append(("empty_beta3", 0, 3, result.empty_beta3 / cfg.replicas, math.nan, result.empty_beta3))
    params = _params(args, "dist", "n", "replicas", "k_max")
    _emit(args, RunManifest("simulate", params, seed=args.seed), ("statistic", "k", "beta", "mean", "std_error", "count"), rows)
    return EXIT_OK


def _partition_label(parts: tuple[int, ...]) -> str:
    return "+".join(map(str, parts)) if parts else "empty"


def cmd_crp_check(args) -> int:
    from .oracle import partition_law_beta1
    from .partitions import crp_partition_law, crp_sample

    renewal = partition_law_beta1(args.n, exact=True)
    if args.mode == "exact":
        crp = crp_partition_law(Fraction(1, 2), 0, args.n, exact=True)
    else:
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(args.seed)))
        counts: dict[tuple[int, ...], int] = {}
        for _ in range(args.replicas):
            parts = crp_sample(0.5, 0.0, args.n, rng).partition()
            counts[parts] = counts.get(parts, 0) + 1
        crp = {p: c / args.replicas for p, c in counts.items()}
    keys = sorted(set(crp) | set(renewal), reverse=True)
    rows = []
    for key in keys:
        a, b = float(crp.get(key, 0)), float(renewal.get(key, 0))
        rows.append((_partition_label(key), a, b, abs(a - b)))
    params = _params(args, "n", "mode") | ({"replicas": args.replicas} if args.mode == "sample" else {})
    seed = args.seed if args.mode == "sample" else None
    _emit(args, RunManifest("crp-check", params, seed=seed), ("partition", "p_crp", "p_renewal", "abs_diff"), rows)
    return EXIT_OK


def cmd_pd(args) -> int:
    from .partitions import pd_ranked_samples

    summary = pd_ranked_samples(args.replicas, args.depth, args.seed, args.k_max, threads=args.threads)
    rows = []
    count = args.replicas
    for k in range(1, args.k_max + 1):
        col = summary.ranked[:, k - 1]
        se = float(col.std(ddof=1) / math.sqrt(count)) if count > 1 else math.nan
        rows.append(("ranked", k, float(col.mean()), se, count, summary.unreliable(k)))
    res = summary.residual
    res_se = float(res.std(ddof=1) / math.sqrt(count)) if count > 1 else math.nan
    rows.append(("residual", 0, float(res.mean()), res_se, count, 0))
    params = _params(args, "replicas", "depth", "k_max")
    columns = ("statistic", "k", "mean", "std_error", "count", "unreliable")
    _emit(args, RunManifest("pd", params, seed=args.seed), columns, rows)
    return EXIT_OK


def cmd_laplace(args) -> int:
    import warnings

    from .exact import laplace_diag

    rows = []
    for s in args.s:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", RuntimeWarning)
            diag = laplace_diag(args.beta, args.k, s, args.n_max, quantity=args.quantity, max_n=args.ceiling)
        for w in caught:
            log.warning("%s", w.message)
        rows.append((s, diag.empirical_sum, diag.predicted, diag.ratio))
    params = _params(args, "beta", "k", "s", "n_max", "quantity", "ceiling")
    _emit(args, RunManifest("laplace", params), ("s", "empirical_sum", "predicted", "ratio"), rows)
    return EXIT_OK


# ------------------------------------------------------------------ parser

def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _nonneg_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {text}")
    return value


def _default_threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    from .exact import DEFAULT_MAX_N
    from .montecarlo import STEP_LAWS

    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", default="-", help="output path, '-' for stdout (default)")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    threads = _Parser(add_help=False)
    threads.add_argument(
        "--threads", type=_positive_int, default=_default_threads(),
        help=f"worker threads; wall time only, never output (default from ${THREADS_ENV} or 1)",
    )

    parser = _Parser(prog="recordages", description="Record-age statistics of random walks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("constants", parents=[common], help="limiting constants by quadrature")
    p.add_argument("--family", choices=("p", "C"))
    p.add_argument("--beta", type=int, choices=(1, 2, 3))
    p.add_argument("--k-max", type=int, default=6)
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("exact", parents=[common], help="exact finite-n table")
    p.add_argument("--beta", type=int, choices=(1, 2, 3), required=True)
    p.add_argument("--k", type=_positive_int, required=True)
    p.add_argument("--n-max", type=_nonneg_int, required=True)
    p.add_argument("--quantity", choices=("p", "EL"), default="p")
    p.add_argument("--ceiling", type=_positive_int, default=DEFAULT_MAX_N, help="largest n-max accepted")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("simulate", parents=[common, threads], help="Monte Carlo record statistics")
    p.add_argument("--dist", choices=STEP_LAWS, default="gaussian")
    p.add_argument("--n", type=_nonneg_int, required=True)
    p.add_argument("--replicas", type=_positive_int, default=10_000)
    p.add_argument("--seed", type=_nonneg_int, default=0)
    p.add_argument("--k-max", type=_positive_int, default=3)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("crp-check", parents=[common], help="CRP partition law against record ages")
    p.add_argument("--n", type=_nonneg_int, required=True)
    p.add_argument("--mode", choices=("exact", "sample"), default="exact")
    p.add_argument("--replicas", type=_positive_int, default=10_000)
    p.add_argument("--seed", type=_nonneg_int, default=0)
    p.set_defaults(func=cmd_crp_check)

    p = sub.add_parser("pd", parents=[common, threads], help="Poisson-Dirichlet(1/2, 0) ranked coordinates")
    p.add_argument("--replicas", type=_positive_int, default=10_000)
    p.add_argument("--depth", type=_positive_int, default=50)
    p.add_argument("--seed", type=_nonneg_int, default=0)
    p.add_argument("--k-max", type=_positive_int, default=3)
    p.set_defaults(func=cmd_pd)

    p = sub.add_parser("laplace", parents=[common], help="Laplace sums of exact tables")
    p.add_argument("--beta", type=int, choices=(1, 2, 3), required=True)
    p.add_argument("--k", type=_positive_int, required=True)
    p.add_argument("--s", type=float, nargs="+", required=True)
    p.add_argument("--n-max", type=_nonneg_int, required=True)
    p.add_argument("--quantity", choices=("p", "EL"), default="p")
    p.add_argument("--ceiling", type=_positive_int, default=DEFAULT_MAX_N)
    p.set_defaults(func=cmd_laplace)
    return parser


def _configure_logging(verbose: bool) -> None:
    # one handler on the package logger, bound to the current stderr
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    log.handlers[:] = [handler]
    log.propagate = False
    log.setLevel(logging.INFO if verbose else logging.WARNING)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)
    func: Callable = args.func
    try:
        return func(args)
    except ResourceLimitError as exc:
        log.error("refused: %s", exc)
        return EXIT_RESOURCE
    except (DivergenceError, QuadratureError, ArithmeticError, FloatingPointError) as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERIC
    except (UsageError, ValueError) as exc:
        log.error("usage: %s", exc)
        return EXIT_USAGE
