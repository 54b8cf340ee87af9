"""Command line front end.

Exit codes: 0 success, 1 usage error, 2 validation error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from .exceptions import PortfolioTooLarge, TrancheError, ValidationError
from .model import (
    PRESET_SIZES,
    Portfolio,
    Tranche,
    format_portfolio_csv,
    preset_portfolio,
    read_portfolio_csv,
)
from .oracles import McConfig, exact_prices, mc_price_many
from .pricer import PricerConfig, compute_grid_stats, integrate_tranche

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_IO = 0, 1, 2, 3

RESULT_COLUMNS = ["attach", "detach", "method", "order", "nodes", "value",
                  "std_error", "runtime_ms", "floored_points"]
METHODS = ("gaussian", "hermite", "mc", "exact")
DEFAULT_HERMITE_ORDER = 5


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass(frozen=True)
class RunSpec:
    command: str
    portfolio_path: str | None = None
    preset: str | None = None
    tranches: tuple[Tranche, ...] = ()
    method: str = "gaussian"
    pricer: PricerConfig | None = None
    mc: McConfig | None = None
    out: str | None = None
    allow_partial_notional: bool = False
    timing: bool = False


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hermitranche", description="Expected tranche loss in the Gaussian factor model.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    price = sub.add_parser("price", help="price one or more tranches")
    src = price.add_mutually_exclusive_group(required=True)
    src.add_argument("--portfolio", metavar="PATH", help="portfolio CSV: id,f,p,r,w1[,w2,...]")
    src.add_argument("--preset", metavar="NAME", choices=sorted(PRESET_SIZES))
    price.add_argument("--attach", type=_float_list, default=[0.0], metavar="LIST",
                       help="attachment fractions; one value applies to every tranche (default 0)")
    price.add_argument("--detach", type=_float_list, required=True, metavar="LIST",
                       help="detachment fractions, strictly increasing, e.g. 0.03,0.07")
    price.add_argument("--method", choices=METHODS)
    price.add_argument("--order", type=int, help="expansion order N (1 = Gaussian)")
    price.add_argument("--nodes", type=int, help="quadrature nodes per factor (default 64)")
    price.add_argument("--samples", type=int, help="Monte Carlo paths (default 1000000)")
    price.add_argument("--seed", type=int, help="Monte Carlo seed (default 0)")
    price.add_argument("--antithetic", action="store_true")
    price.add_argument("--jobs", type=int, default=1, help="Monte Carlo worker threads")
    price.add_argument("--out", metavar="PATH", help="results CSV (default stdout)")
    price.add_argument("--allow-partial-notional", action="store_true",
                       help="accept notional fractions summing to less than one")
    price.add_argument("--timing", action="store_true",
                       help="fill the runtime_ms column (output is then not reproducible)")

    export = sub.add_parser("export-preset", help="write a preset portfolio as CSV")
    export.add_argument("name", choices=sorted(PRESET_SIZES))
    export.add_argument("--out", metavar="PATH")

    sub.add_parser("presets", help="list preset portfolios")
    return parser


def _resolve_method(ns) -> tuple[str, PricerConfig | None, McConfig | None]:
    method = ns.method
    if method is None:
        method = "hermite" if ns.order is not None and ns.order > 1 else "gaussian"
    semi = method in ("gaussian", "hermite")
    if method != "mc" and (ns.samples is not None or ns.seed is not None or ns.antithetic):
        raise UsageError(f"--samples/--seed/--antithetic do not apply to method {method}")
    if not semi and ns.order is not None:
        raise UsageError(f"--order does not apply to method {method}")
    if method == "mc" and ns.nodes is not None:
        raise UsageError("--nodes does not apply to method mc")
    if method == "gaussian" and ns.order not in (None, 1):
        raise UsageError("method gaussian implies --order 1")
    try:
        if semi:
            order = ns.order if ns.order is not None else (1 if method == "gaussian" else DEFAULT_HERMITE_ORDER)
            return method, PricerConfig(order=order, nodes=ns.nodes or 64), None
        if method == "exact":
            return method, PricerConfig(order=1, nodes=ns.nodes or 64), None
        mc = McConfig(samples=10**6 if ns.samples is None else ns.samples,
                      seed=0 if ns.seed is None else ns.seed,
                      antithetic=ns.antithetic, n_jobs=max(1, ns.jobs))
        return method, None, mc
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _resolve_tranches(attach: list[float], detach: list[float]) -> tuple[Tranche, ...]:
    if not detach:
        raise UsageError("--detach needs at least one value")
    if any(b <= a for a, b in zip(detach, detach[1:])):
        raise UsageError(f"detachments must be strictly increasing, got {detach}")
    if len(attach) == 1:
        attach = attach * len(detach)
    if len(attach) != len(detach):
        raise UsageError(f"{len(attach)} attachments for {len(detach)} detachments")
    try:
        return tuple(Tranche(a, b) for a, b in zip(attach, detach))
    except ValidationError as exc:
        raise UsageError(str(exc)) from None


def parse_args(argv) -> RunSpec:
    """Parse ``argv`` into a validated :class:`RunSpec`; raises UsageError."""
    ns = build_parser().parse_args(list(argv))
    if ns.command == "presets":
        return RunSpec(command="presets")
    if ns.command == "export-preset":
        return RunSpec(command="export-preset", preset=ns.name, out=ns.out)
    method, pricer, mc = _resolve_method(ns)
    return RunSpec(
        command="price",
        portfolio_path=ns.portfolio,
        preset=ns.preset,
        tranches=_resolve_tranches(ns.attach, ns.detach),
        method=method,
        pricer=pricer,
        mc=mc,
        out=ns.out,
        allow_partial_notional=ns.allow_partial_notional,
        timing=ns.timing,
    )


def _fmt(x) -> str:
    return "" if x is None else repr(float(x))


def _load_portfolio(spec: RunSpec) -> Portfolio:
    if spec.preset is not None:
        return preset_portfolio(spec.preset)
    return read_portfolio_csv(spec.portfolio_path, spec.allow_partial_notional)


def compute_rows(spec: RunSpec, portfolio: Portfolio) -> list[dict]:
    rows = []
    timing = spec.timing
    if spec.method in ("gaussian", "hermite"):
        stats = compute_grid_stats(portfolio, spec.pricer)
        for t in spec.tranches:
            res = integrate_tranche(stats, t)
            d = res.diagnostics
            rows.append({"attach": t.a, "detach": t.b, "method": spec.method,
                         "order": spec.pricer.order, "nodes": spec.pricer.nodes,
                         "value": res.value, "std_error": None,
                         "runtime_ms": 1e3 * d["wall_time"] if timing else None,
                         "floored_points": d["floored_points"]})
    elif spec.method == "exact":
        start = time.perf_counter()
        values = exact_prices(portfolio, spec.tranches, spec.pricer.nodes)
        per = 1e3 * (time.perf_counter() - start) / len(values)
        for t, v in zip(spec.tranches, values):
            rows.append({"attach": t.a, "detach": t.b, "method": "exact", "order": None,
                         "nodes": spec.pricer.nodes, "value": v, "std_error": None,
                         "runtime_ms": per if timing else None, "floored_points": None})
    else:
        start = time.perf_counter()
        results = mc_price_many(portfolio, spec.tranches, spec.mc)
        per = 1e3 * (time.perf_counter() - start) / len(results)
        for t, r in zip(spec.tranches, results):
            rows.append({"attach": t.a, "detach": t.b, "method": "mc", "order": None,
                         "nodes": None, "value": r.estimate, "std_error": r.std_error,
                         "runtime_ms": per if timing else None, "floored_points": None})
    return rows


def format_results_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RESULT_COLUMNS)
    for row in rows:
        writer.writerow([
            _fmt(row["attach"]), _fmt(row["detach"]), row["method"],
            "" if row["order"] is None else str(row["order"]),
            "" if row["nodes"] is None else str(row["nodes"]),
            _fmt(row["value"]), _fmt(row["std_error"]), _fmt(row["runtime_ms"]),
            "" if row["floored_points"] is None else str(row["floored_points"]),
        ])
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8", newline="")


def run(spec: RunSpec) -> int:
    """Execute ``spec``; errors propagate to :func:`main`."""
    if spec.command == "presets":
        for name, n in PRESET_SIZES.items():
            sys.stdout.write(f"{name}\t{n} loans, single factor\n")
        return EXIT_OK
    if spec.command == "export-preset":
        _emit(format_portfolio_csv(preset_portfolio(spec.preset)), spec.out)
        return EXIT_OK
    portfolio = _load_portfolio(spec)
    _emit(format_results_csv(compute_rows(spec, portfolio)), spec.out)
    return EXIT_OK


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        return run(parse_args(argv))
    except UsageError as exc:
        print(f"hermitranche: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValidationError, PortfolioTooLarge) as exc:
        print(f"hermitranche: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"hermitranche: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except TrancheError as exc:
        print(f"hermitranche: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
