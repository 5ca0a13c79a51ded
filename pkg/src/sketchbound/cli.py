"""
Command-line entry point.

Usage:
    python -m sketchbound sketch --input A.csv --k 10 --p 10 --report report.json
    python -m sketchbound sample-w --n 100000 --k 100 --p 100 --trials 1000 --out w.csv
    python -m sketchbound bounds --m 100000 --n 100000 --k 100 --p 100
    python -m sketchbound experiment --config configs/fig2.toml
    python -m sketchbound lemma-suite --seed 0

Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 lemma-suite failure.
"""
import argparse
import sys
from pathlib import Path
from typing import List, Optional

from rich.console import Console
from rich.table import Table

from sketchbound import bounds, rangefinder, worstcase
from sketchbound.errors import InvalidParameter, SketchboundError
from sketchbound.experiments.lemmas import DEFAULT_LIMIT_T, LEMMA_CHECKS, run_checks
from sketchbound.experiments.runner import any_lemma_failure, run_config_file
from sketchbound.models import SketchConfig
from sketchbound.schemas import BoundSet, ESigmaInvSource, LemmaSuiteReport
from sketchbound.storage.matrix_io import FORMATS, read_matrix, read_spectrum
from sketchbound.utils.log import setup_logging
from sketchbound.utils.serialization import format_number, write_csv, write_json
from sketchbound.utils.settings import get_settings

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_LEMMA_FAILURE = 3

console = Console()


class ArgumentParser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _bound_table(record: BoundSet) -> Table:
    table = Table(title=f"Bounds m={record.m} n={record.n} k={record.k} p={record.p}")
    table.add_column("quantity")
    table.add_column("value", justify="right")
    rows = [
        ("Prior upper", record.hmt_upper),
        ("sharp upper", record.sharp_upper),
        ("sharp lower", record.sharp_lower),
        ("error proxy", record.proxy),
        ("asymptotic upper", record.asymptotic_upper),
        ("asymptotic lower", record.asymptotic_lower),
        ("mixed norm (flat tail)", record.mixed_norm_flat),
        (f"E||Sigma^-1|| ({record.e_sigma_inv_source.value})", record.e_sigma_inv),
        ("  CI half-width", record.e_sigma_inv_ci),
    ]
    rows += [(f"proxy^(1/{2 * q + 1}) (q={q})", value) for q, value in sorted(record.power_proxy.items())]
    for label, value in rows:
        table.add_row(label, "absent" if value is None else f"{value:.6g}")
    return table


def _lemma_table(report: LemmaSuiteReport) -> Table:
    table = Table(title=f"Lemma suite (seed={report.seed}{', negated' if report.negated else ''})")
    for column in ("check", "instances", "failures", "worst slack", "detail"):
        table.add_column(column)
    for result in report.results:
        status = "[green]0[/green]" if result.passed else f"[red]{result.failures}[/red]"
        table.add_row(result.name, str(result.instances), status, f"{result.worst_slack:.3g}", result.detail)
    return table


# Subcommands

def cmd_sketch(args) -> int:
    A = read_matrix(args.input, args.format)
    cfg = SketchConfig(k=args.k, p=args.p, q=args.q, seed=args.seed)
    kwargs = {"strict": args.strict}
    if cfg.q > 0 and args.algorithm != "range":
        kwargs["stabilizer"] = args.stabilizer
    result = rangefinder.run(A, cfg, args.algorithm, **kwargs)
    report = rangefinder.residual_report(
        A, result, bound_trials=args.bound_trials, source=ESigmaInvSource(args.e_sigma_inv_source)
    )

    console.print(f"✅ {result.algorithm}: ||(I - QQ*)A|| = {report.residual_spectral:.10g}")
    if report.ratio is not None:
        console.print(f"   ratio to sigma_(k+1): {format_number(report.ratio)} ({report.ratio_convention})")
    for note in report.notes:
        console.print(f"   ⚠️  {note}")
    if report.bounds is not None:
        console.print(_bound_table(report.bounds))
    if args.report:
        write_json(Path(args.report), report.model_dump(mode="json"))
        console.print(f"📁 report written to {args.report}")
    return EXIT_OK


def cmd_sample_w(args) -> int:
    tail = None if args.tail == "ones" else read_spectrum(args.tail)
    batch = worstcase.estimate_expected_W(
        args.n, args.k, args.p, args.trials, args.seed,
        tail=tail, method=args.method, threads=args.threads, progress=args.progress,
    )
    summary = batch.summary
    console.print(
        f"🎲 W over {args.trials} draws: mean {summary.mean:.6g} ± {summary.ci_half_width:.3g}, "
        f"std {summary.std:.4g}, range [{batch.min:.6g}, {batch.max:.6g}] ({batch.method})"
    )
    if args.out:
        out = Path(args.out)
        write_csv(out, ("trial", "seed", "W"), batch.rows())
        write_json(out.with_suffix(".json"), batch.to_dict())
        console.print(f"📁 draws written to {out}")
    return EXIT_OK


def cmd_bounds(args) -> int:
    record = bounds.bound_set(
        args.m, args.n, args.k, args.p,
        trials=args.trials,
        seed=args.seed,
        source=ESigmaInvSource(args.e_sigma_inv_source),
        power_q=args.power_q or (),
        threads=args.threads,
    )
    console.print(_bound_table(record))
    if args.out:
        write_json(Path(args.out), record.model_dump(mode="json"))
    return EXIT_OK


def cmd_experiment(args) -> int:
    results = run_config_file(args.config, threads=args.threads, progress=args.progress)
    for result in results:
        if isinstance(result, LemmaSuiteReport):
            console.print(_lemma_table(result))
    if any_lemma_failure(results):
        return EXIT_LEMMA_FAILURE
    console.print(f"✅ {len(results)} experiment(s) finished")
    return EXIT_OK


def cmd_lemma_suite(args) -> int:
    report = run_checks(args.seed, args.self_test_negate, args.check, t=args.t)
    console.print(_lemma_table(report))
    if args.output_dir:
        payload = report.model_dump(mode="json")
        payload.update(passed=report.passed, failed=report.failed_names)
        write_json(Path(args.output_dir) / "lemma_suite.json", payload)
    return EXIT_OK if report.passed else EXIT_LEMMA_FAILURE


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="sketchbound", description="Randomized range finder and error-bound laboratory")
    parser.add_argument("--threads", type=int, default=None, help="Work pool size (default: SKETCHBOUND_THREADS)")
    parser.add_argument("--log-level", type=str, default=None, help="Logging level (default: SKETCHBOUND_LOG_LEVEL)")
    parser.add_argument("--progress", action="store_true", help="Show progress bars")
    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)

    sketch = subparsers.add_parser("sketch", help="Run a range finder or randomized SVD on a matrix file")
    sketch.add_argument("--input", required=True, help="Matrix file (CSV or SKBM binary)")
    sketch.add_argument("--format", choices=FORMATS, default=None, help="Input format (default: from extension)")
    sketch.add_argument("--k", type=int, required=True)
    sketch.add_argument("--p", type=int, default=0)
    sketch.add_argument("--q", type=int, default=0)
    sketch.add_argument("--seed", type=int, default=0)
    sketch.add_argument("--algorithm", choices=("auto", "range", "svd", "power"), default="auto")
    sketch.add_argument("--stabilizer", choices=("qr", "columns", "none"), default="qr")
    sketch.add_argument("--strict", action="store_true", help="Fail on rank-deficient sketches")
    sketch.add_argument("--bound-trials", type=int, default=bounds.DEFAULT_MC_TRIALS)
    sketch.add_argument("--e-sigma-inv-source", choices=[s.value for s in ESigmaInvSource], default="monte_carlo")
    sketch.add_argument("--report", type=str, default=None, help="Write the residual report JSON here")
    sketch.set_defaults(handler=cmd_sketch)

    sample = subparsers.add_parser("sample-w", help="Sample the worst-case error W")
    sample.add_argument("--n", type=int, required=True)
    sample.add_argument("--k", type=int, required=True)
    sample.add_argument("--p", type=int, required=True)
    sample.add_argument("--trials", type=int, default=1000)
    sample.add_argument("--seed", type=int, default=0)
    sample.add_argument("--tail", type=str, default="ones", help="Tail spectrum file, or 'ones'")
    sample.add_argument("--method", choices=worstcase.METHODS, default="auto")
    sample.add_argument("--out", type=str, default=None, help="CSV of draws (JSON summary alongside)")
    sample.set_defaults(handler=cmd_sample_w)

    bound = subparsers.add_parser("bounds", help="Evaluate every bound for (m, n, k, p)")
    bound.add_argument("--m", type=int, required=True)
    bound.add_argument("--n", type=int, required=True)
    bound.add_argument("--k", type=int, required=True)
    bound.add_argument("--p", type=int, required=True)
    bound.add_argument("--trials", type=int, default=bounds.DEFAULT_MC_TRIALS)
    bound.add_argument("--seed", type=int, default=0)
    bound.add_argument("--e-sigma-inv-source", choices=[s.value for s in ESigmaInvSource], default="monte_carlo")
    bound.add_argument("--power-q", type=int, action="append", help="Add proxy^(1/(2q+1)); repeatable")
    bound.add_argument("--out", type=str, default=None, help="Write the bound set JSON here")
    bound.set_defaults(handler=cmd_bounds)

    experiment = subparsers.add_parser("experiment", help="Run every experiment in a TOML config")
    experiment.add_argument("--config", required=True)
    experiment.set_defaults(handler=cmd_experiment)

    lemma = subparsers.add_parser("lemma-suite", help="Run the property checks")
    lemma.add_argument("--seed", type=int, default=0)
    lemma.add_argument("--self-test-negate", action="store_true", help="Swap operands in monotonicity checks")
    lemma.add_argument("--check", action="append", choices=list(LEMMA_CHECKS), help="Run only these; repeatable")
    lemma.add_argument("--t", type=float, default=DEFAULT_LIMIT_T, help="Scale of M(t) in the limit checks")
    lemma.add_argument("--output-dir", type=str, default=None, help="Write lemma_suite.json here")
    lemma.set_defaults(handler=cmd_lemma_suite)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_level)
    if args.threads is not None and args.threads < 1:
        parser.error("--threads must be >= 1")
    if args.threads is None:
        args.threads = get_settings().worker_count

    try:
        return args.handler(args)
    except InvalidParameter as e:
        console.print(f"❌ {e}")
        return EXIT_USAGE
    except SketchboundError as e:
        console.print(f"❌ Numerical failure: {e}")
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
