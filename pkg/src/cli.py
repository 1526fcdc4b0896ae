#!/usr/bin/env python3
"""
glod-bench command line
Benchmarks, sweeps, diagnostics, simulations and flip tables from one entry point
"""

import argparse
import logging
import os
import sys
import traceback
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd
from dotenv import load_dotenv

from core.dataset_registry import dataset_kind, resolve_dataset
from core.errors import GlodError, ParameterError, UsageError
from core.io_utils import write_frame, write_json
from core.provenance import build_manifest, dataset_fingerprint
from kernels.kernel_cache import KernelCache
from bench.benchmark_runner import (
    DEFAULT_ITERATIONS, DEFAULT_RATES, FEATURE_MODES, run_benchmark, sweep_iterations, sweep_rate,
)
from bench.downsampling import require_binary
from bench.flip_report import UNCLASSIFIED, flip_report, flip_table, reports_from_results
from bench.method_spec import MethodSpec, parse_method
from diagnostics.diagnostic_report import GROUPINGS, full_diagnostic, write_bundle
from sim.sparsification_lab import SimConfig, curves_to_frame, run_simulation, vary_k_curve

logger = logging.getLogger("glod")


@dataclass
class RunConfig:
    """Everything a command was run with; echoed into its manifest"""
    command: str
    output: str
    dataset: Optional[str] = None
    method: Optional[str] = None
    L: Optional[int] = None
    w: Optional[float] = None
    rate: Optional[float] = None
    dc: Optional[List[int]] = None
    seeds: Optional[List[int]] = None
    k: Optional[int] = None
    mode: Optional[str] = None
    jobs: int = 1
    cache_dir: Optional[str] = None
    extra: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        record = asdict(self)
        extra = record.pop("extra")
        record.update(extra)
        return {key: value for key, value in record.items() if value is not None}


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def int_list(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def float_list(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def seed_list(text: str) -> List[int]:
    """'10' means seeds 0..9; '3,7' lists seeds explicitly"""
    values = int_list(text)
    if "," in text:
        return values
    if len(values) != 1 or values[0] < 1:
        raise argparse.ArgumentTypeError(f"--seeds needs a positive count or a list, got {text!r}")
    return list(range(values[0]))


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--out", help="Output directory (default: results/<command>)")
    parser.add_argument("--data-dir", help="Folder of TU datasets (default: $GLOD_DATA_DIR)")
    parser.add_argument("--cache-dir", help="Kernel cache folder (default: $GLOD_CACHE_DIR)")
    parser.add_argument("--no-cache", action="store_true", help="Disable the kernel cache")
    parser.add_argument("--jobs", type=int, default=1, help="Parallel workers (default: 1)")
    parser.add_argument("--verbose", action="store_true", help="Debug logging")


def _add_method(parser: argparse.ArgumentParser, default_method: str = "wl+lof"):
    parser.add_argument("--dataset", required=True,
                        help="Registry name (e.g. DD, IMDB-BINARY, ENZYMES-c0c1) or TU directory")
    parser.add_argument("--method", default=default_method,
                        help="<wl|pk|fgsd>+<lof|ocsvm|iforest> (default: %(default)s)")
    parser.add_argument("--L", type=int, default=5, help="Propagation iterations (default: 5)")
    parser.add_argument("--w", type=float, default=0.1, help="PK bin width (default: 0.1)")
    parser.add_argument("--pk-seed", type=int, default=0, help="PK hash seed (default: 0)")
    parser.add_argument("--k", type=int, default=20, help="LOF / diagnostics neighbors (default: 20)")
    parser.add_argument("--nu", type=float, default=0.1, help="OCSVM nu (default: 0.1)")
    parser.add_argument("--trees", type=int, default=100, help="Isolation Forest trees")
    parser.add_argument("--subsample", type=int, default=256, help="Isolation Forest subsample")
    parser.add_argument("--bins", type=int, default=200, help="FGSD histogram bins")
    parser.add_argument("--range-max", type=float, default=20.0, help="FGSD histogram range")
    parser.add_argument("--laplacian", choices=["combinatorial", "normalized"],
                        default="combinatorial", help="FGSD Laplacian")


def _add_benchmark(parser: argparse.ArgumentParser):
    parser.add_argument("--rate", type=float, default=0.1, help="Down-sampling rate (default: 0.1)")
    parser.add_argument("--seeds", type=seed_list, default=list(range(10)),
                        help="Seed count (10 -> 0..9) or comma list (default: 10)")
    parser.add_argument("--mode", choices=FEATURE_MODES, default="recompute",
                        help="Features per variant (recompute) or sliced from full data")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="glod-bench",
        description="glod-bench - performance flip benchmarks for graph-level outlier detection",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  glod-bench bench --dataset DD --method wl+lof --L 5 --rate 0.1 --dc 0 --seeds 10
  glod-bench sweep-iters --dataset DD --method wl+lof --iters 1,3,5,7,9,11
  glod-bench diag --dataset DD --method wl --iters 1,2,3,4,5
  glod-bench sim --case 1 --n 50 --k 5 --m 1,2,5,10 --iters 10 --rounds 100
  glod-bench flip-table --results results/
        """,
    )
    commands = parser.add_subparsers(dest="command", metavar="COMMAND")
    commands.required = True

    bench = commands.add_parser("bench", help="Mean ROC-AUC over down-sampled variants")
    _add_method(bench)
    _add_benchmark(bench)
    bench.add_argument("--dc", default="both", help="Down-sampled class: 0, 1 or both (default)")
    _add_common(bench)

    rate = commands.add_parser("sweep-rate", help="AUC as a function of the down-sampling rate")
    _add_method(rate)
    _add_benchmark(rate)
    rate.add_argument("--rates", type=float_list, default=list(DEFAULT_RATES),
                      help="Comma list of rates (default: 0.05,0.1,0.2,0.4,0.6,0.85)")
    rate.add_argument("--dc", default="both", help="Down-sampled class: 0, 1 or both (default)")
    _add_common(rate)

    iters = commands.add_parser("sweep-iters", help="AUC gap as a function of iterations")
    _add_method(iters)
    _add_benchmark(iters)
    iters.add_argument("--iters", type=int_list, default=list(DEFAULT_ITERATIONS),
                       help="Comma list of L values (default: 1..11)")
    _add_common(iters)

    diag = commands.add_parser("diag", help="Similarity, MDS, NN-Radius and NN-Disagreement bundles")
    _add_method(diag, default_method="wl")
    diag.add_argument("--iters", type=int_list, default=[1, 2, 3, 4, 5],
                      help="Comma list of iterations (default: 1..5)")
    diag.add_argument("--grouping", choices=GROUPINGS, default="class",
                      help="Class labels on full data or inlier/outlier flags of a variant")
    diag.add_argument("--dc", type=int, default=0, help="Down-sampled class for variant grouping")
    diag.add_argument("--rate", type=float, default=0.1, help="Rate for variant grouping")
    diag.add_argument("--seed", type=int, default=0, help="Seed for variant grouping")
    diag.add_argument("--per-iteration", action="store_true",
                      help="Use each iteration's own normalized slice instead of the cumulative kernel")
    _add_common(diag)

    sim = commands.add_parser("sim", help="k-regular perturbation simulations (WL distance curves)")
    sim.add_argument("--case", type=int, choices=[1, 2], required=True,
                     help="1: label flips, 2: edge rewiring")
    sim.add_argument("--n", type=int, default=50, help="Nodes (default: 50)")
    sim.add_argument("--k", type=int_list, default=[5],
                     help="Degree, or comma list of degrees for a vary-k run (default: 5)")
    sim.add_argument("--m", type=int_list, help="Label flips per copy (case 1)")
    sim.add_argument("--r", type=int_list, help="Edge pairs rewired (case 2)")
    sim.add_argument("--iters", type=int, default=10, help="Maximum WL iteration (default: 10)")
    sim.add_argument("--rounds", type=int, default=100, help="Rounds averaged (default: 100)")
    sim.add_argument("--seed", type=int, default=0, help="Experiment seed (default: 0)")
    _add_common(sim)

    table = commands.add_parser("flip-table", help="Consolidate summary.csv files into a flip table")
    table.add_argument("--results", required=True, help="Directory searched for summary.csv files")
    _add_common(table)
    return parser


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _classes(value) -> List[int]:
    if isinstance(value, int):
        return [value]
    text = str(value).strip().lower()
    if text == "both":
        return [0, 1]
    if text in ("0", "1"):
        return [int(text)]
    raise UsageError(f"--dc must be 0, 1 or both, got {value!r}")


def _method_from_args(args) -> MethodSpec:
    text = args.method if "+" in args.method else f"{args.method}+lof"
    return parse_method(text, L=args.L, w=args.w, pk_seed=args.pk_seed, k=args.k, nu=args.nu,
                        trees=args.trees, subsample=args.subsample, bins=args.bins,
                        range_max=args.range_max, laplacian=args.laplacian)


def _cache_from_args(args) -> Optional[KernelCache]:
    if args.no_cache:
        return None
    directory = args.cache_dir or os.environ.get("GLOD_CACHE_DIR")
    return KernelCache(directory) if directory else None


def _output_dir(args) -> Path:
    return Path(args.out) if args.out else Path("results") / args.command


def _finish(config: RunConfig, outputs: Sequence[Path], inputs: Optional[Dict[str, str]] = None):
    out = Path(config.output)
    manifest = build_manifest(config.command, config.to_dict(), [p.name for p in outputs],
                              inputs=inputs)
    write_json(manifest, out / "manifest.json")
    print(f"✅ Wrote {len(outputs)} file(s) and manifest.json to {out}")


def _binary_dataset(args):
    dataset = resolve_dataset(args.dataset, args.data_dir)
    try:
        require_binary(dataset)
    except ParameterError as e:
        raise UsageError(str(e)) from e
    return dataset


def cmd_bench(args, config: RunConfig, spec: MethodSpec) -> int:
    dataset = _binary_dataset(args)
    cache = _cache_from_args(args)
    print(f"📊 {dataset.name}: {len(dataset)} graphs, classes {dataset.class_sizes()}")

    results = []
    for dc in config.dc:
        result = run_benchmark(dataset, spec, dc, args.rate, config.seeds, args.mode, cache,
                               n_jobs=args.jobs)
        results.append(result)
        print(f"   {spec.name} dc={dc}: AUC {result.mean_auc:.3f} ({result.std:.3f})")

    out = _output_dir(args)
    outputs = [
        write_frame(pd.concat([r.results_frame() for r in results], ignore_index=True),
                    out / "results.csv"),
        write_frame(reports_from_results(results), out / "summary.csv"),
    ]
    if len(results) == 2:
        report = flip_report(results)
        outputs.append(write_frame(pd.DataFrame([report.row()]), out / "flip_table.csv"))
        print(f"   gap {report.gap:.3f}, sum {report.auc_sum:.3f}: {report.classification.value}")
    if cache is not None:
        config.extra["cache_hits"] = cache.hits
    _finish(config, outputs, {dataset.name: dataset_fingerprint(dataset)})
    return 0


def cmd_sweep_rate(args, config: RunConfig, spec: MethodSpec) -> int:
    dataset = _binary_dataset(args)
    frame = sweep_rate(dataset, spec, args.rates, config.dc, config.seeds, args.mode,
                       _cache_from_args(args), args.jobs)
    for (dc, group) in frame.groupby("dc"):
        spread = group["mean_auc"].max() - group["mean_auc"].min()
        print(f"   dc={dc}: AUC range over rates {spread:.3f}")
    out = _output_dir(args)
    outputs = [write_frame(frame, out / "sweep_rate.csv")]
    _finish(config, outputs, {dataset.name: dataset_fingerprint(dataset)})
    return 0


def cmd_sweep_iters(args, config: RunConfig, spec: MethodSpec) -> int:
    dataset = _binary_dataset(args)
    frame = sweep_iterations(dataset, spec, args.iters, args.rate, config.seeds, args.mode,
                             _cache_from_args(args), args.jobs)
    for row in frame.itertuples():
        print(f"   L={row.L}: AUC0 {row.auc0:.3f}, AUC1 {row.auc1:.3f}, gap {row.gap:.3f}")
    out = _output_dir(args)
    outputs = [write_frame(frame, out / "sweep_iterations.csv")]
    _finish(config, outputs, {dataset.name: dataset_fingerprint(dataset)})
    return 0


def cmd_diag(args, config: RunConfig, spec: MethodSpec) -> int:
    dataset = resolve_dataset(args.dataset, args.data_dir)
    report = full_diagnostic(dataset, spec, args.iters, grouping=args.grouping, k=args.k,
                             dc=args.dc, rate=args.rate, seed=args.seed,
                             cumulative=not args.per_iteration, cache=_cache_from_args(args))
    report.config["run"] = config.to_dict()
    for row in report.group_means("nn_radius").itertuples():
        print(f"   L={row.iteration} group {row.group}: mean NN-Radius {row.mean:.3f}")
    written = write_bundle(report, _output_dir(args))
    print(f"✅ Wrote {len(written)} diagnostic file(s) to {_output_dir(args)}")
    return 0


def cmd_sim(args, config: RunConfig) -> int:
    magnitudes = args.m if args.case == 1 else args.r
    flag = "--m" if args.case == 1 else "--r"
    if not magnitudes:
        raise UsageError(f"case {args.case} needs {flag}")
    if len(args.k) > 1:
        if len(magnitudes) != 1:
            raise UsageError(f"a vary-k run takes a single {flag} value")
        curves = list(vary_k_curve(args.n, args.k, magnitudes[0], case=args.case,
                                   iterations=args.iters, rounds=args.rounds, seed=args.seed,
                                   n_jobs=args.jobs).values())
    else:
        sim_config = SimConfig(n=args.n, k=args.k[0], case=args.case, magnitudes=magnitudes,
                               iterations=args.iters, rounds=args.rounds, seed=args.seed)
        curves = run_simulation(sim_config, n_jobs=args.jobs)

    for curve in curves:
        print(f"   k={curve.k} magnitude={curve.magnitude}: distance at L={args.iters} "
              f"{curve.mean[-1]:.4f} ({curve.std[-1]:.4f})")
    out = _output_dir(args)
    outputs = [write_frame(curves_to_frame(curves), out / f"sim_case{args.case}.csv")]
    _finish(config, outputs)
    return 0


def cmd_flip_table(args, config: RunConfig) -> int:
    root = Path(args.results)
    files = sorted(root.rglob("summary.csv"))
    if not files:
        raise UsageError(f"no summary.csv found under {root}")
    summary = pd.concat([pd.read_csv(path) for path in files], ignore_index=True)
    kinds = {name: (dataset_kind(name).value if dataset_kind(name) else "unknown")
             for name in summary["dataset"].unique()}
    table, aggregates = flip_table(summary, kinds)

    for row in aggregates.itertuples():
        print(f"   {row.scope}: {row.cases} cases, gap>=0.2 {row.gap_ge_0_2:.1%}, "
              f"gap>=0.3 {row.gap_ge_0_3:.1%}, gap>=0.4 {row.gap_ge_0_4:.1%}")
    unclassified = int(table["classification"].isin(UNCLASSIFIED).sum())
    if unclassified:
        print(f"⚠️  {unclassified} cell(s) lack a variant or hold conflicting runs")

    out = _output_dir(args)
    outputs = [write_frame(table, out / "flip_table.csv"),
               write_frame(aggregates, out / "flip_aggregates.csv")]
    config.extra["summaries"] = [str(p) for p in files]
    _finish(config, outputs)
    return 0


def _configure(args) -> RunConfig:
    config = RunConfig(command=args.command, output=str(_output_dir(args)), jobs=args.jobs,
                       cache_dir=None if args.no_cache else (args.cache_dir
                                                             or os.environ.get("GLOD_CACHE_DIR")))
    if args.jobs < 1:
        raise UsageError(f"--jobs must be >= 1, got {args.jobs}")
    if args.command in ("bench", "sweep-rate", "sweep-iters", "diag"):
        config.dataset = args.dataset
        config.L, config.w, config.k = args.L, args.w, args.k
    if args.command in ("bench", "sweep-rate", "sweep-iters"):
        config.rate, config.seeds, config.mode = args.rate, args.seeds, args.mode
        config.dc = _classes(args.dc) if args.command != "sweep-iters" else [0, 1]
    if args.command == "diag":
        config.dc = [args.dc]
        config.extra.update(iterations=args.iters, grouping=args.grouping,
                            per_iteration=args.per_iteration)
    if args.command == "sweep-rate":
        config.extra["rates"] = args.rates
    if args.command == "sweep-iters":
        config.extra["iterations"] = args.iters
    if args.command == "sim":
        config.extra.update(case=args.case, n=args.n, degrees=args.k, m=args.m, r=args.r,
                            iterations=args.iters, rounds=args.rounds, seed=args.seed)
    if args.command == "flip-table":
        config.extra["results"] = args.results
    return config


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command; returns 0 on success, 2 on usage errors, 1 on runtime errors"""
    load_dotenv()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    try:
        config = _configure(args)
        spec = None
        if args.command in ("bench", "sweep-rate", "sweep-iters", "diag"):
            spec = _method_from_args(args)
            config.method = spec.name
            config.extra["method_params"] = spec.to_dict()
    except (UsageError, ParameterError) as e:
        print(f"❌ {e}", file=sys.stderr)
        return 2

    print(f"🚀 glod-bench {args.command}")
    try:
        if args.command == "bench":
            return cmd_bench(args, config, spec)
        if args.command == "sweep-rate":
            return cmd_sweep_rate(args, config, spec)
        if args.command == "sweep-iters":
            return cmd_sweep_iters(args, config, spec)
        if args.command == "diag":
            return cmd_diag(args, config, spec)
        if args.command == "sim":
            return cmd_sim(args, config)
        return cmd_flip_table(args, config)
    except UsageError as e:
        print(f"❌ {e}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        print("\n\nInterrupted by user")
        return 1
    except GlodError as e:
        print(f"❌ Error: {e}", file=sys.stderr)
        logger.debug(traceback.format_exc())
        return 1
    except Exception as e:
        print(f"❌ Unexpected error: {e}", file=sys.stderr)
        logger.debug(traceback.format_exc())
        return 1


if __name__ == "__main__":
    sys.exit(main())
