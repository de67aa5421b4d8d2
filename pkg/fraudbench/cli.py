# Copyright 2026 The fraudbench Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Command-line entry point: ``fraudbench {bench,models,fit,score,synth,plots}``."""

import argparse
import logging
import os
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any

import pandas as pd
import yaml

from fraudbench.bench import eval_settings, load_report, model_params, run_benchmark
from fraudbench.config import BenchmarkConfig, load_config, parse_config
from fraudbench.data import load_csv, synth_generate, write_csv
from fraudbench.errors import ConfigError, FraudBenchError
from fraudbench.eval import fit_pipeline
from fraudbench.persistence import FittedPipeline, load_pipeline, save_pipeline
from fraudbench.plots import emit_plots
from fraudbench.registry import MODELS, get_spec, model_seed
from fraudbench.utils.tracing import configure_tracing

logger = logging.getLogger(__name__)

LOG_LEVEL_ENV = "FRAUDBENCH_LOG_LEVEL"


def parse_assignments(items: Sequence[str]) -> dict[str, Any]:
    """``key=value`` pairs; values are read as YAML scalars (numbers, bools)."""
    out: dict[str, Any] = {}
    for item in items:
        for part in item.split(","):
            key, sep, value = part.partition("=")
            if not sep or not key.strip():
                raise ConfigError(f"expected key=value, got {part!r}")
            out[key.strip()] = yaml.safe_load(value)
    return out


def _bench_config(args: argparse.Namespace) -> BenchmarkConfig:
    payload: dict[str, Any] = (
        load_config(args.config).model_dump(mode="json") if args.config else {}
    )
    if args.seed is not None:
        payload["seed"] = args.seed
    if args.dataset:
        payload["dataset"], payload["synthetic"] = args.dataset, None
    if args.synthetic is not None:
        payload["synthetic"], payload["dataset"] = parse_assignments(args.synthetic), None
    if args.models:
        payload["models"] = [{"name": name} for name in args.models]
    if args.search:
        models = payload.get("models") or [{"name": spec.name} for spec in MODELS]
        payload["models"] = [{**entry, "search": True} for entry in models]
    if args.out:
        payload["output_dir"] = args.out
    if args.n_jobs is not None:
        payload["n_jobs"] = args.n_jobs
    return parse_config(payload)


def cmd_bench(args: argparse.Namespace) -> int:
    config = _bench_config(args)
    report = run_benchmark(config)
    for result in report.results:
        status = f"{result.pooled_auroc:.4f}" if result.pooled_auroc is not None else f"FAILED ({result.error})"
        print(f"{result.model:>6} [{result.track}] AUROC {status}")
    for track, mean in report.track_means.items():
        print(f"{track} mean AUROC {mean:.4f}")
    if report.supervised_beats_unsupervised is not None:
        verdict = "yes" if report.supervised_beats_unsupervised else "no"
        print(f"supervised >= unsupervised: {verdict}")
    return 0


def cmd_models(args: argparse.Namespace) -> int:
    for spec in MODELS:
        print(f"{spec.name:>6} [{spec.track}] {spec.description}")
        if args.verbose:
            print(f"         defaults: {dict(spec.defaults)}")
            print(f"         grid: {dict(spec.grid)}")
    return 0


def cmd_fit(args: argparse.Namespace) -> int:
    spec = get_spec(args.model)
    config = parse_config(
        {"dataset": args.data, "seed": args.seed, "models": [{"name": spec.name}]}
    )
    data = load_csv(args.data, schema=None)
    params = model_params(config, spec.name, parse_assignments(args.param))
    fit = fit_pipeline(
        spec, data, params, model_seed(args.seed, spec.name), eval_settings(config)
    )
    pipeline = FittedPipeline(fit.scaler, fit.columns, spec.track, fit.model)
    save_pipeline(pipeline, args.out)
    print(f"Saved {spec.name} pipeline to {args.out}")
    return 0


def cmd_score(args: argparse.Namespace) -> int:
    pipeline = load_pipeline(args.model)
    data = load_csv(args.data, schema=None)
    scores = pipeline.score(data)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame({"row": range(1, data.n_rows + 1), "score": scores}).to_csv(out, index=False)
    print(f"Scored {data.n_rows} rows with {pipeline.model.kind}; wrote {out}")
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    data = synth_generate(args.n_normal, args.n_fraud, args.separation, args.dims, args.seed)
    write_csv(data, args.out)
    print(f"Wrote {data.n_rows} synthetic rows to {args.out}")
    return 0


def cmd_plots(args: argparse.Namespace) -> int:
    report = load_report(args.report)
    for name, path in emit_plots(report, args.out).items():
        print(f"{name}: {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fraudbench",
        description="Supervised and unsupervised credit-card fraud detection benchmark.",
    )
    parser.add_argument(
        "--log-level",
        default=os.environ.get(LOG_LEVEL_ENV, "INFO"),
        help=f"logging level (default: ${LOG_LEVEL_ENV} or INFO)",
    )
    parser.add_argument("--trace", action="store_true", help="print OpenTelemetry spans to stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    bench = sub.add_parser("bench", help="cross-validate the configured models")
    bench.add_argument("--config", help="YAML benchmark config")
    bench.add_argument("--out", help="output directory (overrides output_dir)")
    bench.add_argument("--seed", type=int, help="master seed (overrides the config)")
    bench.add_argument("--dataset", help="creditcard.csv path (overrides the config)")
    bench.add_argument(
        "--synthetic",
        nargs="*",
        metavar="KEY=VALUE",
        help="use synthetic data, e.g. n_normal=3000 n_fraud=300 separation=4 dims=8",
    )
    bench.add_argument(
        "--models", nargs="+", choices=[s.name for s in MODELS], help="subset of models to run"
    )
    bench.add_argument("--n-jobs", type=int, help="parallel folds")
    bench.add_argument(
        "--search",
        action="store_true",
        help="grid-search each model over its shipped grid unless the config gives one",
    )
    bench.set_defaults(func=cmd_bench)

    models = sub.add_parser("models", help="list the benchmarked models")
    models.add_argument("-v", "--verbose", action="store_true", help="also show defaults and grids")
    models.set_defaults(func=cmd_models)

    fit = sub.add_parser("fit", help="fit one model on a whole CSV and save the pipeline")
    fit.add_argument("--model", required=True, choices=[s.name for s in MODELS])
    fit.add_argument("--data", required=True)
    fit.add_argument("--out", required=True, help="model file to write")
    fit.add_argument("--seed", type=int, default=0)
    fit.add_argument("--param", nargs="*", default=[], metavar="KEY=VALUE")
    fit.set_defaults(func=cmd_fit)

    score = sub.add_parser("score", help="score a CSV with a saved pipeline")
    score.add_argument("--model", required=True, help="model file written by 'fit'")
    score.add_argument("--data", required=True)
    score.add_argument("--out", required=True, help="CSV of row scores")
    score.set_defaults(func=cmd_score)

    synth = sub.add_parser("synth", help="generate a Gaussian stand-in dataset")
    synth.add_argument("--n-normal", type=int, default=5000)
    synth.add_argument("--n-fraud", type=int, default=500)
    synth.add_argument("--separation", type=float, default=4.0)
    synth.add_argument("--dims", type=int, default=30)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--out", required=True)
    synth.set_defaults(func=cmd_synth)

    plots = sub.add_parser("plots", help="re-draw the figures from a report.json")
    plots.add_argument("--report", required=True)
    plots.add_argument("--out", required=True)
    plots.set_defaults(func=cmd_plots)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Runs one subcommand.

    Args:
        argv: arguments without the program name; ``sys.argv[1:]`` when None.

    Returns:
        0 on success, 1 on any FraudBenchError (argparse exits 2 itself).
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=str(args.log_level).upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    configure_tracing(console=args.trace)
    try:
        return int(args.func(args))
    except FraudBenchError as exc:
        logger.error(str(exc))
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
