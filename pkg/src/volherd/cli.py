"""Command-line entry point: ``volherd {simulate,sweep,analyze,reproduce}``.

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .exceptions import ConfigurationError, VolherdError
from .experiment import (
    FIGURES,
    RunConfig,
    analyze_path,
    reproduce_figures,
    run_simulation,
    sweep,
)
from .experiment.config import DEFAULTS, RECORD_POLICIES, STREAM_FORMATS, read_config_file
from .experiment.runner import clean_for_json, summary_text
from .experiment.sweep import SWEEP_AXES
from .model.params import SECOND_CLUSTER_MODES

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2

log = logging.getLogger("volherd")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: usage error: {message}\n")


def _model_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("model (override the config file)")
    g.add_argument("--config", type=Path, help="JSON config file with the same keys as these flags")
    g.add_argument("--kernel", choices=("rational", "exponential"),
                   help=f"trading-probability kernel (default {DEFAULTS['kernel']})")
    g.add_argument("--b", type=float, help=f"rational-kernel coupling (default {DEFAULTS['b']})")
    g.add_argument("--c", type=float, help=f"exponential-kernel prefactor, 0 < c <= 1 (default {DEFAULTS['c']})")
    g.add_argument("--d", type=float, help=f"exponential-kernel rate (default {DEFAULTS['d']})")
    g.add_argument("--A", type=float, help=f"price-impact saturation constant (default {DEFAULTS['A']})")
    g.add_argument("--M", "--agents", dest="M", type=int, help=f"number of agents (default {DEFAULTS['M']})")
    g.add_argument("--seed", type=int, help=f"RNG seed (default {DEFAULTS['seed']})")
    g.add_argument("--second-cluster", dest="second_cluster", choices=SECOND_CLUSTER_MODES,
                   help="how the partner cluster of a trade is drawn (default uniform)")
    r = p.add_argument_group("run")
    r.add_argument("--warmup", type=int, help=f"equilibration steps (default {DEFAULTS['warmup']})")
    r.add_argument("--steps", type=int, help=f"measurement steps (default {DEFAULTS['steps']})")
    r.add_argument("--record-policy", dest="record_policy", choices=RECORD_POLICIES,
                   help="rows in the event file: one per trade or one per step (default trades)")
    r.add_argument("--stream-format", dest="stream_format", choices=STREAM_FORMATS,
                   help="event file format (default text)")
    r.add_argument("--output-dir", dest="output_dir", type=Path, help="directory for run artifacts")
    r.add_argument("--checkpoint-interval", dest="checkpoint_interval", type=int,
                   help="steps between checkpoints; enables resume")
    _analysis_flags(p)


def _analysis_flags(p: argparse.ArgumentParser) -> None:
    a = p.add_argument_group("analysis")
    a.add_argument("--bins-per-decade", dest="bins_per_decade", type=int,
                   help=f"log-histogram resolution (default {DEFAULTS['bins_per_decade']})")
    a.add_argument("--min-count", dest="min_count", type=int,
                   help=f"events per bin for the automatic fit window (default {DEFAULTS['min_count']})")
    a.add_argument("--min-decades", dest="min_decades", type=float,
                   help=f"minimum fit window width (default {DEFAULTS['min_decades']})")
    a.add_argument("--min-r-squared", dest="min_r_squared", type=float,
                   help=f"minimum log-log r^2 of a fit window (default {DEFAULTS['min_r_squared']})")
    a.add_argument("--acf-max-lag", dest="acf_max_lag", type=int,
                   help=f"largest ACF lag (default {DEFAULTS['acf_max_lag']})")
    a.add_argument("--acf-fit-lower", dest="acf_fit_lower", type=int,
                   help=f"first lag of the ACF fit (default {DEFAULTS['acf_fit_lower']})")
    a.add_argument("--acf-fit-upper", dest="acf_fit_upper", type=int,
                   help=f"last lag of the ACF fit (default {DEFAULTS['acf_fit_upper']})")
    a.add_argument("--relation-tolerance", dest="relation_tolerance", type=float,
                   help=f"tolerance of the exponent relation check (default {DEFAULTS['relation_tolerance']})")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    common.add_argument("--json-summary", action="store_true",
                        help="print the summary as JSON on standard output")
    parser = _Parser(prog="volherd", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", parents=[common], help="run one simulation and write its artifacts")
    _model_flags(p)

    p = sub.add_parser("sweep", parents=[common], help="run one simulation per value of a parameter")
    _model_flags(p)
    p.add_argument("--axis", required=True, choices=SWEEP_AXES, help="parameter to vary")
    p.add_argument("--values", required=True, help="comma-separated parameter values")
    p.add_argument("--jobs", type=int, default=1, help="parallel child processes (default 1)")

    p = sub.add_parser("analyze", parents=[common], help="recompute statistics from a saved event stream")
    p.add_argument("--input", required=True, type=Path, help="event file or run directory")
    p.add_argument("--output-dir", dest="output_dir", type=Path,
                   help="where to write histograms, ACF and summary")
    _analysis_flags(p)

    p = sub.add_parser("reproduce", parents=[common], help="write the data series for the figure targets")
    p.add_argument("--figure", default="all", choices=FIGURES + ("all",), help="figure to build")
    p.add_argument("--scale", default="desk", choices=("desk", "full"),
                   help="desk: M=40000, 1e7 steps; full: M=80000, 1e8 steps")
    p.add_argument("--output-dir", dest="output_dir", type=Path, default=Path("figures"))
    p.add_argument("--seed", type=int, default=0)
    return parser


ANALYSIS_KEYS = ("bins_per_decade", "min_count", "min_decades", "min_r_squared", "acf_max_lag",
                 "acf_fit_lower", "acf_fit_upper", "relation_tolerance")
RUN_KEYS = tuple(k for k in DEFAULTS)


def config_from_args(args) -> RunConfig:
    base = read_config_file(args.config) if getattr(args, "config", None) else {}
    overrides = {k: getattr(args, k) for k in RUN_KEYS if getattr(args, k, None) is not None}
    if "output_dir" in overrides:
        overrides["output_dir"] = str(overrides["output_dir"])
    return RunConfig.from_flat({**base, **overrides})


def _emit(summary: dict, as_json: bool) -> None:
    if as_json:
        json.dump(clean_for_json(summary), sys.stdout, indent=2, sort_keys=True, default=str)
        sys.stdout.write("\n")
    else:
        sys.stdout.write(summary_text(summary))


def dispatch(args) -> int:
    if args.command == "simulate":
        config = config_from_args(args)
        art = run_simulation(config)
        if art.output_dir is not None:
            log.info("artifacts written to %s", art.output_dir)
        _emit(art.summary, args.json_summary)
    elif args.command == "sweep":
        config = config_from_args(args)
        values = [v.strip() for v in args.values.split(",") if v.strip()]
        cast = int if args.axis in ("M", "seed") else float
        try:
            values = [cast(v) for v in values]
        except ValueError as exc:
            raise ConfigurationError(f"bad --values: {exc}") from exc
        rows = sweep(config, args.axis, values, n_jobs=args.jobs)
        if args.json_summary:
            _emit({"rows": rows}, True)
        else:
            for row in rows:
                sys.stdout.write(
                    f"{row['axis']}={row['value']}\t{row['status']}\txi_V={row['xi_V']}\t"
                    f"xi_N={row['xi_N']}\txi_r={row['xi_abs_r']}\tlambda={row['lambda']}\n")
        if any(row["status"] != "ok" for row in rows):
            return EXIT_RUNTIME
    elif args.command == "analyze":
        cfg = None
        given = {k: getattr(args, k) for k in ANALYSIS_KEYS if getattr(args, k) is not None}
        if given:
            cfg = RunConfig.from_flat(given).analysis
        analysis = analyze_path(args.input, args.output_dir, cfg)
        _emit(analysis.summary(), args.json_summary)
    elif args.command == "reproduce":
        figures = FIGURES if args.figure == "all" else (args.figure,)
        out = reproduce_figures(figures, args.scale, args.output_dir, args.seed)
        _emit({f.figure: f.metadata for f in out}, args.json_summary)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return dispatch(args)
    except ConfigurationError as exc:
        print(f"volherd: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (VolherdError, OSError) as exc:
        print(f"volherd: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
