"""
experiment: reproduce the risk, interval and runtime tables.
"""

from argparse import Namespace
import logging

from spicereg.commands.common import execute, parse_int_list
from spicereg.config import get_settings
from spicereg.models import ExperimentId, PredictorName
from spicereg.services.experiment_service import format_table, preset, run_experiment, write_report

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("experiment", help="Run a Monte Carlo study and write a report directory")
    parser.add_argument("experiment", choices=[e.value for e in ExperimentId])
    parser.add_argument("--replications", type=int, default=None)
    parser.add_argument("--n-grid", default=None, help="Comma-separated sample sizes")
    parser.add_argument("--predictors", default=None, help="Comma-separated subset of spice,ridge,lasso")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--cycles", type=int, default=None, help="SPICE cycles L")
    parser.add_argument("--kappa-cov", type=float, default=None)
    parser.add_argument("--n-test", type=int, default=None, help="Fresh evaluation rows per replication")
    parser.add_argument("--jobs", type=int, default=None, help="Worker processes (-1: all cores)")
    parser.add_argument("--presets", default=None, help="Alternative presets JSON")
    parser.add_argument("--out", default=None, help="Report directory (default reports/<experiment>)")
    parser.set_defaults(handler=handle)


def run(args: Namespace) -> int:
    experiment = ExperimentId(args.experiment)
    config = preset(
        experiment,
        data_path=args.presets,
        replications=args.replications,
        n_grid=parse_int_list(args.n_grid, "n-grid") if args.n_grid else None,
        predictors=[PredictorName(p.strip()) for p in args.predictors.split(",")] if args.predictors else None,
        seed=args.seed,
        cycles=args.cycles,
        kappa_cov=args.kappa_cov,
        n_test=args.n_test,
        n_jobs=args.jobs if args.jobs is not None else get_settings().N_JOBS,
        output_dir=args.out,
    )
    output_dir = config.output_dir or f"reports/{experiment.value}"

    logger.info(f"Running {experiment.value}: {config.replications} replications over n={config.n_grid}")
    report, residuals = run_experiment(config)
    write_report(report, residuals, output_dir)
    print(format_table(report), end="")
    return 0


def handle(args: Namespace) -> int:
    return execute(run, args)
