"""
Command-line front end

    python -m orthant_mc fit --data d.csv --intercept --draws 10000 --seed 1 --out report.json

Reports go to stdout (or --out) as JSON; logs go to stderr.
Exit codes: 0 success, 2 validation error, 3 flat-prior propriety rejection.
"""
import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from pydantic import BaseModel, ValidationError

from orthant_mc import __version__
from orthant_mc.config import settings
from orthant_mc.core import runs
from orthant_mc.data.data_loader import load_csv, write_draws_csv
from orthant_mc.models.report import ErrorResponse
from orthant_mc.models.run_config import RunConfig
from orthant_mc.utils.exceptions import EXIT_OK, EXIT_VALIDATION, OrthantMCError
from orthant_mc.utils.logger import get_logger

logger = get_logger(__name__)

def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",")]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from e


def _add_seed_arg(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0, help="64-bit run seed")


def _add_data_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--data", required=True, help="CSV file: y first, then covariates")
    parser.add_argument("--intercept", action="store_true", help="prepend a constant column")
    _add_seed_arg(parser)


def _add_prior_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--prior", choices=["flat", "gaussian"], default="flat")
    parser.add_argument("--q-scale", type=float, help="Gaussian prior covariance tau^2 * I")
    parser.add_argument("--q-file", help="Gaussian prior covariance as a p x p CSV")


def _add_mc_args(parser: argparse.ArgumentParser, draws: bool = True) -> None:
    parser.add_argument("--proposal", dest="N", type=int, default=settings.DEFAULT_PROPOSALS, help="hemisphere proposals N")
    if draws:
        parser.add_argument("--draws", dest="M", type=int, default=settings.DEFAULT_DRAWS, help="posterior draws M")
        parser.add_argument("--s-mode", choices=["fresh", "reuse"], default="fresh")
        parser.add_argument("--resample", choices=["multinomial", "systematic"], default="multinomial")
    parser.add_argument("--threads", type=int, help=f"worker threads (default ORTHANT_MC_THREADS={settings.THREADS})")


def _add_output_args(parser: argparse.ArgumentParser, draws_out: bool = False) -> None:
    parser.add_argument("--out", help="write the JSON report here instead of stdout")
    if draws_out:
        parser.add_argument("--draws-out", help="write draws as CSV")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="orthant-mc", description="Direct Monte Carlo for Bayesian probit regression")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="{fit,check,moments,gibbs,simulate,jointprob}")

    fit = sub.add_parser("fit", help="sample the posterior and summarise the draws")
    _add_data_args(fit)
    _add_prior_args(fit)
    _add_mc_args(fit)
    _add_output_args(fit, draws_out=True)

    check = sub.add_parser("check", help="flat-prior propriety verdict")
    _add_data_args(check)
    _add_output_args(check)

    moments = sub.add_parser("moments", help="closed-form posterior mean and covariance")
    _add_data_args(moments)
    _add_prior_args(moments)
    _add_mc_args(moments, draws=False)
    _add_output_args(moments)

    gibbs = sub.add_parser("gibbs", help="data-augmentation Gibbs baseline (flat prior)")
    _add_data_args(gibbs)
    gibbs.add_argument("--iters", type=int, default=settings.GIBBS_ITERS)
    gibbs.add_argument("--burnin", type=int, default=settings.GIBBS_BURNIN)
    _add_output_args(gibbs, draws_out=True)

    simulate = sub.add_parser("simulate", help="write a simulated probit dataset")
    simulate.add_argument("--n", type=int, required=True)
    simulate.add_argument("--p", type=int, required=True, help="columns including the constant")
    simulate.add_argument("--beta", type=_floats, required=True, help="comma-separated coefficients")
    simulate.add_argument("--out", required=True, help="CSV output path")
    _add_seed_arg(simulate)

    jointprob = sub.add_parser("jointprob", help="polar Monte Carlo check of Pr(Y = y | beta)")
    _add_data_args(jointprob)
    jointprob.add_argument("--beta", type=_floats, required=True)
    jointprob.add_argument("--proposal", dest="N", type=int, default=10_000)
    _add_output_args(jointprob)

    oracle = sub.add_parser("oracle", help=argparse.SUPPRESS)
    _add_data_args(oracle)
    _add_prior_args(oracle)
    _add_output_args(oracle)

    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    values = {k: v for k, v in vars(args).items() if v is not None}
    if "data" in values:
        values["data_path"] = values.pop("data")
    return RunConfig(**values)


def _emit(report: BaseModel, out: Optional[str]) -> None:
    text = report.model_dump_json(indent=2)
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text + "\n", encoding="utf-8")
        logger.info(f"Report written to {out}")
    else:
        sys.stdout.write(text + "\n")


def dispatch(cfg: RunConfig) -> BaseModel:
    """Run one subcommand and return its report"""
    if cfg.command == "simulate":
        return runs.run_simulate(cfg)

    d = load_csv(cfg.data_path, cfg.intercept)
    if cfg.command == "check":
        return runs.run_check(d)
    if cfg.command == "fit":
        report, draws = runs.run_fit(d, cfg)
    elif cfg.command == "gibbs":
        report, draws = runs.run_gibbs_report(d, cfg)
    elif cfg.command == "moments":
        return runs.run_moments(d, cfg)
    elif cfg.command == "jointprob":
        return runs.run_jointprob(d, cfg)
    else:
        return runs.run_oracle(d, cfg)

    if cfg.draws_out:
        write_draws_csv(draws, cfg.draws_out)
    return report


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        report = dispatch(cfg)
    except OrthantMCError as e:
        logger.error(f"{args.command} failed: {e}")
        sys.stdout.write(ErrorResponse(exit_code=e.exit_code, **e.to_dict()).model_dump_json(indent=2, exclude_none=True) + "\n")
        return e.exit_code
    except ValidationError as e:
        logger.error(f"{args.command} failed: invalid configuration")
        sys.stdout.write(ErrorResponse(error="ValidationError", detail=str(e)).model_dump_json(indent=2) + "\n")
        return EXIT_VALIDATION

    # simulate's --out is the dataset itself
    _emit(report, None if cfg.command == "simulate" else cfg.out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
