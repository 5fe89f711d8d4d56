from typing import Any, Dict, List, Optional
import argparse
import json
import logging
import sys

from . import __version__
from .analysis.sweeps import SweepRunner
from .commands import CommandRegistry
from .config.settings import SimulationConfig
from .errors import CatLabError
from .models import RunSpec
from .storage.writers import ResultWriter

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

# element types for parameters whose default gives no hint
PARAM_TYPES = {
    "eta": float,
    "dark_mean": float,
    "dim": int,
    "fock_cutoff": int,
    "r": float,
    "beta": float,
    "kind": str,
}


def _flag(value: str) -> bool:
    lowered = value.lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"Expected a boolean, got {value}")


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--output", default=None, help="Output path (standard output when omitted)")
    common.add_argument("--params-json", default=None, help="JSON object of parameter overrides")
    common.add_argument("--dim", dest="dim_override", type=int, default=None)
    common.add_argument("--tol", dest="tol_override", type=float, default=None)
    common.add_argument("--workers", type=int, default=None)
    common.add_argument("--verbose", action="store_true")
    common.add_argument("--quiet", action="store_true")
    return common


def _add_param(parser: argparse.ArgumentParser, key: str, default: Any) -> None:
    flag = "--" + key.replace("_", "-")
    if flag == "--dim":
        return
    if isinstance(default, bool):
        parser.add_argument(flag, dest=key, type=_flag, default=argparse.SUPPRESS)
    elif isinstance(default, list):
        kind = type(default[0]) if default else PARAM_TYPES.get(key, float)
        parser.add_argument(flag, dest=key, type=kind, nargs="+", default=argparse.SUPPRESS)
    else:
        kind = PARAM_TYPES.get(key, str) if default is None else type(default)
        parser.add_argument(flag, dest=key, type=kind, default=argparse.SUPPRESS)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cat_state_lab",
        description="Simulate optical cat-state preparation schemes and emit CSV or JSON datasets.",
    )
    parser.add_argument("--version", action="version", version=f"cat_state_lab {__version__}")
    common = _common_options()
    sub = parser.add_subparsers(dest="command", required=True)
    for name in CommandRegistry.names():
        entry = CommandRegistry.get(name)
        command = sub.add_parser(name, parents=[common], help=entry["description"])
        for key, default in entry["defaults"].items():
            _add_param(command, key, default)
    return parser


def _configure_logging(verbose: bool, quiet: bool) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else getattr(logging, SimulationConfig.LOG_LEVEL, logging.INFO)
    logging.basicConfig(
        level=level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )


def _params(args: argparse.Namespace) -> Dict[str, Any]:
    params: Dict[str, Any] = {}
    if args.params_json:
        loaded = json.loads(args.params_json)
        if not isinstance(loaded, dict):
            raise ValueError("--params-json must be a JSON object")
        params.update(loaded)
    for key in CommandRegistry.get(args.command)["defaults"]:
        if key in vars(args):
            params[key] = getattr(args, key)
    return params


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose, args.quiet)
    try:
        spec = RunSpec(
            command=args.command,
            params=_params(args),
            output=args.output,
            format=args.format,
            dim_override=args.dim_override,
            tol_override=args.tol_override,
        )
        runner = SweepRunner(max_workers=args.workers, progress=False if args.quiet else None)
        records = CommandRegistry.run(spec, runner=runner)
        ResultWriter().write(records, spec.format, spec.output)
    except CatLabError as e:
        logger.error(f"{args.command} failed: {str(e)}")
        print(f"error: {e.code}: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, KeyError) as e:
        print(f"error: invalid-arguments: {e}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK
