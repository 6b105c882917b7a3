"""Command line interface: ``cavity-spectra run|validate-config|presets|version``."""
import argparse
import json
import os
import sys

from threadpoolctl import threadpool_limits

from .. import __version__
from ..exceptions import CavitySpectraError, ConfigError, InvalidArgumentError, NotAdmissibleError, NumericalError
from ..material import PRESET_PERMITTIVITIES
from .config import DOMAIN_PRESETS, load_config
from .runner import run

THREADS_ENV = "CAVITY_SPECTRA_THREADS"

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="path to a JSON experiment config")
    common.add_argument("--out", help="output directory (overrides the config)")
    common.add_argument("--threads", type=int, help=f"thread count (overrides ${THREADS_ENV})")
    common.add_argument("--quiet", action="store_true", help="suppress progress output")

    p = argparse.ArgumentParser(prog="cavity-spectra", description=__doc__, parents=[common])
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", parents=[common], help="run an experiment")
    r.add_argument("config_file", nargs="?")
    v = sub.add_parser("validate-config", parents=[common], help="check a config against the schema")
    v.add_argument("config_file", nargs="?")
    sub.add_parser("presets", parents=[common], help="list built-in domain and permittivity presets")
    sub.add_parser("version", parents=[common], help="print the package version")
    return p


def _threads(args):
    if args.threads is not None:
        return args.threads
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    return None


def _config_path(args):
    path = args.config_file or args.config
    if not path:
        raise ConfigError("no config file given")
    return path


def main(argv=None):
    args = _parser().parse_args(argv)
    say = (lambda *a: None) if args.quiet else (lambda *a: print(*a))
    try:
        if args.command == "version":
            print(__version__)
            return EXIT_OK
        if args.command == "presets":
            print("domains:")
            for name, ext in DOMAIN_PRESETS.items():
                print(f"  {name}: extent {tuple(round(e, 6) for e in ext)}")
            print("permittivities:")
            for name, desc in PRESET_PERMITTIVITIES.items():
                print(f"  {name}: {desc}")
            return EXIT_OK
        config = load_config(_config_path(args))
        if args.command == "validate-config":
            say("config is valid")
            return EXIT_OK
        threads = _threads(args)
        if threads is not None and threads < 1:
            raise ConfigError("--threads must be at least 1")
        with threadpool_limits(limits=threads):
            report = run(config, out_dir=args.out)
        say(f"{report.data['kind']}: wrote {', '.join(report.files)} to {report.directory}")
        if not args.quiet:
            print(json.dumps({"config_hash": report.data["config_hash"]}))
        return EXIT_OK
    except (ConfigError, InvalidArgumentError, NotAdmissibleError) as exc:
        pointer = getattr(exc, "pointer", "")
        print(f"config error{' at ' + pointer if pointer else ''}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except CavitySpectraError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
