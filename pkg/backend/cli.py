"""Command-line entry point: python -m backend.cli <command> [arguments] [--prec D] [--format json|text]."""
from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional

from . import config
from .commands import COMMAND_META, UsageError, dispatch
from .modforms.errors import ComputationError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_COMPUTATION = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mf", description="Modular forms on Gamma0(N) with character.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--prec", type=int, default=None, help=f"decimal digits (default {config.PREC})")
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--cache-dir", dest="cache_dir", default=None, help="class-number table directory")
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True
    for name, meta in COMMAND_META.items():
        p = sub.add_parser(name, help=meta["label"], description=meta["label"], parents=[common])
        for arg in meta["args"]:
            if arg.positional:
                p.add_argument(arg.name, nargs=None if arg.required else "?", default=None, help=arg.help)
            elif arg.kind == "bool":
                p.add_argument(f"--{arg.name}", action="store_true", default=None, help=arg.help)
            elif arg.multiple:
                p.add_argument(f"--{arg.name}", action="append", default=None, help=arg.help)
            else:
                p.add_argument(f"--{arg.name}", default=None, help=arg.help)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    try:
        ns = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"[CLI] usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    raw = {k: v for k, v in vars(ns).items() if k not in ("command", "format", "cache_dir") and v is not None}
    try:
        result = dispatch(ns.command, raw, cache_dir=ns.cache_dir)
    except UsageError as exc:
        print(f"[CLI] usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ComputationError as exc:
        print(f"[CLI] computation error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_COMPUTATION
    except ValueError as exc:
        print(f"[CLI] computation error: {exc}", file=sys.stderr)
        return EXIT_COMPUTATION
    if ns.format == "json":
        print(json.dumps({"command": ns.command, "result": result.data}, sort_keys=True, default=str))
    else:
        print(result.text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
