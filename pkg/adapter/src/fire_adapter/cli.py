"""Command line entry: configure a mode, then serve until stdin closes."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from fire_adapter import AdapterConfig, AdapterError, Mode, __version__
from fire_adapter.server import serve
from fire_adapter.threshold import ThresholdParams

_DEFAULTS = ThresholdParams()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fire-adapter",
        description="Reference detector process speaking the firecase wire protocol.",
    )
    parser.add_argument("--version", action="version", version=f"fire-adapter {__version__}")
    parser.add_argument(
        "--mode",
        choices=["parity", "model"],
        default="parity",
        help="parity: built-in threshold rule; model: load predict() from --model",
    )
    parser.add_argument("--model", metavar="FILE", help="Python file defining predict(bands)")
    parser.add_argument("--swir2-min", type=float, default=_DEFAULTS.swir2_min, metavar="X")
    parser.add_argument("--ratio-min", type=float, default=_DEFAULTS.ratio_min, metavar="X")
    parser.add_argument(
        "--saturation-min", type=float, default=_DEFAULTS.saturation_min, metavar="X"
    )
    parser.add_argument("--epsilon", type=float, default=_DEFAULTS.epsilon, metavar="X")
    return parser


def config_from_args(args: argparse.Namespace) -> AdapterConfig:
    if args.mode == "model":
        if not args.model:
            raise AdapterError("--mode model requires --model")
        return AdapterConfig(mode=Mode.LOADED_MODEL, model_path=Path(args.model))
    if args.model:
        raise AdapterError("--model only applies to --mode model")
    params = ThresholdParams(
        swir2_min=args.swir2_min,
        ratio_min=args.ratio_min,
        saturation_min=args.saturation_min,
        epsilon=args.epsilon,
    )
    return AdapterConfig(mode=Mode.PARITY_THRESHOLD, threshold=params)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = config_from_args(args)
        return serve(config)
    except (AdapterError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
