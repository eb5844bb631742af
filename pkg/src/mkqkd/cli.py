"""Command-line experiment runner.

Exit codes: 0 when every trial verdict is clean, 2 when any trial suspects
an eavesdropper, 1 on configuration or I/O errors.
"""

from __future__ import annotations

import argparse
import sys

from .harness import (
    ConfigError,
    config_from_mapping,
    read_config_mapping,
    render_stats,
    run_experiment,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mkqkd",
        description="Monte-Carlo simulator for GHZ master-key QKD and the BB84/Eckert baseline.",
    )
    parser.add_argument("--protocol", choices=("bb84", "mks", "mkc"), help="protocol to simulate")
    parser.add_argument("--rounds", type=int, help="rounds per trial")
    parser.add_argument("--trials", type=int, help="independent trials (default 1)")
    parser.add_argument("--seed", type=int, help="64-bit unsigned master seed (required)")
    parser.add_argument("--noise", type=float, dest="depolarizing_p", metavar="P",
                        help="per-particle depolarizing probability (default 0)")
    parser.add_argument("--eve", metavar="SPEC",
                        help="none | intercept | guess-master:<uniform|ch2|ch3|oracle> | xboth")
    parser.add_argument("--disclose-fraction", type=float, dest="disclose_fraction", metavar="F",
                        help="fraction of the key disclosed for the check (default 0.2)")
    parser.add_argument("--qber-threshold", type=float, dest="qber_threshold", metavar="T",
                        help="disclosed-QBER level above which Eve is suspected (default 0)")
    parser.add_argument("--config", metavar="PATH",
                        help="JSON config file; explicit flags override its values")
    parser.add_argument("--output", dest="output_path", metavar="PATH",
                        help="stats file to write; omit to print stats to stdout")
    parser.add_argument("--format", dest="output_format", choices=("csv", "json"),
                        help="stats serialization (default csv)")
    parser.add_argument("--dump-transcript", action="store_true", default=None,
                        help="also write per-round records next to the output file")
    return parser


def _merged_mapping(args: argparse.Namespace) -> dict:
    data = {}
    if args.config is not None:
        data.update(read_config_mapping(args.config))
    for key in (
        "protocol",
        "rounds",
        "trials",
        "seed",
        "depolarizing_p",
        "eve",
        "disclose_fraction",
        "qber_threshold",
        "output_path",
        "output_format",
        "dump_transcript",
    ):
        value = getattr(args, key)
        if value is not None:
            data[key] = value
    return data


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_mapping(_merged_mapping(args))
        stats = run_experiment(config)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    if config.output_path is None:
        sys.stdout.write(render_stats(stats, config.output_format))
    else:
        a = stats.aggregate
        print(
            f"{config.protocol.value}: {config.trials} trials x {config.rounds} rounds -> "
            f"kept {a.kept_fraction:.4f}, match {a.key_match_rate:.4f}, "
            f"disclosed QBER {a.disclosed_qber:.4f}, detection rate {a.detection_rate:.4f} "
            f"({config.output_path})"
        )
    detected = any(t.detected for t in stats.trials)
    return 2 if detected else 0


if __name__ == "__main__":
    sys.exit(main())
