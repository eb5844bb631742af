"""Configuration, seeded stream derivation, trial fan-out, and stats output.

A 64-bit seed plus (trial, round, stage) indices map to independent random
streams through numpy's SeedSequence, so one seed fully determines every
output file. The runner derives two streams per trial: one consumed by the
rounds in their pinned draw order, one for the disclosure positions.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from enum import IntEnum
from pathlib import Path
from typing import Sequence

import numpy as np

from .adversary import ChannelModel, EveStrategy, GuessPolicy
from .pipeline import Verdict, qber
from .protocols import ProtocolKind, RoundRecord, Transcript, run_protocol, validate_strategy

MAX_SEED = 2**64 - 1


class ConfigError(ValueError):
    """A configuration document or flag set failed validation."""


class Stage(IntEnum):
    """Stream labels for derive_stream."""

    ROUNDS = 0
    DISCLOSURE = 1


def derive_stream(seed: int, trial: int, round_index: int, stage: int) -> np.random.Generator:
    """Deterministic, collision-resistant stream for (seed, trial, round, stage)."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(trial, round_index, int(stage)))
    return np.random.Generator(np.random.PCG64(ss))


_EVE_SPECS = {
    "none": EveStrategy.none(),
    "intercept": EveStrategy.intercept_resend(),
    "xboth": EveStrategy.x_measure_both(),
    "guess-master:uniform": EveStrategy.guess_master(GuessPolicy.UNIFORM_RANDOM),
    "guess-master:ch2": EveStrategy.guess_master(GuessPolicy.FIXED_CHANNEL_2),
    "guess-master:ch3": EveStrategy.guess_master(GuessPolicy.FIXED_CHANNEL_3),
    "guess-master:oracle": EveStrategy.guess_master(GuessPolicy.ORACLE_CORRECT),
}


def parse_eve_spec(spec: str) -> EveStrategy:
    """Parse an adversary descriptor like 'none' or 'guess-master:oracle'."""
    try:
        return _EVE_SPECS[spec]
    except KeyError:
        raise ValueError(
            f"unknown eve strategy {spec!r}; expected one of {sorted(_EVE_SPECS)}"
        ) from None


@dataclass(frozen=True)
class SimulationConfig:
    protocol: ProtocolKind
    rounds: int
    seed: int
    trials: int = 1
    depolarizing_p: float = 0.0
    eve: str = "none"
    disclose_fraction: float = 0.2
    qber_threshold: float = 0.0
    output_path: str | None = None
    output_format: str = "csv"
    dump_transcript: bool = False


_CONFIG_FIELDS = (
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
)

_PROTOCOLS = {kind.value: kind for kind in ProtocolKind}


def _require_int(data: dict, key: str) -> int:
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{key}: expected an integer, got {value!r}")
    return value


def _require_number(data: dict, key: str) -> float:
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key}: expected a number, got {value!r}")
    return float(value)


def config_from_mapping(data: dict) -> SimulationConfig:
    """Validate a plain mapping into a SimulationConfig, applying defaults."""
    unknown = sorted(set(data) - set(_CONFIG_FIELDS))
    if unknown:
        raise ConfigError(f"unknown config keys: {unknown}")
    for required in ("protocol", "rounds", "seed"):
        if required not in data or data[required] is None:
            raise ConfigError(f"{required}: required field is missing")

    protocol_name = data["protocol"]
    if protocol_name not in _PROTOCOLS:
        raise ConfigError(f"protocol: expected one of {sorted(_PROTOCOLS)}, got {protocol_name!r}")
    protocol = _PROTOCOLS[protocol_name]

    rounds = _require_int(data, "rounds")
    if rounds < 1:
        raise ConfigError(f"rounds: must be >= 1, got {rounds}")

    seed = _require_int(data, "seed")
    if not 0 <= seed <= MAX_SEED:
        raise ConfigError(f"seed: must be a 64-bit unsigned integer, got {seed}")

    trials = _require_int(data, "trials") if data.get("trials") is not None else 1
    if trials < 1:
        raise ConfigError(f"trials: must be >= 1, got {trials}")

    p = _require_number(data, "depolarizing_p") if data.get("depolarizing_p") is not None else 0.0
    if not 0.0 <= p <= 1.0:
        raise ConfigError(f"depolarizing_p: must lie in [0, 1], got {p}")

    eve = data.get("eve", "none") if data.get("eve") is not None else "none"
    try:
        strategy = parse_eve_spec(eve)
    except ValueError as exc:
        raise ConfigError(f"eve: {exc}") from None
    try:
        validate_strategy(protocol, strategy)
    except ValueError as exc:
        raise ConfigError(f"eve: {exc}") from None

    fraction = (
        _require_number(data, "disclose_fraction")
        if data.get("disclose_fraction") is not None
        else 0.2
    )
    if not 0.0 < fraction < 1.0:
        raise ConfigError(f"disclose_fraction: must lie in (0, 1), got {fraction}")

    threshold = (
        _require_number(data, "qber_threshold") if data.get("qber_threshold") is not None else 0.0
    )
    if not 0.0 <= threshold < 0.5:
        raise ConfigError(f"qber_threshold: must lie in [0, 0.5), got {threshold}")

    output_path = data.get("output_path")
    if output_path is not None and not isinstance(output_path, str):
        raise ConfigError(f"output_path: expected a string, got {output_path!r}")

    output_format = data.get("output_format") if data.get("output_format") is not None else "csv"
    if output_format not in ("csv", "json"):
        raise ConfigError(f"output_format: expected 'csv' or 'json', got {output_format!r}")

    dump = data.get("dump_transcript") if data.get("dump_transcript") is not None else False
    if not isinstance(dump, bool):
        raise ConfigError(f"dump_transcript: expected a boolean, got {dump!r}")
    if dump and output_path is None:
        raise ConfigError("dump_transcript: requires output_path to be set")

    return SimulationConfig(
        protocol=protocol,
        rounds=rounds,
        seed=seed,
        trials=trials,
        depolarizing_p=p,
        eve=eve,
        disclose_fraction=fraction,
        qber_threshold=threshold,
        output_path=output_path,
        output_format=output_format,
        dump_transcript=dump,
    )


def read_config_mapping(source: str | Path) -> dict:
    """Read a JSON config document from a file path or inline text.

    A string starting with '{' is treated as inline JSON, anything else as a
    path.
    """
    if isinstance(source, Path):
        text = source.read_text()
    elif source.lstrip().startswith("{"):
        text = source
    else:
        text = Path(source).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config document must be a JSON object")
    return data


def load_config(source: str | Path) -> SimulationConfig:
    """Parse and validate a config document (file path or inline JSON text)."""
    return config_from_mapping(read_config_mapping(source))


@dataclass
class TrialStats:
    trial: int
    kept_fraction: float
    final_key_length: int
    key_match_rate: float
    disclosed_qber: float
    detected: bool
    eve_bit_information: float
    wall_time_ms: float


@dataclass
class AggregateStats:
    """Means over trials with standard errors; `detection_rate` replaces `detected`."""

    kept_fraction: float
    kept_fraction_sem: float
    final_key_length: float
    final_key_length_sem: float
    key_match_rate: float
    key_match_rate_sem: float
    disclosed_qber: float
    disclosed_qber_sem: float
    detection_rate: float
    eve_bit_information: float
    eve_bit_information_sem: float
    wall_time_ms: float
    wall_time_ms_sem: float


@dataclass
class RunStats:
    trials: list[TrialStats]
    aggregate: AggregateStats
    transcripts: list[Transcript] | None = field(default=None, compare=False, repr=False)


def _sem(values: Sequence[float]) -> float:
    if len(values) < 2:
        return 0.0
    return float(np.std(values, ddof=1) / math.sqrt(len(values)))


def _trial_stats(trial: int, transcript: Transcript, rounds: int, wall_ms: float) -> TrialStats:
    kept = [r for r in transcript.rounds if r.kept_after_sift]
    detection = transcript.detection
    remaining_a = detection.remaining_key_alice
    remaining_b = detection.remaining_key_bob
    match_rate = 1.0 if not remaining_a else 1.0 - qber(remaining_a, remaining_b)
    # Eve's information is scored against the usable key, i.e. the bits
    # that survive the disclosure check.
    disclosed = set(detection.disclosed_positions)
    final_rounds = [r for i, r in enumerate(kept) if i not in disclosed]
    pinned = sum(1 for r in final_rounds if r.eve_pinned_bob_bit)
    return TrialStats(
        trial=trial,
        kept_fraction=len(kept) / rounds,
        final_key_length=len(remaining_a),
        key_match_rate=match_rate,
        disclosed_qber=detection.disclosed_qber,
        detected=detection.verdict is Verdict.EVE_SUSPECTED,
        eve_bit_information=pinned / len(final_rounds) if final_rounds else 0.0,
        wall_time_ms=wall_ms,
    )


def _aggregate(trials: Sequence[TrialStats]) -> AggregateStats:
    def col(name):
        return [float(getattr(t, name)) for t in trials]

    kept = col("kept_fraction")
    length = col("final_key_length")
    match = col("key_match_rate")
    dq = col("disclosed_qber")
    det = col("detected")
    ebi = col("eve_bit_information")
    wall = col("wall_time_ms")
    return AggregateStats(
        kept_fraction=float(np.mean(kept)),
        kept_fraction_sem=_sem(kept),
        final_key_length=float(np.mean(length)),
        final_key_length_sem=_sem(length),
        key_match_rate=float(np.mean(match)),
        key_match_rate_sem=_sem(match),
        disclosed_qber=float(np.mean(dq)),
        disclosed_qber_sem=_sem(dq),
        detection_rate=float(np.mean(det)),
        eve_bit_information=float(np.mean(ebi)),
        eve_bit_information_sem=_sem(ebi),
        wall_time_ms=float(np.mean(wall)),
        wall_time_ms_sem=_sem(wall),
    )


def run_experiment(config: SimulationConfig) -> RunStats:
    """Execute all trials, aggregate, and write the configured output files."""
    channel = ChannelModel(config.depolarizing_p)
    strategy = parse_eve_spec(config.eve)

    trial_stats: list[TrialStats] = []
    transcripts: list[Transcript] | None = [] if config.dump_transcript else None
    for trial in range(config.trials):
        round_stream = derive_stream(config.seed, trial, 0, Stage.ROUNDS)
        disclose_stream = derive_stream(config.seed, trial, 0, Stage.DISCLOSURE)
        start = time.perf_counter()
        transcript = run_protocol(
            config.protocol,
            config.rounds,
            channel,
            strategy,
            round_stream,
            disclose_stream,
            disclose_fraction=config.disclose_fraction,
            qber_threshold=config.qber_threshold,
        )
        wall_ms = (time.perf_counter() - start) * 1e3
        trial_stats.append(_trial_stats(trial, transcript, config.rounds, wall_ms))
        if transcripts is not None:
            transcripts.append(transcript)

    stats = RunStats(trials=trial_stats, aggregate=_aggregate(trial_stats), transcripts=transcripts)

    if config.output_path is not None:
        write_stats(stats, config.output_format, config.output_path)
        if config.dump_transcript:
            write_transcripts(transcripts, transcript_path(config.output_path))
    return stats


# --- serialization -----------------------------------------------------------

def _sig12(x: float) -> float:
    return float(f"{x:.12g}")


def _fmt12(x) -> str:
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, int):
        return str(x)
    return f"{x:.12g}"


CSV_HEADER = (
    "trial,kept_fraction,final_key_length,key_match_rate,"
    "disclosed_qber,detected,eve_bit_information,wall_time_ms"
)


def _trial_dict(t: TrialStats) -> dict:
    return {
        "trial": t.trial,
        "kept_fraction": _sig12(t.kept_fraction),
        "final_key_length": t.final_key_length,
        "key_match_rate": _sig12(t.key_match_rate),
        "disclosed_qber": _sig12(t.disclosed_qber),
        "detected": t.detected,
        "eve_bit_information": _sig12(t.eve_bit_information),
        "wall_time_ms": _sig12(t.wall_time_ms),
    }


def _aggregate_dict(a: AggregateStats) -> dict:
    return {name: _sig12(getattr(a, name)) for name in (
        "kept_fraction",
        "kept_fraction_sem",
        "final_key_length",
        "final_key_length_sem",
        "key_match_rate",
        "key_match_rate_sem",
        "disclosed_qber",
        "disclosed_qber_sem",
        "detection_rate",
        "eve_bit_information",
        "eve_bit_information_sem",
        "wall_time_ms",
        "wall_time_ms_sem",
    )}


def render_stats(stats: RunStats, output_format: str) -> str:
    """Serialize RunStats as a CSV or JSON document (12 significant digits)."""
    if output_format == "json":
        doc = {
            "trials": [_trial_dict(t) for t in stats.trials],
            "aggregate": _aggregate_dict(stats.aggregate),
        }
        return json.dumps(doc, indent=2) + "\n"
    if output_format != "csv":
        raise ValueError(f"unknown output format {output_format!r}")
    lines = [CSV_HEADER]
    for t in stats.trials:
        lines.append(
            ",".join(
                [
                    str(t.trial),
                    _fmt12(t.kept_fraction),
                    str(t.final_key_length),
                    _fmt12(t.key_match_rate),
                    _fmt12(t.disclosed_qber),
                    str(int(t.detected)),
                    _fmt12(t.eve_bit_information),
                    _fmt12(t.wall_time_ms),
                ]
            )
        )
    a = stats.aggregate
    lines.append(
        ",".join(
            [
                "aggregate",
                _fmt12(a.kept_fraction),
                _fmt12(a.final_key_length),
                _fmt12(a.key_match_rate),
                _fmt12(a.disclosed_qber),
                _fmt12(a.detection_rate),
                _fmt12(a.eve_bit_information),
                _fmt12(a.wall_time_ms),
            ]
        )
    )
    return "\n".join(lines) + "\n"


def write_stats(stats: RunStats, output_format: str, path: str | Path) -> None:
    """Write the stats document; CSV gets per-trial rows plus an aggregate row."""
    text = render_stats(stats, output_format)
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write stats to {path}: {exc}") from exc


def stats_from_json(text: str) -> RunStats:
    """Inverse of render_stats for the JSON format."""
    doc = json.loads(text)
    trials = [TrialStats(**t) for t in doc["trials"]]
    aggregate = AggregateStats(**doc["aggregate"])
    return RunStats(trials=trials, aggregate=aggregate)


def read_stats(path: str | Path) -> RunStats:
    return stats_from_json(Path(path).read_text())


def round_record_to_dict(record: RoundRecord, trial: int | None = None) -> dict:
    """JSON-ready view of one round, field names mirroring RoundRecord."""
    eve = record.eve
    doc = {
        "round_index": record.round_index,
        "protocol": record.protocol.value,
        "master_channel": record.master_channel,
        "alice_basis": record.alice_basis.value,
        "bob_basis": record.bob_basis.value,
        "alice_outcome": int(record.alice_outcome),
        "bob_secure_outcome": int(record.bob_secure_outcome),
        "master_outcome": None if record.master_outcome is None else int(record.master_outcome),
        "eve": None
        if eve is None
        else {
            "channels": list(eve.channels),
            "bases": [b.value for b in eve.bases],
            "outcomes": [int(o) for o in eve.outcomes],
        },
        "kept_after_sift": record.kept_after_sift,
        "alice_bit": record.alice_bit,
        "bob_raw_bit": record.bob_raw_bit,
        "master_bit_value": record.master_bit_value,
        "bob_final_bit": record.bob_final_bit,
        "eve_pinned_bob_bit": record.eve_pinned_bob_bit,
    }
    if trial is not None:
        doc = {"trial": trial, **doc}
    return doc


def transcript_path(output_path: str | Path) -> Path:
    return Path(str(output_path) + ".transcript.ndjson")


def write_transcripts(transcripts: Sequence[Transcript], path: str | Path) -> None:
    """Newline-delimited JSON: one document per round, across all trials in order."""
    lines = []
    for trial, transcript in enumerate(transcripts):
        for record in transcript.rounds:
            lines.append(json.dumps(round_record_to_dict(record, trial=trial), separators=(",", ":")))
    try:
        Path(path).write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write transcripts to {path}: {exc}") from exc
