"""Transit models: per-particle depolarizing noise and eavesdropper interventions.

Both act on the full pure state between source emission and the legitimate
measurements. Channels are named by the particle they carry at emission, so
in the three-particle protocols channel 2 transports particle 2 and so on.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import _kernels as kernels
from .quantum import Basis, Outcome, StateVector, measure


@dataclass(frozen=True)
class ChannelModel:
    """Depolarizing transit noise: with probability p a uniform Pauli flip is applied."""

    depolarizing_p: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.depolarizing_p <= 1.0:
            raise ValueError(f"depolarizing_p must lie in [0, 1], got {self.depolarizing_p}")


class EveKind(Enum):
    NONE = "none"
    INTERCEPT_RESEND = "intercept_resend"
    GUESS_MASTER = "guess_master"
    X_MEASURE_BOTH = "x_measure_both"


class GuessPolicy(Enum):
    """How Eve picks the channel she believes is the master channel."""

    UNIFORM_RANDOM = "uniform"
    FIXED_CHANNEL_2 = "ch2"
    FIXED_CHANNEL_3 = "ch3"
    ORACLE_CORRECT = "oracle"


@dataclass(frozen=True)
class EveStrategy:
    """Adversary configuration for the transit of particles.

    `targets` applies to intercept-resend only; None means every transported
    channel. `guess_policy` applies to the guess-master strategy only.
    """

    kind: EveKind = EveKind.NONE
    targets: frozenset[int] | None = None
    guess_policy: GuessPolicy | None = None

    def __post_init__(self):
        if self.kind is not EveKind.INTERCEPT_RESEND and self.targets is not None:
            raise ValueError("targets only apply to the intercept-resend strategy")
        if self.targets is not None and not self.targets:
            raise ValueError("intercept-resend target set must be nonempty (or None for all)")
        if (self.kind is EveKind.GUESS_MASTER) != (self.guess_policy is not None):
            raise ValueError("guess_policy is required for, and exclusive to, guess-master")

    @classmethod
    def none(cls) -> "EveStrategy":
        return cls()

    @classmethod
    def intercept_resend(cls, targets=None) -> "EveStrategy":
        return cls(
            kind=EveKind.INTERCEPT_RESEND,
            targets=None if targets is None else frozenset(targets),
        )

    @classmethod
    def guess_master(cls, policy: GuessPolicy) -> "EveStrategy":
        return cls(kind=EveKind.GUESS_MASTER, guess_policy=policy)

    @classmethod
    def x_measure_both(cls) -> "EveStrategy":
        return cls(kind=EveKind.X_MEASURE_BOTH)


@dataclass
class EveRecord:
    """What Eve touched and saw in one round."""

    channels: list[int] = field(default_factory=list)
    bases: list[Basis] = field(default_factory=list)
    outcomes: list[Outcome] = field(default_factory=list)


def apply_noise(
    state: StateVector, particle: int, model: ChannelModel, draws: np.random.Generator
) -> StateVector:
    """Depolarize one transported particle: X, Y or Z flip with probability p/3 each."""
    p = model.depolarizing_p
    if p == 0.0:
        return state
    if draws.random() >= p:
        return state
    axis = min(int(draws.random() * 3.0), 2)
    amps = kernels.apply_pauli(state.amplitudes, state.num_particles, particle, axis)
    return StateVector._wrap(state.num_particles, amps)


def _eve_measure(
    state: StateVector,
    channel: int,
    particle: int,
    basis: Basis,
    draws: np.random.Generator,
    record: EveRecord,
) -> StateVector:
    outcome, state = measure(state, particle, basis, draws.random())
    record.channels.append(channel)
    record.bases.append(basis)
    record.outcomes.append(outcome)
    return state


def eve_intervene(
    state: StateVector,
    transported: dict[int, int],
    strategy: EveStrategy,
    true_master: int | None,
    draws: np.random.Generator,
) -> tuple[StateVector, EveRecord | None]:
    """Apply Eve's strategy to the particles in transit this round.

    `transported` maps channel id to particle index. Measure-and-forward
    semantics: Eve's measurement collapses the full state and the collapsed
    particle continues to its receiver.
    """
    if strategy.kind is EveKind.NONE:
        return state, None

    record = EveRecord()
    channels = sorted(transported)

    if strategy.kind is EveKind.INTERCEPT_RESEND:
        targets = channels if strategy.targets is None else sorted(strategy.targets)
        for ch in targets:
            if ch not in transported:
                raise ValueError(f"intercept target channel {ch} is not in transit ({channels})")
            basis = Basis.Z if draws.random() < 0.5 else Basis.X
            state = _eve_measure(state, ch, transported[ch], basis, draws, record)
        return state, record

    if strategy.kind is EveKind.GUESS_MASTER:
        policy = strategy.guess_policy
        if policy is GuessPolicy.ORACLE_CORRECT:
            if true_master is None:
                raise ValueError("oracle-correct guessing needs a master channel; none exists here")
            guess = true_master
        elif policy is GuessPolicy.UNIFORM_RANDOM:
            guess = channels[min(int(draws.random() * len(channels)), len(channels) - 1)]
        else:
            guess = 2 if policy is GuessPolicy.FIXED_CHANNEL_2 else 3
        if guess not in transported:
            raise ValueError(f"guessed channel {guess} is not in transit ({channels})")
        state = _eve_measure(state, guess, transported[guess], Basis.X, draws, record)
        return state, record

    # X_MEASURE_BOTH: fixed order, lower channel id first.
    for ch in channels:
        state = _eve_measure(state, ch, transported[ch], Basis.X, draws, record)
    return state, record
