"""Per-round state machines for the three protocols, and the round-loop runner.

Round draw ordering is pinned so a seed fully determines a transcript. All
draws for the rounds of one trial come from a single stream, consumed in
this order per round:

* BB84:  source, noise ch2, Eve, Alice basis, Alice measurement,
         Bob basis, Bob measurement.
* MKS:   source, noise ch2, noise ch3, Bob role assignment, Eve,
         Alice basis, Alice measurement, Bob basis, Bob master (X)
         measurement, Bob secure measurement.
* MKC:   source, noise ch1, noise ch2, Eve, Alice basis, Alice
         measurement, Master (X) measurement, Bob basis, Bob measurement.

The role assignment precedes Eve because the oracle-correct adversary is
defined in terms of the role the receiver is about to assign.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .adversary import ChannelModel, EveKind, EveRecord, EveStrategy, GuessPolicy, apply_noise, eve_intervene
from .pipeline import (
    CodingRole,
    DetectionReport,
    KeyMaterial,
    Verdict,
    code_bit,
    disclose_and_check,
    master_bit,
    sift,
    xor_combine,
)
from .quantum import Basis, Outcome, StateVector, make_ghz, make_singlet, measure, outcome_probability, project

# A branch probability this close to 0 or 1 counts as a pinned outcome.
_PIN_TOL = 1e-9


class ProtocolKind(Enum):
    BB84_ECKERT = "bb84"
    MKS_QKD = "mks"
    MKC_QKD = "mkc"


@dataclass(slots=True)
class RoundRecord:
    """Everything one protocol round produced; bits are None on unkept rounds."""

    round_index: int
    protocol: ProtocolKind
    master_channel: int | None
    alice_basis: Basis
    bob_basis: Basis
    alice_outcome: Outcome
    bob_secure_outcome: Outcome
    master_outcome: Outcome | None
    eve: EveRecord | None
    kept_after_sift: bool
    alice_bit: int | None
    bob_raw_bit: int | None
    master_bit_value: int | None
    bob_final_bit: int | None
    eve_pinned_bob_bit: bool | None


@dataclass
class Transcript:
    """One trial: configuration snapshot, every round, keys, detection report."""

    config: dict
    rounds: list[RoundRecord]
    key_material: KeyMaterial
    detection: DetectionReport


def _draw_basis(draws: np.random.Generator) -> Basis:
    return Basis.Z if draws.random() < 0.5 else Basis.X


def _pinned(mass_on_one: float) -> bool:
    return mass_on_one < _PIN_TOL or mass_on_one > 1.0 - _PIN_TOL


def _eve_pins_single_channel(state_after_eve: StateVector, particle: int, basis: Basis) -> bool:
    """Is the receiver's raw bit on one particle already decided after Eve acted?"""
    return _pinned(outcome_probability(state_after_eve, particle, basis))


def _eve_pins_mks_final_bit(
    state_after_eve: StateVector, master: int, secure: int, secure_basis: Basis
) -> bool:
    """Is Bob's post-XOR bit decided after Eve acted, given the announced basis?

    Enumerates the four (master, secure) outcome branches of the post-Eve
    state and checks whether the XOR-corrected bit carries all the mass.
    """
    mass = [0.0, 0.0]
    for m_out in (Outcome.PLUS, Outcome.MINUS):
        p_m, branch = project(state_after_eve, master, Basis.X, m_out)
        if branch is None:
            continue
        for s_out in (Outcome.PLUS, Outcome.MINUS):
            p_s, _ = project(branch, secure, secure_basis, s_out)
            bit = code_bit(s_out, secure_basis, CodingRole.BOB_STD) ^ master_bit(m_out, secure_basis)
            mass[bit] += p_m * p_s
    return _pinned(mass[1])


def run_bb84_round(
    channel: ChannelModel,
    eve: EveStrategy,
    draws: np.random.Generator,
    round_index: int = 0,
) -> RoundRecord:
    """One BB84/Eckert round: singlet source, particle 2 transits to Bob."""
    state = make_singlet()
    state = apply_noise(state, 2, channel, draws)
    state, eve_record = eve_intervene(state, {2: 2}, eve, None, draws)
    state_after_eve = state

    alice_basis = _draw_basis(draws)
    alice_out, state = measure(state, 1, alice_basis, draws.random())
    bob_basis = _draw_basis(draws)
    bob_out, state = measure(state, 2, bob_basis, draws.random())

    kept = alice_basis is bob_basis
    alice_bit = bob_raw = final = None
    eve_pins = None
    if kept:
        alice_bit = code_bit(alice_out, alice_basis, CodingRole.ALICE_BB84)
        bob_raw = code_bit(bob_out, bob_basis, CodingRole.BOB_BB84)
        final = bob_raw
        if eve_record is not None:
            eve_pins = _eve_pins_single_channel(state_after_eve, 2, bob_basis)

    return RoundRecord(
        round_index=round_index,
        protocol=ProtocolKind.BB84_ECKERT,
        master_channel=None,
        alice_basis=alice_basis,
        bob_basis=bob_basis,
        alice_outcome=alice_out,
        bob_secure_outcome=bob_out,
        master_outcome=None,
        eve=eve_record,
        kept_after_sift=kept,
        alice_bit=alice_bit,
        bob_raw_bit=bob_raw,
        master_bit_value=None,
        bob_final_bit=final,
        eve_pinned_bob_bit=eve_pins,
    )


def run_mks_round(
    channel: ChannelModel,
    eve: EveStrategy,
    draws: np.random.Generator,
    round_index: int = 0,
) -> RoundRecord:
    """One master-key-secured round: Alice's GHZ source, particles 2 and 3 to Bob.

    Bob assigns the master/secure roles uniformly at random, X-measures the
    master channel, and XORs the master bit into his secure-channel bit.
    """
    state = make_ghz(3)
    state = apply_noise(state, 2, channel, draws)
    state = apply_noise(state, 3, channel, draws)

    master = 2 if draws.random() < 0.5 else 3
    secure = 5 - master

    state, eve_record = eve_intervene(state, {2: 2, 3: 3}, eve, master, draws)
    state_after_eve = state

    alice_basis = _draw_basis(draws)
    alice_out, state = measure(state, 1, alice_basis, draws.random())
    bob_basis = _draw_basis(draws)
    master_out, state = measure(state, master, Basis.X, draws.random())
    secure_out, state = measure(state, secure, bob_basis, draws.random())

    kept = alice_basis is bob_basis
    alice_bit = bob_raw = m_bit = final = None
    eve_pins = None
    if kept:
        alice_bit = code_bit(alice_out, alice_basis, CodingRole.ALICE_STD)
        bob_raw = code_bit(secure_out, bob_basis, CodingRole.BOB_STD)
        m_bit = master_bit(master_out, bob_basis)
        final = bob_raw ^ m_bit
        if eve_record is not None:
            eve_pins = _eve_pins_mks_final_bit(state_after_eve, master, secure, bob_basis)

    return RoundRecord(
        round_index=round_index,
        protocol=ProtocolKind.MKS_QKD,
        master_channel=master,
        alice_basis=alice_basis,
        bob_basis=bob_basis,
        alice_outcome=alice_out,
        bob_secure_outcome=secure_out,
        master_outcome=master_out,
        eve=eve_record,
        kept_after_sift=kept,
        alice_bit=alice_bit,
        bob_raw_bit=bob_raw,
        master_bit_value=m_bit,
        bob_final_bit=final,
        eve_pinned_bob_bit=eve_pins,
    )


def run_mkc_round(
    channel: ChannelModel,
    eve: EveStrategy,
    draws: np.random.Generator,
    round_index: int = 0,
) -> RoundRecord:
    """One master-key-controlled round: the Master's GHZ source, particles 1 and 2 transit.

    The Master keeps particle 3, X-measures it, and later broadcasts his bit;
    Bob XORs the broadcast bit into his own.
    """
    state = make_ghz(3)
    state = apply_noise(state, 1, channel, draws)
    state = apply_noise(state, 2, channel, draws)

    state, eve_record = eve_intervene(state, {1: 1, 2: 2}, eve, None, draws)
    state_after_eve = state

    alice_basis = _draw_basis(draws)
    alice_out, state = measure(state, 1, alice_basis, draws.random())
    master_out, state = measure(state, 3, Basis.X, draws.random())
    bob_basis = _draw_basis(draws)
    bob_out, state = measure(state, 2, bob_basis, draws.random())

    kept = alice_basis is bob_basis
    alice_bit = bob_raw = m_bit = final = None
    eve_pins = None
    if kept:
        alice_bit = code_bit(alice_out, alice_basis, CodingRole.ALICE_STD)
        bob_raw = code_bit(bob_out, bob_basis, CodingRole.BOB_STD)
        m_bit = master_bit(master_out, bob_basis)
        final = bob_raw ^ m_bit
        if eve_record is not None:
            # The master bit is broadcast publicly, so Eve pins the final
            # bit exactly when she pins Bob's raw bit.
            eve_pins = _eve_pins_single_channel(state_after_eve, 2, bob_basis)

    return RoundRecord(
        round_index=round_index,
        protocol=ProtocolKind.MKC_QKD,
        master_channel=3,
        alice_basis=alice_basis,
        bob_basis=bob_basis,
        alice_outcome=alice_out,
        bob_secure_outcome=bob_out,
        master_outcome=master_out,
        eve=eve_record,
        kept_after_sift=kept,
        alice_bit=alice_bit,
        bob_raw_bit=bob_raw,
        master_bit_value=m_bit,
        bob_final_bit=final,
        eve_pinned_bob_bit=eve_pins,
    )


_ROUND_RUNNERS = {
    ProtocolKind.BB84_ECKERT: run_bb84_round,
    ProtocolKind.MKS_QKD: run_mks_round,
    ProtocolKind.MKC_QKD: run_mkc_round,
}

TRANSPORTED_CHANNELS = {
    ProtocolKind.BB84_ECKERT: frozenset({2}),
    ProtocolKind.MKS_QKD: frozenset({2, 3}),
    ProtocolKind.MKC_QKD: frozenset({1, 2}),
}


def validate_strategy(kind: ProtocolKind, eve: EveStrategy) -> None:
    """Reject adversary configurations that make no sense for a protocol."""
    if eve.guess_policy is GuessPolicy.ORACLE_CORRECT and kind is not ProtocolKind.MKS_QKD:
        raise ValueError("oracle-correct master guessing only applies to the mks protocol")
    transported = TRANSPORTED_CHANNELS[kind]
    if eve.kind is EveKind.INTERCEPT_RESEND and eve.targets is not None:
        bad = set(eve.targets) - set(transported)
        if bad:
            raise ValueError(f"intercept targets {sorted(bad)} never transit in {kind.value}")
    if eve.guess_policy is GuessPolicy.FIXED_CHANNEL_2 and 2 not in transported:
        raise ValueError(f"channel 2 never transits in {kind.value}")
    if eve.guess_policy is GuessPolicy.FIXED_CHANNEL_3 and 3 not in transported:
        raise ValueError(f"channel 3 never transits in {kind.value}")


def _empty_detection() -> DetectionReport:
    return DetectionReport(
        disclosed_positions=[],
        mismatches=0,
        disclosed_qber=0.0,
        verdict=Verdict.CLEAN,
        remaining_key_alice=[],
        remaining_key_bob=[],
    )


def run_protocol(
    kind: ProtocolKind,
    rounds: int,
    channel: ChannelModel,
    eve: EveStrategy,
    round_stream: np.random.Generator,
    disclose_stream: np.random.Generator,
    disclose_fraction: float = 0.2,
    qber_threshold: float = 0.0,
) -> Transcript:
    """Run `rounds` rounds, sift, build keys, and run the disclosure check.

    The two streams belong to this trial: `round_stream` feeds every in-round
    draw (in the pinned order above), `disclose_stream` picks the disclosed
    positions.
    """
    if rounds < 1:
        raise ValueError(f"rounds must be >= 1, got {rounds}")
    validate_strategy(kind, eve)

    runner = _ROUND_RUNNERS[kind]
    records = [runner(channel, eve, round_stream, round_index=i) for i in range(rounds)]

    kept_indices = sift([r.alice_basis for r in records], [r.bob_basis for r in records])
    kept = [records[i] for i in kept_indices]
    alice_bits = [r.alice_bit for r in kept]
    bob_bits = [r.bob_raw_bit for r in kept]
    if kind is ProtocolKind.BB84_ECKERT:
        master_bits = [0] * len(kept)
        post_xor = None
        bob_final = bob_bits
    else:
        master_bits = [r.master_bit_value for r in kept]
        post_xor = xor_combine(bob_bits, master_bits)
        bob_final = post_xor

    key_material = KeyMaterial(
        alice_bits=alice_bits,
        bob_bits=bob_bits,
        master_bits=master_bits,
        post_xor_bob=post_xor,
    )
    if alice_bits:
        detection = disclose_and_check(
            alice_bits, bob_final, disclose_fraction, qber_threshold, disclose_stream
        )
    else:
        detection = _empty_detection()

    config = {
        "protocol": kind.value,
        "rounds": rounds,
        "depolarizing_p": channel.depolarizing_p,
        "eve_kind": eve.kind.value,
        "eve_targets": sorted(eve.targets) if eve.targets is not None else None,
        "eve_guess_policy": eve.guess_policy.value if eve.guess_policy else None,
        "disclose_fraction": disclose_fraction,
        "qber_threshold": qber_threshold,
    }
    return Transcript(config=config, rounds=records, key_material=key_material, detection=detection)
