"""Classical post-processing: coding tables, sifting, master-key XOR, detection.

Bit strings are plain lists of 0/1 ints throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .quantum import Basis, Outcome


class CodingRole(Enum):
    """Which party/channel coding table applies to an outcome."""

    ALICE_STD = "alice_std"
    BOB_STD = "bob_std"
    ALICE_BB84 = "alice_bb84"
    BOB_BB84 = "bob_bb84"
    MASTER_CHANNEL = "master_channel"


class Verdict(Enum):
    CLEAN = "clean"
    EVE_SUSPECTED = "eve_suspected"


@dataclass(frozen=True)
class KeyMaterial:
    """Sifted per-party bits plus the master-key string and post-XOR key."""

    alice_bits: list[int]
    bob_bits: list[int]
    master_bits: list[int]
    post_xor_bob: list[int] | None = None

    def __post_init__(self):
        lengths = {len(self.alice_bits), len(self.bob_bits), len(self.master_bits)}
        if self.post_xor_bob is not None:
            lengths.add(len(self.post_xor_bob))
        if len(lengths) > 1:
            raise ValueError(f"key material strings differ in length: {sorted(lengths)}")


@dataclass(frozen=True)
class DetectionReport:
    disclosed_positions: list[int]
    mismatches: int
    disclosed_qber: float
    verdict: Verdict
    remaining_key_alice: list[int]
    remaining_key_bob: list[int]


def code_bit(outcome: Outcome, basis: Basis, role: CodingRole) -> int:
    """Outcome-to-bit coding table.

    Standard roles (and Alice in BB84) map up/plus to 1 and down/minus to 0;
    Bob's BB84 role is the inverse, compensating the singlet anti-correlation.
    """
    if role is CodingRole.MASTER_CHANNEL:
        raise ValueError("master-channel outcomes are coded by master_bit, not code_bit")
    bit = 1 if outcome is Outcome.PLUS else 0
    if role is CodingRole.BOB_BB84:
        return 1 - bit
    return bit


def master_bit(outcome: Outcome, secure_basis: Basis) -> int:
    """Master-channel coding: plus->0 / minus->1 when the secure basis was X, else 0."""
    if secure_basis is Basis.X:
        return 0 if outcome is Outcome.PLUS else 1
    return 0


def sift(alice_bases: Sequence[Basis], bob_bases: Sequence[Basis]) -> list[int]:
    """Ascending indices where both parties chose the same basis."""
    if len(alice_bases) != len(bob_bases):
        raise ValueError(f"basis lists differ in length: {len(alice_bases)} vs {len(bob_bases)}")
    return [i for i, (a, b) in enumerate(zip(alice_bases, bob_bases)) if a is b]


def _xor(a: Sequence[int], b: Sequence[int]) -> list[int]:
    if len(a) != len(b):
        raise ValueError(f"bit strings differ in length: {len(a)} vs {len(b)}")
    return [x ^ y for x, y in zip(a, b)]


def xor_combine(key: Sequence[int], master: Sequence[int]) -> list[int]:
    """Bitwise modulo-2 addition of the master-key into a key."""
    return _xor(key, master)


def vernam(message: Sequence[int], key: Sequence[int]) -> list[int]:
    """One-time-pad XOR; self-inverse."""
    return _xor(message, key)


def qber(a: Sequence[int], b: Sequence[int]) -> float:
    """Fraction of disagreeing positions between two equal-length bit strings."""
    if len(a) == 0:
        raise ValueError("qber undefined for empty bit strings")
    if len(a) != len(b):
        raise ValueError(f"bit strings differ in length: {len(a)} vs {len(b)}")
    return sum(x != y for x, y in zip(a, b)) / len(a)


def disclose_and_check(
    alice: Sequence[int],
    bob: Sequence[int],
    fraction: float,
    qber_threshold: float,
    position_draws: np.random.Generator,
) -> DetectionReport:
    """Publicly compare a random key subset and discard it from the final key.

    ceil(fraction * len) distinct positions are chosen via the stream; the
    verdict is EVE_SUSPECTED iff the disclosed QBER exceeds qber_threshold.
    """
    if len(alice) == 0:
        raise ValueError("cannot disclose from an empty key")
    if len(alice) != len(bob):
        raise ValueError(f"key lengths differ: {len(alice)} vs {len(bob)}")
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction must lie in (0, 1), got {fraction}")
    if not 0.0 <= qber_threshold < 0.5:
        raise ValueError(f"qber_threshold must lie in [0, 0.5), got {qber_threshold}")

    count = math.ceil(fraction * len(alice))
    positions = sorted(int(i) for i in position_draws.choice(len(alice), size=count, replace=False))
    disclosed = set(positions)
    mismatches = sum(alice[i] != bob[i] for i in positions)
    disclosed_qber = mismatches / count
    verdict = Verdict.EVE_SUSPECTED if disclosed_qber > qber_threshold else Verdict.CLEAN
    remaining_alice = [bit for i, bit in enumerate(alice) if i not in disclosed]
    remaining_bob = [bit for i, bit in enumerate(bob) if i not in disclosed]
    return DetectionReport(
        disclosed_positions=positions,
        mismatches=mismatches,
        disclosed_qber=disclosed_qber,
        verdict=verdict,
        remaining_key_alice=remaining_alice,
        remaining_key_bob=remaining_bob,
    )
