"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines. Monte-Carlo expectations are matched against the independent
projector-algebra oracles in _oracles.py, never against hand-waved numbers.
"""

import itertools
import json
import time
from contextlib import contextmanager

import numpy as np
import pytest

from mkqkd.adversary import ChannelModel, EveStrategy, GuessPolicy
from mkqkd.harness import (
    Stage,
    config_from_mapping,
    derive_stream,
    run_experiment,
    transcript_path,
)
from mkqkd.pipeline import CodingRole, Verdict, code_bit, master_bit
from mkqkd.protocols import ProtocolKind, run_protocol
from mkqkd.quantum import (
    Basis,
    Outcome,
    conditional_correlator,
    correlator,
    eraser_parity_check,
    make_ghz,
    purity,
    reduced_density,
)

import _oracles as oracle
from _util import mask_wall_time

IDEAL = ChannelModel(0.0)


@contextmanager
def criterion(number: int, description: str, budget_seconds: float | None = None):
    start = time.perf_counter()
    ok = False
    try:
        yield
        elapsed = time.perf_counter() - start
        if budget_seconds is not None and elapsed >= budget_seconds:
            raise AssertionError(
                f"criterion {number} took {elapsed:.2f}s, budget {budget_seconds}s"
            )
        ok = True
    finally:
        elapsed = time.perf_counter() - start
        print(f"ACCEPTANCE {number} ({description}): {'PASS' if ok else 'FAIL'} [{elapsed:.2f}s]")


def _trial_streams(seed, trial):
    return (
        derive_stream(seed, trial, 0, Stage.ROUNDS),
        derive_stream(seed, trial, 0, Stage.DISCLOSURE),
    )


def test_criterion_1_exact_analytic_suite():
    with criterion(1, "exact analytic suite", 1.0):
        ghz = make_ghz(3)
        assert correlator(ghz, [(1, Basis.Z), (2, Basis.Z)]) == pytest.approx(1.0, abs=1e-9)
        assert correlator(ghz, [(1, Basis.X), (2, Basis.X)]) == pytest.approx(0.0, abs=1e-9)
        assert conditional_correlator(
            ghz, [(1, Basis.X), (2, Basis.X)], (3, Basis.X, Outcome.PLUS)
        ) == pytest.approx(1.0, abs=1e-9)
        assert conditional_correlator(
            ghz, [(1, Basis.X), (2, Basis.X)], (3, Basis.X, Outcome.MINUS)
        ) == pytest.approx(-1.0, abs=1e-9)
        assert purity(reduced_density(ghz, {1, 2})) == pytest.approx(0.5, abs=1e-9)


def test_criterion_2_eraser_parity_exhaustive():
    with criterion(2, "eraser parity, n=3..6 exhaustive", 1.0):
        for n in range(3, 7):
            for signs in itertools.product((1, -1), repeat=n - 2):
                got = eraser_parity_check(n, [Outcome(s) for s in signs])
                assert got == pytest.approx(float((-1) ** signs.count(-1)), abs=1e-9)


def test_criterion_3_coding_kernel_exhaustive():
    with criterion(3, "coding kernel over all nonzero branches", 1.0):
        for secure_basis in (Basis.Z, Basis.X):
            plan = [(1, secure_basis.value), (3, "X"), (2, secure_basis.value)]
            branches = oracle.joint_branches(oracle.ghz(3), 3, plan)
            assert len(branches) == 4
            for (alice_s, master_s, bob_s), prob, _ in branches:
                assert prob > 1e-12
                alice_bit = code_bit(Outcome(alice_s), secure_basis, CodingRole.ALICE_STD)
                bob_raw = code_bit(Outcome(bob_s), secure_basis, CodingRole.BOB_STD)
                assert alice_bit == bob_raw ^ master_bit(Outcome(master_s), secure_basis)
        for basis in (Basis.Z, Basis.X):
            plan = [(1, basis.value), (2, basis.value)]
            for (alice_s, bob_s), prob, _ in oracle.joint_branches(oracle.singlet(), 2, plan):
                assert prob > 1e-12
                assert code_bit(Outcome(alice_s), basis, CodingRole.ALICE_BB84) == code_bit(
                    Outcome(bob_s), basis, CodingRole.BOB_BB84
                )


def test_criterion_4_end_to_end_ideal_runs():
    with criterion(4, "ideal runs: 20 trials x 5000 rounds per protocol", 10.0):
        for protocol in ("bb84", "mks", "mkc"):
            config = config_from_mapping(
                {"protocol": protocol, "rounds": 5000, "trials": 20, "seed": 84}
            )
            stats = run_experiment(config)
            assert stats.aggregate.key_match_rate == 1.0
            assert all(t.key_match_rate == 1.0 for t in stats.trials)
            assert abs(stats.aggregate.kept_fraction - 0.5) <= 0.02
            assert stats.aggregate.detection_rate == 0.0
            assert all(not t.detected for t in stats.trials)


def test_criterion_5_intercept_resend_baseline():
    with criterion(5, "BB84 intercept-resend disclosed QBER vs oracle", 30.0):
        want = oracle.bb84_intercept_resend_qber()
        assert want == pytest.approx(0.25, abs=1e-12)
        config = config_from_mapping(
            {"protocol": "bb84", "rounds": 100_000, "trials": 1, "seed": 85,
             "eve": "intercept"}
        )
        stats = run_experiment(config)
        trial = stats.trials[0]
        sifted_bits = round(trial.kept_fraction * 100_000)
        assert sifted_bits >= 10_000
        assert abs(trial.disclosed_qber - want) <= 0.01


def test_criterion_6_mks_attack_matrix():
    with criterion(6, "MKS guess-policy matrix vs oracle", 60.0):
        policies = {
            "uniform": GuessPolicy.UNIFORM_RANDOM,
            "ch2": GuessPolicy.FIXED_CHANNEL_2,
            "ch3": GuessPolicy.FIXED_CHANNEL_3,
            "oracle": GuessPolicy.ORACLE_CORRECT,
        }
        for name, policy in policies.items():
            want = oracle.mks_guess_policy_mismatch(name)
            eve = EveStrategy.guess_master(policy)
            mismatches = disclosed = 0
            for trial in range(5):
                rs, ds = _trial_streams(860, trial)
                transcript = run_protocol(ProtocolKind.MKS_QKD, 20_000, IDEAL, eve, rs, ds)
                mismatches += transcript.detection.mismatches
                disclosed += len(transcript.detection.disclosed_positions)
                if name == "oracle":
                    assert transcript.detection.mismatches == 0
                    assert transcript.detection.verdict is Verdict.CLEAN
            assert abs(mismatches / disclosed - want) <= 0.01

        # detection saturates for every wrong-guess policy
        for name, policy in policies.items():
            if name == "oracle":
                continue
            rate = oracle.mks_guess_policy_mismatch(name)
            assert oracle.detection_probability(rate, 200) >= 0.99
            eve = EveStrategy.guess_master(policy)
            detected = 0
            for trial in range(50):
                rs, ds = _trial_streams(861, trial)
                transcript = run_protocol(ProtocolKind.MKS_QKD, 2000, IDEAL, eve, rs, ds)
                assert len(transcript.detection.disclosed_positions) >= 200 * 0.8
                detected += transcript.detection.verdict is Verdict.EVE_SUSPECTED
            assert detected / 50 >= 0.99


def test_criterion_7_mkc_master_key_necessity():
    with criterion(7, "MKC agreement without vs with the broadcast", 10.0):
        rs, ds = _trial_streams(87, 0)
        transcript = run_protocol(ProtocolKind.MKC_QKD, 20_000, IDEAL, EveStrategy.none(), rs, ds)
        kept = [r for r in transcript.rounds if r.kept_after_sift]
        n = len(kept)
        n_z = sum(r.bob_basis is Basis.Z for r in kept)
        n_x = n - n_z
        assert n_x > 0
        agreement_suppressed = np.mean([r.alice_bit == r.bob_raw_bit for r in kept])
        predicted = (1 + n_z / n) / 2
        sigma = np.sqrt(n_x / 4) / n
        assert abs(agreement_suppressed - predicted) <= 3 * sigma
        agreement_broadcast = np.mean([r.alice_bit == r.bob_final_bit for r in kept])
        assert agreement_broadcast == 1.0


def test_criterion_8_determinism(tmp_path):
    with criterion(8, "byte-identical re-runs (wall-time column masked)"):
        cases = [
            {"protocol": "bb84", "rounds": 2000, "trials": 3, "seed": 88,
             "eve": "intercept", "output_format": "csv"},
            {"protocol": "mks", "rounds": 2000, "trials": 3, "seed": 88,
             "eve": "guess-master:uniform", "output_format": "json"},
            {"protocol": "mkc", "rounds": 2000, "trials": 3, "seed": 88,
             "output_format": "csv"},
            {"protocol": "mks", "rounds": 5000, "trials": 20, "seed": 84,
             "output_format": "json"},
        ]
        for i, case in enumerate(cases):
            out = tmp_path / f"case{i}.{case['output_format']}"
            config = config_from_mapping(
                {**case, "output_path": str(out), "dump_transcript": True}
            )
            run_experiment(config)
            stats_first = out.read_text()
            transcript_first = transcript_path(out).read_bytes()
            run_experiment(config)
            assert mask_wall_time(out.read_text(), case["output_format"]) == mask_wall_time(
                stats_first, case["output_format"]
            )
            assert transcript_path(out).read_bytes() == transcript_first
            if case["output_format"] == "json":
                json.loads(stats_first)
