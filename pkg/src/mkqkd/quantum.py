"""Exact state-vector engine for 1-6 spin-1/2 particles.

Conventions, fixed once for the whole package:

* Particle 1 indexes the most significant bit of a basis-state label;
  bit 0 is |up> (Z eigenvalue +1), bit 1 is |down>.
* X eigenstates are |+-> = (|up> +- |down>)/sqrt(2); outcome +1 maps to
  |up> in Z and to |+> in X.
* States are immutable; every operation returns a fresh StateVector.
* Randomness never lives here: `measure` takes its uniform draw as an
  explicit argument so the engine stays deterministic and testable.
"""

from __future__ import annotations

from enum import Enum, IntEnum
from typing import Iterable, Sequence

import numpy as np

from . import _kernels as kernels

NORM_TOL = 1e-9

MAX_PARTICLES = 6


class Basis(Enum):
    """Measurement basis: Pauli Z (computational) or Pauli X."""

    Z = "Z"
    X = "X"


class Outcome(IntEnum):
    """Measurement eigenvalue: +1 (up/plus) or -1 (down/minus)."""

    PLUS = 1
    MINUS = -1


class UndefinedConditionError(ValueError):
    """Raised when conditioning on a measurement outcome of probability zero."""


class StateVector:
    """Pure state of `num_particles` spin-1/2 particles as dense amplitudes."""

    __slots__ = ("num_particles", "amplitudes")

    def __init__(self, num_particles: int, amplitudes: Sequence[complex]):
        if not 1 <= num_particles <= MAX_PARTICLES:
            raise ValueError(f"num_particles must be in [1, {MAX_PARTICLES}], got {num_particles}")
        amps = np.asarray(amplitudes, dtype=np.complex128)
        if amps.shape != (1 << num_particles,):
            raise ValueError(
                f"expected {1 << num_particles} amplitudes for {num_particles} particles, "
                f"got shape {amps.shape}"
            )
        norm_sq = float(np.sum(amps.real * amps.real + amps.imag * amps.imag))
        if abs(norm_sq - 1.0) > NORM_TOL:
            raise ValueError(f"state not normalized: |psi|^2 = {norm_sq!r}")
        amps = amps.copy()
        amps.setflags(write=False)
        object.__setattr__(self, "num_particles", num_particles)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def _wrap(cls, num_particles: int, amps: np.ndarray) -> "StateVector":
        """Internal fast path: trust the kernel output, skip validation."""
        self = object.__new__(cls)
        amps.setflags(write=False)
        object.__setattr__(self, "num_particles", num_particles)
        object.__setattr__(self, "amplitudes", amps)
        return self

    def __setattr__(self, name, value):
        raise AttributeError("StateVector is immutable")

    def probabilities(self) -> np.ndarray:
        """Born probabilities of the 2**n computational basis states."""
        a = self.amplitudes
        return a.real * a.real + a.imag * a.imag

    def __repr__(self) -> str:
        return f"StateVector(num_particles={self.num_particles}, amplitudes={self.amplitudes!r})"


class DensityMatrix:
    """Mixed state of `num_particles` particles; validates the usual axioms."""

    __slots__ = ("num_particles", "entries")

    def __init__(self, num_particles: int, entries: np.ndarray):
        dim = 1 << num_particles
        rho = np.asarray(entries, dtype=np.complex128)
        if rho.shape != (dim, dim):
            raise ValueError(f"expected a {dim}x{dim} matrix, got shape {rho.shape}")
        if not np.allclose(rho, rho.conj().T, atol=NORM_TOL):
            raise ValueError("density matrix not Hermitian")
        trace = complex(np.trace(rho))
        if abs(trace - 1.0) > NORM_TOL:
            raise ValueError(f"density matrix trace is {trace!r}, expected 1")
        if np.min(np.linalg.eigvalsh(rho)) < -NORM_TOL:
            raise ValueError("density matrix not positive semidefinite")
        rho = rho.copy()
        rho.setflags(write=False)
        object.__setattr__(self, "num_particles", num_particles)
        object.__setattr__(self, "entries", rho)

    def __setattr__(self, name, value):
        raise AttributeError("DensityMatrix is immutable")

    def __repr__(self) -> str:
        return f"DensityMatrix(num_particles={self.num_particles})"


def _check_particle(state: StateVector, particle: int) -> None:
    if not 1 <= particle <= state.num_particles:
        raise ValueError(
            f"particle index {particle} out of range for {state.num_particles} particles"
        )


def make_ghz(n: int) -> StateVector:
    """Equal superposition of all-up and all-down over n particles, 2 <= n <= 6."""
    if not 2 <= n <= MAX_PARTICLES:
        raise ValueError(f"GHZ size must be in [2, {MAX_PARTICLES}], got {n}")
    amps = np.zeros(1 << n, dtype=np.complex128)
    amps[0] = amps[-1] = 1.0 / np.sqrt(2.0)
    return StateVector._wrap(n, amps)


def make_singlet() -> StateVector:
    """Two-particle singlet (|ud> - |du>)/sqrt(2)."""
    r = 1.0 / np.sqrt(2.0)
    return StateVector._wrap(2, np.array([0.0, r, -r, 0.0], dtype=np.complex128))


def outcome_probability(state: StateVector, particle: int, basis: Basis) -> float:
    """Born probability of the +1 outcome for measuring one particle."""
    _check_particle(state, particle)
    return kernels.born_plus(state.amplitudes, state.num_particles, particle, basis is Basis.X)


def project(
    state: StateVector, particle: int, basis: Basis, outcome: Outcome
) -> tuple[float, StateVector | None]:
    """Branch probability and renormalized post-state for one outcome.

    The post-state is None when the branch probability is numerically zero.
    """
    _check_particle(state, particle)
    prob, amps = kernels.project(
        state.amplitudes, state.num_particles, particle, basis is Basis.X, int(outcome)
    )
    if amps is None:
        return prob, None
    return prob, StateVector._wrap(state.num_particles, amps)


def measure(
    state: StateVector, particle: int, basis: Basis, random_draw: float
) -> tuple[Outcome, StateVector]:
    """Projective measurement of one particle; +1 is returned iff random_draw < p_plus.

    Deterministic given the draw; the returned state is the renormalized
    projection of the input.
    """
    _check_particle(state, particle)
    if not 0.0 <= random_draw < 1.0:
        raise ValueError(f"random_draw must lie in [0, 1), got {random_draw}")
    sign, amps = kernels.measure(
        state.amplitudes, state.num_particles, particle, basis is Basis.X, random_draw
    )
    return Outcome(sign), StateVector._wrap(state.num_particles, amps)


def reduced_density(state: StateVector, keep: Iterable[int]) -> DensityMatrix:
    """Partial trace over every particle not in `keep` (kept order: ascending index)."""
    kept = sorted(set(keep))
    if not kept:
        raise ValueError("keep set must be nonempty")
    n = state.num_particles
    for p in kept:
        if not 1 <= p <= n:
            raise ValueError(f"particle index {p} out of range for {n} particles")
    k = len(kept)
    psi = state.amplitudes.reshape((2,) * n)
    psi = np.moveaxis(psi, [p - 1 for p in kept], range(k))
    psi = psi.reshape(1 << k, 1 << (n - k))
    return DensityMatrix(k, psi @ psi.conj().T)


def purity(rho: DensityMatrix) -> float:
    """Trace of rho squared: 1 for pure states, 1/2**n for maximally mixed."""
    return float(np.trace(rho.entries @ rho.entries).real)


def _signs_for(num_particles: int, particles: Sequence[int]) -> np.ndarray:
    idx = np.arange(1 << num_particles)
    signs = np.ones(1 << num_particles)
    for p in particles:
        signs *= 1.0 - 2.0 * ((idx >> (num_particles - p)) & 1)
    return signs


def correlator(state: StateVector, observables: Sequence[tuple[int, Basis]]) -> float:
    """Exact expectation value of a product of single-particle Pauli operators.

    Each observable is (particle, basis) with basis Z or X; particle indices
    must be distinct. No sampling is involved.
    """
    particles = [p for p, _ in observables]
    if len(set(particles)) != len(particles):
        raise ValueError(f"repeated particle index in observables: {particles}")
    n = state.num_particles
    for p in particles:
        _check_particle(state, p)
    amps = state.amplitudes
    for p, basis in observables:
        if basis is Basis.X:
            amps = kernels.apply_hadamard(amps, n, p)
    probs = amps.real * amps.real + amps.imag * amps.imag
    return float(np.dot(probs, _signs_for(n, particles)))


def conditional_correlator(
    state: StateVector,
    observables: Sequence[tuple[int, Basis]],
    condition: tuple[int, Basis, Outcome],
) -> float:
    """Correlator after conditioning on one particle's measurement outcome.

    Raises UndefinedConditionError when the conditioning outcome has
    probability zero.
    """
    cond_particle, cond_basis, cond_outcome = condition
    if cond_particle in {p for p, _ in observables}:
        raise ValueError(f"condition particle {cond_particle} also appears in observables")
    prob, post = project(state, cond_particle, cond_basis, cond_outcome)
    if post is None:
        raise UndefinedConditionError(
            f"conditioning outcome has probability {prob!r} on particle {cond_particle}"
        )
    return correlator(post, observables)


def eraser_parity_check(n: int, outcomes: Sequence[Outcome]) -> float:
    """X-X correlator of particles 1,2 of GHZ(n) given X outcomes on particles 3..n.

    Contract: +1 when the number of -1 outcomes is even, -1 when odd (the
    parity-conditioned entanglement-restoration property).
    """
    if not 3 <= n <= MAX_PARTICLES:
        raise ValueError(f"eraser check needs n in [3, {MAX_PARTICLES}], got {n}")
    if len(outcomes) != n - 2:
        raise ValueError(f"expected {n - 2} outcomes for particles 3..{n}, got {len(outcomes)}")
    state = make_ghz(n)
    for particle, outcome in enumerate(outcomes, start=3):
        prob, state = project(state, particle, Basis.X, Outcome(outcome))
        if state is None:
            raise UndefinedConditionError(
                f"X outcome chain hit probability {prob!r} at particle {particle}"
            )
    return correlator(state, [(1, Basis.X), (2, Basis.X)])
