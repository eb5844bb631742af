"""Pure-numpy amplitude kernels, the fallback when the compiled core is absent.

Amplitude vectors are 1-D complex128 arrays of length 2**num_particles.
Particle 1 owns the most significant bit of the basis-state index; bit 0
is spin-up. Every kernel returns a fresh array and never mutates its input.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

_SQRT_HALF = 1.0 / np.sqrt(2.0)

# Probabilities below this are treated as an impossible branch.
ZERO_PROBABILITY = 1e-12


@lru_cache(maxsize=None)
def _pair_indices(num_particles: int, particle: int) -> tuple[np.ndarray, np.ndarray]:
    """Index pairs (bit=0, bit=1) for one particle's position, cached per shape."""
    shift = num_particles - particle
    idx = np.arange(1 << num_particles)
    low = idx[(idx >> shift) & 1 == 0]
    return low, low | (1 << shift)


def born_plus(amps: np.ndarray, num_particles: int, particle: int, basis_x: int) -> float:
    """Probability of the +1 outcome for a Z (basis_x=0) or X (basis_x=1) measurement."""
    i0, i1 = _pair_indices(num_particles, particle)
    if basis_x:
        s = (amps[i0] + amps[i1]) * 0.5
        return float(2.0 * np.sum(s.real * s.real + s.imag * s.imag))
    a = amps[i0]
    return float(np.sum(a.real * a.real + a.imag * a.imag))


def project(
    amps: np.ndarray, num_particles: int, particle: int, basis_x: int, sign: int
) -> tuple[float, np.ndarray | None]:
    """Project onto the sign eigenspace of one particle and renormalize.

    Returns (branch probability, collapsed amplitudes); the collapsed array is
    None when the branch probability is numerically zero.
    """
    p_plus = born_plus(amps, num_particles, particle, basis_x)
    prob = p_plus if sign > 0 else 1.0 - p_plus
    if prob < ZERO_PROBABILITY:
        return prob, None
    i0, i1 = _pair_indices(num_particles, particle)
    out = np.zeros_like(amps)
    scale = 1.0 / np.sqrt(prob)
    if basis_x:
        if sign > 0:
            s = (amps[i0] + amps[i1]) * (0.5 * scale)
            out[i0] = s
            out[i1] = s
        else:
            s = (amps[i0] - amps[i1]) * (0.5 * scale)
            out[i0] = s
            out[i1] = -s
    else:
        if sign > 0:
            out[i0] = amps[i0] * scale
        else:
            out[i1] = amps[i1] * scale
    return prob, out


def measure(
    amps: np.ndarray, num_particles: int, particle: int, basis_x: int, draw: float
) -> tuple[int, np.ndarray]:
    """Born-rule measurement: +1 iff draw < p_plus, plus the collapsed state."""
    p_plus = born_plus(amps, num_particles, particle, basis_x)
    sign = 1 if draw < p_plus else -1
    _, out = project(amps, num_particles, particle, basis_x, sign)
    if out is None:
        # Unreachable for draw in [0,1): the selected branch has prob >= draw margin.
        raise ArithmeticError("measurement selected a zero-probability branch")
    return sign, out


def apply_pauli(amps: np.ndarray, num_particles: int, particle: int, axis: int) -> np.ndarray:
    """Apply a single-particle Pauli operator; axis 0=X, 1=Y, 2=Z."""
    i0, i1 = _pair_indices(num_particles, particle)
    out = np.empty_like(amps)
    if axis == 0:
        out[i0] = amps[i1]
        out[i1] = amps[i0]
    elif axis == 1:
        out[i0] = -1j * amps[i1]
        out[i1] = 1j * amps[i0]
    else:
        out[i0] = amps[i0]
        out[i1] = -amps[i1]
    return out


def apply_hadamard(amps: np.ndarray, num_particles: int, particle: int) -> np.ndarray:
    """Rotate one particle between the Z and X bases."""
    i0, i1 = _pair_indices(num_particles, particle)
    out = np.empty_like(amps)
    a0 = amps[i0]
    a1 = amps[i1]
    out[i0] = (a0 + a1) * _SQRT_HALF
    out[i1] = (a0 - a1) * _SQRT_HALF
    return out
