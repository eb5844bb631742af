# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled amplitude kernels: Born probabilities, projective collapse, Pauli flips.

Same contract as mkqkd._kernels.pure; see that module for the conventions.
"""

from libc.math cimport sqrt

import numpy as np

ctypedef double complex cplx

# Probabilities below this are treated as an impossible branch.
ZERO_PROBABILITY = 1e-12

cdef double _ZERO_PROB = 1e-12


cdef inline double _born_plus(const cplx[::1] amps, int num_particles, int particle,
                              bint basis_x) nogil:
    cdef Py_ssize_t dim = (<Py_ssize_t>1) << num_particles
    cdef Py_ssize_t mask = (<Py_ssize_t>1) << (num_particles - particle)
    cdef Py_ssize_t i
    cdef double p = 0.0
    cdef cplx s
    if basis_x:
        for i in range(dim):
            if not (i & mask):
                s = 0.5 * (amps[i] + amps[i | mask])
                p += 2.0 * (s.real * s.real + s.imag * s.imag)
    else:
        for i in range(dim):
            if not (i & mask):
                p += amps[i].real * amps[i].real + amps[i].imag * amps[i].imag
    return p


cdef void _fill_projected(const cplx[::1] amps, cplx[::1] out, int num_particles,
                          int particle, bint basis_x, int sign, double prob) nogil:
    cdef Py_ssize_t dim = (<Py_ssize_t>1) << num_particles
    cdef Py_ssize_t mask = (<Py_ssize_t>1) << (num_particles - particle)
    cdef Py_ssize_t i, j
    cdef double scale = 1.0 / sqrt(prob)
    cdef cplx s
    for i in range(dim):
        out[i] = 0.0
    if basis_x:
        for i in range(dim):
            if not (i & mask):
                j = i | mask
                if sign > 0:
                    s = (amps[i] + amps[j]) * (0.5 * scale)
                    out[i] = s
                    out[j] = s
                else:
                    s = (amps[i] - amps[j]) * (0.5 * scale)
                    out[i] = s
                    out[j] = -s
    else:
        if sign > 0:
            for i in range(dim):
                if not (i & mask):
                    out[i] = amps[i] * scale
        else:
            for i in range(dim):
                if i & mask:
                    out[i] = amps[i] * scale


def born_plus(const cplx[::1] amps, int num_particles, int particle, bint basis_x):
    """Probability of the +1 outcome for a Z (basis_x=0) or X (basis_x=1) measurement."""
    return _born_plus(amps, num_particles, particle, basis_x)


def project(const cplx[::1] amps, int num_particles, int particle, bint basis_x, int sign):
    """Project onto the sign eigenspace of one particle and renormalize.

    Returns (branch probability, collapsed amplitudes); the collapsed array is
    None when the branch probability is numerically zero.
    """
    cdef double p_plus = _born_plus(amps, num_particles, particle, basis_x)
    cdef double prob = p_plus if sign > 0 else 1.0 - p_plus
    if prob < _ZERO_PROB:
        return prob, None
    out = np.empty(amps.shape[0], dtype=np.complex128)
    _fill_projected(amps, out, num_particles, particle, basis_x, sign, prob)
    return prob, out


def measure(const cplx[::1] amps, int num_particles, int particle, bint basis_x, double draw):
    """Born-rule measurement: +1 iff draw < p_plus, plus the collapsed state."""
    cdef double p_plus = _born_plus(amps, num_particles, particle, basis_x)
    cdef int sign = 1 if draw < p_plus else -1
    cdef double prob = p_plus if sign > 0 else 1.0 - p_plus
    if prob <= 0.0:
        raise ArithmeticError("measurement selected a zero-probability branch")
    out = np.empty(amps.shape[0], dtype=np.complex128)
    _fill_projected(amps, out, num_particles, particle, basis_x, sign, prob)
    return sign, out


def apply_pauli(const cplx[::1] amps, int num_particles, int particle, int axis):
    """Apply a single-particle Pauli operator; axis 0=X, 1=Y, 2=Z."""
    cdef Py_ssize_t dim = (<Py_ssize_t>1) << num_particles
    cdef Py_ssize_t mask = (<Py_ssize_t>1) << (num_particles - particle)
    cdef Py_ssize_t i, j
    out_arr = np.empty(dim, dtype=np.complex128)
    cdef cplx[::1] out = out_arr
    for i in range(dim):
        if not (i & mask):
            j = i | mask
            if axis == 0:
                out[i] = amps[j]
                out[j] = amps[i]
            elif axis == 1:
                out[i] = -1j * amps[j]
                out[j] = 1j * amps[i]
            else:
                out[i] = amps[i]
                out[j] = -amps[j]
    return out_arr


def apply_hadamard(const cplx[::1] amps, int num_particles, int particle):
    """Rotate one particle between the Z and X bases."""
    cdef Py_ssize_t dim = (<Py_ssize_t>1) << num_particles
    cdef Py_ssize_t mask = (<Py_ssize_t>1) << (num_particles - particle)
    cdef Py_ssize_t i, j
    cdef double inv_sqrt2 = 1.0 / sqrt(2.0)
    out_arr = np.empty(dim, dtype=np.complex128)
    cdef cplx[::1] out = out_arr
    for i in range(dim):
        if not (i & mask):
            j = i | mask
            out[i] = (amps[i] + amps[j]) * inv_sqrt2
            out[j] = (amps[i] - amps[j]) * inv_sqrt2
    return out_arr
