"""Kernel backend selection: compiled Cython core with a pure-numpy fallback.

The compiled extension is used when importable; set MKQKD_PURE_KERNELS=1 to
force the pure backend. `use_backend` rebinds the exported callables at
runtime, which the benchmark uses to compare both implementations in one
process.
"""

from __future__ import annotations

import os

from . import pure

try:
    from . import _core
except ImportError:
    _core = None

_BACKENDS = {"pure": pure}
if _core is not None:
    _BACKENDS["compiled"] = _core

BACKEND_NAME = "pure"

born_plus = pure.born_plus
project = pure.project
measure = pure.measure
apply_pauli = pure.apply_pauli
apply_hadamard = pure.apply_hadamard

ZERO_PROBABILITY = pure.ZERO_PROBABILITY


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def backend_module(name: str):
    """The module implementing the named backend."""
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown kernel backend {name!r}; available: {available_backends()}") from None


def use_backend(name: str) -> None:
    """Rebind the exported kernels to the named backend ('pure' or 'compiled')."""
    global BACKEND_NAME, born_plus, project, measure, apply_pauli, apply_hadamard
    try:
        mod = _BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown kernel backend {name!r}; available: {available_backends()}") from None
    BACKEND_NAME = name
    born_plus = mod.born_plus
    project = mod.project
    measure = mod.measure
    apply_pauli = mod.apply_pauli
    apply_hadamard = mod.apply_hadamard


if _core is not None and not os.environ.get("MKQKD_PURE_KERNELS"):
    use_backend("compiled")
