#!/usr/bin/env python3
"""Compare the compiled and pure kernel backends.

Times the hot amplitude kernels on 3- and 6-particle states, then a full
protocol round loop under each backend. Run from the repository root:

    python3 benchmarks/bench_kernels.py [--rounds N]
"""

import argparse
import time

import numpy as np

import mkqkd._kernels as kernels
from mkqkd.adversary import ChannelModel, EveStrategy
from mkqkd.harness import Stage, derive_stream
from mkqkd.protocols import ProtocolKind, run_protocol


def time_call(fn, repeats):
    start = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - start) / repeats


def random_state(n, seed=0):
    rng = np.random.default_rng(seed)
    amps = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return (amps / np.linalg.norm(amps)).astype(np.complex128)


def bench_kernels(backend, repeats=50_000):
    results = {}
    for n in (3, 6):
        amps = random_state(n)
        results[f"born_plus   n={n}"] = time_call(lambda: backend.born_plus(amps, n, 2, 1), repeats)
        results[f"measure     n={n}"] = time_call(lambda: backend.measure(amps, n, 2, 1, 0.37), repeats)
        results[f"apply_pauli n={n}"] = time_call(lambda: backend.apply_pauli(amps, n, 2, 2), repeats)
        results[f"hadamard    n={n}"] = time_call(lambda: backend.apply_hadamard(amps, n, 2), repeats)
    return results


def bench_protocol(rounds):
    channel = ChannelModel(0.05)
    eve = EveStrategy.intercept_resend()
    start = time.perf_counter()
    run_protocol(
        ProtocolKind.MKS_QKD,
        rounds,
        channel,
        eve,
        derive_stream(1, 0, 0, Stage.ROUNDS),
        derive_stream(1, 0, 0, Stage.DISCLOSURE),
    )
    return time.perf_counter() - start


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rounds", type=int, default=20_000,
                        help="protocol rounds per backend (default 20000)")
    args = parser.parse_args()

    backends = kernels.available_backends()
    if "compiled" not in backends:
        print("compiled backend not built; showing pure only")

    kernel_rows = {}
    protocol_times = {}
    for name in backends:
        kernels.use_backend(name)
        kernel_rows[name] = bench_kernels(kernels.backend_module(name))
        protocol_times[name] = bench_protocol(args.rounds)

    print(f"\nkernel timings (per call)")
    header = f"{'kernel':<16}" + "".join(f"{name:>12}" for name in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for key in next(iter(kernel_rows.values())):
        row = f"{key:<16}"
        for name in backends:
            row += f"{kernel_rows[name][key] * 1e6:>10.2f}us"
        if len(backends) == 2:
            ratio = kernel_rows["pure"][key] / kernel_rows["compiled"][key]
            row += f"{ratio:>9.1f}x"
        print(row)

    print(f"\nMKS protocol, {args.rounds} rounds (noise 0.05, intercept-resend Eve)")
    for name in backends:
        per_round = protocol_times[name] / args.rounds * 1e6
        print(f"  {name:<9} {protocol_times[name]:7.2f}s total   {per_round:7.1f}us/round")
    if len(backends) == 2:
        ratio = protocol_times["pure"] / protocol_times["compiled"]
        print(f"  end-to-end speedup: {ratio:.2f}x")


if __name__ == "__main__":
    main()
