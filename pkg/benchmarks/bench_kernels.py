"""Compare the numba and numpy kernels.

    python benchmarks/bench_kernels.py [--repeat N]

The first numba call includes compilation (cached on disk afterwards), so
it is reported separately from the steady-state timings.
"""
import argparse
import time

import numpy as np

from usc_sec import bogoliubov, fock, kernels, lindblad, models
from usc_sec import sec_rates as sr
from usc_sec.models import ModelParams


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def secular_case(levels):
    p = ModelParams(1.0, 0.1, kappa0_ref=1e-3)
    es = fock.eig_hermitian(models.build_hamiltonian(p, (20, 20)), levels)
    rates = sr.eigensystem_rates(sr.make_flavor(sr.CouplingKind.CIRCUIT_A, p), es)
    gen = lindblad.build_generator(es, rates, 0.3)
    rho0 = np.diag(np.full(levels, 1.0 / levels)).astype(complex)
    return gen.decay_rates(), gen.transfer_matrix(), rho0


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    rows = []
    for levels in (6, 12, 24):
        G, W, rho0 = secular_case(levels)
        run = {
            "numpy": lambda: kernels.secular_rk4_numpy(G, W, rho0, 1.0, 10_000, 100),
            "numba": lambda: kernels.secular_rk4_numba(G, W, rho0, 1.0, 10_000, 100),
        }
        t0 = time.perf_counter()
        run["numba"]()
        first = time.perf_counter() - t0
        rows.append((f"secular_rk4 N={levels}, 1e4 steps", best_of(run["numpy"], args.repeat),
                     best_of(run["numba"], args.repeat), first))

    m = bogoliubov.hopfield_diagonalize(ModelParams(1.0, 0.1))
    rates = sr.rates_circuit_a(m)
    for npts in (10_000, 1_000_000):
        w = np.linspace(0.5, 1.5, npts)
        t0 = time.perf_counter()
        kernels.allpass_numba(w, rates.omega, rates.kappa)
        first = time.perf_counter() - t0
        rows.append((f"allpass {npts} points",
                     best_of(lambda: kernels.allpass_numpy(w, rates.omega, rates.kappa), args.repeat),
                     best_of(lambda: kernels.allpass_numba(w, rates.omega, rates.kappa), args.repeat),
                     first))

    print(f"{'kernel':34s} {'numpy [s]':>10s} {'numba [s]':>10s} {'speedup':>8s} {'first call':>11s}")
    for name, tn, tb, first in rows:
        print(f"{name:34s} {tn:10.4f} {tb:10.4f} {tn / tb:8.1f} {first:11.3f}")


if __name__ == "__main__":
    main()
