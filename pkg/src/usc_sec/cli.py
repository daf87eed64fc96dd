"""Command-line front end (``usc``).

Subcommands::

    usc spectrum   polariton frequencies of circuits A and B along a sweep
    usc lossrates  polariton loss rates along a sweep, normalized to kappa0
    usc master     master-equation trajectory in the eigenbasis
    usc inout      reflection spectrum of a probe field

Frequencies are in units of the qubit frequency ``omega_x``; rates are
normalized to ``kappa0``, the bare resonator rate at ``omega_z == omega_x``.
Exit codes: 0 success, 1 usage, 2 netlist diagnostics, 3 numeric failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import scipy.constants as const

from . import bogoliubov, fock, inout, lindblad, models, netlist
from . import sec_rates as sr
from .errors import USCError
from .models import ModelParams, Variant

DIGITS = 12
EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_NUMERIC = 0, 1, 2, 3
FLAVORS = ("straightforward", "general", "standard")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fmt(x) -> str:
    return f"{float(x):.{DIGITS}g}"


def _workers(n: int) -> int:
    cap = os.environ.get("USC_THREADS")
    limit = int(cap) if cap and cap.isdigit() and int(cap) > 0 else (os.cpu_count() or 1)
    return max(1, min(limit, n))


def parallel_map(fn, items):
    """``map`` over a thread pool capped by ``USC_THREADS``; order preserved."""
    items = list(items)
    if len(items) <= 1 or _workers(len(items)) == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=_workers(len(items))) as pool:
        return list(pool.map(fn, items))


# --- configuration ----------------------------------------------------------


class Config:
    """Resolved model settings shared by the subcommands."""

    def __init__(self, args):
        self.args = args
        self.model = None
        if args.netlist:
            spec = netlist.load_netlist(args.netlist)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                self.model = netlist.to_model(spec)
            if spec.qubit is None:
                raise UsageError("the netlist has no [qubit] section")
            base = self.model.params
        else:
            base = ModelParams(1.0, 0.1 if args.g is None else args.g,
                               kappa0_ref=args.kappa0, allow_bad_cavity=True)
        g = base.g if args.g is None else args.g
        wz = base.omega_z if args.wz is None else args.wz
        self.base = base.with_(g=g, omega_z=wz, allow_bad_cavity=True)
        if getattr(args, "circuit", None):
            self.base = self.base.with_(variant=Variant(args.circuit))
        self.temperature = self._temperature(args)

    def _temperature(self, args) -> float:
        if args.temp_reduced is not None:
            if args.temp is not None:
                raise UsageError("give --temp or --temp-reduced, not both")
            return float(args.temp_reduced)
        if args.temp is None or args.temp == 0:
            return 0.0
        if self.model is None:
            raise UsageError("--temp in kelvin needs --netlist for the frequency scale; "
                             "use --temp-reduced otherwise")
        return const.k * args.temp / (const.hbar * self.model.omega_unit)

    def sweep(self):
        """``(column name, values, params factory)`` for the configured sweep."""
        a = self.args
        if a.points < 2:
            raise UsageError("--points must be >= 2")
        if a.gmin is not None or a.gmax is not None:
            if a.gmin is None or a.gmax is None:
                raise UsageError("--gmin and --gmax go together")
            if not 0 <= a.gmin < a.gmax:
                raise UsageError("need 0 <= gmin < gmax")
            vals = np.linspace(a.gmin, a.gmax, a.points)
            return "g", vals, lambda v, variant: self.base.with_(g=float(v), variant=variant)
        if not 0 < a.wmin < a.wmax:
            raise UsageError("need 0 < wmin < wmax")
        vals = np.linspace(a.wmin, a.wmax, a.points)
        return ("omega_z[omega_x]", vals,
                lambda v, variant: self.base.with_(omega_z=float(v), variant=variant))


# --- commands ---------------------------------------------------------------


def cmd_spectrum(cfg: Config):
    name, vals, make = cfg.sweep()

    def point(v):
        row = [v]
        for variant in (Variant.CIRCUIT_A, Variant.CIRCUIT_B):
            row += list(bogoliubov.hopfield_diagonalize(make(v, variant)).omegas)
        return row

    cols = [name, "omega_L^A[omega_x]", "omega_U^A[omega_x]",
            "omega_L^B[omega_x]", "omega_U^B[omega_x]"]
    return cols, parallel_map(point, vals), _sweep_meta(name, vals)


def _sweep_meta(name, vals):
    return {"sweep": {"variable": name, "min": float(vals[0]), "max": float(vals[-1]),
                      "points": int(vals.size)}}


def _mode_rates(p: ModelParams, flavor: str):
    m = bogoliubov.hopfield_diagonalize(p)
    if flavor == "standard":
        return sr.rates_standard(m)
    if flavor == "general":
        return sr.rates_general(m)
    if p.variant is Variant.CIRCUIT_A:
        return sr.rates_circuit_a(m)
    return sr.rates_circuit_b(m)


def cmd_lossrates(cfg: Config):
    name, vals, make = cfg.sweep()
    flavor = cfg.args.flavor
    norm = cfg.base.kappa0_ref

    def point(v):
        row = [v]
        for variant in (Variant.CIRCUIT_A, Variant.CIRCUIT_B):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", sr.IndependentTransitionWarning)
                row += list(_mode_rates(make(v, variant), flavor).kappa / norm)
        row.append(make(v, Variant.CIRCUIT_A).kappa_lc0 / norm)
        return row

    cols = [name, "kappa_L^A[kappa0]", "kappa_U^A[kappa0]", "kappa_L^B[kappa0]",
            "kappa_U^B[kappa0]", "kappa_LC0[kappa0]"]
    return cols, parallel_map(point, vals), {"flavor": flavor, **_sweep_meta(name, vals)}


def _circuit_flavor(cfg: Config, p: ModelParams) -> sr.SecFlavor:
    if cfg.args.flavor == "general":
        return sr.make_flavor(sr.CouplingKind.GENERAL_FLUX, p)
    kind = sr.CouplingKind.CIRCUIT_A if p.variant is Variant.CIRCUIT_A else sr.CouplingKind.CIRCUIT_B
    return sr.make_flavor(kind, p)


def _initial_state(spec: str, es: fock.EigenSystem, temperature: float):
    n = len(es)
    if spec == "ground":
        return lindblad.DensityMatrix.basis(n, 0)
    kind, _, arg = spec.partition(":")
    if kind == "eigen":
        k = int(arg)
        if not 0 <= k < n:
            raise UsageError(f"eigenstate index {k} outside 0..{n - 1}")
        return lindblad.DensityMatrix.basis(n, k)
    if kind == "fock":
        occ = tuple(int(s) for s in arg.split(","))
        vec = es.states.conj().T @ fock.basis_state(es.dims, occ)
        weight = np.linalg.norm(vec)
        if weight < 0.999:
            raise UsageError(f"Fock state {occ} is poorly represented by {n} levels "
                             f"(weight {weight ** 2:.3g})")
        return lindblad.DensityMatrix.pure(vec)
    if kind == "thermal":
        if temperature <= 0:
            return lindblad.DensityMatrix.basis(n, 0)
        w = np.exp(-(es.frequencies - es.frequencies[0]) / temperature)
        return lindblad.DensityMatrix(np.diag(w / w.sum()).astype(complex))
    raise UsageError(f"unknown initial state {spec!r} (ground | eigen:K | fock:NA,NB | thermal)")


def cmd_master(cfg: Config):
    a = cfg.args
    p = cfg.base
    dims = (a.dims, a.dims)
    es = fock.eig_hermitian(models.build_hamiltonian(p, dims), a.levels)
    T = cfg.temperature
    if a.flavor == "standard":
        gen = lindblad.build_generator_standard(es, p.kappa_lc0, p.omega_z, T)
    else:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", sr.IndependentTransitionWarning)
            rates = sr.eigensystem_rates(_circuit_flavor(cfg, p), es)
        gen = lindblad.build_generator(es, rates, T)
    rho0 = _initial_state(a.initial, es, T)
    t_final = a.t_final if a.t_final is not None else 10.0 / p.kappa0_ref
    dt = a.dt if a.dt is not None else min(0.05 / max(gen.max_rate(), 1e-300), t_final / 10)
    if t_final > 0 and a.samples > 0:
        stride = max(1, int(np.ceil(t_final / dt)) // a.samples)
    else:
        stride = 1
    traj = lindblad.evolve(gen, rho0, t_final, dt, stride)
    am, bm = fock.two_mode_ops(dims)
    obs = {"n_a": es.matrix(am.dag @ am), "n_b": es.matrix(bm.dag @ bm)}
    pops = traj.populations()
    cols = ["t[1/omega_x]"] + [f"p{k}" for k in range(pops.shape[1])] + list(obs)
    vals = [traj.expectation(o).real for o in obs.values()]
    rows = [[t, *pops[i], *(v[i] for v in vals)] for i, t in enumerate(traj.times)]
    return cols, rows, {"flavor": a.flavor, "temperature_reduced": T, "levels": a.levels,
                        "dims": list(dims), "initial": a.initial}


def cmd_inout(cfg: Config):
    a = cfg.args
    p = cfg.base
    if a.flavor == "standard":
        rates = sr.rates_standard(bogoliubov.hopfield_diagonalize(p))
    else:
        rates = _mode_rates(p, a.flavor)
    lo = a.omin if a.omin is not None else 0.8 * rates.omega.min()
    hi = a.omax if a.omax is not None else 1.2 * rates.omega.max()
    if not 0 < lo < hi:
        raise UsageError("need 0 < omin < omax")
    if a.npts < 2:
        raise UsageError("--npts must be >= 2")
    grid = np.linspace(lo, hi, a.npts)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", sr.IndependentTransitionWarning)
        spec = inout.spectrum(None, rates, grid)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    cols = ["omega[omega_x]", "re_r", "im_r", "phase[rad]", "group_delay[1/omega_x]"]
    rows = [list(r) for r in zip(spec.omega, spec.amplitude.real, spec.amplitude.imag,
                                 spec.phase, spec.group_delay)]
    return cols, rows, {"flavor": a.flavor, "independent_transitions": spec.independent,
                        "kappa": [float(k) for k in rates.kappa]}


COMMANDS = {"spectrum": cmd_spectrum, "lossrates": cmd_lossrates, "master": cmd_master,
            "inout": cmd_inout}


# --- output -----------------------------------------------------------------


def render(cols, rows, meta, fmt: str) -> str:
    if fmt == "json":
        doc = {"meta": meta, "columns": cols,
               "rows": [[float(_fmt(x)) for x in row] for row in rows]}
        return json.dumps(doc, indent=1, sort_keys=False) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for row in rows:
        w.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="usc", description="Polariton spectra, loss rates and dynamics of "
                 "resonator/qubit circuits.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--netlist", help="circuit file; sets g, kappa0 and the circuit")
        sp.add_argument("--g", type=float, help="coupling strength (overrides the netlist)")
        sp.add_argument("--kappa0", type=float, default=1e-3,
                        help="bare rate at omega_z = omega_x, units of omega_x (default 1e-3)")
        sp.add_argument("--wz", type=float, help="omega_z/omega_x for fixed-point commands and "
                        "g sweeps (default: netlist value or 1)")
        sp.add_argument("--wmin", type=float, default=0.5)
        sp.add_argument("--wmax", type=float, default=1.5)
        sp.add_argument("--gmin", type=float, help="sweep g instead of omega_z")
        sp.add_argument("--gmax", type=float)
        sp.add_argument("--points", type=int, default=101)
        sp.add_argument("--flavor", choices=FLAVORS, default="straightforward")
        sp.add_argument("--circuit", choices=("A", "B"),
                        help="circuit for master/inout (default: netlist or A)")
        sp.add_argument("--temp", type=float, help="temperature in kelvin (needs --netlist)")
        sp.add_argument("--temp-reduced", type=float, help="k_B T / (hbar omega_x)")
        sp.add_argument("--out", help="output file (default stdout)")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        if name == "master":
            sp.add_argument("--dims", type=int, default=20, help="Fock truncation per mode")
            sp.add_argument("--levels", type=int, default=10, help="eigenstates kept")
            sp.add_argument("--initial", default="eigen:1",
                            help="ground | eigen:K | fock:NA,NB | thermal")
            sp.add_argument("--t-final", type=float, help="default 10/kappa0")
            sp.add_argument("--dt", type=float)
            sp.add_argument("--samples", type=int, default=200)
        if name == "inout":
            sp.add_argument("--omin", type=float)
            sp.add_argument("--omax", type=float)
            sp.add_argument("--npts", type=int, default=2001)
    return ap


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = Config(args)
        cols, rows, meta = COMMANDS[args.command](cfg)
    except UsageError as exc:
        print(f"usc: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except netlist.NetlistError as exc:
        for d in exc.diagnostics:
            print(f"{args.netlist}:{d}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"usc: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ArithmeticError as exc:
        print(f"usc: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (USCError, ValueError) as exc:
        print(f"usc: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_USAGE
    meta = {"command": args.command, "g": cfg.base.g, "kappa0": cfg.base.kappa0_ref,
            "circuit_from_netlist": cfg.base.variant.value if args.netlist else None, **meta}
    text = render(cols, rows, meta, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
