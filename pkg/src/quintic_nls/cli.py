"""Command line front end. Exit status is 1 when any verdict fails."""

from __future__ import annotations

import argparse
import contextlib
import csv
import json
import sys

import numpy as np

from . import diagnostics as dg
from .harness import GT4_PHASES, SimConfig, Verdict, run_experiment, run_lemma_checks, run_sweep, sweep_c, sweep_trends
from .lattice import LatticeParams, resonant_indices
from .nls_solver import (
    GalerkinIntegrator,
    coeffs_to_grid,
    dealiased_grid_size,
    energy,
    grid_to_coeffs,
    mass,
    split_step_evolve,
    theorem_initial_data,
    to_interaction_picture,
)
from .resonance import enumerate_res, phase_phi
from .toy_model import (
    band_invariants,
    closed_form_K,
    decay_phases,
    integrate_bands,
    kfun_bands,
    kfun_state,
)


def _lattice(args) -> LatticeParams:
    return LatticeParams.from_k(args.k, args.L, s=args.s, shift_n=args.shift)


def _out(args):
    return open(args.out, "w", newline="") if args.out else contextlib.nullcontext(sys.stdout)


def _report(verdicts, args) -> int:
    for v in verdicts:
        if args.json:
            print(v.to_json(), file=sys.stderr)
        elif not args.quiet:
            mark = "PASS" if v.passed else "FAIL"
            print(f"[{mark}] {v.name}: {v.value:.6g} (threshold {v.threshold:g}) {v.detail}", file=sys.stderr)
    return 0 if all(v.passed for v in verdicts) else 1


def cmd_resonance(args) -> int:
    p = _lattice(args)
    total, bad = 0, 0
    rows = []
    for m, row in enumerate(resonant_indices(p), start=1):
        for j, n6 in enumerate(row):
            tuples = enumerate_res(int(n6), p)
            total += len(tuples)
            bad += sum(phase_phi((*t, int(n6))) != 0 for t in tuples)
            rows.append((m, j, int(n6), len(tuples)))
    with _out(args) as fh:
        w = csv.writer(fh)
        w.writerow(["band", "j", "n", "n_tuples"])
        w.writerows(rows)
    return _report([Verdict("phi_zero_on_res", bad == 0, bad, 0, f"{total} ordered tuples")], args)


def cmd_toy(args) -> int:
    T = args.t_frac * args.L**3 / args.nu**2
    n_steps = int(np.ceil(T / args.dt - 1e-12))
    every = max(1, n_steps // args.records)
    times, I = integrate_bands(kfun_state(args.nu), args.nu, args.L, T, args.dt, record_every=every)
    ref = kfun_bands(times, args.nu, args.L)
    with _out(args) as fh:
        w = csv.writer(fh)
        w.writerow(["t", "I1", "I2", "I3", "I4", "K"])
        for t, row in zip(times, I):
            w.writerow([repr(float(t)), *(repr(float(x)) for x in row), repr(float(closed_form_K(t, args.nu, args.L)))])
    dev = float(np.max(np.abs(I - ref)))
    inv = band_invariants(I)
    drift = float(np.max(np.abs(inv - inv[0])))
    return _report(
        [Verdict("closed_form_match", dev <= 1e-6, dev, 1e-6, "absolute"),
         Verdict("invariant_drift", drift <= 1e-10, drift, 1e-10, "band sums and 1:-2 combinations")],
        args,
    )


def cmd_nls(args) -> int:
    p = _lattice(args)
    a0 = theorem_initial_data(args.nu, p, decay_phases(), args.ntrunc)
    T = args.t_frac * p.L**3 / args.nu**2
    n_steps = int(np.ceil(T / args.dt - 1e-12))
    every = max(1, n_steps // args.records)
    if args.integrator == "galerkin":
        snaps = GalerkinIntegrator(a0.N, p.L, args.grid).run(a0, T, args.dt, every)
        drift = abs(mass(snaps[-1]) - mass(a0)) / mass(a0)
    else:
        M = args.grid or dealiased_grid_size(a0.N, power_of_two=True)
        u = coeffs_to_grid(a0, M)
        m0 = mass(u)
        h = T / n_steps
        snaps, done = [a0], 0
        while done < n_steps:
            chunk = min(every, n_steps - done)
            u = split_step_evolve(u, p, h, chunk)
            done += chunk
            u.t = done * h
            snaps.append(to_interaction_picture(grid_to_coeffs(u, a0.N)))
        # the grid keeps modes beyond N, so conservation is judged on the grid
        drift = abs(mass(u) - m0) / m0
    with _out(args) as fh:
        w = csv.writer(fh)
        w.writerow(["t", "mass", "energy", "bm1", "bm2", "bm3", "bm4"])
        for s in snaps:
            w.writerow([repr(float(x)) for x in (s.t, mass(s), energy(s), *dg.band_mass(s, p))])
    if args.spectra:
        with open(args.spectra, "w") as fh:
            for s in snaps:
                fh.write(json.dumps({"t": s.t, "n": s.n.tolist(), "re": s.coeffs.real.tolist(), "im": s.coeffs.imag.tolist()}) + "\n")
    return _report([Verdict("mass_drift", drift <= 1e-4, drift, 1e-4, args.integrator)], args)


def _config(args, preset="kfun") -> SimConfig:
    theta = GT4_PHASES if preset == "gt4" else decay_phases()
    return SimConfig(
        lattice=_lattice(args), nu=args.nu, dt=args.dt, t_frac=args.t_frac, integrator=args.integrator,
        preset=preset, n_records=args.records, ntrunc=args.ntrunc, delta=args.delta, theta_bands=theta,
        csv_path=args.out, json_path=args.verdicts,
    )


def cmd_compare(args) -> int:
    res = run_experiment(_config(args, args.preset))
    if not args.out and not args.quiet:
        w = csv.writer(sys.stdout)
        w.writerow(dg.CSV_COLUMNS)
        for r in res.records:
            w.writerow([repr(float(x)) for x in r.row()])
    return _report(res.verdicts, args)


def cmd_sweep(args) -> int:
    rows = run_sweep(
        nus=args.nus, Ls=args.Ls, ks=args.ks, ss=(args.s,), workers=args.workers,
        dt=args.dt, t_frac=args.t_frac, integrator=args.integrator, n_records=args.records, delta=args.delta,
    )
    cols = ["nu", "L", "k", "s", "max_err_s_sq", "band_deviation", "c_fit", "mod_energy_rel", "error"]
    with _out(args) as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for r in rows:
            w.writerow([r[c] for c in cols])
    failed = [r for r in rows if r["error"]]
    c = sweep_c([r for r in rows if not r["error"]]) if len(failed) < len(rows) else float("inf")
    trends = sweep_trends(rows) if not failed else {"nu_decreasing": False, "k_increasing": False}
    me = max((r["mod_energy_rel"] for r in rows if not r["error"]), default=float("inf"))
    return _report(
        [Verdict("cells_ok", not failed, len(failed), 0, "cells that raised"),
         Verdict("single_c", c <= 10, c, 10, "largest per-cell fit"),
         Verdict("trend_nu", trends["nu_decreasing"], float(trends["nu_decreasing"]), 1, "max ||e||_s^2 vs nu"),
         Verdict("trend_k", trends["k_increasing"], float(trends["k_increasing"]), 1, "max ||e||_s^2 vs k"),
         Verdict("modified_energy", me < 0.1, me, 0.1, "worst relative gap")],
        args,
    )


def cmd_check(args) -> int:
    rep = run_lemma_checks(count_max_L=args.count_max_L)
    text = json.dumps(rep, indent=None if args.json else 2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    elif not args.quiet:
        print(text)
    return _report([Verdict(c["name"], c["passed"], float(c["passed"]), 1) for c in rep["checks"]], args)


def _floats(text):
    return [float(x) for x in text.split(",")]


def _ints(text):
    return [int(x) for x in text.split(",")]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file whose keys override the flag defaults")
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--quiet", action="store_true")
    common.add_argument("--json", action="store_true", help="verdicts as JSON lines on stderr")

    lat = argparse.ArgumentParser(add_help=False)
    lat.add_argument("--k", type=float, default=4)
    lat.add_argument("--L", type=int, default=2)
    lat.add_argument("--s", type=float, default=1.25)
    lat.add_argument("--shift", type=int, default=0)

    run = argparse.ArgumentParser(add_help=False)
    run.add_argument("--nu", type=float, default=0.2)
    run.add_argument("--dt", type=float, default=0.001)
    run.add_argument("--t-frac", dest="t_frac", type=float, default=0.1)
    run.add_argument("--records", type=int, default=40)
    run.add_argument("--ntrunc", type=int)
    run.add_argument("--grid", type=int, help="FFT grid size")
    run.add_argument("--integrator", choices=("galerkin", "splitstep"), default="galerkin")
    run.add_argument("--delta", type=float, help="modified-energy cutoff (default max(1e3, k^2/4))")

    ap = argparse.ArgumentParser(prog="quintic-nls", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("resonance", parents=[common, lat], help="enumerate res(xi) on R").set_defaults(func=cmd_resonance)

    toy = sub.add_parser("toy", parents=[common], help="averaged band system against K(t)")
    toy.add_argument("--nu", type=float, default=0.2)
    toy.add_argument("--L", type=int, default=2)
    toy.add_argument("--dt", type=float, default=0.01)
    toy.add_argument("--t-frac", dest="t_frac", type=float, default=10.0)
    toy.add_argument("--records", type=int, default=200)
    toy.set_defaults(func=cmd_toy)

    nls = sub.add_parser("nls", parents=[common, lat, run], help="full PDE run from the theorem data")
    nls.add_argument("--spectra", help="JSON-lines file for full spectra")
    nls.set_defaults(func=cmd_nls)

    cmp_ = sub.add_parser("compare", parents=[common, lat, run], help="full vs resonant, with bound fit")
    cmp_.add_argument("--preset", choices=("kfun", "gt4"), default="kfun")
    cmp_.add_argument("--verdicts", help="JSON-lines verdict file")
    cmp_.set_defaults(func=cmd_compare)

    sw = sub.add_parser("sweep", parents=[common, run], help="grid of compare runs")
    sw.add_argument("--nus", type=_floats, default=[0.1, 0.2])
    sw.add_argument("--Ls", type=_ints, default=[1, 2])
    sw.add_argument("--ks", type=_ints, default=[2, 4, 8])
    sw.add_argument("--s", type=float, default=1.25)
    sw.add_argument("--workers", type=int, default=1)
    sw.set_defaults(func=cmd_sweep)

    chk = sub.add_parser("check", parents=[common], help="exact lemma checks")
    chk.add_argument("--count-max-L", dest="count_max_L", type=int, default=256)
    chk.set_defaults(func=cmd_check)
    ap.commands = sub.choices
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.config:
        with open(args.config) as fh:
            overrides = json.load(fh)
        unknown = set(overrides) - set(vars(args))
        if unknown:
            ap.error(f"unknown config keys: {sorted(unknown)}")
        # config values become defaults, so explicit flags still win
        ap.commands[args.command].set_defaults(**overrides)
        args = ap.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
