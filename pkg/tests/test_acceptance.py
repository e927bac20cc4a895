"""Acceptance criteria 1 to 9, each at its stated tolerance."""

import time

import numpy as np
import pytest

from quintic_nls.harness import run_sweep, sweep_c, sweep_trends
from quintic_nls.lattice import LatticeParams, resonant_indices
from quintic_nls.nls_solver import (
    GalerkinIntegrator,
    SpectralField,
    coeffs_to_grid,
    energy,
    grid_to_coeffs,
    mass,
    split_step_evolve,
    to_interaction_picture,
)
from quintic_nls.resonance import (
    brute_force_res,
    classify_eta_solutions,
    count_half_sum_pairs,
    enumerate_res,
    phase_phi,
)
from quintic_nls.toy_model import (
    band_average,
    band_invariants,
    closed_form_K,
    closed_form_K_dot,
    decay_phases,
    integrate_bands,
    integrate_resonant,
    j_vars,
    kfun_bands,
    kfun_state,
    mode_invariants,
    pK_rhs,
    pert_initial_data,
)


def test_criterion_1_resonance_has_zero_phase(verdict_line):
    start = time.perf_counter()
    nonzero, mismatched, total = 0, 0, 0
    for k in (1, 2, 4):
        for L in (1, 2, 4, 8):
            p = LatticeParams.from_k(k, L)
            for n6 in resonant_indices(p).ravel():
                tuples = enumerate_res(int(n6), p)
                total += len(tuples)
                nonzero += sum(phase_phi((*t, int(n6))) != 0 for t in tuples)
                if L <= 4 and tuples != brute_force_res(int(n6), p):
                    mismatched += 1
    elapsed = time.perf_counter() - start
    ok = nonzero == 0 and mismatched == 0 and elapsed < 10
    verdict_line(1, ok, f"{total} tuples, {nonzero} with phi != 0, {mismatched} brute-force mismatches, {elapsed:.2f} s")
    assert ok


def test_criterion_2_eta_families(verdict_line):
    start = time.perf_counter()
    fam = classify_eta_solutions(20)
    elapsed = time.perf_counter() - start
    counts = {key: len(v) for key, v in fam.items()}
    ok = counts["other"] == 0 and all(counts[key] > 0 for key in ("equal", "114_330", "330_114")) and elapsed < 1
    verdict_line(2, ok, f"family sizes {counts}, {elapsed:.3f} s")
    assert ok


def test_criterion_3_half_sum_counts(verdict_line):
    bad = []
    for L in range(1, 257):
        by_j, _ = count_half_sum_pairs(L)
        oracle = sum(min(j + 1, L - j) for j in range(L))
        if by_j != oracle or abs(by_j - L * L / 4) > L:
            bad.append(L)
    verdict_line(3, not bad, f"L = 1..256, failing {bad}")
    assert not bad


def test_criterion_4_K_solves_its_ode(verdict_line):
    worst_analytic, worst_fd, worst_k0 = 0.0, 0.0, 0.0
    k0_value = 0.0
    for nu in (0.1, 0.2):
        for L in (1, 2, 4):
            S = L**3 / nu**2
            t = np.linspace(0, 10 * S, 2001)
            K = closed_form_K(t, nu, L)
            rhs = pK_rhs(K, nu, L)
            worst_analytic = max(worst_analytic, np.max(np.abs(closed_form_K_dot(t, nu, L) - rhs)))
            # fourth-order central differences; K is odd in t, so this is also valid at t = 0
            h = 1e-3 * S
            fd = (8 * (closed_form_K(t + h, nu, L) - closed_form_K(t - h, nu, L))
                  - (closed_form_K(t + 2 * h, nu, L) - closed_form_K(t - 2 * h, nu, L))) / (12 * h)
            worst_fd = max(worst_fd, np.max(np.abs(fd - rhs)))
            k0_value = max(k0_value, abs(float(closed_form_K(0.0, nu, L))))
            worst_k0 = max(worst_k0, abs(float(closed_form_K_dot(0.0, nu, L)) - 3 / (4 * L**3)), abs(fd[0] - 3 / (4 * L**3)))
    ok = worst_analytic <= 1e-8 and worst_fd <= 1e-8 and k0_value == 0 and worst_k0 <= 1e-10
    verdict_line(4, ok, f"residual {max(worst_analytic, worst_fd):.2e}, |K(0)| = {k0_value}, K'(0) error {worst_k0:.2e}")
    assert ok


def test_criterion_5_band_flow(verdict_line):
    worst_dev, worst_inv = 0.0, 0.0
    for nu in (0.1, 0.2):
        for L in (1, 2, 4):
            S = L**3 / nu**2
            t, I = integrate_bands(kfun_state(nu), nu, L, 10 * S, 1e-3 * S)
            worst_dev = max(worst_dev, np.max(np.abs(I - kfun_bands(t, nu, L))))
            inv = band_invariants(I)
            J = np.array([j_vars(x) for x in I])[:, 1:]
            worst_inv = max(worst_inv, np.max(np.abs(inv - inv[0])), np.max(np.abs(J - J[0])))
    ok = worst_dev <= 1e-6 and worst_inv <= 1e-10
    verdict_line(5, ok, f"max |I - K-family| {worst_dev:.2e}, invariant drift {worst_inv:.2e}")
    assert ok


def test_criterion_6_resonant_system(verdict_line):
    nu, L, k = 0.2, 2, 4
    p = LatticeParams.from_k(k, L)
    T = 0.1 * L**3 / nu**2
    dt = 0.01
    times, states = integrate_resonant(pert_initial_data(nu, p, decay_phases()), p, T, dt)
    m = np.sum(np.abs(states) ** 2, axis=(1, 2))
    mass_drift = np.max(np.abs(m - m[0])) / m[0]
    inv = mode_invariants(states)
    inv_drift = np.max(np.abs(inv - inv[0])) / np.max(np.abs(inv[0]))
    th = np.angle(states)
    lock = 2 * th[:, 1] + th[:, 3] - 2 * th[:, 0] - th[:, 2]
    lock_drift = np.max(np.abs(np.angle(np.exp(1j * (lock - lock[0])))))
    _, bands = integrate_bands(kfun_state(nu), nu, L, T, dt)
    avg = np.array([band_average(s).I_R for s in states])
    band_dev = np.max(np.abs(avg - bands)) / nu
    parts = {
        "mass": mass_drift <= 1e-10,
        "invariants": inv_drift <= 1e-10,
        "phase lock": lock_drift <= 1e-8,
        "band average": band_dev <= 0.01,
    }
    ok = all(parts.values())
    verdict_line(
        6, ok,
        f"mass {mass_drift:.1e}, invariants {inv_drift:.1e}, lock {lock_drift:.1e}, "
        f"band average {band_dev:.4f} nu vs 0.01 (failing parts: {[k for k, v in parts.items() if not v]})",
    )
    assert ok


def _smooth_data(N=16, L=1, seed=0):
    rng = np.random.default_rng(seed)
    n = np.arange(-N, N + 1)
    c = (rng.normal(size=n.size) + 1j * rng.normal(size=n.size)) * np.exp(-0.8 * np.abs(n)) * 0.8
    return SpectralField(c, L)


def _energy_drift(u0, n_steps, samples=10):
    e0 = energy(u0)
    u, worst = u0, 0.0
    for _ in range(samples):
        u = split_step_evolve(u, None, 1.0 / n_steps, n_steps // samples)
        worst = max(worst, abs(energy(u) - e0) / e0)
    return worst


def test_criterion_7_cross_oracle(verdict_line):
    f = _smooth_data(seed=1)
    a = GalerkinIntegrator(16, 1).run(f, 1.0, 1e-4, record_every=10_000)[-1]
    u0 = coeffs_to_grid(f, 128)
    u = split_step_evolve(u0, None, 1e-4, 10_000)
    b = to_interaction_picture(grid_to_coeffs(u, 16))
    sup = np.max(np.abs(a.coeffs - b.coeffs))
    mass_drift = abs(mass(u) - mass(u0)) / mass(u0)

    g0 = coeffs_to_grid(_smooth_data(seed=0), 128)
    ratio = _energy_drift(g0, 10_000) / _energy_drift(g0, 20_000)
    ok = sup <= 1e-6 and mass_drift <= 1e-12 and ratio >= 4
    verdict_line(7, ok, f"sup-norm gap {sup:.1e}, split-step mass drift {mass_drift:.1e}, energy drift ratio {ratio:.4f}")
    assert ok


@pytest.fixture(scope="module")
def sweep_rows():
    return run_sweep(nus=(0.1, 0.2), Ls=(1, 2), ks=(2, 4, 8), ss=(1.25,), dt=0.001, t_frac=0.1, n_records=40)


@pytest.mark.slow
def test_criterion_8_error_bound_sweep(sweep_rows, verdict_line):
    failed = [r for r in sweep_rows if r["error"]]
    c = sweep_c(sweep_rows) if not failed else float("inf")
    trends = sweep_trends(sweep_rows) if not failed else {}
    ok = not failed and c <= 10 and trends.get("nu_decreasing", False) and trends.get("k_increasing", False)
    verdict_line(8, ok, f"{len(sweep_rows)} cells, {len(failed)} raised, single c = {c:.3f}, trends {trends}")
    assert ok


@pytest.mark.slow
def test_criterion_9_modified_energy(sweep_rows, verdict_line):
    gaps = [r["mod_energy_rel"] for r in sweep_rows]
    worst = max(gaps)
    ok = all(not r["error"] for r in sweep_rows) and worst < 0.1
    verdict_line(9, ok, f"worst |E~ - ||e||^2| / ||e||^2 = {worst:.2e} over {len(gaps)} runs")
    assert ok
