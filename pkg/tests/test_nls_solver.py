import numpy as np
import pytest

from quintic_nls.lattice import LatticeParams, resonant_indices
from quintic_nls.nls_solver import (
    GalerkinIntegrator,
    GridField,
    QuinticOperator,
    SpectralField,
    coeffs_to_grid,
    dealiased_grid_size,
    default_ntrunc,
    embed_resonant,
    energy,
    from_interaction_picture,
    galerkin_rhs,
    galerkin_rhs_direct,
    grid_to_coeffs,
    mass,
    split_step_evolve,
    theorem_initial_data,
    to_interaction_picture,
)
from quintic_nls.toy_model import decay_phases


def random_field(N, L, seed=0, amp=0.8, t=0.0):
    rng = np.random.default_rng(seed)
    n = np.arange(-N, N + 1)
    c = (rng.normal(size=n.size) + 1j * rng.normal(size=n.size)) * np.exp(-0.8 * np.abs(n)) * amp
    return SpectralField(c, L, t)


def plane_wave(N, L, n0, A):
    f = SpectralField.zeros(N, L, picture="physical")
    f.coeffs[n0 + N] = L * A
    return f


def test_spectral_field_basics():
    f = SpectralField.zeros(3, 2)
    assert f.N == 3 and f.n.tolist() == [-3, -2, -1, 0, 1, 2, 3]
    np.testing.assert_allclose(f.xi, np.pi * f.n)
    f.coeffs[4] = 2.0
    assert f.at([1, 10, -10]).tolist() == [2.0, 0.0, 0.0]
    with pytest.raises(ValueError):
        SpectralField(np.zeros(4), 1)
    with pytest.raises(ValueError):
        SpectralField(np.zeros(3), 1, picture="lab")


def test_grid_sizes():
    assert dealiased_grid_size(5) >= 33
    assert dealiased_grid_size(5, power_of_two=True) == 64
    assert dealiased_grid_size(16, power_of_two=True) == 128
    with pytest.raises(ValueError):
        QuinticOperator(10, 1, M=40)


def test_grid_sample_positions():
    g = coeffs_to_grid(plane_wave(2, 2, 1, 1.0), 8)
    assert g.x[0] == -1.0 and g.M == 8
    np.testing.assert_allclose(g.values, np.exp(1j * np.pi * g.x), atol=1e-15)


def test_round_trip():
    f = random_field(12, 3, t=0.7)
    back = to_interaction_picture(grid_to_coeffs(coeffs_to_grid(f, 64), 12))
    assert np.max(np.abs(back.coeffs - f.coeffs)) <= 1e-14
    with pytest.raises(ValueError):
        coeffs_to_grid(f, 20)


def test_picture_changes_are_inverse():
    f = random_field(6, 2, t=1.3)
    g = from_interaction_picture(f)
    assert g.picture == "physical"
    np.testing.assert_allclose(to_interaction_picture(g).coeffs, f.coeffs, rtol=1e-15)
    assert to_interaction_picture(f) is f


def test_single_mode_rhs():
    L = 2
    c = 0.7 - 0.4j
    f = SpectralField.zeros(4, L, t=0.3)
    f.coeffs[3 + 4] = c
    expected = -1j * abs(c) ** 4 * c / L**4
    for rhs in (galerkin_rhs(f), galerkin_rhs_direct(f)):
        assert rhs[3 + 4] == pytest.approx(expected, abs=1e-15)
        assert np.max(np.abs(np.delete(rhs, 3 + 4))) < 1e-15


@pytest.mark.parametrize("L,t", [(1, 0.0), (2, 0.37), (3, 1.1)])
def test_fft_rhs_matches_direct_sum(L, t):
    f = random_field(4, L, seed=L, t=t)
    np.testing.assert_allclose(galerkin_rhs(f), galerkin_rhs_direct(f), atol=1e-14)
    with pytest.raises(ValueError):
        galerkin_rhs(from_interaction_picture(f))


def test_rhs_preserves_mass_infinitesimally():
    f = random_field(10, 2, seed=4, t=0.2)
    d = galerkin_rhs(f)
    assert abs(np.sum(np.real(np.conj(f.coeffs) * d))) < 1e-15


def test_rhs_shift_covariance():
    # shifting every index by s leaves both momentum and the phase unchanged
    base = random_field(3, 2, seed=5, t=0.4)
    s = 2
    shifted = SpectralField.zeros(5, 2, t=0.4)
    shifted.coeffs[s : s + 7] = base.coeffs
    r0 = galerkin_rhs_direct(SpectralField(np.pad(base.coeffs, 2), 2, 0.4))
    r1 = galerkin_rhs_direct(shifted)
    np.testing.assert_allclose(r1[s : s + 7], r0[2:9], atol=1e-15)


def test_plane_wave_split_step_exact():
    L, n0, A, T = 2, 3, 0.9, 1.0
    u = coeffs_to_grid(plane_wave(8, L, n0, A), 64)
    out = split_step_evolve(u, None, 0.01, 100)
    xi0 = 2 * np.pi * n0 / L
    exact = A * np.exp(1j * (xi0 * u.x - (xi0**2 + abs(A) ** 4) * T))
    assert out.t == pytest.approx(T)
    assert np.max(np.abs(out.values - exact)) < 1e-10


def test_plane_wave_invariants():
    L, n0, A = 2, 3, 0.9
    f = plane_wave(8, L, n0, A)
    xi0 = 2 * np.pi * n0 / L
    assert mass(f) == pytest.approx(L * A**2, rel=1e-14)
    assert mass(coeffs_to_grid(f, 64)) == pytest.approx(L * A**2, rel=1e-14)
    assert energy(f) == pytest.approx(L * (0.5 * xi0**2 * A**2 + A**6 / 6), rel=1e-13)
    z = SpectralField.zeros(4, L)
    assert mass(z) == 0 and energy(z) == 0
    assert np.all(galerkin_rhs(z) == 0)


def test_energy_grid_and_spectral_agree():
    f = random_field(8, 2, seed=2, t=0.5)
    g = coeffs_to_grid(f, 64)
    assert energy(g) == pytest.approx(energy(f), rel=1e-12)


def test_galerkin_vs_split_step_cross_oracle():
    f = random_field(16, 1, seed=1)
    a = GalerkinIntegrator(16, 1).run(f, 1.0, 1e-4, record_every=10_000)[-1]
    u = split_step_evolve(coeffs_to_grid(f, 128), None, 1e-4, 10_000)
    b = to_interaction_picture(grid_to_coeffs(u, 16))
    assert np.max(np.abs(a.coeffs - b.coeffs)) < 1e-6


def test_galerkin_conservation_small_amplitude():
    f = random_field(8, 2, seed=3, amp=0.3)
    snaps = GalerkinIntegrator(8, 2).run(f, 1.0, 1e-3, record_every=100)
    m = np.array([mass(s) for s in snaps])
    e = np.array([energy(s) for s in snaps])
    assert np.max(np.abs(m - m[0])) / m[0] < 1e-6
    assert np.max(np.abs(e - e[0])) / e[0] < 1e-6


def test_split_step_mass_at_rounding_floor():
    f = random_field(16, 1, seed=1)
    u = coeffs_to_grid(f, dealiased_grid_size(16, power_of_two=True))
    out = split_step_evolve(u, None, 1e-4, 10_000)
    assert abs(mass(out) - mass(u)) / mass(u) < 1e-12
    assert split_step_evolve(u, None, 0.1, 0).values.tolist() == u.values.tolist()
    with pytest.raises(ValueError):
        split_step_evolve(u, None, 0.0, 1)


def test_run_records_and_callback():
    f = random_field(4, 1)
    seen = []
    snaps = GalerkinIntegrator(4, 1).run(f, 0.1, 0.003, record_every=10, callback=seen.append)
    # 34 steps of 0.1/34: records at 0, 10, 20, 30 and the final step
    assert len(snaps) == 5 and snaps is not seen and len(seen) == 5
    assert snaps[-1].t == pytest.approx(0.1)
    assert all(s.picture == "interaction" for s in snaps)


def test_theorem_initial_data():
    nu = 0.2
    for k, L in [(1, 1), (2, 2), (4, 4)]:
        p = LatticeParams.from_k(k, L)
        a0 = theorem_initial_data(nu, p, decay_phases())
        assert np.count_nonzero(a0.coeffs) == 4 * L
        assert set(a0.n[a0.coeffs != 0].tolist()) == set(resonant_indices(p).ravel().tolist())
        assert mass(a0) == pytest.approx(1.5 * nu, rel=1e-14)
        assert a0.N == default_ntrunc(p)
    with pytest.raises(ValueError):
        embed_resonant(np.zeros((4, 2)), LatticeParams.from_k(2, 2), 3)


def test_truncation_stability():
    # raising N changes the retained modes by far less than their size
    p = LatticeParams.from_k(2, 1)
    N0 = default_ntrunc(p)
    ends = []
    for N in (N0, N0 + 4):
        a0 = theorem_initial_data(0.2, p, decay_phases(), N)
        ends.append(GalerkinIntegrator(N, 1).run(a0, 2.5, 1e-3, record_every=2500)[-1])
    window = np.arange(-N0, N0 + 1)
    assert np.max(np.abs(ends[0].at(window) - ends[1].at(window))) < 1e-5


def test_grid_field_coordinates():
    g = GridField(np.zeros(4), 2)
    assert g.x.tolist() == [-1.0, -0.5, 0.0, 0.5]
    with pytest.raises(ValueError):
        grid_to_coeffs(g, 2)
