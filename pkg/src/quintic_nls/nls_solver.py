"""Full quintic NLS dynamics on the truncated lattice |n| <= N.

Fourier convention: u_hat(xi) = int_{-L/2}^{L/2} exp(-i x xi) u(x) dx and
u(x) = (1/L) sum_xi exp(i x xi) u_hat(xi), so the mass is (1/L) sum |u_hat|^2.
The interaction picture is a_xi(t) = exp(i t xi^2) u_hat(xi, t).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import scipy.fft as sfft

from .lattice import LatticeParams, block_range, resonant_indices
from .toy_model import ResonantState, pert_initial_data

PICTURES = ("physical", "interaction")


@dataclass
class SpectralField:
    """Coefficients for n = -N..N, stored at position n + N."""

    coeffs: np.ndarray
    L: int
    t: float = 0.0
    picture: str = "interaction"

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.ndim != 1 or self.coeffs.size % 2 == 0:
            raise ValueError("coefficients must be a 1-D array of odd length 2N+1")
        if self.picture not in PICTURES:
            raise ValueError(f"unknown picture {self.picture!r}")

    @property
    def N(self) -> int:
        return (self.coeffs.size - 1) // 2

    @property
    def n(self) -> np.ndarray:
        return np.arange(-self.N, self.N + 1)

    @property
    def xi(self) -> np.ndarray:
        return 2 * np.pi * self.n / self.L

    def at(self, n) -> complex:
        n = np.asarray(n)
        inside = np.abs(n) <= self.N
        out = np.zeros(n.shape, dtype=complex)
        out[inside] = self.coeffs[n[inside] + self.N]
        return out

    @classmethod
    def zeros(cls, N, L, **kwargs) -> "SpectralField":
        return cls(np.zeros(2 * N + 1, dtype=complex), L, **kwargs)


@dataclass
class GridField:
    """Samples of u at x_p = -L/2 + p L / M."""

    values: np.ndarray
    L: int
    t: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)

    @property
    def M(self) -> int:
        return self.values.size

    @property
    def x(self) -> np.ndarray:
        return -self.L / 2 + self.L * np.arange(self.M) / self.M


def dealiased_grid_size(N: int, power_of_two: bool = False) -> int:
    """Smallest fast FFT length >= 3(2N+1); quintic products then never alias onto |n| <= N.

    Power-of-two lengths make the 1/M normalisation exact, which keeps the
    split-step mass drift at the rounding floor over long runs.
    """
    m = 3 * (2 * N + 1)
    if power_of_two:
        return 1 << (m - 1).bit_length()
    return sfft.next_fast_len(m)


def _signed_modes(M: int) -> np.ndarray:
    return np.fft.fftfreq(M, d=1.0 / M).round().astype(np.int64)


def _half_period_sign(n) -> np.ndarray:
    # exp(i xi x_0) with x_0 = -L/2
    return np.where(np.asarray(n) % 2 == 0, 1.0, -1.0)


def coeffs_to_grid(field: SpectralField, M: int | None = None) -> GridField:
    """Sample the physical-picture field on an M-point grid (M >= 2N+1)."""
    phys = from_interaction_picture(field) if field.picture == "interaction" else field
    M = M or dealiased_grid_size(phys.N)
    if M < 2 * phys.N + 1:
        raise ValueError("grid too coarse for the retained modes")
    buf = np.zeros(M, dtype=complex)
    buf[np.mod(phys.n, M)] = phys.coeffs * _half_period_sign(phys.n)
    return GridField(sfft.ifft(buf) * (M / phys.L), phys.L, phys.t)


def grid_to_coeffs(u: GridField, N: int | None = None) -> SpectralField:
    """Physical-picture coefficients |n| <= N of grid samples (default: all resolved modes)."""
    M = u.M
    N = (M - 1) // 2 if N is None else N
    if 2 * N + 1 > M:
        raise ValueError("cannot extract more modes than grid points")
    n = np.arange(-N, N + 1)
    c = sfft.fft(u.values)[np.mod(n, M)] * (u.L / M) * _half_period_sign(n)
    return SpectralField(c, u.L, u.t, picture="physical")


def to_interaction_picture(field: SpectralField) -> SpectralField:
    if field.picture == "interaction":
        return field
    phase = np.exp(1j * field.t * field.xi**2)
    return replace(field, coeffs=field.coeffs * phase, picture="interaction")


def from_interaction_picture(field: SpectralField) -> SpectralField:
    if field.picture == "physical":
        return field
    phase = np.exp(-1j * field.t * field.xi**2)
    return replace(field, coeffs=field.coeffs * phase, picture="physical")


class QuinticOperator:
    """Dealiased pseudo-spectral evaluation of the projected nonlinearity.

    Works on length-M arrays in FFT order whose entries outside |n| <= N
    are zero. ``apply(v)`` returns -i P(|u|^4 u)^ for physical coefficients v.
    """

    def __init__(self, N: int, L: int, M: int | None = None):
        self.N, self.L = N, L
        self.M = M or dealiased_grid_size(N)
        if self.M < 3 * (2 * N + 1) - 2:
            raise ValueError("grid does not dealias the quintic term")
        self.modes = _signed_modes(self.M)
        self.mask = np.abs(self.modes) <= N
        sign = _half_period_sign(self.modes)
        self.to_grid = sign * (self.M / L)
        self.from_grid = np.where(self.mask, -1j * sign * (L / self.M), 0.0)
        self.xi = 2 * np.pi * self.modes / L
        self.xi2 = self.xi**2
        self.pos = np.mod(np.arange(-N, N + 1), self.M)

    def embed(self, coeffs) -> np.ndarray:
        v = np.zeros(self.M, dtype=complex)
        v[self.pos] = coeffs
        return v

    def extract(self, v) -> np.ndarray:
        return v[self.pos]

    def apply(self, v: np.ndarray) -> np.ndarray:
        u = sfft.ifft(v * self.to_grid)
        w = (u.real**2 + u.imag**2) ** 2 * u
        return sfft.fft(w) * self.from_grid


def galerkin_rhs(a: SpectralField, p: LatticeParams | None = None, op: QuinticOperator | None = None):
    """da_xi/dt of the truncated interaction-picture system, as a length 2N+1 array."""
    if a.picture != "interaction":
        raise ValueError("galerkin_rhs expects an interaction-picture field")
    op = op or QuinticOperator(a.N, a.L)
    xi2 = a.xi**2
    v = op.embed(a.coeffs * np.exp(-1j * a.t * xi2))
    return op.extract(op.apply(v)) * np.exp(1j * a.t * xi2)


def galerkin_rhs_direct(a: SpectralField, p: LatticeParams | None = None) -> np.ndarray:
    """Brute-force quintic convolution; O((2N+1)^5), for tiny N only."""
    if a.picture != "interaction":
        raise ValueError("galerkin_rhs_direct expects an interaction-picture field")
    N, L = a.N, a.L
    n = a.n
    scale = (2 * np.pi / L) ** 2
    g = np.meshgrid(n, n, n, n, indexing="ij")
    n1, n2, n3, n4 = (x.ravel() for x in g)
    out = np.zeros_like(a.coeffs)
    for idx, n6 in enumerate(n):
        n5 = n6 - n1 + n2 - n3 + n4
        ok = np.abs(n5) <= N
        m1, m2, m3, m4, m5 = n1[ok], n2[ok], n3[ok], n4[ok], n5[ok]
        phi = m1**2 - m2**2 + m3**2 - m4**2 + m5**2 - n6**2
        c = a.coeffs
        prod = c[m1 + N] * np.conj(c[m2 + N]) * c[m3 + N] * np.conj(c[m4 + N]) * c[m5 + N]
        out[idx] = np.sum(prod * np.exp(-1j * a.t * scale * phi))
    return -1j * out / L**4


class GalerkinIntegrator:
    """Integrating-factor RK4, i.e. classical RK4 applied in the interaction picture."""

    def __init__(self, N: int, L: int, M: int | None = None):
        self.op = QuinticOperator(N, L, M)
        self._h = None

    def _prepare(self, h):
        if self._h != h:
            xi2 = self.op.xi2
            self.E1 = np.exp(-1j * h * xi2)
            self.E2 = np.exp(-0.5j * h * xi2)
            self._h = h

    def step(self, v: np.ndarray, h: float) -> np.ndarray:
        self._prepare(h)
        f, E1, E2 = self.op.apply, self.E1, self.E2
        k1 = f(v)
        ev = E2 * v
        k2 = f(ev + 0.5 * h * E2 * k1)
        k3 = f(ev + 0.5 * h * k2)
        k4 = f(E1 * v + h * E2 * k3)
        return E1 * v + h / 6 * (E1 * k1 + 2 * E2 * (k2 + k3) + k4)

    def run(self, field: SpectralField, t_end: float, dt: float, record_every: int = 1, callback=None):
        """Advance to ``t_end``; returns the list of interaction-picture snapshots.

        ``callback(field)`` is invoked on every recorded snapshot.
        """
        if dt <= 0:
            raise ValueError("dt must be positive")
        n_steps = int(np.ceil(t_end / dt - 1e-12)) if t_end > 0 else 0
        h = t_end / n_steps if n_steps else dt
        phys = from_interaction_picture(field)
        v = self.op.embed(phys.coeffs)
        t0 = field.t
        snaps = []

        def emit(i):
            t = t0 + i * h
            snap = to_interaction_picture(SpectralField(self.op.extract(v).copy(), field.L, t, "physical"))
            snaps.append(snap)
            if callback is not None:
                callback(snap)

        emit(0)
        for i in range(1, n_steps + 1):
            v = self.step(v, h)
            if i % record_every == 0 or i == n_steps:
                if not np.all(np.isfinite(v)):
                    raise FloatingPointError(f"non-finite coefficient at step {i}")
                emit(i)
        return snaps


def split_step_evolve(u: GridField, p: LatticeParams | None, dt: float, n_steps: int) -> GridField:
    """Strang splitting: half linear step, exact pointwise quintic phase, half linear step."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    L = u.L
    xi2 = (2 * np.pi * _signed_modes(u.M) / L) ** 2
    half = np.exp(-0.5j * dt * xi2)
    # squaring ``half`` instead would bias |full| and leak mass over many steps
    full = np.exp(-1j * dt * xi2)
    v = u.values.copy()
    if n_steps == 0:
        return GridField(v, L, u.t)
    c = sfft.fft(v) * half
    for i in range(n_steps):
        v = sfft.ifft(c)
        v = v * np.exp(-1j * dt * (v.real**2 + v.imag**2) ** 2)
        c = sfft.fft(v)
        c *= full if i < n_steps - 1 else half
    return GridField(sfft.ifft(c), L, u.t + n_steps * dt)


def mass(u) -> float:
    if isinstance(u, GridField):
        return float(np.sum(np.abs(u.values) ** 2) * u.L / u.M)
    return float(np.sum(np.abs(u.coeffs) ** 2) / u.L)


def energy(u) -> float:
    """Kinetic part by Parseval, sextic part by quadrature on a grid that resolves |u|^6."""
    if isinstance(u, GridField):
        u = grid_to_coeffs(u)
    phys = from_interaction_picture(u)
    kinetic = 0.5 * np.sum(phys.xi**2 * np.abs(phys.coeffs) ** 2) / phys.L
    M = sfft.next_fast_len(6 * phys.N + 1)
    g = coeffs_to_grid(phys, M)
    potential = np.sum(np.abs(g.values) ** 6) * phys.L / M / 6.0
    return float(kinetic + potential)


def default_ntrunc(p: LatticeParams, eta_lo: int = -2, eta_hi: int = 7) -> int:
    lo = block_range(eta_lo, p)[0]
    hi = block_range(eta_hi, p)[-1]
    return int(max(abs(lo), abs(hi)) + abs(p.shift_n))


def embed_resonant(r, p: LatticeParams, N: int) -> np.ndarray:
    """Place a (4, L) resonant array into a length 2N+1 coefficient vector."""
    R = resonant_indices(p)
    if np.max(np.abs(R)) > N:
        raise ValueError("truncation does not contain all resonant bands")
    out = np.zeros(2 * N + 1, dtype=complex)
    out[R.ravel() + N] = np.asarray(getattr(r, "r", r)).ravel()
    return out


def theorem_initial_data(nu, p: LatticeParams, theta_bands, N_trunc: int | None = None) -> SpectralField:
    """a(0) equal to the locked resonant data on R and zero elsewhere."""
    r0: ResonantState = pert_initial_data(nu, p, theta_bands)
    N = default_ntrunc(p) if N_trunc is None else N_trunc
    return SpectralField(embed_resonant(r0, p, N), p.L, 0.0, "interaction")
