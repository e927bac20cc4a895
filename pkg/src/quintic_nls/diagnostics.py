"""Norms, error fields, the modified energy and the error bound."""

from __future__ import annotations

import csv
from dataclasses import asdict, dataclass, field

import numpy as np

from .lattice import LatticeParams, RESONANT_ETAS, a_r_mask, block_range, japanese, multiplier_array, resonant_indices
from .nls_solver import SpectralField, embed_resonant
from .resonance import phase_phi_array

CSV_COLUMNS = ("t", "mass", "energy", "bm1", "bm2", "bm3", "bm4", "err_s_sq", "mod_energy", "bound_rhs")


def _as_field(f, L=None) -> SpectralField:
    if isinstance(f, SpectralField):
        return f
    if isinstance(f, dict):
        if L is None:
            raise ValueError("L is required for dict coefficient maps")
        N = max((abs(int(n)) for n in f), default=0)
        c = np.zeros(2 * N + 1, dtype=complex)
        for n, v in f.items():
            c[int(n) + N] = v
        return SpectralField(c, L)
    raise TypeError(f"unsupported coefficient container {type(f).__name__}")


def weighted_norm_sq(f, p: LatticeParams) -> float:
    """||f||_s^2 = (1/L) sum m(xi)^2 |f_xi|^2."""
    f = _as_field(f, p.L)
    w = multiplier_array(f.n, p) ** 2
    return float(np.sum(w * np.abs(f.coeffs) ** 2) / f.L)


def sobolev_norm_sq(f, p, s: float) -> float:
    L = p if isinstance(p, (int, np.integer)) else p.L
    f = _as_field(f, L)
    return float(np.sum(japanese(f.xi) ** (2 * s) * np.abs(f.coeffs) ** 2) / L)


def band_mass(f, p: LatticeParams) -> np.ndarray:
    """(1/L) sum over R_m of |f_xi|^2 for m = 1..4."""
    f = _as_field(f, p.L)
    return np.array([np.sum(np.abs(f.at(row)) ** 2) / p.L for row in resonant_indices(p)])


def error_field(a: SpectralField, r, p: LatticeParams) -> SpectralField:
    """e = a - r with r extended by zero off R."""
    r = np.asarray(getattr(r, "r", r))
    if a.L != p.L or r.shape != (4, p.L):
        raise ValueError("full and resonant states live on different lattices")
    if a.picture != "interaction":
        raise ValueError("error field is defined in the interaction picture")
    return SpectralField(a.coeffs - embed_resonant(r, p, a.N), a.L, a.t, "interaction")


def a_r_error(e, p: LatticeParams) -> float:
    """(sum over A_r of m^2 |e|^2)^(1/2)."""
    e = _as_field(e, p.L)
    mask = a_r_mask(e.n, p)
    w = multiplier_array(e.n[mask], p) ** 2
    return float(np.sqrt(np.sum(w * np.abs(e.coeffs[mask]) ** 2)))


def default_delta(k) -> float:
    return max(1e3, k * k / 4.0)


@dataclass
class ModifiedEnergy:
    """Precomputed A_1 tuples with |phi| > delta inside the truncation |n| <= N.

    ``phi`` is stored in physical units, i.e. (2 pi / L)^2 times the
    integer phase.
    """

    p: LatticeParams
    N: int
    delta: float
    tuples: np.ndarray = field(init=False)
    phi: np.ndarray = field(init=False)
    weight: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        scale = (2 * np.pi / self.p.L) ** 2
        rows = []
        for eta in RESONANT_ETAS:
            B = block_range(eta, self.p)
            B = B[np.abs(B) <= self.N]
            if B.size == 0:
                continue
            g = np.meshgrid(B, B, B, B, B, indexing="ij")
            n1, n2, n3, n4, n6 = (x.ravel() for x in g)
            n5 = n6 - n1 + n2 - n3 + n4
            keep = (n5 >= B[0]) & (n5 <= B[-1])
            t = np.stack([n1[keep], n2[keep], n3[keep], n4[keep], n5[keep], n6[keep]], axis=1)
            big = np.abs(scale * phase_phi_array(t)) > self.delta
            rows.append(t[big])
        self.tuples = np.concatenate(rows) if rows else np.zeros((0, 6), dtype=np.int64)
        self.phi = scale * phase_phi_array(self.tuples).astype(float)
        self.weight = multiplier_array(self.tuples[:, 5], self.p) ** 2 if len(self.tuples) else np.zeros(0)

    def correction(self, a: SpectralField, e: SpectralField, t: float) -> float:
        if len(self.tuples) == 0:
            return 0.0
        T = self.tuples
        A = lambda col: a.at(T[:, col])  # noqa: E731
        prod = A(0) * np.conj(A(1)) * A(2) * np.conj(A(3)) * A(4) * np.conj(e.at(T[:, 5]))
        s = np.sum(self.weight * prod * np.exp(-1j * t * self.phi) / self.phi)
        return float(2.0 / self.p.L**5 * s.real)

    def __call__(self, a: SpectralField, e: SpectralField, t: float | None = None) -> float:
        t = a.t if t is None else t
        return weighted_norm_sq(e, self.p) + self.correction(a, e, t)


def modified_energy(a: SpectralField, e, p: LatticeParams, delta: float | None = None, t: float | None = None) -> float:
    """E~(t): ||e||_s^2 plus the normal-form correction over far-from-resonant A_1 tuples."""
    delta = default_delta(p.k) if delta is None else delta
    e = _as_field(e, p.L)
    return ModifiedEnergy(p, a.N, delta)(a, e, t)


def theorem_bound_rhs(t, nu, L, k, s, c_fit):
    """Four-term error bound of the main approximation statement."""
    if c_fit <= 0:
        raise ValueError("c_fit must be positive")
    t = np.asarray(t, dtype=float)
    x = c_fit * nu**2 * t
    kk = japanese(k)
    return (
        nu / L * np.expm1(x / L**3)
        + nu**3 * kk ** (s - 2.5) * np.exp(x)
        + nu**3 * kk ** (s - 1.5) * np.expm1(x)
        + nu * (np.expm1(x) - x)
    )


def fit_c(times, err_sq, nu, L, k, s, c_max=1e3, rtol=1e-6) -> float:
    """Smallest c with err_sq(t) <= bound(t; c) at every sample; inf if none up to c_max."""
    times = np.asarray(times, dtype=float)
    err_sq = np.asarray(err_sq, dtype=float)

    def ok(c):
        with np.errstate(over="ignore"):
            return bool(np.all(err_sq <= theorem_bound_rhs(times, nu, L, k, s, c)))

    if not ok(c_max):
        return float("inf")
    lo, hi = 0.0, c_max
    if ok(1e-12):
        return 0.0
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        lo, hi = (lo, mid) if ok(mid) else (mid, hi)
    return hi


def convolution_ratio(c, p: LatticeParams, N: int) -> float:
    """sum c / (L^(1/2) (sum m^2 c^2)^(1/2)) for a nonnegative sequence on |n| <= N."""
    c = np.asarray(c, dtype=float)
    if c.shape != (2 * N + 1,) or np.any(c < 0):
        raise ValueError("need a nonnegative sequence of length 2N+1")
    m2 = multiplier_array(np.arange(-N, N + 1), p) ** 2
    return float(np.sum(c) / np.sqrt(p.L * np.sum(m2 * c * c)))


def loglog_slope(t, y) -> float:
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    good = (t > 0) & (y > 0)
    return float(np.polyfit(np.log(t[good]), np.log(y[good]), 1)[0])


@dataclass
class DiagnosticsRecord:
    t: float
    mass: float
    energy: float
    band_mass: np.ndarray
    err_s_sq: float
    mod_energy: float
    bound_rhs: float

    def __post_init__(self):
        self.band_mass = np.asarray(self.band_mass, dtype=float).reshape(4)
        if np.any(self.band_mass < 0) or self.err_s_sq < 0:
            raise ValueError("band masses and err_s_sq must be nonnegative")

    def row(self) -> list:
        return [self.t, self.mass, self.energy, *self.band_mass.tolist(), self.err_s_sq, self.mod_energy, self.bound_rhs]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["band_mass"] = self.band_mass.tolist()
        return d


def write_csv(records, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for r in records:
            w.writerow([repr(float(x)) for x in r.row()])
