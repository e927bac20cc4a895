"""Exact integer bookkeeping for the frequency lattice 2*pi*Z/L.

A frequency xi = 2*pi*n/L is always carried as its integer index ``n``.
The band scale k lives in N/L and is stored as the integer ``kappa = k*L``,
so every combinatorial statement below is plain integer arithmetic.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

# alpha_{m,j} = 2*pi*(c_m*k + j/L), indexed by band m = 1..4
BAND_OFFSETS = {1: 3, 2: 1, 3: 0, 4: 4}
RESONANT_ETAS = (0, 1, 3, 4)


@dataclass(frozen=True)
class LatticeParams:
    """Arithmetic context of one torus.

    ``half_width`` is the H of N_l = {eta in [-H, H-1]} and N_m = {H, -H-1};
    the classical choice is 99. ``a_r_cut`` bounds |tau~| inside A_r.
    """

    L: int
    kappa: int
    s: float = 1.25
    shift_n: int = 0
    half_width: int = 99
    a_r_cut: int = 2

    def __post_init__(self):
        if int(self.L) != self.L or self.L < 1:
            raise ValueError(f"L must be a positive integer, got {self.L!r}")
        if int(self.kappa) != self.kappa or self.kappa < 1:
            raise ValueError(f"kappa must be a positive integer, got {self.kappa!r}")
        if self.kappa < self.L:
            raise ValueError("k = kappa/L must be at least 1")
        if self.half_width < 1:
            raise ValueError("half_width must be >= 1")

    @classmethod
    def from_k(cls, k, L, **kwargs) -> "LatticeParams":
        kappa = k * L
        if abs(kappa - round(kappa)) > 1e-12:
            raise ValueError(f"k*L must be an integer (k={k}, L={L})")
        return cls(L=L, kappa=int(round(kappa)), **kwargs)

    @property
    def k(self) -> float:
        return self.kappa / self.L

    @property
    def integer_k(self) -> bool:
        return self.kappa % self.L == 0

    def xi(self, n):
        """Physical frequency of index ``n`` (float or array)."""
        return 2.0 * np.pi * np.asarray(n, dtype=float) / self.L


class FreqDecomposition(NamedTuple):
    eta: int
    tau: int
    j: int
    eta_t: int
    tau_t: int


def _require_integer_k(p: LatticeParams):
    if not p.integer_k:
        raise ValueError("decomposition needs integer k (kappa divisible by L)")


def decompose(n: int, p: LatticeParams) -> FreqDecomposition:
    """Split ``n = kappa*eta + L*tau + j`` with 0 <= tau < k, 0 <= j < L.

    Floor semantics for negative n. The tilde form recentres tau into
    (-k/2, k/2] by borrowing one unit of eta.
    """
    _require_integer_k(p)
    n = int(n)
    k = p.kappa // p.L
    rem = n % p.kappa
    j = rem % p.L
    tau = rem // p.L
    eta = (n - rem) // p.kappa
    if 2 * tau <= k:
        eta_t, tau_t = eta, tau
    else:
        eta_t, tau_t = eta + 1, tau - k
    return FreqDecomposition(eta, tau, j, eta_t, tau_t)


def decompose_array(n, p: LatticeParams):
    """Vectorised :func:`decompose`; returns five integer arrays."""
    _require_integer_k(p)
    n = np.asarray(n, dtype=np.int64)
    k = p.kappa // p.L
    rem = np.mod(n, p.kappa)
    j = np.mod(rem, p.L)
    tau = rem // p.L
    eta = (n - rem) // p.kappa
    wrap = 2 * tau > k
    eta_t = np.where(wrap, eta + 1, eta)
    tau_t = np.where(wrap, tau - k, tau)
    return eta, tau, j, eta_t, tau_t


def alpha_index(m: int, j: int, p: LatticeParams) -> int:
    """Index of alpha_{m,j}; includes the gauge shift."""
    if m not in BAND_OFFSETS:
        raise ValueError(f"band must be in 1..4, got {m}")
    if not 0 <= j < p.L:
        raise ValueError(f"j must lie in [0, {p.L}), got {j}")
    return BAND_OFFSETS[m] * p.kappa + j + p.shift_n


def band_indices(m: int, p: LatticeParams) -> np.ndarray:
    return np.array([alpha_index(m, j, p) for j in range(p.L)], dtype=np.int64)


def resonant_indices(p: LatticeParams) -> np.ndarray:
    """All of R as an array of shape (4, L), row m-1 holding R_m."""
    return np.stack([band_indices(m, p) for m in (1, 2, 3, 4)])


def band_of(n: int, p: LatticeParams):
    """Return ``(m, j)`` if ``n`` is some alpha_{m,j}, else ``None``."""
    base = int(n) - p.shift_n
    for m, c in BAND_OFFSETS.items():
        j = base - c * p.kappa
        if 0 <= j < p.L:
            return m, j
    return None


def band_of_array(n, p: LatticeParams):
    """Vectorised :func:`band_of`: band label (0 when outside R) and j."""
    base = np.asarray(n, dtype=np.int64) - p.shift_n
    band = np.zeros(base.shape, dtype=np.int64)
    jj = np.full(base.shape, -1, dtype=np.int64)
    for m, c in BAND_OFFSETS.items():
        j = base - c * p.kappa
        hit = (j >= 0) & (j < p.L)
        band[hit] = m
        jj[hit] = j[hit]
    return band, jj


class Region(enum.Enum):
    N_r = "N_r"
    N_l = "N_l"
    N_m = "N_m"
    N_h = "N_h"


@dataclass(frozen=True)
class Classification:
    region: Region
    in_N_r: bool
    in_N_l: bool
    in_N_m: bool
    in_N_h: bool
    band: int | None
    in_A_r: bool
    decomposition: FreqDecomposition


def classify(n: int, p: LatticeParams) -> Classification:
    """Membership of ``n`` in the sets N_r, N_l, N_m, N_h, R_m and A_r.

    ``region`` resolves overlaps in the order N_r, N_l, N_m, N_h, which is
    the case order of the multiplier.
    """
    d = decompose(n, p)
    H = p.half_width
    in_r = d.eta_t in RESONANT_ETAS
    in_l = -H <= d.eta <= H - 1
    in_m = d.eta in (H, -H - 1)
    in_h = not (in_l or in_m)
    if in_r:
        region = Region.N_r
    elif in_l:
        region = Region.N_l
    elif in_m:
        region = Region.N_m
    else:
        region = Region.N_h
    hit = band_of(n, p)
    return Classification(
        region=region,
        in_N_r=in_r,
        in_N_l=in_l,
        in_N_m=in_m,
        in_N_h=in_h,
        band=hit[0] if hit else None,
        in_A_r=in_r and abs(d.tau_t) <= p.a_r_cut,
        decomposition=d,
    )


def japanese(x):
    return np.sqrt(1.0 + np.square(x))


def multiplier(n: int, p: LatticeParams) -> float:
    return float(multiplier_array(np.array([n]), p)[0])


def multiplier_array(n, p: LatticeParams) -> np.ndarray:
    """The piecewise weight m(xi) for an array of indices."""
    n = np.asarray(n, dtype=np.int64)
    eta, tau, _, eta_t, tau_t = decompose_array(n, p)
    k = p.k
    H = p.half_width
    s = p.s
    in_r = np.isin(eta_t, RESONANT_ETAS)
    in_l = (eta >= -H) & (eta <= H - 1)
    in_m = (eta == H) | (eta == -H - 1)

    out = japanese(p.xi(n)) ** s
    mid = japanese(k) ** (s - 0.5)
    pos = in_m & (n > 0)
    neg = in_m & (n < 0)
    out = np.where(pos, mid * japanese(tau) ** 0.5, out)
    out = np.where(neg, mid * japanese(k - tau) ** 0.5, out)
    out = np.where(in_l, mid, out)
    out = np.where(in_r, japanese(tau_t) ** (s - 0.5), out)
    return out


def a_r_mask(n, p: LatticeParams) -> np.ndarray:
    _, _, _, eta_t, tau_t = decompose_array(n, p)
    return np.isin(eta_t, RESONANT_ETAS) & (np.abs(tau_t) <= p.a_r_cut)


def inverse_square_multiplier_sum(N: int, p: LatticeParams) -> float:
    """Sum of 1/m(xi)^2 over |n| <= N."""
    n = np.arange(-N, N + 1)
    return float(np.sum(multiplier_array(n, p) ** -2.0))


def block_range(eta_t: int, p: LatticeParams) -> np.ndarray:
    """All indices whose tilde decomposition has the given eta~.

    These are the kappa consecutive integers with tau~ in (-k/2, k/2].
    """
    _require_integer_k(p)
    k = p.kappa // p.L
    lo_tau = -((k - 1) // 2)  # smallest integer > -k/2
    start = eta_t * p.kappa + lo_tau * p.L
    return np.arange(start, start + p.kappa, dtype=np.int64)
