"""Resonant finite-dimensional dynamics.

Three levels of description are kept side by side:

* the complex resonant system for r_xi, xi in R (integrated directly,
  because the action-angle form is singular where an action vanishes),
* its action-angle view (I_xi, theta_xi),
* the averaged four-band system for I_{R_1..4}, solvable through K(t).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lattice import LatticeParams, resonant_indices
from .resonance import enumerate_res

# d/dt (I_R1, I_R2, I_R3, I_R4) = BAND_RATES * S / L^3
BAND_RATES = np.array([-12.0, 12.0, -6.0, 6.0])

# phase lock that drives mass from R_1/R_3 into R_2/R_4 for t > 0
DECAY_LOCK = -np.pi / 2


def closed_form_K(t, nu, L):
    """K(t) = sin(arctan(3 nu^2 t / (2 L^3))) / (2 nu^2)."""
    x = 1.5 * nu**2 * np.asarray(t, dtype=float) / L**3
    return np.sin(np.arctan(x)) / (2.0 * nu**2)


def closed_form_K_dot(t, nu, L):
    x = 1.5 * nu**2 * np.asarray(t, dtype=float) / L**3
    # d/dx sin(arctan x) = (1 + x^2)^(-3/2)
    return 0.75 / L**3 * (1.0 + x * x) ** -1.5


def pK_rhs(K, nu, L):
    """Right side of the scalar ODE obeyed by K."""
    x = nu**2 * np.asarray(K, dtype=float)
    return 6.0 / L**3 * ((0.5 + x) * (0.5 - x)) ** 1.5


def kfun_bands(t, nu, L) -> np.ndarray:
    """Band actions nu(1/2 -+ nu^2 K(t)) with the 2:1 splitting; shape (..., 4)."""
    x = nu**2 * closed_form_K(t, nu, L)
    lo = nu * (0.5 - x)
    hi = nu * (0.5 + x)
    return np.stack(np.broadcast_arrays(lo, hi, lo / 2, hi / 2), axis=-1)


@dataclass
class BandState:
    I_R: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.I_R = np.asarray(self.I_R, dtype=float).reshape(4)


def kfun_state(nu) -> BandState:
    return BandState(np.array([nu / 2, nu / 2, nu / 4, nu / 4]), 0.0)


def band_rhs(I_R, nu=None, L=1) -> np.ndarray:
    """Rates of the averaged band system. ``nu`` is unused by the flow itself."""
    I_R = np.asarray(getattr(I_R, "I_R", I_R), dtype=float)
    if np.any(I_R < 0):
        raise ValueError(f"negative band action: {I_R}")
    I1, I2, I3, I4 = I_R
    S = I1 * I2 * np.sqrt(I3 * I4)
    return BAND_RATES * S / L**3


def rk4_step(f, y, t, dt):
    k1 = f(t, y)
    k2 = f(t + dt / 2, y + dt / 2 * k1)
    k3 = f(t + dt / 2, y + dt / 2 * k2)
    k4 = f(t + dt, y + dt * k3)
    return y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def _step_grid(t_end, dt):
    if dt <= 0:
        raise ValueError("dt must be positive")
    n = int(np.ceil(t_end / dt - 1e-12)) if t_end > 0 else 0
    return n, (t_end / n if n else dt)


def integrate_bands(initial: BandState, nu, L, t_end, dt, record_every=1):
    """Classical RK4 for the averaged system.

    Returns ``(times, actions)`` with actions of shape (n_records, 4). The
    step is shrunk so the grid lands exactly on ``t_end``.
    """
    n, h = _step_grid(t_end, dt)
    y = initial.I_R.copy()
    times = [initial.t]
    out = [y.copy()]
    f = lambda t, v: band_rhs(np.maximum(v, 0.0), nu, L)  # noqa: E731
    for i in range(1, n + 1):
        y_new = rk4_step(f, y, 0.0, h)
        if np.any(y_new < 0):
            raise FloatingPointError(f"action went negative at step {i}; reduce dt")
        y = y_new
        if i % record_every == 0 or i == n:
            times.append(initial.t + i * h)
            out.append(y.copy())
    return np.array(times), np.array(out)


def j_vars(state) -> np.ndarray:
    """(J1, J2, J3, J4); only J1 moves along the band flow."""
    I1, I2, I3, I4 = np.asarray(getattr(state, "I_R", state), dtype=float)
    return np.array([I2 / 2, -I2 / 2 + I4, I2 + I1, I2 / 2 + I3])


def band_invariants(I_R) -> np.ndarray:
    """Sums and 1:-2 combinations that the band flow keeps fixed; shape (..., 4)."""
    I_R = np.asarray(I_R, dtype=float)
    I1, I2, I3, I4 = np.moveaxis(I_R, -1, 0)
    return np.stack([I1 + I2, I3 + I4, I1 - 2 * I3, I2 - 2 * I4], axis=-1)


# --- complex resonant system -------------------------------------------------


@dataclass
class ResonantState:
    """Amplitudes r_{alpha_{m,j}} stored as an array of shape (4, L)."""

    r: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.r = np.asarray(self.r, dtype=complex)
        if self.r.ndim != 2 or self.r.shape[0] != 4:
            raise ValueError("resonant state must have shape (4, L)")

    def mass(self) -> float:
        L = self.r.shape[1]
        return float(np.sum(np.abs(self.r) ** 2) / L)


@dataclass
class ActionAngleState:
    I: np.ndarray
    theta: np.ndarray
    t: float = 0.0


def to_action_angle(state: ResonantState) -> ActionAngleState:
    return ActionAngleState(np.abs(state.r) ** 2, np.angle(state.r), state.t)


def from_action_angle(aa: ActionAngleState) -> ResonantState:
    if np.any(np.asarray(aa.I) < 0):
        raise ValueError("actions must be nonnegative")
    return ResonantState(np.sqrt(aa.I) * np.exp(1j * np.asarray(aa.theta)), aa.t)


@dataclass
class ResonantSystem:
    """Precomputed resonant interaction list for one lattice.

    ``tuples`` has one row per ordered resonant term: five flat positions
    into the (4, L) state followed by the output position.
    """

    params: LatticeParams
    tuples: np.ndarray = field(init=False)

    def __post_init__(self):
        p = self.params
        R = resonant_indices(p)
        pos = {int(n): i for i, n in enumerate(R.ravel())}
        rows = []
        for out_pos, n6 in enumerate(R.ravel()):
            for t in enumerate_res(int(n6), p):
                rows.append([pos[x] for x in t] + [out_pos])
        self.tuples = np.array(rows, dtype=np.int64).reshape(-1, 6)

    @property
    def size(self) -> int:
        return 4 * self.params.L

    def rhs_flat(self, r: np.ndarray) -> np.ndarray:
        T = self.tuples
        prod = r[T[:, 0]] * np.conj(r[T[:, 1]]) * r[T[:, 2]] * np.conj(r[T[:, 3]]) * r[T[:, 4]]
        acc = np.bincount(T[:, 5], weights=prod.real, minlength=self.size) + 1j * np.bincount(
            T[:, 5], weights=prod.imag, minlength=self.size
        )
        return -1j * acc / self.params.L**4


def resonant_rhs(state: ResonantState, p: LatticeParams, system: ResonantSystem | None = None):
    """Time derivative of every r_xi under the resonant truncation, shape (4, L)."""
    system = system or ResonantSystem(p)
    return system.rhs_flat(state.r.ravel()).reshape(4, p.L)


def integrate_resonant(initial: ResonantState, p: LatticeParams, t_end, dt, record_every=1, system=None):
    """Classical RK4 for the complex resonant system.

    Returns ``(times, states)`` with states of shape (n_records, 4, L).
    """
    system = system or ResonantSystem(p)
    n, h = _step_grid(t_end, dt)
    y = initial.r.ravel().copy()
    f = lambda t, v: system.rhs_flat(v)  # noqa: E731
    times = [initial.t]
    out = [y.copy()]
    for i in range(1, n + 1):
        y = rk4_step(f, y, 0.0, h)
        if not np.all(np.isfinite(y)):
            raise FloatingPointError(f"non-finite amplitude at step {i}")
        if i % record_every == 0 or i == n:
            times.append(initial.t + i * h)
            out.append(y.copy())
    return np.array(times), np.array(out).reshape(-1, 4, p.L)


def phase_lock_value(theta_bands) -> float:
    t1, t2, t3, t4 = theta_bands
    return 2 * t2 + t4 - 2 * t1 - t3


def check_phase_lock(theta_bands, tol=1e-12) -> float:
    """Return the lock value (+-pi/2 mod 2pi) or raise.

    Only cos(lock) = 0 freezes the angles. With the defocusing sign,
    -pi/2 moves mass from R_1, R_3 into R_2, R_4 as t grows and +pi/2
    runs the same exchange backwards.
    """
    phi = phase_lock_value(theta_bands)
    wrapped = (phi + np.pi) % (2 * np.pi) - np.pi
    for target in (np.pi / 2, -np.pi / 2):
        if abs(wrapped - target) <= tol:
            return target
    raise ValueError(f"phase lock 2*th2 + th4 - 2*th1 - th3 = {phi!r} is not +-pi/2")


def pert_initial_data(nu, p: LatticeParams, theta_bands) -> ResonantState:
    """Uniform-in-j data with the K-family actions at t = 0 and locked phases."""
    check_phase_lock(theta_bands)
    I0 = kfun_state(nu).I_R
    r = np.sqrt(I0)[:, None] * np.exp(1j * np.asarray(theta_bands, dtype=float))[:, None]
    return ResonantState(np.repeat(r, p.L, axis=1), 0.0)


def decay_phases(lock=DECAY_LOCK):
    """A convenient theta_bands choice with the requested lock value."""
    return (0.0, 0.0, -lock, 0.0)


def band_average(state, p: LatticeParams | None = None) -> BandState:
    """(1/L) sum_j I_{alpha_{m,j}} for each band."""
    if isinstance(state, ActionAngleState):
        I = np.asarray(state.I)
    else:
        I = np.abs(np.asarray(getattr(state, "r", state))) ** 2
    return BandState(I.mean(axis=-1), getattr(state, "t", 0.0))


def mode_invariants(r) -> np.ndarray:
    """Per-j combinations I1+I2, I3+I4, I1-2I3, I2-2I4; shape (..., 4, L)."""
    I = np.abs(np.asarray(r)) ** 2
    I1, I2, I3, I4 = I[..., 0, :], I[..., 1, :], I[..., 2, :], I[..., 3, :]
    return np.stack([I1 + I2, I3 + I4, I1 - 2 * I3, I2 - 2 * I4], axis=-2)
