"""Mass exchange between the bands: closed form, averaged system and the mode-resolved system."""

# %%
import numpy as np

from quintic_nls.lattice import LatticeParams
from quintic_nls.toy_model import (
    band_average,
    closed_form_K,
    decay_phases,
    integrate_bands,
    integrate_resonant,
    kfun_bands,
    kfun_state,
    pert_initial_data,
)

nu = 0.2

# %% 2 nu^2 K(t) rises to 1, so R_1 and R_3 empty only as t -> infinity.
for L in (1, 2):
    t = np.array([0, 1, 10, 100]) * L**3 / nu**2
    print(L, closed_form_K(t, nu, L) * 2 * nu**2)

# %% The averaged band system reproduces the closed form.
L = 1
T = 2 * L**3 / nu**2
t, I = integrate_bands(kfun_state(nu), nu, L, T, 0.01, record_every=50)
print("max |RK4 - closed form| =", np.max(np.abs(I - kfun_bands(t, nu, L))))

# %% The mode-resolved system agrees at L = 1 but runs at half speed at L = 2.
for L in (1, 2):
    p = LatticeParams.from_k(2, L)
    T = 0.1 * L**3 / nu**2
    t, states = integrate_resonant(pert_initial_data(nu, p, decay_phases()), p, T, 0.01, record_every=100)
    avg = np.array([band_average(s).I_R for s in states])
    print(L, "vs K(t):", np.max(np.abs(avg - kfun_bands(t, nu, L))) / nu,
          "vs K(t/2):", np.max(np.abs(avg - kfun_bands(t / 2, nu, L))) / nu)
