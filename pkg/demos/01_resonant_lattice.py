"""Walk through the four resonant bands and the interactions between them."""

# %%
import numpy as np

from quintic_nls.lattice import LatticeParams, alpha_index, classify, decompose, resonant_indices
from quintic_nls.resonance import enumerate_res, is_resonant, phase_phi

p = LatticeParams.from_k(2, 4)
print(p)

# %% The bands sit at eta = 3, 1, 0, 4 in units of kappa, one mode per j.
R = resonant_indices(p)
print(R)
for n in R[:, 1]:
    print(n, decompose(int(n), p), classify(int(n), p).region)

# %% Every enumerated tuple conserves momentum and has zero phase.
n6 = alpha_index(4, 2, p)
tuples = enumerate_res(n6, p)
print(f"{len(tuples)} ordered tuples feed alpha_(4,2) = {n6}")
for t in tuples[:5]:
    w = is_resonant((*t, n6), p)
    print(t, "phi =", phase_phi((*t, n6)), "plus bands", w.plus_pattern, "j =", (w.j1, w.j3, w.j5))

# %% How the count grows with L.
for L in (1, 2, 4, 8):
    q = LatticeParams.from_k(2, L)
    counts = [len(enumerate_res(int(n), q)) for n in resonant_indices(q)[:, 0]]
    print(L, counts, np.sum(counts))
