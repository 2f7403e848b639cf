# %% [markdown]
# # A 2x2 PT-symmetric Hamiltonian
#
# `H = [[r e^{i theta}, s], [s, r e^{-i theta}]]`.  The spectrum is real when
# `s^2 > r^2 sin^2 theta`.  In that region the CPT product is positive and
# time evolution conserves it.

# %%
import math

import numpy as np

from ptsym import matrix_model as mm

# %%
sol = mm.solve(mm.TwoLevelModel(1.0, 2.0, 0.8))
print(sol.phase.value, "alpha =", sol.alpha)
print("eigenvalues", sol.eigenvalues)
print("C =\n", np.round(sol.c_matrix, 6))
print("PT norms", [round(mm.pt_inner(v, v).real, 12) for v in sol.eigenvectors])

# %%
psi = np.array([1 + 2j, 0.5])
for t in (0.0, 0.1, 1.0, 10.0):
    phi = mm.evolve(sol, psi, t)
    print(f"t={t:5.1f} CPT norm {mm.cpt_inner(sol, phi, phi).real:.15f}  Dirac norm {np.vdot(phi, phi).real:.6f}")

# %% [markdown]
# Past the boundary the eigenvalues pair off into a complex conjugate pair.
# The eigenvectors then have zero PT norm and the amplitudes grow or decay.

# %%
broken = mm.solve(mm.TwoLevelModel(1.0, 0.5, math.pi / 2))
print(broken.phase.value, broken.eigenvalues)
print([abs(mm.pt_inner(v, v)) for v in broken.eigenvectors])
print([np.linalg.norm(mm.evolve(broken, psi, t)) for t in (0, 2, 4)])
