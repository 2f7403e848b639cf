# %% [markdown]
# # Spectrum of `p^2 + x^2 (ix)^eps` and the sign of the PT norm
#
# The Hamiltonian is diagonalized in an oscillator basis.  Level `n` is kept
# only when a half-size basis reproduces it to `1e-6`.

# %%
import numpy as np

from ptsym import spectral as sp

Fam = sp.HamiltonianFamily

# %%
for eps in (0.0, 0.5, 1.0, 1.5):
    r = sp.solve(Fam.epsilon(eps), 200)
    E = r.eigenvalues[:6].real
    print(f"eps={eps:3.1f} kept={r.n_retained:3d} E={np.round(E, 6)} signs={r.pt_norm_signs[:6]}")

# %% [markdown]
# Below `eps = 0` the real-axis problem is only a qualitative guide.  Pairs
# of levels merge and continue as complex conjugates.

# %%
r = sp.solve(Fam.epsilon(-0.7), 100)
for E, real in zip(r.eigenvalues, r.reality_flags):
    print(f"{E.real:10.5f} {E.imag:+10.5f}i {'real' if real else ''}")

# %% [markdown]
# ## How far the eigenstates can be trusted as a basis
#
# At `eps = 0` the eigenfunctions are the oscillator states and every
# reconstruction is exact.  At `eps = 1` the sums over eigenstates that
# should reproduce parity or the identity blow up once more than a handful of
# levels enter.  Expansions in these eigenfunctions converge only weakly, and
# in double precision the cancellations are lost.

# %%
for eps in (0.0, 1.0):
    r = sp.solve(Fam.epsilon(eps), 200)
    rep = sp.reconstruct_operators(r, 40)
    print(eps, {k: f"{v:.2e}" for k, v in rep.as_dict().items()})
    for M in (10, 20, 40):
        print("   completeness residual, M =", M, f"{sp.completeness_residual(r, M):.2e}")

# %%
r = sp.solve(Fam.epsilon(1.0), 200)
for M in (6, 10, 12, 20):
    rep = sp.numeric_c_matrix(r, M)
    print(f"M={M:2d} C^2-1 {rep.square:9.2e}  [C,H] {rep.commutator:9.2e}  min CPT norm {rep.min_cpt_norm:10.3e}")
