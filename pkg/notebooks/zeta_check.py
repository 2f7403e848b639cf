# %% [markdown]
# # Inverse-eigenvalue sum: closed form against the numeric spectrum
#
# For `H = p^2 + x^2 (ix)^eps` the sum of `1/E_n` has a Gamma-function closed
# form.  Two variants of its trigonometric prefactor are in circulation; they
# differ only in the argument of the cosine in the denominator.  This script
# sums the numerically computed spectrum and shows which variant it supports.

# %%
import numpy as np

from ptsym import closed_forms as cf
from ptsym import spectral as sp

# %% [markdown]
# `zeta_numeric` sums the levels confirmed by a doubled basis and adds a WKB
# tail `A (n + 1/2)^p (1 + c / (n + 1/2)^2)`, with `c` fitted to the upper half
# of the converged levels.

# %%
rows = []
for eps in (0.1, 0.25, 0.5, 1.0, 1.5, 1.9):
    z = sp.zeta_numeric(eps, 400)
    printed = cf.zeta_closed(eps, "printed")
    corrected = cf.zeta_closed(eps, "corrected")
    rows.append((eps, z.value, z.tail_error, z.levels, abs(z.value / printed - 1), abs(z.value / corrected - 1)))

print(f"{'eps':>5} {'numeric':>12} {'tail err':>9} {'levels':>6} {'rel printed':>12} {'rel corrected':>14}")
for eps, v, err, k, rp, rc in rows:
    print(f"{eps:5.2f} {v:12.8f} {err:9.1e} {k:6d} {rp:12.2e} {rc:14.2e}")

# %% [markdown]
# The printed variant misses by one to three percent everywhere except near
# `eps = 0`, where both prefactors tend to 2.  The corrected variant agrees to
# the size of the reported tail error.

# %%
eps = np.linspace(0.05, 1.95, 39)
gap = [cf.zeta_prefactor(e, "printed") - cf.zeta_prefactor(e, "corrected") for e in eps]
print("largest prefactor gap", max(np.abs(gap)), "at eps =", eps[int(np.argmax(np.abs(gap)))])

# %% [markdown]
# As `eps -> 0+` the level growth exponent tends to 1 and the sum diverges
# like the harmonic series.  The numeric estimate flags this: the tail
# outgrows the converged head and `converged` turns false.

# %%
for eps in (0.2, 0.05, 0.02):
    z = sp.zeta_numeric(eps, 200)
    print(f"eps={eps:5.2f} head={z.head:8.3f} tail={z.tail:9.3f} converged={z.converged}")
