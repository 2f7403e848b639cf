# %% [markdown]
# # The C operator as a differential operator
#
# To first order in `eps` the operator `C` of `p^2/2 + x^2/2 + i eps x^3` is
# `(1 + eps L1) P`, with `L1` a third-order differential operator.  Everything
# here is exact rational arithmetic.

# %%
from ptsym.coperator import apply_c, build_c, compose_c, eigen_residual, sum_over_states
from ptsym.hermite import parse_operator
from ptsym.perturbation import first_order_state, second_order_state_ix3

# %%
for model, order in [("ix3", 1), ("ix3", 2), ("ix2y", 1), ("ixyz", 1)]:
    print(f"{model} order {order}: {build_c(model, order).to_text()}")

# %% [markdown]
# `C^2 = 1` holds order by order, and `C` returns each perturbed eigenstate
# with the sign of its parity.

# %%
k = build_c("ix3", 2)
print("C^2 - 1 vanishes:", all(r.is_zero() for r in compose_c(k)))
for n in range(4):
    print(n, all(r.is_zero() for r in eigen_residual(k, second_order_state_ix3(n))))

# %% [markdown]
# An independent route: build `C` as the sum over states truncated at a
# level.  Applied to a low state it agrees with the differential operator
# once the cut is above the states the cubic term can reach.

# %%
state = first_order_state("ix3", (2,))
print(sum_over_states("ix3", state, 8) == apply_c(build_c("ix3", 1), state))

# %% [markdown]
# The second-order term is half the square of the first one, so through this
# order `C = exp(eps L1) P`.  Written with `p = -i d/dx` the exponent is
# `-(4/3 p^3 + 2 x p x)`.

# %%
from fractions import Fraction

from ptsym.hermite import I

L1, L2 = k.corrections
print((L1 @ L1) / 2 == L2)
p = parse_operator("Dx") * (-I)
x = parse_operator("x")
print(L1 == -((p @ p @ p) * Fraction(4, 3) + (x @ p @ x) * 2))
print(L1.to_text())
