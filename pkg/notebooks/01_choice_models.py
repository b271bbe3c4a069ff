# %% [markdown]
# # Choice models as smoothers of the max
#
# A GNL model turns a vector of utilities into a probability vector. The
# probabilities are the gradient of the surplus, a smooth convex stand-in
# for the maximum.

# %%
import numpy as np

from gevbandit import choice_probabilities, make_mnl, make_nested_logit, surplus

u = np.array([0.2, 0.8, 0.87, 0.15])
mnl = make_mnl(4, 0.25)
nl = make_nested_logit([([0, 2], 0.05), ([1, 3], 0.1)])

print("MNL", choice_probabilities(mnl, u).round(4))
print("NL ", choice_probabilities(nl, u).round(4))

# %% [markdown]
# Smaller scales push the surplus towards the plain maximum and the
# probabilities towards the arg-max.

# %%
for mu in (1.0, 0.25, 0.05, 0.01):
    m = make_mnl(4, mu)
    print(f"mu={mu:<5} E(u)={float(surplus(m, u)):.4f}  p={choice_probabilities(m, u).round(3)}")
print("max(u) =", u.max())

# %% [markdown]
# Nesting ties arms together. With arms 1 and 3 in one tight nest, the
# nest competes as a block and the better member takes almost all of it.

# %%
p = choice_probabilities(nl, u)
print("nest {1,3}:", p[[0, 2]].round(4), " nest {2,4}:", p[[1, 3]].round(4))

# %% [markdown]
# Everything runs in the log domain, so huge utilities are harmless.

# %%
big = np.array([1e4, 1e4 - 0.5, -1e4, 3e3])
p = choice_probabilities(nl, big)
print(p, p.sum())
