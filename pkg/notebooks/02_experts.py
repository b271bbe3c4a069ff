# %% [markdown]
# # Full-information learning with a GEV smoother
#
# Each round the learner plays the gradient of the scaled surplus at the
# cumulative reward vector, then sees every arm's reward.

# %%
import math

import numpy as np

from gevbandit import make_mnl, optimal_eta, random_adversarial, run_experts, theoretical_regret_bound
from gevbandit.experts import experts_regret

rng = np.random.default_rng(1)
model = make_mnl(4, 1.0)
env = random_adversarial(4, 10_000, rng)

# %% [markdown]
# The step size that minimises the bound grows like the square root of the
# horizon. Realised regret stays well below the bound and the average
# regret shrinks.

# %%
for T in (100, 1000, 10_000):
    eta = optimal_eta(model, 1.0, T)
    _, gains = run_experts(model, eta, env.rewards[:T])
    regret = experts_regret(env.rewards[:T], math.fsum(gains))
    bound = theoretical_regret_bound(model, eta, 1.0, T)
    print(f"T={T:>6}  eta={eta:8.2f}  regret={regret:8.2f}  bound={bound:8.2f}  regret/T={regret / T:.4f}")
