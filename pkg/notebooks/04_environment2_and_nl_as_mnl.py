# %% [markdown]
# # Thirteen arms, and a nested model that is really flat
#
# On the larger environment the nested model wins by several hundred
# reward points. With every nest scale at 0.998 the nested model is almost
# MNL with mu = 1, and under common random numbers the two runs are nearly
# indistinguishable.

# %%
from gevbandit import preset_configs, run_experiment

for name in ("env2-mnl", "env2-nl", "env1-nl-as-mnl"):
    for config in preset_configs(name):
        r = run_experiment(config, threads=4)
        print(f"{config.label:<16} reward {r.mean_total_reward:8.2f} +- {r.stderr_total_reward:5.2f}")
