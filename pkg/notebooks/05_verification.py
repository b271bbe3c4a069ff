# %% [markdown]
# # Checking the smoothness conditions numerically
#
# The regret analysis rests on a few inequalities about the surplus. Here
# we check them by finite differences on concrete models, and show that
# halving the constants breaks them.

# %%
import numpy as np

from gevbandit import make_mnl, make_nested_logit, run_verification
from gevbandit.verification import check_diff_consistency, diff_consistency_constant, negative_orthant

nl = make_nested_logit([([0, 2], 0.05), ([1, 3], 0.1)])
print(run_verification(nl).summary())

# %%
rng = np.random.default_rng(0)
U = negative_orthant(rng, (200, 4))
C = diff_consistency_constant(nl)
for c in (C, C / 2):
    res = check_diff_consistency(nl, U, C=c)
    print(f"C={c:6.2f}  worst margin {res.worst_margin:+.3e}  {res.status}")

# %% [markdown]
# The report also serialises to CSV for archiving.

# %%
print(run_verification(make_mnl(4, 0.25), points=20, draws=10_000).to_csv())
