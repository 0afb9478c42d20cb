# %% [markdown]
# # Two-step GMM on simulated data
#
# Simulate the aggregate economy, estimate both slopes, and look at how the
# error shrinks with the sample size.

# %%
import numpy as np

from icpc import BASELINE, algorithmic_slopes, consistency_study, simulate_aggregate, two_step_gmm

truth = algorithmic_slopes(BASELINE)
data = simulate_aggregate(BASELINE, t_len=5000, seed=1)
res = two_step_gmm(data, beta=BASELINE.beta)
print(f"kappa_hat     {res.kappa_hat:.4f} ({res.hac_se[0]:.4f})  truth {truth.kappa:.4f}")
print(f"kappa_inf_hat {res.kappa_inf_hat:.4f} ({res.hac_se[1]:.4f})  truth {truth.kappa_inf:.4f}")
print(f"J = {res.j_stat:.2f} on {res.j_df} df, p = {res.j_pvalue:.3f}")

# %% [markdown]
# RMSE across T. A slope of about -1/2 on the log-log scale is the root-T rate.

# %%
tab = consistency_study(BASELINE, t_grid=(500, 2000, 8000), reps=40, seed=0)
for t, rmse, bias in tab.rows():
    print(f"T={t:5d}  rmse={np.round(rmse, 4)}  bias={np.round(bias, 4)}")
print("log-RMSE slopes:", np.round(tab.rate, 3))
