# %% [markdown]
# # Scaling of the cost slope in AI intensity
#
# Estimate kappa_inf on windows simulated at several lambda_bar values and
# fit log10 kappa_inf on log10 lambda_bar. The slope should be one.

# %%
import numpy as np

from icpc import BASELINE, scaling_experiment

res = scaling_experiment(BASELINE, t_window=2000, windows_per_lambda=10, seed=0)
print(f"b_hat {res.b_hat:.3f} (HAC se {res.b_se_hac:.3f})  R2 {res.r2:.4f}  windows {res.n_windows}")

# %%
for lam in np.unique(res.points[:, 0]):
    k = res.points[res.points[:, 0] == lam, 1]
    print(f"lambda_bar={lam:.2f}  mean kappa_inf_hat={k.mean():.5f}  sd={k.std(ddof=1):.5f}")
