# %% [markdown]
# # Price density and its finite-firm counterpart
#
# Solve the density equation on a grid, check it against the exact mean
# path, then compare with particle panels of growing size.

# %%
import numpy as np

from icpc import (
    BASELINE,
    MeanFieldConfig,
    ShockProcessSpec,
    convergence_study,
    domain_for,
    fp_mean_path,
    gaussian_grid,
    mean_path_ode,
    simulate_shocks,
)

cfg = MeanFieldConfig.from_params(BASELINE, sigma_p2=1.0)
shocks = simulate_shocks(ShockProcessSpec.white_noise(u_std=0.0), 30, seed=2)
lo, hi = domain_for(cfg, shocks.ygap, shocks.cinf, 0.0, 0.5)
out = fp_mean_path(cfg, shocks.ygap, shocks.cinf, gaussian_grid(0.0, 0.5, lo, hi, 256))
exact = mean_path_ode(cfg, shocks.ygap, shocks.cinf, 0.0)
print(f"max |grid mean - exact| = {np.max(np.abs(out.mean - exact)):.2e}, mass error {out.mass_error:.1e}")
print(f"final variance {out.grid.variance():.3f} vs stationary {cfg.stationary_variance:.3f}")

# %% [markdown]
# Wasserstein-1 distance between N simulated firms and the grid density.
# A small study here; the acceptance suite runs the full one.

# %%
res = convergence_study(BASELINE, sigma_p2=1.0, n_grid=(100, 1000, 10000), reps=3, t_len=5, m=128, regression_t_len=60)
for n, med in zip(res.n_firms, res.medians):
    print(f"N={n:6d}  median W1={med:.4f}")
print(f"cost/demand slope ratio {res.slope_ratio:.4f} (lambda_bar {BASELINE.lambda_bar})")
