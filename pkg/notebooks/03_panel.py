# %% [markdown]
# # Country panel with Driscoll-Kraay errors
#
# A synthetic seven-country panel, the within-group estimate, and a Wald
# comparison against an outside estimate.

# %%
from icpc import driscoll_kraay, pooled_ols_naive, simulate_panel, wald_equality

panel = simulate_panel(b=0.094, xi=0.038, n_countries=7, t_len=52, seed=3, common_share=0.8, regressor_common_share=0.3)
res = driscoll_kraay(panel)
naive_coef, naive_se = pooled_ols_naive(panel)
print(f"b_hat  {res.b_hat:.4f}  DK se {res.dk_se[0]:.4f}  naive se {naive_se[0]:.4f}")
print(f"xi_hat {res.xi_hat:.4f}  DK se {res.dk_se[1]:.4f}  naive se {naive_se[1]:.4f}")
print("95% fixed-b intervals:\n", res.conf_int())

# %% [markdown]
# The naive errors treat every country-period as independent, so under
# common shocks they can miss in either direction; DK errors account for
# the cross-country correlation.

# %%
print(f"Wald p vs 0.087 (0.021): {wald_equality(res, 0.087, 0.021):.3f}")
