# %% [markdown]
# # Calibration, slopes and welfare
#
# Baseline Calvo slopes, their algorithmic-pricing counterparts, and the
# welfare and policy quantities at the calibrated parameters.

# %%
from icpc import (
    BASELINE,
    ShockMoments,
    algorithmic_slopes,
    closed_form_slopes,
    indexing_cutoff,
    lucas_welfare_cost,
    policy_report,
    welfare_decomposition,
)

base = closed_form_slopes(BASELINE)
alg = algorithmic_slopes(BASELINE)
print(f"kappa         {base.kappa:.6f}   kappa_alg     {alg.kappa:.6f}")
print(f"kappa_inf     {base.kappa_inf:.6f}   kappa_inf_alg {alg.kappa_inf:.6f}")
print(f"phi * rho     {BASELINE.phi_rho:.3f}")

# %% [markdown]
# Welfare losses for unit shock variances. The inference loss scales with
# lambda_bar squared; the algorithmic loss only depends on phi * rho.

# %%
mom = ShockMoments(var_inf=1.0, var_ygap=1.0, var_u=0.25)
w = welfare_decomposition(BASELINE, mom)
print(f"L_inf {w.l_inf:.3e}  L_alg {w.l_alg:.3e}")
for lam in (0.06, 0.18, 0.30):
    p = BASELINE.replace(lambda_bar=lam)
    print(f"lambda_bar={lam:.2f}  L_inf={welfare_decomposition(p, mom).l_inf:.3e}  dC*={lucas_welfare_cost(p, 1.0):.3e}")

# %% [markdown]
# Policy: the Taylor-rule response to the cost index, the inflation target
# after an expected unit cost shock, and the indexing cutoff needed to keep
# the inference share of inflation variance below 0.05%.

# %%
pol = policy_report(BASELINE, mom, expected_cinf_next=1.0)
print(f"psi*  {pol.psi_inf_star:.6f}")
print(f"pi*   {pol.pi_target:.6f}")
print(f"eta   {pol.eta_inf_bound:.4f}")
print(f"cutoff for eta_bar=0.0005: {indexing_cutoff(BASELINE, mom, 0.0005):.6f}")
