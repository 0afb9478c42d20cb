"""Inference-cost Phillips curve toolkit.

Closed-form slopes and welfare formulas (:mod:`icpc.core`), a synthetic
economy (:mod:`icpc.simulate`), a Fokker-Planck solver for the price
density (:mod:`icpc.meanfield`), two-step GMM (:mod:`icpc.gmm`), a
Driscoll-Kraay panel estimator (:mod:`icpc.panel`), the log-log scaling
experiment (:mod:`icpc.scaling`) and file formats (:mod:`icpc.io`).
"""

__version__ = "0.1.0"

from .core import (
    DEFAULT_GAMMA,
    BASELINE,
    ModelParams,
    PolicyReport,
    ShockMoments,
    SlopePair,
    WelfareReport,
    algorithmic_slopes,
    closed_form_slopes,
    indexing_cutoff,
    lucas_welfare_cost,
    optimal_inflation_target,
    policy_report,
    taylor_coefficient,
    variance_share_bound,
    welfare_decomposition,
)
from .exceptions import (
    DataError,
    IcpcError,
    InfeasibleError,
    NumericalError,
    ParameterError,
    RankError,
    StabilityError,
    ValidationError,
)
from .gmm import GmmResult, InstrumentSpec, consistency_study, coverage_study, two_step_gmm
from .hac import auto_bandwidth, newey_west
from .meanfield import (
    DensityGrid,
    MeanFieldConfig,
    convergence_study,
    domain_for,
    empirical_vs_fp_distance,
    fp_mean_path,
    fp_step,
    gaussian_grid,
    mean_path_ode,
)
from .panel import PanelDataset, PanelResult, driscoll_kraay, pooled_ols_naive, simulate_panel, wald_equality
from .scaling import ScalingResult, scaling_experiment
from .simulate import (
    AR1,
    IntensityDistribution,
    ShockProcessSpec,
    TimeSeriesDataset,
    simulate_aggregate,
    simulate_firm_panel,
    simulate_shocks,
)
