"""Batch command line: ``icpc <subcommand> [--seed N] [--config FILE] [--out DIR]``.

Exit status is 0 on success, 1 on invalid input (bad flags, config, data or
parameters) and 2 on numerical failure. Errors go to standard error as a
single line ``icpc: error[<kind>]: <message>`` with kind one of ``usage``,
``validation`` or ``numerical``.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import io
from .core import (
    ShockMoments,
    algorithmic_slopes,
    closed_form_slopes,
    lucas_welfare_cost,
    policy_report,
    welfare_decomposition,
)
from .exceptions import NumericalError, ValidationError
from .gmm import consistency_study, two_step_gmm
from .meanfield import convergence_study
from .panel import driscoll_kraay, simulate_panel, wald_equality
from .scaling import SCALING_SPEC, scaling_experiment
from .simulate import IntensityDistribution, simulate_aggregate, simulate_firm_panel

__all__ = ["main", "build_parser"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=None, help="base seed (overrides the config)")
    p.add_argument("--config", type=Path, default=None, help="INI experiment config")
    p.add_argument("--out", type=Path, default=None, help="output directory")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="icpc", description="Inference-cost Phillips curve toolkit.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, metavar="COMMAND")

    p = sub.add_parser("simulate", parents=[common], help="simulate a dataset to CSV")
    p.add_argument("--kind", choices=("aggregate", "firm", "panel"), default="aggregate")
    p.add_argument("--t-len", type=int, default=None)
    p.add_argument("--n-firms", type=int, default=None)

    p = sub.add_parser("estimate", parents=[common], help="two-step GMM on a time-series CSV")
    p.add_argument("data", type=Path)
    p.add_argument("--bandwidth", type=int, default=None)
    p.add_argument("--format", choices=("json", "table"), default="json")

    p = sub.add_parser("panel", parents=[common], help="fixed effects with Driscoll-Kraay errors")
    p.add_argument("data", type=Path, nargs="?", help="panel CSV (simulated when omitted)")
    p.add_argument("--bandwidth", type=int, default=None)
    p.add_argument("--ext-coef", type=float, default=None, help="external estimate for the Wald test")
    p.add_argument("--ext-se", type=float, default=None)
    p.add_argument("--format", choices=("json", "table"), default="json")

    p = sub.add_parser("scaling", parents=[common], help="log-log scaling experiment")
    p.add_argument("--format", choices=("json", "table"), default="table")

    p = sub.add_parser("meanfield", parents=[common], help="mean-field convergence study")
    p.add_argument("--format", choices=("json", "table"), default="table")

    p = sub.add_parser("welfare", parents=[common], help="slopes, welfare and policy quantities")
    p.add_argument("--var-inf", type=float, default=None)
    p.add_argument("--var-ygap", type=float, default=None)
    p.add_argument("--var-u", type=float, default=None)
    p.add_argument("--expected-cinf", type=float, default=0.0)
    p.add_argument("--format", choices=("json", "table"), default="table")

    p = sub.add_parser("montecarlo", parents=[common], help="GMM RMSE across sample sizes")
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--format", choices=("json", "table"), default="table")
    return parser


# ---------------------------------------------------------------------------


class _Run:
    """Per-invocation context: config, seed and output bookkeeping."""

    def __init__(self, args):
        self.args = args
        self.cfg = io.load_config(args.config) if args.config else io.ExperimentConfig()
        self.seed = self.cfg.run.seed if args.seed is None else args.seed
        out = args.out if args.out is not None else self.cfg.output_dir
        self.out = Path(out) if out else None
        self.written: list[Path] = []

    def write(self, name: str, text: str):
        if self.out is None:
            return
        self.written.append(io.atomic_write(self.out / name, text))

    def finish(self):
        if self.out is None:
            return
        manifest = io.RunManifest(self.args.command, self.cfg.digest, self.seed)
        manifest.outputs = [p.name for p in self.written]
        io.atomic_write(self.out / "manifest.json", io.to_json(manifest.finish().to_dict()))


def _cmd_simulate(run: _Run):
    cfg, a = run.cfg, run.args
    t_len = a.t_len or cfg.run.t_len
    if a.kind == "aggregate":
        data = simulate_aggregate(cfg.model, cfg.shocks, t_len, seed=run.seed)
        name, text = "simulated.csv", io.timeseries_csv_text(data)
    elif a.kind == "firm":
        dist = IntensityDistribution.point_mass(cfg.model.lambda_bar)
        panel = simulate_firm_panel(cfg.model, dist, cfg.shocks, a.n_firms or cfg.run.n_firms, t_len, seed=run.seed)
        name, text = "simulated.csv", io.timeseries_csv_text(panel.dataset)
    else:
        data = simulate_panel(t_len=a.t_len or 52, seed=run.seed)
        name, text = "panel.csv", io.panel_csv_text(data)
    if run.out is None:
        sys.stdout.write(text)
    else:
        run.write(name, text)


def _cmd_estimate(run: _Run):
    cfg, a = run.cfg, run.args
    data = io.load_timeseries_csv(a.data)
    bw = a.bandwidth if a.bandwidth is not None else cfg.bandwidth
    res = two_step_gmm(data, cfg.instruments, beta=cfg.model.beta, bandwidth=bw, initial_weight=cfg.initial_weight)
    run.write("gmm.json", io.to_json(res.to_dict()))
    lo, hi = res.conf_int(cfg.run.level).T
    table = io.format_table(
        [
            ("kappa", res.kappa_hat, res.hac_se[0], lo[0], hi[0]),
            ("kappa_inf", res.kappa_inf_hat, res.hac_se[1], lo[1], hi[1]),
        ],
        ("", "estimate", "hac_se", "lower", "upper"),
    )
    table += io.format_table(
        [("J", res.j_stat), ("J df", res.j_df), ("J p-value", res.j_pvalue), ("T", res.nobs), ("bandwidth", res.bandwidth)]
    )
    run.write("gmm_table.txt", table)
    sys.stdout.write(io.to_json(res.to_dict()) if a.format == "json" else table)


def _cmd_panel(run: _Run):
    a = run.args
    data = io.load_panel_csv(a.data) if a.data else simulate_panel(seed=run.seed)
    res = driscoll_kraay(data, a.bandwidth if a.bandwidth is not None else run.cfg.bandwidth)
    if (a.ext_coef is None) != (a.ext_se is None):
        raise ValidationError("--ext-coef and --ext-se must be given together")
    if a.ext_coef is not None:
        res.wald_p = wald_equality(res, a.ext_coef, a.ext_se)
    lo, hi = res.conf_int(run.cfg.run.level).T
    table = io.format_table(
        [
            ("b (cinf lag 1)", res.b_hat, res.dk_se[0], lo[0], hi[0]),
            ("xi (ygap)", res.xi_hat, res.dk_se[1], lo[1], hi[1]),
        ],
        ("", "estimate", "dk_se", "lower", "upper"),
    )
    rows = [("N", res.n_units), ("T", res.n_periods), ("within R2", res.r2_within), ("bandwidth", res.bandwidth)]
    if res.wald_p is not None:
        rows.append(("Wald p", res.wald_p))
    table += io.format_table(rows)
    run.write("panel.json", io.to_json(res.to_dict()))
    run.write("panel_table.txt", table)
    sys.stdout.write(io.to_json(res.to_dict()) if a.format == "json" else table)


def _cmd_scaling(run: _Run):
    cfg = run.cfg
    spec = cfg.shocks if run.args.config else SCALING_SPEC
    res = scaling_experiment(
        cfg.model, spec, cfg.run.lambda_grid, cfg.run.t_window, cfg.run.windows_per_lambda, seed=run.seed
    )
    run.write("scaling_points.csv", io.csv_text(("lambda_bar", "kappa_inf_hat"), res.points))
    table = io.format_table(
        [
            ("a (intercept)", res.a_hat, res.a_se, res.a_se_hac),
            ("b (slope)", res.b_hat, res.b_se, res.b_se_hac),
        ],
        ("", "estimate", "se", "hac_se"),
    )
    table += io.format_table([("R2", res.r2), ("windows", res.n_windows), ("failures", res.failures)])
    run.write("scaling.json", io.to_json(res.to_dict()))
    sys.stdout.write(io.to_json(res.to_dict()) if run.args.format == "json" else table)


def _cmd_meanfield(run: _Run):
    r = run.cfg.run
    res = convergence_study(
        run.cfg.model,
        sigma_p2=r.sigma_p2,
        n_grid=r.n_grid,
        reps=r.mf_reps,
        t_len=r.mf_t_len,
        m=r.grid_cells,
        seed=run.seed,
    )
    if res.final_grid is not None:
        run.write("density.csv", io.density_csv_text(res.final_grid))
    table = io.format_table(zip(res.n_firms, res.medians), ("N", "median W1"))
    table += io.format_table(
        [
            ("non-increasing", str(res.non_increasing)),
            ("sigma_p2", res.sigma_p2),
            ("ygap coefficient", res.slope_coef[0]),
            ("cinf coefficient", res.slope_coef[1]),
            ("ratio", res.slope_ratio),
            ("lambda_bar", run.cfg.model.lambda_bar),
            ("relative RMSE vs ICPC", res.mean_rel_rmse),
        ]
    )
    run.write("meanfield.json", io.to_json(res.to_dict()))
    sys.stdout.write(io.to_json(res.to_dict()) if run.args.format == "json" else table)


def _cmd_welfare(run: _Run):
    cfg, a = run.cfg, run.args
    params, s = cfg.model, cfg.shocks
    moments = ShockMoments(
        var_inf=s.cinf.stationary_variance if a.var_inf is None else a.var_inf,
        var_ygap=s.ygap.stationary_variance if a.var_ygap is None else a.var_ygap,
        var_u=s.u.stationary_variance if a.var_u is None else a.var_u,
    )
    base = closed_form_slopes(params)
    alg = algorithmic_slopes(params)
    welfare = welfare_decomposition(params, moments)
    policy = policy_report(params, moments, a.expected_cinf)
    values = {
        "kappa": base.kappa,
        "kappa_inf": base.kappa_inf,
        "phi_rho": params.phi_rho,
        "kappa_alg": alg.kappa,
        "kappa_inf_alg": alg.kappa_inf,
        "L_inf": welfare.l_inf,
        "L_alg": welfare.l_alg,
        "W_star": welfare.w_star,
        "psi_star": policy.psi_inf_star,
        "pi_target": policy.pi_target,
        "eta_inf_bound": policy.eta_inf_bound,
        "delta_C_star": lucas_welfare_cost(params, moments.var_inf),
    }
    values = {k: v + 0.0 for k, v in values.items()}  # no negative zeros
    run.write("welfare.json", io.to_json(values))
    if a.format == "json":
        sys.stdout.write(io.to_json(values))
    else:
        width = max(len(k) for k in values)
        sys.stdout.write("".join(f"{k.ljust(width)}  {v:.6f}\n" for k, v in values.items()))


def _cmd_montecarlo(run: _Run):
    cfg = run.cfg
    reps = run.args.reps or cfg.run.reps
    tab = consistency_study(cfg.model, cfg.shocks, cfg.run.t_grid, reps, seed=run.seed, instruments=cfg.instruments)
    rows = [(t, r[0], r[1], b[0], b[1]) for t, r, b in tab.rows()]
    table = io.format_table(rows, ("T", "rmse kappa", "rmse kappa_inf", "bias kappa", "bias kappa_inf"))
    table += io.format_table([("log-RMSE slope kappa", tab.rate[0]), ("log-RMSE slope kappa_inf", tab.rate[1])])
    payload = {
        "t_grid": tab.t_grid,
        "rmse": tab.rmse,
        "bias": tab.bias,
        "rate": tab.rate,
        "reps": tab.reps,
        "truth": tab.truth,
        "failures": tab.failures,
    }
    run.write("montecarlo.json", io.to_json(payload))
    run.write("montecarlo_table.txt", table)
    sys.stdout.write(io.to_json(payload) if run.args.format == "json" else table)


_COMMANDS = {
    "simulate": _cmd_simulate,
    "estimate": _cmd_estimate,
    "panel": _cmd_panel,
    "scaling": _cmd_scaling,
    "meanfield": _cmd_meanfield,
    "welfare": _cmd_welfare,
    "montecarlo": _cmd_montecarlo,
}


def _fail(kind: str, message) -> None:
    text = " ".join(str(message).split())
    sys.stderr.write(f"icpc: error[{kind}]: {text}\n")


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        _fail("usage", exc)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        _fail("usage", "a subcommand is required")
        return 1
    try:
        run = _Run(args)
        _COMMANDS[args.command](run)
        run.finish()
    except ValidationError as exc:
        _fail("validation", exc)
        return 1
    except (NumericalError, np.linalg.LinAlgError, FloatingPointError) as exc:
        _fail("numerical", exc)
        return 2
    except OSError as exc:
        _fail("validation", exc)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
