"""Command-line entry points.

Subcommands: simulate, fit, contract, certify, report. Every subcommand
takes --seed <int>, --config <path>, --out <dir>. The config file is a
flat key-value format: one `key = value` per line, `#` comments, keys
documented in the README per subcommand. Exit codes: 0 success, 2
validation error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .certificates import (
    build_brackets,
    CertRow,
    chi_square_bound,
    dirichlet_ball_mass,
    e_bounds_audit,
    rice_tail_experiment,
    verify_bracket,
    write_certificates_csv,
)
from .errors import ConfigError, ParseError
from .fourier import FourierCurve, read_curve_csv, write_curve_csv
from .measures import read_measure_csv, write_measure_csv
from .mcmc import McmcConfig, run_chain, write_samples_csv
from .model import SimConfig, read_dataset_csv, simulate, write_dataset_csv
from .priors import parse_preset
from .study import (
    StudyConfig,
    default_truth,
    emit_report,
    read_results_csv,
    run_contraction_study,
)

_CONFIG_KEYS = {
    "simulate": {"n", "l_obs", "sigma", "f0", "g0", "export_shifts"},
    "fit": {
        "dataset",
        "shifts",
        "iterations",
        "burn_in",
        "thin",
        "b_grid",
        "birth_death_rate",
        "preset",
        "rho",
        "c_lambda",
        "l_max",
        "dp_mass",
        "n_calib",
    },
    "contract": {
        "s",
        "n_grid",
        "replicates",
        "iterations",
        "burn_in",
        "thin",
        "b_grid",
        "birth_death_rate",
        "preset",
        "rho",
        "c_lambda",
        "l_max",
        "dp_mass",
        "divergence_n",
        "radius_quantile",
        "f0",
        "g0",
        "format",
    },
    "certify": {
        "which",
        "n_mc",
        "cutoff",
        "eps",
        "ell_n",
        "rice_t",
        "chi2_k",
        "chi2_c",
        "dirichlet_n",
        "dirichlet_r",
    },
    "report": {"results", "format", "s"},
}


def parse_config(path, command):
    """Flat `key = value` file; unknown keys are validation errors."""
    cfg = {}
    if path is None:
        return cfg
    try:
        fh = open(path)
    except OSError as exc:
        raise ConfigError(f"cannot open config {path}: {exc}") from exc
    with fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in _CONFIG_KEYS[command]:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r} for {command}")
            cfg[key] = value
    return cfg


def _get(cfg, key, cast, default):
    if key not in cfg:
        return default
    try:
        return cast(cfg[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key}: {cfg[key]!r}") from exc


def _load_truth(cfg, s):
    f0_default, g0_default = default_truth(s)
    f0 = read_curve_csv(cfg["f0"]) if "f0" in cfg else f0_default
    g0 = read_measure_csv(cfg["g0"]) if "g0" in cfg else g0_default
    return f0, g0


def _out_path(args, name):
    import os

    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


def cmd_simulate(args):
    cfg = parse_config(args.config, "simulate")
    n = _get(cfg, "n", int, 200)
    sigma = _get(cfg, "sigma", float, 1.0)
    f0, g0 = _load_truth(cfg, 1.0)
    l_obs = _get(cfg, "l_obs", int, max(6, f0.cutoff))
    export_shifts = _get(cfg, "export_shifts", lambda v: bool(int(v)), True)
    ds = simulate(SimConfig(f0=f0, g0=g0, n=n, l_obs=l_obs, noise_scale=sigma), args.seed)
    shifts_path = _out_path(args, "dataset_shifts.csv") if export_shifts else None
    write_dataset_csv(ds, _out_path(args, "dataset.csv"), shifts_path)
    write_curve_csv(f0, _out_path(args, "truth_f0.csv"))
    write_measure_csv(g0, _out_path(args, "truth_g0.csv"))
    print(f"simulated n={n} observations at cutoff {l_obs} (seed {args.seed})")


def _mcmc_from_cfg(cfg, seed):
    return McmcConfig(
        iterations=_get(cfg, "iterations", int, 2000),
        burn_in=_get(cfg, "burn_in", int, 500),
        thin=_get(cfg, "thin", int, 10),
        b_grid=_get(cfg, "b_grid", int, 256),
        birth_death_rate=_get(cfg, "birth_death_rate", float, 0.3),
        seed=seed,
    )


def _study_from_cfg(cfg, seed):
    s = _get(cfg, "s", float, 1.0)
    f0, g0 = _load_truth(cfg, s)
    preset = parse_preset(cfg.get("preset", f"nonadaptive:{s:g}"))
    n_grid = _get(
        cfg, "n_grid", lambda v: tuple(int(x) for x in v.split(",")), (50, 200, 800)
    )
    return StudyConfig(
        f0=f0,
        g0=g0,
        s=s,
        n_grid=n_grid,
        preset=preset,
        replicates=_get(cfg, "replicates", int, 3),
        mcmc=McmcConfig(
            iterations=_get(cfg, "iterations", int, 2500),
            burn_in=_get(cfg, "burn_in", int, 500),
            thin=_get(cfg, "thin", int, 40),
            b_grid=_get(cfg, "b_grid", int, 256),
            birth_death_rate=_get(cfg, "birth_death_rate", float, 0.3),
        ),
        l_max=_get(cfg, "l_max", int, 6),
        rho=_get(cfg, "rho", float, 1.5),
        c_lambda=_get(cfg, "c_lambda", float, 1.0),
        dp_mass=_get(cfg, "dp_mass", float, 1.0),
        divergence_n=_get(cfg, "divergence_n", int, 2000),
        radius_quantile=_get(cfg, "radius_quantile", float, 0.5),
        seed=seed,
    )


def cmd_fit(args):
    cfg = parse_config(args.config, "fit")
    if "dataset" not in cfg:
        raise ConfigError("fit needs dataset=<path>")
    data = read_dataset_csv(cfg["dataset"], cfg.get("shifts"))
    from .measures import DPConfig
    from .priors import PriorConfig

    prior = PriorConfig(
        rho=_get(cfg, "rho", float, 1.5),
        c_lambda=_get(cfg, "c_lambda", float, 1.0),
        l_max=_get(cfg, "l_max", int, min(6, data.l_obs)),
        preset=parse_preset(cfg.get("preset", "nonadaptive:1")),
        dp=DPConfig(total_mass=_get(cfg, "dp_mass", float, 1.0)),
    )
    n_calib = _get(cfg, "n_calib", int, max(data.n, 2))
    result = run_chain(data, prior, n_calib, _mcmc_from_cfg(cfg, args.seed))
    paths = write_samples_csv(result, args.out)
    rate = result.acceptance_rate
    print(
        f"kept {len(result.samples)} samples; birth/death acceptance "
        f"{rate:.3f}" if rate == rate else "kept samples; no birth/death attempts"
    )
    for name, path in paths.items():
        print(f"  {name}: {path}")


def cmd_contract(args):
    cfg = parse_config(args.config, "contract")
    study = _study_from_cfg(cfg, args.seed)
    formats = _get(
        cfg, "format", lambda v: tuple(x.strip() for x in v.split(",")), ("csv", "svg")
    )
    result = run_contraction_study(
        study,
        out_dir=args.out,
        progress=lambda row: print(
            f"n={row['n']} replicate={row['replicate']} radius={row['radius']:.4f}"
        ),
    )
    paths = emit_report(result, formats=formats, out_dir=args.out)
    ref = result.reference_slope
    print(f"fitted log-log slope {result.slope:.4f} (reference {ref:.4f})")
    for path in paths:
        print(f"  wrote {path}")


def cmd_certify(args):
    cfg = parse_config(args.config, "certify")
    which = _get(
        cfg,
        "which",
        lambda v: tuple(x.strip() for x in v.split(",")),
        ("brackets", "rice", "ebounds", "chi2", "dirichlet"),
    )
    n_mc = _get(cfg, "n_mc", int, 100_000)
    rng = np.random.default_rng(args.seed)
    rows = []
    if "brackets" in which:
        cutoff = _get(cfg, "cutoff", int, 1)
        eps = _get(cfg, "eps", float, 0.1)
        dim = 2 * cutoff + 1
        coeffs = (rng.normal(size=dim) + 1j * rng.normal(size=dim)) / np.sqrt(dim)
        fam = build_brackets(FourierCurve(coeffs), eps)
        rep = verify_bracket(fam, n_phi=16, n_z=2000, rng=rng)
        rows.append(
            CertRow(
                "bracket_width",
                rep.max_hellinger_width,
                eps,
                eps - rep.max_hellinger_width,
                rep.width_ok,
            )
        )
        rows.append(
            CertRow(
                "bracket_count",
                fam.k,
                1.5 * rep.envelope_bound,
                1.5 * rep.envelope_bound - fam.k,
                fam.k <= 1.5 * rep.envelope_bound,
            )
        )
        rows.append(
            CertRow(
                "bracket_envelope",
                rep.n_envelope_violations,
                0.0,
                -float(rep.n_envelope_violations),
                rep.envelope_ok,
            )
        )
    if "rice" in which:
        t = _get(cfg, "rice_t", float, 2.5)
        u = FourierCurve.from_dict({1: 1.0})
        table = rice_tail_experiment(u, [t], n_grid=512, n_mc=n_mc, rng=rng)
        row = table[0]
        ratio = row["empirical"] / row["bound"] if row["bound"] > 0 else float("inf")
        rows.append(
            CertRow(
                "rice_single_freq_ratio", ratio, 1.2, 1.2 - ratio, 0.8 <= ratio <= 1.2
            )
        )
    if "ebounds" in which:
        f0, g0 = default_truth(1.0)
        ell_n = _get(cfg, "ell_n", int, 2)
        rows.extend(e_bounds_audit(f0, g0, ell_n, n_mc=n_mc, rng=rng))
    if "chi2" in which:
        k = _get(cfg, "chi2_k", int, 10)
        c = _get(cfg, "chi2_c", float, 1.0)
        from scipy.stats import chi2 as chi2_dist

        printed = chi_square_bound(k, c)
        true_tail = float(chi2_dist.sf((1.0 + c) * k, df=k))
        rows.append(
            CertRow("chi_square_printed_vs_true", true_tail, printed, printed - true_tail, True)
        )
    if "dirichlet" in which:
        n_dims = _get(cfg, "dirichlet_n", int, 5)
        r = _get(cfg, "dirichlet_r", float, 0.05)
        res = dirichlet_ball_mass(
            n_dims,
            np.ones(n_dims),
            np.full(n_dims, 1.0 / n_dims),
            r,
            n_mc=n_mc,
            rng=rng,
        )
        exponent = res["lower_bound_exponent"]
        emp_log = -np.log(max(res["empirical"], 1e-300))
        rows.append(
            CertRow(
                "dirichlet_ball_log_ratio",
                float(emp_log / exponent),
                float("inf"),
                float("inf"),
                res["empirical"] > 0,
            )
        )
    path = _out_path(args, "certificates.csv")
    write_certificates_csv(rows, path)
    failed = [r.check for r in rows if not r.passed]
    print(f"wrote {len(rows)} certificate rows to {path}")
    if failed:
        print(f"FAILED checks: {', '.join(failed)}")
    else:
        print("all checks passed")


def cmd_report(args):
    cfg = parse_config(args.config, "report")
    if "results" not in cfg:
        raise ConfigError("report needs results=<path to contraction.csv>")
    result = read_results_csv(cfg["results"])
    if "s" in cfg:
        s = float(cfg["s"])
        result.reference_slope = -s / (2.0 * s + 2.0)
    formats = _get(
        cfg, "format", lambda v: tuple(x.strip() for x in v.split(",")), ("csv", "svg")
    )
    paths = emit_report(result, formats=formats, out_dir=args.out)
    for path in paths:
        print(f"wrote {path}")


_COMMANDS = {
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "contract": cmd_contract,
    "certify": cmd_certify,
    "report": cmd_report,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="shiftlab",
        description="Randomly shifted curves: simulation, posterior fitting, "
        "contraction studies, and bound certificates.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--config", type=str, default=None)
        sp.add_argument("--out", type=str, default=".")
    return parser


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        _COMMANDS[args.command](args)
    except (ConfigError, ParseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
