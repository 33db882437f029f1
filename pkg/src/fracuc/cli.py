"""Command line entry point: ``fracuc <command> --input ... --output ...``.

Exit codes: 0 success, 2 input error, 3 numerical failure, 4 configuration error.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from . import __version__
from .errors import (ConfigError, DegenerateStateError, DomainError, EstimationError, FracUCError,
                     InputError, InvalidParameterError, NonPositiveIncrementError,
                     NumericalDegeneracyError, ResourceError)
from .estimate import EstimationConfig, css_fit, fit_uc, hessian_se
from .filter import run_filter, run_smoother
from .fracops import (LagPolynomial, aggregate_theta_u, bn_decompose, lagpoly_invert,
                      reduced_form_innovations)
from .gausscov import D_MAX, ThetaParams
from .io import parse_jhu_wide, parse_long, read_series, write_table, config_hash
from .mc import McDesign, run_study, table_header, table_rows
from .sir import (CaseSeries, build_measurement, monitor_recursive, sir_pipeline,
                  synth_recovered, zero_delta_adjust)

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_CONFIG = 0, 2, 3, 4

# option name -> (type, default); shared by flags and the key=value config file
OPTIONS = {
    "input": (str, None),
    "output": (str, None),
    "format": (str, "csv"),
    "seed": (int, 0),
    "d_max": (float, D_MAX),
    "starts": (int, 100),
    "bandwidth_exp": (str, "0.65"),
    "hbar": (int, None),
    "window": (int, 10),
    "threshold": (float, 1.2),
    "min_sample": (int, 80),
    "weekday": (int, None),
    "adjusted": (bool, False),
    "d": (float, None),
    "sigma_eta2": (float, None),
    "sigma_u2": (float, None),
    "sigma_eps2": (float, None),
    "sigma_eta_eps": (float, 0.0),
    "phi": (str, ""),
    "input_format": (str, "auto"),
    "population": (float, None),
    "region": (str, None),
    "repair_zero_delta": (bool, False),
    "lag": (int, 3),
    "replications": (int, 200),
    "n_values": (str, "100,200,300"),
    "rho_values": (str, "0.5,1,2"),
    "d0_values": (str, "0.75,1.25,1.75"),
}


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="file of key=value lines; flags take precedence")
    for name, (typ, _) in OPTIONS.items():
        if typ is bool:
            common.add_argument(_flag(name), dest=name, action="store_const", const=True,
                                default=None)
        else:
            common.add_argument(_flag(name), dest=name, type=typ, default=None)

    parser = argparse.ArgumentParser(prog="fracuc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "fit": "two-step CSS fit of a log series; writes estimate and SE per parameter",
        "filter": "prediction errors and one-step latent predictions",
        "smooth": "full-sample latent component estimate",
        "sir": "contact rate, reproduction rate and flags from case counts",
        "monitor": "recursive real-time contact-rate estimates",
        "mc": "Monte Carlo table of estimator MSEs",
        "bn": "fractional Beveridge-Nelson trend/cycle split",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text)
    return parser


def read_config_file(path) -> Dict[str, object]:
    out = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or key not in OPTIONS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        typ = OPTIONS[key][0]
        value = value.strip()
        try:
            out[key] = value.lower() in ("1", "true", "yes") if typ is bool else typ(value)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {value!r}") from exc
    return out


def resolve_options(args: argparse.Namespace) -> Dict[str, object]:
    opts = {k: default for k, (_, default) in OPTIONS.items()}
    if args.config:
        opts.update(read_config_file(args.config))
    for k in OPTIONS:
        v = getattr(args, k, None)
        if v is not None:
            opts[k] = v
    if not opts["input"] and args.command != "mc":
        raise ConfigError("--input is required")
    if not opts["output"]:
        raise ConfigError("--output is required")
    if opts["input"] and not Path(opts["input"]).exists():
        raise InputError(f"input file {opts['input']} does not exist")
    out_dir = Path(opts["output"]).parent
    if not out_dir.exists():
        raise ConfigError(f"output directory {out_dir} does not exist")
    if opts["format"] not in ("csv", "json"):
        raise ConfigError(f"--format must be csv or json, got {opts['format']!r}")
    if opts["starts"] < 1:
        raise ConfigError("--starts must be >= 1")
    return opts


def _floats(text: str, name: str) -> List[float]:
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad list for {name}: {text!r}") from exc


def estimation_config(opts) -> EstimationConfig:
    return EstimationConfig(n_starts=opts["starts"], d_max=opts["d_max"], seed=opts["seed"])


def _theta_from_opts(opts) -> Optional[ThetaParams]:
    vals = [opts["d"], opts["sigma_eta2"], opts["sigma_u2"]]
    if all(v is None for v in vals):
        return None
    if any(v is None for v in vals):
        raise ConfigError("--d, --sigma-eta2 and --sigma-u2 must be given together")
    try:
        return ThetaParams(*vals, d_max=max(opts["d_max"], vals[0]))
    except InvalidParameterError as exc:
        raise ConfigError(str(exc)) from exc


def _meta(opts, command: str, **extra) -> Dict[str, object]:
    cfg = {k: v for k, v in opts.items() if k not in ("input", "output")}
    meta = dict(version=__version__, command=command, seed=opts["seed"],
                config_hash=config_hash(cfg))
    meta.update(extra)
    return meta


def load_cases(opts) -> CaseSeries:
    path = opts["input"]
    kind = opts["input_format"]
    if kind == "auto":
        with open(path) as fh:
            header = next((ln for ln in fh if not ln.startswith("#")), "")
        kind = "jhu" if "Country/Region" in header else "long"
    if kind == "jhu":
        cases = parse_jhu_wide(path, opts["population"], opts["region"])
    elif kind == "long":
        cases = parse_long(path)
    else:
        raise ConfigError(f"unknown --input-format {kind!r}")
    if opts["repair_zero_delta"]:
        cases = repair_zero_increments(cases)
    if opts["hbar"] is not None:
        cases = synth_recovered(cases, opts["hbar"])
    return cases


def repair_zero_increments(cases: CaseSeries) -> CaseSeries:
    dC = np.diff(cases.confirmed)
    for k in np.flatnonzero(dC == 0) + 1:
        if 2 <= k <= len(cases) - 2 and np.any(cases.confirmed[: k] >= 100):
            cases = zero_delta_adjust(cases, int(k))
    return cases


def _series_input(opts):
    values, dates = read_series(opts["input"])
    weekday = opts["weekday"]
    if weekday is None and dates:
        weekday = dates[0].weekday()
    return values, dates, weekday


def _prepare_series(opts, values, weekday):
    """Return (theta, adjusted series, fit report or None)."""
    theta = _theta_from_opts(opts)
    if opts["adjusted"]:
        y_adj = values
        rep = None
        if theta is None:
            rep = css_fit(y_adj, estimation_config(opts))
            rep = replace(rep, se=hessian_se(y_adj, rep.theta_hat))
            theta = rep.theta_hat
        return theta, y_adj, rep
    if weekday is None:
        raise ConfigError("first weekday unknown: give a date column, --weekday, or --adjusted")
    rep, y_adj = fit_uc(values, weekday, estimation_config(opts),
                        _floats(opts["bandwidth_exp"], "bandwidth_exp")[0])
    return (theta or rep.theta_hat), y_adj, rep


def _index(dates, n):
    return [d.isoformat() for d in dates] if dates else list(range(1, n + 1))


def cmd_fit(opts):
    values, dates, weekday = _series_input(opts)
    _, y_adj, rep = _prepare_series(dict(opts, d=None, sigma_eta2=None, sigma_u2=None),
                                    values, weekday)
    rows = [[name, est, se] for name, est, se in rep.table()]
    if rep.mu_hat is not None:
        rows.append(["mu", rep.mu_hat, float("nan")])
        rows += [[f"alpha_{i}", a, float("nan")] for i, a in enumerate(rep.alpha_hat)]
    meta = _meta(opts, "fit", n=len(values), css=rep.css_value, converged=rep.converged,
                 starts_tried=rep.starts_tried, d_ew=rep.d_ew, bandwidth_m=rep.bandwidth_m)
    write_table(opts["output"], ["parameter", "estimate", "se"], rows, meta, opts["format"])


def cmd_filter(opts):
    values, dates, weekday = _series_input(opts)
    theta, y_adj, _ = _prepare_series(opts, values, weekday)
    out = run_filter(theta, y_adj)
    idx = _index(dates, len(values))
    rows = zip(idx, y_adj, out.v, out.mse, out.x_pred)
    meta = _meta(opts, "filter", d=theta.d, sigma_eta2=theta.sigma_eta2,
                 sigma_u2=theta.sigma_u2, css=out.css)
    write_table(opts["output"], ["t", "y_adj", "v", "mse", "x_pred_next"], rows, meta,
                opts["format"])


def cmd_smooth(opts):
    values, dates, weekday = _series_input(opts)
    theta, y_adj, _ = _prepare_series(opts, values, weekday)
    out = run_smoother(theta, y_adj)
    rows = zip(_index(dates, len(values)), y_adj, out.x_smooth, out.residual)
    meta = _meta(opts, "smooth", d=theta.d, sigma_eta2=theta.sigma_eta2,
                 sigma_u2=theta.sigma_u2)
    write_table(opts["output"], ["t", "y_adj", "x_smooth", "residual"], rows, meta,
                opts["format"])


def cmd_sir(opts):
    cases = load_cases(opts)
    res = sir_pipeline(cases, estimation_config(opts), opts["window"], opts["threshold"],
                       _floats(opts["bandwidth_exp"], "bandwidth_exp")[0])
    flags = [[] for _ in res.log_beta]
    for i, kind in res.turning:
        flags[i].append(kind)
    if res.trigger is not None:
        flags[res.trigger].append("trigger")
    th = res.fit.theta_hat
    rows = [[d, ly, lb, r, ";".join(f)] for d, ly, lb, r, f in
            zip(res.dates, res.measurement.log_y, res.log_beta, res.r_hat, flags)]
    meta = _meta(opts, "sir", gamma_hat=res.gamma, d=th.d, sigma_eta2=th.sigma_eta2,
                 sigma_u2=th.sigma_u2, mu_hat=res.fit.mu_hat,
                 trigger_date=res.dates[res.trigger] if res.trigger is not None else "none")
    write_table(opts["output"], ["date", "log_y", "log_beta_smooth", "r_hat", "flags"], rows,
                meta, opts["format"])


def cmd_monitor(opts):
    cases = load_cases(opts)
    meas = build_measurement(cases)
    trace = monitor_recursive(meas.log_y, meas.weekday_of_start, opts["min_sample"],
                              estimation_config(opts), lag=opts["lag"],
                              bandwidth_exp=_floats(opts["bandwidth_exp"], "bandwidth_exp")[0],
                              start_date=meas.start_date)
    if trace.failure:
        # no partial trace on disk
        raise EstimationError(trace.failure)
    rows = [[d, rt, fs, bm, th.d] for d, rt, fs, bm, th in
            zip(trace.dates, trace.beta_realtime, trace.beta_fullsample, trace.benchmark,
                trace.theta_path)]
    meta = _meta(opts, "monitor", lag=opts["lag"], min_sample=opts["min_sample"])
    write_table(opts["output"], ["date", "log_beta_realtime", "log_beta_fullsample",
                                 "log_beta_benchmark", "d_hat"], rows, meta, opts["format"])


def cmd_mc(opts):
    exps = tuple(_floats(opts["bandwidth_exp"], "bandwidth_exp"))
    try:
        design = McDesign(d0_values=tuple(_floats(opts["d0_values"], "d0_values")),
                          rho_values=tuple(_floats(opts["rho_values"], "rho_values")),
                          n_values=tuple(int(x) for x in _floats(opts["n_values"], "n_values")),
                          replications=opts["replications"], seed=opts["seed"],
                          bandwidth_exponents=exps)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    rows = run_study(design)
    meta = _meta(opts, "mc", replications=design.replications)
    write_table(opts["output"], table_header(exps), table_rows(rows), meta, opts["format"])


def cmd_bn(opts):
    values, dates = read_series(opts["input"])
    if opts["d"] is None or opts["sigma_eta2"] is None or opts["sigma_eps2"] is None:
        raise ConfigError("bn needs --d, --sigma-eta2 and --sigma-eps2")
    d = opts["d"]
    phi = LagPolynomial(_floats(opts["phi"], "phi"))
    Q = np.array([[opts["sigma_eta2"], opts["sigma_eta_eps"]],
                  [opts["sigma_eta_eps"], opts["sigma_eps2"]]])
    theta_eps = lagpoly_invert(phi, d, len(values))
    theta_u, sigma_u2 = aggregate_theta_u(theta_eps, Q)
    u = reduced_form_innovations(values, d, theta_u)
    bn = bn_decompose(values, d, theta_u, sigma_u2, u)
    rows = zip(_index(dates, len(values)), values, bn.trend, bn.cycle, u)
    meta = _meta(opts, "bn", sigma_u2=sigma_u2)
    write_table(opts["output"], ["t", "y_adj", "trend", "cycle", "u"], rows, meta,
                opts["format"])


COMMANDS = dict(fit=cmd_fit, filter=cmd_filter, smooth=cmd_smooth, sir=cmd_sir,
                monitor=cmd_monitor, mc=cmd_mc, bn=cmd_bn)


def exit_code(exc: BaseException) -> int:
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, (NumericalDegeneracyError, EstimationError, DomainError, ResourceError)):
        return EXIT_NUMERIC
    if isinstance(exc, (InputError, NonPositiveIncrementError, DegenerateStateError,
                        InvalidParameterError)):
        return EXIT_INPUT
    return EXIT_NUMERIC


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        opts = resolve_options(args)
        COMMANDS[args.command](opts)
    except (FracUCError, ArithmeticError) as exc:
        print(f"fracuc {args.command}: {exc}", file=sys.stderr)
        return exit_code(exc)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
