"""Command-line front end.

    pairtheta spectrum --k 2 --alpha 0,0 --Lambda 1 --dump
    pairtheta paircorr --k 2 --alpha algebraic:2 --X 1e5 --window 0,1
    pairtheta theta-check --k 2 --lambda 20

Every subcommand reads an optional --config file, overlays the flags given
on the command line, writes CSV tables, gnuplot scripts, run.cfg and
manifest.json to the output directory and returns 0. Any PairThetaError
becomes error.json and exit status 2.
"""

import argparse
import logging
import math
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from .SliceFactory import createSliceFromFilePath, writeSliceToFilePath
from .artifacts import Table, write_error, write_run
from .defaults import Defaults
from .degeneracy import degeneracy_curve
from .diophantine import (algebraic_vector, approximation_trace, critical_spec, critical_vector,
                          estimate_type)
from .equidist import (DominatingFn, HorocycleProbe, block_regime, block_sum, calibrate_domination,
                       cusp_contribution, fundamental_samples, horocycle_average, horocycle_limit,
                       l1_mean_dominating, l1_mean_monte_carlo)
from .errors import ConfigError, PairThetaError
from .paircorr import CORR_COLUMNS, CORR_UNITS, r2_smoothed_direct, r2_windowed
from .RunConfig import RunConfig, parse_value
from .spectrum import SpectrumSlice, counting_function, enumerate_spectrum
from .theta import r2_theta_integral
from .torus import TestPsi, TorusSpec, WeightH, Window, unit_ball_volume

logger = logging.getLogger(__name__)

EXIT_ERROR = 2

LOG_FORMAT = "%(asctime)s %(name)s %(levelname)s %(message)s"

# settings that cannot change any table
UNHASHED_KEYS = ("workers", "output_dir", "cache")


# ------------------------------------------------------------ config helpers

def _joined(value) -> str:
    if isinstance(value, (list, tuple)):
        return ",".join(str(v) for v in value)
    return str(value)


def _coordinate(token: str):
    token = token.strip()
    if "/" in token or token.lstrip("+-").isdigit():
        return Fraction(token)
    return float(token)


def parse_alpha(value, k: int | None, precise: bool = False) -> tuple[TorusSpec, tuple]:
    """TorusSpec and raw vector from decimals, p/q rationals, algebraic:B or critical:B,r1,r2."""
    text = _joined(value).replace(" ", "")
    try:
        return _parse_alpha(text, k, precise)
    except PairThetaError:
        raise
    except (ValueError, ZeroDivisionError) as error:
        raise ConfigError(f"cannot parse alpha {text!r}: {error}") from error


def _parse_alpha(text: str, k: int | None, precise: bool) -> tuple[TorusSpec, tuple]:
    if text.startswith("algebraic:"):
        if k is None:
            raise ConfigError("alpha = algebraic:B needs k")
        base = int(text.split(":", 1)[1])
        vector = algebraic_vector(k, base, precise=precise)
        return TorusSpec(k, tuple(float(a) for a in vector)), vector
    if text.startswith("critical:"):
        if k is None:
            raise ConfigError("alpha = critical:B,r1,r2 needs k")
        parts = text.split(":", 1)[1].split(",")
        if len(parts) != 3:
            raise ConfigError(f"critical alpha needs base,r1,r2, got {text!r}")
        rationals = (Fraction(parts[1]), Fraction(parts[2]))
        vector = critical_vector(k, rationals, int(parts[0]), precise=precise)
        return critical_spec(k, rationals, int(parts[0])), vector
    vector = tuple(_coordinate(token) for token in text.split(","))
    if k is not None and len(vector) != k:
        raise ConfigError(f"alpha has {len(vector)} coordinates but k = {k}")
    exact = tuple(a if isinstance(a, Fraction) else None for a in vector)
    return TorusSpec(len(vector), tuple(float(a) for a in vector), exact), vector


def torus_spec(config: RunConfig) -> TorusSpec:
    k = config.get("k")
    alpha = config.get("alpha")
    if alpha is None:
        if k is None:
            raise ConfigError("need k or alpha")
        alpha = "algebraic:2"
    return parse_alpha(alpha, k)[0]


def weight_functions(config: RunConfig) -> tuple[TestPsi, TestPsi, WeightH]:
    psi1 = TestPsi.gaussian(float(config.get("psi1_rate", 1.0)))
    psi2 = TestPsi.gaussian(float(config.get("psi2_rate", 1.0)))
    h = WeightH(float(config.get("h_width", 1.0)), config.get("h_shape", "triangle"))
    return psi1, psi2, h


def floats(config: RunConfig, key: str, default=None) -> list[float]:
    values = config.get_list(key, default)
    if not values:
        raise ConfigError(f"missing required key {key!r}")
    return [float(Fraction(v)) if isinstance(v, str) and "/" in v else float(v) for v in values]


def load_slice(config: RunConfig, spec: TorusSpec, cutoff: float) -> SpectrumSlice:
    """Spectrum up to cutoff, read from the cache when it covers the request."""
    cache = config.get("cache")
    if cache and Path(cache).exists():
        slice = createSliceFromFilePath(cache)
        if slice.spec.digest() == spec.digest() and slice.cutoff >= cutoff:
            logger.info("using cached spectrum %s (cutoff %g)", cache, slice.cutoff)
            return slice.restrict(cutoff)
        logger.warning("cache %s does not cover this request; enumerating", cache)
    slice = enumerate_spectrum(spec, cutoff, memory_budget=int(config["memory_budget"]),
                               key_limit=int(config["exact_key_limit"]),
                               workers=int(config["workers"]))
    if cache:
        writeSliceToFilePath(slice, cache)
    return slice


# ------------------------------------------------------------ subcommands

def run_spectrum(config: RunConfig) -> tuple[list[Table], dict]:
    spec = torus_spec(config)
    cutoff = float(config["Lambda"])
    slice = load_slice(config, spec, cutoff)
    tables = []
    if config.get("dump", False):
        table = Table("spectrum", ["index", "lambda", "X"], ["1", "lambda", "lambda^(k/2)"])
        for i, (lam, X) in enumerate(zip(slice.lambdas, slice.rescaled)):
            table.append([i, lam, X])
        tables.append(table)
    counting = Table("counting", ["X", "count", "ratio", "B_k"], ["lambda^(k/2)", "1", "1", "1"],
                     plot=("X", ["ratio", "B_k"]), logscale="x")
    for X in config.get_list("X") or [slice.rescaled_cutoff]:
        X = float(X)
        count = counting_function(slice, X)
        counting.append([X, count, count / X, unit_ball_volume(spec.k)])
    tables.append(counting)
    return tables, {"count": len(slice), "cutoff": cutoff}


def _windowed_table(config: RunConfig, name: str) -> tuple[Table, SpectrumSlice]:
    spec = torus_spec(config)
    X_values = floats(config, "X")
    a, b = floats(config, "window", [0.0, 1.0])
    w = Window(a, b)
    # padded so that rescaled_cutoff >= 2X survives rounding
    slice = load_slice(config, spec, (2.0 * max(X_values)) ** (2.0 / spec.k) * (1.0 + 1e-12))
    table = Table(name, CORR_COLUMNS + ["rel_error", "count_ratio"], CORR_UNITS + ["1", "1"],
                  plot=("X_or_lambda", ["value", "theoretical_limit"]), logscale="x")
    digest = spec.digest()
    for X in X_values:
        estimate = r2_windowed(slice, X, w, near_tie_tol=float(config["near_tie_tol"]),
                               workers=int(config["workers"]))
        limit = estimate.theoretical_limit
        rel = abs(estimate.value - limit) / limit if limit else math.nan
        row = estimate.to_row(spec.k, digest)
        table.append([row[column] for column in CORR_COLUMNS]
                     + [rel, counting_function(slice, X) / X])
    return table, slice


def run_paircorr(config: RunConfig) -> tuple[list[Table], dict]:
    table, slice = _windowed_table(config, "paircorr")
    return [table], {"points": len(slice), "last_rel_error": table.rows[-1][-2]}


def run_convergence_study(config: RunConfig) -> tuple[list[Table], dict]:
    table, slice = _windowed_table(config, "convergence")
    errors = [row[-2] for row in table.rows]
    decreasing = all(b <= a for a, b in zip(errors[:-1], errors[1:]))
    summary = {"points": len(slice), "rel_errors": errors, "decreasing": decreasing}
    if len(errors) >= 2 and all(e > 0 for e in errors):
        X = np.log(floats(config, "X"))
        summary["error_slope"] = float(np.polyfit(X, np.log(errors), 1)[0])
    return [table], summary


def run_theta_check(config: RunConfig) -> tuple[list[Table], dict]:
    spec = torus_spec(config)
    psi1, psi2, h = weight_functions(config)
    lams = floats(config, "lambda")
    tail = float(config["psi_tail_tol"])
    workers = int(config["workers"])
    r_cut = max(psi1.tail_radius(tail), psi2.tail_radius(tail))
    slice = load_slice(config, spec, r_cut * max(lams))
    table = Table("theta_check", ["lambda", "direct", "theta", "abs_diff", "quad_error"],
                  ["lambda", "1", "1", "1", "1"])
    for lam in lams:
        direct = r2_smoothed_direct(slice, psi1, psi2, h, lam, tail_tol=tail,
                                    hhat_tol=float(config["hhat_trunc_tol"]), workers=workers)
        theta = r2_theta_integral(psi1, psi2, h, lam, spec, slice=slice, tail_tol=tail,
                                  order=int(config["gl_order"]),
                                  max_width=float(config["max_panel_width"]),
                                  panel_budget=int(config["panel_budget"]), workers=workers)
        table.append([lam, direct.value, theta.value, abs(direct.value - theta.value),
                      theta.error_estimate])
    worst = max(row[3] for row in table.rows)
    if worst < 1e-6:
        print("direct vs theta-integral max |Δ| < 1e-6")
    else:
        print(f"direct vs theta-integral max |Δ| = {worst:.3g}")
    return [table], {"max_abs_diff": worst}


def run_equidist(config: RunConfig) -> tuple[list[Table], dict]:
    spec = torus_spec(config)
    k = spec.k
    psi1, psi2, h = weight_functions(config)
    workers = int(config["workers"])
    tables, summary = [], {}

    target = config.get("target", "theta-pair")
    sigma = float(config.get("sigma", 0.5 * k - 1))
    limit = horocycle_limit(psi1, psi2, h, k) if target == "theta-pair" else h.integral()
    horocycle = Table("horocycle", ["v", "value", "limit", "rel_error"], ["1", "1", "1", "1"],
                      plot=("v", ["value", "limit"]), logscale="x")
    dom_f = TestPsi.gaussian(float(config.get("dominating_rate", 1.0)))
    R_values = floats(config, "R", [2.0, 4.0, 8.0])
    for v in floats(config, "v", [1 / 50, 1 / 200, 1 / 800]):
        dominating = DominatingFn(R_values[0], dom_f) if target == "F_R" else None
        probe = HorocycleProbe(v, sigma, h, target, dominating)
        value = horocycle_average(probe, spec, psi1, psi2, tail_tol=float(config["psi_tail_tol"]),
                                  workers=workers)
        horocycle.append([v, value, limit, abs(value - limit) / abs(limit)])
    tables.append(horocycle)

    mean = Table("dominating", ["R", "mu", "mu_monte_carlo", "std_error"], ["1", "1", "1", "1"],
                 plot=("R", ["mu", "mu_monte_carlo"]), logscale="xy")
    for R in R_values:
        dom = DominatingFn(R, dom_f)
        estimate, error = l1_mean_monte_carlo(dom, k, int(config["mc_samples"]), int(config["mc_seed"]))
        mean.append([R, l1_mean_dominating(dom, k), estimate, error])
    tables.append(mean)

    if "cusp_v" in config:
        cusp = Table("cusp", ["R", "v", "eps", "contribution"], ["1", "1", "1", "1"],
                     plot=("R", ["contribution"]), logscale="x")
        eps = float(config["cusp_eps"])
        for v in floats(config, "cusp_v"):
            for R in R_values:
                value = cusp_contribution(DominatingFn(R, dom_f), spec.alpha, v, h, eps,
                                          workers=workers)
                cusp.append([R, v, eps, value])
        tables.append(cusp)

    if "T" in config:
        kappa = float(config.get("kappa", 1.0 + 1.0 / k))
        blocks = Table("blocks", ["T", "D", "regime", "value"], ["1", "1", "1", "1"])
        for T in floats(config, "T"):
            D_values = config.get_list("D") or [round(T ** (1.0 / (kappa - 1.0)))]
            for D in D_values:
                D = int(float(D))
                value = block_sum(spec.alpha, D, T, dom_f, workers=workers)
                blocks.append([T, D, block_regime(D, T, kappa, float(config["cusp_eps"])), value])
        tables.append(blocks)
    if "domination_samples" in config:
        points = fundamental_samples(k, int(config["domination_samples"]),
                                     float(config.get("domination_v_max", 40.0)),
                                     int(config["mc_seed"]))
        half_rate = TestPsi.gaussian(0.5 * psi1.min_rate)
        domination = Table("domination", ["R", "L"], ["1", "1"])
        for R in R_values:
            domination.append([R, calibrate_domination(psi1, psi2, DominatingFn(R, half_rate), points)])
        tables.append(domination)
    summary["last_rel_error"] = horocycle.rows[-1][3]
    return tables, summary


def run_dioph(config: RunConfig) -> tuple[list[Table], dict]:
    _, vector = parse_alpha(config.get("alpha", "algebraic:2"), config.get("k"), precise=True)
    report = estimate_type(vector, int(config["qmax"]),
                           scan_limit=int(config["scan_qmax_limit"]))
    summary_table = Table("dioph", ["q_max", "kappa_hat", "kappa_sup", "worst_q", "worst_error",
                                    "rational", "C_hat", "dirichlet_ok"],
                          ["1", "1", "1", "1", "1", "1", "1", "1"])
    summary_table.append([report.q_max, report.kappa_hat, report.kappa_sup, report.worst_q,
                          report.worst_error, report.rational_flag, report.C_hat,
                          report.dirichlet_ok])
    trace = Table("trace", ["q", "e"], ["1", "1"], plot=("q", ["e"]), logscale="xy",
                  rows=approximation_trace(report))
    return [summary_table, trace], {"kappa_hat": report.kappa_hat,
                                    "rational": report.rational_flag}


def run_degeneracy(config: RunConfig) -> tuple[list[Table], dict]:
    k = config.get("k")
    if "alpha" not in config and k is not None:
        config.values["alpha"] = [0] * int(k)
    spec = torus_spec(config)
    model = config.get("model", "power")
    curve = degeneracy_curve(spec, floats(config, "X"), model,
                             memory_budget=int(config["memory_budget"]),
                             key_limit=int(config["exact_key_limit"]),
                             workers=int(config["workers"]))
    fitted = math.exp(curve.fitted_log_coefficient)
    table = Table("degeneracy", ["X", "count", "normalized", "fitted"],
                  ["lambda^(k/2)", "1", "1/lambda^(k/2)", "1/lambda^(k/2)"],
                  plot=("X", ["normalized", "fitted"]), logscale="xy")
    for X, count, normalized in curve.samples:
        t = math.log(X) if model == "power" else math.log(math.log(X))
        table.append([X, count, normalized, fitted * math.exp(curve.fitted_exponent * t)])
    return [table], {"model": model, "exponent": curve.fitted_exponent,
                     "r_squared": curve.r_squared, **curve.diagnostics}


SubcommandRunners = {
    "spectrum": run_spectrum,
    "paircorr": run_paircorr,
    "theta-check": run_theta_check,
    "equidist": run_equidist,
    "dioph": run_dioph,
    "degeneracy": run_degeneracy,
    "convergence-study": run_convergence_study,
}


def run(config: RunConfig) -> int:
    """Execute one configured run; 0 on success, EXIT_ERROR with error.json otherwise."""
    output_dir = Path(config["output_dir"])
    try:
        runner = SubcommandRunners.get(config.subcommand)
        if runner is None:
            raise ConfigError(f"unknown subcommand {config.subcommand!r}")
        started = time.perf_counter()
        tables, summary = runner(config)
        elapsed = time.perf_counter() - started
        write_run(output_dir, config.to_text(), config.subcommand, tables,
                  {"total_seconds": elapsed}, summary, config.to_text(exclude=UNHASHED_KEYS))
    except PairThetaError as error:
        logger.error("%s failed: %s", config.subcommand, error)
        write_error(output_dir, error, config.subcommand)
        return EXIT_ERROR
    return 0


# ------------------------------------------------------------ argument parsing

def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key = value config file")
    parser.add_argument("--output-dir", dest="output_dir", help="directory for results")
    parser.add_argument("--workers", type=int, help=f"worker threads (default {Defaults.WORKERS})")
    parser.add_argument("--cache", help="spectrum cache file to read or write")
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="-v for INFO, -vv for DEBUG")
    parser.add_argument("--k", type=int, help="torus dimension")
    parser.add_argument("--alpha", type=parse_value,
                        help="decimals, p/q rationals, algebraic:B or critical:B,r1,r2")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pairtheta",
                                     description="Pair correlation of flat-torus spectra.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("spectrum", help="enumerate |m - alpha|^2 <= Lambda")
    _common(p)
    p.add_argument("--Lambda", type=float, help="spectrum cutoff")
    p.add_argument("--X", type=parse_value, help="rescaled bounds for N(X)/X")
    p.add_argument("--dump", action="store_const", const=True, help="write every eigenvalue")

    for name, helptext in (("paircorr", "windowed pair correlation R2[a,b](X)"),
                           ("convergence-study", "R2 and N(X)/X along an X sequence")):
        p = sub.add_parser(name, help=helptext)
        _common(p)
        p.add_argument("--X", type=parse_value, help="comma list of X")
        p.add_argument("--window", type=parse_value, help="a,b")

    p = sub.add_parser("theta-check", help="direct sum against the theta integral")
    _common(p)
    p.add_argument("--lambda", dest="lambda_", type=parse_value, help="comma list of lambda")
    for key in ("psi1-rate", "psi2-rate", "h-width"):
        p.add_argument(f"--{key}", dest=key.replace("-", "_"), type=float)

    p = sub.add_parser("equidist", help="horocycle averages, F_R means, block sums")
    _common(p)
    p.add_argument("--v", type=parse_value, help="comma list of horocycle heights")
    p.add_argument("--R", type=parse_value, help="comma list of cusp cutoffs")
    p.add_argument("--target", choices=["constant", "theta-pair", "F_R"])
    p.add_argument("--cusp-v", dest="cusp_v", type=parse_value)
    p.add_argument("--T", type=parse_value, help="comma list of block-sum scales")
    p.add_argument("--D", type=parse_value, help="comma list of block lengths")

    p = sub.add_parser("dioph", help="diophantine type scan")
    _common(p)
    p.add_argument("--qmax", type=int, help="scan bound")

    p = sub.add_parser("degeneracy", help="equal-pair growth curves")
    _common(p)
    p.add_argument("--X", type=parse_value, help="comma list of X")
    p.add_argument("--model", choices=["power", "log"])
    return parser


def configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format=LOG_FORMAT)


def config_from_args(args: argparse.Namespace) -> RunConfig:
    config = RunConfig.from_file(args.config) if args.config else RunConfig()
    config.subcommand = args.subcommand
    flags = {key: value for key, value in vars(args).items()
             if key not in ("config", "verbose", "subcommand")}
    if "lambda_" in flags:
        flags["lambda"] = flags.pop("lambda_")
    return config.update(flags)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    try:
        config = config_from_args(args)
    except ConfigError as error:
        logger.error("%s", error)
        write_error(Path(RunConfig()["output_dir"]), error, args.subcommand)
        return EXIT_ERROR
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
