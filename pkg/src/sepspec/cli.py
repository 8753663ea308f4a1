"""Command-line front end: ``sepspec <subcommand> EXPR [options]``.

Exit status: 0 success, 1 usage or validation error, 2 computation failure,
3 structural violation (broken interleaving, root anomalies, count mismatch).
Diagnostics go to standard error; data go to files in ``--out``.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import analysis, classical, oracle, quantization
from .io import write_csv, write_svg
from .kernels import BACKEND
from .potential import ParseError, parse_potential, recenter, validate_double_well

log = logging.getLogger("sepspec")

EXIT_OK, EXIT_USAGE, EXIT_COMPUTE, EXIT_STRUCTURE = 0, 1, 2, 3

DEFAULTS = {
    "out": ".",
    "recenter": False,
    "h": None,
    "alpha": 0.5,
    "mu_plus": math.pi,
    "mu_minus": None,
    "quad_tol": 1e-13,
    "root_tol": 1e-12,
    "tol": None,
    "window": None,
    "h_list": None,
    "h_cal": 1e-2,
    "quantity": "both",
    "calibrate": True,
}

COMMAND_DEFAULTS = {
    "spectrum": {"h": 1e-2},
    "oracle": {"h": 1e-2, "tol": 1e-9},
    "compare": {"h": 1e-3, "tol": 1e-8},
    "period": {"tol": 1e-10, "h_list": [1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9]},
    "scaling": {"h_list": [1e-2, 3e-3, 1e-3, 3e-4, 1e-4]},
    "figures": {"h": 0.02, "tol": 1e-9},
    "validate": {},
}


# informational keys written to config_echo.json and ignored on input
ECHO_ONLY = ("command", "version", "backend", "coefficients", "calibrated_mu")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sepspec", description="Semiclassical spectrum near a double-well barrier top.")
    p.add_argument("--version", action="version", version=f"sepspec {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def common(sp):
        sp.add_argument("expression", nargs="?", help="polynomial potential, e.g. 'x^4 - x^2'")
        sp.add_argument("--config", help="JSON configuration file (flags take precedence)")
        sp.add_argument("--out", help="output directory (default: current directory)")
        sp.add_argument("--recenter", action="store_true", default=None,
                        help="shift the unique maximum to x = 0, V = 0 before validation")
        sp.add_argument("-v", "--verbose", action="count", default=0)

    def engine(sp):
        sp.add_argument("--h", type=float)
        sp.add_argument("--alpha", type=float)
        sp.add_argument("--mu-plus", type=float, dest="mu_plus")
        sp.add_argument("--mu-minus", type=float, dest="mu_minus")
        sp.add_argument("--quad-tol", type=float, dest="quad_tol")
        sp.add_argument("--root-tol", type=float, dest="root_tol")

    sp = sub.add_parser("validate", help="check the double-well hypotheses")
    common(sp)
    sp = sub.add_parser("spectrum", help="semiclassical window roots to spectrum.csv")
    common(sp)
    engine(sp)
    sp = sub.add_parser("oracle", help="finite-difference eigenvalues to oracle.csv")
    common(sp)
    sp.add_argument("--h", type=float)
    sp.add_argument("--window", type=float, nargs=2, metavar=("LO", "HI"))
    sp.add_argument("--tol", type=float)
    sp = sub.add_parser("compare", help="calibrate the phases and compare with the oracle")
    common(sp)
    engine(sp)
    sp.add_argument("--h-cal", type=float, dest="h_cal", help="calibration h (default 1e-2)")
    sp.add_argument("--tol", type=float, help="oracle tolerance")
    sp.add_argument("--no-calibrate", action="store_false", dest="calibrate", default=None,
                    help="use --mu-plus/--mu-minus as given")
    sp = sub.add_parser("period", help="return period of the flow from (sqrt h, 0)")
    common(sp)
    sp.add_argument("--h-list", type=float, nargs="+", dest="h_list")
    sp.add_argument("--tol", type=float)
    sp = sub.add_parser("scaling", help="gap and count scaling fits")
    common(sp)
    engine(sp)
    sp.add_argument("--h-list", type=float, nargs="+", dest="h_list")
    sp.add_argument("--quantity", choices=["gap", "count", "both"])
    sp = sub.add_parser("figures", help="consecutive-difference data and SVG plots")
    common(sp)
    sp.add_argument("--h", type=float)
    sp.add_argument("--window", type=float, nargs=2, metavar=("LO", "HI"))
    sp.add_argument("--tol", type=float)
    return p


def resolve_config(args: argparse.Namespace) -> dict:
    """Merge built-in defaults, the JSON file and the flags (flags win)."""
    cfg = dict(DEFAULTS)
    cfg.update(COMMAND_DEFAULTS.get(args.command, {}))
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise UsageError("config must be a JSON object")
        data = {k.replace("-", "_"): v for k, v in data.items()}
        if "potential" in data:
            data["expression"] = data.pop("potential")
        for key in ECHO_ONLY:
            data.pop(key, None)
        unknown = set(data) - set(cfg) - {"expression"}
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        cfg.update(data)
    for key, val in vars(args).items():
        if key in ("config", "verbose") or val is None:
            continue
        cfg[key] = val
    cfg["command"] = args.command
    if not cfg.get("expression"):
        raise UsageError("a potential expression is required")
    if cfg["mu_minus"] is None:
        cfg["mu_minus"] = cfg["mu_plus"]
    return cfg


def _params(cfg, h=None) -> quantization.SemiclassicalParams:
    return quantization.SemiclassicalParams(
        float(h if h is not None else cfg["h"]), float(cfg["alpha"]), float(cfg["mu_plus"]),
        float(cfg["mu_minus"]), float(cfg["quad_tol"]), float(cfg["root_tol"]))


def _echo(cfg: dict, out: Path):
    echo = {k: v for k, v in sorted(cfg.items())}
    echo["version"] = __version__
    (out / "config_echo.json").write_text(json.dumps(echo, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _load_potential(cfg):
    V = parse_potential(cfg["expression"])
    if cfg.get("recenter"):
        V = recenter(V)
    return V, validate_double_well(V)


# --------------------------------------------------------- commands

def cmd_validate(cfg, V, report, out):
    for line in report.lines():
        print(line)
    return EXIT_OK if report.passed else EXIT_USAGE


def cmd_spectrum(cfg, V, report, out):
    win = quantization.enumerate_window(V, _params(cfg))
    write_csv(out / "spectrum.csv", win.rows())
    inter = quantization.check_interleaving(win)
    print(f"family A: {len(win.family_a)} roots, family B: {len(win.family_b)} roots", file=sys.stderr)
    for v in inter.violations + [f"collision {c}" for c in inter.collisions]:
        print(f"structure: {v}", file=sys.stderr)
    for a in win.anomalies:
        print(f"anomaly: branch {a.branch} index {a.index} has {a.crossings} crossings", file=sys.stderr)
    if inter.violations or inter.collisions or win.anomalies:
        return EXIT_STRUCTURE
    return EXIT_OK


def cmd_oracle(cfg, V, report, out):
    h = float(cfg["h"])
    window = cfg["window"] or [-(h ** cfg["alpha"]), h ** cfg["alpha"]]
    spec = oracle.solve(V, h, tuple(window), tol=float(cfg["tol"]))
    write_csv(out / "oracle.csv", spec.rows())
    print(f"{spec.eigenvalues.size} eigenvalues, converged={spec.converged}, "
          f"grid N={spec.grid.points} L={spec.grid.half_width:.6g}", file=sys.stderr)
    for i, j in spec.clusters:
        print(f"note: eigenvalues {i} and {j} coincide in floating point (quasi-doublet)", file=sys.stderr)
    return EXIT_OK if spec.converged else EXIT_COMPUTE


def cmd_compare(cfg, V, report, out):
    params = _params(cfg, cfg["h_cal"])
    if cfg["calibrate"]:
        cal = analysis.calibrate(V, float(cfg["h_cal"]), params, oracle_tol=float(cfg["tol"]))
        print(f"calibrated mu_plus={cal.mu_plus:.10g} mu_minus={cal.mu_minus:.10g} "
              f"rms={cal.matching_rms:.3e} at h={cal.h_calibration:g}", file=sys.stderr)
        params = params.with_mu(cal.mu_plus, cal.mu_minus)
        cfg["calibrated_mu"] = [cal.mu_plus, cal.mu_minus]
    rep = analysis.compare(V, float(cfg["h"]), params, tol=float(cfg["tol"]))
    write_csv(out / "comparison.csv", rep.rows())
    med = rep.gap_stats["median_gap"]
    print(f"counts semiclassical={rep.counts[0]} oracle={rep.counts[1]} "
          f"rms={rep.rms_diff:.3e} max={rep.max_abs_diff:.3e} median_gap={med:.3e} "
          f"rms/gap={rep.rms_diff / med:.3e}", file=sys.stderr)
    return EXIT_STRUCTURE if rep.count_mismatch > 1 else EXIT_OK


def cmd_period(cfg, V, report, out):
    hs = sorted(map(float, cfg["h_list"]), reverse=True)
    slope, icpt, r2, taus = classical.period_slope_fit(V, hs, float(cfg["tol"]))
    write_csv(out / "period.csv", [("h", "abs_log_h", "tau")] +
              [(h, abs(math.log(h)), float(t)) for h, t in zip(hs, taus)])
    print(f"slope={slope:.6g} intercept={icpt:.6g} r2={r2:.8f} "
          f"(1/sqrt(-V''(0)) = {1.0 / report.barrier_curvature:.6g})", file=sys.stderr)
    return EXIT_OK


def cmd_scaling(cfg, V, report, out):
    params = _params(cfg, cfg["h_list"][0])
    hs = cfg["h_list"]
    status = EXIT_OK
    if cfg["quantity"] in ("gap", "both"):
        g = analysis.gap_scaling(V, params, hs)
        write_csv(out / "scaling_gap.csv", g.rows())
        print(f"gap: slope={g.slope:.6g} r2={g.r2:.6f}", file=sys.stderr)
    if cfg["quantity"] in ("count", "both"):
        c = analysis.count_scaling(V, params, hs)
        write_csv(out / "scaling_count.csv", c.rows())
        print(f"count: slope={c.slope:.6g} r2={c.r2:.6f}", file=sys.stderr)
        if not all(c.extras["within_brackets"]):
            status = EXIT_STRUCTURE
    return status


def cmd_figures(cfg, V, report, out):
    h = float(cfg["h"])
    window = cfg["window"] or [report.v_min, -report.v_min]
    spec = oracle.solve(V, h, tuple(window), tol=float(cfg["tol"]))
    ev = spec.eigenvalues
    prof = analysis.doublet_profile(spec)
    write_csv(out / "fig7.csv", [("index", "eigenvalue")] + [(i, float(e)) for i, e in enumerate(ev)])
    write_csv(out / "fig8.csv", [("index", "difference")] + prof)
    write_svg(out / "fig7.svg", {"eigenvalues": (np.arange(ev.size), ev)},
              title=f"eigenvalues, h={h:g}", xlabel="index", ylabel="E")
    write_svg(out / "fig8.svg", {"consecutive difference": ([p[0] for p in prof], [p[1] for p in prof])},
              title=f"consecutive differences, h={h:g}", xlabel="index", ylabel="E(n+1) - E(n)")
    return EXIT_OK if spec.converged else EXIT_COMPUTE


COMMANDS = {
    "validate": cmd_validate,
    "spectrum": cmd_spectrum,
    "oracle": cmd_oracle,
    "compare": cmd_compare,
    "period": cmd_period,
    "scaling": cmd_scaling,
    "figures": cmd_figures,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if not args.command:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = resolve_config(args)
        out = Path(cfg["out"])
        out.mkdir(parents=True, exist_ok=True)
        V, report = _load_potential(cfg)
    except (UsageError, ParseError, ValueError, OSError) as exc:
        print(f"sepspec: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    cfg["coefficients"] = list(V.coefficients)
    cfg["backend"] = BACKEND
    _echo(cfg, out)
    if args.command != "validate" and not report.passed:
        for line in report.lines():
            print(line, file=sys.stderr)
        print("sepspec: error: potential fails the double-well hypotheses", file=sys.stderr)
        return EXIT_USAGE
    try:
        status = COMMANDS[args.command](cfg, V, report, out)
    except (ArithmeticError, RuntimeError, ValueError) as exc:
        print(f"sepspec: computation failed: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    if "calibrated_mu" in cfg:
        _echo(cfg, out)
    return status


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
