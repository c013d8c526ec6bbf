"""Command-line interface.

Subcommands map onto the experiment runners:

    roots        tabulate cubic roots + Cardano diagnostics over a k grid
    coeffs       tabulate amplitude coefficients and moment residuals
    kernels      tabulate the imaging kernel curves
    reconstruct  run the Gaussian reconstruction experiment
    sweep-kappa  image error for halving compressibilities
    resolution   resolution formula chain and the quoted claim
    report       full battery, one combined report

Configuration comes from a key=value file (see configs/water.cfg); any key
can be overridden on the command line with --set key=value, and --k-max
accepts the suffix "kc" for multiples of the derived critical wavenumber.
Exit status: 0 all declared checks pass, 1 a check failed, 2 configuration
error, 64 usage error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import experiments, spectral
from .experiments import ConfigError, ExperimentConfig, Report, write_csv

__all__ = ["main"]

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_USAGE = 64

_SUBCOMMANDS = (
    "roots", "coeffs", "kernels", "reconstruct", "sweep-kappa", "resolution",
    "report",
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="patrev",
        description="Spectral time-reversal toolkit for dissipative media",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in _SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, default=None,
                       help="key=value config file (default: built-in water)")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE", help="override a config key")
        p.add_argument("--out", type=Path, default=Path("out"),
                       help="output directory (default: ./out)")
        if name in ("roots", "coeffs", "kernels"):
            p.add_argument("--k-max", default=None,
                           help="grid upper end in critical-wavenumber units, "
                                "e.g. '10kc'")
            p.add_argument("--k-num", type=int, default=None)
    return parser


def _assemble_config(args) -> ExperimentConfig:
    if args.config is not None:
        try:
            mapping = experiments.read_key_value_file(args.config)
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    else:
        mapping = _water_mapping()
    for item in args.overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        mapping[key.strip()] = value.strip()
    if getattr(args, "k_max", None):
        kmax = args.k_max if args.k_max.endswith("kc") else args.k_max
        mapping["k_max"] = kmax
    if getattr(args, "k_num", None):
        mapping["k_num"] = str(args.k_num)
    return experiments.config_from_mapping(mapping, args.out)


def _water_mapping() -> dict[str, str]:
    raw = experiments.water_params()
    return {
        "tau1_s": repr(raw.tau1),
        "kappa1_m2_per_N": repr(raw.kappa1),
        "rho_kg_per_m3": repr(raw.rho),
        "speed_m_per_s": repr(raw.speed),
        "speed_kind": raw.speed_kind,
    }


def _cmd_roots(cfg: ExperimentConfig) -> Report:
    medium = cfg.medium()
    ks = cfg.k_grid(medium)
    grid = spectral.roots_grid(medium, ks)
    residual = spectral.scaled_residuals(medium, grid)
    rep = Report("roots")
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rep.csv_paths.append(write_csv(
        out / "roots.csv",
        [f"dispersion cubic roots, kc = {medium.k_c:.17g}"],
        ["k", "re_lambda0", "im_lambda0", "re_mu", "im_mu", "re_theta", "im_theta",
         "delta0", "delta1", "re_C", "im_C", "real_c_regime",
         "max_cubic_residual_scaled"],
        [ks, grid.lambda0.real, grid.lambda0.imag, grid.mu.real, grid.mu.imag,
         grid.theta.real, grid.theta.imag, grid.delta0, grid.delta1,
         grid.big_c.real, grid.big_c.imag, grid.real_c_regime.astype(int),
         residual],
    ))
    rep.check_below("max_cubic_residual_scaled", float(np.max(residual)), 1e-9,
                    provenance="definition")
    return rep


def _cmd_coeffs(cfg: ExperimentConfig) -> Report:
    medium = cfg.medium()
    ks = cfg.k_grid(medium)
    ks = ks[~spectral.degenerate_mask(*_roots_of(medium, ks))]
    grid = spectral.roots_grid(medium, ks)
    a0, a1, a2, _ = spectral.amplitudes_grid(medium, grid)
    targets = spectral.moment_targets(medium)
    worst = np.zeros_like(ks)
    for m in range(3):
        lhs = (a0 * grid.lambda0**m + a1 * grid.lambda1**m + a2 * grid.lambda2**m)
        scale = np.maximum.reduce([
            np.abs(a0 * grid.lambda0**m),
            np.abs(a1 * grid.lambda1**m),
            np.abs(a2 * grid.lambda2**m),
        ]) + abs(targets[m])
        worst = np.maximum(worst, np.abs(lhs - targets[m]) / scale)
    rep = Report("coeffs")
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rep.csv_paths.append(write_csv(
        out / "coeffs.csv",
        [f"amplitude coefficients, kc = {medium.k_c:.17g}"],
        ["k", "re_a0", "im_a0", "re_a1", "im_a1", "re_a2", "im_a2",
         "max_moment_residual_scaled"],
        [ks, a0.real, a0.imag, a1.real, a1.imag, a2.real, a2.imag, worst],
    ))
    rep.check_below("max_moment_residual_scaled", float(np.max(worst)), 1e-9,
                    provenance="definition")
    return rep


def _roots_of(medium, ks):
    g = spectral.roots_grid(medium, ks)
    return g.lambda0, g.lambda1, g.lambda2


def _cmd_kernels(cfg: ExperimentConfig) -> Report:
    return experiments.run_kernel_tables(cfg)


_DISPATCH = {
    "roots": _cmd_roots,
    "coeffs": _cmd_coeffs,
    "kernels": _cmd_kernels,
    "reconstruct": experiments.run_reconstruction,
    "sweep-kappa": experiments.run_kappa_sweep,
    "resolution": experiments.run_resolution_study,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage problems (unknown subcommand, bad flags);
        # map those to 64 and keep 0 for --help
        return EXIT_USAGE if exc.code not in (0, None) else 0

    try:
        cfg = _assemble_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if args.subcommand == "report":
        reports = experiments.run_all(cfg)
        combined = Report("combined")
        for rep in reports:
            rep.write(out / f"report_{rep.title}.txt")
            for e in rep.entries:
                combined.entries.append(
                    experiments.ReportEntry(
                        name=f"{rep.title}.{e.name}", value=e.value,
                        provenance=e.provenance, target=e.target,
                        tolerance=e.tolerance, deviation=e.deviation,
                        passed=e.passed,
                    )
                )
            combined.csv_paths.extend(rep.csv_paths)
        combined.write(out / "report.txt")
        _print_summary(combined)
        return EXIT_OK if combined.passed else EXIT_CHECK_FAILED

    rep = _DISPATCH[args.subcommand](cfg)
    rep.write(out / f"report_{rep.title}.txt")
    _print_summary(rep)
    return EXIT_OK if rep.passed else EXIT_CHECK_FAILED


def _print_summary(rep: Report):
    for e in rep.entries:
        if e.passed is None:
            print(f"{rep.title}.{e.name} = {e.value:.6g}")
        else:
            status = "pass" if e.passed else "FAIL"
            print(f"{rep.title}.{e.name} = {e.value:.6g} "
                  f"(target {e.target:.6g}, tol {e.tolerance:.3g}): {status}")
    for p in rep.csv_paths:
        print(f"wrote {p}")


if __name__ == "__main__":
    sys.exit(main())
