"""Command-line front end.

Subcommands map one-to-one to the experiment families::

    drivenaa static-imbalance   undriven imbalance vs disorder strength
    drivenaa freq-scan          imbalance + mode IPR vs (disorder, frequency)
    drivenaa amp-scan           imbalance + mode IPR vs (disorder, amplitude)
    drivenaa spectrum           static spectrum vs disorder strength
    drivenaa floquet-cell       quasienergies and mode IPRs of one cell
    drivenaa ipr-scaling        mean mode IPR vs lattice size

Common flags: --config FILE, --out DIR, --threads N, --phases N,
--seed U64 (random-phase mode only) and repeatable --set section.field=value
overrides.  Precedence is flag > file > default.

Exit codes: 0 success, 1 configuration error, 2 scan finished with failed
cells, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from ._version import __version__
from .config import (EXPERIMENTS, apply_override, default_config,
                     load_config_file, make_axis, merge_config, resolve_axis,
                     resolved_copy, resolve_integrator_tolerances,
                     resolve_model, resolve_phases, resolve_settings)
from .errors import ConfigError, IntegrationError, UnitarityError
from .evolve import one_period_propagator
from .floquet import averaged_ipr, floquet_decompose
from .model import ModelParams
from .observables import aa_spectrum
from .output import (header_comments, write_metadata, write_scan_outputs,
                     write_table)
from .sweeps import (AMPLITUDE_AXIS, DISORDER_AXIS, OMEGA_AXIS, RATIO_AXIS,
                     ScanGrid, amplitude_disorder_scan,
                     frequency_disorder_scan, ipr_size_scaling,
                     static_disorder_scan)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_PARTIAL = 2
EXIT_NUMERICAL = 3

UNITS = ("columns carry energies in units of J, times in 1/J, angular "
         "frequencies in J")


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports usage problems as ConfigError."""

    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="drivenaa",
                     description="Phase-diagram experiments for the "
                                 "periodically driven quasiperiodic chain")
    parser.add_argument("--version", action="version",
                        version=f"drivenaa {__version__}")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", help="YAML configuration file")
        p.add_argument("--out", help="output directory")
        p.add_argument("--threads", type=int,
                       help="worker processes for the scan pool")
        p.add_argument("--phases", type=int,
                       help="number of disorder realizations")
        p.add_argument("--seed", type=int,
                       help="seed for random-phase mode (requires "
                            "phases.mode: random)")
        p.add_argument("--set", action="append", default=[],
                       metavar="KEY=VALUE", dest="overrides",
                       help="override any config field, e.g. "
                            "--set model.n_sites=100")
    return parser


def resolve_config(args: argparse.Namespace) -> dict:
    config = default_config(args.experiment)
    if args.config:
        config = merge_config(config, load_config_file(args.config))
        config["experiment"] = args.experiment
    if args.out is not None:
        config["output"]["directory"] = args.out
    if args.threads is not None:
        config["workers"] = args.threads
    if args.phases is not None:
        config["phases"]["count"] = args.phases
    if args.seed is not None:
        config["phases"]["seed"] = args.seed
    for item in args.overrides:
        if "=" not in item:
            raise ConfigError(f"--set {item!r}: expected KEY=VALUE")
        key, _, value = item.partition("=")
        apply_override(config, key.strip(), value.strip())
    return config


def run_experiment(config: dict) -> int:
    """Run a fully merged configuration.  Returns the process exit code."""
    experiment = config.get("experiment")
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"experiment: unknown experiment {experiment!r}")
    runner = _RUNNERS[experiment]
    resolved = resolved_copy(config)
    outdir = config.get("output", {}).get("directory")
    if not isinstance(outdir, str) or not outdir:
        raise ConfigError("output.directory: expected a non-empty string")
    os.makedirs(outdir, exist_ok=True)
    return runner(config, resolved, outdir)


def _heatmaps_enabled(config: dict) -> bool:
    value = config.get("output", {}).get("heatmaps", True)
    if not isinstance(value, bool):
        raise ConfigError("output.heatmaps: expected true or false")
    return value


def _finish_scan(result, name, resolved, outdir, config) -> int:
    written = write_scan_outputs(outdir, name, result, resolved, UNITS,
                                 _heatmaps_enabled(config))
    print(f"{name}: {len(result.cells)} cells, {result.n_failed} failed -> "
          f"{written['table']}")
    if result.n_failed:
        for cell in result.cells:
            if cell.failed:
                print(f"  failed cell {cell.index}: {cell.error}",
                      file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def _run_static_imbalance(config, resolved, outdir) -> int:
    grid = ScanGrid(axis1=make_axis(config, "disorder", DISORDER_AXIS),
                    fixed=resolve_model(config),
                    phases=resolve_phases(config))
    result = static_disorder_scan(grid, resolve_settings(config))
    return _finish_scan(result, "static_imbalance", resolved, outdir, config)


def _run_freq_scan(config, resolved, outdir) -> int:
    grid_cfg = config.get("grid", {})
    has_freq = grid_cfg.get("frequency") is not None
    has_ratio = grid_cfg.get("ratio") is not None
    if has_freq and has_ratio:
        raise ConfigError("grid: give either 'frequency' or 'ratio', not both")
    if not has_freq and not has_ratio:
        raise ConfigError("grid: freq-scan needs a 'frequency' or 'ratio' "
                          "axis")
    axis2 = (make_axis(config, "frequency", OMEGA_AXIS) if has_freq
             else make_axis(config, "ratio", RATIO_AXIS))
    grid = ScanGrid(axis1=make_axis(config, "disorder", DISORDER_AXIS),
                    axis2=axis2,
                    fixed=resolve_model(config),
                    phases=resolve_phases(config))
    try:
        result = frequency_disorder_scan(grid, resolve_settings(config))
    except ValueError as exc:
        raise ConfigError(f"grid: {exc}")
    return _finish_scan(result, "freq_scan", resolved, outdir, config)


def _run_amp_scan(config, resolved, outdir) -> int:
    grid = ScanGrid(axis1=make_axis(config, "disorder", DISORDER_AXIS),
                    axis2=make_axis(config, "amplitude", AMPLITUDE_AXIS),
                    fixed=resolve_model(config),
                    phases=resolve_phases(config))
    model = resolve_model(config)
    nu = model.drive_angular_frequency / (2.0 * np.pi)
    if nu <= 0.0:
        raise ConfigError("model.drive_frequency: must be > 0 for amp-scan")
    try:
        result = amplitude_disorder_scan(grid, resolve_settings(config),
                                         drive_frequency=nu)
    except ValueError as exc:
        raise ConfigError(f"grid: {exc}")
    return _finish_scan(result, "amp_scan", resolved, outdir, config)


def _run_spectrum(config, resolved, outdir) -> int:
    model = resolve_model(config)
    disorder = resolve_axis(config["grid"]["disorder"], "grid.disorder")
    rows = []
    for lam in disorder:
        params = ModelParams(
            n_sites=model.n_sites, hopping=model.hopping,
            disorder_strength=float(lam),
            incommensuration=model.incommensuration, phase=model.phase)
        for level, energy in enumerate(aa_spectrum(params)):
            rows.append([float(lam), level, float(energy)])
    path = os.path.join(outdir, "spectrum.csv")
    write_table(path, header_comments(resolved, UNITS),
                ["disorder_strength", "level_index", "energy"], rows)
    write_metadata(os.path.join(outdir, "spectrum_metadata.json"),
                   {"config": resolved})
    print(f"spectrum: {len(disorder)} disorder values x {model.n_sites} "
          f"levels -> {path}")
    return EXIT_OK


def _run_floquet_cell(config, resolved, outdir) -> int:
    model = resolve_model(config)
    if model.drive_angular_frequency <= 0.0:
        raise ConfigError("model.drive_frequency: must be > 0 for "
                          "floquet-cell")
    phases = resolve_phases(config)
    settings = resolve_settings(config)
    rtol, atol = resolve_integrator_tolerances(config)
    rows = []
    iprs = []
    for phi in phases:
        params = model.with_phase(float(phi))
        propagator = one_period_propagator(
            params, "stepwise-exponential", steps=settings.propagator_steps,
            rtol=rtol, atol=atol)
        decomposition = floquet_decompose(propagator)
        iprs.append(averaged_ipr(decomposition))
        mode_iprs = np.sum(np.abs(decomposition.modes) ** 4, axis=0)
        for mode in range(decomposition.n_modes):
            rows.append([float(phi), mode,
                         float(decomposition.quasienergies[mode]),
                         float(mode_iprs[mode])])
    path = os.path.join(outdir, "floquet_cell.csv")
    write_table(path, header_comments(resolved, UNITS),
                ["phase", "mode_index", "quasienergy", "mode_ipr"], rows)
    write_metadata(os.path.join(outdir, "floquet_cell_metadata.json"),
                   {"config": resolved,
                    "mean_ipr": float(np.mean(iprs)),
                    "std_ipr": float(np.std(iprs))})
    print(f"floquet-cell: {len(phases)} realizations, mean IPR "
          f"{float(np.mean(iprs)):.6f} -> {path}")
    return EXIT_OK


def _run_ipr_scaling(config, resolved, outdir) -> int:
    model = resolve_model(config)
    grid_cfg = config.get("grid", {})
    sizes = grid_cfg.get("sizes")
    if not isinstance(sizes, list) or not sizes:
        raise ConfigError("grid.sizes: expected a non-empty list of even "
                          "integers")
    regimes = []
    for key in ("delocalized_disorder", "localized_disorder"):
        if key not in grid_cfg:
            raise ConfigError(f"grid.{key}: missing required field")
        regimes.append((key.split("_")[0], float(grid_cfg[key])))
    phases = resolve_phases(config)
    settings = resolve_settings(config)
    rows = []
    for regime, lam in regimes:
        template = ModelParams(
            n_sites=int(sizes[0]), hopping=model.hopping,
            disorder_strength=lam,
            incommensuration=model.incommensuration)
        try:
            table = ipr_size_scaling(sizes, template, phases, settings)
        except ValueError as exc:
            raise ConfigError(f"grid.sizes: {exc}")
        for entry in table:
            rows.append([regime, entry["n_sites"], entry["mean_ipr"],
                         entry["std_ipr"], entry["n_phases"]])
    path = os.path.join(outdir, "ipr_scaling.csv")
    write_table(path, header_comments(resolved, UNITS),
                ["regime", "n_sites", "mean_ipr", "std_ipr", "n_phases"],
                rows)
    write_metadata(os.path.join(outdir, "ipr_scaling_metadata.json"),
                   {"config": resolved})
    print(f"ipr-scaling: {len(rows)} rows -> {path}")
    return EXIT_OK


_RUNNERS = {
    "static-imbalance": _run_static_imbalance,
    "freq-scan": _run_freq_scan,
    "amp-scan": _run_amp_scan,
    "spectrum": _run_spectrum,
    "floquet-cell": _run_floquet_cell,
    "ipr-scaling": _run_ipr_scaling,
}


def main(argv=None) -> int:
    started = time.perf_counter()
    try:
        args = build_parser().parse_args(argv)
        config = resolve_config(args)
        code = run_experiment(config)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IntegrationError, UnitarityError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(f"done in {time.perf_counter() - started:.1f}s")
    return code


if __name__ == "__main__":
    sys.exit(main())
