"""Command-line front end: run, dimer-check, sweep, validity, noise-check, plot, presets.

Energies are in units of the nearest-neighbour transfer rate J (20 cm^-1),
times in units of 1/J.
"""
from __future__ import annotations

import argparse
import asyncio
import logging
import os
import sys
from collections.abc import Sequence
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__, sync_library_logger
from .bath import BathSpec, post_markov_validity, validity_scale
from .config import apply_overrides, preset_names, resolve_config
from .const import (
    CONF_BATH,
    CONF_COUPLING,
    CONF_DECAY,
    CONF_DT,
    CONF_OUTER_PARAMETER,
    CONF_OUTER_VALUES,
    CONF_PARAMETER,
    CONF_READOUT,
    CONF_RUN,
    CONF_SEED,
    CONF_SWEEP,
    CONF_T_MAX,
    CONF_THREADS,
    CONF_TRAJECTORIES,
    CONF_VALUES,
    DEFAULT_OUT_DIR,
    DEFAULT_READOUT,
    DEFAULT_VALIDITY_ORDER,
    ENV_OUT_DIR,
    EXIT_NUMERICAL,
    EXIT_OK,
    EXIT_USAGE,
    EXIT_VALIDATION,
    J_UNIT_CM,
    NOISE_METHODS,
    NOISE_MODE_SUM,
    SOLVER_MASTER,
    SWEEP_PARAMETERS,
)
from .diagnostics import build_manifest, write_manifest, write_validity
from .engine import (
    EnsembleCoordinator,
    Scenario,
    compare_with_master,
    convergence_scan,
    run_ensemble,
    run_master,
    scenario_for,
    sweep,
)
from .exceptions import NumericalError, ScenarioError, SchemaError
from .noise import make_generator, noise_check
from .observables import write_amplitudes, write_csv, write_table
from .plotting import LAYOUT_AUTO, LAYOUT_TRANSPORT, LAYOUTS, render_plot

_LOGGER = logging.getLogger(__name__)


class UsageError(Exception):
    """Bad command line."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        raise UsageError(message)


# ── Parser ───────────────────────────────────────────────────────────────────


def _scenario_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    group = common.add_argument_group("scenario")
    group.add_argument("--config", type=Path, help="TOML scenario, or a run manifest (.json) to re-execute")
    group.add_argument("--preset", help="bundled scenario name (see `lh1rc presets`)")
    group.add_argument("--nm", type=int, help="number of trajectories (default 500)")
    group.add_argument("--seed", type=int, help="master seed (default 0)")
    group.add_argument("--threads", type=int, help="worker processes (default 1)")
    group.add_argument("--dt", type=float, help="integrator step in 1/J (default 1e-3)")
    group.add_argument("--tmax", type=float, help="time horizon in 1/J (default 5)")
    group.add_argument("--g", type=float, dest="coupling", help="bath coupling g on every site")
    group.add_argument("--gamma", type=float, help="bath decay rate gamma on every site")
    group.add_argument("--single-thread", action="store_true", help="run every chunk inline (debugging)")
    return common


def _output_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out-dir", type=Path, help=f"output directory (default ${ENV_OUT_DIR} or ./{DEFAULT_OUT_DIR})")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="lh1rc",
        description=(
            "Exciton transport in an LH1-RC ring. Energies in units of J = "
            f"{J_UNIT_CM:g} cm^-1, times in 1/J."
        ),
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    scenario, output = _scenario_options(), _output_options()

    run = sub.add_parser("run", parents=[scenario, output], help="run an ensemble (or the master equation)")
    run.add_argument("--full", action="store_true", help="add site and momentum populations to the CSV")
    run.add_argument("--dump-amplitudes", action="store_true", help="write raw amplitudes of trajectory 0")
    run.add_argument("--plot", action="store_true", help="render the transport layout next to the CSV")
    run.add_argument("--nm-list", help="comma-separated trajectory counts for a convergence scan")

    dimer = sub.add_parser("dimer-check", parents=[scenario, output], help="compare SSE and master on the dimer")
    dimer.add_argument("--samples", type=int, default=200, help="sampled output times (default 200)")

    sw = sub.add_parser("sweep", parents=[scenario, output], help="P_T at a readout time against one parameter")
    sw.add_argument("--parameter", choices=SWEEP_PARAMETERS)
    sw.add_argument("--values", help="comma-separated parameter values")
    sw.add_argument("--readout", type=float, help=f"readout time (default {DEFAULT_READOUT:g})")

    val = sub.add_parser("validity", parents=[scenario, output], help="post-Markov validity table and verdict")
    val.add_argument("--n-max", type=int, default=DEFAULT_VALIDITY_ORDER, help="highest order (default 10)")
    val.add_argument("--scale", type=float, help="override the system scale S")

    nc = sub.add_parser("noise-check", parents=[scenario, output], help="empirical noise statistics")
    nc.add_argument("--method", choices=NOISE_METHODS, default=NOISE_MODE_SUM)
    nc.add_argument("--paths", type=int, default=10_000, help="number of sampled paths (default 10000)")
    nc.add_argument("--pairs", action="store_true", help="also write the two-time correlation matrix")

    plot = sub.add_parser("plot", parents=[output], help="render CSVs to an SVG figure")
    plot.add_argument("csv", nargs="+", type=Path)
    plot.add_argument("--layout", choices=LAYOUTS, default=LAYOUT_AUTO)
    plot.add_argument("--output", type=Path, help="SVG path (default <out-dir>/plot.svg)")

    sub.add_parser("presets", parents=[output], help="list bundled scenarios")
    return parser


# ── Helpers ──────────────────────────────────────────────────────────────────


def _out_dir(args: argparse.Namespace) -> Path:
    out = args.out_dir or Path(os.environ.get(ENV_OUT_DIR, DEFAULT_OUT_DIR))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _config(args: argparse.Namespace, default_preset: str | None = None) -> dict[str, Any]:
    preset = args.preset
    if args.config is None and preset is None:
        preset = default_preset
    if args.config is None and preset is None:
        raise UsageError(f"{args.command} needs --config or --preset")
    config = resolve_config(config_path=args.config, preset=preset)
    config = apply_overrides(
        config,
        CONF_RUN,
        **{
            CONF_TRAJECTORIES: args.nm,
            CONF_SEED: args.seed,
            CONF_THREADS: args.threads,
            CONF_DT: args.dt,
            CONF_T_MAX: args.tmax,
        },
    )
    return apply_overrides(config, CONF_BATH, **{CONF_COUPLING: args.coupling, CONF_DECAY: args.gamma})


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as err:
        raise UsageError(f"not a comma-separated list of numbers: {text!r}") from err


def _engine_options(args: argparse.Namespace) -> dict[str, Any]:
    return {"workers": args.threads, "single_thread": args.single_thread}


# ── Commands ─────────────────────────────────────────────────────────────────


def cmd_run(args: argparse.Namespace) -> int:
    config = _config(args)
    s = Scenario.from_config(config)
    out = _out_dir(args)
    csv_path = out / f"{s.name}.csv"
    manifest_path = out / f"{s.name}.manifest.json"

    if s.solver == SOLVER_MASTER:
        result = run_master(s)
        manifest = build_manifest("run", s.config, seed=s.seed, validity=result.validity)
        manifest.checks["hermiticity_drift"] = result.hermiticity_drift
        write_csv(result.series, csv_path, full=args.full)
    else:
        coordinator = EnsembleCoordinator(s, **_engine_options(args))
        stats = asyncio.run(coordinator.async_run())
        manifest = build_manifest("run", s.config, seed=s.seed, stats=stats)
        write_csv(stats.series, csv_path, full=args.full)
        if args.dump_amplitudes and coordinator.first_amplitudes is not None:
            path = write_amplitudes(out / f"{s.name}-amplitudes.csv", s.grid.output_times, coordinator.first_amplitudes)
            manifest.outputs["amplitudes"] = str(path)
        if args.nm_list:
            rows = convergence_scan(s, [int(v) for v in _floats(args.nm_list)], **_engine_options(args))
            path = write_table(
                out / f"{s.name}-convergence.csv",
                "convergence",
                ["NM", "P_T", "P_T_stderr", "max_stderr", "max_deviation"],
                [(r.n_trajectories, r.p_t, r.p_t_err, r.max_stderr, r.max_deviation) for r in rows],
                readout=s.grid.t_max,
            )
            manifest.outputs["convergence"] = str(path)
    manifest.outputs["csv"] = str(csv_path)
    if args.plot:
        manifest.outputs["plot"] = str(render_plot([csv_path], out / f"{s.name}.svg", LAYOUT_TRANSPORT).path)
    write_manifest(manifest, manifest_path)
    _LOGGER.info("Run complete: scenario=%s, csv=%s, manifest=%s", s.name, csv_path, manifest_path)
    print(csv_path)
    return EXIT_OK


def cmd_dimer_check(args: argparse.Namespace) -> int:
    s = Scenario.from_config(_config(args, default_preset="dimer-check"))
    stats = run_ensemble(s, **_engine_options(args))
    master = run_master(s)
    report = compare_with_master(stats, master, samples=args.samples, noiseless=s.noiseless)
    out = _out_dir(args)
    path = write_table(
        out / f"{s.name}-comparison.csv",
        "dimer-check",
        ["t", "P1_sse", "P1_master", "P1_stderr"],
        list(zip(report.times, report.sse, report.master, report.stderr)),
        trajectories=s.n_trajectories,
    )
    manifest = build_manifest("dimer-check", s.config, seed=s.seed, stats=stats)
    manifest.outputs["comparison"] = str(path)
    manifest.checks.update(passed=report.passed, fraction_within=report.fraction_within, max_deviation=report.max_deviation)
    write_manifest(manifest, out / f"{s.name}-dimer-check.manifest.json")
    print(report.format())
    return EXIT_OK if report.passed else EXIT_NUMERICAL


def cmd_sweep(args: argparse.Namespace) -> int:
    config = _config(args, default_preset="markov-sweep")
    section = dict(config.get(CONF_SWEEP) or {})
    parameter = args.parameter or section.get(CONF_PARAMETER)
    values = _floats(args.values) if args.values else section.get(CONF_VALUES)
    if not parameter or not values:
        raise UsageError("sweep needs --parameter and --values or a [sweep] section")
    readout = args.readout if args.readout is not None else section.get(CONF_READOUT, DEFAULT_READOUT)
    outer = section.get(CONF_OUTER_PARAMETER) if not args.parameter else None
    outer_values = section.get(CONF_OUTER_VALUES) or []

    base = Scenario.from_config(config)
    rows: list[tuple[float, ...]] = []
    if outer and outer_values:
        for outer_value in outer_values:
            for r in sweep(scenario_for(base, outer, outer_value), parameter, values, readout, **_engine_options(args)):
                rows.append((outer_value, r.value, r.p_t, r.p_t_err))
        columns = [outer, parameter, "P_T", "P_T_stderr"]
        meta = {"parameter": parameter, "outer": outer}
    else:
        rows = [(r.value, r.p_t, r.p_t_err) for r in sweep(base, parameter, values, readout, **_engine_options(args))]
        columns = [parameter, "P_T", "P_T_stderr"]
        meta = {"parameter": parameter}
    out = _out_dir(args)
    path = write_table(
        out / f"{base.name}-sweep.csv", "sweep", columns, rows, readout=readout, trajectories=base.n_trajectories, **meta
    )
    manifest = build_manifest("sweep", base.config, seed=base.seed)
    manifest.outputs["sweep"] = str(path)
    write_manifest(manifest, out / f"{base.name}-sweep.manifest.json")
    print(path)
    return EXIT_OK


def cmd_validity(args: argparse.Namespace) -> int:
    s = Scenario.from_config(_config(args))
    scale = args.scale if args.scale is not None else validity_scale(s.model)
    report = post_markov_validity(scale, float(np.min(s.bath.gamma)), s.grid.t_max, args.n_max)
    print(report.format_table())
    path = write_validity(report, _out_dir(args) / f"{s.name}-validity.csv")
    print(f"table={path}")
    return EXIT_OK


def cmd_noise_check(args: argparse.Namespace) -> int:
    s = Scenario.from_config(_config(args, default_preset="ring-dephasing"))
    spec = BathSpec.uniform(1, float(s.bath.g[0]), float(s.bath.gamma[0]), s.bath.beta)
    generator = make_generator(
        args.method, spec, n_modes=s.n_modes, omega_max=s.omega_max_factor * float(spec.gamma[0])
    )
    report = noise_check(generator, spec, n_paths=args.paths, seed=s.seed)
    out = _out_dir(args)
    path = write_table(
        out / f"noise-check-{args.method}.csv",
        "noise-check",
        ["lag", "re_target", "im_target", "re_emp", "im_emp", "stderr"],
        report.rows(),
        method=args.method,
        paths=args.paths,
    )
    if args.pairs:
        write_table(
            out / f"noise-check-{args.method}-pairs.csv",
            "noise-check-pairs",
            ["t1", "t2", "target_re", "target_im", "estimate_re", "estimate_im", "stderr_re", "stderr_im", "pseudo_abs"],
            report.pair_rows(),
            method=args.method,
            paths=args.paths,
        )
    mismatch = "n/a" if report.mismatch is None else report.mismatch.format()
    print(
        f"{'PASS' if report.passed else 'FAIL'}: method={args.method} paths={args.paths} "
        f"within_3sigma={report.fraction_within:.1%} lag_within_3sigma={report.lag_fraction_within:.1%} "
        f"pseudo_within_3sigma={report.pseudo_fraction_within:.1%} "
        f"alpha_T_mismatch=[{mismatch}] table={path}"
    )
    return EXIT_OK if report.passed else EXIT_NUMERICAL


def cmd_plot(args: argparse.Namespace) -> int:
    output = args.output or _out_dir(args) / "plot.svg"
    result = render_plot(args.csv, output, args.layout)
    print(result.path)
    return EXIT_OK


def cmd_presets(args: argparse.Namespace) -> int:
    for name in preset_names():
        text = (resources.files("lh1rc.presets") / f"{name}.toml").read_text(encoding="utf-8")
        first = text.splitlines()[0] if text else ""
        print(f"{name:<16} {first.lstrip('# ').strip()}")
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "dimer-check": cmd_dimer_check,
    "sweep": cmd_sweep,
    "validity": cmd_validity,
    "noise-check": cmd_noise_check,
    "plot": cmd_plot,
    "presets": cmd_presets,
}


def main(argv: Sequence[str] | None = None) -> int:
    """Entry point; returns 0 ok, 1 usage, 2 validation, 3 numerical failure."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as err:
        print(f"lh1rc: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as err:
        return int(err.code or 0)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    logging.getLogger("lh1rc").setLevel(logging.DEBUG if args.verbose else logging.INFO)
    sync_library_logger()

    try:
        return COMMANDS[args.command](args)
    except UsageError as err:
        print(f"lh1rc: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (ScenarioError, SchemaError) as err:
        _LOGGER.error("Invalid input: %s", err, exc_info=_LOGGER.isEnabledFor(logging.DEBUG))
        print(f"lh1rc: error: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as err:
        _LOGGER.error("Numerical failure: %s", err, exc_info=_LOGGER.isEnabledFor(logging.DEBUG))
        print(f"lh1rc: error: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as err:
        _LOGGER.error("Invalid input: %s", err, exc_info=_LOGGER.isEnabledFor(logging.DEBUG))
        print(f"lh1rc: error: {err}", file=sys.stderr)
        return EXIT_VALIDATION
