"""Command-line interface: ``darkthermo <subcommand> [options]``.

Exit status is 0 on success (including a temperature reported only as a
lower bound), 1 for user errors (bad config, missing or malformed files) and
2 for numerical failures (degenerate steady state, non-converged sampler).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .errors import (ConvergenceError, DarkThermoError, DegenerateFitError,
                     DegenerateSteadyStateError, FitBoundError, InvalidParameterError, ParseError,
                     TemperatureUnboundedError)
from .spectrum import (local_minima, locate_dark_resonances, spectrum_cold,
                       spectrum_thermal_effective, spectrum_thermal_quadrature)
from .thermometry import (SpectrumModel, fit_exponential_relaxation, fit_spectrum_lsq,
                          fit_spectrum_mcmc)

EXIT_OK, EXIT_USER, EXIT_NUMERIC = 0, 1, 2


@dataclass
class CommandOutcome:
    status: int
    artifacts: list = field(default_factory=list)
    summary: str = ""


def _load(args) -> io.RunConfig:
    cfg = io.read_config(args.config)
    if getattr(args, "threads", None):
        cfg.values["threads"] = args.threads
    if getattr(args, "seed", None) is not None:
        cfg.values["seed"] = args.seed
    return cfg


def _simulate(cfg: io.RunConfig, method: str, grid=None):
    grid = cfg.grid() if grid is None else grid
    sysm, a, b, fld = cfg.system(), cfg.drive_a(), cfg.drive_b(), cfg.field()
    threads = int(cfg["threads"])
    T = cfg["temperature_mk"]
    if method == "cold":
        return spectrum_cold(sysm, a, b, fld, grid, threads=threads)
    if method == "effective":
        return spectrum_thermal_effective(sysm, a, b, fld, grid, T, cfg.geometry(), threads=threads)
    if method == "quadrature":
        return spectrum_thermal_quadrature(sysm, a, b, fld, grid, T, cfg.geometry(),
                                           int(cfg["quadrature_nodes"]), threads=threads)
    raise InvalidParameterError(f"unknown method {method!r}")


def cmd_simulate(args) -> CommandOutcome:
    cfg = _load(args)
    method = args.method or cfg["method"]
    spec = _simulate(cfg, method)
    out = io.write_model_csv(spec, args.out)
    f = spec.fluorescence
    n_min = local_minima(f).size
    return CommandOutcome(EXIT_OK, [str(out)],
                          f"{method} spectrum, {f.size} points: fluorescence {f.min():.6g} .. "
                          f"{f.max():.6g}, {n_min} resonance minima -> {out}")


def cmd_resonances(args) -> CommandOutcome:
    cfg = _load(args)
    if not cfg.is_calcium:
        raise InvalidParameterError("resonance prediction needs level_system = calcium8")
    offsets = locate_dark_resonances(cfg.system(), cfg.drive_a(), cfg.drive_b(), cfg.field())
    d397 = cfg["detuning_397_mhz"]
    lines = ["offset_mhz,detuning_866_mhz"]
    lines += [f"{o!r},{d397 + o!r}" for o in offsets]
    if all(o == 0.0 for o in offsets):
        lines.append("# zero field: all four resonances coincide")
    text = "\n".join(lines)
    artifacts = []
    if args.out:
        Path(args.out).write_text(text + "\n")
        artifacts.append(str(args.out))
    print(text)
    return CommandOutcome(EXIT_OK, artifacts, f"{len(offsets)} dark resonances")


def cmd_synth(args) -> CommandOutcome:
    cfg = _load(args)
    method = args.method or cfg["method"]
    spec = _simulate(cfg, method)
    photons = args.photons if args.photons is not None else int(cfg["photons_per_point"])
    ms = io.synthesize_measurement(spec, photons, int(cfg["seed"]), cfg["exposure_us"],
                                   int(cfg["repetitions"]), cfg.get("equilibration_detuning_mhz"))
    out = io.write_spectrum_csv(ms, args.out)
    return CommandOutcome(EXIT_OK, [str(out)],
                          f"{ms.counts.size} points, {int(ms.counts.sum())} photons total -> {out}")


def cmd_fit(args) -> CommandOutcome:
    cfg = _load(args)
    data = io.read_spectrum_csv(args.data)
    mode = args.mode or cfg["fit_mode"]
    model = SpectrumModel(data.detuning_mhz, method=args.method or cfg["fit_model"],
                          system=cfg.system(), geometry=cfg.geometry(),
                          nodes=int(cfg["quadrature_nodes"]), threads=int(cfg["threads"]))
    init = cfg.fit_parameters()
    if "amplitude_counts" not in cfg.values:
        # scale the model to the data peak
        peak = model.fluorescence(init).max()
        init = init.replace(amplitude_counts=float(max(data.counts.max() - init.offset_counts, 1))
                            / peak)
    unbounded = None
    if mode == "mcmc":
        try:
            res = fit_spectrum_mcmc(data, model, init, cfg.priors(), cfg.mcmc_settings())
        except TemperatureUnboundedError as exc:
            res, unbounded = exc.result, exc.lower_bound_mk
    elif mode == "lsq":
        res = fit_spectrum_lsq(data, model, init, cfg.priors())
    else:
        raise InvalidParameterError(f"unknown fit mode {mode!r}")
    out = io.write_result(res, args.out, cfg, extra={"temperature_lower_bound_mk": unbounded})
    if unbounded is not None:
        line = f"T > {unbounded:.4g} mK (lower bound; spectrum carries no upper limit)"
    elif "temperature_mk" in res.params.free:
        line = f"T = {res.temperature_mk:.4g} +- {res.errors['temperature_mk']:.2g} mK"
    else:
        line = f"T fixed at {res.temperature_mk:.4g} mK"
    print(line)
    return CommandOutcome(EXIT_OK, [str(out)], f"{mode} fit written to {out}")


def cmd_relax(args) -> CommandOutcome:
    series = io.read_series_csv(args.series)
    fit = fit_exponential_relaxation(series)
    out = io.write_result(fit, args.out)
    print(f"tau = {fit.tau_us:.4g} +- {fit.tau_err:.2g} us")
    return CommandOutcome(EXIT_OK, [str(out)], f"relaxation fit written to {out}")


def _add_common(p, config=True):
    if config:
        p.add_argument("--config", required=True, metavar="PATH",
                       help="JSON run configuration (keys carry units, e.g. rabi_397_mhz)")
    p.add_argument("--out", required=True, metavar="PATH", help="output file path")
    p.add_argument("--threads", type=int, default=None, metavar="N",
                   help="worker threads for the steady-state solver (count, default from config)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="darkthermo",
        description="Dark-resonance spectra of trapped ions and temperature estimation.")
    sub = parser.add_subparsers(dest="command", required=True)
    methods = ("cold", "effective", "quadrature")

    p = sub.add_parser("simulate", help="compute a model spectrum (CSV: detuning_mhz,fluorescence)")
    _add_common(p)
    p.add_argument("--method", choices=methods, default=None,
                   help="thermal model; temperature taken from temperature_mk in the config (mK)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("resonances", help="print predicted dark-resonance positions (MHz)")
    p.add_argument("--config", required=True, metavar="PATH",
                   help="JSON run configuration (b_field_t in tesla)")
    p.add_argument("--out", default=None, metavar="PATH",
                   help="optional CSV of offsets and absolute 866 nm detunings (MHz)")
    p.set_defaults(func=cmd_resonances)

    p = sub.add_parser("synth", help="synthesize a photon-count measurement (CSV)")
    _add_common(p)
    p.add_argument("--method", choices=methods, default=None,
                   help="thermal model for the underlying spectrum (temperature in mK from config)")
    p.add_argument("--photons", type=int, default=None, metavar="N",
                   help="mean photon count at the spectrum maximum (counts per point)")
    p.add_argument("--seed", type=int, default=None, metavar="INT",
                   help="random seed (dimensionless integer)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("fit", help="estimate temperature and parameters from a measurement")
    _add_common(p)
    p.add_argument("--data", required=True, metavar="PATH",
                   help="measurement CSV (detuning_mhz in MHz, counts, exposure_us in us, reps)")
    p.add_argument("--mode", choices=("mcmc", "lsq"), default=None,
                   help="estimator: posterior sampling or least squares (no unit)")
    p.add_argument("--method", choices=methods, default=None,
                   help="spectrum model used inside the fit (no unit)")
    p.add_argument("--seed", type=int, default=None, metavar="INT",
                   help="sampler seed (dimensionless integer)")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("relax", help="fit T(t) = a exp(-t/tau) + offset to a temperature series")
    p.add_argument("--series", required=True, metavar="PATH",
                   help="CSV with time_us (us), temperature_mk (mK), sigma_mk (mK)")
    p.add_argument("--out", required=True, metavar="PATH", help="output JSON (tau in us, a in mK)")
    p.set_defaults(func=cmd_relax)
    return parser


def run(argv=None) -> CommandOutcome:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        outcome = args.func(args)
    except (ParseError, InvalidParameterError, FileNotFoundError, IsADirectoryError,
            PermissionError, json.JSONDecodeError) as exc:
        print(f"darkthermo {args.command}: error: {exc}", file=sys.stderr)
        return CommandOutcome(EXIT_USER, [], str(exc))
    except (DegenerateSteadyStateError, ConvergenceError, DegenerateFitError, FitBoundError,
            DarkThermoError, np.linalg.LinAlgError) as exc:
        print(f"darkthermo {args.command}: numerical failure: {exc}", file=sys.stderr)
        return CommandOutcome(EXIT_NUMERIC, [], str(exc))
    if outcome.summary:
        print(outcome.summary, file=sys.stderr)
    return outcome


def main(argv=None) -> int:
    return run(argv).status


if __name__ == "__main__":
    sys.exit(main())
