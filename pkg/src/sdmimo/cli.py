"""Command-line front end.

Subcommands: spectrum, se, phi-opt, chanest, validate, list-experiments.
Angles are degrees and SNR is dB on the command line; everything internal is
radians and linear power.  Exit codes: 0 success, 1 validation failure,
2 usage error.  Diagnostics go to stderr, data to files or stdout.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import config as config_mod
from . import experiments, receivers
from .experiments import EXPERIMENTS, ExperimentSpec

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2


def _add_scenario_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--experiment", help="builtin experiment name (see list-experiments)")
    p.add_argument("--config", help="path to a JSON scenario configuration")
    p.add_argument("--m", type=int, help="antenna count M")
    p.add_argument("--k", type=int, help="number of users K")
    p.add_argument("--l", type=int, help="paths per user L")
    p.add_argument("--d-over-lambda", type=float, help="antenna spacing over wavelength (unitless)")
    p.add_argument("--theta0-deg", type=float, help="sector center angle, degrees")
    p.add_argument("--spread-deg", type=float, help="angular spread, degrees")
    p.add_argument("--snr-db", help="SNR p0/sigma_n2 in dB; comma-separated list sweeps it")
    p.add_argument("--phi-mode", choices=("auto", "manual"), help="steering phase: auto = sector center")
    p.add_argument("--phi-deg", type=float, help="steering phase in degrees (phi-mode manual)")
    p.add_argument("--trials", type=int, help="Monte Carlo trials per sweep point")
    p.add_argument("--seed", type=int, help="master RNG seed")
    p.add_argument("--full-scale", action="store_true", help="10x the trial count")
    p.add_argument("--out", help="output directory (default ./out/<experiment>-<seed>)")


def _flag_conflicts(args) -> list[str]:
    conflicts = []
    if getattr(args, "phi_deg", None) is not None and getattr(args, "phi_mode", None) == "auto":
        conflicts.append("--phi-deg conflicts with --phi-mode auto")
    if getattr(args, "phi_deg", None) is not None and getattr(args, "phi_mode", None) is None \
            and getattr(args, "experiment", None) is None and getattr(args, "config", None) is None:
        conflicts.append("--phi-deg requires --phi-mode manual")
    return conflicts


def _parse_snr_list(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError as exc:
        raise ValueError(f"snr-db: expected comma-separated numbers, got {text!r}") from exc


def _build_spec(args, kind: str, receiver: str | None, csi: str | None) -> ExperimentSpec:
    """Spec from builtin/config/flags; flags win over the config file."""
    if args.experiment:
        if args.experiment not in EXPERIMENTS:
            raise ValueError(f"experiment: unknown name {args.experiment!r}; see list-experiments")
        spec = EXPERIMENTS[args.experiment]
        if kind == "chanest":
            spec = _replace(spec, kind="chanest", name=f"{args.experiment}-chanest")
    else:
        cfg = dict(config_mod.DEFAULTS)
        if args.config:
            cfg = config_mod.load_config(args.config)
        spec = ExperimentSpec(
            name=f"custom-{kind}",
            description=f"command-line {kind} run",
            kind=kind,
            M=cfg["M"],
            d_over_lambda=cfg["d_over_lambda"],
            K=cfg["K"],
            L=cfg["L"],
            theta0_deg=cfg["theta0_deg"],
            spread_deg=cfg["spread_deg"],
            snr_db=cfg["snr_db"],
            sweep_axis="snr_db" if kind != "spectrum" else "d_over_lambda",
            sweep_values=(cfg["snr_db"],) if kind != "spectrum" else (cfg["d_over_lambda"],),
            seed=cfg["seed"],
            phi_mode=cfg["phi_mode"],
            phi_deg=cfg["phi_deg"],
        )
    updates = {}
    for flag, fieldname in (
        ("m", "M"),
        ("k", "K"),
        ("l", "L"),
        ("d_over_lambda", "d_over_lambda"),
        ("theta0_deg", "theta0_deg"),
        ("spread_deg", "spread_deg"),
        ("phi_mode", "phi_mode"),
        ("phi_deg", "phi_deg"),
        ("trials", "trials"),
        ("seed", "seed"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            updates[fieldname] = value
    if getattr(args, "snr_db", None) is not None:
        values = _parse_snr_list(args.snr_db)
        if spec.sweep_axis == "snr_db":
            updates["sweep_values"] = values
            updates["snr_db"] = values[0]
        else:
            if len(values) > 1:
                raise ValueError("snr-db: this experiment sweeps another axis; give a single value")
            updates["snr_db"] = values[0]
    if getattr(args, "d_over_lambda", None) is not None and spec.sweep_axis == "d_over_lambda":
        updates["sweep_values"] = (args.d_over_lambda,)
    if receiver is not None:
        updates["receiver"] = receiver
    if csi is not None:
        updates["csi"] = csi
    if getattr(args, "arch", None):
        updates["architectures"] = tuple(args.arch)
    spec = _replace(spec, **updates)
    errs = spec.validate()
    if errs:
        raise ValueError("; ".join(errs))
    return spec


def _replace(spec: ExperimentSpec, **kw) -> ExperimentSpec:
    from dataclasses import replace

    return replace(spec, **kw)


def _out_dir(args, spec: ExperimentSpec) -> str:
    if getattr(args, "out", None):
        return args.out
    return os.path.join("out", f"{spec.name}-{spec.seed}")


def _run_table_command(args, kind: str) -> int:
    receiver = getattr(args, "receiver", None)
    csi = getattr(args, "csi", None)
    spec = _build_spec(args, kind, receiver, csi)
    out = _out_dir(args, spec)
    result = experiments.run_experiment(spec, out, full_scale=args.full_scale)
    for path in result.files + [result.manifest_path]:
        print(path)
    return EXIT_OK


def cmd_spectrum(args) -> int:
    return _run_table_command(args, "spectrum")


def cmd_se(args) -> int:
    return _run_table_command(args, "se")


def cmd_chanest(args) -> int:
    return _run_table_command(args, "chanest")


def cmd_phi_opt(args) -> int:
    spec = _build_spec(args, "se", None, None)
    scn, geom = spec.point(spec.sweep_values[0])
    star = receivers.phi_star(scn, geom)
    auto = scn.steering_phase(geom)
    values = (star, np.degrees(star), receivers.g_phi(scn, geom, star), auto, receivers.g_phi(scn, geom, auto))
    print("phi_star_rad,phi_star_deg,g_at_star,phi_auto_rad,g_at_auto")
    print(",".join(repr(float(v)) for v in values))
    return EXIT_OK


def cmd_validate(args) -> int:
    checks = experiments.validate_suite(seed=args.seed if args.seed is not None else 0)
    print(experiments.validation_report(checks))
    return EXIT_OK if all(c.passed for c in checks) else EXIT_VALIDATION


def cmd_list_experiments(args) -> int:
    for name, spec in EXPERIMENTS.items():
        print(f"{name}: {spec.description}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sdmimo",
        description="Spatial sigma-delta one-bit array: spectra, spectral efficiency, steering.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="quantization-noise spectrum run (CSV)")
    _add_scenario_flags(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("se", help="spectral-efficiency sweep (CSV)")
    _add_scenario_flags(p)
    p.add_argument("--receiver", choices=("mrc", "zf"), help="linear receiver")
    p.add_argument("--csi", choices=("perfect", "ls", "both"), help="channel knowledge: perfect or LS-estimated")
    p.add_argument(
        "--arch",
        action="append",
        choices=receivers.ARCHITECTURES,
        help="front end to evaluate (repeatable; default all three)",
    )
    p.set_defaults(func=cmd_se)

    p = sub.add_parser("phi-opt", help="optimal steering phase for the sector (stdout)")
    _add_scenario_flags(p)
    p.set_defaults(func=cmd_phi_opt)

    p = sub.add_parser("chanest", help="LS channel-estimation comparison across front ends (CSV)")
    _add_scenario_flags(p)
    p.add_argument("--receiver", choices=("mrc", "zf"), help="receiver for the SE column")
    p.set_defaults(func=cmd_chanest)

    p = sub.add_parser("validate", help="run the reduced-scale oracle suite")
    p.add_argument("--seed", type=int, help="master RNG seed")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("list-experiments", help="list builtin experiment names")
    p.set_defaults(func=cmd_list_experiments)
    return parser


def parse_and_dispatch(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse already printed the diagnostic; normalize --help to success
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    conflicts = _flag_conflicts(args)
    if conflicts:
        print("; ".join(conflicts), file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


def main() -> None:
    sys.exit(parse_and_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
