"""Command-line interface.

One binary with subcommands for validation, measurement derivation, belief
presentations, metric reports, sweeps, optimization, the discrimination
study, and sequence sampling.  Every run resolves its full configuration into
a manifest written beside the output (or into the working directory for
stdout runs); rerunning with the same manifest settings reproduces outputs
byte for byte.  Domain errors print a machine-readable JSON envelope on
stderr and exit 1; usage errors exit 2.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import re
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import InputError, QsspError
from .hmc import (
    sample_sequence,
    stationary_distribution,
    unifilarity,
    validate,
)
from .measured import CCQS, derive_measured_hmc, memoryless_basis
from .metrics import process_metrics
from .modelio import (
    BUNDLED,
    bundled_model_path,
    canonical_json,
    dumps_model,
    loads_model,
    model_digest,
)
from .msp import build_msp, sample_blackwell
from .quantum import projective_basis, usd_povm
from .sweep import (
    CSV_COLUMNS,
    EstimatorConfig,
    optimize_measurement,
    sweep_grid,
    sweep_theta,
    usd_alpha_study,
)

_ANGLE_RE = re.compile(r"^\s*(-?\d*\.?\d*)\s*pi\s*(?:/\s*(\d+\.?\d*))?\s*$")


def parse_angle(text: str) -> float:
    """Angles in radians; accepts plain floats and 'pi' forms like '3pi/8'."""
    m = _ANGLE_RE.match(text)
    if m:
        num = m.group(1)
        mult = float(num) if num not in ("", "-") else (-1.0 if num == "-" else 1.0)
        div = float(m.group(2)) if m.group(2) else 1.0
        return mult * math.pi / div
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an angle: {text!r}") from None


def _fmt(x) -> str:
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        return f"{x:.17g}"
    return str(x)


def _default_seed() -> int:
    return int(os.environ.get("QSSP_SEED", "0"))


def _resolve_model(spec: str):
    """Load a model from a path or a bundled-model name."""
    if os.path.exists(spec):
        path = spec
        text = Path(spec).read_text(encoding="utf-8")
    else:
        stem = spec[:-5] if spec.endswith(".json") else spec
        if stem not in BUNDLED:
            raise InputError(
                f"model {spec!r} is neither a file nor a bundled model "
                f"(bundled: {', '.join(BUNDLED)})",
                pointer="",
            )
        res = bundled_model_path(stem)
        path = str(res)
        text = res.read_text(encoding="utf-8")
    return loads_model(text), path, model_digest(text)


def _measurement_from_args(source: CCQS, args):
    if getattr(args, "povm", None) == "usd":
        emitted = source.emitted_states()
        if len(emitted) != 2:
            raise InputError(
                "the discrimination POVM needs a source emitting exactly two "
                f"distinct states, found {len(emitted)}",
                pointer="",
            )
        return usd_povm(emitted[0], emitted[1])
    if getattr(args, "povm", None) == "memoryless":
        emitted = source.emitted_states()
        if len(emitted) != 2:
            raise InputError(
                "the memoryless basis needs a source emitting exactly two "
                f"distinct states, found {len(emitted)}",
                pointer="",
            )
        return memoryless_basis(emitted[0], emitted[1])
    theta = getattr(args, "theta", None)
    if theta is None:
        raise InputError(
            "this model is a qubit source; give --theta (and optionally "
            "--phi) or --povm to fix a measurement",
            pointer="",
        )
    return projective_basis(theta, getattr(args, "phi", 0.0) or 0.0)


def _as_classical(model, args, inputs_digest):
    """Return a classical machine, deriving the measured machine when the
    model is a qubit source."""
    if isinstance(model, CCQS):
        measurement = _measurement_from_args(model, args)
        measured = derive_measured_hmc(model, measurement)
        measured.provenance["source_digest"] = inputs_digest
        return measured
    return model


def _write_manifest(args, subcommand: str, config: dict, inputs: dict,
                    outputs: list) -> str:
    manifest = {
        "tool": {"name": "qssp", "version": __version__},
        "subcommand": subcommand,
        "seed": getattr(args, "seed", None),
        "config": config,
        "inputs": inputs,
        "outputs": outputs,
    }
    out = getattr(args, "out", None)
    path = f"{out}.manifest.json" if out else f"{subcommand}.manifest.json"
    Path(path).write_text(canonical_json(manifest) + "\n", encoding="utf-8")
    return path


def _emit_text(args, text: str) -> list:
    out = getattr(args, "out", None)
    if out:
        Path(out).write_text(text, encoding="utf-8")
        return [out]
    sys.stdout.write(text)
    return []


def _emit_csv(args, columns, rows) -> list:
    out = getattr(args, "out", None)
    target = open(out, "w", newline="", encoding="utf-8") if out else sys.stdout
    try:
        writer = csv.writer(target, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    finally:
        if out:
            target.close()
    return [out] if out else []


def _figure_path(args):
    out = getattr(args, "out", None)
    if not out:
        return None
    return str(Path(out).with_suffix(".png"))


# -- subcommand handlers ------------------------------------------------


def _cmd_validate(args) -> int:
    model, path, digest = _resolve_model(args.model)
    hmc = model.hmc if isinstance(model, CCQS) else model
    result = validate(hmc)
    result.raise_if_invalid()
    report = unifilarity(hmc)
    payload = {
        "valid": True,
        "kind": "ccqs" if isinstance(model, CCQS) else "hmc",
        "states": len(hmc.states),
        "alphabet": len(hmc.alphabet),
        "unifilar": report.unifilar,
        "stationary": [float(v) for v in stationary_distribution(hmc)],
    }
    _emit_text(args, canonical_json(payload) + "\n")
    _write_manifest(args, "validate", {"model": args.model},
                    {path: digest}, [args.out] if args.out else [])
    return 0


def _cmd_measure(args) -> int:
    model, path, digest = _resolve_model(args.model)
    if not isinstance(model, CCQS):
        raise InputError("measure needs a qubit-source model", pointer="")
    measured = _as_classical(model, args, digest)
    outputs = _emit_text(args, dumps_model(measured))
    _write_manifest(
        args, "measure",
        {"model": args.model, "theta": getattr(args, "theta", None),
         "phi": getattr(args, "phi", None), "povm": getattr(args, "povm", None)},
        {path: digest}, outputs)
    return 0


def _cmd_msp(args) -> int:
    model, path, digest = _resolve_model(args.model)
    machine = _as_classical(model, args, digest)
    config = {
        "model": args.model, "merge_tol": args.merge_tol,
        "max_states": args.max_states, "mass_threshold": args.mass_threshold,
        "theta": getattr(args, "theta", None), "phi": getattr(args, "phi", None),
        "povm": getattr(args, "povm", None),
    }
    if args.sample:
        config.update({"sample": args.sample, "burn_in": args.burn_in,
                       "seed": args.seed})
        traj = sample_blackwell(machine, args.sample, burn_in=args.burn_in,
                                seed=args.seed)
        columns = [f"p_{s}" for s in machine.states]
        outputs = _emit_csv(args, columns,
                            [list(map(float, row)) for row in traj.points])
        fig = _figure_path(args)
        if fig:
            from .plotting import plot_points

            plot_points(traj.points, fig, title="sampled beliefs")
            outputs.append(fig)
        _write_manifest(args, "msp", config, {path: digest}, outputs)
        return 0
    msp = build_msp(machine, merge_tol=args.merge_tol,
                    max_states=args.max_states,
                    mass_threshold=args.mass_threshold)
    transitions = []
    for i in range(msp.n_states):
        for xi, x in enumerate(msp.alphabet):
            j = int(msp.successor[i, xi])
            if j >= 0:
                transitions.append(
                    {"from": i, "symbol": x, "to": j,
                     "p": float(msp.probability[i, xi])}
                )
    payload = {
        "kind": msp.kind,
        "n_states": msp.n_states,
        "growth": msp.growth,
        "merge_tol": msp.merge_tol,
        "truncation_mass": msp.truncation_mass,
        "alphabet": list(msp.alphabet),
        "states": [[float(v) for v in row] for row in msp.states],
        "transitions": transitions,
        "stationary": [float(v) for v in msp.stationary],
    }
    outputs = _emit_text(args, canonical_json(payload) + "\n")
    print(
        f"kind={msp.kind}, states={msp.n_states}, leak={msp.truncation_mass:.6g}",
        file=sys.stderr,
    )
    _write_manifest(args, "msp", config, {path: digest}, outputs)
    return 0


def _cmd_metrics(args) -> int:
    model, path, digest = _resolve_model(args.model)
    machine = _as_classical(model, args, digest)
    eps_exp_min = -math.log2(args.eps_max)
    eps_exp_max = -math.log2(args.eps_min)
    eps_grid = 2.0 ** -np.linspace(eps_exp_min, eps_exp_max, args.eps_points)
    report = process_metrics(
        machine, merge_tol=args.merge_tol, max_states=args.max_states,
        length=args.length, burn_in=args.burn_in,
        dmu_sample=args.dmu_sample, eps_grid=eps_grid, seed=args.seed)
    fit = None
    if report.dmu_fit is not None:
        fit = {
            "slope": report.dmu_fit.slope,
            "r_squared": report.dmu_fit.r_squared,
            "eps_window": list(report.dmu_fit.eps_window),
            "eps_values": list(report.dmu_fit.eps_values),
            "h_values": list(report.dmu_fit.h_values),
        }
    payload = {
        "hmu": report.hmu,
        "hmu_stderr": report.hmu_stderr,
        "cmu": report.cmu,
        "cmu_divergent": report.cmu_divergent,
        "dmu": report.dmu,
        "dmu_fit": fit,
        "cardinality_class": report.cardinality_class,
        "msp_states": report.msp_states,
        "msp_kind": report.msp_kind,
        "msp_growth": report.msp_growth,
        "truncation_mass": report.truncation_mass,
        "sample_size": report.sample_size,
        "burn_in": report.burn_in,
        "seed": report.seed,
    }
    outputs = _emit_text(args, canonical_json(payload) + "\n")
    print(report.summary(), file=sys.stderr)
    fig = _figure_path(args)
    if fig and report.dmu_fit is not None:
        from .plotting import plot_dimension_fit

        plot_dimension_fit(report.dmu_fit, fig)
        outputs.append(fig)
    _write_manifest(
        args, "metrics",
        {"model": args.model, "length": args.length, "burn_in": args.burn_in,
         "dmu_sample": args.dmu_sample, "eps_min": args.eps_min,
         "eps_max": args.eps_max, "eps_points": args.eps_points,
         "merge_tol": args.merge_tol, "max_states": args.max_states,
         "seed": args.seed, "theta": getattr(args, "theta", None),
         "phi": getattr(args, "phi", None), "povm": getattr(args, "povm", None)},
        {path: digest}, outputs)
    return 0


def _sweep_config(args) -> EstimatorConfig:
    return EstimatorConfig(
        hmu_length=args.hmu_length,
        burn_in=args.burn_in,
        dmu_sample=args.dmu_sample,
        merge_tol=args.merge_tol,
        max_states=args.max_states,
        structure=args.structure,
    )


def _cmd_sweep(args) -> int:
    model, path, digest = _resolve_model(args.model)
    if not isinstance(model, CCQS):
        raise InputError("sweep needs a qubit-source model", pointer="")
    cfg = _sweep_config(args)
    if args.grid_phi:
        result = sweep_grid(model, n_theta=args.n, n_phi=args.grid_phi,
                            cfg=cfg, base_seed=args.seed, jobs=args.jobs)
    else:
        result = sweep_theta(model, phi=args.phi, n=args.n, cfg=cfg,
                             base_seed=args.seed, jobs=args.jobs)
    rows = [[r.theta, r.phi, r.hmu, r.hmu_stderr, r.structure_metric,
             r.structure_value, r.msp_kind] for r in result.rows]
    outputs = _emit_csv(args, CSV_COLUMNS, rows)
    fig = _figure_path(args)
    if fig and not args.grid_phi:
        from .plotting import plot_sweep

        plot_sweep(result, fig)
        outputs.append(fig)
    print(
        f"baseline hmu={result.generator_hmu:.6g}, "
        f"cmu={result.generator_cmu:.6g}; rows={len(result.rows)}",
        file=sys.stderr,
    )
    _write_manifest(
        args, "sweep",
        {"model": args.model, "phi": args.phi, "n": args.n,
         "grid_phi": args.grid_phi, "structure": args.structure,
         "hmu_length": args.hmu_length, "dmu_sample": args.dmu_sample,
         "burn_in": args.burn_in, "merge_tol": args.merge_tol,
         "max_states": args.max_states, "seed": args.seed, "jobs": args.jobs,
         "baseline_hmu": result.generator_hmu,
         "baseline_cmu": result.generator_cmu},
        {path: digest}, outputs)
    return 0


def _cmd_optimize(args) -> int:
    model, path, digest = _resolve_model(args.model)
    if not isinstance(model, CCQS):
        raise InputError("optimize needs a qubit-source model", pointer="")
    cfg = _sweep_config(args)
    objective = args.objective.replace("-", "_")
    result = optimize_measurement(model, objective, budget=args.budget,
                                  cfg=cfg, base_seed=args.seed)
    payload = {
        "theta": result.theta,
        "phi": result.phi,
        "value": result.value,
        "mode": result.mode,
        "objective": args.objective,
        "evaluations": result.evaluations,
        "stopped_noisy": result.stopped_noisy,
    }
    sys.stdout.write(canonical_json(payload) + "\n")
    outputs = []
    if args.out:
        rows = [[t, p, mode, row.hmu, row.hmu_stderr, row.structure_metric,
                 row.structure_value, row.msp_kind]
                for t, p, mode, row in result.trace]
        outputs = _emit_csv(
            args,
            ("theta", "phi", "mode", "hmu", "hmu_stderr", "structure_metric",
             "structure_value", "msp_kind"),
            rows)
    _write_manifest(
        args, "optimize",
        {"model": args.model, "objective": args.objective,
         "budget": args.budget, "structure": args.structure,
         "hmu_length": args.hmu_length, "dmu_sample": args.dmu_sample,
         "burn_in": args.burn_in, "merge_tol": args.merge_tol,
         "max_states": args.max_states, "seed": args.seed},
        {path: digest}, outputs)
    return 0


def _cmd_usd_study(args) -> int:
    inputs = {}
    source = None
    if args.model:
        model, path, digest = _resolve_model(args.model)
        if not isinstance(model, CCQS):
            raise InputError("the study needs a qubit-source model", pointer="")
        source = model
        inputs[path] = digest
    alphas = np.linspace(args.alpha_min, args.alpha_max, args.n)
    rows = usd_alpha_study(alphas, msp_truncation=args.truncation,
                           source=source, merge_tol=args.merge_tol)
    outputs = _emit_csv(
        args,
        ("alpha", "hmu", "cmu", "msp_states", "msp_kind"),
        [[r.alpha, r.hmu, r.cmu, r.msp_states, r.msp_kind] for r in rows])
    fig = _figure_path(args)
    if fig:
        from .plotting import plot_usd_study

        plot_usd_study(rows, fig)
        outputs.append(fig)
    _write_manifest(
        args, "usd-study",
        {"model": args.model, "alpha_min": args.alpha_min,
         "alpha_max": args.alpha_max, "n": args.n,
         "truncation": args.truncation, "merge_tol": args.merge_tol},
        inputs, outputs)
    return 0


def _cmd_sample(args) -> int:
    model, path, digest = _resolve_model(args.model)
    machine = _as_classical(model, args, digest)
    symbols = sample_sequence(machine, args.length, args.seed)
    outputs = _emit_csv(args, ("symbol",), [[s] for s in symbols])
    _write_manifest(
        args, "sample",
        {"model": args.model, "length": args.length, "seed": args.seed,
         "theta": getattr(args, "theta", None),
         "phi": getattr(args, "phi", None),
         "povm": getattr(args, "povm", None)},
        {path: digest}, outputs)
    return 0


# -- parser -------------------------------------------------------------


def _add_model_arg(p, required=True):
    p.add_argument("--model", required=required,
                   help="model file path or bundled model name")


def _add_measurement_args(p):
    p.add_argument("--theta", type=parse_angle, default=None,
                   help="basis polar angle (radians; accepts e.g. 'pi/4')")
    p.add_argument("--phi", type=parse_angle, default=0.0,
                   help="basis azimuthal angle")
    p.add_argument("--povm", choices=("usd", "memoryless"), default=None,
                   help="use the discrimination POVM or the memoryless basis "
                        "of the emitted pair instead of --theta/--phi")


def _add_msp_args(p, merge_tol=1e-9, max_states=10 ** 4):
    p.add_argument("--merge-tol", type=float, default=merge_tol,
                   help="belief merge tolerance (L-infinity)")
    p.add_argument("--max-states", type=int, default=max_states,
                   help="belief enumeration cap")
    p.add_argument("--mass-threshold", type=float, default=1e-9,
                   help="stationary mass allowed to be dropped at truncation")


def _add_seed_arg(p):
    p.add_argument("--seed", type=int, default=None,
                   help="RNG seed (default: QSSP_SEED env var, else 0)")


def _add_out_arg(p):
    p.add_argument("--out", default=None, help="output file (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qssp",
        description="Measured qubit sources: belief presentations and "
                    "randomness/structure metrics.",
    )
    parser.add_argument("--version", action="version",
                        version=f"qssp {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("validate", help="check a model file's invariants")
    _add_model_arg(p)
    _add_seed_arg(p)
    _add_out_arg(p)
    p.set_defaults(handler=_cmd_validate)

    p = sub.add_parser("measure", help="derive the measured machine")
    _add_model_arg(p)
    _add_measurement_args(p)
    _add_seed_arg(p)
    _add_out_arg(p)
    p.set_defaults(handler=_cmd_measure)

    p = sub.add_parser("msp", help="enumerate or sample the belief presentation")
    _add_model_arg(p)
    _add_measurement_args(p)
    _add_msp_args(p)
    p.add_argument("--sample", type=int, default=None, metavar="L",
                   help="sample L beliefs instead of enumerating")
    p.add_argument("--burn-in", type=int, default=10 ** 4)
    _add_seed_arg(p)
    _add_out_arg(p)
    p.set_defaults(handler=_cmd_msp)

    p = sub.add_parser("metrics", help="full metric report for a machine")
    _add_model_arg(p)
    _add_measurement_args(p)
    _add_msp_args(p)
    p.add_argument("--length", type=int, default=10 ** 6,
                   help="entropy-rate sample length")
    p.add_argument("--burn-in", type=int, default=10 ** 4)
    p.add_argument("--dmu-sample", type=int, default=2 * 10 ** 6,
                   help="dimension-estimate sample size")
    p.add_argument("--eps-min", type=float, default=2.0 ** -12)
    p.add_argument("--eps-max", type=float, default=2.0 ** -3)
    p.add_argument("--eps-points", type=int, default=13)
    _add_seed_arg(p)
    _add_out_arg(p)
    p.set_defaults(handler=_cmd_metrics)

    p = sub.add_parser("sweep", help="sweep measurement angles")
    _add_model_arg(p)
    p.add_argument("--phi", type=parse_angle, default=0.0)
    p.add_argument("--n", type=int, default=100, help="angles per axis")
    p.add_argument("--grid-phi", type=int, default=None, metavar="N_PHI",
                   help="sweep a full (theta, phi) grid with N_PHI azimuths")
    p.add_argument("--structure", choices=("auto", "dmu", "cmu"),
                   default="auto")
    p.add_argument("--hmu-length", type=int, default=200_000)
    p.add_argument("--dmu-sample", type=int, default=500_000)
    p.add_argument("--burn-in", type=int, default=10 ** 4)
    p.add_argument("--merge-tol", type=float, default=1e-9)
    p.add_argument("--max-states", type=int, default=2000)
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    _add_seed_arg(p)
    _add_out_arg(p)
    p.set_defaults(handler=_cmd_sweep)

    p = sub.add_parser("optimize", help="search for an optimal measurement")
    _add_model_arg(p)
    p.add_argument("--objective", choices=("max-hmu", "min-structure"),
                   required=True)
    p.add_argument("--budget", type=int, default=64)
    p.add_argument("--structure", choices=("auto", "dmu", "cmu"),
                   default="auto")
    p.add_argument("--hmu-length", type=int, default=100_000)
    p.add_argument("--dmu-sample", type=int, default=200_000)
    p.add_argument("--burn-in", type=int, default=10 ** 4)
    p.add_argument("--merge-tol", type=float, default=1e-9)
    p.add_argument("--max-states", type=int, default=2000)
    _add_seed_arg(p)
    _add_out_arg(p)
    p.set_defaults(handler=_cmd_optimize)

    p = sub.add_parser("usd-study",
                       help="discrimination-strength study for a state pair")
    _add_model_arg(p, required=False)
    p.add_argument("--alpha-min", type=parse_angle, default=0.02)
    p.add_argument("--alpha-max", type=parse_angle, default=math.pi)
    p.add_argument("--n", type=int, default=60)
    p.add_argument("--truncation", type=int, default=500)
    p.add_argument("--merge-tol", type=float, default=1e-10)
    _add_seed_arg(p)
    _add_out_arg(p)
    p.set_defaults(handler=_cmd_usd_study)

    p = sub.add_parser("sample", help="sample a symbol sequence")
    _add_model_arg(p)
    _add_measurement_args(p)
    p.add_argument("--length", type=int, default=1000)
    _add_seed_arg(p)
    _add_out_arg(p)
    p.set_defaults(handler=_cmd_sample)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "seed", None) is None:
        args.seed = _default_seed()
    try:
        return args.handler(args)
    except QsspError as exc:
        sys.stderr.write(canonical_json({"error": exc.to_dict()}) + "\n")
        return 1
    except ValueError as exc:
        sys.stderr.write(
            canonical_json({"error": {"type": "InputError", "message": str(exc)}})
            + "\n"
        )
        return 1


if __name__ == "__main__":
    sys.exit(main())
