"""``ewalk`` command line: validate configs, run experiments, write CSV outputs."""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import experiments as ex
from .config import EXPERIMENTS, ConfigError, ExperimentConfig, parse_config, serialize_config
from .observables import CentroidTrace, DensityMap
from .spectral import Spectrum, aligned_steps, crossover_grid, crossover_scan, spectral_peaks
from .sweep import default_jobs
from .walk import CoinParams, EdgeLeakError, FieldConfig, SimulationConfig

MANIFEST = "manifest.json"
RESOLVED = "config.resolved"


def fmt(x) -> str:
    """17 significant digits, locale independent; reparses to the same double."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17g")


def write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) if not isinstance(v, str) else v for v in row])


def _write_trace(out: Path, trace: CentroidTrace, name: str = "centroid.csv") -> None:
    write_csv(out / name, ["t", "centroid"], zip(range(trace.samples.size), trace.samples))


def _write_spectrum(out: Path, spec: Spectrum) -> None:
    write_csv(out / "spectrum.csv", ["omega", "magnitude"], zip(spec.freqs, spec.mags))


def _write_density(path: Path, dmap: DensityMap) -> None:
    # Long form; exact zeros (outside the light cone) are omitted.
    def rows():
        for t, row in zip(dmap.times, dmap.rows):
            for n in np.flatnonzero(row):
                yield int(t), int(n), row[n]

    write_csv(path, ["t", "n", "probability"], rows())


def _run_experiment(cfg: ExperimentConfig, out: Path, jobs: int) -> dict:
    """Dispatch one experiment; returns the manifest summary."""
    p = cfg.params
    name = cfg.experiment
    summary: dict = {}

    if name == "bloch":
        res = ex.run_bloch(p["m"], p["theta"], p["n_sites"], p["steps"], p["density_stride"] or None)
        _write_trace(out, res.trace)
        _write_spectrum(out, res.spectrum)
        if res.density is not None:
            _write_density(out / "density.csv", res.density)
        summary["peaks"] = spectral_peaks(res.spectrum, 3) if res.trace.steps > 2 else []

    elif name == "sbo":
        res = ex.run_sbo(p["m"], p["detuning"], p["theta"], p["n_sites"], p["steps"], p["phi"])
        _write_trace(out, res.trace)
        _write_spectrum(out, res.spectrum)
        summary["peaks"] = res.peaks

    elif name == "resonant_drift":
        res = ex.run_resonant_drift(p["m"], p["theta"], p["phi"], p["n_sites"], p["steps"], p["relative_amplitude"])
        _write_trace(out, res.trace)
        summary["velocity"] = res.velocity

    elif name == "velocity_curve":
        curve = ex.velocity_curve(
            p["m"], p["theta"], ex.phi_grid(p["phi_points"]), p["n_sites"], p["steps"],
            p["relative_amplitude"], p["fit_offset"], jobs,
        )
        write_csv(out / "curve.csv", ["phi", "velocity"], zip(curve.phis, curve.velocities))
        summary.update(
            fitted_v0=curve.fitted_v0, phase_offset=curve.phase_offset, fit_residual=curve.fit_residual
        )
        summary["errors"] = {str(k): v for k, v in curve.errors.items()}

    elif name == "velocity_map":
        vmap = ex.velocity_map(
            p["m"], ex.theta_grid(p["theta_points"]), ex.phi_grid(p["phi_points"]), p["n_sites"], p["steps"], jobs
        )
        rows = (
            (vmap.thetas[i], vmap.phis[j], vmap.v[i, j])
            for i in range(vmap.thetas.size)
            for j in range(vmap.phis.size)
        )
        write_csv(out / "map.csv", ["theta", "phi", "velocity"], rows)
        summary["errors"] = {f"{i},{j}": v for (i, j), v in vmap.errors.items()}

    elif name == "crossover_scan":
        steps = p["steps"] or aligned_steps(p["m"], p["grid_denominator"], p["min_steps"])
        base = SimulationConfig(p["n_sites"], steps, CoinParams(p["theta"]), FieldConfig.driven(p["m"]))
        grid = crossover_grid(p["m"], p["grid_points"], p["grid_denominator"])
        res = crossover_scan(base, grid, jobs)
        write_csv(
            out / "crossover.csv",
            ["detuning", "dominant", "branch"],
            ((d, o, b or "none") for d, o, b in zip(res.detunings, res.dominant, res.branches)),
        )
        summary.update(steps=steps, crossover=res.crossover, ratio=res.ratio, unclassified=res.unclassified)
        summary["errors"] = {str(k): v for k, v in res.errors.items()}

    elif name == "density":
        maps = ex.density_experiment(
            p["m"], p["theta"], p["n_sites"], p["steps"], p["detuning"], p["phi"], p["stride"], jobs
        )
        summary["checksums"] = {}
        for label, dmap in maps.items():
            _write_density(out / f"density_{label}.csv", dmap)
            summary["checksums"][label] = ex.density_checksums(dmap)[-1]
    else:  # pragma: no cover - parse_config rejects unknown names
        raise ValueError(name)
    return summary


def _jsonable(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, (np.floating, np.integer)):
        return _jsonable(obj.item())
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def run(config: ExperimentConfig, out_dir: str | Path, jobs: int | None = None) -> int:
    """Run ``config`` and write its outputs; returns the process exit status."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / RESOLVED).write_text(serialize_config(config), encoding="utf-8")
    jobs = default_jobs() if jobs is None else jobs

    manifest: dict = {"experiment": config.experiment, "jobs": jobs}
    start = time.perf_counter()
    status = 0
    try:
        summary = _run_experiment(config, out, jobs)
        manifest["summary"] = summary
        if summary.get("errors"):
            status = 1
            manifest["status"] = "point errors"
        else:
            manifest["status"] = "ok"
    except EdgeLeakError as exc:
        status = 1
        manifest.update(status="error", error=str(exc), failed_step=exc.step)
    manifest["wall_time_s"] = time.perf_counter() - start
    (out / MANIFEST).write_text(json.dumps(_jsonable(manifest), indent=2) + "\n", encoding="utf-8")
    return status


def _load(path: str) -> ExperimentConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="ewalk", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("config")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--jobs", type=int, default=None, help="worker processes (default: all cores)")

    p_val = sub.add_parser("validate", help="check a config and print it with defaults applied")
    p_val.add_argument("config")

    sub.add_parser("list-experiments", help="list experiment names and their parameters")

    args = parser.parse_args(argv)
    if args.command == "list-experiments":
        for name, schema in EXPERIMENTS.items():
            print(f"{name}: {', '.join(schema)}")
        return 0
    try:
        cfg = _load(args.config)
    except (ConfigError, OSError) as exc:
        print(f"ewalk: {args.config}: {exc}", file=sys.stderr)
        return 2
    if args.command == "validate":
        sys.stdout.write(serialize_config(cfg))
        return 0
    if args.jobs is not None and args.jobs < 1:
        parser.error("--jobs must be >= 1")
    return run(cfg, args.out, args.jobs)


if __name__ == "__main__":
    sys.exit(main())
