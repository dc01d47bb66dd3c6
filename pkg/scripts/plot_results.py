"""Plot the CSV outputs written by ``run_all.py``.

Usage::

    python3 scripts/plot_results.py results [--save figures/]

Needs matplotlib (``pip install -e .[plot]``).  Any missing result
directory is skipped.
"""

import argparse
import csv
import json
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from ewalk.experiments import velocity_law  # noqa: E402


def read_columns(path: Path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    out = {}
    for key in rows[0]:
        try:
            out[key] = np.array([float(r[key]) for r in rows])
        except ValueError:
            out[key] = np.array([r[key] for r in rows])
    return out


def density_image(path: Path) -> np.ndarray:
    d = read_columns(path)
    t = d["t"].astype(int)
    times = np.unique(t)
    img = np.zeros((times.size, int(d["n"].max()) + 1))
    img[np.searchsorted(times, t), d["n"].astype(int)] = d["probability"]
    return img


def plot_density(res: Path, ax_row):
    for ax, label in zip(ax_row, ("bloch", "sbo", "resonant")):
        img = density_image(res / f"density_{label}.csv")
        ax.imshow(img, aspect="auto", origin="lower", cmap="magma", vmax=np.percentile(img[img > 0], 99))
        ax.set(title=label, xlabel="site n", ylabel="row (stride steps)")


def plot_trace_and_spectrum(res: Path, axes, title: str):
    c = read_columns(res / "centroid.csv")
    s = read_columns(res / "spectrum.csv")
    axes[0].plot(c["t"], c["centroid"], lw=0.6)
    axes[0].set(title=title, xlabel="t (steps)", ylabel="centroid")
    axes[1].semilogx(s["omega"][1:], s["magnitude"][1:])
    axes[1].set(xlabel="omega (rad/step)", ylabel="|X|")


def plot_crossover(res: Path, ax):
    d = read_columns(res / "crossover.csv")
    ax.plot(d["detuning"], d["dominant"], "o-")
    ax.plot(d["detuning"], d["detuning"], "k:", lw=0.8, label="Omega = detuning")
    summary = json.loads((res / "manifest.json").read_text())["summary"]
    ax.axvline(summary["crossover"], color="r", lw=0.8, label=f"crossover ratio {summary['ratio']:.4f}")
    ax.set(xlabel="detuning (rad/step)", ylabel="dominant Omega")
    ax.legend()


def plot_curve(res: Path, ax):
    d = read_columns(res / "curve.csv")
    summary = json.loads((res / "manifest.json").read_text())["summary"]
    v0, off = summary["fitted_v0"], summary["phase_offset"]
    fine = np.linspace(0, 2 * math.pi, 400)
    ax.plot(d["phi"], d["velocity"], "o", ms=3, label="simulation")
    ax.plot(fine, v0 * velocity_law(fine + off), label="fitted law")
    ax.axhline(0, color="k", lw=0.5)
    ax.set(xlabel="phi", ylabel="v (sites/step)")
    ax.legend()


def plot_map(res: Path, ax):
    d = read_columns(res / "map.csv")
    thetas, phis = np.unique(d["theta"]), np.unique(d["phi"])
    v = d["velocity"].reshape(thetas.size, phis.size)
    lim = np.nanmax(np.abs(v))
    mesh = ax.pcolormesh(phis, thetas, v, cmap="RdBu_r", vmin=-lim, vmax=lim, shading="nearest")
    plt.colorbar(mesh, ax=ax, label="v (sites/step)")
    ax.set(xlabel="phi", ylabel="theta")


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("results", type=Path)
    parser.add_argument("--save", type=Path, default=Path("figures"))
    args = parser.parse_args(argv)
    args.save.mkdir(parents=True, exist_ok=True)
    r = args.results

    jobs = {
        "density": (lambda res: plot_density(res, plt.subplots(1, 3, figsize=(12, 4))[1])),
        "bloch": (lambda res: plot_trace_and_spectrum(res, plt.subplots(1, 2, figsize=(10, 4))[1], "static field")),
        "sbo": (lambda res: plot_trace_and_spectrum(res, plt.subplots(1, 2, figsize=(10, 4))[1], "detuned drive")),
        "crossover_m100": (lambda res: plot_crossover(res, plt.subplots(figsize=(6, 4))[1])),
        "velocity_curve": (lambda res: plot_curve(res, plt.subplots(figsize=(6, 4))[1])),
        "velocity_map": (lambda res: plot_map(res, plt.subplots(figsize=(6, 5))[1])),
    }
    for name, draw in jobs.items():
        if not (r / name / "manifest.json").exists():
            print(f"skip {name}: no results")
            continue
        draw(r / name)
        plt.tight_layout()
        plt.savefig(args.save / f"{name}.png", dpi=120)
        plt.close("all")
        print(f"wrote {args.save / name}.png")


if __name__ == "__main__":
    main()
