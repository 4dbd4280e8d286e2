"""SVG plots for the CLI. Plots are derived artifacts; CSV stays canonical."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def plot_sweep(path, spectrum, peaks, mode_frequencies):
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.semilogy(spectrum.frequencies / 1e6, np.abs(spectrum.input_impedance), color="C0", lw=1.2)
    for f in mode_frequencies:
        ax.axvline(f / 1e6, color="k", ls=":", lw=1)
    for p in peaks:
        ax.axvline(p.frequency / 1e6, color="r", ls="-", lw=0.8, alpha=0.8)
    ax.set_xlabel("Frequency (MHz)")
    ax.set_ylabel("|Z| (ohm)")
    ax.set_title(f"Driven element {spectrum.driven + 1}")
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def plot_damping(path, study):
    fig, ax = plt.subplots(figsize=(6, 4))
    r = np.array([row.resistance for row in study.rows])
    table = study.deviation_table()
    for m in range(table.shape[1]):
        if np.any(np.isfinite(table[:, m])):
            ax.loglog(r, table[:, m], marker="o", label=f"mode {m + 1}")
    ax.set_xlabel("R (ohm)")
    ax.set_ylabel("relative peak deviation")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def plot_dispersion(path, curve):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(curve.k_values, curve.upper_branch / 1e6, "k:", label="upper")
    ax.plot(curve.k_values, curve.lower_branch / 1e6, "k--", label="lower")
    if curve.resolvable.any():
        ax.axvline(curve.k_values[np.argmax(curve.resolvable)], color="r", ls=":", label="resolvable from")
    ax.set_xlabel("k")
    ax.set_ylabel("Frequency (MHz)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
