"""Figure rendering for the CLI report paths.

Every plot lands next to its data artifact as a PNG. Rendering is
headless (Agg) and byte-stable: no timestamps or software tags are
embedded, so re-running a command with the same config reproduces the
image exactly.
"""

from __future__ import annotations

import math

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

GOLDEN = (math.sqrt(5) - 1.0) / 2.0


def new_figure(width: float = 6.0, square: bool = False):
    height = width if square else width * GOLDEN
    return plt.subplots(figsize=(width, height))


def save(fig, path) -> str:
    fig.tight_layout()
    fig.savefig(path, dpi=140, metadata={"Software": None})
    plt.close(fig)
    return str(path)


def droplet_figure(droplet, path):
    """Droplet boundary with shaded interior."""
    fig, ax = new_figure(5.0, square=True)
    bz = droplet.boundary_points(512)
    ax.fill(bz.real, bz.imag, color="#aac4e2", alpha=0.55, lw=0)
    ax.plot(np.append(bz.real, bz.real[0]), np.append(bz.imag, bz.imag[0]),
            color="#2c5d8f", lw=1.4)
    ax.set_aspect("equal")
    ax.set_xlabel("Re z")
    ax.set_ylabel("Im z")
    ax.set_title("droplet S")
    return save(fig, path)


def points_figure(points, droplet, path, title="configuration"):
    fig, ax = new_figure(5.0, square=True)
    if droplet is not None:
        bz = droplet.boundary_points(512)
        ax.plot(np.append(bz.real, bz.real[0]), np.append(bz.imag, bz.imag[0]),
                color="#2c5d8f", lw=1.2, label="droplet boundary")
    ax.plot(points.real, points.imag, ".", ms=4, color="#b24a3b")
    ax.set_aspect("equal")
    ax.set_xlabel("Re z")
    ax.set_ylabel("Im z")
    ax.set_title(title)
    if droplet is not None:
        ax.legend(loc="upper right", fontsize=8)
    return save(fig, path)


def profile_figure(x, values, path, ylabel="R(x)", overlay=None,
                   overlay_label=None):
    """1-d profile plot with an optional reference curve."""
    fig, ax = new_figure()
    ax.plot(x, values, color="#b24a3b", lw=1.5, label="measured")
    if overlay is not None:
        ax.plot(x, overlay, "--", color="#2c5d8f", lw=1.2,
                label=overlay_label or "reference")
        ax.legend(fontsize=8)
    ax.set_xlabel("x (rescaled)")
    ax.set_ylabel(ylabel)
    ax.grid(alpha=0.3)
    return save(fig, path)


def ward_figure(z, residuals, path):
    fig, ax = new_figure(5.4, square=True)
    sc = ax.scatter(z.real, z.imag, c=residuals, s=46, cmap="viridis")
    fig.colorbar(sc, ax=ax, label="|Ward residual|")
    ax.set_aspect("equal")
    ax.set_xlabel("Re z")
    ax.set_ylabel("Im z")
    return save(fig, path)


def density_figure(table, path):
    """N/Lambda^2 against Lambda, one line per n."""
    fig, ax = new_figure()
    by_n = {}
    for row in table:
        by_n.setdefault(row["n"], []).append((row["lambda"], row["ratio"]))
    for n, rows in sorted(by_n.items()):
        rows.sort()
        ax.plot([r[0] for r in rows], [r[1] for r in rows], "o-",
                ms=4, lw=1.2, label=f"n={n}")
    ax.set_xlabel("window size")
    ax.set_ylabel("count / window size$^2$")
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    return save(fig, path)


def spectrum_figure(spectra, path):
    """Concentration eigenvalue staircases, one per window size."""
    fig, ax = new_figure()
    for lam, ev in spectra:
        ax.plot(np.arange(1, ev.size + 1), ev, lw=1.3, label=f"window {lam:g}")
    ax.set_xlabel("eigenvalue index")
    ax.set_ylabel("eigenvalue")
    ax.set_xlim(0, max(len(ev) for _, ev in spectra) * 0.4)
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    return save(fig, path)


def histogram_figure(edges, observed, expected, path,
                     xlabel="|z|", ylabel="count"):
    fig, ax = new_figure()
    mid = 0.5 * (edges[:-1] + edges[1:])
    ax.bar(mid, observed, width=np.diff(edges), color="#aac4e2",
           edgecolor="#2c5d8f", lw=0.6, label="sampled")
    ax.plot(mid, expected, "o-", color="#b24a3b", ms=3.5, lw=1.2,
            label="kernel prediction")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.legend(fontsize=8)
    return save(fig, path)


def matrix_figure(results, path):
    """Pass/fail bar for the acceptance matrix."""
    fig, ax = new_figure(6.4)
    names = [r["name"] for r in results]
    ok = [bool(r["passed"]) for r in results]
    y = np.arange(len(names))
    ax.barh(y, 1.0, color=["#3f8f4f" if p else "#b24a3b" for p in ok])
    ax.set_yticks(y)
    ax.set_yticklabels(names, fontsize=7)
    ax.invert_yaxis()
    ax.set_xticks([])
    for yi, p in zip(y, ok):
        ax.text(0.5, yi, "pass" if p else "FAIL", ha="center", va="center",
                color="white", fontsize=8, fontweight="bold")
    return save(fig, path)
