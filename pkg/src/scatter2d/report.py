"""Report writers: CSV tables, P5 graymaps, and matplotlib figures.

CSV files are UTF-8, comma-separated, with ``#``-prefixed metadata lines
(artifact version, command, config hash, seed) before the header row.
Floats are written through ``repr`` so values round-trip exactly and
identical runs are byte-identical.

Graymaps are binary PGM (P5, maxval 255) of |field| with the linear
mapping ``pixel = round(255 * min(|u|, vmax) / vmax)``, where vmax is
the clip value if given and max |u| otherwise; interior cells are 0.
"""

from __future__ import annotations

import math
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from . import __version__  # noqa: E402


def format_value(v):
    if isinstance(v, bool) or isinstance(v, np.bool_):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        x = float(v)
        return repr(x) if math.isfinite(x) else ("nan" if math.isnan(x) else
                                                 ("inf" if x > 0 else "-inf"))
    return str(v)


def write_csv(path, columns, rows, meta):
    lines = [f"# scatter2d {__version__}"]
    for key, val in meta.items():
        lines.append(f"# {key}={val}")
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(format_value(v) for v in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_pgm(path, magnitude, clip=None):
    mag = np.asarray(magnitude, dtype=float)
    vmax = float(clip) if clip else float(mag.max() or 1.0)
    if vmax <= 0:
        vmax = 1.0
    pix = np.clip(mag / vmax, 0.0, 1.0)
    pix = np.round(255.0 * pix).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{pix.shape[1]} {pix.shape[0]}\n255\n".encode("ascii"))
        fh.write(pix.tobytes())


def ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path


def render_kcurve(path, rows, param_name):
    """K against the sweep parameter (or against m when no sweep)."""
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    series = {}
    for param, density, m, k_val, _flag in rows:
        series.setdefault((density, m), []).append((param, k_val))
    swept = len({p for p, *_ in rows}) > 1
    if swept:
        for (density, m), pts in sorted(series.items()):
            pts.sort()
            ax.plot([p for p, _ in pts], [k for _, k in pts],
                    marker="o", ms=3, label=f"{density}, m={m}")
        ax.set_xlabel(param_name)
    else:
        by_density = {}
        for (density, m), pts in series.items():
            by_density.setdefault(density, []).append((m, pts[0][1]))
        for density, pts in sorted(by_density.items()):
            pts.sort()
            ax.plot([m for m, _ in pts], [k for _, k in pts],
                    marker="o", ms=3, label=density)
        ax.set_xlabel("m")
    ax.set_ylabel("K(m)")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_sweep(path, rows):
    """Boundary error against order, one line per (density, method, N_s rule)."""
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    series = {}
    marks = {}
    for density, method, nh, ns, err, matched, status in rows:
        if status != "ok" or not np.isfinite(err):
            continue
        key = (density, method) if method == "collocation" else (density, method, ns)
        series.setdefault((density, method), []).append((nh, err))
        if matched:
            marks.setdefault((density, method), []).append((nh, err))
    for key, pts in sorted(series.items()):
        pts.sort()
        (line,) = ax.semilogy([n for n, _ in pts], [e for _, e in pts],
                              marker=".", label=" ".join(str(k) for k in key))
        if key in marks:
            ax.semilogy([n for n, _ in marks[key]], [e for _, e in marks[key]],
                        linestyle="none", marker="o", mfc="none", ms=10,
                        color=line.get_color())
    ax.set_xlabel("order N_h")
    ax.set_ylabel("relative boundary L2 error")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3, which="both")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_field(path, magnitude, grid, clip=None):
    fig, ax = plt.subplots(figsize=(6.8, 5.2))
    vmax = clip if clip else float(np.max(magnitude) or 1.0)
    im = ax.imshow(
        np.clip(magnitude, 0.0, vmax),
        origin="lower",
        extent=(grid.xmin, grid.xmax, grid.ymin, grid.ymax),
        cmap="viridis",
        vmin=0.0,
        vmax=vmax,
        interpolation="nearest",
    )
    fig.colorbar(im, ax=ax, label="|u|")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
