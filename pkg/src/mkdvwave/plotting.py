"""Matplotlib renderings of speed curves, phase portraits and traces."""

from __future__ import annotations

import io
import re

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

# svg user units are points; 72 per inch keeps width/height in pixels
DPI = 72

plt.rcParams.update({
    "svg.hashsalt": "mkdvwave",
    "font.size": 11,
    "axes.grid": True,
    "grid.alpha": 0.3,
})


def _figure(width, height):
    return plt.subplots(figsize=(width / DPI, height / DPI), dpi=DPI, layout="tight")


def _svg_unitless(data: bytes) -> bytes:
    """Drop the ``pt`` suffix from the root width/height attributes."""
    start = data.index(b"<svg")
    end = data.index(b">", start)
    root = re.sub(rb'(width|height)="([0-9.]+)pt"', rb'\1="\2"', data[start:end])
    return data[:start] + root + data[end:]


def _save(fig, path, fmt=None):
    """Write ``fig`` to ``path`` (file name or binary stream) and close it."""
    if fmt is None:
        fmt = str(path).rsplit(".", 1)[-1].lower() if isinstance(path, str) else "svg"
    if fmt != "svg":
        meta = {"Date": None} if fmt == "pdf" else None
        fig.savefig(path, format=fmt, metadata=meta)
        plt.close(fig)
        return
    buf = io.BytesIO()
    # no timestamp so identical inputs give identical files
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    data = _svg_unitless(buf.getvalue())
    if isinstance(path, str):
        with open(path, "wb") as fh:
            fh.write(data)
    else:
        path.write(data)
        path.flush()


def speed_curve_figure(rows, n, path, width=800, height=600, fmt=None):
    fig, ax = _figure(width, height)
    hs = [r.h for r in rows]
    ax.plot(hs, [r.c0 for r in rows], color="C0", lw=1.8)
    ax.set_xlabel("h")
    ax.set_ylabel(r"$c_0(h)$")
    ax.set_title(f"limit wave speed, n = {n}")
    ax.set_xlim(0, max(hs) if hs else 1)
    _save(fig, path, fmt)


def phase_portrait_figure(orbits, equilibria, n, path, width=800, height=600, fmt=None):
    """``orbits`` is a list of dicts with ``u``, ``v`` arrays and a ``separatrix`` flag."""
    fig, ax = _figure(width, height)
    for orb in orbits:
        if orb.get("separatrix"):
            ax.plot(orb["u"], orb["v"], color="C3", lw=1.4)
        else:
            ax.plot(orb["u"], orb["v"], color="C0", lw=0.9)
    for eq in equilibria:
        marker = "o" if eq.kind == "center" else "x"
        ax.plot([eq.u], [0.0], marker=marker, color="k", ms=7, mew=2, ls="none")
    ax.set_xlabel("u")
    ax.set_ylabel("v")
    ax.set_title(f"phase portrait, n = {n}")
    ax.set_aspect("equal", adjustable="datalim")
    _save(fig, path, fmt)


def trace_figure(t, columns: dict, path, title="", width=800, height=600, fmt=None):
    fig, ax = _figure(width, height)
    for name, values in columns.items():
        ax.plot(t, values, lw=1.0, label=name)
    ax.set_xlabel(r"$\tau$")
    ax.legend(loc="best")
    if title:
        ax.set_title(title)
    _save(fig, path, fmt)


def orbit_figure(u, v, path, title="", width=800, height=600, fmt=None):
    fig, ax = _figure(width, height)
    ax.plot(u, v, lw=1.0)
    ax.set_xlabel("u")
    ax.set_ylabel("v")
    if title:
        ax.set_title(title)
    _save(fig, path, fmt)
