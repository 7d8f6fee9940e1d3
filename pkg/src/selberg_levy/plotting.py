"""Figures written next to the CLI's CSV/JSON output. Uses the non-interactive Agg backend."""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _save(fig, path: str | Path) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=path.suffix)
    os.close(fd)
    try:
        fig.savefig(tmp, dpi=120, bbox_inches="tight")
        mask = os.umask(0)
        os.umask(mask)
        os.chmod(tmp, 0o666 & ~mask)
        os.replace(tmp, path)
    finally:
        plt.close(fig)
        if os.path.exists(tmp):
            os.unlink(tmp)


def plot_paths(paths, title: str, path: str | Path) -> None:
    fig, ax = plt.subplots(figsize=(8, 4.5))
    for p in paths:
        ax.step(p.times, p.values, where="post", lw=0.8, label=f"path {p.path_id}")
    ax.set_xlabel("time")
    ax.set_ylabel("X(t)")
    ax.set_title(title)
    if len(paths) <= 8:
        ax.legend(fontsize="small")
    _save(fig, path)


def plot_charfn(t, cf, tail, title: str, path: str | Path) -> None:
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(8, 6), sharex=True)
    ax1.plot(t, np.real(cf), lw=0.9, label="Re")
    ax1.plot(t, np.imag(cf), lw=0.9, label="Im")
    ax1.set_ylabel("exp(g(t))")
    ax1.legend(fontsize="small")
    ax2.plot(t, np.log(np.abs(cf)), lw=0.9, label="Re g")
    ax2.plot(t, tail, lw=0.9, ls="--", label="tail bound")
    ax2.set_xlabel("t")
    ax2.set_ylabel("Re g(t)")
    ax2.legend(fontsize="small")
    fig.suptitle(title)
    _save(fig, path)


def plot_scan(t, values, zeros, title: str, path: str | Path) -> None:
    fig, ax = plt.subplots(figsize=(9, 4))
    ax.plot(t, values, lw=0.8)
    ax.axhline(0, color="k", lw=0.5)
    if len(zeros):
        ax.plot(zeros, np.zeros(len(zeros)), "o", ms=3, color="C3", label="zeros")
        ax.legend(fontsize="small")
    ax.set_xlabel("t")
    ax.set_ylabel("scaled real-line function")
    ax.set_title(title)
    _save(fig, path)
