"""Error-versus-epoch line charts written to image files."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# stable element ids so repeated SVG renders are identical
matplotlib.rcParams["svg.hashsalt"] = "blockprox"

LABELS = {"dr": "DR", "ps": "PS"}


def plot_error_traces(curves: dict, path, title: str | None = None) -> Path:
    """One line per configuration; the format follows the file extension (.svg, .png, .pdf).

    Parameters
    ----------
    curves : dict
        Maps a label, or an ``(algorithm, alpha)`` pair, to an array of
        rows ``(epochs, error_db)``.
    path : str or Path
    title : str, optional
    """
    path = Path(path)
    fig, ax = plt.subplots(figsize=(8, 4.5))
    for key, rows in curves.items():
        if isinstance(key, tuple):
            alg, alpha = key
            label = f"{LABELS.get(alg, alg)}-{alpha:g}"
            style = ":" if alg == "dr" else "-"
        else:
            label, style = str(key), "-"
        ax.plot(rows[:, 0], rows[:, 1], style, label=label, linewidth=1.8)
    ax.set_xlabel("epochs")
    ax.set_ylabel("normalized error (dB)")
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend(ncol=2, fontsize="small")
    fig.tight_layout()
    # fixed metadata keeps repeated renders identical
    metadata = {"Date": None} if path.suffix.lower() == ".svg" else None
    fig.savefig(path, metadata=metadata)
    plt.close(fig)
    return path
