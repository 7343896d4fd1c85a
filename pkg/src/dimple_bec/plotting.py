"""Line-chart rendering of figure datasets with matplotlib."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .figures import FigureDataset  # noqa: E402

_LABELS = {
    1: ("$z_1$", "$T_c/T_c^0$"),
    2: ("$T/T_c^0$", r"$\mu/\hbar\omega$"),
    3: ("$T/T_c^0$", "$N_0/N$"),
    4: ("$z_1$", "$N_0/N$ at $T=T_c^0$"),
    5: ("$z$", "density"),
}
_STYLES = ("-", "--", ":", "-.")


class RenderError(ValueError):
    pass


def render(datasets: Sequence[FigureDataset], path: str | Path, title: str | None = None) -> Path:
    """Draw every non-x column of ``datasets`` against its first column as SVG.

    All datasets must come from the same configuration.
    """
    if not datasets:
        raise RenderError("nothing to render")
    digests = {d.digest for d in datasets}
    if len(digests) != 1:
        raise RenderError(f"datasets from different configurations: {sorted(digests)}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    k = 0
    for ds in datasets:
        x = ds.rows[:, 0]
        # Fig. 1 plots the ratio column only
        ys = [c for c in ds.columns[1:] if not (ds.figure_id == 1 and c == "tc_kelvin")]
        for name in ys:
            ax.plot(x, ds.column(name), _STYLES[k % len(_STYLES)], color="k", lw=1.2, label=name)
            k += 1
    xl, yl = _LABELS.get(datasets[0].figure_id, (datasets[0].columns[0], ""))
    ax.set_xlabel(xl)
    ax.set_ylabel(yl)
    if k > 1:
        ax.legend(frameon=False)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    with matplotlib.rc_context({"svg.hashsalt": datasets[0].digest}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path
