"""Per-video result figures: RSD concordance on top, ground-truth vs
predicted phase bands in the middle, senior-probability trace at the bottom.
Figures render from the plot-data CSV alone so they are reproducible from
the emitted files."""

import csv
from pathlib import Path
from typing import Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .errors import DatasetIOError
from .phases import N_PHASES, ExperienceLevel

PLOT_COLUMNS = ["t", "rsd_gt", "rsd_pred", "phase_gt", "phase_pred", "p_senior"]


def write_plot_data(track, path: Union[str, Path]) -> None:
    """CSV with one row per frame: t,rsd_gt,rsd_pred,phase_gt,phase_pred,p_senior."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(PLOT_COLUMNS)
        rsd_gt = track.rsd_gt
        for i, ann in enumerate(track.annotations):
            writer.writerow(
                [
                    repr(float(ann.elapsed_s)),
                    repr(float(rsd_gt[i])),
                    repr(float(track.rsd_pred[i])),
                    int(ann.phase),
                    int(track.phase_pred[i]),
                    repr(float(track.exp_probs_pred[i][int(ExperienceLevel.SENIOR)])),
                ]
            )


def read_plot_data(path: Union[str, Path]) -> dict:
    path = Path(path)
    if not path.exists():
        raise DatasetIOError(f"plot data not found: {path}")
    cols = {name: [] for name in PLOT_COLUMNS}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            for name in PLOT_COLUMNS:
                cols[name].append(float(row[name]))
    return {name: np.array(values) for name, values in cols.items()}


def render_video_figure(
    csv_path: Union[str, Path], png_path: Union[str, Path], unit: str = "s"
) -> None:
    """Three stacked panels built from the plot-data CSV."""
    data = read_plot_data(csv_path)
    t = data["t"]
    cmap = plt.get_cmap("tab10")

    fig, axes = plt.subplots(
        3, 1, figsize=(8, 6), sharex=True, gridspec_kw={"height_ratios": [3, 1.2, 1.5]}
    )
    ax = axes[0]
    ax.plot(t, data["rsd_gt"], label="ground truth", color="black")
    ax.plot(t, data["rsd_pred"], label="predicted", color="tab:red")
    ax.set_ylabel(f"RSD ({unit})")
    ax.legend(loc="upper right", fontsize=8)
    ax.set_title(Path(csv_path).stem)

    ax = axes[1]
    bands = np.stack([data["phase_gt"], data["phase_pred"]])
    ax.imshow(
        bands,
        aspect="auto",
        interpolation="nearest",
        cmap=cmap,
        vmin=0,
        vmax=N_PHASES - 1,
        extent=(t[0], t[-1] if len(t) > 1 else t[0] + 1, 1.5, -0.5),
    )
    ax.set_yticks([0, 1])
    ax.set_yticklabels(["phase GT", "phase pred"], fontsize=8)

    ax = axes[2]
    ax.plot(t, data["p_senior"], color="tab:blue", label="p(senior)")
    ax.axhline(0.5, color="gray", linestyle=":", linewidth=0.8)
    ax.set_ylim(-0.05, 1.05)
    ax.set_ylabel("p(senior)")
    ax.set_xlabel(f"elapsed time ({unit})")
    ax.legend(loc="upper right", fontsize=8)

    fig.tight_layout()
    fig.savefig(png_path, dpi=110)
    plt.close(fig)
