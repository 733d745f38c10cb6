import logging
from pathlib import Path
from typing import Dict, List

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from tompTracker.evaluation import (  # noqa: E402
    IOU_THRESHOLDS,
    NORM_THRESHOLDS,
    PIXEL_THRESHOLDS,
    MetricReport
)


logger = logging.getLogger(__name__)

PLOTS = {
    "success": ("success_curve", IOU_THRESHOLDS, "success_auc",
                "Overlap threshold", "Success rate", "Success plot"),
    "precision": ("precision_curve", PIXEL_THRESHOLDS, "precision",
                  "Location error threshold (px)", "Precision",
                  "Precision plot"),
    "norm_precision": ("norm_precision_curve", NORM_THRESHOLDS,
                       "norm_precision_auc", "Normalized distance threshold",
                       "Normalized precision", "Normalized precision plot"),
}


class ReportPlots:
    """
    One PNG per metric; each compares the mean curves of one or more
    labelled reports.
    """

    def __init__(self, reports: Dict[str, MetricReport]):
        if not reports:
            raise ValueError("Nothing to plot")
        self.reports = reports

    def _plot(self, name: str, path: Path) -> Path:
        curve_key, thresholds, score_key, xlabel, ylabel, title = PLOTS[name]
        fig, ax = plt.subplots()
        for label, report in self.reports.items():
            score = report.aggregate()[score_key]
            ax.plot(thresholds, report.mean_curve(curve_key),
                    label=f"{label} [{score:.3f}]")
        ax.set(xlabel=xlabel, ylabel=ylabel, title=title,
               xlim=(thresholds[0], thresholds[-1]), ylim=(0, 1))
        ax.grid(True)
        ax.legend(loc="lower right" if name != "success" else "lower left")
        fig.tight_layout()
        fig.savefig(path, dpi=150, metadata={"Software": None})
        plt.close(fig)
        return path

    def write(self, directory) -> List[Path]:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        paths = [self._plot(name, directory / f"{name}_plot.png")
                 for name in PLOTS]
        logger.info("Wrote %d plots to %s", len(paths), directory)
        return paths


def plot_reports(reports: Dict[str, MetricReport], directory) -> List[Path]:
    return ReportPlots(reports).write(directory)
