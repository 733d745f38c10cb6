import csv
import io
import json
import logging
from pathlib import Path
from typing import Tuple

from tompTracker.evaluation import SCALAR_METRICS, MetricReport


logger = logging.getLogger(__name__)

JSON_NAME = "report.json"
CSV_NAME = "report.csv"


class ReportView:
    """
    The metric report as a versioned JSON document and as a CSV table with
    one row per sequence and a final "mean" row.
    """

    def __init__(self, report: MetricReport):
        self.report = report

    def to_json(self) -> str:
        return json.dumps(self.report.to_dict(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        output = io.StringIO()
        writer = csv.writer(output, lineterminator="\n")
        writer.writerow(("sequence", "frames") + SCALAR_METRICS)
        for s in self.report.sequences:
            writer.writerow([s.name, s.frames]
                            + [f"{getattr(s, k):.6f}" for k in SCALAR_METRICS])
        aggregate = self.report.aggregate()
        writer.writerow(["mean", sum(s.frames for s in self.report.sequences)]
                        + [f"{aggregate[k]:.6f}" for k in SCALAR_METRICS])
        return output.getvalue()

    def write(self, directory) -> Tuple[Path, Path]:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        json_path = directory / JSON_NAME
        csv_path = directory / CSV_NAME
        json_path.write_text(self.to_json() + "\n")
        csv_path.write_text(self.to_csv())
        logger.info("Report written to %s", directory)
        return json_path, csv_path


def write_report(report: MetricReport, directory) -> Tuple[Path, Path]:
    return ReportView(report).write(directory)


def read_report(path) -> MetricReport:
    """
    Load a report.json, or the report.json inside a directory.
    """
    path = Path(path)
    if path.is_dir():
        path = path / JSON_NAME
    if not path.exists():
        raise FileNotFoundError(f"Report not found: {path}")
    with open(path, "r") as f:
        return MetricReport.from_dict(json.load(f))
