from pathlib import Path
from typing import List, Sequence

import numpy as np

from tompTracker.Models.Fields.boxXYWH import BoxXYWH


class ResultsFile:
    """
    Per-frame tracker output: one "x,y,w,h" line per frame, fixed to four
    decimals so identical runs write identical bytes.
    """

    def __init__(self, boxes: Sequence[BoxXYWH]):
        self.boxes = list(boxes)

    def to_text(self) -> str:
        lines = [",".join(f"{v:.4f}" for v in box.to_list())
                 for box in self.boxes]
        return "\n".join(lines) + "\n"

    def write(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_text())
        return path


def write_results(path, boxes: Sequence[BoxXYWH]) -> Path:
    return ResultsFile(boxes).write(path)


def read_results(path) -> np.ndarray:
    """
    Returns:
        (N, 4) array of x, y, w, h
    """
    rows: List[List[float]] = []
    with open(path, "r") as f:
        for number, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            values = line.replace("\t", ",").split(",")
            if len(values) != 4:
                raise ValueError(f"{path}:{number}: expected x,y,w,h")
            rows.append([float(v) for v in values])
    return np.array(rows, dtype=float).reshape(-1, 4)
