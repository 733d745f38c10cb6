"""
Optimization-based model predictor: minimizes the hinge classification
objective over the memory's features to obtain a 1x1xC filter that is a
drop-in replacement for the transformer-predicted w_cls.
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import torch

from tompTracker.errors import NonFiniteError
from tompTracker.objectives import classification_residual


logger = logging.getLogger(__name__)

MAX_HALVINGS = 30


@dataclass
class DCFProblem:
    """
    features: (m, C, H, W), labels: (m, H, W).
    """
    features: torch.Tensor
    labels: torch.Tensor
    reg: float = 0.01
    tau: float = 0.05
    hinge: bool = True

    def __post_init__(self):
        if self.features.dim() != 4 or self.features.shape[0] < 1:
            raise ValueError("A DCF problem needs at least one (C, H, W) map")
        m, _, height, width = self.features.shape
        if self.labels.shape != (m, height, width):
            raise ValueError(
                f"Labels {tuple(self.labels.shape)} do not match features "
                f"{tuple(self.features.shape)}")
        if self.reg < 0:
            raise ValueError(f"Regularization must be >= 0: {self.reg}")

    @property
    def cells(self) -> int:
        return self.features.shape[2] * self.features.shape[3]

    def scores(self, w: torch.Tensor) -> torch.Tensor:
        return torch.einsum("c,mchw->mhw", w, self.features)

    def residual(self, w: torch.Tensor) -> torch.Tensor:
        scores = self.scores(w)
        if self.hinge:
            return classification_residual(scores, self.labels, self.tau)
        return scores - self.labels

    def active(self, w: torch.Tensor) -> torch.Tensor:
        """
        Cells whose residual is currently quadratic in w.
        """
        if not self.hinge:
            return torch.ones_like(self.labels)
        foreground = self.labels > self.tau
        return (foreground | (self.scores(w) > 0)).to(self.labels.dtype)


def dcf_objective(w: torch.Tensor, problem: DCFProblem) -> torch.Tensor:
    """
    Sum over frames of the mean squared residual, plus reg * ||w||^2.
    """
    per_frame = problem.residual(w).pow(2).mean(dim=(1, 2))
    return per_frame.sum() + problem.reg * w.dot(w)


def _gradient(w: torch.Tensor, problem: DCFProblem) -> torch.Tensor:
    residual = problem.residual(w)
    data = torch.einsum("mhw,mchw->c", residual, problem.features)
    return 2.0 * data / problem.cells + 2.0 * problem.reg * w


def _curvature(p: torch.Tensor, active: torch.Tensor,
               problem: DCFProblem) -> torch.Tensor:
    projected = problem.scores(p)
    data = (active * projected.pow(2)).sum() / problem.cells
    return 2.0 * data + 2.0 * problem.reg * p.dot(p)


def dcf_optimize(problem: DCFProblem, iters: int = 5,
                 init_w: Optional[torch.Tensor] = None,
                 method: str = "steepest") -> Tuple[torch.Tensor, List[float]]:
    """
    Descend the objective for a fixed number of iterations. Each step uses
    the exact minimizer of the local quadratic model along the search
    direction; if the true objective rises, the step is halved.

    method: "steepest" (negative gradient) or "conjugate" (Fletcher-Reeves
    directions, which reach the optimum of a hinge-free problem in at most
    C iterations).

    Returns:
        the filter and the objective trace (iters + 1 values, nonincreasing)
    """
    if iters < 0:
        raise ValueError(f"iters must be >= 0: {iters}")
    if method not in ("steepest", "conjugate"):
        raise ValueError(f"Unknown descent method: {method}")
    channels = problem.features.shape[1]
    with torch.no_grad():
        if init_w is None:
            w = problem.features.new_zeros(channels)
        else:
            w = init_w.detach().clone().to(problem.features.dtype)
        trace = [float(dcf_objective(w, problem))]
        direction = None
        previous_norm = None

        for step in range(iters):
            grad = _gradient(w, problem)
            grad_norm = float(grad.dot(grad))
            if grad_norm == 0.0:
                trace.append(trace[-1])
                continue
            p = -grad
            if method == "conjugate" and direction is not None:
                p = p + (grad_norm / previous_norm) * direction
                if float(p.dot(grad)) >= 0:
                    p = -grad
            curvature = float(_curvature(p, problem.active(w), problem))
            if curvature <= 0:
                trace.append(trace[-1])
                continue
            alpha = -float(grad.dot(p)) / curvature
            if not math.isfinite(alpha):
                raise NonFiniteError(
                    f"Non-finite DCF step at iteration {step}: alpha={alpha}")

            candidate = w + alpha * p
            value = float(dcf_objective(candidate, problem))
            halvings = 0
            while value > trace[-1] and halvings < MAX_HALVINGS:
                alpha *= 0.5
                candidate = w + alpha * p
                value = float(dcf_objective(candidate, problem))
                halvings += 1
            if value > trace[-1]:
                logger.warning("DCF line search found no descent at "
                               "iteration %d", step)
                trace.append(trace[-1])
                direction = None
                continue
            w = candidate
            trace.append(value)
            direction = p
            previous_norm = grad_norm
    return w, trace
