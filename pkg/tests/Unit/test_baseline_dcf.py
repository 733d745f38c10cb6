import numpy as np
import pytest
import torch
from tompTracker.baseline_dcf import DCFProblem, dcf_objective, dcf_optimize
from tompTracker.objectives import check_gradients


def random_problem(seed, m=2, channels=6, size=4, hinge=True, reg=0.01):
    generator = torch.Generator().manual_seed(seed)
    features = torch.randn(m, channels, size, size, generator=generator,
                           dtype=torch.float64)
    labels = torch.rand(m, size, size, generator=generator,
                        dtype=torch.float64) ** 4
    return DCFProblem(features, labels, reg=reg, hinge=hinge)


def test_objective_value():
    features = torch.ones(1, 1, 1, 2, dtype=torch.float64)
    labels = torch.tensor([[[1.0, 0.0]]], dtype=torch.float64)
    problem = DCFProblem(features, labels, reg=0.5)
    w = torch.tensor([2.0], dtype=torch.float64)
    # residuals: 2 - 1 on the foreground, relu(2) on the background
    assert float(dcf_objective(w, problem)) == pytest.approx(
        (1.0 + 4.0) / 2 + 0.5 * 4.0)


@pytest.mark.parametrize("method", ["steepest", "conjugate"])
def test_trace_is_monotone_on_random_problems(method):
    for seed in range(100):
        problem = random_problem(seed)
        _, trace = dcf_optimize(problem, iters=5, method=method)
        assert len(trace) == 6
        assert all(b <= a + 1e-12 for a, b in zip(trace, trace[1:]))


def test_hinge_free_problem_reaches_normal_equations_optimum():
    problem = random_problem(7, hinge=False)
    m, channels, height, width = problem.features.shape
    # conjugate directions finish a C-dimensional quadratic in C steps
    w, _ = dcf_optimize(problem, iters=channels, method="conjugate")
    cells = height * width
    a = np.zeros((channels, channels))
    b = np.zeros(channels)
    for frame in range(m):
        x = problem.features[frame].reshape(channels, -1).numpy()
        y = problem.labels[frame].reshape(-1).numpy()
        a += x @ x.T / cells
        b += x @ y / cells
    a += problem.reg * np.eye(channels)
    optimum = np.linalg.solve(a, b)
    assert np.abs(w.numpy() - optimum).max() < 1e-6


@pytest.mark.parametrize("method", ["steepest", "conjugate"])
def test_filter_peaks_on_the_labelled_centre(method):
    size = 7
    centers = [(3, 3), (2, 4), (5, 1)]
    features = torch.zeros(len(centers), 2, size, size, dtype=torch.float64)
    labels = torch.zeros(len(centers), size, size, dtype=torch.float64)
    rows, cols = torch.meshgrid(torch.arange(size, dtype=torch.float64),
                                torch.arange(size, dtype=torch.float64),
                                indexing="ij")
    for frame, (row, col) in enumerate(centers):
        # channel 0 fires on the target only, channel 1 everywhere
        features[frame, 0, row, col] = 1.0
        features[frame, 1] = 1.0
        labels[frame] = torch.exp(-((rows - row) ** 2 + (cols - col) ** 2)
                                  / 2.0)
    problem = DCFProblem(features, labels)
    w, _ = dcf_optimize(problem, iters=10, method=method)
    scores = problem.scores(w).reshape(len(centers), -1)
    peaks = [divmod(int(i), size) for i in scores.argmax(dim=1)]
    assert peaks == centers


def test_gradient_matches_finite_differences():
    problem = random_problem(3)
    w = torch.randn(6, dtype=torch.float64, requires_grad=True)
    assert check_gradients(lambda: dcf_objective(w, problem), [w]) < 1e-4


def test_zero_iterations_and_warm_start():
    problem = random_problem(4)
    init = torch.randn(6, dtype=torch.float64)
    w, trace = dcf_optimize(problem, iters=0, init_w=init)
    assert torch.equal(w, init)
    assert trace == [float(dcf_objective(init, problem))]


def test_errors():
    problem = random_problem(5)
    with pytest.raises(ValueError):
        dcf_optimize(problem, iters=-1)
    with pytest.raises(ValueError):
        dcf_optimize(problem, method="newton")
    with pytest.raises(ValueError):
        DCFProblem(torch.zeros(1, 2, 3, 3), torch.zeros(1, 3, 4))
    with pytest.raises(ValueError):
        DCFProblem(torch.zeros(1, 2, 3, 3), torch.zeros(1, 3, 3), reg=-1.0)
