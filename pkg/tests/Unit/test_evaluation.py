import numpy as np
import pytest
from tompTracker.builder import load_dataset
from tompTracker.evaluation import (
    IOU_THRESHOLDS,
    MetricReport,
    mean_iou,
    norm_precision_auc,
    overlaps,
    precision,
    precision_curve,
    run_eval,
    sequence_metrics,
    success_curve,
    track_dataset
)
from tompTracker.synthetic import dataset_specs, write_dataset
from tompTracker.tracker import KeepInitialTracker, Tracker


def random_boxes(rng, n):
    xy = rng.uniform(0, 100, size=(n, 2))
    wh = rng.uniform(5, 40, size=(n, 2))
    return np.hstack([xy, wh])


def iou_by_loop(a, b):
    ix = max(0.0, min(a[0] + a[2], b[0] + b[2]) - max(a[0], b[0]))
    iy = max(0.0, min(a[1] + a[3], b[1] + b[3]) - max(a[1], b[1]))
    inter = ix * iy
    return inter / (a[2] * a[3] + b[2] * b[3] - inter)


def test_metrics_against_loops():
    rng = np.random.default_rng(0)
    for _ in range(50):
        n = int(rng.integers(1, 30))
        gt = random_boxes(rng, n)
        pred = gt + rng.normal(0, 8, size=gt.shape)
        pred[:, 2:] = np.abs(pred[:, 2:]) + 1
        ious = [iou_by_loop(p, g) for p, g in zip(pred, gt)]
        assert overlaps(pred, gt) == pytest.approx(ious)
        _, auc = success_curve(pred, gt)
        computed = overlaps(pred, gt)
        expected = np.mean([np.mean([iou > t for iou in computed])
                            for t in IOU_THRESHOLDS])
        assert auc == pytest.approx(expected)
        errors = [np.hypot(p[0] + p[2] / 2 - g[0] - g[2] / 2,
                           p[1] + p[3] / 2 - g[1] - g[3] / 2)
                  for p, g in zip(pred, gt)]
        assert precision(pred, gt) == pytest.approx(
            np.mean([e <= 20 for e in errors]))
        assert mean_iou(pred, gt) == pytest.approx(np.mean(ious))


def test_half_overlap_sits_on_a_threshold():
    gt = np.array([[0, 0, 10, 10]] * 4, dtype=float)
    pred = np.array([[0, 0, 10, 5]] * 4, dtype=float)
    assert overlaps(pred, gt) == pytest.approx([0.5] * 4)
    _, auc = success_curve(pred, gt)
    assert abs(auc - 50 / 101) <= 1 / 202 + 1e-12


def test_exact_predictions_score_one():
    gt = np.random.default_rng(1).integers(1, 60, size=(20, 4)).astype(float)
    curve, auc = success_curve(gt, gt)
    assert curve.tolist() == [1.0] * 101
    assert auc == 1.0
    assert precision(gt, gt) == 1.0
    assert norm_precision_auc(gt, gt) == 1.0
    assert mean_iou(gt, gt) == pytest.approx(1.0)
    assert precision_curve(gt, gt).tolist() == [1.0] * 51


def test_far_misses_score_zero():
    gt = np.array([[0, 0, 10, 10]] * 3, dtype=float)
    pred = gt + [500, 500, 0, 0]
    _, auc = success_curve(pred, gt)
    assert auc == 0.0
    assert precision(pred, gt) == 0.0
    assert norm_precision_auc(pred, gt) == 0.0


def test_normalized_precision_offsets():
    gt = np.array([[0, 0, 20, 10]], dtype=float)
    # half a width along x sits on the last threshold only
    assert norm_precision_auc(gt + [10, 0, 0, 0], gt) == pytest.approx(
        1 / 51)
    assert norm_precision_auc(gt + [10, 5, 0, 0], gt) == 0.0


def test_length_mismatch():
    gt = np.zeros((3, 4)) + [0, 0, 10, 10]
    with pytest.raises(ValueError, match="2 predicted boxes against 3"):
        success_curve(gt[:2], gt)


def test_report_aggregates_are_unweighted_means():
    rng = np.random.default_rng(2)
    metrics = []
    for name, n in (("b", 5), ("a", 40)):
        gt = random_boxes(rng, n)
        metrics.append(sequence_metrics(name, gt + rng.normal(0, 5, gt.shape),
                                        gt))
    report = MetricReport(metrics)
    assert [s.name for s in report.sequences] == ["a", "b"]
    assert report.aggregate()["success_auc"] == pytest.approx(
        (metrics[0].success_auc + metrics[1].success_auc) / 2)
    restored = MetricReport.from_dict(report.to_dict())
    assert restored.aggregate() == report.aggregate()
    with pytest.raises(ValueError, match="schema version"):
        MetricReport.from_dict(dict(report.to_dict(), schema_version=99))
    with pytest.raises(ValueError, match="Unknown curve"):
        report.mean_curve("nope")


@pytest.fixture
def dataset_dir(tmp_path):
    specs = dataset_specs(3, 6, seed=11, distractors=1, canvas_width=128,
                          canvas_height=96)
    return write_dataset(tmp_path / "data", specs)


def test_ground_truth_as_results(dataset_dir, tmp_path):
    results = tmp_path / "results"
    results.mkdir()
    for sequence in load_dataset(dataset_dir):
        np.savetxt(results / f"{sequence.name}.txt", sequence.boxes,
                   delimiter=",", fmt="%.4f")
    report = run_eval(dataset_dir, results)
    aggregate = report.aggregate()
    assert aggregate["success_auc"] == 1.0
    assert aggregate["precision"] == 1.0
    assert aggregate["norm_precision_auc"] == 1.0
    assert aggregate["mean_iou"] == pytest.approx(1.0)
    assert len(report.sequences) == 3


def test_missing_results_are_named(dataset_dir, tmp_path):
    results = tmp_path / "results"
    track_dataset(dataset_dir, results, KeepInitialTracker())
    (results / "seq_001.txt").unlink()
    (results / "seq_002.txt").unlink()
    with pytest.raises(FileNotFoundError, match="seq_001, seq_002"):
        run_eval(dataset_dir, results)


def test_parallel_lanes_match_serial_tracking(dataset_dir, tmp_path,
                                              tiny_net):
    tracker = Tracker(tiny_net)
    serial = track_dataset(dataset_dir, tmp_path / "serial", tracker)
    parallel = track_dataset(dataset_dir, tmp_path / "parallel", tracker,
                             workers=2)
    assert [p.name for p in serial] == [p.name for p in parallel]
    for a, b in zip(serial, parallel):
        assert a.read_text() == b.read_text()


def test_worker_count_must_be_positive(dataset_dir, tmp_path):
    with pytest.raises(ValueError, match="workers"):
        track_dataset(dataset_dir, tmp_path, KeepInitialTracker(),
                      workers=0)
