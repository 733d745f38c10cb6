import json

import pytest
from tompTracker.main import build_parser, main


def test_unknown_flag_exits_with_usage():
    with pytest.raises(SystemExit) as error:
        main(["track", "--dataset", "d", "--output", "o", "--bogus"])
    assert error.value.code == 2


def test_command_is_required():
    with pytest.raises(SystemExit):
        build_parser().parse_args([])


def test_missing_dataset_fails(tmp_path):
    assert main(["eval", "--dataset", str(tmp_path / "absent"),
                 "--results", str(tmp_path)]) == 1


def test_transformer_without_checkpoint_fails(tmp_path):
    assert main(["track", "--dataset", str(tmp_path),
                 "--output", str(tmp_path / "out")]) == 1


def test_synth_track_eval_plot(tmp_path, capsys):
    data = tmp_path / "data"
    assert main(["synth", str(data), "--sequences", "2", "--length", "5",
                 "--width", "128", "--height", "96"]) == 0
    assert sorted(p.name for p in data.iterdir()) == ["seq_000", "seq_001"]

    results = tmp_path / "initial"
    assert main(["track", "--dataset", str(data), "--output", str(results),
                 "--predictor", "initial"]) == 0
    assert (results / "seq_000.txt").exists()

    assert main(["eval", "--dataset", str(data), "--results",
                 str(results)]) == 0
    printed = capsys.readouterr().out
    assert "success_auc:" in printed
    document = json.loads((results / "report.json").read_text())
    assert len(document["sequences"]) == 2

    plots = tmp_path / "plots"
    assert main(["plot", f"initial={results}/report.json",
                 "--output", str(plots)]) == 0
    assert len(list(plots.glob("*_plot.png"))) == 3
