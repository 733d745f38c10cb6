import pytest
from tompTracker.Models.Fields.boxXYWH import BoxXYWH
from tompTracker.Views.results import ResultsFile, read_results, write_results


def test_fixed_decimals():
    text = ResultsFile([BoxXYWH(1, 2.5, 30, 40.123456)]).to_text()
    assert text == "1.0000,2.5000,30.0000,40.1235\n"


def test_written_boxes_read_back(tmp_path):
    boxes = [BoxXYWH(1, 2, 3, 4), BoxXYWH(5.25, 6, 7, 8)]
    path = write_results(tmp_path / "out" / "seq.txt", boxes)
    values = read_results(path)
    assert values.shape == (2, 4)
    assert values[1].tolist() == [5.25, 6, 7, 8]


def test_malformed_line(tmp_path):
    path = tmp_path / "seq.txt"
    path.write_text("1,2,3,4\n1,2,3\n")
    with pytest.raises(ValueError, match=":2: expected x,y,w,h"):
        read_results(path)
