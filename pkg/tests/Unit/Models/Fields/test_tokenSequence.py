import pytest
import torch
from tompTracker.Models.Fields.tokenSequence import (
    TokenSequence,
    build_sequence
)


def maps(count, batch=2, channels=8, size=3):
    torch.manual_seed(0)
    return [torch.randn(batch, channels, size, size) for _ in range(count)]


def test_layout():
    v = maps(3)
    seq = build_sequence(v[:2], v[2])
    assert seq.tokens.shape == (2, 27, 8)
    assert seq.pos.shape == (27, 8)
    assert seq.frame_ids.tolist() == [0] * 9 + [1] * 9 + [2] * 9
    assert seq.num_train_frames == 2
    assert not seq.padding_mask.any()
    assert torch.equal(seq.test_tokens(), v[2])
    assert torch.equal(seq.tokens[:, 9:18], v[1].flatten(2).transpose(1, 2))


def test_positional_encoding_repeats_per_frame():
    v = maps(3)
    seq = build_sequence(v[:2], v[2])
    assert torch.equal(seq.pos[:9], seq.pos[9:18])
    assert torch.equal(seq.pos[:9], seq.pos[18:])


def test_index_mask_excludes_whole_frames():
    v = maps(3)
    seq = build_sequence(v[:2], v[2], [1])
    assert not seq.padding_mask[:, :9].any()
    assert seq.padding_mask[:, 9:18].all()
    assert not seq.padding_mask[:, 18:].any()


def test_per_row_mask():
    v = maps(3)
    spec = torch.tensor([[False, False], [False, True]])
    seq = build_sequence(v[:2], v[2], spec)
    assert not seq.padding_mask[0].any()
    assert seq.padding_mask[1, 9:18].all()


def test_errors():
    v = maps(3)
    with pytest.raises(ValueError):
        build_sequence([], v[2])
    with pytest.raises(ValueError):
        build_sequence([torch.randn(2, 8, 4, 4)], v[2])
    with pytest.raises(ValueError):
        build_sequence(v[:2], v[2], [2])
    with pytest.raises(ValueError):
        build_sequence(v[:2], v[2], torch.zeros(2, 3, dtype=torch.bool))


def test_test_tokens_follow_frame_ids():
    v = maps(3)
    seq = build_sequence(v[:2], v[2])
    # test frame first, training frames after
    order = torch.cat([torch.arange(18, 27), torch.arange(18)])
    moved = TokenSequence(seq.tokens[:, order], seq.pos[order],
                          seq.frame_ids[order], seq.padding_mask[:, order],
                          seq.grid)
    assert moved.num_train_frames == 2
    assert torch.equal(moved.test_tokens(), v[2])
    short = TokenSequence(seq.tokens[:, :20], seq.pos[:20],
                          seq.frame_ids[:20], seq.padding_mask[:, :20],
                          seq.grid)
    with pytest.raises(ValueError, match="test tokens"):
        short.test_tokens()
