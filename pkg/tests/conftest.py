import pytest
import torch

from tompTracker.config import ModelConfig, TrackerConfig, TrainConfig
from tompTracker.config import TransformerConfig
from tompTracker.Models.Entities.tomp_net import TompNet


def tiny_model_config(**overrides) -> ModelConfig:
    transformer = TransformerConfig(
        heads=2, ffn_width=16, dropout=0.0, enc_layers=2, dec_layers=2,
        shared_query=overrides.pop("shared_query", True),
        two_queries=overrides.pop("two_queries", False))
    values = dict(channels=8, backbone_channels=8, score_size=4,
                  extent_hidden=(4, 8), head_width=8, head_kernel=3,
                  transformer=transformer)
    values.update(overrides)
    return ModelConfig(**values)


@pytest.fixture
def model_config():
    return tiny_model_config()


@pytest.fixture
def tiny_net(model_config):
    torch.manual_seed(0)
    return TompNet(model_config).eval()


@pytest.fixture
def tracker_config():
    return TrackerConfig()


@pytest.fixture
def train_config(tmp_path):
    return TrainConfig(
        seed=3, steps=4, batch_size=2, lr=1e-3, window=20,
        num_sequences=2, sequence_length=12, canvas_width=128,
        canvas_height=96, distractors=1, checkpoint_every=2, log_every=1,
        output_dir=str(tmp_path / "run"), model=tiny_model_config())


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False,
                     help="also run the reference training run")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)
