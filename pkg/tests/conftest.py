"""
Pytest configuration file.
"""

import logging

import numpy as np
import pytest

from core.rng import make_rng
from services.corpus.models import LabeledVectorSet, Trial, TrialLabel, TrialList
from services.corpus.synthetic import SynthConfig, generate_synthetic, generate_verification_task
from services.plda.models import PldaModel, TrainConfig


@pytest.fixture(autouse=True)
def isolated_env(monkeypatch, tmp_path):
    """Keep a developer's .env and MOPLDA_* variables out of the tests."""
    monkeypatch.delenv("MOPLDA_LOG_DIR", raising=False)
    monkeypatch.delenv("MOPLDA_LOG_LEVEL", raising=False)
    monkeypatch.chdir(tmp_path)
    yield
    root = logging.getLogger()
    for handler in list(root.handlers):
        if getattr(handler, "_moplda", False):
            root.removeHandler(handler)
            handler.close()


@pytest.fixture
def rng() -> np.random.Generator:
    """Create a seeded generator."""
    return make_rng(12345)


@pytest.fixture
def synth_config() -> SynthConfig:
    """Create a small synthetic corpus configuration."""
    return SynthConfig(n_speakers=30, sessions_per_speaker=4, dim=10, rank=3, noise_scale=0.5, seed=11)


@pytest.fixture
def train_set(synth_config: SynthConfig) -> LabeledVectorSet:
    """Create a small synthetic training set."""
    vectors, _ = generate_synthetic(synth_config)
    return vectors


@pytest.fixture
def train_config() -> TrainConfig:
    """Create test training options."""
    return TrainConfig(rank=3, iterations=5, seed=4)


@pytest.fixture
def task():
    """Create a small verification task with held-out speakers."""
    return generate_verification_task(
        SynthConfig(n_speakers=40, sessions_per_speaker=4, dim=12, rank=3, noise_scale=0.5, seed=5),
        n_eval_speakers=8,
        enroll_sessions=3,
        test_sessions=2
    )


@pytest.fixture
def unit_model() -> PldaModel:
    """Create the 1-dim model F = 1, sigma_w = sigma_b = 1."""
    return PldaModel(mu=[0.0], F=[[1.0]], sigma_w=[[1.0]], sigma_b=[[1.0]])


@pytest.fixture
def labeled_trials() -> TrialList:
    """Create two targets and two nontargets."""
    return TrialList((
        Trial("m1", "t1", TrialLabel.TARGET),
        Trial("m1", "t2", TrialLabel.NONTARGET),
        Trial("m2", "t1", TrialLabel.NONTARGET),
        Trial("m2", "t2", TrialLabel.TARGET),
    ))
