import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import utils  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(autouse=True)
def single_thread(monkeypatch):
    monkeypatch.setenv(utils.THREADS_ENV, "1")


@pytest.fixture(autouse=True)
def default_config(monkeypatch):
    monkeypatch.setattr(utils, "_hparams", None)
    yield
    utils.get_logger("WARNING")
