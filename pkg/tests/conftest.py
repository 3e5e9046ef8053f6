"""Shared fixtures for the depthrank test suite."""

import numpy as np
import pytest

from depthrank.services.datasets import write_dataset
from depthrank.services.model import RngStream


@pytest.fixture
def gen():
    return RngStream(20240601, 0).generator()


@pytest.fixture
def normal_pair(gen):
    """Two independent N₂(0, I₂) samples, m = n = 30."""
    return gen.standard_normal((30, 2)), gen.standard_normal((30, 2))


@pytest.fixture
def five_points_1d():
    return np.array([[1.0], [2.0], [3.0], [4.0], [5.0]])


@pytest.fixture
def write_csv(tmp_path):
    """Write an array to a CSV file under tmp_path and return its path."""

    def _write(name, data, header=None):
        return write_dataset(tmp_path / name, data, header)

    return _write
