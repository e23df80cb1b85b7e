import math
from pathlib import Path

import numpy as np
import pytest

from parking_garage import Configuration

ROOT = Path(__file__).resolve().parents[1]
A = 1 / math.sqrt(2)


@pytest.fixture
def two_point() -> Configuration:
    return Configuration(np.array([A, -A], dtype=complex), np.array([-1, -1]))


@pytest.fixture
def two_point_path() -> Path:
    return ROOT / "data" / "two_point.json"


def central_difference_jacobian(fun, x: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """Columns d fun / d x_i by central differences (fun returns a real vector)."""
    cols = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        cols.append((fun(x + e) - fun(x - e)) / (2 * h))
    return np.column_stack(cols)
