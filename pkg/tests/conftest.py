import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from kuniform import fixtures

settings.register_profile(
    "repo",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
    derandomize=True,
)
settings.load_profile("repo")

FIXTURE_DIR = fixtures.fixture_dir()


@pytest.fixture
def fixture_dir():
    return FIXTURE_DIR


def complex_pauli(label: int) -> np.ndarray:
    """Textbook 2x2 Pauli matrices, typed in independently of the package tables."""
    return {
        0: np.array([[1, 0], [0, 1]], dtype=complex),
        1: np.array([[0, 1], [1, 0]], dtype=complex),
        2: np.array([[0, -1j], [1j, 0]], dtype=complex),
        3: np.array([[1, 0], [0, -1]], dtype=complex),
    }[label]


def complex_word(labels, phase: int = 0) -> np.ndarray:
    out = np.array([[1j**phase]], dtype=complex)
    for a in labels:
        out = np.kron(out, complex_pauli(a))
    return out
