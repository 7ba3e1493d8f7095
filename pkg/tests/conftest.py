import numpy as np
import pytest

from sqwalk.state import InitialCoinState

LOCALIZED = InitialCoinState(0.5, 0.5j, 0.5j, -0.5)
SYMMETRIC = InitialCoinState(0.5, -0.5, -0.5, 0.5)


def random_states(count: int, seed: int) -> list[InitialCoinState]:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        z = rng.normal(size=4) + 1j * rng.normal(size=4)
        out.append(InitialCoinState.from_sequence(z / np.linalg.norm(z)))
    return out


@pytest.fixture
def localized() -> InitialCoinState:
    return LOCALIZED


@pytest.fixture
def symmetric() -> InitialCoinState:
    return SYMMETRIC
