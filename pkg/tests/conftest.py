import numpy as np
import pytest

from photonrng.bitstream import BitSequence


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def random_sequence(n: int, seed: int = 0, p: float = 0.5) -> BitSequence:
    gen = np.random.default_rng(seed)
    return BitSequence.from_array((gen.random(n) < p).astype(np.uint8))
