import numpy as np
import pytest

from pinyintypo.lexicon import Lexicon, default_lexicon
from pinyintypo.noise import NoiseSpec


@pytest.fixture(scope="session")
def full_lexicon():
    return default_lexicon()


@pytest.fixture()
def small_lexicon():
    return Lexicon(
        ["ni", "hao", "ma", "zao", "shang", "da", "dian", "hua", "gei", "a", "e"]
    )


@pytest.fixture()
def noise_spec():
    return NoiseSpec(rng_seed=0)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
