import numpy as np
import pytest

from percwalk.lattice import Regime, sample_sequence


@pytest.fixture
def rng():
    return np.random.default_rng(2015)


def random_sequences(count, steps_max, seed=0, regimes=(Regime.STATIC, Regime.DYNAMIC)):
    rng = np.random.default_rng(seed)
    out = []
    for k in range(count):
        regime = regimes[k % len(regimes)]
        p = float(rng.choice([0.0, 0.25, 0.5, 0.75, 1.0]))
        out.append(sample_sequence(regime, p, int(rng.integers(1, steps_max + 1)), seed, k))
    return out
