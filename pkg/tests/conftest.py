import numpy as np
import pytest

from hybridris.channel import PathSet


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def two_paths():
    """Two well separated paths on 16 and 32 element arrays."""
    return PathSet(
        aod=np.array([0.3, 1.2]),
        aoa=np.array([0.5, 2.0]),
        gains=np.array([1.0 + 0.5j, -0.7 + 0.2j]),
    )


@pytest.fixture
def small_setup(tmp_path):
    """A custom setup small enough to run a few trials inside a unit test."""
    path = tmp_path / "small.toml"
    path.write_text(
        "[setup]\n"
        'name = "custom"\n'
        "N_B = 16\nN_R = 16\nN_M = 16\n"
        "M = 2\nN_RFR = 2\nK = 2\nT = 4\nN_CB = 4\nN_RFB = 4\n"
        "p_t_dbm = [0.0, 10.0]\n"
        "trials = 2\n"
        "seed = 7\n"
        f'output = "{(tmp_path / "out").as_posix()}"\n'
    )
    return path
