import pathlib

import numpy as np
import pytest

from shearctl import _kernels
from shearctl.dynamics import BuildingModel, assemble_matrices
from shearctl.models import benchmark_model

DATA = pathlib.Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def model():
    return benchmark_model()


@pytest.fixture(scope="session")
def mats(model):
    return assemble_matrices(model)


@pytest.fixture(scope="session")
def data_dir():
    return DATA


@pytest.fixture(params=_kernels.available_backends())
def backend(request):
    """Run a test once per available stepping backend."""
    previous = _kernels.get_backend()
    _kernels.set_backend(request.param)
    yield request.param
    _kernels.set_backend(previous)


def random_chain(rng, n=None):
    """A random well-posed shear building for property-style tests."""
    n = n or int(rng.integers(2, 7))
    masses = rng.uniform(1e3, 5e4, n)
    stiffnesses = rng.uniform(1e5, 1e7, n)
    modes = sorted(rng.choice(np.arange(1, n + 1), size=2, replace=False))
    zetas = rng.uniform(0.005, 0.08, 2)
    n_act = int(rng.integers(1, n + 1))
    stories = np.sort(rng.choice(np.arange(1, n + 1), size=n_act, replace=False))
    return BuildingModel(
        masses=masses,
        stiffnesses=stiffnesses,
        damping_spec=((int(modes[0]), float(zetas[0])), (int(modes[1]), float(zetas[1]))),
        actuator_stories=tuple(int(s) for s in stories),
    )
